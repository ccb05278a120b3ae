"""Permanent-based reference amplitudes for linear-optical circuits.

Kept deliberately separate from :mod:`hyperconc.optics`: amplitudes here come
from matrix permanents, not from expanding creation-operator products.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Sequence

import numpy as np

MAX_ORDER = 12


def permanent(matrix) -> complex:
    """Permanent of a square matrix by Ryser's formula in Gray-code order.

    Walking subsets in Gray-code order changes one column per step, so each
    row-sum update is O(n) and the whole evaluation is O(2^n n).
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    if n > MAX_ORDER:
        raise ValueError(f"matrix order {n} exceeds cap {MAX_ORDER}")

    row_sums = np.zeros(n, dtype=complex)
    in_subset = np.zeros(n, dtype=bool)
    total = 0j
    for k in range(1, 2**n):
        # column toggled between Gray codes k-1 and k
        j = (k & -k).bit_length() - 1
        if in_subset[j]:
            row_sums -= a[:, j]
        else:
            row_sums += a[:, j]
        in_subset[j] = not in_subset[j]
        size = int(np.count_nonzero(in_subset))
        sign = -1 if (n - size) % 2 else 1
        total += sign * np.prod(row_sums)
    return complex(total)


def permanent_bruteforce(matrix) -> complex:
    """Sum over all permutations. Only for cross-checking small matrices."""
    from itertools import permutations

    a = np.asarray(matrix, dtype=complex)
    n = a.shape[0]
    return complex(sum(np.prod([a[i, p[i]] for i in range(n)]) for p in permutations(range(n))))


def _expand(occ: Sequence[int]) -> list[int]:
    return [i for i, k in enumerate(occ) for _ in range(k)]


def transition_amplitude(unitary, input_occ: Sequence[int], output_occ: Sequence[int]) -> complex:
    """<output| U |input> for occupation vectors over the modes of ``unitary``.

    Columns of ``unitary`` are repeated by input occupancy, rows by output
    occupancy, and the permanent of the resulting submatrix is divided by
    ``sqrt(prod n_i! prod m_j!)``.
    """
    u = np.asarray(unitary, dtype=complex)
    m = u.shape[0]
    if u.shape != (m, m) or len(input_occ) != m or len(output_occ) != m:
        raise ValueError("unitary and occupation vectors have inconsistent dimensions")
    if sum(input_occ) != sum(output_occ):
        raise ValueError("input and output photon numbers differ")
    sub = u[np.ix_(_expand(output_occ), _expand(input_occ))]
    norm = math.prod(math.factorial(k) for k in input_occ) * math.prod(
        math.factorial(k) for k in output_occ
    )
    return permanent(sub) / math.sqrt(norm)


def occupations(n_photons: int, n_modes: int) -> Iterator[tuple[int, ...]]:
    """All occupation vectors with ``n_photons`` over ``n_modes``, lexicographic."""
    if n_modes == 0:
        if n_photons == 0:
            yield ()
        return
    for first in range(n_photons, -1, -1):
        for rest in occupations(n_photons - first, n_modes - 1):
            yield (first,) + rest


def output_distribution(unitary, input_occ: Sequence[int]) -> dict[tuple[int, ...], complex]:
    """Amplitudes of every output occupation for one input occupation."""
    m = len(input_occ)
    return {
        out: transition_amplitude(unitary, input_occ, out)
        for out in occupations(sum(input_occ), m)
    }
