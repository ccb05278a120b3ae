"""Linear-optical elements, circuits, and their action on Fock states.

A circuit is a dense unitary ``U`` over the modes of a :class:`ModeTable`.
Applying it substitutes every input creation operator ``a_i^dag`` with
``sum_j U[j, i] b_j^dag`` and expands the product.

Conventions:

* BeamSplitter (first path = "up" input): ``u -> (u + d)/sqrt2``,
  ``d -> (u - d)/sqrt2``, independently for H and V.
* PBS0 between paths A and B: H stays on its own path, V crosses over.
  No reflection phase.
* PBS45 on one path: H/V are rewritten in the diagonal basis, and the H and V
  slots of that path then hold the transmitted ``|+>`` and reflected ``|->``
  ports.
* HalfWavePlate45 swaps H and V on one path.
* Relabel swaps pairs of modes. Phase multiplies modes by ``exp(i*phi)``.
"""

from __future__ import annotations

import cmath
import json
import math
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .fock import FockState, ModeId, ModeTable, ModeTableMismatch, path_modes

UNITARY_TOL = 1e-12
_S = 1.0 / math.sqrt(2.0)
_COLUMN_EPS = 1e-15


class Kind(str, Enum):
    BEAM_SPLITTER = "BeamSplitter"
    PBS0 = "PBS0"
    PBS45 = "PBS45"
    HWP45 = "HalfWavePlate45"
    RELABEL = "Relabel"
    PHASE = "Phase"


_ARITY = {
    Kind.BEAM_SPLITTER: 4,
    Kind.PBS0: 4,
    Kind.PBS45: 2,
    Kind.HWP45: 2,
}


@dataclass(frozen=True)
class Element:
    """One optical element acting on ``modes``.

    Mode order matters: BeamSplitter and PBS0 take ``(A:H, A:V, B:H, B:V)``
    for paths A and B; PBS45 and HWP45 take ``(H, V)`` of one path; Relabel
    takes consecutive pairs to swap; Phase takes any modes.
    """

    kind: Kind
    modes: tuple[ModeId, ...]
    parameter: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "modes", tuple(self.modes))
        if len(set(self.modes)) != len(self.modes):
            raise ValueError(f"{self.kind.value}: repeated mode")
        arity = _ARITY.get(self.kind)
        if arity is not None and len(self.modes) != arity:
            raise ValueError(f"{self.kind.value} acts on {arity} modes, got {len(self.modes)}")
        if self.kind is Kind.RELABEL and len(self.modes) % 2:
            raise ValueError("Relabel needs pairs of modes")
        if arity == 2 or arity == 4:
            # each group of two must be the H, V pair of one path
            for k in range(0, arity, 2):
                h, v = self.modes[k], self.modes[k + 1]
                if (h.pol, v.pol) != ("H", "V") or h.path != v.path:
                    raise ValueError(f"{self.kind.value}: modes must be (H, V) pairs of one path")

    def local_matrix(self) -> np.ndarray:
        if self.kind is Kind.BEAM_SPLITTER:
            # columns: inputs (uH, uV, dH, dV); rows: outputs in the same order
            m = np.zeros((4, 4), dtype=complex)
            for p in (0, 1):
                u, d = p, 2 + p
                m[u, u] = _S
                m[d, u] = _S
                m[u, d] = _S
                m[d, d] = -_S
            return m
        if self.kind is Kind.PBS0:
            # A:H -> A:H, B:H -> B:H, A:V -> B:V, B:V -> A:V
            return np.array(
                [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
            )
        if self.kind is Kind.PBS45:
            # H = (+ + -)/sqrt2, V = (+ - -)/sqrt2; row 0 is the + port, row 1 the - port
            return np.array([[_S, _S], [_S, -_S]], dtype=complex)
        if self.kind is Kind.HWP45:
            return np.array([[0, 1], [1, 0]], dtype=complex)
        if self.kind is Kind.RELABEL:
            n = len(self.modes)
            m = np.zeros((n, n), dtype=complex)
            for k in range(0, n, 2):
                m[k + 1, k] = 1
                m[k, k + 1] = 1
            return m
        if self.kind is Kind.PHASE:
            return np.eye(len(self.modes), dtype=complex) * cmath.exp(1j * self.parameter)
        raise ValueError(f"unknown element kind {self.kind}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "modes": [mode.label for mode in self.modes],
            "parameter": self.parameter,
        }

    @classmethod
    def from_dict(cls, data) -> Element:
        return cls(Kind(data["kind"]), tuple(ModeId.parse(s) for s in data["modes"]), data["parameter"])


# element constructors

Path = tuple[int, int, str]


def beam_splitter(up: Path, down: Path) -> Element:
    return Element(Kind.BEAM_SPLITTER, path_modes(up) + path_modes(down))


def pbs0(a: Path, b: Path) -> Element:
    return Element(Kind.PBS0, path_modes(a) + path_modes(b))


def pbs45(path: Path) -> Element:
    return Element(Kind.PBS45, path_modes(path))


def hwp45(path: Path) -> Element:
    return Element(Kind.HWP45, path_modes(path))


def relabel(pairs: Iterable[tuple[ModeId, ModeId]]) -> Element:
    return Element(Kind.RELABEL, tuple(m for pair in pairs for m in pair))


def swap_paths(a: Path, b: Path) -> Element:
    return relabel(zip(path_modes(a), path_modes(b)))


def phase(modes: Iterable[ModeId], phi: float) -> Element:
    return Element(Kind.PHASE, tuple(modes), float(phi))


def element_matrix(e: Element, table: ModeTable) -> np.ndarray:
    """Embed ``e`` as an m x m unitary; identity outside the acted modes."""
    idx = table.indices(e.modes)
    u = np.eye(len(table), dtype=complex)
    u[np.ix_(idx, idx)] = e.local_matrix()
    return u


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))) <= tol


@dataclass(frozen=True, eq=False)
class OpticalCircuit:
    table: ModeTable
    unitary: np.ndarray
    elements: tuple[Element, ...] = ()

    @classmethod
    def identity(cls, table: ModeTable) -> OpticalCircuit:
        return cls(table, np.eye(len(table), dtype=complex))

    @classmethod
    def from_elements(cls, table: ModeTable, elements: Sequence[Element]) -> OpticalCircuit:
        u = np.eye(len(table), dtype=complex)
        for e in elements:
            u = element_matrix(e, table) @ u
        return cls(table, u, tuple(elements))

    @cached_property
    def columns(self) -> list[list[tuple[int, complex]]]:
        return _columns(self.unitary)

    def then(self, *elements: Element) -> OpticalCircuit:
        return compose(self, OpticalCircuit.from_elements(self.table, elements))

    def element_log(self) -> str:
        return json.dumps([e.to_dict() for e in self.elements])


def compose(a: OpticalCircuit, b: OpticalCircuit) -> OpticalCircuit:
    """``a`` followed by ``b``."""
    if a.table != b.table:
        raise ModeTableMismatch("circuits act on different mode tables")
    return OpticalCircuit(a.table, b.unitary @ a.unitary, a.elements + b.elements)


def _columns(u: np.ndarray) -> list[list[tuple[int, complex]]]:
    cols = []
    for i in range(u.shape[1]):
        nz = np.nonzero(np.abs(u[:, i]) > _COLUMN_EPS)[0]
        cols.append([(int(j), complex(u[j, i])) for j in nz])
    return cols


def _sqrt_factorials(occ) -> float:
    out = 1.0
    for n in occ:
        if n > 1:
            out *= math.factorial(n)
    return math.sqrt(out)


def apply_unitary(u: np.ndarray, s: FockState, columns=None) -> FockState:
    """Propagate ``s`` through the mode transformation ``u``.

    Each term is expanded photon by photon, merging equal output monomials
    after every substitution so the intermediate map never outgrows the
    output support.
    """
    m = len(s.table)
    if u.shape != (m, m):
        raise ModeTableMismatch(f"unitary is {u.shape}, state has {m} modes")
    cols = columns if columns is not None else _columns(u)
    out: dict[tuple[int, ...], complex] = defaultdict(complex)
    for occ, amp in s.items():
        # monomial coefficients (unnormalized creation-operator products)
        poly: dict[tuple[int, ...], complex] = {(0,) * m: amp / _sqrt_factorials(occ)}
        for i, n in enumerate(occ):
            for _ in range(n):
                nxt: dict[tuple[int, ...], complex] = defaultdict(complex)
                for mono, c in poly.items():
                    for j, uji in cols[i]:
                        lst = list(mono)
                        lst[j] += 1
                        nxt[tuple(lst)] += c * uji
                poly = nxt
        for mono, c in poly.items():
            out[mono] += c * _sqrt_factorials(mono)
    return FockState._trusted(s.table, out)


def apply_circuit(c: OpticalCircuit, s: FockState) -> FockState:
    if c.table != s.table:
        raise ModeTableMismatch("circuit and state use different mode tables")
    return apply_unitary(c.unitary, s, c.columns)
