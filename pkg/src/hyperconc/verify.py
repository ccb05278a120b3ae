"""Randomized cross-check of circuit application against the permanent oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import oracle
from .fock import FockState, ModeId, ModeTable
from .optics import (
    Element,
    OpticalCircuit,
    apply_circuit,
    beam_splitter,
    hwp45,
    pbs0,
    pbs45,
    phase,
    swap_paths,
)


def small_table(n_modes: int) -> ModeTable:
    """A table with ``n_modes`` modes (multiple of 2, at most 8)."""
    if n_modes not in (2, 4, 6, 8):
        raise ValueError("n_modes must be 2, 4, 6 or 8")
    modes = [
        ModeId(party, 1, sp, pol)
        for party in (0, 1)
        for sp in ("u", "d")
        for pol in ("H", "V")
    ]
    return ModeTable(tuple(modes[:n_modes]))


def random_circuit(table: ModeTable, rng: np.random.Generator, depth: int = 8) -> OpticalCircuit:
    """Random sequence of elements over ``table``, with random phases mixed in."""
    paths = sorted({m.path for m in table.modes})
    elements: list[Element] = []
    one_path = [pbs45, hwp45]
    two_path = [beam_splitter, pbs0, swap_paths] if len(paths) > 1 else []
    for _ in range(depth):
        ctor = (one_path + two_path)[rng.integers(len(one_path) + len(two_path))]
        if ctor in two_path:
            a, b = rng.choice(len(paths), size=2, replace=False)
            elements.append(ctor(paths[a], paths[b]))
        else:
            elements.append(ctor(paths[rng.integers(len(paths))]))
        k = rng.integers(1, len(table) + 1)
        picked = rng.choice(len(table), size=k, replace=False)
        elements.append(phase([table.modes[i] for i in sorted(picked)], rng.uniform(0, 2 * math.pi)))
    return OpticalCircuit.from_elements(table, elements)


def random_state(table: ModeTable, n_photons: int, rng: np.random.Generator, n_terms: int = 3) -> FockState:
    m = len(table)
    terms = {}
    for _ in range(n_terms):
        occ = np.bincount(rng.integers(m, size=n_photons), minlength=m)
        terms[tuple(int(x) for x in occ)] = complex(rng.normal(), rng.normal())
    return FockState(table, terms).normalized()


@dataclass
class VerifyReport:
    trials: int
    seed: int | None
    max_amplitude_deviation: float
    max_completeness_deviation: float
    max_norm_deviation: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def compare(circuit: OpticalCircuit, state: FockState) -> tuple[float, float, float]:
    """(max amplitude deviation, max completeness deviation, norm deviation)."""
    got = apply_circuit(circuit, state)
    expected: dict[tuple[int, ...], complex] = {}
    completeness = 0.0
    for occ_in, amp_in in state.items():
        dist = oracle.output_distribution(circuit.unitary, occ_in)
        completeness = max(completeness, abs(sum(abs(a) ** 2 for a in dist.values()) - 1.0))
        for occ_out, a in dist.items():
            expected[occ_out] = expected.get(occ_out, 0j) + amp_in * a
    keys = set(expected) | {occ for occ, _ in got.items()}
    dev = max((abs(got.amplitude(k) - expected.get(k, 0j)) for k in keys), default=0.0)
    return dev, completeness, abs(got.norm2() - state.norm2())


def run(trials: int, seed: int | None = None, max_modes: int = 8, max_photons: int = 4) -> VerifyReport:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    worst = [0.0, 0.0, 0.0]
    for _ in range(trials):
        m = int(rng.choice([k for k in (2, 4, 6, 8) if k <= max_modes]))
        table = small_table(m)
        n = int(rng.integers(1, max_photons + 1))
        result = compare(random_circuit(table, rng), random_state(table, n, rng))
        worst = [max(w, r) for w, r in zip(worst, result)]
    return VerifyReport(trials, seed, *worst)
