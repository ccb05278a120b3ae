"""Hyperconcentration of N-photon hyperentangled GHZ states.

The parties share partially entangled states
``(a|H..H> + b|V..V>) (x) (d|u..u> + e|d..d>)``. Two variants are supported:

* ``two-copies``: every party holds one photon from each of two identical
  copies. The second copy is flipped in both degrees of freedom. Party 0 runs
  a PPC on its two photons and party 1 an SPC, and every other party measures
  its second photon with an SPM.
* ``auxiliary``: with the coefficients known, parties 0 and 1 receive a
  prepared two-photon auxiliary state ``(a|VV> + b|HH>)(d|dd> + e|uu>)`` and
  run the PPC and the SPC against it.

In both variants an accepted run leaves the copy-1 photons in the maximally
hyperentangled GHZ state once party 0 applies a sigma_z in polarization
and/or path.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from .devices import (
    DetectionEvent,
    DetectorModel,
    Device,
    build_improved_ppc,
    build_ppc,
    build_spc,
    build_spm,
    classify_event,
)
from .fock import (
    FockState,
    ModeId,
    ModeTable,
    StateParams,
    fidelity,
    measurement_outcomes,
    path_modes,
    tensor,
)
from .optics import OpticalCircuit, apply_circuit, compose, hwp45, phase, swap_paths

log = logging.getLogger(__name__)

SIGN_TOL = 1e-9


class Variant(str, Enum):
    TWO_COPIES = "two-copies"
    AUXILIARY = "auxiliary"


class PPCVariant(str, Enum):
    PLAIN = "plain"
    IMPROVED = "improved"


class SignConventionError(RuntimeError):
    """The sign read off a collapsed state disagrees with the outcome-parity rule."""


@dataclass(frozen=True)
class ProtocolConfig:
    n: int
    params: StateParams
    detector: DetectorModel = DetectorModel.PNR
    ppc: PPCVariant = PPCVariant.PLAIN
    variant: Variant = Variant.TWO_COPIES
    shots: int | None = None
    seed: int | None = None
    spc_extra_splitters: bool = False

    def __post_init__(self):
        object.__setattr__(self, "detector", DetectorModel(self.detector))
        object.__setattr__(self, "ppc", PPCVariant(self.ppc))
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.n < 2:
            raise ValueError("the protocol needs at least two parties")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shot count must be at least 1")

    def to_dict(self) -> dict:
        p = self.params
        return {
            "n": self.n,
            "alpha": [p.alpha.real, p.alpha.imag],
            "beta": [p.beta.real, p.beta.imag],
            "delta": [p.delta.real, p.delta.imag],
            "eta": [p.eta.real, p.eta.imag],
            "detector": self.detector.value,
            "ppc": self.ppc.value,
            "variant": self.variant.value,
            "spc_extra_splitters": self.spc_extra_splitters,
            "shots": self.shots,
            "seed": self.seed,
        }


@dataclass
class ProtocolOutcome:
    branch_id: str
    detections: dict[str, DetectionEvent]
    probability: float
    collapsed: FockState
    accepted: bool
    ambiguous: bool = False
    p: int | None = None
    q: int | None = None
    P: int | None = None
    Q: int | None = None
    ghz_form: bool = False
    corrections: dict[str, bool] = field(default_factory=dict)
    fidelity_after_correction: float | None = None

    def to_dict(self, include_state: bool = True) -> dict:
        d = {
            "branch_id": self.branch_id,
            "accepted": self.accepted,
            "ambiguous": self.ambiguous,
            "probability": self.probability,
            "detections": {k: v.to_dict() for k, v in self.detections.items()},
        }
        if self.accepted:
            d.update(
                p=self.p,
                q=self.q,
                P=self.P,
                Q=self.Q,
                ghz_form=self.ghz_form,
                corrections=self.corrections,
                fidelity_after_correction=self.fidelity_after_correction,
            )
            if include_state:
                d["collapsed"] = self.collapsed.to_dict()
        return d


@dataclass
class ProtocolResult:
    config: ProtocolConfig
    outcomes: list[ProtocolOutcome]

    @property
    def accepted(self) -> list[ProtocolOutcome]:
        return [o for o in self.outcomes if o.accepted]

    @property
    def success_probability(self) -> float:
        return math.fsum(o.probability for o in self.outcomes if o.accepted)

    @property
    def false_accept_probability(self) -> float:
        return math.fsum(o.probability for o in self.outcomes if o.ambiguous)

    @property
    def total_probability(self) -> float:
        return math.fsum(o.probability for o in self.outcomes)

    def summary(self) -> dict:
        acc = self.accepted
        fids = [o.fidelity_after_correction for o in acc]
        p_succ = self.success_probability
        return {
            "success_probability": p_succ,
            "success_formula": self.config.params.success_formula(),
            "false_accept_probability": self.false_accept_probability,
            "total_probability": self.total_probability,
            "accepted_branches": len(acc),
            "rejected_branches": len(self.outcomes) - len(acc),
            "min_fidelity": min(fids) if fids else None,
            "mean_fidelity": (
                math.fsum(o.probability * o.fidelity_after_correction for o in acc) / p_succ
                if acc
                else None
            ),
        }

    def to_dict(self, include_states: bool = True) -> dict:
        return {
            "config": self.config.to_dict(),
            "summary": self.summary(),
            "sign_rule": SIGN_RULE,
            "branches": [o.to_dict(include_states) for o in self.outcomes],
        }


SIGN_RULE = {
    "p": "parity of '-' polarization outcomes at the PPC and SPC detectors",
    "q": "parity of -' outcomes (beam-splitter down port) at the PPC and SPC detectors",
    "P": "parity of '-' polarization outcomes over all measured second photons",
    "Q": "parity of -' spatial outcomes over all measured second photons",
    "correction": "party 0, copy-1 photon: sigma_z(pol) if P=1, sigma_z(path) if Q=1",
}


# state preparation


def paths(party: int, copy: int, aux: bool = False):
    if aux:
        return ((party, copy, "ua"), (party, copy, "da"))
    return ((party, copy, "u"), (party, copy, "d"))


def _ghz_occ(table: ModeTable, slots, pol: str, spatial: str, flip_slots=()) -> tuple[int, ...]:
    occ = [0] * len(table)
    for party, copy in slots:
        sp = spatial
        if (party, copy) in flip_slots:
            sp = "d" if spatial == "u" else "u"
        occ[table.index(ModeId(party, copy, sp, pol))] += 1
    return tuple(occ)


def ghz_product(table: ModeTable, slots, params: StateParams) -> FockState:
    """(alpha|H..H> + beta|V..V>)(delta|u..u> + eta|d..d>) over photon ``slots``."""
    terms = {}
    for pol, cp in (("H", params.alpha), ("V", params.beta)):
        for sp, cs in (("u", params.delta), ("d", params.eta)):
            terms[_ghz_occ(table, slots, pol, sp)] = cp * cs
    return FockState(table, terms)


def protocol_table(n: int, variant: Variant = Variant.TWO_COPIES, ppc=PPCVariant.PLAIN, spc_extra=False) -> ModeTable:
    variant = Variant(variant)
    if variant is Variant.TWO_COPIES:
        base = ModeTable.standard(n, copies=(1, 2)).modes
    else:
        base = ModeTable.standard(n, copies=(1,)).modes + tuple(
            ModeId(party, 2, sp, pol) for party in (0, 1) for sp in ("u", "d") for pol in ("H", "V")
        )
    extra = []
    if PPCVariant(ppc) is PPCVariant.IMPROVED:
        extra += [ModeId(0, 2, sp, pol) for sp in ("ua", "da") for pol in ("H", "V")]
    if spc_extra:
        extra += [ModeId(1, 2, sp, pol) for sp in ("ua", "da") for pol in ("H", "V")]
    return ModeTable(base + tuple(extra))


def build_input(n: int, params: StateParams, table: ModeTable | None = None, copy: int = 1) -> FockState:
    """The N-photon partially hyperentangled GHZ state of one copy."""
    if n < 2:
        raise ValueError("need at least two parties")
    if table is None:
        table = ModeTable.standard(n, copies=(copy,))
    return ghz_product(table, [(k, copy) for k in range(n)], params)


@lru_cache(maxsize=64)
def target_state(n: int, table: ModeTable | None = None) -> FockState:
    """The maximally hyperentangled N-photon GHZ state on copy-1 photons."""
    return build_input(n, StateParams.balanced(), table)


def flip_circuit(table: ModeTable, parties, copy: int = 2) -> OpticalCircuit:
    """HWP45 on every path of ``copy`` and a u<->d rename for each listed party."""
    elements = []
    for k in parties:
        u, d = paths(k, copy)
        elements += [hwp45(u), hwp45(d), swap_paths(u, d)]
    return OpticalCircuit.from_elements(table, elements)


def flip_second_copy(s: FockState) -> FockState:
    parties = sorted({m.party for m in s.table.modes if m.copy == 2 and m.spatial in ("u", "d")})
    if not parties:
        raise ValueError("state has no copy-2 modes to flip")
    return apply_circuit(flip_circuit(s.table, parties), s)


def joint_state(n: int, params: StateParams, table: ModeTable) -> FockState:
    first = build_input(n, params, table, copy=1)
    second = flip_second_copy(build_input(n, params, table, copy=2))
    return tensor(first, second)


def auxiliary_state(params: StateParams, table: ModeTable) -> FockState:
    """(alpha|VV> + beta|HH>)(delta|d d> + eta|u u>) on the copy-2 photons of parties 0, 1."""
    terms = {}
    slots = [(0, 2), (1, 2)]
    for pol, cp in (("V", params.alpha), ("H", params.beta)):
        for sp, cs in (("d", params.delta), ("u", params.eta)):
            terms[_ghz_occ(table, slots, pol, sp)] = cp * cs
    return FockState(table, terms)


# sign bookkeeping


def photon_slots(table: ModeTable) -> list[tuple[int, int]]:
    return sorted({(m.party, m.copy) for m in table.modes if m.spatial in ("u", "d")})


@lru_cache(maxsize=64)
def _ghz_keys(table: ModeTable) -> dict[tuple[str, str], tuple[int, ...]]:
    slots = photon_slots(table)
    return {
        (pol, sp): _ghz_occ(table, slots, pol, sp) for pol in ("H", "V") for sp in ("u", "d")
    }


def ghz_signs(s: FockState) -> tuple[int, int] | None:
    """Read (pol, path) sign bits off a GHZ(x)GHZ state, or None if it has another shape.

    The state must be proportional to
    ``|H,u> + (-1)^P |V,u> + (-1)^Q |H,d> + (-1)^(P+Q) |V,d>`` summed over all
    photon slots of its table, up to a global phase.
    """
    if len(s) != 4:
        return None
    amp = {k: s.amplitude(occ) for k, occ in _ghz_keys(s.table).items()}
    ref = amp["H", "u"]
    if abs(ref) < SIGN_TOL:
        return None
    ratios = {k: v / ref for k, v in amp.items()}

    def bit(r):
        if abs(r - 1) < SIGN_TOL:
            return 0
        if abs(r + 1) < SIGN_TOL:
            return 1
        return None

    P, Q = bit(ratios["V", "u"]), bit(ratios["H", "d"])
    if P is None or Q is None or bit(ratios["V", "d"]) != (P ^ Q):
        return None
    return P, Q


def _parities(events) -> tuple[int, int]:
    tags = [t for ev in events for t in ev.outcome_tags]
    return (
        sum(t.pol == "-" for t in tags) % 2,
        sum(t.spatial == "-" for t in tags) % 2,
    )


@lru_cache(maxsize=64)
def correction_circuit(table: ModeTable, pol_flip: bool, path_flip: bool) -> OpticalCircuit:
    """sigma_z in polarization and/or path on party 0's copy-1 photon."""
    elements = []
    if pol_flip:
        elements.append(phase([ModeId(0, 1, sp, "V") for sp in ("u", "d")], math.pi))
    if path_flip:
        elements.append(phase(path_modes((0, 1, "d")), math.pi))
    return OpticalCircuit.from_elements(table, elements)


# exact engine


def _devices(config: ProtocolConfig, table: ModeTable) -> tuple[Device, Device]:
    build = build_improved_ppc if config.ppc is PPCVariant.IMPROVED else build_ppc
    ppc = build(table, paths(0, 1), paths(0, 2))
    spc = build_spc(table, paths(1, 1), paths(1, 2), extra_splitters=config.spc_extra_splitters)
    return ppc, spc


def _branch_id(*patterns) -> str:
    return "-".join("".join(str(c) for c in pat) for pat in patterns)


def _check_signs(state: FockState, rule: tuple[int, int], where: str) -> bool:
    signs = ghz_signs(state)
    if signs is None:
        return False
    if signs != rule:
        raise SignConventionError(f"{where}: state signs {signs} but outcome parity gives {rule}")
    return True


def run_exact(config: ProtocolConfig) -> ProtocolResult:
    """Enumerate every detection branch of the protocol with exact probabilities."""
    n = config.n
    table = protocol_table(n, config.variant, config.ppc, config.spc_extra_splitters)
    if config.variant is Variant.TWO_COPIES:
        state = joint_state(n, config.params, table)
    else:
        state = tensor(
            build_input(n, config.params, table, copy=1), auxiliary_state(config.params, table)
        )
    ppc, spc = _devices(config, table)
    after = apply_circuit(compose(ppc.circuit, spc.circuit), state)
    det_modes = ppc.layout.detector_modes + spc.layout.detector_modes
    n_ppc = len(ppc.layout.detector_modes)

    spm_parties = list(range(2, n)) if config.variant is Variant.TWO_COPIES else []
    outcomes: list[ProtocolOutcome] = []
    for counts, prob, rest in measurement_outcomes(after, det_modes):
        ev_a = classify_event(ppc.layout, config.detector, counts[:n_ppc])
        ev_b = classify_event(spc.layout, config.detector, counts[n_ppc:])
        head = {"ppc": ev_a, "spc": ev_b}
        if not (ev_a.accepted and ev_b.accepted):
            outcomes.append(
                ProtocolOutcome(_branch_id(counts[:n_ppc], counts[n_ppc:]), head, prob, rest, False)
            )
            continue
        p, q = _parities([ev_a, ev_b])
        mid_ok = _check_signs(rest, (p, q), "after parity checks")
        outcomes.extend(
            _finish_branch(config, head, (counts[:n_ppc], counts[n_ppc:]), prob, rest, spm_parties, p, q, mid_ok)
        )
    log.debug("run_exact n=%d: %d branches", n, len(outcomes))
    return ProtocolResult(config, outcomes)


def _finish_branch(config, head, patterns, prob, rest, spm_parties, p, q, mid_ok):
    n = config.n
    table = rest.table
    spms = [build_spm(table, paths(k, 2)) for k in spm_parties]
    if spms:
        circuit = spms[0].circuit
        for dev in spms[1:]:
            circuit = compose(circuit, dev.circuit)
        measured = apply_circuit(circuit, rest)
        det_modes = tuple(m for dev in spms for m in dev.layout.detector_modes)
        finals = measurement_outcomes(measured, det_modes)
    else:
        finals = [((), 1.0, rest)]

    out = []
    for counts, p_spm, final in finals:
        events = dict(head)
        for k, dev in zip(spm_parties, spms):
            i = det_modes.index(dev.layout.detector_modes[0])
            events[f"spm{k}"] = classify_event(dev.layout, config.detector, counts[i : i + 4])
        P, Q = _parities(events.values())
        ghz = mid_ok and _check_signs(final, (P, Q), "after single-photon measurements")
        fixed = apply_circuit(correction_circuit(final.table, bool(P), bool(Q)), final)
        fid = fidelity(fixed, target_state(n, final.table))
        ambiguous = any(ev.ambiguous for ev in events.values())
        spm_patterns = [counts[i : i + 4] for i in range(0, len(counts), 4)]
        out.append(
            ProtocolOutcome(
                branch_id=_branch_id(*patterns, *spm_patterns),
                detections=events,
                probability=prob * p_spm,
                collapsed=final,
                accepted=True,
                ambiguous=ambiguous,
                p=p,
                q=q,
                P=P,
                Q=Q,
                ghz_form=ghz,
                corrections={"polarization": bool(P), "spatial": bool(Q)},
                fidelity_after_correction=fid,
            )
        )
    return out


def run_auxiliary(config: ProtocolConfig) -> ProtocolResult:
    if config.variant is not Variant.AUXILIARY:
        config = ProtocolConfig(**{**config.__dict__, "variant": Variant.AUXILIARY})
    return run_exact(config)


def success_probability(config: ProtocolConfig) -> float:
    return run_exact(config).success_probability


# sampling


@dataclass
class ShotsResult:
    exact: ProtocolResult
    shots: int
    seed: int | None
    counts: dict[str, int]
    successes: int

    @property
    def empirical_success_rate(self) -> float:
        return self.successes / self.shots

    def binomial_sigma(self) -> float:
        p = self.exact.success_probability
        return math.sqrt(p * (1 - p) / self.shots)

    def to_dict(self, include_states: bool = False) -> dict:
        d = self.exact.to_dict(include_states)
        d["shots"] = {
            "shots": self.shots,
            "seed": self.seed,
            "successes": self.successes,
            "empirical_success_rate": self.empirical_success_rate,
            "exact_success_probability": self.exact.success_probability,
            "binomial_sigma": self.binomial_sigma(),
            "counts": self.counts,
        }
        return d


def run_shots(config: ProtocolConfig) -> ShotsResult:
    """Sample ``config.shots`` detection records from the exact branch distribution."""
    if config.shots is None:
        raise ValueError("shots mode needs a shot count")
    exact = run_exact(config)
    probs = np.array([o.probability for o in exact.outcomes])
    probs = probs / probs.sum()
    rng = np.random.default_rng(config.seed)
    draws = rng.multinomial(config.shots, probs)
    counts = {
        o.branch_id: int(k) for o, k in zip(exact.outcomes, draws) if k > 0
    }
    successes = int(sum(k for o, k in zip(exact.outcomes, draws) if o.accepted))
    return ShotsResult(exact, config.shots, config.seed, counts, successes)


def classify_signs(outcome: ProtocolOutcome) -> tuple[int, int, int, int, dict[str, bool]]:
    """(p, q, P, Q, corrections) of an accepted branch."""
    if not outcome.accepted:
        raise ValueError("sign classification only applies to accepted branches")
    return outcome.p, outcome.q, outcome.P, outcome.Q, dict(outcome.corrections)
