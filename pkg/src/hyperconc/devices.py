"""Parity-check and single-photon measurement devices.

Every device is an optical circuit plus a detector layout. The layout says
which output modes carry detectors and which exit through the retained
("port 1") side, and it tags each detector with the diagonal-basis result it
stands for. Those tags are fixed at build time, so classifying a detection
event never touches the optics again.

Wiring:

* PPC, polarization parity check. A PBS0 joins the u paths of the two
  photons and a second PBS0 joins the d paths. The detector-side pair then
  goes through a BeamSplitter (u = up input) and a PBS45 on each output.
  The improved variant adds a PBS0 on each BeamSplitter output. It sends V
  to an auxiliary path (``ua``/``da``) before the PBS45s, so photons of
  orthogonal polarization never share a detector.
* SPC, spatial parity check. A BeamSplitter joins path d of photon 1 (up
  input) with path u of photon 2. Photon 2's d path is renamed to photon 1's
  d, and each BeamSplitter output goes through a PBS45. An optional
  variant adds a vacuum-port BeamSplitter on each detector-side path before
  the PBS45s.
* SPM, single-photon two-qubit measurement. A BeamSplitter (u = up input)
  and a PBS45 on each output. There are four detectors and no retained port.

After a PPC or SPC the retained photon always sits on photon 1's paths, and
every detector sits on photon 2's paths.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

from .fock import FockState, ModeId, ModeTable, measurement_outcomes, path_modes
from .optics import (
    Element,
    OpticalCircuit,
    Path,
    apply_circuit,
    beam_splitter,
    pbs0,
    pbs45,
    swap_paths,
)


class DetectorModel(str, Enum):
    PNR = "pnr"
    BUCKET = "bucket"


class Classification(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    # the apparatus accepts, but a detector that fired held more than one photon
    AMBIGUOUS = "ambiguous"


PAIR = "pair"  # parity check: accept on exactly one detected photon
SINGLE = "single"  # SPM: every single-photon outcome is valid


@dataclass(frozen=True)
class DetectorTag:
    spatial: str  # "+" or "-" (diagonal spatial basis, +' / -')
    pol: str  # "+" or "-"

    def __str__(self) -> str:
        return f"{self.spatial}'{self.pol}"


@dataclass(frozen=True)
class DetectorLayout:
    detector_modes: tuple[ModeId, ...]
    kept_modes: tuple[ModeId, ...]
    labels: tuple[DetectorTag, ...]
    signature: str = PAIR

    def __post_init__(self):
        if set(self.detector_modes) & set(self.kept_modes):
            raise ValueError("detector and kept modes overlap")
        if len(self.labels) != len(self.detector_modes):
            raise ValueError("one tag per detector required")

    def to_dict(self) -> dict:
        return {
            "detectors": [
                {"mode": m.label, "tag": str(t)} for m, t in zip(self.detector_modes, self.labels)
            ],
            "kept": [m.label for m in self.kept_modes],
            "signature": self.signature,
        }


@dataclass(frozen=True)
class DetectionEvent:
    counts: tuple[int, ...]
    classification: Classification
    outcome_tags: tuple[DetectorTag, ...] = ()

    @property
    def accepted(self) -> bool:
        return self.classification is not Classification.REJECT

    @property
    def ambiguous(self) -> bool:
        return self.classification is Classification.AMBIGUOUS

    def to_dict(self) -> dict:
        return {
            "counts": list(self.counts),
            "classification": self.classification.value,
            "tags": [str(t) for t in self.outcome_tags],
        }


def classify_event(layout: DetectorLayout, model: DetectorModel, counts: Sequence[int]) -> DetectionEvent:
    """Decide whether a detector pattern passes the device's success signature.

    Under PNR the exact photon counts are visible. Under the bucket model only
    click/no-click is, so a single click produced by two photons on one
    detector is accepted and marked ambiguous.
    """
    counts = tuple(int(c) for c in counts)
    if len(counts) != len(layout.detector_modes):
        raise ValueError(
            f"expected {len(layout.detector_modes)} detector counts, got {len(counts)}"
        )
    if any(c < 0 for c in counts):
        raise ValueError("negative detector count")
    model = DetectorModel(model)
    fired = [k for k, c in enumerate(counts) if c > 0]
    tags = tuple(layout.labels[k] for k in fired)
    if model is DetectorModel.PNR:
        ok = sum(counts) == 1
        return DetectionEvent(counts, Classification.ACCEPT if ok else Classification.REJECT, tags)
    if len(fired) != 1:
        return DetectionEvent(counts, Classification.REJECT, tags)
    if counts[fired[0]] > 1:
        return DetectionEvent(counts, Classification.AMBIGUOUS, tags)
    return DetectionEvent(counts, Classification.ACCEPT, tags)


@dataclass(frozen=True, eq=False)
class Device:
    name: str
    routing: OpticalCircuit  # stage before the diagonal-basis measurement
    circuit: OpticalCircuit
    layout: DetectorLayout

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "elements": [e.to_dict() for e in self.circuit.elements],
            "routing_elements": len(self.routing.elements),
            "layout": self.layout.to_dict(),
        }


def _paths_modes(paths: Sequence[Path]) -> tuple[ModeId, ...]:
    return tuple(m for p in paths for m in path_modes(p))


def _check_paths(table: ModeTable, *groups: Sequence[Path]) -> None:
    seen: set[Path] = set()
    for paths in groups:
        if len(paths) != 2:
            raise ValueError("each photon needs exactly two paths (u, d)")
        for p in paths:
            if p in seen:
                raise ValueError(f"path collision on {p}")
            seen.add(p)
            for mode in path_modes(p):
                if mode not in table:
                    raise KeyError(f"mode {mode} not in table")


def _aux(path: Path) -> Path:
    party, copy, spatial = path
    return (party, copy, spatial + "a")


def _detectors(paths_and_signs: Sequence[tuple[Path, str]]):
    modes, tags = [], []
    for path, spatial_sign in paths_and_signs:
        h, v = path_modes(path)
        modes += [h, v]
        tags += [DetectorTag(spatial_sign, "+"), DetectorTag(spatial_sign, "-")]
    return tuple(modes), tuple(tags)


def _ppc(table, photon1_paths, photon2_paths, improved: bool) -> Device:
    _check_paths(table, photon1_paths, photon2_paths)
    (x1u, x1d), (x2u, x2d) = photon1_paths, photon2_paths
    routing: list[Element] = [pbs0(x1u, x2u), pbs0(x1d, x2d)]
    measure: list[Element] = [beam_splitter(x2u, x2d)]
    det_paths = [(x2u, "+"), (x2d, "-")]
    if improved:
        aux_u, aux_d = _aux(x2u), _aux(x2d)
        _check_paths(table, (aux_u, aux_d))
        measure += [pbs0(x2u, aux_u), pbs0(x2d, aux_d)]
        det_paths += [(aux_u, "+"), (aux_d, "-")]
    measure += [pbs45(p) for p, _ in det_paths]
    det_modes, tags = _detectors(det_paths)
    layout = DetectorLayout(det_modes, _paths_modes(photon1_paths), tags, PAIR)
    return Device(
        "improved-ppc" if improved else "ppc",
        OpticalCircuit.from_elements(table, routing),
        OpticalCircuit.from_elements(table, routing + measure),
        layout,
    )


def build_ppc(table: ModeTable, photon1_paths, photon2_paths) -> Device:
    """Polarization parity check; photon 1's paths are the retained port."""
    return _ppc(table, photon1_paths, photon2_paths, improved=False)


def build_improved_ppc(table: ModeTable, photon1_paths, photon2_paths) -> Device:
    """PPC with H/V separation ahead of the diagonal measurement.

    Needs the auxiliary ``ua``/``da`` paths of photon 2 in ``table``.
    """
    return _ppc(table, photon1_paths, photon2_paths, improved=True)


def build_spc(table: ModeTable, photon1_paths, photon2_paths, extra_splitters: bool = False) -> Device:
    """Spatial parity check; photon 1's paths are the retained port."""
    _check_paths(table, photon1_paths, photon2_paths)
    (_, y1d), (y2u, y2d) = photon1_paths, photon2_paths
    # BS outputs: up -> y1d slot, down -> y2u slot; the swap moves the up
    # output to y2d and puts photon 2's untouched d path on y1d
    routing: list[Element] = [beam_splitter(y1d, y2u), swap_paths(y1d, y2d)]
    det_paths = [(y2d, "+"), (y2u, "-")]
    measure: list[Element] = []
    if extra_splitters:
        aux_u, aux_d = _aux(y2u), _aux(y2d)
        _check_paths(table, (aux_u, aux_d))
        measure += [beam_splitter(y2d, aux_d), beam_splitter(y2u, aux_u)]
        det_paths += [(aux_d, "+"), (aux_u, "-")]
    measure += [pbs45(p) for p, _ in det_paths]
    det_modes, tags = _detectors(det_paths)
    layout = DetectorLayout(det_modes, _paths_modes(photon1_paths), tags, PAIR)
    return Device(
        "spc+bs" if extra_splitters else "spc",
        OpticalCircuit.from_elements(table, routing),
        OpticalCircuit.from_elements(table, routing + measure),
        layout,
    )


def build_spm(table: ModeTable, paths_of_one_photon) -> Device:
    """Diagonal-basis measurement of both the path and polarization of one photon."""
    _check_paths(table, paths_of_one_photon)
    pu, pd = paths_of_one_photon
    routing = [beam_splitter(pu, pd)]
    det_paths = [(pu, "+"), (pd, "-")]
    measure = [pbs45(pu), pbs45(pd)]
    det_modes, tags = _detectors(det_paths)
    layout = DetectorLayout(det_modes, (), tags, SINGLE)
    return Device(
        "spm",
        OpticalCircuit.from_elements(table, routing),
        OpticalCircuit.from_elements(table, routing + measure),
        layout,
    )


def input_photons(device: Device, s: FockState) -> int:
    """Photons entering ``device`` (i.e. on its detector or kept modes)."""
    idx = s.table.indices(device.layout.detector_modes + device.layout.kept_modes)
    counts = {sum(occ[i] for i in idx) for occ, _ in s.items()}
    return max(counts) if counts else 0


def run_device(device: Device, s: FockState, model: DetectorModel = DetectorModel.PNR):
    """Send ``s`` through ``device`` and enumerate detection events.

    Returns a list of ``(event, probability, remainder)`` in lexicographic
    order of detector counts; remainders live on the table without the
    detector modes.
    """
    if device.layout.signature == SINGLE and input_photons(device, s) > 1:
        raise ValueError("SPM accepts at most one photon")
    out = apply_circuit(device.circuit, s)
    return [
        (classify_event(device.layout, model, counts), prob, rest)
        for counts, prob, rest in measurement_outcomes(out, device.layout.detector_modes)
    ]


def accept_probability(device: Device, s: FockState, model: DetectorModel = DetectorModel.PNR) -> float:
    return sum(p for ev, p, _ in run_device(device, s, model) if ev.accepted)


def false_accept_probability(device: Device, s: FockState, model: DetectorModel = DetectorModel.BUCKET) -> float:
    return sum(p for ev, p, _ in run_device(device, s, model) if ev.ambiguous)


# truth tables


def pair_table() -> ModeTable:
    """Party 0 with both copies plus the auxiliary ports of copy 2."""
    aux = [ModeId(0, 2, sp, pol) for sp in ("ua", "da") for pol in ("H", "V")]
    return ModeTable.standard(1, copies=(1, 2), extra=aux)


def _photon(table: ModeTable, copy: int, pol: str, spatial: str) -> dict:
    """Amplitudes of one photon of ``copy`` over its modes."""
    s = 1 / 2**0.5
    spatial_amp = {"u": {"u": 1.0}, "d": {"d": 1.0}, "+": {"u": s, "d": s}}[spatial]
    pol_amp = {"H": {"H": 1.0}, "V": {"V": 1.0}, "+": {"H": s, "V": s}, "-": {"H": s, "V": -s}}[pol]
    return {
        table.index(ModeId(0, copy, sp, p)): a * b
        for sp, a in spatial_amp.items()
        for p, b in pol_amp.items()
    }


def product_state(table: ModeTable, photons: Sequence[tuple[int, str, str]]) -> FockState:
    """Product of single photons given as (copy, pol, spatial) on party 0.

    ``pol`` is H, V, + or -; ``spatial`` is u, d or + (equal superposition).
    """
    terms = {(0,) * len(table): 1.0 + 0j}
    for copy, pol, spatial in photons:
        nxt: dict = {}
        for occ, amp in terms.items():
            for i, a in _photon(table, copy, pol, spatial).items():
                o = list(occ)
                o[i] += 1
                nxt[tuple(o)] = nxt.get(tuple(o), 0) + amp * a
        terms = nxt
    # photons sit on different copies, so no bosonic sqrt(n!) factors arise
    return FockState(table, terms).normalized()


def _side_counts(device: Device, s: FockState) -> dict[int, float]:
    """Distribution of photons on the detector side after the routing stage."""
    routed = apply_circuit(device.routing, s)
    idx = s.table.indices(m for m in device.layout.detector_modes if m.spatial in ("u", "d"))
    dist: dict[int, float] = {}
    for occ, amp in routed.items():
        k = sum(occ[i] for i in idx)
        dist[k] = dist.get(k, 0.0) + abs(amp) ** 2
    return {k: v for k, v in sorted(dist.items()) if v > 1e-12}


_ROUTE_WORDS = {0: "both port 1", 1: "one each", 2: "both port 2"}


def truth_rows(device: Device, inputs: Sequence[tuple[str, FockState]]) -> list[dict]:
    rows = []
    for name, state in inputs:
        side = _side_counts(device, state)
        row = {
            "device": device.name,
            "input": name,
            "detector_photons": {str(k): v for k, v in side.items()},
            "routing": (
                "single photon"
                if device.layout.signature == SINGLE
                else ", ".join(_ROUTE_WORDS.get(k, f"{k} detected") for k in side)
            ),
        }
        for model in DetectorModel:
            events = run_device(device, state, model)
            row[model.value] = {
                "accept": sum(p for ev, p, _ in events if ev.accepted),
                "false_accept": sum(p for ev, p, _ in events if ev.ambiguous),
            }
        rows.append(row)
    return rows


def truth_tables() -> list[dict]:
    """Rows for PPC, improved PPC, SPC (with and without extra splitters) and SPM."""
    table = pair_table()
    p1, p2 = ((0, 1, "u"), (0, 1, "d")), ((0, 2, "u"), (0, 2, "d"))
    rows = []
    pol_inputs = [
        (f"|{a}{b}>", product_state(table, [(1, a, "+"), (2, b, "+")]))
        for a in "HV"
        for b in "HV"
    ]
    rows += truth_rows(build_ppc(table, p1, p2), pol_inputs)
    rows += truth_rows(build_improved_ppc(table, p1, p2), pol_inputs)
    spatial_inputs = [
        (f"|y1{a} y2{b}>{pol}", product_state(table, [(1, pol[0], a), (2, pol[1], b)]))
        for pol in ("HH", "HV")
        for a in "ud"
        for b in "ud"
    ]
    rows += truth_rows(build_spc(table, p1, p2), spatial_inputs)
    rows += truth_rows(build_spc(table, p1, p2, extra_splitters=True), spatial_inputs)
    spm_inputs = [
        (f"|{pol}>|{sp}>", product_state(table, [(2, pol, sp)]))
        for pol in ("+", "-", "H")
        for sp in ("+", "u", "d")
    ]
    rows += truth_rows(build_spm(table, p2), spm_inputs)
    return rows


def _verdict(p: float) -> str:
    if p < 1e-12:
        return "Reject"
    if p > 1 - 1e-12:
        return "Accept"
    return f"Accept p={p:.4g}"


def format_row(row: dict) -> str:
    side = row["detector_photons"]
    if len(side) == 1:
        n = next(iter(side))
        photons = f"{n} detector photon{'s' if n != '1' else ''} ({row['routing']})"
    else:
        photons = " / ".join(f"{k}: {v:.3g}" for k, v in side.items()) + " detector photons"
    pnr, bucket = row["pnr"], row["bucket"]
    text = f"{row['device']:<13}{row['input']:<16}{photons}, PNR {_verdict(pnr['accept'])}, bucket {_verdict(bucket['accept'])}"
    if bucket["false_accept"] > 1e-12:
        text += f" (false accept {bucket['false_accept']:.4g})"
    return text
