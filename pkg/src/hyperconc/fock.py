"""Sparse bosonic Fock states over a labelled set of optical modes.

Every photon in the simulator carries four labels: the party holding it, which
copy of the shared state it belongs to, its spatial path and its polarization.
A :class:`ModeTable` fixes a dense ordering of those labels and a
:class:`FockState` maps occupation vectors over that ordering to complex
amplitudes. Occupation kets are orthonormal; the ``sqrt(n!)`` factors of
repeated creation operators are handled where circuits are applied, never in
the stored amplitudes.
"""

from __future__ import annotations

import math
import re
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

PRUNE = 1e-12
NORM_TOL = 1e-9

SPATIAL_ORDER = ("u", "d", "ua", "da")
POL_ORDER = ("H", "V")

_LABEL_RE = re.compile(r"^p(\d+)c(\d+)([a-z]+)([HV])$")


class ModeTableMismatch(ValueError):
    """Two states or a state and a circuit live on different mode tables."""


class PhotonNumberMismatch(ValueError):
    """Two states carry different total photon numbers."""


@dataclass(frozen=True)
class ModeId:
    """One optical mode: ``party`` / ``copy`` / spatial path / polarization.

    Spatial paths ``u`` and ``d`` are the two potential paths of a photon;
    ``ua`` and ``da`` are auxiliary vacuum ports used by some detector
    variants.
    """

    party: int
    copy: int
    spatial: str
    pol: str

    def __post_init__(self):
        if self.spatial not in SPATIAL_ORDER:
            raise ValueError(f"unknown spatial path {self.spatial!r}")
        if self.pol not in POL_ORDER:
            raise ValueError(f"unknown polarization {self.pol!r}")
        if self.party < 0 or self.copy < 1:
            raise ValueError(f"invalid party/copy in {self!r}")

    @property
    def path(self) -> tuple[int, int, str]:
        return (self.party, self.copy, self.spatial)

    def sort_key(self) -> tuple[int, int, int, int]:
        return (
            self.party,
            self.copy,
            SPATIAL_ORDER.index(self.spatial),
            POL_ORDER.index(self.pol),
        )

    @property
    def label(self) -> str:
        return f"p{self.party}c{self.copy}{self.spatial}{self.pol}"

    @classmethod
    def parse(cls, label: str) -> ModeId:
        m = _LABEL_RE.match(label)
        if m is None:
            raise ValueError(f"malformed mode label {label!r}")
        return cls(int(m.group(1)), int(m.group(2)), m.group(3), m.group(4))

    def __str__(self) -> str:
        return self.label


def path_modes(path: tuple[int, int, str]) -> tuple[ModeId, ModeId]:
    """The (H, V) modes of one spatial path."""
    party, copy, spatial = path
    return ModeId(party, copy, spatial, "H"), ModeId(party, copy, spatial, "V")


@dataclass(frozen=True)
class ModeTable:
    """Dense, canonically ordered index over a set of modes.

    Ordering is party-major, then copy, then spatial path, then polarization,
    regardless of the order the modes are supplied in. ``parent`` records the
    index each mode had in the table this one was derived from (after modes
    were measured out); it is traceability metadata and does not take part in
    equality.
    """

    modes: tuple[ModeId, ...]
    parent: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        ordered = tuple(sorted(self.modes, key=ModeId.sort_key))
        if len(set(ordered)) != len(ordered):
            raise ValueError("duplicate modes in table")
        object.__setattr__(self, "modes", ordered)
        object.__setattr__(self, "_index", {mode: i for i, mode in enumerate(ordered)})

    @classmethod
    def standard(
        cls,
        n_parties: int,
        copies: Iterable[int] = (1, 2),
        extra: Iterable[ModeId] = (),
    ) -> ModeTable:
        """All u/d x H/V modes for every party and copy, plus ``extra`` modes."""
        modes = [
            ModeId(party, copy, spatial, pol)
            for party in range(n_parties)
            for copy in copies
            for spatial in ("u", "d")
            for pol in POL_ORDER
        ]
        return cls(tuple(modes) + tuple(extra))

    def __len__(self) -> int:
        return len(self.modes)

    def __contains__(self, mode) -> bool:
        return mode in self._index

    def index(self, mode: ModeId) -> int:
        try:
            return self._index[mode]
        except KeyError:
            raise KeyError(f"mode {mode} not in table") from None

    def indices(self, modes: Iterable[ModeId]) -> list[int]:
        return [self.index(mode) for mode in modes]

    def without(self, modes: Iterable[ModeId]) -> ModeTable:
        """Table with ``modes`` removed, densely reindexed."""
        drop = set(self.indices(modes))
        keep = [i for i in range(len(self.modes)) if i not in drop]
        return ModeTable(tuple(self.modes[i] for i in keep), parent=tuple(keep))

    @property
    def labels(self) -> list[str]:
        return [mode.label for mode in self.modes]


Occupation = tuple[int, ...]


@dataclass(frozen=True)
class StateParams:
    """Coefficients of a partially hyperentangled GHZ state.

    ``alpha``/``beta`` weight the all-H and all-V polarization branches,
    ``delta``/``eta`` the all-u and all-d spatial branches.
    """

    alpha: complex
    beta: complex
    delta: complex
    eta: complex

    def __post_init__(self):
        for name in ("alpha", "beta", "delta", "eta"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1) > 1e-12:
            raise ValueError("|alpha|^2 + |beta|^2 must equal 1")
        if abs(abs(self.delta) ** 2 + abs(self.eta) ** 2 - 1) > 1e-12:
            raise ValueError("|delta|^2 + |eta|^2 must equal 1")

    @classmethod
    def from_weights(cls, alpha2: float, delta2: float) -> StateParams:
        """Real non-negative amplitudes from the squared weights |alpha|^2, |delta|^2."""
        if not (0.0 <= alpha2 <= 1.0 and 0.0 <= delta2 <= 1.0):
            raise ValueError("squared weights must lie in [0, 1]")
        return cls(
            math.sqrt(alpha2),
            math.sqrt(1.0 - alpha2),
            math.sqrt(delta2),
            math.sqrt(1.0 - delta2),
        )

    @classmethod
    def balanced(cls) -> StateParams:
        return cls.from_weights(0.5, 0.5)

    def success_formula(self) -> float:
        return 4.0 * abs(self.alpha * self.beta * self.delta * self.eta) ** 2


class FockState:
    """Immutable sparse superposition of occupation-number kets.

    ``terms`` maps occupation tuples (one count per mode of ``table``) to
    amplitudes. Amplitudes below :data:`PRUNE` in magnitude are dropped on
    construction.
    """

    __slots__ = ("table", "_terms")

    def __init__(self, table: ModeTable, terms: Mapping[Occupation, complex] | None = None):
        clean: dict[Occupation, complex] = {}
        m = len(table)
        for occ, amp in (terms or {}).items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != m:
                raise ValueError(f"occupation {occ} does not match {m} modes")
            if any(n < 0 for n in occ):
                raise ValueError(f"negative occupation in {occ}")
            amp = complex(amp)
            if abs(amp) >= PRUNE:
                clean[occ] = amp
        totals = {sum(occ) for occ in clean}
        if len(totals) > 1:
            raise PhotonNumberMismatch(f"mixed photon numbers {sorted(totals)}")
        self.table = table
        self._terms = clean

    @classmethod
    def _trusted(cls, table: ModeTable, terms: Mapping[Occupation, complex]) -> FockState:
        # internal fast path: keys already validated, only pruning applied
        self = object.__new__(cls)
        self.table = table
        self._terms = {k: v for k, v in terms.items() if abs(v) >= PRUNE}
        return self

    @classmethod
    def basis(cls, table: ModeTable, counts: Mapping[ModeId, int]) -> FockState:
        occ = [0] * len(table)
        for mode, n in counts.items():
            occ[table.index(mode)] += n
        return cls(table, {tuple(occ): 1.0})

    @classmethod
    def vacuum(cls, table: ModeTable) -> FockState:
        return cls(table, {(0,) * len(table): 1.0})

    @classmethod
    def empty(cls, table: ModeTable) -> FockState:
        return cls(table, {})

    @property
    def terms(self) -> Mapping[Occupation, complex]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def amplitude(self, occ: Occupation) -> complex:
        return self._terms.get(tuple(occ), 0.0j)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def photon_number(self) -> int | None:
        for occ in self._terms:
            return sum(occ)
        return None

    def norm2(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self._terms.values())

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm2() - 1.0) <= tol

    def normalized(self) -> FockState:
        n2 = self.norm2()
        if n2 == 0:
            raise ValueError("cannot normalize an empty state")
        scale = 1.0 / math.sqrt(n2)
        return FockState._trusted(self.table, {k: v * scale for k, v in self._terms.items()})

    def scaled(self, c: complex) -> FockState:
        return FockState(self.table, {k: v * c for k, v in self._terms.items()})

    def sorted_items(self) -> list[tuple[Occupation, complex]]:
        return sorted(self._terms.items())

    def __repr__(self) -> str:
        body = " + ".join(f"({a:.4g})|{''.join(map(str, o))}>" for o, a in self.sorted_items()[:6])
        more = "" if len(self) <= 6 else f" + ... ({len(self)} terms)"
        return f"FockState({body or '0'}{more})"

    # serialization

    def to_dict(self) -> dict:
        return {
            "modes": self.table.labels,
            "terms": [
                {"occ": list(occ), "re": amp.real, "im": amp.imag}
                for occ, amp in self.sorted_items()
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> FockState:
        table = ModeTable(tuple(ModeId.parse(label) for label in data["modes"]))
        if table.labels != list(data["modes"]):
            raise ValueError("mode labels are not in canonical order")
        terms = {tuple(t["occ"]): complex(t["re"], t["im"]) for t in data["terms"]}
        return cls(table, terms)


def _check_tables(a: FockState, b: FockState) -> None:
    if a.table != b.table:
        raise ModeTableMismatch("states are expressed over different mode tables")


def superpose(a: FockState, ca: complex, b: FockState, cb: complex) -> FockState:
    """Term-wise ``ca*a + cb*b``, pruned but not normalized."""
    _check_tables(a, b)
    if a and b and a.photon_number != b.photon_number:
        raise PhotonNumberMismatch(
            f"cannot superpose {a.photon_number} and {b.photon_number} photons"
        )
    out: dict[Occupation, complex] = defaultdict(complex)
    for occ, amp in a.items():
        out[occ] += ca * amp
    for occ, amp in b.items():
        out[occ] += cb * amp
    return FockState(a.table, out)


def inner_product(a: FockState, b: FockState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    _check_tables(a, b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for occ in small._terms:
        if occ in large._terms:
            total += a._terms[occ].conjugate() * b._terms[occ]
    return total


def fidelity(a: FockState, b: FockState) -> float:
    """|<a|b>|^2 between two normalized pure states."""
    for s in (a, b):
        if not s.is_normalized():
            raise ValueError(f"fidelity needs normalized states (norm^2 = {s.norm2():.6g})")
    return min(1.0, abs(inner_product(a, b)) ** 2)


def tensor(a: FockState, b: FockState) -> FockState:
    """Product of two states supported on disjoint modes of one table."""
    _check_tables(a, b)
    used_a = {i for occ in a._terms for i, n in enumerate(occ) if n}
    used_b = {i for occ in b._terms for i, n in enumerate(occ) if n}
    if used_a & used_b:
        raise ValueError("tensor factors overlap on modes " + str(sorted(used_a & used_b)))
    out = {}
    for oa, xa in a.items():
        for ob, xb in b.items():
            out[tuple(i + j for i, j in zip(oa, ob))] = xa * xb
    return FockState(a.table, out)


def _split(s: FockState, modes: Sequence[ModeId]):
    idx = s.table.indices(modes)
    if len(set(idx)) != len(idx):
        raise ValueError("repeated mode in measurement")
    drop = set(idx)
    keep = [i for i in range(len(s.table)) if i not in drop]
    table = s.table.without(modes)
    groups: dict[Occupation, dict[Occupation, complex]] = defaultdict(dict)
    for occ, amp in s.items():
        pattern = tuple(occ[i] for i in idx)
        groups[pattern][tuple(occ[i] for i in keep)] = amp
    return table, groups


def _remainder(table: ModeTable, terms: dict[Occupation, complex]) -> tuple[float, FockState]:
    prob = math.fsum(abs(a) ** 2 for a in terms.values())
    if prob < PRUNE**2:
        return 0.0, FockState.empty(table)
    scale = 1.0 / math.sqrt(prob)
    return prob, FockState._trusted(table, {k: v * scale for k, v in terms.items()})


def project_counts(
    s: FockState, modes: Sequence[ModeId], pattern: Sequence[int]
) -> tuple[float, FockState]:
    """Project ``s`` on photon counts ``pattern`` in ``modes``.

    Returns the probability of the pattern and the renormalized remainder,
    expressed over the table with the measured modes removed. A pattern with
    zero probability yields an empty remainder.
    """
    pattern = tuple(int(n) for n in pattern)
    if len(pattern) != len(modes):
        raise ValueError("pattern length must match the number of measured modes")
    n = s.photon_number
    if n is not None and sum(pattern) > n:
        raise ValueError(f"pattern carries {sum(pattern)} photons, state has {n}")
    table, groups = _split(s, modes)
    return _remainder(table, groups.get(pattern, {}))


def measurement_outcomes(
    s: FockState, modes: Sequence[ModeId]
) -> list[tuple[Occupation, float, FockState]]:
    """Every count pattern on ``modes`` with nonzero weight, in lexicographic order."""
    table, groups = _split(s, modes)
    out = []
    for pattern in sorted(groups):
        prob, rest = _remainder(table, groups[pattern])
        if prob > 0:
            out.append((pattern, prob, rest))
    return out
