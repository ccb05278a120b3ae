import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperconc.fock import (
    FockState,
    ModeId,
    ModeTable,
    ModeTableMismatch,
    PhotonNumberMismatch,
    StateParams,
    fidelity,
    inner_product,
    measurement_outcomes,
    project_counts,
    superpose,
    tensor,
)
from hyperconc.protocol import build_input, target_state

S = 1 / math.sqrt(2)


def test_mode_table_order_is_party_copy_spatial_pol():
    table = ModeTable.standard(2)
    assert len(table) == 16
    assert table.labels[:5] == ["p0c1uH", "p0c1uV", "p0c1dH", "p0c1dV", "p0c2uH"]
    assert table.index(ModeId(1, 2, "d", "V")) == 15
    shuffled = ModeTable(tuple(reversed(table.modes)))
    assert shuffled == table


def test_mode_table_without_reindexes_and_records_parent():
    table = ModeTable.standard(2)
    rest = table.without([m for m in table.modes if m.copy == 2])
    assert len(rest) == 8
    assert rest.parent == (0, 1, 2, 3, 8, 9, 10, 11)
    assert rest == ModeTable.standard(2, copies=(1,))


def test_mode_label_roundtrip():
    for mode in ModeTable.standard(3).modes:
        assert ModeId.parse(mode.label) == mode
    with pytest.raises(ValueError):
        ModeId.parse("x1u")


def test_state_params_normalization():
    StateParams.from_weights(0.3, 0.9)
    with pytest.raises(ValueError):
        StateParams(1, 1, 1, 0)


def test_superpose_beam_splitter_output(two_modes):
    up = FockState(two_modes, {(1, 0): 1})
    down = FockState(two_modes, {(0, 1): 1})
    out = superpose(up, S, down, S)
    assert out.amplitude((1, 0)) == pytest.approx(S)
    assert out.amplitude((0, 1)) == pytest.approx(S)
    assert out.is_normalized()


def test_superpose_cancellation_and_identity(two_modes):
    s = FockState(two_modes, {(1, 0): 0.6, (0, 1): 0.8j})
    assert len(superpose(s, 1, s, -1)) == 0
    same = superpose(s, 1, FockState.empty(two_modes), 0)
    assert same.terms == s.terms


def test_superpose_errors(two_modes, four_modes):
    a = FockState(two_modes, {(1, 0): 1})
    with pytest.raises(ModeTableMismatch):
        superpose(a, 1, FockState.vacuum(four_modes), 1)
    with pytest.raises(PhotonNumberMismatch):
        superpose(a, 1, FockState(two_modes, {(2, 0): 1}), 1)


def test_mixed_photon_numbers_rejected(two_modes):
    with pytest.raises(PhotonNumberMismatch):
        FockState(two_modes, {(1, 0): 1, (1, 1): 1})


def test_inner_product_basics(two_modes):
    s = FockState(two_modes, {(1, 0): 0.6, (0, 1): 0.8j})
    assert inner_product(s, s) == pytest.approx(1)
    assert inner_product(FockState(two_modes, {(1, 0): 1}), FockState(two_modes, {(0, 1): 1})) == 0
    # conjugate-linear in the bra
    assert inner_product(FockState(two_modes, {(0, 1): 1}), s) == pytest.approx(0.8j)


@pytest.mark.parametrize("a2,d2", [(0.5, 0.5), (0.2, 0.7), (0.9, 0.1)])
def test_inner_product_with_target_n2(a2, d2):
    params = StateParams.from_weights(a2, d2)
    psi = build_input(2, params)
    phi = target_state(2)
    expected = (params.alpha + params.beta) * (params.delta + params.eta) / 2
    # brute force: dense vectors over the 16 terms of the 8-mode two-photon space
    keys = sorted(set(dict(psi.items())) | set(dict(phi.items())))
    dense = sum(phi.amplitude(k).conjugate() * psi.amplitude(k) for k in keys)
    assert inner_product(phi, psi) == pytest.approx(expected, abs=1e-12)
    assert dense == pytest.approx(expected, abs=1e-12)


def test_fidelity(two_modes):
    s = FockState(two_modes, {(1, 0): 1})
    t = FockState(two_modes, {(0, 1): 1})
    assert fidelity(s, s) == pytest.approx(1)
    assert fidelity(s, t) == 0
    with pytest.raises(ValueError):
        fidelity(s.scaled(2), s)


def test_project_symmetric_superposition(two_modes):
    s = FockState(two_modes, {(1, 0): S, (0, 1): S})
    prob, rest = project_counts(s, [two_modes.modes[0]], [1])
    assert prob == pytest.approx(0.5)
    assert len(rest.table) == 1
    assert rest.terms == {(0,): pytest.approx(1)}


def test_project_no_matching_component(two_modes):
    s = FockState(two_modes, {(2, 0): 1})
    prob, rest = project_counts(s, [two_modes.modes[0]], [1])
    assert prob == 0
    assert len(rest) == 0


def test_project_errors(two_modes):
    s = FockState(two_modes, {(1, 0): 1})
    with pytest.raises(KeyError):
        project_counts(s, [ModeId(3, 1, "u", "H")], [1])
    with pytest.raises(ValueError):
        project_counts(s, [two_modes.modes[0]], [2])


def test_tensor_disjoint_support():
    table = ModeTable.standard(2, copies=(1,))
    a = FockState.basis(table, {ModeId(0, 1, "u", "H"): 1})
    b = FockState.basis(table, {ModeId(1, 1, "d", "V"): 1})
    ab = tensor(a, b)
    assert ab.photon_number == 2
    with pytest.raises(ValueError):
        tensor(a, a)


def test_json_is_canonical_and_roundtrips():
    s = build_input(3, StateParams.from_weights(0.3, 0.6))
    text = json.dumps(s.to_dict())
    back = FockState.from_dict(json.loads(text))
    assert back.table == s.table
    assert back.terms == s.terms
    assert json.dumps(back.to_dict()) == text
    occs = [t["occ"] for t in s.to_dict()["terms"]]
    assert occs == sorted(occs)


_amps = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2), _amps), min_size=1, max_size=8))
def test_projection_probabilities_sum_to_norm(raw):
    # states over 4 modes with 2 photons in the first three, remainder in the fourth
    table = ModeTable.standard(1, copies=(1,))
    terms = {}
    for a, b, c, amp in raw:
        if a + b + c <= 4:
            terms[(a, b, c, 4 - a - b - c)] = amp
    s = FockState(table, terms)
    measured = list(table.modes[:2])
    total = sum(p for _, p, _ in measurement_outcomes(s, measured))
    assert total == pytest.approx(s.norm2(), abs=1e-10)
    for pattern, p, rest in measurement_outcomes(s, measured):
        assert project_counts(s, measured, pattern)[0] == pytest.approx(p)
        assert rest.is_normalized()
