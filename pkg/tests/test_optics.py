import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from hyperconc import oracle, verify
from hyperconc.fock import FockState, ModeId, ModeTable, ModeTableMismatch
from hyperconc.optics import (
    Element,
    Kind,
    OpticalCircuit,
    apply_circuit,
    apply_unitary,
    beam_splitter,
    compose,
    element_matrix,
    hwp45,
    is_unitary,
    pbs0,
    pbs45,
    phase,
    swap_paths,
)

S = 1 / math.sqrt(2)
U1, D1 = (0, 1, "u"), (0, 1, "d")
U2, D2 = (0, 2, "u"), (0, 2, "d")


@pytest.fixture
def table():
    return ModeTable.standard(1)


def mode(copy, sp, pol):
    return ModeId(0, copy, sp, pol)


def test_beam_splitter_columns(table):
    u = element_matrix(beam_splitter(U1, D1), table)
    i_uH, i_dH = table.index(mode(1, "u", "H")), table.index(mode(1, "d", "H"))
    assert u[[i_uH, i_dH], i_uH] == pytest.approx([S, S])
    assert u[[i_uH, i_dH], i_dH] == pytest.approx([S, -S])
    # identity outside the acted modes
    others = [i for i in range(len(table)) if table.modes[i].copy == 2]
    assert np.allclose(u[np.ix_(others, others)], np.eye(len(others)))


def test_relabel_is_transposition(table):
    u = element_matrix(swap_paths(U2, D2), table)
    a, b = table.index(mode(2, "u", "H")), table.index(mode(2, "d", "H"))
    assert u[b, a] == 1 and u[a, b] == 1 and u[a, a] == 0
    assert np.allclose(u @ u, np.eye(len(table)))


def test_hwp_is_involution(table):
    c = OpticalCircuit.from_elements(table, [hwp45(U1), hwp45(U1)])
    assert np.allclose(c.unitary, np.eye(len(table)))


def test_pbs0_routing(table):
    u = element_matrix(pbs0(U1, U2), table)
    col = lambda m: u[:, table.index(m)]
    assert col(mode(1, "u", "H"))[table.index(mode(1, "u", "H"))] == 1
    assert col(mode(1, "u", "V"))[table.index(mode(2, "u", "V"))] == 1
    assert col(mode(2, "u", "V"))[table.index(mode(1, "u", "V"))] == 1


@pytest.mark.parametrize(
    "element",
    [beam_splitter(U1, D1), pbs0(U1, U2), pbs45(U2), hwp45(D1), swap_paths(U1, D2), phase([mode(1, "u", "V")], 0.7)],
)
def test_elements_are_unitary(element, table):
    assert is_unitary(element_matrix(element, table))


def test_malformed_elements(table):
    with pytest.raises(ValueError):
        Element(Kind.BEAM_SPLITTER, (mode(1, "u", "H"), mode(1, "d", "H")))
    with pytest.raises(ValueError):
        Element(Kind.PBS45, (mode(1, "u", "V"), mode(1, "u", "H")))
    with pytest.raises(KeyError):
        element_matrix(pbs45((3, 1, "u")), table)


def test_compose_beam_splitters_gives_identity(table):
    bs = OpticalCircuit.from_elements(table, [beam_splitter(U1, D1)])
    twice = compose(bs, bs)
    # 2x2 Hadamard-form matrix squared: [[1/2+1/2, 1/2-1/2], [1/2-1/2, 1/2+1/2]]
    assert np.allclose(twice.unitary, np.eye(len(table)), atol=1e-15)
    assert set(np.round(np.abs(twice.unitary).ravel(), 12)) <= {0.0, 1.0}
    assert len(twice.elements) == 2


def test_compose_identity_and_relabel(table):
    c = OpticalCircuit.from_elements(table, [beam_splitter(U1, D1), pbs45(U2)])
    same = compose(c, OpticalCircuit.identity(table))
    assert np.allclose(same.unitary, c.unitary)
    r = OpticalCircuit.from_elements(table, [swap_paths(U1, D1)])
    assert np.allclose(compose(r, r).unitary, np.eye(len(table)))


def test_compose_order(table):
    a = OpticalCircuit.from_elements(table, [beam_splitter(U1, D1)])
    b = OpticalCircuit.from_elements(table, [phase([mode(1, "d", "H")], math.pi / 2)])
    assert np.allclose(compose(a, b).unitary, b.unitary @ a.unitary)


def test_compose_table_mismatch(table):
    with pytest.raises(ModeTableMismatch):
        compose(OpticalCircuit.identity(table), OpticalCircuit.identity(ModeTable.standard(2)))


def test_hong_ou_mandel(table):
    s = FockState.basis(table, {mode(1, "u", "H"): 1, mode(1, "d", "H"): 1})
    out = apply_circuit(OpticalCircuit.from_elements(table, [beam_splitter(U1, D1)]), s)
    i, j = table.index(mode(1, "u", "H")), table.index(mode(1, "d", "H"))
    two_up = tuple(2 if k == i else 0 for k in range(len(table)))
    two_down = tuple(2 if k == j else 0 for k in range(len(table)))
    # (a+b)(a-b)/2 = (a^2 - b^2)/2 and a^2|0> = sqrt2|2>
    assert out.terms == {two_up: pytest.approx(S), two_down: pytest.approx(-S)}
    bs = np.array([[S, S], [S, -S]])
    assert oracle.transition_amplitude(bs, (1, 1), (2, 0)) == pytest.approx(out.amplitude(two_up))


def test_identity_circuit_is_noop(table):
    s = verify.random_state(table, 3, np.random.default_rng(0))
    out = apply_circuit(OpticalCircuit.identity(table), s)
    assert out.terms == pytest.approx(s.terms)


def test_apply_table_mismatch(table):
    with pytest.raises(ModeTableMismatch):
        apply_circuit(OpticalCircuit.identity(table), FockState.vacuum(ModeTable.standard(2)))


def test_element_log_json(table):
    c = OpticalCircuit.from_elements(table, [pbs0(U1, U2), beam_splitter(U2, D2), phase([mode(1, "u", "H")], 0.5)])
    log = json.loads(c.element_log())
    assert log[0] == {"kind": "PBS0", "modes": ["p0c1uH", "p0c1uV", "p0c2uH", "p0c2uV"], "parameter": 0.0}
    assert [Element.from_dict(d) for d in log] == list(c.elements)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([2, 4, 6, 8]), st.integers(1, 4))
def test_random_circuits_unitary_norm_and_photon_number(seed, m, n):
    rng = np.random.default_rng(seed)
    table = verify.small_table(m)
    c = verify.random_circuit(table, rng)
    assert is_unitary(c.unitary)
    s = verify.random_state(table, n, rng)
    out = apply_circuit(c, s)
    assert out.norm2() == pytest.approx(1, abs=1e-10)
    assert out.photon_number == n


@pytest.mark.parametrize("seed", range(10))
def test_haar_unitary_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    table = verify.small_table(6)
    u = unitary_group.rvs(6, random_state=seed)
    s = verify.random_state(table, 3, rng)
    got = apply_unitary(u, s)
    for occ_out in oracle.occupations(3, 6):
        want = sum(a * oracle.transition_amplitude(u, occ, occ_out) for occ, a in s.items())
        assert abs(got.amplitude(occ_out) - want) < 1e-10
