import json
import math

import numpy as np
import pytest

from spinwn.circuits import (
    CX, CZ, RY, Circuit, CircuitError, Control, DuplicateQubit, Gate, QubitLayout, ThetaOutOfRange,
    UnsupportedGenerator, WidthOverflow, X, cancel_adjacent, circuit_matrix, count_report,
    decompose_mcry, element_count, emit_feb, emit_feb_compact, emit_product, emit_qeb_double,
    interpolate_alphas, mcry, qeb_matrix, simulate, strip_parity, table_row_of, table_row_specs,
)
from spinwn.fermion import GeneratorSpec, build_generator, dn, table_row_spec, up
from spinwn.fock import expm_antihermitian, to_matrix
from spinwn.wn import ParameterTable


def oracle(spec, theta, n):
    return expm_antihermitian(to_matrix(spec.expr, n), theta)


def test_gate_validation():
    with pytest.raises(DuplicateQubit):
        Gate("cx", 1, (Control(1),))
    with pytest.raises(CircuitError):
        Gate("ry", 0, (Control(1),), 0.1)
    with pytest.raises(CircuitError):
        Gate("foo", 0)
    c = Circuit(2)
    with pytest.raises(CircuitError):
        c.append(X(2))


def test_cx_matrix_convention():
    # control 0, target 1: |01> (bit0 set) -> |11>
    m = circuit_matrix(Circuit(2, [CX(0, 1)]))
    assert m[0b11, 0b01] == 1 and m[0b10, 0b10] == 1


def test_simulate_width_limit():
    with pytest.raises(WidthOverflow):
        simulate(Circuit(15), np.zeros(1 << 15))


@pytest.mark.parametrize("n,pols", [(1, (1,)), (2, (0, 1)), (3, (1, 0, 1)), (4, (0, 0, 0, 1))])
def test_mcry_decomposition(n, pols):
    ctrls = [Control(q + 1, p) for q, p in enumerate(pols[:n])]
    g = mcry(0, ctrls, 0.77)
    gates = decompose_mcry(g)
    assert sum(x.kind == "ry" for x in gates) == 2 ** n
    assert sum(x.kind in ("cx", "cz") for x in gates) == 2 ** n
    m = circuit_matrix(Circuit(n + 1, gates))
    want = np.eye(1 << (n + 1))
    for s in range(1 << (n + 1)):
        if all(((s >> c.q) & 1) == c.polarity for c in ctrls) and not s & 1:
            c_, s_ = math.cos(0.385), math.sin(0.385)
            want[s, s] = c_
            want[s | 1, s | 1] = c_
            want[s | 1, s] = s_
            want[s, s | 1] = -s_
    assert np.allclose(m, want, atol=1e-12)


@pytest.mark.parametrize("row", range(1, 12))
def test_feb_rows_match_oracle_and_table(row):
    spec = table_row_spec(row, 0, 1, 2, 3)
    c = emit_feb(spec, 0.37, width=8)
    assert np.linalg.norm(circuit_matrix(c) - oracle(spec, 0.37, 8)) < 1e-10
    ec = element_count(spec)
    assert c.counts()["cnot"] == ec.emitted_cnot == ec.fixed_cnot + ec.staircase_value
    assert c.counts()["ry"] == ec.ry
    assert table_row_of(spec) == row


@pytest.mark.parametrize("row", [1, 4, 9])
def test_compact_emission_same_unitary(row):
    spec = table_row_spec(row, 0, 1, 2, 3)
    a = circuit_matrix(emit_feb(spec, -1.1, width=8))
    b = circuit_matrix(emit_feb_compact(spec, -1.1, width=8))
    assert np.allclose(a, b, atol=1e-12)


def test_plain_spinorbital_double():
    spec = build_generator("gd", (0, 3, 5, 6))
    c = emit_feb(spec, 0.9, width=8)
    assert np.linalg.norm(circuit_matrix(c) - oracle(spec, 0.9, 8)) < 1e-10


def test_layout_permutation():
    spec = table_row_spec(2, 0, 1, 2, 3)
    perm = (7, 6, 5, 4, 3, 2, 1, 0)
    c = emit_feb(spec, 0.5, layout=QubitLayout(perm))
    u = circuit_matrix(c)
    ref = oracle(spec, 0.5, 8)
    P = np.zeros((256, 256))
    for s in range(256):
        t = sum(1 << perm[k] for k in range(8) if (s >> k) & 1)
        P[t, s] = 1
    assert np.allclose(u, P @ ref @ P.T, atol=1e-10)


def test_bad_layout():
    with pytest.raises(CircuitError):
        QubitLayout((0, 0, 1))


def test_single_excitation_unsupported():
    with pytest.raises(UnsupportedGenerator):
        emit_feb(build_generator("gs", (0, 2)), 0.3, width=4)


def test_qeb_double():
    c = emit_qeb_double((0, 3, 4, 7), 0.3, 8)
    assert np.linalg.norm(circuit_matrix(c) - qeb_matrix((0, 3, 4, 7), 0.3, 8)) < 1e-12
    assert c.counts()["cnot"] == 13


def test_strip_parity_gives_qeb():
    spec = table_row_spec(1, 0, 1, 2, 3)
    c = strip_parity(emit_feb(spec, 0.4, width=8), spec)
    assert c.counts()["cnot"] == 13


def test_inverse_and_json_roundtrip():
    spec = table_row_spec(6, 0, 1, 2, 3)
    c = emit_feb(spec, 0.6, width=8)
    assert np.allclose(circuit_matrix(c) @ circuit_matrix(c.inverse()), np.eye(256), atol=1e-12)
    back = Circuit.from_json(json.loads(c.dumps()))
    assert back.gates == c.gates


def test_qasm_export():
    c = Circuit(3, [mcry(0, [Control(1), Control(2, 0)], 0.2), CX(1, 2), X(0)])
    text = c.to_qasm()
    assert text.startswith("OPENQASM 2.0;")
    assert "ry(" in text and "cx q[1],q[2];" in text


def test_cancel_adjacent():
    c = Circuit(3, [CX(0, 1), CX(0, 1), X(2), RY(0, 0.1), CZ(1, 2), CZ(1, 2), X(2)])
    out = cancel_adjacent(c)
    assert [g.kind for g in out.gates] == ["ry"]
    assert np.allclose(circuit_matrix(out), circuit_matrix(c))


def test_cancel_adjacent_preserves_product():
    specs = table_row_specs()
    c = Circuit(8)
    for s in specs[:4]:
        c.extend(emit_feb(s, 0.3, width=8).gates)
    out = cancel_adjacent(c)
    assert len(out) < len(c)
    assert np.allclose(circuit_matrix(out), circuit_matrix(c), atol=1e-10)


def test_emit_product_order_and_skip():
    a = table_row_spec(1, 0, 1, 2, 3)
    b = table_row_spec(7, 0, 1, 2, 3)
    c = emit_product([a, b], [0.3, 0.0], (0, 1), 8)
    assert np.allclose(circuit_matrix(c), oracle(a, 0.3, 8), atol=1e-10)
    c = emit_product([a, b], [0.3, -0.8], (0, 1), 8)
    want = oracle(a, 0.3, 8) @ oracle(b, -0.8, 8)
    assert np.allclose(circuit_matrix(c), want, atol=1e-10)


def test_interpolation():
    t = np.linspace(0, 1, 11)
    table = ParameterTable(t, np.stack([np.sin(t), t ** 3], axis=1), np.ones(11), np.zeros(11), "x", (0, 1))
    assert np.array_equal(interpolate_alphas(table, 0.3), table.alphas[3])
    assert np.allclose(interpolate_alphas(table, 0.35), [math.sin(0.35), 0.35 ** 3], atol=1e-5)
    with pytest.raises(ThetaOutOfRange):
        interpolate_alphas(table, 1.5)


def test_count_report_small_algebra(basis5):
    rep = count_report(basis5.elements)
    assert rep.staircases == 8
    assert rep.fixed_cnot == 81
    assert rep.ry == 64


def test_spin_flip_detection():
    flip = GeneratorSpec((up(0), dn(1)), (dn(0), up(1)))
    assert table_row_of(table_row_spec(7, 0, 1, 2, 3)) == 7
    ec = element_count(flip)
    assert ec.row is None
    assert ec.emitted_cnot == emit_feb(flip, 0.1, width=4).counts()["cnot"]
