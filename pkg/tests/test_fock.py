import math

import numpy as np
import pytest

from spinwn.fermion import annihilation, build_generator, creation, dn, excitation, number_string, up
from spinwn.fock import (
    MAX_REGISTER, NotAntiHermitian, RegisterTooLarge, basis_vector, closed_form_ppqr,
    commutator_norm, diagonal_symmetries, dump_matrix, expm_antihermitian, frobenius_distance,
    load_matrix, symmetry_expectations, symmetry_operators, to_matrix, to_sparse,
)


def test_single_creation_matrix_sign():
    # a1^ on |bit0> picks up the parity of occupied lower modes
    m = to_matrix(creation(1), 2)
    assert m[0b11, 0b01] == -1.0
    assert m[0b10, 0b00] == 1.0


def test_matrix_is_homomorphism():
    x = excitation([0], [2]) + 0.3 * number_string([1])
    y = excitation([1, 3], [0, 2])
    lhs = to_matrix(x * y, 4)
    rhs = to_matrix(x, 4) @ to_matrix(y, 4)
    assert np.allclose(lhs, rhs, atol=1e-14)


def test_sparse_matches_dense():
    g = build_generator("ppqr", (0, 1, 2))
    assert np.allclose(to_sparse(g, 6).toarray(), to_matrix(g, 6))


def test_register_cap():
    with pytest.raises(RegisterTooLarge):
        to_matrix(creation(0), MAX_REGISTER + 1)
    with pytest.raises(ValueError, match="outside register"):
        to_matrix(creation(5), 4)


def test_expm_rejects_non_antihermitian():
    with pytest.raises(NotAntiHermitian):
        expm_antihermitian(to_matrix(number_string([0]), 2))


def test_expm_is_orthogonal():
    m = to_matrix(build_generator("int0", (0, 1, 2, 3)), 8)
    u = expm_antihermitian(m, 0.83)
    assert np.allclose(u @ u.T, np.eye(256), atol=1e-12)


@pytest.mark.parametrize("theta", [-7.1, -0.4, 0.0, 0.9, math.pi / 2, 3.3, 10.0])
def test_closed_form_ppqr_matches_exponential(theta):
    g = to_matrix(build_generator("ppqr", (0, 1, 2)), 6)
    assert frobenius_distance(closed_form_ppqr(theta, (0, 1, 2), 6), expm_antihermitian(g, theta)) < 1e-10


def test_frobenius_shape_mismatch():
    with pytest.raises(ValueError):
        frobenius_distance(np.eye(2), np.eye(4))


def test_symmetry_operators_on_basis_states():
    ops = symmetry_operators(4)
    n, sz = diagonal_symmetries(4)
    assert np.allclose(np.diag(ops.N), n)
    assert np.allclose(np.diag(ops.Sz), sz)
    # singlet (|ud,0> - |du,0>)... two-electron open shell triplet/singlet
    a = basis_vector(0b0110, 4)  # 0d 1u
    b = basis_vector(0b1001, 4)  # 0u 1d
    singlet = (b - a) / math.sqrt(2)
    triplet = (b + a) / math.sqrt(2)
    assert abs(singlet @ ops.S2 @ singlet) < 1e-12
    assert abs(triplet @ ops.S2 @ triplet - 2.0) < 1e-12


@pytest.mark.parametrize("family,orbs,n", [("ppqr", (0, 1, 2), 6), ("int0", (0, 1, 2, 3), 8),
                                           ("int1", (0, 1, 2, 3), 8), ("sags", (0, 1), 4)])
def test_spin_adapted_generators_commute_with_symmetries(family, orbs, n):
    g = to_matrix(build_generator(family, orbs), n)
    ops = symmetry_operators(n)
    for m in (ops.N, ops.Sz, ops.S2):
        assert commutator_norm(g, m) < 1e-12


def test_spinorbital_double_breaks_s2():
    g = to_matrix(excitation([up(0), dn(1)], [up(2), dn(3)]), 8)
    ops = symmetry_operators(8)
    assert commutator_norm(g, ops.N) < 1e-12
    assert commutator_norm(g, ops.S2) > 1e-3


def test_symmetry_expectations_of_reference():
    u = expm_antihermitian(to_matrix(build_generator("ppqr", (0, 1, 2)), 6), 0.7)
    e = symmetry_expectations(u, "110000", 6)
    assert math.isclose(e["N"], 2.0)
    assert abs(e["S2"]) < 1e-12 and e["sigma_S2"] < 1e-7


def test_matrix_dump_roundtrip(tmp_path):
    m = to_matrix(excitation([0], [1]), 2)
    dump_matrix(tmp_path / "m.bin", m, 2)
    back, reg = load_matrix(tmp_path / "m.bin")
    assert reg == 2 and np.array_equal(back, m)


def test_annihilation_on_vacuum():
    assert not np.any(to_matrix(annihilation(0), 1)[:, 0])
