import math

import numpy as np
import pytest

from spinwn import wn
from spinwn.fermion import build_generator, seed_generators
from spinwn.fock import expm_antihermitian, to_matrix
from spinwn.lie import LieBasis, lie_closure


@pytest.fixture(scope="module")
def adj5(basis5):
    return wn.make_adjoint(basis5)


@pytest.fixture(scope="module")
def system5(basis5, adj5):
    return wn.build_system(basis5, adj5, build_generator("ppqr", (0, 1, 2)))


def test_certificate(basis5):
    cert = wn.certify(basis5)
    assert cert.ok and cert.dim == 5


def test_uncertified_adjoint_refuses(basis5):
    adj = wn.make_adjoint(basis5, certify_basis=False)
    with pytest.raises(wn.ApplicabilityError):
        wn.adjoint_transform(np.eye(5)[0], 0, 0.3, adj)


def test_uncanonical_basis_fails_certification():
    # the raw closure is not in A*N form, so E^3 = -E does not hold elementwise
    raw = lie_closure(seed_generators("ppqr"))
    with pytest.raises(wn.ApplicabilityError):
        wn.make_adjoint(LieBasis(raw.elements))


def test_adjoint_transform_matches_conjugation(basis5, adj5):
    E = [to_matrix(x, 6) for x in basis5.exprs]
    rng = np.random.default_rng(1)
    for j in range(5):
        for i in range(5):
            a = rng.uniform(-3, 3)
            w = wn.adjoint_transform(np.eye(5)[i], j, a, adj5)
            u = expm_antihermitian(E[j], a)
            lhs = u @ E[i] @ u.T
            rhs = sum(c * e for c, e in zip(w, E))
            assert np.linalg.norm(lhs - rhs) < 1e-10


def test_generator_coordinates(system5):
    r = 1 / math.sqrt(2)
    assert np.allclose(system5.d, [r, -r, 0, 0, 0])


def test_generator_outside_span(basis5):
    with pytest.raises(ValueError):
        wn.generator_coordinates(basis5, build_generator("ppqq", (0, 1)))


def test_bad_ordering(basis5, adj5):
    with pytest.raises(ValueError):
        wn.build_system(basis5, adj5, np.zeros(5), ordering=(0, 0, 1, 2, 3))


def test_det_is_cos_alpha4(system5):
    rng = np.random.default_rng(2)
    for _ in range(10):
        a = rng.uniform(-4, 4, 5)
        assert abs(system5.det(a) - math.cos(a[3])) < 1e-12


def test_short_integration_matches_exponential(system5):
    table = wn.integrate(system5, 2.0, 41)
    assert table.singular_theta is None
    assert np.nanmax(table.residual) < 1e-9
    assert np.allclose(table.alphas[:, 0], table.thetas / math.sqrt(2), atol=1e-9)


def test_integration_on_symmetric_grid(system5):
    table = wn.integrate(system5, 3.0, 61, theta_min=-3.0, verify=False)
    assert len(table.thetas) == 61
    assert wn.classify_parity(table.thetas, table.alphas[:, 0]) == "odd"
    assert wn.classify_parity(table.thetas, table.alphas[:, 4]) == "even"


def test_classify_parity_requires_symmetric_grid():
    t = np.linspace(0, 1, 5)
    assert wn.classify_parity(t, t) == "unknown"


def test_parameter_table_csv_roundtrip(system5, tmp_path):
    table = wn.fill_det(wn.integrate(system5, 1.0, 11), system5)
    table.to_csv(tmp_path / "t.csv", meta="test")
    back = wn.ParameterTable.from_csv(tmp_path / "t.csv")
    assert np.array_equal(back.alphas, table.alphas)
    assert np.array_equal(back.thetas, table.thetas)
    assert (tmp_path / "t.csv").read_text().startswith("# test")


def test_diagnostics_without_det(basis5):
    t = np.linspace(-1, 1, 5)
    table = wn.ParameterTable(t, np.array([wn.closed_form_tilde(x) for x in t]), np.full(5, np.nan),
                              np.zeros(5), "closed-form", tuple(range(5)))
    d = table.diagnostics()
    assert d["min_abs_detM"] is None
    assert d["max_residual"] == 0.0


@pytest.mark.parametrize("theta", [-4.0, -math.pi / 2, -0.3, 0.0, 1.2, 3 * math.pi / 2 + 1e-6, 7.5])
def test_closed_form_tilde(basis5, theta):
    rep = wn.BlockRealization(wn.tilde_basis(basis5))
    target = wn.TargetPropagator(rep.combination(wn.tilde_generator_coords()))(theta)
    assert rep.distance(rep.product(wn.closed_form_tilde(theta), range(5)), target) < 1e-9


def test_frobenius_fit_matches_ode(basis5, system5):
    thetas = np.linspace(0, 2, 11)
    fit = wn.frobenius_fit(basis5, system5.d, thetas)
    ode = wn.integrate(system5, 2.0, 11)
    assert fit.residual.max() < 1e-10
    assert np.max(np.abs(fit.alphas - ode.alphas)) < 1e-6


def test_frobenius_fit_finite_difference_gradient(basis5, system5):
    fit = wn.frobenius_fit(basis5, system5.d, [0.0, 0.2, 0.4], gradient="3-point")
    assert fit.residual.max() < 1e-8


def test_sharing_pattern_detects_zero_and_sign():
    t = np.linspace(0, 1, 4)
    a = np.stack([t, -t, np.zeros(4), t ** 2], axis=1)
    table = wn.ParameterTable(t, a, np.ones(4), np.zeros(4), "x", (0, 1, 2, 3))
    assert wn.zero_trajectories(table) == [2]
    p = wn.sharing_pattern(table)
    assert p["independent"] == 2 and p["groups"][0] == [1, -2]
    assert wn.sharing_pattern(table, fold_sign=False)["independent"] == 3


def test_trotter_fit_short():
    fit = wn.trotter_like_fit(np.linspace(0, 1, 6), restarts=4)
    assert fit.residual.max() <= 1e-10
    ea, eb = wn.sum_constraint_error(fit, sign_b=-1.0)
    assert ea < 1e-8 and eb < 1e-8


def test_permutation_scan_two_orderings(basis5, adj5, system5):
    reps = wn.permutation_scan(basis5, adj5, system5.d, theta_max=5.0, points=501,
                               orderings=[(0, 1, 2, 3, 4), (4, 3, 2, 1, 0)], workers=1)
    assert [r.singular for r in reps] == [False, False]
    assert reps[0].parity == ["odd", "odd", "odd", "odd", "even"]
    assert wn.scan_summary(reps)["trotter_match_all"]


def test_scan_refuses_large_basis(basis28):
    adj = wn.Adjoint(wn.structure_constants(basis28), certified=True)
    with pytest.raises(ValueError):
        wn.permutation_scan(basis28, adj, np.zeros(28))
