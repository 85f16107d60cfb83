import math

import numpy as np
import pytest

from spinwn.vqe import (
    POOL_KINDS, AdaptProblem, FcidumpError, MolecularHamiltonian, Sector, adapt_vqe, build_pool,
    exact_ground_state, finite_difference_gradients, h6_geometry, hubbard_dimer, load_fixture,
    parse_fcidump, pool_commutant_check, reference_determinant, write_fcidump,
)

EXACT_DIMER = 2 - 2 * math.sqrt(2)


def random_hamiltonian(n=3, seed=3, nelec=2):
    rng = np.random.default_rng(seed)
    h1 = rng.normal(size=(n, n))
    h1 = h1 + h1.T
    g = rng.normal(size=(n,) * 4)
    g = g + g.transpose(1, 0, 2, 3)
    g = g + g.transpose(0, 1, 3, 2)
    g = g + g.transpose(2, 3, 0, 1)
    return MolecularHamiltonian(n, 0.3, h1, 0.1 * g, nelec=nelec, ms2=0)


def test_one_orbital_energy():
    h = parse_fcidump(" &FCI NORB=1,NELEC=2,MS2=0, &END\n -1.0 1 1 0 0\n 0.7 1 1 1 1\n 0.5 0 0 0 0\n")
    assert math.isclose(exact_ground_state(h)[0], 2 * -1.0 + 0.7 + 0.5)


def test_fcidump_symmetry_expansion():
    h = parse_fcidump(" &FCI NORB=2,NELEC=2,MS2=0,\n ORBSYM=1,1,\n ISYM=1,\n &END\n"
                      " 0.25 2 1 1 1\n 0.1 2 1 0 0\n")
    for idx in [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]:
        assert h.h2[idx] == 0.25
    assert h.h1[0, 1] == h.h1[1, 0] == 0.1
    assert h.nelec == 2 and h.irreps == [1, 1]


def test_fcidump_zero_based_orbsym_shifted():
    h = parse_fcidump(" &FCI NORB=2,NELEC=2,MS2=0,ORBSYM=0,3, &END\n 1.0 1 1 0 0\n")
    assert h.irreps == [1, 4]


@pytest.mark.parametrize("text,line", [
    (" &FCI NORB=1,NELEC=2, &END\n abc 1 1 0 0\n", 2),
    (" &FCI NORB=1,NELEC=2, &END\n 1.0 3 1 0 0\n", 2),
    (" &FCI NORB=1,NELEC=2, &END\n 1.0 1 1\n", 2),
])
def test_fcidump_errors_carry_line(text, line):
    with pytest.raises(FcidumpError) as exc:
        parse_fcidump(text)
    assert exc.value.line == line


def test_fcidump_missing_header():
    with pytest.raises(FcidumpError):
        parse_fcidump("1.0 1 1 0 0\n")


def test_fcidump_roundtrip(tmp_path):
    h = random_hamiltonian()
    write_fcidump(h, tmp_path / "h.fcidump")
    back = parse_fcidump(tmp_path / "h.fcidump")
    assert np.allclose(back.h1, h.h1) and np.allclose(back.h2, h.h2)
    assert math.isclose(back.e_core, h.e_core)


def test_shipped_fixtures_agree():
    site = load_fixture("hubbard_dimer_site.fcidump")
    mo = load_fixture("hubbard_dimer_mo.fcidump")
    for h in (site, mo, hubbard_dimer(basis="site"), hubbard_dimer(basis="mo")):
        assert math.isclose(exact_ground_state(h)[0], EXACT_DIMER, abs_tol=1e-12)


def test_rotation_preserves_spectrum():
    h = random_hamiltonian()
    q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(3, 3)))
    assert math.isclose(exact_ground_state(h)[0], exact_ground_state(h.rotate(q))[0], abs_tol=1e-10)


def test_sector_dimensions():
    s = Sector.build(12, 3, 3)
    assert s.dim == 400 and s.n_electrons == 3 + 3 and s.sz == 0.0


def test_reference_is_aufbau():
    h = hubbard_dimer(basis="mo")
    assert reference_determinant(h) == 0b0011


@pytest.mark.parametrize("kind", POOL_KINDS)
def test_pool_symmetries(kind):
    pool = build_pool(kind, 3)
    assert len(pool) > 0
    rep = pool_commutant_check(pool, 3)
    assert rep["ok"], rep


def test_pool_sizes_grow_with_restrictions():
    n = 4
    sizes = {k: len(build_pool(k, n)) for k in POOL_KINDS}
    assert sizes["sagsd0"] < sizes["sagsd"]
    assert sizes["sagspd"] < sizes["sagsd"]


def test_spatial_symmetry_filter():
    irreps = [1, 2, 1, 2]
    full = build_pool("sagsd", 4)
    sym = build_pool("sagsd", 4, irreps)
    assert len(sym) < len(full)


def test_unknown_pool():
    with pytest.raises(ValueError):
        build_pool("nope", 2)


def test_pdint0_on_mo_dimer_reaches_exact():
    h = load_fixture("hubbard_dimer_mo.fcidump")
    st = adapt_vqe(h, build_pool("pdint0", 2))
    assert abs(st.energy - EXACT_DIMER) < 1e-8


@pytest.mark.parametrize("kind", ["sagsd", "gsd"])
def test_gradients_match_finite_differences(kind):
    h = random_hamiltonian()
    pool = build_pool(kind, 3)
    st = adapt_vqe(h, pool)
    prob = AdaptProblem(h, pool)
    ops = [i for i, _ in st.ansatz[:3]]
    params = [a for _, a in st.ansatz[:3]]
    psi = prob.state(ops, params)
    fd = finite_difference_gradients(prob, ops, params)
    assert np.max(np.abs(prob.pool_gradients(psi) - fd)) < 1e-6
    e, g = prob.energy_and_gradient(ops, params)
    eps = 1e-6
    for k in range(len(params)):
        p = list(params)
        p[k] += eps
        em = list(params)
        em[k] -= eps
        num = (prob.energy(ops, p) - prob.energy(ops, em)) / (2 * eps)
        assert abs(num - g[k]) < 1e-6


def test_energies_monotone_and_s2():
    h = random_hamiltonian(seed=5)
    st = adapt_vqe(h, build_pool("sagsd", 3))
    es = [r.energy for r in st.history]
    assert all(b <= a + 1e-12 for a, b in zip(es, es[1:]))
    assert max(r.s2 for r in st.history) < 1e-8
    assert abs(st.energy - st.exact_energy) < 1e-6


def test_gsd_contaminates_spin():
    h = random_hamiltonian()
    st = adapt_vqe(h, build_pool("gsd", 3))
    assert max(r.s2 for r in st.history) > 1e-3


def test_state_outputs(tmp_path):
    h = load_fixture("hubbard_dimer_mo.fcidump")
    st = adapt_vqe(h, build_pool("sagsd", 2))
    text = st.to_csv(tmp_path / "a.csv", meta="x")
    assert text.splitlines()[1] == "iter,n_params,energy,error_vs_exact,S2,sigma_S2,max_gradient"
    assert st.ansatz_json()["operators"]


def test_h6_geometry_fixture():
    geom = h6_geometry()
    assert len(geom) == 6 and all(a == "H" for a, *_ in geom)
    xs = sorted(round(x, 6) for _, x, _, _ in geom)
    assert xs == [-3.0, -2.0, -2.0, 2.0, 2.0, 3.0]
