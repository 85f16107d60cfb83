"""ADAPT-VQE on sector-restricted statevectors.

Everything lives in the (N, Sz) sector of the reference determinant: the
Hamiltonian, S^2 and every pool generator are sparse matrices over the sector
basis, so H6/STO-6G (12 spinorbitals, 3 alpha + 3 beta) is a 400-dimensional
problem.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy.optimize
import scipy.sparse as sp

from .fermion import OperatorExpr, build_generator, dn, excitation, normal_order, up
from .fock import MAX_REGISTER, apply_string, symmetry_exprs

DATA_DIR = Path(__file__).parent / "data"


class FcidumpError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class DimensionOverflow(ValueError):
    pass


# ---------------------------------------------------------------------------
# Hamiltonian
# ---------------------------------------------------------------------------


@dataclass
class MolecularHamiltonian:
    n_spatial: int
    e_core: float
    h1: np.ndarray
    h2: np.ndarray  # chemist (pq|rs)
    nelec: int | None = None
    ms2: int = 0
    irreps: list[int] | None = None
    isym: int = 1

    @property
    def n_spinorbitals(self) -> int:
        return 2 * self.n_spatial

    def to_expr(self) -> OperatorExpr:
        """Second-quantized H including the core energy."""
        n = self.n_spatial
        terms: dict = {}

        def add(x: OperatorExpr, c: float):
            for k, v in x.terms.items():
                terms[k] = terms.get(k, 0.0) + c * v

        add(OperatorExpr.identity(), self.e_core)
        spins = (up, dn)
        for p, q in itertools.product(range(n), repeat=2):
            if self.h1[p, q] != 0.0:
                for f in spins:
                    add(normal_order([(f(p), "create"), (f(q), "annihilate")]), self.h1[p, q])
        for p, q, r, s in itertools.product(range(n), repeat=4):
            g = self.h2[p, q, r, s]
            if g == 0.0:
                continue
            for f, h in itertools.product(spins, repeat=2):
                if f(p) == h(r) or f(q) == h(s):
                    continue
                add(normal_order([(f(p), "create"), (h(r), "create"), (h(s), "annihilate"),
                                  (f(q), "annihilate")]), 0.5 * g)
        return OperatorExpr(terms)

    def rotate(self, c: np.ndarray) -> "MolecularHamiltonian":
        """Integrals in the orbital basis given by the columns of ``c``."""
        h1 = c.T @ self.h1 @ c
        h2 = np.einsum("pqrs,pi,qj,rk,sl->ijkl", self.h2, c, c, c, c, optimize=True)
        return MolecularHamiltonian(self.n_spatial, self.e_core, h1, h2, self.nelec, self.ms2, None, self.isym)


_HEADER = re.compile(r"&FCI(.*?)(&END|/)", re.S | re.I)


def _header_fields(text: str) -> dict[str, list[int]]:
    out = {}
    for key, raw in re.findall(r"([A-Za-z_][A-Za-z_0-9]*)\s*=\s*([^=]*?)(?=[A-Za-z_][A-Za-z_0-9]*\s*=|$)", text, re.S):
        vals = [v for v in re.split(r"[,\s]+", raw.strip()) if v]
        out[key.upper()] = [int(v) for v in vals]
    return out


def parse_fcidump(source) -> MolecularHamiltonian:
    """Parse FCIDUMP text (or a path).  Errors carry the offending line number."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and "&" not in source):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise FcidumpError(f"cannot read {source}: {exc}") from exc
    else:
        text = source
    m = _HEADER.search(text)
    if m is None:
        raise FcidumpError("missing &FCI ... &END namelist header", 1)
    header = m.group(1)
    try:
        fields_ = _header_fields(header)
    except ValueError as exc:
        raise FcidumpError(f"malformed header: {exc}", 1) from exc
    norb, nelec, ms2 = fields_.get("NORB"), fields_.get("NELEC"), fields_.get("MS2")
    orbsym, isym = fields_.get("ORBSYM"), fields_.get("ISYM")
    if not norb:
        raise FcidumpError("header lacks NORB", 1)
    n = norb[0]
    if n < 1:
        raise FcidumpError("NORB must be positive", 1)
    if orbsym is not None and len(orbsym) != n:
        raise FcidumpError(f"ORBSYM has {len(orbsym)} entries for NORB={n}", 1)
    if orbsym is not None and min(orbsym) == 0:
        # some writers emit 0-based XOR ids
        orbsym = [o + 1 for o in orbsym]
    h1 = np.zeros((n, n))
    h2 = np.zeros((n, n, n, n))
    core = 0.0
    body_start = text[: m.end()].count("\n") + 1
    for lineno, line in enumerate(text[m.end():].splitlines(), start=body_start):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 5:
            raise FcidumpError(f"expected 'value i j k l', got {line.strip()!r}", lineno)
        try:
            val = float(fields[0].replace("D", "E").replace("d", "e"))
        except ValueError:
            raise FcidumpError(f"non-numeric value {fields[0]!r}", lineno) from None
        try:
            i, j, k, l = (int(x) for x in fields[1:])
        except ValueError:
            raise FcidumpError(f"non-integer index in {line.strip()!r}", lineno) from None
        if any(x < 0 or x > n for x in (i, j, k, l)):
            raise FcidumpError(f"index out of range 0..{n} in {line.strip()!r}", lineno)
        if i == j == k == l == 0:
            core += val
        elif k == l == 0:
            if i == 0 or j == 0:
                raise FcidumpError(f"incomplete one-electron index in {line.strip()!r}", lineno)
            h1[i - 1, j - 1] = h1[j - 1, i - 1] = val
        elif 0 in (i, j, k, l):
            raise FcidumpError(f"incomplete two-electron index in {line.strip()!r}", lineno)
        else:
            p, q, r, s = i - 1, j - 1, k - 1, l - 1
            for a, b, c, d in ((p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
                               (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p)):
                h2[a, b, c, d] = val
    return MolecularHamiltonian(n, core, h1, h2, nelec[0] if nelec else None, ms2[0] if ms2 else 0,
                                orbsym, isym[0] if isym else 1)


def write_fcidump(h: MolecularHamiltonian, path=None, tol: float = 1e-14) -> str:
    n = h.n_spatial
    orbsym = h.irreps or [1] * n
    lines = [f" &FCI NORB={n},NELEC={h.nelec or 0},MS2={h.ms2},",
             "  ORBSYM=" + ",".join(map(str, orbsym)) + ",", f"  ISYM={h.isym},", " &END"]
    for p, q, r, s in itertools.product(range(n), repeat=4):
        if p < q or r < s or (p * n + q) < (r * n + s):
            continue
        if abs(h.h2[p, q, r, s]) > tol:
            lines.append(f"{h.h2[p, q, r, s]: .16e} {p + 1} {q + 1} {r + 1} {s + 1}")
    for p in range(n):
        for q in range(p + 1):
            if abs(h.h1[p, q]) > tol:
                lines.append(f"{h.h1[p, q]: .16e} {p + 1} {q + 1} 0 0")
    lines.append(f"{h.e_core: .16e} 0 0 0 0")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


# ---------------------------------------------------------------------------
# Sector realization
# ---------------------------------------------------------------------------


@dataclass
class Sector:
    n: int
    n_up: int
    n_dn: int
    states: np.ndarray
    index: dict

    @classmethod
    def build(cls, n_spinorbitals: int, n_up: int, n_dn: int) -> "Sector":
        if n_spinorbitals > MAX_REGISTER:
            raise DimensionOverflow(f"{n_spinorbitals} spinorbitals exceed bound {MAX_REGISTER}")
        all_states = np.arange(1 << n_spinorbitals, dtype=np.int64)
        upm = sum(1 << k for k in range(0, n_spinorbitals, 2))
        nu = np.bitwise_count(all_states & upm)
        nd = np.bitwise_count(all_states & ~upm)
        states = all_states[(nu == n_up) & (nd == n_dn)]
        return cls(n_spinorbitals, n_up, n_dn, states, {int(s): i for i, s in enumerate(states)})

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def n_electrons(self) -> int:
        return self.n_up + self.n_dn

    @property
    def sz(self) -> float:
        return 0.5 * (self.n_up - self.n_dn)

    def matrix(self, x: OperatorExpr) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        pos = np.full(1 << self.n, -1, dtype=np.int64)
        pos[self.states] = np.arange(self.dim)
        for key, coeff in x.terms.items():
            out, sgn, valid = apply_string(self.states, key)
            tgt = np.where(valid, pos[np.where(valid, out, 0)], -1)
            ok = tgt >= 0
            if np.any(valid & ~ok):
                raise ValueError("operator leaves the (N, Sz) sector")
            rows.append(tgt[ok])
            cols.append(np.flatnonzero(ok))
            vals.append(coeff * sgn[ok].astype(float))
        if not rows:
            return sp.csr_matrix((self.dim, self.dim))
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(self.dim, self.dim))

    def vector(self, det: int) -> np.ndarray:
        v = np.zeros(self.dim)
        v[self.index[int(det)]] = 1.0
        return v


def reference_determinant(h: MolecularHamiltonian, n_up: int | None = None, n_dn: int | None = None) -> int:
    """Aufbau on the diagonal of h1 (stable order for ties)."""
    if n_up is None or n_dn is None:
        if h.nelec is None:
            raise ValueError("electron count unknown: set NELEC or pass n_up/n_dn")
        n_up = (h.nelec + h.ms2) // 2
        n_dn = h.nelec - n_up
    order = sorted(range(h.n_spatial), key=lambda p: (h.h1[p, p], p))
    det = 0
    for p in order[:n_up]:
        det |= 1 << up(p)
    for p in order[:n_dn]:
        det |= 1 << dn(p)
    return det


def sector_of(det: int, n: int) -> tuple[int, int]:
    nu = sum((det >> k) & 1 for k in range(0, n, 2))
    nd = sum((det >> k) & 1 for k in range(1, n, 2))
    return nu, nd


def exact_ground_state(h: MolecularHamiltonian, sector: tuple[int, float] | None = None,
                       n_up: int | None = None, n_dn: int | None = None) -> tuple[float, np.ndarray]:
    """Lowest eigenpair within (N, Sz); ``sector`` is (N, Sz)."""
    if sector is not None:
        N, sz = sector
        n_up = int(round(N / 2 + sz))
        n_dn = int(N) - n_up
    if n_up is None or n_dn is None:
        n_up, n_dn = sector_of(reference_determinant(h), h.n_spinorbitals)
    if h.n_spinorbitals > MAX_REGISTER:
        raise DimensionOverflow(f"{h.n_spinorbitals} spinorbitals exceed bound {MAX_REGISTER}")
    sec = Sector.build(h.n_spinorbitals, n_up, n_dn)
    H = sec.matrix(h.to_expr()).toarray()
    w, v = np.linalg.eigh(H)
    return float(w[0]), v[:, 0]


# ---------------------------------------------------------------------------
# Pools
# ---------------------------------------------------------------------------


POOL_KINDS = ("gsd", "sagsd", "sagspd", "sagsd0", "pdint0")


@dataclass
class PoolElement:
    label: str
    expr: OperatorExpr
    kind: str  # single / pair / ppqr / int0 / int1 / so-single / so-double


@dataclass
class OperatorPool:
    kind: str
    elements: list[PoolElement]
    irreps: list[int] | None = None

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.elements]

    def __len__(self) -> int:
        return len(self.elements)

    def filter_kinds(self, kinds: Sequence[str]) -> "OperatorPool":
        return OperatorPool(self.kind, [e for e in self.elements if e.kind in kinds], self.irreps)


def _symmetric(orbs: Sequence[int], irreps: Sequence[int] | None) -> bool:
    if irreps is None:
        return True
    acc = 0
    for o in orbs:
        acc ^= irreps[o] - 1
    return acc == 0


def _spin_adapted_elements(n: int, irreps) -> list[PoolElement]:
    out: list[PoolElement] = []
    for P, Q in itertools.combinations(range(n), 2):
        if _symmetric((P, Q), irreps):
            out.append(PoolElement(f"A_{P}^{Q}", build_generator("sags", (P, Q)), "single"))
    for P, Q in itertools.combinations(range(n), 2):
        if _symmetric((P, P, Q, Q), irreps):
            out.append(PoolElement(f"A_{P}{P}^{Q}{Q}", build_generator("ppqq", (P, Q)), "pair"))
    for P in range(n):
        for Q, R in itertools.combinations([o for o in range(n) if o != P], 2):
            if _symmetric((P, P, Q, R), irreps):
                out.append(PoolElement(f"A_{P}{P}^{Q}{R}", build_generator("ppqr", (P, Q, R)), "ppqr"))
    for quad in itertools.combinations(range(n), 4):
        if not _symmetric(quad, irreps):
            continue
        a, b, c, d = quad
        for (P, Q), (R, S) in (((a, b), (c, d)), ((a, c), (b, d)), ((a, d), (b, c))):
            out.append(PoolElement(f"0A_{P}{Q}^{R}{S}", build_generator("int0", (P, Q, R, S)), "int0"))
            out.append(PoolElement(f"1A_{P}{Q}^{R}{S}", build_generator("int1", (P, Q, R, S)), "int1"))
    return out


def _gsd_elements(n: int, irreps) -> list[PoolElement]:
    out: list[PoolElement] = []
    m = 2 * n

    def sym(*so):
        return _symmetric([k // 2 for k in so], irreps)

    for p, q in itertools.combinations(range(m), 2):
        if p % 2 == q % 2 and sym(p, q):
            out.append(PoolElement(f"a_{p}^{q}", excitation([p], [q]), "so-single"))
    pairs = list(itertools.combinations(range(m), 2))
    for (i, (p, q)), (j, (r, s)) in itertools.combinations(enumerate(pairs), 2):
        if {p, q} & {r, s}:
            continue
        if sorted((p % 2, q % 2)) != sorted((r % 2, s % 2)):
            continue
        if sym(p, q, r, s):
            out.append(PoolElement(f"a_{p}{q}^{r}{s}", excitation([p, q], [r, s]), "so-double"))
    return out


def build_pool(kind: str, n_spatial: int, irreps: Sequence[int] | None = None,
               kinds: Sequence[str] | None = None) -> OperatorPool:
    """Operator pool over ``n_spatial`` orbitals.

    ``kinds`` overrides the element types of a spin-adapted pool (the pool
    memberships are configurable).
    """
    kind = kind.lower()
    if n_spatial < 2:
        raise ValueError("pools need at least two spatial orbitals")
    irreps = list(irreps) if irreps is not None else None
    if kind == "gsd":
        return OperatorPool(kind, _gsd_elements(n_spatial, irreps), irreps)
    default = {
        "sagsd": ("single", "pair", "ppqr", "int0", "int1"),
        "sagspd": ("single", "pair"),
        "sagsd0": ("single", "pair", "ppqr", "int0"),
        "pdint0": ("pair", "int0"),
    }
    if kind not in default and kinds is None:
        raise ValueError(f"unknown pool kind {kind!r}; expected one of {POOL_KINDS}")
    keep = tuple(kinds) if kinds is not None else default[kind]
    return OperatorPool(kind, [e for e in _spin_adapted_elements(n_spatial, irreps) if e.kind in keep], irreps)


# ---------------------------------------------------------------------------
# ADAPT-VQE
# ---------------------------------------------------------------------------


@dataclass
class IterationRecord:
    iteration: int
    n_params: int
    energy: float
    error: float
    s2: float
    sigma_s2: float
    sz: float
    n: float
    max_gradient: float
    selected: str
    stalled: bool = False


@dataclass
class AdaptState:
    ansatz: list[tuple[int, float]]
    labels: list[str]
    energy: float
    reference: int
    exact_energy: float | None
    history: list[IterationRecord] = field(default_factory=list)
    stop_reason: str = ""

    def to_csv(self, path=None, meta: str | None = None) -> str:
        buf = io.StringIO()
        if meta:
            buf.write(f"# {meta}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iter", "n_params", "energy", "error_vs_exact", "S2", "sigma_S2", "max_gradient"])
        for r in self.history:
            w.writerow([r.iteration, r.n_params, f"{r.energy:.12f}", f"{r.error:.6e}", f"{r.s2:.6e}",
                        f"{r.sigma_s2:.6e}", f"{r.max_gradient:.6e}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    def ansatz_json(self) -> dict:
        return {"reference": self.reference, "energy": self.energy,
                "operators": [{"label": self.labels[i], "parameter": a} for i, a in self.ansatz]}


class AdaptProblem:
    """Sector matrices for H, S^2 and the pool."""

    def __init__(self, h: MolecularHamiltonian, pool: OperatorPool, reference: int | None = None):
        self.h = h
        self.pool = pool
        self.reference = reference_determinant(h) if reference is None else int(reference)
        nu, nd = sector_of(self.reference, h.n_spinorbitals)
        self.sector = Sector.build(h.n_spinorbitals, nu, nd)
        self.H = self.sector.matrix(h.to_expr())
        N, Sz, S2 = symmetry_exprs(h.n_spinorbitals)
        self.S2 = self.sector.matrix(S2)
        self.Sz = self.sector.matrix(Sz)
        self.N = self.sector.matrix(N)
        self.A = [self.sector.matrix(e.expr) for e in pool.elements]
        self.psi0 = self.sector.vector(self.reference)
        self._eig: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def propagate(self, j: int, t: float, v: np.ndarray) -> np.ndarray:
        """exp(t A_j) v through a cached eigendecomposition of i A_j."""
        if t == 0.0:
            return v
        if j not in self._eig:
            self._eig[j] = np.linalg.eigh(1j * self.A[j].toarray())
        w, u = self._eig[j]
        return (u @ (np.exp(-1j * t * w) * (u.conj().T @ v))).real

    def state(self, ops: Sequence[int], params: Sequence[float]) -> np.ndarray:
        psi = self.psi0
        for j, t in zip(ops, params):
            psi = self.propagate(j, t, psi)
        return psi

    def energy(self, ops, params) -> float:
        psi = self.state(ops, params)
        return float(psi @ (self.H @ psi))

    def energy_and_gradient(self, ops, params) -> tuple[float, np.ndarray]:
        phis = [self.psi0]
        for j, t in zip(ops, params):
            phis.append(self.propagate(j, t, phis[-1]))
        psi = phis[-1]
        lam = self.H @ psi
        e = float(psi @ lam)
        grad = np.zeros(len(ops))
        phi = psi
        for k in range(len(ops) - 1, -1, -1):
            A = self.A[ops[k]]
            grad[k] = 2.0 * float(lam @ (A @ phi))
            if k:
                phi = phis[k]
                lam = self.propagate(ops[k], -params[k], lam)
        return e, grad

    def pool_gradients(self, psi: np.ndarray) -> np.ndarray:
        """dE/dtheta at theta = 0 for appending each element: 2 <psi|H A|psi>."""
        hpsi = self.H @ psi
        return np.array([2.0 * float(hpsi @ (A @ psi)) for A in self.A])

    def expectations(self, psi: np.ndarray) -> dict:
        s2v = self.S2 @ psi
        s2 = float(psi @ s2v)
        var = float(s2v @ s2v) - s2 * s2
        return {"S2": s2, "sigma_S2": math.sqrt(max(var, 0.0)),
                "Sz": float(psi @ (self.Sz @ psi)), "N": float(psi @ (self.N @ psi))}


def adapt_vqe(h: MolecularHamiltonian, pool: OperatorPool, max_params: int | None = None,
              grad_tol: float = 1e-6, micro_gtol: float = 1e-6, micro_maxiter: int = 2000,
              energy_tol: float | None = None, reference: int | None = None,
              exact_energy: float | None = None, callback: Callable | None = None) -> AdaptState:
    """Grow the ansatz one operator at a time (largest |gradient|, lowest index on ties).

    Stops when the ansatz reaches ``max_params`` (default: sector dimension - 1),
    when the largest pool gradient drops below ``grad_tol``, or when the error
    falls below ``energy_tol``.
    """
    prob = AdaptProblem(h, pool, reference)
    if exact_energy is None:
        w = np.linalg.eigvalsh(prob.H.toarray())
        exact_energy = float(w[0])
    cap = prob.sector.dim - 1 if max_params is None else int(max_params)
    ops: list[int] = []
    params = np.zeros(0)
    psi = prob.psi0
    energy = float(psi @ (prob.H @ psi))
    state = AdaptState([], pool.labels, energy, prob.reference, exact_energy)
    ex = prob.expectations(psi)
    g0 = prob.pool_gradients(psi)
    state.history.append(IterationRecord(0, 0, energy, energy - exact_energy, ex["S2"], ex["sigma_S2"],
                                         ex["Sz"], ex["N"], float(np.max(np.abs(g0))) if len(g0) else 0.0, ""))
    it = 0
    while True:
        if len(ops) >= cap:
            state.stop_reason = "max_params"
            break
        if energy_tol is not None and energy - exact_energy < energy_tol:
            state.stop_reason = "energy_tol"
            break
        g = prob.pool_gradients(psi)
        if len(g) == 0 or np.max(np.abs(g)) < grad_tol:
            state.stop_reason = "gradient"
            break
        j = int(np.argmax(np.abs(g)))  # first maximal index wins ties
        it += 1
        ops.append(j)
        x0 = np.append(params, 0.0)
        res = scipy.optimize.minimize(lambda x: prob.energy_and_gradient(ops, x), x0, jac=True,
                                      method="BFGS", options={"gtol": micro_gtol, "maxiter": micro_maxiter})
        params = res.x
        e_new, gr = prob.energy_and_gradient(ops, params)
        stalled = bool(np.max(np.abs(gr)) > micro_gtol)
        if e_new > energy:
            # BFGS never ends above its start; guard against roundoff in the last digits
            params = x0
            e_new = float(prob.energy(ops, params))
        energy = e_new
        psi = prob.state(ops, params)
        ex = prob.expectations(psi)
        rec = IterationRecord(it, len(ops), energy, energy - exact_energy, ex["S2"], ex["sigma_S2"],
                              ex["Sz"], ex["N"], float(np.max(np.abs(g))), pool.labels[j], stalled)
        state.history.append(rec)
        if callback is not None:
            callback(rec)
    state.ansatz = list(zip(ops, map(float, params)))
    state.energy = energy
    return state


def finite_difference_gradients(prob: AdaptProblem, ops, params, step: float = 1e-5) -> np.ndarray:
    """Central differences of E(theta_new) at theta_new = 0 for every pool element."""
    out = np.zeros(len(prob.A))
    for j in range(len(prob.A)):
        ep = prob.energy(list(ops) + [j], list(params) + [step])
        em = prob.energy(list(ops) + [j], list(params) + [-step])
        out[j] = (ep - em) / (2 * step)
    return out


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------


def hubbard_dimer(t: float = 1.0, U: float = 4.0, basis: str = "site") -> MolecularHamiltonian:
    """Two-site Hubbard model at half filling, in the site or bonding/antibonding basis."""
    h1 = np.array([[0.0, -t], [-t, 0.0]])
    h2 = np.zeros((2, 2, 2, 2))
    h2[0, 0, 0, 0] = h2[1, 1, 1, 1] = U
    h = MolecularHamiltonian(2, 0.0, h1, h2, nelec=2, ms2=0)
    if basis == "site":
        return h
    if basis == "mo":
        c = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2)
        return h.rotate(c)
    raise ValueError(f"unknown basis {basis!r}")


def load_fixture(name: str) -> MolecularHamiltonian:
    return parse_fcidump(DATA_DIR / name)


def h6_geometry() -> list[tuple[str, float, float, float]]:
    """D2h distorted hexagon (angstrom) used for the H6/STO-6G experiment."""
    out = []
    for line in (DATA_DIR / "h6_geometry.xyz").read_text().splitlines()[2:]:
        f = line.split()
        if len(f) == 4:
            out.append((f[0], float(f[1]), float(f[2]), float(f[3])))
    return out


def pool_commutant_check(pool: OperatorPool, n_spatial: int, tol: float = 1e-10) -> dict:
    """[E, N], [E, Sz] (and [E, S^2] for spin-adapted elements) on the full register."""
    from .fock import to_matrix

    n = 2 * n_spatial
    N, Sz, S2 = (to_matrix(x, n) for x in symmetry_exprs(n))
    worst = {"N": 0.0, "Sz": 0.0, "S2": 0.0}
    for e in pool.elements:
        m = to_matrix(e.expr, n)
        worst["N"] = max(worst["N"], float(np.linalg.norm(m @ N - N @ m)))
        worst["Sz"] = max(worst["Sz"], float(np.linalg.norm(m @ Sz - Sz @ m)))
        if not e.kind.startswith("so-"):
            worst["S2"] = max(worst["S2"], float(np.linalg.norm(m @ S2 - S2 @ m)))
    worst["ok"] = all(v < tol for v in worst.values())
    return worst


def dump_ansatz(state: AdaptState, path) -> None:
    Path(path).write_text(json.dumps(state.ansatz_json(), indent=2), encoding="utf-8")


__all__ = [
    "POOL_KINDS", "AdaptProblem", "AdaptState", "FcidumpError", "IterationRecord", "MolecularHamiltonian", "OperatorPool",
    "PoolElement", "Sector", "adapt_vqe", "build_pool", "exact_ground_state", "finite_difference_gradients",
    "hubbard_dimer", "h6_geometry", "load_fixture", "parse_fcidump", "pool_commutant_check",
    "reference_determinant", "write_fcidump",
]
