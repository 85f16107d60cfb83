"""Wei-Norman product formulas.

The decomposition ``exp(theta * sum_i d_i E_i) = prod_i exp(alpha_i E_i)`` is solved
in the adjoint representation.  Every basis element obeys ``E^3 = -E`` and
``E [X, E] E = 0``, so conjugation by ``exp(alpha E_j)`` is the three-term map

    X -> X - sin(alpha) [X, E_j] + (1 - cos(alpha)) [[X, E_j], E_j]

which in structure-constant coordinates is ``R_j(alpha) = I - sin(alpha) K_j +
(1 - cos(alpha)) K_j^2`` with ``K_j v = coords([X(v), E_j])``.

Products are ordered left to right in the declared ordering.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize
from scipy.integrate import solve_ivp

from .fermion import OperatorExpr, check_cubic_closure, excitation, up, dn
from .fock import to_matrix
from .lie import LieBasis, StructureConstants, structure_constants

SINGULAR_DET = 1e-8
ODE_RTOL = 1e-12
ODE_ATOL = 1e-14


class ApplicabilityError(RuntimeError):
    """The closed-form conjugation was requested for an uncertified basis."""


class SingularityEncountered(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Cubic certification and adjoint transforms
# ---------------------------------------------------------------------------


@dataclass
class Certificate:
    dim: int
    worst_cubic: float
    violations: list

    @property
    def ok(self) -> bool:
        return self.worst_cubic < 1e-12 and not self.violations


def certify(basis: LieBasis) -> Certificate:
    """Run the cubic closure check on every element against every partner."""
    worst = 0.0
    bad = []
    elems = basis.elements
    for j, e in enumerate(elems):
        rep = check_cubic_closure(e, elems)
        worst = max(worst, rep.cubic_residual)
        bad.extend((j, v) for v in rep.violations)
    return Certificate(basis.dim, worst, bad)


@dataclass
class Adjoint:
    """Structure constants plus the cubic certificate that licenses the 3-term map."""

    sc: StructureConstants
    certified: bool = False
    K: np.ndarray = field(init=False, repr=False)
    K2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        d = self.sc.dim
        self.K = np.stack([self.sc.ad(j) for j in range(d)]) if d else np.zeros((0, 0, 0))
        self.K2 = np.einsum("jab,jbc->jac", self.K, self.K)

    def R(self, j: int, alpha: float) -> np.ndarray:
        d = self.sc.dim
        return np.eye(d) - math.sin(alpha) * self.K[j] + (1 - math.cos(alpha)) * self.K2[j]


def adjoint_transform(v: np.ndarray, j: int, alpha: float, adj: Adjoint) -> np.ndarray:
    """Coordinates of exp(alpha E_j) X(v) exp(-alpha E_j)."""
    if not adj.certified:
        raise ApplicabilityError("cubic conditions were never certified for this basis")
    kv = adj.K[j] @ v
    return v - math.sin(alpha) * kv + (1 - math.cos(alpha)) * (adj.K[j] @ kv)


def make_adjoint(basis: LieBasis, sc: StructureConstants | None = None, certify_basis: bool = True) -> Adjoint:
    sc = sc if sc is not None else structure_constants(basis)
    ok = False
    if certify_basis:
        cert = certify(basis)
        if not cert.ok:
            raise ApplicabilityError(f"cubic check failed: worst {cert.worst_cubic:.2e}, "
                                     f"{len(cert.violations)} violations")
        ok = True
    return Adjoint(sc, ok)


# ---------------------------------------------------------------------------
# Wei-Norman system
# ---------------------------------------------------------------------------


@dataclass
class WNSystem:
    basis: LieBasis
    adj: Adjoint
    d: np.ndarray
    ordering: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.ordering)

    def M(self, alpha: np.ndarray) -> np.ndarray:
        """Column i: coordinates of E_{o_i} conjugated by exp(alpha_1 E_{o_1})...exp(alpha_{i-1} E_{o_{i-1}})."""
        if not self.adj.certified:
            raise ApplicabilityError("cubic conditions were never certified for this basis")
        d = self.dim
        out = np.empty((d, d))
        T = np.eye(d)
        K, K2 = self.adj.K, self.adj.K2
        for i, j in enumerate(self.ordering):
            out[:, i] = T[:, j]
            a = alpha[i]
            if a != 0.0 and i + 1 < d:
                T = T - math.sin(a) * (T @ K[j]) + (1 - math.cos(a)) * (T @ K2[j])
        return out

    def rhs(self, alpha: np.ndarray) -> np.ndarray:
        lu = scipy.linalg.lu_factor(self.M(alpha), check_finite=False)
        return scipy.linalg.lu_solve(lu, self.d, check_finite=False)

    def det(self, alpha: np.ndarray) -> float:
        return float(np.linalg.det(self.M(alpha)))

    def generator(self) -> OperatorExpr:
        out = OperatorExpr()
        for c, x in zip(self.d, self.basis.exprs):
            out = out + c * x
        return out


def generator_coordinates(basis: LieBasis, generator: OperatorExpr, tol: float = 1e-12) -> np.ndarray:
    d, resid = basis.coords(generator)
    if resid > tol:
        raise ValueError(f"generator is not in the span of the basis (residual {resid:.2e})")
    d[np.abs(d) < 1e-15] = 0.0
    return d


def build_system(basis: LieBasis, sc: StructureConstants | Adjoint | None, d, ordering: Sequence[int] | None = None,
                 certify_basis: bool = True) -> WNSystem:
    if isinstance(sc, Adjoint):
        adj = sc
    else:
        adj = make_adjoint(basis, sc, certify_basis)
    if isinstance(d, OperatorExpr):
        d = generator_coordinates(basis, d)
    d = np.asarray(d, dtype=float)
    ordering = tuple(range(basis.dim)) if ordering is None else tuple(int(i) for i in ordering)
    if sorted(ordering) != list(range(basis.dim)):
        raise ValueError("ordering must be a permutation of the basis indices")
    # the ODE lives in ordering coordinates, M rows stay in basis coordinates
    return WNSystem(basis, adj, d, ordering)


# ---------------------------------------------------------------------------
# Fock-space realization on (N, Sz) blocks
# ---------------------------------------------------------------------------


class BlockRealization:
    """Basis elements as dense blocks over particle-number and Sz sectors."""

    def __init__(self, exprs: Sequence[OperatorExpr], n: int | None = None):
        if n is None:
            m = 0
            for x in exprs:
                m |= x.support()
            n = max(m.bit_length(), 1)
            n += n % 2
        self.n = n
        states = np.arange(1 << n)
        upm = sum(1 << k for k in range(0, n, 2))
        nu = np.bitwise_count(states & upm)
        nd = np.bitwise_count(states & ~upm)
        sectors: dict = {}
        for s, key in enumerate(zip(nu.tolist(), nd.tolist())):
            sectors.setdefault(key, []).append(s)
        self.blocks = [np.array(v) for v in sectors.values()]
        self.mats = []
        self.sq = []
        for x in exprs:
            full = to_matrix(x, n)
            bl = [full[np.ix_(b, b)] for b in self.blocks]
            leak = np.sum(full ** 2) - sum(np.sum(m ** 2) for m in bl)
            if leak > 1e-20 * max(1.0, np.sum(full ** 2)):
                raise ValueError("operator does not conserve N and Sz")
            self.mats.append(bl)
            self.sq.append([m @ m for m in bl])

    def exp_element(self, i: int, alpha: float) -> list[np.ndarray]:
        # E^3 = -E gives exp(aE) = 1 + sin(a) E + (1 - cos(a)) E^2
        s, c1 = math.sin(alpha), 1 - math.cos(alpha)
        return [np.eye(len(b)) + s * m + c1 * q for b, m, q in zip(self.blocks, self.mats[i], self.sq[i])]

    def product(self, alphas: Sequence[float], ordering: Sequence[int]) -> list[np.ndarray]:
        out = [np.eye(len(b)) for b in self.blocks]
        for a, j in zip(alphas, ordering):
            if a == 0.0:
                continue
            f = self.exp_element(j, a)
            out = [x @ y for x, y in zip(out, f)]
        return out

    def combination(self, coeffs: Sequence[float]) -> list[np.ndarray]:
        out = [np.zeros((len(b), len(b))) for b in self.blocks]
        for c, bl in zip(coeffs, self.mats):
            if c != 0.0:
                out = [o + c * m for o, m in zip(out, bl)]
        return out

    @staticmethod
    def distance(a: list[np.ndarray], b: list[np.ndarray]) -> float:
        return math.sqrt(sum(float(np.sum((x - y) ** 2)) for x, y in zip(a, b)))

    def to_dense(self, blocks: list[np.ndarray]) -> np.ndarray:
        out = np.zeros((1 << self.n, 1 << self.n))
        for b, m in zip(self.blocks, blocks):
            out[np.ix_(b, b)] = m
        return out


class TargetPropagator:
    """exp(theta A) for a fixed antisymmetric block matrix A via one eigendecomposition."""

    def __init__(self, a_blocks: list[np.ndarray]):
        self.eig = []
        for a in a_blocks:
            w, v = np.linalg.eigh(1j * a)
            self.eig.append((w, v))

    def __call__(self, theta: float) -> list[np.ndarray]:
        return [np.real((v * np.exp(-1j * theta * w)) @ v.conj().T) for w, v in self.eig]


# ---------------------------------------------------------------------------
# Parameter tables
# ---------------------------------------------------------------------------


@dataclass
class ParameterTable:
    thetas: np.ndarray
    alphas: np.ndarray  # (points, m), columns in ordering positions
    detM: np.ndarray
    residual: np.ndarray
    method: str
    ordering: tuple[int, ...] = ()
    labels: list[str] = field(default_factory=list)
    singular_theta: float | None = None
    converged: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.alphas.shape[1]

    def column(self, basis_index: int) -> np.ndarray:
        """Trajectory of the exponential carrying basis element ``basis_index``."""
        return self.alphas[:, self.ordering.index(basis_index)]

    def to_csv(self, path, meta: str | None = None) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if meta:
                fh.write(f"# {meta}\n")
            w = csv.writer(fh)
            w.writerow(["theta"] + [f"alpha_{i + 1}" for i in range(self.m)] + ["detM", "residual"])
            for k in range(len(self.thetas)):
                w.writerow([repr(float(self.thetas[k]))] + [repr(float(a)) for a in self.alphas[k]]
                           + [repr(float(self.detM[k])), repr(float(self.residual[k]))])

    @classmethod
    def from_csv(cls, path, method: str = "ode") -> "ParameterTable":
        rows = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.startswith("#") or line.startswith("theta"):
                    continue
                rows.append([float(x) for x in line.strip().split(",")])
        a = np.array(rows)
        return cls(a[:, 0], a[:, 1:-2], a[:, -2], a[:, -1], method, tuple(range(a.shape[1] - 3)))

    def diagnostics(self) -> dict:
        return {
            "method": self.method,
            "points": int(len(self.thetas)),
            "ordering": [i + 1 for i in self.ordering],
            "singular_theta": self.singular_theta,
            "max_residual": _nan_reduce(np.nanmax, self.residual),
            "min_abs_detM": _nan_reduce(np.nanmin, np.abs(self.detM)),
            "zero_parameters": [i + 1 for i in zero_trajectories(self)],
            "sharing": sharing_pattern(self),
        }


def _nan_reduce(f, x: np.ndarray) -> float | None:
    x = np.asarray(x, dtype=float)
    if not len(x) or np.all(np.isnan(x)):
        return None
    return float(f(x))


def zero_trajectories(table: ParameterTable, tol: float = 1e-6) -> list[int]:
    """Ordering positions whose parameter stays below ``tol`` in magnitude."""
    return [i for i in range(table.m) if np.all(np.abs(table.alphas[:, i]) < tol)]


def sharing_pattern(table: ParameterTable, tol: float = 1e-6, fold_sign: bool = True) -> dict:
    """Group nonzero trajectories that coincide pointwise (optionally up to sign)."""
    zeros = set(zero_trajectories(table, tol))
    groups: list[list[tuple[int, int]]] = []
    for i in range(table.m):
        if i in zeros:
            continue
        a = table.alphas[:, i]
        for g in groups:
            ref = table.alphas[:, g[0][0]]
            if np.max(np.abs(a - ref)) < tol:
                g.append((i, 1))
                break
            if fold_sign and np.max(np.abs(a + ref)) < tol:
                g.append((i, -1))
                break
        else:
            groups.append([(i, 1)])
    return {
        "independent": len(groups),
        "zeros": len(zeros),
        "groups": [[(i + 1) * s for i, s in g] for g in groups],
    }


def labelled_sharing(table: ParameterTable, labels: Sequence[tuple[str, int]], tol: float = 1e-6) -> dict:
    """Check a label pattern: entries with one label must agree up to their recorded sign.

    ``labels[k]`` refers to basis element ``k``; label ``"0"`` marks a zero parameter.
    """
    by_label: dict = {}
    for k, (lab, sgn) in enumerate(labels):
        by_label.setdefault(lab, []).append((k, sgn))
    worst = 0.0
    for lab, members in by_label.items():
        if lab == "0":
            for k, _ in members:
                worst = max(worst, float(np.max(np.abs(table.column(k)))))
            continue
        k0, s0 = members[0]
        ref = s0 * table.column(k0)
        for k, s in members[1:]:
            worst = max(worst, float(np.max(np.abs(s * table.column(k) - ref))))
    return {"independent": len([l for l in by_label if l != "0"]), "max_deviation": worst, "ok": worst < tol}


# ---------------------------------------------------------------------------
# ODE integration
# ---------------------------------------------------------------------------


def _solve_branch(system: WNSystem, t_end: float, t_eval: np.ndarray, method: str, max_step: float,
                  rtol: float = ODE_RTOL, atol: float = ODE_ATOL):
    def f(t, y):
        return system.rhs(y)

    def ev(t, y):
        return abs(system.det(y)) - SINGULAR_DET

    ev.terminal = True
    ev.direction = -1
    y0 = np.zeros(system.dim)
    if t_end == 0.0 or len(t_eval) == 0:
        return np.zeros((len(t_eval), system.dim)), None
    try:
        sol = solve_ivp(f, (0.0, t_end), y0, method=method, t_eval=t_eval, events=ev,
                        rtol=rtol, atol=atol, max_step=max_step)
    except (np.linalg.LinAlgError, ValueError):
        return np.zeros((0, system.dim)), 0.0
    ys = sol.y.T
    singular = None
    if sol.status == 1 and len(sol.t_events[0]):
        singular = float(sol.t_events[0][0])
    elif sol.status == -1:
        singular = float(sol.t[-1]) if len(sol.t) else 0.0
    return ys, singular


def integrate(system: WNSystem, theta_max: float = 10.0, grid_points: int = 2001, theta_min: float = 0.0,
              method: str = "DOP853", verify: bool = True, realization: BlockRealization | None = None,
              max_step: float = np.inf, rtol: float | None = None, atol: float | None = None) -> ParameterTable:
    """Integrate alpha' = M(alpha)^-1 d from alpha(0) = 0 over a uniform grid.

    The grid may straddle zero; each side is integrated outward from the origin.
    At a singularity (|det M| < 1e-8) the table is truncated on that side.
    """
    tol = (ODE_RTOL if rtol is None else rtol, ODE_ATOL if atol is None else atol)
    thetas = np.linspace(theta_min, theta_max, grid_points)
    pos = thetas[thetas > 0]
    neg = thetas[thetas < 0][::-1]
    ypos, spos = _solve_branch(system, theta_max, pos, method, max_step, *tol) if len(pos) else (np.zeros((0, system.dim)), None)
    yneg, sneg = _solve_branch(system, theta_min, neg, method, max_step, *tol) if len(neg) else (np.zeros((0, system.dim)), None)
    keep_neg = neg[: len(yneg)][::-1]
    keep_pos = pos[: len(ypos)]
    has_zero = bool(np.any(thetas == 0))
    ts = np.concatenate([keep_neg, [0.0] if has_zero else [], keep_pos])
    ys = np.concatenate([yneg[::-1], np.zeros((1 if has_zero else 0, system.dim)), ypos])
    singular = None
    for s in (sneg, spos):
        if s is not None and (singular is None or abs(s) < abs(singular)):
            singular = s
    dets = np.array([system.det(y) for y in ys])
    table = ParameterTable(ts, ys, dets, np.full(len(ts), np.nan), "ode", system.ordering,
                           [system.basis.labels[i] for i in system.ordering], singular)
    if verify:
        table.residual = verify_table(system.basis, system.d, table, realization)
    return table


def verify_table(basis: LieBasis, d: np.ndarray, table: ParameterTable,
                 realization: BlockRealization | None = None) -> np.ndarray:
    """Frobenius distance between the product formula and exp(theta A) at every row."""
    rep = realization or BlockRealization(basis.exprs)
    target = TargetPropagator(rep.combination(d))
    out = np.empty(len(table.thetas))
    for k, (t, a) in enumerate(zip(table.thetas, table.alphas)):
        out[k] = rep.distance(rep.product(a, table.ordering), target(t))
    return out


# ---------------------------------------------------------------------------
# Small algebra: closed forms
# ---------------------------------------------------------------------------


def tilde_basis(basis: LieBasis) -> list[OperatorExpr]:
    """E~1 = E3 - E1, E~2 = E4 - E2, E~3..5 = E3..5."""
    E = basis.exprs
    if len(E) != 5:
        raise ValueError("tilde basis is defined for the 5-dimensional algebra")
    return [E[2] - E[0], E[3] - E[1], E[2], E[3], E[4]]


def tilde_generator_coords() -> np.ndarray:
    r = 1 / math.sqrt(2)
    return np.array([-r, r, r, -r, 0.0])


def closed_form_tilde(theta: float) -> np.ndarray:
    """Closed-form tilde-basis parameters, continuous across branches."""
    k = math.floor((theta + math.pi / 2) / math.pi)
    phi = theta - k * math.pi
    s, c = math.sin(phi), math.cos(phi)
    # tan/sqrt(2 + tan^2) rewritten without tan; asin of it is atan2(s, sqrt2 c),
    # which stays accurate next to the branch points where tan diverges
    x = s / math.sqrt(1 + c * c)
    return np.array([
        -theta / math.sqrt(2),
        theta / math.sqrt(2),
        k * math.pi + math.atan2(s, math.sqrt(2) * c),
        (-1) ** k * math.atan(-x),
        math.pi / 4 - math.atan(math.cos(theta)),
    ])


# ---------------------------------------------------------------------------
# Frobenius-norm fitting
# ---------------------------------------------------------------------------


def _fit_objective(rep: BlockRealization, ordering: Sequence[int], target: list[np.ndarray]):
    m = len(ordering)

    def f(a):
        return 0.5 * BlockRealization.distance(rep.product(a, ordering), target) ** 2

    def fg(a):
        facs = [rep.exp_element(j, x) for j, x in zip(ordering, a)]
        nb = len(rep.blocks)
        pre = [[np.eye(len(b)) for b in rep.blocks]]
        for fk in facs:
            pre.append([p @ q for p, q in zip(pre[-1], fk)])
        diff = [p - t for p, t in zip(pre[-1], target)]
        val = 0.5 * sum(float(np.sum(x * x)) for x in diff)
        grad = np.zeros(m)
        suf = [np.eye(len(b)) for b in rep.blocks]
        for i in range(m - 1, -1, -1):
            j = ordering[i]
            # d/da_i of the product: pre_{i+1} E_j suf
            g = 0.0
            for b in range(nb):
                g += float(np.sum(diff[b] * (pre[i + 1][b] @ rep.mats[j][b] @ suf[b])))
            grad[i] = g
            suf = [fk @ s for fk, s in zip(facs[i], suf)]
        return val, grad

    return f, fg


def _residual_jacobian(rep: BlockRealization, ordering: Sequence[int], target: list[np.ndarray]):
    def fun(a):
        p = rep.product(a, ordering)
        return np.concatenate([(x - y).ravel() for x, y in zip(p, target)])

    def jac(a):
        facs = [rep.exp_element(j, x) for j, x in zip(ordering, a)]
        pre = [[np.eye(len(b)) for b in rep.blocks]]
        for fk in facs:
            pre.append([p @ q for p, q in zip(pre[-1], fk)])
        cols = np.empty((sum(len(b) ** 2 for b in rep.blocks), len(ordering)))
        suf = [np.eye(len(b)) for b in rep.blocks]
        for i in range(len(ordering) - 1, -1, -1):
            j = ordering[i]
            cols[:, i] = np.concatenate([(pre[i + 1][b] @ rep.mats[j][b] @ suf[b]).ravel()
                                         for b in range(len(rep.blocks))])
            suf = [fk @ s for fk, s in zip(facs[i], suf)]
        return cols

    return fun, jac


def frobenius_fit(basis: LieBasis, d, thetas: Sequence[float], ordering: Sequence[int] | None = None,
                  gradient: str = "analytic", gtol: float = 1e-6, maxiter: int = 2000,
                  realization: BlockRealization | None = None, start: np.ndarray | None = None,
                  polish: bool = True,
                  progress: Callable[[int, float], None] | None = None) -> ParameterTable:
    """Per-theta BFGS fit of the product formula, warm-started along the grid.

    ``gradient="3-point"`` uses central finite differences; the default uses the
    exact derivative of the product, which reaches the same minimum much faster.
    With ``polish`` a Levenberg-Marquardt pass on the residual matrix follows BFGS;
    gtol 1e-6 alone stops with residuals near 1e-6 on ill-conditioned directions.
    """
    if isinstance(d, OperatorExpr):
        d = generator_coordinates(basis, d)
    d = np.asarray(d, dtype=float)
    ordering = tuple(range(basis.dim)) if ordering is None else tuple(ordering)
    rep = realization or BlockRealization(basis.exprs)
    prop = TargetPropagator(rep.combination(d))
    thetas = np.asarray(thetas, dtype=float)
    m = len(ordering)
    alphas = np.zeros((len(thetas), m))
    resid = np.zeros(len(thetas))
    conv = np.ones(len(thetas), dtype=bool)
    x = np.zeros(m) if start is None else np.asarray(start, dtype=float)
    prev_t = 0.0
    for k, t in enumerate(thetas):
        target = prop(t)
        if t == 0.0:
            x = np.zeros(m)
        else:
            # first-order extrapolation of the warm start along the grid
            if k >= 2 and thetas[k - 1] != 0.0:
                slope = (alphas[k - 1] - alphas[k - 2]) / (thetas[k - 1] - thetas[k - 2])
                x = alphas[k - 1] + slope * (t - prev_t)
            f, fg = _fit_objective(rep, ordering, target)
            if gradient == "analytic":
                res = scipy.optimize.minimize(fg, x, jac=True, method="BFGS",
                                              options={"gtol": gtol, "maxiter": maxiter})
            else:
                res = scipy.optimize.minimize(f, x, jac="3-point", method="BFGS",
                                              options={"gtol": gtol, "maxiter": maxiter})
            x = res.x
            conv[k] = bool(res.success) or math.sqrt(2 * res.fun) < 1e-8
            if polish:
                fun, jac = _residual_jacobian(rep, ordering, target)
                lm = scipy.optimize.least_squares(fun, x, jac=jac, method="lm", xtol=1e-15, ftol=1e-15,
                                                  gtol=1e-15, max_nfev=50)
                if np.linalg.norm(lm.fun) < math.sqrt(2 * res.fun):
                    x = lm.x
                    conv[k] = True
        alphas[k] = x
        resid[k] = rep.distance(rep.product(x, ordering), target)
        prev_t = t
        if progress:
            progress(k, resid[k])
    table = ParameterTable(thetas, alphas, np.full(len(thetas), np.nan), resid, "fit", ordering,
                           [basis.labels[i] for i in ordering], None, conv)
    return table


def fill_det(table: ParameterTable, system: WNSystem) -> ParameterTable:
    table.detM = np.array([system.det(a) for a in table.alphas])
    return table


# ---------------------------------------------------------------------------
# Six-exponential alternating product for the small generator
# ---------------------------------------------------------------------------


@dataclass
class TrotterFit:
    thetas: np.ndarray
    alphas: np.ndarray  # (points, 6) for A B A B A B
    residual: np.ndarray

    @property
    def sum_a(self) -> np.ndarray:
        return self.alphas[:, 0] + self.alphas[:, 2] + self.alphas[:, 4]

    @property
    def sum_b(self) -> np.ndarray:
        return self.alphas[:, 1] + self.alphas[:, 3] + self.alphas[:, 5]

    def to_csv(self, path, meta: str | None = None) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if meta:
                fh.write(f"# {meta}\n")
            w = csv.writer(fh)
            w.writerow(["theta"] + [f"alpha_{i + 1}" for i in range(6)] + ["sum_a", "sum_b", "residual"])
            for k in range(len(self.thetas)):
                w.writerow([repr(float(self.thetas[k]))] + [repr(float(v)) for v in self.alphas[k]]
                           + [repr(float(self.sum_a[k])), repr(float(self.sum_b[k])), repr(float(self.residual[k]))])


def _wrap(x: np.ndarray, ref: float) -> float:
    return float(ref + (x - ref + math.pi) % (2 * math.pi) - math.pi)


def trotter_like_fit(thetas: Sequence[float], restarts: int = 20, seed: int = 0, tol: float = 1e-12,
                     max_nfev: int = 3000, orbitals: tuple[int, int, int] = (0, 1, 2),
                     early_stop: float | None = 1e-13) -> TrotterFit:
    """Least-squares fit of exp(theta (A - B)/sqrt2) by e^{a1 A} e^{a2 B} ... e^{a6 B}.

    A and B are the two spinorbital constituents of the small spin-adapted double.
    Each point is warm-started from the previous one, then random restarts run
    until one reaches ``early_stop`` (``None`` always runs all restarts).
    """
    P, Q, R = orbitals
    A = excitation([up(P), dn(P)], [up(Q), dn(R)])
    B = excitation([up(P), dn(P)], [dn(Q), up(R)])
    rep = BlockRealization([A, B])
    prop = TargetPropagator(rep.combination([1 / math.sqrt(2), -1 / math.sqrt(2)]))
    order = (0, 1, 0, 1, 0, 1)
    rng = np.random.default_rng(seed)
    thetas = np.asarray(thetas, dtype=float)
    alphas = np.zeros((len(thetas), 6))
    resid = np.zeros(len(thetas))

    def solve(x0, target):
        def fun(a):
            p = rep.product(a, order)
            return np.concatenate([(x - y).ravel() for x, y in zip(p, target)])

        r = scipy.optimize.least_squares(fun, x0, xtol=tol, ftol=tol, gtol=tol, max_nfev=max_nfev)
        return r.x, float(np.linalg.norm(r.fun))

    prev = np.zeros(6)
    for k, t in enumerate(thetas):
        target = prop(t)
        best_x, best_r = solve(prev, target)
        for _ in range(restarts):
            if early_stop is not None and best_r <= early_stop:
                break
            x, r = solve(rng.uniform(-math.pi, math.pi, 6), target)
            if r < best_r:
                best_x, best_r = x, r
        alphas[k] = best_x
        resid[k] = best_r
        prev = best_x
    return TrotterFit(thetas, alphas, resid)


def sum_constraint_error(fit: TrotterFit, sign_b: float = -1.0) -> tuple[float, float]:
    """Max deviation of sum_a from theta/sqrt2 and sum_b from sign_b*theta/sqrt2, modulo 2 pi."""
    r = fit.thetas / math.sqrt(2)

    def dev(s, ref):
        w = (s - ref + math.pi) % (2 * math.pi) - math.pi
        return float(np.max(np.abs(w)))

    return dev(fit.sum_a, r), dev(fit.sum_b, sign_b * r)


# ---------------------------------------------------------------------------
# Permutation scan
# ---------------------------------------------------------------------------


@dataclass
class PermutationReport:
    ordering: tuple[int, ...]
    singular: bool
    theta_neg: float | None
    theta_pos: float | None
    parity: list[str]
    trotter_match: dict
    max_abs: list[float]

    def to_json(self) -> dict:
        return {
            "ordering": [i + 1 for i in self.ordering],
            "singular": self.singular,
            "theta_star": [self.theta_neg, self.theta_pos],
            "parity": self.parity,
            "trotter_match": self.trotter_match,
            "max_abs": self.max_abs,
        }


def classify_parity(thetas: np.ndarray, y: np.ndarray, tol: float = 1e-7) -> str:
    """'odd', 'even', 'none' for a trajectory sampled on a grid symmetric about zero."""
    n = len(thetas)
    if n == 0 or not np.allclose(thetas, -thetas[::-1], atol=1e-12):
        return "unknown"
    flip = y[::-1]
    if np.max(np.abs(y + flip)) < tol:
        return "odd"
    if np.max(np.abs(y - flip)) < tol:
        return "even"
    return "none"


def _scan_one(args):
    basis_exprs, sc_c, d, ordering, theta_max, points = args
    adj = Adjoint(StructureConstants(sc_c), certified=True)
    system = WNSystem(LieBasis(basis_exprs), adj, d, ordering)
    table = integrate(system, theta_max, points, -theta_max, verify=False)
    thetas = table.thetas
    singular = table.singular_theta is not None or len(thetas) < points
    # singular side boundaries from the surviving grid
    theta_neg = None if thetas[0] <= -theta_max + 1e-9 else float(thetas[0])
    theta_pos = None if thetas[-1] >= theta_max - 1e-9 else float(thetas[-1])
    parity = []
    max_abs = []
    for i in range(len(ordering)):
        max_abs.append(float(np.max(np.abs(table.alphas[:, i]))) if len(thetas) else 0.0)
        if singular:
            # parity on the largest symmetric window that survived
            lim = min(-thetas[0], thetas[-1])
            mask = np.abs(thetas) <= lim + 1e-12
            parity.append(classify_parity(thetas[mask], table.alphas[mask, i]))
        else:
            parity.append(classify_parity(thetas, table.alphas[:, i]))
    r = thetas / math.sqrt(2)
    match = {}
    for target_index, sign in ((0, 1.0), (1, -1.0)):
        pos = ordering.index(target_index)
        match[f"E{target_index + 1}"] = bool(len(thetas) and np.max(np.abs(table.alphas[:, pos] - sign * r)) < 1e-7)
    return PermutationReport(tuple(ordering), singular, theta_neg, theta_pos, parity, match, max_abs)


def permutation_scan(basis: LieBasis, adj: Adjoint, d, theta_max: float = 100.0, points: int = 20001,
                     orderings: Sequence[Sequence[int]] | None = None, workers: int | None = None) -> list[PermutationReport]:
    """Integrate every ordering of a small basis on [-theta_max, theta_max]."""
    if basis.dim > 6:
        raise ValueError("permutation scans are limited to small bases")
    if not adj.certified:
        raise ApplicabilityError("cubic conditions were never certified for this basis")
    d = np.asarray(d, dtype=float)
    orderings = list(orderings) if orderings is not None else list(itertools.permutations(range(basis.dim)))
    jobs = [(basis.exprs, adj.sc.c, d, tuple(o), theta_max, points) for o in orderings]
    if workers == 1:
        return [_scan_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_scan_one, jobs))


def scan_summary(reports: Sequence[PermutationReport]) -> dict:
    n = len(reports)
    sing = sum(r.singular for r in reports)
    return {
        "orderings": n,
        "singular": sing,
        "singular_fraction": sing / n if n else 0.0,
        "trotter_match_all": all(all(r.trotter_match.values()) for r in reports),
    }


# ---------------------------------------------------------------------------
# Known label pattern for the 28-dimensional table
# ---------------------------------------------------------------------------

# one (label, sign) per canonical basis element, blocks of 10, 10, 8; inside the
# last block the fully controlled flip precedes the mixed one (they commute)
INT0_SHARING = (
    [("t/2", 1), ("c1", 1), ("c1", 1), ("c2", 1), ("c3", 1)] * 2
    + [("-t/2", 1), ("c4", 1), ("c4", 1), ("c5", 1), ("c6", 1)] * 2
    + [("c7", 1), ("c7", -1), ("0", 1), ("c8", 1)] * 2
)


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, default=lambda o: o.tolist() if hasattr(o, "tolist") else str(o))


class Stopwatch:
    def __init__(self):
        self.t0 = time.perf_counter()

    def __call__(self) -> float:
        return time.perf_counter() - self.t0
