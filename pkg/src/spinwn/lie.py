"""Dynamical Lie algebra closure, A*N canonicalization and structure constants."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fermion import (
    GeneratorLabel,
    GeneratorSpec,
    OperatorExpr,
    commutator,
)

RANK_TOL = 1e-10
DEFAULT_CAP = 256


class ClosureCapExceeded(RuntimeError):
    pass


class CanonicalizationError(RuntimeError):
    pass


class ResidualTooLarge(RuntimeError):
    pass


class ClassificationMismatch(RuntimeError):
    pass


def _bits(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if (mask >> i) & 1)


def _as_expr(e) -> OperatorExpr:
    return e.expr if isinstance(e, GeneratorSpec) else e


# ---------------------------------------------------------------------------
# Coordinates over string space
# ---------------------------------------------------------------------------


class Coordinates:
    """Fixed linear map from expressions in span(elements) to coefficient vectors."""

    def __init__(self, exprs: Sequence[OperatorExpr]):
        keys: dict = {}
        for x in exprs:
            for k in x.terms:
                keys.setdefault(k, len(keys))
        self.keys = keys
        self.matrix = np.zeros((len(keys), len(exprs)))
        for j, x in enumerate(exprs):
            for k, v in x.terms.items():
                self.matrix[keys[k], j] = v
        self._q, self._r = np.linalg.qr(self.matrix)

    def vector(self, x: OperatorExpr) -> tuple[np.ndarray, float]:
        """Raw string vector restricted to known keys plus the norm outside them."""
        v = np.zeros(len(self.keys))
        outside = 0.0
        for k, c in x.terms.items():
            i = self.keys.get(k)
            if i is None:
                outside += c * c
            else:
                v[i] = c
        return v, float(np.sqrt(outside))

    def __call__(self, x: OperatorExpr) -> tuple[np.ndarray, float]:
        """Coordinates of ``x`` and the residual norm of the fit."""
        v, outside = self.vector(x)
        coef = np.linalg.solve(self._r, self._q.T @ v)
        resid = np.linalg.norm(self.matrix @ coef - v)
        return coef, float(np.hypot(resid, outside))


# ---------------------------------------------------------------------------
# LieBasis
# ---------------------------------------------------------------------------


@dataclass
class LieBasis:
    elements: list
    commuting_sets: list[list[int]] = field(default_factory=list)
    _coords: Coordinates | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return len(self.elements)

    @property
    def exprs(self) -> list[OperatorExpr]:
        return [_as_expr(e) for e in self.elements]

    @property
    def labels(self) -> list[str]:
        return [str(e) if isinstance(e, GeneratorSpec) else f"X{i + 1}" for i, e in enumerate(self.elements)]

    @property
    def coordinate_map(self) -> Coordinates:
        if self._coords is None:
            self._coords = Coordinates(self.exprs)
        return self._coords

    def coords(self, x: OperatorExpr) -> tuple[np.ndarray, float]:
        return self.coordinate_map(x)

    @property
    def block_sizes(self) -> list[int]:
        return [len(b) for b in self.commuting_sets]

    def register_size(self) -> int:
        m = 0
        for x in self.exprs:
            m |= x.support()
        return m.bit_length()


# ---------------------------------------------------------------------------
# Closure
# ---------------------------------------------------------------------------


class _RankTracker:
    """Incremental Gram-Schmidt over string coordinates."""

    def __init__(self, tol: float):
        self.tol = tol
        self.keys: dict = {}
        self.rows: list[np.ndarray] = []

    def _vec(self, x: OperatorExpr) -> np.ndarray:
        for k in x.terms:
            self.keys.setdefault(k, len(self.keys))
        v = np.zeros(len(self.keys))
        for k, c in x.terms.items():
            v[self.keys[k]] = c
        return v

    def try_add(self, x: OperatorExpr) -> bool:
        v = self._vec(x)
        scale = np.linalg.norm(v)
        if scale < self.tol:
            return False
        v = v / scale
        for _ in range(2):
            for q in self.rows:
                n = min(len(q), len(v))
                v[:n] -= (q[:n] @ v[:n]) * q[:n]
        r = np.linalg.norm(v)
        if r < self.tol:
            return False
        self.rows.append(v / r)
        return True


def _normalize(x: OperatorExpr) -> OperatorExpr:
    m = max(abs(c) for c in x.terms.values())
    return x / m


def lie_closure(seed: Sequence, cap: int = DEFAULT_CAP, tol: float = RANK_TOL) -> LieBasis:
    """Close ``seed`` under commutation; new elements are admitted in pair order."""
    exprs = [_as_expr(s) for s in seed]
    if not exprs:
        raise ValueError("seed must be nonempty")
    for x in exprs:
        if not (x + x.adjoint()).is_zero(1e-12):
            raise ValueError("seed elements must be anti-Hermitian")
    tracker = _RankTracker(tol)
    basis: list[OperatorExpr] = []
    for x in exprs:
        if tracker.try_add(x):
            basis.append(x)
    i = 0
    # pairs (i, j) with j < i, visited as the basis grows
    while i < len(basis):
        for j in range(i):
            c = commutator(basis[j], basis[i])
            if c.is_zero(tol):
                continue
            if tracker.try_add(c):
                basis.append(_normalize(c))
                if len(basis) > cap:
                    raise ClosureCapExceeded(f"closure exceeded cap {cap}")
        i += 1
    return LieBasis(list(basis))


# ---------------------------------------------------------------------------
# Canonicalization into A*N form
# ---------------------------------------------------------------------------


def _pattern(key) -> tuple[int, int] | None:
    c, a = key
    n = c & a
    cc, aa = c & ~n, a & ~n
    if cc == 0 and aa == 0:
        return None
    lo = (cc | aa) & -(cc | aa)
    # orient so the "from" (annihilated) set holds the lowest index
    return (aa, cc) if aa & lo else (cc, aa)


def _candidates(frm: tuple, to: tuple, spectators: tuple) -> list[GeneratorSpec]:
    out = [GeneratorSpec(frm, to)]
    specs = []
    for assign in itertools.product((0, 1, 2), repeat=len(spectators)):
        xs = tuple(s for s, t in zip(spectators, assign) if t == 1)
        ys = tuple(s for s, t in zip(spectators, assign) if t == 2)
        if not xs:
            continue
        if ys and min(ys) < min(xs):
            continue
        for sign in (1, -1):
            if not ys and len(xs) == 1 and sign == 1:
                continue  # h + n on one mode is the identity
            specs.append((len(xs) + len(ys), bool(ys), sign == -1, xs, ys, sign))
    specs.sort()
    for _, _, _, xs, ys, sign in specs:
        out.append(GeneratorSpec(frm, to, xs, ys, sign))
    return out


def _group_strings(exprs: Sequence[OperatorExpr]):
    groups: dict = {}
    for x in exprs:
        for k in x.terms:
            p = _pattern(k)
            if p is None:
                raise CanonicalizationError("element contains a pure number-operator string")
            groups.setdefault(p, None)
    return list(groups)


def _restrict(x: OperatorExpr, pattern) -> OperatorExpr:
    return OperatorExpr({k: v for k, v in x.terms.items() if _pattern(k) == pattern})


def _span_rank(vs: list[np.ndarray], tol: float) -> int:
    if not vs:
        return 0
    s = np.linalg.svd(np.array(vs), compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def canonicalize(basis: LieBasis, tol: float = RANK_TOL, seed: Sequence | None = None) -> LieBasis:
    """Rewrite a closed basis into A*N elements grouped into commuting blocks.

    ``seed`` (defaults to the first elements of the closure) fixes block order:
    blocks containing seed excitations come first, in seed order.
    """
    exprs = basis.exprs
    dim = len(exprs)
    coords = Coordinates(exprs)
    patterns = _group_strings(exprs)
    register = 0
    for x in exprs:
        register |= x.support()

    # direct-sum check and per-pattern dimension
    proj_dims = {}
    for p in patterns:
        vs = [coords.vector(_restrict(x, p))[0] for x in exprs]
        proj_dims[p] = _span_rank(vs, tol)
    if sum(proj_dims.values()) != dim:
        raise CanonicalizationError("span is not a direct sum over excitation patterns")

    # seed ordering of patterns
    seed_exprs = [_as_expr(s) for s in (seed if seed is not None else [])]
    seed_patterns: list = []
    for s in seed_exprs:
        for k in s.terms:
            p = _pattern(k)
            if p not in seed_patterns:
                seed_patterns.append(p)
    rest = sorted((p for p in patterns if p not in seed_patterns), key=lambda p: (_bits(p[0]), _bits(p[1])))
    ordered_patterns = [p for p in seed_patterns if p in patterns] + rest

    groups: list[list[GeneratorSpec]] = []
    for p in ordered_patterns:
        frm, to = _bits(p[0]), _bits(p[1])
        spectators = tuple(i for i in _bits(register) if i not in frm and i not in to)
        chosen: list[GeneratorSpec] = []
        chosen_vecs: list[np.ndarray] = []
        for cand in _candidates(frm, to, spectators):
            e = cand.expr
            _, resid = coords(e)
            if resid > 1e-9 * max(1.0, e.norm()):
                continue
            v = coords.vector(e)[0]
            if _span_rank(chosen_vecs + [v], tol) == len(chosen_vecs) + 1:
                chosen.append(cand)
                chosen_vecs.append(v)
                if len(chosen) == proj_dims[p]:
                    break
        if len(chosen) != proj_dims[p]:
            raise CanonicalizationError(
                f"pattern {frm}->{to}: found {len(chosen)} A*N elements, need {proj_dims[p]}")
        groups.append(chosen)

    # merge pattern groups into commuting blocks (greedy, first fit)
    blocks: list[list[int]] = []
    group_exprs = [[g.expr for g in grp] for grp in groups]

    def commute(ga: int, gb: int) -> bool:
        return all(commutator(x, y).is_zero(1e-12) for x in group_exprs[ga] for y in group_exprs[gb])

    for gi in range(len(groups)):
        for blk in blocks:
            if all(commute(gi, gj) for gj in blk):
                blk.append(gi)
                break
        else:
            blocks.append([gi])

    elements: list[GeneratorSpec] = []
    commuting_sets: list[list[int]] = []
    if dim == 5 and len(seed_patterns) == 2 and len(groups) == 3:
        # explicit order: seed excitations, their controlled partners, the flip
        order = [groups[0][0], groups[1][0], *groups[0][1:], *groups[1][1:], *groups[2]]
        elements = order
        commuting_sets = _consecutive_commuting([e.expr for e in elements])
    else:
        for blk in blocks:
            idx = []
            for gi in blk:
                for g in groups[gi]:
                    idx.append(len(elements))
                    elements.append(g)
            commuting_sets.append(idx)
    labelled = []
    for k, e in enumerate(elements):
        labelled.append(GeneratorSpec(e.frm, e.to, e.check_x, e.check_y, e.sign,
                                      GeneratorLabel("E", (k + 1,), e.describe())))
    out = LieBasis(labelled, commuting_sets)
    _, worst = _span_check(basis, out)
    if worst > 1e-9:
        raise CanonicalizationError(f"canonical span differs from closure span (residual {worst:.2e})")
    return out


def _consecutive_commuting(exprs: list[OperatorExpr]) -> list[list[int]]:
    sets: list[list[int]] = []
    for i, x in enumerate(exprs):
        if sets and all(commutator(exprs[j], x).is_zero(1e-12) for j in sets[-1]):
            sets[-1].append(i)
        else:
            sets.append([i])
    return sets


def _span_check(a: LieBasis, b: LieBasis) -> tuple[int, float]:
    worst = 0.0
    for x in a.exprs:
        _, r = b.coords(x)
        worst = max(worst, r / max(1.0, x.norm()))
    return a.dim, worst


# ---------------------------------------------------------------------------
# Structure constants
# ---------------------------------------------------------------------------


@dataclass
class StructureConstants:
    c: np.ndarray  # c[i, j, k]: [E_i, E_j] = sum_k c_ij^k E_k
    max_residual: float = 0.0

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    def bracket(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.einsum("i,j,ijk->k", u, v, self.c)

    def antisymmetry_residual(self) -> float:
        return float(np.max(np.abs(self.c + self.c.transpose(1, 0, 2)))) if self.dim else 0.0

    def jacobi_residual(self) -> float:
        # sum_m c_ij^m c_mk^l + cyclic
        t = np.einsum("ijm,mkl->ijkl", self.c, self.c)
        j = t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)
        return float(np.max(np.abs(j))) if self.dim else 0.0

    def ad(self, j: int) -> np.ndarray:
        """Matrix K with (K v) = coordinates of [X(v), E_j]."""
        return self.c[:, j, :].T

    def triplets(self, tol: float = 1e-12) -> list[tuple[int, int, int, float]]:
        idx = np.argwhere(np.abs(self.c) > tol)
        return [(int(i), int(j), int(k), float(self.c[i, j, k])) for i, j, k in idx]


def structure_constants(basis: LieBasis, tol: float = RANK_TOL) -> StructureConstants:
    exprs = basis.exprs
    d = len(exprs)
    c = np.zeros((d, d, d))
    worst = 0.0
    for i in range(d):
        for j in range(i + 1, d):
            com = commutator(exprs[i], exprs[j])
            if com.is_zero():
                continue
            coef, resid = basis.coords(com)
            worst = max(worst, resid)
            coef[np.abs(coef) < 1e-13] = 0.0
            c[i, j] = coef
            c[j, i] = -coef
    if worst > tol:
        raise ResidualTooLarge(f"commutator left the span (residual {worst:.2e})")
    return StructureConstants(c, worst)


# ---------------------------------------------------------------------------
# Small-algebra classification
# ---------------------------------------------------------------------------


@dataclass
class IsomorphismReport:
    name: str
    center_commutes: bool
    center_decoupled: bool
    so3_levi_civita: bool
    details: dict

    @property
    def ok(self) -> bool:
        return self.center_commutes and self.center_decoupled and self.so3_levi_civita


def classify_small(basis: LieBasis, strict: bool = False) -> IsomorphismReport:
    """Check that E~1 = E3 - E1 and E~2 = E4 - E2 span a center beside an so(3) on E3..E5."""
    if basis.dim != 5:
        raise ClassificationMismatch(f"expected a 5-dimensional basis, got {basis.dim}")
    E = basis.exprs
    t1 = E[2] - E[0]
    t2 = E[3] - E[1]
    center = commutator(t1, t2).norm()
    decouple = max(commutator(t, E[j]).norm() for t in (t1, t2) for j in (2, 3, 4))
    # [E3,E4] = e E5, [E4,E5] = e E3, [E5,E3] = e E4 with a common orientation e
    signs = []
    for a, b, c in ((2, 3, 4), (3, 4, 2), (4, 2, 3)):
        com = commutator(E[a], E[b])
        if (com - E[c]).is_zero(1e-12):
            signs.append(1)
        elif (com + E[c]).is_zero(1e-12):
            signs.append(-1)
        else:
            signs.append(0)
    levi = 0 not in signs and len(set(signs)) == 1
    rep = IsomorphismReport(
        "R^2 + so(3)" if (center < 1e-12 and decouple < 1e-12 and levi) else "unclassified",
        center < 1e-12, decouple < 1e-12, levi,
        {"center_norm": center, "decouple_norm": decouple, "orientation": signs},
    )
    if strict and not rep.ok:
        raise ClassificationMismatch(str(rep.details))
    return rep


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def basis_to_json(basis: LieBasis, sc: StructureConstants | None = None) -> dict:
    from .fermion import to_text

    items = []
    for k, e in enumerate(basis.elements):
        if isinstance(e, GeneratorSpec):
            items.append({
                "index": k + 1,
                "label": e.describe(),
                "excitation": {"from": list(e.frm), "to": list(e.to), "text": to_text(e.excitation)},
                "number_part": {"x": list(e.check_x), "y": list(e.check_y), "sign": e.sign,
                                "text": to_text(e.number_part)},
            })
        else:
            items.append({"index": k + 1, "label": f"X{k + 1}", "text": to_text(e)})
    out = {
        "dim": basis.dim,
        "elements": items,
        "commuting_sets": [[i + 1 for i in blk] for blk in basis.commuting_sets],
        "block_sizes": basis.block_sizes,
    }
    if sc is not None:
        out["structure_constants"] = [[i + 1, j + 1, k + 1, v] for i, j, k, v in sc.triplets()]
    return out


def dump_basis_json(path, basis: LieBasis, sc: StructureConstants | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(basis_to_json(basis, sc), fh, indent=2)


def family_basis(family: str, orbitals: Sequence[int] | None = None, cap: int = DEFAULT_CAP) -> LieBasis:
    """Closure plus canonicalization for one of ppqr / int0 / int1."""
    from .fermion import seed_generators

    seeds = seed_generators(family, orbitals)
    closed = lie_closure(seeds, cap=cap)
    return canonicalize(closed, seed=seeds)
