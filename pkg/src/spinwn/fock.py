"""Dense Fock-space oracle.

Basis state ``b`` is an integer whose bit ``k`` is the occupation of spinorbital
``k``.  Operators act with the Jordan-Wigner sign ``(-1)^{#occupied below k}``,
which is the convention used by :func:`spinwn.fermion.normal_order`.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .fermion import OperatorExpr, excitation, hole_string, number_string, dn, up

MAX_REGISTER = 14


class RegisterTooLarge(ValueError):
    pass


class NotAntiHermitian(ValueError):
    pass


def _bits(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if (mask >> i) & 1]


def _check_register(x: OperatorExpr, n: int) -> None:
    if n > MAX_REGISTER:
        raise RegisterTooLarge(f"register of {n} spinorbitals exceeds dense bound {MAX_REGISTER}")
    if x.max_index() >= n:
        raise ValueError(f"operator index {x.max_index()} outside register of size {n}")


def apply_string(states: np.ndarray, key: tuple[int, int]):
    """Action of one normal-ordered string on an array of basis states.

    Returns ``(new_states, signs, valid)``.
    """
    cre, ann = key
    cur = states.copy()
    sgn = np.ones(states.shape, dtype=np.int8)
    valid = np.ones(states.shape, dtype=bool)
    for i, want in [(i, 1) for i in reversed(_bits(ann))] + [(i, 0) for i in reversed(_bits(cre))]:
        occ = (cur >> i) & 1
        valid &= occ == want
        below = np.bitwise_count(cur & ((1 << i) - 1)) & 1
        sgn = np.where(below == 1, -sgn, sgn)
        cur = cur ^ (1 << i)
    return cur, sgn, valid


def to_matrix(x: OperatorExpr, n: int) -> np.ndarray:
    """Dense 2^n x 2^n real matrix of ``x`` in the occupation-number basis."""
    _check_register(x, n)
    dim = 1 << n
    states = np.arange(dim, dtype=np.int64)
    m = np.zeros((dim, dim))
    for key, coeff in x.terms.items():
        out, sgn, valid = apply_string(states, key)
        np.add.at(m, (out[valid], states[valid]), coeff * sgn[valid])
    return m


def to_sparse(x: OperatorExpr, n: int):
    """Sparse CSR realization used by callers that need larger registers."""
    import scipy.sparse as sp

    if x.max_index() >= n:
        raise ValueError(f"operator index {x.max_index()} outside register of size {n}")
    dim = 1 << n
    states = np.arange(dim, dtype=np.int64)
    rows, cols, vals = [], [], []
    for key, coeff in x.terms.items():
        out, sgn, valid = apply_string(states, key)
        rows.append(out[valid])
        cols.append(states[valid])
        vals.append(coeff * sgn[valid].astype(float))
    if not rows:
        return sp.csr_matrix((dim, dim))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim))


def expm_antihermitian(m: np.ndarray, theta: float = 1.0) -> np.ndarray:
    """exp(theta * m) for real antisymmetric ``m`` (scaling and squaring)."""
    if np.linalg.norm(m + m.T) >= 1e-12:
        raise NotAntiHermitian("matrix is not antisymmetric to 1e-12")
    if theta == 0:
        return np.eye(m.shape[0])
    return scipy.linalg.expm(theta * m)


def frobenius_distance(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def closed_form_ppqr_expr(theta: float, orbitals: tuple[int, int, int]) -> OperatorExpr:
    """Closed-form expansion of exp(theta * A_PP^QR) as an operator expression."""
    P, Q, R = orbitals
    if len({P, Q, R}) != 3:
        raise ValueError(f"orbitals must be distinct, got {orbitals}")
    pu, pd, qu, qd, ru, rd = up(P), dn(P), up(Q), dn(Q), up(R), dn(R)
    r2 = math.sqrt(2)
    s, c = math.sin(theta / r2), math.cos(theta / r2)
    e1 = excitation([pu, pd], [qu, rd])
    e2 = excitation([pu, pd], [qd, ru])
    n_ = number_string
    h_ = hole_string

    def hn(idx):
        return h_(idx) + n_(idx)

    one = OperatorExpr.identity()
    term1 = (s * one + ((math.sin(theta) - r2 * s) / r2) * (hn([qd, ru]) * hn([qu, rd]))) * (e1 - e2)
    # the pair-flip term: the literal sum of a spin flip and its reverse is zero,
    # so it enters as the Hermitian-even combination (see ledger)
    term2 = math.sin(theta / 2) ** 2 * hn([pu, pd]) * flip_even(qu, rd, qd, ru)
    term3 = (c - 1) * ((h_([qu, rd]) + h_([qd, ru])) * n_([pu, pd]) + (n_([qu, rd]) + n_([qd, ru])) * h_([pu, pd]))
    g = math.cos(theta) - 2 * c + 1
    term4 = g * (h_([pu, pd]) * n_([qu, qd, ru, rd]) + h_([qu, qd, ru, rd]) * n_([pu, pd]))
    term5 = 0.5 * g * (h_([pu, pd, qu, rd]) * n_([qd, ru]) + h_([pu, pd, qd, ru]) * n_([qu, rd])
                       + h_([qd, ru]) * n_([pu, pd, qu, rd]) + h_([qu, rd]) * n_([pu, pd, qd, ru]))
    return one + term1 + term2 + term3 + term4 + term5


def flip_even(qu: int, rd: int, qd: int, ru: int) -> OperatorExpr:
    from .fermion import excitation_string

    f = excitation_string([qu, rd], [qd, ru])
    return f + f.adjoint()


def closed_form_ppqr(theta: float, orbitals: tuple[int, int, int], n: int) -> np.ndarray:
    return to_matrix(closed_form_ppqr_expr(theta, orbitals), n)


# ---------------------------------------------------------------------------
# Symmetry operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymmetryOperators:
    N: np.ndarray
    Sz: np.ndarray
    S2: np.ndarray


def symmetry_exprs(n: int) -> tuple[OperatorExpr, OperatorExpr, OperatorExpr]:
    n_spatial = n // 2
    N = OperatorExpr()
    for k in range(n):
        N = N + number_string([k])
    Sz = OperatorExpr()
    Sp = OperatorExpr()
    for P in range(n_spatial):
        Sz = Sz + 0.5 * (number_string([up(P)]) - number_string([dn(P)]))
        Sp = Sp + _hop(dn(P), up(P))
    S2 = Sp.adjoint() * Sp + Sz * (Sz + OperatorExpr.identity())
    return N, Sz, S2


def _hop(frm: int, to: int) -> OperatorExpr:
    from .fermion import normal_order

    return normal_order([(to, "create"), (frm, "annihilate")])


def symmetry_operators(n: int) -> SymmetryOperators:
    N, Sz, S2 = symmetry_exprs(n)
    return SymmetryOperators(to_matrix(N, n), to_matrix(Sz, n), to_matrix(S2, n))


def diagonal_symmetries(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonals of N and Sz over all basis states."""
    states = np.arange(1 << n, dtype=np.int64)
    up_mask = sum(1 << k for k in range(0, n, 2))
    dn_mask = sum(1 << k for k in range(1, n, 2))
    nu = np.bitwise_count(states & up_mask).astype(float)
    nd = np.bitwise_count(states & dn_mask).astype(float)
    return nu + nd, 0.5 * (nu - nd)


def basis_vector(reference, n: int) -> np.ndarray:
    if isinstance(reference, np.ndarray):
        return reference.astype(float)
    if isinstance(reference, str):
        # leftmost character is spinorbital 0
        reference = sum(1 << k for k, ch in enumerate(reference) if ch == "1")
    v = np.zeros(1 << n)
    v[int(reference)] = 1.0
    return v


def symmetry_expectations(U: np.ndarray, reference, n: int | None = None,
                          ops: SymmetryOperators | None = None) -> dict:
    """<N>, <Sz>, <S^2> and their standard deviations in U|reference>."""
    if n is None:
        n = int(round(math.log2(U.shape[0])))
    ops = ops or symmetry_operators(n)
    psi = U @ basis_vector(reference, n)
    out = {}
    for name, m in (("N", ops.N), ("Sz", ops.Sz), ("S2", ops.S2)):
        mv = m @ psi
        mean = float(np.real(np.vdot(psi, mv)))
        sq = float(np.real(np.vdot(mv, mv)))
        out[name] = mean
        out[f"sigma_{name}"] = math.sqrt(max(sq - mean * mean, 0.0))
    return out


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a @ b - b @ a))


# ---------------------------------------------------------------------------
# Debug dump
# ---------------------------------------------------------------------------


def dump_matrix(path, m: np.ndarray, register_size: int) -> None:
    """Row-major float64 dump behind a 16-byte header (dim, register_size)."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<qq", m.shape[0], register_size))
        fh.write(np.ascontiguousarray(m, dtype="<f8").tobytes())


def load_matrix(path) -> tuple[np.ndarray, int]:
    with open(path, "rb") as fh:
        dim, reg = struct.unpack("<qq", fh.read(16))
        data = np.frombuffer(fh.read(), dtype="<f8")
    return data.reshape(dim, dim).copy(), reg
