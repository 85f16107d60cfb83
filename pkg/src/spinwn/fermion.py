"""Symbolic second-quantized operator algebra.

Operators are real-linear combinations of normal-ordered strings.  A string is
keyed by ``(cre_mask, ann_mask)``: creators with ascending indices followed by
annihilators with ascending indices.  Spinorbitals use the alternating layout
``flat = 2*spatial + (0 for up, 1 for down)``.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import kernels

ZERO_TOL = 1e-14
CREATE = "create"
ANNIHILATE = "annihilate"

Key = tuple[int, int]


class InvalidIndexPattern(ValueError):
    """Orbital indices violate the family definition."""


# ---------------------------------------------------------------------------
# Spinorbitals
# ---------------------------------------------------------------------------


class Spin(enum.Enum):
    UP = 0
    DOWN = 1


@dataclass(frozen=True, order=True)
class SpinOrbital:
    spatial: int
    spin: Spin

    @property
    def flat(self) -> int:
        return 2 * self.spatial + self.spin.value

    @classmethod
    def from_flat(cls, flat: int) -> "SpinOrbital":
        return cls(flat // 2, Spin(flat % 2))

    def __str__(self) -> str:
        return f"{self.spatial}{'u' if self.spin is Spin.UP else 'd'}"


def up(p: int) -> int:
    return 2 * p


def dn(p: int) -> int:
    return 2 * p + 1


def so_name(flat: int) -> str:
    return str(SpinOrbital.from_flat(flat))


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _mask(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


# ---------------------------------------------------------------------------
# OperatorExpr
# ---------------------------------------------------------------------------


def _clean(terms: Mapping[Key, float]) -> dict[Key, float]:
    return {k: float(v) for k, v in terms.items() if abs(v) >= ZERO_TOL}


class OperatorExpr:
    """Real-linear combination of normal-ordered fermionic strings.

    Treated as an immutable value: every operation returns a new instance.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Key, float] | None = None):
        self._terms = _clean(terms or {})

    @property
    def terms(self) -> dict[Key, float]:
        return dict(self._terms)

    # construction helpers
    @classmethod
    def identity(cls, coeff: float = 1.0) -> "OperatorExpr":
        return cls({(0, 0): coeff})

    @classmethod
    def zero(cls) -> "OperatorExpr":
        return cls()

    # algebra
    def __add__(self, other: "OperatorExpr") -> "OperatorExpr":
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, 0.0) + v
        return OperatorExpr(out)

    def __sub__(self, other: "OperatorExpr") -> "OperatorExpr":
        return self + (-1.0) * other

    def __neg__(self) -> "OperatorExpr":
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, OperatorExpr):
            return OperatorExpr(kernels.mul_terms(self._terms, other._terms))
        return OperatorExpr({k: v * float(other) for k, v in self._terms.items()})

    def __rmul__(self, scalar):
        return OperatorExpr({k: v * float(scalar) for k, v in self._terms.items()})

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def __pow__(self, n: int) -> "OperatorExpr":
        out = OperatorExpr.identity()
        for _ in range(n):
            out = out * self
        return out

    def adjoint(self) -> "OperatorExpr":
        out: dict[Key, float] = {}
        for (c, a), v in self._terms.items():
            # (a+_C a_A)^dag = a+_A a_C up to the reversal sign of each block
            ka = len(_bits(c))
            kb = len(_bits(a))
            s = (-1) ** (ka * (ka - 1) // 2 + kb * (kb - 1) // 2)
            out[(a, c)] = out.get((a, c), 0.0) + s * v
        return OperatorExpr(out)

    # inspection
    def is_zero(self, tol: float = ZERO_TOL) -> bool:
        return all(abs(v) < tol for v in self._terms.values())

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self._terms.values()))

    def support(self) -> int:
        m = 0
        for c, a in self._terms:
            m |= c | a
        return m

    def max_index(self) -> int:
        return self.support().bit_length() - 1

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(sorted(self._terms.items()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorExpr):
            return NotImplemented
        return (self - other).is_zero(1e-12)

    def __hash__(self):  # pragma: no cover - value semantics but float keys
        return hash(tuple(sorted(self._terms)))

    def __repr__(self) -> str:
        return f"OperatorExpr({len(self._terms)} terms)"

    def to_text(self) -> str:
        return to_text(self)


def string_tokens(key: Key) -> list[str]:
    c, a = key
    return [f"a{i}^" for i in _bits(c)] + [f"a{i}" for i in _bits(a)]


def to_text(x: OperatorExpr) -> str:
    """One term per line: coefficient followed by ``a{i}^`` / ``a{i}`` tokens."""
    lines = []
    for key, v in sorted(x.terms.items(), key=lambda kv: (bin(kv[0][0] | kv[0][1]).count("1"), kv[0])):
        toks = " ".join(string_tokens(key))
        lines.append(f"{v:+.16e}" + (f" {toks}" if toks else ""))
    return "\n".join(lines) + ("\n" if lines else "")


_TOKEN = re.compile(r"^a(\d+)(\^?)$")


def from_text(text: str) -> OperatorExpr:
    out = OperatorExpr()
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            coeff = float(parts[0])
        except ValueError as exc:
            raise ValueError(f"line {ln}: bad coefficient {parts[0]!r}") from exc
        raw = []
        for tok in parts[1:]:
            m = _TOKEN.match(tok)
            if not m:
                raise ValueError(f"line {ln}: bad token {tok!r}")
            raw.append((int(m.group(1)), CREATE if m.group(2) else ANNIHILATE))
        out = out + normal_order(raw, coeff)
    return out


# ---------------------------------------------------------------------------
# Elementary constructors
# ---------------------------------------------------------------------------


def creation(i: int) -> OperatorExpr:
    return OperatorExpr({(1 << i, 0): 1.0})


def annihilation(i: int) -> OperatorExpr:
    return OperatorExpr({(0, 1 << i): 1.0})


def normal_order(raw: Sequence[tuple[int, str]], coeff: float = 1.0) -> OperatorExpr:
    """Normal-form expansion of the product ``coeff * op_1 op_2 ... op_k``."""
    out = OperatorExpr.identity(coeff)
    for idx, kind in raw:
        if idx < 0:
            raise ValueError(f"negative index {idx}")
        if kind in (CREATE, "+", "^", "c", True):
            op = creation(idx)
        elif kind in (ANNIHILATE, "-", "", "a", False):
            op = annihilation(idx)
        else:
            raise ValueError(f"unknown operator kind {kind!r}")
        out = out * op
    return out


def number_string(indices: Iterable[int]) -> OperatorExpr:
    """n_{i j ...} = n_i n_j ..."""
    m = _mask(indices)
    k = bin(m).count("1")
    # a+_i a+_j a_i a_j = -n_i n_j: reorder sign of the annihilator block
    return OperatorExpr({(m, m): (-1.0) ** (k * (k - 1) // 2)})


def hole_string(indices: Iterable[int]) -> OperatorExpr:
    """h_{i j ...} = (1 - n_i)(1 - n_j)..."""
    out = OperatorExpr.identity()
    for i in indices:
        out = out * (OperatorExpr.identity() - number_string([i]))
    return out


def commutator(x: OperatorExpr, y: OperatorExpr) -> OperatorExpr:
    return OperatorExpr(kernels.commutator_terms(x._terms, y._terms))


def adjoint(x: OperatorExpr) -> OperatorExpr:
    return x.adjoint()


def excitation_string(frm: Sequence[int], to: Sequence[int]) -> OperatorExpr:
    """a+_{to[0]} a+_{to[1]} ... a_{frm[-1]} ... a_{frm[0]}."""
    raw = [(i, CREATE) for i in to] + [(i, ANNIHILATE) for i in reversed(frm)]
    return normal_order(raw)


def excitation(frm: Sequence[int], to: Sequence[int]) -> OperatorExpr:
    """Anti-Hermitian excitation: single A_p^q or double A_pq^rs, minus h.c."""
    if len(set(frm)) != len(frm) or len(set(to)) != len(to):
        raise InvalidIndexPattern(f"repeated index in {tuple(frm)} -> {tuple(to)}")
    f = excitation_string(frm, to)
    return f - f.adjoint()


def number_part(x: Sequence[int], y: Sequence[int] = (), sign: int = 1) -> OperatorExpr:
    """h_X n_Y + sign * n_X h_Y (identity when both are empty)."""
    if not x and not y:
        return OperatorExpr.identity()
    return hole_string(x) * number_string(y) + sign * (number_string(x) * hole_string(y))


# ---------------------------------------------------------------------------
# Generator specs and labels
# ---------------------------------------------------------------------------


def _names(idx: Iterable[int]) -> str:
    return ",".join(so_name(i) for i in idx)


@dataclass(frozen=True)
class GeneratorLabel:
    family: str
    orbitals: tuple[int, ...] = ()
    detail: str = ""

    def __str__(self) -> str:
        core = f"{self.family}({','.join(map(str, self.orbitals))})" if self.orbitals else self.family
        return f"{core}[{self.detail}]" if self.detail else core


@dataclass(frozen=True)
class GeneratorSpec:
    """E = A * N with A anti-Hermitian and N a number-operator combination.

    ``frm``/``to`` are the excitation indices, ``check_x``/``check_y``/``sign``
    define ``N = h_X n_Y + sign * n_X h_Y`` (identity when both are empty).
    """

    frm: tuple[int, ...]
    to: tuple[int, ...]
    check_x: tuple[int, ...] = ()
    check_y: tuple[int, ...] = ()
    sign: int = 1
    label: GeneratorLabel = field(default_factory=lambda: GeneratorLabel("A"))

    def __post_init__(self):
        exc = set(self.frm) | set(self.to)
        chk = set(self.check_x) | set(self.check_y)
        if exc & chk:
            raise InvalidIndexPattern("excitation and number part share indices")
        if set(self.check_x) & set(self.check_y):
            raise InvalidIndexPattern("X and Y check sets overlap")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def excitation(self) -> OperatorExpr:
        return excitation(self.frm, self.to)

    @property
    def number_part(self) -> OperatorExpr:
        return number_part(self.check_x, self.check_y, self.sign)

    @property
    def expr(self) -> OperatorExpr:
        return self.excitation * self.number_part

    @property
    def has_number_part(self) -> bool:
        return bool(self.check_x or self.check_y)

    def describe(self) -> str:
        a = f"A[{_names(self.frm)}->{_names(self.to)}]"
        if not self.has_number_part:
            return a
        x = _names(self.check_x)
        y = _names(self.check_y)
        s = "+" if self.sign > 0 else "-"
        if self.check_y:
            n = f"(h[{x}]n[{y}] {s} n[{x}]h[{y}])"
        else:
            n = f"(h[{x}] {s} n[{x}])"
        return a + n

    def __str__(self) -> str:
        return self.describe()


def check_generator(spec: GeneratorSpec, tol: float = 1e-12) -> dict:
    """Symbolic checks: A^dag = -A, [A, N] = 0, and N^2 = N (N^3 = N for sign -1)."""
    a = spec.excitation
    n = spec.number_part
    anti = (a.adjoint() + a).norm()
    comm = commutator(a, n).norm()
    n2 = n * n
    idem = (n2 - n).norm()
    tri = (n2 * n - n).norm()
    return {
        "anti_hermitian": anti < tol,
        "commutes": comm < tol,
        "idempotent": idem < tol,
        "tripotent": tri < tol,
        "ok": anti < tol and comm < tol and (idem < tol if spec.sign > 0 else tri < tol),
    }


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


class Family(str, enum.Enum):
    GS = "gs"          # spinorbital single A_p^q
    GD = "gd"          # spinorbital double A_pq^rs
    SA_GS = "sags"     # singlet single
    PPQQ = "ppqq"      # perfect-pairing double
    PPQR = "ppqr"
    INT0 = "int0"
    INT1 = "int1"
    FEB_ROW1 = "feb-row1"
    FEB_ROW2 = "feb-row2"
    FEB_ROW3 = "feb-row3"
    FEB_ROW4 = "feb-row4"
    FEB_ROW5 = "feb-row5"
    FEB_ROW6 = "feb-row6"
    FEB_ROW7 = "feb-row7"
    FEB_ROW8 = "feb-row8"
    FEB_ROW9 = "feb-row9"
    FEB_ROW10 = "feb-row10"
    FEB_ROW11 = "feb-row11"


TABLE_ROWS = tuple(Family(f"feb-row{i}") for i in range(1, 12))

_ARITY = {
    Family.GS: 2, Family.GD: 4, Family.SA_GS: 2, Family.PPQQ: 2,
    Family.PPQR: 3, Family.INT0: 4, Family.INT1: 4,
}
_ARITY.update({f: 4 for f in TABLE_ROWS})


def _require_distinct(orbitals: Sequence[int], family: Family) -> None:
    if len(set(orbitals)) != len(orbitals):
        raise InvalidIndexPattern(f"{family.value} requires distinct indices, got {tuple(orbitals)}")
    if any(o < 0 for o in orbitals):
        raise InvalidIndexPattern(f"negative index in {tuple(orbitals)}")


def table_row_spec(row: int, P: int, Q: int, R: int, S: int) -> GeneratorSpec:
    """Elementary generator of Table-I type ``row`` (1..11) on spatial orbitals."""
    label = GeneratorLabel(f"feb-row{row}", (P, Q, R, S))
    if 1 <= row <= 6:
        frm, to = (up(P), dn(Q)), (up(R), dn(S))
        checks = {
            1: ((), ()),
            2: ((dn(P), up(Q)), ()),
            3: ((up(Q),), (up(S),)),
            4: ((dn(P), up(Q)), (up(S),)),
            5: ((dn(P), up(Q), dn(R), up(S)), ()),
            6: ((dn(P), up(Q)), (dn(R), up(S))),
        }[row]
        return GeneratorSpec(frm, to, checks[0], checks[1], 1, label)
    if row == 8:
        return GeneratorSpec((up(Q), dn(R)), (dn(Q), up(R)), (up(P),), (up(S),), -1, label)
    if 7 <= row <= 11:
        frm, to = (up(P), dn(Q)), (dn(P), up(Q))
        checks = {
            7: ((up(R), dn(S)), ()),
            9: ((up(R), dn(S)), (up(S),)),
            10: ((up(R), dn(R), up(S), dn(S)), ()),
            11: ((up(R), dn(S)), (dn(R), up(S))),
        }[row]
        return GeneratorSpec(frm, to, checks[0], checks[1], -1, label)
    raise ValueError(f"row must be in 1..11, got {row}")


def build_generator(family: Family | str, orbitals: Sequence[int]) -> GeneratorSpec | OperatorExpr:
    """Construct a generator of the requested family.

    Spinorbital families (``gs``, ``gd``) take flat spinorbital indices and return
    a GeneratorSpec.  Spin-adapted families take spatial indices and return an
    OperatorExpr.  Table-I families take spatial ``(P, Q, R, S)`` and return a
    GeneratorSpec.
    """
    family = Family(family)
    orbitals = tuple(int(o) for o in orbitals)
    if len(orbitals) != _ARITY[family]:
        raise InvalidIndexPattern(f"{family.value} takes {_ARITY[family]} indices, got {len(orbitals)}")
    _require_distinct(orbitals, family)
    if family is Family.GS:
        p, q = orbitals
        return GeneratorSpec((p,), (q,), label=GeneratorLabel("gs", orbitals))
    if family is Family.GD:
        p, q, r, s = orbitals
        return GeneratorSpec((p, q), (r, s), label=GeneratorLabel("gd", orbitals))
    if family is Family.SA_GS:
        P, Q = orbitals
        return (excitation([up(P)], [up(Q)]) + excitation([dn(P)], [dn(Q)])) / math.sqrt(2)
    if family is Family.PPQQ:
        P, Q = orbitals
        return excitation([up(P), dn(P)], [up(Q), dn(Q)])
    if family is Family.PPQR:
        P, Q, R = orbitals
        return (excitation([up(P), dn(P)], [up(Q), dn(R)])
                - excitation([up(P), dn(P)], [dn(Q), up(R)])) / math.sqrt(2)
    if family is Family.INT0:
        return 0.5 * sum_exprs(g.expr * c for g, c in zip(int0_constituents(*orbitals), (1, -1, -1, 1)))
    if family is Family.INT1:
        P, Q, R, S = orbitals
        same = excitation([up(P), up(Q)], [up(R), up(S)]) + excitation([dn(P), dn(Q)], [dn(R), dn(S)])
        mixed = sum_exprs(g.expr for g in int0_constituents(P, Q, R, S))
        return (same + 0.5 * mixed) / math.sqrt(3)
    row = int(family.value.rsplit("row", 1)[1])
    return table_row_spec(row, *orbitals)


def sum_exprs(items: Iterable[OperatorExpr]) -> OperatorExpr:
    out = OperatorExpr()
    for x in items:
        out = out + x
    return out


def int0_constituents(P: int, Q: int, R: int, S: int) -> list[GeneratorSpec]:
    """The four mixed-spin doubles shared by both intermediate couplings."""
    return [
        GeneratorSpec((up(P), dn(Q)), (up(R), dn(S)), label=GeneratorLabel("gd", (up(P), dn(Q), up(R), dn(S)))),
        GeneratorSpec((up(P), dn(Q)), (dn(R), up(S)), label=GeneratorLabel("gd", (up(P), dn(Q), dn(R), up(S)))),
        GeneratorSpec((dn(P), up(Q)), (up(R), dn(S)), label=GeneratorLabel("gd", (dn(P), up(Q), up(R), dn(S)))),
        GeneratorSpec((dn(P), up(Q)), (dn(R), up(S)), label=GeneratorLabel("gd", (dn(P), up(Q), dn(R), up(S)))),
    ]


def seed_generators(family: Family | str, orbitals: Sequence[int] | None = None) -> list[GeneratorSpec]:
    """Spinorbital constituents whose Lie closure defines the family's algebra."""
    family = Family(family)
    if family is Family.PPQR:
        P, Q, R = orbitals if orbitals is not None else (0, 1, 2)
        return [
            GeneratorSpec((up(P), dn(P)), (up(Q), dn(R)), label=GeneratorLabel("gd", (up(P), dn(P), up(Q), dn(R)))),
            GeneratorSpec((up(P), dn(P)), (dn(Q), up(R)), label=GeneratorLabel("gd", (up(P), dn(P), dn(Q), up(R)))),
        ]
    P, Q, R, S = orbitals if orbitals is not None else (0, 1, 2, 3)
    if family is Family.INT0:
        return int0_constituents(P, Q, R, S)
    if family is Family.INT1:
        return [
            GeneratorSpec((up(P), up(Q)), (up(R), up(S)), label=GeneratorLabel("gd", (up(P), up(Q), up(R), up(S)))),
            GeneratorSpec((dn(P), dn(Q)), (dn(R), dn(S)), label=GeneratorLabel("gd", (dn(P), dn(Q), dn(R), dn(S)))),
        ] + int0_constituents(P, Q, R, S)
    raise ValueError(f"no seed set for family {family.value}")


def seed_coefficients(family: Family | str) -> list[float]:
    """Coefficients d with generator = sum_i d_i * seed_i."""
    family = Family(family)
    if family is Family.PPQR:
        r = 1 / math.sqrt(2)
        return [r, -r]
    if family is Family.INT0:
        return [0.5, -0.5, -0.5, 0.5]
    if family is Family.INT1:
        r = 1 / math.sqrt(3)
        return [r, r, r / 2, r / 2, r / 2, r / 2]
    raise ValueError(f"no seed set for family {family.value}")


# ---------------------------------------------------------------------------
# Cubic closure
# ---------------------------------------------------------------------------


@dataclass
class CubicReport:
    cubic_residual: float
    violations: list[tuple[str, float]]
    checked_pairs: int

    @property
    def ok(self) -> bool:
        return self.cubic_residual < 1e-12 and not self.violations


def _as_expr(e) -> OperatorExpr:
    return e.expr if isinstance(e, GeneratorSpec) else e


def check_cubic_closure(e, partners: Sequence = (), tol: float = 1e-12) -> CubicReport:
    """Verify E^3 = -E and E [X, E] E = 0 for each partner X."""
    ej = _as_expr(e)
    cube = ej * ej * ej + ej
    violations = []
    for k, p in enumerate(partners):
        c = commutator(_as_expr(p), ej)
        if c.is_zero():
            continue
        r = (ej * c * ej).norm()
        if r >= tol:
            violations.append((str(getattr(p, "label", k)), r))
    return CubicReport(cube.norm(), violations, len(partners))
