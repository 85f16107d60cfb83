"""Gate-level circuits for excitation unitaries under Jordan-Wigner.

Qubit ``k`` carries spinorbital ``k`` (identity layout) and basis index bit ``k``
is qubit ``k``, so simulated matrices line up with :mod:`spinwn.fock`.

Every FEB circuit has the same skeleton::

    parity staircase -> occupancy checks -> mapping CNOTs
        -> multi-controlled Ry (Gray-code ladder of CZ + Ry(+-phi/2^n))
    -> unmapping -> checks undone -> staircase undone

The last ladder CZ fuses with the first unmapping CNOT into one CNOT plus
three phase gates, which is where the 13 (not 14) of the QEB core comes from.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .fermion import GeneratorSpec
from .fock import MAX_REGISTER, apply_string

SKIP_ALPHA = 1e-8

_ONE_QUBIT = ("x", "h", "s", "sdg", "ry", "rz")
_TWO_QUBIT = ("cx", "cz")
KINDS = _ONE_QUBIT + _TWO_QUBIT + ("mcry",)


class CircuitError(ValueError):
    pass


class DuplicateQubit(CircuitError):
    pass


class WidthOverflow(CircuitError):
    pass


class UnsupportedGenerator(CircuitError):
    pass


class ThetaOutOfRange(CircuitError):
    pass


# ---------------------------------------------------------------------------
# IR
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Control:
    q: int
    polarity: int = 1  # 1: <1>-control, 0: <0>-control


@dataclass(frozen=True)
class Gate:
    kind: str
    target: int
    controls: tuple[Control, ...] = ()
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        qs = [c.q for c in self.controls]
        if len(set(qs)) != len(qs) or self.target in qs:
            raise DuplicateQubit(f"{self.kind}: repeated qubit in target {self.target} / controls {qs}")
        if self.kind in _TWO_QUBIT and len(self.controls) != 1:
            raise CircuitError(f"{self.kind} takes exactly one control")
        if self.kind in _ONE_QUBIT and self.controls:
            raise CircuitError(f"{self.kind} takes no controls")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target,) + tuple(c.q for c in self.controls)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "qubits": list(self.qubits),
            "controls": [{"q": c.q, "polarity": c.polarity} for c in self.controls],
            "angle": self.angle,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Gate":
        ctr = tuple(Control(int(c["q"]), int(c["polarity"])) for c in d.get("controls", []))
        return cls(d["kind"], int(d["qubits"][0]), ctr, d.get("angle"))


def X(q):
    return Gate("x", q)


def H(q):
    return Gate("h", q)


def S(q):
    return Gate("s", q)


def Sdg(q):
    return Gate("sdg", q)


def RY(q, a):
    return Gate("ry", q, angle=float(a))


def RZ(q, a):
    return Gate("rz", q, angle=float(a))


def CX(c, t):
    return Gate("cx", t, (Control(c),))


def CZ(c, t):
    return Gate("cz", t, (Control(c),))


@dataclass
class Circuit:
    width: int
    gates: list[Gate] = field(default_factory=list)

    def append(self, g: Gate) -> None:
        if max(g.qubits) >= self.width:
            raise CircuitError(f"gate on qubit {max(g.qubits)} outside width {self.width}")
        self.gates.append(g)

    def extend(self, gs: Iterable[Gate]) -> None:
        for g in gs:
            self.append(g)

    def __len__(self) -> int:
        return len(self.gates)

    def decomposed(self) -> "Circuit":
        out = Circuit(self.width)
        for g in self.gates:
            if g.kind == "mcry":
                out.extend(decompose_mcry(g))
            else:
                out.append(g)
        return out

    def counts(self) -> dict:
        """Per-kind counts after decomposition; ``cnot`` includes CZ."""
        c = {k: 0 for k in _ONE_QUBIT + _TWO_QUBIT}
        for g in self.decomposed().gates:
            c[g.kind] += 1
        c["cnot"] = c["cx"] + c["cz"]
        c["single_qubit"] = sum(c[k] for k in _ONE_QUBIT)
        c["total"] = c["cnot"] + c["single_qubit"]
        return c

    def inverse(self) -> "Circuit":
        inv = {"s": "sdg", "sdg": "s"}
        out = Circuit(self.width)
        for g in reversed(self.gates):
            a = -g.angle if g.angle is not None else None
            out.append(Gate(inv.get(g.kind, g.kind), g.target, g.controls, a))
        return out

    def to_json(self) -> dict:
        return {"width": self.width, "gates": [g.to_json() for g in self.gates]}

    @classmethod
    def from_json(cls, d: dict) -> "Circuit":
        return cls(int(d["width"]), [Gate.from_json(g) for g in d["gates"]])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    def to_qasm(self) -> str:
        """OpenQASM 2 text; multi-controlled gates are decomposed first."""
        lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{self.width}];"]
        for g in self.decomposed().gates:
            if g.kind in _TWO_QUBIT:
                lines.append(f"{g.kind} q[{g.controls[0].q}],q[{g.target}];")
            elif g.angle is not None:
                lines.append(f"{g.kind}({g.angle!r}) q[{g.target}];")
            else:
                lines.append(f"{g.kind} q[{g.target}];")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class QubitLayout:
    mapping: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.mapping) != list(range(len(self.mapping))):
            raise CircuitError("layout must be a bijection onto 0..n-1")

    @classmethod
    def identity(cls, n: int) -> "QubitLayout":
        return cls(tuple(range(n)))

    def __call__(self, k: int) -> int:
        return self.mapping[k]

    @property
    def width(self) -> int:
        return len(self.mapping)


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


_MATS = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "s": np.diag([1, 1j]),
    "sdg": np.diag([1, -1j]),
}


def ry_matrix(a: float) -> np.ndarray:
    c, s = math.cos(a / 2), math.sin(a / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _one_qubit_matrix(g: Gate) -> np.ndarray:
    if g.kind == "ry":
        return ry_matrix(g.angle)
    if g.kind == "rz":
        return np.diag([np.exp(-0.5j * g.angle), np.exp(0.5j * g.angle)])
    if g.kind in ("cx",):
        return _MATS["x"]
    if g.kind == "cz":
        return np.diag([1, -1]).astype(complex)
    if g.kind == "mcry":
        return ry_matrix(g.angle)
    return _MATS[g.kind]


def _apply(psi: np.ndarray, g: Gate, idx: np.ndarray) -> None:
    t = g.target
    sel = ((idx >> t) & 1) == 0
    for c in g.controls:
        sel &= ((idx >> c.q) & 1) == c.polarity
    i0 = idx[sel]
    i1 = i0 | (1 << t)
    m = _one_qubit_matrix(g)
    a, b = psi[i0].copy(), psi[i1].copy()
    psi[i0] = m[0, 0] * a + m[0, 1] * b
    psi[i1] = m[1, 0] * a + m[1, 1] * b


def simulate(c: Circuit, state: np.ndarray) -> np.ndarray:
    """Apply ``c`` to a statevector (or to the columns of a matrix)."""
    if c.width > MAX_REGISTER:
        raise WidthOverflow(f"width {c.width} exceeds simulator bound {MAX_REGISTER}")
    psi = np.array(state, dtype=complex)
    if psi.shape[0] != 1 << c.width:
        raise CircuitError(f"state of length {psi.shape[0]} does not match width {c.width}")
    idx = np.arange(1 << c.width)
    for g in c.gates:
        _apply(psi, g, idx)
    return psi


def circuit_matrix(c: Circuit) -> np.ndarray:
    return simulate(c, np.eye(1 << c.width))


# ---------------------------------------------------------------------------
# Multi-controlled Ry
# ---------------------------------------------------------------------------


def mcry(target: int, controls: Sequence[Control], angle: float) -> Gate:
    return Gate("mcry", target, tuple(controls), float(angle))


def _gray_ladder(target: int, ctrl: Sequence[int], angle: float) -> list[Gate]:
    """All-<1> controlled Ry(angle) as 2^n Ry and 2^n CZ; ctrl[-1] closes the ladder."""
    n = len(ctrl)
    if n == 0:
        return [RY(target, angle)]
    step = angle / (1 << n)
    out = []
    for j in range(1 << n):
        g = j ^ (j >> 1)
        out.append(RY(target, step * (-1) ** bin(g).count("1")))
        k = j + 1
        low = (k & -k).bit_length() - 1
        out.append(CZ(ctrl[min(low, n - 1)], target))
    return out


def decompose_mcry(g: Gate) -> list[Gate]:
    flips = [X(c.q) for c in g.controls if c.polarity == 0]
    return flips + _gray_ladder(g.target, [c.q for c in g.controls], g.angle) + flips


# ---------------------------------------------------------------------------
# Double-excitation core
# ---------------------------------------------------------------------------


def _givens_core(p: int, q: int, r: int, s: int, extra: Sequence[Control], angle: float) -> list[Gate]:
    """Rotation between |p q> and |r s> occupied, all other states fixed.

    ``extra`` are additional controls.  The final ladder CZ(q, s) is fused with
    the first unmapping CX(s -> q).
    """
    ctrls = [Control(p, 0), Control(r, 0)] + list(extra) + [Control(q, 1)]
    flips = [X(c.q) for c in ctrls if c.polarity == 0]
    ladder = _gray_ladder(s, [c.q for c in ctrls], angle)
    assert ladder[-1].kind == "cz" and ladder[-1].controls[0].q == q
    return ([CX(s, r), CX(q, p), CX(s, q)] + flips + ladder[:-1]
            + [S(q), CX(s, q), Sdg(q), S(s)] + flips + [CX(q, p), CX(s, r)])


def emit_qeb_double(orbs: Sequence[int], theta: float, width: int | None = None) -> Circuit:
    """exp(theta * (Q_r^+ Q_s^+ Q_q Q_p - h.c.)) for qubit operators without parity strings."""
    p, q, r, s = (int(o) for o in orbs)
    if len({p, q, r, s}) != 4:
        raise DuplicateQubit(f"four distinct spinorbitals required, got {tuple(orbs)}")
    c = Circuit(width or max(p, q, r, s) + 1)
    c.extend(_givens_core(p, q, r, s, (), 2 * theta))
    return c


def qeb_matrix(orbs: Sequence[int], theta: float, n: int) -> np.ndarray:
    """Oracle for :func:`emit_qeb_double`: Givens rotation with no parity signs."""
    import scipy.linalg

    p, q, r, s = orbs
    dim = 1 << n
    m = np.zeros((dim, dim))
    src = (1 << p) | (1 << q)
    dst = (1 << r) | (1 << s)
    for b in range(dim):
        if b & (src | dst) == src:
            m[b ^ src ^ dst, b] += 1.0
            m[b, b ^ src ^ dst] -= 1.0
    return scipy.linalg.expm(theta * m)


def _parity_set(exc: Sequence[int]) -> set[int]:
    e = set(exc)
    top = max(e)
    return {k for k in range(top) if k not in e and sum(1 for x in e if x > k) % 2 == 1}


def _string_sign(spec: GeneratorSpec) -> int:
    """Sign of E acting on the state with only the source pair occupied."""
    src = sum(1 << k for k in spec.frm)
    key = (sum(1 << k for k in spec.to), src)
    coeff = spec.excitation.terms.get(key)
    if coeff is None:
        raise UnsupportedGenerator(f"{spec}: excitation string not found")
    _, sgn, _ = apply_string(np.array([src], dtype=np.int64), key)
    return int(sgn[0]) * (1 if coeff > 0 else -1)


@dataclass(frozen=True)
class FebPlan:
    """Derived qubit roles for one generator."""

    p: int
    q: int
    r: int
    s: int
    chain: tuple[int, ...]
    checks_from: int | None
    anti: tuple[int, ...]
    pos: tuple[int, ...]
    theta_sign: int

    @property
    def k(self) -> int:
        return len(self.anti) + len(self.pos)


def feb_plan(spec: GeneratorSpec) -> FebPlan:
    if len(spec.frm) != 2 or len(spec.to) != 2:
        raise UnsupportedGenerator(f"{spec}: only double excitations are supported")
    p, q = spec.frm
    r, s = spec.to
    xs, ys = tuple(spec.check_x), tuple(spec.check_y)
    par = _parity_set((p, q, r, s))
    sigma = _string_sign(spec)
    if not xs and not ys:
        chain = tuple(sorted(par))
        return FebPlan(p, q, r, s, chain, None, (), (), sigma)
    if not xs:
        raise UnsupportedGenerator(f"{spec}: number part needs a non-empty X set")
    x1 = xs[0]
    rest = tuple(sorted(par - set(xs) - set(ys)))
    odd = (len(par & set(xs)) + len(par & set(ys))) % 2 == 1
    flip = odd != (spec.sign == -1)
    chain = ((x1,) + rest) if flip else rest
    sign = sigma * (-1) ** len(par & set(ys))
    return FebPlan(p, q, r, s, chain, x1, xs[1:], ys, sign)


def emit_feb(spec: GeneratorSpec, theta: float, layout: QubitLayout | None = None,
             width: int | None = None) -> Circuit:
    """exp(theta * E) for a double excitation with an optional number-operator part."""
    plan = feb_plan(spec)
    top = max((plan.p, plan.q, plan.r, plan.s) + tuple(spec.check_x) + tuple(spec.check_y))
    if layout is None:
        layout = QubitLayout.identity(width or top + 1)
    L = layout
    c = Circuit(width or layout.width)
    stair = [CX(L(a), L(b)) for a, b in zip(plan.chain, plan.chain[1:])]
    checks = ([CX(L(plan.checks_from), L(x)) for x in plan.anti]
              + [CX(L(plan.checks_from), L(y)) for y in plan.pos])
    extra = [Control(L(x), 0) for x in plan.anti] + [Control(L(y), 1) for y in plan.pos]
    core = _givens_core(L(plan.p), L(plan.q), L(plan.r), L(plan.s), extra, 2 * theta * plan.theta_sign)
    wrap = [CZ(L(plan.chain[-1]), L(plan.s))] if plan.chain else []
    c.extend(stair + checks + wrap + core + wrap + checks[::-1] + stair[::-1])
    return c


def emit_feb_compact(spec: GeneratorSpec, theta: float, width: int | None = None) -> Circuit:
    """Same unitary with the controlled Ry kept as a single mcry gate."""
    plan = feb_plan(spec)
    full = emit_feb(spec, theta, width=width)
    out = Circuit(full.width)
    ctrls = ([Control(plan.p, 0), Control(plan.r, 0)] + [Control(x, 0) for x in plan.anti]
             + [Control(y, 1) for y in plan.pos] + [Control(plan.q, 1)])
    stair = [CX(a, b) for a, b in zip(plan.chain, plan.chain[1:])]
    checks = [CX(plan.checks_from, x) for x in plan.anti + plan.pos]
    wrap = [CZ(plan.chain[-1], plan.s)] if plan.chain else []
    mapping = [CX(plan.s, plan.r), CX(plan.q, plan.p), CX(plan.s, plan.q)]
    out.extend(stair + checks + wrap + mapping
               + [mcry(plan.s, ctrls, 2 * theta * plan.theta_sign)]
               + mapping[::-1] + wrap + checks[::-1] + stair[::-1])
    return out


def strip_parity(c: Circuit, spec: GeneratorSpec) -> Circuit:
    """Drop staircase CNOTs and sign-wrap CZs, leaving the QEB part."""
    plan = feb_plan(spec)
    chain = set(plan.chain)
    out = Circuit(c.width)
    for g in c.gates:
        if g.kind == "cx" and set(g.qubits) <= chain:
            continue
        if g.kind == "cz" and plan.chain and g.controls[0].q == plan.chain[-1] and g.target == plan.s:
            continue
        out.append(g)
    return out


# ---------------------------------------------------------------------------
# Peephole optimizer
# ---------------------------------------------------------------------------


_SELF_INVERSE = {"x", "h", "cx", "cz"}
_INVERSE_PAIR = {("s", "sdg"), ("sdg", "s")}


def _cancels(a: Gate, b: Gate) -> bool:
    if a.kind in _SELF_INVERSE and a == b:
        return True
    if a.kind == "cz" and b.kind == "cz" and set(a.qubits) == set(b.qubits):
        return True
    if (a.kind, b.kind) in _INVERSE_PAIR and a.target == b.target:
        return True
    return False


def cancel_adjacent(c: Circuit) -> Circuit:
    """Remove gate pairs that multiply to identity with nothing in between on their qubits.

    Also merges consecutive Ry on the same qubit and drops Ry(0).
    """
    gates = list(c.decomposed().gates)
    changed = True
    while changed:
        changed = False
        last: dict[int, int] = {}
        alive = [True] * len(gates)
        for i, g in enumerate(gates):
            prev = {last.get(q) for q in g.qubits}
            if len(prev) == 1 and None not in prev:
                j = prev.pop()
                h = gates[j]
                if set(h.qubits) == set(g.qubits):
                    if _cancels(h, g):
                        alive[i] = alive[j] = False
                        for q in g.qubits:
                            last.pop(q, None)
                        changed = True
                        continue
                    if h.kind == g.kind == "ry":
                        gates[j] = RY(h.target, h.angle + g.angle)
                        alive[i] = False
                        changed = True
                        continue
            for q in g.qubits:
                last[q] = i
        gates = [g for g, a in zip(gates, alive) if a and not (g.kind == "ry" and abs(g.angle) < 1e-15)]
    return Circuit(c.width, gates)


# ---------------------------------------------------------------------------
# Table I accounting
# ---------------------------------------------------------------------------


TABLE_CNOT_CONST = {1: 9, 2: 15, 3: 15, 4: 33, 5: 63, 6: 63, 7: 25, 8: 25, 9: 43, 10: 77, 11: 77}
TABLE_RY = {1: 8, 2: 16, 3: 16, 4: 32, 5: 64, 6: 64, 7: 16, 8: 16, 9: 32, 10: 64, 11: 64}
TABLE_STAIRCASES = {r: (2 if r <= 6 else 0) for r in range(1, 12)}


def _spatial(k: int) -> int:
    return k // 2


def is_spin_flip(spec: GeneratorSpec) -> bool:
    return sorted(map(_spatial, spec.frm)) == sorted(map(_spatial, spec.to))


def table_row_of(spec: GeneratorSpec) -> int | None:
    """Table I row whose structure matches ``spec`` (None when no row applies)."""
    nx, ny = len(spec.check_x), len(spec.check_y)
    key = (min(nx, ny), max(nx, ny))
    if is_spin_flip(spec):
        if spec.sign != -1:
            return None
        return {(0, 2): 7, (1, 1): 8, (1, 2): 9, (0, 4): 10, (2, 2): 11}.get(key)
    if nx + ny and spec.sign != 1:
        return None
    return {(0, 0): 1, (0, 2): 2, (1, 1): 3, (1, 2): 4, (0, 4): 5, (2, 2): 6}.get(key)


def _so(k: int) -> str:
    return f"{k // 2}{'u' if k % 2 == 0 else 'd'}"


@dataclass
class ElementCount:
    label: str
    row: int | None
    fixed_cnot: int
    staircase_terms: list[str]
    staircase_value: int
    ry: int
    emitted_cnot: int
    emitted_ry: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def element_count(spec: GeneratorSpec, label: str = "") -> ElementCount:
    """Table-style bound for one element plus the counts of the emitted circuit.

    The symbolic staircase term is 2(b - a) for each excitation pair (a, b) on
    distinct spatial orbitals; a pair on one spatial orbital contributes the
    constant 2 instead.
    """
    row = table_row_of(spec)
    emitted = emit_feb(spec, 0.1).counts()
    if row is None:
        plan = feb_plan(spec)
        ry = 1 << (3 + max(plan.k, 0))
        fixed = emitted["cnot"] - 2 * max(len(plan.chain) - 1, 0)
        return ElementCount(label or str(spec), None, fixed, [], emitted["cnot"] - fixed, ry,
                            emitted["cnot"], emitted["ry"])
    fixed = TABLE_CNOT_CONST[row]
    terms: list[str] = []
    value = 0
    if TABLE_STAIRCASES[row]:
        for a, b in (tuple(sorted(spec.frm)), tuple(sorted(spec.to))):
            if _spatial(a) == _spatial(b):
                fixed += 2
            else:
                terms.append(f"2({_so(b)}-{_so(a)})")
                value += 2 * (b - a)
    return ElementCount(label or str(spec), row, fixed, terms, value, TABLE_RY[row],
                        emitted["cnot"], emitted["ry"])


@dataclass
class CountReport:
    elements: list[ElementCount]
    staircases: int
    fixed_cnot: int
    staircase_cnot: int
    ry: int
    emitted_cnot: int
    emitted_ry: int
    cancelled_cnot: int | None = None
    cancelled_single: int | None = None

    def to_json(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "elements"}
        d["elements"] = [e.to_json() for e in self.elements]
        return d


def count_report(elements: Sequence[GeneratorSpec], skip: Iterable[int] = (),
                 circuit: Circuit | None = None) -> CountReport:
    """Aggregate Table-style accounting over a product of generators.

    ``skip`` lists element positions left out (zero parameters).  When a
    composed ``circuit`` is given, the post-cancellation counts are filled in.
    """
    skip = set(skip)
    rows = [element_count(e, getattr(e.label, "detail", "") or str(e))
            for i, e in enumerate(elements) if i not in skip]
    rep = CountReport(
        rows,
        staircases=sum(TABLE_STAIRCASES.get(r.row, 2 if r.staircase_value else 0) for r in rows),
        fixed_cnot=sum(r.fixed_cnot for r in rows),
        staircase_cnot=sum(r.staircase_value for r in rows),
        ry=sum(r.ry for r in rows),
        emitted_cnot=sum(r.emitted_cnot for r in rows),
        emitted_ry=sum(r.emitted_ry for r in rows),
    )
    if circuit is not None:
        cc = cancel_adjacent(circuit).counts()
        rep.cancelled_cnot = cc["cnot"]
        rep.cancelled_single = cc["single_qubit"]
    return rep


# ---------------------------------------------------------------------------
# Wei-Norman product circuits
# ---------------------------------------------------------------------------


def interpolate_alphas(table, theta: float, kind: str = "cubic") -> np.ndarray:
    """Parameters at ``theta``; exact on grid points.

    Linear interpolation on a 0.005 grid is only good to a few 1e-6, so the
    default is a not-a-knot cubic spline (about 1e-10).
    """
    ts = np.asarray(table.thetas)
    if not (ts[0] - 1e-12 <= theta <= ts[-1] + 1e-12):
        raise ThetaOutOfRange(f"theta {theta} outside table range [{ts[0]}, {ts[-1]}]")
    a = np.asarray(table.alphas)
    hit = np.flatnonzero(np.abs(ts - theta) <= 1e-12)
    if len(hit):
        return a[hit[0]].copy()
    if kind == "linear" or len(ts) < 4:
        return np.array([np.interp(theta, ts, a[:, j]) for j in range(a.shape[1])])
    if kind != "cubic":
        raise ValueError(f"unknown interpolation {kind!r}")
    from scipy.interpolate import CubicSpline

    return CubicSpline(ts, a, axis=0)(theta)


def emit_product(elements: Sequence[GeneratorSpec], alphas: Sequence[float], ordering: Sequence[int],
                 width: int, layout: QubitLayout | None = None) -> Circuit:
    """Circuit for prod_i exp(alpha_i E_{ordering[i]}) (leftmost factor acts last)."""
    c = Circuit(width)
    for a, j in reversed(list(zip(alphas, ordering))):
        if abs(a) < SKIP_ALPHA:
            continue
        c.extend(emit_feb(elements[j], float(a), layout=layout, width=width).gates)
    return c


def emit_wn_circuit(table, basis, theta: float, layout: QubitLayout | None = None,
                    width: int | None = None, interpolation: str = "cubic") -> Circuit:
    alphas = interpolate_alphas(table, theta, interpolation)
    ordering = table.ordering or tuple(range(basis.dim))
    n = width or (layout.width if layout else basis.register_size())
    n += n % 2
    return emit_product(basis.elements, alphas, ordering, n, layout)


def table_row_specs(P: int = 0, Q: int = 1, R: int = 2, S: int = 3) -> list[GeneratorSpec]:
    from .fermion import table_row_spec

    return [table_row_spec(r, P, Q, R, S) for r in range(1, 12)]


__all__ = [
    "Circuit", "Control", "CountReport", "ElementCount", "FebPlan", "Gate", "QubitLayout",
    "circuit_matrix", "count_report", "cancel_adjacent", "decompose_mcry", "element_count",
    "emit_feb", "emit_feb_compact", "emit_product", "emit_qeb_double", "emit_wn_circuit",
    "feb_plan", "interpolate_alphas", "mcry", "qeb_matrix", "simulate", "strip_parity", "table_row_of",
]
