"""Command-line front end.

Exit codes: 0 ok, 2 closure cap, 3 singularity, 4 verification, 5 input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__

EXIT_OK, EXIT_CLOSURE, EXIT_SINGULAR, EXIT_VERIFY, EXIT_INPUT = 0, 2, 3, 4, 5
SA_FAMILIES = ("ppqr", "int0", "int1")
DEFAULT_INDICES = {"ppqr": (0, 1, 2), "int0": (0, 1, 2, 3), "int1": (0, 1, 2, 3)}


class InputError(ValueError):
    pass


def _meta(args: argparse.Namespace) -> str:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "qasm", "ansatz")}
    digest = hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()[:16]
    return f"spinwn {__version__} config={digest}"


def _range(text: str) -> tuple[float, float, int]:
    try:
        a, b, n = text.split(":")
        lo, hi, pts = float(a), float(b), int(n)
    except ValueError:
        raise InputError(f"--range expects a:b:n, got {text!r}") from None
    if pts < 2 or not hi > lo:
        raise InputError("--range needs b > a and n >= 2")
    return lo, hi, pts


def _ints(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}") from None


def _ordering(text: str | None, dim: int) -> tuple[int, ...] | None:
    o = _ints(text)
    if o is None:
        return None
    if sorted(o) != list(range(1, dim + 1)):
        raise InputError(f"--ordering must be a permutation of 1..{dim}")
    return tuple(i - 1 for i in o)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    print(text)


def _basis(family: str, indices):
    from .lie import family_basis

    if family not in DEFAULT_INDICES:
        raise InputError(f"--family must be one of {tuple(DEFAULT_INDICES)}")
    return family_basis(family, indices or DEFAULT_INDICES[family])


# ---------------------------------------------------------------------------
# closure
# ---------------------------------------------------------------------------


def cmd_closure(args) -> int:
    from .lie import ClosureCapExceeded, basis_to_json, structure_constants

    if args.family not in SA_FAMILIES:
        raise InputError(f"closure supports {SA_FAMILIES}")
    from .fermion import seed_generators
    from .lie import canonicalize, lie_closure

    try:
        seeds = seed_generators(args.family, _ints(args.indices))
        closed = lie_closure(seeds, cap=args.cap)
    except ClosureCapExceeded as exc:
        print(f"closure cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CLOSURE
    basis = canonicalize(closed, seed=seeds)
    payload = basis_to_json(basis, structure_constants(basis) if args.structure else None)
    payload["meta"] = _meta(args)
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(json.dumps({"family": args.family, "dim": basis.dim, "blocks": basis.block_sizes}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# decompose
# ---------------------------------------------------------------------------


def cmd_decompose(args) -> int:
    from . import wn
    from .fermion import build_generator

    lo, hi, pts = _range(args.range)
    indices = _ints(args.indices)
    basis = _basis(args.family, indices)
    gen = build_generator(args.family, indices or DEFAULT_INDICES[args.family])
    ordering = _ordering(args.ordering, basis.dim)
    thetas = np.linspace(lo, hi, pts)
    if args.method == "ode":
        system = wn.build_system(basis, None, gen, ordering)
        table = wn.integrate(system, hi, pts, lo)
    elif args.method == "closed-form":
        if args.family != "ppqr":
            raise InputError("closed-form parameters exist for ppqr only")
        table = _closed_form_table(basis, thetas)
    else:
        d = wn.generator_coordinates(basis, gen)
        table = wn.frobenius_fit(basis, d, thetas, ordering)
        system = wn.build_system(basis, None, gen, ordering)
        wn.fill_det(table, system)
    out = args.out or f"{args.family}_{args.method}.csv"
    table.to_csv(out, meta=_meta(args))
    diag = table.diagnostics()
    diag["out"] = out
    print(json.dumps(diag, default=float))
    if table.singular_theta is not None or len(table.thetas) < pts:
        print(f"singularity near theta = {table.singular_theta}; table truncated", file=sys.stderr)
        return EXIT_SINGULAR
    return EXIT_OK


def _closed_form_table(basis, thetas):
    from . import wn

    exprs = wn.tilde_basis(basis)
    rep = wn.BlockRealization(exprs)
    prop = wn.TargetPropagator(rep.combination(wn.tilde_generator_coords()))
    alphas = np.array([wn.closed_form_tilde(t) for t in thetas])
    order = tuple(range(5))
    resid = np.array([rep.distance(rep.product(a, order), prop(t)) for a, t in zip(alphas, thetas)])
    return wn.ParameterTable(thetas, alphas, np.full(len(thetas), np.nan), resid, "closed-form", order,
                             [f"tilde{i + 1}" for i in order])


# ---------------------------------------------------------------------------
# circuit
# ---------------------------------------------------------------------------


def _feb_spec(family: str, indices):
    from .fermion import table_row_spec

    row = int(family.rsplit("row", 1)[1])
    if indices is None:
        indices = (0, 3, 4, 7)
    if len(indices) != 4:
        raise InputError("--indices takes four spinorbitals P_up,Q_dn,R_up,S_dn")
    pu, qd, ru, sd = indices
    if pu % 2 or ru % 2 or qd % 2 == 0 or sd % 2 == 0:
        raise InputError("--indices must be (P up, Q down, R up, S down) spinorbitals")
    spatial = (pu // 2, qd // 2, ru // 2, sd // 2)
    if len(set(spatial)) != 4:
        raise InputError("--indices must lie on four distinct spatial orbitals")
    return table_row_spec(row, *spatial)


def cmd_circuit(args) -> int:
    from . import circuits as cg
    from . import wn
    from .fermion import build_generator
    from .fock import expm_antihermitian, to_matrix

    family = args.family
    theta = float(args.theta)
    indices = _ints(args.indices)
    if family.startswith("feb-row"):
        spec = _feb_spec(family, indices)
        width = max(spec.frm + spec.to + spec.check_x + spec.check_y) + 1
        width += width % 2
        circ = cg.emit_feb(spec, theta, width=width) if theta != 0.0 else cg.Circuit(width)
        report = cg.element_count(spec).to_json()
        gen_expr = spec.expr
    elif family in SA_FAMILIES:
        basis = _basis(family, indices)
        gen_expr = build_generator(family, indices or DEFAULT_INDICES[family])
        width = basis.register_size()
        width += width % 2
        if theta == 0.0:
            circ = cg.Circuit(width)
            table = None
        elif args.table:
            table = wn.ParameterTable.from_csv(args.table)
        else:
            pts = max(int(round(abs(theta) / 0.005)) + 1, 2)
            system = wn.build_system(basis, None, gen_expr)
            table = wn.integrate(system, max(theta, 0.0), pts, min(theta, 0.0), verify=False)
            if table.singular_theta is not None:
                print(f"singularity near theta = {table.singular_theta}", file=sys.stderr)
                return EXIT_SINGULAR
        if table is not None:
            circ = cg.emit_wn_circuit(table, basis, theta, width=width)
            zeros = [table.ordering[i] for i in wn.zero_trajectories(table)] if len(table.thetas) > 1 else []
        else:
            zeros = []
        report = cg.count_report(basis.elements, skip=zeros, circuit=circ if len(circ) else None).to_json()
    else:
        raise InputError(f"unknown circuit family {family!r}")
    counts = circ.counts()
    payload = {"meta": _meta(args), "family": family, "theta": theta, "width": circ.width,
               "counts": counts, "report": report, "circuit": circ.to_json()}
    if args.verify:
        if circ.width > 14:
            raise InputError("verification needs width <= 14")
        u = cg.circuit_matrix(circ)
        ref = expm_antihermitian(to_matrix(gen_expr, circ.width), theta)
        payload["residual"] = float(np.linalg.norm(u - ref))
    if args.qasm:
        Path(args.qasm).write_text(circ.to_qasm(), encoding="utf-8")
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
    summary = {k: payload[k] for k in ("family", "theta", "width")}
    summary.update(cnot=counts["cnot"], ry=counts["ry"], single_qubit=counts["single_qubit"], gates=len(circ))
    if "residual" in payload:
        summary["residual"] = payload["residual"]
    print(json.dumps(summary))
    if args.verify and payload["residual"] >= args.tol:
        print(f"verification failed: residual {payload['residual']:.3e} >= {args.tol:.1e}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_count(args) -> int:
    from . import circuits as cg

    if args.family.startswith("feb-row"):
        rep = cg.element_count(_feb_spec(args.family, _ints(args.indices))).to_json()
    else:
        basis = _basis(args.family, _ints(args.indices))
        skip = _ints(args.skip) or ()
        rep = cg.count_report(basis.elements, skip=[i - 1 for i in skip]).to_json()
    _emit(rep, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# scans and fits
# ---------------------------------------------------------------------------


def cmd_scan(args) -> int:
    from . import wn
    from .fermion import build_generator

    lo, hi, pts = _range(args.range)
    if lo != -hi:
        raise InputError("scan needs a range symmetric about zero")
    basis = _basis("ppqr", None)
    adj = wn.make_adjoint(basis)
    d = wn.generator_coordinates(basis, build_generator("ppqr", (0, 1, 2)))
    reports = wn.permutation_scan(basis, adj, d, hi, pts, workers=args.jobs)
    payload = {"meta": _meta(args), "summary": wn.scan_summary(reports),
               "orderings": [r.to_json() for r in reports]}
    _emit(payload["summary"], None)
    if args.out:
        wn.write_json(args.out, payload)
    return EXIT_OK


def cmd_trotter(args) -> int:
    from . import wn

    lo, hi, pts = _range(args.range)
    fit = wn.trotter_like_fit(np.linspace(lo, hi, pts), restarts=args.restarts, seed=args.seed)
    out = args.out or "trotter.csv"
    fit.to_csv(out, meta=_meta(args))
    ea, eb = wn.sum_constraint_error(fit)
    print(json.dumps({"max_residual": float(np.max(fit.residual)), "sum_a_error": ea, "sum_b_error": eb,
                      "out": out}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# adapt
# ---------------------------------------------------------------------------


def cmd_adapt(args) -> int:
    from . import vqe

    try:
        h = vqe.parse_fcidump(Path(args.fcidump))
    except vqe.FcidumpError as exc:
        print(f"FCIDUMP error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    irreps = h.irreps if args.symmetry else None
    kinds = args.kinds.split(",") if args.kinds else None
    pool = vqe.build_pool(args.pool, h.n_spatial, irreps, kinds)
    state = vqe.adapt_vqe(h, pool, max_params=args.max_params, grad_tol=args.grad_tol,
                          energy_tol=args.energy_tol)
    out = args.out or f"adapt_{args.pool}.csv"
    state.to_csv(out, meta=_meta(args))
    if args.ansatz:
        vqe.dump_ansatz(state, args.ansatz)
    print(json.dumps({"pool": args.pool, "pool_size": len(pool), "n_params": len(state.ansatz),
                      "energy": state.energy, "exact": state.exact_energy,
                      "error": state.energy - state.exact_energy,
                      "max_S2": max(abs(r.s2) for r in state.history), "stop": state.stop_reason, "out": out}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinwn", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"spinwn {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, family_default=None):
        sp.add_argument("--family", default=family_default, required=family_default is None)
        sp.add_argument("--indices")
        sp.add_argument("--out")
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("closure", help="Lie closure and canonical basis")
    common(c)
    c.add_argument("--cap", type=int, default=256)
    c.add_argument("--structure", action="store_true", help="include structure constants in the JSON")
    c.set_defaults(func=cmd_closure)

    d = sub.add_parser("decompose", help="Wei-Norman parameter table")
    common(d)
    d.add_argument("--method", choices=("ode", "closed-form", "fit"), default="ode")
    d.add_argument("--range", default="0:10:2001")
    d.add_argument("--ordering")
    d.set_defaults(func=cmd_decompose)

    ci = sub.add_parser("circuit", help="emit a gate-level circuit")
    common(ci, "ppqr")
    ci.add_argument("--theta", type=float, default=0.5)
    ci.add_argument("--table")
    ci.add_argument("--verify", action="store_true")
    ci.add_argument("--tol", type=float, default=1e-10)
    ci.add_argument("--qasm")
    ci.set_defaults(func=cmd_circuit)

    co = sub.add_parser("count", help="gate-count report")
    common(co)
    co.add_argument("--skip", help="1-based basis positions to leave out")
    co.set_defaults(func=cmd_count)

    s = sub.add_parser("scan", help="permutation scan of the 5-dim ordering")
    common(s, "ppqr")
    s.add_argument("--range", default="-100:100:20001")
    s.set_defaults(func=cmd_scan)

    t = sub.add_parser("trotter", help="six-exponential fit")
    common(t, "ppqr")
    t.add_argument("--range", default="0:10:201")
    t.add_argument("--restarts", type=int, default=20)
    t.set_defaults(func=cmd_trotter)

    a = sub.add_parser("adapt", help="ADAPT-VQE run")
    a.add_argument("--fcidump", required=True)
    a.add_argument("--pool", default="sagsd")
    a.add_argument("--kinds", help="override pool element kinds, e.g. pair,int0")
    a.add_argument("--symmetry", action="store_true", help="filter by ORBSYM labels")
    a.add_argument("--max-params", type=int)
    a.add_argument("--grad-tol", type=float, default=1e-6)
    a.add_argument("--energy-tol", type=float)
    a.add_argument("--ansatz")
    a.add_argument("--out")
    a.add_argument("--jobs", type=int, default=1)
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=cmd_adapt)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
