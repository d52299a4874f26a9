"""Command line front end.

Subcommands: classify, decide, build, tile, examples.  Every command can
emit a JSON run report with ``--json``.  Exit codes: 0 ok, 1 identity
failure, 2 parse error, 3 validation error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import cartan as ct
from . import corpus
from . import coxeter as cx
from . import decision as dc
from . import geometry as geo
from . import reflection as rf

EXIT_OK, EXIT_IDENTITY, EXIT_PARSE, EXIT_VALIDATION = 0, 1, 2, 3
DEFAULT_SEED = 20240


class ParseFailure(Exception):
    pass


class ValidationFailure(Exception):
    pass


def _clean(x):
    """Plain JSON-safe python values (nan -> None, inf -> "inf")."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


@dataclass
class RunReport:
    command: str
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    version: str = __version__
    tolerances: dict = field(default_factory=dict)
    elapsed: float = 0.0
    errors: list = field(default_factory=list)
    exit_code: int = 0

    def to_json(self) -> str:
        return json.dumps(_clean(asdict(self)), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls(**json.loads(text))


def _tolerances(args) -> dict:
    return {
        "tol_strict": getattr(args, "tol_strict", dc.TOL_STRICT),
        "zero_type_rtol": ct.ZERO_TYPE_RTOL,
        "product_tol": ct.PRODUCT_TOL,
        "rank_rtol": rf.RANK_RTOL,
        "involution_tol": rf.INVOLUTION_TOL,
        "relation_tol": rf.RELATION_TOL,
        "dedup_rtol": geo.DEDUP_RTOL,
    }


def _params(args) -> dict:
    return {k: getattr(args, k) for k in "xyzua" if getattr(args, k, None) is not None}


def _load_cox(source: str) -> cx.CoxeterMatrix:
    p = Path(source)
    try:
        if p.exists():
            return cx.parse_coxeter(p.read_text())
        if source in corpus.NAMES:
            return corpus.coxeter(source)
    except (cx.CoxeterError, ct.CartanError) as e:
        raise ParseFailure(f"{source}: {e}") from None
    raise ParseFailure(f"{source}: no such file or bundled example")


def _load_cartan(source: str) -> ct.CartanMatrix:
    p = Path(source)
    try:
        if p.exists():
            return ct.cartan_from_json(p.read_text(), p.parent)
        if source in corpus.NAMES:
            return corpus.cartan(source)
    except (cx.CoxeterError, ct.CartanError, OSError) as e:
        raise ParseFailure(f"{source}: {e}") from None
    raise ParseFailure(f"{source}: no such file or bundled example")


def _example_pair(name: str, params: dict, n=None):
    if name == "atilde":
        N = int(n or 3)
        A = ct.affine_atilde_cartan(N, params.get("a", 2.0))
        return A.coxeter, A
    if name not in corpus.NAMES:
        raise ParseFailure(f"unknown example {name!r}; choose from {', '.join(corpus.NAMES)}, atilde")
    kw = {k: v for k, v in params.items() if k != "a"}
    try:
        A = corpus.cartan(name, **kw)
    except ValueError as e:
        raise ValidationFailure(str(e)) from None
    return A.coxeter, A


def _pair_from_args(args):
    if args.example:
        return _example_pair(args.example, _params(args), getattr(args, "n", None))
    ins = args.inputs
    if len(ins) == 1:
        A = _load_cartan(ins[0])
        return A.coxeter, A
    if len(ins) == 2:
        W = _load_cox(ins[0])
        A = _load_cartan(ins[1])
        if A.coxeter != W:
            raise ValidationFailure("Cartan matrix file refers to a different Coxeter matrix")
        return W, A
    raise ParseFailure("expected COX CARTAN, a .cartan file, or --example NAME")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("COXCC_THREADS", "")))
    except ValueError:
        return max(1, min(4, os.cpu_count() or 1))


def _classify_payload(W: cx.CoxeterMatrix) -> dict:
    comps = cx.irreducible_components(W)
    groups = cx.classify(W)
    out = {
        "N": W.N,
        "irreducible": len(comps) == 1,
        "components": [{"vertices": list(cx.one_based(c.vertices)), "type": g.name, "kind": g.kind}
                       for c, g in zip(comps, groups)],
        "hyperbolic": cx.is_word_hyperbolic(W),
    }
    ic, pair = cx.condition_IC(W)
    out["IC"] = {"holds": ic, "witness": [list(cx.one_based(s)) for s in pair] if ic else None}
    at_ok, bad = cx.condition_Atilde(W)
    out["Atilde"] = {"holds": at_ok, "witness": None if at_ok else list(cx.one_based(bad))}
    if len(comps) == 1 and not groups[0].is_finite:
        out["exists"] = cx.admits_cc_reflection_rep(W)
        if groups[0].kind == "large" and out["exists"]:
            out["peripherals"] = [
                {"atilde": list(cx.one_based(s)), "commuting": list(cx.one_based(t)),
                 "type": cx.classify_subset(W, s).name}
                for s, t in cx.peripheral_subgroups(W)]
        else:
            out["peripherals"] = []
    else:
        out["exists"] = None
        out["peripherals"] = None
    return out


def cmd_classify(args, rep: RunReport):
    W = _load_cox(args.path)
    rep.inputs = {"path": args.path}
    out = _classify_payload(W)
    rep.outputs = out
    lines = [
        f"reducibility: {'irreducible' if out['irreducible'] else 'reducible'}",
        "components: " + ", ".join(f"{c['type']} on {c['vertices']}" for c in out["components"]),
        f"hyperbolic: {str(out['hyperbolic']).lower()}",
        f"(IC): {str(out['IC']['holds']).lower()}"
        + (f" witness {out['IC']['witness']}" if out["IC"]["holds"] else ""),
        f"(Ã): {str(out['Atilde']['holds']).lower()}"
        + ("" if out["Atilde"]["holds"] else f" witness {out['Atilde']['witness']}"),
    ]
    if out["exists"] is not None:
        lines.append(f"exists: {str(out['exists']).lower()}")
        lines.append("peripherals: " + (", ".join(
            f"{p['type']} {p['atilde']}" + (f" x {p['commuting']}" if p["commuting"] else "")
            for p in out["peripherals"]) or "none"))
    return lines


def _verdict_lines(v: dc.CCVerdict) -> list:
    lines = [f"exists: {str(v.exists_cc_rep).lower()}",
             f"cc: {str(v.cc).lower()}  scc: {str(v.scc).lower()}  anosov: {str(v.anosov).lower()}",
             f"reason: {v.reason}"]
    if v.routes:
        lines.append(f"routes: zt={v.routes['zt']} zd={v.routes['zd']} agree={v.routes['agree']}")
    for w in v.witnesses:
        d = w.to_dict()
        val = "" if w.value is None else f" value={w.value:.12g}"
        lines.append(f"witness {d['condition']} {d['subset']}{val}"
                     + (" (boundary)" if w.boundary else ""))
    return lines


def _sweep_point(job):
    name, params, n, tol = job
    try:
        W, A = _example_pair(name, params, n)
        v = dc.decide(W, A, tol)
        return {**params, "cc": v.cc, "scc": v.scc, "anosov": v.anosov,
                "det": float(np.linalg.det(A.entries)), "zt": v.routes.get("zt"),
                "zd": v.routes.get("zd"), "error": ""}
    except (ValueError, ParseFailure, ValidationFailure) as e:
        return {**params, "cc": None, "scc": None, "anosov": None, "det": None,
                "zt": None, "zd": None, "error": str(e)}


def _parse_sweep(text: str):
    try:
        var, rng = text.split("=", 1)
        lo, hi, step = (float(t) for t in rng.split(":"))
    except ValueError:
        raise ParseFailure(f"bad sweep {text!r}; expected VAR=START:STOP:STEP") from None
    if var not in "xyzua" or len(var) != 1 or step <= 0 or hi < lo:
        raise ParseFailure(f"bad sweep {text!r}")
    k = int(math.floor((hi - lo) / step + 1e-9))
    return var, [round(lo + i * step, 12) for i in range(k + 1)]


def cmd_decide(args, rep: RunReport):
    if args.sweep:
        if not args.example:
            raise ParseFailure("--sweep needs --example")
        var, values = _parse_sweep(args.sweep)
        base = _params(args)
        jobs = [(args.example, {**base, var: x}, args.n, args.tol_strict) for x in values]
        threads = min(_threads(), len(jobs))
        if threads > 1:
            with ProcessPoolExecutor(threads) as ex:
                rows = list(ex.map(_sweep_point, jobs))
        else:
            rows = [_sweep_point(j) for j in jobs]
        rep.inputs = {"example": args.example, "params": base, "sweep": args.sweep}
        rep.outputs = {"rows": rows}
        if args.out:
            with open(args.out, "w", newline="") as fh:
                wr = csv.DictWriter(fh, fieldnames=list(rows[0]))
                wr.writeheader()
                wr.writerows(rows)
            rep.outputs["csv"] = args.out
        return [", ".join(f"{k}={r[k]}" for k in r if r[k] not in ("", None)) for r in rows]
    W, A = _pair_from_args(args)
    rep.inputs = {"paths": args.inputs, "example": args.example, "params": _params(args)}
    bad = ct.validate(A, W, "full")
    if bad:
        rep.outputs = {"violations": [{"clause": b.clause, "pair": [b.i + 1, b.j + 1],
                                       "detail": b.detail} for b in bad]}
        raise ValidationFailure("incompatible Cartan matrix: "
                                + "; ".join(f"{b.clause} at ({b.i + 1},{b.j + 1})" for b in bad))
    v = dc.decide(W, A, args.tol_strict)
    rep.outputs = v.to_dict()
    return _verdict_lines(v)


def _parse_deformed(text: str, W: cx.CoxeterMatrix) -> dict:
    lam = {}
    if not text:
        return {(i, j): 0.0 for i, j, m in W.edges() if m == cx.INF}
    for part in text.split(","):
        try:
            pair, val = part.split("=")
            i, j = (int(t) - 1 for t in pair.split("-"))
            lam[(i, j)] = float(val)
        except ValueError:
            raise ParseFailure(f"bad lambda entry {part!r}; expected I-J=VALUE") from None
    return lam


def cmd_build(args, rep: RunReport):
    flavor, _, extra = args.flavor.partition(":")
    rep.inputs = {"path": args.path, "flavor": args.flavor, "n": args.n, "params": _params(args)}
    zig = None
    if flavor == "atilde":
        a = float(extra) if extra else (args.a if args.a is not None else 2.0)
        N = args.n or (_load_cox(args.path).N if args.path else 3)
        r, zig = rf.atilde_model(N, a)
        A = r.cartan
    else:
        if not args.path:
            raise ParseFailure("build needs a .cox path or bundled example name")
        W = _load_cox(args.path)
        if flavor == "tits":
            A = ct.tits_cartan(W)
        elif flavor == "deformed":
            A = ct.deformed_tits_cartan(W, _parse_deformed(extra, W))
        elif flavor == "generic":
            A = ct.generic_cc_cartan(W)
        else:
            raise ParseFailure(f"unknown flavor {flavor!r}")
        r = rf.build_rep(A, args.n)
    report = rf.verify_rep(r, A.coxeter, A)
    outs = {"cartan": A.entries, "n": r.n, "verify": report.to_dict()}
    lines = [f"built {flavor} rep: N={r.N} n={r.n}", f"verify: {'pass' if report.passed else 'FAIL'}"]
    if zig is not None:
        want = np.eye(r.N)
        want[0, 0], want[-1, -1] = 1.0 / a, a
        err = float(np.abs(zig - want).max())
        outs["zigzag_error"] = err
        outs["zigzag_ok"] = err <= 1e-9
        lines.append(f"zigzag Diag(1/a,1,...,1,a): {'pass' if err <= 1e-9 else 'FAIL'} (error {err:.1e}, tol 1e-9)")
    if args.out:
        base = Path(args.out)
        cpath = base.with_suffix(".cartan")
        rpath = base.with_suffix(".rep.json")
        cpath.write_text(ct.cartan_to_json(A) + "\n")
        rpath.write_text(rf.rep_to_json(r) + "\n")
        outs["files"] = [str(cpath), str(rpath)]
        lines.append(f"wrote {cpath} and {rpath}")
    rep.outputs = outs
    if not report.passed:
        raise ValidationFailure("representation failed verification")
    return lines


def cmd_tile(args, rep: RunReport):
    params = _params(args)
    if args.example == "atilde":
        r, _ = rf.atilde_model(int(args.n or 3), params.get("a", 2.0))
        W, A = r.cartan.coxeter, r.cartan
    else:
        W, A = _pair_from_args(args)
        r = rf.build_rep(A)
    if r.n != 3:
        raise ValidationFailure(f"unsupported dimension n={r.n}; tiling needs n = 3")
    rep.inputs = {"paths": args.inputs, "example": args.example, "params": params,
                  "depth": args.depth, "seed": args.seed}
    T = geo.orbit(r, args.depth)
    out = args.out or "tiling.svg"
    geo.render_svg(T, out)
    outs = {"tiles": len(T), "svg": out, "dedup_warnings": len(T.warnings)}
    lines = [f"tiles: {len(T)} (depth {args.depth})", f"wrote {out}"]
    try:
        sb = geo.sigma_boundary_test(W, A)
        outs["sigma_in_interior"] = not sb.touches_boundary
        outs["sigma_boundary"] = sb.to_dict()
        lines.append(f"Σ ⊂ interior: {str(not sb.touches_boundary).lower()}")
    except geo.GeometryError as e:
        outs["sigma_in_interior"] = None
        lines.append(f"Σ-boundary test skipped: {e}")
    if args.dump:
        Path(args.dump).write_text(T.to_jsonl())
        outs["dump"] = args.dump
    rep.outputs = outs
    return lines


def identity_checks(seed: int = DEFAULT_SEED, count: int = 20) -> list:
    """Run the bundled identities.  Returns ``(name, ok, detail)`` rows."""
    rng = np.random.default_rng(seed)
    rows = []

    def add(name, err, tol):
        rows.append((name, bool(err <= tol), f"max error {err:.2e} (tol {tol:.0e})"))

    pts = rng.uniform(1, 3, size=(count, 4))
    add("ex91 det = 32(xu+xz+yu-x-y-z-u+1)",
        max(abs(np.linalg.det(corpus.ex91_cartan(*p).entries) - corpus.ex91_det(*p)) for p in pts), 1e-8)
    add("ex91 (2,4)-minor = 16",
        max(abs(corpus.minor(corpus.ex91_cartan(*p).entries, 2, 4) - 16) for p in pts), 1e-9)
    pts = np.column_stack([rng.uniform(0.3, 3, count), rng.uniform(1, 3, count)])
    add("ex92 det = 32y^2 - 9(x+1/x) - 14",
        max(abs(np.linalg.det(corpus.ex92_cartan(*p).entries) - corpus.ex92_det(*p)) for p in pts), 1e-8)
    add("ex92 (1,1)-minor = -4(2y^2+1)",
        max(abs(corpus.minor(corpus.ex92_cartan(*p).entries, 1, 1) - corpus.ex92_minor11(p[1]))
            for p in pts), 1e-8)
    pts = rng.uniform(0.3, 3, size=(count, 2))
    add("ex93 det identity",
        max(abs(np.linalg.det(corpus.ex93_cartan(*p).entries) - corpus.ex93_det(*p)) for p in pts), 1e-8)

    def verdict(name, ok):
        rows.append((name, bool(ok), "verdict"))

    v = dc.decide(corpus.coxeter("ex92"), corpus.ex92_cartan(1, 1))
    verdict("ex92 at (1,1): cc=false, witness (4,5)",
            not v.cc and any(w.subset == (3, 4) for w in v.witnesses))
    x = 2.0
    v = dc.decide(corpus.coxeter("ex92"), corpus.ex92_cartan(x, corpus.ex92_curve_y(x)))
    verdict("ex92 on-curve x=2: cc=scc=anosov=true", v.cc and v.scc and v.anosov)
    v = dc.decide(corpus.coxeter("ex93"), corpus.ex93_cartan(1, 1))
    verdict("ex93 at x=1: cc=false, witness triangle",
            not v.cc and any(w.subset == (0, 1, 2) for w in v.witnesses))
    v = dc.decide(corpus.coxeter("ex93"), corpus.ex93_cartan(2, 1))
    verdict("ex93 at x=2: cc=true", v.cc)
    v = dc.decide(corpus.coxeter("ex91"), corpus.ex91_cartan(1, 1, 1, 1))
    verdict("ex91: exists=false with (IC) witness",
            not v.exists_cc_rep and v.witnesses and v.witnesses[0].condition == "IC")
    pd = rf.n2_proximal(corpus.cartan("ex31"))
    lp, lm = pd.eigenvalues
    err = max(abs(lp - (2 + math.sqrt(3))), abs(lm - (2 - math.sqrt(3))),
              float(np.abs(pd.matrix - np.array([[5, -3], [2, -1]])).max()))
    add("ex31 proximal eigenvalues 2 ± sqrt(3)", err, 1e-9)
    err = 0.0
    for N in (3, 4, 5):
        r, z = rf.atilde_model(N, 2.0)
        want = np.eye(N)
        want[0, 0], want[-1, -1] = 0.5, 2.0
        err = max(err, float(np.abs(z - want).max()))
    add("zigzag Diag(1/a,1,...,1,a) at a=2", err, 1e-9)
    return rows


def cmd_examples(args, rep: RunReport):
    rows = identity_checks(args.seed)
    rep.inputs = {"seed": args.seed}
    rep.outputs = {"checks": [{"name": n, "pass": ok, "detail": d} for n, ok, d in rows]}
    lines = [f"{'PASS' if ok else 'FAIL'}  {n}  [{d}]" for n, ok, d in rows]
    failed = sum(not ok for _, ok, _ in rows)
    lines.append(f"{len(rows) - failed}/{len(rows)} checks passed")
    if failed:
        rep.exit_code = EXIT_IDENTITY
    return lines


def _add_params(p):
    for k in "xyzu":
        p.add_argument(f"--{k}", type=float, help=f"template parameter {k}")
    p.add_argument("--a", type=float, help="A~ corner parameter")
    p.add_argument("--example", help="bundled example name (ex31, ex91, ex92, ex93, fig5, atilde)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coxcc", description="Convex cocompactness for reflection groups.")
    ap.add_argument("--version", action="version", version=f"coxcc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="print the run report as JSON")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--tol-strict", type=float, default=dc.TOL_STRICT, dest="tol_strict")

    p = sub.add_parser("classify", help="classify a Coxeter diagram")
    p.add_argument("path")
    common(p)

    p = sub.add_parser("decide", help="convex cocompactness verdict")
    p.add_argument("inputs", nargs="*", help="COX CARTAN, or a single .cartan file")
    _add_params(p)
    p.add_argument("--n", type=int, help="rank for the atilde example")
    p.add_argument("--sweep", help="VAR=START:STOP:STEP over a template parameter")
    p.add_argument("--out", help="CSV file for sweep rows")
    common(p)

    p = sub.add_parser("build", help="construct a Cartan matrix and representation")
    p.add_argument("path", nargs="?")
    p.add_argument("--flavor", required=True, help="tits, deformed[:I-J=L,...], generic, atilde[:a]")
    p.add_argument("--n", type=int, help="representation dimension")
    p.add_argument("--out", help="output prefix for .cartan and .rep.json")
    _add_params(p)
    common(p)

    p = sub.add_parser("tile", help="render the orbit tiling as SVG")
    p.add_argument("inputs", nargs="*")
    _add_params(p)
    p.add_argument("--n", type=int)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--out", help="SVG path (default tiling.svg)")
    p.add_argument("--dump", help="write orbit elements as JSON lines")
    common(p)

    p = sub.add_parser("examples", help="check the bundled identities and verdicts")
    common(p)
    return ap


COMMANDS = {"classify": cmd_classify, "decide": cmd_decide, "build": cmd_build,
            "tile": cmd_tile, "examples": cmd_examples}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    rep = RunReport(args.command, tolerances=_tolerances(args))
    t0 = time.perf_counter()
    lines = []
    try:
        lines = COMMANDS[args.command](args, rep) or []
    except ParseFailure as e:
        rep.errors.append(f"parse error: {e}")
        rep.exit_code = EXIT_PARSE
    except json.JSONDecodeError as e:
        rep.errors.append(f"parse error: {e}")
        rep.exit_code = EXIT_PARSE
    except ValidationFailure as e:
        rep.errors.append(f"validation error: {e}")
        rep.exit_code = EXIT_VALIDATION
    except (cx.CoxeterError, dc.DecisionError, ct.CartanError, rf.RepError, geo.GeometryError) as e:
        rep.errors.append(f"validation error: {e}")
        rep.exit_code = EXIT_VALIDATION
    rep.elapsed = time.perf_counter() - t0
    if args.json:
        print(rep.to_json())
    else:
        for ln in lines:
            print(ln)
        for e in rep.errors:
            print(e, file=sys.stderr)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
