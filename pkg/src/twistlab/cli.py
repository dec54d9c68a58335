"""Command line front-end: ``twistlab <command> [options]``.

Exit status: 0 success, 2 when a certified inequality is violated, 1 on
input or configuration errors. Spec arguments (--space, --couple,
--centralizer) accept inline JSON, a file path, or the name of a bundled
example in ``twistlab/specs``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources

import numpy as np

from . import centralizers as C
from . import derived as D
from . import indicators as I
from .errors import TwistlabError
from .factorization import couple_from_json, factorize
from .spaces import norm, space_from_json
from .sparse import SparseVector, parse_vector

CONVENTION = "Omega_theta = x log(a1/a0) for the couple (X0, X1) in the given order"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load(text: str):
    """Inline JSON, a path, or a bundled spec name."""
    s = text.strip()
    if s[:1] in "{[":
        return json.loads(s)
    if os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            return json.load(fh)
    try:
        bundled = resources.files("twistlab") / "specs" / os.path.basename(text)
        if bundled.is_file():
            return json.loads(bundled.read_text(encoding="utf-8"))
    except (ModuleNotFoundError, FileNotFoundError):
        pass
    raise TwistlabError(f"cannot find spec {text!r}")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TWISTLAB_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    """Map in a thread pool; results keep the input order."""
    items = list(items)
    n = min(_threads(), len(items)) or 1
    if n == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _num(v) -> str:
    if isinstance(v, complex):
        return json.dumps([v.real, v.imag])
    return format(float(v), ".17g")


def _emit(args, payload, text=None):
    if args.format == "json" or text is None:
        out = json.dumps(payload, sort_keys=True, default=_jsonable)
    else:
        out = text.rstrip("\n")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out + "\n")
    else:
        print(out)


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, SparseVector):
        return v.to_json(dense=False)
    raise TypeError(f"not serializable: {type(v)}")


def _csv(columns, rows):
    lines = [",".join(columns)]
    for r in rows:
        lines.append(",".join("" if r.get(c) is None else (
            _num(r[c]) if isinstance(r[c], (float, int, complex)) and not isinstance(r[c], bool)
            else str(r[c])) for c in columns))
    return "\n".join(lines)


# subcommands ---------------------------------------------------------------

def cmd_norm(args):
    space = space_from_json(_load(args.space))
    x = parse_vector(args.vec)
    v = norm(space, x)
    _emit(args, {"space": space.to_json(), "norm": v}, _num(v))
    return 0


def cmd_factorize(args):
    c = couple_from_json(_load(args.couple))
    if args.theta is not None:
        c = c.at(args.theta[0])
    f = factorize(c, parse_vector(args.vec), args.tol, args.budget or 2000)
    payload = dict(f.to_json(), convention=CONVENTION)
    text = _csv(("index", "a0", "a1"), [
        {"index": int(i), "a0": float(a), "a1": float(b)}
        for i, a, b in zip(f.a0.idx, f.a0.val, f.a1.val)])
    text += f"\n# objective={_num(f.objective)} ratio={_num(f.optimality_ratio)} certified={f.certified}"
    _emit(args, payload, text)
    return 0


def cmd_centralizer(args):
    spec = C.centralizer_from_json(_load(args.centralizer[0]))
    om = C.apply(spec, parse_vector(args.vec))
    payload = {"centralizer": spec.to_json(), "omega": om.to_json(dense=False),
               "convention": CONVENTION}
    _emit(args, payload, json.dumps(om.to_json(dense=False), sort_keys=True))
    return 0


def cmd_rho(args):
    spec = C.centralizer_from_json(_load(args.centralizer[0]))
    space = space_from_json(_load(args.space)) if args.space else None
    v = C.rho_lower(spec, space, n_samples=args.budget or 100, seed=args.seed)
    _emit(args, {"rho_lower": v, "samples": args.budget or 100, "seed": args.seed}, _num(v))
    return 0


def cmd_gap(args):
    if not args.centralizer or len(args.centralizer) != 2:
        raise TwistlabError("gap needs --centralizer twice")
    s1, s2 = (C.centralizer_from_json(_load(t)) for t in args.centralizer)
    space = space_from_json(_load(args.space)) if args.space else None
    dims = _dims(args)
    rng_seed = args.seed

    def one(n):
        rng = np.random.default_rng([rng_seed, n])
        samples = [SparseVector.indicator(1, n)] + [
            C.random_vector(rng, n, s1.is_complex or s2.is_complex) for _ in range(args.budget or 4)]
        return {"n": n, "value": C.equivalence_gap(s1, s2, space, samples)}

    rows = _pmap(one, dims)
    _emit(args, {"rows": rows, "seed": args.seed}, _csv(("n", "value"), rows))
    return 0


def _dims(args):
    n = args.n or 8
    if args.n_max:
        out, k = [], n
        while k <= args.n_max:
            out.append(k)
            k *= 2
        return out
    return [n]


def cmd_indicator(args):
    space = space_from_json(_load(args.space))
    budget = args.budget or 16

    def one(n):
        if args.cls == "basis":
            return {"n": n, "value": I.lambda_indicator(space, n), "closed_form": None,
                    "method": "exact"}
        fn = I.m_indicator if args.cls == "disjoint" else I.a_indicator
        r = fn(space, n, budget, args.seed)
        return {"n": n, "value": r.lower, "closed_form": r.closed_form, "method": r.method}

    rows = _pmap(one, _dims(args))
    _emit(args, {"class": args.cls, "space": space.to_json(), "rows": rows},
          _csv(("n", "value", "closed_form", "method"), rows))
    return 0


def cmd_verify_core(args):
    c = couple_from_json(_load(args.couple))
    n = args.n or 8
    if args.family == "canonical_n":
        tuples = [(0, I.canonical_tuple(n))]
    else:
        seeds = range(args.seed, args.seed + (args.budget or 20))
        tuples = [(s, I.random_disjoint_tuple(np.random.default_rng(s), c, n, tol=args.tol))
                  for s in seeds]

    def one(item):
        s, fam = item
        r = I.core_estimate_residual(c, fam, args.tol)
        return {"n": n, "seed": s, "value": r.lhs, "bound": r.bound, "margin": r.margin,
                "method": "advisory" if r.advisory else "closed_form",
                "status": "PASS" if r.ok else "FAIL"}

    rows = sorted(_pmap(one, tuples), key=lambda r: (r["n"], r["seed"]))
    ok = all(r["status"] == "PASS" for r in rows)
    text = _csv(("n", "seed", "value", "bound", "margin", "method", "status"), rows)
    _emit(args, {"rows": rows, "ok": ok, "couple": c.to_json()}, text + ("\nPASS" if ok else "\nFAIL"))
    return 0 if ok else 2


def cmd_verify_logconvex(args):
    c = couple_from_json(_load(args.couple))
    thetas = args.theta or [0.25, 0.5, 0.75]
    n_max = args.n_max or args.n or 16
    ns = [k for k in (1, 2, 4, 8, 16, 32, 64, 128) if k <= n_max]
    rep = I.logconvexity_check(c, ns, thetas, args.budget or 6, args.seed, args.tol)
    _emit(args, rep.to_json(), rep.to_csv() + ("PASS" if rep.ok else "FAIL"))
    return 0 if rep.ok else 2


def cmd_verify_kernel(args):
    c = couple_from_json(_load(args.couple))
    thetas = args.theta or [c.theta]

    def one(item):
        th, s = item
        g = D.random_witness(np.random.default_rng(s), c.at(th), vanish=True)
        r = D.kernel_derivative_check(g, tol=args.tol)
        return {"theta": th, "seed": s, "value": r.lhs, "bound": r.bound, "margin": r.margin,
                "status": "PASS" if r.ok else "FAIL"}

    items = [(th, s) for th in thetas for s in range(args.seed, args.seed + (args.budget or 20))]
    rows = sorted(_pmap(one, items), key=lambda r: (r["theta"], r["seed"]))
    ok = all(r["status"] == "PASS" for r in rows)
    _emit(args, {"rows": rows, "ok": ok},
          _csv(("theta", "seed", "value", "bound", "margin", "status"), rows) + ("\nPASS" if ok else "\nFAIL"))
    return 0 if ok else 2


def cmd_tower(args):
    c = couple_from_json(_load(args.couple))
    m = args.n or 3
    rows = []
    for s in range(args.seed, args.seed + (args.budget or 10)):
        g = D.random_witness(np.random.default_rng(s), c)
        t = D.taylor_tuple(g, None, m)
        ident = D.rochberg_project(t, m).allclose(t, 0, 0)
        kernel_ok = True
        for n in range(1, m):
            e = D.rochberg_embed(D.rochberg_project(t, n), m)
            kernel_ok &= D.rochberg_project(e, m - n).is_zero()
        fd = D.finite_difference_tuple(g, m)
        err = max(float(np.max(np.abs(a.val - b.val)) / max(1e-300, float(np.max(np.abs(b.val)))))
                  for a, b in zip(t.coeffs, fd.coeffs) if b.nnz)
        ok = ident and kernel_ok and err <= 1e-5
        rows.append({"seed": s, "order": m, "identity": ident, "kernel": kernel_ok,
                     "taylor_error": err, "status": "PASS" if ok else "FAIL"})
    ok = all(r["status"] == "PASS" for r in rows)
    _emit(args, {"rows": rows, "ok": ok},
          _csv(("seed", "order", "identity", "kernel", "taylor_error", "status"), rows)
          + ("\nPASS" if ok else "\nFAIL"))
    return 0 if ok else 2


COMMANDS = {
    "norm": cmd_norm,
    "factorize": cmd_factorize,
    "centralizer": cmd_centralizer,
    "rho": cmd_rho,
    "gap": cmd_gap,
    "indicator": cmd_indicator,
    "verify-core": cmd_verify_core,
    "verify-logconvex": cmd_verify_logconvex,
    "verify-kernel": cmd_verify_kernel,
    "tower": cmd_tower,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="twistlab", description="Interpolation centralizers and twisted sums")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--space")
    p.add_argument("--couple")
    p.add_argument("--centralizer", action="append")
    p.add_argument("--vec")
    p.add_argument("--theta", type=float, action="append")
    p.add_argument("--n", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--family", choices=("canonical_n", "random"), default="canonical_n")
    p.add_argument("--class", dest="cls", choices=("disjoint", "schreier", "basis"),
                   default="disjoint")
    return p


_REQUIRED = {
    "norm": ("space", "vec"), "factorize": ("couple", "vec"),
    "centralizer": ("centralizer", "vec"), "rho": ("centralizer",),
    "gap": ("centralizer",), "indicator": ("space",), "verify-core": ("couple",),
    "verify-logconvex": ("couple",), "verify-kernel": ("couple",), "tower": ("couple",),
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format == "csv":
        args.format = "text"  # tables are CSV in text mode
    missing = [f"--{k}" for k in _REQUIRED[args.command] if getattr(args, k) in (None, [])]
    if missing:
        print(f"twistlab: error: {args.command} needs {', '.join(missing)}", file=sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](args)
    except (TwistlabError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"twistlab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
