"""Command-line entry point.

Arguments naming a valuation, a random variable, a CDF and so on may be a
path to a file holding the text, or the text itself.  Output is plain text,
or one JSON object per line with ``--json``.  Usage errors exit with 2 and
domain errors with 1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional, Sequence

from .domain import Domain, FinitePoset, IntervalUnit, parse_domain
from .dyadic import Dyadic, DyInterval
from .errors import DomprobError, ParseError
from .sample_space import parse_kind

PRECISION_ENV = "DOMPROB_PRECISION"


def _text(arg: str) -> str:
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            return fh.read()
    return arg


def _lines(arg: str) -> List[str]:
    out = []
    for line in _text(arg).splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def _gens(D: Domain, text: Optional[str]) -> list:
    if not text:
        return []
    return [D.parse_elem(t.strip()) for t in text.split(";") if t.strip()]


class Out:
    def __init__(self, as_json: bool):
        self.as_json = as_json

    def emit(self, text: str, **obj) -> None:
        if self.as_json:
            print(json.dumps(obj, sort_keys=True))
        else:
            print(text)


def _bool(b: bool) -> str:
    return "true" if b else "false"


# ---------------------------------------------------------------------------
# val


def _valuation(D: Domain, arg: str):
    from .valuation import SimpleValuation

    return SimpleValuation.parse(D, " ".join(_lines(arg)))


def _flow_rows(flow, a, b) -> List[dict]:
    D = a.domain
    return [
        {"from": D.format_elem(a.atoms[i][1]), "to": D.format_elem(b.atoms[j][1]), "mass": str(t)}
        for (i, j), t in sorted(flow.entries.items())
    ]


def cmd_val(args, out: Out) -> None:
    from .valuation import bayes_bounds, mass_on_open, val_leq, val_way_below, val_way_below_subset_test

    D = parse_domain(args.domain)
    if args.action in ("leq", "wb"):
        a, b = _valuation(D, args.inputs[0]), _valuation(D, args.inputs[1])
        ok, flow = (val_leq if args.action == "leq" else val_way_below)(a, b)
        rows = _flow_rows(flow, a, b) if ok else []
        extra = {}
        if args.action == "wb":
            extra["subset_test"] = val_way_below_subset_test(a, b)
        lines = [_bool(ok)] + [f"{r['from']} -> {r['to']}: {r['mass']}" for r in rows]
        out.emit("\n".join(lines), result=ok, flow=rows, **extra)
    elif args.action == "mass":
        a = _valuation(D, args.inputs[0])
        m = mass_on_open(a, _gens(D, args.open))
        out.emit(str(m), mass=str(m))
    elif args.action == "bayes":
        chain = [_valuation(D, line) for line in _lines(args.inputs[0])]
        res = bayes_bounds(
            chain,
            _gens(D, args.u),
            _gens(D, args.v),
            _gens(D, args.v_ext),
            _gens(D, args.uv_ext) if args.uv_ext else None,
            precision=args.precision,
        )
        for k, iv in enumerate(res):
            out.emit(f"{k}: {iv}", stage=k, bounds=str(iv))


# ---------------------------------------------------------------------------
# rv


def _rv(arg: str):
    from .randvar import StepRV

    return StepRV.from_json(_text(arg))


def cmd_rv(args, out: Out) -> None:
    from . import randvar as R

    if args.action == "t":
        a = R.rv_T(_rv(args.inputs[0]))
        out.emit(a.sorted_format(), valuation=a.sorted_format())
    elif args.action == "equiv":
        ok = R.rv_equiv(_rv(args.inputs[0]), _rv(args.inputs[1]))
        out.emit(_bool(ok), result=ok)
    elif args.action == "refine":
        r = _rv(args.inputs[0])
        r2 = R.rv_refine_up(r, _valuation(r.codomain, args.inputs[1]))
        out.emit(r2.to_json(), rv=json.loads(r2.to_json()))
    elif args.action == "restrict":
        r = _rv(args.inputs[0])
        alpha = _valuation(r.codomain, args.inputs[1])
        r1, flow = R.rv_restrict_down(r, alpha)
        rows = _flow_rows(flow, alpha, R.rv_T(r))
        out.emit(
            "\n".join([r1.to_json()] + [f"{x['from']} -> {x['to']}: {x['mass']}" for x in rows]),
            rv=json.loads(r1.to_json()),
            flow=rows,
        )
    elif args.action == "chain":
        D = parse_domain(args.domain)
        chain = [_valuation(D, line) for line in _lines(args.inputs[0])]
        for r in R.rv_chain_from_valuations(chain, parse_kind(args.space)):
            out.emit(r.to_json(), rv=json.loads(r.to_json()))
    elif args.action == "approx":
        r = R.rv_approx_degree(_rv(args.inputs[0]), args.n)
        out.emit(r.to_json(), rv=json.loads(r.to_json()))
    elif args.action == "member":
        r = _rv(args.inputs[0])
        ok = R.rv_member_q_open(r, Dyadic.parse(args.q), _gens(r.codomain, args.open))
        out.emit(_bool(ok), result=ok)
    elif args.action == "witness":
        sigma = R.rv_equiv_witness(_rv(args.inputs[0]), _rv(args.inputs[1]))
        out.emit(" ".join(map(str, sigma)), witness=sigma)


# ---------------------------------------------------------------------------
# pair


def hilbert_check(depth: int) -> List[str]:
    """Nesting, adjacency of consecutive cells and exact tiling at ``depth``."""
    from .pairing import cells_adjacent, hilbert_cell

    problems = []
    words = [""]
    for _ in range(depth):
        words = [w + c for w in words for c in "0123"]
    cells = [hilbert_cell(w) for w in words]
    side = Dyadic(1, depth)
    seen = set()
    for w, (x, y) in zip(words, cells):
        if x.width() != side or y.width() != side:
            problems.append(f"{w}: wrong side")
        px, py = hilbert_cell(w[:-1]) if w else (x, y)
        if not (px.contains(x) and py.contains(y)):
            problems.append(f"{w}: not inside its parent")
        seen.add((x.lo, y.lo))
    if len(seen) != len(cells):
        problems.append("cells overlap")
    for k in range(len(cells) - 1):
        if not cells_adjacent(cells[k], cells[k + 1]):
            problems.append(f"{words[k]} and {words[k + 1]} are not adjacent")
    return problems


def cmd_pair(args, out: Out) -> None:
    from .pairing import deinterleave, hilbert_cell, interleave

    if args.action == "interleave":
        if len(args.inputs) == 1:
            x, y = deinterleave(args.inputs[0])
            out.emit(f"{x} {y}", h1=x, h2=y)
        else:
            w = interleave(args.inputs[0], args.inputs[1])
            out.emit(w, word=w)
    elif args.action == "hilbert-cell":
        x, y = hilbert_cell(args.inputs[0] if args.inputs else "")
        out.emit(f"{x} x {y}", x=str(x), y=str(y))
    elif args.action == "hilbert-check":
        total = 4 ** args.depth
        problems = hilbert_check(args.depth)
        good = total - len({p.split(":")[0] for p in problems if ":" in p})
        if problems:
            out.emit("\n".join([f"fail: {good}/{total} cells"] + problems), ok=False, problems=problems)
            raise DomprobError("Hilbert cell check failed")
        out.emit(f"ok: {total}/{total} cells", ok=True, cells=total)


# ---------------------------------------------------------------------------
# monad


def _nested(obj):
    from .monad import NestedRV
    from .randvar import StepRV

    if "depth" in obj and obj["cells"] and isinstance(obj["cells"][0], dict):
        inner = [_nested(c) for c in obj["cells"]]
        return NestedRV(parse_kind(obj["space"]), int(obj["depth"]), tuple(inner))
    return StepRV.from_json(obj)


def cmd_monad(args, out: Out) -> None:
    from .monad import check_laws, mu

    if args.action == "mu":
        rr = _nested(json.loads(_text(args.inputs[0])))
        r = mu(rr, args.depth)
        out.emit(r.to_json(), rv=json.loads(r.to_json()))
    elif args.action == "laws":
        D = parse_domain(args.domain)
        if isinstance(D, FinitePoset):
            pool = list(D.elements)
        elif isinstance(D, IntervalUnit):
            pool = D.basis(2)
        else:
            raise DomprobError("law checks need a poset or the unit interval domain")
        rep = check_laws(args.samples, parse_kind(args.space), D, pool, args.seed)
        n = rep["samples"]
        text = f"unit_left {rep['unit_left']}/{n}\nunit_right {rep['unit_right']}/{n}\nassoc {rep['assoc']}/{n}"
        out.emit(text, **{k: rep[k] for k in ("samples", "unit_left", "unit_right", "assoc")})
        if rep["failures"]:
            raise DomprobError(f"law failures: {rep['failures'][:5]}")


# ---------------------------------------------------------------------------
# expect


def _functional(D: Domain, arg: str):
    from .expectation import StepFunctional

    pieces = []
    for line in _lines(arg):
        if ":" not in line:
            raise ParseError(f"functional piece must be 'elem : [a,b]': {line!r}")
        b, v = line.rsplit(":", 1)
        pieces.append((D.parse_elem(b.strip()), DyInterval.parse(v.strip())))
    return StepFunctional(D, pieces)


def cmd_expect(args, out: Out) -> None:
    from .expectation import expect_detailed, fubini, monte_carlo

    if args.action == "run":
        r = _rv(args.inputs[0])
        e = expect_detailed(r, _functional(r.codomain, args.inputs[1]))
        out.emit(str(e), interval=str(e.interval), unbounded=e.unbounded)
    elif args.action == "mc":
        r = _rv(args.inputs[0])
        g = _functional(r.codomain, args.inputs[1])
        picks = {}
        for line in _lines(args.inputs[2]):
            d, q = line.rsplit(":", 1)
            picks[r.codomain.parse_elem(d.strip())] = Dyadic.parse(q.strip())
        s = monte_carlo(r, g, picks)
        out.emit(str(s), estimate=str(s))
    elif args.action == "fubini":
        D = parse_domain(args.domain)
        E = parse_domain(args.domain2 or args.domain)
        beta, gamma = _valuation(D, args.inputs[0]), _valuation(E, args.inputs[1])
        f = {}
        for line in _lines(args.inputs[2]):
            key, v = line.rsplit(":", 1)
            d, e = key.split(";")
            f[(D.parse_elem(d.strip()), E.parse_elem(e.strip()))] = DyInterval.parse(v.strip())
        iv = fubini(beta, gamma, f)
        out.emit(str(iv), interval=str(iv))


# ---------------------------------------------------------------------------
# dist


def _matrix(text: str) -> List[List[Dyadic]]:
    return [[Dyadic.parse(x) for x in row.split(",")] for row in text.split(";") if row.strip()]


def _vector(text: str) -> List[Dyadic]:
    return [Dyadic.parse(x) for x in text.split(",") if x.strip()]


def cmd_dist(args, out: Out) -> None:
    from . import distributions as Dn

    space = parse_kind(args.space)
    if args.action == "quantile":
        F = Dn.parse_cdf(_text(args.inputs[0]).strip())
        iv = Dn.quantile_envelope(F, Dyadic.parse(args.p), args.precision)
        out.emit(str(iv), interval=str(iv))
    elif args.action == "rv":
        F = Dn.parse_cdf(_text(args.inputs[0]).strip())
        r = Dn.rv_quantile(F, args.depth, args.precision)
        out.emit(r.to_json(), rv=json.loads(r.to_json()))
    elif args.action == "boxmuller":
        for r in Dn.box_muller(args.depth, args.precision, space):
            out.emit(r.to_json(), rv=json.loads(r.to_json()))
    elif args.action == "chol":
        L = Dn.cholesky_psd(_matrix(_text(args.inputs[0])), args.precision)
        for row in L:
            cells = [str(x) for x in row]
            out.emit(" ".join(cells), row=cells)
    elif args.action == "mvn":
        rs = Dn.mvn(_vector(args.mean), _matrix(_text(args.cov)), args.depth, args.precision, space)
        for r in rs:
            out.emit(r.to_json(), rv=json.loads(r.to_json()))
    elif args.action == "dirichlet":
        alpha = _vector(args.alpha)
        rs = [_rv(a) for a in args.inputs]
        B = DyInterval.parse(args.beta) if args.beta else Dn.beta_enclosure(alpha, args.precision)
        r = Dn.dirichlet(alpha, rs, B, args.precision)
        out.emit(r.to_json(), rv=json.loads(r.to_json()))


# ---------------------------------------------------------------------------
# pfl


def _bits(args, length: int) -> str:
    from .pfl import lcg_bits

    if args.bits is not None:
        if any(c not in "01" for c in args.bits):
            raise ParseError("--bits must be a 0/1 string")
        return args.bits
    return lcg_bits(args.seed, length)


def cmd_pfl(args, out: Out) -> None:
    from .pfl import int_quadrature, parse, precision_sweep, run, show, show_type, typecheck
    from .pfl.syntax import show_real

    prog = parse(_text(args.inputs[0]))
    ty = typecheck(prog)
    if args.action == "check":
        out.emit(show_type(ty), type=show_type(ty))
    elif args.action == "run":
        o = run(prog, _bits(args, 1 << 12), args.n, args.fuel)
        out.emit(str(o), status=o.status, value=show(o.value) if o.value is not None else None, message=o.message)
        if o.status != "value":
            raise DomprobError(str(o))
    elif args.action == "sweep":
        L = 1 << 12
        s = _bits(args, L * (args.n + 1))
        L = max(1, len(s) // (args.n + 1))
        streams = [s[: L * (k + 1)] for k in range(args.n + 1)]
        rep = precision_sweep(prog, streams, list(range(args.n + 1)), args.fuel)
        for k, o in enumerate(rep.results):
            out.emit(f"n={k}: {o}", n=k, status=o.status, value=show(o.value) if o.value is not None else None)
        out.emit(f"nested: {_bool(rep.nested)}", nested=rep.nested, violations=rep.violations)
    elif args.action == "int":
        o = run(prog, _bits(args, 1 << 12), args.precision, args.fuel)
        if o.status != "value":
            raise DomprobError(str(o))
        iv = int_quadrature(o.value, args.n, args.fuel)
        out.emit(show_real(iv), interval=show_real(iv))


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    default_prec = int(os.environ.get(PRECISION_ENV, "32"))
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="one JSON object per output line")
    common.add_argument("--domain", default="unit", help="unit, real, poset:PATH or product(D1,D2)")
    common.add_argument("--space", default="Cantor", help="sample space kind")
    common.add_argument("--depth", type=int, default=None)
    common.add_argument("--precision", type=int, default=default_prec)
    common.add_argument("--n", type=int, default=8)
    common.add_argument("--bits", default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--fuel", type=int, default=100000)

    p = argparse.ArgumentParser(prog="domprob", description="Domain-theoretic random variables.")
    sub = p.add_subparsers(dest="group", required=True)

    def group(name, actions, nargs="*"):
        g = sub.add_parser(name, parents=[common])
        g.add_argument("action", choices=actions)
        g.add_argument("inputs", nargs=nargs)
        return g

    g = group("val", ["leq", "wb", "mass", "bayes"])
    g.add_argument("--open", default=None, help="generators separated by ';'")
    g.add_argument("--u", default=None)
    g.add_argument("--v", default=None)
    g.add_argument("--v-ext", dest="v_ext", default=None)
    g.add_argument("--uv-ext", dest="uv_ext", default=None)
    g.set_defaults(func=cmd_val, arity={"leq": 2, "wb": 2, "mass": 1, "bayes": 1})

    g = group("rv", ["t", "equiv", "refine", "restrict", "chain", "approx", "member", "witness"])
    g.add_argument("--open", default=None)
    g.add_argument("--q", default="0")
    g.set_defaults(
        func=cmd_rv,
        arity={"t": 1, "equiv": 2, "refine": 2, "restrict": 2, "chain": 1, "approx": 1, "member": 1, "witness": 2},
    )

    g = group("pair", ["interleave", "hilbert-cell", "hilbert-check"])
    g.set_defaults(func=cmd_pair, arity={"interleave": (1, 2), "hilbert-cell": (0, 1), "hilbert-check": 0})

    g = group("monad", ["mu", "laws"])
    g.add_argument("--samples", type=int, default=50)
    g.set_defaults(func=cmd_monad, arity={"mu": 1, "laws": 0})

    g = group("expect", ["run", "fubini", "mc"])
    g.add_argument("--domain2", default=None, help="domain of the second factor for fubini")
    g.set_defaults(func=cmd_expect, arity={"run": 2, "fubini": 3, "mc": 3})

    g = group("dist", ["quantile", "rv", "boxmuller", "chol", "mvn", "dirichlet"])
    g.add_argument("--p", default="1/2")
    g.add_argument("--mean", default=None)
    g.add_argument("--cov", default=None)
    g.add_argument("--alpha", default=None)
    g.add_argument("--beta", default=None, help="enclosure of B(alpha) as [lo,hi]")
    g.set_defaults(
        func=cmd_dist,
        arity={"quantile": 1, "rv": 1, "boxmuller": 0, "chol": 1, "mvn": 0, "dirichlet": (1, 64)},
    )

    g = group("pfl", ["check", "run", "sweep", "int"])
    g.set_defaults(func=cmd_pfl, arity={"check": 1, "run": 1, "sweep": 1, "int": 1})
    return p


_DEPTH_DEFAULTS = {("pair", "hilbert-check"): 4, ("dist", "rv"): 6, ("dist", "boxmuller"): 3, ("dist", "mvn"): 2}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    want = args.arity[args.action]
    lo, hi = want if isinstance(want, tuple) else (want, want)
    if not lo <= len(args.inputs) <= hi:
        parser.error(f"{args.group} {args.action} takes {lo if lo == hi else f'{lo} to {hi}'} input(s)")
    if args.depth is None:
        args.depth = _DEPTH_DEFAULTS.get((args.group, args.action))
    if args.group == "dist" and args.action == "mvn" and (args.mean is None or args.cov is None):
        parser.error("dist mvn needs --mean and --cov")
    if args.group == "dist" and args.action == "dirichlet" and args.alpha is None:
        parser.error("dist dirichlet needs --alpha")
    if args.group == "val" and args.action == "bayes" and (args.v is None or args.v_ext is None):
        parser.error("val bayes needs --v and --v-ext")
    out = Out(args.json)
    try:
        args.func(args, out)
    except (DomprobError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
