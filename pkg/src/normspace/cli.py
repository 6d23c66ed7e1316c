"""Command-line front end: ``normspace <subcommand> [options]``.

Input is a JSON document given inline (``--input``), from a file
(``--file``) or on stdin. Output is JSON (sorted keys, compact) or CSV.
Exit codes: 0 success, 1 internal error, 2 malformed input, 3 violated
precondition.
"""
from __future__ import annotations

import argparse
import csv
import io
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import boundary as bd
from . import decomp as dc
from . import jsonio as jio
from . import linalg as la
from . import norms as nm
from . import reduction as rd
from . import topolab as tl
from .errors import MalformedInputError, PreconditionError
from .points import BoundaryPoint
from .scalars import Place

EXIT_OK, EXIT_INTERNAL, EXIT_MALFORMED, EXIT_PRECONDITION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise MalformedInputError(message)


# --- helpers ---------------------------------------------------------------------------

def _field(doc, key):
    if not isinstance(doc, dict) or key not in doc:
        raise MalformedInputError(f"input needs field {key!r}")
    return doc[key]


def _point_or_norm(doc, v):
    if "point" in doc:
        return jio.decode_boundary_point(doc["point"], v)
    return BoundaryPoint.interior(jio.decode_norm(_field(doc, "norm"), v))


def _flag_for(doc, key, d, v):
    return jio.decode_flag(_field(doc, key), d, v)


def _subspace(doc, key, d, v):
    rows = _field(doc, key)
    if not isinstance(rows, list):
        raise MalformedInputError(f"{key} must be a list of vectors")
    return la.Subspace.span([jio.decode_vector(r, v) for r in rows], d)


def _t_values(obj, v):
    if not isinstance(obj, list):
        raise MalformedInputError("t must be a list")
    t = tuple(jio.decode_weight(x) for x in obj)
    return tuple(float(x) for x in t) if v.is_archimedean else t


# --- subcommands ---------------------------------------------------------------------

def cmd_eval(doc, v, args):
    mu = jio.decode_norm(_field(doc, "norm"), v, semi=True)
    return {"value": mu(jio.decode_vector(_field(doc, "x"), v))}


def cmd_dual(doc, v, args):
    return {"norm": nm.dual(jio.decode_norm(_field(doc, "norm"), v))}


def cmd_act(doc, v, args):
    g = jio.decode_matrix(_field(doc, "g"), v)
    if "point" in doc:
        return {"point": bd.act_global(g, jio.decode_boundary_point(doc["point"], v))}
    return {"norm": nm.act(g, jio.decode_norm(_field(doc, "norm"), v, semi=True))}


def cmd_induce(doc, v, args):
    mu = jio.decode_norm(_field(doc, "norm"), v)
    Hp = _subspace(doc, "Hp", mu.d, v)
    Hpp = _subspace(doc, "Hpp", mu.d, v) if doc.get("Hpp") else la.Subspace(mu.d, ())
    q = la.Quotient(Hp, Hpp)
    return {"norm": nm.induce_subquotient(mu, Hp, Hpp), "coordinates": q.complement}


def cmd_abs_rel(doc, v, args):
    mu = jio.decode_norm(_field(doc, "norm"), v)
    e = jio.decode_matrix(doc["basis"], v) if "basis" in doc else la.identity(mu.d, v.one())
    return {"value": nm.abs_rel(mu, e)}


def cmd_class_eq(doc, v, args):
    a = jio.decode_norm(_field(doc, "a"), v)
    b = jio.decode_norm(_field(doc, "b"), v)
    return {"equal": nm.class_eq(a, b, args.tol), "distance": nm.class_distance(a, b)}


def cmd_iwasawa(doc, v, args):
    tr = dc.iwasawa(jio.decode_matrix(_field(doc, "g"), v), v)
    return {"u": tr.u, "a": tr.a, "k": tr.k, "t": tr.t,
            "compact": dc.is_compact_element(tr.k, v, args.tol)}


def cmd_bruhat(doc, v, args):
    p = int(doc.get("p", v.p if v.kind == "padic" else 5))
    rows = _field(doc, "g")
    try:
        g = tuple(tuple(int(x) % p for x in r) for r in rows)
    except (TypeError, ValueError) as exc:
        raise MalformedInputError("bruhat needs an integer matrix") from exc
    b, w, b2 = dc.bruhat_residue(g, p)
    return {"b": b, "w": w, "b_prime": b2, "p": p}


def cmd_chart(doc, v, args):
    if "point" in doc:
        return {"chart": dc.chart_section_boundary(jio.decode_boundary_point(doc["point"], v))}
    return {"chart": dc.chart_section(jio.decode_norm(_field(doc, "norm"), v), v)}


def cmd_chart_eq(doc, v, args):
    a = jio.decode_chart_point(_field(doc, "a"), v)
    b = jio.decode_chart_point(_field(doc, "b"), v)
    return {"fiber_eq": dc.chart_fiber_eq(a, b, v),
            "images_equal": dc.chart_images_equal(a, b, v)}


def cmd_phi(doc, v, args):
    bp = _point_or_norm(doc, v)
    return {"graded": bd.phi_P(bp, _flag_for(doc, "P", bp.d, v))}


def cmd_phi_prime(doc, v, args):
    bp = _point_or_norm(doc, v)
    return {"t": bd.phi_prime_P(bp, _flag_for(doc, "P", bp.d, v))}


def _xi_inputs(doc, v):
    mus = [jio.decode_norm(m, v) for m in _field(doc, "mus")]
    d = sum(m.d for m in mus)
    P = _flag_for(doc, "P", d, v)
    g = jio.decode_matrix(doc["g"], v) if "g" in doc else la.identity(d, v.one())
    return g, mus, _t_values(_field(doc, "t"), v), P


def cmd_xi(doc, v, args):
    return {"point": bd.xi(*_xi_inputs(doc, v))}


def cmd_xi_star(doc, v, args):
    return {"point": bd.xi_star(*_xi_inputs(doc, v))}


def cmd_apartment_cover(doc, v, args):
    y = tuple(jio.decode_weight(x) for x in _field(doc, "y"))
    out = []
    for h, w in bd.apartment_cover(y, v):
        out.append({"diag_exponents": h.diag_exponents, "perm": h.perm, "chamber_coordinates": w})
    return {"translates": out, "count": len(out)}


def cmd_t_coords(doc, v, args):
    return {"t": rd.t_coords(_point_or_norm(doc, v), v)}


def _siegel_params(doc):
    I = frozenset(int(i) for i in doc.get("I", []))
    c3 = doc.get("c3")
    return rd.SiegelParams(c1=float(jio.decode_weight(doc.get("c1", rd.CLASSICAL_C1))),
                           C=float(jio.decode_weight(doc.get("C", "1/2"))),
                           c3=None if c3 is None else float(jio.decode_weight(c3)), I=I)


def cmd_siegel(doc, v, args):
    ok, cp = rd.siegel_member(_point_or_norm(doc, v), _siegel_params(doc), v, args.tol)
    return {"member": ok, "certificate": cp}


def cmd_reduce(doc, v, args):
    gram = args.gram if args.gram is not None else _field(doc, "gram")
    if isinstance(gram, str):
        gram = jio.loads(gram)
    G = jio.decode_rational_matrix(gram)
    res = rd.reduce_point(G, args.d)
    return {"gamma": res.gamma, "t": res.t, "g": res.g, "c1": res.c1,
            "certificate": res.certificate}


def cmd_lemdet(doc, v, args):
    g = jio.decode_matrix(_field(doc, "g"), v)
    x = jio.decode_norm(_field(doc, "norm"), v)
    rep = rd.lemdet_check(g, x, int(_field(doc, "i")), v, args.tol)
    return {"lhs": rep.lhs, "rhs": rep.rhs, "equal": rep.equal}


# --- convergence sweeps ----------------------------------------------------------------

FAMILIES = {
    "mu_yx": (("y", "x"), lambda p, v: tl.mu_yx(p["y"], tl.element_of_abs(p["x"], v), v), 2),
    "mu_y_gx": (("y", "x"), lambda p, v: tl.mu_y_gx(p["y"], tl.element_of_abs(p["x"], v), v), 3),
    "mu_x_eps": (("x", "eps"), lambda p, v: tl.mu_x_eps(tl.element_of_abs(p["x"], v), p["eps"], v), 3),
}


def parse_sweep(text: str, v: Place):
    """``name=a:b:steps``: parameter values base^k for `steps` integer
    exponents k evenly spaced from a to b; base is q (non-archimedean) or 2."""
    try:
        name, rng = text.split("=", 1)
        a, b, steps = (int(s) for s in rng.split(":"))
    except ValueError as exc:
        raise MalformedInputError(f"bad sweep {text!r}; expected name=a:b:steps") from exc
    if steps < 1:
        raise MalformedInputError("sweep needs at least one step")
    if steps == 1:
        exps = [a]
    else:
        if (b - a) % (steps - 1):
            raise MalformedInputError("sweep exponents must be integers")
        exps = [a + k * (b - a) // (steps - 1) for k in range(steps)]
    base = Fraction(v.q) if not v.is_archimedean else Fraction(2)
    return name, [base ** k for k in exps]


def _family_term(args):
    fam, params, place = args
    v = Place.parse(place)
    names, build, d = FAMILIES[fam]
    mu = build(params, v)
    return [float(x) for x in rd.t_coords(mu, v)], [float(nm.dual(mu)(p))
                                                      for p in tl.default_probes(d, v)]


def cmd_converge(doc, v, args):
    fam = _field(doc, "family")
    if fam not in FAMILIES:
        raise MalformedInputError(f"unknown family {fam!r}; choose from {sorted(FAMILIES)}")
    names, build, d = FAMILIES[fam]
    fixed = {k: jio.decode_weight(x) for k, x in doc.get("fixed", {}).items()}
    if args.sweep is None:
        raise MalformedInputError("converge needs --sweep name=a:b:steps")
    pname, values = parse_sweep(args.sweep, v)
    if pname not in names:
        raise MalformedInputError(f"family {fam} has parameters {names}")
    tied = doc.get("tied", {})            # e.g. {"eps": ["x", "1/2"]}: eps = x * 1/2
    schedule = []
    for val in values:
        p = dict(fixed)
        p[pname] = val
        for k, (src, f) in tied.items():
            p[k] = p[src] * jio.decode_weight(f)
        missing = [n for n in names if n not in p]
        if missing:
            raise MalformedInputError(f"missing parameters {missing}")
        schedule.append(p)
    seq = tl.SeqSpec(fam, lambda n: build(schedule[n], v), tuple(range(len(schedule))))
    out = {"family": fam, "sweep": args.sweep}
    if "weak" in doc:
        target = jio.decode_norm(doc["weak"], v, semi=True)
        out["weak"] = tl.weak_limit_check(seq, target, tol=args.tol).to_dict()
    if "satake" in doc:
        target = jio.decode_boundary_point(doc["satake"], v)
        out["satake"] = tl.satake_limit_check(seq, target, tol=args.tol).to_dict()
    jobs = [(fam, p, str(v)) for p in schedule]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            rows = list(ex.map(_family_term, jobs))
    else:
        rows = [_family_term(j) for j in jobs]
    out["rows"] = [[n, float(values[n])] + t + probes for n, (t, probes) in enumerate(rows)]
    out["columns"] = (["n", pname] + [f"t{i + 1}" for i in range(d - 1)]
                      + [f"probe{i + 1}" for i in range(2 ** d - 1)])
    return out


# --- registered examples -------------------------------------------------------------------

def _example(doc, v, args):
    name = args.name
    place = v if args.place_given else None
    if name == "bssa":
        return tl.example_bssa(place)
    if name == "bssb":
        if args.y_schedule != "geometric":
            raise MalformedInputError("only the geometric y-schedule is registered")
        res = tl.example_bssb(place, tol=args.tol)
        return res
    if name == "d3weak":
        vv = place or Place.padic(2)
        q = Fraction(vv.q) if not vv.is_archimedean else Fraction(2)
        n = 32
        ys = [q ** k for k in range(n)]
        xs = [q ** (3 * k) for k in range(n)] if args.x_schedule == "fast" else [0] * n
        return tl.example_d3_weak(ys, xs, vv, tol=args.tol)
    if name == "tow2":
        return tl.example_tow2(jio.decode_weight(args.r), place, tol=args.tol)
    if name == "nonhausdorff":
        vv = place or Place.padic(2)
        a = jio.decode_matrix(jio.loads(args.a), vv)
        b = jio.decode_matrix(jio.loads(args.b), vv)
        return tl.nonhausdorff_demo(a, b, vv)
    if name == "halfplane":
        z = tl.INFINITY if args.z == "inf" else complex(args.z.replace("i", "j"))
        if args.c is not None:
            return {"member": tl.halfplane_neighborhood(z, "c", float(args.c))}
        table = jio.loads(args.f_table) if args.f_table else [[-1e6, -1e6], [1e6, 1e6]]
        return {"member": tl.halfplane_neighborhood(z, "f", table)}
    raise MalformedInputError(f"unknown example {name!r}")


COMMANDS = {
    "eval": cmd_eval, "dual": cmd_dual, "act": cmd_act, "induce": cmd_induce,
    "abs-rel": cmd_abs_rel, "class-eq": cmd_class_eq, "iwasawa": cmd_iwasawa,
    "bruhat": cmd_bruhat, "chart": cmd_chart, "chart-eq": cmd_chart_eq, "phi": cmd_phi,
    "phi-prime": cmd_phi_prime, "xi": cmd_xi, "xi-star": cmd_xi_star,
    "apartment-cover": cmd_apartment_cover, "t-coords": cmd_t_coords, "siegel": cmd_siegel,
    "reduce": cmd_reduce, "lemdet": cmd_lemdet, "converge": cmd_converge, "example": _example,
}
NO_INPUT = {"reduce", "example"}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--place", default=None,
                        help="real, complex, padic:<p>, laurent:<p>[:1/T]")
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--sweep", default=None, help="name=a:b:steps")
    common.add_argument("--input", default=None, help="inline JSON input")
    common.add_argument("--file", default=None, help="read JSON input from a file")
    p = _Parser(prog="normspace", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "reduce":
            sp.add_argument("--gram", default=None)
            sp.add_argument("--d", type=int, default=None)
        if name == "example":
            sp.add_argument("name", choices=("bssa", "bssb", "d3weak", "tow2",
                                              "nonhausdorff", "halfplane"))
            sp.add_argument("--y-schedule", default="geometric")
            sp.add_argument("--x-schedule", choices=("zero", "fast"), default="fast")
            sp.add_argument("--r", default="2")
            sp.add_argument("--a", default="[[1,0],[0,1]]")
            sp.add_argument("--b", default="[[1,1],[0,1]]")
            sp.add_argument("--z", default="inf")
            sp.add_argument("--c", default=None)
            sp.add_argument("--f-table", default=None)
    return p


def _read_input(args, stdin):
    if args.input is not None:
        return jio.loads(args.input)
    if args.file is not None:
        try:
            with open(args.file) as fh:
                return jio.loads(fh.read())
        except OSError as exc:
            raise MalformedInputError(f"cannot read {args.file}: {exc}") from exc
    if args.command in NO_INPUT:
        return {}
    return jio.loads(stdin.read())


def to_csv(result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    enc = jio.encode(result)
    if isinstance(enc, dict) and "rows" in enc:
        w.writerow(enc.get("columns", []))
        w.writerows(enc["rows"])
    else:
        def walk(prefix, obj):
            if isinstance(obj, dict):
                for k in sorted(obj):
                    walk(f"{prefix}.{k}" if prefix else k, obj[k])
            else:
                w.writerow([prefix, jio.json.dumps(obj, sort_keys=True)])
        w.writerow(["key", "value"])
        walk("", enc)
    return buf.getvalue()


def run(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        args.place_given = args.place is not None
        v = Place.parse(args.place) if args.place else Place.real()
        random.seed(args.seed)
        doc = _read_input(args, stdin)
        if args.input is not None or args.file is not None or args.command not in NO_INPUT:
            if not isinstance(doc, dict):
                raise MalformedInputError("input must be a JSON object")
        result = COMMANDS[args.command](doc, v, args)
        text = to_csv(result) if args.format == "csv" else jio.dumps(result) + "\n"
        stdout.write(text)
        return EXIT_OK
    except MalformedInputError as exc:
        stderr.write(f"malformed input: {exc}\n")
        return EXIT_MALFORMED
    except PreconditionError as exc:
        stderr.write(f"precondition violated: {exc}\n")
        return EXIT_PRECONDITION
    except SystemExit as exc:             # --help
        return int(exc.code or 0)
    except Exception as exc:              # noqa: BLE001
        stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


def main():
    sys.exit(run())
