"""Command-line front end: ``octaverify verify|iso|gallery|reproduce``."""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import diagram, gallery, isosearch, stable
from .errors import ContractError, EnumerationTooLarge, OctaError
from .fileformat import (
    EXIT_USAGE,
    FormatError,
    Report,
    diagram_to_dict,
    dump,
    load,
)


class _Usage(Exception):
    pass


def _write_report(report: Report, path: str | None) -> None:
    text = report.dumps()
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    for c in report.checks:
        print(f"{c.status.upper():13s} {c.name}  ({c.seconds:.2f}s)")
    print(f"exit {report.exit_code}")


def _verdict(v) -> tuple[str, dict]:
    payload = {"reason": v.reason} if v.reason else {}
    payload.update(_jsonable(v.details))
    return ("pass" if v else "fail"), payload


def _jsonable(obj):
    return json.loads(json.dumps(obj, default=str))


# --- verify -------------------------------------------------------------------------


def cmd_verify(args) -> int:
    D = load(args.input)
    report = Report("verify")
    check = args.check
    if check == "pretriangle":
        report.timed("pretriangle", lambda: _verdict(diagram.is_periodic_pretriangle(D)))
    elif check == "triangle":
        if D.n != 2:
            raise _Usage(f"--check triangle needs a diagram with n = 2, got n = {D.n}")

        def run():
            T = diagram.triangle_of(D)
            status, payload = _verdict(stable.is_distinguished(T))
            payload["objects"] = [str(T.X), str(T.Y), str(T.Z)]
            return status, payload

        report.timed("triangle", run)
    else:
        if D.n != 3:
            raise _Usage(f"--check octahedron needs a diagram with n = 3, got n = {D.n}")
        report.timed("octahedron", lambda: _verdict(diagram.is_verdier_octahedron(D)))
    _write_report(report, args.report)
    return report.exit_code


# --- iso ----------------------------------------------------------------------------


def _iso_check(left, right, mode, budget, workers) -> tuple[str, dict]:
    res = isosearch.find_periodic_isos(left, right, mode=mode, budget=budget, workers=workers)
    witnesses = []
    for iso in res.isos[:20]:
        v = isosearch.verify_diagram_iso(iso)
        if not v:
            return "fail", {"reason": f"witness failed the re-check: {v.reason}", "witness": iso.as_rows()}
        witnesses.append(iso.as_rows())
    payload = {
        "search": res.status,
        "nodes": res.nodes,
        "mode": mode,
        "count": len(res),
        "result": "isomorphic" if len(res) else ("not isomorphic" if res.complete else "unknown"),
        "witnesses": witnesses,
    }
    return ("pass" if res.complete else "inconclusive"), payload


def cmd_iso(args) -> int:
    left, right = load(args.left), load(args.right)
    if (left.ctx.p, left.ctx.m, left.n) != (right.ctx.p, right.ctx.m, right.n):
        raise _Usage("left and right diagrams have different (p, m, n)")
    report = Report("iso")
    mode = "all" if args.all else "first"
    report.timed("periodic-isomorphism", lambda: _iso_check(left, right, mode, args.budget, args.workers))
    _write_report(report, args.report)
    return report.exit_code


# --- gallery ------------------------------------------------------------------------


def cmd_gallery(args) -> int:
    D = gallery.generate(args.name, args.n, args.p)
    if args.restrict is not None:
        if isinstance(D, diagram.EDiagram):
            D = diagram.standardize_column(D)
        D = diagram.restrict(D, args.restrict)
    dump(D, args.out)
    print(f"wrote {args.out}")
    return 0


# --- reproduce ----------------------------------------------------------------------


def reproduce(n: int, p: int, budget: int | None = None, workers: int = 1) -> Report:
    """Run every reproduction check for the given (n, p); octahedron entries use n = 3."""
    report = Report("reproduce")

    def y_box():
        E = gallery.gen_Y(n, p)
        v = diagram.check_box_property(E)
        if not v:
            return _verdict(v)
        D = diagram.standardize_column(E)
        image = diagram.stable_image(E)
        unchanged = all(image[key] == f for key, f in D.free_maps().items())
        trivial = all(
            stable.is_stably_zero(stable.canonical_form(diagram.column_correction(E, i)) - stable.identity(E.ctx, E.objects[(E.N, i)]))
            for i in range(1, E.N)
        )
        ok = unchanged and trivial
        return ("pass" if ok else "fail"), {"column_corrections_trivial": trivial, "unchanged": unchanged}

    report.timed("y-box-property", y_box)
    X, Xt = gallery.gen_X(n, p), gallery.gen_Xtilde(n, p)
    report.timed("x-pretriangle", lambda: _verdict(diagram.is_periodic_pretriangle(X)))
    report.timed("xtilde-pretriangle", lambda: _verdict(diagram.is_periodic_pretriangle(Xt)))

    def faces():
        per_k = {}
        for k in range(n + 1):
            L, R = diagram.restrict(X, k), diagram.restrict(Xt, k)
            entry = {"witness": bool(isosearch.verify_diagram_iso(gallery.known_witness_iso(k, n, p)))}
            if k in (1, n):
                entry["equal"] = L == R
            per_k[k] = entry
        ok = all(all(e.values()) for e in per_k.values())
        return ("pass" if ok else "fail"), {"faces": per_k}

    report.timed("faces-isomorphic", faces)

    def not_iso(left, right):
        status, payload = _iso_check(left, right, "all", budget, workers)
        if status == "pass" and payload["count"]:
            return "fail", payload
        return status, payload

    report.timed("x-xtilde-not-isomorphic", lambda: not_iso(X, Xt))

    OX, OXt = gallery.gen_X(3, p), gallery.gen_Xtilde(3, p)

    def octahedra():
        vs = [diagram.is_verdier_octahedron(OX), diagram.is_verdier_octahedron(OXt)]
        ok = all(vs)
        return ("pass" if ok else "fail"), {"X": _verdict(vs[0])[1], "Xtilde": _verdict(vs[1])[1]}

    report.timed("octahedra", octahedra)
    report.timed("octahedra-not-isomorphic", lambda: not_iso(OX, OXt))

    def extra():
        out, ok = {}, True
        for name, D in (("X", OX), ("Xtilde", OXt)):
            for i, T in enumerate(diagram.bbd_extra_triangles(D), 1):
                v = stable.is_distinguished(T)
                ok &= bool(v)
                out[f"{name}.{i}"] = {"objects": [str(T.X), str(T.Y), str(T.Z)], "distinguished": bool(v)}
        return ("pass" if ok else "fail"), out

    report.timed("extra-triangles", extra)
    return report


def cmd_reproduce(args) -> int:
    report = reproduce(args.n, args.p, args.budget, args.workers)
    _write_report(report, args.report)
    return report.exit_code


# --- entry point --------------------------------------------------------------------


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="octaverify", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check a diagram file")
    v.add_argument("--input", required=True)
    v.add_argument("--check", required=True, choices=["pretriangle", "triangle", "octahedron"])
    v.add_argument("--report")
    v.set_defaults(func=cmd_verify)

    i = sub.add_parser("iso", help="search for periodic isomorphisms")
    i.add_argument("--left", required=True)
    i.add_argument("--right", required=True)
    i.add_argument("--all", action="store_true", help="enumerate every isomorphism")
    i.add_argument("--budget", type=_positive, help="maximum number of search nodes")
    i.add_argument("--workers", type=_positive, default=1)
    i.add_argument("--report")
    i.set_defaults(func=cmd_iso)

    g = sub.add_parser("gallery", help="write an example diagram")
    g.add_argument("--name", required=True, choices=list(gallery.NAMES))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--restrict", type=int, metavar="K", help="restrict along the face map skipping K")
    g.set_defaults(func=cmd_gallery)

    r = sub.add_parser("reproduce", help="run every reproduction check")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--p", type=int, required=True)
    r.add_argument("--budget", type=_positive)
    r.add_argument("--workers", type=_positive, default=1)
    r.add_argument("--report")
    r.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (_Usage, FormatError, ContractError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EnumerationTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
