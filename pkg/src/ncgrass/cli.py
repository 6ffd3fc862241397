"""Command-line front end.

Every verb reads one JSON document (a file path, or stdin when the path is
omitted or ``-``) holding its matrix and point arguments, and writes a JSON
result to stdout.  Integer indices are flags.  Points are matrix objects with
extra keys: ``{"d": 1, "m": 2, "n": 1, "k": 1, "mode": ..., "data": [...]}``
for Grassmannian points and ``"sig": [d_1, ...]`` instead of ``"d"`` for
flag points; a nested ``"rep"`` matrix is accepted as well.

Exit status: 0 on success, 1 when a verification fails, 2 on usage or input
errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import _exact as E
from .algebra import (
    DEFAULT_TOL,
    MODES,
    LayeredMatrix,
    matrix_from_json,
    matrix_to_json,
    scalar_array,
)
from .dilation import (
    graph_transform,
    halmos_dilation,
    resolvent_correspondence_check,
    unitarity_residual,
)
from .errors import NcGrassError, SchemaError
from .grassmann import (
    FlagPoint,
    FlagSignature,
    GrassPoint,
    affine_embed,
    affine_extract,
    direct_sum,
    flag_equiv,
    flag_project,
    gr_canonicalize,
    gr_equiv,
    pinch,
    shift_act,
    similarity,
)
from .harness import RunConfig, run_suite, suite_names
from .ncfunc import dd_apply
from .resolvent import (
    ProjectivePoint,
    flag_resolvent,
    grass_resolvent,
    in_resolvent_set,
    is_transversal,
    r_matrix,
    resolvent_equation_residual,
    resolvent_function,
)

FAIL = 1
USAGE = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------

def _read(path: Optional[str]) -> dict:
    try:
        if path in (None, "-"):
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        doc = json.loads(text)
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise _UsageError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise _UsageError("input must be a JSON object")
    return doc


def _field(doc: dict, key: str):
    if key not in doc:
        raise _UsageError(f"input is missing {key!r}")
    return doc[key]


def _matrix(doc: dict, key: str, mode: Optional[str]) -> LayeredMatrix:
    return matrix_from_json(_field(doc, key), mode)


def _rep(obj, mode):
    if not isinstance(obj, dict):
        raise SchemaError("point must be a JSON object")
    return matrix_from_json(obj["rep"] if "rep" in obj else obj, mode)


def _point(doc: dict, key: str, mode: Optional[str], tol: float) -> GrassPoint:
    obj = _field(doc, key)
    rep = _rep(obj, mode)
    if "d" not in obj:
        raise SchemaError(f"{key}: Grassmannian point needs 'd'")
    if int(obj.get("m", rep.m)) != rep.m:
        raise SchemaError(f"{key}: 'm' disagrees with the representative")
    return GrassPoint(int(obj["d"]), rep, tol=tol)


def _flag(doc: dict, key: str, mode: Optional[str], tol: float) -> FlagPoint:
    obj = _field(doc, key)
    rep = _rep(obj, mode)
    if "sig" not in obj:
        raise SchemaError(f"{key}: flag point needs 'sig'")
    return FlagPoint(FlagSignature(tuple(obj["sig"]), rep.m), rep, tol=tol)


def _scalars(doc: dict, key: str, mode: Optional[str]) -> np.ndarray:
    """A plain scalar matrix: nested lists of numbers/strings, or a matrix object with k = 1."""
    obj = _field(doc, key)
    if isinstance(obj, dict):
        return matrix_from_json(obj, mode).data
    try:
        values = [[E.parse_rational(x) if isinstance(x, str) else x for x in row] for row in obj]
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"{key}: bad scalar matrix") from exc
    return scalar_array(values, mode)


def point_to_json(p) -> dict:
    out = matrix_to_json(p.rep)
    if isinstance(p, FlagPoint):
        out = {"sig": list(p.sig.dims), **out}
    else:
        out = {"d": p.d, **out}
    return out


def _value_json(value: LayeredMatrix) -> dict:
    out = {"value": matrix_to_json(value)}
    if value.data.size == 1:
        x = value.data.flat[0]
        out["scalar"] = _scalar_text(x, value.mode)
    return out


def _scalar_text(x, mode: str) -> str:
    if mode == "exact":
        re, im = E.real_part(x), E.imag_part(x)
        text = E.format_rational(re)
        return text if im == 0 else f"{text}+({E.format_rational(im)})i"
    x = complex(x)
    return repr(x.real) if x.imag == 0 else repr(x)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

def cmd_equiv(args, doc):
    if "sig" in _field(doc, "sigma"):
        a, b = _flag(doc, "sigma", args.mode, args.tol), _flag(doc, "tau", args.mode, args.tol)
        return {"equiv": flag_equiv(a, b, args.tol)}
    a, b = _point(doc, "sigma", args.mode, args.tol), _point(doc, "tau", args.mode, args.tol)
    return {"equiv": gr_equiv(a, b, args.tol)}


def cmd_canon(args, doc):
    sigma = _point(doc, "sigma", args.mode, args.tol)
    return {"d": sigma.d, **matrix_to_json(gr_canonicalize(sigma, args.tol))}


def cmd_embed(args, doc):
    return point_to_json(affine_embed(_matrix(doc, "X", args.mode)))


def cmd_extract(args, doc):
    X = affine_extract(_point(doc, "sigma", args.mode, args.tol), args.tol)
    return {"affine": X is not None, "X": None if X is None else matrix_to_json(X)}


def cmd_dsum(args, doc):
    a, b = _point(doc, "sigma", args.mode, args.tol), _point(doc, "sigma2", args.mode, args.tol)
    return point_to_json(direct_sum(a, b))


def cmd_sim(args, doc):
    sigma = _point(doc, "sigma", args.mode, args.tol)
    return point_to_json(similarity(_scalars(doc, "s", sigma.mode), sigma, args.tol))


def cmd_pinch(args, doc):
    a, b = _point(doc, "sigma", args.mode, args.tol), _point(doc, "sigma2", args.mode, args.tol)
    return point_to_json(pinch(a, b, args.u, args.v, _matrix(doc, "X", args.mode)))


def cmd_shift(args, doc):
    sigma = _point(doc, "sigma", args.mode, args.tol)
    return point_to_json(shift_act(sigma, _matrix(doc, "Y", args.mode)))


def _pi(doc, args) -> ProjectivePoint:
    return ProjectivePoint.from_point(_point(doc, "pi", args.mode, args.tol))


def cmd_ddop(args, doc):
    pi = _pi(doc, args)
    a, b = _point(doc, "sigma", args.mode, args.tol), _point(doc, "sigma2", args.mode, args.tol)
    f = resolvent_function(pi, a.d, args.v, args.u, tol=args.tol)
    value = dd_apply(f, a, b, args.s, args.t, _matrix(doc, "X", args.mode), tol=args.tol)
    return {"value": matrix_to_json(value)}


def cmd_rmat(args, doc):
    if "pi" in doc:
        pi, sigma = _pi(doc, args), _point(doc, "sigma", args.mode, args.tol)
        return matrix_to_json(r_matrix(pi.amplify(sigma.n), sigma.rep, sigma.d))
    d = args.d if args.d is not None else _field(doc, "d")
    return matrix_to_json(r_matrix(_matrix(doc, "A", args.mode), _matrix(doc, "B", args.mode), int(d)))


def cmd_transversal(args, doc):
    pi, sigma = _pi(doc, args), _point(doc, "sigma", args.mode, args.tol)
    return {"transversal": is_transversal(pi.amplify(sigma.n), sigma, tol=args.tol)}


def cmd_inset(args, doc):
    pi, sigma = _pi(doc, args), _point(doc, "sigma", args.mode, args.tol)
    return {"in_resolvent_set": in_resolvent_set(pi, sigma, tol=args.tol)}


def cmd_resolvent(args, doc):
    pi, sigma = _pi(doc, args), _point(doc, "sigma", args.mode, args.tol)
    return _value_json(grass_resolvent(pi, sigma, args.v, args.u, args.tol).value)


def cmd_reseq(args, doc):
    pi = _pi(doc, args)
    a, b = _point(doc, "sigma", args.mode, args.tol), _point(doc, "sigma2", args.mode, args.tol)
    res = resolvent_equation_residual(pi, a, b, args.s, args.t, args.v, args.u,
                                      _matrix(doc, "X", args.mode), tol=args.tol)
    ok = res == 0.0 if a.mode == "exact" else res < args.threshold
    return {"residual": res, "pass": ok}, (0 if ok else FAIL)


def cmd_flag_project(args, doc):
    return point_to_json(flag_project(_flag(doc, "phi", args.mode, args.tol), args.j))


def cmd_flag_resolvent(args, doc):
    pi, phi = _flag(doc, "pi", args.mode, args.tol), _flag(doc, "phi", args.mode, args.tol)
    return _value_json(flag_resolvent(pi, phi, args.j, args.v, args.u, args.tol).value)


def _float_matrix(doc, key):
    arr = _scalars(doc, key, "float")
    return np.array(arr, dtype=complex)


def cmd_dilate(args, doc):
    a = _float_matrix(doc, "a")
    pi = halmos_dilation(a)
    t = graph_transform(a).t
    k = a.shape[0]
    return {"pi": point_to_json(pi), "t": matrix_to_json(LayeredMatrix(t, 1, 1, k)),
            "unitarity_residual": unitarity_residual(pi)}


def cmd_correspond(args, doc):
    report = resolvent_correspondence_check(_float_matrix(doc, "a"), _float_matrix(doc, "beta"),
                                            tol=args.tol)
    return report.as_dict(), (FAIL if report.agree is False else 0)


def cmd_verify(args, doc):
    names = suite_names() if not args.suite or "all" in args.suite else args.suite
    cfg = RunConfig.from_env(mode=args.mode, tol=args.tol_flag, seed=args.seed, cases=args.cases,
                             m_cap=args.m_cap, n_cap=args.n_cap, k_cap=args.k_cap)
    reports = [run_suite(name, cfg).to_dict() for name in names]
    ok = all(r["ok"] for r in reports)
    out = reports[0] if len(reports) == 1 else {"reports": reports, "ok": ok}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(out, fh, sort_keys=True)
            fh.write("\n")
    return out, (0 if ok else FAIL)


VERBS = {
    "equiv": (cmd_equiv, "decide equivalence of two points (sigma, tau)", ()),
    "canon": (cmd_canon, "canonical representative of sigma", ()),
    "embed": (cmd_embed, "affine point of a block matrix X", ()),
    "extract": (cmd_extract, "affine chart coordinate of sigma, if any", ()),
    "dsum": (cmd_dsum, "direct sum of sigma and sigma2", ()),
    "sim": (cmd_sim, "scalar similarity s . sigma", ()),
    "pinch": (cmd_pinch, "pinch of sigma, sigma2 with coupling X", ("u", "v")),
    "shift": (cmd_shift, "translate sigma by the block matrix Y", ()),
    "ddop": (cmd_ddop, "difference-differential of R(v,u) of pi, applied to X", ("s", "t", "v", "u")),
    "rmat": (cmd_rmat, "transversality frame of (pi, sigma) or (A, B, d)", ()),
    "transversal": (cmd_transversal, "is sigma transversal to pi", ()),
    "inset": (cmd_inset, "is sigma in the resolvent set of pi", ()),
    "resolvent": (cmd_resolvent, "resolvent R(v,u) of pi at sigma", ("v", "u")),
    "reseq": (cmd_reseq, "residual of the resolvent equation", ("s", "t", "v", "u")),
    "flag-project": (cmd_flag_project, "j-th Grassmannian projection of a flag point", ("j",)),
    "flag-resolvent": (cmd_flag_resolvent, "flag resolvent R(j; v, u) of pi at phi", ("j", "v", "u")),
    "dilate": (cmd_dilate, "unitary dilation and graph transform of a contraction", ()),
    "correspond": (cmd_correspond, "compare the two resolvent-set predicates for (a, beta)", ()),
    "verify": (cmd_verify, "run randomized verification suites", ()),
}


def _env_tol() -> Optional[float]:
    raw = os.environ.get("NCGRASS_TOL")
    if not raw:
        return None
    try:
        return float(raw)
    except ValueError:
        raise _UsageError(f"NCGRASS_TOL is not a number: {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ncgrass", description="Noncommutative Grassmannian toolkit.")
    sub = parser.add_subparsers(dest="verb", metavar="verb", parser_class=_Parser)
    for verb, (_, help_text, indices) in VERBS.items():
        p = sub.add_parser(verb, help=help_text, description=help_text)
        p.add_argument("--mode", choices=MODES, default=None, help="arithmetic mode (default: as stored)")
        p.add_argument("--tol", dest="tol_flag", type=float, default=None, help="float tolerance")
        if verb == "verify":
            p.add_argument("--suite", action="append", choices=suite_names() + ["all"],
                           help="suite to run (repeatable; default all)")
            p.add_argument("--seed", type=int, default=None)
            p.add_argument("--cases", type=int, default=None)
            p.add_argument("--m-cap", type=int, default=None)
            p.add_argument("--n-cap", type=int, default=None)
            p.add_argument("--k-cap", type=int, default=None)
            p.add_argument("--out", help="also write the report to this file")
            continue
        p.add_argument("input", nargs="?", default="-", help="JSON input file (default stdin)")
        for name in indices:
            p.add_argument(f"--{name}", type=int, required=True, help="1-based index")
        if verb == "rmat":
            p.add_argument("--d", type=int, default=None)
        if verb == "reseq":
            p.add_argument("--threshold", type=float, default=1e-9, help="float pass threshold")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = None
    try:
        args = build_parser().parse_args(argv)
        if args.verb is None:
            raise _UsageError("ncgrass: a verb is required; see --help")
        env_mode = os.environ.get("NCGRASS_MODE") or None
        if args.mode is None and env_mode is not None:
            if env_mode not in MODES:
                raise _UsageError(f"NCGRASS_MODE must be one of {MODES}")
            if args.verb != "verify":
                args.mode = env_mode
        env_tol = _env_tol()
        args.tol = args.tol_flag if args.tol_flag is not None else (env_tol or DEFAULT_TOL)
        if args.tol <= 0:
            raise _UsageError("tol must be positive")
        handler = VERBS[args.verb][0]
        doc = {} if args.verb == "verify" else _read(args.input)
        result = handler(args, doc)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return USAGE
    except (NcGrassError, KeyError, TypeError, ValueError) as exc:
        print(f"ncgrass {getattr(args, 'verb', '')}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return USAGE
    code = 0
    if isinstance(result, tuple):
        result, code = result
    _emit(result)
    return code


if __name__ == "__main__":
    sys.exit(main())
