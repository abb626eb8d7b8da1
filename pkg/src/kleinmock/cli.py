"""``kleinian`` command line: periods, coefficient tables and verification.

Exit codes: 0 success, 2 data or period failure, 3 extraction failure,
4 failed verification.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import mpmath

from .errors import (InvariantViolation, KleinianError, OrbitNotFound, ParseError,
                     VerificationFailed)
from .newforms import load_orbit
from .numerics import PrecisionContext
from .theta import Characteristic


def _nstr(x, digits: int) -> str:
    return mpmath.nstr(x, digits)


def _matrix_json(A, digits: int) -> list:
    return [[{"re": _nstr(mpmath.mpc(A[i, j]).real, digits), "im": _nstr(mpmath.mpc(A[i, j]).imag, digits)}
             for j in range(A.cols)] for i in range(A.rows)]


def _matrix_text(name: str, A, digits: int) -> str:
    rows = ["  [" + ", ".join(_nstr(A[i, j], digits) for j in range(A.cols)) + "]" for i in range(A.rows)]
    return f"{name} =\n" + "\n".join(rows)


def _resolve(label: str, fetch: bool, fetch_terms: int) -> str:
    """Source string accepted by :func:`load_orbit`, fetching when allowed."""
    try:
        load_orbit(label)
        return label
    except OrbitNotFound:
        if not fetch:
            raise
    from .lmfdb import cached_path, fetch_lmfdb

    path = cached_path(label)
    if path is None:
        fetch_lmfdb(label, fetch_terms)
        path = cached_path(label)
    return str(path)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def _session(args, ctx: PrecisionContext):
    from .mockform import MockFormSession

    src = _resolve(args.label, args.fetch, args.fetch_terms)
    char = Characteristic.parse(args.char) if getattr(args, "char", None) else None
    return MockFormSession.open(src, ctx, args.basis, char)


# ----------------------------------------------------------------------
# commands

def cmd_periods(args) -> int:
    from .mockform import _cached_periods

    ctx = PrecisionContext(args.digits)
    src = _resolve(args.label, args.fetch, args.fetch_terms)
    orbit = load_orbit(src)
    pd = _cached_periods(src, ctx.digits, args.basis)
    shown = min(args.digits, 30)
    if args.format == "json":
        doc = {
            "label": orbit.label,
            "digits": args.digits,
            "basis_mode": pd.basis_mode,
            "divisors": list(pd.divisors),
            "omega": _matrix_json(pd.omega, args.digits),
            "omega_prime": _matrix_json(pd.omega_p, args.digits),
            "Omega": _matrix_json(pd.Omega, args.digits),
            "P": _matrix_json(pd.P, args.digits),
            "J": [list(r) for r in pd.J],
            "T": [list(r) for r in pd.T],
        }
        _emit(json.dumps(doc, indent=1), args.out)
    else:
        parts = [f"# {orbit.label} basis={pd.basis_mode} divisors={list(pd.divisors)}",
                 _matrix_text("omega", pd.omega, shown),
                 _matrix_text("omega'", pd.omega_p, shown),
                 _matrix_text("Omega", pd.Omega, shown),
                 _matrix_text("P", pd.P, shown)]
        _emit("\n".join(parts), args.out)
    return 0


def _targets(words: Sequence[str], g: int) -> tuple:
    kind = words[0]
    if kind == "scalar" and len(words) == 1:
        return "single", ["scalar"]
    if kind in ("component", "preimage") and len(words) == 2:
        return "single", [f"{kind}:{int(words[1])}"]
    if kind == "al" and len(words) == 2:
        Q = int(words[1])
        return "al", [f"alsum:{Q}:{k}" for k in range(1, g + 1)]
    raise ParseError(f"bad --target {' '.join(words)!r}; use scalar, component K, preimage K or al Q")


def cmd_coeffs(args) -> int:
    from .mockform import fourier_extract_many

    ctx = PrecisionContext(args.digits)
    session = _session(args, ctx)
    try:
        mode, targets = _targets(args.target, session.g)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    tables = fourier_extract_many(session, args.nmax, targets, args.y0, ctx)
    if mode == "single":
        tab = tables[targets[0]]
        text = json.dumps(tab.to_json(), indent=1) if args.format == "json" else tab.format_table()
        _emit(text, args.out)
        return 0
    # sum of a component and its Atkin-Lehner image: report scale c_{-1} and ratios c_n / c_{-1}
    docs, lines = [], []
    for t in targets:
        tab = tables[t]
        c = tab[-1]
        ratios = {n: tab[n] / c for n in tab.entries if n != -1}
        doc = tab.to_json()
        doc["scale"] = {"re": _nstr(mpmath.mpc(c).real, args.digits), "im": _nstr(mpmath.mpc(c).imag, args.digits)}
        doc["ratios"] = [{"n": n, "re": _nstr(mpmath.mpc(v).real, 20), "im": _nstr(mpmath.mpc(v).imag, 20)}
                         for n, v in sorted(ratios.items())]
        docs.append(doc)
        lines.append(tab.format_table())
        lines.append(f"scale c_-1 = {_nstr(c, 15)}")
        lines.append("ratios c_n/c_-1: " + ", ".join(f"{n}: {_nstr(mpmath.mpc(v).real, 12)}"
                                                    for n, v in sorted(ratios.items())))
    text = json.dumps({"label": session.orbit.label, "tables": docs}, indent=1) \
        if args.format == "json" else "\n".join(lines)
    _emit(text, args.out)
    return 0


def cmd_verify(args) -> int:
    from .diagnostics import report_json, verify

    ctx = PrecisionContext(args.digits)
    try:
        session = _session(args, ctx)
    except (InvariantViolation, ParseError) as exc:
        if isinstance(exc, OrbitNotFound):
            raise
        raise VerificationFailed(f"orbit validation: {type(exc).__name__}: {exc}") from exc
    result = verify(session, ctx)
    doc = report_json(result)
    if args.format == "json":
        _emit(json.dumps(doc, indent=1), args.out)
    else:
        lines = [f"# {doc['label']} char={doc['characteristic']} basis={doc['basis_mode']} digits={doc['digits']}"]
        for c in doc["checks"]:
            flag = "PASS" if c["passed"] else "FAIL"
            extra = f" [{c['detail']}]" if c["detail"] else ""
            lines.append(f"{flag}  {c['name']}: residual {c['residual']} (tol {c['tol']}){extra}")
        lines.append("PASS" if doc["passed"] else "FAIL")
        _emit("\n".join(lines), args.out)
    if not result["passed"]:
        first = next(c for c in result["checks"] if not c.passed)
        raise VerificationFailed(f"check failed: {first.name}")
    return 0


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kleinian", description="Kleinian mock modular forms")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("label", help="orbit label (e.g. 23.2.a.a), bare level, or fixture JSON path")
        p.add_argument("--digits", type=int, default=40)
        p.add_argument("--basis", choices=["auto", "fixture"], default="fixture")
        p.add_argument("--fetch", action="store_true", help="allow downloading the orbit from LMFDB")
        p.add_argument("--fetch-terms", type=int, default=5000, help="coefficients to fetch")
        p.add_argument("--format", choices=["json", "table"], default="table")
        p.add_argument("--out", default=None)

    p = sub.add_parser("periods", help="period matrix, Omega and P")
    common(p)
    p.set_defaults(func=cmd_periods)

    p = sub.add_parser("coeffs", help="Fourier coefficients of the meromorphic part")
    common(p)
    p.add_argument("--nmax", type=int, default=20)
    p.add_argument("--target", nargs="+", default=["scalar"],
                   help="scalar | component K | preimage K | al Q")
    p.add_argument("--y0", type=float, default=0.35)
    p.add_argument("--char", default=None, help="theta characteristic 'a1,a2;b1,b2'")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("verify", help="invariance, xi_0 and Laplacian checks")
    common(p)
    p.add_argument("--char", default=None)
    p.set_defaults(func=cmd_verify)
    return parser


HINTS = {
    "PoleOnHorocycle": "raise --y0",
    "InconsistentExtraction": "raise --y0 or --digits",
    "InsufficientTerms": "lower --digits or use a fixture with more coefficients",
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        PrecisionContext(args.digits)
    except ValueError as exc:
        parser.error(str(exc))
    try:
        return args.func(args)
    except KleinianError as exc:
        name = type(exc).__name__
        msg = f"error: {name}: {exc}"
        if name in HINTS:
            msg += f" (hint: {HINTS[name]})"
        print(msg, file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
