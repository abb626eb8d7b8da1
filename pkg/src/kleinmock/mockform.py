"""The mock modular form ``tau -> zeta_hat(E(tau))`` and its Fourier coefficients.

A :class:`MockFormSession` bundles an orbit with its period data and theta
characteristic.  Evaluations return row vectors (lists) indexed by the
embeddings of the Hecke field.  :func:`fourier_extract` samples a target
function on two horocycles and returns a :class:`CoefficientTable`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

import mpmath
from mpmath import mp

from .errors import (InconsistentExtraction, NearThetaDivisor, ParseError,
                     PoleOnHorocycle)
from .kleinian import KleinianContext, zeta_hat, zeta_holomorphic
from .newforms import EichlerVector, NewformOrbit, load_orbit
from .numerics import PrecisionContext, rational_reconstruct
from .periods import GroupElement, PeriodData, compute_periods, load_homology
from .theta import Characteristic

DEFAULT_Y0 = 0.35
HEIGHT_STEP = 0.25


# ----------------------------------------------------------------------
# sessions

@lru_cache(maxsize=32)
def _cached_periods(source: str, digits: int, basis: str) -> PeriodData:
    return compute_periods(load_orbit(source), PrecisionContext(digits), basis)


def default_characteristic(orbit: NewformOrbit, basis: str) -> Characteristic:
    """Characteristic stored with the homology fixture, else the first odd one."""
    fx = load_homology(orbit.level) if basis == "fixture" else None
    if fx is not None:
        ch = Characteristic(fx.alpha, fx.beta)
        if any(fx.alpha) or any(fx.beta):
            return ch
    g = orbit.degree
    return Characteristic((Fraction(1, 2),) * g, (Fraction(1, 2),) + (Fraction(0),) * (g - 1)) \
        if g > 1 else Characteristic((Fraction(1, 2),), (Fraction(1, 2),))


@dataclass(frozen=True)
class MockFormSession:
    """Immutable evaluation context for one orbit at one precision."""

    orbit: NewformOrbit
    ctx: PrecisionContext
    kctx: KleinianContext
    eichler: EichlerVector
    basis: str
    source: str

    @property
    def g(self) -> int:
        return self.orbit.degree

    @property
    def periods(self) -> PeriodData:
        return self.kctx.periods

    @property
    def char(self) -> Characteristic:
        return self.kctx.char

    @classmethod
    def open(cls, source: str, ctx: PrecisionContext, basis: str = "fixture",
             char: Optional[Characteristic] = None) -> "MockFormSession":
        """Load ``source`` (label, level or path) and compute its periods.

        Period data is cached per ``(source, digits, basis)``.
        """
        if basis not in ("fixture", "auto"):
            raise ParseError(f"unknown basis mode {basis!r}")
        orbit = load_orbit(source)
        pd = _cached_periods(str(source), ctx.digits, basis)
        if char is None:
            char = default_characteristic(orbit, pd.basis_mode)
        kctx = KleinianContext.build(pd, char, ctx)
        return cls(orbit, ctx, kctx, EichlerVector(orbit), pd.basis_mode, str(source))

    def with_digits(self, digits: int) -> "MockFormSession":
        return MockFormSession.open(self.source, PrecisionContext(digits), self.basis, self.char)

    def with_char(self, char: Characteristic) -> "MockFormSession":
        kctx = KleinianContext.build(self.periods, char, self.ctx)
        return MockFormSession(self.orbit, self.ctx, kctx, self.eichler, self.basis, self.source)


# ----------------------------------------------------------------------
# pointwise evaluations

def eichler_vector(tau, session: MockFormSession, ctx: Optional[PrecisionContext] = None) -> list:
    """``E_j(tau) = sum a_j(n)/n q^n`` for every embedding ``j``."""
    return session.eichler(tau, ctx or session.ctx)


def _pt_inverse(session: MockFormSession) -> mpmath.matrix:
    return mpmath.inverse(session.periods.P.T)


def zhat_V(tau, session: MockFormSession, ctx: Optional[PrecisionContext] = None) -> list:
    """``zeta_hat(E(tau))``, a Gamma_0(N)-invariant function of ``tau``.

    Raises
    ------
    NearThetaDivisor
    """
    ctx = ctx or session.ctx
    return zeta_hat(eichler_vector(tau, session, ctx), session.kctx, ctx)


def _antiholomorphic(u: Sequence, session: MockFormSession) -> list:
    Pti = _pt_inverse(session)
    row = mpmath.matrix([[mpmath.conj(x) for x in u]]) * Pti
    return [mpmath.pi * row[0, j] for j in range(session.g)]


def mero_part(tau, session: MockFormSession, ctx: Optional[PrecisionContext] = None) -> list:
    """``zhat_V(tau) + pi conj(E(tau))^tr (P^tr)^-1``, holomorphic in ``tau``."""
    ctx = ctx or session.ctx
    with mp.workdps(session.kctx.tplan.digits + 10):
        u = eichler_vector(tau, session, ctx)
        z = zeta_hat(u, session.kctx, ctx)
        a = _antiholomorphic(u, session)
        return [z[j] + a[j] for j in range(session.g)]


def _normalize(row: Sequence, session: MockFormSession) -> list:
    # sign chosen so the result is a xi_0-preimage of f_j itself
    P = session.periods.P
    g = session.g
    return [-mpmath.fsum(row[i] * P[i, j] for i in range(g)) / (4 * mpmath.pi ** 2)
            for j in range(g)]


def normalized_preimages(tau, session: MockFormSession, ctx: Optional[PrecisionContext] = None) -> list:
    """``-mero_part(tau) P / (4 pi^2)``; component ``j`` maps to ``f_j`` under xi_0."""
    with mp.workdps(session.kctx.tplan.digits + 10):
        return _normalize(mero_part(tau, session, ctx), session)


def scalar_zv(tau, session: MockFormSession, ctx: Optional[PrecisionContext] = None):
    """Sum of the components of :func:`mero_part`."""
    with mp.workdps(session.kctx.tplan.digits + 10):
        return mpmath.fsum(mero_part(tau, session, ctx))


# ----------------------------------------------------------------------
# Atkin-Lehner involutions

def al_sign(orbit: NewformOrbit, Q: int) -> int:
    """Eigenvalue of ``W_Q`` from the stored prime-power signs."""
    N = orbit.level
    if Q <= 0 or N % Q or math.gcd(Q, N // Q) != 1:
        raise ValueError(f"{Q} is not an exact divisor of {N}")
    if Q == 1:
        return 1
    if Q in orbit.al_signs:
        return int(orbit.al_signs[Q])
    sign = 1
    rest = Q
    p = 2
    while rest > 1:
        if rest % p == 0:
            pe = 1
            while N % (pe * p) == 0:
                pe *= p
            while rest % p == 0:
                rest //= p
            if pe not in orbit.al_signs:
                raise ParseError(f"no Atkin-Lehner sign for {pe}")
            sign *= int(orbit.al_signs[pe])
        p += 1
    return sign


def al_matrix(N: int, Q: int) -> tuple:
    """Integer entries ``(a, b, c, d)`` of a matrix ``W_Q`` of determinant ``Q``."""
    if Q == 1:
        return (1, 0, 0, 1)
    if Q == N:
        return (0, -1, N, 0)
    R = N // Q
    # Q w - R y = 1 with x = z = 1
    w = pow(Q, -1, R)
    y = (Q * w - 1) // R
    return (Q, y, N, Q * w)


def _mobius(m: tuple, tau):
    a, b, c, d = m
    return (a * tau + b) / (c * tau + d)


def _al_base_points(N: int, Q: int) -> list:
    a, b, c, d = al_matrix(N, Q)
    inv = (d, -b, -c, a)
    cands = []
    for xs in range(-4, 5):
        for ts in range(1, 41):
            tau = mpmath.mpc(mpmath.mpf(xs) / 8, mpmath.mpf(ts) / (20 * math.sqrt(N)))
            other = _mobius(inv, tau)
            cands.append((min(tau.imag, other.imag), tau))
    cands.sort(key=lambda t: -t[0])
    first = mpmath.mpc(0, 1 / mpmath.sqrt(N))
    if Q != N:
        first = cands[0][1]
    second = next(t for s, t in cands if abs(t - first) > mpmath.mpf("0.01"))
    return [first, second]


def al_L_value(Q: int, session: MockFormSession, ctx: Optional[PrecisionContext] = None) -> list:
    """``L_Q = E(W_Q^-1 tau0) - lambda_Q E(tau0)``, checked at a second base point."""
    ctx = ctx or session.ctx
    orbit = session.orbit
    N = orbit.level
    lam = al_sign(orbit, Q)
    if Q == 1:
        return [mpmath.mpc(0)] * session.g
    a, b, c, d = al_matrix(N, Q)
    inv = (d, -b, -c, a)
    vals = []
    with ctx.work(10):
        for tau0 in _al_base_points(N, Q):
            e1 = session.eichler(_mobius(inv, tau0), ctx)
            e0 = session.eichler(tau0, ctx)
            vals.append([e1[j] - lam * e0[j] for j in range(session.g)])
        scale = max([mpmath.mpf(1)] + [abs(x) for x in vals[0]])
        if max(abs(x - y) for x, y in zip(*vals)) > 4 * ctx.eps * scale:
            raise InconsistentExtraction("L_Q depends on the base point")
    return vals[0]


def al_mero_part(tau, Q: int, session: MockFormSession, L: Sequence,
                 ctx: Optional[PrecisionContext] = None) -> list:
    """Meromorphic part of ``zeta_hat(lambda_Q (E(tau) - L_Q))``."""
    ctx = ctx or session.ctx
    lam = al_sign(session.orbit, Q)
    with mp.workdps(session.kctx.tplan.digits + 10):
        e = eichler_vector(tau, session, ctx)
        u = [lam * (e[j] - L[j]) for j in range(session.g)]
        return zeta_holomorphic(u, session.kctx, ctx)


# ----------------------------------------------------------------------
# Fourier extraction

@dataclass
class CoefficientTable:
    """Fourier coefficients ``c_n`` for ``n`` in ``[-1, n_out]``."""

    entries: dict
    rationals: dict
    label: str = ""
    target: str = "scalar"
    characteristic: str = ""
    basis_mode: str = ""
    y0: float = DEFAULT_Y0
    samples: int = 0
    digits: int = 40
    consistency: Optional[mpmath.mpf] = None
    meta: dict = field(default_factory=dict)

    def __getitem__(self, n: int):
        return self.entries[n]

    @property
    def n_out(self) -> int:
        return max(self.entries)

    def to_json(self) -> dict:
        out = {
            "label": self.label,
            "target": self.target,
            "characteristic": self.characteristic,
            "basis_mode": self.basis_mode,
            "y0": self.y0,
            "samples": self.samples,
            "digits": self.digits,
            "consistency": None if self.consistency is None else mpmath.nstr(self.consistency, 5),
            "entries": [],
        }
        for n in sorted(self.entries):
            v = mpmath.mpc(self.entries[n])
            r = self.rationals.get(n)
            out["entries"].append({
                "n": n,
                "re": mpmath.nstr(v.real, self.digits, min_fixed=-mpmath.inf, max_fixed=mpmath.inf),
                "im": mpmath.nstr(v.imag, self.digits, min_fixed=-mpmath.inf, max_fixed=mpmath.inf),
                "rational": None if r is None else str(r),
            })
        return out

    def format_table(self) -> str:
        lines = [f"# {self.label} target={self.target} char={self.characteristic} "
                 f"basis={self.basis_mode} y0={self.y0} M={self.samples}"]
        for n in sorted(self.entries):
            v = mpmath.mpc(self.entries[n])
            r = self.rationals.get(n)
            s = mpmath.nstr(v.real, 15) if abs(v.imag) < mpmath.mpf(10) ** (-self.digits // 2) \
                else f"{mpmath.nstr(v.real, 15)} {'+' if v.imag >= 0 else '-'} {mpmath.nstr(abs(v.imag), 15)}i"
            lines.append(f"{n:>5}  {s}" + (f"  = {r}" if r is not None else ""))
        return "\n".join(lines)


def working_digits(digits: int, n_out: int, y) -> int:
    """Digits needed so that ``e^(2 pi n y)`` amplification keeps ``digits`` correct."""
    return digits + math.ceil(2 * math.pi * n_out * float(y) / math.log(10)) + 10


def sample_count(n_out: int, y0, digits: int) -> int:
    """Power of two large enough for ``n_out`` and for aliasing at ``y0``.

    The aliasing estimate allows coefficient growth up to ``exp(2 pi 0.6 y0 n)``,
    i.e. poles of the target as high as ``0.6 y0``.
    """
    need = 2 * n_out + 4
    y = float(y0)
    alias = (digits * math.log(10) / (2 * math.pi) + 0.6 * y * n_out) / (0.4 * y)
    need = max(need, math.ceil(alias))
    return 1 << (need - 1).bit_length()


def dft_coefficients(values: Sequence, y, n_min: int, n_max: int) -> dict:
    """``c_n = e^(2 pi n y) / M sum_k F(k/M + iy) e(-kn/M)`` at the active precision."""
    M = len(values)
    y = mpmath.mpf(y)
    roots = [mpmath.expjpi(-2 * mpmath.mpf(k) / M) for k in range(M)]
    out = {}
    for n in range(n_min, n_max + 1):
        s = mpmath.fsum(values[k] * roots[(k * n) % M] for k in range(M))
        out[n] = mpmath.exp(2 * mpmath.pi * n * y) * s / M
    return out


def sample_horocycle(fn: Callable, y, M: int) -> list:
    """Evaluates ``fn`` at ``k/M + iy``; theta-divisor hits become :class:`PoleOnHorocycle`."""
    y = mpmath.mpf(y)
    out = []
    for k in range(M):
        tau = mpmath.mpc(mpmath.mpf(k) / M, y)
        try:
            out.append(fn(tau))
        except NearThetaDivisor as exc:
            raise PoleOnHorocycle(
                f"pole near tau = {mpmath.nstr(tau, 8)}; choose a larger y0") from exc
    return out


def recognize(entries: dict, max_den: int, tol) -> dict:
    """Rationals attached to real entries; failures map to ``None``."""
    out = {}
    for n, v in entries.items():
        v = mpmath.mpc(v)
        r = None
        if abs(v.imag) <= tol:
            r = rational_reconstruct(v.real, max_den, tol)
        out[n] = r
    return out


TARGETS = ("scalar", "component", "preimage", "al", "alcomponent", "alsum")


def parse_target(target: str) -> tuple:
    """``"scalar" | "component:k" | "preimage:k" | "al:Q" | "alcomponent:Q:k" | "alsum:Q:k"``."""
    parts = str(target).split(":")
    kind = parts[0]
    try:
        args = tuple(int(x) for x in parts[1:])
    except ValueError as exc:
        raise ParseError(f"bad target {target!r}") from exc
    arity = {"scalar": 0, "component": 1, "preimage": 1, "al": 1, "alcomponent": 2, "alsum": 2}
    if kind not in arity or len(args) != arity[kind]:
        raise ParseError(f"bad target {target!r}")
    return (kind,) + args


def _evaluator(session: MockFormSession, targets: Sequence[tuple]) -> Callable:
    g = session.g
    for t in targets:
        if t[0] in ("component", "preimage") and not 1 <= t[1] <= g:
            raise ParseError(f"component index {t[1]} out of range 1..{g}")
        if t[0] in ("alcomponent", "alsum") and not 1 <= t[2] <= g:
            raise ParseError(f"component index {t[2]} out of range 1..{g}")
    qs = sorted({t[1] for t in targets if t[0] in ("al", "alcomponent", "alsum")})
    Ls = {Q: al_L_value(Q, session) for Q in qs}
    need_plain = any(t[0] in ("scalar", "component", "preimage", "alsum") for t in targets)

    def fn(tau):
        plain = mero_part(tau, session) if need_plain else None
        al = {Q: al_mero_part(tau, Q, session, Ls[Q]) for Q in qs}
        out = []
        for t in targets:
            kind = t[0]
            if kind == "scalar":
                out.append(mpmath.fsum(plain))
            elif kind == "component":
                out.append(plain[t[1] - 1])
            elif kind == "preimage":
                out.append(_normalize(plain, session)[t[1] - 1])
            elif kind == "al":
                out.append(mpmath.fsum(al[t[1]]))
            elif kind == "alcomponent":
                out.append(al[t[1]][t[2] - 1])
            else:
                out.append(plain[t[2] - 1] + al[t[1]][t[2] - 1])
        return out

    return fn


def fourier_extract_many(session: MockFormSession, n_out: int, targets: Sequence[str],
                         y0=DEFAULT_Y0, ctx: Optional[PrecisionContext] = None,
                         M: Optional[int] = None) -> dict:
    """Tables for several targets from one pair of horocycle samplings.

    Returns ``{target: CoefficientTable}``.

    Raises
    ------
    PoleOnHorocycle
    InconsistentExtraction
        When the tables from heights ``y0`` and ``y0 + 1/4`` differ by more
        than ``10^(-D/4)`` in some entry.
    """
    ctx = ctx or session.ctx
    if n_out < 0:
        raise ValueError("n_out must be non-negative")
    parsed = [parse_target(t) for t in targets]
    D = ctx.digits
    y0 = mpmath.mpf(y0) if not isinstance(y0, str) else mpmath.mpf(y0)
    if y0 <= 0:
        raise ValueError("y0 must be positive")
    M = M or sample_count(n_out, y0, D)
    if M < 2 * (n_out + 2):
        raise ValueError(f"M = {M} is below 2 (n_out + 2)")
    tables = []
    for y in (y0, y0 + mpmath.mpf(HEIGHT_STEP)):
        Dw = working_digits(D, n_out, y)
        s = session if Dw <= session.ctx.digits else session.with_digits(Dw)
        wctx = PrecisionContext(Dw)
        with mp.workdps(Dw + 10):
            fn = _evaluator(s, parsed)
            vals = sample_horocycle(fn, y, M)
            tables.append([dft_coefficients([v[i] for v in vals], y, -1, n_out)
                           for i in range(len(parsed))])
    tol_consistency = mpmath.mpf(10) ** (-(D / 4))
    tol_recog = mpmath.mpf(10) ** (-(D // 2))
    out = {}
    for i, t in enumerate(targets):
        lo, hi = tables[0][i], tables[1][i]
        diff = max(abs(lo[n] - hi[n]) for n in lo)
        if diff > tol_consistency:
            raise InconsistentExtraction(
                f"target {t}: heights {mpmath.nstr(y0, 4)} and {mpmath.nstr(y0 + HEIGHT_STEP, 4)} "
                f"disagree by {mpmath.nstr(diff, 5)}; increase M or y0")
        with ctx.work():
            entries = {n: +lo[n] for n in lo}
        out[t] = CoefficientTable(
            entries=entries,
            rationals=recognize(entries, 4 * max(n_out, 1), tol_recog),
            label=session.orbit.label,
            target=t,
            characteristic=session.char.label(),
            basis_mode=session.basis,
            y0=float(y0),
            samples=M,
            digits=D,
            consistency=diff,
        )
    return out


def fourier_extract(session: MockFormSession, n_out: int, y0=DEFAULT_Y0,
                    ctx: Optional[PrecisionContext] = None, target: str = "scalar",
                    M: Optional[int] = None) -> CoefficientTable:
    """Coefficient table of one target (default :func:`scalar_zv`)."""
    return fourier_extract_many(session, n_out, [target], y0, ctx, M)[target]


def al_expansion(Q: int, session: MockFormSession, n_out: int,
                 ctx: Optional[PrecisionContext] = None, y0=DEFAULT_Y0,
                 component: Optional[int] = None) -> CoefficientTable:
    """Table of the transformed function ``zeta_hat(lambda_Q (E - L_Q))``.

    Without ``component`` the components are summed.
    """
    target = f"al:{Q}" if component is None else f"alcomponent:{Q}:{component}"
    return fourier_extract(session, n_out, y0, ctx, target)


def extract_function(fn: Callable, n_out: int, y0, ctx: PrecisionContext,
                     M: Optional[int] = None) -> CoefficientTable:
    """Extraction of an arbitrary scalar function of ``tau`` (same two-height check)."""
    M = M or sample_count(n_out, y0, ctx.digits)
    res = []
    for y in (mpmath.mpf(y0), mpmath.mpf(y0) + mpmath.mpf(HEIGHT_STEP)):
        with mp.workdps(working_digits(ctx.digits, n_out, y) + 10):
            res.append(dft_coefficients(sample_horocycle(fn, y, M), y, -1, n_out))
    diff = max(abs(res[0][n] - res[1][n]) for n in res[0])
    if diff > mpmath.mpf(10) ** (-(ctx.digits / 4)):
        raise InconsistentExtraction(f"heights disagree by {mpmath.nstr(diff, 5)}")
    tol = mpmath.mpf(10) ** (-(ctx.digits // 2))
    return CoefficientTable(entries=res[0], rationals=recognize(res[0], 4 * max(n_out, 1), tol),
                            target="custom", y0=float(y0), samples=M, digits=ctx.digits,
                            consistency=diff)
