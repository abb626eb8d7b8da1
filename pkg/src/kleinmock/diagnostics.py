"""Analytic checks of the completed form: xi_0 image, Laplacian and invariances.

``xi_0 F = -2i conj(dF/d tau-bar)`` is computed by central differences.  For
``F = zeta_hat(E(tau))`` only the term ``-pi conj(E)^tr (P^tr)^-1`` depends on
``tau-bar``, which gives ``xi_0 F = -4 pi^2 f^tr P^-1`` for Hermitian ``P``.
The fit in :func:`shadow_report` determines the sign and transpose
convention empirically rather than assuming it.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import mpmath
from mpmath import mp

from .kleinian import zeta_hat
from .mockform import MockFormSession, zhat_V
from .numerics import PrecisionContext, conj, max_abs
from .periods import GroupElement
from .theta import Characteristic, theta_derivatives

DEFAULT_H = mpmath.mpf("1e-8")


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


def xi0_of(fn: Callable, tau, h) -> list:
    """``-2i conj(dF/d tau-bar)`` of a (vector) function by central differences."""
    h = mpmath.mpf(h)
    tau = mpmath.mpc(tau)
    fx = [_as_list(fn(tau + s * h)) for s in (1, -1)]
    fy = [_as_list(fn(tau + s * 1j * h)) for s in (1, -1)]
    out = []
    for j in range(len(fx[0])):
        dx = (fx[0][j] - fx[1][j]) / (2 * h)
        dy = (fy[0][j] - fy[1][j]) / (2 * h)
        dbar = (dx + 1j * dy) / 2
        out.append(-2j * mpmath.conj(dbar))
    return out


def laplacian_of(fn: Callable, tau, h) -> list:
    """``-y^2 (F_xx + F_yy)`` with the compact nine-point stencil."""
    h = mpmath.mpf(h)
    tau = mpmath.mpc(tau)
    c = _as_list(fn(tau))
    edge = [_as_list(fn(tau + d)) for d in (h, -h, 1j * h, -1j * h)]
    corner = [_as_list(fn(tau + d)) for d in (h + 1j * h, h - 1j * h, -h + 1j * h, -h - 1j * h)]
    y2 = tau.imag ** 2
    out = []
    for j in range(len(c)):
        lap = (4 * mpmath.fsum(e[j] for e in edge) + mpmath.fsum(k[j] for k in corner)
               - 20 * c[j]) / (6 * h * h)
        out.append(-y2 * lap)
    return out


def xi0_image(tau, session: MockFormSession, h=DEFAULT_H,
              ctx: Optional[PrecisionContext] = None) -> list:
    """Finite-difference ``xi_0`` of ``zhat_V`` at ``tau``.

    Raises
    ------
    NearThetaDivisor
    """
    ctx = ctx or session.ctx
    with mp.workdps(session.kctx.tplan.digits + 10):
        return xi0_of(lambda t: zhat_V(t, session, ctx), tau, h)


def laplacian_residual(tau, session: MockFormSession, h=mpmath.mpf("1e-5"),
                       ctx: Optional[PrecisionContext] = None):
    """Largest component of ``|Delta_0 zhat_V(tau)|``."""
    ctx = ctx or session.ctx
    with mp.workdps(session.kctx.tplan.digits + 10):
        vals = laplacian_of(lambda t: zhat_V(t, session, ctx), tau, h)
        return max(abs(v) for v in vals)


# ----------------------------------------------------------------------
# shadow fit

CONVENTIONS = {
    "+4pi^2 f^tr P^-1": lambda P: P ** -1,
    "-4pi^2 f^tr P^-1": lambda P: -(P ** -1),
    "+4pi^2 f^tr (P^tr)^-1": lambda P: P.T ** -1,
    "-4pi^2 f^tr (P^tr)^-1": lambda P: -(P.T ** -1),
    "+4pi^2 f^tr conj(P)^-1": lambda P: conj(P) ** -1,
    "-4pi^2 f^tr conj(P)^-1": lambda P: -(conj(P) ** -1),
}


@dataclass
class ShadowReport:
    """Fitted ``C`` in ``xi_0 zhat_V = f^tr C`` and its comparison with ``4 pi^2 P^-1``."""

    label: str
    points: list
    C: mpmath.matrix
    fit_residual: mpmath.mpf
    convention: str
    convention_residual: mpmath.mpf
    residuals: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        g = self.C.rows
        return {
            "label": self.label,
            "points": [mpmath.nstr(t, 12) for t in self.points],
            "C": [[mpmath.nstr(self.C[i, j], 15) for j in range(g)] for i in range(g)],
            "fit_residual": mpmath.nstr(self.fit_residual, 5),
            "convention": self.convention,
            "convention_residual": mpmath.nstr(self.convention_residual, 5),
            "residuals": {k: mpmath.nstr(v, 5) for k, v in self.residuals.items()},
        }


def default_points(session: MockFormSession, count: int = 5, seed: int = 0) -> list:
    """Sample points well inside the fundamental strip and away from the cusp."""
    rng = random.Random(seed)
    base = [mpmath.mpc(0, 1)]
    while len(base) < count:
        base.append(mpmath.mpc(rng.uniform(-0.5, 0.5), rng.uniform(0.45, 1.2)))
    return base


def shadow_report(session: MockFormSession, ctx: Optional[PrecisionContext] = None,
                  points: Optional[Sequence] = None, h=DEFAULT_H) -> ShadowReport:
    """Fits ``C`` from xi_0 images at ``points`` and selects the matching convention.

    With ``k`` points and genus ``g`` the least-squares problem has ``k g``
    equations for ``g^2`` unknowns; the residual measures constancy of ``C``.
    """
    ctx = ctx or session.ctx
    g = session.g
    points = list(points) if points is not None else default_points(session, max(5, g + 3))
    with mp.workdps(session.kctx.tplan.digits + 10):
        F = mpmath.matrix(len(points), g)
        X = mpmath.matrix(len(points), g)
        for k, tau in enumerate(points):
            f = session.eichler.newform(tau, ctx)
            x = xi0_image(tau, session, h, ctx)
            for j in range(g):
                F[k, j] = f[j]
                X[k, j] = x[j]
        Fh = F.H
        C = mpmath.inverse(Fh * F) * (Fh * X)
        fit = max_abs(F * C - X) / max_abs(X)
        scale = 4 * mpmath.pi ** 2
        P = session.periods.P
        residuals = {}
        for name, rule in CONVENTIONS.items():
            ref = scale * rule(P)
            residuals[name] = max_abs(C - ref) / max_abs(ref)
        best = min(residuals, key=lambda k: residuals[k])
    return ShadowReport(session.orbit.label, list(points), C, fit, best, residuals[best], residuals)


# ----------------------------------------------------------------------
# invariance checks

def random_gamma0(N: int, rng: random.Random, cmax: int = 4) -> GroupElement:
    """Random element of ``Gamma_0(N)`` with ``0 < c <= cmax N``."""
    from math import gcd
    while True:
        c = N * rng.randint(1, cmax)
        d = rng.randint(-3 * c, 3 * c)
        if d and gcd(c, d) == 1:
            a = pow(d, -1, c)
            b = (a * d - 1) // c
            shift = rng.randint(-2, 2)
            return GroupElement(a + shift * c, b + shift * d, c, d)


def gamma0_residual(session: MockFormSession, pairs: int = 10, seed: int = 1,
                    ctx: Optional[PrecisionContext] = None):
    """Largest ``|zhat_V(gamma tau) - zhat_V(tau)|`` over random pairs.

    ``tau = (-d + i t)/c`` keeps both ``tau`` and ``gamma tau`` at height about ``1/c``.
    """
    ctx = ctx or session.ctx
    rng = random.Random(seed)
    worst = mpmath.mpf(0)
    with mp.workdps(session.kctx.tplan.digits + 10):
        for _ in range(pairs):
            gm = random_gamma0(session.orbit.level, rng, 2)
            t = mpmath.mpf(rng.uniform(0.7, 1.4))
            tau = mpmath.mpc(-gm.d, t) / gm.c + mpmath.mpf(rng.uniform(-0.2, 0.2)) / gm.c
            a = zhat_V(tau, session, ctx)
            b = zhat_V(gm.act(tau), session, ctx)
            worst = max(worst, max(abs(x - y) for x, y in zip(a, b)))
    return worst


def lattice_residual(session: MockFormSession, grid: int = 2, points: int = 3, seed: int = 2,
                     ctx: Optional[PrecisionContext] = None):
    """Largest ``|zeta_hat(u + omega m + omega' n) - zeta_hat(u)|`` over a translate grid.

    ``m`` and ``n`` run over ``[-grid, grid]`` along one random direction each,
    which for ``grid = 2`` is a 5 x 5 grid.
    """
    ctx = ctx or session.ctx
    rng = random.Random(seed)
    pd = session.periods
    g = session.g
    worst = mpmath.mpf(0)
    with mp.workdps(session.kctx.tplan.digits + 10):
        for _ in range(points):
            u = [mpmath.mpc(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)) for _ in range(g)]
            z0 = zeta_hat(u, session.kctx, ctx)
            dm = [rng.choice([-1, 0, 1]) for _ in range(g)]
            dn = [rng.choice([-1, 0, 1]) for _ in range(g)]
            dm[0] = dm[0] or 1
            dn[-1] = dn[-1] or 1
            for i in range(-grid, grid + 1):
                for j in range(-grid, grid + 1):
                    m = mpmath.matrix([i * x for x in dm])
                    n = mpmath.matrix([j * x for x in dn])
                    shift = pd.omega * m + pd.omega_p * n
                    z = zeta_hat([u[k] + shift[k] for k in range(g)], session.kctx, ctx)
                    worst = max(worst, max(abs(x - y) for x, y in zip(z, z0)))
    return worst


def theta_quasi_residual(session: MockFormSession, points: int = 3, seed: int = 3,
                         ctx: Optional[PrecisionContext] = None):
    """Relative defect of ``theta(v + m + Omega n) = e(-n^tr v - n^tr Omega n / 2 + alpha m - beta n) theta(v)``."""
    ctx = ctx or session.ctx
    rng = random.Random(seed)
    k = session.kctx
    g = session.g
    Om = k.periods.Omega
    ch = k.char
    alpha = [mpmath.mpf(a.numerator) / a.denominator for a in ch.alpha]
    beta = [mpmath.mpf(b.numerator) / b.denominator for b in ch.beta]
    worst = mpmath.mpf(0)
    with mp.workdps(k.tplan.digits + 10):
        for _ in range(points):
            v = [mpmath.mpc(rng.uniform(-0.4, 0.4), rng.uniform(-0.2, 0.2)) for _ in range(g)]
            m = [rng.randint(-2, 2) for _ in range(g)]
            n = [rng.randint(-1, 1) for _ in range(g)]
            on = Om * mpmath.matrix(n)
            w = [v[i] + m[i] + on[i] for i in range(g)]
            tv = theta_derivatives(v, ch, k.tplan, ctx, order=0)[0]
            tw = theta_derivatives(w, ch, k.tplan, ctx, order=0)[0]
            ex = (-mpmath.fsum(n[i] * v[i] for i in range(g))
                  - mpmath.fsum(n[i] * on[i] for i in range(g)) / 2
                  + mpmath.fsum(alpha[i] * m[i] - beta[i] * n[i] for i in range(g)))
            pred = mpmath.expjpi(2 * ex) * tv
            worst = max(worst, abs(tw - pred) / max(abs(tw), abs(pred)))
    return worst


@dataclass
class Check:
    name: str
    residual: mpmath.mpf
    tol: mpmath.mpf
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)

    def to_json(self) -> dict:
        return {"name": self.name, "residual": mpmath.nstr(self.residual, 5),
                "tol": mpmath.nstr(self.tol, 3), "passed": self.passed, "detail": self.detail}


def verify(session: MockFormSession, ctx: Optional[PrecisionContext] = None) -> dict:
    """Runs every check and returns ``{"label", "passed", "checks", "shadow"}``."""
    ctx = ctx or session.ctx
    D = ctx.digits
    checks = [
        Check("theta quasi-periodicity", theta_quasi_residual(session, ctx=ctx),
              mpmath.mpf(10) ** (10 - D)),
        Check("zeta_hat lattice invariance", lattice_residual(session, ctx=ctx),
              mpmath.mpf(10) ** (10 - D)),
        Check("Gamma_0(N) invariance", gamma0_residual(session, ctx=ctx),
              mpmath.mpf(10) ** (12 - D)),
        Check("Laplacian", laplacian_residual(mpmath.mpc(0, 1), session, ctx=ctx),
              mpmath.mpf("1e-4")),
    ]
    rep = shadow_report(session, ctx)
    checks.append(Check("xi_0 constancy", rep.fit_residual, mpmath.mpf("1e-6")))
    checks.append(Check("xi_0 versus 4 pi^2 P^-1", rep.convention_residual, mpmath.mpf("1e-6"),
                        rep.convention))
    return {
        "label": session.orbit.label,
        "digits": D,
        "characteristic": session.char.label(),
        "basis_mode": session.basis,
        "passed": all(c.passed for c in checks),
        "checks": checks,
        "shadow": rep,
    }


def report_json(result: dict) -> dict:
    out = dict(result)
    out["checks"] = [c.to_json() for c in result["checks"]]
    out["shadow"] = result["shadow"].to_json()
    return out
