"""Riemann theta functions with characteristics.

``theta[alpha, beta](u; Omega) = sum_m e((m+alpha)^tr (u+beta) + 1/2 (m+alpha)^tr Omega (m+alpha))``
with ``e(x) = exp(2 pi i x)``.  The sum is taken over an ellipsoid centred at
the dominant term, so the cost does not grow with ``Im u``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import mpmath
from mpmath import mp

from .errors import NearThetaDivisor
from .numerics import PrecisionContext, cholesky, imag_part, max_abs, sym_defect


@dataclass(frozen=True)
class Characteristic:
    """Pair ``(alpha, beta)`` of rational vectors."""

    alpha: tuple
    beta: tuple

    def __post_init__(self):
        if len(self.alpha) != len(self.beta):
            raise ValueError("alpha and beta must have the same length")
        object.__setattr__(self, "alpha", tuple(Fraction(x) for x in self.alpha))
        object.__setattr__(self, "beta", tuple(Fraction(x) for x in self.beta))

    @classmethod
    def zero(cls, g: int) -> "Characteristic":
        return cls((0,) * g, (0,) * g)

    @classmethod
    def parse(cls, text: str) -> "Characteristic":
        """``"1/2,0;1/2,1/2"`` -> alpha = (1/2, 0), beta = (1/2, 1/2)."""
        a, b = text.split(";")
        return cls(tuple(Fraction(x) for x in a.split(",")), tuple(Fraction(x) for x in b.split(",")))

    @property
    def g(self) -> int:
        return len(self.alpha)

    def is_half_integral(self) -> bool:
        return all((2 * x).denominator == 1 for x in self.alpha + self.beta)

    def parity(self) -> int:
        """``+1`` (even) or ``-1`` (odd) for half-integral characteristics."""
        if not self.is_half_integral():
            raise ValueError("parity is defined for half-integral characteristics")
        s = sum(4 * a * b for a, b in zip(self.alpha, self.beta))
        return -1 if int(s) % 2 else 1

    def is_odd(self) -> bool:
        return self.is_half_integral() and self.parity() == -1

    def label(self) -> str:
        return ",".join(map(str, self.alpha)) + ";" + ",".join(map(str, self.beta))

    def to_json(self) -> dict:
        return {"alpha": [str(x) for x in self.alpha], "beta": [str(x) for x in self.beta]}


def half_integral_characteristics(g: int) -> list[Characteristic]:
    """All ``4^g`` characteristics with entries in ``{0, 1/2}``."""
    half = Fraction(1, 2)
    out = []
    for bits in range(4 ** g):
        v = [half if (bits >> k) & 1 else Fraction(0) for k in range(2 * g)]
        out.append(Characteristic(tuple(v[:g]), tuple(v[g:])))
    return out


@dataclass(frozen=True)
class ThetaPlan:
    """Truncation data for a fixed ``Omega``.

    Attributes
    ----------
    Omega, Y, Yinv : mpmath.matrix
    fp : list of list
        Fincke-Pohst coefficients ``q`` with
        ``x^tr Y x = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2``.
    rho2 : mpf
        Summation ellipsoid ``x^tr Y x <= rho2``.
    radius : mpf
        Euclidean radius ``sqrt(rho2 / lam_min)`` of a ball containing it.
    lam_min : mpf
        Lower bound for the smallest eigenvalue of ``Y``.
    digits : int
        Precision the plan was made for.
    """

    Omega: mpmath.matrix
    Y: mpmath.matrix
    Yinv: mpmath.matrix
    fp: tuple
    rho2: mpmath.mpf
    radius: mpmath.mpf
    lam_min: mpmath.mpf
    digits: int

    @property
    def g(self) -> int:
        return self.Omega.rows

    @property
    def target_tail(self):
        return mpmath.mpf(10) ** (-self.digits - 5)


def _fincke_pohst(Y: mpmath.matrix) -> tuple:
    g = Y.rows
    q = [[mpmath.mpf(0)] * g for _ in range(g)]
    for i in range(g):
        for j in range(g):
            q[i][j] = Y[i, j]
    for i in range(g):
        for j in range(i + 1, g):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, g):
            for l in range(k, g):
                q[k][l] = q[k][l] - q[k][i] * q[i][l]
    return tuple(tuple(r) for r in q)


def _min_eigen_lower_bound(L: mpmath.matrix) -> mpmath.mpf:
    """``1 / ||L^-1||_F^2`` bounds ``lam_min(L L^tr)`` from below."""
    Li = mpmath.inverse(L)
    fro = mpmath.fsum(Li[i, j] ** 2 for i in range(L.rows) for j in range(L.cols))
    return 1 / fro


def tail_radius(lam_min, g: int, digits: int, split: float = 0.9):
    """Ellipsoid size ``rho2`` with ``sum_{Q > rho2} exp(-pi Q) < 10^(-digits-5)``.

    Writing ``exp(-pi Q) <= exp(-pi s rho2) exp(-pi (1-s) Q)`` for ``Q > rho2``
    and bounding each coordinate sum by ``1 + sqrt(1/((1-s) lam_min))`` gives
    the closed form used here.
    """
    s = mpmath.mpf(split)
    lam = mpmath.mpf(lam_min)
    extra = g * mpmath.log(1 + mpmath.sqrt(1 / ((1 - s) * lam)))
    return ((digits + 5) * mpmath.log(10) + extra) / (mpmath.pi * s)


def plan(Omega: mpmath.matrix, ctx: PrecisionContext, extra_digits: int = 0) -> ThetaPlan:
    """Precompute truncation data for ``Omega``.

    Raises
    ------
    NotPositiveDefinite
        If ``Im Omega`` is not positive definite.
    """
    digits = ctx.digits + extra_digits
    with mp.workdps(digits + 10):
        Om = mpmath.matrix(Omega)
        if sym_defect(Om) > ctx.check_eps * max(1, max_abs(Om)):
            raise ValueError("Omega is not symmetric")
        Y = imag_part(Om)
        Y = (Y + Y.T) / 2
        L = cholesky(Y, PrecisionContext(max(20, digits)))
        lam = _min_eigen_lower_bound(L)
        rho2 = tail_radius(lam, Om.rows, digits)
        return ThetaPlan(Omega=Om, Y=Y, Yinv=mpmath.inverse(Y), fp=_fincke_pohst(Y),
                         rho2=rho2, radius=mpmath.sqrt(rho2 / lam), lam_min=lam, digits=digits)


def _rows(fp: tuple, c: Sequence, rho2) -> Iterator[tuple]:
    """Enumerate rows of the ellipsoid.

    Yields ``(fixed, lo, hi)`` where ``fixed = (m_1, ..., m_{g-1})`` are the
    outer coordinates and ``m_0`` runs over ``lo..hi``.
    """
    g = len(c)
    m = [0] * g

    def rec(i, remaining):
        # coordinates i+1..g-1 are fixed in m
        shift = mpmath.fsum(fp[i][j] * (m[j] - c[j]) for j in range(i + 1, g))
        if remaining < 0:
            return
        w = mpmath.sqrt(remaining / fp[i][i])
        lo = int(mpmath.ceil(c[i] - shift - w))
        hi = int(mpmath.floor(c[i] - shift + w))
        if i == 0:
            if lo <= hi:
                yield tuple(m[1:]), lo, hi
            return
        for k in range(lo, hi + 1):
            m[i] = k
            t = k - c[i] + shift
            yield from rec(i - 1, remaining - fp[i][i] * t * t)

    yield from rec(g - 1, rho2)


def theta_derivatives(u: Sequence, char: Characteristic, tp: ThetaPlan, ctx: PrecisionContext,
                      order: int = 1, rho2=None):
    """One pass returning ``(theta, gradient, hessian, scale)``.

    ``gradient`` is ``None`` for ``order < 1`` and ``hessian`` is ``None`` for
    ``order < 2``.  ``scale`` is the sum of the absolute values of the terms,
    the natural magnitude against which cancellation is measured.
    """
    g = tp.g
    if len(u) != g or char.g != g:
        raise ValueError("dimension mismatch")
    rho2 = tp.rho2 if rho2 is None else rho2
    with mp.workdps(max(tp.digits, ctx.digits) + 10):
        u = [mpmath.mpc(x) for x in u]
        Om = tp.Omega
        alpha = [mpmath.mpf(a.numerator) / a.denominator for a in char.alpha]
        beta = [mpmath.mpf(b.numerator) / b.denominator for b in char.beta]
        imu = mpmath.matrix([x.imag for x in u])
        drift = tp.Yinv * imu
        # dominant term sits at m + alpha = -Y^-1 Im u
        c = [-drift[i] - alpha[i] for i in range(g)]
        w = [u[i] + beta[i] for i in range(g)]
        th = mpmath.mpc(0)
        scale = mpmath.mpf(0)
        grad = [mpmath.mpc(0)] * g
        hess = [[mpmath.mpc(0)] * g for _ in range(g)]
        twopii = 2j * mpmath.pi
        B = mpmath.expjpi(Om[0, 0])  # e(Omega_00 / 2) squared per step gives e(Omega_00)
        B2 = B * B
        for fixed, lo, hi in _rows(tp.fp, c, rho2):
            n = [None] + [fixed[k] + alpha[k + 1] for k in range(g - 1)]
            n0 = lo + alpha[0]
            # exponent at the row start
            n[0] = n0
            ex = mpmath.fsum(n[i] * w[i] for i in range(g)) + mpmath.fsum(
                n[i] * Om[i, j] * n[j] for i in range(g) for j in range(g)) / 2
            t = mpmath.expjpi(2 * ex)
            # ratio term(n0 + 1) / term(n0) = e(w_0 + Omega_00 (n0 + 1/2) + sum_{j>0} Omega_0j n_j)
            rex = w[0] + Om[0, 0] * n0 + mpmath.fsum(Om[0, j] * n[j] for j in range(1, g))
            ratio = mpmath.expjpi(2 * rex) * B
            for k in range(lo, hi + 1):
                nk = k + alpha[0]
                th += t
                scale += abs(t)
                if order >= 1:
                    grad[0] += nk * t
                    for i in range(1, g):
                        grad[i] += n[i] * t
                if order >= 2:
                    nv = [nk] + n[1:]
                    for i in range(g):
                        for j in range(i, g):
                            hess[i][j] += nv[i] * nv[j] * t
                t *= ratio
                ratio *= B2
        gr = None
        H = None
        if order >= 1:
            gr = [twopii * x for x in grad]
        if order >= 2:
            H = mpmath.matrix(g, g)
            for i in range(g):
                for j in range(i, g):
                    H[i, j] = H[j, i] = twopii * twopii * hess[i][j]
    out = (th, gr, H, scale)
    return out


def theta(u: Sequence, char: Characteristic, tp: ThetaPlan, ctx: PrecisionContext):
    """Value of the theta function with characteristic ``char`` at ``u``."""
    return theta_derivatives(u, char, tp, ctx, order=0)[0]


def theta_gradient(u: Sequence, char: Characteristic, tp: ThetaPlan, ctx: PrecisionContext) -> list:
    """Gradient with respect to ``u``."""
    return theta_derivatives(u, char, tp, ctx, order=1)[1]


def near_divisor(th, scale, ctx: PrecisionContext) -> bool:
    return scale == 0 or abs(th) <= scale * mpmath.mpf(10) ** (-(ctx.digits // 2))


def log_theta_hessian(u: Sequence, char: Characteristic, tp: ThetaPlan, ctx: PrecisionContext) -> mpmath.matrix:
    """Hessian of ``log theta`` at ``u``.

    Raises
    ------
    NearThetaDivisor
        When ``|theta|`` is below ``10^(-D/2)`` relative to the term scale.
    """
    th, gr, H, scale = theta_derivatives(u, char, tp, ctx, order=2)
    if near_divisor(th, scale, ctx):
        raise NearThetaDivisor("u is on the theta divisor")
    g = tp.g
    with mp.workdps(ctx.digits + 10):
        out = mpmath.matrix(g, g)
        for i in range(g):
            for j in range(g):
                out[i, j] = H[i, j] / th - gr[i] * gr[j] / (th * th)
    return out


def certify_radius(tp: ThetaPlan, ctx: PrecisionContext, probes: Sequence | None = None) -> ThetaPlan:
    """Empirical check of the truncation: enlarging the ellipsoid must not change theta.

    Grows ``rho2`` until the change from one extra unit of radius is below
    the target tail relative to the term scale.
    """
    g = tp.g
    probes = probes or [[mpmath.mpc(0)] * g]
    zero = Characteristic.zero(g)
    rho2 = tp.rho2
    for _ in range(10):
        ok = True
        bigger = (mpmath.sqrt(rho2) + mpmath.sqrt(tp.lam_min)) ** 2
        for u in probes:
            a, _, _, s = theta_derivatives(u, zero, tp, ctx, order=0, rho2=rho2)
            b, _, _, _ = theta_derivatives(u, zero, tp, ctx, order=0, rho2=bigger)
            if abs(a - b) > tp.target_tail * s:
                ok = False
        if ok:
            break
        rho2 = bigger
    if rho2 == tp.rho2:
        return tp
    return ThetaPlan(tp.Omega, tp.Y, tp.Yinv, tp.fp, rho2, mpmath.sqrt(rho2 / tp.lam_min),
                     tp.lam_min, tp.digits)
