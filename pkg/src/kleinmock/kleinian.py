"""Completed Kleinian zeta function and its relatives.

Everything is expressed through theta functions of ``v = omega^-1 u``:

* ``zeta_hat(u) = (grad theta / theta)(v) omega^-1 + 2 pi i Im(v)^tr Y^-1 omega^-1``
* ``wp_reduced(u) = -omega^-tr Hess(log theta)(v) omega^-1``
* ``sigma(u) = exp(u^tr omega^-1 eta u / 2) theta(v)`` when quasi-periods are given.

Row vectors are returned as plain lists.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import mpmath
from mpmath import mp

from .errors import MissingQuasiPeriods, NearThetaDivisor
from .numerics import PrecisionContext, conj
from .periods import PeriodData
from .theta import Characteristic, ThetaPlan, plan, theta_derivatives


@dataclass(frozen=True)
class KleinianContext:
    """Period data, characteristic and theta plan bundled for repeated evaluation."""

    periods: PeriodData
    char: Characteristic
    tplan: ThetaPlan
    omega_inv: mpmath.matrix
    Yinv: mpmath.matrix
    holo_corr: mpmath.matrix
    anti_corr: mpmath.matrix
    eta: Optional[mpmath.matrix] = None

    @property
    def g(self) -> int:
        return self.periods.g

    @classmethod
    def build(cls, periods: PeriodData, char: Characteristic, ctx: PrecisionContext,
              eta: Optional[mpmath.matrix] = None, extra_digits: int = 0) -> "KleinianContext":
        if char.g != periods.g:
            raise ValueError("characteristic dimension does not match the genus")
        if eta is not None and (eta.rows, eta.cols) != (periods.g, periods.g):
            raise ValueError("eta must be g x g")
        tp = plan(periods.Omega, ctx, extra_digits)
        with mp.workdps(tp.digits + 10):
            wi = mpmath.inverse(periods.omega)
            Y = periods.Y
            Yi = mpmath.inverse(Y)
            # 2 pi i Im(v)^tr Y^-1 w^-1 = pi u^tr (w Y w^tr)^-1 - pi conj(u)^tr (w Y conj(w)^tr)^-1
            holo = mpmath.pi * mpmath.inverse(periods.omega * Y * periods.omega.T)
            anti = mpmath.pi * mpmath.inverse(periods.omega * Y * conj(periods.omega).T)
        return cls(periods, char, tp, wi, Yi, holo, anti, eta)


def _col(u: Sequence) -> mpmath.matrix:
    return mpmath.matrix([mpmath.mpc(x) for x in u])


def _theta_data(u: Sequence, k: KleinianContext, ctx: PrecisionContext, order: int):
    v = k.omega_inv * _col(u)
    vs = [v[i] for i in range(k.g)]
    th, gr, H, _ = theta_derivatives(vs, k.char, k.tplan, ctx, order=order)
    # largest term is bounded by exp(pi Im v^tr Y^-1 Im v)
    imv = mpmath.matrix([x.imag for x in vs])
    log_scale = mpmath.pi * (imv.T * k.Yinv * imv)[0]
    if th == 0 or mpmath.log(abs(th)) - log_scale < -(ctx.digits // 2) * mpmath.log(10):
        raise NearThetaDivisor("theta vanishes to working precision at omega^-1 u")
    return v, th, gr, H


def theta_quotient(u: Sequence, k: KleinianContext, ctx: PrecisionContext) -> list:
    """Row vector ``(grad theta / theta)(omega^-1 u) omega^-1``."""
    with mp.workdps(k.tplan.digits + 10):
        v, th, gr, _ = _theta_data(u, k, ctx, 1)
        row = mpmath.matrix([[x / th for x in gr]]) * k.omega_inv
        return [row[0, j] for j in range(k.g)]


def zeta_hat(u: Sequence, k: KleinianContext, ctx: PrecisionContext) -> list:
    """Completed, lattice-invariant Kleinian zeta function at ``u``.

    Raises
    ------
    NearThetaDivisor
    """
    with mp.workdps(k.tplan.digits + 10):
        v, th, gr, _ = _theta_data(u, k, ctx, 1)
        row = mpmath.matrix([[x / th for x in gr]]) * k.omega_inv
        imv = mpmath.matrix([[x.imag for x in v]])
        corr = 2j * mpmath.pi * (imv * k.Yinv * k.omega_inv)
        out = row + corr
        return [out[0, j] for j in range(k.g)]


def zeta_holomorphic(u: Sequence, k: KleinianContext, ctx: PrecisionContext) -> list:
    """``zeta_hat(u) + pi conj(u)^tr (P^tr)^-1``: the part of ``zeta_hat`` holomorphic in ``u``.

    Computed as theta quotient plus ``pi u^tr (omega Y omega^tr)^-1``.
    """
    with mp.workdps(k.tplan.digits + 10):
        q = theta_quotient(u, k, ctx)
        h = _col(u).T * k.holo_corr
        return [q[j] + h[0, j] for j in range(k.g)]


def completion_terms(u: Sequence, k: KleinianContext, ctx: PrecisionContext) -> tuple:
    """Both forms of the real-linear correction, for consistency checks.

    Returns ``(2 pi i Im(v)^tr Y^-1 omega^-1, pi u^tr (w Y w^tr)^-1 - pi conj(u)^tr (P^tr)^-1)``.
    """
    with mp.workdps(k.tplan.digits + 10):
        uc = _col(u)
        v = k.omega_inv * uc
        imv = mpmath.matrix([[v[i].imag for i in range(k.g)]])
        a = 2j * mpmath.pi * (imv * k.Yinv * k.omega_inv)
        Pt_inv = mpmath.inverse(k.periods.P.T)
        b = uc.T * k.holo_corr - mpmath.pi * (conj(uc).T * Pt_inv)
        return [a[0, j] for j in range(k.g)], [b[0, j] for j in range(k.g)]


def wp_reduced(u: Sequence, k: KleinianContext, ctx: PrecisionContext) -> mpmath.matrix:
    """``-Hess(log theta)`` pulled back to ``u``; the Kleinian wp-matrix when ``eta`` is set.

    Without ``eta`` this differs from the wp-matrix by the constant
    symmetric matrix ``sym(omega^-1 eta)``.
    """
    g = k.g
    with mp.workdps(k.tplan.digits + 10):
        v, th, gr, H = _theta_data(u, k, ctx, 2)
        L = mpmath.matrix(g, g)
        for i in range(g):
            for j in range(g):
                L[i, j] = H[i, j] / th - gr[i] * gr[j] / (th * th)
        out = -(k.omega_inv.T * L * k.omega_inv)
        if k.eta is not None:
            A = k.omega_inv * k.eta
            out = out - (A + A.T) / 2
        return out


def sigma(u: Sequence, k: KleinianContext, ctx: PrecisionContext):
    """Kleinian sigma with characteristic ``k.char``.

    Raises
    ------
    MissingQuasiPeriods
        If the context carries no ``eta``.
    """
    if k.eta is None:
        raise MissingQuasiPeriods("sigma needs the quasi-period matrix eta")
    with mp.workdps(k.tplan.digits + 10):
        uc = _col(u)
        v = k.omega_inv * uc
        th, _, _, _ = theta_derivatives([v[i] for i in range(k.g)], k.char, k.tplan, ctx, order=0)
        quad = (uc.T * k.omega_inv * k.eta * uc)[0] / 2
        return mpmath.exp(quad) * th
