"""Period lattices of newform orbits and their symplectic normalization.

The pipeline is

1. collect periods ``E(tau0) - E(gamma tau0)`` of elements of ``Gamma_0(N)``,
2. extract a Z-basis (the big period matrix ``M``),
3. recover an integral polarization ``J`` from the Riemann relations,
4. bring ``J`` to Frobenius form and split ``M T = (omega, omega')``.

Step 1 either uses Reidemeister-Schreier generators (``basis="auto"``) or a
stored list of group elements together with the symplectic transform
(``basis="fixture"``), which pins the basis used for printed tables.
"""
from __future__ import annotations

import itertools
import json
import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from math import gcd
from pathlib import Path
from typing import Optional, Sequence

import mpmath
from mpmath import mp

from .errors import (
    DegenerateForm,
    InvariantViolation,
    NoPolarizationFound,
    NonIntegralCoordinate,
    NotPositiveDefinite,
    OrientationUnfixable,
    ParseError,
    RankDeficient,
)
from .newforms import EichlerVector, NewformOrbit
from .numerics import (
    PrecisionContext,
    cholesky,
    conj,
    herm_defect,
    imag_part,
    int_det,
    int_inverse,
    int_matmul,
    int_matrix_to_mp,
    int_transpose,
    is_positive_definite,
    lattice_basis,
    lll,
    max_abs,
    rational_reconstruct,
    sym_defect,
)

log = logging.getLogger(__name__)


# ----------------------------------------------------------------------
# group elements and cosets

@dataclass(frozen=True)
class GroupElement:
    """Integer matrix ``[[a, b], [c, d]]`` of determinant one."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self.tuple()} is not 1")

    def tuple(self):
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        a, b, c, d = self.tuple()
        e, f, g, h = other.tuple()
        return GroupElement(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def __neg__(self) -> "GroupElement":
        return GroupElement(-self.a, -self.b, -self.c, -self.d)

    def in_gamma0(self, N: int) -> bool:
        return self.c % N == 0

    @property
    def trace(self) -> int:
        return self.a + self.d

    def act(self, tau):
        return (self.a * tau + self.b) / (self.c * tau + self.d)

    def is_identity(self) -> bool:
        return self.tuple() in ((1, 0, 0, 1), (-1, 0, 0, -1))


IDENTITY = GroupElement(1, 0, 0, 1)
S = GroupElement(0, -1, 1, 0)
T = GroupElement(1, 1, 0, 1)
T_INV = GroupElement(1, -1, 0, 1)


def p1_index(N: int) -> dict:
    """Map ``(c mod N, d mod N)`` to the index of its class in ``P^1(Z/N)``."""
    if N == 1:
        return {(0, 0): 0}
    units = [u for u in range(1, N) if gcd(u, N) == 1]
    idx: dict = {}
    k = 0
    for c, d in itertools.chain([(0, 1)], itertools.product(range(N), range(N))):
        if gcd(gcd(c, d), N) != 1 or (c, d) in idx:
            continue
        for u in units:
            idx[(u * c % N, u * d % N)] = k
        k += 1
    return idx


def psi(N: int) -> int:
    out = N
    p, n = 2, N
    while p * p <= n:
        if n % p == 0:
            out = out // p * (p + 1)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out = out // n * (n + 1)
    return out


@lru_cache(maxsize=16)
def _transversal(N: int) -> tuple:
    """Breadth-first Schreier transversal using the steps ``S, T, T^-1``.

    Short words keep the entries of the resulting generators small, which in
    turn keeps the balanced evaluation points high in the upper half-plane.
    """
    idx = p1_index(N)
    key = lambda g: idx[(g.c % N, g.d % N)] if N > 1 else 0
    reps = {0: IDENTITY}
    queue = deque([0])
    while queue:
        k = queue.popleft()
        r = reps[k]
        for s in (S, T, T_INV):
            rs = r @ s
            kk = key(rs)
            if kk not in reps:
                reps[kk] = rs
                queue.append(kk)
    return tuple(reps[k] for k in range(len(reps))), key


def coset_reps(N: int) -> list[GroupElement]:
    """Right coset representatives of ``Gamma_0(N)`` in ``SL_2(Z)``, indexed by ``P^1(Z/N)``."""
    if N < 1:
        raise ValueError("level must be positive")
    return list(_transversal(N)[0])


def schreier_generators(N: int, hyperbolic_only: bool = False) -> list[GroupElement]:
    """Reidemeister-Schreier generators ``rho s rho'^-1`` of ``Gamma_0(N)``.

    With ``hyperbolic_only`` the elliptic and parabolic generators are
    dropped; their weight-2 cusp form periods vanish.
    """
    reps, key = _transversal(N)
    out = []
    seen = set()
    for r in reps:
        for s in (S, T):
            rs = r @ s
            g = rs @ reps[key(rs)].inverse()
            if g.is_identity():
                continue
            if hyperbolic_only and abs(g.trace) <= 2:
                continue
            norm = g if (g.c, g.d) > (0, 0) or (g.c == 0 and g.d > 0) else -g
            if norm.tuple() in seen:
                continue
            seen.add(norm.tuple())
            out.append(g)
    return out


# ----------------------------------------------------------------------
# periods

def balanced_point(g: GroupElement):
    """``tau0`` with ``Im tau0 = Im g tau0 = 1/|c|``; requires ``c != 0``."""
    if g.c < 0:
        g = -g
    return mpmath.mpc(-mpmath.mpf(g.d) / g.c, mpmath.mpf(1) / g.c)


def gamma_period(g: GroupElement, orbit: NewformOrbit, ctx: PrecisionContext,
                 evaluator: Optional[EichlerVector] = None, tau0=None) -> list:
    """``E(tau0) - E(g tau0)`` as a vector over the conjugates.

    Translations (``c = 0``) give the zero vector.  The default base point is
    the balanced one; any ``tau0`` in the upper half-plane gives the same value.
    """
    if g.c % orbit.level:
        raise ValueError(f"{g.tuple()} is not in Gamma_0({orbit.level})")
    if g.c == 0:
        return [mpmath.mpc(0)] * orbit.degree
    E = evaluator or EichlerVector(orbit)
    with ctx.work(5):
        t0 = balanced_point(g) if tau0 is None else mpmath.mpc(tau0)
        t1 = g.act(t0)
        e0 = E(t0, ctx)
        e1 = E(t1, ctx)
        out = [x - y for x, y in zip(e0, e1)]
    return out


def _realify(vecs: Sequence[Sequence]) -> mpmath.matrix:
    """Columns of the 2g x n real matrix ``[Re; Im]`` of complex g-vectors."""
    g = len(vecs[0])
    R = mpmath.zeros(2 * g, len(vecs))
    for j, v in enumerate(vecs):
        for i in range(g):
            R[i, j] = mpmath.re(v[i])
            R[g + i, j] = mpmath.im(v[i])
    return R


def _complexify(R: mpmath.matrix) -> mpmath.matrix:
    g = R.rows // 2
    M = mpmath.matrix(g, R.cols)
    for j in range(R.cols):
        for i in range(g):
            M[i, j] = mpmath.mpc(R[i, j], R[g + i, j])
    return M


def lattice_coordinates(M: mpmath.matrix, v: Sequence, ctx: PrecisionContext):
    """Real coordinates of ``v`` in the R-basis given by the columns of ``M``."""
    R = _realify([[M[i, j] for i in range(M.rows)] for j in range(M.cols)])
    x = mpmath.lu_solve(R, _realify([list(v)]))
    return [x[i] for i in range(x.rows)]


def big_period_matrix(periods: Sequence[Sequence], g: int, ctx: PrecisionContext,
                      max_den: int = 10**6) -> tuple[mpmath.matrix, list[list[int]]]:
    """Z-basis of the lattice spanned by ``periods``.

    Returns the ``g x 2g`` matrix ``M`` and the integer coordinates of every
    input period in that basis.

    Raises
    ------
    RankDeficient
        If fewer than ``2g`` R-independent periods are present.
    NonIntegralCoordinate
        If a period is not a rational combination of the chosen vectors.
    """
    with ctx.work(5):
        nonzero = [p for p in periods if max(abs(x) for x in p) > ctx.check_eps]
        if len(nonzero) < 2 * g:
            raise RankDeficient(f"only {len(nonzero)} nonzero periods")
        # greedy selection of a well-conditioned R-basis (Gram-Schmidt pivots)
        order = sorted(range(len(nonzero)), key=lambda k: -mpmath.norm(mpmath.matrix(
            [abs(x) for x in nonzero[k]])))
        chosen: list[int] = []
        Q: list[mpmath.matrix] = []
        Rall = _realify(nonzero)
        for _ in range(2 * g):
            best, best_norm, best_vec = None, mpmath.mpf(0), None
            for k in order:
                if k in chosen:
                    continue
                v = Rall[:, k]
                for q in Q:
                    v = v - (q.T * v)[0] * q
                nv = mpmath.norm(v) / mpmath.norm(Rall[:, k])
                if nv > best_norm:
                    best, best_norm, best_vec = k, nv, v
            if best is None or best_norm < ctx.check_eps:
                raise RankDeficient(f"period rank below {2 * g}")
            chosen.append(best)
            Q.append(best_vec / mpmath.norm(best_vec))
        B = mpmath.matrix(2 * g, 2 * g)
        for j, k in enumerate(chosen):
            for i in range(2 * g):
                B[i, j] = Rall[i, k]
        X = mpmath.inverse(B) * Rall
        tol = mpmath.mpf(10) ** (-(mp.dps // 2))
        fracs = []
        for j in range(X.cols):
            row = []
            for i in range(2 * g):
                r = rational_reconstruct(X[i, j], max_den, tol)
                if r is None:
                    raise NonIntegralCoordinate(
                        f"period {j} has coordinate {mpmath.nstr(X[i, j], 15)} in the trial basis")
                row.append(r)
            fracs.append(row)
        den = 1
        for row in fracs:
            for x in row:
                den = den * x.denominator // gcd(den, x.denominator)
        H = lattice_basis([[int(x * den) for x in row] for row in fracs])
        if len(H) != 2 * g:
            raise RankDeficient("lattice rank mismatch")
        H = lll(H)
        # new basis vectors, in the trial basis, are H / den
        Hm = mpmath.matrix([[mpmath.mpf(x) / den for x in row] for row in H]).T
        Rnew = B * Hm
        Mnew = _complexify(Rnew)
        coords_all = mpmath.inverse(Rnew) * Rall
        coords = []
        for j in range(coords_all.cols):
            col = [coords_all[i, j] for i in range(2 * g)]
            ints = [int(mpmath.nint(x)) for x in col]
            if max(abs(x - n) for x, n in zip(col, ints)) > ctx.check_eps:
                raise NonIntegralCoordinate(f"period {j} is not in the lattice")
            coords.append(ints)
    return Mnew, coords


# ----------------------------------------------------------------------
# polarization

def _alt_index(g2: int):
    return [(i, j) for i in range(g2) for j in range(i + 1, g2)]


def _alt_from_vec(vec: Sequence[int], g2: int) -> list[list[int]]:
    K = [[0] * g2 for _ in range(g2)]
    for (i, j), x in zip(_alt_index(g2), vec):
        K[i][j] = x
        K[j][i] = -x
    return K


def riemann_residual(M: mpmath.matrix, J: Sequence[Sequence[int]]) -> mpmath.mpf:
    """``max |M J^-1 M^tr|`` entrywise."""
    Ji = int_inverse(J)
    K = mpmath.matrix([[mpmath.mpf(x.numerator) / x.denominator for x in row] for row in Ji])
    return max_abs(M * K * M.T)


def polarization_hermitian(M: mpmath.matrix, J) -> mpmath.matrix:
    """``-i M J^-1 M*``; positive definite for a polarization in our sign convention."""
    Ji = int_inverse(J)
    K = mpmath.matrix([[mpmath.mpf(x.numerator) / x.denominator for x in row] for row in Ji])
    return -1j * (M * K * conj(M).T)


def _pfaffian_abs(J) -> int:
    d = abs(int_det(J))
    r = int(round(d ** 0.5))
    while r * r > d:
        r -= 1
    while (r + 1) * (r + 1) <= d:
        r += 1
    return r


def find_polarization(M: mpmath.matrix, ctx: PrecisionContext, search: int = 3) -> list[list[int]]:
    """Integral alternating ``J`` satisfying both Riemann relations for ``M``.

    ``K = J^-1`` is found as an integer vector in the kernel of the real
    linear map ``K -> M K M^tr``; that kernel (the Neron-Severi lattice in
    this basis) is computed by LLL.  Small combinations of kernel vectors are
    scanned for a positive one and the primitive ``J`` of least Pfaffian wins.

    Raises
    ------
    NoPolarizationFound
    """
    g = M.rows
    g2 = 2 * g
    if M.cols != g2:
        raise ValueError("M must be g x 2g")
    pairs = _alt_index(g2)
    with ctx.work(5):
        # equations: entries (a, b), a <= b, of M K M^tr, real and imaginary parts
        rows = []
        for a in range(g):
            for b in range(a, g):
                coeffs = [M[a, i] * M[b, j] - M[a, j] * M[b, i] for i, j in pairs]
                rows.append([mpmath.re(c) for c in coeffs])
                rows.append([mpmath.im(c) for c in coeffs])
        scale = max(max(abs(x) for x in r) for r in rows) or mpmath.mpf(1)
        W = mpmath.mpf(10) ** int(ctx.digits * 0.6)
        basis = []
        for k in range(len(pairs)):
            basis.append([int(i == k) for i in range(len(pairs))] +
                         [int(mpmath.nint(W * r[k] / scale)) for r in rows])
        red = lll(basis)
        kernel = []
        for v in red:
            k = v[:len(pairs)]
            if not any(k):
                continue
            res = max(abs(mpmath.fsum(r[i] * k[i] for i in range(len(pairs)))) for r in rows)
            if res <= ctx.check_eps * scale * max(1, max(abs(x) for x in k)):
                kernel.append(k)
        if not kernel:
            raise NoPolarizationFound("Riemann relations have no integral solution")
        log.debug("Neron-Severi rank %d", len(kernel))
        best = None
        rng = range(-search, search + 1)
        for coeffs in itertools.product(rng, repeat=len(kernel)):
            if not any(coeffs):
                continue
            vec = [sum(c * k[i] for c, k in zip(coeffs, kernel)) for i in range(len(pairs))]
            K = _alt_from_vec(vec, g2)
            if int_det(K) == 0:
                continue
            Kf = mpmath.matrix(K)
            H = -1j * (M * Kf * conj(M).T)
            if herm_defect(H) > ctx.check_eps * max(1, max_abs(H)) or not is_positive_definite(H, ctx):
                continue
            Jf = int_inverse(K)
            den = 1
            for row in Jf:
                for x in row:
                    den = den * x.denominator // gcd(den, x.denominator)
            J = [[int(x * den) for x in row] for row in Jf]
            cont = 0
            for row in J:
                for x in row:
                    cont = gcd(cont, x)
            J = [[x // cont for x in row] for row in J]
            key = (_pfaffian_abs(J), sum(abs(x) for row in J for x in row), coeffs)
            if best is None or key < best[0]:
                best = (key, J)
        if best is None:
            raise NoPolarizationFound("no positive combination in the search box")
        J = best[1]
        if riemann_residual(M, J) > ctx.check_eps * max(1, max_abs(M)) ** 2:
            raise NoPolarizationFound("first Riemann relation fails for the recovered form")
    return J


def frobenius_normal_form(J: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[int]]:
    """Unimodular ``T`` with ``T^tr J T = [[0, E], [-E, 0]]``, ``E = diag(e_1 | ... | e_g)``.

    Raises
    ------
    DegenerateForm
        If ``J`` is not alternating or is singular.
    """
    n = len(J)
    if n % 2 or any(len(r) != n for r in J):
        raise DegenerateForm("J must be square of even size")
    for i in range(n):
        if J[i][i] != 0 or any(J[i][j] != -J[j][i] for j in range(n)):
            raise DegenerateForm("J is not alternating")
    if int_det(J) == 0:
        raise DegenerateForm("J is singular")
    # basis vectors are the columns of V; B(x, y) = x^tr J y
    V = [[int(i == j) for i in range(n)] for j in range(n)]  # list of column vectors

    def form(x, y):
        return sum(x[i] * J[i][j] * y[j] for i in range(n) for j in range(n) if J[i][j])

    def axpy(y, a, x):
        return [yi + a * xi for yi, xi in zip(y, x)]

    remaining = list(range(n))
    es, fs, divisors = [], [], []
    while remaining:
        while True:
            best = None
            for a, b in itertools.combinations(remaining, 2):
                v = form(V[a], V[b])
                if v and (best is None or abs(v) < abs(best[2])):
                    best = (a, b, v)
            if best is None:
                raise DegenerateForm("form degenerates on a sublattice")
            i, j, d = best
            changed = False
            for l in remaining:
                if l in (i, j):
                    continue
                bil = form(V[i], V[l])
                if bil % d:
                    V[l] = axpy(V[l], -(bil // d), V[j])
                    changed = True
                    break
                bjl = form(V[j], V[l])
                if bjl % d:
                    V[l] = axpy(V[l], bjl // d, V[i])
                    changed = True
                    break
            if changed:
                continue
            for l in remaining:
                if l in (i, j):
                    continue
                bil = form(V[i], V[l])
                bjl = form(V[j], V[l])
                V[l] = axpy(V[l], -(bil // d), V[j])
                V[l] = axpy(V[l], bjl // d, V[i])
            rest = [l for l in remaining if l not in (i, j)]
            bad = None
            for l, m in itertools.combinations(rest, 2):
                if form(V[l], V[m]) % d:
                    bad = l
                    break
            if bad is not None:
                V[i] = axpy(V[i], 1, V[bad])
                continue
            break
        if d < 0:
            V[j] = [-x for x in V[j]]
            d = -d
        es.append(V[i])
        fs.append(V[j])
        divisors.append(d)
        remaining = [l for l in remaining if l not in (i, j)]
    order = sorted(range(len(divisors)), key=lambda k: divisors[k])
    cols = [es[k] for k in order] + [fs[k] for k in order]
    divisors = [divisors[k] for k in order]
    Tm = [[cols[j][i] for j in range(n)] for i in range(n)]
    if abs(int_det(Tm)) != 1:  # pragma: no cover - guarded by construction
        raise DegenerateForm("transform is not unimodular")
    return Tm, divisors


# ----------------------------------------------------------------------
# splitting

@dataclass(frozen=True)
class PeriodData:
    """Normalized period data of an orbit.

    ``Omega`` is ``omega^-1 omega' E^-1`` (equal to ``omega^-1 omega'`` for a
    principal polarization) and ``P`` is the Hermitian pairing matrix.
    """

    M: mpmath.matrix
    J: list
    T: list
    omega: mpmath.matrix
    omega_p: mpmath.matrix
    Omega: mpmath.matrix
    P: mpmath.matrix
    divisors: list
    generator_periods: list = field(default_factory=list)
    basis_mode: str = "auto"

    @property
    def g(self) -> int:
        return self.omega.rows

    @property
    def omega_inv(self) -> mpmath.matrix:
        return mpmath.inverse(self.omega)

    @property
    def Y(self) -> mpmath.matrix:
        return imag_part(self.Omega)

    def lattice_vector(self, m: Sequence[int], n: Sequence[int]) -> mpmath.matrix:
        """``omega m + omega' n``."""
        return self.omega * mpmath.matrix(list(m)) + self.omega_p * mpmath.matrix(list(n))

    def to_json(self, digits: int = 20) -> dict:
        def cm(A):
            return [[[mpmath.nstr(mpmath.re(A[i, j]), digits), mpmath.nstr(mpmath.im(A[i, j]), digits)]
                     for j in range(A.cols)] for i in range(A.rows)]

        return {
            "basis_mode": self.basis_mode,
            "omega": cm(self.omega),
            "omega_prime": cm(self.omega_p),
            "Omega": cm(self.Omega),
            "P": cm(self.P),
            "elementary_divisors": list(self.divisors),
            "J": self.J,
            "T": self.T,
        }


def pairing_matrix(omega: mpmath.matrix, omega_p: mpmath.matrix, ctx: PrecisionContext) -> mpmath.matrix:
    """``(conj(omega) omega'^tr - conj(omega') omega^tr) / 2i``, checked Hermitian positive definite.

    Raises
    ------
    NotPositiveDefinite
    """
    with ctx.work(5):
        P = (conj(omega) * omega_p.T - conj(omega_p) * omega.T) / mpmath.mpc(0, 2)
        if herm_defect(P) > ctx.check_eps * max(1, max_abs(P)):
            raise InvariantViolation("pairing matrix is not Hermitian")
        if not is_positive_definite(P, ctx):
            raise NotPositiveDefinite("pairing matrix is not positive definite")
    return P


def split_periods(M: mpmath.matrix, Tm: Sequence[Sequence[int]], divisors: Sequence[int],
                  ctx: PrecisionContext, J=None, basis_mode: str = "auto") -> PeriodData:
    """Form ``(omega, omega') = M T`` and normalize its orientation.

    Raises
    ------
    OrientationUnfixable
        If no admissible sign/swap yields ``Im Omega > 0``.
    """
    g = M.rows
    Tm = [list(r) for r in Tm]
    Einv = mpmath.diag([mpmath.mpf(1) / e for e in divisors])

    def negate_second(T0):
        return [r[:g] + [-x for x in r[g:]] for r in T0]

    def swap(T0):
        return [r[g:] + r[:g] for r in T0]

    candidates = [Tm, negate_second(Tm), swap(Tm), negate_second(swap(Tm))]
    with ctx.work(5):
        for Tc in candidates:
            MT = M * int_matrix_to_mp(Tc)
            omega = MT[:, 0:g]
            omega_p = MT[:, g:2 * g]
            if abs(mpmath.det(omega)) < ctx.check_eps:
                continue
            Om = mpmath.inverse(omega) * omega_p * Einv
            if sym_defect(Om) > ctx.check_eps * max(1, max_abs(Om)):
                continue
            Om = (Om + Om.T) / 2
            Y = imag_part(Om)
            try:
                cholesky(Y, ctx)
            except NotPositiveDefinite:
                continue
            P = pairing_matrix(omega, omega_p, ctx)
            Jc = J if (J is not None and Tc is Tm) else polarization_from_transform(Tc, divisors)
            return PeriodData(M=M, J=Jc, T=Tc, omega=omega, omega_p=omega_p, Omega=Om, P=P,
                              divisors=list(divisors), basis_mode=basis_mode)
    raise OrientationUnfixable("no orientation gives Im Omega > 0")


def polarization_from_transform(Tm, divisors) -> list[list[int]]:
    """``J = T^-tr [[0, E], [-E, 0]] T^-1``."""
    g = len(divisors)
    std = [[0] * (2 * g) for _ in range(2 * g)]
    for k, e in enumerate(divisors):
        std[k][g + k] = e
        std[g + k][k] = -e
    Ti = int_inverse(Tm)
    J = int_matmul(int_matmul(int_transpose(Ti), std), Ti)
    out = []
    for row in J:
        if any(Fraction(x).denominator != 1 for x in row):
            raise DegenerateForm("transform is not unimodular")
        out.append([int(x) for x in row])
    return out


def pairing_identity_residuals(pd: PeriodData) -> tuple:
    """Residuals of ``omega Y conj(omega)^tr = P^tr`` and of the unconjugated variant."""
    Y = pd.Y
    conj_form = max_abs(pd.omega * Y * conj(pd.omega).T - pd.P.T)
    plain_form = max_abs(pd.omega * Y * pd.omega.T - pd.P)
    return conj_form, plain_form


# ----------------------------------------------------------------------
# homology fixtures and top-level driver

@dataclass(frozen=True)
class HomologyFixture:
    level: int
    elements: tuple
    T: tuple
    alpha: tuple
    beta: tuple
    scale: Fraction = Fraction(1)
    notes: str = ""


def _homology_dir() -> Path:
    return Path(str(resources.files("kleinmock") / "data" / "homology"))


def load_homology(level: int) -> Optional[HomologyFixture]:
    path = _homology_dir() / f"{level}.json"
    if not path.exists():
        return None
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        if doc.get("mode") != "gamma":
            raise ParseError(f"unsupported homology mode {doc.get('mode')!r}")
        elements = tuple(GroupElement(*map(int, e)) for e in doc["elements"])
        return HomologyFixture(
            level=int(doc["level"]),
            elements=elements,
            T=tuple(tuple(int(x) for x in r) for r in doc["T"]),
            alpha=tuple(Fraction(x) for x in doc["characteristic"]["alpha"]),
            beta=tuple(Fraction(x) for x in doc["characteristic"]["beta"]),
            scale=Fraction(doc.get("scale", "1")),
            notes=str(doc.get("notes", "")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed homology fixture for level {level}: {exc!r}") from exc


def compute_periods(orbit: NewformOrbit, ctx: PrecisionContext, basis: str = "fixture") -> PeriodData:
    """Full period pipeline for ``orbit``.

    ``basis="fixture"`` uses the stored cycles and symplectic transform when
    available and falls back to ``"auto"`` otherwise.
    """
    g = orbit.degree
    E = EichlerVector(orbit)
    fixture = load_homology(orbit.level) if basis == "fixture" else None
    with ctx.work(5):
        if fixture is not None:
            for el in fixture.elements:
                if not el.in_gamma0(orbit.level):
                    raise ParseError(f"{el.tuple()} is not in Gamma_0({orbit.level})")
            sc = mpmath.mpf(fixture.scale.numerator) / fixture.scale.denominator
            cols = [[sc * x for x in gamma_period(el, orbit, ctx, E)] for el in fixture.elements]
            M = mpmath.matrix(g, 2 * g)
            for j, c in enumerate(cols):
                for i in range(g):
                    M[i, j] = c[i]
            Tm = [list(r) for r in fixture.T]
            J = polarization_from_transform(Tm, [1] * g)
            if riemann_residual(M, J) > ctx.check_eps:
                # non-principal: recover J and its divisors from the periods
                J = find_polarization(M, ctx)
                Tm, divisors = frobenius_normal_form(J)
            else:
                divisors = [1] * g
            pd = split_periods(M, Tm, divisors, ctx, J=J, basis_mode="fixture")
            return PeriodData(**{**pd.__dict__, "generator_periods": cols})
        gens = schreier_generators(orbit.level, hyperbolic_only=True)
        periods = [gamma_period(el, orbit, ctx, E) for el in gens]
        M, _ = big_period_matrix(periods, g, ctx)
        J = find_polarization(M, ctx)
        Tm, divisors = frobenius_normal_form(J)
        pd = split_periods(M, Tm, divisors, ctx, J=J, basis_mode="auto")
        return PeriodData(**{**pd.__dict__, "generator_periods": periods})
