"""Extended-precision scalars and matrices plus exact integer helpers.

All floating point work goes through :mod:`mpmath`.  A
:class:`PrecisionContext` fixes the working number of decimal digits; public
functions activate it with :meth:`PrecisionContext.work` so callers never
touch ``mp.dps`` directly.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Optional, Sequence

import mpmath
from mpmath import mp

from .errors import NotPositiveDefinite, ReconstructionFailed


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision ``digits`` and the tolerances derived from it.

    ``eps`` bounds arithmetic noise, ``check_eps`` is the looser threshold
    used for structural assertions (symmetry, lattice membership, ...).
    """

    digits: int = 40

    def __post_init__(self):
        if int(self.digits) != self.digits or self.digits < 20:
            raise ValueError(f"digits must be an integer >= 20, got {self.digits!r}")

    @property
    def eps(self):
        return mpmath.mpf(10) ** (-self.digits)

    @property
    def check_eps(self):
        return mpmath.mpf(10) ** (10 - self.digits)

    def work(self, extra: int = 0):
        """Context manager setting ``mp.dps`` to ``digits + extra``."""
        return mp.workdps(self.digits + extra)

    def with_digits(self, digits: int) -> "PrecisionContext":
        return PrecisionContext(digits)


# ----------------------------------------------------------------------
# matrix helpers (mpmath.matrix is the concrete complex matrix type)

def cmatrix(rows) -> mpmath.matrix:
    return mpmath.matrix(rows)


def shape(A):
    return A.rows, A.cols


def conj(A: mpmath.matrix) -> mpmath.matrix:
    return A.apply(mpmath.conj)


def real_part(A: mpmath.matrix) -> mpmath.matrix:
    return A.apply(mpmath.re)


def imag_part(A: mpmath.matrix) -> mpmath.matrix:
    return A.apply(mpmath.im)


def dagger(A: mpmath.matrix) -> mpmath.matrix:
    return conj(A).T


def max_abs(A) -> mpmath.mpf:
    if isinstance(A, mpmath.matrix):
        return max((abs(A[i, j]) for i in range(A.rows) for j in range(A.cols)),
                   default=mpmath.mpf(0))
    return max((abs(x) for x in A), default=mpmath.mpf(0))


def sym_defect(A: mpmath.matrix) -> mpmath.mpf:
    """Largest entry of ``A - A^tr``."""
    return max_abs(A - A.T)


def herm_defect(A: mpmath.matrix) -> mpmath.mpf:
    return max_abs(A - dagger(A))


def columns(A: mpmath.matrix, start: int, stop: int) -> mpmath.matrix:
    return A[:, start:stop]


def int_matrix_to_mp(T: Sequence[Sequence[int]]) -> mpmath.matrix:
    return mpmath.matrix([[mpmath.mpf(x) for x in row] for row in T])


def cholesky(A: mpmath.matrix, ctx: PrecisionContext) -> mpmath.matrix:
    """Lower triangular ``L`` with ``L L^tr = A`` for real symmetric ``A``.

    Raises
    ------
    NotPositiveDefinite
        If a pivot is not larger than ``ctx.eps``.
    """
    n = A.rows
    with ctx.work():
        if A.cols != n:
            raise ValueError("cholesky needs a square matrix")
        if sym_defect(A) > ctx.check_eps * max(1, max_abs(A)):
            raise ValueError("cholesky input is not symmetric")
        L = mpmath.zeros(n, n)
        for j in range(n):
            s = mpmath.re(A[j, j]) - mpmath.fsum(L[j, k] ** 2 for k in range(j))
            if s <= ctx.eps:
                raise NotPositiveDefinite(f"pivot {j} is {mpmath.nstr(s, 5)}")
            L[j, j] = mpmath.sqrt(s)
            for i in range(j + 1, n):
                t = mpmath.re(A[i, j]) - mpmath.fsum(L[i, k] * L[j, k] for k in range(j))
                L[i, j] = t / L[j, j]
        return L


def is_positive_definite(A: mpmath.matrix, ctx: PrecisionContext) -> bool:
    """Hermitian positivity test through the real symmetric embedding."""
    n = A.rows
    R = mpmath.zeros(2 * n, 2 * n)
    for i in range(n):
        for j in range(n):
            a, b = mpmath.re(A[i, j]), mpmath.im(A[i, j])
            R[i, j] = R[n + i, n + j] = a
            R[i, n + j] = -b
            R[n + i, j] = b
    R = (R + R.T) / 2
    try:
        cholesky(R, ctx)
    except NotPositiveDefinite:
        return False
    return True


# ----------------------------------------------------------------------
# rationals and integer lattices

def rational_reconstruct(x, max_den: int, tol) -> Optional[Fraction]:
    """Smallest-denominator continued-fraction convergent of ``x`` within ``tol``.

    Returns ``None`` when no convergent with denominator ``<= max_den`` lies
    within ``tol`` of ``x``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = mpmath.mpf(x)
    tol = mpmath.mpf(tol)
    p0, q0, p1, q1 = 0, 1, 1, 0
    r = x
    for _ in range(4 * max(8, int(mp.prec))):
        a = int(mpmath.floor(r))
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if q1 > max_den:
            return None
        if abs(x - mpmath.mpf(p1) / q1) <= tol:
            return Fraction(p1, q1)
        frac = r - a
        if frac == 0:
            return None
        r = 1 / frac
    return None


def to_fraction(x, max_den: int, tol) -> Fraction:
    """Like :func:`rational_reconstruct` but raises on failure; passes exact input through."""
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, mpmath.mpc):
        if abs(x.imag) > tol:
            raise ReconstructionFailed(f"{mpmath.nstr(x, 12)} is not real")
        x = x.real
    r = rational_reconstruct(x, max_den, tol)
    if r is None:
        raise ReconstructionFailed(f"{mpmath.nstr(x, 20)} is not a rational with denominator <= {max_den}")
    return r


def _echelon_with_transform(B: list[list[int]]):
    """Unimodular ``U`` and echelon ``H = U B`` over the integers."""
    m = len(B)
    n = len(B[0]) if m else 0
    H = [list(row) for row in B]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    r = 0
    for c in range(n):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if H[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(H[i][c]))
            H[r], H[piv] = H[piv], H[r]
            U[r], U[piv] = U[piv], U[r]
            done = True
            for i in range(r + 1, m):
                if H[i][c]:
                    f = H[i][c] // H[r][c]
                    H[i] = [a - f * b for a, b in zip(H[i], H[r])]
                    U[i] = [a - f * b for a, b in zip(U[i], U[r])]
                    if H[i][c]:
                        done = False
            if done:
                break
        if any(H[i][c] for i in range(r, m)):
            r += 1
    return U, H, r


def _primitive(v: Sequence[int]) -> list[int]:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    if g == 0:
        return list(v)
    v = [x // g for x in v]
    for x in v:
        if x:
            return v if x > 0 else [-y for y in v]
    return v


def integer_nullspace(A, max_den: int = 10**6, tol=None) -> list[list[int]]:
    """ℤ-basis of ``{x in ℤ^n : A x = 0}`` for a rational matrix ``A``.

    Entries may be ints, Fractions or mpmath reals; the latter are first
    recognized as rationals and :class:`ReconstructionFailed` is raised when
    that is impossible.
    """
    if tol is None:
        tol = mpmath.mpf(10) ** (-(mp.dps // 2))
    rows = [[to_fraction(x, max_den, tol) for x in row] for row in A]
    if not rows:
        return []
    n = len(rows[0])
    int_rows = []
    for row in rows:
        den = 1
        for x in row:
            den = den * x.denominator // gcd(den, x.denominator)
        int_rows.append([int(x * den) for x in row])
    # left kernel of A^T is the kernel of A
    At = [[int_rows[i][j] for i in range(len(int_rows))] for j in range(n)]
    U, H, rank = _echelon_with_transform(At)
    basis = [U[i] for i in range(n) if not any(H[i])]
    return [_primitive(v) for v in basis]


def lattice_basis(vectors: Iterable[Sequence[int]]) -> list[list[int]]:
    """Echelon ℤ-basis of the span of integer vectors."""
    vecs = [list(map(int, v)) for v in vectors]
    if not vecs:
        return []
    _, H, rank = _echelon_with_transform(vecs)
    return [row for row in H if any(row)]


def lll(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """LLL-reduced basis (row convention) via sympy's exact implementation."""
    from sympy import ZZ
    from sympy.polys.matrices import DomainMatrix

    M = DomainMatrix([[ZZ(int(x)) for x in r] for r in rows], (len(rows), len(rows[0])), ZZ)
    return [[int(x) for x in row] for row in M.lll().to_Matrix().tolist()]


def int_det(M: Sequence[Sequence[int]]) -> int:
    from sympy import Matrix

    return int(Matrix(M).det())


def int_inverse(M: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    from sympy import Matrix

    inv = Matrix(M).inv()
    return [[Fraction(int(x.p), int(x.q)) for x in inv.row(i)] for i in range(inv.rows)]


def int_matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))]
            for i in range(len(A))]


def int_transpose(A):
    return [list(r) for r in zip(*A)]
