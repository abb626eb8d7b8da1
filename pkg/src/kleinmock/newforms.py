"""Weight-2 newform orbits, q-series and Eichler integrals.

Coefficients are kept exactly as integer vectors in the power basis of the
Hecke field ``Q[y]/(field_poly)``; complex values are produced on demand by
substituting an embedding of ``y`` at the working precision.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from math import gcd, isqrt
from pathlib import Path
from typing import Mapping, Sequence, Union

import mpmath
from mpmath import mp

from .errors import (
    InsufficientTerms,
    InvariantViolation,
    NonIntegralLeadingExponent,
    OrbitNotFound,
    ParseError,
)
from .numerics import PrecisionContext

Number = Union[int, Fraction, mpmath.mpf, mpmath.mpc, complex]


# ----------------------------------------------------------------------
# q-series

@dataclass(frozen=True)
class QSeries:
    """Truncated Laurent series ``sum_{n=n_min}^{n_max} c_n q^n``.

    Parameters
    ----------
    coeffs : tuple
        ``coeffs[k]`` is the coefficient of ``q^(n_min + k)``.
    n_min : int
        Exponent of the first stored coefficient; negative values hold a
        principal part.
    """

    coeffs: tuple
    n_min: int = 0

    @property
    def n_max(self) -> int:
        return self.n_min + len(self.coeffs) - 1

    def __getitem__(self, n: int):
        k = n - self.n_min
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return 0

    def terms(self):
        for k, c in enumerate(self.coeffs):
            yield self.n_min + k, c

    def truncate(self, n_max: int) -> "QSeries":
        return QSeries(self.coeffs[: max(0, n_max - self.n_min + 1)], self.n_min)

    def tail_constant(self) -> mpmath.mpf:
        """``C`` with ``|c_n| <= C n^(3/2)`` over the stored positive range."""
        C = mpmath.mpf(1)
        for n, c in self.terms():
            if n >= 1 and c:
                C = max(C, abs(mpmath.mpmathify(c)) / mpmath.mpf(n) ** 1.5)
        return C


def terms_needed(y, C, eps, start: int = 1) -> int:
    """Smallest ``K`` with ``sum_{n>K} C n^(3/2) e^(-2 pi n y) < eps``.

    Uses the geometric majorant ``C K^(3/2) x^K / (1 - x (1+1/K)^(3/2))`` with
    ``x = e^(-2 pi y)``, valid once the ratio is below one.
    """
    y = mpmath.mpf(y)
    x = mpmath.exp(-2 * mpmath.pi * y)
    lx = mpmath.log(x)
    K = max(start, 1)
    # coarse jump to the neighbourhood of the answer
    guess = int(mpmath.ceil((mpmath.log(C) - mpmath.log(eps)) / (-lx))) if eps < C else 1
    K = max(K, guess)
    while True:
        ratio = x * (1 + mpmath.mpf(1) / K) ** 1.5
        if ratio < 1:
            bound = C * mpmath.mpf(K) ** 1.5 * x ** K / (1 - ratio)
            if bound < eps:
                return K
        K = int(K * 1.1) + 1


def evaluate(series: QSeries, tau, ctx: PrecisionContext):
    """Sum a q-series at ``tau`` with a certified tail below ``eps``.

    Raises
    ------
    InsufficientTerms
        When ``n_max`` is too small for the requested accuracy at ``Im tau``.
    """
    with ctx.work(5):
        tau = mpmath.mpc(tau)
        y = tau.imag
        if y <= 0:
            raise ValueError("tau must lie in the upper half-plane")
        C = series.tail_constant()
        try:
            K = terms_needed(y, C, ctx.eps / 4, start=max(series.n_min, 1))
        except (OverflowError, ValueError):  # pragma: no cover
            raise InsufficientTerms("tail bound diverges")
        if K > series.n_max and series.n_max >= 1:
            raise InsufficientTerms(
                f"need {K} terms at Im tau = {mpmath.nstr(y, 5)}, have {series.n_max}")
        q = mpmath.expjpi(2 * tau)
        total = mpmath.mpc(0)
        qn = q ** series.n_min if series.n_min != 0 else mpmath.mpc(1)
        for n, c in series.terms():
            if n > K:
                break
            if c:
                total += mpmath.mpmathify(c) * qn
            qn *= q
    return total


def eichler_series(f: QSeries) -> QSeries:
    """Termwise ``c_n -> c_n / n``."""
    if f.n_min < 1:
        raise ValueError("Eichler integral needs a series without constant or polar terms")
    out = []
    for n, c in f.terms():
        if isinstance(c, (int, Fraction)):
            out.append(Fraction(c, n) if Fraction(c, n).denominator != 1 else int(Fraction(c, n)))
        else:
            out.append(c / n)
    return QSeries(tuple(out), f.n_min)


def derivative_series(f: QSeries) -> QSeries:
    """``q d/dq``, the formal ``(2 pi i)^(-1) d/dtau``."""
    out = []
    for n, c in f.terms():
        v = c * n
        if isinstance(v, Fraction) and v.denominator == 1:
            v = int(v)
        out.append(v)
    return QSeries(tuple(out), f.n_min)


# ----------------------------------------------------------------------
# eta products

def _euler_product(n_max: int) -> list[int]:
    """Coefficients of ``prod (1 - q^n)`` up to ``q^n_max`` (pentagonal numbers)."""
    c = [0] * (n_max + 1)
    k = 0
    while True:
        sign = -1 if k % 2 else 1
        hit = False
        for m in ((k * (3 * k - 1)) // 2, (k * (3 * k + 1)) // 2):
            if m <= n_max:
                c[m] = sign
                hit = True
        if not hit:
            break
        k += 1
    return c


def _mul(a: list, b: list, n_max: int) -> list:
    out = [0] * (n_max + 1)
    for i, x in enumerate(a):
        if x:
            for j in range(0, n_max + 1 - i):
                if b[j]:
                    out[i + j] += x * b[j]
    return out


def _inverse(a: list, n_max: int) -> list:
    if a[0] != 1:
        raise ValueError("series must start with 1")
    inv = [0] * (n_max + 1)
    inv[0] = 1
    for n in range(1, n_max + 1):
        inv[n] = -sum(a[k] * inv[n - k] for k in range(1, n + 1) if a[k])
    return inv


def _power(a: list, e: int, n_max: int) -> list:
    if e < 0:
        a = _inverse(a, n_max)
        e = -e
    out = [1] + [0] * n_max
    base = a
    while e:
        if e & 1:
            out = _mul(out, base, n_max)
        e >>= 1
        if e:
            base = _mul(base, base, n_max)
    return out


def eta_product(factors: Sequence[tuple[int, int]], n_max: int) -> QSeries:
    """q-expansion of ``prod eta(d tau)^e`` through ``q^n_max``.

    Raises
    ------
    NonIntegralLeadingExponent
        If ``sum d e / 24`` is not a non-negative integer.
    """
    lead = Fraction(sum(d * e for d, e in factors), 24)
    if lead.denominator != 1 or lead < 0:
        raise NonIntegralLeadingExponent(f"leading exponent {lead}")
    lead = int(lead)
    length = n_max - lead
    if length < 0:
        return QSeries((), lead)
    series = [1] + [0] * length
    base = _euler_product(length)
    for d, e in factors:
        if d <= 0:
            raise ValueError("eta arguments must be positive")
        stretched = [0] * (length + 1)
        for k in range(0, length // d + 1):
            stretched[k * d] = base[k]
        series = _mul(series, _power(stretched, e, length), length)
    return QSeries(tuple(series), lead)


# ----------------------------------------------------------------------
# newform orbits

def _poly_mulmod(a: Sequence[int], b: Sequence[int], poly: Sequence[int]) -> list[int]:
    """Product in ``Z[y]/(poly)`` for monic ``poly`` (ascending coefficients)."""
    r = len(poly) - 1
    prod = [0] * (2 * r - 1 if r else 1)
    for i, x in enumerate(a):
        if x:
            for j, z in enumerate(b):
                prod[i + j] += x * z
    for k in range(len(prod) - 1, r - 1, -1):
        c = prod[k]
        if c:
            for t in range(r):
                prod[k - r + t] -= c * poly[t]
            prod[k] = 0
    return prod[:r] if r else prod[:1]


def _factor(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            out.append((p, k))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


@dataclass(frozen=True)
class NewformOrbit:
    """Galois orbit of a weight-2 newform on ``Gamma_0(N)``.

    Attributes
    ----------
    level : int
    label : str
    degree : int
        Number of embeddings ``r``.
    field_poly : tuple of int
        Monic minimal polynomial of the Hecke field generator, ascending.
    an_exact : tuple of tuple of int
        ``an_exact[n-1]`` is ``a_n`` in the power basis.
    embeddings : tuple of str pairs
        Decimal real and imaginary parts of the roots, in the order that
        fixes ``f_1, ..., f_r``.
    al_signs : dict
        Atkin-Lehner eigenvalues keyed by exact divisors of the level.
    """

    level: int
    label: str
    degree: int
    field_poly: tuple
    an_exact: tuple
    embeddings: tuple
    al_signs: Mapping[int, int] = field(default_factory=dict)
    notes: str = ""

    @property
    def n_max(self) -> int:
        return len(self.an_exact)

    @property
    def genus(self) -> int:
        return self.degree

    def embedding_values(self, ctx: PrecisionContext) -> list:
        """Roots of ``field_poly`` at the active (or the context's) precision."""
        return list(_refined_roots(self.field_poly, self.embeddings, max(mp.dps, ctx.digits)))

    def coefficients(self, j: int, ctx: PrecisionContext) -> QSeries:
        """Complex q-series of the ``j``-th conjugate ``f_j``."""
        y = self.embedding_values(ctx)[j]
        powers = [y ** k for k in range(self.degree)]
        return QSeries(tuple(mpmath.fsum(c * p for c, p in zip(v, powers))
                             for v in self.an_exact), 1)

    def trace(self, n: int, ctx: PrecisionContext):
        ys = self.embedding_values(ctx)
        v = self.an_exact[n - 1]
        return mpmath.fsum(mpmath.fsum(c * y ** k for k, c in enumerate(v)) for y in ys)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "level": self.level,
            "degree": self.degree,
            "field_poly": list(self.field_poly),
            "embeddings": [list(e) for e in self.embeddings],
            "al_signs": {str(k): v for k, v in self.al_signs.items()},
            "notes": self.notes,
            "an": [list(v) for v in self.an_exact],
        }


@lru_cache(maxsize=64)
def _refined_roots(poly: tuple, seeds: tuple, dps: int) -> tuple:
    with mp.workdps(dps + 10):
        out = []
        dpoly = [k * c for k, c in enumerate(poly)][1:]
        for re_s, im_s in seeds:
            z = mpmath.mpc(mpmath.mpf(re_s), mpmath.mpf(im_s))
            if len(poly) > 2:
                for _ in range(200):
                    fz = mpmath.polyval(list(reversed(poly)), z)
                    dz = mpmath.polyval(list(reversed(dpoly)), z)
                    if dz == 0:
                        raise InvariantViolation("embedding seed sits on a critical point of field_poly")
                    step = fz / dz
                    z -= step
                    if abs(step) < mpmath.mpf(10) ** (-dps - 8):
                        break
            if mpmath.im(z) == 0 or abs(mpmath.im(z)) < mpmath.mpf(10) ** (-dps):
                z = mpmath.mpf(mpmath.re(z))
            out.append(z)
    with mp.workdps(dps):
        return tuple(+z for z in out)


def orbit_from_json(doc: dict, validate: bool = True, ctx: PrecisionContext | None = None) -> NewformOrbit:
    """Build and (optionally) validate an orbit from the fixture dictionary."""
    try:
        orbit = NewformOrbit(
            level=int(doc["level"]),
            label=str(doc["label"]),
            degree=int(doc["degree"]),
            field_poly=tuple(int(x) for x in doc["field_poly"]),
            an_exact=tuple(tuple(int(x) for x in v) for v in doc["an"]),
            embeddings=tuple((str(e[0]), str(e[1])) for e in doc["embeddings"]),
            al_signs={int(k): int(v) for k, v in doc.get("al_signs", {}).items()},
            notes=str(doc.get("notes", "")),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed orbit data: {exc!r}") from exc
    if validate:
        validate_orbit(orbit, ctx or PrecisionContext())
    return orbit


def validate_orbit(orbit: NewformOrbit, ctx: PrecisionContext) -> None:
    """Check every structural invariant; raise :class:`InvariantViolation` on the first failure."""
    r = orbit.degree
    if len(orbit.field_poly) != r + 1 or orbit.field_poly[-1] != 1:
        raise InvariantViolation("field_poly must be monic of degree r")
    if len(orbit.embeddings) != r:
        raise InvariantViolation("need one embedding per conjugate")
    if any(len(v) != r for v in orbit.an_exact):
        raise InvariantViolation("coefficient vectors must have length r")
    if not orbit.an_exact or list(orbit.an_exact[0]) != [1] + [0] * (r - 1):
        raise InvariantViolation("a_1 must equal 1")
    for Q, s in orbit.al_signs.items():
        if s not in (1, -1):
            raise InvariantViolation(f"Atkin-Lehner sign at {Q} is {s}")
        if orbit.level % Q or gcd(Q, orbit.level // Q) != 1:
            raise InvariantViolation(f"{Q} is not an exact divisor of {orbit.level}")
    with ctx.work():
        roots = orbit.embedding_values(ctx)
        for k, z in enumerate(roots):
            if abs(mpmath.polyval(list(reversed(orbit.field_poly)), z)) > ctx.check_eps:
                raise InvariantViolation(f"embedding {k} is not a root of field_poly")
            seed = mpmath.mpc(*(mpmath.mpf(x) for x in orbit.embeddings[k]))
            if abs(z - seed) > mpmath.mpf(10) ** -8 * (1 + abs(z)):
                raise InvariantViolation(f"embedding {k} is not close to a root of field_poly")
        for a in range(r):
            for b in range(a):
                if abs(roots[a] - roots[b]) < ctx.check_eps:
                    raise InvariantViolation("embeddings must be distinct")
    _check_multiplicative(orbit)


def _check_multiplicative(orbit: NewformOrbit) -> None:
    """Exact check that ``a_n`` is determined by Hecke recursion at prime powers.

    Together with ``a_mn = a_m a_n`` for coprime ``m, n`` (checked through the
    factorization of every ``n``) this is equivalent to full multiplicativity.
    """
    poly = orbit.field_poly
    an = orbit.an_exact
    n_max = len(an)
    N = orbit.level
    mul = lambda a, b: _poly_mulmod(a, b, poly)
    spf = list(range(n_max + 1))
    for p in range(2, isqrt(n_max) + 1):
        if spf[p] == p:
            for k in range(p * p, n_max + 1, p):
                if spf[k] == k:
                    spf[k] = p
    for n in range(2, n_max + 1):
        p = spf[n]
        pk = p
        m = n // p
        while m % p == 0:
            m //= p
            pk *= p
        if m > 1:
            if mul(an[pk - 1], an[m - 1]) != list(an[n - 1]):
                raise InvariantViolation(f"a_{pk} a_{m} != a_{n}")
        elif pk != p:
            prev = an[pk // p - 1]
            if N % p == 0:
                expect = mul(an[p - 1], prev)
            else:
                prev2 = an[pk // (p * p) - 1]
                expect = [x - p * z for x, z in zip(mul(an[p - 1], prev), prev2)]
            if expect != list(an[n - 1]):
                raise InvariantViolation(f"Hecke recursion fails at {n} = {p}^k")


def _data_dir() -> Path:
    return Path(str(resources.files("kleinmock") / "data"))


def available_orbits() -> list[str]:
    return sorted(p.stem for p in _data_dir().glob("*.json"))


_ALIASES = {"27": "27.2.a.a", "23": "23.2.a.a", "256": "256.2.a.e"}


@lru_cache(maxsize=16)
def _load_cached(path: str) -> NewformOrbit:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return orbit_from_json(doc)


def load_orbit(source: str | Path) -> NewformOrbit:
    """Load a shipped orbit by label (or bare level) or a fixture file path.

    Raises
    ------
    OrbitNotFound
        If neither a file nor a shipped label matches.
    ParseError, InvariantViolation
        For malformed or inconsistent data.
    """
    src = str(source)
    path = Path(src)
    if path.suffix == ".json" and path.exists():
        return _load_cached(str(path.resolve()))
    label = _ALIASES.get(src, src)
    candidate = _data_dir() / f"{label}.json"
    if candidate.exists():
        return _load_cached(str(candidate))
    raise OrbitNotFound(f"orbit not found: {src}")


# ----------------------------------------------------------------------
# Eichler integrals of a whole orbit

class EichlerVector:
    """Evaluates ``E_j(tau) = sum a_j(n)/n q^n`` for all conjugates at once.

    The power-basis components are summed separately with exact integer
    coefficients and combined with the embeddings at the end, so a single
    pass over ``q^n`` serves every conjugate.
    """

    def __init__(self, orbit: NewformOrbit):
        self.orbit = orbit
        C = mpmath.mpf(1)
        # a_n/n <= C n^(3/2) for the Eichler coefficients with a generous C
        # (|a_n| <= d(n) sqrt(n) max|y|^k); calibrated on the stored data
        with mp.workdps(20):
            bound = max([mpmath.mpf(1)] + [abs(mpmath.mpf(e[0])) + abs(mpmath.mpf(e[1]))
                                          for e in orbit.embeddings])
            for n, v in enumerate(orbit.an_exact[:2000], start=1):
                s = sum(abs(c) * bound ** k for k, c in enumerate(v))
                C = max(C, s / mpmath.mpf(n) ** 2.5)
        self.C = 4 * C

    def terms(self, y, ctx: PrecisionContext) -> int:
        return terms_needed(y, self.C, ctx.eps / 8)

    def __call__(self, tau, ctx: PrecisionContext, n_terms: int | None = None) -> list:
        return self._sum(tau, ctx, n_terms, eichler=True)

    def newform(self, tau, ctx: PrecisionContext, n_terms: int | None = None) -> list:
        """Values ``f_j(tau) = sum a_j(n) q^n`` of the conjugate newforms."""
        return self._sum(tau, ctx, n_terms, eichler=False)

    def _sum(self, tau, ctx: PrecisionContext, n_terms: int | None, eichler: bool) -> list:
        orbit = self.orbit
        with ctx.work(5):
            tau = mpmath.mpc(tau)
            if tau.imag <= 0:
                raise ValueError("tau must lie in the upper half-plane")
            K = n_terms if n_terms is not None else self.terms(tau.imag, ctx)
            if not eichler and n_terms is None:
                # a_n is n times a_n/n, so tighten the tail target by the extra factor
                K = terms_needed(tau.imag, self.C, ctx.eps / (16 * K))
            if K > orbit.n_max:
                raise InsufficientTerms(
                    f"need {K} coefficients at Im tau = {mpmath.nstr(tau.imag, 5)}, "
                    f"have {orbit.n_max}")
            r = orbit.degree
            q = mpmath.expjpi(2 * tau)
            sums = [mpmath.mpc(0)] * r
            qn = mpmath.mpc(1)
            an = orbit.an_exact
            for n in range(1, K + 1):
                qn *= q
                v = an[n - 1]
                t = None
                for k in range(r):
                    c = v[k]
                    if c:
                        if t is None:
                            t = qn / n if eichler else qn
                        sums[k] += c * t
            ys = orbit.embedding_values(ctx)
            out = [mpmath.fsum(sums[k] * y ** k for k in range(r)) for y in ys]
        return out
