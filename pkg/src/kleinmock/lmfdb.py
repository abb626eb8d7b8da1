"""Optional LMFDB client producing orbits in the shipped fixture format.

Two JSON API tables are queried: ``mf_newforms`` for the orbit metadata and
``mf_hecke_nf`` for the Hecke eigenvalues.  Coefficients beyond the
published ``a_n`` are generated from ``a_p`` by Hecke recursion, exactly in
``Z[y]/(field_poly)``.  The base URL is read from ``KLEINMOCK_LMFDB_URL``.
"""
from __future__ import annotations

import json
import os
from fractions import Fraction
from math import isqrt
from pathlib import Path
from typing import Optional

import httpx
import mpmath
from mpmath import mp

from .errors import NetworkError, UnsupportedOrbit
from .newforms import NewformOrbit, _poly_mulmod, orbit_from_json

DEFAULT_BASE_URL = "https://www.lmfdb.org"
ENV_BASE_URL = "KLEINMOCK_LMFDB_URL"
ENV_CACHE_DIR = "KLEINMOCK_CACHE_DIR"
TIMEOUT = 30.0


def base_url() -> str:
    return os.environ.get(ENV_BASE_URL, DEFAULT_BASE_URL).rstrip("/")


def cache_dir() -> Path:
    default = Path.home() / ".cache" / "kleinmock"
    return Path(os.environ.get(ENV_CACHE_DIR, str(default)))


def _get(client: httpx.Client, table: str, label: str, fields: str) -> dict:
    url = f"{base_url()}/api/{table}/"
    params = {"label": label, "_format": "json", "_fields": fields}
    try:
        resp = client.get(url, params=params)
        resp.raise_for_status()
        doc = resp.json()
    except httpx.HTTPError as exc:
        raise NetworkError(f"LMFDB request for {label} failed: {exc}") from exc
    except ValueError as exc:
        raise NetworkError(f"LMFDB returned invalid JSON for {label}") from exc
    rows = doc.get("data") or []
    if not rows:
        raise UnsupportedOrbit(f"LMFDB has no {table} entry for {label}")
    return rows[0]


def _primes(n: int) -> list[int]:
    sieve = bytearray([1]) * (n + 1)
    sieve[:2] = b"\x00\x00"
    for p in range(2, isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p::p] = bytearray(len(sieve[p * p::p]))
    return [p for p in range(n + 1) if sieve[p]]


def _to_power_basis(vec, hecke: dict, degree: int) -> list[int]:
    """Hecke-ring coordinates to integer power-basis coordinates."""
    if hecke.get("hecke_ring_power_basis", True) or degree == 1:
        return [int(x) for x in vec]
    nums = hecke["hecke_ring_numerators"]
    dens = hecke["hecke_ring_denominators"]
    out = [Fraction(0)] * degree
    for c, num, den in zip(vec, nums, dens):
        for k, x in enumerate(num):
            out[k] += Fraction(int(c) * int(x), int(den))
    if any(x.denominator != 1 for x in out):
        raise UnsupportedOrbit("coefficients are not integral in the power basis")
    return [int(x) for x in out]


def expand_coefficients(ap: dict, level: int, poly: list[int], n_max: int) -> list[list[int]]:
    """``a_1 .. a_{n_max}`` from prime eigenvalues by multiplicativity and Hecke recursion."""
    r = len(poly) - 1
    one = [1] + [0] * (r - 1)
    mul = lambda a, b: _poly_mulmod(a, b, poly)
    an: list = [None] * (n_max + 1)
    an[1] = one
    spf = list(range(n_max + 1))
    for p in range(2, isqrt(n_max) + 1):
        if spf[p] == p:
            for k in range(p * p, n_max + 1, p):
                if spf[k] == k:
                    spf[k] = p
    for n in range(2, n_max + 1):
        p = spf[n]
        pk, m = p, n // p
        while m % p == 0:
            m //= p
            pk *= p
        if m > 1:
            an[n] = mul(an[pk], an[m])
        elif pk == p:
            if p not in ap:
                raise UnsupportedOrbit(f"a_{p} not available")
            an[n] = list(ap[p])
        elif level % p == 0:
            an[n] = mul(ap[p], an[pk // p])
        else:
            t = mul(ap[p], an[pk // p])
            an[n] = [x - p * y for x, y in zip(t, an[pk // (p * p)])]
    return an[1:]


def _al_signs(level: int, pairs) -> dict:
    out = {}
    for p, s in pairs or []:
        pe = 1
        while level % (pe * int(p)) == 0:
            pe *= int(p)
        out[pe] = int(s)
    return out


def _embeddings(poly: list[int]) -> list[list[str]]:
    with mp.workdps(60):
        roots = mpmath.polyroots(list(reversed(poly)), maxsteps=200, extraprec=200)
        roots = sorted((mpmath.mpc(z) for z in roots), key=lambda z: (float(z.real), float(z.imag)))
        return [[mpmath.nstr(z.real, 50), mpmath.nstr(z.imag, 50)] for z in roots]


def fetch_lmfdb(label: str, n_max: int, client: Optional[httpx.Client] = None,
                cache: bool = True) -> NewformOrbit:
    """Fetch ``label`` and return a validated orbit with ``n_max`` coefficients.

    Raises
    ------
    NetworkError
    UnsupportedOrbit
        When the orbit is missing or its eigenvalue data stops short of ``n_max``.
    """
    if n_max < 1:
        raise ValueError("n_max must be positive")
    own = client is None
    client = client or httpx.Client(timeout=TIMEOUT)
    try:
        meta = _get(client, "mf_newforms", label,
                    "label,level,weight,dim,field_poly,atkin_lehner_eigenvals")
        hecke = _get(client, "mf_hecke_nf", label,
                     "label,field_poly,an,ap,maxp,hecke_ring_power_basis,"
                     "hecke_ring_numerators,hecke_ring_denominators")
    finally:
        if own:
            client.close()
    if int(meta.get("weight", 2)) != 2:
        raise UnsupportedOrbit(f"{label} is not of weight 2")
    level = int(meta["level"])
    poly = [int(x) for x in (hecke.get("field_poly") or meta.get("field_poly") or [0, 1])]
    degree = len(poly) - 1
    ap_list = hecke.get("ap") or []
    primes = _primes(max(n_max, 2))
    if len(ap_list) < len(primes):
        raise UnsupportedOrbit(
            f"LMFDB provides {len(ap_list)} prime eigenvalues, {len(primes)} needed for n_max = {n_max}")
    ap = {p: _to_power_basis(v, hecke, degree) for p, v in zip(primes, ap_list)}
    an = expand_coefficients(ap, level, poly, n_max)
    published = hecke.get("an") or []
    for n, v in enumerate(published[:n_max], start=1):
        if _to_power_basis(v, hecke, degree) != an[n - 1]:
            raise UnsupportedOrbit(f"published a_{n} disagrees with the Hecke recursion")
    doc = {
        "label": label,
        "level": level,
        "degree": degree,
        "field_poly": poly,
        "embeddings": _embeddings(poly),
        "al_signs": {str(k): v for k, v in _al_signs(level, meta.get("atkin_lehner_eigenvals")).items()},
        "notes": f"fetched from {base_url()}",
        "an": an,
    }
    orbit = orbit_from_json(doc)
    if cache:
        d = cache_dir()
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{label}.json").write_text(json.dumps(doc), encoding="utf-8")
    return orbit


def cached_path(label: str) -> Optional[Path]:
    p = cache_dir() / f"{label}.json"
    return p if p.exists() else None
