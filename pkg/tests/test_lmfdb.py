import json

import httpx
import pytest

from kleinmock import lmfdb
from kleinmock.errors import NetworkError, UnsupportedOrbit
from kleinmock.lmfdb import expand_coefficients, fetch_lmfdb
from kleinmock.newforms import load_orbit


def _primes(n):
    return [p for p in range(2, n + 1) if all(p % d for d in range(2, int(p ** 0.5) + 1))]


def _fake_api(label="23.2.a.a", n_primes=200, published=30, power_basis=True):
    """Serve LMFDB-shaped JSON built from a shipped fixture."""
    orbit = load_orbit(label)
    an = [list(v) for v in orbit.an_exact]
    ap = [an[p - 1] for p in _primes(20000)][:n_primes]
    rows = {
        "mf_newforms": {"label": label, "level": orbit.level, "weight": 2, "dim": orbit.degree,
                        "field_poly": list(orbit.field_poly),
                        "atkin_lehner_eigenvals": [[orbit.level, orbit.al_signs[orbit.level]]]},
        "mf_hecke_nf": {"label": label, "field_poly": list(orbit.field_poly), "an": an[:published],
                        "ap": ap, "maxp": 0, "hecke_ring_power_basis": power_basis},
    }
    calls = []

    def handler(request: httpx.Request) -> httpx.Response:
        calls.append(request)
        table = request.url.path.strip("/").split("/")[-1]
        if request.url.params.get("label") != label:
            return httpx.Response(200, json={"data": []})
        return httpx.Response(200, json={"data": [rows[table]]})

    return handler, calls


@pytest.fixture
def cache(tmp_path, monkeypatch):
    monkeypatch.setenv("KLEINMOCK_CACHE_DIR", str(tmp_path))
    monkeypatch.setenv("KLEINMOCK_LMFDB_URL", "https://lmfdb.test")
    return tmp_path


def test_round_trip_level23(cache):
    handler, calls = _fake_api()
    with httpx.Client(transport=httpx.MockTransport(handler)) as client:
        orbit = fetch_lmfdb("23.2.a.a", 500, client=client)
    ref = load_orbit("23.2.a.a")
    assert orbit.an_exact == ref.an_exact[:500]
    assert orbit.al_signs == {23: -1}
    assert all(str(r.url).startswith("https://lmfdb.test/api/") for r in calls)
    assert lmfdb.cached_path("23.2.a.a") == cache / "23.2.a.a.json"
    # the cached copy loads as an ordinary fixture
    again = load_orbit(str(cache / "23.2.a.a.json"))
    assert again.an_exact == orbit.an_exact


def test_missing_orbit(cache):
    handler, _ = _fake_api()
    with httpx.Client(transport=httpx.MockTransport(handler)) as client:
        with pytest.raises(UnsupportedOrbit):
            fetch_lmfdb("1.2.a.a", 10, client=client)


def test_too_few_eigenvalues(cache):
    handler, _ = _fake_api(n_primes=5)
    with httpx.Client(transport=httpx.MockTransport(handler)) as client:
        with pytest.raises(UnsupportedOrbit):
            fetch_lmfdb("23.2.a.a", 100, client=client)


def test_http_failure(cache):
    def handler(request):
        return httpx.Response(503)

    with httpx.Client(transport=httpx.MockTransport(handler)) as client:
        with pytest.raises(NetworkError):
            fetch_lmfdb("23.2.a.a", 10, client=client)


def test_invalid_json(cache):
    def handler(request):
        return httpx.Response(200, content=b"<html>")

    with httpx.Client(transport=httpx.MockTransport(handler)) as client:
        with pytest.raises(NetworkError):
            fetch_lmfdb("23.2.a.a", 10, client=client)


def test_expand_coefficients_matches_fixture():
    ref = load_orbit("256.2.a.e")
    an = [list(v) for v in ref.an_exact]
    ap = {p: an[p - 1] for p in _primes(1000)}
    got = expand_coefficients(ap, 256, list(ref.field_poly), 1000)
    assert got == an[:1000]


def test_no_cache_write(cache):
    handler, _ = _fake_api()
    with httpx.Client(transport=httpx.MockTransport(handler)) as client:
        fetch_lmfdb("23.2.a.a", 50, client=client, cache=False)
    assert lmfdb.cached_path("23.2.a.a") is None
    with pytest.raises(ValueError):
        fetch_lmfdb("23.2.a.a", 0)
