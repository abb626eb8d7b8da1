"""Regenerate the shipped newform fixtures with PARI/GP.

Development-time helper only; the package never imports cypari2.

    python tools/generate_fixtures.py --nmax 20000
"""
import argparse
import json
from pathlib import Path

import cypari2
import mpmath

DATA = Path(__file__).resolve().parents[1] / "src" / "kleinmock" / "data"

# (level, orbit index in mfeigenbasis, LMFDB label, root used for f_1, notes)
ORBITS = [
    (27, 1, "27.2.a.a", None, "eta(3z)^2 eta(9z)^2, CM by Q(sqrt(-3))"),
    (23, 1, "23.2.a.a", "-", "generator y = phi = (1 - sqrt 5)/2 first"),
    (256, 5, "256.2.a.e", "+", "CM by Q(sqrt(-2)); generator y = sqrt 2 first"),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nmax", type=int, default=20000)
    args = ap.parse_args()
    pari = cypari2.Pari()
    pari.allocatemem(4 * 10**9)
    pari.set_real_precision(160)
    for level, idx, label, first, note in ORBITS:
        mf = pari.mfinit([level, 2], 0)
        form = pari.mfeigenbasis(mf)[idx - 1]
        poly = pari.mfparams(form)[3]
        deg = int(pari.poldegree(poly))
        coeffs = pari.mfcoefs(form, args.nmax)
        an = []
        for n in range(1, args.nmax + 1):
            c = pari.lift(coeffs[n])
            vec = [int(pari.polcoef(c, k, "y")) for k in range(deg)]
            an.append(vec)
        if deg == 1:
            field_poly = [0, 1]
            embeddings = [["0", "0"]]
        else:
            field_poly = [int(pari.polcoef(poly, k)) for k in range(deg + 1)]
            mpmath.mp.dps = 120
            roots = mpmath.polyroots(field_poly[::-1], maxsteps=200, extraprec=400)
            roots = sorted(roots, key=lambda r: (mpmath.re(r), mpmath.im(r)))
            if first == "+":
                roots = roots[::-1]
            embeddings = [[mpmath.nstr(mpmath.re(r), 110), mpmath.nstr(mpmath.im(r), 110)]
                          for r in roots]
        ev = pari.mfatkineigenvalues(mf, level)[idx - 1]
        al = {str(level): int(ev[0])}
        doc = {
            "label": label,
            "level": level,
            "degree": deg,
            "field_poly": field_poly,
            "embeddings": embeddings,
            "al_signs": al,
            "notes": note,
            "an": an,
        }
        out = DATA / f"{label}.json"
        out.write_text(json.dumps(doc, separators=(",", ":")))
        print(label, deg, field_poly, al, an[:6])


if __name__ == "__main__":
    main()
