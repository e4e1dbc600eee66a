#!/usr/bin/env python3
"""Standalone partition-function enumerator used to freeze test fixtures.

Deliberately independent of the package: plain nested loops over spin
configurations, no numpy, no shared code. Emits tests/fixtures/ising_fixtures.json
with the term-list dump format {kind, spins, V_re, V_im, V_inf} so the frozen
values can be replayed against the package's evaluator.
"""

import cmath
import json
import os
import random


def term_value(term, spins):
    """Factor contributed by one term for a full spin assignment (+1/-1 list)."""
    sigma = 1
    for s in term["spins"]:
        sigma *= spins[s]
    if term["V_inf"]:
        # infinite factor base: weight 0 on sigma=+1, 1 on sigma=-1
        return 0j if sigma == 1 else 1 + 0j
    return 1 + 0j if sigma == 1 else complex(term["V_re"], term["V_im"])


def enumerate_Z(n_spins, terms):
    """Sum over all 2^n spin configs, spin 0 most significant, +1 before -1."""
    total = 0j
    for code in range(2 ** n_spins):
        spins = [1 - 2 * ((code >> (n_spins - 1 - k)) & 1) for k in range(n_spins)]
        factor = 1 + 0j
        for term in terms:
            factor *= term_value(term, spins)
        total += factor
    return total


def mk_term(kind, spins, V):
    if V == "inf":
        return {"kind": kind, "spins": list(spins), "V_re": 0.0, "V_im": 0.0, "V_inf": True}
    return {"kind": kind, "spins": list(spins), "V_re": V.real, "V_im": V.imag, "V_inf": False}


def rand_complex(rng):
    return complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))


def build_fixtures():
    fixtures = []
    rng = random.Random(20240711)

    # 4-spin plaquette model: 3x3 grid of spins, four overlapping plaquettes,
    # mixed complex factor bases plus fields on a few sites.
    terms = []
    plaquettes = [(0, 1, 3, 4), (1, 2, 4, 5), (3, 4, 6, 7), (4, 5, 7, 8)]
    for p in plaquettes:
        terms.append(mk_term("plaquette", p, rand_complex(rng)))
    for k in (0, 2, 4, 6, 8):
        terms.append(mk_term("field", (k,), rand_complex(rng)))
    fixtures.append({"name": "square_plaquette_mixed", "n_spins": 9, "terms": terms})

    # Toric-style edge model: 3x3 open grid, pair term per nearest-neighbour
    # edge, random complex weights.
    terms = []
    def vid(x, y):
        return y * 3 + x
    for y in range(3):
        for x in range(2):
            terms.append(mk_term("pair", (vid(x, y), vid(x + 1, y)), rand_complex(rng)))
    for y in range(2):
        for x in range(3):
            terms.append(mk_term("pair", (vid(x, y), vid(x, y + 1)), rand_complex(rng)))
    fixtures.append({"name": "toric_edges_random", "n_spins": 9, "terms": terms})

    # Nearest-neighbour chain with fields and one exactly infinite factor base
    # (frozen anti-aligned bond) to pin the tagged-infinity convention.
    terms = []
    for k in range(5):
        terms.append(mk_term("field", (k,), rand_complex(rng)))
    for k in range(4):
        V = "inf" if k == 2 else rand_complex(rng)
        terms.append(mk_term("pair", (k, k + 1), V))
    fixtures.append({"name": "chain_with_infinity", "n_spins": 5, "terms": terms})

    # Purely imaginary / unit-magnitude bases (quarter-rotation regime).
    terms = []
    for k in range(4):
        terms.append(mk_term("field", (k,), [1j, -1j, 1j, -1j][k]))
    for k in range(3):
        terms.append(mk_term("pair", (k, k + 1), [-1 + 0j, 1j, -1j][k]))
    fixtures.append({"name": "unit_circle_bases", "n_spins": 4, "terms": terms})

    for fx in fixtures:
        Z = enumerate_Z(fx["n_spins"], fx["terms"])
        fx["Z_re"] = Z.real
        fx["Z_im"] = Z.imag
    return fixtures


def main():
    out_dir = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures")
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "ising_fixtures.json")
    with open(path, "w") as fh:
        json.dump(build_fixtures(), fh, indent=1)
    print("wrote", os.path.normpath(path))


if __name__ == "__main__":
    main()
