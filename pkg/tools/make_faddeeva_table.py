#!/usr/bin/env python3
"""Generate the multiprecision reference table for w(z) = exp(-z^2) erfc(-iz).

Run once, before touching the fast implementation; the output is frozen into
tests/data/faddeeva_reference.json and never regenerated as part of the build.

Usage:
    python3 tools/make_faddeeva_table.py
"""

import json
import random
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "faddeeva_reference.json"


def w_ref(z: complex) -> complex:
    zm = mp.mpc(z.real, z.imag)
    val = mp.exp(-zm * zm) * mp.erfc(-1j * zm)
    return complex(val)


def representable(z: complex) -> bool:
    """Keep points whose exact w(z) fits comfortably in float64."""
    zm = mp.mpc(z.real, z.imag)
    val = mp.exp(-zm * zm) * mp.erfc(-1j * zm)
    mag = mp.fabs(val)
    return mag < mp.mpf("1e290") and mag > mp.mpf("1e-290")


def main() -> None:
    points: list[complex] = []

    # Axes, region boundaries, and a few sign combinations.
    for x in [0.0, 1e-8, 1e-3, 0.25, 0.5, 1.0, 1.5, 1.9, 2.0, 2.1, 3.0, 5.0,
              8.0, 11.9, 12.0, 12.1, 20.0, 29.0]:
        points.append(complex(x, 0.0))
        points.append(complex(-x, 0.0))
        points.append(complex(0.0, x))
        points.append(complex(x / 2, x / 2))
        points.append(complex(-x / 3, x))

    # Deterministic spray over |z| <= 30, upper half plane plus a shallow
    # strip below the real axis (deep lower half plane overflows float64).
    rng = random.Random(20260810)
    while len(points) < 400:
        r = rng.uniform(0.0, 30.0)
        phi = rng.uniform(0.0, 3.141592653589793)
        z = complex(r * mp.cos(phi), r * mp.sin(phi))
        points.append(z)
    for _ in range(60):
        x = rng.uniform(-25.0, 25.0)
        y = rng.uniform(-1.5, 0.0)
        z = complex(x, y)
        if representable(z):
            points.append(z)

    table = [
        {"re": z.real, "im": z.imag, "w_re": w_ref(z).real, "w_im": w_ref(z).imag}
        for z in points
    ]
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(table, indent=1))
    print(f"wrote {len(table)} reference values to {OUT}")


if __name__ == "__main__":
    main()
