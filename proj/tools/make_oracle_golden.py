#!/usr/bin/env python3
"""Writes tests/golden/oracle_<name>.json from high-precision mpmath values.

Every value is derived here from first principles (gamma function,
root finding, numerical quadrature), without reusing the C++ formulas.
"""
import json
import pathlib
import sys

import mpmath as mp

mp.mp.dps = 40


def unit_ball():
    return [(f"mu_{n}", mp.pi ** (mp.mpf(n) / 2) / mp.gamma(mp.mpf(n) / 2 + 1)) for n in range(1, 9)]


def alpha_cone():
    out = []
    for a in (1, 3):
        # Two nappes z = +-sqrt(a) rho; rho ranges up to (1+a)^(-1/2) in B_1.
        area = 2 * mp.quad(lambda rho: mp.sqrt(1 + a) * 2 * mp.pi * rho, [0, 1 / mp.sqrt(1 + a)])
        out += [(f"alpha={a}:area_B1", area), (f"alpha={a}:theta", area / mp.pi)]
    return out


def catenoid():
    out = []
    for r in (10, 50, 100, 1000):
        z = mp.findroot(lambda z: mp.cosh(z) ** 2 + z ** 2 - r ** 2, mp.acosh(r))
        area = 2 * mp.pi * mp.quad(lambda t: mp.cosh(t) ** 2, [-z, 0, z])
        out += [(f"r={r}:height", z), (f"r={r}:area", area), (f"r={r}:theta", area / (mp.pi * r ** 2))]
    return out + [("theta_inf", 2)]


def parabola():
    out = []
    for r in (10, 100, 1000):
        x = mp.findroot(lambda x: x ** 2 + x ** 4 - r ** 2, mp.sqrt(r))
        length = 2 * mp.quad(lambda t: mp.sqrt(1 + 4 * t ** 2), [0, x])
        out += [(f"r={r}:length", length), (f"r={r}:theta", length / (2 * r))]
    return out + [("theta_inf", 1)]


def helicoid():
    out = []
    for r in (10, 100, 1000):
        # Polar coordinates in the (t, s) parameter disk of radius r.
        area = mp.quad(lambda rho, phi: mp.sqrt(1 + (rho * mp.cos(phi)) ** 2) * rho, [0, r], [0, mp.pi / 2, mp.pi, 3 * mp.pi / 2, 2 * mp.pi])
        out += [(f"r={r}:area", area), (f"r={r}:theta", area / (mp.pi * r ** 2))]
    return out


def staircase():
    out = []
    c = 0
    for j in range(1, 7):
        c += (1 if j % 2 else 2) * 2 ** (j - 1)
        out.append((f"a1=1:J={j}:cumulative", c))
    # theta at the right end 2^J - 1 of interval J; odd J give the lows and
    # even J the highs, and J = 200 is far past double precision.
    def theta(J):
        return mp.mpf(sum((1 if j % 2 else 2) * 2 ** (j - 1) for j in range(1, J + 1))) / (2 * (2 ** J - 1))
    return out + [("liminf", theta(201)), ("limsup", theta(200))]


def complex_power(d):
    out = []
    for r in (10, 100, 1000):
        rho = mp.findroot(lambda p: p ** 2 + p ** (2 * d) - r ** 2, mp.mpf(r) ** (1 / mp.mpf(d)))
        area = mp.quad(lambda p: (1 + d ** 2 * p ** (2 * d - 2)) * 2 * mp.pi * p, [0, rho])
        out += [(f"r={r}:area", area), (f"r={r}:theta", area / (mp.pi * r ** 2))]
    return out + [("theta_inf", d)]


def lawson_osserman():
    return [("theta", mp.mpf(9) * (mp.mpf(2) / 3) ** 4)]


FAMILIES = {
    "unit_ball": unit_ball,
    "alpha_cone": alpha_cone,
    "catenoid": catenoid,
    "parabola": parabola,
    "helicoid": helicoid,
    "staircase": staircase,
    "complex_parabola": lambda: complex_power(2),
    "complex_cubic": lambda: complex_power(3),
    "lawson_osserman": lawson_osserman,
}


def main():
    out_dir = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).parent.parent / "tests" / "golden")
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, fn in FAMILIES.items():
        rows = [{"label": label, "value": mp.nstr(mp.mpf(v), 25)} for label, v in fn()]
        (out_dir / f"oracle_{name}.json").write_text(json.dumps({"name": name, "values": rows}, indent=2) + "\n")


if __name__ == "__main__":
    main()
