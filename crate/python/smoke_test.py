#!/usr/bin/env python3
"""Smoke test for the regfade_py extension module.

Build the extension first:

    cargo build -p regfade-python --release

then run this script from anywhere inside the repository:

    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path


def import_extension():
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "libregfade_py.so",
        root / "target" / "debug" / "libregfade_py.so",
    ]
    for so in candidates:
        if so.exists():
            tmp = Path(tempfile.mkdtemp(prefix="regfade_py_"))
            shutil.copy2(so, tmp / "regfade_py.so")
            sys.path.insert(0, str(tmp))
            import regfade_py

            return regfade_py
    sys.exit(
        "libregfade_py.so not found; run `cargo build -p regfade-python --release` first"
    )


def approx(got, want, rel=1e-9):
    assert math.isfinite(got), f"non-finite value {got}"
    assert abs(got - want) <= rel * abs(want), f"{got} != {want} (rel {rel})"


def main():
    rf = import_extension()

    # channel basics
    ray = rf.Channel("rayleigh")
    approx(ray.cdf(0.01), 1.0 - math.exp(-0.01))
    assert ray.exponent() == 1.0
    assert ray.pdf(1.0) is not None

    nak = rf.Channel("nakagami:m=2")
    assert nak.exponent() == 2.0
    ln = rf.Channel("lognormal:sigma_db=8")
    assert math.isinf(ln.exponent())

    # sampling is seeded and reproducible
    a = ray.sample(16, seed=7)
    b = ray.sample(16, seed=7)
    assert a == b and len(a) == 16

    # asymptote constants: DPSK over Rayleigh has c1 = 1/2, c2 = 1
    dpsk = rf.Modulation("dpsk")
    bpsk = rf.Modulation("bpsk")
    est = rf.asymptote(ray, dpsk)
    approx(est.c1, 0.5)
    approx(est.c2, 1.0)
    approx(est.coefficient_a, 0.5)
    # evaluator ~ 1/(2 rho) at high SNR
    approx(est.evaluate(1e6), 0.5e-6, rel=1e-4)
    approx(est.evaluate_db(60.0), 0.5e-6, rel=1e-4)

    # exact quadrature average matches the closed form 0.5/(1+rho)
    approx(rf.exact_average(ray, dpsk, 100.0), 0.5 / 101.0)

    # classical SNR offset between DPSK and BPSK over Rayleigh
    approx(rf.snr_offset_db(ray, dpsk, bpsk), 10.0 * math.log10(2.0), rel=1e-6)

    # outage squeeze lb <= exact <= ub
    lb, exact, ub = rf.bounds_check(ray, bpsk, 100.0)
    assert lb <= exact <= ub * (1 + 1e-12), (lb, exact, ub)

    # combined channel: BPSK over 2-branch Rayleigh MRC, coefficient 3/16
    mrc = rf.Channel.combine("mrc", ["rayleigh", "rayleigh"])
    est2 = rf.asymptote(mrc, bpsk)
    assert est2.d == 2.0
    approx(est2.power_law_constant, 3.0 / 16.0)

    # Monte Carlo: deterministic under a fixed seed, consistent with exact
    e1 = rf.mc_average_error(ray, dpsk, 100.0, seed=11, draws=200_000)
    e2 = rf.mc_average_error(ray, dpsk, 100.0, seed=11, draws=200_000)
    assert e1 == e2
    est_mc, ci = e1
    assert abs(est_mc - 0.5 / 101.0) < 4.0 * ci, (est_mc, ci)

    # exponent estimation classifies log-normal as rapidly varying
    d_hat, stderr = rf.exponent_estimate(nak)
    assert abs(d_hat - 2.0) < 0.01, d_hat
    assert rf.exponent_estimate(ln) == (None, None)

    # invalid specs raise ValueError
    for bad in ("nakagami:m=-1", "foo", "hoyt:q=2"):
        try:
            rf.Channel(bad)
        except ValueError:
            pass
        else:
            raise AssertionError(f"{bad} should have raised")

    print("regfade_py smoke test: all checks passed")


if __name__ == "__main__":
    main()
