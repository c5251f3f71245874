"""Smoke test for the leaklab_py extension module.

Build first with `cargo build -p leaklab-py --release`; this script loads
target/release/libleaklab_py.so unless LEAKLAB_PY_LIB points elsewhere.
"""

import importlib.machinery
import importlib.util
import math
import os
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    lib = os.environ.get("LEAKLAB_PY_LIB", str(ROOT / "target" / "release" / "libleaklab_py.so"))
    loader = importlib.machinery.ExtensionFileLoader("leaklab_py", lib)
    spec = importlib.util.spec_from_file_location("leaklab_py", lib, loader=loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def main():
    lk = load()

    assert abs(lk.binary_entropy(0.5) - 1.0) < 1e-12
    assert abs(lk.binomial_entropy(10, 0.3) - 2.5666681391575009) < 1e-12
    try:
        lk.binary_entropy(1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-range probability accepted")

    fcfs = lk.analytic_leakage("fcfs", 0.5)
    assert abs(fcfs.ratio - 0.75) < 1e-12, fcfs
    assert lk.analytic_leakage("lqf", 0.3).ratio == 1.0

    dist = lk.busy_period_pmf(0.25)
    assert dist.support[:2] == [1, 3]
    assert abs(sum(dist.probs) + dist.truncation_mass - 1.0) < 1e-12
    assert abs(dist.exact_mean - 2.0) < 1e-6

    z0, empty, residual = lk.detwc_root(0.2, 0.6)
    assert abs(empty - 25 / 32) < 1e-12 and abs(residual) < 1e-10
    point = lk.leakage_detwc_lower(0.1)
    assert 0.0 < point.ratio <= 0.5

    cfg = lk.SimConfig("lqf", "nonstop", 0.3, 5000, seed=7)
    run = lk.simulate(cfg)
    assert len(run.arrivals) == 5000 and len(run.served) == 5000
    decoded = lk.decode_lqf(run.attacker_arrivals, run.departures, 5000)
    mismatches = sum(a != b for a, b in zip(decoded[10:-1], run.arrivals[10:-1]))
    assert mismatches == 0, mismatches

    fcfs_run = lk.simulate(lk.SimConfig("fcfs", "periodic", 0.4, 20000, omega=0.5))
    counts, exact = lk.decode_fcfs_counts(fcfs_run.attacker_arrivals, fcfs_run.departures)
    assert len(counts) == len(exact) > 0

    rr = lk.simulate(lk.SimConfig("rr", "nonstop", 0.25, 200000, seed=3))
    periods = lk.extract_busy_periods(rr.attacker_arrivals, rr.departures, "rr")
    assert all(p % 2 == 1 for p in periods)
    bits, lo, hi = lk.empirical_entropy_rate(periods, seed=1)
    assert lo <= bits <= hi and math.isfinite(bits)

    emp = lk.empirical_leakage(lk.SimConfig("rr", "nonstop", 0.25, 200000, seed=3))
    assert emp.kind == "empirical" and emp.ci is not None, emp

    csv = lk.figure2_csv(lambda_grid="0.1,0.2")
    assert "detwc" in csv and "\r" not in csv

    for bad in (("lqf", "nonstop", 1.5, 10), ("nosuch", "nonstop", 0.1, 10)):
        try:
            lk.SimConfig(*bad)
        except ValueError:
            continue
        raise AssertionError(f"accepted {bad}")

    print("leaklab_py smoke test: ok")
    print(fcfs)
    print(cfg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
