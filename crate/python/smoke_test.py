"""Smoke test for the ratebargain extension module.

Build and run from the repository root:

    cargo build --release -p ratebargain-py --features extension-module
    cp target/release/libratebargain_py.so python/ratebargain.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import ratebargain as rb

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "crates", "core", "fixtures")


def check(cond, msg):
    if not cond:
        raise SystemExit(f"FAILED: {msg}")
    print(f"ok  {msg}")


def main():
    fig2 = rb.load_scenario(os.path.join(FIXTURES, "fig2.json"))
    check(fig2.users == 2 and fig2.nt == 2 and fig2.nr == 2, "fig2 loads as a 2x2 two-user system")

    again = rb.Scenario.from_json(fig2.to_json())
    check(again.rho == fig2.rho and again.eta == fig2.eta, "json round trip keeps the levels")

    uniform = fig2.uniform_profile()
    r = fig2.rates(uniform)
    check(len(r) == 2 and all(x > 0 for x in r), f"uniform-power rates {r}")

    ne = fig2.nash_equilibrium()
    check(ne["converged"], f"equilibrium converged in {ne['iterations']} sweeps")
    check(max(abs(a - b) for a, b in zip(fig2.rates(ne["profile"]), ne["rates"])) < 1e-9, "NE rates recompute")
    for q in ne["profile"]:
        check(abs(sum(q[k][k].real for k in range(2)) - 1.0) < 1e-6, "NE uses the full power budget")

    nb = fig2.nash_bargaining(fast=True)
    check(nb["exists"], f"bargaining point {nb['rates']} beats NE {nb['ne_rates']}")
    check(all(a > b for a, b in zip(nb["rates"], nb["ne_rates"])), "NB strictly improves both users")

    boundary = fig2.pareto_boundary(fast=True)
    xs = [p[0] for p in boundary["points"]]
    check(xs == sorted(xs) and len(xs) > 10, f"boundary has {len(xs)} sorted points")

    comps = fig2.comparators(fast=True)
    check([c["kind"] for c in comps][0] == "ne", "comparators start with NE")

    corner = fig2.ic_boundary(3, fast=True)
    check(len(corner) == 1, f"stage-3 cancellation corner {corner[0]}")

    j = rb.jain_fairness_index([1.0, 1.0], [2.0, 2.0])
    check(math.isclose(j, 1.0), "JFI of proportional rates is 1")

    # scalar interference-free channel: rate is log2(1 + snr)
    one = [[1.0 + 0j]]
    zero = [[0j]]
    siso = rb.Scenario.two_user(one, zero, zero, one, 15.0, 0.0)
    full = [[[1.0 + 0j]], [[1.0 + 0j]]]
    check(all(math.isclose(x, 4.0) for x in siso.rates(full)), "SISO rate log2(16) = 4")

    try:
        siso.rates([[[2.0 + 0j]], [[1.0 + 0j]]])
    except ValueError as e:
        check(True, f"over-budget profile rejected ({e})")
    else:
        raise SystemExit("FAILED: over-budget profile accepted")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
