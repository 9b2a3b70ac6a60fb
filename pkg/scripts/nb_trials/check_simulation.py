#!/usr/bin/env python
"""Desk-scale Monte Carlo checks of empirical power and type I error.

Usage: python check_simulation.py [replications] [workers]
"""

import sys
import time
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

import logging

from backend.nb_trials.cli.tables import DESIGNS, make_trial
from backend.nb_trials.core.config import settings
from backend.nb_trials.core.models import AnalysisModel, Hypothesis
from backend.nb_trials.sim.runner import monte_carlo, null_rates

logging.basicConfig(level=logging.WARNING, format='%(message)s')

POWER_TOLERANCE = 1.5   # percentage points
TYPE1_TOLERANCE = 0.6

# (label, design, λ0, λ1, κ0, κ1, hypothesis, n, published SIM %)
POWER_ROWS = [
    ("NI design 1", 1, 0.6, 0.6, 1.0, 1.0, Hypothesis.noninferiority(1.3), 928, 79.65),
    ("NI design 2", 2, 0.6, 0.6, 1.0, 1.0, Hypothesis.noninferiority(1.3), 864, 80.00),
    ("heterogeneous κ", 1, 0.6, 0.48, 2.0, 1.0, Hypothesis.noninferiority(1.3), 358, 79.48),
    ("equivalence", 1, 0.6, 0.6, 1.0, 1.0, Hypothesis.equivalence(1.3), 1242, 79.83),
]

# (label, design, λ0, κ, exp(β), M_r0, n, published NB %, published quasi-Poisson %)
TYPE1_ROWS = [
    ("design 1", 1, 0.6, 1.0, 0.65, 1.2, 192, 2.61, 2.87),
    ("design 1", 1, 0.6, 1.0, 0.80, 1.2, 412, 2.49, 2.79),
    ("design 2", 2, 0.6, 1.0, 0.65, 1.2, 176, 2.81, 3.59),
    ("design 2", 2, 0.6, 1.0, 0.80, 1.2, 381, 2.52, 3.40),
]


def check_power(replications: int, workers: int) -> bool:
    print("\n⚡ Empirical power")
    ok = True
    for label, design_no, lambda0, lambda1, kappa0, kappa1, hypothesis, n, published in POWER_ROWS:
        design, dropout = DESIGNS[design_no]()
        trial = make_trial(design, dropout, (lambda0, lambda1), (kappa0, kappa1), hypothesis)
        report = monte_carlo(trial, n, replications=replications, workers=workers)
        ours = 100.0 * report.rejection_rate
        good = abs(ours - published) <= POWER_TOLERANCE
        ok &= good
        print(f"  {'✅' if good else '❌'} {label:.<20} n={n:<5} sim {ours:6.2f}%  published {published:6.2f}%")
    return ok


def check_type1(replications: int, workers: int) -> bool:
    print("\n🎯 One-sided type I error on the NI boundary")
    ok = True
    for label, design_no, lambda0, kappa, exp_beta, mr0, n, published_nb, published_qp in TYPE1_ROWS:
        design, dropout = DESIGNS[design_no]()
        trial = make_trial(
            design, dropout, (lambda0, lambda0 * exp_beta), (kappa, kappa), Hypothesis.noninferiority(mr0)
        )
        truth = null_rates(trial)
        nb = monte_carlo(trial, n, truth=truth, replications=replications, workers=workers)
        qp = monte_carlo(
            trial, n, truth=truth, replications=replications, workers=workers,
            analysis=AnalysisModel.QUASI_POISSON,
        )
        nb_pct, qp_pct = 100.0 * nb.rejection_rate, 100.0 * qp.rejection_rate
        good = abs(nb_pct - published_nb) <= TYPE1_TOLERANCE
        if design_no == 2:
            good &= qp_pct > 3.0
        ok &= good
        print(
            f"  {'✅' if good else '❌'} {label:.<12} n={n:<5} NB {nb_pct:5.2f}% (published {published_nb:.2f}%)"
            f"  quasi-Poisson {qp_pct:5.2f}% (published {published_qp:.2f}%)"
        )
    return ok


def main():
    replications = int(sys.argv[1]) if len(sys.argv) > 1 else settings.sim_replications
    workers = int(sys.argv[2]) if len(sys.argv) > 2 else settings.sim_workers

    print("=" * 70)
    print(f"🎲 Simulation checks: {replications} replications, {workers} worker(s), seed {settings.sim_seed}")
    print("=" * 70)

    start = time.perf_counter()
    power_ok = check_power(replications, workers)
    type1_ok = check_type1(replications, workers)
    print(f"\nFinished in {time.perf_counter() - start:.1f}s")

    print("\n" + "=" * 70)
    print("✅ All checks passed" if power_ok and type1_ok else "❌ Some checks failed")
    print("=" * 70)
    sys.exit(0 if power_ok and type1_ok else 1)


if __name__ == "__main__":
    main()
