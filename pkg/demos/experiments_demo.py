"""Run every registered experiment at small sizes and print the verdicts.

The CLI equivalent is ``ptlab experiment <name> --config '{...}'``.

Run: python3 demos/experiments_demo.py
"""
from ptlab.experiments import REGISTRY, config_from_json, run_experiment

SMALL = {
    "membership-prob": {"n": 5},
    "member-quasirandom": {"samples": 40, "min_members": 10},
    "rho-concentration": {"n": 60, "graphs": 20, "min_within": 19},
    "blowup-farness": {},
    "indistinguishability": {"trials": 20000},
    "double-sampling": {"subsamples": 100, "sequence_trials": 5000, "marginal_trials": 40000},
    "pot-calibration": {"graphs": 5, "trials": 20000},
}

for name in REGISTRY:
    rep = run_experiment(config_from_json(name, SMALL.get(name, {}), seed=1))
    print(f"{name:22s} {rep['verdict']:5s} {rep['claim']}")
