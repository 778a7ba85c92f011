"""
A shortened run of the whole method and two ablations
======================================================

Default settings take a few minutes; this uses fewer repeats and epochs.
"""

from faultloc.config import parse_config_text
from faultloc.metrics import aggregate
from faultloc.pipeline import run_pipeline

cfg = parse_config_text("""
repeats = 3
boost.rounds = 3
boost.weak.epochs = 8
grid.w_hard = 0.8
""")

full = run_pipeline(cfg, baselines=True)
print("selected parameters", full.selected)
print("pool per class", full.pool_counts[0], "test rows", full.test_size)


def line(name, reports):
    agg = aggregate(reports)["accuracy"]
    print(f"{name:12s} accuracy {agg['mean']:.3f} +- {agg['std']:.3f}")


line("full", full.reports)
line("cnn alone", full.baselines["cnn"])
line("fcn alone", full.baselines["fcn"])
for variant in ("no_sg", "no_m"):
    line(variant, run_pipeline(cfg, variant=variant).reports)
