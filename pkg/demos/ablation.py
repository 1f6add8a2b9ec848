"""GSR against s-GSR (g(y) fixed to y) on SymSet-2 with matched seeds and budgets.

    python demos/ablation.py [runs] [seconds-per-run]
"""

import sys

import numpy as np

from gsr.cli import execute
from gsr.gp import GpConfig


def main(runs: int = 3, budget: float = 30.0) -> None:
    for sgsr in (False, True):
        recs = [execute("SymSet-2", GpConfig(seed=s, wall_clock_budget=budget, sgsr_mode=sgsr))[0]
                for s in range(runs)]
        label = "s-GSR" if sgsr else "GSR"
        print(f"{label:5s} mean test RMSE {np.mean([r.test_rmse for r in recs]):.3g}, "
              f"exact {sum(r.exact for r in recs)}/{runs}")
        print(f"      seed 0: {recs[0].expression[:120]}")


if __name__ == "__main__":
    args = sys.argv[1:]
    main(int(args[0]) if args else 3, float(args[1]) if len(args) > 1 else 30.0)
