"""Recover SymSet-9, y = (2 x1 + x2)^(-2/3), as a relation in ln(y).

    python demos/quickstart.py [seed]
"""

import sys

import numpy as np

from gsr import GpConfig, RecoveredModel, equivalence_check, get_benchmark, predict_y, run


def main(seed: int = 0) -> None:
    bench = get_benchmark("SymSet-9")
    res = run(bench, GpConfig(seed=seed, wall_clock_budget=120))
    print(f"stopped after {res.generations} generations ({res.stop_reason}), "
          f"fitness {res.best_fitness:.3g}")
    model = RecoveredModel.from_dataset(res.best.phis, res.best.psis, res.fit.w,
                                        res.table_x, res.table_y, res.dataset, bench.name)
    print("fitted :", model.expression())
    print("refit  :", model.expression(refit=True))
    report = equivalence_check(model, bench)
    print(f"exact  : {report.exact} (max relative error {report.max_rel_error:.2e})")
    x = np.array([0.7, 1.3])
    print(f"y at {x.tolist()}: predicted {predict_y(model, x):.12f}, "
          f"true {bench.ground_truth(x)[0]:.12f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 0)
