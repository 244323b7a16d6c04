"""Rank increments of the augmented matrices and the resulting Laurent inverse.

Runs the 2x2 example with a simple pole, a Jordan block with a double pole and a
regular series, and checks each inverse pointwise.
"""

import numpy as np

from perturbstat.laurent import AnalyticMatrixSeries, build_augmented, invert_series
from perturbstat.numerics import numeric_rank
from perturbstat.oracle import pointwise_residual

CASES = {
    "simple pole": AnalyticMatrixSeries.of([[1, 1], [1, 1]], [[-1, 1], [-2, -1]]),
    "double pole": AnalyticMatrixSeries.of([[0, 1], [0, 0]], np.eye(2)),
    "regular": AnalyticMatrixSeries.of([[2, 1], [1, 3]], [[0, 1], [1, 0]]),
}


def main() -> None:
    np.set_printoptions(precision=4, suppress=True)
    for name, series in CASES.items():
        n = series.shape[0]
        ranks = [numeric_rank(build_augmented(series, t).block) for t in range(4)]
        inv = invert_series(series, 2)
        print(f"{name}: ranks of augmented matrices {ranks} (n = {n}), pole order {inv.pole_order}")
        for k in range(-inv.pole_order, 3):
            print(f"  Y[{k}] =\n{inv.coefficient(k)}")
        res = pointwise_residual(series, inv, [1e-2, 1e-3])
        print(f"  max |A Y - I| on eps in (1e-2, 1e-3): {res:.2e}\n")


if __name__ == "__main__":
    main()
