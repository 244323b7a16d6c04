"""Exact SSE(eps) against its order-2 truncation for each data set of the fixture.

Prints the truncation coefficients, the estimate eps_hat, the stationary point of
the quadratic and the exact minimizer found by golden-section search.
"""

import numpy as np

from perturbstat import gallant, linmodel as lm, oracle


def main() -> None:
    des = gallant.design()
    grid = np.linspace(-0.2, 0.2, 9)
    for k in range(4):
        y = gallant.response(k)
        s = lm.sse_series(des, y, 2)
        print(f"data set {k + 1}: SSE ~ {s[0]:.4f} + {s[1]:.4f} e + {s[2]:.4f} e^2")
        print(f"  eps_hat {lm.epsilon_hat(des, y): .4f}   stationary {lm.sse_stationary_point(des, y): .4f}"
              f"   exact minimizer {oracle.minimize_sse(des, y): .4f}")
        for e in grid:
            quad = s[0] + e * s[1] + e * e * s[2]
            print(f"    eps {e: .3f}  exact {lm.sse_exact(des, y, e):10.4f}  quadratic {quad:10.4f}")


if __name__ == "__main__":
    main()
