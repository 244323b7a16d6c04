"""Treatment-control data for the nonlinear model
``Y = t1 x1 + t2 x2 + t0 exp(eps x3) + e`` (after Gallant, 1987, Ch. 1, Ex. 1,
with x2 redrawn from U(1, 2)), and the published reference numbers.

Expanding ``exp(eps x3) = 1 + eps x3 + eps^2 x3^2 / 2 + ...`` turns the model
into a perturbed linear one with rows (x0, x1, x2) = (1, x1, x2), X_1 carrying
x3 in the first row and X_2 carrying x3^2 / 2 there.
"""

from __future__ import annotations

import io

import numpy as np

from .linmodel import (PerturbedDesign, beta_series, epsilon_hat, expand_gram, f_series,
                       f_statistic, sse_stationary_point, standard_errors)

COLUMNS = ("x0", "x1", "x2", "x3", "Y0", "Y1", "Y2", "Y3")

_TABLE = """\
1 1 1.3420 6.28 6.92 7.0451 7.6532 8.6632
1 0 1.5813 9.86 4.21 4.4267 5.4939 7.5804
1 1 1.1043 9.11 4.34 4.5297 5.4928 7.3125
1 0 1.6867 8.43 3.81 3.9869 4.8595 6.4576
1 1 1.5164 8.11 3.99 4.1633 4.9944 6.4946
1 0 1.5672 1.82 3.95 3.9820 4.1358 4.3445
1 1 1.9644 6.58 6.28 6.4206 7.0637 8.1464
1 0 1.5411 5.02 5.63 5.7309 6.1986 6.9320
1 1 1.0064 6.52 4.05 4.1857 4.8217 5.8897
1 0 1.8726 3.75 5.53 5.6102 5.9462 6.4438
1 1 1.0314 9.86 5.09 5.3012 6.3684 8.4550
1 0 1.9190 7.31 6.16 6.3080 7.0388 8.3106
1 1 1.6507 0.47 5.80 5.8132 5.8514 5.9001
1 0 1.7083 0.07 4.98 4.9816 4.9873 4.9943
1 1 1.1261 4.07 4.97 5.0493 5.4176 5.9709
1 0 1.1693 4.61 5.38 5.4791 5.9032 6.5561
1 1 1.8063 0.17 7.19 7.1955 7.2092 7.2264
1 0 1.7086 6.99 5.19 5.3309 6.0228 7.2096
1 1 1.4324 4.39 6.20 6.2895 6.6907 7.3021
1 0 1.5265 0.39 5.14 5.1441 5.1757 5.2158
1 1 1.7009 4.73 4.37 4.4670 4.9038 5.5798
1 0 1.5807 9.42 3.82 4.0196 5.0253 6.9523
1 1 1.5538 8.90 5.38 5.5706 6.5055 8.2547
1 0 1.4150 3.02 3.12 3.1812 3.4459 3.8250
1 1 1.8566 0.77 5.06 5.0730 5.1360 5.2176
1 0 1.5010 3.31 4.08 4.1479 4.4406 4.8653
1 1 1.1584 4.51 5.72 5.8164 6.2300 6.8639
1 0 1.3310 2.65 3.89 3.9459 4.1756 4.4991
1 1 1.4981 0.08 6.12 6.1169 6.1234 6.1314
1 0 1.0008 6.11 2.84 2.9685 3.5571 4.5271
"""

TABLE = np.loadtxt(io.StringIO(_TABLE))
N = TABLE.shape[0]
H0 = np.ones(3)

# values as printed, rounded to four decimals (fewer where printed so)
PUBLISHED = {
    "gram": {
        "B0": [[30, 15, 44.8534], [15, 15, 21.7371], [44.8534, 21.7371, 69.3119]],
        "C0": [[1.1523, -0.1314, -0.7045], [-0.1314, 0.1372, 0.0420], [-0.7045, 0.0420, 0.4571]],
        "B1": [[294.62, 74.55, 214.3236], [74.55, 0, 0], [214.3236, 0, 0]],
        "C1": [[-20.6598, 1.3236, 9.3912], [1.3236, -0.0332, -0.4397], [9.3912, -0.4397, -3.7610]],
        "B2": [[2035.2007, 264.923, 738.250], [264.923, 0, 0], [738.250, 0, 0]],
        "C2": [[-164.4712, 32.577, 147.827], [32.577, -4.3659, -22.4049],
               [147.8266, -22.4049, -110.1712]],
    },
    "eps_hat": [0.0505, 0.0195, -0.0227, -0.1861],
    "first_order": {
        "theta": [[2.0153, 1.0642, 1.6228], [2.2057, 1.0629, 1.5645],
                  [3.0969, 1.0545, 1.2967], [4.6550, 1.0537, 0.8177]],
        "se": [[0.9632, 0.3329, 0.6068], [0.9513, 0.3287, 0.5993],
               [0.9724, 0.3360, 0.6126], [1.3455, 0.4650, 0.8476]],
        "F": [48.7884, 55.2427, 80.1393, 73.7195],
    },
    "at_zero": {
        "theta": [[2.0142, 1.0640, 1.6235], [2.2016, 1.0618, 1.5673],
                  [3.0930, 1.0549, 1.2986], [4.6511, 1.0540, 0.8199]],
        "se": [[0.9605, 0.3327, 0.6064], [0.9499, 0.3283, 0.5984],
               [0.9725, 0.3362, 0.6126], [1.3450, 0.4650, 0.8472]],
        "F": [48.8080, 55.3330, 80.0064, 73.7090],
    },
}

TOLERANCES = {"gram": 1e-3, "eps_hat": 5e-4, "theta": 1e-3, "F": 5e-3, "se": 5e-3}


def design() -> PerturbedDesign:
    x0 = TABLE[:, 0:3].T
    x3 = TABLE[:, 3]
    x1 = np.zeros_like(x0)
    x1[0] = x3
    x2 = np.zeros_like(x0)
    x2[0] = 0.5 * x3 ** 2
    return PerturbedDesign.of(x0, x1, x2)


def response(k: int) -> np.ndarray:
    return TABLE[:, 4 + k].copy()


def analyse(k: int, des: PerturbedDesign | None = None) -> dict:
    """All reported quantities for data set ``k`` (0-based)."""
    des = design() if des is None else des
    y = response(k)
    e = epsilon_hat(des, y)
    betas = beta_series(des, y, 1)
    fs = f_series(des, y, H0, 1)
    return {
        "eps_hat": e,
        "sse_stationary_point": sse_stationary_point(des, y),
        "first_order": {
            "theta": (betas[0] + e * betas[1]).tolist(),
            "se": standard_errors(des, y, e, 1).tolist(),
            "F": fs[0] + e * fs[1],
        },
        "at_zero": {
            "theta": betas[0].tolist(),
            "se": standard_errors(des, y, 0.0, 0).tolist(),
            "F": fs[0],
        },
        "exact_at_eps_hat": {
            "F": f_statistic(des, y, H0, e),
        },
    }


def _dev(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def reproduce() -> dict:
    """Compute every published quantity and its deviation from the printed value."""
    des = design()
    exp = expand_gram(des, 2)
    gram = {"B0": exp.gram.coefficient(0), "B1": exp.gram.coefficient(1), "B2": exp.gram.coefficient(2),
            "C0": exp.inverse.coefficient(0), "C1": exp.inverse.coefficient(1),
            "C2": exp.inverse.coefficient(2)}
    report: dict = {"gram": {}, "data_sets": []}
    for name, mat in gram.items():
        dev = _dev(mat, PUBLISHED["gram"][name])
        report["gram"][name] = {"computed": mat.tolist(), "published": PUBLISHED["gram"][name],
                                "max_deviation": dev, "within_tolerance": dev <= TOLERANCES["gram"]}
    for k in range(4):
        res = analyse(k, des)
        entry = {"data_set": k + 1, "computed": res, "deviation": {}}
        dev = abs(res["eps_hat"] - PUBLISHED["eps_hat"][k])
        entry["deviation"]["eps_hat"] = dev
        for block in ("first_order", "at_zero"):
            for q in ("theta", "se", "F"):
                entry["deviation"][f"{block}.{q}"] = _dev(res[block][q], PUBLISHED[block][q][k])
        entry["within_tolerance"] = {
            key: val <= TOLERANCES[key.split(".")[-1]] for key, val in entry["deviation"].items()}
        report["data_sets"].append(entry)
    return report
