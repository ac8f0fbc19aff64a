# Copyright 2026 The gbdrl Authors
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Independent reference values for the Case Study 1 family.

Enumerates every y with y1 + y2 = 1 and y4 + y5 <= 1, solves the convex NLP
in x with scipy (SLSQP and trust-constr from several starts, best feasible point kept)
and prints JSON. The C++ tests freeze these numbers.

    python3 tests/oracles/case_study_oracle.py > tests/oracles/golden.json
"""

import itertools
import json
import sys
import warnings

import numpy as np
from scipy.optimize import minimize, NonlinearConstraint, Bounds

U = 10.0
CAP = 10.0


def objective(x):
    x3, x5, x9, x11, x13, x16 = x
    return (-10 * x3 - 15 * x5 - 15 * x9 + 15 * x11 + 5 * x13 - 20 * x16
            + np.exp(x3) + np.exp(x5 / 1.2) - 60 * np.log(x11 + x13 + 1) + 140)


def rows(x, y):
    """Left-hand sides written as g(x, y) <= 0."""
    x3, x5, x9, x11, x13, x16 = x
    y1, y2, y3, y4, y5 = y
    return np.array([
        -np.log(x11 + x13 + 1),
        -x3 - x5 - 2 * x9 + x11 + 2 * x16,
        -x3 - x5 - 0.75 * x9 + x11 + 2 * x16,
        x9 - x16,
        2 * x9 - x11 - 2 * x16,
        -0.5 * x11 + x13,
        0.2 * x11 - x13,
        np.exp(x3) - U * y1 - 1,
        np.exp(x5 / 1.2) - U * y2 - 1,
        1.25 * x9 - U * y3,
        x11 + x13 - U * y4,
        -2 * x9 + 2 * x16 - U * y5,
    ])


def solve_nlp(y, x9_lo):
    lo = np.array([0, 0, x9_lo, 0, 0, 0], dtype=float)
    hi = np.array([2, 2, 2, CAP, CAP, 3], dtype=float)
    best = None
    rng = np.random.default_rng(0)
    starts = [lo.copy(), np.clip(np.full(6, 0.1) + lo, lo, hi)] + [lo + rng.random(6) * (hi - lo) for _ in range(12)]
    for x0 in starts:
        for method in ("SLSQP", "trust-constr"):
            if method == "SLSQP":
                r = minimize(objective, x0, method=method, bounds=list(zip(lo, hi)),
                             constraints=[{"type": "ineq", "fun": lambda x: -rows(x, y)}],
                             options={"ftol": 1e-13, "maxiter": 1000})
            else:
                r = minimize(objective, x0, method=method, bounds=Bounds(lo, hi),
                             constraints=[NonlinearConstraint(lambda x: rows(x, y), -np.inf, 0.0)],
                             options={"gtol": 1e-12, "xtol": 1e-14, "maxiter": 5000})
            if np.max(rows(r.x, y)) > 1e-7 or np.any(r.x < lo - 1e-9) or np.any(r.x > hi + 1e-9):
                continue
            if best is None or r.fun < best.fun:
                best = r
    if best is None:
        return None
    return float(best.fun), best.x.tolist()


def case(c, x9_lo=0.0):
    out = {"coefficients": list(c), "x9_demand": x9_lo, "values": {}}
    best = None
    for y in itertools.product([0, 1], repeat=5):
        if y[0] + y[1] != 1 or y[3] + y[4] > 1:
            continue
        key = "".join(map(str, y))
        s = solve_nlp(y, x9_lo)
        if s is None:
            out["values"][key] = None
            continue
        z = s[0] + float(np.dot(c, y))
        out["values"][key] = z
        if best is None or z < best[0] - 1e-12:
            best = (z, key)
    out["optimum"] = best[0] if best else None
    out["y_opt"] = best[1] if best else None
    return out


def main():
    warnings.simplefilter("ignore")
    cases = [
        case((5, 8, 6, 10, 6)),
        case((1, 1, 1, 1, 1)),
        case((39, 39, 39, 39, 7)),
        case((20, 3, 17, 9, 2)),
        case((5, 8, 6, 10, 6), x9_lo=0.5),
    ]
    json.dump({"cases": cases}, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
