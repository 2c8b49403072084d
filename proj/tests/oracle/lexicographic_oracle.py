"""Frozen oracle for random 2x2 Nehari symbols.

Generates seeded random symbols of degree <= 2 and, for each, minimises
(sup s_0, sup s_1) of Phi - Q lexicographically over analytic matrix
polynomials Q of degree <= d for every d in DEGREES. Both stages are convex
programs:

  stage 1: minimise sup_l ||E(z_l)||_2
  stage 2: minimise sup_l ||E(z_l)||_*  subject to ||E(z_l)||_2 <= s0* (1 + SLACK)

For 2x2 errors the nuclear norm is s_0 + s_1, and on the capped set s_0 is
flat at the cap, so stage 2 minimises sup s_1. Output goes to
tests/data/random_nehari_oracle.json and is read by the acceptance binary.
"""

import argparse
import json
import pathlib

import cvxpy as cp
import numpy as np

SEED = 20240611
COUNT = 10
SYMBOL_DEGREE = 2
DEGREES = (4, 16)
GRID = 512
FINE_GRID = 8192
SLACK = 1e-7


def random_symbol(rng):
    return {
        k: rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        for k in range(-SYMBOL_DEGREE, SYMBOL_DEGREE + 1)
    }


def sample(coeffs, nodes):
    out = np.zeros((len(nodes), 2, 2), dtype=complex)
    for k, c in coeffs.items():
        out += nodes[:, None, None] ** k * c
    return out


def profiles(coeffs, q, grid):
    nodes = np.exp(2j * np.pi * np.arange(grid) / grid)
    err = sample(coeffs, nodes) - sample(dict(enumerate(q)), nodes)
    s = np.linalg.svd(err, compute_uv=False)
    return float(s[:, 0].max()), float(s[:, 1].max())


def lexicographic(coeffs, degree, grid=GRID):
    nodes = np.exp(2j * np.pi * np.arange(grid) / grid)
    phi = sample(coeffs, nodes)
    q = [cp.Variable((2, 2), complex=True) for _ in range(degree + 1)]
    errs = [phi[l] - sum(nodes[l] ** k * q[k] for k in range(degree + 1)) for l in range(grid)]

    s0 = cp.Variable()
    cp.Problem(cp.Minimize(s0), [cp.sigma_max(e) <= s0 for e in errs]).solve(solver=cp.CLARABEL)
    cap = float(s0.value) * (1.0 + SLACK)

    ky = cp.Variable()
    cons = [cp.normNuc(e) <= ky for e in errs] + [cp.sigma_max(e) <= cap for e in errs]
    cp.Problem(cp.Minimize(ky), cons).solve(solver=cp.CLARABEL)
    qv = [v.value for v in q]
    return qv, float(s0.value)


def encode(coeffs):
    return {
        "partition": {"m1": 2, "m2": 0, "n1": 2, "n2": 0},
        "coeffs": [
            {"k": k, "re": c.real.tolist(), "im": c.imag.tolist()} for k, c in sorted(coeffs.items())
        ],
    }


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", type=pathlib.Path,
                        default=pathlib.Path(__file__).resolve().parent.parent / "data" / "random_nehari_oracle.json")
    parser.add_argument("--count", type=int, default=COUNT)
    args = parser.parse_args()

    rng = np.random.default_rng(SEED)
    cases = []
    for i in range(args.count):
        coeffs = random_symbol(rng)
        case = {"symbol": encode(coeffs), "oracle": []}
        for degree in DEGREES:
            q, stage1 = lexicographic(coeffs, degree)
            s0, s1 = profiles(coeffs, q, FINE_GRID)
            print(f"{i} degree {degree}: stage1 {stage1:.9f}  s0 {s0:.9f}  s1 {s1:.9f}", flush=True)
            case["oracle"].append({"degree": degree, "s0": s0, "s1": s1})
        cases.append(case)
    doc = {"seed": SEED, "degrees": list(DEGREES), "grid": GRID, "fine_grid": FINE_GRID,
           "slack": SLACK, "cases": cases}
    args.out.write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
