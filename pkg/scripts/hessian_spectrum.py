"""
Smallest Hessian eigenvalue of F_1 under mesh refinement.

The Hessian of the random-diffusion tracking term is compact in L2, so its
smallest eigenvalue on the range tends to zero as the mesh is refined and
only the alpha term keeps the problem strongly convex.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from src.control import LQProblem, example1_spec, f1_hessian_min_eig  # noqa: E402
from src.stochastic import draw  # noqa: E402


def hessian_spectrum(sizes=(2, 4, 8), N: int = 4, seed: int = 0):
    rows = []
    for n in sizes:
        problem = LQProblem(example1_spec(n=n))
        samples = draw(problem.spec.distribution, N, seed)
        rows.append((n, f1_hessian_min_eig(problem, samples)))
    return rows


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[2, 4, 8])
    parser.add_argument("--N", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    for n, value in hessian_spectrum(args.sizes, args.N, args.seed):
        print(f"n={n:>3}  min eigenvalue on range = {value:.6e}")
