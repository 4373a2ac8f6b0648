"""Tail bounds for averages of almost-multiplicative variables, checked
against exact tail probabilities on finite probability spaces.

The bound: if |X_j| <= 1, E(X_j) = mu > 0 for all j, and every subset
product satisfies |E[prod_A X_j] / mu^|A| - 1| <= eps, then

    P{ (1/N) sum X_j < mu - alpha } <= exp(-alpha^2 N / 8) + eps exp(N / 4).

This module supplies the finite spaces, the exhaustive subset check
measuring eps, the exact tail, and the bound itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product

import numpy as np

from .errors import PreconditionError, ResourceError

_SUBSET_CAP = 20
_SAMPLED_SUBSETS = 100_000


class DiscreteProbSpace:
    """Finite sample space with nonnegative weights summing to 1.

    Weights may be floats or Fractions; exact weights keep tail sums
    exact.  Points are opaque labels (indices, grid angles, tuples).
    """

    def __init__(self, points, weights):
        points = list(points)
        weights = list(weights)
        if len(points) != len(weights):
            raise PreconditionError("points and weights must align", field="weights")
        if any(w < 0 for w in weights):
            raise PreconditionError("weights must be nonnegative", field="weights")
        total = sum(weights) if self._exact(weights) else math.fsum(weights)
        if abs(float(total) - 1.0) > 1e-12:
            raise PreconditionError(
                f"weights sum to {float(total)!r}, not 1", field="weights"
            )
        self.points = points
        self.weights = weights

    @staticmethod
    def _exact(seq) -> bool:
        return all(isinstance(x, (int, Fraction)) for x in seq)

    def __len__(self):
        return len(self.points)

    @property
    def weights_float(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])

    def expectation(self, values):
        if self._exact(self.weights) and self._exact(list(values)):
            return sum(
                (Fraction(w) * Fraction(v) for w, v in zip(self.weights, values)),
                Fraction(0),
            )
        return float(np.dot(self.weights_float, np.asarray(values, dtype=float)))

    @classmethod
    def coin_product(cls, p_heads, n: int, values=(1, -1)):
        """Product of n independent coins; returns (space, variables)
        where variable j reads coordinate j.  Exact when p_heads is."""
        if n < 1 or n > 24:
            raise PreconditionError("n must be in 1..24", field="n")
        p = Fraction(p_heads) if not isinstance(p_heads, float) else p_heads
        q = 1 - p
        outcomes = list(iter_product(range(2), repeat=n))
        weights = []
        for om in outcomes:
            heads = sum(om)
            weights.append(p**heads * q ** (n - heads))
        space = cls(outcomes, weights)
        vals = (values[0], values[1])
        variables = [
            [vals[0] if om[j] == 1 else vals[1] for om in outcomes] for j in range(n)
        ]
        return space, variables


def bernstein_bound(N: int, alpha: float, eps: float) -> float:
    """exp(-alpha^2 N / 8) + eps * exp(N / 4)."""
    if N < 1:
        raise PreconditionError("N must be >= 1", field="N")
    if alpha < 0:
        raise PreconditionError("alpha must be >= 0", field="alpha")
    if not 0 <= eps < 1:
        raise PreconditionError("eps must be in [0, 1)", field="eps")
    return math.exp(-(alpha**2) * N / 8.0) + eps * math.exp(N / 4.0)


def _validated_variables(space: DiscreteProbSpace, variables):
    X = np.array([[float(v) for v in var] for var in variables])
    if X.ndim != 2 or X.shape[1] != len(space):
        raise PreconditionError("variables must align with the space")
    for j, row in enumerate(X):
        if np.abs(row).max() > 1 + 1e-12:
            raise PreconditionError(f"|X_{j + 1}| exceeds 1", field=f"X_{j + 1}")
    w = space.weights_float
    means = X @ w
    mu = float(means[0])
    if np.abs(means - mu).max() > 1e-10:
        raise PreconditionError("expectations must all be equal", field="X")
    if mu <= 0:
        raise PreconditionError("common expectation must be positive", field="X")
    return X, w, mu


@dataclass(frozen=True)
class MultiplicativeReport:
    mu: float
    max_deviation: float
    verdict: str
    exhaustive: bool
    subsets_checked: int


def check_almost_multiplicative(
    space: DiscreteProbSpace, variables, eps: float, seed: int = 0, sampled: bool = False
) -> MultiplicativeReport:
    """Measure max over nonempty subsets A of |E[prod_A X]/mu^|A| - 1|.

    Exhaustive for N <= 20; larger N raises unless sampled=True, which
    checks uniform random subsets and says so in the report.
    """
    X, w, mu = _validated_variables(space, variables)
    N = len(X)
    if N > _SUBSET_CAP and not sampled:
        raise ResourceError(
            f"exhaustive subset check capped at N = {_SUBSET_CAP}; "
            "pass sampled=True for a randomized non-exhaustive check",
            budget=_SUBSET_CAP,
            required=N,
        )
    worst = 0.0
    if N <= _SUBSET_CAP:
        checked = (1 << N) - 1
        # depth-first over include/skip so each node costs one vector product
        stack = [(0, np.ones(len(space)), 0)]
        while stack:
            j, vec, size = stack.pop()
            if j == N:
                if size:
                    ratio = float(np.dot(w, vec)) / mu**size
                    worst = max(worst, abs(ratio - 1.0))
                continue
            stack.append((j + 1, vec, size))
            stack.append((j + 1, vec * X[j], size + 1))
        exhaustive = True
    else:
        checked = _SAMPLED_SUBSETS
        rng = np.random.default_rng(seed)
        for _ in range(checked):
            mask = rng.integers(1, 1 << N, dtype=np.uint64)
            idx = [j for j in range(N) if (int(mask) >> j) & 1]
            vec = np.ones(len(space))
            for j in idx:
                vec = vec * X[j]
            ratio = float(np.dot(w, vec)) / mu ** len(idx)
            worst = max(worst, abs(ratio - 1.0))
        exhaustive = False
    verdict = "pass" if worst <= eps else "fail"
    if not exhaustive:
        verdict += " (sampled)"
    return MultiplicativeReport(mu, worst, verdict, exhaustive, checked)


def tail_probability(space: DiscreteProbSpace, variables, alpha: float):
    """P{ (1/N) sum_j X_j < mu - alpha }, summed exactly over the space."""
    X, w, mu = _validated_variables(space, variables)
    N = len(X)
    exact = space._exact(space.weights) and all(
        space._exact(list(var)) for var in variables
    )
    if exact:
        thr = Fraction(mu) - Fraction(alpha)
        total = Fraction(0)
        for i, wt in enumerate(space.weights):
            s = sum((Fraction(var[i]) for var in variables), Fraction(0)) / N
            if s < thr:
                total += Fraction(wt)
        return total
    means = X.mean(axis=0)
    mask = means < mu - alpha
    return float(math.fsum(space.weights_float[mask]))


def bernstein_battery(space: DiscreteProbSpace, variables, alphas=None, seed: int = 0):
    """Rows of (alpha, exact tail, bound at the measured deviation) for a
    grid of alphas; the CSV surface behind the CLI."""
    X, w, mu = _validated_variables(space, variables)
    N = len(X)
    report = check_almost_multiplicative(
        space, variables, eps=math.inf, seed=seed, sampled=N > _SUBSET_CAP
    )
    eps_hat = report.max_deviation
    if alphas is None:
        alphas = [0.05 * k for k in range(1, 41)]
    rows = []
    for a in alphas:
        rows.append(
            {
                "alpha": float(a),
                "tail": float(tail_probability(space, variables, a)),
                # the bound's premise needs eps < 1; report inf otherwise
                "bound": bernstein_bound(N, a, eps_hat) if eps_hat < 1 else math.inf,
            }
        )
    return {
        "N": N,
        "mu": mu,
        "deviation": report.max_deviation,
        "exhaustive": report.exhaustive,
        "rows": rows,
    }
