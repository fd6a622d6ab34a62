"""Independent oracles used to pin expected values in the tests.

Everything here deliberately avoids the production code paths it is used to
check: denominators come from explicit subset enumeration, derivatives from
central finite differences, separation verdicts from sign inspection or a
direction grid.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from felogit import PanelDataset, difference_vectors, informative_subset


def enum_denominator(covariates, outcomes, beta):
    """Brute-force sum of exp(subset score) over all sequences with the
    observed choice total."""
    covariates = np.asarray(covariates, dtype=np.float64)
    outcomes = np.asarray(outcomes)
    beta = np.asarray(beta, dtype=np.float64)
    T = outcomes.shape[0]
    k = int(outcomes.sum())
    s = covariates @ beta
    total = 0.0
    for ones in itertools.combinations(range(T), k):
        total += math.exp(sum(s[t] for t in ones))
    return total


def enum_log_denominator(covariates, outcomes, beta):
    """Stable log of :func:`enum_denominator` via an explicit max shift."""
    covariates = np.asarray(covariates, dtype=np.float64)
    outcomes = np.asarray(outcomes)
    beta = np.asarray(beta, dtype=np.float64)
    T = outcomes.shape[0]
    k = int(outcomes.sum())
    s = covariates @ beta
    sums = np.array([
        sum(s[t] for t in ones) for ones in itertools.combinations(range(T), k)
    ])
    m = sums.max()
    return float(m + np.log(np.exp(sums - m).sum()))


def central_diff_gradient(f, x, h=1e-6):
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def central_diff_jacobian(f, x, h=1e-6):
    x = np.asarray(x, dtype=np.float64)
    cols = []
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((f(x + e) - f(x - e)) / (2.0 * h))
    return np.column_stack(cols)


def sign_oracle_p1(data: PanelDataset) -> bool:
    """Scalar-covariate separation rule: separated iff every nonzero
    difference vector shares a weak sign."""
    assert data.p == 1
    sub, _ = informative_subset(data)
    values = []
    for i in range(sub.n):
        for dv in difference_vectors(sub.slice(i)):
            v = float(dv.v[0])
            if v != 0.0:
                values.append(v)
    if not values:
        return True  # no constraints at all: any direction separates weakly
    return all(v >= 0.0 for v in values) or all(v <= 0.0 for v in values)


def pooled_separable_grid(xs, ys, n_angles=7200) -> bool:
    """Scalar-covariate pooled oracle: scan unit directions (b0, b) for a
    weak separator of (2y-1)(b0 + b*x)."""
    xs = np.asarray(xs, dtype=np.float64)
    signs = 2.0 * np.asarray(ys, dtype=np.float64) - 1.0
    for theta in np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False):
        margins = signs * (math.cos(theta) + math.sin(theta) * xs)
        if (margins >= -1e-12).all():
            return True
    return False


def random_panel(rng, n=None, T=None, p=None, n_max=20, T_max=5, p_max=3) -> PanelDataset:
    """Random panel with standard-normal covariates and fair-coin outcomes,
    redrawn until at least one individual is informative."""
    n = int(rng.integers(1, n_max + 1)) if n is None else n
    T = int(rng.integers(2, T_max + 1)) if T is None else T
    p = int(rng.integers(1, p_max + 1)) if p is None else p
    x = rng.standard_normal((n, T, p))
    while True:
        y = (rng.random((n, T)) < 0.5).astype(np.int8)
        k = y.sum(axis=1)
        if ((k > 0) & (k < T)).any():
            return PanelDataset.from_arrays(x, y)
