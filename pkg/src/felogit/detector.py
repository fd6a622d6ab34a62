"""Existence and uniqueness checks for the conditional ML estimate.

Two conditions are probed before estimation. First, a rank condition: the
matrix stacking every individual's alternative attribute vectors, centered at
their softmax-weighted mean, must have full column rank (checked numerically
at a handful of beta values). Second, a separation condition: the estimate
exists if and only if no nonzero direction weakly dominates every attribute
difference, which reduces to a box-constrained quadratic program reaching a
zero minimum. Each constraint vector is unit-normalized so the decision
threshold is scale-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import QP_STATIONARY, QP_ZERO, qp_minimize
from .altsets import DEFAULT_ENUMERATION_GUARD, attribute_batches
from .errors import QpConvergenceError
from .panel import PanelDataset, informative_subset

STATUS_EXISTS = "exists_unique"
STATUS_SEPARATED = "separated"
STATUS_RANK_DEFICIENT = "rank_deficient"

DEFAULT_QP_TOL = 1e-8
DEFAULT_KKT_TOL = 1e-6
DEFAULT_QP_MAX_ITER = 100_000
DEFAULT_RANK_SEED = 0
_N_RANDOM_PROBES = 5


@dataclass(frozen=True)
class ProbeRank:
    """Numerical rank of the centered attribute matrix at one beta value."""

    beta: np.ndarray
    singular_values: np.ndarray
    rank: int


@dataclass(frozen=True)
class RankCheckResult:
    """Outcome of probing the rank condition at finitely many beta values.

    The condition is quantified over all beta; probing can certify failure
    but only gives evidence for success, so ``rank_ok`` means "full rank at
    every probe", not a proof.
    """

    p: int
    probes: tuple[ProbeRank, ...]

    @property
    def rank_ok(self) -> bool:
        return all(pr.rank == self.p for pr in self.probes)


@dataclass(frozen=True)
class QpProblem:
    """Stacked nonzero attribute-difference vectors and their unit copies."""

    vectors: np.ndarray     # (m, p) deduplicated, zero rows removed
    normalized: np.ndarray  # (m, p) unit rows

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape != self.normalized.shape:
            raise ValueError("vectors and normalized must be matching (m, p) arrays")
        norms = np.linalg.norm(self.vectors, axis=1)
        if self.size and not (norms > 0).all():
            raise ValueError("QpProblem rows must be nonzero")
        unit = np.linalg.norm(self.normalized, axis=1)
        if self.size and not np.allclose(unit, 1.0, atol=1e-12):
            raise ValueError("normalized rows must have unit length")

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    @property
    def p(self) -> int:
        return self.vectors.shape[1]


@dataclass
class ExistenceReport:
    """Decision record produced by the separation detectors.

    ``status`` is one of ``exists_unique``, ``separated``,
    ``rank_deficient``; the last overrides the QP verdict whenever the rank
    probe fails. ``direction`` is the unit-normalized optimal combination
    u* when separated; its inner product with every constraint vector is at
    least ``-kkt_tolerance`` (the optimality certificate, reported as
    ``kkt_margin``).
    """

    status: str
    qp_min: float | None
    direction: np.ndarray | None
    iterations: int
    n_constraints: int
    tolerance: float
    kkt_tolerance: float
    dropped_noninformative: int = 0
    kkt_margin: float | None = None
    rank: RankCheckResult | None = None
    message: str | None = None

    @property
    def rank_ok(self) -> bool | None:
        return None if self.rank is None else self.rank.rank_ok


def _dedup_nonzero(rows: np.ndarray) -> QpProblem:
    norms = np.linalg.norm(rows, axis=1)
    rows = rows[norms > 0.0]
    rows = np.unique(rows, axis=0) if rows.size else rows.reshape(0, rows.shape[1])
    norms = np.linalg.norm(rows, axis=1)
    normalized = rows / norms[:, None] if rows.size else rows.copy()
    return QpProblem(vectors=rows, normalized=normalized)


def qp_problem_from_panel(data: PanelDataset,
                          guard: int = DEFAULT_ENUMERATION_GUARD) -> QpProblem:
    """Constraint vectors of the panel separation test.

    One row per (informative individual, alternative) pair holding
    sum_t (d_t - y_t) x_t; exact zeros (always including the observed
    sequence) are dropped and duplicates merged.
    """
    sub, _ = informative_subset(data)
    blocks = []
    for idx, _alts, attrs, obs_index in attribute_batches(sub, guard):
        obs = attrs[np.arange(len(idx)), obs_index]
        blocks.append((attrs - obs[:, None, :]).reshape(-1, sub.p))
    rows = np.concatenate(blocks, axis=0) if blocks else np.zeros((0, sub.p))
    return _dedup_nonzero(rows)


def qp_problem_from_pooled(data: PanelDataset) -> QpProblem:
    """Constraint vectors of the pooled (cross-sectional) separation test.

    Observations are stacked and each contributes (2y - 1) * (1, x'), the
    intercept-augmented covariate vector signed by its outcome.
    """
    n, T, p = data.n, data.T, data.p
    x = data.covariates.reshape(n * T, p)
    y = data.outcomes.reshape(n * T).astype(np.float64)
    signs = 2.0 * y - 1.0
    rows = signs[:, None] * np.column_stack([np.ones(n * T), x])
    return _dedup_nonzero(rows)


def rank_check(data: PanelDataset, probes=None, *, seed: int = DEFAULT_RANK_SEED,
               guard: int = DEFAULT_ENUMERATION_GUARD) -> RankCheckResult:
    """Probe the rank condition at beta = 0 plus seeded random draws.

    At each probe the (r_n, p) matrix of softmax-centered attribute vectors
    is assembled over the informative individuals and its numerical rank is
    computed from singular values with threshold
    sigma_max * max(r_n, p) * machine epsilon.
    """
    sub, _ = informative_subset(data)
    p = sub.p
    if probes is None:
        rng = np.random.default_rng(seed)
        probes = [np.zeros(p)] + [rng.standard_normal(p) for _ in range(_N_RANDOM_PROBES)]
    probes = [np.asarray(b, dtype=np.float64).reshape(-1) for b in probes]
    if not probes:
        raise ValueError("probes must be non-empty")
    for b in probes:
        if b.shape != (p,):
            raise ValueError(f"probe has length {b.shape[0]}, expected {p}")

    batches = list(attribute_batches(sub, guard))
    results = []
    for beta in probes:
        blocks = []
        for idx, _alts, attrs, _obs in batches:
            e = attrs @ beta                      # (nk, r)
            e -= e.max(axis=1, keepdims=True)
            w = np.exp(e)
            w /= w.sum(axis=1, keepdims=True)
            mu = np.einsum("ir,irp->ip", w, attrs)
            blocks.append((attrs - mu[:, None, :]).reshape(-1, p))
        M = np.concatenate(blocks, axis=0)
        sv = np.linalg.svd(M, compute_uv=False)
        if sv.size and sv[0] > 0:
            thresh = sv[0] * max(M.shape) * np.finfo(np.float64).eps
            rank = int((sv > thresh).sum())
        else:
            rank = 0
        results.append(ProbeRank(beta=beta, singular_values=sv, rank=rank))
    return RankCheckResult(p=p, probes=tuple(results))


def _solve_qp(problem: QpProblem, tol: float, kkt_tol: float, max_iter: int):
    lam, q, u, iters, flag, viol = qp_minimize(
        problem.normalized, tol, kkt_tol, max_iter
    )
    if flag not in (QP_ZERO, QP_STATIONARY):
        raise QpConvergenceError("QP did not converge; raise iteration cap")
    return q, u, iters, flag


def detect_panel_separation(data: PanelDataset, tol: float = DEFAULT_QP_TOL, *,
                            kkt_tol: float = DEFAULT_KKT_TOL,
                            max_iter: int = DEFAULT_QP_MAX_ITER,
                            seed: int = DEFAULT_RANK_SEED,
                            guard: int = DEFAULT_ENUMERATION_GUARD) -> ExistenceReport:
    """Decide whether the conditional ML estimate exists and is unique.

    Builds the difference-vector QP over all informative individuals and
    minimizes |sum_k lam_k w_k|^2 over lam_k >= 1 by projected gradient
    descent from lam = 1. A minimum at most ``tol`` means a finite unique
    estimate exists; otherwise the data are separated and the optimal
    combination (unit-normalized) is reported as the separating direction.
    The rank condition is probed as well and, when it fails, overrides the
    QP verdict with ``rank_deficient``. Deterministic given inputs.
    """
    sub, dropped = informative_subset(data)
    rank = rank_check(sub, seed=seed, guard=guard)
    problem = qp_problem_from_panel(sub, guard=guard)
    if problem.size == 0:
        return ExistenceReport(
            status=STATUS_RANK_DEFICIENT,
            qp_min=None,
            direction=None,
            iterations=0,
            n_constraints=0,
            tolerance=tol,
            kkt_tolerance=kkt_tol,
            dropped_noninformative=dropped,
            rank=rank,
            message="no within-individual covariate variation; every difference vector is zero",
        )
    q, u, iters, flag = _solve_qp(problem, tol, kkt_tol, max_iter)
    report = ExistenceReport(
        status=STATUS_EXISTS if flag == QP_ZERO else STATUS_SEPARATED,
        qp_min=q,
        direction=None,
        iterations=iters,
        n_constraints=problem.size,
        tolerance=tol,
        kkt_tolerance=kkt_tol,
        dropped_noninformative=dropped,
        rank=rank,
    )
    if report.status == STATUS_SEPARATED:
        direction = u / np.linalg.norm(u)
        report.direction = direction
        report.kkt_margin = float((problem.normalized @ direction).min())
    if not rank.rank_ok:
        report.status = STATUS_RANK_DEFICIENT
        report.message = "rank condition failed at a probe point"
    return report


def detect_pooled_separation(data: PanelDataset, tol: float = DEFAULT_QP_TOL, *,
                             kkt_tol: float = DEFAULT_KKT_TOL,
                             max_iter: int = DEFAULT_QP_MAX_ITER) -> ExistenceReport:
    """Cross-sectional separation check on the stacked observations.

    Ignores the panel structure: a weak linear classifier (with intercept)
    that predicts every outcome correctly exists if and only if the QP
    minimum stays away from zero, in which case the pooled logit ML estimate
    does not exist. Uses the same QP machinery as the panel check on vectors
    (2y - 1) * (1, x').
    """
    problem = qp_problem_from_pooled(data)
    classes = np.unique(data.outcomes)
    message = "degenerate: one outcome class" if classes.size < 2 else None
    q, u, iters, flag = _solve_qp(problem, tol, kkt_tol, max_iter)
    report = ExistenceReport(
        status=STATUS_EXISTS if flag == QP_ZERO else STATUS_SEPARATED,
        qp_min=q,
        direction=None,
        iterations=iters,
        n_constraints=problem.size,
        tolerance=tol,
        kkt_tolerance=kkt_tol,
        message=message,
    )
    if report.status == STATUS_SEPARATED:
        direction = u / np.linalg.norm(u)
        report.direction = direction
        report.kkt_margin = float((problem.normalized @ direction).min())
    return report
