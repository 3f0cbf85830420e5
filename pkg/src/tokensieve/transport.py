"""Inter-frame token transport.

Builds cosine cost matrices between consecutive frames, augments them with a
slack (dummy) row and column priced at fixed birth/death penalties, solves the
entropic transport problem by log-domain Sinkhorn iteration, and extracts
per-token transport cost and birth evidence from the plan. A small exact LP
oracle backs the solver in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .config import RunConfig
from .errors import ConfigError, DomainError, ShapeError, SizeError

# Death penalty used by the only_birth variant: 50x the maximum cosine cost,
# large enough that the death route is never optimal, small enough to stay
# finite in the log domain.
ONLY_BIRTH_DEATH_COST = 100.0

_ORACLE_MAX_N = 6


@dataclass(frozen=True)
class TransportPlan:
    """Nonnegative coupling matrix plus the marginal residuals at solve time.

    After the closing row rescale, row sums match the marginal to float
    accumulation error (~1e-12 relative); ``col_residual`` is the recorded
    infinity-norm column defect.
    """

    matrix: np.ndarray
    row_residual: float
    col_residual: float


@dataclass(frozen=True)
class TemporalScores:
    """Per-target-token temporal evidence for one frame transition.

    ``e`` aggregates plan-weighted cosine cost from real sources only;
    ``b`` is the mass routed from the dummy source (birth evidence);
    ``death`` is the mass each real source routes to the dummy target,
    reported for inspection but never scored.
    """

    e: np.ndarray
    b: np.ndarray
    death: np.ndarray


def build_cost(prev: np.ndarray, curr: np.ndarray) -> np.ndarray:
    """Cosine-distance cost matrix C[i, j] = 1 - <prev_i, curr_j>, clamped to [0, 2]."""
    if prev.ndim != 2 or curr.ndim != 2:
        raise ShapeError("frame slices must be 2-D (tokens x dim)")
    if prev.shape != curr.shape:
        raise ShapeError(f"frame slices differ in shape: {prev.shape} vs {curr.shape}")
    return np.clip(1.0 - prev @ curr.T, 0.0, 2.0)


def augment_cost(cost: np.ndarray, c_birth: float, c_death: float) -> np.ndarray:
    """Append the dummy row/column: last column priced c_death, last row c_birth,
    corner 0."""
    if c_birth < 0.0 or c_death < 0.0:
        raise DomainError("birth/death penalties must be nonnegative")
    if not np.isfinite(cost).all():
        raise DomainError("cost matrix contains non-finite entries")
    n = cost.shape[0]
    if cost.shape != (n, n):
        raise ShapeError(f"cost matrix must be square, got {cost.shape}")
    out = np.zeros((n + 1, n + 1))
    out[:n, :n] = cost
    out[:n, n] = c_death
    out[n, :n] = c_birth
    return out


def make_marginal(n_tokens: int) -> np.ndarray:
    """Slack marginal: uniform 1/N on real tokens plus one unit on the dummy."""
    if n_tokens < 1:
        raise DomainError("need at least one token")
    a = np.full(n_tokens + 1, 1.0 / n_tokens)
    a[n_tokens] = 1.0
    return a


def _logsumexp(m: np.ndarray, axis: int) -> np.ndarray:
    mx = m.max(axis=axis, keepdims=True)
    out = np.log(np.exp(m - mx).sum(axis=axis)) + np.squeeze(mx, axis=axis)
    return out


def sinkhorn(
    cost: np.ndarray, marginal: np.ndarray, epsilon_ot: float, iters: int
) -> TransportPlan:
    """Entropic transport plan by log-domain Sinkhorn iteration.

    Both marginals are ``marginal`` (the problem is square). Potentials start
    at zero; each iteration updates the column potential first, then the row
    potential; a single closing row rescale makes row sums exact up to float
    accumulation. The log domain keeps the solve stable at small epsilon.
    """
    if epsilon_ot <= 0.0:
        raise DomainError("epsilon_ot must be positive")
    if iters < 1:
        raise DomainError("need at least one iteration")
    if not np.isfinite(cost).all():
        raise DomainError("cost matrix contains non-finite entries")
    n = cost.shape[0]
    if cost.shape != (n, n) or marginal.shape != (n,):
        raise ShapeError(f"cost {cost.shape} and marginal {marginal.shape} do not match")
    log_a = np.log(marginal)
    f = np.zeros(n)
    g = np.zeros(n)
    for _ in range(iters):
        g = epsilon_ot * log_a - epsilon_ot * _logsumexp((f[:, None] - cost) / epsilon_ot, 0)
        f = epsilon_ot * log_a - epsilon_ot * _logsumexp((g[None, :] - cost) / epsilon_ot, 1)
    plan = np.exp((f[:, None] + g[None, :] - cost) / epsilon_ot)
    plan *= (marginal / plan.sum(axis=1))[:, None]
    row_residual = float(np.abs(plan.sum(axis=1) - marginal).max())
    col_residual = float(np.abs(plan.sum(axis=0) - marginal).max())
    return TransportPlan(matrix=plan, row_residual=row_residual, col_residual=col_residual)


def plan_objective(plan: TransportPlan, cost: np.ndarray) -> float:
    """Linear transport objective <P, C> (entropy term excluded)."""
    return float((plan.matrix * cost).sum())


def exact_ot_oracle(cost: np.ndarray, marginal: np.ndarray) -> TransportPlan:
    """Exact (non-entropic) optimal plan via a dense LP solve.

    Test-only reference; refuses instances above 6 real tokens to guard
    against accidental production use.
    """
    n = cost.shape[0]
    if n - 1 > _ORACLE_MAX_N:
        raise SizeError(f"oracle supports at most {_ORACLE_MAX_N} real tokens, got {n - 1}")
    if cost.shape != (n, n) or marginal.shape != (n,):
        raise ShapeError(f"cost {cost.shape} and marginal {marginal.shape} do not match")
    a_eq = np.zeros((2 * n, n * n))
    b_eq = np.zeros(2 * n)
    for i in range(n):
        a_eq[i, i * n : (i + 1) * n] = 1.0
        b_eq[i] = marginal[i]
    for j in range(n):
        a_eq[n + j, j::n] = 1.0
        b_eq[n + j] = marginal[j]
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0.0, None), method="highs")
    if res.status != 0:
        raise DomainError(f"LP oracle failed: {res.message}")
    plan = res.x.reshape(n, n)
    return TransportPlan(
        matrix=plan,
        row_residual=float(np.abs(plan.sum(axis=1) - marginal).max()),
        col_residual=float(np.abs(plan.sum(axis=0) - marginal).max()),
    )


def temporal_scores(plan: TransportPlan, aug_cost: np.ndarray) -> TemporalScores:
    """Extract per-target transport cost, birth evidence, and death mass.

    e[j] sums plan * cost over real sources in ascending source order (the
    fixed order pins the float result); b[j] reads the dummy row; death[i]
    reads the dummy column.
    """
    n1 = aug_cost.shape[0]
    if plan.matrix.shape != aug_cost.shape:
        raise ShapeError(f"plan {plan.matrix.shape} and cost {aug_cost.shape} differ")
    n = n1 - 1
    e = np.zeros(n)
    for i in range(n):
        e += plan.matrix[i, :n] * aug_cost[i, :n]
    b = plan.matrix[n, :n].copy()
    death = plan.matrix[:n, n].copy()
    return TemporalScores(e=e, b=b, death=death)


def spatial_novelty(frame: np.ndarray) -> np.ndarray:
    """Distance of each token to the frame mean embedding.

    Serves as the temporal term for frames with no predecessor (first frame
    of a video, single images).
    """
    if frame.ndim != 2:
        raise ShapeError("frame slice must be 2-D (tokens x dim)")
    mu = frame.mean(axis=0)
    return np.linalg.norm(frame - mu, axis=1)


def temporal_scores_variant(
    mode: str, prev: np.ndarray, curr: np.ndarray, config: RunConfig
) -> TemporalScores:
    """Temporal scoring under one of the selectable transport formulations.

    hard_assignment: nearest-source cost, no birth channel.
    balanced_ot:     entropic transport on the unaugmented cost with uniform
                     marginals; anomalous mass is forced onto real matches.
    only_birth:      slack-node solve with the death route priced out.
    birth_death:     full slack-node solve at the configured penalties.
    """
    cost = build_cost(prev, curr)
    n = cost.shape[0]
    if mode == "hard_assignment":
        return TemporalScores(e=cost.min(axis=0), b=np.zeros(n), death=np.zeros(n))
    if mode == "balanced_ot":
        uniform = np.full(n, 1.0 / n)
        plan = sinkhorn(cost, uniform, config.epsilon_ot, config.sinkhorn_iters)
        e = np.zeros(n)
        for i in range(n):
            e += plan.matrix[i] * cost[i]
        return TemporalScores(e=e, b=np.zeros(n), death=np.zeros(n))
    if mode == "only_birth":
        aug = augment_cost(cost, config.c_birth, ONLY_BIRTH_DEATH_COST)
    elif mode == "birth_death":
        aug = augment_cost(cost, config.c_birth, config.c_death)
    else:
        raise ConfigError(f"unknown transport_mode {mode!r}")
    plan = sinkhorn(aug, make_marginal(n), config.epsilon_ot, config.sinkhorn_iters)
    return temporal_scores(plan, aug)
