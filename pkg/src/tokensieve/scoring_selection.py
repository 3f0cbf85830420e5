"""Score fusion and physical Top-K selection.

The final per-token score multiplies a temporal anomaly term (transport cost
plus weighted birth evidence) by a spatial modulation term (1 + weighted
frequency prior): a soft AND gate that only fires for tokens anomalous in
both domains. Selection keeps the K best-scored patch tokens per frame; the
global token is positional and always kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .errors import DomainError, ShapeError, SizeError
from .frequency_prior import prior_variant
from .projection import IDENTITY, Projector, project_normalize
from .tensor_io import ImageFrame, TokenTensor
from .transport import spatial_novelty, temporal_scores_variant


@dataclass(frozen=True)
class FrameScores:
    """Score vectors for one frame; ``spatial_fallback`` marks frames scored
    by mean-distance novelty because they have no predecessor."""

    frame: int
    e: np.ndarray
    b: np.ndarray
    prior: np.ndarray
    score: np.ndarray
    spatial_fallback: bool


@dataclass(frozen=True)
class ScoreBundle:
    config: RunConfig
    frames: list

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "frames": [
                {
                    "frame": fs.frame,
                    "e": fs.e,
                    "b": fs.b,
                    "prior": fs.prior,
                    "scores": fs.score,
                    "spatial_fallback": fs.spatial_fallback,
                }
                for fs in self.frames
            ],
        }


@dataclass(frozen=True)
class FrameSelection:
    frame: int
    kept: list
    scores: list  # scores of the kept tokens, same order as ``kept``
    global_kept: bool = True


@dataclass(frozen=True)
class SelectionResult:
    config: RunConfig
    frames: list
    k: int
    tokens_before: int
    tokens_after: int

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "frames": [
                {
                    "frame": fs.frame,
                    "kept": list(fs.kept),
                    "scores": list(fs.scores),
                    "global_kept": fs.global_kept,
                }
                for fs in self.frames
            ],
            "tokens_before": self.tokens_before,
            "tokens_after": self.tokens_after,
        }


def forensic_score(
    e: np.ndarray,
    b: np.ndarray,
    prior: np.ndarray,
    lambda_birth: float,
    eta_forensic: float,
) -> np.ndarray:
    """s = (e + lambda*b) * (1 + eta*prior), elementwise."""
    if not (e.shape == b.shape == prior.shape):
        raise ShapeError(f"score vectors differ in length: {e.shape}, {b.shape}, {prior.shape}")
    if lambda_birth < 0.0 or eta_forensic < 0.0:
        raise DomainError("lambda_birth and eta_forensic must be nonnegative")
    return (e + lambda_birth * b) * (1.0 + eta_forensic * prior)


def retention_count(n_tokens: int, ratio: float) -> int:
    """K = max(1, floor(ratio * N))."""
    if not 0.0 < ratio <= 1.0:
        raise DomainError("ratio must be in (0,1]")
    # the epsilon guards decimal ratios whose float product lands just below
    # an integer (e.g. 0.3 * 10 == 2.9999999999999996)
    return max(1, int(math.floor(ratio * n_tokens + 1e-9)))


def select_topk(scores: np.ndarray, ratio: float) -> np.ndarray:
    """Indices of the K highest-scoring tokens, ascending; ties prefer the
    smaller index."""
    n = scores.shape[0]
    k = retention_count(n, ratio)
    order = np.lexsort((np.arange(n), -scores))
    return np.sort(order[:k])


def score_tokens(
    tokens: TokenTensor,
    frames: list | None,
    config: RunConfig,
    projector: Projector = IDENTITY,
) -> ScoreBundle:
    """Run the scoring pipeline without selection.

    Projects and normalizes the tokens, scores each frame transition under the
    configured transport mode (first frame and single images fall back to
    mean-distance spatial novelty with zero birth evidence), computes the
    frequency prior per frame when source frames are given (zero prior
    otherwise), and fuses both channels.
    """
    config.validate()
    priors = _frame_priors(tokens, frames, config)
    normalized = project_normalize(tokens, projector, config.epsilon_norm)
    n = normalized.tokens_per_frame
    out = []
    for t in range(normalized.frames):
        if t == 0:
            e = spatial_novelty(normalized.data[0])
            b = np.zeros(n)
            fallback = True
        else:
            ts = temporal_scores_variant(
                config.transport_mode, normalized.data[t - 1], normalized.data[t], config
            )
            e, b = ts.e, ts.b
            fallback = False
        s = forensic_score(e, b, priors[t], config.lambda_birth, config.eta_forensic)
        out.append(
            FrameScores(frame=t, e=e, b=b, prior=priors[t], score=s, spatial_fallback=fallback)
        )
    return ScoreBundle(config=config, frames=out)


def compress(
    tokens: TokenTensor,
    frames: list | None,
    config: RunConfig,
    projector: Projector = IDENTITY,
) -> tuple:
    """Score every frame and retain the Top-K patch tokens per frame.

    Returns (SelectionResult, ScoreBundle). Retained totals count one global
    token per frame on top of the K selected patch tokens.
    """
    bundle = score_tokens(tokens, frames, config, projector)
    n = tokens.tokens_per_frame
    k = retention_count(n, config.ratio)
    selections = []
    for fs in bundle.frames:
        kept = select_topk(fs.score, config.ratio)
        selections.append(
            FrameSelection(
                frame=fs.frame,
                kept=[int(j) for j in kept],
                scores=[float(fs.score[j]) for j in kept],
            )
        )
    t = tokens.frames
    result = SelectionResult(
        config=config,
        frames=selections,
        k=k,
        tokens_before=t * (n + 1),
        tokens_after=t * (k + 1),
    )
    return result, bundle


def _frame_priors(tokens: TokenTensor, frames: list | None, config: RunConfig) -> list:
    """Per-frame prior vectors of length N; zero priors when frames are absent."""
    t, n = tokens.frames, tokens.tokens_per_frame
    if frames is None:
        return [np.zeros(n)] * t
    if len(frames) != t:
        raise ShapeError(f"got {len(frames)} frames for {t} token frames")
    side = math.isqrt(n)
    if side * side != n:
        raise SizeError(
            f"frames given but tokens_per_frame={n} is not a square patch grid"
        )
    priors = []
    for img in frames:
        if not isinstance(img, ImageFrame):
            raise ShapeError("frames must be ImageFrame instances")
        # grid cells map to token indices row-major: token j sits at
        # (j // side, j % side)
        priors.append(prior_variant(config.spatial_operator, img, side, side).ravel())
    return priors
