"""Analytical cost accounting for prefill FLOPs and solver overhead.

All counts use exact integer arithmetic; ratios are computed in floating
point only at the end. Solver overhead is counted in Sinkhorn-solver
operations, a different unit from transformer FLOPs, and is reported
separately rather than summed in.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError, RangeError

_LIMIT = 1 << 127


@dataclass(frozen=True)
class ModelDims:
    """Transformer profile: layer count, hidden size, FFN intermediate size."""

    layers: int
    hidden: int
    ffn: int

    def validate(self) -> "ModelDims":
        if self.layers < 1 or self.hidden < 1 or self.ffn < 1:
            raise DomainError("model dimensions must be positive")
        return self


@dataclass(frozen=True)
class SequenceBudget:
    """Prompt decomposition: system + visual + text token counts.

    The visual span is frames * (tokens_per_frame + 1) before pruning and
    frames * (kept_per_frame + 1) after.
    """

    n_sys: int
    n_txt: int
    frames: int
    tokens_per_frame: int
    kept_per_frame: int | None = None

    def n_before(self) -> int:
        return self.n_sys + visual_length(self.frames, self.tokens_per_frame) + self.n_txt

    def n_after(self) -> int:
        if self.kept_per_frame is None:
            raise DomainError("budget has no post-pruning token count")
        return self.n_sys + visual_length(self.frames, self.kept_per_frame) + self.n_txt


@dataclass(frozen=True)
class CostReport:
    dims: ModelDims
    budget: SequenceBudget
    flops_before: int
    flops_after: int
    terms_before: tuple
    terms_after: tuple
    ot_overhead: int
    quad_reduction_factor: float
    total_reduction_ratio: float

    def to_dict(self) -> dict:
        term_names = ("attention_projections", "attention_quadratic", "feedforward")
        return {
            "dims": {
                "layers": self.dims.layers,
                "hidden": self.dims.hidden,
                "ffn": self.dims.ffn,
            },
            "budget": {
                "n_sys": self.budget.n_sys,
                "n_txt": self.budget.n_txt,
                "frames": self.budget.frames,
                "tokens_per_frame": self.budget.tokens_per_frame,
                "kept_per_frame": self.budget.kept_per_frame,
                "n_before": self.budget.n_before(),
                "n_after": self.budget.n_after(),
            },
            "flops_before": self.flops_before,
            "flops_before_terms": dict(zip(term_names, self.terms_before)),
            "flops_after": self.flops_after,
            "flops_after_terms": dict(zip(term_names, self.terms_after)),
            "ot_overhead": self.ot_overhead,
            "ot_overhead_unit": "sinkhorn solver operations (not transformer FLOPs)",
            "quad_reduction_factor": self.quad_reduction_factor,
            "total_reduction_ratio": self.total_reduction_ratio,
        }


def flops_terms(dims: ModelDims, n: int) -> tuple:
    """The three per-model FLOP terms at sequence length n:
    attention projections, quadratic attention, feedforward."""
    dims.validate()
    if n < 1:
        raise DomainError("sequence length must be at least 1")
    d, m, layers = dims.hidden, dims.ffn, dims.layers
    terms = (layers * 4 * n * d * d, layers * 2 * n * n * d, layers * 2 * n * d * m)
    if sum(terms) >= _LIMIT:
        raise RangeError("FLOP count exceeds 128-bit range")
    return terms


def transformer_flops(dims: ModelDims, n: int) -> int:
    """layers * (4 n d^2 + 2 n^2 d + 2 n d m), exact."""
    return sum(flops_terms(dims, n))


def visual_length(frames: int, tokens_per_frame: int) -> int:
    """Visual span: frames * (tokens_per_frame + 1), the +1 being the global token."""
    if frames < 1 or tokens_per_frame < 1:
        raise DomainError("frames and tokens_per_frame must be at least 1")
    return frames * (tokens_per_frame + 1)


def ot_overhead(frames: int, tokens_per_frame: int, iters: int) -> int:
    """Solver operations: (frames - 1) * iters * (tokens_per_frame + 1)^2.

    Zero for single frames; incurred once per input, before the language
    model forward pass.
    """
    if frames < 1:
        raise DomainError("frames must be at least 1")
    if tokens_per_frame < 1 or iters < 1:
        raise DomainError("tokens_per_frame and iters must be at least 1")
    return (frames - 1) * iters * (tokens_per_frame + 1) ** 2


def reduction_report(dims: ModelDims, budget: SequenceBudget, iters: int) -> CostReport:
    """Full before/after cost accounting for one pruning configuration."""
    if budget.kept_per_frame is None:
        raise DomainError("reduction report needs kept_per_frame in the budget")
    terms_before = flops_terms(dims, budget.n_before())
    terms_after = flops_terms(dims, budget.n_after())
    n1 = budget.tokens_per_frame + 1
    k1 = budget.kept_per_frame + 1
    return CostReport(
        dims=dims,
        budget=budget,
        flops_before=sum(terms_before),
        flops_after=sum(terms_after),
        terms_before=terms_before,
        terms_after=terms_after,
        ot_overhead=ot_overhead(budget.frames, budget.tokens_per_frame, iters),
        quad_reduction_factor=1.0 - (k1 * k1) / (n1 * n1),
        total_reduction_ratio=sum(terms_after) / sum(terms_before),
    )
