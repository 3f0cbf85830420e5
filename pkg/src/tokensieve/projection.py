"""Affine projection of raw token embeddings and L2 normalization onto the
unit hypersphere. Unit-norm outputs make cosine distance the natural ground
cost downstream."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError, ValidationError
from .tensor_io import TokenTensor, load_npy_array


@dataclass(frozen=True)
class Projector:
    """Affine map v -> W v + bias, or the identity when ``weight`` is None.

    ``weight`` has shape (out_dim, in_dim); ``bias`` is optional and defaults
    to zero when a weight is present.
    """

    weight: np.ndarray | None = None
    bias: np.ndarray | None = None

    @property
    def is_identity(self) -> bool:
        return self.weight is None

    def output_dim(self, input_dim: int) -> int:
        return input_dim if self.weight is None else int(self.weight.shape[0])


IDENTITY = Projector()


@dataclass(frozen=True)
class NormalizedTokens:
    """Projected, L2-normalized tokens of shape (frames, tokens_per_frame, dim).

    Row norms sit just below 1: the normalizer divides by (norm + epsilon_norm),
    so near-zero rows stay near zero instead of blowing up.
    """

    data: np.ndarray

    @property
    def frames(self) -> int:
        return self.data.shape[0]

    @property
    def tokens_per_frame(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]


def load_projector(weight_path, bias_path=None) -> Projector:
    """Load projector arrays from NPY files; bias defaults to zero if omitted."""
    weight = load_npy_array(weight_path, rank=2)
    if not np.isfinite(weight).all():
        raise ValidationError(f"{weight_path}: projector weight contains NaN or Inf")
    bias = None
    if bias_path is not None:
        bias = load_npy_array(bias_path, rank=1)
        if not np.isfinite(bias).all():
            raise ValidationError(f"{bias_path}: projector bias contains NaN or Inf")
        if bias.shape[0] != weight.shape[0]:
            raise ShapeError(
                f"projector bias length {bias.shape[0]} does not match "
                f"weight output dim {weight.shape[0]}"
            )
    return Projector(weight=weight, bias=bias)


def project_normalize(
    tokens: TokenTensor, proj: Projector = IDENTITY, epsilon_norm: float = 1e-8
) -> NormalizedTokens:
    """Apply the projector and normalize every token row.

    Each output row is (W v + bias) / (||W v + bias|| + epsilon_norm); the
    identity projector skips the affine map. Scaling the input by any positive
    constant leaves the output direction unchanged.
    """
    if epsilon_norm <= 0.0:
        raise DomainError("epsilon_norm must be positive")
    if proj.is_identity:
        z = tokens.data
    else:
        if proj.weight.shape[1] != tokens.dim:
            raise ShapeError(
                f"projector expects input dim {proj.weight.shape[1]}, "
                f"tokens have dim {tokens.dim}"
            )
        z = tokens.data @ proj.weight.T
        if proj.bias is not None:
            z = z + proj.bias
    norms = np.linalg.norm(z, axis=-1, keepdims=True)
    return NormalizedTokens(data=z / (norms + epsilon_norm))
