"""Run configuration shared by the scoring pipeline, the CLI, and reports."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import ConfigError, DomainError

TRANSPORT_MODES = ("hard_assignment", "balanced_ot", "only_birth", "birth_death")
SPATIAL_OPERATORS = ("none", "patch_variance", "sobel", "laplacian")

_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class RunConfig:
    """Hyperparameters of one compression run.

    Defaults follow the reference operating point: entropic regularization
    0.1, birth/death penalties 0.35, 20 solver iterations. ``ratio`` is the
    fraction of patch tokens retained per frame.
    """

    epsilon_ot: float = 0.1
    c_birth: float = 0.35
    c_death: float = 0.35
    sinkhorn_iters: int = 20
    lambda_birth: float = 1.0
    eta_forensic: float = 1.0
    ratio: float = 1.0
    epsilon_norm: float = 1e-8
    transport_mode: str = "birth_death"
    spatial_operator: str = "laplacian"
    seed: int = 0

    def validate(self) -> "RunConfig":
        if not 0.0 < self.ratio <= 1.0:
            raise DomainError("ratio must be in (0,1]")
        if self.epsilon_ot <= 0.0:
            raise DomainError("epsilon_ot must be positive")
        if self.c_birth < 0.0 or self.c_death < 0.0:
            raise DomainError("birth/death costs must be nonnegative")
        if self.sinkhorn_iters < 1:
            raise DomainError("sinkhorn_iters must be at least 1")
        if self.lambda_birth < 0.0 or self.eta_forensic < 0.0:
            raise DomainError("lambda_birth and eta_forensic must be nonnegative")
        if self.epsilon_norm <= 0.0:
            raise DomainError("epsilon_norm must be positive")
        if self.transport_mode not in TRANSPORT_MODES:
            raise ConfigError(
                f"unknown transport_mode {self.transport_mode!r}; "
                f"expected one of {', '.join(TRANSPORT_MODES)}"
            )
        if self.spatial_operator not in SPATIAL_OPERATORS:
            raise ConfigError(
                f"unknown spatial_operator {self.spatial_operator!r}; "
                f"expected one of {', '.join(SPATIAL_OPERATORS)}"
            )
        if not 0 <= self.seed <= _UINT64_MAX:
            raise DomainError("seed must fit in an unsigned 64-bit integer")
        return self

    def to_dict(self) -> dict:
        return {
            "epsilon_ot": float(self.epsilon_ot),
            "c_birth": float(self.c_birth),
            "c_death": float(self.c_death),
            "sinkhorn_iters": int(self.sinkhorn_iters),
            "lambda_birth": float(self.lambda_birth),
            "eta_forensic": float(self.eta_forensic),
            "ratio": float(self.ratio),
            "epsilon_norm": float(self.epsilon_norm),
            "transport_mode": self.transport_mode,
            "spatial_operator": self.spatial_operator,
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = cls(**data)
        return cfg.validate()

    def with_ratio(self, ratio: float) -> "RunConfig":
        return replace(self, ratio=ratio).validate()
