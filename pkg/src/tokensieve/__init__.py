"""tokensieve: training-free visual-token compression.

Scores tokens by physical inconsistency across frames (entropic optimal
transport with a birth/death slack node) modulated by a high-frequency
spatial prior, and physically retains the Top-K tokens per frame. Ships with
an analytical FLOPs model and a seeded synthetic benchmark.
"""

from .config import RunConfig
from .errors import TokenSieveError
from .flops_model import (
    CostReport,
    ModelDims,
    SequenceBudget,
    ot_overhead,
    reduction_report,
    transformer_flops,
    visual_length,
)
from .frequency_prior import laplacian_response, pool_prior, prior_variant
from .projection import IDENTITY, NormalizedTokens, Projector, load_projector, project_normalize
from .scoring_selection import (
    ScoreBundle,
    SelectionResult,
    compress,
    forensic_score,
    score_tokens,
    select_topk,
)
from .synthetic_bench import (
    BenchReport,
    SynthConfig,
    baseline_saliency_score,
    eval_recall,
    gen_forged,
    gen_pristine,
    run_bench,
)
from .tensor_io import (
    ImageFrame,
    TokenTensor,
    load_frame,
    load_token_tensor,
    save_report,
    save_token_tensor,
)
from .transport import (
    TemporalScores,
    TransportPlan,
    augment_cost,
    build_cost,
    exact_ot_oracle,
    make_marginal,
    sinkhorn,
    spatial_novelty,
    temporal_scores,
    temporal_scores_variant,
)

__version__ = "0.1.0"
