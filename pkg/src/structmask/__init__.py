"""Structure-aware masked-language-model corruption toolkit for proteins."""

__version__ = "0.1.0"

from .errors import (
    AlignmentMismatchError,
    ChainNotFoundError,
    ContractError,
    DmsParseError,
    FileFormatError,
    MsaFormatError,
    StructMaskError,
    StructureParseError,
)
from .masking import (
    AMINO_ACIDS,
    Action,
    ActionRecord,
    BucketMasker,
    CorruptionResult,
    GMSpanMasker,
    MaskConfig,
    MaskPlan,
    MaskRecord,
    RandomMasker,
    apply_corruption,
    bucket_mask_plan,
    collate_batch,
    gm_span_mask_plan,
    random_mask_plan,
    sample_rate,
)
from .msa import (
    Msa,
    MsaRow,
    ProjectionMap,
    column_entropy,
    parse_msa,
    project_alignment,
    project_contact_graph,
    project_msa,
)
from .probes import (
    ALPHA_GRID,
    K_GRID,
    EmbeddingTable,
    KNNProbe,
    ProbeResult,
    RidgeProbe,
    StratumResult,
    cv_mean_mses,
    cv_select_alpha,
    knn_predict,
    knn_probe,
    ridge_fit,
    ridge_predict,
    ridge_probe,
    selection_probe,
    spearman,
    stratified_eval,
)
from .splits import (
    SecondOrderStrata,
    SplitManifest,
    Substitution,
    Variant,
    model_selection_split,
    mutation_split,
    neighborhood_split,
    parse_dms,
    parse_mutation_code,
    position_split,
    regime_split,
    render_dms,
    stratify_second_order,
)
from .streams import rate_stream, sequence_stream
from .structures import (
    DEFAULT_TAU,
    AlignmentMap,
    ContactMap,
    Structure,
    StructureResidue,
    align_structure,
    build_contact_map,
    parse_structure,
)

__all__ = [name for name in dir() if not name.startswith("_")]
