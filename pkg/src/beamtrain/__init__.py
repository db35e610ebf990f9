"""Hierarchical beam-training codebooks and search for half-wave ULAs."""

from .arrays import (
    AngleGrid,
    Awv,
    CoverageSet,
    beam_coverage,
    beam_gain,
    coverage_factor_rho,
    default_grid,
    leaf_angles,
    random_awv,
    rotate,
    steering_matrix,
    steering_vector,
    subarray_phase_objective,
)
from .channels import (
    Channel,
    ChannelKind,
    ChannelParams,
    Mpc,
    assemble_matrix,
    best_pair_gain,
    dump_channel,
    load_channel,
    sample_channel,
)
from .codebooks import (
    Codebook,
    CodebookMethod,
    Codeword,
    Criterion1Report,
    Criterion2Report,
    export_codebook,
    generate_bmw_ss,
    generate_codebook,
    generate_deact,
    load_codebook,
    validate_criterion1,
    validate_criterion2,
)
from .experiments import (
    ExperimentConfig,
    ExperimentResult,
    run_beam_patterns,
    run_received_power,
    run_success_rate,
)
from .search import (
    AdjudicationPolicy,
    Measurement,
    PowerMode,
    PowerModel,
    SearchOutcome,
    SearchStep,
    SearchTrace,
    adjudicate,
    exhaustive_search,
    hierarchical_search,
    measure,
    nearest_leaf,
    trace_rows,
)

__version__ = "0.1.0"
