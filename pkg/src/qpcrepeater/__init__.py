"""Rate analysis for parity-code one-way repeater chains.

Computes Bell-measurement outcome probabilities across the physical, block,
and logical encoding levels under loss, depolarizing, dark-count,
advanced-BM, and on-off-detector error models; converts them into BB84
secure key rates; optimizes code parameters against a photon cost function;
and estimates state-generation resource counts. Brute-force and Monte-Carlo
oracles validate every combinatorial formula.
"""

from .core import (
    ChannelParams,
    CodeParams,
    CountVector,
    DetectorKind,
    DetectorParams,
    ErrorModelSpec,
    Level,
    ModelKind,
    OutcomeMatrix,
    TiePolicy,
    enumerate_compositions,
    multinomial,
)
from .physical import (
    DetectorResponse,
    build_detector_response,
    dark_count_probability,
    p_matrix_advanced,
    p_matrix_dark,
    p_matrix_depol,
    p_matrix_loss,
    p_matrix_onoff,
)
from .pipeline import ChainResult, evaluate_chain
from .propagation import (
    ONOFF_TILDE_F,
    RuleFamily,
    STANDARD_F,
    STANDARD_G,
    onoff_kappa_rules,
    propagate_block,
    propagate_block_naive,
    propagate_logical,
    propagate_logical_naive,
)
from .rates import (
    BMStats,
    RateReport,
    binary_entropy,
    bm_stats,
    chain_rates,
    closed_form_adv_rate,
    closed_form_loss_rate,
    closed_form_onoff,
    secure_rate,
)
from .optimizer import (
    Bound,
    Objective,
    OptimResult,
    SearchSpace,
    cost,
    grid_optimize,
    plob_bound,
    smallest_code_beating_bound,
    tgw_bound,
)
from .oracle import (
    McConfig,
    ParitySet,
    mc_block_column,
    mc_logical_column,
    verify_bell_representation,
)
from .resources import (
    MuxParams,
    ResourceReport,
    cpc_module_count,
    heralded_source_success,
    multiplex_pool_size,
    mux_source_count,
)

__version__ = "0.1.0"
