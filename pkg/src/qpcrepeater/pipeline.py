"""Glue from an error-model description to a full chain evaluation.

Selects the physical outcome matrix and rule families implied by an
ErrorModelSpec and runs physical -> block -> logical -> chain rates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from .core import (
    ChannelParams,
    CodeParams,
    DetectorKind,
    DetectorParams,
    ErrorModelSpec,
    ModelKind,
    OutcomeMatrix,
)
from .physical import (
    p_matrix_advanced,
    p_matrix_dark,
    p_matrix_depol,
    p_matrix_loss,
    p_matrix_onoff,
)
from .propagation import (
    ONOFF_TILDE_F,
    RuleFamily,
    STANDARD_F,
    STANDARD_G,
    onoff_kappa_rules,
    propagate_block,
    propagate_logical,
)
from .rates import BMStats, RateReport, bm_stats, chain_rates


def check_model_detector(model: ErrorModelSpec, detector: DetectorParams) -> None:
    """Reject model/detector combinations the engine does not cover."""
    if model.kind is ModelKind.ONOFF:
        if detector.kind is not DetectorKind.ON_OFF:
            raise ValueError("the on-off model requires on-off detectors")
    elif detector.kind is not DetectorKind.PNRD:
        raise ValueError(f"the {model.kind.value} model requires number-resolving detectors")
    if detector.nbar > 0 and model.kind is not ModelKind.DARK:
        raise ValueError("thermal dark counts are only modeled by the dark-count model")
    if model.kind is ModelKind.ADVANCED and detector.eta_d != 1.0:
        raise ValueError("the advanced-BM model does not fold in detector loss; use eta_d = 1")


def physical_matrix(
    model: ErrorModelSpec, eta_t: float, detector: DetectorParams
) -> OutcomeMatrix:
    """Physical-level outcome matrix for one repeater segment."""
    check_model_detector(model, detector)
    eta = detector.eta_d**2 * eta_t
    if model.kind is ModelKind.LOSS:
        return p_matrix_loss(eta)
    if model.kind is ModelKind.DEPOL:
        return p_matrix_depol(eta, model.epsilon)
    if model.kind is ModelKind.ADVANCED:
        return p_matrix_advanced(eta_t, model.p_adv)
    if model.kind is ModelKind.ONOFF:
        return p_matrix_onoff(eta, model.epsilon)
    if model.kind is ModelKind.DARK:
        return p_matrix_dark(eta_t, detector.eta_d, detector.nbar)
    raise ValueError(f"unsupported model kind {model.kind}")


def rule_families(model: ErrorModelSpec, m: int) -> Tuple[RuleFamily, RuleFamily]:
    """(block rules, logical rules) implied by the error model."""
    if model.kind is ModelKind.ONOFF:
        if model.kappa is None:
            block = ONOFF_TILDE_F
        else:
            if not 1 <= model.kappa <= m - 1:
                raise ValueError(f"kappa must lie in 1..m-1, got {model.kappa} for m={m}")
            block = onoff_kappa_rules(model.kappa, model.tie_policy)
    else:
        block = STANDARD_F
    return block, STANDARD_G


@dataclass(frozen=True)
class ChainResult:
    """Everything one chain evaluation produces."""

    physical: OutcomeMatrix
    block: OutcomeMatrix
    logical: OutcomeMatrix
    stats: BMStats
    report: RateReport
    per_mode_rate: float


def evaluate_chain(
    code: CodeParams,
    channel: ChannelParams,
    detector: DetectorParams,
    model: ErrorModelSpec,
) -> ChainResult:
    """Full engine run: P -> B -> L -> chain rates for one parameter point."""
    block_rules, logical_rules = rule_families(model, code.m)
    p = physical_matrix(model, channel.eta_t, detector)
    b = propagate_block(p, code.m, block_rules)
    logical = propagate_logical(b, code.n, logical_rules)
    stats = bm_stats(logical)
    report = chain_rates(stats, channel.n_stations)
    return ChainResult(
        p, b, logical, stats, report, report.r_t0 / (2.0 * code.nm)
    )
