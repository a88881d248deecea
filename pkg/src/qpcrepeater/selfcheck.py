"""Built-in invariant suites behind the ``selfcheck`` CLI command.

``quick`` runs in seconds, ``full`` in minutes. Every check is named so a
failure can be pinpointed from the command line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from .core import (
    ChannelParams,
    CodeParams,
    DetectorKind,
    DetectorParams,
    ErrorModelSpec,
    Level,
    OutcomeMatrix,
    TiePolicy,
    enumerate_compositions,
)
from .oracle import McConfig, mc_block_column, mc_logical_column, verify_bell_representation
from .physical import (
    build_detector_response,
    p_matrix_advanced,
    p_matrix_dark,
    p_matrix_dark_leading_order,
    p_matrix_depol,
    p_matrix_loss,
    p_matrix_onoff,
)
from .pipeline import evaluate_chain, rule_families
from .propagation import (
    ONOFF_TILDE_F,
    STANDARD_F,
    STANDARD_G,
    onoff_kappa_rules,
    propagate_block,
    propagate_block_naive,
    propagate_logical,
    propagate_logical_naive,
)
from .rates import closed_form_adv_rate, closed_form_loss_rate, closed_form_onoff, secure_rate

_SEED = 20240901


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def _random_stochastic(rng: np.random.Generator, level: Level = Level.PHYSICAL) -> OutcomeMatrix:
    vals = rng.random((7, 4))
    vals /= vals.sum(axis=0, keepdims=True)
    return OutcomeMatrix(vals, level)


def _all_matrices(rng: np.random.Generator):
    eta_t = rng.uniform(0.2, 1.0)
    eta_d = rng.uniform(0.8, 1.0)
    eps = rng.uniform(0.0, 0.05)
    yield p_matrix_loss(eta_t * eta_d**2)
    yield p_matrix_depol(eta_t * eta_d**2, eps)
    yield p_matrix_advanced(eta_t, rng.uniform(0.0, 1.0))
    yield p_matrix_onoff(eta_t * eta_d**2, eps)
    yield p_matrix_dark(eta_t, eta_d, rng.uniform(0.0, 0.2))


def check_column_stochastic(samples: int = 200) -> CheckResult:
    rng = np.random.default_rng(_SEED)
    worst = 0.0
    for _ in range(samples):
        for mat in _all_matrices(rng):
            worst = max(worst, float(np.max(np.abs(mat.values.sum(axis=0) - 1.0))))
    return CheckResult("column-stochastic", worst <= 1e-12, f"max deviation {worst:.2e}")


def check_detector_response(samples: int = 200) -> CheckResult:
    rng = np.random.default_rng(_SEED + 1)
    worst = 0.0
    for _ in range(samples):
        resp = build_detector_response(rng.uniform(0.5, 1.0), rng.uniform(0.0, 0.5))
        worst = max(worst, float(np.max(np.abs(resp.probs.sum(axis=1) - 1.0))))
    return CheckResult("detector-response-normalized", worst <= 1e-12, f"max deviation {worst:.2e}")


def check_reduction_chain(samples: int = 50) -> CheckResult:
    rng = np.random.default_rng(_SEED + 2)
    worst = 0.0
    for _ in range(samples):
        eta = rng.uniform(0.0, 1.0)
        base = p_matrix_loss(eta).values
        for other in (
            p_matrix_depol(eta, 0.0).values,
            p_matrix_advanced(eta, 0.0).values,
            p_matrix_dark(eta, 1.0, rng.uniform(0.0, 0.5)).values,
        ):
            worst = max(worst, float(np.max(np.abs(other - base))))
    return CheckResult("reduction-chain", worst <= 1e-14, f"max deviation {worst:.2e}")


def check_rule_exhaustivity(max_total: int) -> CheckResult:
    families = [STANDARD_F, STANDARD_G, ONOFF_TILDE_F]
    for total in range(1, max_total + 1):
        fams = families + [
            onoff_kappa_rules(k, tie)
            for k in range(1, total)
            for tie in (TiePolicy.DISCARD, TiePolicy.ACCEPT_AS_ONE)
        ]
        for gamma in enumerate_compositions(total, range(1, 8)):
            for fam in fams:
                u = fam.classify(gamma, total)
                if not 1 <= u <= 7:
                    return CheckResult(
                        "rule-exhaustivity", False, f"{fam.name} gave {u} on {gamma.counts}"
                    )
                arr = fam.classify_array(np.array([gamma.counts]), total)
                if int(arr[0]) != u:
                    return CheckResult(
                        "rule-exhaustivity",
                        False,
                        f"{fam.name} scalar/array mismatch on {gamma.counts}",
                    )
    return CheckResult("rule-exhaustivity", True, f"totals 1..{max_total}")


def check_naive_vs_engine(n_random: int, max_total: int) -> CheckResult:
    rng = np.random.default_rng(_SEED + 3)
    worst = 0.0
    for _ in range(n_random):
        p = _random_stochastic(rng)
        m = int(rng.integers(1, max_total + 1))
        fams = [STANDARD_F, ONOFF_TILDE_F]
        if m >= 2:
            fams.append(onoff_kappa_rules(int(rng.integers(1, m)), TiePolicy.DISCARD))
        for fam in fams:
            diff = np.abs(
                propagate_block(p, m, fam).values - propagate_block_naive(p, m, fam).values
            )
            worst = max(worst, float(diff.max()))
        b = _random_stochastic(rng, Level.BLOCK)
        n = int(rng.integers(1, max_total + 1))
        diff = np.abs(
            propagate_logical(b, n, STANDARD_G).values
            - propagate_logical_naive(b, n, STANDARD_G).values
        )
        worst = max(worst, float(diff.max()))
    return CheckResult("naive-vs-engine", worst <= 1e-12, f"max deviation {worst:.2e}")


def check_loss_closed_form() -> CheckResult:
    worst = 0.0
    for (n, m, l0) in [(23, 5, 2.4), (10, 3, 1.0), (4, 2, 3.0)]:
        chan = ChannelParams(1000.0, l0)
        res = evaluate_chain(CodeParams(n, m), chan, DetectorParams(1.0), ErrorModelSpec.loss())
        cf = closed_form_loss_rate(n, m, chan.eta_t, chan.n_stations)
        worst = max(worst, abs(res.report.r_t0 - cf))
    return CheckResult("loss-closed-form", worst <= 1e-10, f"max deviation {worst:.2e}")


def check_pipeline_closed_forms(samples: int = 12) -> CheckResult:
    rng = np.random.default_rng(_SEED + 4)
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(1, 41))
        m = int(rng.integers(1, 9))
        l0 = float(rng.uniform(0.5, 10.0))
        chan = ChannelParams(1000.0, l0)
        nst = chan.n_stations
        res = evaluate_chain(CodeParams(n, m), chan, DetectorParams(1.0), ErrorModelSpec.loss())
        worst = max(worst, abs(res.report.r_t0 - closed_form_loss_rate(n, m, chan.eta_t, nst)))
        p_adv = float(rng.uniform(0.0, 1.0))
        res = evaluate_chain(
            CodeParams(n, m), chan, DetectorParams(1.0), ErrorModelSpec.advanced(p_adv)
        )
        worst = max(worst, abs(res.report.r_t0 - closed_form_adv_rate(n, m, chan.eta_t, p_adv, nst)))
        det = DetectorParams(1.0, kind=DetectorKind.ON_OFF)
        res = evaluate_chain(CodeParams(n, m), chan, det, ErrorModelSpec.onoff())
        pt, qx = closed_form_onoff(n, m, chan.eta_t, nst)
        worst = max(worst, abs(res.report.p_trans - pt))
        worst = max(worst, abs(res.report.r_t0 - secure_rate(pt, qx / 2.0)))
    return CheckResult("pipeline-closed-forms", worst <= 1e-10, f"max deviation {worst:.2e}")


def check_ideal_efficiency() -> CheckResult:
    worst = 0.0
    for n in (1, 2, 3, 5, 8):
        logical = propagate_logical(
            propagate_block(p_matrix_loss(1.0), 3, STANDARD_F), n, STANDARD_G
        )
        eff = sum(logical.values[i, i] for i in range(4)) / 4.0
        worst = max(worst, abs(eff - (1.0 - 2.0**-n)))
    return CheckResult("ideal-bm-efficiency", worst <= 1e-13, f"max deviation {worst:.2e}")


def check_bell_representation(exhaustive: bool) -> CheckResult:
    if exhaustive:
        pairs = [(n, m) for n in range(1, 9) for m in range(1, 9) if n * m <= 8]
    else:
        pairs = [(2, 2), (1, 3), (3, 1)]
    worst = 0.0
    for n, m in pairs:
        res = verify_bell_representation(n, m)
        worst = max(worst, res.max_residual)
        if not res.ok:
            return CheckResult("bell-representation", False, f"({n},{m}) residual {res.max_residual:.2e}")
    return CheckResult("bell-representation", True, f"max residual {worst:.2e}")


def check_dark_residual_scaling() -> CheckResult:
    eta_t = math.exp(-1.9 / 22.0)
    ratios = []
    for nbar in (1e-2, 1e-3, 1e-4):
        exact = p_matrix_dark(eta_t, 0.97, nbar).values
        approx = p_matrix_dark_leading_order(eta_t, 0.97, nbar).values
        ratios.append(float(np.max(np.abs(exact - approx))) / nbar**2)
    ok = max(ratios) <= 10.0 * min(ratios) and max(ratios) < 1e3
    return CheckResult("dark-residual-o2", ok, f"residual/nbar^2 ratios {ratios}")


def _mc_cases(full: bool):
    cases = [
        ("loss", ErrorModelSpec.loss(), DetectorParams(0.95)),
        ("depol", ErrorModelSpec.depol(0.02), DetectorParams(0.95)),
        ("adv", ErrorModelSpec.advanced(0.5), DetectorParams(1.0)),
        ("onoff", ErrorModelSpec.onoff(), DetectorParams(0.95, kind=DetectorKind.ON_OFF)),
        (
            "onoff-kappa",
            ErrorModelSpec.onoff(0.02, 1, TiePolicy.DISCARD),
            DetectorParams(0.95, kind=DetectorKind.ON_OFF),
        ),
        (
            "onoff-kappa-star",
            ErrorModelSpec.onoff(0.02, 1, TiePolicy.ACCEPT_AS_ONE),
            DetectorParams(0.95, kind=DetectorKind.ON_OFF),
        ),
        ("dark", ErrorModelSpec.dark(), DetectorParams(0.95, 0.05)),
    ]
    codes = [(2, 2), (3, 2), (3, 3)] if full else [(2, 2)]
    return cases, codes


def check_mc_agreement(samples: int, full: bool, seed: int = _SEED) -> CheckResult:
    cases, codes = _mc_cases(full)
    worst = 0.0
    for name, model, det in cases:
        for (n, m) in codes:
            rules_f, rules_g = rule_families(model, m)
            chan = ChannelParams(1000.0, 2.0)
            p = evaluate_chain(CodeParams(n, m), chan, det, model).physical
            block = propagate_block(p, m, rules_f)
            logical = propagate_logical(block, n, rules_g)
            for (k, l) in ((0, 0), (1, 0), (0, 1), (1, 1)) if full else ((0, 0), (1, 1)):
                est = mc_logical_column(p, n, m, k, l, rules_f, rules_g, McConfig(samples, seed))
                truth = logical.values[:, 2 * k + l]
                tol = 4.0 * np.sqrt(truth * (1.0 - truth) / samples)
                dev = np.abs(est.freq - truth)
                if np.any(dev > tol):
                    return CheckResult(
                        "mc-agreement", False, f"{name} ({n},{m}) phi_{k}{l}: dev {dev.max():.2e}"
                    )
                with np.errstate(divide="ignore", invalid="ignore"):
                    sig = np.where(tol > 0, dev / tol, 0.0)
                worst = max(worst, float(np.max(sig)))
    return CheckResult("mc-agreement", True, f"worst dev/tol {worst:.2f}")


def check_mc_block(samples: int = 100_000) -> CheckResult:
    p = p_matrix_loss(0.9)
    block = propagate_block(p, 3, STANDARD_F)
    est = mc_block_column(p, 3, 0, 0, STANDARD_F, McConfig(samples, _SEED))
    truth = block.values[:, 0]
    tol = 5.0 * np.sqrt(truth * (1.0 - truth) / samples)
    ok = bool(np.all(np.abs(est.freq - truth) <= tol))
    return CheckResult("mc-block-loss", ok, f"max dev {np.abs(est.freq - truth).max():.2e}")


def quick_checks() -> List[Callable[[], CheckResult]]:
    return [
        check_column_stochastic,
        check_detector_response,
        check_reduction_chain,
        lambda: check_rule_exhaustivity(6),
        lambda: check_naive_vs_engine(4, 4),
        check_loss_closed_form,
        check_ideal_efficiency,
        lambda: check_bell_representation(False),
        check_mc_block,
    ]


def full_checks() -> List[Callable[[], CheckResult]]:
    return quick_checks() + [
        lambda: check_rule_exhaustivity(8),
        lambda: check_naive_vs_engine(100, 5),
        check_pipeline_closed_forms,
        lambda: check_bell_representation(True),
        check_dark_residual_scaling,
        lambda: check_mc_agreement(1_000_000, True),
    ]


def run_selfcheck(level: str) -> List[CheckResult]:
    if level not in ("quick", "full"):
        raise ValueError(f"selfcheck level must be 'quick' or 'full', got {level}")
    checks = quick_checks() if level == "quick" else full_checks()
    return [fn() for fn in checks]
