"""Physical-level outcome matrices for the supported error models.

Conventions: for the loss, depolarizing, and on-off models detector loss is
folded into the single survival probability eta = eta_d**2 * eta_t. The
advanced-BM model takes eta_t alone (its detection stage is not modeled),
and the dark-count model keeps eta_t and eta_d separate because photons and
thermal clicks route through the detectors differently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Level, OutcomeMatrix


def _check_prob(name: str, value: float, hi: float = 1.0) -> None:
    if not 0.0 <= value <= hi:
        raise ValueError(f"{name} must lie in [0, {hi}], got {value}")


def p_matrix_loss(eta: float) -> OutcomeMatrix:
    """Photon loss only: survival eta keeps the Bell state identifiable.

    phi_1l states are identified exactly, phi_0l states give k=0 with l
    unknown, and a lost photon is always heralded as (?,?).
    """
    _check_prob("eta", eta)
    vals = np.zeros((7, 4))
    vals[2, 2] = eta  # (1,0) <- phi_10
    vals[3, 3] = eta  # (1,1) <- phi_11
    vals[4, 0] = vals[4, 1] = eta  # (0,?) <- phi_0l
    vals[6, :] = 1.0 - eta  # (?,?) everywhere
    return OutcomeMatrix(vals, Level.PHYSICAL)


def p_matrix_depol(eta: float, epsilon: float) -> OutcomeMatrix:
    """Photon loss plus a depolarizing channel of strength epsilon."""
    _check_prob("eta", eta)
    _check_prob("epsilon", epsilon, hi=0.5)
    e = epsilon
    vals = np.zeros((7, 4))
    vals[2, :] = [e / 2 * eta, e / 2 * eta, (1 - 3 * e / 2) * eta, e / 2 * eta]
    vals[3, :] = [e / 2 * eta, e / 2 * eta, e / 2 * eta, (1 - 3 * e / 2) * eta]
    vals[4, :] = [(1 - e) * eta, (1 - e) * eta, e * eta, e * eta]
    vals[6, :] = 1.0 - eta
    return OutcomeMatrix(vals, Level.PHYSICAL)


def p_matrix_advanced(eta_t: float, p_adv: float) -> OutcomeMatrix:
    """Advanced BM identifying phi_0l states with probability p_adv.

    Only transmission loss is considered; the advanced schemes detect a
    scheme-dependent number of ancilla photons, so detector loss is not
    folded in here.
    """
    _check_prob("eta_t", eta_t)
    _check_prob("p_adv", p_adv)
    vals = np.zeros((7, 4))
    vals[0, 0] = p_adv * eta_t
    vals[1, 1] = p_adv * eta_t
    vals[2, 2] = eta_t
    vals[3, 3] = eta_t
    vals[4, 0] = vals[4, 1] = (1 - p_adv) * eta_t
    vals[6, :] = 1.0 - eta_t
    return OutcomeMatrix(vals, Level.PHYSICAL)


def p_matrix_onoff(eta: float, epsilon: float) -> OutcomeMatrix:
    """On-off detectors: loss can no longer be told apart from phi_0l.

    The (0,?) row absorbs what a number-resolving detector would split into
    (0,?) and (?,?); rows (0,0), (0,1), (1,?), (?,?) stay empty.
    """
    _check_prob("eta", eta)
    _check_prob("epsilon", epsilon, hi=0.5)
    e = epsilon
    vals = np.zeros((7, 4))
    vals[2, :] = [e / 2 * eta, e / 2 * eta, (1 - 3 * e / 2) * eta, e / 2 * eta]
    vals[3, :] = [e / 2 * eta, e / 2 * eta, e / 2 * eta, (1 - 3 * e / 2) * eta]
    vals[4, :] = [1 - e * eta, 1 - e * eta, 1 - (1 - e) * eta, 1 - (1 - e) * eta]
    return OutcomeMatrix(vals, Level.PHYSICAL)


@dataclass(frozen=True)
class DetectorResponse:
    """Probabilities p[mu][nu] of reading nu in {0, 1, >=2} for mu incident photons.

    Index the 3x3 array as probs[mu, nu_class] with nu_class 2 meaning ">=2".
    """

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        if probs.shape != (3, 3):
            raise ValueError("detector response must be 3x3")
        if probs.min() < 0 or probs.max() > 1:
            raise ValueError("detector response entries must be probabilities")
        if np.max(np.abs(probs.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("each input photon number must map to a normalized response")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def p(self, mu: int, nu: int) -> float:
        """p_{mu -> nu}; nu = 2 stands for 'two or more'."""
        return float(self.probs[mu, nu])


def build_detector_response(eta_d: float, nbar: float) -> DetectorResponse:
    """Exact response of a detector with efficiency eta_d and thermal noise nbar.

    Closed forms of the beam-splitter-plus-thermal-mode model; the ">=2"
    column is the complement of the 0- and 1-click columns.
    """
    _check_prob("eta_d", eta_d)
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    x = nbar * (1.0 - eta_d)
    d = 1.0 + x
    p00 = 1.0 / d
    p01 = x / d**2
    p10 = (1.0 - eta_d) * (1.0 + nbar) / d**2
    p11 = (eta_d + (1.0 - eta_d) ** 2 * nbar * (1.0 + nbar)) / d**3
    p20 = (1.0 - eta_d) ** 2 * (1.0 + nbar) ** 2 / d**3
    p21 = (1.0 + nbar) * (1.0 - eta_d) * (2.0 * eta_d + nbar * (1.0 + nbar) * (1.0 - eta_d) ** 2) / d**4
    probs = np.array(
        [
            [p00, p01, 1.0 - p00 - p01],
            [p10, p11, 1.0 - p10 - p11],
            [p20, p21, 1.0 - p20 - p21],
        ]
    )
    return DetectorResponse(probs)


def dark_count_probability(eta_d: float, nbar: float) -> float:
    """Probability of at least one click on vacuum input, 1 - p_{0->0}."""
    _check_prob("eta_d", eta_d)
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    x = nbar * (1.0 - eta_d)
    return x / (1.0 + x)


def single_photon_loss_probability(eta_t: float, eta_d: float) -> float:
    """Probability of losing exactly one of the BM's two photons.

    Either the transmitted photon is lost in the fiber while its partner is
    detected, or both arrive and exactly one is swallowed by a detector.
    """
    return (1.0 - eta_t) * eta_d + eta_t * 2.0 * (1.0 - eta_d) * eta_d


def dark_count_flip_epsilon(eta_t: float, eta_d: float, nbar: float) -> float:
    """Leading-order probability of a dark count faking a wrong Bell state.

    Product of the single-photon-loss probability and the dark-count
    probability; twice this value plays the role of a depolarizing strength.
    """
    return single_photon_loss_probability(eta_t, eta_d) * dark_count_probability(eta_d, nbar)


def p_matrix_dark(eta_t: float, eta_d: float, nbar: float) -> OutcomeMatrix:
    """Exact physical outcome matrix with transmission loss and dark counts.

    Every admissible route from the undisturbed Bell state through the
    detector response to an accepted two-click pattern is summed; patterns
    with three or more clicks count as BM failure, so row (?,?) is the
    column complement. Rows (0,0), (0,1), and (1,?) are unreachable.
    """
    _check_prob("eta_t", eta_t)
    resp = build_detector_response(eta_d, nbar)
    p = resp.p

    # phi_0l: both photons share one detector; a fiber loss leaves one photon.
    flip_0 = eta_t * (p(2, 1) * p(0, 1) * p(0, 0) ** 2 + p(2, 0) * p(0, 0) * p(0, 1) ** 2) + (
        1.0 - eta_t
    ) * (p(1, 1) * p(0, 1) * p(0, 0) ** 2 + p(1, 0) * p(0, 0) * p(0, 1) ** 2)
    keep_0 = eta_t * (p(2, 2) * p(0, 0) + 3.0 * p(2, 0) * p(0, 2)) * p(0, 0) ** 2 + (
        1.0 - eta_t
    ) * (p(1, 2) * p(0, 0) + 3.0 * p(1, 0) * p(0, 2)) * p(0, 0) ** 2

    # phi_1l: the two photons hit distinct detectors.
    keep_1 = eta_t * (p(1, 1) ** 2 * p(0, 0) ** 2 + p(0, 1) ** 2 * p(1, 0) ** 2) + (
        1.0 - eta_t
    ) * (p(1, 1) * p(0, 1) * p(0, 0) ** 2 + p(1, 0) * p(0, 0) * p(0, 1) ** 2)
    flip_1 = eta_t * 2.0 * p(1, 1) * p(1, 0) * p(0, 1) * p(0, 0) + (1.0 - eta_t) * (
        p(1, 1) * p(0, 1) * p(0, 0) ** 2 + p(1, 0) * p(0, 0) * p(0, 1) ** 2
    )
    drop_1 = eta_t * (p(1, 2) * p(0, 0) + p(1, 0) * p(0, 2)) * 2.0 * p(1, 0) * p(0, 0) + (
        1.0 - eta_t
    ) * (p(1, 2) * p(0, 0) + 3.0 * p(1, 0) * p(0, 2)) * p(0, 0) ** 2

    vals = np.zeros((7, 4))
    vals[2, :] = [flip_0, flip_0, keep_1, flip_1]
    vals[3, :] = [flip_0, flip_0, flip_1, keep_1]
    vals[4, :] = [keep_0, keep_0, drop_1, drop_1]
    vals[6, :] = 1.0 - vals.sum(axis=0)
    return OutcomeMatrix(vals, Level.PHYSICAL)


def p_matrix_dark_leading_order(eta_t: float, eta_d: float, nbar: float) -> OutcomeMatrix:
    """Linearized dark-count matrix (first order in nbar); cross-check only.

    Uses the approximate dark-count probability nbar*(1 - eta_d) and the
    single-photon-loss probability; the exact matrix differs from this one
    by O(nbar**2).
    """
    _check_prob("eta_t", eta_t)
    _check_prob("eta_d", eta_d)
    eta = eta_d**2 * eta_t
    pdc = nbar * (1.0 - eta_d)
    eps = single_photon_loss_probability(eta_t, eta_d) * pdc
    vals = np.zeros((7, 4))
    vals[2, :] = [eps, eps, eta * (1 - 8 * pdc) + eps, eps]
    vals[3, :] = [eps, eps, eps, eta * (1 - 8 * pdc) + eps]
    vals[4, :] = [
        eta * (1 - 5 * pdc) + 2 * eps,
        eta * (1 - 5 * pdc) + 2 * eps,
        2 * eps,
        2 * eps,
    ]
    vals[6, :] = 1.0 - vals.sum(axis=0)
    return OutcomeMatrix(vals, Level.PHYSICAL)
