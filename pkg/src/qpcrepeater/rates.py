"""Chain-level transmission probabilities, QBERs, and BB84 secure key rates.

All rates are reported as the dimensionless product R*t0 (key bits per
elementary repeater cycle); the cycle time t0 never materializes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .core import OutcomeMatrix, pow_prob


def binary_entropy(q: float) -> float:
    """h(q) = -q log2 q - (1-q) log2 (1-q), with 0 log 0 = 0."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"entropy argument must lie in [0, 1], got {q}")
    out = 0.0
    if 0.0 < q < 1.0:
        out = -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)
    return out


@dataclass(frozen=True)
class BMStats:
    """Per-station aggregates of the logical outcome matrix.

    l_id is the probability of a correct identification (uniform priors);
    l_x, l_y, l_z are the probabilities of an unheralded logical Pauli
    error hiding behind an accepted BM.
    """

    l_id: float
    l_x: float
    l_y: float
    l_z: float

    def __post_init__(self) -> None:
        for name in ("l_id", "l_x", "l_y", "l_z"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.accept_probability > 1.0 + 1e-12:
            raise ValueError("acceptance probability exceeds 1")

    @property
    def accept_probability(self) -> float:
        return self.l_id + self.l_x + self.l_y + self.l_z


def bm_stats(logical: OutcomeMatrix) -> BMStats:
    """Correct-identification and hidden-Pauli probabilities of a logical BM."""
    v = logical.values
    l_id = (v[0, 0] + v[1, 1] + v[2, 2] + v[3, 3]) / 4.0
    l_x = (v[2, 0] + v[3, 1] + v[0, 2] + v[1, 3]) / 4.0
    l_y = (v[3, 0] + v[2, 1] + v[1, 2] + v[0, 3]) / 4.0
    l_z = (v[1, 0] + v[0, 1] + v[3, 2] + v[2, 3]) / 4.0
    return BMStats(l_id, l_x, l_y, l_z)


@dataclass(frozen=True)
class RateReport:
    """Chain figures of merit: raw transmission, QBERs, and secure rate.

    ``r_t0_unclamped`` keeps the pre-clamp value p_trans*(1 - 2 h(Q)) for
    diagnostics; ``r_t0`` is clamped at zero.
    """

    p_trans: float
    q_x: float
    q_z: float
    q: float
    r_t0: float
    r_t0_unclamped: float


def chain_rates(stats: BMStats, n_stations: float) -> RateReport:
    """Rates of a chain of ``n_stations`` independent logical BMs.

    An accepted transmission carries a hidden X (Z) flip when the number of
    stations with hidden X-or-Y (Z-or-Y) errors is odd, which resums to
    Q_{X/Z} = (1 - ratio**N) / 2 with the signed ratios below. All-zero
    stats give p_trans = 0 with the convention Q = 0.
    """
    if n_stations < 1:
        raise ValueError(f"station count must be >= 1, got {n_stations}")
    accept = stats.accept_probability
    if accept <= 0.0:
        return RateReport(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    p_trans = pow_prob(accept, n_stations)
    ratio_x = (stats.l_id - stats.l_x - stats.l_y + stats.l_z) / accept
    ratio_z = (stats.l_id + stats.l_x - stats.l_y - stats.l_z) / accept
    q_x = 0.5 * (1.0 - pow_prob(ratio_x, n_stations))
    q_z = 0.5 * (1.0 - pow_prob(ratio_z, n_stations))
    q = 0.5 * (q_x + q_z)
    unclamped = p_trans * (1.0 - 2.0 * binary_entropy(q))
    return RateReport(p_trans, q_x, q_z, q, max(unclamped, 0.0), unclamped)


def secure_rate(p_trans: float, q: float) -> float:
    """BB84 asymptotic secure key rate max[p_trans (1 - 2 h(Q)), 0]."""
    return max(p_trans * (1.0 - 2.0 * binary_entropy(q)), 0.0)


def closed_form_loss_rate(n: int, m: int, eta: float, n_stations: float) -> float:
    """Secure key rate when loss is the only error source.

    R*t0 = { [1-(1-eta)^m]^n - [1-(1-eta)^m - eta^m/2]^n }^N. The first
    bracket asks every block to keep at least one photon pair, the second
    subtracts the events without a single fully intact, l-identifying block.
    """
    miss = (1.0 - eta) ** m
    keep = eta**m
    inner = (1.0 - miss) ** n - (1.0 - miss - keep / 2.0) ** n
    return pow_prob(inner, n_stations)


def closed_form_adv_rate(
    n: int, m: int, eta_t: float, p_adv: float, n_stations: float
) -> float:
    """Loss-only rate with an advanced physical BM of parameter p_adv."""
    miss = (1.0 - eta_t) ** m
    keep = (1.0 + p_adv**m) * eta_t**m / 2.0
    inner = (1.0 - miss) ** n - (1.0 - miss - keep) ** n
    return pow_prob(inner, n_stations)


class OnOffClosedForm(NamedTuple):
    p_trans: float
    q_x: float


def closed_form_onoff(n: int, m: int, eta: float, n_stations: float) -> OnOffClosedForm:
    """Raw transmission and bit-flip QBER for on-off detectors, no depolarizing.

    p_trans = [1 - (1 - eta^m/2)^n]^N; the QBER compares against the
    number-resolving loss-only rate, since exactly the events a resolving
    detector would reject are accepted with a 50% hidden flip.
    """
    inner = 1.0 - (1.0 - eta**m / 2.0) ** n
    p_trans = pow_prob(inner, n_stations)
    if p_trans <= 0.0:
        return OnOffClosedForm(0.0, 0.0)
    q_x = 0.5 * (1.0 - closed_form_loss_rate(n, m, eta, n_stations) / p_trans)
    return OnOffClosedForm(p_trans, q_x)
