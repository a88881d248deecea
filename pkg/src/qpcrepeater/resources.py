"""Source-count estimators for the ancilla-state generation schemes.

Two schemes are covered: the nonlinear photon-doubling chain, whose cost is
linear in the photon number (2nm - 1 modules per encoded Bell state), and
the linear-optics multiplexing scheme, whose source count scales as
(n m)**log2(2 / (p_BM * eta_sg**2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_GHZ_PHOTONS = 192.0  # six sources per attempt at success probability 1/32


def cpc_module_count(n: int, m: int) -> int:
    """Photon-doubling modules needed for one encoded Bell state: 2nm - 1."""
    if n < 1 or m < 1:
        raise ValueError("code parameters must be >= 1")
    return 2 * n * m - 1


def heralded_source_success(eta_s: float, k_sources: int) -> float:
    """Probability that at least one of k multiplexed sources fires."""
    if not 0.0 <= eta_s <= 1.0:
        raise ValueError(f"source efficiency must lie in [0, 1], got {eta_s}")
    if k_sources < 1:
        raise ValueError("k_sources must be >= 1")
    return 1.0 - (1.0 - eta_s) ** k_sources


def multiplex_pool_size(p_eff: float, p_sg: float) -> int:
    """Smallest even pool size n_X with 1 - (1 - p_eff)**(n_X/2) >= p_sg."""
    if not 0.0 < p_eff <= 1.0:
        raise ValueError(f"effective pairing probability must lie in (0, 1], got {p_eff}")
    if not 0.0 <= p_sg < 1.0:
        raise ValueError(f"target state-generation probability must lie in [0, 1), got {p_sg}")
    pairs = 1
    while 1.0 - (1.0 - p_eff) ** pairs < p_sg:
        pairs += 1
        if pairs > 10_000_000:
            raise ValueError("target probability unreachable for this pairing probability")
    return 2 * pairs


def mux_cost_exponent(p_bm: float, eta_sg: float = 1.0) -> float:
    """Multiplexing-depth exponent log2(2 / (p_BM * eta_sg**2))."""
    if not 0.0 < p_bm <= 1.0:
        raise ValueError(f"BM success probability must lie in (0, 1], got {p_bm}")
    if not 0.0 < eta_sg <= 1.0:
        raise ValueError(f"survival probability must lie in (0, 1], got {eta_sg}")
    return math.log2(2.0 / (p_bm * eta_sg**2))


@dataclass(frozen=True)
class MuxParams:
    """Multiplexed linear-optics state generation parameters.

    p_bm: physical BM success probability (1/2 standard, 3/4 boosted);
    eta_sg: survival probability of each photon measured during generation;
    p_sg: target per-station generation success probability;
    n_bm_boost: ancilla photons consumed per boosted BM (0 for the
    standard BM, 4 for the boosted one).
    """

    p_bm: float
    eta_sg: float = 1.0
    p_sg: float = 0.999
    n_bm_boost: int = 4

    def __post_init__(self) -> None:
        if not 0.0 < self.p_bm <= 1.0:
            raise ValueError(f"p_bm must lie in (0, 1], got {self.p_bm}")
        if not 0.0 < self.eta_sg <= 1.0:
            raise ValueError(f"eta_sg must lie in (0, 1], got {self.eta_sg}")
        if not 0.0 <= self.p_sg < 1.0:
            raise ValueError(f"p_sg must lie in [0, 1), got {self.p_sg}")
        if self.n_bm_boost < 0:
            raise ValueError("n_bm_boost must be >= 0")

    @classmethod
    def boosted(cls, eta_sg: float = 1.0, p_sg: float = 0.999) -> "MuxParams":
        return cls(p_bm=0.75, eta_sg=eta_sg, p_sg=p_sg, n_bm_boost=4)

    @classmethod
    def standard(cls, eta_sg: float = 1.0, p_sg: float = 0.999) -> "MuxParams":
        return cls(p_bm=0.5, eta_sg=eta_sg, p_sg=p_sg, n_bm_boost=0)


@dataclass(frozen=True)
class ResourceReport:
    """Source-count breakdown for one multiplexed encoded Bell state.

    n_s = n_tilde + n_bm_total; n_s_conservative adds the (2/p_BM)**2
    factor covering code sizes away from powers of two.
    """

    n_x: int
    n_tilde: float
    n_bm_total: float
    n_s: float
    n_s_conservative: float


def mux_source_count(n: int, m: int, params: MuxParams) -> ResourceReport:
    """Average single-photon sources to generate one QPC(n, m) Bell state.

    Pool size from the boosted-and-lossy pairing probability
    p_BM * eta_sg**4; the GHZ supply and the BM-boost photons both scale
    as (n m)**log2(2 / (p_BM * eta_sg**2)).
    """
    if n < 1 or m < 1:
        raise ValueError("code parameters must be >= 1")
    n_x = multiplex_pool_size(params.p_bm * params.eta_sg**4, params.p_sg)
    scale = (n * m) ** mux_cost_exponent(params.p_bm, params.eta_sg)
    n_tilde = _GHZ_PHOTONS / params.eta_sg**3 * n_x * scale
    n_bm = params.n_bm_boost * (n_x / 2.0) / (1.0 - params.p_bm / 2.0) * scale
    n_s = n_tilde + n_bm
    return ResourceReport(n_x, n_tilde, n_bm, n_s, n_s * (2.0 / params.p_bm) ** 2)
