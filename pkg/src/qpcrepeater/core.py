"""Shared domain types, parameter validation, and composition enumeration.

Everything in this module is an immutable value or a pure function; instances
can be shared freely between threads and processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

N_OUTCOMES = 7
N_STATES = 4

# Frozen public contract: row u = 1..7 of every outcome matrix corresponds to
# the BM result below, columns v = 1..4 to the input Bell state phi_{k,l}.
OUTCOME_LABELS = ("(0,0)", "(0,1)", "(1,0)", "(1,1)", "(0,?)", "(1,?)", "(?,?)")
STATE_LABELS = ("phi_00", "phi_01", "phi_10", "phi_11")

DEFAULT_ATTENUATION_KM = 22.0
DEFAULT_PHOTON_CAP = 2048

_PROB_FLOOR = 1e-300
_COLUMN_SUM_ATOL = 1e-12
_NEGATIVE_CLIP = 1e-9


class Level(Enum):
    """Encoding level an outcome matrix lives on."""

    PHYSICAL = "physical"
    BLOCK = "block"
    LOGICAL = "logical"


class DetectorKind(Enum):
    PNRD = "pnrd"
    ON_OFF = "onoff"


class TiePolicy(Enum):
    """What a block-level tie in the on-off k-voting turns into."""

    DISCARD = "discard"
    ACCEPT_AS_ONE = "accept"


class ModelKind(Enum):
    LOSS = "loss"
    DEPOL = "depol"
    ADVANCED = "adv"
    ONOFF = "onoff"
    DARK = "dark"


def pow_prob(base: float, exponent: float) -> float:
    """base**exponent for probabilities with a real exponent.

    The base is clamped to [1e-300, 1] so that chains with thousands of
    stations underflow gracefully to 0 instead of raising.
    """
    x = min(max(base, _PROB_FLOOR), 1.0)
    return math.exp(exponent * math.log(x))


@dataclass(frozen=True)
class CodeParams:
    """Parity-code shape: n blocks of m photons per logical qubit."""

    n: int
    m: int
    photon_cap: int = DEFAULT_PHOTON_CAP

    def __post_init__(self) -> None:
        if not (isinstance(self.n, int) and isinstance(self.m, int)):
            raise ValueError("code parameters n, m must be integers")
        if self.n < 1 or self.m < 1:
            raise ValueError(f"code parameters must be >= 1, got ({self.n}, {self.m})")
        if self.n * self.m > self.photon_cap:
            raise ValueError(
                f"n*m = {self.n * self.m} exceeds the enumeration cap {self.photon_cap}"
            )

    @property
    def nm(self) -> int:
        return self.n * self.m


@dataclass(frozen=True)
class ChannelParams:
    """Total distance, repeater spacing, and fiber attenuation (all km).

    The station count N = L_tot/L0 is kept real-valued; use
    :meth:`from_station_count` when an integer station count is wanted.
    """

    l_tot_km: float
    l0_km: float
    l_att_km: float = DEFAULT_ATTENUATION_KM

    def __post_init__(self) -> None:
        if not self.l0_km > 0:
            raise ValueError("repeater spacing L0 must be positive")
        if self.l0_km > self.l_tot_km:
            raise ValueError("repeater spacing L0 cannot exceed the total distance")
        if not self.l_att_km > 0:
            raise ValueError("attenuation length must be positive")

    @classmethod
    def from_station_count(
        cls, l_tot_km: float, stations: int, l_att_km: float = DEFAULT_ATTENUATION_KM
    ) -> "ChannelParams":
        """Integer-N mode: fixes L0 = L_tot / stations."""
        if not (isinstance(stations, int) and stations >= 1):
            raise ValueError("station count must be a positive integer")
        return cls(l_tot_km, l_tot_km / stations, l_att_km)

    @property
    def n_stations(self) -> float:
        return self.l_tot_km / self.l0_km

    @property
    def eta_t(self) -> float:
        """Per-segment transmission survival probability exp(-L0/L_att)."""
        return math.exp(-self.l0_km / self.l_att_km)


@dataclass(frozen=True)
class DetectorParams:
    """Detector efficiency, thermal mean photon number, and detector kind."""

    eta_d: float = 1.0
    nbar: float = 0.0
    kind: DetectorKind = DetectorKind.PNRD

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta_d <= 1.0:
            raise ValueError(f"detector efficiency must lie in [0, 1], got {self.eta_d}")
        if self.nbar < 0.0:
            raise ValueError(f"thermal mean photon number must be >= 0, got {self.nbar}")


@dataclass(frozen=True)
class ErrorModelSpec:
    """Tagged description of which error channels and BM flavor apply.

    kind=ONOFF with kappa=None uses the epsilon-free on-off interpretation
    rules and therefore requires epsilon == 0; with kappa set, the
    kappa-voting rules apply and ``tie_policy`` decides tie handling.
    """

    kind: ModelKind
    epsilon: float = 0.0
    p_adv: float = 0.0
    kappa: Union[int, None] = None
    tie_policy: TiePolicy = TiePolicy.DISCARD

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon <= 0.5:
            raise ValueError(f"depolarizing strength must lie in [0, 1/2], got {self.epsilon}")
        if not 0.0 <= self.p_adv <= 1.0:
            raise ValueError(f"p_adv must lie in [0, 1], got {self.p_adv}")
        if self.epsilon > 0 and self.kind not in (ModelKind.DEPOL, ModelKind.ONOFF):
            raise ValueError(f"epsilon is not a parameter of the {self.kind.value} model")
        if self.p_adv > 0 and self.kind is not ModelKind.ADVANCED:
            raise ValueError(f"p_adv is not a parameter of the {self.kind.value} model")
        if self.kappa is not None:
            if self.kind is not ModelKind.ONOFF:
                raise ValueError("kappa only applies to the on-off model")
            if not (isinstance(self.kappa, int) and self.kappa >= 1):
                raise ValueError(f"kappa must be a positive integer, got {self.kappa}")
        if self.kind is ModelKind.ONOFF and self.kappa is None and self.epsilon > 0:
            raise ValueError("on-off with depolarizing errors requires a kappa voting boundary")

    @classmethod
    def loss(cls) -> "ErrorModelSpec":
        return cls(ModelKind.LOSS)

    @classmethod
    def depol(cls, epsilon: float) -> "ErrorModelSpec":
        return cls(ModelKind.DEPOL, epsilon=epsilon)

    @classmethod
    def advanced(cls, p_adv: float) -> "ErrorModelSpec":
        return cls(ModelKind.ADVANCED, p_adv=p_adv)

    @classmethod
    def onoff(
        cls,
        epsilon: float = 0.0,
        kappa: Union[int, None] = None,
        tie_policy: TiePolicy = TiePolicy.DISCARD,
    ) -> "ErrorModelSpec":
        return cls(ModelKind.ONOFF, epsilon=epsilon, kappa=kappa, tie_policy=tie_policy)

    @classmethod
    def dark(cls) -> "ErrorModelSpec":
        return cls(ModelKind.DARK)


@dataclass(frozen=True)
class OutcomeMatrix:
    """Column-stochastic 7x4 table of BM outcome probabilities.

    Row order (u = 1..7): (0,0), (0,1), (1,0), (1,1), (0,?), (1,?), (?,?).
    Column order (v = 1..4): input Bell states phi_00, phi_01, phi_10, phi_11.
    Arrays are stored 0-based; ``values[u-1, v-1]`` is the paper-style entry.
    """

    values: np.ndarray
    level: Level

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float)
        if vals.shape != (N_OUTCOMES, N_STATES):
            raise ValueError(f"outcome matrix must be 7x4, got {vals.shape}")
        if vals.min() < -_NEGATIVE_CLIP or vals.max() > 1.0 + _NEGATIVE_CLIP:
            raise ValueError("outcome probabilities must lie in [0, 1]")
        np.clip(vals, 0.0, 1.0, out=vals)
        sums = vals.sum(axis=0)
        if np.max(np.abs(sums - 1.0)) > _COLUMN_SUM_ATOL:
            raise ValueError(f"columns must sum to 1 within {_COLUMN_SUM_ATOL}, got {sums}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def column(self, v: int) -> np.ndarray:
        """Column for input Bell state index v in 1..4."""
        if not 1 <= v <= N_STATES:
            raise ValueError(f"column index must lie in 1..4, got {v}")
        return self.values[:, v - 1]

    def entry(self, u: int, v: int) -> float:
        """Paper-style 1-based entry access."""
        return float(self.values[u - 1, v - 1])


@dataclass(frozen=True)
class CountVector:
    """Multi-index over the 7 BM outcomes (gamma / lambda in the rule sets)."""

    counts: tuple

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != N_OUTCOMES:
            raise ValueError(f"count vector must have 7 entries, got {len(counts)}")
        if any(c < 0 for c in counts):
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __getitem__(self, i: int) -> int:
        return self.counts[i]

    def __iter__(self):
        return iter(self.counts)


def composition_count(total: int, n_slots: int) -> int:
    """Number of weak compositions of ``total`` into ``n_slots`` parts."""
    return math.comb(total + n_slots - 1, n_slots - 1)


def enumerate_compositions(total: int, active_slots: Iterable[int]) -> Iterator[CountVector]:
    """Yield every CountVector of the given total supported on ``active_slots``.

    Slots are 1-based indices into the outcome list. The stream is
    deterministic (first active slot counts descending) and yields exactly
    C(total + k - 1, k - 1) vectors for k active slots.
    """
    slots = sorted(set(int(s) for s in active_slots))
    if not slots:
        raise ValueError("active_slots must be nonempty")
    if any(s < 1 or s > N_OUTCOMES for s in slots):
        raise ValueError(f"slots must lie in 1..7, got {slots}")
    if total < 0:
        raise ValueError("total must be nonnegative")

    def rec(remaining: int, idx: int, acc: list) -> Iterator[CountVector]:
        if idx == len(slots) - 1:
            counts = [0] * N_OUTCOMES
            for s, c in zip(slots, acc):
                counts[s - 1] = c
            counts[slots[-1] - 1] = remaining
            yield CountVector(tuple(counts))
            return
        for c in range(remaining, -1, -1):
            acc.append(c)
            yield from rec(remaining - c, idx + 1, acc)
            acc.pop()

    yield from rec(total, 0, [])


def composition_array(total: int, n_slots: int) -> np.ndarray:
    """All weak compositions of ``total`` into ``n_slots`` parts as an int array.

    Same ordering as :func:`enumerate_compositions` restricted to the active
    slots; shape (C(total + n_slots - 1, n_slots - 1), n_slots).
    """
    if n_slots < 1:
        raise ValueError("n_slots must be >= 1")
    if total < 0:
        raise ValueError("total must be nonnegative")
    if n_slots == 1:
        return np.array([[total]], dtype=np.int64)
    blocks = []
    for first in range(total, -1, -1):
        rest = composition_array(total - first, n_slots - 1)
        head = np.full((rest.shape[0], 1), first, dtype=np.int64)
        blocks.append(np.hstack([head, rest]))
    return np.vstack(blocks)


def multinomial(total: int, counts: Union[CountVector, Sequence[int]]) -> float:
    """Multinomial coefficient total! / prod(counts_i!).

    Exact integer arithmetic up to total = 170, log-space (lgamma) beyond.
    """
    cs = tuple(counts.counts if isinstance(counts, CountVector) else counts)
    if any(c < 0 for c in cs):
        raise ValueError("counts must be nonnegative")
    if sum(cs) != total:
        raise ValueError(f"counts sum to {sum(cs)}, expected {total}")
    if total <= 170:
        out = 1
        remaining = total
        for c in cs:
            out *= math.comb(remaining, c)
            remaining -= c
        return float(out)
    log = math.lgamma(total + 1) - sum(math.lgamma(c + 1) for c in cs)
    return math.exp(log)
