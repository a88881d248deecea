"""Propagation of outcome matrices physical -> block -> logical.

Both steps share one engine. For target column v with source column pair
(a, b) and sign s, the engine evaluates

    out[u, v] = 2**-T * sum_gamma multinom(T; gamma) * delta_{rule(gamma)=u}
                * [ (col_a + col_b)**gamma + s * (col_a - col_b)**gamma ]

over count vectors gamma with |gamma| = T (T = m at the block step, n at
the logical step), using multi-index power notation. Components where both
the sum and the difference vector vanish are pruned from the enumeration,
which keeps the loss-type models tractable up to n of order 100.

The block step uses column pairs (1,2), (1,2), (3,4), (3,4) with signs
+, -, +, - (the sign tracks the phase index l); the logical step uses
(1,3), (2,4), (1,3), (2,4) with signs +, +, -, - (sign tracks k).

For the standard block->logical rules the classification only depends on
the aggregates (c1+c3, c2+c4, parity of c3+c4+c6, c7 > 0), so the engine
collapses the enumeration to trinomial form; identical mathematics, but
C(T+2, 2) terms instead of C(T+6, 6). Any other rule family goes through
the generic pruned enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple, Union

import numpy as np

from .core import (
    CountVector,
    Level,
    N_OUTCOMES,
    OutcomeMatrix,
    TiePolicy,
    composition_array,
)

Counts = Union[CountVector, Sequence[int]]

_NAIVE_TOTAL_CAP = 8
_TABLE_CACHE_CAP = 64


def _counts7(gamma: Counts, total: int) -> Tuple[int, ...]:
    cs = tuple(gamma.counts if isinstance(gamma, CountVector) else gamma)
    if len(cs) != N_OUTCOMES:
        raise ValueError(f"expected 7 counts, got {len(cs)}")
    if sum(cs) != total:
        raise ValueError(f"counts sum to {sum(cs)}, expected {total}")
    return cs


def classify_standard_f(gamma: Counts, m: int) -> int:
    """Block-level interpretation of m physical BM results.

    l is identified only when every physical BM reported the same k
    (c1+c2 = m or c3+c4 = m, parity of the second slot fixing l); otherwise
    a majority vote on k decides between (0,?), (1,?), and a tie (?,?).
    """
    c = _counts7(gamma, m)
    if c[0] + c[1] == m:
        return 1 if c[1] % 2 == 0 else 2
    if c[2] + c[3] == m:
        return 3 if c[3] % 2 == 0 else 4
    left = c[0] + c[1] + c[4]
    right = c[2] + c[3] + c[5]
    if left > right:
        return 5
    if left < right:
        return 6
    return 7


def classify_standard_g(lam: Counts, n: int) -> int:
    """Logical-level interpretation of n block BM results.

    k must be known in every block (c7 = 0) and is fixed by the parity of
    c3+c4+c6; l is decided by majority between c1+c3 and c2+c4.
    """
    c = _counts7(lam, n)
    if c[6] > 0:
        return 7
    odd = (c[2] + c[3] + c[5]) % 2 == 1
    p = c[0] + c[2]
    q = c[1] + c[3]
    if not odd:
        return 1 if p > q else 2 if p < q else 5
    return 3 if p > q else 4 if p < q else 6


def classify_onoff_tilde(gamma: Counts, m: int) -> int:
    """On-off block rules without depolarizing errors.

    A single k=1 result already rules out a phi_0l block, so the block is
    read as (1,?) unless the k=1 results fill the whole block (l known) or
    are absent entirely ((0,?)).
    """
    c = _counts7(gamma, m)
    ones = c[2] + c[3]
    if ones == m:
        return 3 if c[3] % 2 == 0 else 4
    if ones == 0:
        return 5
    return 6


def classify_onoff_kappa(gamma: Counts, m: int, kappa: int, tie_policy: TiePolicy) -> int:
    """On-off block rules with a voting boundary kappa on the k=1 count.

    Strictly more than kappa k=1 results read as (1,?), strictly fewer as
    (0,?); exactly kappa is a tie, discarded as (?,?) or accepted as (1,?)
    depending on the tie policy.
    """
    if not 1 <= kappa <= m - 1:
        raise ValueError(f"kappa must lie in 1..m-1, got {kappa} for m={m}")
    c = _counts7(gamma, m)
    ones = c[2] + c[3]
    if ones == m:
        return 3 if c[3] % 2 == 0 else 4
    if ones < kappa:
        return 5
    if ones == kappa:
        return 6 if tie_policy is TiePolicy.ACCEPT_AS_ONE else 7
    return 6


def _array_standard_f(counts: np.ndarray, m: int) -> np.ndarray:
    c = counts
    u = np.empty(c.shape[0], dtype=np.uint8)
    zeros = c[:, 0] + c[:, 1]
    ones = c[:, 2] + c[:, 3]
    left = zeros + c[:, 4]
    right = ones + c[:, 5]
    u[:] = np.where(left > right, 5, np.where(left < right, 6, 7))
    full1 = ones == m
    u[full1] = np.where(c[full1, 3] % 2 == 0, 3, 4)
    full0 = zeros == m
    u[full0] = np.where(c[full0, 1] % 2 == 0, 1, 2)
    return u


def _array_standard_g(counts: np.ndarray, n: int) -> np.ndarray:
    c = counts
    odd = (c[:, 2] + c[:, 3] + c[:, 5]) % 2 == 1
    p = c[:, 0] + c[:, 2]
    q = c[:, 1] + c[:, 3]
    u = np.where(p > q, 1, np.where(p < q, 2, 5)).astype(np.uint8)
    u[odd] = np.where(p[odd] > q[odd], 3, np.where(p[odd] < q[odd], 4, 6))
    u[c[:, 6] > 0] = 7
    return u


def _array_onoff_tilde(counts: np.ndarray, m: int) -> np.ndarray:
    ones = counts[:, 2] + counts[:, 3]
    u = np.full(counts.shape[0], 6, dtype=np.uint8)
    u[ones == 0] = 5
    full = ones == m
    u[full] = np.where(counts[full, 3] % 2 == 0, 3, 4)
    return u


def _array_onoff_kappa(counts: np.ndarray, m: int, kappa: int, tie_policy: TiePolicy) -> np.ndarray:
    if not 1 <= kappa <= m - 1:
        raise ValueError(f"kappa must lie in 1..m-1, got {kappa} for m={m}")
    ones = counts[:, 2] + counts[:, 3]
    u = np.full(counts.shape[0], 6, dtype=np.uint8)
    u[ones < kappa] = 5
    u[ones == kappa] = 6 if tie_policy is TiePolicy.ACCEPT_AS_ONE else 7
    full = ones == m
    u[full] = np.where(counts[full, 3] % 2 == 0, 3, 4)
    return u


@dataclass(frozen=True)
class RuleFamily:
    """Total classification of a CountVector into one of the 7 outcomes.

    ``classify`` maps (counts, level size) to u in 1..7 and must be
    exhaustive and exclusive over all count vectors of the declared total.
    ``majority_aggregate`` marks families whose classification factors
    through (c1+c3, c2+c4, parity(c3+c4+c6), c7>0), enabling the collapsed
    logical-step evaluation.
    """

    name: str
    classify: Callable[[Counts, int], int]
    classify_array: Callable[[np.ndarray, int], np.ndarray]
    params: tuple = ()
    majority_aggregate: bool = False

    @property
    def key(self) -> tuple:
        return (self.name, self.params)


STANDARD_F = RuleFamily("standard-f", classify_standard_f, _array_standard_f)
STANDARD_G = RuleFamily(
    "standard-g", classify_standard_g, _array_standard_g, majority_aggregate=True
)
ONOFF_TILDE_F = RuleFamily("onoff-tilde-f", classify_onoff_tilde, _array_onoff_tilde)


def onoff_kappa_rules(kappa: int, tie_policy: TiePolicy = TiePolicy.DISCARD) -> RuleFamily:
    """Rule family for on-off detectors with depolarizing errors."""
    if not (isinstance(kappa, int) and kappa >= 1):
        raise ValueError(f"kappa must be a positive integer, got {kappa}")
    return RuleFamily(
        "onoff-kappa-f",
        lambda gamma, m: classify_onoff_kappa(gamma, m, kappa, tie_policy),
        lambda counts, m: _array_onoff_kappa(counts, m, kappa, tie_policy),
        params=(kappa, tie_policy.value),
    )


# ---------------------------------------------------------------------------
# engine internals

_BLOCK_PAIRS = ((0, 1), (0, 1), (2, 3), (2, 3))
_BLOCK_SIGNS = (1.0, -1.0, 1.0, -1.0)
_LOGICAL_PAIRS = ((0, 2), (1, 3), (0, 2), (1, 3))
_LOGICAL_SIGNS = (1.0, 1.0, -1.0, -1.0)


def _multinomial_row(total: int, row: Sequence[int]) -> float:
    out = 1
    remaining = total
    for c in row:
        out *= math.comb(remaining, int(c))
        remaining -= int(c)
    return float(out)


@dataclass(frozen=True)
class _ClassifiedTable:
    comps: np.ndarray  # (K, s) counts over the support slots
    coef: np.ndarray  # (K,) multinomial coefficients
    groups: tuple  # 7 index arrays, one per outcome u


_table_cache: dict = {}


def _classified_table(total: int, support: Tuple[int, ...], rules: RuleFamily) -> _ClassifiedTable:
    key = (total, support, rules.key)
    hit = _table_cache.get(key)
    if hit is not None:
        return hit
    comps = composition_array(total, len(support))
    full = np.zeros((comps.shape[0], N_OUTCOMES), dtype=np.int64)
    full[:, list(support)] = comps
    u = np.asarray(rules.classify_array(full, total), dtype=np.uint8)
    if total <= 170:
        coef = np.array([_multinomial_row(total, row) for row in comps])
    else:
        logfact = np.array([math.lgamma(i + 1.0) for i in range(total + 1)])
        coef = np.exp(logfact[total] - logfact[comps].sum(axis=1))
    groups = tuple(np.flatnonzero(u == w + 1) for w in range(N_OUTCOMES))
    table = _ClassifiedTable(comps, coef, groups)
    if len(_table_cache) >= _TABLE_CACHE_CAP:
        _table_cache.pop(next(iter(_table_cache)))
    _table_cache[key] = table
    return table


def _column_generic(
    svec: np.ndarray, dvec: np.ndarray, sign: float, total: int, rules: RuleFamily
) -> np.ndarray:
    support = tuple(int(w) for w in np.flatnonzero((svec != 0.0) | (dvec != 0.0)))
    if not support:
        # degenerate all-zero column pair; nothing contributes
        return np.zeros(N_OUTCOMES)
    table = _classified_table(total, support, rules)
    sup = list(support)
    pow_s = np.prod(svec[sup][None, :] ** table.comps, axis=1)
    pow_d = np.prod(dvec[sup][None, :] ** table.comps, axis=1)
    weights = table.coef * (pow_s + sign * pow_d)
    out = np.empty(N_OUTCOMES)
    for w in range(N_OUTCOMES):
        idx = table.groups[w]
        out[w] = math.fsum(weights[idx]) if idx.size else 0.0
    return out


@dataclass(frozen=True)
class _TrinomialTable:
    p: np.ndarray
    q: np.ndarray
    c: np.ndarray
    coef: np.ndarray
    gt: np.ndarray
    lt: np.ndarray
    eq: np.ndarray


_tri_cache: dict = {}


def _trinomial_table(total: int) -> _TrinomialTable:
    hit = _tri_cache.get(total)
    if hit is not None:
        return hit
    comps = composition_array(total, 3)
    p, q, c = comps[:, 0], comps[:, 1], comps[:, 2]
    coef = np.array([_multinomial_row(total, row) for row in comps])
    table = _TrinomialTable(
        p,
        q,
        c,
        coef,
        np.flatnonzero(p > q),
        np.flatnonzero(p < q),
        np.flatnonzero(p == q),
    )
    if len(_tri_cache) >= _TABLE_CACHE_CAP:
        _tri_cache.pop(next(iter(_tri_cache)))
    _tri_cache[total] = table
    return table


def _pow_table(x: float, total: int) -> np.ndarray:
    """[1, x, x**2, ..., x**total] by cumulative products."""
    out = np.empty(total + 1)
    out[0] = 1.0
    out[1:] = x
    return np.cumprod(out, out=out)


def _column_majority_fast(
    svec: np.ndarray, dvec: np.ndarray, sign: float, total: int
) -> np.ndarray:
    """Collapsed evaluation for majority-aggregate (standard logical) rules.

    Slots {1,3}, {2,4}, {5,6} merge into three weighted variables; a parity
    projector (sign flip on slots 3, 4, 6) splits even from odd k-parity,
    and c7 > 0 is the complement of dropping slot 7.
    """
    t = _trinomial_table(total)
    out = np.zeros(N_OUTCOMES)
    for vec, wgt in ((svec, 1.0), (dvec, sign)):
        tot_all = float(vec.sum())
        tot_no7 = tot_all - float(vec[6])
        out[6] += wgt * (tot_all**total - tot_no7**total)
        for sg in (1.0, -1.0):
            pow_a = _pow_table(vec[0] + sg * vec[2], total)
            pow_b = _pow_table(vec[1] + sg * vec[3], total)
            pow_c = _pow_table(vec[4] + sg * vec[5], total)
            terms = t.coef * pow_a[t.p] * pow_b[t.q] * pow_c[t.c]
            s_gt = float(terms[t.gt].sum())
            s_lt = float(terms[t.lt].sum())
            s_eq = float(terms[t.eq].sum())
            half = 0.5 * wgt
            out[0] += half * s_gt
            out[1] += half * s_lt
            out[4] += half * s_eq
            out[2] += sg * half * s_gt
            out[3] += sg * half * s_lt
            out[5] += sg * half * s_eq
    return out


def _propagate(
    mat: OutcomeMatrix,
    total: int,
    rules: RuleFamily,
    pairs: tuple,
    signs: tuple,
    out_level: Level,
) -> OutcomeMatrix:
    if total < 1:
        raise ValueError(f"level size must be >= 1, got {total}")
    vals = np.empty((N_OUTCOMES, 4))
    scale = 0.5**total
    for v in range(4):
        a, b = pairs[v]
        svec = mat.values[:, a] + mat.values[:, b]
        dvec = mat.values[:, a] - mat.values[:, b]
        if rules.majority_aggregate:
            col = _column_majority_fast(svec, dvec, signs[v], total)
        else:
            col = _column_generic(svec, dvec, signs[v], total, rules)
        vals[:, v] = col * scale
    return OutcomeMatrix(vals, out_level)


def propagate_block(p: OutcomeMatrix, m: int, rules: RuleFamily) -> OutcomeMatrix:
    """Block-level outcome matrix from a physical one (m physical BMs)."""
    return _propagate(p, m, rules, _BLOCK_PAIRS, _BLOCK_SIGNS, Level.BLOCK)


def propagate_logical(b: OutcomeMatrix, n: int, rules: RuleFamily) -> OutcomeMatrix:
    """Logical-level outcome matrix from a block one (n block BMs)."""
    return _propagate(b, n, rules, _LOGICAL_PAIRS, _LOGICAL_SIGNS, Level.LOGICAL)


# ---------------------------------------------------------------------------
# literal double-sum oracles

def _propagate_naive(
    mat: OutcomeMatrix,
    total: int,
    rules: RuleFamily,
    pairs: tuple,
    parities: tuple,
    out_level: Level,
) -> OutcomeMatrix:
    if total > _NAIVE_TOTAL_CAP:
        raise ValueError(f"naive propagation is capped at total <= {_NAIVE_TOTAL_CAP}")
    vals = np.zeros((N_OUTCOMES, 4))
    for v in range(4):
        a, b = pairs[v]
        col_a = mat.values[:, a]
        col_b = mat.values[:, b]
        acc = [[] for _ in range(N_OUTCOMES)]
        for r in range(parities[v], total + 1, 2):
            binom_r = math.comb(total, r)
            alphas = composition_array(total - r, N_OUTCOMES)
            betas = composition_array(r, N_OUTCOMES)
            w_alpha = [
                _multinomial_row(total - r, row) * float(np.prod(col_a**row)) for row in alphas
            ]
            w_beta = [_multinomial_row(r, row) * float(np.prod(col_b**row)) for row in betas]
            for ia, alpha in enumerate(alphas):
                if w_alpha[ia] == 0.0:
                    continue
                for ib, beta in enumerate(betas):
                    if w_beta[ib] == 0.0:
                        continue
                    u = rules.classify(tuple(alpha + beta), total)
                    acc[u - 1].append(binom_r * w_alpha[ia] * w_beta[ib])
        vals[:, v] = [math.fsum(terms) * 0.5 ** (total - 1) for terms in acc]
    return OutcomeMatrix(vals, out_level)


def propagate_block_naive(p: OutcomeMatrix, m: int, rules: RuleFamily) -> OutcomeMatrix:
    """Literal double sum over (alpha, beta) with parity-restricted r.

    Exists solely as an independent oracle for :func:`propagate_block`;
    rejects m > 8 to bound the combinatorial blowup.
    """
    return _propagate_naive(p, m, rules, _BLOCK_PAIRS, (0, 1, 0, 1), Level.BLOCK)


def propagate_logical_naive(b: OutcomeMatrix, n: int, rules: RuleFamily) -> OutcomeMatrix:
    """Double-sum analogue of :func:`propagate_block_naive` for the logical step."""
    return _propagate_naive(b, n, rules, _LOGICAL_PAIRS, (0, 0, 1, 1), Level.LOGICAL)
