"""Independent validation: Monte-Carlo sampling and state-vector identities.

The Monte-Carlo samplers draw the parity-constrained Bell-state expansions
directly and push samples through the interpretation rules, providing a
formula-free cross-check of the propagation engine. The state-vector
routines build both sides of the encoded-Bell-state representations as
explicit amplitude vectors (up to 16 qubits) and compare them after the
blockwise mode pairing.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from .core import N_OUTCOMES, OutcomeMatrix
from .propagation import RuleFamily

_MAX_QUBITS = 16


@dataclass(frozen=True)
class McConfig:
    """Sample budget and master seed; results are reproducible bit for bit."""

    samples: int
    seed: int = 20240901

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError("samples must be >= 1")


@dataclass(frozen=True)
class ParitySet:
    """All bit vectors of a given length with fixed parity (the sets A_{l,m})."""

    l: int
    size: int

    def __post_init__(self) -> None:
        if self.l not in (0, 1):
            raise ValueError("parity must be 0 or 1")
        if self.size < 1:
            raise ValueError("size must be >= 1")

    @property
    def count(self) -> int:
        return 2 ** (self.size - 1) if self.size > 1 else (1 if self.l in (0, 1) else 0)

    def members(self) -> Iterator[Tuple[int, ...]]:
        for bits in itertools.product((0, 1), repeat=self.size):
            if sum(bits) % 2 == self.l:
                yield bits

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Uniform draws, shape (count, size): free bits plus a parity bit."""
        bits = rng.integers(0, 2, size=(count, self.size), dtype=np.int8)
        bits[:, -1] = (self.l + bits[:, :-1].sum(axis=1)) % 2
        return bits


@dataclass(frozen=True)
class McEstimate:
    """Empirical outcome frequencies with binomial standard errors."""

    freq: np.ndarray
    stderr: np.ndarray
    samples: int


def _finish(outcomes_u: np.ndarray, samples: int) -> McEstimate:
    freq = np.bincount(outcomes_u - 1, minlength=N_OUTCOMES)[:N_OUTCOMES] / samples
    stderr = np.sqrt(freq * (1.0 - freq) / samples)
    return McEstimate(freq, stderr, samples)


def _draw_physical(
    p: OutcomeMatrix, k_bits: np.ndarray, r_bits: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Physical outcomes (0-based u) for Bell inputs phi_{k_bits, r_bits}."""
    col_idx = 2 * k_bits + r_bits
    uni = rng.random(col_idx.shape)
    out = np.empty(col_idx.shape, dtype=np.int8)
    for v in range(4):
        mask = col_idx == v
        if mask.any():
            cdf = np.cumsum(p.values[:, v])
            out[mask] = np.minimum(np.searchsorted(cdf, uni[mask], side="right"), N_OUTCOMES - 1)
    return out


def _count_outcomes(outcomes: np.ndarray) -> np.ndarray:
    """(S, width) outcome draws -> (S, 7) count vectors."""
    counts = np.empty((outcomes.shape[0], N_OUTCOMES), dtype=np.int64)
    for u in range(N_OUTCOMES):
        counts[:, u] = (outcomes == u).sum(axis=1)
    return counts


def mc_block_column(
    p: OutcomeMatrix, m: int, k: int, l: int, rules: RuleFamily, cfg: McConfig
) -> McEstimate:
    """Sample the block-level outcome distribution for input phi_{k,l}^(m).

    Draws r uniformly from A_{l,m}, each physical outcome from the P column
    of phi_{k, r_i}, and classifies the counts with the block rules.
    """
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    r = ParitySet(l, m).sample(rng, cfg.samples)
    k_bits = np.full_like(r, k)
    outcomes = _draw_physical(p, k_bits, r, rng)
    u = rules.classify_array(_count_outcomes(outcomes), m)
    return _finish(np.asarray(u, dtype=np.int64), cfg.samples)


def mc_logical_column(
    p: OutcomeMatrix,
    n: int,
    m: int,
    k: int,
    l: int,
    rules_f: RuleFamily,
    rules_g: RuleFamily,
    cfg: McConfig,
) -> McEstimate:
    """Two-stage sampler for the logical outcome distribution of phi_{k,l}^(n,m).

    Draws s uniformly from A_{k,n}, runs the block sampler with block index
    s_i for every block, and classifies the block-outcome counts with the
    logical rules.
    """
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    s = ParitySet(k, n).sample(rng, cfg.samples)
    block_u = np.empty((cfg.samples, n), dtype=np.int8)
    for j in range(n):
        r = ParitySet(l, m).sample(rng, cfg.samples)
        k_bits = np.repeat(s[:, j : j + 1], m, axis=1)
        outcomes = _draw_physical(p, k_bits, r, rng)
        block_u[:, j] = rules_f.classify_array(_count_outcomes(outcomes), m) - 1
    u = rules_g.classify_array(_count_outcomes(block_u), n)
    return _finish(np.asarray(u, dtype=np.int64), cfg.samples)


# ---------------------------------------------------------------------------
# state-vector verification of the encoded-Bell-state representations


def _kron_all(vectors) -> np.ndarray:
    out = np.array([1.0])
    for v in vectors:
        out = np.kron(out, v)
    return out


def _permute_qubits(vec: np.ndarray, src_labels: list, dst_labels: list) -> np.ndarray:
    """Reorder a state vector from src qubit ordering to dst qubit ordering."""
    q = len(src_labels)
    axes = [src_labels.index(lbl) for lbl in dst_labels]
    return vec.reshape((2,) * q).transpose(axes).reshape(-1)


def _bell_pair(k: int, l: int) -> np.ndarray:
    vec = np.zeros(4)
    vec[2 * 0 + k] = 1.0 / math.sqrt(2.0)
    vec[2 * 1 + (1 - k)] = (-1.0) ** l / math.sqrt(2.0)
    return vec


def _repeated_bits_index(bit: int, width: int) -> int:
    return bit * ((1 << width) - 1)


def _block_bell_direct(k: int, l: int, m: int) -> np.ndarray:
    """phi_{k,l}^(m) over qubits [A_1..A_m, B_1..B_m] straight from the definition."""
    vec = np.zeros(1 << (2 * m))
    a0 = _repeated_bits_index(0, m)
    a1 = _repeated_bits_index(1, m)
    vec[(a0 << m) + _repeated_bits_index(k, m)] = 1.0 / math.sqrt(2.0)
    vec[(a1 << m) + _repeated_bits_index(1 - k, m)] += (-1.0) ** l / math.sqrt(2.0)
    return vec


def _codeword(bit: int, n: int, m: int) -> np.ndarray:
    """Logical codeword over n*m qubits (block-major ordering)."""
    vec = np.zeros(1 << (n * m))
    amp = 2.0 ** (-(n - 1) / 2.0)
    for b in ParitySet(bit, n).members() if n > 1 else [(bit,)]:
        idx = 0
        for bj in b:
            idx = (idx << m) + _repeated_bits_index(bj, m)
        vec[idx] += amp
    return vec


def _logical_bell_direct(k: int, l: int, n: int, m: int) -> np.ndarray:
    """phi_{k,l}^(n,m) over qubits [A(1,1)..A(n,m), B(1,1)..B(n,m)]."""
    left = np.kron(_codeword(0, n, m), _codeword(k, n, m))
    right = np.kron(_codeword(1, n, m), _codeword(1 - k, n, m))
    return (left + (-1.0) ** l * right) / math.sqrt(2.0)


def _labels_block_direct(m: int) -> list:
    return [("A", i) for i in range(m)] + [("B", i) for i in range(m)]


def _labels_block_paired(m: int) -> list:
    return [(side, i) for i in range(m) for side in ("A", "B")]


def block_representation_residual(k: int, l: int, m: int) -> float:
    """Max amplitude deviation between phi_{k,l}^(m) and its pair expansion."""
    if 2 * m > _MAX_QUBITS:
        raise ValueError(f"block check limited to 2m <= {_MAX_QUBITS} qubits")
    direct = _block_bell_direct(k, l, m)
    acc = np.zeros_like(direct)
    for r in ParitySet(l, m).members():
        acc += _kron_all(_bell_pair(k, ri) for ri in r)
    paired = acc / math.sqrt(2.0 ** (m - 1))
    aligned = _permute_qubits(paired, _labels_block_paired(m), _labels_block_direct(m))
    return float(np.max(np.abs(direct - aligned)))


def _labels_logical_direct(n: int, m: int) -> list:
    return [("A", j, i) for j in range(n) for i in range(m)] + [
        ("B", j, i) for j in range(n) for i in range(m)
    ]


def _labels_logical_paired(n: int, m: int) -> list:
    labels = []
    for j in range(n):
        labels += [("A", j, i) for i in range(m)]
        labels += [("B", j, i) for i in range(m)]
    return labels


def logical_representation_residual(k: int, l: int, n: int, m: int) -> float:
    """Max amplitude deviation between phi_{k,l}^(n,m) and its block expansion."""
    if 2 * n * m > _MAX_QUBITS:
        raise ValueError(f"logical check limited to 2nm <= {_MAX_QUBITS} qubits")
    direct = _logical_bell_direct(k, l, n, m)
    acc = np.zeros_like(direct)
    for s in ParitySet(k, n).members() if n > 1 else [(k,)]:
        acc += _kron_all(_block_bell_direct(sj, l, m) for sj in s)
    paired = acc / math.sqrt(2.0 ** (n - 1))
    aligned = _permute_qubits(paired, _labels_logical_paired(n, m), _labels_logical_direct(n, m))
    return float(np.max(np.abs(direct - aligned)))


@dataclass(frozen=True)
class BellCheck:
    ok: bool
    max_residual: float


def verify_bell_representation(n: int, m: int, atol: float = 1e-12) -> BellCheck:
    """Check both representation identities for all four Bell states.

    Builds explicit amplitude vectors for the block identity at size m and
    the logical identity at (n, m); requires 2nm <= 16 qubits.
    """
    if 2 * n * m > _MAX_QUBITS:
        raise ValueError(f"state-vector check limited to 2nm <= {_MAX_QUBITS} qubits")
    residual = 0.0
    for k in (0, 1):
        for l in (0, 1):
            residual = max(residual, block_representation_residual(k, l, m))
            residual = max(residual, logical_representation_residual(k, l, n, m))
    return BellCheck(residual <= atol, residual)
