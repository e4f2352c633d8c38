"""Seeded Monte Carlo ground truth for tails and the rank process.

Reproducibility contract: every simulation consumes PCG64 streams spawned
from SeedSequence(seed) with one child per fixed-size trial block, and
all aggregation is over integer counters, so results are bit-identical
for a given (seed, inputs) regardless of how blocks would be scheduled.
Gaussian variates come from numpy's ziggurat standard_normal on those
streams.

The information-density simulator draws per-symbol (X, Y) pairs under the
uniform input and thresholds running sums, reusing each path for every
requested blocklength.  The fountain simulator tracks GF(2) rank with one
64-bit word per basis row, eliminating in lockstep across all trials of a
block; uniform nonzero combination vectors are drawn by rejecting zero
words (expected < 2 draws).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import Bec, BiAwgn, Bsc, Channel

LN2 = math.log(2.0)
BLOCK = 1 << 13


@dataclass(frozen=True)
class SimConfig:
    trials: int
    seed: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be positive")


@dataclass(frozen=True)
class TailEstimate:
    p_hat: float
    stderr: float


@dataclass(frozen=True)
class RankSimResult:
    full_rank_freq: np.ndarray  # index n: empirical P[rank_n = k], n <= n_max
    mean_tau: float
    stderr_tau: float
    trials: int


def _block_streams(seed: int, trials: int):
    """(stream, block_size) pairs; one spawned child sequence per block."""
    n_blocks = (trials + BLOCK - 1) // BLOCK
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    sizes = [BLOCK] * (n_blocks - 1) + [trials - BLOCK * (n_blocks - 1)]
    return [(np.random.default_rng(c), s) for c, s in zip(children, sizes)]


def _iota_matrix(ch: Channel, rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Per-symbol information densities (bits) for independent channel uses."""
    if isinstance(ch, BiAwgn):
        root_p = math.sqrt(ch.snr)
        x = np.where(rng.random((rows, cols)) < 0.5, root_p, -root_p)
        y = x + rng.standard_normal((rows, cols))
        return 1.0 - np.logaddexp(0.0, -2.0 * x * y) / LN2
    if isinstance(ch, Bsc):
        flips = rng.random((rows, cols)) < ch.p
        hi = math.log2(2.0 - 2.0 * ch.p)
        lo = math.log2(2.0 * ch.p)
        return np.where(flips, lo, hi)
    if isinstance(ch, Bec):
        erased = rng.random((rows, cols)) < ch.p
        return np.where(erased, 0.0, 1.0)
    raise TypeError(f"unsupported channel {ch!r}")


def simulate_info_density_curve(ch: Channel, gamma: float, ns, cfg: SimConfig):
    """Tail estimates P[iota(X^n;Y^n) >= gamma] for each n, sharing sample paths."""
    ns = [int(n) for n in ns]
    if any(n < 1 for n in ns):
        raise ValueError("blocklengths must be positive")
    n_max = max(ns)
    counts = {n: 0 for n in ns}
    for rng, size in _block_streams(cfg.seed, cfg.trials):
        sums = np.cumsum(_iota_matrix(ch, rng, size, n_max), axis=1)
        for n in ns:
            counts[n] += int(np.count_nonzero(sums[:, n - 1] >= gamma))
    out = []
    for n in ns:
        p_hat = counts[n] / cfg.trials
        out.append(TailEstimate(p_hat, math.sqrt(p_hat * (1.0 - p_hat) / cfg.trials)))
    return out


def simulate_info_density_tail(ch: Channel, gamma: float, n: int, cfg: SimConfig) -> TailEstimate:
    return simulate_info_density_curve(ch, gamma, [n], cfg)[0]


def gf2_rank(rows, n_cols: int) -> int:
    """Rank over GF(2) of bitset rows by plain Gaussian elimination (reference)."""
    work = [int(r) for r in rows]
    rank = 0
    row_idx = 0
    for col in range(n_cols):
        pivot = None
        for r in range(row_idx, len(work)):
            if (work[r] >> col) & 1:
                pivot = r
                break
        if pivot is None:
            continue
        work[row_idx], work[pivot] = work[pivot], work[row_idx]
        for r in range(len(work)):
            if r != row_idx and ((work[r] >> col) & 1):
                work[r] ^= work[row_idx]
        rank += 1
        row_idx += 1
        if row_idx == len(work):
            break
    return rank


class LockstepRank:
    """Incremental GF(2) rank over many trials at once.

    Keeps, per trial, a reduced basis indexed by leading bit; a new word
    is folded against existing rows from the top bit down and lands on
    its leading free slot (or vanishes when dependent).
    """

    def __init__(self, trials: int, k: int):
        if not 1 <= k <= 64:
            raise ValueError("word width must be 1..64 bits")
        self.k = k
        self.basis = np.zeros((trials, k), dtype=np.uint64)
        self.present = np.zeros((trials, k), dtype=bool)
        self.rank = np.zeros(trials, dtype=np.int64)

    def update(self, words: np.ndarray) -> None:
        """Insert one word per trial; zero words (erasures) are no-ops."""
        v = words.astype(np.uint64, copy=True)
        one = np.uint64(1)
        for b in reversed(range(self.k)):
            has = ((v >> np.uint64(b)) & one).astype(bool)
            if not has.any():
                continue
            slot = self.present[:, b]
            use = has & slot
            if use.any():
                v[use] ^= self.basis[use, b]
            place = has & ~slot
            if place.any():
                self.basis[place, b] = v[place]
                self.present[place, b] = True
                self.rank[place] += 1
                v[place] = 0
        # dependent words have reduced to zero by now


def _nonzero_words(rng: np.random.Generator, k: int, size: int) -> np.ndarray:
    """Uniform draws from the nonzero k-bit words by rejection."""
    if k == 64:
        def draw(m):
            return rng.integers(0, np.iinfo(np.uint64).max, size=m,
                                dtype=np.uint64, endpoint=True)
    else:
        def draw(m):
            return rng.integers(0, 1 << k, size=m, dtype=np.uint64)
    words = draw(size)
    zero = words == 0
    while zero.any():
        words[zero] = draw(int(zero.sum()))
        zero = words == 0
    return words


def simulate_rlfc_rank(k: int, p: float, n_max: int, cfg: SimConfig) -> RankSimResult:
    """Simulate the systematic-then-fountain rank process on a BEC.

    Times 1..k send the natural basis columns, later times uniform nonzero
    combinations; every column is erased independently with probability p.
    Each trial runs to absorption (rank k), recording the stopping time
    and the running full-rank indicator up to n_max.
    """
    if not 1 <= k <= 64:
        raise ValueError("k must be 1..64")
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    cap = max(n_max, int(60.0 * (k + 12.0) / (1.0 - p)) + 200)
    tau_hist = np.zeros(cap + 2, dtype=np.int64)
    tau_sum = 0
    tau_sq = 0
    for rng, size in _block_streams(cfg.seed, cfg.trials):
        tracker = LockstepRank(size, k)
        tau = np.zeros(size, dtype=np.int64)
        n = 0
        while (tau == 0).any():
            n += 1
            if n > cap:
                raise RuntimeError(f"rank process not absorbed within {cap} uses")
            if n <= k:
                words = np.full(size, 1 << (n - 1), dtype=np.uint64)
            else:
                words = _nonzero_words(rng, k, size)
            words[rng.random(size) < p] = 0
            tracker.update(words)
            newly = (tracker.rank == k) & (tau == 0)
            tau[newly] = n
        tau_hist[: cap + 2] += np.bincount(tau, minlength=cap + 2)[: cap + 2]
        tau_sum += int(tau.sum())
        tau_sq += int((tau * tau).sum())
    absorbed_by = np.cumsum(tau_hist)
    freq = absorbed_by[: n_max + 1] / cfg.trials
    mean = tau_sum / cfg.trials
    var = (tau_sq - cfg.trials * mean * mean) / max(cfg.trials - 1, 1)
    return RankSimResult(freq, mean, math.sqrt(max(var, 0.0) / cfg.trials), cfg.trials)
