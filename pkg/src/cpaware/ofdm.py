"""CO-OFDM baseband chain: Gray-coded QAM, IDFT synthesis, cyclic prefix, BER.

Conventions, fixed so that bit-level results are reproducible:

* Square QAM alphabets (4/16/64) are normalized to unit average power.
* Gray labelling is per axis.  Each axis takes ``k = log2(sqrt(order))``
  bits, interpreted MSB-first as an integer ``v``; the axis amplitude is
  ``(sqrt(order) - 1) - 2 * gray_decode(v)`` before normalization.  The
  first ``k`` bits of a symbol label select the in-phase axis, the last
  ``k`` the quadrature axis.  For 4-QAM this yields

      00 -> (+1+1j)/sqrt(2)    01 -> (+1-1j)/sqrt(2)
      10 -> (-1+1j)/sqrt(2)    11 -> (-1-1j)/sqrt(2)

  and adjacent amplitudes always differ in exactly one bit.
* The multicarrier transform pair is unitary: synthesis uses
  ``x(n) = (1/sqrt(N)) sum_k X(k) exp(+j 2 pi n k / N)`` and analysis the
  matching forward transform with ``1/sqrt(N)``, so per-block energy is
  conserved.  The transform size equals the subcarrier count (no zero
  padding).
* The cyclic prefix is the last ``cp_len`` time samples of a block,
  prepended to that block.

Symbol grids are complex arrays of shape ``(n_subcarriers, n_symbols)``;
time series are 1-D complex arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_QAM_ORDERS = (4, 16, 64)


@dataclass(frozen=True)
class FrameConfig:
    """Shape of one transmitted sample: subcarriers x OFDM symbols."""

    n_subcarriers: int
    cp_len: int
    n_symbols: int
    qam_order: int = 4

    def __post_init__(self) -> None:
        if self.n_subcarriers <= 0:
            raise ValueError("n_subcarriers must be positive")
        if self.n_symbols <= 0:
            raise ValueError("n_symbols must be positive")
        if not 0 <= self.cp_len < self.n_subcarriers:
            raise ValueError("cp_len must satisfy 0 <= cp_len < n_subcarriers")
        if self.qam_order not in _QAM_ORDERS:
            raise ValueError(f"qam_order must be one of {_QAM_ORDERS}")

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.qam_order))

    @property
    def bits_per_sample(self) -> int:
        return self.n_subcarriers * self.n_symbols * self.bits_per_symbol

    @property
    def block_len(self) -> int:
        """Time samples per OFDM symbol including the cyclic prefix."""
        return self.n_subcarriers + self.cp_len

    @property
    def sample_len(self) -> int:
        """Time samples per transmitted sample, cyclic prefixes included."""
        return self.n_symbols * self.block_len

    @property
    def payload_len(self) -> int:
        """Time samples per transmitted sample after prefix removal."""
        return self.n_symbols * self.n_subcarriers


def _gray_decode(value: int) -> int:
    """Invert the reflected binary (Gray) code."""
    mask = value >> 1
    while mask:
        value ^= mask
        mask >>= 1
    return value


@lru_cache(maxsize=None)
def qam_alphabet(order: int) -> np.ndarray:
    """Unit-average-power constellation, indexed by the MSB-first bit label."""
    if order not in _QAM_ORDERS:
        raise ValueError(f"qam_order must be one of {_QAM_ORDERS}")
    side = int(round(math.sqrt(order)))
    k = int(math.log2(side))
    # Amplitude per axis label; descending so the all-zero label is positive.
    axis = np.array([(side - 1) - 2 * _gray_decode(v) for v in range(side)], dtype=float)
    scale = math.sqrt(2.0 * (order - 1) / 3.0)
    points = np.empty(order, dtype=complex)
    for i_bits in range(side):
        for q_bits in range(side):
            points[(i_bits << k) | q_bits] = (axis[i_bits] + 1j * axis[q_bits]) / scale
    points.setflags(write=False)
    return points


def qam_modulate(bits: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    """Map a bit vector onto the subcarrier grid.

    Bits fill the grid symbol by symbol: the first ``n_subcarriers *
    bits_per_symbol`` bits form OFDM symbol 0, subcarrier 0 first.
    """
    bits = np.asarray(bits)
    if bits.size != cfg.bits_per_sample:
        raise ValueError(
            f"expected {cfg.bits_per_sample} bits, got {bits.size}"
        )
    bps = cfg.bits_per_symbol
    groups = bits.reshape(-1, bps).astype(np.int64)
    weights = 1 << np.arange(bps - 1, -1, -1)
    labels = groups @ weights
    symbols = qam_alphabet(cfg.qam_order)[labels]
    return symbols.reshape(cfg.n_symbols, cfg.n_subcarriers).T


def qam_demodulate(grid: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    """Nearest-neighbour decision back to bits (inverse of qam_modulate)."""
    _check_grid(grid, cfg)
    alphabet = qam_alphabet(cfg.qam_order)
    flat = grid.T.reshape(-1)
    labels = np.argmin(np.abs(flat[:, None] - alphabet[None, :]), axis=1)
    bps = cfg.bits_per_symbol
    shifts = np.arange(bps - 1, -1, -1)
    bits = (labels[:, None] >> shifts) & 1
    return bits.reshape(-1).astype(np.int64)


def _check_grid(grid: np.ndarray, cfg: FrameConfig) -> None:
    expected = (cfg.n_subcarriers, cfg.n_symbols)
    if grid.shape != expected:
        raise ValueError(f"grid shape {grid.shape} does not match {expected}")


def ofdm_modulate(grid: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    """Synthesize the baseband time series, cyclic prefix included."""
    _check_grid(grid, cfg)
    # Unitary synthesis: numpy's inverse transform carries 1/N, scale to 1/sqrt(N).
    blocks = np.fft.ifft(grid.T, axis=1) * math.sqrt(cfg.n_subcarriers)
    if cfg.cp_len:
        blocks = np.concatenate([blocks[:, -cfg.cp_len:], blocks], axis=1)
    return blocks.reshape(-1)


def add_cp(series: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    """Prepend each block's tail; input is the prefix-free series."""
    series = np.asarray(series)
    if series.size % cfg.n_subcarriers != 0:
        raise ValueError("series length is not a multiple of n_subcarriers")
    if cfg.cp_len == 0:
        return series.copy()
    blocks = series.reshape(-1, cfg.n_subcarriers)
    return np.concatenate([blocks[:, -cfg.cp_len:], blocks], axis=1).reshape(-1)


def remove_cp(series: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    """Strip the first cp_len samples of every block."""
    series = np.asarray(series)
    if series.size % cfg.block_len != 0:
        raise ValueError(
            f"series length {series.size} is not a multiple of {cfg.block_len}"
        )
    if cfg.cp_len == 0:
        return series.copy()
    blocks = series.reshape(-1, cfg.block_len)
    return blocks[:, cfg.cp_len:].reshape(-1)


def ofdm_demodulate(series: np.ndarray, h_est: complex, cfg: FrameConfig) -> np.ndarray:
    """Analyse a prefix-free series and equalize by a single complex tap."""
    if h_est == 0:
        raise ValueError("h_est must be nonzero (degenerate equalizer)")
    series = np.asarray(series)
    if series.size % cfg.n_subcarriers != 0:
        raise ValueError("series length is not a multiple of n_subcarriers")
    blocks = series.reshape(-1, cfg.n_subcarriers)
    grid = np.fft.fft(blocks, axis=1) / math.sqrt(cfg.n_subcarriers)
    return (grid / h_est).T


def compute_ber(tx_bits: np.ndarray, rx_bits: np.ndarray) -> float:
    """Bit error rate: Hamming distance over length."""
    tx_bits = np.asarray(tx_bits)
    rx_bits = np.asarray(rx_bits)
    if tx_bits.size != rx_bits.size:
        raise ValueError(
            f"bit sequences differ in length ({tx_bits.size} vs {rx_bits.size})"
        )
    if tx_bits.size == 0:
        raise ValueError("bit sequences are empty")
    return float(np.mean(tx_bits != rx_bits))


def random_bits(count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=count, dtype=np.int64)
