"""Null-space precoding of the temporal artificial noise.

The AN precoder maps n_cp noise streams onto the kernel of Bob's post-CP
channel, so Bob never sees them. At Eve the noise arrives through the
effective channel an_channel = F R_cp G_time Q, whose rank equals
max(L_bob, L_eve): only that many streams can hurt her, the rest land on her
discarded cyclic prefix.

Two constructions of the null basis are provided. The structured one follows
the banded Toeplitz structure of the CP-removed channel and orders its columns
usefulness-last: the leading n_cp - L_bob columns are canonical basis vectors
(AN that dies in Bob's CP window), the trailing L_bob columns span the kernel
of the dense Toeplitz block. The generic one thresholds an SVD. Both span the
same subspace; the structured ordering is the library contract that makes
"power on the trailing streams" meaningful without a second precoder.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ofdm import ChannelPair, ChannelTaps, OfdmConfig, time_domain_matrix


class DegenerateChannelError(Exception):
    """Channel taps are numerically all zero; the null space loses meaning."""


class RankDeficientError(Exception):
    """Null-space dimension after thresholding differs from the expected n_cp."""


def useful_stream_count(l_bob: int, l_eve: int) -> int:
    """Number of AN streams that can reach Eve's data subchannels."""
    if l_bob < 0 or l_eve < 0:
        raise ValueError("channel memories must be >= 0")
    return max(l_bob, l_eve)


def singular_value_tolerance(singvals: np.ndarray, shape: tuple[int, int]) -> float:
    """Threshold below which a singular value counts as numerically zero.

    Generic channel realizations show a >= 1e6 gap between the smallest true
    singular value and the numerical-zero cluster, so the exact constant is
    uncritical.
    """
    if len(singvals) == 0:
        return 0.0
    return max(shape) * np.finfo(float).eps * float(singvals[0]) * 1e3


def cp_removed_channel(taps: ChannelTaps, cfg: OfdmConfig) -> np.ndarray:
    """Time-domain channel after CP removal: R_cp @ H_time, shape N x (N+n_cp)."""
    return time_domain_matrix(taps, cfg)[cfg.n_cp :, :]


def null_precoder_structured(bob_taps: ChannelTaps, cfg: OfdmConfig) -> np.ndarray:
    """Orthonormal basis of Bob's post-CP null space, usefulness-last ordering.

    Exploits that R_cp @ H_time = [0_{N x (n_cp-L)} | H'] with H' an
    upper-triangular Toeplitz block of shape N x (N+L): the zero columns
    contribute canonical basis vectors, and the kernel of H' (dimension L,
    found by SVD of the small block) is embedded in the trailing N+L
    coordinates.
    """
    n, ncp = cfg.n_sub, cfg.n_cp
    l_bob = bob_taps.memory
    if l_bob > ncp:
        raise ValueError(f"channel memory {l_bob} exceeds CP length {ncp}")
    if not np.any(np.abs(bob_taps.taps) > 1e-300):
        raise DegenerateChannelError("all-zero taps: null space is the whole domain")

    q = np.zeros((n + ncp, ncp), dtype=complex)
    q[: ncp - l_bob, : ncp - l_bob] = np.eye(ncp - l_bob)
    if l_bob > 0:
        h_prime = cp_removed_channel(bob_taps, cfg)[:, ncp - l_bob :]
        _, _, vh = np.linalg.svd(h_prime)
        # H' is N x (N+L) so its kernel has dimension >= L; the last L right
        # singular vectors always lie in it.
        q[ncp - l_bob :, ncp - l_bob :] = vh[n:, :].conj().T
    return q


def null_precoder_svd(h_eff: np.ndarray) -> np.ndarray:
    """Generic null basis of the CP-removed channel via SVD thresholding.

    h_eff is the N x (N+n_cp) matrix R_cp @ H_time; for full-row-rank
    channels the kernel has dimension exactly n_cp.
    """
    rows, cols = h_eff.shape
    expected = cols - rows
    _, s, vh = np.linalg.svd(h_eff)
    tol = singular_value_tolerance(s, h_eff.shape)
    rank = int(np.sum(s > tol))
    if cols - rank != expected:
        raise RankDeficientError(
            f"null space has dimension {cols - rank}, expected {expected}"
        )
    return vh[rank:, :].conj().T


def effective_an_channel(
    eve_taps: ChannelTaps, precoder: np.ndarray, cfg: OfdmConfig
) -> np.ndarray:
    """Channel the AN streams see on Eve's data subchannels: F R_cp G_time Q."""
    filtered = cp_removed_channel(eve_taps, cfg) @ precoder
    return np.fft.fft(filtered, axis=0) / np.sqrt(cfg.n_sub)


def an_channel_svd(
    an_channel: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD of the effective AN channel, singular values descending.

    Returns (left, singvals, right) with an_channel = left @ diag @ right*;
    left is N x N unitary, singvals has n_cp entries, right is n_cp x n_cp
    unitary.
    """
    left, s, vh = np.linalg.svd(an_channel, full_matrices=True)
    return left, s, vh.conj().T


def second_precoder(svd_right: np.ndarray) -> np.ndarray:
    """Known-CSI stream alignment U with U* V = I: simply the right factor.

    Sending stream i through U lands it on the i-th right singular vector of
    the effective AN channel, so per-stream powers address the SVD gains
    directly.
    """
    return svd_right.copy()


def an_rank(singvals: np.ndarray, shape: tuple[int, int]) -> int:
    """Numerical rank of the effective AN channel from its singular values."""
    tol = singular_value_tolerance(singvals, shape)
    return int(np.sum(singvals > tol))


def structured_stream_powers(powers_svd_order: np.ndarray) -> np.ndarray:
    """Map SVD-ordered stream powers onto the structured precoder's columns.

    SVD ordering puts the useful streams first (descending gains); the
    structured precoder puts them last. For the equal-power allocations used
    without a second precoder the two views give the identical interference
    covariance at Eve.
    """
    return np.asarray(powers_svd_order)[::-1].copy()


@dataclass(frozen=True)
class PrecoderSet:
    """Everything derived from one channel pair's AN geometry.

    null_precoder maps streams into Bob's kernel; an_channel is what Eve sees;
    (svd_left, singular_values, svd_right) factor it; align is the known-CSI
    second precoder (None when Eve's instantaneous CSI is unavailable);
    useful_streams = max(L_bob, L_eve).
    """

    null_precoder: np.ndarray
    an_channel: np.ndarray
    svd_left: np.ndarray
    singular_values: np.ndarray
    svd_right: np.ndarray
    align: np.ndarray | None
    useful_streams: int

    @property
    def singular_matrix(self) -> np.ndarray:
        """Rectangular N x n_cp diagonal matrix of the singular values."""
        n, ncp = self.an_channel.shape
        lam = np.zeros((n, ncp))
        np.fill_diagonal(lam, self.singular_values)
        return lam


def build_precoder_set(
    pair: ChannelPair, cfg: OfdmConfig, with_align: bool
) -> PrecoderSet:
    """Construct the structured null precoder and Eve-side SVD for one trial."""
    pair.check_cp(cfg)
    q = null_precoder_structured(pair.bob, cfg)
    an_ch = effective_an_channel(pair.eve, q, cfg)
    left, s, right = an_channel_svd(an_ch)
    return PrecoderSet(
        null_precoder=q,
        an_channel=an_ch,
        svd_left=left,
        singular_values=s,
        svd_right=right,
        align=second_precoder(right) if with_align else None,
        useful_streams=useful_stream_count(pair.bob.memory, pair.eve.memory),
    )
