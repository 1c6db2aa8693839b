"""Rate expressions for the legitimate link and the eavesdropper.

Bob's channel stays diagonal after CP removal, so his rate is a per-subchannel
sum. The temporal AN couples Eve's subchannels: her best-case (joint decoding)
rate is a log-determinant against the AN-plus-noise covariance, her restricted
per-subchannel rate treats the AN power on each subchannel as extra noise, and
a diagonal approximation replaces the left singular basis of the AN channel by
the identity. Secrecy rates clamp the difference at zero. All rates are in
bits per OFDM block; to_bits_per_sec applies the bandwidth/(N+n_cp) pre-log.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import nan

import numpy as np

from .ofdm import OfdmConfig


class NumericalFailureError(Exception):
    """Hermitian factorization failed; the interference-plus-noise matrix was
    not positive definite (impossible for positive receiver noise)."""


@dataclass(frozen=True)
class RateBreakdown:
    """All per-trial rates, in bits/OFDM-block, plus the bits/sec multiplier.

    r_eve_approx (and its secrecy counterpart) is NaN when the trial's data
    allocation is not the equal-power regime the approximation is defined for.
    """

    r_bob: float
    r_eve_joint: float
    r_eve_persub: float
    r_eve_approx: float
    r_sec_joint: float
    r_sec_persub: float
    r_sec_approx: float
    scale_bits_per_sec: float

    @classmethod
    def from_rates(
        cls,
        r_bob: float,
        r_eve_joint: float,
        r_eve_persub: float,
        scale: float,
        r_eve_approx: float = nan,
    ) -> "RateBreakdown":
        return cls(
            r_bob=r_bob,
            r_eve_joint=r_eve_joint,
            r_eve_persub=r_eve_persub,
            r_eve_approx=r_eve_approx,
            r_sec_joint=secrecy(r_bob, r_eve_joint),
            r_sec_persub=secrecy(r_bob, r_eve_persub),
            r_sec_approx=secrecy(r_bob, r_eve_approx) if np.isfinite(r_eve_approx) else nan,
            scale_bits_per_sec=scale,
        )


def rate_bob(bob_freq_gains: np.ndarray, data_powers: np.ndarray, noise_bob: float) -> float:
    """Legitimate rate: sum_k log2(1 + |H_k|^2 p_k / noise)."""
    h2 = np.abs(bob_freq_gains) ** 2
    return float(np.sum(np.log2(1.0 + h2 * data_powers / noise_bob)))


def interference_cov(
    an_channel: np.ndarray, align: np.ndarray | None, an_powers: np.ndarray
) -> np.ndarray:
    """AN covariance across Eve's data subchannels.

    With the second precoder, stream powers address the SVD directions of the
    effective AN channel (an_powers in descending-gain order). Without it the
    streams ride the raw precoder columns, so an_powers is interpreted in the
    structured column ordering (useless streams first).
    """
    powers = np.asarray(an_powers, dtype=float)
    if np.any(powers < 0):
        raise ValueError("AN powers must be non-negative")
    basis = an_channel @ align if align is not None else an_channel
    cov = (basis * powers) @ basis.conj().T
    return 0.5 * (cov + cov.conj().T)


def _logdet_pd(mat: np.ndarray) -> float:
    """log2 det of a Hermitian positive-definite matrix via Cholesky."""
    try:
        chol = np.linalg.cholesky(mat)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError("interference-plus-noise matrix not PD") from exc
    return float(2.0 * np.sum(np.log2(np.abs(np.diag(chol)))))


def rate_eve_joint(
    eve_freq_gains: np.ndarray,
    data_powers: np.ndarray,
    cov: np.ndarray,
    noise_eve: float,
) -> float:
    """Best-case eavesdropper rate with joint processing of all subchannels.

    log2 det(I + G P G* (K + noise I)^-1), evaluated as
    logdet(K + noise I + G P G*) - logdet(K + noise I) through Cholesky
    factorizations; no matrix is explicitly inverted.
    """
    n = len(eve_freq_gains)
    signal = np.abs(eve_freq_gains) ** 2 * data_powers
    base = cov + noise_eve * np.eye(n)
    return max(0.0, _logdet_pd(base + np.diag(signal)) - _logdet_pd(base))


def rate_eve_persub(
    eve_freq_gains: np.ndarray,
    data_powers: np.ndarray,
    cov: np.ndarray,
    noise_eve: float,
) -> float:
    """Restricted eavesdropper rate: each subchannel decoded on its own.

    The AN contributes its per-subchannel power (the covariance diagonal) as
    additional noise. Coincides with the joint rate when the covariance is
    diagonal, and never exceeds it.
    """
    eta = np.clip(np.real(np.diag(cov)), 0.0, None)
    g2 = np.abs(eve_freq_gains) ** 2
    return float(np.sum(np.log2(1.0 + g2 * data_powers / (eta + noise_eve))))


def rate_eve_approx(
    eve_freq_gains: np.ndarray,
    data_power: float,
    singular_values: np.ndarray,
    an_powers: np.ndarray,
    noise_eve: float,
    useful_streams: int,
) -> float:
    """Diagonal approximation of the joint rate for equal-power transmission.

    Replaces the left singular basis of the AN channel by the identity, which
    pins stream i's interference onto subchannel i: the first useful_streams
    subchannels see noise + gain^2 * power, the rest see noise only. Only
    meaningful for a scalar data power and equal AN power on the useful
    streams (an_powers in SVD ordering).
    """
    g2 = np.abs(eve_freq_gains) ** 2
    lu = useful_streams
    sigma2 = noise_eve + (np.asarray(singular_values[:lu]) ** 2) * np.asarray(an_powers[:lu])
    jammed = np.sum(np.log2(1.0 + g2[:lu] * data_power / sigma2))
    clear = np.sum(np.log2(1.0 + g2[lu:] * data_power / noise_eve))
    return float(jammed + clear)


def secrecy(r_bob: float, r_eve: float) -> float:
    """Secrecy rate: the positive part of the rate advantage."""
    return max(0.0, r_bob - r_eve)


def to_bits_per_sec(rate_block: float, cfg: OfdmConfig) -> float:
    """Convert bits/OFDM-block to bits/sec: multiply by bandwidth/(N + n_cp)."""
    return rate_block * cfg.bandwidth / cfg.block_len


def eve_whitened_gains(
    eve_freq_gains: np.ndarray, cov: np.ndarray, noise_eve: float
) -> np.ndarray:
    """Eve's squared gains normalized by her per-subchannel AN-plus-noise power.

    The quantity the secrecy data allocation compares against Bob's
    noise-normalized gains.
    """
    eta = np.clip(np.real(np.diag(cov)), 0.0, None)
    return np.abs(eve_freq_gains) ** 2 / (eta + noise_eve)
