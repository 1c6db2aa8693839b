"""OFDM matrix machinery and frequency-selective channel sampling.

Deterministic scaffolding for a cyclic-prefix OFDM link: CP insertion/removal
matrices, the unitary DFT matrix, lower-triangular Toeplitz time-domain channel
matrices, and their frequency-domain diagonalization. The DFT uses the unitary
1/sqrt(N) convention so that F* is both the inverse and the adjoint; the
diagonal of F R_cp H_time T_cp F* then equals the plain (unnormalized) N-point
DFT of the zero-padded channel taps.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import toeplitz

# Tap distribution families. The default draws i.i.d. circularly-symmetric
# complex Gaussian taps with a uniform power-delay profile (variance 1/(L+1)
# each, expected total power 1). The alternate draws i.i.d. uniform magnitudes
# rescaled so every realization has exactly unit total power, with uniform
# phases; it exists for sensitivity checks on the tap-statistics assumption.
PROFILE_UNIFORM_PDP_GAUSSIAN = "uniform-pdp-gaussian"
PROFILE_UNIFORM_MAGNITUDE = "uniform-magnitude"
PROFILES = (PROFILE_UNIFORM_PDP_GAUSSIAN, PROFILE_UNIFORM_MAGNITUDE)

# Relative tolerance for declaring the post-CP frequency-domain channel
# diagonal. Double-precision FFT/Toeplitz products for N <= 1024 stay orders
# of magnitude below this.
DIAG_REL_TOL = 1e-10


class NotDiagonalError(Exception):
    """Post-CP frequency-domain channel has significant off-diagonal energy.

    Signals taps longer than the cyclic prefix or a construction bug.
    """


@dataclass(frozen=True)
class OfdmConfig:
    """OFDM dimensioning: subchannel count, CP length, bandwidth."""

    n_sub: int
    n_cp: int
    bandwidth: float = 1e6

    def __post_init__(self):
        if self.n_sub < 2:
            raise ValueError(f"need at least 2 subchannels, got {self.n_sub}")
        if not 1 <= self.n_cp < self.n_sub:
            raise ValueError(
                f"CP length must satisfy 1 <= n_cp < n_sub, got n_cp={self.n_cp}, n_sub={self.n_sub}"
            )
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")

    @property
    def delta_f(self) -> float:
        """Per-subchannel bandwidth in Hz (always bandwidth/n_sub)."""
        return self.bandwidth / self.n_sub

    @property
    def block_len(self) -> int:
        """Time-domain samples per OFDM block including the CP."""
        return self.n_sub + self.n_cp


@dataclass(frozen=True)
class NoiseModel:
    """Noise power spectral densities at the two receivers.

    Per-subchannel noise powers are delta_f * kappa; rate computations take
    those per-subchannel values.
    """

    kappa_bob: float
    kappa_eve: float

    def __post_init__(self):
        if self.kappa_bob <= 0 or self.kappa_eve <= 0:
            raise ValueError("noise PSDs must be positive")

    def per_subchannel(self, cfg: OfdmConfig) -> tuple[float, float]:
        return cfg.delta_f * self.kappa_bob, cfg.delta_f * self.kappa_eve

    @classmethod
    def unit_per_subchannel(cls, cfg: OfdmConfig) -> "NoiseModel":
        """PSDs chosen so each subchannel sees unit noise power (linear)."""
        return cls(kappa_bob=1.0 / cfg.delta_f, kappa_eve=1.0 / cfg.delta_f)


@dataclass(frozen=True)
class ChannelTaps:
    """Time-domain impulse response of one link.

    ``memory`` is the index of the last tap (delay spread in samples), so
    ``taps`` has memory+1 entries. ``avg_tap_gain`` records the per-tap
    average power the sampler targeted.
    """

    taps: np.ndarray
    memory: int
    profile: str = PROFILE_UNIFORM_PDP_GAUSSIAN
    avg_tap_gain: float = field(default=0.0)

    def __post_init__(self):
        if self.memory < 0:
            raise ValueError("channel memory must be >= 0")
        if len(self.taps) != self.memory + 1:
            raise ValueError(
                f"expected {self.memory + 1} taps, got {len(self.taps)}"
            )
        if self.profile not in PROFILES:
            raise ValueError(f"unknown tap profile {self.profile!r}")
        if self.avg_tap_gain == 0.0:
            object.__setattr__(self, "avg_tap_gain", 1.0 / (self.memory + 1))

    def fits_cp(self, cfg: OfdmConfig) -> bool:
        """True when the CP covers this channel's delay spread."""
        return self.memory <= cfg.n_cp


@dataclass(frozen=True)
class ChannelPair:
    """One realization of the legitimate and eavesdropper links."""

    bob: ChannelTaps
    eve: ChannelTaps

    def check_cp(self, cfg: OfdmConfig) -> None:
        for name, ch in (("bob", self.bob), ("eve", self.eve)):
            if not ch.fits_cp(cfg):
                raise ValueError(
                    f"{name} channel memory {ch.memory} exceeds CP length {cfg.n_cp}"
                )


def cp_matrices(cfg: OfdmConfig) -> tuple[np.ndarray, np.ndarray]:
    """CP insertion and removal matrices (T_cp, R_cp).

    T_cp stacks E = [0 I_ncp] (the last-n_cp-sample copy) on top of I_n, so it
    prepends the cyclic prefix; R_cp = [0 I_n] drops it again. R_cp @ T_cp is
    exactly the identity.
    """
    n, ncp = cfg.n_sub, cfg.n_cp
    top = np.hstack([np.zeros((ncp, n - ncp)), np.eye(ncp)])
    t_cp = np.vstack([top, np.eye(n)])
    r_cp = np.hstack([np.zeros((n, ncp)), np.eye(n)])
    return t_cp, r_cp


def dft_matrix(n: int) -> np.ndarray:
    """Unitary DFT matrix, entry (k, m) = exp(-2j pi k m / n) / sqrt(n)."""
    if n < 1:
        raise ValueError("DFT size must be >= 1")
    idx = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)


def sample_channel(
    memory: int,
    rng: np.random.Generator,
    profile: str = PROFILE_UNIFORM_PDP_GAUSSIAN,
) -> ChannelTaps:
    """Draw one channel realization with expected total power 1.

    Deterministic given (memory, profile, rng state): the same seeded
    generator always yields bit-identical taps.
    """
    n_taps = memory + 1
    if profile == PROFILE_UNIFORM_PDP_GAUSSIAN:
        scale = np.sqrt(1.0 / (2 * n_taps))
        taps = scale * (rng.standard_normal(n_taps) + 1j * rng.standard_normal(n_taps))
    elif profile == PROFILE_UNIFORM_MAGNITUDE:
        mags = rng.uniform(0.0, 1.0, n_taps)
        norm = np.sqrt(np.sum(mags**2))
        if norm < 1e-300:  # measure-zero draw; fall back to flat magnitudes
            mags = np.ones(n_taps)
            norm = np.sqrt(float(n_taps))
        phases = rng.uniform(0.0, 2 * np.pi, n_taps)
        taps = (mags / norm) * np.exp(1j * phases)
    else:
        raise ValueError(f"unknown tap profile {profile!r}")
    return ChannelTaps(taps=taps, memory=memory, profile=profile)


def time_domain_matrix(taps: ChannelTaps, cfg: OfdmConfig) -> np.ndarray:
    """Lower-triangular Toeplitz channel matrix over one CP-extended block.

    First column is [h(0), ..., h(L), 0, ..., 0]; entry (i, j) is taps[i-j]
    when 0 <= i-j <= L and zero otherwise.
    """
    m = cfg.block_len
    col = np.zeros(m, dtype=complex)
    col[: taps.memory + 1] = taps.taps
    return toeplitz(col, np.zeros(m, dtype=complex))


def channel_frequency_response(taps: ChannelTaps, n_sub: int) -> np.ndarray:
    """N-point DFT of the zero-padded taps: the per-subchannel gains.

    Equal (to numerical precision) to the diagonal returned by
    freq_diag_channel whenever the CP covers the delay spread; this is the
    cheap path for tight simulation loops.
    """
    return np.fft.fft(taps.taps, n_sub)


def freq_diag_channel(taps: ChannelTaps, cfg: OfdmConfig) -> np.ndarray:
    """Diagonal of F R_cp H_time T_cp F*, verifying it is actually diagonal.

    Raises NotDiagonalError when off-diagonal magnitude exceeds DIAG_REL_TOL
    relative to the largest diagonal entry (taps longer than the CP, or a
    construction bug).
    """
    t_cp, r_cp = cp_matrices(cfg)
    h_time = time_domain_matrix(taps, cfg)
    f = dft_matrix(cfg.n_sub)
    full = f @ (r_cp @ h_time @ t_cp) @ f.conj().T
    diag = np.diag(full).copy()
    off = full - np.diag(diag)
    ref = max(np.abs(diag).max(), 1e-300)
    worst = np.abs(off).max()
    if worst > DIAG_REL_TOL * ref:
        raise NotDiagonalError(
            f"off-diagonal magnitude {worst:.3e} exceeds {DIAG_REL_TOL:.0e} x {ref:.3e}"
            f" (channel memory {taps.memory} vs CP {cfg.n_cp}?)"
        )
    return diag
