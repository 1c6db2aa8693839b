"""Power allocation between data subchannels and AN streams.

Implements the two-stage split of the total budget P: a fraction alpha goes to
data, the rest to AN. Stage one spreads the AN budget over the useful streams
(water-filling on the squared singular gains when Eve's CSI is known, equal
power otherwise). Stage two fills the data budget either by plain
water-filling on Bob's link or by the closed-form secrecy allocation

    p_i = (sqrt(gamma_i^2 - 4 xi_i (mu + g_i - h_i) / mu) - gamma_i) / (2 xi_i)

active on subchannels where the noise-normalized gain gap h_i - g_i exceeds
the multiplier mu, with mu found by bisection on the total-power constraint.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

BUDGET_REL_TOL = 1e-9
BISECT_MAX_ITER = 200


class AllZeroGainsError(Exception):
    """Positive budget but no channel with positive gain to put it on."""


@dataclass(frozen=True)
class PowerBudget:
    """Total transmit power and its data/AN split."""

    total: float
    data_fraction: float = 0.5

    def __post_init__(self):
        if self.total <= 0:
            raise ValueError("total power must be positive")
        if not 0.0 <= self.data_fraction <= 1.0:
            raise ValueError("data fraction must lie in [0, 1]")

    @property
    def data(self) -> float:
        return self.data_fraction * self.total

    @property
    def an(self) -> float:
        return (1.0 - self.data_fraction) * self.total


@dataclass(frozen=True)
class PowerAllocation:
    """Per-subchannel data powers and per-stream AN powers (SVD ordering)."""

    data_powers: np.ndarray
    an_powers: np.ndarray
    budget: PowerBudget

    def check(self, useful_streams: int | None = None, rel_tol: float = 1e-6) -> None:
        """Assert non-negativity, the total-power constraint, and (optionally)
        that no power sits beyond the useful streams."""
        if np.any(self.data_powers < 0) or np.any(self.an_powers < 0):
            raise ValueError("negative power entry")
        total = float(np.sum(self.data_powers) + np.sum(self.an_powers))
        if abs(total - self.budget.total) > rel_tol * self.budget.total:
            raise ValueError(
                f"allocated {total:.9g} differs from budget {self.budget.total:.9g}"
            )
        if useful_streams is not None and np.any(self.an_powers[useful_streams:] != 0):
            raise ValueError("AN power allocated beyond the useful streams")


def water_fill(gains: np.ndarray, budget: float) -> np.ndarray:
    """Maximize sum log2(1 + g_i p_i) subject to sum p_i = budget, p >= 0.

    Classic water level: p_i = max(0, C - 1/g_i) with C chosen to meet the
    budget; zero-gain channels never receive power. Uses the standard
    active-set iteration (drop channels whose tentative power is negative and
    recompute the level), which reduces to the single-shot formula when every
    channel stays active.
    """
    gains = np.asarray(gains, dtype=float)
    if np.any(gains < 0):
        raise ValueError("gains must be non-negative")
    powers = np.zeros_like(gains)
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if budget == 0:
        return powers
    active = gains > 0
    if not np.any(active):
        raise AllZeroGainsError("positive budget but all gains are zero")
    while True:
        inv = 1.0 / gains[active]
        level = (budget + inv.sum()) / active.sum()
        trial = level - inv
        if np.all(trial >= 0):
            powers[active] = trial
            return powers
        keep = np.zeros_like(active)
        keep[active] = trial > 0
        if not np.any(keep):
            # only possible via pathological rounding; fall back to best channel
            keep[np.argmax(gains)] = True
        active = keep


def an_power_known_csi(singular_values: np.ndarray, an_budget: float) -> np.ndarray:
    """Water-fill the AN budget over the squared singular gains.

    Streams with numerically zero gain (beyond the useful count) get exactly
    zero. Returns the all-zero vector when no stream is useful; the caller is
    expected to hand the stranded budget back to data in that case.
    """
    s = np.asarray(singular_values, dtype=float)
    powers = np.zeros_like(s)
    if an_budget == 0 or s.size == 0:
        return powers
    tol = s[0] * np.finfo(float).eps * max(s.size, 1) * 1e3 if s[0] > 0 else 0.0
    useful = s > tol
    if not np.any(useful):
        return powers
    powers[useful] = water_fill(s[useful] ** 2, an_budget)
    return powers


def an_power_unknown_csi(useful_streams: int, n_cp: int, an_budget: float) -> np.ndarray:
    """Equal AN power on the useful streams, zero elsewhere (SVD ordering)."""
    if not 0 <= useful_streams <= n_cp:
        raise ValueError("useful stream count must lie in [0, n_cp]")
    powers = np.zeros(n_cp)
    if useful_streams > 0 and an_budget > 0:
        powers[:useful_streams] = an_budget / useful_streams
    return powers


def data_power_bob_only(
    bob_gains: np.ndarray, noise_bob: float, data_budget: float
) -> np.ndarray:
    """Water-fill the data budget using only the legitimate link's CSI.

    bob_gains are the squared subchannel magnitudes |H_k|^2; the water level
    acts on |H_k|^2 / noise.
    """
    gains = np.asarray(bob_gains, dtype=float) / noise_bob
    return water_fill(gains, data_budget)


def _secrecy_powers(mu: float, h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Closed-form per-subchannel powers for a given multiplier mu."""
    powers = np.zeros_like(h)
    active = (h - g) > mu
    if not np.any(active):
        return powers
    ha, ga = h[active], g[active]
    gamma = ha + ga
    xi = ha * ga
    disc = gamma**2 - 4.0 * xi * (mu + ga - ha) / mu
    disc = np.where((disc < 0) & (disc > -1e-12), 0.0, disc)  # roundoff clamp
    powers[active] = (np.sqrt(disc) - gamma) / (2.0 * xi)
    return powers


def data_power_secrecy(
    bob_gains: np.ndarray, eve_eff_gains: np.ndarray, data_budget: float
) -> np.ndarray:
    """Closed-form secrecy-driven data allocation with multiplier bisection.

    Both gain vectors must already be noise-normalized by the caller:
    bob_gains = |H_i|^2 / noise_bob and eve_eff_gains = |G_i|^2 divided by
    Eve's noise-plus-AN power on subchannel i. A subchannel receives power
    only while its gain gap exceeds the multiplier; the multiplier is driven
    by bisection until the powers sum to the budget (relative 1e-9).

    When no subchannel has a positive gap the allocation is empty: returns
    the all-zero vector so the caller can fall back to a Bob-only fill.
    """
    h = np.asarray(bob_gains, dtype=float)
    g = np.asarray(eve_eff_gains, dtype=float)
    if h.shape != g.shape:
        raise ValueError("gain vectors must have equal length")
    if data_budget <= 0:
        return np.zeros_like(h)
    gaps = h - g
    if np.all(gaps <= 0):
        log.debug("secrecy allocation infeasible: no subchannel with positive gap")
        return np.zeros_like(h)

    lo = 1e-12
    hi = float(gaps.max())
    # sum(p) at mu = max gap is zero (no active subchannel), so hi brackets;
    # still grow it defensively in case of rounding at the boundary.
    guard = 0
    while _secrecy_powers(hi, h, g).sum() > data_budget:
        hi *= 10.0
        guard += 1
        if guard > 60:
            raise RuntimeError("failed to bracket the secrecy multiplier")
    if _secrecy_powers(lo, h, g).sum() < data_budget:
        # budget so large even a vanishing multiplier cannot absorb it;
        # practically unreachable in double precision
        lo = 1e-300

    powers = np.zeros_like(h)
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        powers = _secrecy_powers(mid, h, g)
        total = powers.sum()
        if abs(total - data_budget) <= BUDGET_REL_TOL * data_budget:
            break
        if total > data_budget:
            lo = mid
        else:
            hi = mid
    # exact budget match: rescale the active set's residual onto the powers
    total = powers.sum()
    if total > 0:
        powers *= data_budget / total
    return powers
