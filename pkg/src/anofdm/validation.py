"""Runtime invariant suite behind the `validate` subcommand.

Each check exercises one library contract on freshly sampled inputs and
returns pass/fail with a short measurement. The quick mode trims realization
counts for smoke testing; the full mode is the reference run.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import allocation, precoding, rates
from .ofdm import (
    ChannelPair,
    OfdmConfig,
    channel_frequency_response,
    cp_matrices,
    dft_matrix,
    freq_diag_channel,
    sample_channel,
    time_domain_matrix,
)
from .simulate import (
    ExperimentSpec,
    Scheme,
    figure_preset,
    resolve_point,
    run_trial,
    trial_rng,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _rng(tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((0xA50FD, tag)))


def check_cp_identity(quick: bool) -> tuple[bool, str]:
    worst = 0.0
    for n, ncp in [(4, 2), (8, 1), (64, 16), (256, 64), (17, 5)]:
        t_cp, r_cp = cp_matrices(OfdmConfig(n, ncp))
        worst = max(worst, float(np.abs(r_cp @ t_cp - np.eye(n)).max()))
    return worst == 0.0, f"max |R_cp T_cp - I| = {worst:.1e}"


def check_dft_unitary(quick: bool) -> tuple[bool, str]:
    sizes = [1, 2, 8, 64, 256] if quick else [1, 2, 8, 64, 256, 1024]
    worst = 0.0
    for n in sizes:
        f = dft_matrix(n)
        worst = max(worst, float(np.abs(f @ f.conj().T - np.eye(n)).max()))
    return worst < 1e-12, f"max |F F* - I| = {worst:.1e} over N up to {sizes[-1]}"


def check_diagonalization(quick: bool) -> tuple[bool, str]:
    cfg = OfdmConfig(64, 16)
    rng = _rng(1)
    reps = 5 if quick else 25
    worst = 0.0
    for _ in range(reps):
        memory = int(rng.integers(0, cfg.n_cp + 1))
        taps = sample_channel(memory, rng)
        diag = freq_diag_channel(taps, cfg)  # raises if off-diagonal
        ref = channel_frequency_response(taps, cfg.n_sub)
        worst = max(worst, float(np.abs(diag - ref).max()))
    return worst < 1e-10, f"max |diag - DFT(taps)| = {worst:.1e} over {reps} draws"


def check_cp_removal_zero_columns(quick: bool) -> tuple[bool, str]:
    cfg = OfdmConfig(32, 8)
    rng = _rng(2)
    for memory in range(0, cfg.n_cp + 1):
        taps = sample_channel(memory, rng)
        eff = time_domain_matrix(taps, cfg)[cfg.n_cp :, :]
        lead = 0
        for j in range(eff.shape[1]):
            if np.abs(eff[:, j]).max() > 1e-14:
                break
            lead += 1
        if lead != cfg.n_cp - memory:
            return False, f"L={memory}: {lead} leading zero cols, expected {cfg.n_cp - memory}"
    return True, "leading zero columns = n_cp - L for every memory"


def check_sampler(quick: bool) -> tuple[bool, str]:
    draws = 20_000 if quick else 100_000
    rng = _rng(3)
    power = np.zeros(draws)
    for i in range(draws):
        power[i] = float(np.sum(np.abs(sample_channel(7, rng).taps) ** 2))
    mean = power.mean()
    a = sample_channel(5, _rng(4)).taps
    b = sample_channel(5, _rng(4)).taps
    deterministic = np.array_equal(a, b)
    ok = abs(mean - 1.0) < 0.01 and deterministic
    return ok, f"mean total power {mean:.4f} over {draws} draws; deterministic={deterministic}"


def check_an_nulling(quick: bool) -> tuple[bool, str]:
    cfg = OfdmConfig(64, 16)
    rng = _rng(5)
    reps = 30 if quick else 200
    worst = 0.0
    f = dft_matrix(cfg.n_sub)
    for _ in range(reps):
        l_bob = int(rng.integers(0, cfg.n_cp + 1))
        taps = sample_channel(l_bob, rng)
        eff = time_domain_matrix(taps, cfg)[cfg.n_cp :, :]
        for q in (
            precoding.null_precoder_structured(taps, cfg),
            precoding.null_precoder_svd(eff),
        ):
            z = rng.standard_normal(cfg.n_cp) + 1j * rng.standard_normal(cfg.n_cp)
            leak = np.linalg.norm(f @ (eff @ (q @ z))) / np.linalg.norm(z)
            worst = max(worst, float(leak))
    return worst < 1e-9, f"max leak at Bob {worst:.2e} over {reps} draws x 2 constructions"


def check_useful_streams(quick: bool) -> tuple[bool, str]:
    cfg = OfdmConfig(64, 16)
    rng = _rng(6)
    grid = [(0, 0), (0, 8), (4, 8), (8, 3), (16, 16), (5, 5)]
    reps = 3 if quick else 10
    for l_bob, l_eve in grid:
        for _ in range(reps):
            pair = ChannelPair(
                sample_channel(l_bob, rng), sample_channel(l_eve, rng)
            )
            pre = precoding.build_precoder_set(pair, cfg, with_align=False)
            lu = precoding.useful_stream_count(l_bob, l_eve)
            rank = precoding.an_rank(pre.singular_values, pre.an_channel.shape)
            if rank != lu:
                return False, f"(L_B={l_bob}, L_E={l_eve}): rank {rank} != {lu}"
            col_norms = np.linalg.norm(pre.an_channel, axis=0)
            zero_cols = int(np.sum(col_norms < 1e-10))
            if zero_cols != cfg.n_cp - lu:
                return False, (
                    f"(L_B={l_bob}, L_E={l_eve}): {zero_cols} zero cols,"
                    f" expected {cfg.n_cp - lu}"
                )
    return True, "rank and zero-column counts match max(L_B, L_E) on the grid"


def check_subspace_equivalence(quick: bool) -> tuple[bool, str]:
    cfg = OfdmConfig(64, 16)
    rng = _rng(7)
    reps = 5 if quick else 25
    worst = 0.0
    for _ in range(reps):
        taps = sample_channel(int(rng.integers(0, cfg.n_cp + 1)), rng)
        eff = time_domain_matrix(taps, cfg)[cfg.n_cp :, :]
        q1 = precoding.null_precoder_structured(taps, cfg)
        q2 = precoding.null_precoder_svd(eff)
        gap = np.abs(q1 @ q1.conj().T - q2 @ q2.conj().T).max()
        worst = max(worst, float(gap))
    return worst < 1e-8, f"max projector gap {worst:.2e} over {reps} draws"


def check_second_precoder(quick: bool) -> tuple[bool, str]:
    cfg = OfdmConfig(64, 16)
    rng = _rng(8)
    pair = ChannelPair(sample_channel(4, rng), sample_channel(8, rng))
    pre = precoding.build_precoder_set(pair, cfg, with_align=True)
    align_err = np.abs(
        pre.align.conj().T @ pre.svd_right - np.eye(cfg.n_cp)
    ).max()
    p_z = allocation.an_power_known_csi(pre.singular_values, 10.0)
    cov = rates.interference_cov(pre.an_channel, pre.align, p_z)
    lam = pre.singular_matrix
    direct = pre.svd_left @ (lam * p_z) @ lam.T @ pre.svd_left.conj().T
    cov_err = np.abs(cov - direct).max()
    # equal power on useful streams: second precoder and structured columns agree
    lu = pre.useful_streams
    p_eq = allocation.an_power_unknown_csi(lu, cfg.n_cp, 7.0)
    k_svd = pre.svd_left @ (lam * p_eq) @ lam.T @ pre.svd_left.conj().T
    k_struct = rates.interference_cov(
        pre.an_channel, None, precoding.structured_stream_powers(p_eq)
    )
    view_err = np.abs(k_svd - k_struct).max()
    ok = align_err < 1e-12 and cov_err < 1e-10 and view_err < 1e-9
    return ok, (
        f"|U*V - I| = {align_err:.1e}, covariance path gap {cov_err:.1e},"
        f" svd/structured view gap {view_err:.1e}"
    )


def check_water_fill(quick: bool) -> tuple[bool, str]:
    rng = _rng(9)
    reps = 50 if quick else 300
    worst_kkt = 0.0
    for _ in range(reps):
        n = int(rng.integers(2, 9))
        gains = rng.uniform(0.05, 10.0, n)
        budget = float(rng.uniform(0.1, 50.0))
        p = allocation.water_fill(gains, budget)
        if abs(p.sum() - budget) > 1e-9 * budget or np.any(p < 0):
            return False, "budget or positivity violated"
        active = p > 0
        levels = 1.0 / gains[active] + p[active]
        level = levels.mean()
        worst_kkt = max(worst_kkt, float(np.abs(levels - level).max()))
        if np.any(1.0 / gains[~active] < level - 1e-9):
            return False, "inactive channel beats the water level"
        perm = rng.permutation(n)
        if not np.allclose(allocation.water_fill(gains[perm], budget), p[perm]):
            return False, "not permutation-equivariant"
    return worst_kkt < 1e-9, f"max KKT level spread {worst_kkt:.1e} over {reps} instances"


def check_allocation_budget(quick: bool) -> tuple[bool, str]:
    cfg = OfdmConfig(64, 16)
    rng = _rng(10)
    reps = 10 if quick else 50
    for _ in range(reps):
        pair = ChannelPair(sample_channel(4, rng), sample_channel(8, rng))
        pre = precoding.build_precoder_set(pair, cfg, with_align=True)
        budget = allocation.PowerBudget(float(rng.uniform(1.0, 1e4)), 0.5)
        h2 = np.abs(channel_frequency_response(pair.bob, cfg.n_sub)) ** 2
        g = channel_frequency_response(pair.eve, cfg.n_sub)
        p_z = allocation.an_power_known_csi(pre.singular_values, budget.an)
        cov = rates.interference_cov(pre.an_channel, pre.align, p_z)
        p_x = allocation.data_power_secrecy(
            h2, rates.eve_whitened_gains(g, cov, 1.0), budget.data
        )
        if p_x.sum() == 0:
            p_x = allocation.data_power_bob_only(h2, 1.0, budget.data)
        alloc = allocation.PowerAllocation(p_x, p_z, budget)
        try:
            alloc.check(useful_streams=pre.useful_streams)
        except ValueError as exc:
            return False, str(exc)
    return True, f"total-power constraint met on {reps} known-CSI allocations"


def check_secrecy_allocation(quick: bool) -> tuple[bool, str]:
    rng = _rng(11)
    h = rng.uniform(1.0, 10.0, 8)
    g = rng.uniform(0.05, 0.9, 8)
    budget = 20.0
    sums = []
    for mu in np.geomspace(1e-6, 5.0, 40):
        sums.append(allocation._secrecy_powers(mu, h, g).sum())
    decreasing = all(a >= b - 1e-12 for a, b in zip(sums, sums[1:]))
    p = allocation.data_power_secrecy(h, g, budget)
    met = abs(p.sum() - budget) <= 1e-9 * budget
    zero = allocation.data_power_secrecy(np.array([1.0, 2.0]), np.array([2.0, 3.0]), 5.0)
    return (
        decreasing and met and not zero.any(),
        f"power sum decreasing in mu: {decreasing}; budget met: {met}",
    )


def check_rate_identities(quick: bool) -> tuple[bool, str]:
    cfg = OfdmConfig(64, 16)
    rng = _rng(12)
    reps = 10 if quick else 50
    worst_sylv = 0.0
    worst_collapse = 0.0
    for _ in range(reps):
        pair = ChannelPair(sample_channel(4, rng), sample_channel(8, rng))
        pre = precoding.build_precoder_set(pair, cfg, with_align=True)
        g = channel_frequency_response(pair.eve, cfg.n_sub)
        p_x = rng.uniform(0.0, 20.0, cfg.n_sub)
        p_z = allocation.an_power_known_csi(pre.singular_values, 50.0)
        cov = rates.interference_cov(pre.an_channel, pre.align, p_z)
        # restricted receiver never beats joint decoding
        r_joint = rates.rate_eve_joint(g, p_x, cov, 1.0)
        r_persub = rates.rate_eve_persub(g, p_x, cov, 1.0)
        if r_persub > r_joint + 1e-9:
            return False, f"per-subchannel rate {r_persub} exceeds joint {r_joint}"
        # no-AN collapse
        zero = np.zeros((cfg.n_sub, cfg.n_sub))
        rj = rates.rate_eve_joint(g, p_x, zero, 1.0)
        rp = rates.rate_eve_persub(g, p_x, zero, 1.0)
        worst_collapse = max(worst_collapse, abs(rj - rp))
        # determinant identity for the AN-as-data rate
        lam = pre.singular_matrix
        k_an = pre.svd_left @ (lam * p_z) @ lam.T @ pre.svd_left.conj().T
        n = cfg.n_sub
        logdet = rates._logdet_pd(np.eye(n) + k_an)
        sval = float(np.sum(np.log2(1.0 + pre.singular_values**2 * p_z)))
        worst_sylv = max(worst_sylv, abs(logdet - sval))
    ok = worst_sylv < 1e-9 and worst_collapse < 1e-9
    return ok, (
        f"sylvester gap {worst_sylv:.1e}, no-AN collapse gap {worst_collapse:.1e}"
        f" over {reps} draws"
    )


def check_seed_derivation(quick: bool) -> tuple[bool, str]:
    count = 2000 if quick else 10_000
    first = set()
    for idx in range(count):
        first.add(trial_rng(123, 0, idx).integers(0, 2**63).item())
    preset = figure_preset("fig5", master_seed=7)
    point = resolve_point(preset.spec, 3)
    a = run_trial(point, 11)
    b = run_trial(point, 11)
    identical = all(
        np.array_equal(
            np.array([getattr(a[s], f) for f in a[s].__dataclass_fields__]),
            np.array([getattr(b[s], f) for f in b[s].__dataclass_fields__]),
            equal_nan=True,
        )
        for s in a
    )
    return (
        len(first) == count and identical,
        f"{len(first)}/{count} distinct first draws; trial replay identical: {identical}",
    )


def check_no_an_receivers(quick: bool) -> tuple[bool, str]:
    spec = ExperimentSpec(
        cfg=OfdmConfig(64, 16),
        schemes=(Scheme.NO_AN,),
        sweep_axis="alpha",
        sweep_values=(0.5,),
        trials=1,
        master_seed=3,
    )
    out = run_trial(resolve_point(spec, 0), 0)[Scheme.NO_AN]
    gap = abs(out.r_eve_joint - out.r_eve_persub)
    return gap < 1e-9, f"joint vs per-subchannel gap without AN: {gap:.1e}"


CHECKS = [
    ("cp-insertion-removal-identity", check_cp_identity),
    ("dft-unitarity", check_dft_unitary),
    ("post-cp-diagonalization", check_diagonalization),
    ("cp-removal-zero-columns", check_cp_removal_zero_columns),
    ("channel-sampler", check_sampler),
    ("an-nulling-at-bob", check_an_nulling),
    ("useful-stream-count", check_useful_streams),
    ("null-space-constructions-agree", check_subspace_equivalence),
    ("second-precoder-alignment", check_second_precoder),
    ("water-filling-kkt", check_water_fill),
    ("allocation-budget-feasibility", check_allocation_budget),
    ("secrecy-allocation-bisection", check_secrecy_allocation),
    ("rate-identities", check_rate_identities),
    ("seed-derivation", check_seed_derivation),
    ("no-an-receiver-equality", check_no_an_receivers),
]


def run_validation(quick: bool = False) -> list[CheckResult]:
    results = []
    for name, fn in CHECKS:
        start = time.perf_counter()
        try:
            passed, detail = fn(quick)
        except Exception as exc:  # a crash is a failure, not an abort
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(CheckResult(name, passed, detail, time.perf_counter() - start))
    return results
