"""Temporal artificial-noise injection for SISO-OFDM wiretap links.

A numerical laboratory for cyclic-prefix AN precoding: null-space precoder
construction, data/AN power allocation under known and unknown eavesdropper
CSI, secrecy-rate evaluation under joint and per-subchannel eavesdropper
processing, and seeded Monte Carlo sweeps over the OFDM operating parameters.
"""

from .allocation import (
    AllZeroGainsError,
    PowerAllocation,
    PowerBudget,
    an_power_known_csi,
    an_power_unknown_csi,
    data_power_bob_only,
    data_power_secrecy,
    water_fill,
)
from .ofdm import (
    PROFILE_UNIFORM_MAGNITUDE,
    PROFILE_UNIFORM_PDP_GAUSSIAN,
    ChannelPair,
    ChannelTaps,
    NoiseModel,
    NotDiagonalError,
    OfdmConfig,
    channel_frequency_response,
    cp_matrices,
    dft_matrix,
    freq_diag_channel,
    sample_channel,
    time_domain_matrix,
)
from .precoding import (
    DegenerateChannelError,
    PrecoderSet,
    RankDeficientError,
    an_channel_svd,
    build_precoder_set,
    effective_an_channel,
    null_precoder_structured,
    null_precoder_svd,
    second_precoder,
    useful_stream_count,
)
from .rates import (
    NumericalFailureError,
    RateBreakdown,
    interference_cov,
    rate_bob,
    rate_eve_approx,
    rate_eve_joint,
    rate_eve_persub,
    secrecy,
    to_bits_per_sec,
)
from .simulate import (
    ExperimentSpec,
    InvalidSweepError,
    Receiver,
    ResultRow,
    Scheme,
    figure_preset,
    resolve_point,
    run_experiment,
    run_sweep_point,
    run_trial,
)

__version__ = "0.1.0"
