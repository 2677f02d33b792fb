"""Spiking check-node LDPC decoders and a reproducible BER simulation harness."""

from .channel import ChannelParams, ReceivedWord, lc_for_design_point, sigma_from_ebn0, transmit_all_zero
from .checknode import (
    ScnuConfig,
    ms_cn_update,
    nms_cn_update,
    oms_cn_update,
    resolvable_margin,
    scnu_functional,
    scnu_raw,
    scnu_snn,
    spa_cn_update,
)
from .codes import (
    CodeConstructionError,
    CodeSpec,
    TannerGraph,
    construct_regular_code,
    has_four_cycle,
    load_alist,
    read_alist,
    save_alist,
    syndrome,
    write_alist,
)
from .decoders import ALGORITHMS, ConfigError, Decoder, DecoderConfig, DecodeResult, decode, hard_decision
from .neurons import LifParams, LifState, LiState, li_step, lif_step
from .simulation import BerPoint, CodeSource, SimConfig, run_ber_point, run_curve
from .sweep import SweepConfig, SweepResult, characterize_scnu, sweep_theta1

__version__ = "0.1.0"
