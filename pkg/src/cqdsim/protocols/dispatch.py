"""Protocol id to driver mapping."""
from __future__ import annotations

from typing import Callable

import numpy as np

from .common import ProtocolId, SessionConfig, SessionResult
from .entangled import run_dense_dialogue, run_swap
from .five_stage import run_five_stage
from .single_photon import run_qkd_decoy, run_single_photon

Driver = Callable[[SessionConfig, np.random.Generator], SessionResult]

DRIVERS: dict[ProtocolId, Driver] = {
    ProtocolId.CQD_SINGLE: run_single_photon,
    ProtocolId.CQD_FIVE_STAGE: run_five_stage,
    ProtocolId.CQD_ENTANGLED: run_dense_dialogue,
    ProtocolId.CDSQC_SINGLE: run_single_photon,
    ProtocolId.CDSQC_ENTANGLED: run_dense_dialogue,
    ProtocolId.CDSQC_SWAP: run_swap,
    ProtocolId.QD_SINGLE: run_single_photon,
    ProtocolId.QSDC: run_single_photon,
    ProtocolId.DSQC: run_single_photon,
    ProtocolId.QKA: run_single_photon,
    ProtocolId.QKD_DECOY: run_qkd_decoy,
}

REDUCTIONS = frozenset({ProtocolId.CDSQC_SINGLE, ProtocolId.CDSQC_ENTANGLED, ProtocolId.QD_SINGLE,
                        ProtocolId.QSDC, ProtocolId.DSQC, ProtocolId.QKA, ProtocolId.QKD_DECOY})


def run_protocol(cfg: SessionConfig, rng: np.random.Generator) -> SessionResult:
    return DRIVERS[cfg.protocol](cfg, rng)


def run_reduction(pid: ProtocolId, cfg: SessionConfig, rng: np.random.Generator) -> SessionResult:
    """Run a reduced protocol; ``cfg.protocol`` must agree with ``pid``."""
    if pid not in REDUCTIONS:
        raise ValueError(f"{pid.value} is not a reduction protocol")
    if cfg.protocol is not pid:
        raise ValueError(f"config is for {cfg.protocol.value}, not {pid.value}")
    return DRIVERS[pid](cfg, rng)
