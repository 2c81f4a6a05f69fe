"""Session drivers for the controlled dialogue family and its reductions."""
from .common import (DecoyMode, DecoyPlan, DecoyString, ProtocolId, SessionConfig, SessionResult,
                     build_decoy_string, estimate_qber)
from .dispatch import DRIVERS, run_protocol, run_reduction

__all__ = ["DRIVERS", "DecoyMode", "DecoyPlan", "DecoyString", "ProtocolId", "SessionConfig",
           "SessionResult", "build_decoy_string", "estimate_qber", "run_protocol", "run_reduction"]
