"""Block-fading outage simulation of a SWIPT-powered full-duplex AF relay."""

__version__ = "0.1.0"

from .config import SinrMode, SystemConfig, ThresholdMode, validate_config  # noqa: E402
from .energy import Mode  # noqa: E402
from .engine import OutageEstimate, run_sweep, run_trial  # noqa: E402
from .policy import PolicyKind  # noqa: E402

__all__ = [
    "Mode",
    "OutageEstimate",
    "PolicyKind",
    "SinrMode",
    "SystemConfig",
    "ThresholdMode",
    "run_sweep",
    "run_trial",
    "validate_config",
]
