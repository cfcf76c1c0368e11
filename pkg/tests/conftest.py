import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from swipt_fdr.config import SystemConfig, dbm_to_watts, validate_config  # noqa: E402

# one line per acceptance criterion, filled in by test_acceptance
VERDICTS: dict[str, str] = {}


@pytest.fixture
def default_cfg():
    """Default system parameters at p_s = 20 dBm."""
    return validate_config(SystemConfig(p_s=dbm_to_watts(20.0)))


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(VERDICTS, key=lambda k: (int(k.rstrip("abcd")), k)):
            terminalreporter.write_line(VERDICTS[key])
