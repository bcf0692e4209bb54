try:
    from ._version import get_versions
except ImportError:  # no versioneer-generated _version.py in a bare checkout
    __version__ = "0+unknown"
else:
    __version__ = get_versions()['version']
    del get_versions

from .estimators import Estimator
from .exceptions import ConfigError, NoEstimate, NotCrossed, ScaledSojournError
from .io import emit_reports, load_scenario, parse_scenario, render_scenario
from .queue import QueueCore
from .sim import Scenario, Trace, TraceRecord, run
