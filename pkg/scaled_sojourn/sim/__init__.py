from .engine import Simulation, run
from .metrics import (ErrorStats, FlowSpacing, LagMeasurement, SignalLagReport, TailMarks,
                      detect_step_lag, error_stats, idle_tail_report, lag_matrix, mark_spacing,
                      shift_factors)
from .oracle import DepartureLog, oracle_drain
from .scenario import (AqmConfig, Algorithm, Burst, ConstantRate, FitsAndStarts, OnOff,
                       PoissonLike, RandomWalk, Scenario, StepChange)
from .trace import ESTIMATOR_COLUMNS, TRACE_COLUMNS, PiUpdate, Trace, TraceRecord
from .traffic import Link, arrival_times, serialization_ns
