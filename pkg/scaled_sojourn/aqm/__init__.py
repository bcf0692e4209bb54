from .codel import CodelState, codel_on_dequeue, control_law
from .marker import (Action, ApplicationPoint, MarkDecision, Marker, MarkerMode, Signal,
                     as_fraction, congestion_action, decide, marker_decide)
from .pi import PiState, pi_decide, pi_update
from .ramp import RampState, ramp_decide, ramp_prob
