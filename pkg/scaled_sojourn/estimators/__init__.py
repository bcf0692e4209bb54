from .drain_rate import (DrainRateEstimator, InstantRateEstimator, drain_rate_update,
                         instant_rate_update, qdelay_from_backlog, qdelay_from_instant_rate)
from .sojourn import (DelaySample, Estimator, clz_shift_exponent, lg_shift_exponent,
                      raw_sojourn, scaled_sojourn_clz_shift, scaled_sojourn_exact,
                      scaled_sojourn_lg_shift)
