from numba import njit
import numpy as np


@njit
def floor_log2(x):
    # position of the highest set bit, x >= 1
    n = 0
    while x > 1:
        x >>= 1
        n += 1
    return n


@njit
def clz32(x):
    return 31 - floor_log2(x)


@njit
def clz_shift_batch(backlog_enq, backlog_deq):
    out = np.empty(backlog_enq.shape[0], dtype=np.int64)
    for i in range(backlog_enq.shape[0]):
        out[i] = clz32(backlog_enq[i]) - clz32(backlog_deq[i])
    return out


@njit
def rms_masked(values, mask):
    total = 0.0
    n = 0
    for i in range(values.shape[0]):
        if mask[i]:
            total += values[i] * values[i]
            n += 1
    if n == 0:
        return np.nan
    return np.sqrt(total / n)
