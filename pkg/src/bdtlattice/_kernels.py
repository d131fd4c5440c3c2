"""Compiled backward-induction loops over a single rolling buffer.

Rates come from the closed form ``r0 * exp(-n*log_c1) * exp(k*log_c2)``,
with the second factor tabulated once per call (O(N) memory).  When either
factor could leave double range the loops fall back to one ``exp`` per node.  The buffer is updated in place in ascending ``k``, which is safe because
node ``k`` reads only the not-yet-overwritten entries ``k`` and ``k + 1``.
"""

import math

import numpy as np
from numba import njit

OK = 0
OUT_OF_RANGE = 1
CLAMP_EPS = 1e-12
LOG_LIMIT = 700.0


@njit(cache=True, nogil=True)
def _up_table(r0, log_c1, log_c2, n_steps):
    """``exp(k*log_c2)`` for k = 0..n_steps, or an empty array if unsafe."""
    worst = abs(math.log(r0)) + n_steps * (abs(log_c1) + abs(log_c2))
    if worst >= LOG_LIMIT:
        return np.empty(0)
    table = np.empty(n_steps + 1)
    for k in range(n_steps + 1):
        table[k] = math.exp(k * log_c2)
    return table


@njit(cache=True, nogil=True)
def induct_const(r0, log_c1, log_c2, delta, n_steps, ptilde):
    q = 1.0 - ptilde
    table = _up_table(r0, log_c1, log_c2, n_steps)
    tabulated = table.size > 0
    buf = np.ones(n_steps + 1)
    for n in range(n_steps - 1, -1, -1):
        base = -n * log_c1
        a_n = r0 * math.exp(base)
        for k in range(n + 1):
            if tabulated:
                rate = a_n * table[k]
            else:
                rate = r0 * math.exp(base + k * log_c2)
            buf[k] = (ptilde * buf[k + 1] + q * buf[k]) / (1.0 + rate * delta)
    return buf[0]


@njit(cache=True, nogil=True)
def induct_equity(r0, log_c1, log_c2, delta, n_steps, mu, sigma, p, clamp):
    """Node-dependent risk-neutral probability driven by each node's own rate.

    Returns ``(price, status, n, k, bad_value, n_clamped)``; on an out-of-range
    probability without ``clamp`` the loop stops and reports the node.
    """
    scale = math.sqrt(p * (1.0 - p) * delta) / sigma
    lo = CLAMP_EPS
    hi = 1.0 - CLAMP_EPS
    clamped = 0
    table = _up_table(r0, log_c1, log_c2, n_steps)
    tabulated = table.size > 0
    buf = np.ones(n_steps + 1)
    for n in range(n_steps - 1, -1, -1):
        base = -n * log_c1
        a_n = r0 * math.exp(base)
        for k in range(n + 1):
            if tabulated:
                rate = a_n * table[k]
            else:
                rate = r0 * math.exp(base + k * log_c2)
            pt = p - (mu - rate) * scale
            if not (0.0 <= pt <= 1.0):
                if not clamp:
                    return np.nan, OUT_OF_RANGE, n, k, pt, clamped
                clamped += 1
                pt = lo if pt < lo else hi
            buf[k] = (pt * buf[k + 1] + (1.0 - pt) * buf[k]) / (1.0 + rate * delta)
    return buf[0], OK, -1, -1, 0.0, clamped
