"""
JIT-compiled inner loops of the simulation engines.

The kernels read a network through its ``KernelArrays`` and draw no random
numbers of their own: every uniform comes from a pre-drawn block handed in
by an ``RngStream`` together with a read position. A kernel stops with
``NEED_UNIFORMS`` before a step whose uniforms are not in the block, so the
caller refills and resumes and the sequence each stream yields never
depends on block boundaries.

Jumps are written to caller-owned log arrays (pre-jump state, holding time,
channel). A record with channel -1 is a holding interval cut at ``t_end``.
"""

import math

import numpy as np
from numba import njit

from ..models.network import KERNEL_HILL_ACTIVATION, KERNEL_MASS_ACTION

# Kernel status codes
LOG_FULL = 0
NEED_UNIFORMS = 1
REACHED_T_END = 2
DECORRELATED = 3
EXITED = 4
ABSORBING = 5
ALL_EXITED = 6
DONE = 7


@njit(cache=True, nogil=True)
def propensities_into(x, codes, coeffs, links, orders, out):
    """Fill ``out`` with the propensities at ``x`` and return their sum."""
    total = 0.0
    for j in range(codes.shape[0]):
        if codes[j] == KERNEL_MASS_ACTION:
            a = coeffs[j, 0]
            for s in range(x.shape[0]):
                order = orders[j, s]
                if order:
                    ff = 1.0
                    for i in range(order):
                        ff *= x[s] - i
                    a *= ff
        else:
            gate = float(x[links[j, 1]])
            xs2 = float(x[links[j, 0]]) ** 2
            d = coeffs[j, 2]
            hill = xs2 / (xs2 + d * d)
            k_base = coeffs[j, 0]
            k_max = coeffs[j, 1]
            if codes[j] == KERNEL_HILL_ACTIVATION:
                a = gate * (k_base + (k_max - k_base) * hill)
            else:
                a = gate * (k_max - (k_max - k_base) * hill)
        out[j] = a
        total += a
    return total


@njit(cache=True, nogil=True)
def select_channel(props, target):
    """
    Channel j with cumsum[j-1] <= target < cumsum[j].

    When rounding puts ``target`` at the total, the last channel with a
    positive propensity is taken.
    """
    cumulative = 0.0
    last = 0
    for j in range(props.shape[0]):
        if props[j] > 0.0:
            last = j
        cumulative += props[j]
        if target < cumulative:
            return j
    return last


@njit(cache=True, nogil=True)
def region_index(x, coordinate, threshold, lower):
    below = x[coordinate] <= threshold
    if lower:
        return 0 if below else 1
    return 1 if below else 0


@njit(cache=True, nogil=True)
def advance_path(
    x,
    clock,
    t_end,
    start,
    capacity,
    uniforms,
    pos,
    codes,
    coeffs,
    links,
    orders,
    stoich,
    coordinate,
    threshold,
    lower,
    stop_on_exit,
    n_c,
    region,
    streak,
    props,
    log_states,
    log_taus,
    log_channels,
):
    """
    Direct-method steps from ``x`` (updated in place) starting at log row ``start``.

    Without a region (``coordinate`` < 0) the path runs until ``t_end`` or
    until ``capacity`` log rows are used. With a region it also stops when
    ``n_c`` consecutive jumps stay in one region (``DECORRELATED``) or, with
    ``stop_on_exit``, right after the first jump out of ``region``
    (``EXITED``). Every step consumes two uniforms: tau first, then J.

    Returns:
        (status, rows used, clock, uniform position, region, streak)
    """
    n = start
    status = LOG_FULL
    n_species = x.shape[0]
    while True:
        if clock >= t_end:
            status = REACHED_T_END
            break
        if n >= capacity:
            status = LOG_FULL
            break
        if pos + 2 > uniforms.shape[0]:
            status = NEED_UNIFORMS
            break
        total = propensities_into(x, codes, coeffs, links, orders, props)
        if total <= 0.0:
            status = ABSORBING
            break
        tau = -math.log1p(-uniforms[pos]) / total
        j = select_channel(props, uniforms[pos + 1] * total)
        pos += 2
        for s in range(n_species):
            log_states[n, s] = x[s]
        if clock + tau >= t_end:
            log_taus[n] = t_end - clock
            log_channels[n] = -1
            n += 1
            clock = t_end
            status = REACHED_T_END
            break
        log_taus[n] = tau
        log_channels[n] = j
        n += 1
        clock += tau
        for s in range(n_species):
            x[s] += stoich[j, s]
        if coordinate >= 0:
            new_region = region_index(x, coordinate, threshold, lower)
            if stop_on_exit:
                if new_region != region:
                    status = EXITED
                    break
            else:
                if new_region == region:
                    streak += 1
                else:
                    streak = 0
                    region = new_region
                if streak >= n_c:
                    status = DECORRELATED
                    break
    return status, n, clock, pos, region, streak


@njit(cache=True, nogil=True)
def dephase_rounds(
    states,
    first_round,
    jump_uniforms,
    resample_uniforms,
    rpos,
    codes,
    coeffs,
    links,
    orders,
    stoich,
    coordinate,
    threshold,
    lower,
    region,
    props,
    exited,
):
    """
    Fleming-Viot rounds over the replica states (rows of ``states``).

    Round t moves replica r by one embedded jump drawn with
    ``jump_uniforms[r, t]``. Replicas that left ``region`` are restarted in
    increasing index from a survivor of the same round, one resample
    uniform each. A round starts only if ``len(resample_uniforms) - rpos``
    covers every replica.

    Returns:
        (status, next round, resample position, restarts, failing replica)
    """
    replicas = states.shape[0]
    n_species = states.shape[1]
    restarts = 0
    survivors = np.empty(replicas, dtype=np.int64)
    for t in range(first_round, jump_uniforms.shape[1]):
        if rpos + replicas > resample_uniforms.shape[0]:
            return NEED_UNIFORMS, t, rpos, restarts, -1
        n_exit = 0
        for r in range(replicas):
            x = states[r]
            total = propensities_into(x, codes, coeffs, links, orders, props)
            if total <= 0.0:
                return ABSORBING, t, rpos, restarts, r
            j = select_channel(props, jump_uniforms[r, t] * total)
            for s in range(n_species):
                x[s] += stoich[j, s]
            exited[r] = region_index(x, coordinate, threshold, lower) != region
            if exited[r]:
                n_exit += 1
        if n_exit == 0:
            continue
        if n_exit == replicas:
            return ALL_EXITED, t, rpos, restarts, -1
        n_alive = 0
        for r in range(replicas):
            if not exited[r]:
                survivors[n_alive] = r
                n_alive += 1
        for r in range(replicas):
            if exited[r]:
                pick = min(int(resample_uniforms[rpos] * n_alive), n_alive - 1)
                rpos += 1
                for s in range(n_species):
                    states[r, s] = states[survivors[pick], s]
        restarts += n_exit
    return DONE, jump_uniforms.shape[1], rpos, restarts, -1
