"""Numba kernels for the walk samplers and the 1-D slab simulators.

Every kernel takes an explicit numpy Generator and consumes draws in a fixed
documented order (sign, then mixture component if any, then magnitude), so a
pure-Python reimplementation fed the same generator state reproduces the
stream exactly.  Kernels release the GIL so shards can run on a thread pool.

Weight-floor early termination: a ray whose best-case remaining weight has
dropped below exp(-LN_FLOOR) ~ 1e-20 is terminated with contribution 0.  The
in-slab optical path of any continuation is at least first + travel + pos
(the walk still has to descend pos to reach the exit), so the bias per ray
is below 1e-20, far under Monte Carlo noise at any feasible sample size.
"""

import numpy as np
from numba import njit

# exp(-46.06) < 1e-20
LN_FLOOR = 46.06

# Exit / status codes shared by kernels and the Python wrappers.
SIDE_BOTTOM = 0
SIDE_TOP = 1
SIDE_CENSORED = 2
STATUS_EXIT = 0
STATUS_CENSORED = 1
STATUS_FLOORED = 2


@njit(inline="always")
def _draw_step(rng, cum, rates):
    # component pick costs one uniform only for true mixtures
    if rates.size == 1:
        k = 0
    else:
        uc = rng.random()
        k = 0
        while k < cum.size - 1 and uc >= cum[k]:
            k += 1
    u = rng.random()
    if u < 1e-300:
        u = 1e-300
    return -np.log(u) / rates[k]


@njit(nogil=True, cache=True)
def walk_batch(rng, n, x0, p, cum, rates, two_sided, h, max_steps,
               t_out, travel_out, zm_out, zp_out, side_out):
    """Run n independent stopped walks, recording one outcome per row.

    side_out: 0 exit bottom, 1 exit top, 2 censored at max_steps.
    """
    for i in range(n):
        pos = x0
        travel = 0.0
        t = 0
        zm = 0.0
        zp = 0.0
        side = SIDE_CENSORED
        while t < max_steps:
            up = rng.random() < p
            y = _draw_step(rng, cum, rates)
            travel += y
            if up:
                pos += y
            else:
                pos -= y
            t += 1
            if pos <= 0.0:
                zm = -pos
                side = SIDE_BOTTOM
                break
            if two_sided and pos >= h:
                zp = pos - h
                side = SIDE_TOP
                break
        t_out[i] = t
        travel_out[i] = travel
        zm_out[i] = zm
        zp_out[i] = zp
        side_out[i] = side


@njit(inline="always")
def _one_ray_1d(rng, beta, costheta, cum, rates, max_steps, ln_floor):
    """One pack-free ray: first flight along the ray, renewal walk in depth,
    Beer weight over the in-slab optical path.

    Returns (weight, first_flight, t, travel, z_minus, status).
    """
    first = _draw_step(rng, cum, rates)
    pos = first * costheta
    travel = 0.0
    t = 0
    if pos <= 0.0:
        # degenerate cos(theta); cannot happen for theta < pi/2 but keeps
        # the kernel total
        return np.exp(-beta * first), first, 0, 0.0, 0.0, STATUS_EXIT
    while True:
        if t >= max_steps:
            return 0.0, first, t, travel, 0.0, STATUS_CENSORED
        up = rng.random() < 0.5
        y = _draw_step(rng, cum, rates)
        travel += y
        if up:
            pos += y
        else:
            pos -= y
        t += 1
        if pos <= 0.0:
            # z_minus = -pos; in-slab path = first + travel - z_minus
            w = np.exp(-beta * (first + travel + pos))
            return w, first, t, travel, -pos, STATUS_EXIT
        if beta * (first + travel + pos) > ln_floor:
            return 0.0, first, t, travel, 0.0, STATUS_FLOORED


@njit(nogil=True, cache=True)
def sim1d_one_sided(rng, n, beta, costheta, cum, rates, max_steps, ln_floor):
    """Tally kernel: sum of reflected weights, sum of squares, censor count."""
    sw = 0.0
    sw2 = 0.0
    n_cens = 0
    for i in range(n):
        w, first, t, travel, zm, status = _one_ray_1d(
            rng, beta, costheta, cum, rates, max_steps, ln_floor)
        sw += w
        sw2 += w * w
        if status == STATUS_CENSORED:
            n_cens += 1
    return sw, sw2, n_cens


@njit(nogil=True, cache=True)
def sim1d_one_sided_record(rng, n, beta, costheta, cum, rates, max_steps,
                           ln_floor, w_out, first_out, t_out, travel_out,
                           zm_out, status_out):
    """Same draws as sim1d_one_sided but records every ray."""
    for i in range(n):
        w, first, t, travel, zm, status = _one_ray_1d(
            rng, beta, costheta, cum, rates, max_steps, ln_floor)
        w_out[i] = w
        first_out[i] = first
        t_out[i] = t
        travel_out[i] = travel
        zm_out[i] = zm
        status_out[i] = status


@njit(nogil=True, cache=True)
def sim1d_two_sided(rng, n, mu, h, costheta, max_steps):
    """Two-sided slab, no attenuation.  Returns (n_bottom, n_top, n_censored).

    Pass-through rays (first flight deeper than h) count as top exits.
    """
    n_bot = 0
    n_top = 0
    n_cens = 0
    for i in range(n):
        u = rng.random()
        if u < 1e-300:
            u = 1e-300
        pos = (-np.log(u) / mu) * costheta
        if pos > h:
            n_top += 1
            continue
        t = 0
        exited = False
        while t < max_steps:
            up = rng.random() < 0.5
            u = rng.random()
            if u < 1e-300:
                u = 1e-300
            y = -np.log(u) / mu
            if up:
                pos += y
            else:
                pos -= y
            t += 1
            if pos <= 0.0:
                n_bot += 1
                exited = True
                break
            if pos >= h:
                n_top += 1
                exited = True
                break
        if not exited:
            n_cens += 1
    return n_bot, n_top, n_cens
