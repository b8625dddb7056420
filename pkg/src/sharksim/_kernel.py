"""Compiled inner loops for the round-based simulation.

Everything here works on flat numpy arrays indexed by agent id: pos (n, 2)
float64, heading (n,) float64 degrees, kind (n,) uint8, active (n,) bool.
The object API in `engine` wraps these kernels and the full-run loop calls
them directly, so single-step debugging and full-speed sweeps share one
code path.

Randomness is an explicit SplitMix64 state threaded through every call;
runs are therefore bit-reproducible regardless of process, worker count,
or call batching. Occupancy is strict: a location is empty iff no other
active agent lies at distance < collision radius.
"""

import math

import numpy as np
from numba import njit

REGULAR = 0
ADVERSARY = 1

DELAY_NONE = 0
DELAY_ON_STABILITY = 1
DELAY_STABILITY_PLUS = 2

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True)
def mix64(state):
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return state, z ^ (z >> _S31)


@njit(cache=True)
def uniform01(state):
    state, z = mix64(state)
    return state, float(z >> _S11) * _INV53


@njit(cache=True)
def norm360(angle):
    r = np.fmod(angle, 360.0)
    if r < 0.0:
        r += 360.0
    return r


@njit(cache=True)
def bearing_xy(dx, dy):
    # compass convention: 0 = +y, clockwise positive
    return norm360(math.degrees(math.atan2(dx, dy)))


@njit(cache=True)
def advance_xy(x, y, heading_deg, units, half_extent):
    rad = math.radians(heading_deg)
    nx = x + units * math.sin(rad)
    ny = y + units * math.cos(rad)
    cx = nx
    if cx < -half_extent:
        cx = -half_extent
    elif cx > half_extent:
        cx = half_extent
    cy = ny
    if cy < -half_extent:
        cy = -half_extent
    elif cy > half_extent:
        cy = half_extent
    return cx, cy, (cx != nx) or (cy != ny)


@njit(cache=True)
def is_empty_xy(x, y, pos, active, skip_index, radius):
    r2 = radius * radius
    for j in range(pos.shape[0]):
        if j == skip_index or not active[j]:
            continue
        dx = pos[j, 0] - x
        dy = pos[j, 1] - y
        if dx * dx + dy * dy < r2:
            return False
    return True


@njit(cache=True)
def nearest_index(i, pos, kind, active, adversaries_only):
    # strict < keeps the lowest index on exact ties
    best = -1
    best_d2 = np.inf
    for j in range(pos.shape[0]):
        if j == i or not active[j]:
            continue
        if adversaries_only and kind[j] != ADVERSARY:
            continue
        dx = pos[j, 0] - pos[i, 0]
        dy = pos[j, 1] - pos[i, 1]
        d2 = dx * dx + dy * dy
        if d2 < best_d2:
            best_d2 = d2
            best = j
    return best


@njit(cache=True)
def center_proposal(i, pos, heading, active, delta, epsilon, c, radius, half_extent, tx, ty):
    """Move c units straight out (too close) or straight in (too far).

    Returns (new_x, new_y, blocked, clamped); heading is not touched by
    this rule. Both kinds run it, occupancy check included.
    """
    x = pos[i, 0]
    y = pos[i, 1]
    dx = tx - x
    dy = ty - y
    dist = math.hypot(dx, dy)
    if dist == 0.0:
        h = heading[i]  # bearing to target undefined; keep current heading
    else:
        h = bearing_xy(dx, dy)
    err = delta - dist
    if err > epsilon:
        units = -c
    elif err < -epsilon:
        units = c
    else:
        return x, y, False, False
    cx, cy, clamped = advance_xy(x, y, h, units, half_extent)
    if is_empty_xy(cx, cy, pos, active, i, radius):
        return cx, cy, False, clamped
    return x, y, True, False


@njit(cache=True)
def disperse_proposal(i, pos, heading, kind, active, rotation, step, radius, half_extent,
                      adversaries_only, check_occupancy):
    """Face the nearest qualifying neighbor, rotate 180 + r clockwise, step.

    Returns (new_x, new_y, new_heading, blocked, clamped). Without a
    qualifying neighbor (or with a coincident one, where the bearing is
    undefined) nothing changes. The heading update survives a blocked move.
    """
    j = nearest_index(i, pos, kind, active, adversaries_only)
    if j < 0:
        return pos[i, 0], pos[i, 1], heading[i], False, False
    dx = pos[j, 0] - pos[i, 0]
    dy = pos[j, 1] - pos[i, 1]
    if dx == 0.0 and dy == 0.0:
        return pos[i, 0], pos[i, 1], heading[i], False, False
    nh = norm360(bearing_xy(dx, dy) + 180.0 + rotation)
    cx, cy, clamped = advance_xy(pos[i, 0], pos[i, 1], nh, step, half_extent)
    if check_occupancy and not is_empty_xy(cx, cy, pos, active, i, radius):
        return pos[i, 0], pos[i, 1], nh, True, False
    return cx, cy, nh, False, clamped


@njit(cache=True)
def shuffle_order(order, rng):
    """Fisher-Yates over 0..n-1 using the run's SplitMix64 stream."""
    n = order.shape[0]
    for i in range(n):
        order[i] = i
    for i in range(n - 1, 0, -1):
        rng, z = mix64(rng)
        j = int(z % np.uint64(i + 1))
        tmp = order[i]
        order[i] = order[j]
        order[j] = tmp
    return rng


@njit(cache=True)
def max_circular_gap(bearings, m):
    """Largest gap (degrees) between adjacent sorted bearings, wraparound
    included. Zero or one bearing leaves the whole circle open."""
    if m <= 1:
        return 360.0
    b = np.sort(bearings[:m].copy())
    max_gap = 360.0 - (b[m - 1] - b[0])
    for k in range(1, m):
        g = b[k] - b[k - 1]
        if g > max_gap:
            max_gap = g
    return max_gap


@njit(cache=True)
def collect_bearings(pos, kind, active, tx, ty, bearings_buf, regular_only):
    """Bearings of active agents about the target (agents exactly on the
    target have no bearing and are skipped)."""
    m = 0
    for i in range(pos.shape[0]):
        if not active[i]:
            continue
        if regular_only and kind[i] != REGULAR:
            continue
        dx = pos[i, 0] - tx
        dy = pos[i, 1] - ty
        if dx == 0.0 and dy == 0.0:
            continue
        bearings_buf[m] = bearing_xy(dx, dy)
        m += 1
    return m


@njit(cache=True)
def ring_stats(pos, kind, active, tx, ty, bearings_buf):
    """Per-round ring observables.

    The access gap counts every active agent as a ring member: an arc held
    open by adversaries is split by the adversaries standing in it, so the
    reported gap is the largest arc genuinely empty of agents. The gap CV,
    by contrast, describes how evenly the regular swarm itself has spread,
    so it is computed over regular agents only.

    Returns (max_gap_deg over all active agents, gap CV over regular
    agents, regular bearing count)."""
    m_reg = collect_bearings(pos, kind, active, tx, ty, bearings_buf, True)
    if m_reg == 0:
        cv = 1e18
    elif m_reg == 1:
        cv = 0.0
    else:
        b = np.sort(bearings_buf[:m_reg].copy())
        mean = 360.0 / m_reg
        wrap = 360.0 - (b[m_reg - 1] - b[0])
        var_sum = (wrap - mean) ** 2
        for k in range(1, m_reg):
            var_sum += (b[k] - b[k - 1] - mean) ** 2
        cv = math.sqrt(var_sum / m_reg) / mean
    m_all = collect_bearings(pos, kind, active, tx, ty, bearings_buf, False)
    max_gap = max_circular_gap(bearings_buf, m_all)
    return max_gap, cv, m_reg


@njit(cache=True)
def count_in_band(pos, kind, active, tx, ty, delta, epsilon):
    lo = delta - epsilon
    hi = delta + epsilon
    n = 0
    for i in range(pos.shape[0]):
        if kind[i] != REGULAR or not active[i]:
            continue
        dist = math.hypot(pos[i, 0] - tx, pos[i, 1] - ty)
        if dist >= lo and dist <= hi:
            n += 1
    return n


@njit(cache=True)
def collision_pairs(pos, active, radius):
    r2 = radius * radius
    n = 0
    for i in range(pos.shape[0]):
        if not active[i]:
            continue
        for j in range(i + 1, pos.shape[0]):
            if not active[j]:
                continue
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            if dx * dx + dy * dy < r2:
                n += 1
    return n


@njit(cache=True)
def place_uniform(rng, n, half_extent, min_separation, tx, ty, max_attempts):
    """Rejection-sample n positions uniform over the world square, each at
    least min_separation from the target and from one another, plus a
    uniform heading per accepted agent. Fails once max_attempts candidate
    draws are spent."""
    pos = np.zeros((n, 2))
    headings = np.zeros(n)
    sep2 = min_separation * min_separation
    placed = 0
    attempts = 0
    while placed < n:
        if attempts >= max_attempts:
            return rng, pos, headings, attempts, False
        attempts += 1
        rng, ux = uniform01(rng)
        rng, uy = uniform01(rng)
        x = (2.0 * ux - 1.0) * half_extent
        y = (2.0 * uy - 1.0) * half_extent
        dx = x - tx
        dy = y - ty
        ok = dx * dx + dy * dy >= sep2
        if ok:
            for j in range(placed):
                dx = x - pos[j, 0]
                dy = y - pos[j, 1]
                if dx * dx + dy * dy < sep2:
                    ok = False
                    break
        if ok:
            pos[placed, 0] = x
            pos[placed, 1] = y
            rng, uh = uniform01(rng)
            headings[placed] = uh * 360.0
            placed += 1
    return rng, pos, headings, attempts, True


@njit(cache=True)
def place_adversaries(pos, heading, kind, active, delta, entry_deg, spacing, half_extent, tx, ty):
    """Drop every adversary at the single entry point on the ideal circle,
    fanned out by one spacing step along the clockwise tangent so none
    coincide exactly; all become active facing the target."""
    rad = math.radians(entry_deg)
    ux = math.sin(rad)
    uy = math.cos(rad)
    trad = math.radians(norm360(entry_deg + 90.0))
    vx = math.sin(trad)
    vy = math.cos(trad)
    rank = 0
    for i in range(pos.shape[0]):
        if kind[i] != ADVERSARY:
            continue
        x = tx + delta * ux + rank * spacing * vx
        y = ty + delta * uy + rank * spacing * vy
        if x < -half_extent:
            x = -half_extent
        elif x > half_extent:
            x = half_extent
        if y < -half_extent:
            y = -half_extent
        elif y > half_extent:
            y = half_extent
        pos[i, 0] = x
        pos[i, 1] = y
        heading[i] = bearing_xy(tx - x, ty - y)
        active[i] = True
        rank += 1


@njit(cache=True)
def advance_round(pos, heading, kind, active, rng, round_idx, streak, first_stable, activated,
                  delta, epsilon, c, d, rotation, adv_factor, radius, half_extent, tx, ty,
                  delay_code, delay_extra, entry_deg, window, cv_threshold,
                  order_buf, bearings_buf):
    """One full round: every active agent, in freshly shuffled order, runs
    the dispersion rule then the center rule against the positions already
    updated this round; then the round's metrics, the stability streak, and
    adversary activation are evaluated.

    Dispersing before centering matters: fleeing a neighbor that sits on
    the same circle drifts agents outward on average, and centering last
    corrects the drift within the turn, so a settled ring actually ends its
    rounds inside the band.

    Returns (rng, streak, first_stable, activated, gap_fraction, gap_cv,
    in_band, stable, collisions, clamp_events)."""
    n = pos.shape[0]
    clamps = 0
    rng = shuffle_order(order_buf, rng)
    for k in range(n):
        i = order_buf[k]
        if not active[i]:
            continue
        if kind[i] == ADVERSARY:
            nx, ny, nh, blocked, clamped = disperse_proposal(
                i, pos, heading, kind, active, rotation, d * adv_factor,
                radius, half_extent, True, False
            )
        else:
            nx, ny, nh, blocked, clamped = disperse_proposal(
                i, pos, heading, kind, active, rotation, d,
                radius, half_extent, False, True
            )
        heading[i] = nh
        if not blocked:
            pos[i, 0] = nx
            pos[i, 1] = ny
            if clamped:
                clamps += 1
        nx, ny, blocked, clamped = center_proposal(
            i, pos, heading, active, delta, epsilon, c, radius, half_extent, tx, ty
        )
        if not blocked:
            pos[i, 0] = nx
            pos[i, 1] = ny
            if clamped:
                clamps += 1

    max_gap, cv, m = ring_stats(pos, kind, active, tx, ty, bearings_buf)
    gap_fraction = max_gap / 360.0
    in_band = count_in_band(pos, kind, active, tx, ty, delta, epsilon)
    collisions = collision_pairs(pos, active, radius)

    n_regular = 0
    n_adv = 0
    for i in range(n):
        if kind[i] == REGULAR:
            n_regular += 1
        else:
            n_adv += 1

    if in_band == n_regular and cv <= cv_threshold:
        streak += 1
    else:
        streak = 0
    stable = streak >= window
    if stable and first_stable < 0:
        first_stable = round_idx

    if activated < 0 and n_adv > 0:
        due = False
        if delay_code == DELAY_NONE:
            due = True  # normally handled at initialization
        elif delay_code == DELAY_ON_STABILITY:
            due = first_stable >= 0
        else:
            due = first_stable >= 0 and round_idx >= first_stable + delay_extra
        if due:
            place_adversaries(pos, heading, kind, active, delta, entry_deg, radius,
                              half_extent, tx, ty)
            activated = round_idx

    return rng, streak, first_stable, activated, gap_fraction, cv, in_band, stable, collisions, clamps


@njit(cache=True)
def run_rounds(pos, heading, kind, active, rng, streak, first_stable, activated,
               start_round, n_rounds,
               delta, epsilon, c, d, rotation, adv_factor, radius, half_extent, tx, ty,
               delay_code, delay_extra, entry_deg, window, cv_threshold,
               out_gap, out_cv, out_in_band, out_stable, out_collisions):
    """Advance n_rounds rounds, recording per-round observables."""
    order_buf = np.empty(pos.shape[0], np.int64)
    bearings_buf = np.empty(pos.shape[0])
    clamp_total = 0
    for t in range(start_round, start_round + n_rounds):
        (rng, streak, first_stable, activated, gap_fraction, cv, in_band,
         stable, collisions, clamps) = advance_round(
            pos, heading, kind, active, rng, t, streak, first_stable, activated,
            delta, epsilon, c, d, rotation, adv_factor, radius, half_extent, tx, ty,
            delay_code, delay_extra, entry_deg, window, cv_threshold,
            order_buf, bearings_buf)
        k = t - start_round
        out_gap[k] = gap_fraction
        out_cv[k] = cv
        out_in_band[k] = in_band
        out_stable[k] = stable
        out_collisions[k] = collisions
        clamp_total += clamps
    return rng, streak, first_stable, activated, clamp_total
