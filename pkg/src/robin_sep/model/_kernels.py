"""Numba kernels for the event-driven simulation and path reweighting.

Sites are 0-based here: site ``i`` is the lattice point ``(i + 1) / N`` and
bond ``b`` joins sites ``b`` and ``b + 1``. Tilted runs receive the field
tabulated at the sites on a uniform time grid (``htab[j, i]`` at time
``j * cell_dt``); rates use linear interpolation in time and the
compensator freezes the field at cell midpoints.

Random numbers come from a numpy ``Generator`` passed in by the caller, so
every replica owns an independent counter-based stream.
"""

import numpy as np
from numba import njit

EXCHANGE, LEFT, RIGHT = 0, 1, 2


@njit(cache=True, inline="always")
def _interp(htab, cell_dt, t, i):
    ncell = htab.shape[0] - 1
    c = t / cell_dt
    j = int(c)
    if j >= ncell:
        j = ncell - 1
    if j < 0:
        j = 0
    w = c - j
    return (1.0 - w) * htab[j, i] + w * htab[j + 1, i]


@njit(cache=True)
def _cell_factors(htab, cell, n2, la, lb, alpha, beta, up, dn, flips):
    """Excess-rate contributions for the field frozen at the middle of ``cell``.

    ``up[b]`` applies when ``eta[b+1] - eta[b] = 1`` and ``dn[b]`` when it is
    -1; ``flips`` holds the left/right terms for an empty and a full site.
    """
    ncell = htab.shape[0] - 1
    j = cell if cell < ncell else ncell - 1
    m = htab.shape[1]
    prev = 0.5 * (htab[j, 0] + htab[j + 1, 0])
    h0 = prev
    for b in range(m - 1):
        cur = 0.5 * (htab[j, b + 1] + htab[j + 1, b + 1])
        e = np.exp(cur - prev)
        up[b] = n2 * (1.0 / e - 1.0)
        dn[b] = n2 * (e - 1.0)
        prev = cur
    h1 = prev
    flips[0] = la * alpha * (np.exp(h0) - 1.0)
    flips[1] = la * (1.0 - alpha) * (np.exp(-h0) - 1.0)
    flips[2] = lb * beta * (np.exp(h1) - 1.0)
    flips[3] = lb * (1.0 - beta) * (np.exp(-h1) - 1.0)


@njit(cache=True, inline="always")
def _bond_term(eta, up, dn, b):
    d = eta[b + 1] - eta[b]
    return up[b] * (d > 0) + dn[b] * (d < 0)


@njit(cache=True)
def _excess_rate(eta, up, dn, flips):
    """Total tilted minus untilted rate for a frozen field."""
    m = eta.shape[0]
    total = 0.0
    for b in range(m - 1):
        total += _bond_term(eta, up, dn, b)
    total += flips[eta[0]]
    total += flips[2 + eta[m - 1]]
    return total


@njit(cache=True)
def _cell_of(t, cell_dt, ncell):
    c = int(t / cell_dt)
    if c > ncell - 1:
        c = ncell - 1
    return c


@njit(cache=True, inline="always")
def _toggle(members, where, cnt, bb, disc):
    if disc and where[bb] < 0:
        members[cnt] = bb
        where[bb] = cnt
        return cnt + 1
    if not disc and where[bb] >= 0:
        pos = where[bb]
        last = members[cnt - 1]
        members[pos] = last
        where[last] = pos
        where[bb] = -1
        return cnt - 1
    return cnt


@njit(cache=True, nogil=True)
def run_path(eta0, n, alpha, beta, cap_a, cap_b, t_start, t_end, htab, cell_dt,
             tilted, weigh, grad_bound, val_bound, ckpts, rng, record):
    """Simulate one trajectory with the generator ``rng``.

    Returns
    -------
    ev_t, ev_kind, ev_site : event log (empty unless ``record``)
    snaps : int8 array (len(ckpts), N - 1), configurations at checkpoints
    eta : final configuration
    logw : Girsanov log-weight (0 unless ``weigh``)
    counts : int64[4], accepted exchanges, left flips, right flips, proposals
    """
    m = eta0.shape[0]
    eta = eta0.copy()
    nb = m - 1
    members = np.empty(nb, np.int64)
    where = np.full(nb, -1, np.int64)
    cnt = 0
    for b in range(nb):
        if eta[b] != eta[b + 1]:
            members[cnt] = b
            where[b] = cnt
            cnt += 1
    n2 = float(n) * float(n)
    la = n / cap_a
    lb = n / cap_b
    if tilted:
        rb = n2 * np.exp(2.0 * grad_bound / n)
        rl = la * np.exp(val_bound)
        rr = lb * np.exp(val_bound)
    else:
        rb = n2
        rl = la * max(alpha, 1.0 - alpha)
        rr = lb * max(beta, 1.0 - beta)

    cap = 4096 if record else 1
    ev_t = np.empty(cap)
    ev_k = np.empty(cap, np.int8)
    ev_s = np.empty(cap, np.int32)
    nev = 0
    nck = ckpts.shape[0]
    snaps = np.zeros((nck, m), np.int8)
    nxt = 0
    while nxt < nck and ckpts[nxt] < t_start:
        nxt += 1
    counts = np.zeros(4, np.int64)

    ncell = htab.shape[0] - 1
    up = np.zeros(max(nb, 1))
    dn = np.zeros(max(nb, 1))
    flips = np.zeros(4)
    logj = 0.0
    comp = 0.0
    excess = 0.0
    cell = 0
    if weigh:
        cell = _cell_of(t_start, cell_dt, ncell)
        _cell_factors(htab, cell, n2, la, lb, alpha, beta, up, dn, flips)
        excess = _excess_rate(eta, up, dn, flips)

    t = t_start
    while True:
        total = cnt * rb + rl + rr
        tnew = t + rng.standard_exponential() / total
        while nxt < nck and ckpts[nxt] < tnew and ckpts[nxt] <= t_end:
            for i in range(m):
                snaps[nxt, i] = eta[i]
            nxt += 1
        stop = tnew if tnew < t_end else t_end
        if weigh:
            # integrate the excess rate up to the next event, cell by cell
            while True:
                cell_end = (cell + 1) * cell_dt
                if stop <= cell_end or cell >= ncell - 1:
                    comp += excess * (stop - t)
                    break
                comp += excess * (cell_end - t)
                t = cell_end
                cell += 1
                _cell_factors(htab, cell, n2, la, lb, alpha, beta, up, dn, flips)
                excess = _excess_rate(eta, up, dn, flips)
        if tnew >= t_end:
            break
        t = tnew
        counts[3] += 1
        # one uniform picks the event; its fractional part decides acceptance
        u = rng.random() * total
        if u < cnt * rb:
            q = u / rb
            k = int(q)
            if k >= cnt:
                k = cnt - 1
            acc = q - k
            b = members[k]
            d = eta[b + 1] - eta[b]
            x = 0.0
            if tilted:
                x = -d * (_interp(htab, cell_dt, t, b + 1) - _interp(htab, cell_dt, t, b))
                if acc * rb >= n2 * np.exp(x):
                    continue
            if weigh:
                logj += x
                # the end sites also carry the flip terms
                excess -= _bond_term(eta, up, dn, b) + flips[eta[0]] + flips[2 + eta[m - 1]]
                if b > 0:
                    excess -= _bond_term(eta, up, dn, b - 1)
                if b + 1 < nb:
                    excess -= _bond_term(eta, up, dn, b + 1)
            eta[b], eta[b + 1] = eta[b + 1], eta[b]
            # bond b stays discordant; neighbours may change
            if b > 0:
                cnt = _toggle(members, where, cnt, b - 1, eta[b - 1] != eta[b])
            if b + 1 < nb:
                cnt = _toggle(members, where, cnt, b + 1, eta[b + 1] != eta[b + 2])
            if weigh:
                excess += _bond_term(eta, up, dn, b) + flips[eta[0]] + flips[2 + eta[m - 1]]
                if b > 0:
                    excess += _bond_term(eta, up, dn, b - 1)
                if b + 1 < nb:
                    excess += _bond_term(eta, up, dn, b + 1)
            counts[0] += 1
            kind = EXCHANGE
            site = b + 1
        else:
            left = u < cnt * rb + rl
            if left:
                i, rho, lam, bb, acc = 0, alpha, la, 0, (u - cnt * rb) / rl
            else:
                i, rho, lam, bb, acc = m - 1, beta, lb, nb - 1, (u - cnt * rb - rl) / rr
            e = eta[i]
            hv = 0.0
            if tilted:
                hv = _interp(htab, cell_dt, t, i)
                if e == 0:
                    rate = lam * rho * np.exp(hv)
                else:
                    rate = lam * (1.0 - rho) * np.exp(-hv)
            else:
                rate = lam * (rho if e == 0 else 1.0 - rho)
            if acc * (rl if left else rr) >= rate:
                continue
            off = 0 if left else 2
            if weigh:
                logj += hv if e == 0 else -hv
                excess -= flips[off + e] + _bond_term(eta, up, dn, bb)
            eta[i] = 1 - e
            cnt = _toggle(members, where, cnt, bb, eta[bb] != eta[bb + 1])
            if weigh:
                excess += flips[off + eta[i]] + _bond_term(eta, up, dn, bb)
            if left:
                counts[1] += 1
                kind = LEFT
                site = 1
            else:
                counts[2] += 1
                kind = RIGHT
                site = m
        if record:
            if nev == ev_t.shape[0]:
                ev_t = np.concatenate((ev_t, np.empty(nev)))
                ev_k = np.concatenate((ev_k, np.empty(nev, np.int8)))
                ev_s = np.concatenate((ev_s, np.empty(nev, np.int32)))
            ev_t[nev] = t
            ev_k[nev] = kind
            ev_s[nev] = site
            nev += 1
    while nxt < nck and ckpts[nxt] <= t_end:
        for i in range(m):
            snaps[nxt, i] = eta[i]
        nxt += 1
    return ev_t[:nev], ev_k[:nev], ev_s[:nev], snaps, eta, logj - comp, counts


@njit(cache=True, nogil=True)
def replay_weight(eta0, n, alpha, beta, cap_a, cap_b, t_start, t_end, htab, cell_dt,
                  ev_t, ev_k, ev_s):
    """Girsanov log-weight of a recorded path, same quadrature as :func:`run_path`."""
    m = eta0.shape[0]
    eta = eta0.copy()
    nb = m - 1
    n2 = float(n) * float(n)
    la = n / cap_a
    lb = n / cap_b
    ncell = htab.shape[0] - 1
    up = np.zeros(max(nb, 1))
    dn = np.zeros(max(nb, 1))
    flips = np.zeros(4)
    cell = _cell_of(t_start, cell_dt, ncell)
    _cell_factors(htab, cell, n2, la, lb, alpha, beta, up, dn, flips)
    excess = _excess_rate(eta, up, dn, flips)
    logj = 0.0
    comp = 0.0
    t = t_start
    nev = ev_t.shape[0]
    for q in range(nev + 1):
        stop = ev_t[q] if q < nev else t_end
        while True:
            cell_end = (cell + 1) * cell_dt
            if stop <= cell_end or cell >= ncell - 1:
                comp += excess * (stop - t)
                break
            comp += excess * (cell_end - t)
            t = cell_end
            cell += 1
            _cell_factors(htab, cell, n2, la, lb, alpha, beta, up, dn, flips)
            excess = _excess_rate(eta, up, dn, flips)
        if q == nev:
            break
        t = stop
        kind = ev_k[q]
        if kind == EXCHANGE:
            b = ev_s[q] - 1
            d = eta[b + 1] - eta[b]
            logj += -d * (_interp(htab, cell_dt, t, b + 1) - _interp(htab, cell_dt, t, b))
            excess -= flips[eta[0]] + flips[2 + eta[m - 1]]
            for bb in range(max(b - 1, 0), min(b + 2, nb)):
                excess -= _bond_term(eta, up, dn, bb)
            eta[b], eta[b + 1] = eta[b + 1], eta[b]
            excess += flips[eta[0]] + flips[2 + eta[m - 1]]
            for bb in range(max(b - 1, 0), min(b + 2, nb)):
                excess += _bond_term(eta, up, dn, bb)
        else:
            left = kind == LEFT
            i = 0 if left else m - 1
            off = 0 if left else 2
            bb = 0 if left else nb - 1
            e = eta[i]
            hv = _interp(htab, cell_dt, t, i)
            logj += hv if e == 0 else -hv
            excess -= flips[off + e] + _bond_term(eta, up, dn, bb)
            eta[i] = 1 - e
            excess += flips[off + eta[i]] + _bond_term(eta, up, dn, bb)
    return logj - comp


@njit(cache=True, nogil=True)
def occupation_integral(eta0, t_start, t_end, ev_t, ev_k, ev_s):
    """Time integral of every site's occupation along a recorded path."""
    m = eta0.shape[0]
    eta = eta0.copy()
    acc = np.zeros(m)
    last = np.full(m, t_start)
    for q in range(ev_t.shape[0]):
        t = ev_t[q]
        kind = ev_k[q]
        if kind == EXCHANGE:
            b = ev_s[q] - 1
            for i in (b, b + 1):
                acc[i] += eta[i] * (t - last[i])
                last[i] = t
            eta[b], eta[b + 1] = eta[b + 1], eta[b]
        else:
            i = 0 if kind == LEFT else m - 1
            acc[i] += eta[i] * (t - last[i])
            last[i] = t
            eta[i] = 1 - eta[i]
    for i in range(m):
        acc[i] += eta[i] * (t_end - last[i])
    return acc
