"""Compiled inner loops of the samplers.

Every random decision consumes pre-drawn uniforms in [0, 1) supplied by the
caller, so a chain is a pure function of its uniform stream.  Per iteration
the ER kernel reads two uniforms (proposal, acceptance) and the SBM kernel
four (move type, block or vertex, proposal, acceptance).
"""

import math

from numba import njit


@njit(cache=True)
def log_comb(n, k):
    return math.lgamma(n + 1.0) - math.lgamma(k + 1.0) - math.lgamma(n - k + 1.0)


@njit(cache=True)
def log_beta(a, b):
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


@njit(cache=True)
def window_draw(current, lower, window, u):
    lo = max(lower, current - window)
    return lo + int(u * (2 * window + 1))


@njit(cache=True)
def window_contains(origin, target, lower, window):
    """True if ``target`` lies in the proposal window centred at ``origin``."""
    lo = max(lower, origin - window)
    return lo <= target <= lo + 2 * window


@njit(cache=True)
def count_avail(y, ntilde):
    K = y.shape[0]
    donors = 0
    receivers = 0
    both = 0
    for i in range(K):
        d = y[i] > 0
        r = y[i] < ntilde[i]
        donors += d
        receivers += r
        both += d and r
    return donors * receivers - both


@njit(cache=True)
def pick_pair(y, ntilde, u):
    """Uniform ordered pair (donor, receiver) among the admissible ones.

    Returns ``(-1, -1, 0)`` when no pair is admissible.
    """
    A = count_avail(y, ntilde)
    if A == 0:
        return -1, -1, 0
    target = int(u * A)
    c = 0
    K = y.shape[0]
    for i in range(K):
        if y[i] <= 0:
            continue
        for j in range(K):
            if j == i or y[j] >= ntilde[j]:
                continue
            if c == target:
                return i, j, A
            c += 1
    return -1, -1, A


@njit(cache=True)
def er_log_post(nt, dvals, dcounts, u_sum, E, n, alpha, beta):
    s = 0.0
    for k in range(dvals.shape[0]):
        s += dcounts[k] * log_comb(nt, dvals[k])
    pairs = n * (n - 1) / 2.0
    return s + log_beta(E + u_sum + alpha, pairs - E + n * nt - u_sum + beta)


@njit(cache=True)
def er_run(cur, cur_lp, uniforms, it0, dvals, dcounts, u_sum, E, n, alpha, beta,
           lower, ntilde_max, window, exact, burn_in, thin,
           out_nt, out_lp, rec, counters):
    """Advance an ER chain over ``len(uniforms)`` iterations.

    ``counters`` is ``[proposals, accepts]``; ``rec`` holds the next free
    record slot.  Returns the updated ``(cur, cur_lp)``.
    """
    for k in range(uniforms.shape[0]):
        it = it0 + k + 1
        prop = window_draw(cur, lower, window, uniforms[k, 0])
        counters[0] += 1
        ok = prop <= ntilde_max
        if ok and exact:
            ok = window_contains(prop, cur, lower, window)
        if ok:
            if prop == cur:
                counters[1] += 1
            else:
                lp = er_log_post(prop, dvals, dcounts, u_sum, E, n, alpha, beta)
                d = lp - cur_lp
                if d >= 0.0 or uniforms[k, 1] < math.exp(d):
                    cur = prop
                    cur_lp = lp
                    counters[1] += 1
        if it > burn_in and (it - burn_in) % thin == 0:
            r = rec[0]
            out_nt[r] = cur
            out_lp[r] = cur_lp
            rec[0] = r + 1
    return cur, cur_lp


@njit(cache=True)
def sbm_beta_terms(nt, S, V, eta0, theta0):
    """Sum of log-Beta terms of the joint posterior for column sums ``S``.

    ``S[j, i]`` is the number of pendant edges from sampled block-j vertices
    to unsampled block-i vertices.
    """
    K = nt.shape[0]
    s = 0.0
    for i in range(K):
        s += log_beta(eta0[i, i] + S[i, i], theta0[i, i] - S[i, i] + nt[i] * V[i])
        for j in range(i + 1, K):
            sij = S[i, j] + S[j, i]
            s += log_beta(eta0[i, j] + sij, theta0[i, j] - sij + nt[i] * V[j] + nt[j] * V[i])
    return s


@njit(cache=True)
def sbm_log_post(nt, y, lab, S, V, eta0, theta0):
    s = 0.0
    for v in range(y.shape[0]):
        for i in range(nt.shape[0]):
            if y[v, i] > 0:
                s += log_comb(nt[i], y[v, i])
    return s + sbm_beta_terms(nt, S, V, eta0, theta0)


@njit(cache=True)
def sbm_run(nt, y, lab, S, cur_lp, uniforms, it0, V, eta0, theta0, ntilde_max,
            window, update_mix, exact, burn_in, thin,
            out_nt, out_lp, out_ymax, rec, counters):
    """Advance the SBM chain over ``len(uniforms)`` iterations in place.

    ``y`` holds only vertices with positive pendant degree.  ``counters`` is
    ``[nt proposals, nt accepts, y proposals, y accepts, y no-move]``.
    Returns the updated log posterior.
    """
    K = nt.shape[0]
    m = y.shape[0]
    for k in range(uniforms.shape[0]):
        it = it0 + k + 1
        if m == 0 or uniforms[k, 0] < update_mix:
            i = min(int(uniforms[k, 1] * K), K - 1)
            lower = 0
            for v in range(m):
                if y[v, i] > lower:
                    lower = y[v, i]
            old = nt[i]
            prop = window_draw(old, lower, window[i], uniforms[k, 2])
            counters[0] += 1
            ok = prop <= ntilde_max
            if ok and exact:
                ok = window_contains(prop, old, lower, window[i])
            if ok:
                if prop == old:
                    counters[1] += 1
                else:
                    d = -sbm_beta_terms(nt, S, V, eta0, theta0)
                    for v in range(m):
                        yv = y[v, i]
                        if yv > 0:
                            d += log_comb(prop, yv) - log_comb(old, yv)
                    nt[i] = prop
                    d += sbm_beta_terms(nt, S, V, eta0, theta0)
                    if d >= 0.0 or uniforms[k, 3] < math.exp(d):
                        cur_lp += d
                        counters[1] += 1
                    else:
                        nt[i] = old
        else:
            v = min(int(uniforms[k, 1] * m), m - 1)
            i, j, A = pick_pair(y[v], nt, uniforms[k, 2])
            if A == 0:
                counters[4] += 1
            else:
                counters[2] += 1
                t = lab[v]
                yi = y[v, i]
                yj = y[v, j]
                d = (log_comb(nt[i], yi - 1) - log_comb(nt[i], yi)
                     + log_comb(nt[j], yj + 1) - log_comb(nt[j], yj))
                d -= sbm_beta_terms(nt, S, V, eta0, theta0)
                y[v, i] = yi - 1
                y[v, j] = yj + 1
                S[t, i] -= 1
                S[t, j] += 1
                d += sbm_beta_terms(nt, S, V, eta0, theta0)
                A2 = count_avail(y[v], nt)
                d += math.log(A) - math.log(A2)
                if d >= 0.0 or uniforms[k, 3] < math.exp(d):
                    # the Avail ratio is part of the acceptance, not the density
                    cur_lp += d - (math.log(A) - math.log(A2))
                    counters[3] += 1
                else:
                    y[v, i] = yi
                    y[v, j] = yj
                    S[t, i] += 1
                    S[t, j] -= 1
        if it > burn_in and (it - burn_in) % thin == 0:
            r = rec[0]
            for c in range(K):
                out_nt[r, c] = nt[c]
                mx = 0
                for v in range(m):
                    if y[v, c] > mx:
                        mx = y[v, c]
                out_ymax[r, c] = mx
            out_lp[r] = cur_lp
            rec[0] = r + 1
    return cur_lp
