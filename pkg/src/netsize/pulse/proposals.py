"""Proposal distributions of the samplers.

These wrap the compiled helpers used inside the chains so the laws tested
here are the laws the chains run.
"""

import math

import numpy as np

from . import _kernels

__all__ = ["propose_block_count", "propose_pendant_move", "avail"]


def propose_block_count(current, lower_bound, window, rng):
    """Draw uniformly from ``{l, ..., l + 2*window}``, ``l = max(lower_bound, current - window)``."""
    if current < lower_bound:
        raise ValueError("current value lies below the lower bound")
    return int(_kernels.window_draw(int(current), int(lower_bound), int(window), rng.random()))


def avail(y_v, ntilde):
    """Number of ordered pairs ``(i, j)``, ``i != j``, with ``y_i > 0`` and ``y_j < ntilde_j``."""
    return int(_kernels.count_avail(np.asarray(y_v, dtype=np.int64), np.asarray(ntilde, dtype=np.int64)))


def propose_pendant_move(y_v, ntilde, rng):
    """Move one pendant edge of a vertex from a donor block to a receiver block.

    The ordered pair is uniform over the admissible ones.  Returns
    ``(new_y_v, log_ratio)`` where ``log_ratio = log(Avail(old) / Avail(new))``,
    or ``None`` when no pair is admissible.
    """
    y = np.array(y_v, dtype=np.int64)
    nt = np.asarray(ntilde, dtype=np.int64)
    i, j, A = _kernels.pick_pair(y, nt, rng.random())
    if A == 0:
        return None
    y[i] -= 1
    y[j] += 1
    return y, math.log(A) - math.log(avail(y, nt))
