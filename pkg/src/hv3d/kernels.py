"""Hot inner loops, each in a numba-compiled and a pure-numpy flavour.

The public names (``filter_valid``, ``sad_block_disparity``, ``block_ssim``)
dispatch to the compiled kernel unless numba is missing or disabled through
``HV3D_DISABLE_NUMBA``. Both flavours accumulate in the same order where the
result is floating point, so they agree to rounding (usually bit for bit).
"""
import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "filter_valid",
    "sad_block_disparity",
    "block_ssim",
    "shift_order",
    "BACKEND",
]


def shift_order(search_range):
    """Candidate shifts in tie-break order: 0, -1, +1, -2, +2, ..."""
    order = [0]
    for s in range(1, search_range + 1):
        order.extend((-s, s))
    return np.asarray(order, dtype=np.int64)


# ---------------------------------------------------------------------------
# separable "valid" correlation
# ---------------------------------------------------------------------------


def filter_valid_numpy(x, k):
    n = k.shape[0]
    h, w = x.shape
    ow, oh = w - n + 1, h - n + 1
    tmp = k[0] * x[:, 0:ow]
    for t in range(1, n):
        tmp = tmp + k[t] * x[:, t : t + ow]
    out = k[0] * tmp[0:oh, :]
    for t in range(1, n):
        out = out + k[t] * tmp[t : t + oh, :]
    return out


@njit
def filter_valid_numba(x, k):
    n = k.shape[0]
    h, w = x.shape
    ow, oh = w - n + 1, h - n + 1
    tmp = np.empty((h, ow))
    for i in range(h):
        for j in range(ow):
            acc = k[0] * x[i, j]
            for t in range(1, n):
                acc = acc + k[t] * x[i, j + t]
            tmp[i, j] = acc
    out = np.empty((oh, ow))
    for i in range(oh):
        for j in range(ow):
            acc = k[0] * tmp[i, j]
            for t in range(1, n):
                acc = acc + k[t] * tmp[i + t, j]
            out[i, j] = acc
    return out


# ---------------------------------------------------------------------------
# full-search SAD block matching
# ---------------------------------------------------------------------------


def sad_block_disparity_numpy(left, right, block_size, search_range):
    h, w = left.shape
    nby, nbx = h // block_size, w // block_size
    hh, ww = nby * block_size, nbx * block_size
    lc = left[:hh, :ww]
    best_cost = np.full((nby, nbx), np.inf)
    best = np.zeros((nby, nbx), dtype=np.int64)
    shifted = np.empty((hh, ww))
    for d in shift_order(search_range):
        # right-view pixel for left x sits at x - d
        shifted.fill(np.nan)
        lo, hi = max(0, d), min(ww, w + d)
        if lo >= hi:
            continue
        shifted[:, lo:hi] = right[:hh, lo - d : hi - d]
        diff = np.abs(lc - shifted)
        cost = diff.reshape(nby, block_size, nbx, block_size).sum(axis=(1, 3))
        better = cost < best_cost
        best_cost[better] = cost[better]
        best[better] = d
    return best


@njit
def sad_block_disparity_numba(left, right, block_size, search_range):
    h, w = left.shape
    nby, nbx = h // block_size, w // block_size
    best = np.zeros((nby, nbx), dtype=np.int64)
    n_cand = 2 * search_range + 1
    order = np.empty(n_cand, dtype=np.int64)
    order[0] = 0
    for s in range(1, search_range + 1):
        order[2 * s - 1] = -s
        order[2 * s] = s
    for by in range(nby):
        y0 = by * block_size
        for bx in range(nbx):
            x0 = bx * block_size
            best_cost = np.inf
            best_d = 0
            for c in range(n_cand):
                d = order[c]
                xr = x0 - d
                if xr < 0 or xr + block_size > w:
                    continue
                cost = 0.0
                for i in range(block_size):
                    for j in range(block_size):
                        cost += abs(left[y0 + i, x0 + j] - right[y0 + i, xr + j])
                if cost < best_cost:
                    best_cost = cost
                    best_d = d
            best[by, bx] = best_d
    return best


# ---------------------------------------------------------------------------
# single-window SSIM over a stack of flattened blocks
# ---------------------------------------------------------------------------


def block_ssim_numpy(x, y, c1, c2):
    mx = x.mean(axis=1)
    my = y.mean(axis=1)
    dx = x - mx[:, None]
    dy = y - my[:, None]
    vx = (dx * dx).mean(axis=1)
    vy = (dy * dy).mean(axis=1)
    cxy = (dx * dy).mean(axis=1)
    return ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))


@njit
def block_ssim_numba(x, y, c1, c2):
    n, m = x.shape
    out = np.empty(n)
    for b in range(n):
        sx = 0.0
        sy = 0.0
        for t in range(m):
            sx += x[b, t]
            sy += y[b, t]
        mx = sx / m
        my = sy / m
        vx = 0.0
        vy = 0.0
        cxy = 0.0
        for t in range(m):
            ex = x[b, t] - mx
            ey = y[b, t] - my
            vx += ex * ex
            vy += ey * ey
            cxy += ex * ey
        vx /= m
        vy /= m
        cxy /= m
        out[b] = ((2 * mx * my + c1) * (2 * cxy + c2)) / (
            (mx * mx + my * my + c1) * (vx + vy + c2)
        )
    return out


def _as_f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


if USE_NUMBA:
    BACKEND = "numba"
    _filter_valid = filter_valid_numba
    _sad = sad_block_disparity_numba
    _block_ssim = block_ssim_numba
else:
    BACKEND = "numpy"
    _filter_valid = filter_valid_numpy
    _sad = sad_block_disparity_numpy
    _block_ssim = block_ssim_numpy


def filter_valid(x, k):
    """Separable 'valid'-mode correlation of a 2-D array with a 1-D kernel.

    Rows are filtered first, then columns. Output shape is
    ``(h - n + 1, w - n + 1)`` for a kernel of length ``n``.
    """
    return _filter_valid(_as_f64(x), _as_f64(k))


def sad_block_disparity(left, right, block_size, search_range):
    """Per-block integer disparity by exhaustive SAD search.

    A positive value ``d`` means the block at ``x`` in ``left`` matches the
    block at ``x - d`` in ``right``. Candidates that leave the right plane
    are skipped; ties go to the smallest ``|d|``, then to the negative side.
    """
    return _sad(_as_f64(left), _as_f64(right), int(block_size), int(search_range))


def block_ssim(x, y, c1, c2):
    """SSIM of each row of ``x`` against the same row of ``y`` (one window per row)."""
    return _block_ssim(_as_f64(x), _as_f64(y), float(c1), float(c2))
