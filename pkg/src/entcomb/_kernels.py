"""Compiled inner loops for windowed cross-trial neighbor statistics.

The kernel answers, for every time instant n and every trial r: the k-th
nearest max-norm neighbor distance of the query vector (r, n) among all
trials' vectors inside the time window [n-sigma, n+sigma] (query itself
excluded), and for each marginal the strict-radius neighbor count at that
distance (query included). That is exactly the per-point statistic of the
pooled estimator, restricted to a sliding window, so outputs here must
match the linear-scan oracle bit for bit: only abs, max, and compares
touch the floats.

Marginal distances are computed through a small execution plan that
reuses subset marginals (for the conditional measures the shared
target+conditioner block feeds three maxes) and obtains the joint
distance as the max over positive-sign marginals, which the validity
constraint guarantees cover every coordinate. max is exact, so grouping
does not change values.

Each time instant writes only its own output slice, so results are
bitwise identical for any thread count.
"""

from __future__ import annotations

import numpy as np
from numba import config as _numba_config
from numba import njit, prange, set_num_threads

from .errors import ConfigError


def thread_cap() -> int:
    """Largest worker count numba will accept in this process."""
    return int(_numba_config.NUMBA_NUM_THREADS)


def set_threads(n: int) -> int:
    """Clamp and apply a worker cap; returns the effective value."""
    n = int(n)
    if n < 1:
        raise ConfigError(f"thread count must be >= 1, got {n}")
    effective = min(n, thread_cap())
    set_num_threads(effective)
    return effective


@njit(parallel=True, cache=True)
def _window_stats(dt, k, sigma, exflat, exoff, base, posrows, eps_out, cnt_out):
    m, n_trials, n_times = dt.shape
    p = base.size
    npos = posrows.size
    for n in prange(n_times):
        lo = max(n - sigma, 0)
        hi = min(n + sigma, n_times - 1)
        w = hi - lo + 1
        c_total = n_trials * w
        ad = np.empty((m, w))
        md = np.empty((p, c_total))
        jd = np.empty(c_total)
        best = np.empty(k)
        for r in range(n_trials):
            pos = 0
            for r2 in range(n_trials):
                for j in range(m):
                    qj = dt[j, r, n]
                    row = dt[j, r2]
                    for t in range(w):
                        ad[j, t] = abs(qj - row[lo + t])
                for i in range(p):
                    s0 = exoff[i]
                    s1 = exoff[i + 1]
                    b = base[i]
                    if b >= 0:
                        for t in range(w):
                            md[i, pos + t] = md[b, pos + t]
                    else:
                        f0 = exflat[s0]
                        s0 += 1
                        for t in range(w):
                            md[i, pos + t] = ad[f0, t]
                    for jj in range(s0, s1):
                        dm = exflat[jj]
                        for t in range(w):
                            md[i, pos + t] = max(md[i, pos + t], ad[dm, t])
                r0 = posrows[0]
                for t in range(w):
                    jd[pos + t] = md[r0, pos + t]
                for ii in range(1, npos):
                    ri = posrows[ii]
                    for t in range(w):
                        jd[pos + t] = max(jd[pos + t], md[ri, pos + t])
                pos += w
            self_pos = r * w + (n - lo)
            jd[self_pos] = np.inf
            for kk in range(k):
                best[kk] = np.inf
            for c in range(c_total):
                v = jd[c]
                if v < best[k - 1]:
                    idx = k - 1
                    while idx > 0 and best[idx - 1] > v:
                        best[idx] = best[idx - 1]
                        idx -= 1
                    best[idx] = v
            e = best[k - 1]
            eps_out[n, r] = e
            for i in range(p):
                cc = 0
                for c in range(c_total):
                    cc += md[i, c] < e
                cnt_out[n, r, i] = cc


class _Plan:
    """Kernel-ready encoding of a marginal structure."""

    __slots__ = ("exflat", "exoff", "base", "posrows", "to_original")

    def __init__(self, exflat, exoff, base, posrows, to_original):
        self.exflat = exflat
        self.exoff = exoff
        self.base = base
        self.posrows = posrows
        self.to_original = to_original


def build_plan(width: int, marginals, signs) -> _Plan:
    """Order marginals smallest-first and wire up subset reuse."""
    order = sorted(range(len(marginals)), key=lambda i: (len(marginals[i]), i))
    sets = [frozenset(marginals[i]) for i in order]
    covered: set[int] = set()
    for i, sgn in enumerate(signs):
        if sgn > 0:
            covered.update(marginals[i])
    if covered != set(range(width)):
        raise ConfigError(
            "positive marginals must cover every joint coordinate "
            "(invalid combination spec reached the kernel)"
        )
    base = np.full(len(sets), -1, dtype=np.int64)
    extras: list[list[int]] = []
    for i, s in enumerate(sets):
        best_j, best_size = -1, 0
        for j in range(i):
            if sets[j] < s and len(sets[j]) > best_size:
                best_j, best_size = j, len(sets[j])
        base[i] = best_j
        rest = s if best_j < 0 else s - sets[best_j]
        extras.append(sorted(rest))
    exoff = np.zeros(len(sets) + 1, dtype=np.int64)
    for i, ex in enumerate(extras):
        exoff[i + 1] = exoff[i] + len(ex)
    exflat = np.array([c for ex in extras for c in ex], dtype=np.int64)
    posrows = np.array(
        [plan_i for plan_i, orig in enumerate(order) if signs[orig] > 0],
        dtype=np.int64,
    )
    to_original = np.array(order, dtype=np.int64)
    return _Plan(exflat, exoff, base, posrows, to_original)


def window_marginal_stats(data: np.ndarray, width: int, marginals, signs,
                          k: int, sigma: int):
    """Run the kernel over a (trials, times, width) block.

    Returns (eps, counts, n_candidates): eps shaped (times, trials),
    counts shaped (times, trials, n_marginals) in the original marginal
    order, and the per-instant candidate pool size r' * |window|.
    """
    n_trials, n_times, m = data.shape
    if m != width:
        raise ConfigError(f"data width {m} != spec width {width}")
    min_window = min(sigma + 1, n_times)
    if n_trials * min_window < k + 1:
        raise ConfigError(
            f"smallest window holds {n_trials * min_window} candidates, "
            f"need k+1={k + 1}"
        )
    plan = build_plan(width, marginals, signs)
    dt = np.ascontiguousarray(data.transpose(2, 0, 1))
    eps = np.empty((n_times, n_trials))
    cnt_plan = np.empty((n_times, n_trials, len(marginals)), dtype=np.int64)
    _window_stats(dt, k, sigma, plan.exflat, plan.exoff, plan.base,
                  plan.posrows, eps, cnt_plan)
    counts = np.empty_like(cnt_plan)
    counts[:, :, plan.to_original] = cnt_plan
    starts = np.maximum(np.arange(n_times) - sigma, 0)
    stops = np.minimum(np.arange(n_times) + sigma, n_times - 1)
    n_candidates = n_trials * (stops - starts + 1)
    return eps, counts, n_candidates
