"""Hot numeric kernels: numba-compiled with a pure-numpy fallback.

Set HOMOG_DISABLE_NUMBA=1 to force the numpy path (read once at import).
The numba path is also skipped automatically when numba is not importable.
Both paths implement the same sums with fixed reduction structure, so each is
deterministic on its own; they agree to ~1e-12 but not bit-for-bit.

benchmarks/bench_accel.py times the two paths against each other.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAVE_NUMBA = False

_flag = os.environ.get("HOMOG_DISABLE_NUMBA", "0").strip().lower()
USE_NUMBA = HAVE_NUMBA and _flag not in ("1", "true", "yes")


# ---------------------------------------------------------------------------
# periodic-remainder evaluation B_per((x - y)/eps), shared helpers
# ---------------------------------------------------------------------------

def _bper_numpy(t, kbp, q0, q1, q2):
    u = t - np.floor(t)
    idx = np.searchsorted(kbp, u, side="right") - 1
    du = u - kbp[idx]
    return q0[idx] + du * (q1[idx] + du * q2[idx])


def _step_eval_numpy(t, kbp, kvals):
    u = t - np.floor(t)
    idx = np.searchsorted(kbp, u, side="right") - 1
    return kvals[idx]


# ---------------------------------------------------------------------------
# exact pair-sum energy: sum_ij w_ij * Int_{I_i x I_j} a((x-y)/eps)
# ---------------------------------------------------------------------------

def pair_energy_numpy(endpoints, lengths, level_idx, wl, kbp, q0, q1, q2, abar, eps, block=512):
    """Blocked numpy evaluation; fixed block size keeps the sum order stable.

    ``level_idx`` maps each interval to a row/column of the small weight
    matrix ``wl`` (one entry per pair of distinct function values), so memory
    stays O(P * block) for P intervals.
    """
    c = endpoints
    P = lengths.shape[0]
    wcols = wl[:, level_idx]  # (L, P)
    area = 0.0
    per = 0.0
    for s in range(0, P, block):
        e = min(s + block, P)
        wblk = wcols[level_idx[s:e], :]  # (e-s, P)
        D = _bper_numpy((c[s : e + 1, None] - c[None, :]) / eps, kbp, q0, q1, q2)
        M = D[1:, :-1] - D[1:, 1:] - D[:-1, :-1] + D[:-1, 1:]
        per += float(np.sum(wblk * M))
        area += float(lengths[s:e] @ (wblk @ lengths))
    return abar * area + eps * eps * per


if HAVE_NUMBA:

    @njit(cache=True)
    def _bper_scalar(t, kbp, q0, q1, q2):
        u = t - np.floor(t)
        m = kbp.shape[0]
        idx = m - 1
        for s in range(m - 1):
            if u < kbp[s + 1]:
                idx = s
                break
        du = u - kbp[idx]
        return q0[idx] + du * (q1[idx] + du * q2[idx])

    @njit(cache=True)
    def pair_energy_numba(endpoints, lengths, level_idx, wl, kbp, q0, q1, q2, abar, eps):
        P = lengths.shape[0]
        area = 0.0
        per = 0.0
        for i in range(P):
            x0 = endpoints[i]
            x1 = endpoints[i + 1]
            li = level_idx[i]
            row_area = 0.0
            row_per = 0.0
            for j in range(P):
                wij = wl[li, level_idx[j]]
                if wij == 0.0:
                    continue
                y0 = endpoints[j]
                y1 = endpoints[j + 1]
                p = (
                    _bper_scalar((x1 - y0) / eps, kbp, q0, q1, q2)
                    - _bper_scalar((x1 - y1) / eps, kbp, q0, q1, q2)
                    - _bper_scalar((x0 - y0) / eps, kbp, q0, q1, q2)
                    + _bper_scalar((x0 - y1) / eps, kbp, q0, q1, q2)
                )
                row_per += wij * p
                row_area += wij * lengths[j]
            area += row_area * lengths[i]
            per += row_per
        return abar * area + eps * eps * per


def pair_energy(endpoints, lengths, level_idx, wl, kbp, q0, q1, q2, abar, eps):
    if USE_NUMBA:
        return pair_energy_numba(endpoints, lengths, level_idx, wl, kbp, q0, q1, q2, abar, eps)
    return pair_energy_numpy(endpoints, lengths, level_idx, wl, kbp, q0, q1, q2, abar, eps)


# ---------------------------------------------------------------------------
# midpoint tensor quadrature: sum_cd a((x_c - x_d)/eps) w[iu_c, iu_d] l_c l_d
# ---------------------------------------------------------------------------

def quadrature_energy_numpy(centers, lengths, iu, w, kbp, kvals, eps, block=256):
    total = 0.0
    C = centers.shape[0]
    for s in range(0, C, block):
        e = min(s + block, C)
        a = _step_eval_numpy((centers[s:e, None] - centers[None, :]) / eps, kbp, kvals)
        wmat = w[iu[s:e][:, None], iu[None, :]]
        rows = (a * wmat) @ lengths
        total += float(rows @ lengths[s:e])
    return total


if HAVE_NUMBA:

    @njit(cache=True)
    def quadrature_energy_numba(centers, lengths, iu, w, kbp, kvals, eps):
        C = centers.shape[0]
        m = kbp.shape[0]
        total = 0.0
        for i in range(C):
            xi = centers[i]
            wi = iu[i]
            row = 0.0
            for j in range(C):
                t = (xi - centers[j]) / eps
                u = t - np.floor(t)
                val = kvals[m - 1]
                for s in range(m - 1):
                    if u < kbp[s + 1]:
                        val = kvals[s]
                        break
                row += val * w[wi, iu[j]] * lengths[j]
            total += row * lengths[i]
        return total


def quadrature_energy(centers, lengths, iu, w, kbp, kvals, eps):
    if USE_NUMBA:
        return quadrature_energy_numba(centers, lengths, iu, w, kbp, kvals, eps)
    return quadrature_energy_numpy(centers, lengths, iu, w, kbp, kvals, eps)


# ---------------------------------------------------------------------------
# exhaustive subset search over the circulant quadratic form
#
# Minimizes s(S) = sum_{i,j in S} row[(j-i) mod n] over k-subsets enumerated
# in lexicographic order; a new subset replaces the incumbent only when it is
# better by more than tie_tol, so among near-ties the lexicographically first
# subset wins in both paths.
# ---------------------------------------------------------------------------

def brute_force_numpy(row, n, k, tie_tol, chunk=4096):
    from itertools import combinations, islice

    best = np.inf
    best_idx = np.arange(k)
    it = combinations(range(n), k)
    while True:
        block = list(islice(it, chunk))
        if not block:
            break
        idx = np.array(block, dtype=np.int64)
        s = np.zeros(len(block))
        for a in range(k):
            for b in range(k):
                s += row[(idx[:, b] - idx[:, a]) % n]
        for pos in np.nonzero(s < best - tie_tol)[0]:
            if s[pos] < best - tie_tol:
                best = float(s[pos])
                best_idx = idx[pos]
    return best, np.asarray(best_idx, dtype=np.int64)


if HAVE_NUMBA:

    @njit(cache=True)
    def brute_force_numba(row, n, k, tie_tol):
        idx = np.arange(k)
        best = np.inf
        best_idx = idx.copy()
        while True:
            s = 0.0
            for a in range(k):
                ia = idx[a]
                for b in range(k):
                    s += row[(idx[b] - ia) % n]
            if s < best - tie_tol:
                best = s
                best_idx[:] = idx
            i = k - 1
            while i >= 0 and idx[i] == i + n - k:
                i -= 1
            if i < 0:
                break
            idx[i] += 1
            for j in range(i + 1, k):
                idx[j] = idx[j - 1] + 1
        return best, best_idx


def brute_force_search(row, n, k, tie_tol):
    if k == 0:
        return 0.0, np.zeros(0, dtype=np.int64)
    if USE_NUMBA:
        return brute_force_numba(row, n, k, tie_tol)
    return brute_force_numpy(row, n, k, tie_tol)
