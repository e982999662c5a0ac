"""Numba-compiled twins of the numpy kernels.

Same arithmetic, explicit loops. Split scores come from exact integer count
updates, SMO steps use the exact expression trees of the numpy path, so
models built on either backend are bit-identical.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def split_scan(values, labels, n_classes):
    n, m = values.shape
    total = np.zeros(n_classes, dtype=np.int64)
    for i in range(n):
        total[labels[i]] += 1
    s_total = np.int64(0)
    for k in range(n_classes):
        s_total += total[k] * total[k]
    parent_score = s_total / n

    best_col = -1
    best_thr = np.nan
    best_score = parent_score

    counts_l = np.zeros(n_classes, dtype=np.int64)
    counts_r = np.zeros(n_classes, dtype=np.int64)
    for j in range(m):
        v = values[:, j].copy()
        order = np.argsort(v)
        if v[order[0]] == v[order[n - 1]]:
            continue
        for k in range(n_classes):
            counts_l[k] = 0
            counts_r[k] = total[k]
        sl = np.int64(0)
        sr = s_total
        for i in range(n - 1):
            cls = labels[order[i]]
            sl += 2 * counts_l[cls] + 1
            counts_l[cls] += 1
            sr -= 2 * counts_r[cls] - 1
            counts_r[cls] -= 1
            lo = v[order[i]]
            hi = v[order[i + 1]]
            if lo < hi:
                nl = i + 1
                score = sl / nl + sr / (n - nl)
                if score > best_score:
                    best_score = score
                    best_col = j
                    best_thr = (lo + hi) / 2.0
    return best_col, best_thr, best_score, parent_score


@njit(cache=True, nogil=True)
def tree_route(feature, threshold, left, right, x):
    n = x.shape[0]
    node = np.zeros(n, dtype=np.int64)
    for r in range(n):
        nd = 0
        while feature[nd] >= 0:
            if x[r, feature[nd]] <= threshold[nd]:
                nd = left[nd]
            else:
                nd = right[nd]
        node[r] = nd
    return node


@njit(cache=True, nogil=True)
def _dual_objective(alpha, y, gram):
    n = alpha.shape[0]
    lin = 0.0
    quad = 0.0
    for p in range(n):
        lin += alpha[p]
        row = 0.0
        for q in range(n):
            row += alpha[q] * y[q] * gram[p, q]
        quad += alpha[p] * y[p] * row
    return lin - 0.5 * quad


@njit(cache=True, nogil=True)
def _take_step(gram, y, alpha, f_cache, c, i, j, b, obj_out, n_rec):
    if i == j:
        return False, b, n_rec
    ai = alpha[i]
    aj = alpha[j]
    yi = y[i]
    yj = y[j]
    ei = f_cache[i] + b - yi
    ej = f_cache[j] + b - yj
    s = yi * yj
    if s > 0:
        lo = max(0.0, ai + aj - c)
        hi = min(c, ai + aj)
    else:
        lo = max(0.0, aj - ai)
        hi = min(c, c + aj - ai)
    if lo == hi:
        return False, b, n_rec
    kii = gram[i, i]
    kjj = gram[j, j]
    kij = gram[i, j]
    eta = kii + kjj - 2.0 * kij
    if eta > 0.0:
        ajn = aj + yj * (ei - ej) / eta
        if ajn < lo:
            ajn = lo
        elif ajn > hi:
            ajn = hi
    else:
        dj_l = lo - aj
        di_l = -s * dj_l
        w_l = (di_l + dj_l - 0.5 * di_l * di_l * kii - 0.5 * dj_l * dj_l * kjj
               - di_l * dj_l * s * kij - di_l * yi * f_cache[i] - dj_l * yj * f_cache[j])
        dj_h = hi - aj
        di_h = -s * dj_h
        w_h = (di_h + dj_h - 0.5 * di_h * di_h * kii - 0.5 * dj_h * dj_h * kjj
               - di_h * dj_h * s * kij - di_h * yi * f_cache[i] - dj_h * yj * f_cache[j])
        if w_l > w_h + 1e-12:
            ajn = lo
        elif w_h > w_l + 1e-12:
            ajn = hi
        else:
            return False, b, n_rec
    if abs(ajn - aj) < 1e-12 * (ajn + aj + 1e-12):
        return False, b, n_rec
    ain = ai + s * (aj - ajn)
    if ain < 0.0:
        ain = 0.0
    elif ain > c:
        ain = c
    di = yi * (ain - ai)
    dj = yj * (ajn - aj)
    b1 = b - ei - di * kii - dj * kij
    b2 = b - ej - di * kij - dj * kjj
    if 0.0 < ain < c:
        bn = b1
    elif 0.0 < ajn < c:
        bn = b2
    else:
        bn = (b1 + b2) / 2.0
    n_pts = f_cache.shape[0]
    for q in range(n_pts):
        f_cache[q] = f_cache[q] + (di * gram[i, q] + dj * gram[j, q])
    alpha[i] = ain
    alpha[j] = ajn
    if obj_out.shape[0] > 0 and n_rec < obj_out.shape[0]:
        obj_out[n_rec] = _dual_objective(alpha, y, gram)
        n_rec += 1
    return True, bn, n_rec


@njit(cache=True, nogil=True)
def smo_solve(gram, y, c, tol, max_passes, obj_out):
    n = gram.shape[0]
    alpha = np.zeros(n)
    f_cache = np.zeros(n)
    b = 0.0
    n_rec = 0

    sweeps = 0
    while sweeps < max_passes:
        sweeps += 1
        changed = 0
        for i in range(n):
            ei = f_cache[i] + b - y[i]
            r = ei * y[i]
            if (r < -tol and alpha[i] < c) or (r > tol and alpha[i] > 0.0):
                best = -1.0
                j = 0
                for q in range(n):
                    d = abs(ei - (f_cache[q] + b - y[q]))
                    if d > best:
                        best = d
                        j = q
                moved, b, n_rec = _take_step(gram, y, alpha, f_cache, c, i, j, b,
                                             obj_out, n_rec)
                if moved:
                    changed += 1
                    continue
                for j2 in range(n):
                    if j2 != i and j2 != j:
                        moved, b, n_rec = _take_step(gram, y, alpha, f_cache, c, i,
                                                     j2, b, obj_out, n_rec)
                        if moved:
                            changed += 1
                            break
        if changed == 0:
            break

    converged = True
    for i in range(n):
        r = (f_cache[i] + b - y[i]) * y[i]
        if (r < -tol and alpha[i] < c) or (r > tol and alpha[i] > 0.0):
            converged = False
            break
    return alpha, b, sweeps, converged, n_rec
