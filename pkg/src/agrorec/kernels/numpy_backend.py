"""Vectorized numpy implementations of the hot kernels.

These are the fallback path when numba is unavailable or disabled via
``AGROREC_NUMBA=0``. Each function is numerically identical to its numba
twin in ``numba_backend``: split scores are built from exact integer
count arithmetic and the SMO update uses the same expression trees, so the
two backends produce bit-identical models.
"""

from __future__ import annotations

import numpy as np


def split_scan(values: np.ndarray, labels: np.ndarray, n_classes: int):
    """Best axis-aligned split over the given feature columns.

    Scans every midpoint between consecutive distinct sorted values of every
    column and maximizes the Gini decrease. The score maximized is
    ``sum_c(left_c^2)/n_left + sum_c(right_c^2)/n_right``, a monotone
    transform of the weighted Gini decrease that stays in exact integer
    arithmetic until the final two divisions.

    Returns ``(col, threshold, best_score, parent_score)`` where ``col`` is
    the index into the columns of ``values`` (-1 when no split reduces
    impurity). Ties break toward the lower column index, then the lower
    threshold.
    """
    n, m = values.shape
    total = np.zeros(n_classes, dtype=np.int64)
    np.add.at(total, labels, 1)
    s_total = int(np.einsum("i,i->", total, total))
    parent_score = s_total / n

    best_col = -1
    best_thr = np.nan
    best_score = parent_score

    eye = np.eye(n_classes, dtype=np.int64)
    for j in range(m):
        v = values[:, j]
        order = np.argsort(v)
        sv = v[order]
        if sv[0] == sv[n - 1]:
            continue
        cum = np.cumsum(eye[labels[order]], axis=0)
        cl = cum[:-1]
        cr = total[np.newaxis, :] - cl
        sl = np.einsum("ij,ij->i", cl, cl)
        sr = np.einsum("ij,ij->i", cr, cr)
        nl = np.arange(1, n, dtype=np.int64)
        score = sl / nl + sr / (n - nl)
        score = np.where(sv[:-1] < sv[1:], score, -np.inf)
        i = int(np.argmax(score))
        sc = float(score[i])
        if sc > best_score:
            best_score = sc
            best_col = j
            best_thr = (sv[i] + sv[i + 1]) / 2.0
    return best_col, best_thr, best_score, parent_score


def tree_route(feature: np.ndarray, threshold: np.ndarray, left: np.ndarray,
               right: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Route every row of ``x`` to its leaf; returns leaf node indices."""
    n = x.shape[0]
    node = np.zeros(n, dtype=np.int64)
    while True:
        f = feature[node]
        rows = np.nonzero(f >= 0)[0]
        if rows.size == 0:
            return node
        cur = node[rows]
        go_left = x[rows, f[rows]] <= threshold[cur]
        node[rows] = np.where(go_left, left[cur], right[cur])


def _dual_objective(alpha: np.ndarray, y: np.ndarray, gram: np.ndarray) -> float:
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ (gram @ ay))


def smo_solve(gram: np.ndarray, y: np.ndarray, c: float, tol: float,
              max_passes: int, obj_out: np.ndarray):
    """Pairwise dual ascent on the soft-margin SVM dual.

    Sweeps all points; the first multiplier violating its KKT condition is
    paired with the point of maximal error gap, with an in-order fallback
    when that pair cannot make progress. ``obj_out`` (possibly empty) is
    filled with the dual objective after each accepted step.

    Returns ``(alpha, b, sweeps, converged, n_recorded)``.
    """
    n = gram.shape[0]
    alpha = np.zeros(n)
    f_cache = np.zeros(n)  # sum_q alpha_q y_q K(x_q, x), without the bias
    b = 0.0
    n_rec = 0
    cap = obj_out.shape[0]

    def take_step(i: int, j: int):
        nonlocal b, n_rec
        if i == j:
            return False
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
            return False
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
            # Flat or concave direction: move to the better interval end.
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
                return False
        if abs(ajn - aj) < 1e-12 * (ajn + aj + 1e-12):
            return False
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
        f_cache[:] = f_cache + (di * gram[i] + dj * gram[j])
        alpha[i] = ain
        alpha[j] = ajn
        b = bn
        if cap > 0 and n_rec < cap:
            obj_out[n_rec] = _dual_objective(alpha, y, gram)
            n_rec += 1
        return True

    sweeps = 0
    while sweeps < max_passes:
        sweeps += 1
        changed = 0
        for i in range(n):
            ei = f_cache[i] + b - y[i]
            r = ei * y[i]
            if (r < -tol and alpha[i] < c) or (r > tol and alpha[i] > 0.0):
                err = f_cache + b - y
                j = int(np.argmax(np.abs(ei - err)))
                if take_step(i, j):
                    changed += 1
                    continue
                for j2 in range(n):
                    if j2 != i and j2 != j and take_step(i, j2):
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
