"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``.

Kept operation-for-operation identical to the Cython code so that either
backend produces bit-identical output from the same inputs.
"""

import heapq
import math

import numpy as np


def dijkstra(indptr, nbr, eid, weights, allowed, source, stop_at=-1):
    n = len(indptr) - 1
    indptr = indptr.tolist()
    nbr = nbr.tolist()
    eid = eid.tolist()
    w = weights.tolist()
    ok = allowed.tolist()
    dist = [math.inf] * n
    done = [False] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    limit = math.inf
    have_limit = False
    while heap:
        d, v = heapq.heappop(heap)
        if have_limit and d > limit:
            break
        if done[v]:
            continue
        done[v] = True
        if v == stop_at:
            have_limit = True
            limit = d
        for k in range(indptr[v], indptr[v + 1]):
            e = eid[k]
            if not ok[e]:
                continue
            u = nbr[k]
            if done[u]:
                continue
            nd = d + w[e]
            if nd < dist[u]:
                dist[u] = nd
                heapq.heappush(heap, (nd, u))
    return np.array(dist)


def _count_near(xs, ys, x, y, d2, skip):
    dx = xs - x
    dy = ys - y
    near = dx * dx + dy * dy < d2
    if 0 <= skip < len(near):
        near[skip] = False
    return int(np.count_nonzero(near))


def gibbs_fixed_n(pts, u, gamma, d, x_lo, x_hi, y_lo, y_hi, step):
    n = pts.shape[0]
    if n == 0:
        return 0
    d2 = d * d
    xs = pts[:, 0].copy()
    ys = pts[:, 1].copy()
    accepted = 0
    for row in u.tolist():
        i = int(row[0] * n)
        if i >= n:
            i = n - 1
        rad = step * math.sqrt(row[1])
        ang = 2.0 * math.pi * row[2]
        nx = float(xs[i]) + rad * math.cos(ang)
        ny = float(ys[i]) + rad * math.sin(ang)
        if nx < x_lo or nx > x_hi or ny < y_lo or ny > y_hi:
            continue
        t_new = _count_near(xs, ys, nx, ny, d2, i)
        if gamma == 0.0:
            if t_new > 0:
                continue
        else:
            t_old = _count_near(xs, ys, xs[i], ys[i], d2, i)
            ratio = math.pow(gamma, float(t_new - t_old))
            if not (row[3] < ratio):
                continue
        xs[i] = nx
        ys[i] = ny
        accepted += 1
    pts[:, 0] = xs
    pts[:, 1] = ys
    return accepted


def gibbs_birth_death_move(init, u, beta, gamma, d, x_lo, x_hi, y_lo, y_hi,
                           p_birth, p_death, step):
    cap = init.shape[0] + u.shape[0] + 1
    xs = np.empty(cap)
    ys = np.empty(cap)
    n = init.shape[0]
    xs[:n] = init[:, 0]
    ys[:n] = init[:, 1]
    d2 = d * d
    for row in u.tolist():
        mv = row[0]
        if mv < p_birth:
            bx = x_lo + row[1] * (x_hi - x_lo)
            by = y_lo + row[2] * (y_hi - y_lo)
            t = _count_near(xs[:n], ys[:n], bx, by, d2, -1)
            if gamma == 0.0:
                if t > 0:
                    continue
                gpow = 1.0
            else:
                gpow = math.pow(gamma, float(t))
            ratio = (beta * gpow * p_death) / ((n + 1) * p_birth)
            if row[4] < ratio:
                xs[n] = bx
                ys[n] = by
                n += 1
        elif mv < p_birth + p_death:
            if n == 0:
                continue
            i = int(row[3] * n)
            if i >= n:
                i = n - 1
            t = _count_near(xs[:n], ys[:n], xs[i], ys[i], d2, i)
            if gamma == 0.0:
                gpow = 1.0
            else:
                gpow = math.pow(gamma, float(t))
            ratio = (n * p_birth) / (beta * gpow * p_death)
            if row[4] < ratio:
                xs[i] = xs[n - 1]
                ys[i] = ys[n - 1]
                n -= 1
        else:
            if n == 0:
                continue
            i = int(row[3] * n)
            if i >= n:
                i = n - 1
            rad = step * math.sqrt(row[1])
            ang = 2.0 * math.pi * row[2]
            nx = float(xs[i]) + rad * math.cos(ang)
            ny = float(ys[i]) + rad * math.sin(ang)
            if nx < x_lo or nx > x_hi or ny < y_lo or ny > y_hi:
                continue
            t_new = _count_near(xs[:n], ys[:n], nx, ny, d2, i)
            if gamma == 0.0:
                if t_new > 0:
                    continue
            else:
                t_old = _count_near(xs[:n], ys[:n], xs[i], ys[i], d2, i)
                ratio = math.pow(gamma, float(t_new - t_old))
                if not (row[4] < ratio):
                    continue
            xs[i] = nx
            ys[i] = ny
    return np.column_stack([xs[:n], ys[:n]])
