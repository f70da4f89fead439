# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: lattice Dijkstra and Gibbs-process Metropolis-Hastings.

Every routine here has a line-for-line twin in ``_pykernels``; both consume
the same pre-drawn uniforms and perform the same floating-point operations in
the same order, so the two backends return bit-identical results.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, pow, M_PI
from libcpp.queue cimport priority_queue
from libcpp.pair cimport pair

cnp.import_array()

ctypedef pair[double, Py_ssize_t] entry_t


def dijkstra(const cnp.int64_t[::1] indptr,
             const cnp.int64_t[::1] nbr,
             const cnp.int64_t[::1] eid,
             const double[::1] weights,
             const cnp.uint8_t[::1] allowed,
             Py_ssize_t source,
             Py_ssize_t stop_at=-1):
    """Single-source distances over allowed edges.

    With ``stop_at >= 0`` the search halts once every vertex no farther than
    ``stop_at`` has been settled; unsettled vertices keep tentative labels.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    dist_arr = np.full(n, np.inf)
    cdef double[::1] dist = dist_arr
    cdef cnp.uint8_t[::1] done = np.zeros(n, dtype=np.uint8)
    cdef priority_queue[entry_t] heap  # max-heap; keys are negated distances
    cdef entry_t top
    cdef Py_ssize_t v, u, k, e
    cdef double d, nd
    cdef double limit = np.inf
    cdef bint have_limit = False

    dist[source] = 0.0
    heap.push(entry_t(-0.0, source))
    while not heap.empty():
        top = heap.top()
        heap.pop()
        d = -top.first
        v = top.second
        if have_limit and d > limit:
            break
        if done[v]:
            continue
        done[v] = 1
        if v == stop_at:
            have_limit = True
            limit = d
        for k in range(indptr[v], indptr[v + 1]):
            e = eid[k]
            if not allowed[e]:
                continue
            u = nbr[k]
            if done[u]:
                continue
            nd = d + weights[e]
            if nd < dist[u]:
                dist[u] = nd
                heap.push(entry_t(-nd, u))
    return dist_arr


cdef inline Py_ssize_t _count_near(double[:, ::1] pts, Py_ssize_t n,
                                   double x, double y, double d2,
                                   Py_ssize_t skip) nogil:
    cdef Py_ssize_t j, c = 0
    cdef double dx, dy
    for j in range(n):
        if j == skip:
            continue
        dx = pts[j, 0] - x
        dy = pts[j, 1] - y
        if dx * dx + dy * dy < d2:
            c += 1
    return c


def gibbs_fixed_n(double[:, ::1] pts, const double[:, ::1] u,
                  double gamma, double d,
                  double x_lo, double x_hi, double y_lo, double y_hi,
                  double step):
    """Shift-only chain on n-point configurations, updated in place."""
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t n_iter = u.shape[0]
    cdef Py_ssize_t it, i, t_old, t_new
    cdef double d2 = d * d, rad, ang, nx, ny, ratio
    cdef Py_ssize_t accepted = 0
    if n == 0:
        return 0
    for it in range(n_iter):
        i = <Py_ssize_t>(u[it, 0] * n)
        if i >= n:
            i = n - 1
        rad = step * sqrt(u[it, 1])
        ang = 2.0 * M_PI * u[it, 2]
        nx = pts[i, 0] + rad * cos(ang)
        ny = pts[i, 1] + rad * sin(ang)
        if nx < x_lo or nx > x_hi or ny < y_lo or ny > y_hi:
            continue
        t_new = _count_near(pts, n, nx, ny, d2, i)
        if gamma == 0.0:
            if t_new > 0:
                continue
        else:
            t_old = _count_near(pts, n, pts[i, 0], pts[i, 1], d2, i)
            ratio = pow(gamma, <double>(t_new - t_old))
            if not (u[it, 3] < ratio):
                continue
        pts[i, 0] = nx
        pts[i, 1] = ny
        accepted += 1
    return accepted


def gibbs_birth_death_move(const double[:, ::1] init, const double[:, ::1] u,
                           double beta, double gamma, double d,
                           double x_lo, double x_hi, double y_lo, double y_hi,
                           double p_birth, double p_death, double step):
    """Birth/death/shift chain; ``beta`` is the activity over the window."""
    cdef Py_ssize_t n_iter = u.shape[0]
    cdef Py_ssize_t cap = init.shape[0] + n_iter + 1
    buf = np.empty((cap, 2))
    cdef double[:, ::1] pts = buf
    cdef Py_ssize_t n = init.shape[0]
    cdef Py_ssize_t it, i, t, t_old, t_new
    cdef double d2 = d * d, mv, bx, by, ratio, gpow, rad, ang, nx, ny
    for i in range(n):
        pts[i, 0] = init[i, 0]
        pts[i, 1] = init[i, 1]
    for it in range(n_iter):
        mv = u[it, 0]
        if mv < p_birth:
            bx = x_lo + u[it, 1] * (x_hi - x_lo)
            by = y_lo + u[it, 2] * (y_hi - y_lo)
            t = _count_near(pts, n, bx, by, d2, -1)
            if gamma == 0.0:
                if t > 0:
                    continue
                gpow = 1.0
            else:
                gpow = pow(gamma, <double>t)
            ratio = (beta * gpow * p_death) / ((n + 1) * p_birth)
            if u[it, 4] < ratio:
                pts[n, 0] = bx
                pts[n, 1] = by
                n += 1
        elif mv < p_birth + p_death:
            if n == 0:
                continue
            i = <Py_ssize_t>(u[it, 3] * n)
            if i >= n:
                i = n - 1
            t = _count_near(pts, n, pts[i, 0], pts[i, 1], d2, i)
            if gamma == 0.0:
                gpow = 1.0
            else:
                gpow = pow(gamma, <double>t)
            ratio = (n * p_birth) / (beta * gpow * p_death)
            if u[it, 4] < ratio:
                pts[i, 0] = pts[n - 1, 0]
                pts[i, 1] = pts[n - 1, 1]
                n -= 1
        else:
            if n == 0:
                continue
            i = <Py_ssize_t>(u[it, 3] * n)
            if i >= n:
                i = n - 1
            rad = step * sqrt(u[it, 1])
            ang = 2.0 * M_PI * u[it, 2]
            nx = pts[i, 0] + rad * cos(ang)
            ny = pts[i, 1] + rad * sin(ang)
            if nx < x_lo or nx > x_hi or ny < y_lo or ny > y_hi:
                continue
            t_new = _count_near(pts, n, nx, ny, d2, i)
            if gamma == 0.0:
                if t_new > 0:
                    continue
            else:
                t_old = _count_near(pts, n, pts[i, 0], pts[i, 1], d2, i)
                ratio = pow(gamma, <double>(t_new - t_old))
                if not (u[it, 4] < ratio):
                    continue
            pts[i, 0] = nx
            pts[i, 1] = ny
    return buf[:n].copy()
