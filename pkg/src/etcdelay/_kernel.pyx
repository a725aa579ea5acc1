# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled integration kernels.

Twin of `_kernel_py`; same algorithms and operation order, C arithmetic.
Keep the two files in sync; any behavioural change must land in both.
"""

import numpy as np

from libc.math cimport sin, cos, exp, log, pow, fabs, floor, isfinite, NAN, INFINITY
from libc.stdlib cimport malloc, free

BACKEND_NAME = "compiled"

DEF OP_CONST = 0
DEF OP_VAR = 1
DEF OP_ADD = 2
DEF OP_SUB = 3
DEF OP_MUL = 4
DEF OP_DIV = 5
DEF OP_NEG = 6
DEF OP_POW = 7
DEF OP_SIN = 8
DEF OP_COS = 9
DEF OP_EXP = 10
DEF OP_LN = 11
DEF OP_ABS = 12


cdef double _eval_prog(const int* ops, const int* args, const double* consts,
                       int nops, double x, double* st) noexcept nogil:
    cdef int i, op, sp = -1
    cdef double d, b, e, v
    for i in range(nops):
        op = ops[i]
        if op == OP_CONST:
            sp += 1
            st[sp] = consts[args[i]]
        elif op == OP_VAR:
            sp += 1
            st[sp] = x
        elif op == OP_ADD:
            sp -= 1
            st[sp] = st[sp] + st[sp + 1]
        elif op == OP_SUB:
            sp -= 1
            st[sp] = st[sp] - st[sp + 1]
        elif op == OP_MUL:
            sp -= 1
            st[sp] = st[sp] * st[sp + 1]
        elif op == OP_DIV:
            sp -= 1
            d = st[sp + 1]
            st[sp] = st[sp] / d if d != 0.0 else NAN
        elif op == OP_NEG:
            st[sp] = -st[sp]
        elif op == OP_POW:
            b = st[sp]
            e = consts[args[i]]
            if b == 0.0 and e < 0.0:
                st[sp] = INFINITY
            else:
                st[sp] = pow(b, e)
        elif op == OP_SIN:
            st[sp] = sin(st[sp])
        elif op == OP_COS:
            st[sp] = cos(st[sp])
        elif op == OP_EXP:
            st[sp] = exp(st[sp])
        elif op == OP_LN:
            v = st[sp]
            st[sp] = log(v) if v > 0.0 else NAN
        elif op == OP_ABS:
            st[sp] = fabs(st[sp])
    return st[0]


def eval_program(ops, args, consts, double x):
    """Run a postfix expression program; returns NaN on any domain error."""
    cdef int[::1] ops_v = np.ascontiguousarray(ops, dtype=np.int32)
    cdef int[::1] args_v = np.ascontiguousarray(args, dtype=np.int32)
    cdef double[::1] consts_v = np.ascontiguousarray(consts, dtype=np.float64)
    cdef int nops = ops_v.shape[0]
    cdef double* st = <double*> malloc((nops + 1) * sizeof(double))
    if st == NULL:
        raise MemoryError()
    try:
        return _eval_prog(&ops_v[0], &args_v[0], &consts_v[0], nops, x, st)
    finally:
        free(st)


cdef int _find_segment(const double* ts, int last, double q) noexcept nogil:
    # largest index j with ts[j] <= q; caller guarantees ts[0] <= q < ts[last]
    cdef int lo = 0, hi = last, mid
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ts[mid] <= q:
            lo = mid
        else:
            hi = mid
    return lo


cdef bint _hist_eval(double q, int n, const double* ts, const double* xs,
                     const double* dl, const double* dr, int n_nodes,
                     int hermite, const double* k1,
                     const int* phi_ops, const int* phi_args, const int* phi_opoff,
                     const double* phi_consts, const int* phi_coff,
                     double* st, double* out) noexcept nogil:
    cdef int i, j, last
    cdef double v, dtq, t0, t1, w, h, w2, w3, c0, c1, c2, c3, x0
    if q <= 0.0:
        for i in range(n):
            v = _eval_prog(phi_ops + phi_opoff[i], phi_args + phi_opoff[i],
                           phi_consts + phi_coff[i], phi_opoff[i + 1] - phi_opoff[i],
                           q, st)
            if not isfinite(v):
                return False
            out[i] = v
        return True
    last = n_nodes - 1
    if q >= ts[last]:
        dtq = q - ts[last]
        for i in range(n):
            out[i] = xs[last * n + i] + dtq * k1[i]
        return True
    j = _find_segment(ts, last, q)
    t0 = ts[j]
    t1 = ts[j + 1]
    w = (q - t0) / (t1 - t0)
    if hermite:
        h = t1 - t0
        w2 = w * w
        w3 = w2 * w
        c0 = 2.0 * w3 - 3.0 * w2 + 1.0
        c1 = (w3 - 2.0 * w2 + w) * h
        c2 = -2.0 * w3 + 3.0 * w2
        c3 = (w3 - w2) * h
        for i in range(n):
            out[i] = (c0 * xs[j * n + i] + c1 * dr[j * n + i]
                      + c2 * xs[(j + 1) * n + i] + c3 * dl[(j + 1) * n + i])
    else:
        for i in range(n):
            x0 = xs[j * n + i]
            out[i] = x0 + w * (xs[(j + 1) * n + i] - x0)
    return True


def simulate_closed_loop(int n, int m, a1, a2, bmat, kgain, pmat, pbk,
                         tau_ops, tau_args, tau_consts,
                         phi_ops, phi_args, phi_opoff, phi_consts, phi_coff,
                         double tau_bar, double alpha, double beta, double sigma,
                         double v0_baseline, double step, double horizon,
                         double event_tol, long max_events, int hermite):
    """Event-triggered closed-loop integration; see `_kernel_py` for the
    algorithm description and the status-code table."""
    cdef double[::1] a1_v = np.ascontiguousarray(a1, dtype=np.float64)
    cdef double[::1] a2_v = np.ascontiguousarray(a2, dtype=np.float64)
    cdef double[::1] b_v = np.ascontiguousarray(bmat, dtype=np.float64)
    cdef double[::1] k_v = np.ascontiguousarray(kgain, dtype=np.float64)
    cdef double[::1] p_v = np.ascontiguousarray(pmat, dtype=np.float64)
    cdef double[::1] pbk_v = np.ascontiguousarray(pbk, dtype=np.float64)
    cdef int[::1] tau_ops_v = np.ascontiguousarray(tau_ops, dtype=np.int32)
    cdef int[::1] tau_args_v = np.ascontiguousarray(tau_args, dtype=np.int32)
    cdef double[::1] tau_consts_v = np.ascontiguousarray(tau_consts, dtype=np.float64)
    cdef int[::1] phi_ops_v = np.ascontiguousarray(phi_ops, dtype=np.int32)
    cdef int[::1] phi_args_v = np.ascontiguousarray(phi_args, dtype=np.int32)
    cdef int[::1] phi_opoff_v = np.ascontiguousarray(phi_opoff, dtype=np.int32)
    cdef double[::1] phi_consts_v = np.ascontiguousarray(phi_consts, dtype=np.float64)
    cdef int[::1] phi_coff_v = np.ascontiguousarray(phi_coff, dtype=np.int32)

    cdef double tau_tol = 1e-12 * max(1.0, tau_bar)
    cdef double tiny = 1e-9 * step

    # growable node buffers
    cdef long cap = <long>(horizon / step) + 64
    cdef long ecap = 256
    ts_arr = np.zeros(cap, dtype=np.float64)
    xs_arr = np.zeros(cap * n, dtype=np.float64)
    dl_arr = np.zeros((cap * n) if hermite else 1, dtype=np.float64)
    dr_arr = np.zeros((cap * n) if hermite else 1, dtype=np.float64)
    ev_t_arr = np.zeros(ecap, dtype=np.float64)
    ev_i_arr = np.zeros(ecap, dtype=np.int64)
    cdef double[::1] ts = ts_arr
    cdef double[::1] xs = xs_arr
    cdef double[::1] dl = dl_arr
    cdef double[::1] dr = dr_arr
    cdef double[::1] ev_t = ev_t_arr
    cdef long[::1] ev_i = ev_i_arr
    cdef long n_nodes = 0, n_ev = 0

    cdef double[::1] x = np.zeros(n, dtype=np.float64)
    cdef double[::1] xn = np.zeros(n, dtype=np.float64)
    cdef double[::1] xstage = np.zeros(n, dtype=np.float64)
    cdef double[::1] xdel = np.zeros(n, dtype=np.float64)
    cdef double[::1] xk = np.zeros(n, dtype=np.float64)
    cdef double[::1] u = np.zeros(m, dtype=np.float64)
    cdef double[::1] k1 = np.zeros(n, dtype=np.float64)
    cdef double[::1] k2 = np.zeros(n, dtype=np.float64)
    cdef double[::1] k3 = np.zeros(n, dtype=np.float64)
    cdef double[::1] k4 = np.zeros(n, dtype=np.float64)
    cdef double[::1] kend = np.zeros(n, dtype=np.float64)

    cdef int stack_size = max(tau_ops_v.shape[0], phi_ops_v.shape[0]) + 1
    cdef double* stck = <double*> malloc(stack_size * sizeof(double))
    if stck == NULL:
        raise MemoryError()

    cdef int status = 0
    cdef double status_time = 0.0
    cdef int zeno_hit = 0
    cdef int st_code, i, j, ok
    cdef long cnt, jj
    cdef double t, tn, h, gi, g_prev, g_new, v, tauv
    cdef double lo, hi, mid, w, w2, w3, c0, c1, c2, c3, te, s

    try:
        # initial state x(0) = phi(0)
        for i in range(n):
            v = _eval_prog(&phi_ops_v[0] + phi_opoff_v[i], &phi_args_v[0] + phi_opoff_v[i],
                           &phi_consts_v[0] + phi_coff_v[i],
                           phi_opoff_v[i + 1] - phi_opoff_v[i], 0.0, stck)
            if not isfinite(v):
                return (4, 0.0, ts_arr[:0], xs_arr[:0], dl_arr[:0], dr_arr[:0],
                        ev_t_arr[:0], ev_i_arr[:0], 0)
            x[i] = v
            xk[i] = v
        for i in range(m):
            s = 0.0
            for j in range(n):
                s += k_v[i * n + j] * xk[j]
            u[i] = s
        ts[0] = 0.0
        for i in range(n):
            xs[i] = x[i]
        n_nodes = 1
        ev_t[0] = 0.0
        ev_i[0] = 0
        n_ev = 1
        if hermite:
            st_code = _rhs(0.0, &x[0], &kend[0], n, m, &a1_v[0], &a2_v[0], &b_v[0], &u[0],
                           &tau_ops_v[0], &tau_args_v[0], &tau_consts_v[0], tau_ops_v.shape[0],
                           tau_tol, tau_bar, &ts[0], &xs[0], &dl[0], &dr[0], n_nodes, hermite,
                           &k1[0], &phi_ops_v[0], &phi_args_v[0], &phi_opoff_v[0],
                           &phi_consts_v[0], &phi_coff_v[0], stck, &xdel[0])
            if st_code:
                return (st_code, 0.0, ts_arr[:0], xs_arr[:0], dl_arr[:0], dr_arr[:0],
                        ev_t_arr[:0], ev_i_arr[:0], 0)
            for i in range(n):
                dl[i] = kend[i]
                dr[i] = kend[i]
        g_prev = _trig(0.0, &x[0], &xk[0], n, &pbk_v[0], &p_v[0], sigma, alpha, beta, v0_baseline)

        t = 0.0
        while horizon - t > tiny:
            gi = floor(t / step) + 1.0
            tn = gi * step
            if tn - t < tiny:
                tn = (gi + 1.0) * step
            if tn > horizon:
                tn = horizon
            h = tn - t

            st_code = _rhs(t, &x[0], &k1[0], n, m, &a1_v[0], &a2_v[0], &b_v[0], &u[0],
                           &tau_ops_v[0], &tau_args_v[0], &tau_consts_v[0], tau_ops_v.shape[0],
                           tau_tol, tau_bar, &ts[0], &xs[0], &dl[0], &dr[0], n_nodes, hermite,
                           &k1[0], &phi_ops_v[0], &phi_args_v[0], &phi_opoff_v[0],
                           &phi_consts_v[0], &phi_coff_v[0], stck, &xdel[0])
            if st_code == 0:
                for i in range(n):
                    xstage[i] = x[i] + 0.5 * h * k1[i]
                st_code = _rhs(t + 0.5 * h, &xstage[0], &k2[0], n, m, &a1_v[0], &a2_v[0], &b_v[0], &u[0],
                               &tau_ops_v[0], &tau_args_v[0], &tau_consts_v[0], tau_ops_v.shape[0],
                               tau_tol, tau_bar, &ts[0], &xs[0], &dl[0], &dr[0], n_nodes, hermite,
                               &k1[0], &phi_ops_v[0], &phi_args_v[0], &phi_opoff_v[0],
                               &phi_consts_v[0], &phi_coff_v[0], stck, &xdel[0])
            if st_code == 0:
                for i in range(n):
                    xstage[i] = x[i] + 0.5 * h * k2[i]
                st_code = _rhs(t + 0.5 * h, &xstage[0], &k3[0], n, m, &a1_v[0], &a2_v[0], &b_v[0], &u[0],
                               &tau_ops_v[0], &tau_args_v[0], &tau_consts_v[0], tau_ops_v.shape[0],
                               tau_tol, tau_bar, &ts[0], &xs[0], &dl[0], &dr[0], n_nodes, hermite,
                               &k1[0], &phi_ops_v[0], &phi_args_v[0], &phi_opoff_v[0],
                               &phi_consts_v[0], &phi_coff_v[0], stck, &xdel[0])
            if st_code == 0:
                for i in range(n):
                    xstage[i] = x[i] + h * k3[i]
                st_code = _rhs(tn, &xstage[0], &k4[0], n, m, &a1_v[0], &a2_v[0], &b_v[0], &u[0],
                               &tau_ops_v[0], &tau_args_v[0], &tau_consts_v[0], tau_ops_v.shape[0],
                               tau_tol, tau_bar, &ts[0], &xs[0], &dl[0], &dr[0], n_nodes, hermite,
                               &k1[0], &phi_ops_v[0], &phi_args_v[0], &phi_opoff_v[0],
                               &phi_consts_v[0], &phi_coff_v[0], stck, &xdel[0])
            if st_code:
                status = st_code
                status_time = t
                break
            ok = 1
            for i in range(n):
                xn[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if not isfinite(xn[i]):
                    ok = 0
            g_new = _trig(tn, &xn[0], &xk[0], n, &pbk_v[0], &p_v[0], sigma, alpha, beta, v0_baseline) if ok else NAN
            if not ok or not isfinite(g_new):
                status = 2
                status_time = tn
                break

            if hermite:
                st_code = _rhs(tn, &xn[0], &kend[0], n, m, &a1_v[0], &a2_v[0], &b_v[0], &u[0],
                               &tau_ops_v[0], &tau_args_v[0], &tau_consts_v[0], tau_ops_v.shape[0],
                               tau_tol, tau_bar, &ts[0], &xs[0], &dl[0], &dr[0], n_nodes, hermite,
                               &k1[0], &phi_ops_v[0], &phi_args_v[0], &phi_opoff_v[0],
                               &phi_consts_v[0], &phi_coff_v[0], stck, &xdel[0])
                if st_code:
                    status = st_code
                    status_time = tn
                    break

            # buffer growth (never affects arithmetic)
            if n_nodes + 1 >= cap:
                cap *= 2
                tmp = np.zeros(cap, dtype=np.float64)
                tmp[:n_nodes] = ts_arr[:n_nodes]
                ts_arr = tmp
                ts = ts_arr
                tmp = np.zeros(cap * n, dtype=np.float64)
                tmp[:n_nodes * n] = xs_arr[:n_nodes * n]
                xs_arr = tmp
                xs = xs_arr
                if hermite:
                    tmp = np.zeros(cap * n, dtype=np.float64)
                    tmp[:n_nodes * n] = dl_arr[:n_nodes * n]
                    dl_arr = tmp
                    dl = dl_arr
                    tmp = np.zeros(cap * n, dtype=np.float64)
                    tmp[:n_nodes * n] = dr_arr[:n_nodes * n]
                    dr_arr = tmp
                    dr = dr_arr

            if g_prev < 0.0 <= g_new:
                # localize the threshold crossing on the step interpolant
                lo = t
                hi = tn
                while hi - lo > event_tol:
                    mid = 0.5 * (lo + hi)
                    w = (mid - t) / h
                    if hermite:
                        w2 = w * w
                        w3 = w2 * w
                        c0 = 2.0 * w3 - 3.0 * w2 + 1.0
                        c1 = (w3 - 2.0 * w2 + w) * h
                        c2 = -2.0 * w3 + 3.0 * w2
                        c3 = (w3 - w2) * h
                        for i in range(n):
                            xstage[i] = c0 * x[i] + c1 * k1[i] + c2 * xn[i] + c3 * kend[i]
                    else:
                        for i in range(n):
                            xstage[i] = x[i] + w * (xn[i] - x[i])
                    if _trig(mid, &xstage[0], &xk[0], n, &pbk_v[0], &p_v[0], sigma, alpha, beta, v0_baseline) >= 0.0:
                        hi = mid
                    else:
                        lo = mid
                te = hi
                w = (te - t) / h
                if hermite:
                    w2 = w * w
                    w3 = w2 * w
                    c0 = 2.0 * w3 - 3.0 * w2 + 1.0
                    c1 = (w3 - 2.0 * w2 + w) * h
                    c2 = -2.0 * w3 + 3.0 * w2
                    c3 = (w3 - w2) * h
                    for i in range(n):
                        xstage[i] = c0 * x[i] + c1 * k1[i] + c2 * xn[i] + c3 * kend[i]
                else:
                    for i in range(n):
                        xstage[i] = x[i] + w * (xn[i] - x[i])
                ts[n_nodes] = te
                for i in range(n):
                    xs[n_nodes * n + i] = xstage[i]
                if hermite:
                    st_code = _rhs(te, &xstage[0], &kend[0], n, m, &a1_v[0], &a2_v[0], &b_v[0], &u[0],
                                   &tau_ops_v[0], &tau_args_v[0], &tau_consts_v[0], tau_ops_v.shape[0],
                                   tau_tol, tau_bar, &ts[0], &xs[0], &dl[0], &dr[0], n_nodes, hermite,
                                   &k1[0], &phi_ops_v[0], &phi_args_v[0], &phi_opoff_v[0],
                                   &phi_consts_v[0], &phi_coff_v[0], stck, &xdel[0])
                    if st_code:
                        status = st_code
                        status_time = te
                        break
                    for i in range(n):
                        dl[n_nodes * n + i] = kend[i]
                n_nodes += 1
                for i in range(n):
                    x[i] = xstage[i]
                    xk[i] = xstage[i]
                for i in range(m):
                    s = 0.0
                    for j in range(n):
                        s += k_v[i * n + j] * xk[j]
                    u[i] = s
                if hermite:
                    st_code = _rhs(te, &x[0], &kend[0], n, m, &a1_v[0], &a2_v[0], &b_v[0], &u[0],
                                   &tau_ops_v[0], &tau_args_v[0], &tau_consts_v[0], tau_ops_v.shape[0],
                                   tau_tol, tau_bar, &ts[0], &xs[0], &dl[0], &dr[0], n_nodes, hermite,
                                   &k1[0], &phi_ops_v[0], &phi_args_v[0], &phi_opoff_v[0],
                                   &phi_consts_v[0], &phi_coff_v[0], stck, &xdel[0])
                    if st_code:
                        status = st_code
                        status_time = te
                        break
                    for i in range(n):
                        dr[(n_nodes - 1) * n + i] = kend[i]
                if n_ev >= ecap:
                    ecap *= 2
                    tmp = np.zeros(ecap, dtype=np.float64)
                    tmp[:n_ev] = ev_t_arr[:n_ev]
                    ev_t_arr = tmp
                    ev_t = ev_t_arr
                    tmp = np.zeros(ecap, dtype=np.int64)
                    tmp[:n_ev] = ev_i_arr[:n_ev]
                    ev_i_arr = tmp
                    ev_i = ev_i_arr
                ev_t[n_ev] = te
                ev_i[n_ev] = n_nodes - 1
                n_ev += 1
                cnt = 0
                jj = n_ev - 1
                while jj >= 0 and ev_t[jj] > te - 1.0:
                    cnt += 1
                    jj -= 1
                if cnt > max_events:
                    zeno_hit = 1
                    status = 1
                    status_time = te
                    break
                t = te
                g_prev = _trig(te, &x[0], &xk[0], n, &pbk_v[0], &p_v[0], sigma, alpha, beta, v0_baseline)
            else:
                ts[n_nodes] = tn
                for i in range(n):
                    xs[n_nodes * n + i] = xn[i]
                if hermite:
                    for i in range(n):
                        dl[n_nodes * n + i] = kend[i]
                        dr[n_nodes * n + i] = kend[i]
                n_nodes += 1
                for i in range(n):
                    x[i] = xn[i]
                t = tn
                g_prev = g_new
    finally:
        free(stck)

    return (status, status_time,
            ts_arr[:n_nodes].copy(),
            xs_arr[:n_nodes * n].copy(),
            dl_arr[:n_nodes * n].copy() if hermite else dl_arr[:0],
            dr_arr[:n_nodes * n].copy() if hermite else dr_arr[:0],
            ev_t_arr[:n_ev].copy(),
            ev_i_arr[:n_ev].copy(),
            zeno_hit)


cdef int _rhs(double t_stage, const double* xin, double* dx, int n, int m,
              const double* a1, const double* a2, const double* bmat, const double* u,
              const int* tau_ops, const int* tau_args, const double* tau_consts, int tau_nops,
              double tau_tol, double tau_bar,
              const double* ts, const double* xs, const double* dl, const double* dr,
              long n_nodes, int hermite, const double* k1,
              const int* phi_ops, const int* phi_args, const int* phi_opoff,
              const double* phi_consts, const int* phi_coff,
              double* stck, double* xdel) noexcept nogil:
    cdef int i, j
    cdef double s, tauv
    tauv = _eval_prog(tau_ops, tau_args, tau_consts, tau_nops, t_stage, stck)
    if not isfinite(tauv):
        return 4
    if tauv < -tau_tol or tauv > tau_bar + tau_tol:
        return 3
    if not _hist_eval(t_stage - tauv, n, ts, xs, dl, dr, <int>n_nodes, hermite, k1,
                      phi_ops, phi_args, phi_opoff, phi_consts, phi_coff, stck, xdel):
        return 4
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += a1[i * n + j] * xin[j]
        for j in range(n):
            s += a2[i * n + j] * xdel[j]
        for j in range(m):
            s += bmat[i * m + j] * u[j]
        dx[i] = s
    return 0


cdef double _trig(double t_at, const double* xin, const double* xk, int n,
                  const double* pbk, const double* pmat,
                  double sigma, double alpha, double beta, double v0_baseline) noexcept nogil:
    cdef int i, j
    cdef double c = 0.0, q = 0.0, row
    for i in range(n):
        row = 0.0
        for j in range(n):
            row += pbk[i * n + j] * (xk[j] - xin[j])
        c += xin[i] * row
    c = 2.0 * c
    for i in range(n):
        row = 0.0
        for j in range(n):
            row += pmat[i * n + j] * xin[j]
        q += xin[i] * row
    return c - sigma * q - alpha * v0_baseline * exp(-beta * t_at)


def integrate_comparison(double a, double b, double alpha, double beta,
                         double r, double v0, double step, double horizon):
    """Worst-case scalar delay inequality integrated as an equality; see
    `_kernel_py.integrate_comparison`."""
    cdef long cap = <long>(horizon / step) + 64
    ts_arr = np.zeros(cap, dtype=np.float64)
    vs_arr = np.zeros(cap, dtype=np.float64)
    cdef double[::1] ts = ts_arr
    cdef double[::1] vs = vs_arr
    cdef long n_nodes = 1
    ts[0] = 0.0
    vs[0] = v0

    cdef double tiny = 1e-9 * step
    cdef int status = 0
    cdef double status_time = 0.0
    cdef double t = 0.0, v = v0
    cdef double gi, tn, h, k1, k2, k3, k4, vn

    while horizon - t > tiny:
        gi = floor(t / step) + 1.0
        tn = gi * step
        if tn - t < tiny:
            tn = (gi + 1.0) * step
        if tn > horizon:
            tn = horizon
        h = tn - t
        k1 = _comparison_rhs(t, v, a, b, alpha, beta, r, v0, &ts[0], &vs[0], n_nodes)
        k2 = _comparison_rhs(t + 0.5 * h, v + 0.5 * h * k1, a, b, alpha, beta, r, v0, &ts[0], &vs[0], n_nodes)
        k3 = _comparison_rhs(t + 0.5 * h, v + 0.5 * h * k2, a, b, alpha, beta, r, v0, &ts[0], &vs[0], n_nodes)
        k4 = _comparison_rhs(tn, v + h * k3, a, b, alpha, beta, r, v0, &ts[0], &vs[0], n_nodes)
        vn = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not isfinite(vn):
            status = 2
            status_time = tn
            break
        if n_nodes >= cap:
            cap *= 2
            tmp = np.zeros(cap, dtype=np.float64)
            tmp[:n_nodes] = ts_arr[:n_nodes]
            ts_arr = tmp
            ts = ts_arr
            tmp = np.zeros(cap, dtype=np.float64)
            tmp[:n_nodes] = vs_arr[:n_nodes]
            vs_arr = tmp
            vs = vs_arr
        ts[n_nodes] = tn
        vs[n_nodes] = vn
        n_nodes += 1
        t = tn
        v = vn

    return (status, status_time, ts_arr[:n_nodes].copy(), vs_arr[:n_nodes].copy())


cdef double _comparison_rhs(double s, double v, double a, double b,
                            double alpha, double beta, double r, double v0,
                            const double* ts, const double* vs, long n_nodes) noexcept nogil:
    cdef double left = s - r
    cdef double m, w
    cdef long last = n_nodes - 1, j
    if left <= 0.0:
        m = v0
    else:
        if left >= ts[last]:
            m = vs[last]
        else:
            j = _find_segment(ts, <int>last, left)
            w = (left - ts[j]) / (ts[j + 1] - ts[j])
            m = vs[j] + w * (vs[j + 1] - vs[j])
    j = last
    while j >= 0 and ts[j] > left:
        if vs[j] > m:
            m = vs[j]
        j -= 1
    return -a * v + b * m + alpha * v0 * exp(-beta * s)
