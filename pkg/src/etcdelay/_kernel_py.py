"""Pure-Python integration kernels.

Fallback twin of the compiled `_kernel` extension: same algorithms, same
operation order, scalar arithmetic throughout, so results agree with the
compiled kernels to the last bit on typical platforms.  Keep the two files
in sync; any behavioural change must land in both.

Status codes returned by the integrators:
    0  completed to the horizon
    1  stopped by the Zeno guard (event count per unit window exceeded)
    2  state became non-finite (divergence)
    3  delay function left [0, tau_bar]
    4  delay/initial-function expression hit a domain error
"""

import math

import numpy as np

BACKEND_NAME = "python"

_NAN = float("nan")
_INF = float("inf")

# Opcodes; must match expr.py.
_CONST, _VAR, _ADD, _SUB, _MUL, _DIV, _NEG, _POW = 0, 1, 2, 3, 4, 5, 6, 7
_SIN, _COS, _EXP, _LN, _ABS = 8, 9, 10, 11, 12


def _floats(a):
    # native Python floats: numpy scalars are slower and warn on overflow
    return np.asarray(a, dtype=np.float64).tolist()


def _ints(a):
    return np.asarray(a, dtype=np.int64).tolist()


def eval_program(ops, args, consts, x):
    """Run a postfix expression program; returns NaN on any domain error."""
    return _run_program(_ints(ops), _ints(args), _floats(consts), float(x))


def _run_program(ops, args, consts, x):
    st = [0.0] * (len(ops) + 1)
    sp = -1
    for i in range(len(ops)):
        op = ops[i]
        if op == _CONST:
            sp += 1
            st[sp] = consts[args[i]]
        elif op == _VAR:
            sp += 1
            st[sp] = x
        elif op == _ADD:
            sp -= 1
            st[sp] = st[sp] + st[sp + 1]
        elif op == _SUB:
            sp -= 1
            st[sp] = st[sp] - st[sp + 1]
        elif op == _MUL:
            sp -= 1
            st[sp] = st[sp] * st[sp + 1]
        elif op == _DIV:
            sp -= 1
            d = st[sp + 1]
            st[sp] = st[sp] / d if d != 0.0 else _NAN
        elif op == _NEG:
            st[sp] = -st[sp]
        elif op == _POW:
            b = st[sp]
            e = consts[args[i]]
            if b == 0.0 and e < 0.0:
                st[sp] = _INF
            else:
                try:
                    st[sp] = math.pow(b, e)
                except (ValueError, OverflowError):
                    st[sp] = _NAN
        elif op == _SIN:
            st[sp] = math.sin(st[sp])
        elif op == _COS:
            st[sp] = math.cos(st[sp])
        elif op == _EXP:
            v = st[sp]
            try:
                st[sp] = math.exp(v)
            except OverflowError:
                st[sp] = _INF
        elif op == _LN:
            v = st[sp]
            st[sp] = math.log(v) if v > 0.0 else _NAN
        elif op == _ABS:
            st[sp] = abs(st[sp])
    return st[0]


def _find_segment(ts, q):
    # largest index j with ts[j] <= q; caller guarantees ts[0] <= q < ts[-1]
    lo = 0
    hi = len(ts) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ts[mid] <= q:
            lo = mid
        else:
            hi = mid
    return lo


def _hist_eval(q, n, ts, xs, dl, dr, hermite, k1,
               phi_ops, phi_args, phi_opoff, phi_consts, phi_coff, out):
    """Delayed-state lookup: initial function for q <= 0, stored-solution
    interpolation otherwise.  Queries past the newest node extrapolate to
    first order along k1 (happens only when the delay nearly vanishes).
    Returns False if an initial-function evaluation hit a domain error."""
    if q <= 0.0:
        for i in range(n):
            v = _run_program(
                phi_ops[phi_opoff[i]:phi_opoff[i + 1]],
                phi_args[phi_opoff[i]:phi_opoff[i + 1]],
                phi_consts[phi_coff[i]:phi_coff[i + 1]],
                q,
            )
            if not math.isfinite(v):
                return False
            out[i] = v
        return True
    last = len(ts) - 1
    if q >= ts[last]:
        dtq = q - ts[last]
        for i in range(n):
            out[i] = xs[last * n + i] + dtq * k1[i]
        return True
    j = _find_segment(ts, q)
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


def simulate_closed_loop(n, m, a1, a2, bmat, kgain, pmat, pbk,
                         tau_ops, tau_args, tau_consts,
                         phi_ops, phi_args, phi_opoff, phi_consts, phi_coff,
                         tau_bar, alpha, beta, sigma, v0_baseline,
                         step, horizon, event_tol, max_events, hermite):
    """Event-triggered closed-loop integration of the linear delay system.

    Fixed-step RK4 between trigger events; the threshold-crossing time is
    localized by bisection on the step interpolant, the held input is
    refreshed there and integration restarts from the localized time.

    Returns (status, status_time, times, states_flat, dl_flat, dr_flat,
    event_times, event_indices, zeno_hit).
    """
    a1 = _floats(a1)
    a2 = _floats(a2)
    bmat = _floats(bmat)
    kgain = _floats(kgain)
    pmat = _floats(pmat)
    pbk = _floats(pbk)
    tau_ops = _ints(tau_ops)
    tau_args = _ints(tau_args)
    tau_consts = _floats(tau_consts)
    phi_ops = _ints(phi_ops)
    phi_args = _ints(phi_args)
    phi_opoff = _ints(phi_opoff)
    phi_consts = _floats(phi_consts)
    phi_coff = _ints(phi_coff)

    tau_tol = 1e-12 * max(1.0, tau_bar)
    tiny = 1e-9 * step

    ts = []
    xs = []
    dl = []
    dr = []
    ev_t = []
    ev_i = []

    x = [0.0] * n
    xn = [0.0] * n
    xstage = [0.0] * n
    xdel = [0.0] * n
    xk = [0.0] * n
    u = [0.0] * m
    k1 = [0.0] * n
    k2 = [0.0] * n
    k3 = [0.0] * n
    k4 = [0.0] * n
    kend = [0.0] * n

    status = 0
    status_time = 0.0
    zeno_hit = 0

    def pack():
        return (status, status_time,
                np.asarray(ts, dtype=np.float64),
                np.asarray(xs, dtype=np.float64),
                np.asarray(dl, dtype=np.float64),
                np.asarray(dr, dtype=np.float64),
                np.asarray(ev_t, dtype=np.float64),
                np.asarray(ev_i, dtype=np.int64),
                zeno_hit)

    def rhs(t_stage, xin, dx):
        # dx <- A1 xin + A2 x(t - tau(t)) + B u ; returns error status or 0
        tauv = _run_program(tau_ops, tau_args, tau_consts, t_stage)
        if not math.isfinite(tauv):
            return 4
        if tauv < -tau_tol or tauv > tau_bar + tau_tol:
            return 3
        if not _hist_eval(t_stage - tauv, n, ts, xs, dl, dr, hermite, k1,
                          phi_ops, phi_args, phi_opoff, phi_consts, phi_coff, xdel):
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

    def trig(t_at, xin):
        # C(x, eps) - zeta(t) with eps = xk - x
        c = 0.0
        for i in range(n):
            row = 0.0
            for j in range(n):
                row += pbk[i * n + j] * (xk[j] - xin[j])
            c += xin[i] * row
        c = 2.0 * c
        q = 0.0
        for i in range(n):
            row = 0.0
            for j in range(n):
                row += pmat[i * n + j] * xin[j]
            q += xin[i] * row
        return c - sigma * q - alpha * v0_baseline * math.exp(-beta * t_at)

    def update_input():
        for i in range(m):
            s = 0.0
            for j in range(n):
                s += kgain[i * n + j] * xk[j]
            u[i] = s

    def commit(t_node, x_node):
        ts.append(t_node)
        for i in range(n):
            xs.append(x_node[i])

    # initial state x(0) = phi(0)
    for i in range(n):
        v = _run_program(phi_ops[phi_opoff[i]:phi_opoff[i + 1]],
                         phi_args[phi_opoff[i]:phi_opoff[i + 1]],
                         phi_consts[phi_coff[i]:phi_coff[i + 1]], 0.0)
        if not math.isfinite(v):
            status = 4
            return pack()
        x[i] = v
        xk[i] = v
    update_input()
    commit(0.0, x)
    ev_t.append(0.0)
    ev_i.append(0)
    if hermite:
        st = rhs(0.0, x, kend)
        if st:
            status = st
            return pack()
        dl.extend(kend)
        dr.extend(kend)
    g_prev = trig(0.0, x)

    t = 0.0
    while horizon - t > tiny:
        gi = math.floor(t / step) + 1.0
        tn = gi * step
        if tn - t < tiny:
            tn = (gi + 1.0) * step
        if tn > horizon:
            tn = horizon
        h = tn - t

        st = rhs(t, x, k1)
        if st:
            status = st
            status_time = t
            return pack()
        for i in range(n):
            xstage[i] = x[i] + 0.5 * h * k1[i]
        st = rhs(t + 0.5 * h, xstage, k2)
        if st == 0:
            for i in range(n):
                xstage[i] = x[i] + 0.5 * h * k2[i]
            st = rhs(t + 0.5 * h, xstage, k3)
        if st == 0:
            for i in range(n):
                xstage[i] = x[i] + h * k3[i]
            st = rhs(tn, xstage, k4)
        if st:
            status = st
            status_time = t
            return pack()
        ok = True
        for i in range(n):
            xn[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if not math.isfinite(xn[i]):
                ok = False
        g_new = trig(tn, xn) if ok else _NAN
        if not ok or not math.isfinite(g_new):
            status = 2
            status_time = tn
            return pack()

        if hermite:
            st = rhs(tn, xn, kend)
            if st:
                status = st
                status_time = tn
                return pack()

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
                if trig(mid, xstage) >= 0.0:
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
            if hermite:
                st = rhs(te, xstage, kend)  # left derivative, held input still old
                if st:
                    status = st
                    status_time = te
                    return pack()
            commit(te, xstage)
            if hermite:
                dl.extend(kend)
            for i in range(n):
                x[i] = xstage[i]
                xk[i] = xstage[i]
            update_input()
            if hermite:
                st = rhs(te, x, kend)  # right derivative under the new input
                if st:
                    status = st
                    status_time = te
                    return pack()
                dr.extend(kend)
            ev_t.append(te)
            ev_i.append(len(ts) - 1)
            cnt = 0
            j = len(ev_t) - 1
            while j >= 0 and ev_t[j] > te - 1.0:
                cnt += 1
                j -= 1
            if cnt > max_events:
                zeno_hit = 1
                status = 1
                status_time = te
                return pack()
            t = te
            g_prev = trig(te, x)
        else:
            commit(tn, xn)
            if hermite:
                dl.extend(kend)
                dr.extend(kend)
            for i in range(n):
                x[i] = xn[i]
            t = tn
            g_prev = g_new

    return pack()


def integrate_comparison(a, b, alpha, beta, r, v0, step, horizon):
    """Integrate the worst-case scalar delay inequality as an equality:

        v'(t) = -a v(t) + b * sup{v(s) : t-r <= s <= t} + alpha*v0*exp(-beta*t)

    with constant history v = v0 on [-r, 0].  The sup is taken over stored
    grid nodes plus the interpolated window edge, so its resolution is the
    integration grid.  Returns (status, status_time, times, values).
    """
    ts = [0.0]
    vs = [v0]
    tiny = 1e-9 * step
    status = 0
    status_time = 0.0

    def window_sup(s):
        left = s - r
        if left <= 0.0:
            m = v0
        else:
            last = len(ts) - 1
            if left >= ts[last]:
                m = vs[last]
            else:
                j = _find_segment(ts, left)
                w = (left - ts[j]) / (ts[j + 1] - ts[j])
                m = vs[j] + w * (vs[j + 1] - vs[j])
        j = len(ts) - 1
        while j >= 0 and ts[j] > left:
            if vs[j] > m:
                m = vs[j]
            j -= 1
        return m

    def rhs(s, v):
        return -a * v + b * window_sup(s) + alpha * v0 * math.exp(-beta * s)

    t = 0.0
    v = v0
    while horizon - t > tiny:
        gi = math.floor(t / step) + 1.0
        tn = gi * step
        if tn - t < tiny:
            tn = (gi + 1.0) * step
        if tn > horizon:
            tn = horizon
        h = tn - t
        k1 = rhs(t, v)
        k2 = rhs(t + 0.5 * h, v + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, v + 0.5 * h * k2)
        k4 = rhs(tn, v + h * k3)
        vn = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(vn):
            status = 2
            status_time = tn
            break
        ts.append(tn)
        vs.append(vn)
        t = tn
        v = vn

    return (status, status_time,
            np.asarray(ts, dtype=np.float64),
            np.asarray(vs, dtype=np.float64))
