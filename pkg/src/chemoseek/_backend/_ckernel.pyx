# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernels: hot RK4 loops of the simulator.

Bit-compatible twin of ``_pykernel``: expressions are evaluated in the
same order, the square-wave draw uses the same SplitMix64 finalizer, and
the extension is compiled with FP contraction off. The GIL is released
around the stepping loops so Monte-Carlo repetitions can run on threads.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, isfinite

cnp.import_array()

cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO64 = 5.421010862427522e-20  # 2**-64


cdef inline double _q_eval(int kind, double omega, double a,
                           unsigned long long seed, double t) nogil:
    cdef long long k
    cdef unsigned long long z
    if kind == 0:
        return 0.0
    if kind == 2:
        return a
    k = <long long>floor(t * omega)
    z = seed ^ (<unsigned long long>k * GOLDEN)
    z = z + GOLDEN
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    z = z ^ (z >> 31)
    return a * (2.0 * (<double>z * TWO64) - 1.0)


cdef inline double _mu_eval(int kind, double p0, double p1, double p2,
                            double[::1] sg, double[::1] mg, double s) nogil:
    cdef Py_ssize_t lo, hi, mid, i, top
    cdef double slope
    if kind == 0:
        return p0 * s / (p1 + s + s * s / p2)
    if kind == 1:
        return p0 * s / (p1 + s)
    # piecewise-linear table, bisect_right segment lookup
    lo = 0
    hi = sg.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if s < sg[mid]:
            hi = mid
        else:
            lo = mid + 1
    i = lo - 1
    top = sg.shape[0] - 2
    if i < 0:
        i = 0
    elif i > top:
        i = top
    slope = (mg[i + 1] - mg[i]) / (sg[i + 1] - sg[i])
    return mg[i] + slope * (s - sg[i])


def run_continuous(gcode, double s_in, double G1, double G2, double eps,
                   double Dmin, double Dmax, double s_lo, double s_hi,
                   double s0, double b0, double D0, double sb0,
                   double dt, long n_steps, long sample_every,
                   long delay_steps, ncode, double t0=0.0):
    """Integrate the full continuous extremum-seeking loop (see _pykernel)."""
    cdef int gkind = gcode[0]
    cdef double p0 = gcode[1], p1 = gcode[2], p2 = gcode[3]
    cdef double[::1] sg = np.ascontiguousarray(gcode[4], dtype=np.float64)
    cdef double[::1] mg = np.ascontiguousarray(gcode[5], dtype=np.float64)
    cdef int nkind = ncode[0]
    cdef double omega = ncode[1], amp = ncode[2]
    cdef unsigned long long seed = ncode[3]

    cdef double h2 = 0.5 * dt
    cdef double h6 = dt / 6.0
    cdef long cap = delay_steps + 1
    cdef cnp.ndarray hD_arr = np.full(cap, D0, dtype=np.float64)
    cdef cnp.ndarray hsb_arr = np.full(cap, sb0, dtype=np.float64)
    cdef double[::1] hist_D = hD_arr
    cdef double[::1] hist_sb = hsb_arr

    cdef long n_rows = n_steps // sample_every + 1
    cdef cnp.ndarray traj_arr = np.empty((n_rows, 8), dtype=np.float64)
    cdef double[:, ::1] traj = traj_arr
    cdef long row = 0

    cdef double s = s0, b = b0, D = D0, sb = sb0
    cdef int status = 0
    cdef double t_bad = 0.0
    cdef long k, j
    cdef double t, Dt, sbt, y, u, xi, m, arg
    cdef double d1s, d1b, d1D, d1sb, d2s, d2b, d2D, d2sb
    cdef double d3s, d3b, d3D, d3sb, d4s, d4b, d4D, d4sb
    cdef double ss, bs, Ds, sbs

    with nogil:
        for k in range(n_steps):
            t = t0 + k * dt
            j = k - delay_steps if k >= delay_steps else 0
            Dt = hist_D[j % cap]
            sbt = hist_sb[j % cap]

            # stage 1 (also the recorded sample)
            y = s * (1.0 + _q_eval(nkind, omega, amp, seed, t))
            xi = D - G1 * (y - sb)
            u = Dmax if xi > Dmax else (Dmin if xi < Dmin else xi)
            m = _mu_eval(gkind, p0, p1, p2, sg, mg, s)
            d1s = -m * b + u * (s_in - s)
            d1b = m * b - u * b
            d1D = -G2 * (y - sb) * (D - Dmin) * (Dmax - D)
            arg = (D * (s_in - sb) - Dt * (s_in - sbt)) * (sb - sbt)
            d1sb = eps if arg >= 0.0 else -eps
            if (sb >= s_hi and d1sb > 0.0) or (sb <= s_lo and d1sb < 0.0):
                d1sb = 0.0
            if k % sample_every == 0:
                traj[row, 0] = t
                traj[row, 1] = s
                traj[row, 2] = b
                traj[row, 3] = y
                traj[row, 4] = u
                traj[row, 5] = D
                traj[row, 6] = sb
                traj[row, 7] = D * (s_in - sb)
                row += 1

            # stage 2
            ss = s + h2 * d1s; bs = b + h2 * d1b; Ds = D + h2 * d1D; sbs = sb + h2 * d1sb
            y = ss * (1.0 + _q_eval(nkind, omega, amp, seed, t + h2))
            xi = Ds - G1 * (y - sbs)
            u = Dmax if xi > Dmax else (Dmin if xi < Dmin else xi)
            m = _mu_eval(gkind, p0, p1, p2, sg, mg, ss)
            d2s = -m * bs + u * (s_in - ss)
            d2b = m * bs - u * bs
            d2D = -G2 * (y - sbs) * (Ds - Dmin) * (Dmax - Ds)
            arg = (Ds * (s_in - sbs) - Dt * (s_in - sbt)) * (sbs - sbt)
            d2sb = eps if arg >= 0.0 else -eps
            if (sbs >= s_hi and d2sb > 0.0) or (sbs <= s_lo and d2sb < 0.0):
                d2sb = 0.0

            # stage 3
            ss = s + h2 * d2s; bs = b + h2 * d2b; Ds = D + h2 * d2D; sbs = sb + h2 * d2sb
            y = ss * (1.0 + _q_eval(nkind, omega, amp, seed, t + h2))
            xi = Ds - G1 * (y - sbs)
            u = Dmax if xi > Dmax else (Dmin if xi < Dmin else xi)
            m = _mu_eval(gkind, p0, p1, p2, sg, mg, ss)
            d3s = -m * bs + u * (s_in - ss)
            d3b = m * bs - u * bs
            d3D = -G2 * (y - sbs) * (Ds - Dmin) * (Dmax - Ds)
            arg = (Ds * (s_in - sbs) - Dt * (s_in - sbt)) * (sbs - sbt)
            d3sb = eps if arg >= 0.0 else -eps
            if (sbs >= s_hi and d3sb > 0.0) or (sbs <= s_lo and d3sb < 0.0):
                d3sb = 0.0

            # stage 4
            ss = s + dt * d3s; bs = b + dt * d3b; Ds = D + dt * d3D; sbs = sb + dt * d3sb
            y = ss * (1.0 + _q_eval(nkind, omega, amp, seed, t + dt))
            xi = Ds - G1 * (y - sbs)
            u = Dmax if xi > Dmax else (Dmin if xi < Dmin else xi)
            m = _mu_eval(gkind, p0, p1, p2, sg, mg, ss)
            d4s = -m * bs + u * (s_in - ss)
            d4b = m * bs - u * bs
            d4D = -G2 * (y - sbs) * (Ds - Dmin) * (Dmax - Ds)
            arg = (Ds * (s_in - sbs) - Dt * (s_in - sbt)) * (sbs - sbt)
            d4sb = eps if arg >= 0.0 else -eps
            if (sbs >= s_hi and d4sb > 0.0) or (sbs <= s_lo and d4sb < 0.0):
                d4sb = 0.0

            s = s + h6 * (d1s + 2.0 * d2s + 2.0 * d3s + d4s)
            b = b + h6 * (d1b + 2.0 * d2b + 2.0 * d3b + d4b)
            D = D + h6 * (d1D + 2.0 * d2D + 2.0 * d3D + d4D)
            sb = sb + h6 * (d1sb + 2.0 * d2sb + 2.0 * d3sb + d4sb)

            if not (isfinite(s) and isfinite(b) and isfinite(D) and isfinite(sb)):
                status = 1
                t_bad = t0 + (k + 1) * dt
                break

            hist_D[(k + 1) % cap] = D
            hist_sb[(k + 1) % cap] = sb

    if status:
        return traj_arr[:row].copy(), (s, b, D, sb), status, t_bad

    if n_steps % sample_every == 0:
        t = t0 + n_steps * dt
        j = n_steps - delay_steps if n_steps >= delay_steps else 0
        y = s * (1.0 + _q_eval(nkind, omega, amp, seed, t))
        xi = D - G1 * (y - sb)
        u = Dmax if xi > Dmax else (Dmin if xi < Dmin else xi)
        traj[row, 0] = t
        traj[row, 1] = s
        traj[row, 2] = b
        traj[row, 3] = y
        traj[row, 4] = u
        traj[row, 5] = D
        traj[row, 6] = sb
        traj[row, 7] = D * (s_in - sb)
        row += 1

    return traj_arr[:row], (s, b, D, sb), status, t_bad


def run_single_param(gcode, double s_in, double G1, double Dmin, double Dmax,
                     double vbar, double s0, double b0, double dt,
                     long n_steps, ncode, double t0=0.0):
    """Integrate the plant under u = sat(vbar - G1*y) (see _pykernel)."""
    cdef int gkind = gcode[0]
    cdef double p0 = gcode[1], p1 = gcode[2], p2 = gcode[3]
    cdef double[::1] sg = np.ascontiguousarray(gcode[4], dtype=np.float64)
    cdef double[::1] mg = np.ascontiguousarray(gcode[5], dtype=np.float64)
    cdef int nkind = ncode[0]
    cdef double omega = ncode[1], amp = ncode[2]
    cdef unsigned long long seed = ncode[3]

    cdef double h2 = 0.5 * dt
    cdef double h6 = dt / 6.0

    cdef cnp.ndarray s_out = np.empty(n_steps, dtype=np.float64)
    cdef cnp.ndarray b_out = np.empty(n_steps, dtype=np.float64)
    cdef cnp.ndarray y_out = np.empty(n_steps, dtype=np.float64)
    cdef cnp.ndarray u_out = np.empty(n_steps, dtype=np.float64)
    cdef double[::1] s_arr = s_out
    cdef double[::1] b_arr = b_out
    cdef double[::1] y_arr = y_out
    cdef double[::1] u_arr = u_out

    cdef double s = s0, b = b0
    cdef int status = 0
    cdef double t_bad = 0.0
    cdef long k, filled = 0
    cdef double t, y, u, xi, m
    cdef double d1s, d1b, d2s, d2b, d3s, d3b, d4s, d4b, ss, bs

    with nogil:
        for k in range(n_steps):
            t = t0 + k * dt

            y = s * (1.0 + _q_eval(nkind, omega, amp, seed, t))
            xi = vbar - G1 * y
            u = Dmax if xi > Dmax else (Dmin if xi < Dmin else xi)
            m = _mu_eval(gkind, p0, p1, p2, sg, mg, s)
            d1s = -m * b + u * (s_in - s)
            d1b = m * b - u * b
            s_arr[k] = s
            b_arr[k] = b
            y_arr[k] = y
            u_arr[k] = u

            ss = s + h2 * d1s; bs = b + h2 * d1b
            y = ss * (1.0 + _q_eval(nkind, omega, amp, seed, t + h2))
            xi = vbar - G1 * y
            u = Dmax if xi > Dmax else (Dmin if xi < Dmin else xi)
            m = _mu_eval(gkind, p0, p1, p2, sg, mg, ss)
            d2s = -m * bs + u * (s_in - ss)
            d2b = m * bs - u * bs

            ss = s + h2 * d2s; bs = b + h2 * d2b
            y = ss * (1.0 + _q_eval(nkind, omega, amp, seed, t + h2))
            xi = vbar - G1 * y
            u = Dmax if xi > Dmax else (Dmin if xi < Dmin else xi)
            m = _mu_eval(gkind, p0, p1, p2, sg, mg, ss)
            d3s = -m * bs + u * (s_in - ss)
            d3b = m * bs - u * bs

            ss = s + dt * d3s; bs = b + dt * d3b
            y = ss * (1.0 + _q_eval(nkind, omega, amp, seed, t + dt))
            xi = vbar - G1 * y
            u = Dmax if xi > Dmax else (Dmin if xi < Dmin else xi)
            m = _mu_eval(gkind, p0, p1, p2, sg, mg, ss)
            d4s = -m * bs + u * (s_in - ss)
            d4b = m * bs - u * bs

            s = s + h6 * (d1s + 2.0 * d2s + 2.0 * d3s + d4s)
            b = b + h6 * (d1b + 2.0 * d2b + 2.0 * d3b + d4b)
            filled = k + 1
            if not (isfinite(s) and isfinite(b)):
                status = 1
                t_bad = t0 + (k + 1) * dt
                break

    if status:
        return (s_out[:filled].copy(), b_out[:filled].copy(),
                y_out[:filled].copy(), u_out[:filled].copy(),
                (s, b), status, t_bad)

    return s_out, b_out, y_out, u_out, (s, b), status, t_bad
