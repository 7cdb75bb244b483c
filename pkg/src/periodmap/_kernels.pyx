# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: Dormand-Prince 5(4) stepping and cyclic Jacobi.

The state layout shared with the pure-Python fallback is

    [phi, xi, y_1, y_1', ..., y_m, y_m', (Y)]

where ``(phi, xi)`` follows ``phi' = xi, xi' = phi - phi**k``, every
``(y_j, y_j')`` pair follows the linearised equation
``y'' = (1 - k phi**(k-1)) y`` and the optional trailing component ``Y``
accumulates the integral of ``y_1``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, sqrt, fabs, isnan

cnp.import_array()

DEF MAXDIM = 16

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = -71.0 / 57600.0, E3 = 71.0 / 16695.0, E4 = -71.0 / 1920.0
cdef double E5 = 17253.0 / 339200.0, E6 = -22.0 / 525.0, E7 = 1.0 / 40.0

cdef double[7][4] P = [
    [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0],
    [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0],
    [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0],
    [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
     -1453857185.0 / 822651844.0],
    [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0,
     69997945.0 / 29380423.0],
]

# Hairer's DOPRI5 step-size controller constants
cdef double SAFE = 0.9, BETA = 0.04, FACMIN = 0.2, FACMAX = 10.0


cdef struct Field:
    double k
    int nvar
    int nquad
    int dim
    int bad


cdef inline void rhs(double* y, double* f, Field* fld) noexcept nogil:
    cdef double phi = y[0]
    cdef double pk1 = pow(phi, fld.k - 1.0)
    cdef double q
    cdef int j
    if isnan(pk1):
        fld.bad = 1
    f[0] = y[1]
    f[1] = phi - phi * pk1
    q = 1.0 - fld.k * pk1
    for j in range(fld.nvar):
        f[2 + 2 * j] = y[3 + 2 * j]
        f[3 + 2 * j] = q * y[2 + 2 * j]
    if fld.nquad:
        f[2 + 2 * fld.nvar] = y[2]


cdef struct Stepper:
    double K[7][MAXDIM]
    double y[MAXDIM]
    double ynew[MAXDIM]
    double t
    double h
    double facold
    long nsteps
    long nreject


cdef double dp_step(Stepper* st, Field* fld, double h, double rtol,
                    double atol) noexcept nogil:
    """One trial step of size h from st.y; K[0] holds f(y). Returns err norm."""
    cdef int i, n = fld.dim
    cdef double tmp[MAXDIM]
    cdef double err = 0.0, sc, e
    for i in range(n):
        tmp[i] = st.y[i] + h * A21 * st.K[0][i]
    rhs(tmp, st.K[1], fld)
    for i in range(n):
        tmp[i] = st.y[i] + h * (A31 * st.K[0][i] + A32 * st.K[1][i])
    rhs(tmp, st.K[2], fld)
    for i in range(n):
        tmp[i] = st.y[i] + h * (A41 * st.K[0][i] + A42 * st.K[1][i]
                                + A43 * st.K[2][i])
    rhs(tmp, st.K[3], fld)
    for i in range(n):
        tmp[i] = st.y[i] + h * (A51 * st.K[0][i] + A52 * st.K[1][i]
                                + A53 * st.K[2][i] + A54 * st.K[3][i])
    rhs(tmp, st.K[4], fld)
    for i in range(n):
        tmp[i] = st.y[i] + h * (A61 * st.K[0][i] + A62 * st.K[1][i]
                                + A63 * st.K[2][i] + A64 * st.K[3][i]
                                + A65 * st.K[4][i])
    rhs(tmp, st.K[5], fld)
    for i in range(n):
        st.ynew[i] = st.y[i] + h * (B1 * st.K[0][i] + B3 * st.K[2][i]
                                    + B4 * st.K[3][i] + B5 * st.K[4][i]
                                    + B6 * st.K[5][i])
    rhs(st.ynew, st.K[6], fld)
    for i in range(n):
        e = h * (E1 * st.K[0][i] + E3 * st.K[2][i] + E4 * st.K[3][i]
                 + E5 * st.K[4][i] + E6 * st.K[5][i] + E7 * st.K[6][i])
        sc = atol + rtol * max(fabs(st.y[i]), fabs(st.ynew[i]))
        err += (e / sc) * (e / sc)
    return sqrt(err / n)


cdef int advance(Stepper* st, Field* fld, double t_target, double rtol,
                 double atol, long max_steps, int single) noexcept nogil:
    """Adaptive steps until st.t == t_target (or one accepted step if single).

    Returns 0 on success, 1 on step budget exhaustion, 2 on step underflow,
    3 on an undefined power.
    """
    cdef double h, err, fac11, fac, hnew, h_nat
    cdef int i, clipped
    while st.t < t_target:
        if st.nsteps + st.nreject >= max_steps:
            return 1
        h_nat = st.h
        h = st.h
        clipped = 0
        if st.t + h >= t_target:
            h = t_target - st.t
            clipped = 1
        err = dp_step(st, fld, h, rtol, atol)
        if fld.bad:
            return 3
        fac11 = pow(err, 0.2 - BETA * 0.75) if err > 0.0 else 0.0
        if err <= 1.0:
            fac = fac11 / pow(st.facold, BETA)
            fac = max(1.0 / FACMAX, min(1.0 / FACMIN, fac / SAFE))
            hnew = h / fac
            st.facold = max(err, 1.0e-4)
            if clipped:
                st.t = t_target
                hnew = max(hnew, h_nat)
            else:
                st.t = st.t + h
            for i in range(fld.dim):
                st.y[i] = st.ynew[i]
                st.K[0][i] = st.K[6][i]
            st.h = hnew
            st.nsteps += 1
            if single:
                return 0
        else:
            st.h = h / min(1.0 / FACMIN, fac11 / SAFE)
            st.nreject += 1
            if st.h < 1e-14 * max(1.0, fabs(st.t)):
                return 2
    return 0


cdef void dense_eval(Stepper* st, Field* fld, double* yold, double* kold,
                     double h, double theta, double* out) noexcept nogil:
    # K[0] already holds the FSAL stage of the next step; kold is f(yold)
    cdef int i, j
    cdef double q[7]
    cdef double th = theta, th2 = theta * theta
    cdef double th3 = th2 * theta, th4 = th3 * theta
    for j in range(7):
        q[j] = P[j][0] * th + P[j][1] * th2 + P[j][2] * th3 + P[j][3] * th4
    for i in range(fld.dim):
        out[i] = yold[i] + h * kold[i] * q[0]
        for j in range(1, 7):
            out[i] += h * st.K[j][i] * q[j]


cdef void start(Stepper* st, Field* fld, double[::1] y0, double h0) noexcept nogil:
    cdef int i
    for i in range(fld.dim):
        st.y[i] = y0[i]
    rhs(st.y, st.K[0], fld)
    st.t = 0.0
    st.h = h0
    st.facold = 1.0e-4
    st.nsteps = 0
    st.nreject = 0


def _raise_status(int status, double t):
    from .errors import DomainError, NoConvergence
    if status == 1:
        raise NoConvergence(f"step budget exhausted at x={t:.6g}")
    if status == 2:
        raise NoConvergence(f"step size underflow at x={t:.6g}")
    if status == 3:
        raise DomainError("negative base with non-integer exponent")


def propagate(double[::1] y0, double k, int nvar, int nquad,
              double[::1] t_out, double rtol, double atol,
              long max_steps=10_000_000, double h0=1e-3):
    """Integrate from x=0 and return the state at each (increasing) t_out."""
    cdef Field fld
    cdef Stepper st
    cdef int status = 0, i
    cdef Py_ssize_t j, m = t_out.shape[0]
    fld.k = k
    fld.nvar = nvar
    fld.nquad = nquad
    fld.dim = 2 + 2 * nvar + nquad
    fld.bad = 0
    if fld.dim != y0.shape[0] or fld.dim > MAXDIM:
        raise ValueError("state dimension mismatch")
    out = np.empty((m, fld.dim))
    cdef double[:, ::1] o = out
    with nogil:
        start(&st, &fld, y0, h0)
        for j in range(m):
            status = advance(&st, &fld, t_out[j], rtol, atol, max_steps, 0)
            if status:
                break
            for i in range(fld.dim):
                o[j, i] = st.y[i]
    if fld.bad:
        status = 3
    if status:
        _raise_status(status, st.t)
    return out, int(st.nsteps)


def half_period(double[::1] y0, double k, double rtol, double atol,
                double t_min, double t_max, double xtol=1e-14,
                long max_steps=10_000_000, double h0=1e-3):
    """First x > t_min where xi crosses zero upward, started from (b2, 0).

    The crossing is bracketed by accepted steps and located by bisection
    on the step's dense output.
    """
    cdef Field fld
    cdef Stepper st
    cdef int status = 0, i
    cdef double yold[MAXDIM]
    cdef double ymid[MAXDIM]
    cdef double kold[MAXDIM]
    cdef double told, h, lo, hi, mid, t_event = -1.0
    fld.k = k
    fld.nvar = 0
    fld.nquad = 0
    fld.dim = 2
    fld.bad = 0
    with nogil:
        start(&st, &fld, y0, h0)
        while st.t < t_max:
            told = st.t
            for i in range(2):
                yold[i] = st.y[i]
                kold[i] = st.K[0][i]
            status = advance(&st, &fld, t_max, rtol, atol, max_steps, 1)
            if status:
                break
            if st.t > t_min and yold[1] < 0.0 and st.y[1] >= 0.0:
                h = st.t - told
                lo = 0.0
                hi = 1.0
                while (hi - lo) * h > xtol:
                    mid = 0.5 * (lo + hi)
                    if mid <= lo or mid >= hi:
                        break
                    dense_eval(&st, &fld, yold, kold, h, mid, ymid)
                    if ymid[1] < 0.0:
                        lo = mid
                    else:
                        hi = mid
                t_event = told + 0.5 * (lo + hi) * h
                break
    if fld.bad:
        status = 3
    if status:
        _raise_status(status, st.t)
    return t_event, int(st.nsteps)


def jacobi_eigh(double[:, ::1] a, double tol=1e-14, int max_sweeps=100):
    """Cyclic (row-ordered) Jacobi diagonalisation of a symmetric matrix.

    Returns unsorted eigenvalues, eigenvectors as columns, and the number of
    sweeps used (-1 when max_sweeps was exhausted).
    """
    cdef Py_ssize_t n = a.shape[0], p, q, r
    A_arr = np.array(a, dtype=np.float64, order="C")
    Vt_arr = np.eye(n)
    cdef double[:, ::1] A = A_arr
    cdef double[:, ::1] Vt = Vt_arr
    cdef double fro = 0.0, off, apq, app, aqq, theta, t, c, s, tau
    cdef double x, y, thresh
    cdef int sweep, done = -1
    with nogil:
        for p in range(n):
            for q in range(n):
                fro += A[p, q] * A[p, q]
        fro = sqrt(fro)
        for sweep in range(1, max_sweeps + 1):
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    off += 2.0 * A[p, q] * A[p, q]
            if sqrt(off) <= tol * fro:
                done = sweep - 1
                break
            # skip small elements early on; Numerical Recipes threshold
            thresh = 0.2 * sqrt(off) / (n * n) if sweep < 4 else 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    if fabs(apq) <= thresh or apq == 0.0:
                        continue
                    app = A[p, p]
                    aqq = A[q, q]
                    theta = 0.5 * (aqq - app) / apq
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    tau = s / (1.0 + c)
                    for r in range(n):
                        if r == p or r == q:
                            continue
                        x = A[p, r]
                        y = A[q, r]
                        A[p, r] = x - s * (y + tau * x)
                        A[q, r] = y + s * (x - tau * y)
                        A[r, p] = A[p, r]
                        A[r, q] = A[q, r]
                    A[p, p] = app - t * apq
                    A[q, q] = aqq + t * apq
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    for r in range(n):
                        x = Vt[p, r]
                        y = Vt[q, r]
                        Vt[p, r] = x - s * (y + tau * x)
                        Vt[q, r] = y + s * (x - tau * y)
    return np.diag(A_arr).copy(), Vt_arr.T.copy(), done
