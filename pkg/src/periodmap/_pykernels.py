"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``.

Same signatures, same state layout, same step-size controller; used when
the extension is not built or ``PMAP_PURE_PYTHON=1`` is set.
"""

import math

import numpy as np

from .errors import DomainError, NoConvergence

_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_E = (-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40)
_P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)
_SAFE, _BETA, _FACMIN, _FACMAX = 0.9, 0.04, 0.2, 10.0


def _field(k, nvar, nquad):
    def rhs(y):
        phi = y[0]
        try:
            pk1 = math.pow(phi, k - 1.0)
        except ValueError:
            raise DomainError("negative base with non-integer exponent") from None
        f = [y[1], phi - phi * pk1]
        q = 1.0 - k * pk1
        for j in range(nvar):
            f.append(y[3 + 2 * j])
            f.append(q * y[2 + 2 * j])
        if nquad:
            f.append(y[2])
        return f

    return rhs


class _Stepper:
    def __init__(self, rhs, y0, h0):
        self.rhs = rhs
        self.y = [float(v) for v in y0]
        self.n = len(self.y)
        self.K = [rhs(self.y)] + [None] * 6
        self.t = 0.0
        self.h = h0
        self.facold = 1e-4
        self.nsteps = 0
        self.nreject = 0
        self.ynew = None

    def trial(self, h, rtol, atol):
        y, K, n = self.y, self.K, self.n
        for s in range(1, 6):
            a = _A[s]
            tmp = [y[i] + h * sum(a[j] * K[j][i] for j in range(s)) for i in range(n)]
            K[s] = self.rhs(tmp)
        ynew = [y[i] + h * sum(_B[j] * K[j][i] for j in range(6)) for i in range(n)]
        K[6] = self.rhs(ynew)
        err = 0.0
        for i in range(n):
            e = h * sum(_E[j] * K[j][i] for j in range(7))
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            err += (e / sc) ** 2
        self.ynew = ynew
        return math.sqrt(err / n)

    def advance(self, t_target, rtol, atol, max_steps, single=False):
        while self.t < t_target:
            if self.nsteps + self.nreject >= max_steps:
                raise NoConvergence(f"step budget exhausted at x={self.t:.6g}")
            h_nat = h = self.h
            clipped = False
            if self.t + h >= t_target:
                h = t_target - self.t
                clipped = True
            err = self.trial(h, rtol, atol)
            fac11 = err ** (0.2 - _BETA * 0.75) if err > 0.0 else 0.0
            if err <= 1.0:
                fac = fac11 / self.facold**_BETA
                fac = max(1.0 / _FACMAX, min(1.0 / _FACMIN, fac / _SAFE))
                hnew = h / fac
                self.facold = max(err, 1e-4)
                if clipped:
                    self.t = t_target
                    hnew = max(hnew, h_nat)
                else:
                    self.t += h
                self.y = self.ynew
                self.K[0] = self.K[6]
                self.h = hnew
                self.nsteps += 1
                if single:
                    return
            else:
                self.h = h / min(1.0 / _FACMIN, fac11 / _SAFE)
                self.nreject += 1
                if self.h < 1e-14 * max(1.0, abs(self.t)):
                    raise NoConvergence(f"step size underflow at x={self.t:.6g}")

    def dense(self, yold, kold, h, theta):
        q = [p[0] * theta + p[1] * theta**2 + p[2] * theta**3 + p[3] * theta**4
             for p in _P]
        K = [kold] + self.K[1:]
        return [yold[i] + h * sum(K[j][i] * q[j] for j in range(7))
                for i in range(self.n)]


def propagate(y0, k, nvar, nquad, t_out, rtol, atol, max_steps=10_000_000, h0=1e-3):
    """Integrate from x=0 and return the state at each (increasing) t_out."""
    if len(y0) != 2 + 2 * nvar + nquad:
        raise ValueError("state dimension mismatch")
    st = _Stepper(_field(k, nvar, nquad), y0, h0)
    out = np.empty((len(t_out), len(y0)))
    for j, t in enumerate(t_out):
        st.advance(float(t), rtol, atol, max_steps)
        out[j] = st.y
    return out, st.nsteps


def half_period(y0, k, rtol, atol, t_min, t_max, xtol=1e-14,
                max_steps=10_000_000, h0=1e-3):
    """First x > t_min where xi crosses zero upward, started from (b2, 0)."""
    st = _Stepper(_field(k, 0, 0), y0, h0)
    while st.t < t_max:
        told, yold, kold = st.t, list(st.y), st.K[0]
        st.advance(t_max, rtol, atol, max_steps, single=True)
        if st.t > t_min and yold[1] < 0.0 <= st.y[1]:
            h = st.t - told
            lo, hi = 0.0, 1.0
            while (hi - lo) * h > xtol:
                mid = 0.5 * (lo + hi)
                if not lo < mid < hi:
                    break
                if st.dense(yold, kold, h, mid)[1] < 0.0:
                    lo = mid
                else:
                    hi = mid
            return told + 0.5 * (lo + hi) * h, st.nsteps
    return -1.0, st.nsteps


def jacobi_eigh(a, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi in round-robin (Brent-Luk) order, vectorised with numpy.

    Each round applies n/2 disjoint rotations at once; n-1 rounds make a
    sweep over every off-diagonal pair.
    """
    A = np.array(a, dtype=np.float64)
    n = A.shape[0]
    V = np.eye(n)
    fro = np.linalg.norm(A)
    m = n + (n % 2)
    players = np.arange(m)
    rounds = []
    for _ in range(m - 1):
        p, q = players[: m // 2], players[m // 2:][::-1]
        keep = (p < n) & (q < n)
        p, q = p[keep], q[keep]
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = np.concatenate(([players[0]], np.roll(players[1:], 1)))
    done = -1
    for sweep in range(1, max_sweeps + 1):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * fro:
            done = sweep - 1
            break
        for p, q in rounds:
            apq = A[p, q]
            active = apq != 0.0
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = 0.5 * (A[q, q] - A[p, p]) / apq
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rp, rq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * rp - s[:, None] * rq
            A[q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = cp * c - cq * s
            A[:, q] = cp * s + cq * c
            A[p, q] = 0.0
            A[q, p] = 0.0
            vp, vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = vp * c - vq * s
            V[:, q] = vp * s + vq * c
    return np.diag(A).copy(), V, done
