"""Reference computations that share no code path with the package."""

import math

import numpy as np
from scipy import optimize
from scipy.spatial.transform import Rotation


def haar_samples(n, seed=0):
    """Uniform random rotations from scipy (independent sampler)."""
    return Rotation.random(n, random_state=seed).as_matrix()


def mc_mean(values):
    """Monte-Carlo mean and standard error along axis 0."""
    values = np.asarray(values)
    return values.mean(axis=0), values.std(axis=0, ddof=1) / math.sqrt(values.shape[0])


class MaierSaupeOracle:
    """Axisymmetric reduction of the Maier-Saupe self-consistency.

    With Q1 = diag(q, (1-q)/2, (1-q)/2) and x = m1 . n uniform on [-1, 1],
    f(x) ~ exp(-c2 (3q - 1) x^2 / 2) and q must equal <x^2>.
    """

    def __init__(self, c2, n_nodes=2000):
        self.c2 = c2
        self.x, w = np.polynomial.legendre.leggauss(n_nodes)
        self.w = w / 2.0

    def _density(self, q):
        strength = self.c2 * (3 * q - 1) / 2
        logf = -strength * self.x**2
        logf -= logf.max()
        f = np.exp(logf)
        z = self.w @ f
        return f / z, logf - math.log(z)

    def gap(self, q):
        f, _ = self._density(q)
        return float(self.w @ (f * self.x**2)) - q

    def free_energy(self, q):
        f, logf = self._density(q)
        entropy = float(self.w @ (f * logf))
        return entropy + 0.5 * self.c2 * (q**2 + (1 - q) ** 2 / 2)

    def roots(self, n_scan=4000):
        qs = np.linspace(1e-6, 1 - 1e-9, n_scan)
        g = np.array([self.gap(q) for q in qs])
        out = [1.0 / 3.0]
        for k in range(n_scan - 1):
            if g[k] == 0.0 or g[k] * g[k + 1] < 0:
                r = optimize.bisect(self.gap, qs[k], qs[k + 1], xtol=1e-15, maxiter=200)
                if abs(r - 1.0 / 3.0) > 1e-7:
                    out.append(r)
        return sorted(out)

    def stable(self):
        """(q, F) of the lowest-free-energy root."""
        return min(((q, self.free_energy(q)) for q in self.roots()), key=lambda t: t[1])

    @staticmethod
    def largest_eigenvalue(q):
        return max(q, (1 - q) / 2)


def cmin_by_bisection(c2, c3, c4, hi=1e8):
    """Smallest c >= 0 with both epsilon and its swapped form >= 2, by bisection on c."""

    def ok(c):
        a2, a3, a4 = c * c2, c * c3, c * c4
        negdef = a2 < 0 and a2 * a3 - a4**2 > 0
        if not negdef:
            return False
        return a4**2 / a3 - a2 >= 2 and a4**2 / a2 - a3 >= 2

    lo = 0.0
    if not ok(hi):
        return math.inf
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * hi:
            break
    return hi
