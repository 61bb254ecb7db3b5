"""Brute-force reference implementations, written against the formulas
directly: explicit double loops over ordered pairs in 40-digit mpmath."""
import mpmath as mp

mp.mp.dps = 40

TOY_X = [0.0, 1.0, 2.0]
TOY_Y = {(1, 2): 0.5, (2, 1): -0.5, (1, 3): 1.0, (3, 1): -1.0, (2, 3): 0.25, (3, 2): -0.25}


def phi(u):
    return mp.exp(-mp.mpf(u) ** 2 / 2) / mp.sqrt(2 * mp.pi)


def Phi(u):
    return mp.ncdf(u)


def _terms(X, Y, w1, w2, hx):
    for (a, b), y in Y.items():
        yield y, phi((w1 - X[a - 1]) / mp.mpf(hx)) * phi((w2 - X[b - 1]) / mp.mpf(hx))


def joint_density(X, Y, y, x1, x2, hx, hy):
    n = len(Y)
    tot = mp.fsum(phi((y - yy) / mp.mpf(hy)) * k for yy, k in _terms(X, Y, x1, x2, hx))
    return tot / (n * mp.mpf(hy) * mp.mpf(hx) ** 2)


def cdf(X, Y, w1, w2, y, hx, hy):
    num = den = mp.mpf(0)
    for yy, k in _terms(X, Y, w1, w2, hx):
        num += Phi((y - yy) / mp.mpf(hy)) * k
        den += k
    return num / den


def pdf(X, Y, w1, w2, y, hx, hy):
    num = den = mp.mpf(0)
    for yy, k in _terms(X, Y, w1, w2, hx):
        num += phi((y - yy) / mp.mpf(hy)) * k
        den += k
    return num / (mp.mpf(hy) * den)


def nw(X, Y, x1, x2, hx):
    num = den = mp.mpf(0)
    for yy, k in _terms(X, Y, x1, x2, hx):
        num += yy * k
        den += k
    return num / den


def covariate_density(X, Y, w1, w2, hx):
    return mp.fsum(k for _, k in _terms(X, Y, w1, w2, hx)) / (len(Y) * mp.mpf(hx) ** 2)


def quantile(X, Y, w1, w2, s, hx, hy):
    """Bisection to 40 digits on the oracle CDF."""
    lo, hi = mp.mpf(-50), mp.mpf(50)
    for _ in range(200):
        mid = (lo + hi) / 2
        if cdf(X, Y, w1, w2, mid, hx, hy) < s:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


ROUGH_1D = 1 / (2 * mp.sqrt(mp.pi))


def sigma_F(X, Y, w1, w2, y, hx, hy):
    F = cdf(X, Y, w1, w2, y, hx, hy)
    return F * (1 - F) / covariate_density(X, Y, w1, w2, hx) * ROUGH_1D ** 2


def sigma_g_fixed_point(X, Y, xi, xj, e, xbar_i, xbar_j, hx, hy):
    """Fixed-point normalization, K = 1, no X0 block: reference at
    (xbar_i, xbar_j) evaluated at e, inversion at (xi, xj)."""
    s = cdf(X, Y, xbar_i, xbar_j, e, hx, hy)
    g = quantile(X, Y, xi, xj, s, hx, hy)
    dens = pdf(X, Y, xi, xj, g, hx, hy)
    bracket = 1 / covariate_density(X, Y, xi, xj, hx) + 1 / covariate_density(X, Y, xbar_i, xbar_j, hx)
    return g, s * (1 - s) / dens ** 2 * bracket * ROUGH_1D ** 2
