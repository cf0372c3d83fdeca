"""
Modified Bessel function of the second kind (third kind in older texts)
"""
import numpy as np
from scipy import special


def _check_argument(x):
    if np.any(np.asarray(x) <= 0):
        raise ValueError("Bessel K argument must be positive")


def bessel_k(nu: float, x):
    """K_nu(x) for x > 0, using K_{-nu} = K_nu"""
    _check_argument(x)
    out = special.kv(abs(nu), x)
    return float(out) if np.ndim(out) == 0 else out


def log_bessel_k(nu: float, x):
    """
    log K_nu(x), finite even where K_nu itself overflows

    Uses the exponentially scaled kve; where that overflows (large order, tiny
    argument) falls back to the small-argument expansion
    log(Gamma(nu)/2) + nu*log(2/x) + log(1 - x^2 / (4(nu-1))).
    """
    _check_argument(x)
    nu = abs(float(nu))
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.log(special.kve(nu, x)) - x
    bad = ~np.isfinite(out)
    if np.any(bad):
        xb = x[bad] if x.ndim else x
        approx = special.gammaln(nu) - np.log(2.0) + nu * np.log(2.0 / xb)
        if nu > 1:
            approx = approx + np.log1p(-xb ** 2 / (4.0 * (nu - 1.0)))
        if x.ndim:
            out[bad] = approx
        else:
            out = approx
    return float(out) if np.ndim(out) == 0 else out
