"""Scalar filter calculus.

A filter is ``f(s) = s**l * f0(s)`` with ``f0(s) = exp(-s)``.  This module
evaluates it, computes its Calderon constant and Daubechies bounds, the
dilation-invariant multipliers ``H`` and ``G = 1/H``, and the smooth dyadic
Littlewood-Paley window used for the Besov norm oracle.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import FilterError

FAMILIES = ("exp",)


@dataclass(frozen=True)
class FilterSpec:
    """Admissible filter ``f(s) = s**l * f0(s)`` and dilation ``a > 1``.

    Parameters
    ----------
    family : str
        Generator for ``f0``.  Only ``"exp"`` (``f0(s) = exp(-s)``) exists.
    l : int
        Vanishing order at zero, ``l >= 1``.
    a : float
        Dilation factor of the frame, ``a > 1``.
    """

    family: str = "exp"
    l: int = 1
    a: float = 2.0 ** (1.0 / 3.0)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown filter family {self.family!r}")
        if int(self.l) != self.l or self.l < 1:
            raise ValueError(f"l must be a positive integer, got {self.l!r}")
        if not self.a > 1.0:
            raise ValueError(f"dilation a must exceed 1, got {self.a!r}")
        object.__setattr__(self, "l", int(self.l))
        object.__setattr__(self, "a", float(self.a))

    @property
    def peak(self):
        """Location of the maximum of ``f`` on ``s >= 0``."""
        return float(self.l)


@dataclass(frozen=True)
class DaubechiesBounds:
    A: float
    B: float
    c: float
    samples: int

    @property
    def ratio(self):
        return self.B / self.A


def eval_f(spec, s):
    """Evaluate ``f(s) = s**l * exp(-s)`` for ``s >= 0`` (scalar or array)."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("filter is defined on s >= 0 only")
    with np.errstate(divide="ignore"):
        out = np.exp(spec.l * np.log(s) - s)
    return out if out.ndim else float(out)


def calderon_constant(spec, rtol=1e-10):
    """Return ``c = int_0^inf |f(t)|^2 dt/t``.

    The integral is taken in ``u = log t`` where the integrand is a smooth
    bump, split at the peak of ``f``.
    """

    def integrand(u):
        with np.errstate(over="ignore"):
            return np.exp(2.0 * (spec.l * u - np.exp(u)))

    u0 = np.log(spec.peak)
    total, err = 0.0, 0.0
    for lo, hi in ((-np.inf, u0), (u0, np.inf)):
        val, e = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=rtol, limit=200)
        total += val
        err += e
    if not np.isfinite(total) or total <= 0 or err > 1e-8 * total:
        raise FilterError(f"Calderon quadrature did not converge (value={total}, err={err})")
    return total


def _scale_sum(spec, x, power=2, tol=1e-16, weight=None):
    """Sum ``sum_j w(j) * f(a**(2j) x)**power`` over all integers ``j``.

    ``x`` is a positive array.  Each tail is cut once it is monotone and
    every term is below ``tol`` times the running sum.  ``weight`` maps an
    integer ``j`` to a scalar factor (defaults to 1).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    a2 = spec.a**2
    peak = spec.peak

    def term(j):
        t = eval_f(spec, a2**j * x) ** power
        return t if weight is None else weight(j) * t

    total = term(0)
    for step in (1, -1):
        j = step
        while True:
            t = term(j)
            total = total + t
            y = a2**j * x
            past_peak = np.all(y > peak) if step > 0 else np.all(y < peak)
            if past_peak and np.all(t <= tol * total):
                break
            j += step
            if abs(j) > 100000:
                raise FilterError("scale sum failed to converge")
    return total


def daubechies_sum(spec, s, tol=1e-16):
    """``h(s) = sum_j |f(a^{2j} s)|^2`` for ``s > 0``."""
    s = np.asarray(s, dtype=float)
    out = _scale_sum(spec, s, tol=tol)
    return out.reshape(s.shape) if s.ndim else float(out[0])


def daubechies_bounds(spec, tol=1e-16, samples=4096, s_start=1.0, xatol=1e-6):
    """Extreme values of ``h(s) = sum_j |f(a^{2j} s)|^2`` over ``s > 0``.

    Since ``h(a^2 s) = h(s)`` the search runs over one period
    ``[s_start, a^2 s_start]``: dense log-uniform sampling followed by
    bounded scalar refinement around the best samples.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    u_lo = np.log(s_start)
    period = 2.0 * np.log(spec.a)
    u = u_lo + period * np.arange(samples + 1) / samples
    h = daubechies_sum(spec, np.exp(u), tol=tol)

    def refine(k, sign):
        lo = u[max(k - 1, 0)]
        hi = u[min(k + 1, samples)]
        res = optimize.minimize_scalar(
            lambda v: sign * daubechies_sum(spec, np.exp(v), tol=tol),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": xatol * period},
        )
        return sign * res.fun

    A = min(float(h.min()), refine(int(np.argmin(h)), 1.0))
    B = max(float(h.max()), refine(int(np.argmax(h)), -1.0))
    if not A > 0:
        raise FilterError("filter violates the Daubechies condition numerically (A <= 0)")
    return DaubechiesBounds(A=float(A), B=float(B), c=calderon_constant(spec), samples=samples)


def multiplier_H(spec, lam, tol=1e-16):
    """``H(lam) = sum_j |f|^2(a^{2j} lam^2)``, with ``H(0) = 0``."""
    lam = np.asarray(lam, dtype=float)
    flat = np.abs(lam.ravel())
    out = np.zeros_like(flat)
    pos = flat > 0
    if np.any(pos):
        out[pos] = _scale_sum(spec, flat[pos] ** 2, tol=tol)
    return out.reshape(lam.shape) if lam.ndim else float(out[0])


def multiplier_G(spec, lam, tol=1e-16):
    """``G = 1/H``; undefined at ``lam = 0``."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam == 0):
        raise ValueError("G is undefined at lambda = 0")
    return 1.0 / multiplier_H(spec, lam, tol=tol)


# --- Littlewood-Paley window ------------------------------------------------


def _bump(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = (u > 0) & (u < 1)
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (ui * (1.0 - ui)))
    return out


def _g(s):
    # supported in (1/4, 16)
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = _bump((np.log2(s[pos]) + 2.0) / 6.0)
    return out


def _g_periodized(s):
    # sum over nu of g(4^-nu s); at most three terms are nonzero
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    sp = s[pos]
    centre = np.floor(np.log2(sp) / 2.0)
    acc = np.zeros_like(sp)
    for off in range(-3, 4):
        nu = centre + off
        acc += _g(sp * 4.0 ** (-nu))
    out[pos] = acc
    return out


def beta0_squared(s):
    """``beta0(s)**2 = g(s) / sum_nu g(4^-nu s)``; zero off ``(1/4, 16)``."""
    s = np.asarray(s, dtype=float)
    num = _g(s)
    out = np.zeros_like(s)
    nz = num > 0
    out[nz] = num[nz] / _g_periodized(s[nz])
    return out


def beta0(s):
    return np.sqrt(beta0_squared(s))


@dataclass(frozen=True)
class LPWindow:
    """Dyadic window family ``beta_nu``, ``nu = -1 .. nu_max``.

    ``beta_nu(s) = beta0(4^-nu s)`` for ``nu >= 0`` and ``beta_{-1}`` is the
    low-pass remainder, so that ``sum_{nu >= -1} beta_nu(s)^2 = 1`` on
    ``s >= 0``.
    """

    nu_max: int
    nu_min: int = field(default=-1)

    @property
    def bands(self):
        return range(self.nu_min, self.nu_max + 1)

    def beta(self, nu, s):
        s = np.asarray(s, dtype=float)
        if nu >= 0:
            return beta0(s * 4.0 ** (-nu))
        if nu != -1:
            raise ValueError("bands below -1 are folded into beta_{-1}")
        return np.sqrt(self._lowpass_squared(s))

    @staticmethod
    def _lowpass_squared(s):
        # sum_{m >= 1} beta0^2(4^m s); only the ~3 terms with 4^m s in (1/4, 16) survive
        s = np.asarray(s, dtype=float)
        out = np.ones_like(s)
        pos = s > 0
        sp = s[pos]
        centre = np.floor(-np.log2(sp) / 2.0)
        acc = np.zeros_like(sp)
        for off in range(-3, 4):
            m = centre + off
            acc += np.where(m >= 1, beta0_squared(sp * 4.0 ** np.maximum(m, 1)), 0.0)
        out[pos] = acc
        return out

    def table(self, s):
        """Array of shape ``(n_bands, len(s))`` with ``beta_nu(s)`` rows."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.stack([self.beta(nu, s) for nu in self.bands])


def build_lp_window(lambda_max):
    """Window whose top band is the first one that vanishes on ``[0, lambda_max]``."""
    if not lambda_max > 0:
        raise ValueError("lambda_max must be positive")
    nu = 0
    while 2.0 ** (2 * nu - 2) <= lambda_max:
        nu += 1
    return LPWindow(nu_max=nu)
