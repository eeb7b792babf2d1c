"""Besov sequence norms and the Littlewood-Paley oracle.

Frame coefficients are measured by

    ( sum_j a^{-j alpha q} [ sum_k mu(E_{j,k}) |s_{j,k}|^p ]^{q/p} )^{1/q},

with atoms at scale ``a^j``.  The reference norm is the dyadic
Littlewood-Paley expression ``|| {2^{nu alpha} ||beta_nu(Delta) F||_p} ||_{l^q}``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import AdmissibilityViolation, MeanNotZero
from .frames import analyze, invert_S, synthesize
from .spectral import norm_p, to_grid


@dataclass(frozen=True)
class BesovParams:
    alpha: float
    p: float
    q: float

    def __post_init__(self):
        for name in ("p", "q"):
            v = float(getattr(self, name))
            if not v > 0:
                raise ValueError(f"{name} must be positive (inf allowed), got {v}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "alpha", float(self.alpha))

    def label(self):
        def fmt(x):
            return "inf" if x == math.inf else f"{x:g}"

        return f"({self.alpha:g},{fmt(self.p)},{fmt(self.q)})"


def min_l(params, n):
    """Smallest ``l >= 1`` with ``2l > max(n (1/p - 1)_+ - alpha, alpha)``."""
    need = max(n * max(1.0 / params.p - 1.0, 0.0) - params.alpha, params.alpha)
    l = 1
    while not 2 * l > need:
        l += 1
    return l


def _lq(values, q):
    values = np.abs(np.asarray(values, dtype=float))
    if values.size == 0:
        return 0.0
    if q == math.inf:
        return float(values.max())
    top = values.max()
    if top == 0:
        return 0.0
    # scaled to avoid under/overflow for small p, q
    return float(top * np.sum((values / top) ** q) ** (1.0 / q))


def level_norms(coeffs, params):
    """Inner ``(sum_k mu |s|^p)^(1/p)`` per level (``max |s|`` when ``p = inf``)."""
    out = []
    for v, mu in zip(coeffs.values, coeffs.measures):
        v = np.abs(v)
        if params.p == math.inf:
            out.append(float(v.max()) if v.size else 0.0)
        else:
            out.append(_lq(v * mu ** (1.0 / params.p), params.p))
    return np.array(out)


def seq_norm(coeffs, params, a):
    """Weighted ``l^q(l^p)`` norm of frame coefficients."""
    js = np.asarray(coeffs.js, dtype=float)
    weights = np.exp(-js * params.alpha * math.log(a))
    return _lq(weights * level_norms(coeffs, params), params.q)


def band_norms(model, window, c, params):
    """``||beta_nu(Delta) F||_p`` for each band ``nu = -1 .. nu_max``."""
    table = window.table(model.eigenvalues)
    c = np.asarray(c, dtype=float)
    return np.array([norm_p(model, to_grid(model, row * c), params.p) for row in table])


def lp_norm(model, window, c, params):
    """Littlewood-Paley Besov norm of a band-limited function."""
    nus = np.array(list(window.bands), dtype=float)
    return _lq(2.0 ** (nus * params.alpha) * band_norms(model, window, c, params), params.q)


def eigenfunction_lp_norm(window, lam, params, grid_norm):
    """Closed form of :func:`lp_norm` for a single eigenfunction."""
    nus = np.array(list(window.bands), dtype=float)
    betas = window.table(np.array([lam]))[:, 0]
    return _lq(2.0 ** (nus * params.alpha) * betas, params.q) * grid_norm


def check_admissible(params, n, l):
    need = min_l(params, n)
    if l < need:
        raise AdmissibilityViolation(
            f"filter order l={l} too small for {params.label()} in dimension {n}; need l >= {need}"
        )


# --- standard test suite -------------------------------------------------------

SUITE_VERSION = 1


def standard_suite(model, seed=0):
    """Fixed list of ``(name, coefficients)`` mean-zero test functions.

    Three single eigenfunctions spread over the spectrum, two differences
    of heat kernels ``K_t(x0, .) - K_t(x1, .)`` and three seeded random
    functions with increasing coefficient decay.
    """
    lam = model.eigenvalues
    N = model.size
    suite = []
    for frac in (0.05, 0.25, 0.75):
        i = int(np.searchsorted(lam, frac * model.lambda_max))
        i = min(max(i, 1), N - 1)
        c = np.zeros(N)
        c[i] = 1.0
        suite.append((f"eigenfunction[{i}]", c))
    E = model.eigvecs
    far = int(np.argmax(model.distances_from(0)))
    M = model.node_count
    for t_scale, (x0, x1) in ((4.0, (0, far)), (16.0, (M // 3, (2 * M) // 3))):
        t = t_scale / model.lambda_max
        c = np.exp(-t * lam) * (E[x0] - E[x1])
        c[~(lam > 0)] = 0.0
        suite.append((f"heat_difference[t={t:.4g}]", c))
    for k, decay in enumerate((0.0, 1.0, 2.0)):
        rng = np.random.default_rng([seed, k])
        c = rng.standard_normal(N) * (1.0 + lam) ** (-decay / 2.0)
        c[~(lam > 0)] = 0.0
        suite.append((f"random[seed={seed},k={k},decay={decay:g}]", c))
    return suite


def equivalence_experiment(model, frame, window, params, suite):
    """Ratios ``seq_norm(analyze(F)) / lp_norm(F)`` over a test suite."""
    check_admissible(params, model.dim, frame.spec.l)
    rows = []
    for name, c in suite:
        s = seq_norm(analyze(frame, c), params, frame.spec.a)
        ref = lp_norm(model, window, c, params)
        rows.append({"name": name, "seq_norm": s, "lp_norm": ref, "ratio": s / ref})
    ratios = np.array([r["ratio"] for r in rows])
    return {
        "params": {"alpha": params.alpha, "p": params.p, "q": params.q},
        "b": frame.partition.b,
        "a": frame.spec.a,
        "l": frame.spec.l,
        "per_function": rows,
        "min": float(ratios.min()),
        "max": float(ratios.max()),
        "spread": float(ratios.max() / ratios.min()),
    }


def synthesis_experiment(frame, params, c, tol=1e-10, max_iter=200, bounds=None, window=None):
    """Canonical synthesis coefficients ``r = analyze(S^{-1} F)``.

    Reports the reconstruction error of ``synthesize(r)`` and
    ``seq_norm(r)``, an upper witness for the infimum over all expansions.
    """
    model = frame.model
    check_admissible(params, model.dim, frame.spec.l)
    c = np.asarray(c, dtype=float)
    norm = float(np.linalg.norm(c))
    if norm == 0:
        r = frame.zeros()
        return {"iterations": 0, "relative_error": 0.0, "seq_norm": 0.0, "coefficients": r}
    if abs(c[~(model.eigenvalues > 0)]).max(initial=0.0) > 1e-10 * norm:
        raise MeanNotZero("synthesis experiment needs a mean-zero function")
    G, iterations, _ = invert_S(frame, c, tol=tol, max_iter=max_iter, bounds=bounds,
                                full_output=True)
    r = analyze(frame, G)
    err = float(np.linalg.norm(synthesize(frame, r) - c)) / norm
    out = {
        "iterations": iterations,
        "relative_error": err,
        "seq_norm": seq_norm(r, params, frame.spec.a),
        "coefficients": r,
    }
    if window is not None:
        out["lp_norm"] = lp_norm(model, window, c, params)
        out["ratio"] = out["seq_norm"] / out["lp_norm"]
    return out
