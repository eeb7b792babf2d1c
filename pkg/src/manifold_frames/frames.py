"""Frame atoms, analysis/synthesis and the summation operator.

For a level ``j`` and cell ``k`` the bare atom is the kernel row
``phi_{j,k}(y) = K_{a^j}(x_{j,k}, y)`` of ``f(a^{2j} Delta)``; in the
eigenbasis its coefficients are ``f(a^{2j} lam_i) e_i(x_{j,k})``.  The
normalized atom carries an extra ``sqrt(mu(E_{j,k}))``.  The summation
operator is

    S F = sum_{j,k} mu(E_{j,k}) <F, phi_{j,k}> phi_{j,k},

which approximates the diagonal multiplier ``Q = H(sqrt(Delta))``.
Atoms are generated per level on demand rather than stored, since the
fine levels hold one cell per quadrature node.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import MatrixTooLarge, MeanNotZero, NotConverged
from .filters import eval_f, multiplier_H
from .partition import build_multiscale
from .spectral import kernel_row


@dataclass
class CoefficientArray:
    """Ragged per-level coefficients aligned with a partition."""

    js: tuple
    values: list
    measures: list

    def flat(self):
        return np.concatenate(self.values) if self.values else np.zeros(0)

    def like(self, flat):
        flat = np.asarray(flat, dtype=float)
        out, pos = [], 0
        for v in self.values:
            out.append(flat[pos:pos + v.size].copy())
            pos += v.size
        return CoefficientArray(self.js, out, self.measures)

    def __add__(self, other):
        return self.like(self.flat() + other.flat())

    def __sub__(self, other):
        return self.like(self.flat() - other.flat())

    def __mul__(self, c):
        return self.like(c * self.flat())

    __rmul__ = __mul__

    def to_rows(self, centers=None):
        """``(j, k, measure, value)`` tuples in partition order."""
        rows = []
        for j, v, mu in zip(self.js, self.values, self.measures):
            for k in range(v.size):
                rows.append((j, k, float(mu[k]), float(v[k])))
        return rows


@dataclass(frozen=True)
class _Level:
    j: int
    centers: np.ndarray
    measures: np.ndarray
    symbol: np.ndarray  # f(a^{2j} lam_i)


class FrameSystem:
    """Kernel-row frame built from a model, a filter and a partition."""

    def __init__(self, model, spec, partition):
        if not np.isclose(partition.a, spec.a):
            raise ValueError(f"partition built for a={partition.a}, filter has a={spec.a}")
        self.model = model
        self.spec = spec
        self.partition = partition
        lam = model.eigenvalues
        self.levels = [
            _Level(lev.j, lev.centers, lev.measures, eval_f(spec, spec.a ** (2 * lev.j) * lam))
            for lev in partition
        ]
        self._gram = None

    @property
    def js(self):
        return tuple(lev.j for lev in self.levels)

    @property
    def atom_count(self):
        return sum(lev.centers.size for lev in self.levels)

    def level_atoms(self, index, normalized=False):
        """Eigencoefficients of the atoms of one level, shape ``(K_j, N)``."""
        lev = self.levels[index]
        A = self.model.eigvecs[lev.centers] * lev.symbol
        if normalized:
            A = A * np.sqrt(lev.measures)[:, None]
        return A

    def atom(self, j, k, normalized=False):
        idx = self.js.index(j)
        lev = self.levels[idx]
        a = self.model.eigvecs[lev.centers[k]] * lev.symbol
        return a * math.sqrt(lev.measures[k]) if normalized else a

    def zeros(self):
        return CoefficientArray(self.js, [np.zeros(lev.centers.size) for lev in self.levels],
                                [lev.measures for lev in self.levels])

    def gram_blocks(self):
        # per-level E_c^T diag(mu) E_c, reused by every assembly
        if self._gram is None:
            E = self.model.eigvecs
            self._gram = [E[lev.centers].T @ (lev.measures[:, None] * E[lev.centers])
                          for lev in self.levels]
        return self._gram


def atom_j_range(model, spec, threshold=1e-10):
    """Scales whose atoms are numerically nonzero on the spectrum.

    Returns the widest ``(J_min, J_max)`` such that the largest filter
    value ``max_{i >= 1} f(a^{2j} lam_i)`` stays above ``threshold`` at
    both ends.
    """
    lam = model.eigenvalues[model.eigenvalues > 0]
    a = spec.a

    def top(j):
        return float(np.max(eval_f(spec, a ** (2 * j) * lam)))

    # start at a scale where atoms are certainly alive
    j0 = int(round(-math.log(float(np.median(lam))) / (2 * math.log(a))))
    lo = j0
    while top(lo - 1) >= threshold:
        lo -= 1
    hi = j0
    while top(hi + 1) >= threshold:
        hi += 1
    return lo, hi


def build_frame(model, spec, partition=None, *, b=None, j_range=None, c0=0.1, delta0=1.0,
                Cfloor=0.1):
    """Frame from an explicit partition, or build a subgrid-capable one.

    With ``partition=None`` a partition at parameter ``b`` is built over
    ``j_range`` (default :func:`atom_j_range`), allowing cells below the
    grid resolution.
    """
    if partition is None:
        if b is None:
            raise ValueError("need a partition or b")
        J_min, J_max = j_range if j_range is not None else atom_j_range(model, spec)
        partition = build_multiscale(model, b, spec.a, J_min, J_max, c0=c0, delta0=delta0,
                                     Cfloor=Cfloor, allow_subgrid=True)
    return FrameSystem(model, spec, partition)


def analyze(frame, c):
    """``s_{j,k} = <F, phi_{j,k}>`` with bare (unnormalized) atoms."""
    c = np.asarray(c, dtype=float)
    E = frame.model.eigvecs
    values = [E[lev.centers] @ (lev.symbol * c) for lev in frame.levels]
    return CoefficientArray(frame.js, values, [lev.measures for lev in frame.levels])


def synthesize(frame, r):
    """``sum_{j,k} mu(E_{j,k}) r_{j,k} phi_{j,k}`` as eigencoefficients."""
    E = frame.model.eigvecs
    out = np.zeros(frame.model.size)
    for lev, rj in zip(frame.levels, r.values):
        out += lev.symbol * (E[lev.centers].T @ (lev.measures * rj))
    return out


def apply_S(frame, c):
    return synthesize(frame, analyze(frame, c))


def assemble_S(frame, max_size=5000):
    """Dense matrix of ``S`` in the eigenbasis (constant mode included)."""
    N = frame.model.size
    if N > max_size:
        raise MatrixTooLarge(f"S would be {N}x{N}, cap is {max_size}")
    S = np.zeros((N, N))
    for lev, G in zip(frame.levels, frame.gram_blocks()):
        S += lev.symbol[:, None] * G * lev.symbol[None, :]
    return 0.5 * (S + S.T)


def _nonconstant(model):
    return model.eigenvalues > 1e-10 * max(1.0, model.lambda_max)


def empirical_frame_bounds(frame, max_size=5000):
    """Extreme eigenvalues of ``S`` on the mean-zero band, ``(A_emp, B_emp)``."""
    keep = _nonconstant(frame.model)
    S = assemble_S(frame, max_size=max_size)[np.ix_(keep, keep)]
    ev = np.linalg.eigvalsh(S)
    return float(ev[0]), float(ev[-1])


def q_symbol(frame):
    """``H(sqrt(lam_i))``, zero on the constant mode."""
    lam = frame.model.eigenvalues
    out = np.zeros_like(lam)
    keep = _nonconstant(frame.model)
    out[keep] = multiplier_H(frame.spec, np.sqrt(lam[keep]))
    return out


def apply_Q(frame, c):
    return q_symbol(frame) * np.asarray(c, dtype=float)


def _check_mean_zero(model, c, what="input"):
    c = np.asarray(c, dtype=float)
    const = ~_nonconstant(model)
    norm = float(np.linalg.norm(c))
    if np.any(np.abs(c[const]) > 1e-10 * max(norm, np.finfo(float).tiny)):
        raise MeanNotZero(f"{what} has a nonzero constant component")
    return c


def apply_Q_inverse(frame, c):
    c = _check_mean_zero(frame.model, c)
    H = q_symbol(frame)
    out = np.zeros_like(c)
    keep = H > 0
    out[keep] = c[keep] / H[keep]
    return out


def q_minus_s_norm(frame, max_size=5000):
    """Spectral norm of ``Q - S`` on the mean-zero band."""
    keep = _nonconstant(frame.model)
    D = np.diag(q_symbol(frame)) - assemble_S(frame, max_size=max_size)
    return float(np.linalg.norm(D[np.ix_(keep, keep)], 2))


def richardson_iteration_bound(A, B, tol):
    """Steps the damped Richardson iteration needs at contraction ``(B-A)/(B+A)``."""
    rho = (B - A) / (B + A)
    if rho <= 0:
        return 1
    return math.ceil(math.log(tol) / math.log(rho))


def invert_S(frame, g, tol=1e-10, max_iter=200, bounds=None, full_output=False):
    """Solve ``S F = G`` on the mean-zero band by damped Richardson iteration.

    The step ``tau = 2 / (A + B)`` uses the empirical frame bounds (computed
    unless passed in).  With ``full_output`` returns ``(F, iterations,
    residual_history)``.
    """
    g = _check_mean_zero(frame.model, g, "right-hand side")
    A, B = bounds if bounds is not None else empirical_frame_bounds(frame)
    tau = 2.0 / (A + B)
    gnorm = float(np.linalg.norm(g))
    F = np.zeros_like(g)
    history = [1.0 if gnorm > 0 else 0.0]
    it = 0
    while history[-1] > tol:
        if it >= max_iter:
            raise NotConverged(max_iter, history[-1])
        F = F + tau * (g - apply_S(frame, F))
        it += 1
        history.append(float(np.linalg.norm(g - apply_S(frame, F))) / gnorm)
    return (F, it, history) if full_output else F


def kernel_row_check(frame, j, k):
    """Grid atom from :func:`kernel_row` next to the eigenbasis atom."""
    idx = frame.js.index(j)
    center = int(frame.levels[idx].centers[k])
    return kernel_row(frame.model, frame.spec, frame.spec.a**j, center), frame.atom(j, k)
