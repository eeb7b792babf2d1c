"""Discretized Laplace-Beltrami eigensystems.

A :class:`SpectralModel` bundles a truncated real eigenbasis of the
Laplace-Beltrami operator sampled on a node set, positive quadrature
weights and a geodesic distance.  Three backends exist: the round sphere
(real spherical harmonics on a Gauss-Legendre grid), the flat torus
(trigonometric monomials on a uniform grid) and a mesh backend read from
a precomputed eigen-file.

Functions on the manifold are plain numpy arrays: a *grid function* holds
one value per node, a *spectral function* one coefficient per
eigenfunction.
"""

from dataclasses import dataclass, field
import io
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import legval
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path
from scipy.special import sph_harm_y

from .errors import GridTooCoarse, ModelError
from .filters import eval_f


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Truncated eigensystem of the Laplace-Beltrami operator.

    Attributes
    ----------
    name : str
        Backend label (``"sphere"``, ``"torus"``, ``"mesh"``).
    dim : int
        Manifold dimension.
    eigenvalues : ndarray, shape (N,)
        Ascending, ``eigenvalues[0] == 0``.
    eigvecs : ndarray, shape (M, N)
        ``eigvecs[m, i]`` is eigenfunction ``i`` at node ``m``.
    weights : ndarray, shape (M,)
        Quadrature weights, summing to the volume.
    metric : str
        ``"sphere"`` (great circle on unit vectors in ``coords``),
        ``"torus"`` (flat distance on angles in ``coords``) or ``"matrix"``.
    coords : ndarray or None
        Node coordinates used by the metric.
    distance_matrix : ndarray or None
        Dense distances, required when ``metric == "matrix"``.
    """

    name: str
    dim: int
    eigenvalues: np.ndarray
    eigvecs: np.ndarray
    weights: np.ndarray
    metric: str
    coords: np.ndarray = None
    distance_matrix: np.ndarray = None
    params: dict = field(default_factory=dict)
    cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        E = np.asarray(self.eigvecs, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if E.shape != (w.size, lam.size):
            raise ModelError(f"eigvecs shape {E.shape} does not match ({w.size}, {lam.size})")
        if np.any(w <= 0):
            raise ModelError("quadrature weights must be positive")
        if np.any(np.diff(lam) < -1e-12 * max(1.0, abs(lam[-1]))):
            raise ModelError("eigenvalues must be ascending")
        if abs(lam[0]) > 1e-8 * max(1.0, abs(lam[-1])):
            raise ModelError(f"lambda_0 = {lam[0]!r} is not zero")
        if self.metric == "matrix" and self.distance_matrix is None:
            raise ModelError("matrix metric needs a distance matrix")
        for name, arr in (("eigenvalues", lam), ("eigvecs", E), ("weights", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def node_count(self):
        return self.weights.size

    @property
    def size(self):
        """Number of eigenfunctions."""
        return self.eigenvalues.size

    @property
    def volume(self):
        return float(self.weights.sum())

    @property
    def lambda_max(self):
        return float(self.eigenvalues[-1])

    @property
    def spacing(self):
        """Mean node spacing ``(volume / M)^(1/n)``."""
        return (self.volume / self.node_count) ** (1.0 / self.dim)

    @property
    def diameter(self):
        if self.metric == "sphere":
            return np.pi
        if self.metric == "torus":
            return np.pi * np.sqrt(self.dim)
        return float(self.distance_matrix.max())

    def distances(self, rows, cols=None):
        """Distance block ``d(x_rows, x_cols)``; ``cols=None`` means all nodes."""
        rows = np.atleast_1d(rows)
        if self.metric == "matrix":
            D = self.distance_matrix[rows]
            return D if cols is None else D[:, np.atleast_1d(cols)]
        X = self.coords[rows]
        Y = self.coords if cols is None else self.coords[np.atleast_1d(cols)]
        if self.metric == "sphere":
            return np.arccos(np.clip(X @ Y.T, -1.0, 1.0))
        diff = np.abs(X[:, None, :] - Y[None, :, :]) % (2 * np.pi)
        diff = np.minimum(diff, 2 * np.pi - diff)
        return np.sqrt((diff**2).sum(axis=-1))

    def distances_from(self, i):
        return self.distances(i)[0]


# --- backends ---------------------------------------------------------------


def real_sph_harm(L, m, theta, phi):
    """Orthonormal real spherical harmonic of degree ``L``, order ``m``."""
    y = sph_harm_y(L, abs(m), theta, phi)
    if m > 0:
        return np.sqrt(2.0) * (-1) ** m * y.real
    if m < 0:
        return np.sqrt(2.0) * (-1) ** m * y.imag
    return y.real


def sphere_degrees(L_max):
    """Degree ``L`` of each eigenfunction, in model order."""
    return np.repeat(np.arange(L_max + 1), 2 * np.arange(L_max + 1) + 1)


def build_sphere_model(L_max, n_theta=None, n_phi=None):
    """Unit sphere with real spherical harmonics up to degree ``L_max``.

    Nodes are Gauss-Legendre colatitudes times uniform longitudes, which
    integrates every product of two band-limited functions exactly.
    """
    n_theta = L_max + 1 if n_theta is None else n_theta
    n_phi = 2 * L_max + 1 if n_phi is None else n_phi
    if n_theta < L_max + 1 or n_phi < 2 * L_max + 1:
        raise GridTooCoarse(
            f"sphere grid {n_theta}x{n_phi} cannot integrate degree {2 * L_max} exactly"
        )
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x[::-1])
    wt = wx[::-1]
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    T, P = np.meshgrid(theta, phi, indexing="ij")
    T, P = T.ravel(), P.ravel()
    weights = np.repeat(wt, n_phi) * (2 * np.pi / n_phi)
    coords = np.column_stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)])

    cols = [real_sph_harm(L, m, T, P) for L in range(L_max + 1) for m in range(-L, L + 1)]
    lam = sphere_degrees(L_max).astype(float)
    lam = lam * (lam + 1)
    return SpectralModel(
        name="sphere",
        dim=2,
        eigenvalues=lam,
        eigvecs=np.column_stack(cols),
        weights=weights,
        metric="sphere",
        coords=coords,
        params={"L_max": L_max, "n_theta": n_theta, "n_phi": n_phi},
    )


def torus_modes(K_max):
    """Wave vectors ``k`` and a cos/sin flag for each torus eigenfunction."""
    ks = [(k1, k2) for k1 in range(-K_max, K_max + 1) for k2 in range(-K_max, K_max + 1)]
    # one representative of each +-k pair
    half = [k for k in ks if k > (0, 0)]
    modes = [((0, 0), "c")]
    for k in half:
        modes.append((k, "c"))
        modes.append((k, "s"))
    modes.sort(key=lambda m: (m[0][0] ** 2 + m[0][1] ** 2, m[0], m[1]))
    return modes


def build_torus_model(K_max, n_grid=None):
    """Flat torus ``[0, 2pi)^2`` with real trigonometric eigenfunctions."""
    n_grid = 2 * K_max + 2 if n_grid is None else n_grid
    if n_grid < 2 * K_max + 2:
        raise GridTooCoarse(f"torus grid {n_grid} too coarse for K_max={K_max}")
    g = 2 * np.pi * np.arange(n_grid) / n_grid
    X1, X2 = np.meshgrid(g, g, indexing="ij")
    X1, X2 = X1.ravel(), X2.ravel()
    weights = np.full(X1.size, (2 * np.pi / n_grid) ** 2)
    cols, lam = [], []
    for (k1, k2), kind in torus_modes(K_max):
        phase = k1 * X1 + k2 * X2
        if (k1, k2) == (0, 0):
            cols.append(np.full(X1.size, 1.0 / (2 * np.pi)))
        elif kind == "c":
            cols.append(np.cos(phase) / (np.sqrt(2.0) * np.pi))
        else:
            cols.append(np.sin(phase) / (np.sqrt(2.0) * np.pi))
        lam.append(float(k1 * k1 + k2 * k2))
    return SpectralModel(
        name="torus",
        dim=2,
        eigenvalues=np.array(lam),
        eigvecs=np.column_stack(cols),
        weights=weights,
        metric="torus",
        coords=np.column_stack([X1, X2]),
        params={"K_max": K_max, "n_grid": n_grid},
    )


# --- mesh eigen-file ----------------------------------------------------------

_HEADER = "MESHSPEC v1"


def _fmt(x):
    return repr(float(x))


def write_mesh_file(path, *, dim, weights, eigenvalues, eigvecs, coords=None, edges=None,
                    distances=None):
    """Write a mesh eigen-file.

    ``eigvecs`` has shape ``(M, N)`` like :attr:`SpectralModel.eigvecs`; it is
    written as N rows of M entries.  ``edges`` is an iterable of
    ``(m, m2, length)``; ``distances`` an optional dense ``(M, M)`` matrix.
    """
    weights = np.asarray(weights, dtype=float)
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    eigvecs = np.asarray(eigvecs, dtype=float)
    M, N = weights.size, eigenvalues.size
    buf = io.StringIO()
    buf.write(f"{_HEADER} n={dim} vol={_fmt(weights.sum())} N={N} M={M}\n")
    for m in range(M):
        row = [_fmt(weights[m])]
        if coords is not None:
            row += [_fmt(c) for c in coords[m]]
        buf.write(" ".join(row) + "\n")
    for lam in eigenvalues:
        buf.write(_fmt(lam) + "\n")
    for i in range(N):
        buf.write(" ".join(_fmt(v) for v in eigvecs[:, i]) + "\n")
    if edges is not None:
        buf.write("EDGES\n")
        for m, m2, length in edges:
            buf.write(f"{int(m)} {int(m2)} {_fmt(length)}\n")
    if distances is not None:
        buf.write("DISTANCES\n")
        for row in np.asarray(distances, dtype=float):
            buf.write(" ".join(_fmt(v) for v in row) + "\n")
    Path(path).write_text(buf.getvalue())


def read_mesh_file(path):
    """Parse a mesh eigen-file into a dict of arrays (no validation of spectra)."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith(_HEADER):
        raise ModelError(f"{path}: missing '{_HEADER}' header")
    try:
        fields = dict(tok.split("=", 1) for tok in lines[0][len(_HEADER):].split())
        dim, vol = int(fields["n"]), float(fields["vol"])
        N, M = int(fields["N"]), int(fields["M"])
    except (KeyError, ValueError) as exc:
        raise ModelError(f"{path}: malformed header {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) < M + 2 * N:
        raise ModelError(f"{path}: truncated file")
    try:
        node_rows = [[float(v) for v in ln.split()] for ln in body[:M]]
        eigenvalues = np.array([float(ln) for ln in body[M:M + N]])
        vec_tokens = " ".join(body[M + N:M + 2 * N]).split()
        eigvecs = np.array([float(v) for v in vec_tokens])
    except ValueError as exc:
        raise ModelError(f"{path}: non-numeric entry") from exc
    if eigvecs.size != N * M:
        raise ModelError(f"{path}: expected {N * M} eigenvector entries, got {eigvecs.size}")
    ncols = {len(r) for r in node_rows}
    if len(ncols) != 1 or not ncols <= {1, 2, 3, 4}:
        raise ModelError(f"{path}: node lines must hold 'w [x y z]' consistently")
    nodes = np.array(node_rows)
    out = {
        "dim": dim,
        "vol": vol,
        "weights": nodes[:, 0],
        "coords": nodes[:, 1:] if nodes.shape[1] > 1 else None,
        "eigenvalues": eigenvalues,
        "eigvecs": eigvecs.reshape(N, M).T,
        "edges": None,
        "distances": None,
    }
    rest = body[M + 2 * N:]
    section = None
    edges, dist_rows = [], []
    for ln in rest:
        if not ln.strip():
            continue
        if ln.strip() in ("EDGES", "DISTANCES"):
            section = ln.strip()
            continue
        try:
            if section == "EDGES":
                m, m2, length = ln.split()
                edges.append((int(m), int(m2), float(length)))
            elif section == "DISTANCES":
                dist_rows.append([float(v) for v in ln.split()])
            else:
                raise ModelError(f"{path}: unexpected trailing line {ln!r}")
        except ValueError as exc:
            raise ModelError(f"{path}: malformed {section} line {ln!r}") from exc
    if edges:
        out["edges"] = edges
    if dist_rows:
        D = np.array(dist_rows)
        if D.shape != (M, M):
            raise ModelError(f"{path}: distance matrix must be {M}x{M}")
        out["distances"] = D
    if not np.isclose(out["weights"].sum(), vol, rtol=1e-9):
        raise ModelError(f"{path}: weights sum to {out['weights'].sum()}, header says {vol}")
    return out


def graph_distances(n_nodes, edges):
    """All-pairs shortest path lengths over an undirected weighted edge list."""
    e = np.asarray(edges, dtype=float)
    G = coo_matrix((e[:, 2], (e[:, 0].astype(int), e[:, 1].astype(int))), shape=(n_nodes, n_nodes))
    D = shortest_path(G.tocsr(), directed=False)
    if not np.all(np.isfinite(D)):
        raise ModelError("edge graph is disconnected")
    return D


def load_mesh_model(eigen_file, distance_mode="graph"):
    """Build a :class:`SpectralModel` from a mesh eigen-file.

    ``distance_mode="graph"`` uses shortest paths over the ``EDGES``
    section; ``"file"`` uses the ``DISTANCES`` section verbatim.
    """
    data = read_mesh_file(eigen_file)
    M = data["weights"].size
    if distance_mode == "graph":
        if data["edges"] is None:
            raise ModelError(f"{eigen_file}: graph distance mode needs an EDGES section")
        D = graph_distances(M, data["edges"])
    elif distance_mode == "file":
        if data["distances"] is None:
            raise ModelError(f"{eigen_file}: file distance mode needs a DISTANCES section")
        D = data["distances"]
    else:
        raise ValueError(f"unknown distance mode {distance_mode!r}")
    return SpectralModel(
        name="mesh",
        dim=data["dim"],
        eigenvalues=data["eigenvalues"],
        eigvecs=data["eigvecs"],
        weights=data["weights"],
        metric="matrix",
        coords=data["coords"],
        distance_matrix=D,
        params={"path": str(eigen_file), "distance_mode": distance_mode},
    )


# --- operator calculus -----------------------------------------------------------


def to_spectral(model, F):
    """Eigencoefficients ``c_i = sum_m w_m F(x_m) e_i(x_m)``."""
    return model.eigvecs.T @ (model.weights * np.asarray(F, dtype=float))


def to_grid(model, c):
    return model.eigvecs @ np.asarray(c, dtype=float)


def apply_multiplier(model, g, c):
    """``g(Delta)`` applied to spectral coefficients ``c``.

    ``g`` is a callable on eigenvalue arrays or a precomputed symbol array.
    """
    symbol = g(model.eigenvalues) if callable(g) else np.asarray(g, dtype=float)
    return symbol * np.asarray(c, dtype=float)


def kernel_row(model, spec, t, x_index):
    """Grid values of ``y -> K_t(x, y) = sum_i f(t^2 lam_i) e_i(x) e_i(y)``."""
    if not t > 0:
        raise ValueError("t must be positive")
    coef = eval_f(spec, t * t * model.eigenvalues) * model.eigvecs[x_index]
    return model.eigvecs @ coef


def zonal_kernel(spec, t, d, degree=None, tol=1e-17):
    """Unit-sphere kernel ``K_t`` as a function of geodesic distance ``d``.

    Uses the addition theorem ``sum_L f(t^2 L(L+1)) (2L+1)/(4 pi) P_L(cos d)``.
    Without ``degree`` the series runs until ``f`` has dropped below ``tol``
    past its peak, which gives the untruncated kernel at any ``t``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if degree is None:
        degree = int(np.ceil(1.0 / t)) + 1
        while not (t * t * degree * (degree + 1) > spec.peak
                   and eval_f(spec, np.array([t * t * degree * (degree + 1.0)]))[0] < tol):
            degree *= 2
    L = np.arange(degree + 1, dtype=float)
    coef = eval_f(spec, t * t * L * (L + 1.0)) * (2.0 * L + 1.0) / (4.0 * np.pi)
    return legval(np.cos(np.asarray(d, dtype=float)), coef)


def localization_functional(spec, t, n=2, N=3, samples=20001):
    """``sup_d t^n |K_t(d)| (1 + d/t)^N`` for the exact sphere kernel."""
    d = np.linspace(0.0, np.pi, samples)
    return float(np.max(t**n * np.abs(zonal_kernel(spec, t, d)) * (1.0 + d / t) ** N))


def mean(model, F):
    return float(np.dot(model.weights, F) / model.volume)


def remove_mean(model, F):
    F = np.asarray(F, dtype=float)
    return F - mean(model, F)


def inner(model, F, G):
    return float(np.dot(model.weights * np.asarray(F, dtype=float), G))


def norm_p(model, F, p):
    """Discrete ``L^p`` (quasi-)norm, ``p`` in ``(0, inf]``."""
    F = np.abs(np.asarray(F, dtype=float))
    if p == np.inf:
        return float(F.max())
    if not p > 0:
        raise ValueError("p must be positive")
    return float(np.dot(model.weights, F**p) ** (1.0 / p))


def orthonormality_residual(model):
    """``max |E^T W E - I|`` over the eigenbasis."""
    E = model.eigvecs
    gram = E.T @ (model.weights[:, None] * E)
    return float(np.abs(gram - np.eye(model.size)).max())


def band_limited_random(model, rng, mean_zero=True, decay=0.0):
    """Random spectral function with i.i.d. normal coefficients.

    ``decay > 0`` damps coefficient ``i`` by ``(1 + lam_i)^(-decay/2)``.
    """
    c = rng.standard_normal(model.size) * (1.0 + model.eigenvalues) ** (-decay / 2.0)
    if mean_zero:
        c[0] = 0.0
    return c
