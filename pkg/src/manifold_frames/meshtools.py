"""Offline helpers that produce mesh eigen-files.

The library itself only reads eigen-files (:func:`spectral.load_mesh_model`);
these helpers exist so a triangulated surface can be turned into one with a
cotangent Laplacian and a lumped (barycentric) mass matrix.
"""

import numpy as np
from scipy import linalg, sparse

from .spectral import write_mesh_file


def icosphere(subdivisions=2):
    """Vertices and faces of a subdivided icosahedron on the unit sphere."""
    t = (1.0 + 5.0**0.5) / 2.0
    V = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
         (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    F = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
         (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
         (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    V = [np.array(v, dtype=float) / np.linalg.norm(v) for v in V]
    for _ in range(subdivisions):
        mid = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in mid:
                m = V[i] + V[j]
                V.append(m / np.linalg.norm(m))
                mid[key] = len(V) - 1
            return mid[key]

        new = []
        for a, b, c in F:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        F = new
    return np.array(V), np.array(F, dtype=int)


def cotangent_laplacian(V, F):
    """Stiffness matrix ``L`` (positive semidefinite) and lumped masses."""
    n = V.shape[0]
    rows, cols, vals = [], [], []
    mass = np.zeros(n)
    for k in range(3):
        i, j, o = F[:, k], F[:, (k + 1) % 3], F[:, (k + 2) % 3]
        u, v = V[i] - V[o], V[j] - V[o]
        cot = np.einsum("ij,ij->i", u, v) / np.linalg.norm(np.cross(u, v), axis=1)
        rows += [i, j]
        cols += [j, i]
        vals += [-0.5 * cot, -0.5 * cot]
    area = 0.5 * np.linalg.norm(np.cross(V[F[:, 1]] - V[F[:, 0]], V[F[:, 2]] - V[F[:, 0]]), axis=1)
    for k in range(3):
        np.add.at(mass, F[:, k], area / 3.0)
    W = sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(n, n)).tocsr()
    L = W - sparse.diags(np.asarray(W.sum(axis=1)).ravel())
    return L, mass


def mesh_edges(V, F):
    """Unique undirected edges with Euclidean lengths."""
    E = np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]])
    E = np.unique(np.sort(E, axis=1), axis=0)
    length = np.linalg.norm(V[E[:, 0]] - V[E[:, 1]], axis=1)
    return [(int(a), int(b), float(d)) for (a, b), d in zip(E, length)]


def mesh_eigensystem(L, mass, n_eig):
    """Lowest ``n_eig`` solutions of ``L v = lam M v``, ``M``-orthonormal."""
    lam, vecs = linalg.eigh(L.toarray(), np.diag(mass), subset_by_index=[0, n_eig - 1])
    lam[0] = 0.0
    if vecs[:, 0].sum() < 0:
        vecs[:, 0] = -vecs[:, 0]
    return lam, vecs


def write_icosphere_eigenfile(path, subdivisions=2, n_eig=49):
    V, F = icosphere(subdivisions)
    L, mass = cotangent_laplacian(V, F)
    lam, vecs = mesh_eigensystem(L, mass, n_eig)
    write_mesh_file(path, dim=2, weights=mass, eigenvalues=lam, eigvecs=vecs, coords=V,
                    edges=mesh_edges(V, F))
    return path
