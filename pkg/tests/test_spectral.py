import math

import numpy as np
import pytest

from manifold_frames.errors import GridTooCoarse, ModelError
from manifold_frames.filters import FilterSpec, eval_f
from manifold_frames.spectral import (
    apply_multiplier,
    band_limited_random,
    build_sphere_model,
    build_torus_model,
    inner,
    kernel_row,
    load_mesh_model,
    localization_functional,
    norm_p,
    orthonormality_residual,
    read_mesh_file,
    remove_mean,
    to_grid,
    to_spectral,
    write_mesh_file,
    zonal_kernel,
)


@pytest.fixture(params=["sphere", "torus", "mesh"])
def model(request):
    return request.getfixturevalue({"sphere": "sphere16", "torus": "torus", "mesh": "mesh"}[request.param])


class TestSphere:
    def test_trivial_model(self):
        m = build_sphere_model(0)
        assert m.size == 1 and m.eigenvalues[0] == 0.0
        assert m.volume == pytest.approx(4 * math.pi, rel=1e-14)
        assert np.allclose(m.eigvecs[:, 0], 1 / math.sqrt(4 * math.pi))

    def test_eigenvalues(self):
        m = build_sphere_model(2)
        assert m.eigenvalues.tolist() == [0, 2, 2, 2, 6, 6, 6, 6, 6]

    def test_orthonormality_minimal_grid(self, sphere16):
        assert orthonormality_residual(sphere16) <= 1e-10

    def test_too_coarse(self):
        with pytest.raises(GridTooCoarse):
            build_sphere_model(8, 8, 17)
        with pytest.raises(GridTooCoarse):
            build_sphere_model(8, 9, 16)

    def test_coarse_grid_is_not_exact(self):
        # one longitude short of exact: products of degree 2 L_max alias
        m = build_sphere_model(6, 7, 13)
        assert orthonormality_residual(m) < 1e-10
        lon = np.arctan2(m.coords[:, 1], m.coords[:, 0])
        aliased = np.cos(13 * lon)
        assert abs(np.dot(m.weights, aliased)) > 1.0


class TestTorus:
    def test_eigenvalues(self):
        m = build_torus_model(1)
        assert sorted(m.eigenvalues.tolist()) == [0, 1, 1, 1, 1, 2, 2, 2, 2]
        assert m.volume == pytest.approx(4 * math.pi**2, rel=1e-14)

    def test_orthonormality_exact(self, torus):
        assert orthonormality_residual(torus) <= 1e-12

    def test_too_coarse(self):
        with pytest.raises(GridTooCoarse):
            build_torus_model(4, 9)

    def test_distance_wraps(self, torus):
        n = torus.params["n_grid"]
        d = torus.distances(0, [n - 1, n * (n - 1), n * n - 1])[0]
        step = 2 * math.pi / n
        assert np.allclose(d, [step, step, math.sqrt(2) * step])


def octahedron_file(path, lam0=0.0):
    # 6 nodes, edges between all non-antipodal pairs; graph Laplacian eigensystem
    anti = {0: 1, 1: 0, 2: 3, 3: 2, 4: 5, 5: 4}
    edges = [(i, j, 1.0) for i in range(6) for j in range(i + 1, 6) if anti[i] != j]
    Lap = np.zeros((6, 6))
    for i, j, _ in edges:
        Lap[i, j] = Lap[j, i] = -1.0
    Lap -= np.diag(Lap.sum(axis=1))
    w = np.full(6, 4 * math.pi / 6)
    lam, U = np.linalg.eigh(Lap / w[0])
    lam[0] = lam0
    vecs = U / math.sqrt(w[0])
    vecs[:, 0] = abs(vecs[:, 0])
    coords = np.array([[0, 0, 1], [0, 0, -1], [1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]], float)
    write_mesh_file(path, dim=2, weights=w, eigenvalues=lam, eigvecs=vecs, coords=coords, edges=edges)
    return path


class TestMesh:
    def test_octahedron_graph_distances(self, tmp_path):
        m = load_mesh_model(octahedron_file(tmp_path / "octa.txt"), "graph")
        D = m.distance_matrix
        assert np.array_equal(D, D.T)
        assert np.all(np.diag(D) == 0)
        for i, j in [(0, 1), (2, 3), (4, 5)]:
            assert D[i, j] == 2.0
        assert np.count_nonzero(D == 1.0) == 24

    def test_roundtrip_is_bit_identical(self, tmp_path, mesh_file):
        data = read_mesh_file(mesh_file)
        out = tmp_path / "again.txt"
        write_mesh_file(out, dim=data["dim"], weights=data["weights"], eigenvalues=data["eigenvalues"],
                        eigvecs=data["eigvecs"], coords=data["coords"], edges=data["edges"])
        assert out.read_text() == mesh_file.read_text()

    def test_rejects_nonzero_lambda0(self, tmp_path):
        with pytest.raises(ModelError, match="lambda_0"):
            load_mesh_model(octahedron_file(tmp_path / "bad.txt", lam0=0.5), "graph")

    def test_rejects_descending(self, tmp_path, mesh_file):
        data = read_mesh_file(mesh_file)
        lam = data["eigenvalues"].copy()
        lam[3], lam[20] = lam[20], lam[3]
        bad = tmp_path / "desc.txt"
        write_mesh_file(bad, dim=2, weights=data["weights"], eigenvalues=lam, eigvecs=data["eigvecs"],
                        edges=data["edges"])
        with pytest.raises(ModelError, match="ascending"):
            load_mesh_model(bad)

    @pytest.mark.parametrize("mutate", ["header", "truncate", "text", "count"])
    def test_rejects_malformed(self, tmp_path, mesh_file, mutate):
        lines = mesh_file.read_text().splitlines()
        if mutate == "header":
            lines[0] = "NOTAMESH"
        elif mutate == "truncate":
            lines = lines[:100]
        elif mutate == "text":
            lines[5] = "abc def"
        else:
            lines[0] = lines[0].replace("N=49", "N=48")
        bad = tmp_path / "bad.txt"
        bad.write_text("\n".join(lines) + "\n")
        with pytest.raises(ModelError):
            load_mesh_model(bad)

    def test_file_distance_mode(self, tmp_path, mesh):
        data = read_mesh_file(mesh.params["path"])
        path = tmp_path / "with_dist.txt"
        write_mesh_file(path, dim=2, weights=data["weights"], eigenvalues=data["eigenvalues"],
                        eigvecs=data["eigvecs"], distances=mesh.distance_matrix)
        m2 = load_mesh_model(path, "file")
        assert np.array_equal(m2.distance_matrix, mesh.distance_matrix)
        with pytest.raises(ModelError):
            load_mesh_model(path, "graph")

    def test_graph_distance_tracks_geodesic(self, mesh):
        # graph paths on a quasi-uniform sphere mesh are bi-Lipschitz to great circles
        X = np.asarray(mesh.coords)
        geo = np.arccos(np.clip(X @ X.T, -1, 1))
        off = ~np.eye(mesh.node_count, dtype=bool)
        ratio = mesh.distance_matrix[off] / geo[off]
        assert ratio.min() >= 0.95 and ratio.max() <= 1.5


class TestModelInvariants:
    def test_constant_eigenfunction(self, model):
        assert model.eigenvalues[0] == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(model.eigvecs[:, 0], 1 / math.sqrt(model.volume), rtol=1e-8)

    def test_orthonormality(self, model):
        assert orthonormality_residual(model) <= 1e-8

    def test_weights(self, model):
        assert np.all(model.weights > 0)

    def test_ascending(self, model):
        assert np.all(np.diff(model.eigenvalues) >= -1e-12)

    def test_metric_axioms(self, model, rng):
        idx = rng.integers(0, model.node_count, size=(300, 3))
        d = model.distances
        dxy = np.array([d(i, j)[0, 0] for i, j, _ in idx])
        dyz = np.array([d(j, k)[0, 0] for _, j, k in idx])
        dxz = np.array([d(i, k)[0, 0] for i, _, k in idx])
        dyx = np.array([d(j, i)[0, 0] for i, j, _ in idx])
        assert np.all(dxz <= dxy + dyz + 1e-9)
        assert np.allclose(dxy, dyx, atol=1e-12)
        assert np.all(dxy >= 0)
        diag = np.array([d(i, i)[0, 0] for i in range(0, model.node_count, 7)])
        assert np.all(diag <= 1e-7)

    def test_roundtrip(self, model, rng):
        c = rng.standard_normal(model.size)
        assert np.abs(to_spectral(model, to_grid(model, c)) - c).max() <= 1e-10

    def test_constant_coefficients(self, model):
        c = to_spectral(model, np.ones(model.node_count))
        expected = np.zeros(model.size)
        expected[0] = math.sqrt(model.volume)
        assert np.allclose(c, expected, atol=1e-10)

    def test_eigenfunction_coefficients(self, model):
        c = to_spectral(model, model.eigvecs[:, 5])
        assert np.allclose(c, np.eye(model.size)[5], atol=1e-10)

    def test_parseval(self, model, rng):
        c = rng.standard_normal(model.size)
        F = to_grid(model, c)
        assert inner(model, F, F) == pytest.approx(float(c @ c), rel=1e-8)

    def test_norms(self, model):
        one = np.ones(model.node_count)
        assert norm_p(model, one, 1) == pytest.approx(model.volume, rel=1e-12)
        assert norm_p(model, model.eigvecs[:, 3], 2) == pytest.approx(1.0, rel=1e-8)
        assert np.allclose(remove_mean(model, 3 * one), 0.0, atol=1e-13)
        assert norm_p(model, -2 * one, math.inf) == 2.0
        with pytest.raises(ValueError):
            norm_p(model, one, 0)

    def test_kernel_row_zero_mean_and_symmetric(self, model, spec1):
        t = 0.5
        rows = np.array([kernel_row(model, spec1, t, x) for x in range(0, model.node_count, 11)])
        assert np.abs(rows @ model.weights).max() <= 1e-10 * np.abs(rows).max()
        sub = rows[:, ::11]
        assert np.allclose(sub, sub.T, atol=1e-12 * np.abs(sub).max())


class TestOperatorCalculus:
    def test_identity_multiplier(self, sphere16, rng):
        c = rng.standard_normal(sphere16.size)
        assert np.array_equal(apply_multiplier(sphere16, lambda lam: np.ones_like(lam), c), c)

    def test_eigenfunction_case(self, sphere16):
        e = np.eye(sphere16.size)[7]
        out = apply_multiplier(sphere16, np.sqrt, e)
        assert np.allclose(out, math.sqrt(sphere16.eigenvalues[7]) * e)

    def test_composition(self, sphere16, rng):
        c = rng.standard_normal(sphere16.size)
        g1 = lambda lam: np.exp(-0.01 * lam)  # noqa: E731
        g2 = lambda lam: 1 + lam  # noqa: E731
        lhs = apply_multiplier(sphere16, g1, apply_multiplier(sphere16, g2, c))
        rhs = apply_multiplier(sphere16, lambda lam: g1(lam) * g2(lam), c)
        assert np.allclose(lhs, rhs, rtol=1e-14, atol=0)

    @pytest.mark.parametrize("t", [0.25, 0.6, 1.3])
    def test_multiplier_matches_kernel_integration(self, sphere16, spec1, rng, t):
        c = band_limited_random(sphere16, rng)
        F = to_grid(sphere16, c)
        via_symbol = to_grid(sphere16, apply_multiplier(sphere16, lambda lam: eval_f(spec1, t * t * lam), c))
        xs = rng.integers(0, sphere16.node_count, 10)
        via_kernel = [np.dot(sphere16.weights, kernel_row(sphere16, spec1, t, x) * F) for x in xs]
        assert np.allclose(via_kernel, via_symbol[xs], atol=1e-8)

    def test_kernel_vanishes_at_large_t(self, sphere16, spec1):
        # f(t^2 * 2) = 2 t^2 exp(-2 t^2) < 1e-80 for t = 10
        row = kernel_row(sphere16, spec1, 10.0, 0)
        assert np.abs(row).max() < 1e-80

    def test_kernel_t_positive(self, sphere16, spec1):
        with pytest.raises(ValueError):
            kernel_row(sphere16, spec1, 0.0, 0)


class TestZonalKernel:
    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
    def test_matches_eigenbasis(self, sphere16, spec1, t):
        # L_max = 16 already holds the full series at these t
        row = kernel_row(sphere16, spec1, t, 5)
        d = sphere16.distances_from(5)
        assert np.abs(zonal_kernel(spec1, t, d) - row).max() <= 1e-10

    def test_truncated_degree_matches_model(self, sphere16, spec1):
        t = 0.1
        row = kernel_row(sphere16, spec1, t, 0)
        assert np.allclose(zonal_kernel(spec1, t, sphere16.distances_from(0), degree=16), row, atol=1e-11)

    def test_diagonal_trace(self, spec1):
        # K_t(x, x) = (1 / 4 pi) sum_L (2L + 1) f(t^2 L(L+1))
        t = 0.05
        L = np.arange(4000.0)
        expected = np.sum((2 * L + 1) * eval_f(spec1, t * t * L * (L + 1))) / (4 * math.pi)
        assert zonal_kernel(spec1, t, [0.0])[0] == pytest.approx(expected, rel=1e-12)

    def test_zero_mean(self, spec1):
        # int_S^2 K_t(x, y) dy = 2 pi int_0^pi K(d) sin d dd = f(0) = 0
        from scipy.integrate import quad
        val, _ = quad(lambda d: zonal_kernel(spec1, 0.3, [d])[0] * math.sin(d), 0, math.pi, limit=200)
        assert abs(2 * math.pi * val) <= 1e-9

    def test_localization_bounded(self, spec1):
        vals = [localization_functional(spec1, 2.0**-k) for k in range(6)]
        assert max(vals) / min(vals) <= 100.0

    def test_truncation_breaks_localization(self, sphere16_fine, spec1):
        # the band-limited model kernel rings at t well below 1 / L_max
        m = sphere16_fine
        t = 2.0**-5
        K = (m.eigvecs * eval_f(spec1, t * t * m.eigenvalues)) @ m.eigvecs[0]
        d = m.distances_from(0)
        truncated = (t**2 * np.abs(K) * (1 + d / t) ** 3).max()
        assert truncated > 10 * localization_functional(spec1, t)
