import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from lossbetti.network import DatasetSmall, loss_eval
from lossbetti.pfaffian import ACTIVATIONS, Architecture, LossSpec
from lossbetti.topology import kernels
from lossbetti.topology.cubical import CubicalComplex, sublevel_complex
from lossbetti.topology.homology import betti, betti_fast2d, betti_gf2, boundary_ranks, sweep_betti
from lossbetti.topology.slices import (
    ParameterSlice,
    ScalarField,
    default_thresholds,
    read_field,
    sample_field,
    write_field,
)


def radius_grid(n, d=2):
    ax = np.linspace(-1, 1, n)
    grids = np.meshgrid(*([ax] * d), indexing="ij")
    return np.sqrt(sum(g * g for g in grids))


def disk(n=41):
    return radius_grid(n) <= 0.7


def annulus(n=41):
    r = radius_grid(n)
    return (r <= 0.8) & (r >= 0.4)


def blobs(n=41):
    ax = np.linspace(-1, 1, n)
    u, v = np.meshgrid(ax, ax, indexing="ij")
    return ((u + 0.5) ** 2 + v ** 2 <= 0.1) | ((u - 0.5) ** 2 + v ** 2 <= 0.1)


def dense_rank_gf2(faces, nrows):
    """Independent oracle: dense Gaussian elimination on a uint8 matrix."""
    M = np.zeros((nrows, len(faces)), dtype=np.uint8)
    for j, col in enumerate(faces):
        for i in col:
            M[i, j] ^= 1
    rank, rows, cols = 0, M.shape[0], M.shape[1]
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if M[r, c]), None)
        if pivot is None:
            continue
        M[[rank, pivot]] = M[[pivot, rank]]
        below = np.flatnonzero(M[:, c])
        below = below[below != rank]
        M[below] ^= M[rank]
        rank += 1
    return rank


class TestKnownShapes:
    @pytest.mark.parametrize("mask, expected", [
        (disk(), (1, 0, 0)), (annulus(), (1, 1, 0)), (blobs(), (2, 0, 0)),
        (np.ones((5, 7), bool), (1, 0, 0)),
    ])
    def test_planar(self, mask, expected):
        cx = CubicalComplex.from_vertex_mask(mask)
        assert betti_gf2(cx).b == expected
        assert betti_fast2d(cx).b == expected

    def test_hollow_shell(self):
        r = radius_grid(15, 3)
        cx = CubicalComplex.from_vertex_mask((r <= 0.9) & (r >= 0.55))
        bv = betti_gf2(cx)
        assert bv.b == (1, 0, 1, 0)
        assert bv.euler == bv.alternating_sum() == 2

    def test_solid_torus_3d(self):
        ax = np.linspace(-1, 1, 21)
        u, v, w = np.meshgrid(ax, ax, ax, indexing="ij")
        ring = (np.sqrt(u * u + v * v) - 0.6) ** 2 + w * w <= 0.25 ** 2
        assert betti_gf2(CubicalComplex.from_vertex_mask(ring)).b == (1, 1, 0, 0)

    def test_checkerboard_has_no_edges(self):
        i, j = np.indices((6, 6))
        vals = ((i + j) % 2).astype(float)
        cx = sublevel_complex(vals, 0.5)
        assert cx.cell_counts() == (18, 0, 0)
        assert betti(cx).b == (18, 0, 0)

    def test_full_2x2(self):
        cx = sublevel_complex(np.arange(4.0).reshape(2, 2), 3.0)
        assert cx.cell_counts() == (4, 4, 1) and cx.euler() == 1

    def test_empty(self):
        cx = sublevel_complex(np.ones((4, 4)), 0.0)
        assert cx.is_empty
        fast = betti_fast2d(cx)
        assert fast.b == (0, 0, 0) and fast.empty
        assert betti_gf2(cx).b == (0, 0, 0)

    def test_nonfinite_threshold(self):
        with pytest.raises(ValueError):
            sublevel_complex(np.ones((2, 2)), np.nan)

    def test_fast_needs_2d(self):
        with pytest.raises(ValueError):
            betti_fast2d(CubicalComplex.from_vertex_mask(np.ones((2, 2, 2), bool)))

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            betti(CubicalComplex.from_vertex_mask(disk()), "smith")


class TestComplexStructure:
    def test_closure_violation_detected(self):
        cx = CubicalComplex.from_vertex_mask(np.ones((3, 3), bool))
        cx.cells[()][1, 1] = False
        assert cx.closure_violations()
        with pytest.raises(ValueError):
            betti_gf2(cx)

    def test_bad_cell_shape(self):
        with pytest.raises(ValueError):
            CubicalComplex((3, 3), {(): np.ones((2, 2), bool)})

    @pytest.mark.parametrize("d", [2, 3])
    def test_boundary_of_boundary_is_zero(self, d, rng):
        cx = CubicalComplex.from_vertex_mask(rng.random((6,) * d) < 0.7)
        for k in range(2, d + 1):
            top, _ = cx.boundary_faces(k)
            low, n_low = cx.boundary_faces(k - 1)
            for row in top:
                acc = np.zeros(n_low, dtype=np.uint8)
                for f in row:
                    np.bitwise_xor.at(acc, low[f], 1)
                assert not acc.any()

    def test_boundary_faces_range(self):
        with pytest.raises(ValueError):
            CubicalComplex.from_vertex_mask(disk()).boundary_faces(3)

    def test_sublevel_sets_nest(self, rng):
        vals = rng.random((20, 20))
        levels = np.linspace(0, 1, 8)
        cxs = [sublevel_complex(vals, c) for c in levels]
        assert all(a.is_subcomplex_of(b) for a, b in zip(cxs, cxs[1:]))


class TestOracles:
    @pytest.mark.parametrize("d, n", [(2, 9), (3, 5)])
    def test_sparse_rank_matches_dense(self, d, n, rng):
        for _ in range(5):
            cx = CubicalComplex.from_vertex_mask(rng.random((n,) * d) < 0.65)
            for k in range(1, d + 1):
                faces, nrows = cx.boundary_faces(k)
                expect = dense_rank_gf2(faces, nrows)
                for name, mod in kernels.available_backends().items():
                    assert (mod.gf2_rank(faces, nrows) if len(faces) else 0) == expect, name

    @pytest.mark.parametrize("d", [2, 3])
    def test_b0_matches_scipy_label(self, d, rng):
        for _ in range(10):
            mask = rng.random((12,) * d) < 0.55
            _, ncomp = ndimage.label(mask)
            assert betti_gf2(CubicalComplex.from_vertex_mask(mask)).b[0] == ncomp

    def test_backends_agree(self, rng):
        backends = kernels.available_backends()
        for _ in range(20):
            cx = CubicalComplex.from_vertex_mask(rng.random((24, 24)) < 0.6)
            results = {name: betti_gf2(cx, rank=mod.gf2_rank).b for name, mod in backends.items()}
            assert len(set(results.values())) == 1
            fast = {name: betti_fast2d(cx, merge_count=mod.uf_merge_count).b
                    for name, mod in backends.items()}
            assert set(fast.values()) == set(results.values())

    def test_active_backend_reported(self):
        assert kernels.BACKEND in kernels.available_backends()

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1), st.integers(2, 20), st.integers(2, 20),
           st.floats(0.1, 0.9))
    def test_fast_equals_gf2_and_euler(self, seed, a, b, p):
        mask = np.random.default_rng(seed).random((a, b)) < p
        cx = CubicalComplex.from_vertex_mask(mask)
        g, f = betti_gf2(cx), betti_fast2d(cx)
        assert g.b == f.b
        assert g.euler == g.alternating_sum() == cx.euler()
        if not cx.is_empty:
            assert g.b[0] >= 1

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1), st.integers(2, 7), st.floats(0.3, 0.9))
    def test_euler_identity_3d(self, seed, n, p):
        cx = CubicalComplex.from_vertex_mask(np.random.default_rng(seed).random((n, n, n)) < p)
        bv = betti_gf2(cx)
        assert bv.euler == bv.alternating_sum()
        assert len(boundary_ranks(cx)) == 3


def double_well(n):
    u, v = np.meshgrid(np.linspace(-2, 2, n), np.linspace(-1.5, 1.5, n), indexing="ij")
    return (u * u - 1) ** 2 + v * v


class TestSweeps:
    def test_bowl(self):
        ax = np.linspace(-1, 1, 51)
        u, v = np.meshgrid(ax, ax, indexing="ij")
        for c, bv in sweep_betti(u * u + v * v, [0.01, 0.1, 0.5, 1.0, 1.9]):
            assert bv.b[:2] == (1, 0)

    @pytest.mark.parametrize("n", [64, 128])
    def test_double_well_saddle(self, n):
        sweep = dict(sweep_betti(double_well(n), [0.5, 0.9, 1.1, 2.0]))
        assert [sweep[c].b[0] for c in (0.5, 0.9)] == [2, 2]
        assert [sweep[c].b[0] for c in (1.1, 2.0)] == [1, 1]

    def test_below_min_is_empty(self):
        assert all(bv.empty for _, bv in sweep_betti(np.ones((5, 5)), [-2.0, 0.0, 0.5]))

    def test_unsorted_thresholds(self):
        with pytest.raises(ValueError):
            sweep_betti(np.ones((3, 3)), [1.0, 0.0])


NET = Architecture(1, (1,), ACTIVATIONS["tanh"])


class TestSlices:
    def test_validation(self):
        base = np.zeros(4)
        with pytest.raises(ValueError):
            ParameterSlice((0,), ((0, 1),), (3,), base)
        with pytest.raises(ValueError):
            ParameterSlice((0, 0), ((0, 1), (0, 1)), (3, 3), base)
        with pytest.raises(ValueError):
            ParameterSlice((0, 4), ((0, 1), (0, 1)), (3, 3), base)
        with pytest.raises(ValueError):
            ParameterSlice((0, 1), ((0, 1), (0, 1)), (3, 1), base)
        with pytest.raises(ValueError):
            ParameterSlice((0, 1), ((1, 0), (0, 1)), (3, 3), base)

    def test_zero_network_zero_field(self):
        slc = ParameterSlice((1, 3), ((0, 0.5), (0, 0.5)), (4, 4), np.zeros(4))
        data = DatasetSmall([[0.0], [0.0]], [0.0, 0.0])
        f = sample_field(NET, data, LossSpec("MSE"), slc)
        assert np.all(f.values == 0.0)

    def test_order_matches_pointwise(self, rng):
        slc = ParameterSlice((0, 3), ((-1, 1), (-2, 0.5)), (3, 3), rng.normal(size=4))
        data = DatasetSmall(rng.normal(size=(3, 1)), rng.normal(size=3))
        loss = LossSpec("MSE")
        f = sample_field(NET, data, loss, slc)
        assert f.values.shape == (3, 3)
        for flat in range(9):
            i, j = np.unravel_index(flat, (3, 3))
            theta = slc.base_point.copy()
            theta[0] = np.linspace(-1, 1, 3)[i]
            theta[3] = np.linspace(-2, 0.5, 3)[j]
            assert f.values[i, j] == pytest.approx(loss_eval(NET, theta, data, loss), rel=1e-12)

    def test_workers_do_not_change_values(self, rng):
        slc = ParameterSlice((0, 1, 2), ((-1, 1),) * 3, (20, 20, 20), rng.normal(size=4))
        data = DatasetSmall(rng.normal(size=(2, 1)), rng.normal(size=2))
        a = sample_field(NET, data, LossSpec("MSE"), slc, chunk=1000)
        b = sample_field(NET, data, LossSpec("MSE"), slc, workers=4, chunk=1000)
        np.testing.assert_array_equal(a.values, b.values)

    def test_bce_field_nonnegative(self, rng):
        arch = Architecture(1, (1,), ACTIVATIONS["tanh"], ACTIVATIONS["logsig"])
        slc = ParameterSlice((1, 3), ((-3, 3), (-3, 3)), (15, 15), np.zeros(4))
        data = DatasetSmall([[0.5], [-1.0]], [1, 0])
        assert np.all(sample_field(arch, data, LossSpec("BCE"), slc).values >= 0)

    def test_nonfinite_names_node(self):
        slc = ParameterSlice((1, 3), ((0, 1e200), (0, 1e200)), (2, 2), np.zeros(4))
        data = DatasetSmall([[1e200]], [0.0])
        with pytest.raises(ValueError, match="grid node"):
            sample_field(NET, data, LossSpec("MSE"), slc)

    def test_field_file_round_trip(self, tmp_path, rng):
        slc = ParameterSlice((0, 2), ((-1, 1), (0, 3)), (4, 5), rng.normal(size=4))
        f = ScalarField(slc, rng.normal(size=20))
        write_field(tmp_path / "f.txt", f)
        g = read_field(tmp_path / "f.txt")
        np.testing.assert_array_equal(g.values, f.values)
        np.testing.assert_array_equal(g.slice.base_point, slc.base_point)
        assert g.slice.varied_indices == (0, 2) and g.slice.resolution == (4, 5)

    def test_field_file_truncated(self, tmp_path, rng):
        slc = ParameterSlice((0, 2), ((-1, 1), (0, 3)), (4, 5), np.zeros(4))
        write_field(tmp_path / "f.txt", ScalarField(slc, np.zeros(20)))
        lines = (tmp_path / "f.txt").read_text().splitlines()
        (tmp_path / "f.txt").write_text("\n".join(lines[:-3]) + "\n")
        with pytest.raises(ValueError):
            read_field(tmp_path / "f.txt")

    def test_default_thresholds_span_range(self, rng):
        slc = ParameterSlice((0, 1), ((0, 1), (0, 1)), (10, 10), np.zeros(4))
        f = ScalarField(slc, rng.random(100))
        t = default_thresholds(f, 16, extra=[0.5])
        assert t[0] == f.values.min() and t[-1] == f.values.max()
        assert 0.5 in t and t == sorted(t) and len(t) == 17
