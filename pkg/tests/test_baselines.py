import numpy as np
import pytest

from bandsel.baselines import (
    abs_correlation_matrix,
    cluster_select,
    lp_select,
    osp_select,
    pca_extract,
    pca_fit,
    pca_transform,
)
from bandsel.errors import InvalidArgumentError


def two_group_matrix(rng, per_group=3, pixels=60, noise=1e-3):
    """Two tight band groups built from two orthogonal generators."""
    g1 = rng.normal(size=pixels)
    g2_raw = rng.normal(size=pixels)
    g2 = g2_raw - (g1 @ g2_raw) / (g1 @ g1) * g1
    cols = [g1 + noise * rng.normal(size=pixels) for _ in range(per_group)]
    cols += [g2 + noise * rng.normal(size=pixels) for _ in range(per_group)]
    return np.column_stack(cols)


class TestLpSelect:
    def test_full_selection_is_permutation(self, rng):
        bm = rng.normal(size=(20, 6))
        assert sorted(lp_select(bm, 6).tolist()) == list(range(6))

    def test_exact_linear_combination_skipped(self):
        # b3 = b1 + b2 exactly; after the seed pair {b1, b2} its prediction
        # error is zero, so the independent b4 goes third.
        b1 = np.array([1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0])
        b2 = np.array([1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0])
        extra = np.array([1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0])
        b3 = b1 + b2
        b4 = 0.9 * b1 + 0.1 * b2 + 0.5 * extra
        bm = np.column_stack([b1, b2, b3, b4])
        order = lp_select(bm, 3)
        assert set(order[:2].tolist()) == {0, 1}
        assert order[2] == 3

    def test_initial_pair_by_dissimilarity_oracle(self, rng):
        # Oracle: exhaustive max of (1 - |pearson|) over all pairs.
        bm = rng.normal(size=(30, 7))
        corr = abs_correlation_matrix(bm)
        best = None
        best_d = -1.0
        for i in range(7):
            for j in range(i + 1, 7):
                if 1 - corr[i, j] > best_d:
                    best_d = 1 - corr[i, j]
                    best = {i, j}
        assert set(lp_select(bm, 2).tolist()) == best

    def test_identical_pair_never_seeds(self, rng):
        a = rng.normal(size=25)
        c = rng.normal(size=25)
        bm = np.column_stack([a, a, c])
        assert set(lp_select(bm, 2).tolist()) != {0, 1}

    def test_scale_invariant_order(self, rng):
        bm = rng.normal(size=(25, 8))
        assert np.array_equal(lp_select(bm, 5), lp_select(7.3 * bm, 5))

    def test_random_init_deterministic_per_seed(self, rng):
        bm = rng.normal(size=(25, 8))
        a = lp_select(bm, 4, seed=5, init="random")
        b = lp_select(bm, 4, seed=5, init="random")
        assert np.array_equal(a, b)

    def test_needs_two(self, rng):
        with pytest.raises(InvalidArgumentError):
            lp_select(rng.normal(size=(10, 4)), 1)


class TestOspSelect:
    def test_orthogonal_bands_selected_by_norm(self, rng):
        q, _ = np.linalg.qr(rng.normal(size=(12, 5)))
        scales = np.array([3.0, 1.0, 5.0, 2.0, 4.0])
        bm = q * scales
        order = osp_select(bm, 5)
        assert order.tolist() == np.argsort(-scales).tolist()

    def test_duplicate_goes_last(self, rng):
        base = rng.normal(size=(20, 4))
        base[:, 0] *= 10.0  # make band 0 the clear first pick
        bm = np.column_stack([base, base[:, 0]])  # band 4 duplicates band 0
        order = osp_select(bm, 5)
        assert order[0] == 0
        assert order[-1] == 4

    def test_single_selection_max_norm(self, rng):
        bm = rng.normal(size=(15, 6))
        expected = int(np.argmax(np.linalg.norm(bm, axis=0)))
        assert osp_select(bm, 1).tolist() == [expected]

    def test_scale_invariant_order(self, rng):
        bm = rng.normal(size=(18, 7))
        assert np.array_equal(osp_select(bm, 7), osp_select(7.3 * bm, 7))


class TestClusterSelect:
    def test_identity_when_n_equals_bands(self, rng):
        bm = rng.normal(size=(15, 6))
        assert cluster_select(bm, 6).tolist() == list(range(6))

    def test_two_tight_groups(self, rng):
        bm = two_group_matrix(rng)
        corr = abs_correlation_matrix(bm)
        assert corr[:3, :3].min() > 0.99 and corr[3:, 3:].min() > 0.99
        assert corr[:3, 3:].max() < 0.1
        picks = cluster_select(bm, 2)
        assert len({0 if p < 3 else 1 for p in picks}) == 2

    def test_single_cluster_medoid_oracle(self, rng):
        # Oracle: exhaustive argmin of summed correlation distance.
        bm = rng.normal(size=(40, 7))
        distance = 1.0 - abs_correlation_matrix(bm)
        np.fill_diagonal(distance, 0.0)
        expected = int(np.argmin(distance.sum(axis=1)))
        assert cluster_select(bm, 1).tolist() == [expected]

    def test_exact_cluster_count_with_duplicates(self, rng):
        # Duplicated bands merge at distance zero; the cut must still yield
        # exactly n clusters.
        a, b, c = (rng.normal(size=30) for _ in range(3))
        bm = np.column_stack([a, a, b, b, c, c])
        for n in range(1, 7):
            assert cluster_select(bm, n).size == n

    def test_constant_band_isolated(self, rng):
        bm = two_group_matrix(rng, per_group=2)
        bm = np.column_stack([bm, np.full(bm.shape[0], 3.14)])
        picks = cluster_select(bm, 3)
        assert 4 in picks.tolist()  # the constant band sits in its own cluster


class TestPca:
    def test_whitened_data_has_flat_spectrum(self, rng):
        x = rng.normal(size=(80, 5))
        centered = x - x.mean(axis=0)
        cov = centered.T @ centered / (x.shape[0] - 1)
        vals, vecs = np.linalg.eigh(cov)
        white = centered @ vecs @ np.diag(1 / np.sqrt(vals))
        _, _, eigenvalues = pca_fit(white, 5)
        fractions = eigenvalues / eigenvalues.sum()
        assert np.allclose(fractions, 1 / 5, atol=1e-10)

    def test_rank_one_data(self, rng):
        base = rng.normal(size=50)
        bm = np.column_stack([base, 2 * base, -0.5 * base])
        means, comps, eigenvalues = pca_fit(bm, 3)
        total = eigenvalues.sum()
        assert eigenvalues[0] == pytest.approx(total, rel=1e-8)
        assert abs(eigenvalues[1]) <= 1e-8 * total

    def test_full_basis_reconstruction_oracle(self, rng):
        bm = rng.normal(size=(40, 6))
        means, comps, _ = pca_fit(bm, 6)
        projected = pca_transform(bm, means, comps)
        rebuilt = projected @ comps.T + means
        assert np.abs(rebuilt - bm).max() <= 1e-6

    def test_projected_covariance_diagonal(self, rng):
        bm = rng.normal(size=(100, 8)) @ rng.normal(size=(8, 8))
        out = pca_extract(bm, 4)
        centered = out - out.mean(axis=0)
        cov = centered.T @ centered / (out.shape[0] - 1)
        off = cov - np.diag(np.diag(cov))
        assert np.abs(off).max() <= 1e-6 * np.abs(np.diag(cov)).max()

    def test_extract_shape(self, rng):
        assert pca_extract(rng.normal(size=(30, 6)), 2).shape == (30, 2)


class TestCommonInvariants:
    @pytest.mark.parametrize("selector", ["lp", "osp", "cluster"])
    def test_unique_in_range_right_count(self, rng, selector):
        fns = {"lp": lp_select, "osp": osp_select, "cluster": cluster_select}
        for seed in range(10):
            local = np.random.default_rng(seed)
            bands = int(local.integers(4, 10))
            n = int(local.integers(2, bands + 1))
            bm = local.normal(size=(20, bands))
            out = fns[selector](bm, n)
            assert out.size == n
            assert np.unique(out).size == n
            assert out.min() >= 0 and out.max() < bands
