import numpy as np
import pytest

from lognet import (
    ConfigError,
    Dataset,
    Fingerprint,
    RpMap,
    SplitError,
    UnknownRpError,
    ValidationError,
    binarize,
    binarize_matrix,
    normalize,
    normalize_values,
    split_train_test,
)


class TestFingerprint:
    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            Fingerprint(0, "d", 0, [np.nan, -50.0])

    def test_rejects_negative_ids(self):
        with pytest.raises(ValidationError):
            Fingerprint(-1, "d", 0, [-50.0])
        with pytest.raises(ValidationError):
            Fingerprint(0, "d", -2, [-50.0])

    def test_rss_is_immutable(self):
        fp = Fingerprint(0, "d", 0, [-50.0, -60.0])
        with pytest.raises(ValueError):
            fp.rss[0] = 0.0

    def test_equality_compares_values(self):
        a = Fingerprint(0, "d", 0, [-50.0, -60.0])
        b = Fingerprint(0, "d", 0, [-50.0, -60.0])
        c = Fingerprint(0, "d", 0, [-50.0, -61.0])
        assert a == b and a != c


class TestDataset:
    def test_rejects_mixed_ap_counts(self):
        fps = [Fingerprint(0, "d", 0, [-50.0, -60.0]), Fingerprint(1, "d", 0, [-50.0])]
        with pytest.raises(ValidationError):
            Dataset.from_fingerprints(fps)

    def test_rp_ids_and_cis(self, tiny_dataset):
        assert tiny_dataset.rp_ids == frozenset({0, 1})
        assert tiny_dataset.cis == (0,)
        assert tiny_dataset.ap_count == 3

    def test_empty_split_keeps_ap_count(self, tiny_dataset):
        empty = Dataset((), tiny_dataset.ap_count)
        assert len(empty) == 0 and empty.ap_count == 3


class TestRpMap:
    def test_coords_and_lookup_error(self, tiny_rp_map):
        assert np.allclose(tiny_rp_map.coords(1), [1.0, 0.0])
        with pytest.raises(UnknownRpError):
            tiny_rp_map.coords(7)

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            RpMap({0: (np.inf, 0.0)})

    def test_require_covers(self, tiny_dataset):
        with pytest.raises(UnknownRpError):
            RpMap({0: (0.0, 0.0)}).require_covers(tiny_dataset)


class TestNormalize:
    def test_bounds_map_to_unit_interval(self):
        assert normalize_values(np.array([-100.0]), -100.0, 0.0)[0] == 0.0
        assert normalize_values(np.array([0.0]), -100.0, 0.0)[0] == 1.0

    def test_midpoint(self):
        # (-50 - (-100)) / (0 - (-100)) = 0.5 by hand.
        assert normalize_values(np.array([-50.0]), -100.0, 0.0)[0] == 0.5

    def test_clamps_out_of_range(self):
        out = normalize_values(np.array([-150.0, 10.0]), -100.0, 0.0)
        assert out[0] == 0.0 and out[1] == 1.0

    def test_bad_range_is_config_error(self, tiny_dataset):
        with pytest.raises(ConfigError):
            normalize(tiny_dataset, 0.0, -100.0)

    def test_monotone(self):
        rng = np.random.default_rng(0)
        v = np.sort(rng.uniform(-120.0, 5.0, 200))
        out = normalize_values(v)
        assert np.all(np.diff(out) >= 0)

    def test_dataset_values_in_unit_interval(self, tiny_dataset):
        norm = normalize(tiny_dataset)
        X = norm.rss_matrix()
        assert X.min() >= 0.0 and X.max() <= 1.0


class TestBinarize:
    def test_direct_threshold(self):
        fp = Fingerprint(0, "d", 0, [0.7, 0.3])
        assert binarize(fp, 0.5).bits.tolist() == [1, 0]

    def test_boundary_is_inclusive(self):
        fp = Fingerprint(0, "d", 0, [0.5, 0.5])
        assert binarize(fp, 0.5).bits.tolist() == [1, 1]

    def test_strict_sides_of_boundary(self):
        fp = Fingerprint(0, "d", 0, [0.49999, 0.50001])
        assert binarize(fp, 0.5).bits.tolist() == [0, 1]

    def test_unnormalized_input_rejected(self):
        with pytest.raises(ValidationError):
            binarize(Fingerprint(0, "d", 0, [-40.0, 0.5]), 0.5)

    def test_threshold_out_of_range(self):
        fp = Fingerprint(0, "d", 0, [0.5])
        for bad in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(ConfigError):
                binarize(fp, bad)

    def test_sub_threshold_jitter_keeps_bits(self):
        # Jitter that never moves a normalized value across the threshold
        # cannot change the binarized fingerprint.
        rng = np.random.default_rng(1)
        for _ in range(50):
            raw = rng.uniform(-100.0, 0.0, 32)
            base = binarize_matrix(normalize_values(raw)[None, :])
            jittered = np.where(raw >= -50.0, rng.uniform(-50.0, 0.0, 32),
                                rng.uniform(-100.0, -50.0001, 32))
            moved = binarize_matrix(normalize_values(jittered)[None, :])
            assert np.array_equal(base, moved)


class TestSplit:
    def test_five_one_ratio(self, tiny_dataset):
        train, test = split_train_test(tiny_dataset, 1, seed=0)
        assert len(train) == 10 and len(test) == 2
        for rp in (0, 1):
            assert sum(fp.rp_id == rp for fp in train) == 5
            assert sum(fp.rp_id == rp for fp in test) == 1

    def test_zero_holdout_degenerates(self, tiny_dataset):
        train, test = split_train_test(tiny_dataset, 0, seed=3)
        assert train == tiny_dataset and len(test) == 0

    def test_same_seed_same_split(self, tiny_dataset):
        a = split_train_test(tiny_dataset, 2, seed=9)
        b = split_train_test(tiny_dataset, 2, seed=9)
        assert a[0] == b[0] and a[1] == b[1]

    def test_partition(self, tiny_dataset):
        train, test = split_train_test(tiny_dataset, 2, seed=5)
        assert len(train) + len(test) == len(tiny_dataset)
        train_ids = {id(fp) for fp in train}
        assert not train_ids & {id(fp) for fp in test}

    def test_too_small_group_names_offender(self):
        fps = [Fingerprint(3, "d", 1, [-50.0]), Fingerprint(3, "d", 1, [-60.0])]
        ds = Dataset.from_fingerprints(fps)
        with pytest.raises(SplitError, match=r"rp_id=3 ci=1"):
            split_train_test(ds, 2, seed=0)

    def test_stratified_per_ci(self):
        fps = []
        for ci in (0, 1):
            for rp in (0, 1):
                for k in range(4):
                    fps.append(Fingerprint(rp, "d", ci, [-40.0 - k, -80.0]))
        ds = Dataset.from_fingerprints(fps)
        train, test = split_train_test(ds, 1, seed=2)
        for ci in (0, 1):
            for rp in (0, 1):
                assert sum(fp.rp_id == rp and fp.ci == ci for fp in test) == 1
