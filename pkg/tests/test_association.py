import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from ocean_tdp import ValidationError
from ocean_tdp.association import (
    AssociationMatrix,
    ConstantFeatureWarning,
    Dataset,
    DroppedMembersWarning,
    DuplicateMemberWarning,
    build_pvalue_matrix,
    parse_gmt,
    parse_matrix,
    parse_pvalue_matrix,
    pearson_pvalue,
    pvalue_from_r,
    resolve_selection,
    write_gmt,
    write_matrix,
)
from ocean_tdp.state import PreparedState


def _reference_p(r, n):
    mpmath.mp.dps = 50
    r = mpmath.mpf(r)
    return float(mpmath.betainc(mpmath.mpf(n - 2) / 2, mpmath.mpf(1) / 2, 0, (1 - r) * (1 + r), regularized=True))


def _dataset(values, prefix="f"):
    values = np.asarray(values, dtype=float)
    return Dataset(
        tuple(f"s{i}" for i in range(values.shape[0])),
        tuple(f"{prefix}{j}" for j in range(values.shape[1])),
        values,
    )


class TestPearson:
    def test_zero_correlation(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        y = np.array([1.0, -1.0, -1.0, 1.0])
        assert pearson_pvalue(x, y) == pytest.approx(1.0, abs=1e-15)

    def test_perfect_correlation(self):
        x = np.arange(6.0)
        assert pearson_pvalue(x, x) == 0.0
        assert pearson_pvalue(x, -3 * x + 2) == 0.0

    def test_against_high_precision(self):
        assert float(pvalue_from_r(0.75, 10)) == pytest.approx(_reference_p(0.75, 10), abs=1e-12)

    @pytest.mark.parametrize("n", [3, 4, 10, 57, 500])
    def test_grid_against_high_precision(self, n):
        for r in np.linspace(-0.999, 0.999, 41):
            assert abs(float(pvalue_from_r(r, n)) - _reference_p(r, n)) <= 1e-12

    def test_matches_student_t(self):
        from scipy import stats

        rng = np.random.default_rng(1)
        x, y = rng.standard_normal((2, 30))
        assert pearson_pvalue(x, y) == pytest.approx(stats.pearsonr(x, y).pvalue, rel=1e-10)

    def test_constant_gives_one_with_warning(self):
        with pytest.warns(ConstantFeatureWarning):
            assert pearson_pvalue(np.ones(5), np.arange(5.0)) == 1.0

    def test_too_few_samples(self):
        with pytest.raises(ValidationError):
            pearson_pvalue([1.0, 2.0], [2.0, 1.0])

    def test_non_finite(self):
        with pytest.raises(ValidationError):
            pearson_pvalue([1.0, np.nan, 3.0], [1.0, 2.0, 3.0])

    @settings(max_examples=80, deadline=None)
    @given(
        hnp.arrays(np.float64, st.integers(3, 25), elements=st.floats(-100, 100, allow_nan=False)),
        st.floats(0.01, 100),
        st.floats(-50, 50),
        st.integers(0, 2**32 - 1),
    )
    def test_symmetry_and_affine_invariance(self, x, scale, shift, seed):
        y = np.random.default_rng(seed).standard_normal(x.size)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConstantFeatureWarning)
            p = pearson_pvalue(x, y)
            assert 0.0 <= p <= 1.0
            assert pearson_pvalue(y, x) == pytest.approx(p, abs=1e-9)
            if np.ptp(x) > 1e-6 * max(1.0, np.abs(x).max()):
                assert pearson_pvalue(scale * x + shift, y) == pytest.approx(p, abs=1e-9)


class TestBuildMatrix:
    def test_single_identical_feature(self):
        a = _dataset([[1.0], [2.0], [4.0]])
        assoc = build_pvalue_matrix(a, a)
        assert assoc.shape == (1, 1)
        assert assoc.pvalues[0, 0] == 0.0

    def test_matches_per_pair(self):
        rng = np.random.default_rng(5)
        a = _dataset(rng.standard_normal((8, 3)), "a")
        b = _dataset(rng.standard_normal((8, 2)), "b")
        assoc = build_pvalue_matrix(a, b)
        assert assoc.row_ids == ("a0", "a1", "a2") and assoc.col_ids == ("b0", "b1")
        for j in range(3):
            for k in range(2):
                assert assoc.pvalues[j, k] == pytest.approx(pearson_pvalue(a.values[:, j], b.values[:, k]), abs=1e-12)

    def test_transpose(self, rng):
        a = _dataset(rng.standard_normal((12, 5)), "a")
        b = _dataset(rng.standard_normal((12, 4)), "b")
        np.testing.assert_allclose(build_pvalue_matrix(a, b).pvalues, build_pvalue_matrix(b, a).pvalues.T, atol=1e-14)

    def test_blocking_does_not_change_result(self, rng):
        a = _dataset(rng.standard_normal((9, 11)), "a")
        b = _dataset(rng.standard_normal((9, 3)), "b")
        np.testing.assert_array_equal(
            build_pvalue_matrix(a, b, block_size=2).pvalues, build_pvalue_matrix(a, b, block_size=512).pvalues
        )

    def test_reordered_samples(self, rng):
        a = _dataset(rng.standard_normal((7, 3)), "a")
        b = _dataset(rng.standard_normal((7, 2)), "b")
        perm = rng.permutation(7)
        shuffled = Dataset(tuple(b.sample_ids[i] for i in perm), b.feature_ids, b.values[perm])
        np.testing.assert_array_equal(build_pvalue_matrix(a, b).pvalues, build_pvalue_matrix(a, shuffled).pvalues)

    def test_sample_mismatch_lists_ids(self):
        a = Dataset(("x", "y", "z"), ("a",), np.arange(3.0)[:, None])
        b = Dataset(("x", "y", "w"), ("b",), np.arange(3.0)[:, None])
        with pytest.raises(ValidationError, match="z.*w"):
            build_pvalue_matrix(a, b)

    def test_constant_feature(self, rng):
        values = rng.standard_normal((6, 3))
        values[:, 1] = 2.5
        a = _dataset(values, "a")
        b = _dataset(rng.standard_normal((6, 2)), "b")
        with pytest.warns(ConstantFeatureWarning):
            assoc = build_pvalue_matrix(a, b)
        assert assoc.n_constant == 1
        assert np.all(assoc.pvalues[1] == 1.0)

    def test_two_samples_rejected(self):
        a = _dataset([[1.0], [2.0]])
        with pytest.raises(ValidationError):
            build_pvalue_matrix(a, a)


class TestDataset:
    def test_duplicate_feature(self):
        with pytest.raises(ValidationError, match="duplicate feature"):
            Dataset(("s0", "s1", "s2"), ("a", "a"), np.zeros((3, 2)))

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            Dataset(("s0", "s1"), ("a",), np.zeros((3, 1)))

    def test_association_range(self):
        with pytest.raises(ValidationError):
            AssociationMatrix(np.array([[0.5, 1.2]]), ("r",), ("a", "b"))


class TestParseMatrix:
    def test_small_file(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("sample\tg1\tg2\ns1\t1.5\t2\ns2\t-3\t4e-1\n")
        ds = parse_matrix(path)
        assert ds.sample_ids == ("s1", "s2") and ds.feature_ids == ("g1", "g2")
        np.testing.assert_array_equal(ds.values, [[1.5, 2.0], [-3.0, 0.4]])

    def test_na_cell_names_position(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("sample\tg1\tg2\ns1\t1\t2\ns2\tNA\t4\n")
        with pytest.raises(ValidationError, match=r"line 3.*'g1'"):
            parse_matrix(path)

    def test_ragged(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("sample,g1,g2\ns1,1\n")
        with pytest.raises(ValidationError, match="fields"):
            parse_matrix(path)

    def test_duplicate_header(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("sample,g1,g1\ns1,1,2\n")
        with pytest.raises(ValidationError, match="duplicate"):
            parse_matrix(path)

    def test_transposed_orientation(self, tmp_path, rng):
        ds = _dataset(rng.standard_normal((4, 3)))
        write_matrix(ds, tmp_path / "a.tsv")
        write_matrix(ds, tmp_path / "b.csv", features_as_rows=True)
        assert parse_matrix(tmp_path / "a.tsv").equals(ds)
        assert parse_matrix(tmp_path / "b.csv", features_as_rows=True).equals(ds)

    def test_round_trip(self, tmp_path, rng):
        ds = _dataset(rng.standard_normal((5, 4)) * 1e3)
        write_matrix(ds, tmp_path / "x.csv")
        back = parse_matrix(tmp_path / "x.csv")
        write_matrix(back, tmp_path / "y.csv")
        assert back.equals(ds)
        assert (tmp_path / "x.csv").read_text() == (tmp_path / "y.csv").read_text()

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValidationError):
            parse_matrix(tmp_path / "x.tsv", fmt="xlsx")

    def test_pvalue_matrix(self, tmp_path):
        path = tmp_path / "p.tsv"
        path.write_text("id\tc1\tc2\nr1\t0.5\t0.01\n")
        assoc = parse_pvalue_matrix(path)
        assert assoc.row_ids == ("r1",) and assoc.col_ids == ("c1", "c2")
        path.write_text("id\tc1\tc2\nr1\t0.5\t1.5\n")
        with pytest.raises(ValidationError):
            parse_pvalue_matrix(path)


class TestGmt:
    def test_one_set(self, tmp_path):
        path = tmp_path / "s.gmt"
        path.write_text("SET\tdesc\ta\tb\tc\n")
        assert parse_gmt(path) == {"SET": ["a", "b", "c"]}

    def test_duplicate_member(self, tmp_path):
        path = tmp_path / "s.gmt"
        path.write_text("SET\tdesc\ta\tb\ta\n")
        with pytest.warns(DuplicateMemberWarning):
            assert parse_gmt(path) == {"SET": ["a", "b"]}

    def test_duplicate_name(self, tmp_path):
        path = tmp_path / "s.gmt"
        path.write_text("S\td\ta\nS\td\tb\n")
        with pytest.raises(ValidationError, match="duplicate set name"):
            parse_gmt(path)

    def test_empty_set(self, tmp_path):
        path = tmp_path / "s.gmt"
        path.write_text("S\tdesc\n")
        with pytest.raises(ValidationError, match="no members"):
            parse_gmt(path)

    def test_round_trip(self, tmp_path):
        sets = {"x": ["a", "b"], "y": ["c"]}
        write_gmt(sets, tmp_path / "s.gmt")
        assert parse_gmt(tmp_path / "s.gmt") == sets


class TestResolveSelection:
    @pytest.fixture
    def state(self):
        return PreparedState.from_categories(
            np.ones((4, 3), dtype=int), row_ids=("a", "b", "c", "d"), col_ids=("x", "y", "z")
        )

    def test_all_present(self, state):
        sel = resolve_selection(state, "R", "C", {"R": ["b", "d"]}, {"C": ["x", "y", "z"]})
        assert list(sel.rows) == [1, 3] and list(sel.cols) == [0, 1, 2]

    def test_partial(self, state):
        with pytest.warns(DroppedMembersWarning, match="3 of 5"):
            sel = resolve_selection(state, ["a", "q1", "c", "q2", "q3"], ["x"])
        assert sel.shape == (2, 1)

    def test_none_present(self, state):
        with pytest.raises(ValidationError, match="none"):
            resolve_selection(state, ["q1", "q2"], ["x"])

    def test_unknown_name(self, state):
        with pytest.raises(ValidationError, match="unknown row set"):
            resolve_selection(state, "missing", ["x"], {"R": ["a"]})
