import struct

import numpy as np
import pytest

from ocean_tdp import ValidationError
from ocean_tdp import fixtures as fx
from ocean_tdp.association import AssociationMatrix
from ocean_tdp.closed_testing import category_cap
from ocean_tdp.state import (
    MAGIC,
    PreparedState,
    StateChecksumError,
    StateFormatError,
    dumps,
    load,
    loads,
    prepare,
    save,
)
from ocean_tdp.twoway import TwoWaySelection, query


class TestPrepare:
    def test_all_ones(self):
        state = prepare(np.ones((3, 4)))
        assert state.h == 12
        assert state.cap == category_cap(12)
        assert np.all(state.categories == state.cap)

    def test_all_zeros(self):
        state = prepare(np.zeros((3, 4)))
        assert state.h == 0
        assert np.all(state.categories == 1)

    def test_toy_categories(self, toy_state):
        np.testing.assert_array_equal(toy_state.categories, fx.TOY_CATEGORIES)
        assert (toy_state.p, toy_state.q, toy_state.m) == (6, 7, 42)

    def test_ids_from_association(self):
        assoc = AssociationMatrix(np.full((2, 2), 0.5), ("g1", "g2"), ("c1", "c2"))
        state = prepare(assoc, alpha=0.1)
        assert state.row_ids == ("g1", "g2") and state.col_ids == ("c1", "c2")
        assert state.alpha == 0.1
        assert state.row_index == {"g1": 0, "g2": 1}

    def test_default_ids(self):
        state = prepare(np.full((2, 3), 0.5))
        assert state.row_ids == ("r0", "r1") and state.col_ids == ("c0", "c1", "c2")

    def test_categories_read_only(self, toy_state):
        with pytest.raises(ValueError):
            toy_state.categories[0, 0] = 2

    def test_narrow_dtype(self, rng):
        state = prepare(rng.uniform(size=(20, 10)))
        assert state.categories.dtype == np.uint8

    def test_invalid_inputs(self):
        with pytest.raises(ValidationError):
            prepare(np.array([[0.5, np.nan]]))
        with pytest.raises(ValidationError):
            prepare(np.array([[0.5]]), alpha=1.0)
        with pytest.raises(ValidationError):
            PreparedState.from_categories([[0, 1]])
        with pytest.raises(ValidationError):
            PreparedState.from_categories([[1]], row_ids=("a", "b"))


class TestPersistence:
    def test_round_trip_toy(self, toy_state, tmp_path):
        save(toy_state, tmp_path / "toy.ocn")
        loaded = load(tmp_path / "toy.ocn")
        assert loaded.equals(toy_state)
        assert loaded.categories.dtype == toy_state.categories.dtype
        assert loaded.row_ids == toy_state.row_ids and loaded.col_ids == toy_state.col_ids

    def test_unicode_ids(self):
        state = PreparedState.from_categories([[1, 2]], row_ids=("gène",), col_ids=("α", "β"))
        assert loads(dumps(state)).col_ids == ("α", "β")

    def test_dumps_is_deterministic(self, toy_state):
        assert dumps(toy_state) == dumps(PreparedState.from_categories(fx.TOY_CATEGORIES))

    def test_header_layout(self, toy_state):
        data = dumps(toy_state)
        magic, version, alpha, h, p, q, cap, width = struct.unpack_from("<4sIdQQQIB", data)
        assert (magic, version, alpha, h, p, q, cap, width) == (MAGIC, 1, 0.05, 42, 6, 7, toy_state.cap, 2)

    @pytest.mark.parametrize("keep", [0, 3, 20, -1])
    def test_truncated(self, toy_state, keep):
        data = dumps(toy_state)
        cut = data[: keep if keep >= 0 else len(data) + keep]
        with pytest.raises((StateChecksumError, StateFormatError)):
            loads(cut)
        if keep > 4:
            with pytest.raises(StateChecksumError):
                loads(cut)

    def test_flipped_byte(self, toy_state):
        data = bytearray(dumps(toy_state))
        data[-20] ^= 0x01
        with pytest.raises(StateChecksumError):
            loads(bytes(data))

    def test_wrong_magic(self, toy_state):
        with pytest.raises(StateFormatError, match="magic"):
            loads(b"XXXX" + dumps(toy_state)[4:])

    def test_version_mismatch(self, toy_state):
        data = bytearray(dumps(toy_state))
        data[4:8] = struct.pack("<I", 99)
        with pytest.raises(StateFormatError, match="version 99"):
            loads(bytes(data))

    def test_queries_identical_after_load(self, rng, tmp_path):
        pv = rng.uniform(size=(40, 30)) ** 3
        fresh = prepare(pv)
        save(fresh, tmp_path / "s.ocn")
        loaded = load(tmp_path / "s.ocn")
        sel = TwoWaySelection.of(range(0, 40, 3), range(5, 25), fresh)
        assert query(fresh, sel, 50) == query(loaded, sel, 50)
