import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from boundary_sdf.distance import (
    brute_force_signed_distance,
    brute_force_signed_squared_distance,
    denormalize_sdf,
    edt,
    normalize_sdf,
    signed_distance,
    signed_squared_distance,
    squared_edt,
)
from boundary_sdf.errors import (
    DegenerateMapError,
    EmptyForegroundError,
    NormalizationError,
    SingleClassMaskError,
)
from boundary_sdf.grid import BinaryMask, SdfMap

from conftest import random_two_class_mask

SQRT2 = math.sqrt(2.0)


def nearest_opposite(mask, r, c):
    """Hand-rolled scalar oracle, independent of both array implementations."""
    h, w = len(mask), len(mask[0])
    label = mask[r][c]
    best = min(
        (r - i) ** 2 + (c - j) ** 2
        for i, j in itertools.product(range(h), range(w))
        if mask[i][j] != label
    )
    return -math.sqrt(best) if label else math.sqrt(best)


two_class = arrays(np.uint8, st.tuples(st.integers(1, 10), st.integers(1, 10)), elements=st.integers(0, 1)).filter(
    lambda a: 0 < a.sum() < a.size
)


def test_edt_collinear():
    assert edt(BinaryMask(np.array([[1, 0, 0]]))).tolist() == [[0.0, 1.0, 2.0]]


def test_edt_center_pixel():
    m = np.zeros((3, 3), dtype=np.uint8)
    m[1, 1] = 1
    d = edt(BinaryMask(m))
    np.testing.assert_array_equal(d, [[SQRT2, 1, SQRT2], [1, 0, 1], [SQRT2, 1, SQRT2]])


def test_edt_all_foreground_and_empty():
    assert not edt(BinaryMask(np.ones((4, 5), dtype=np.uint8))).any()
    with pytest.raises(EmptyForegroundError):
        edt(BinaryMask(np.zeros((3, 3), dtype=np.uint8)))


@pytest.mark.parametrize("shape", [(1, 1), (1, 7), (9, 1), (13, 6)])
def test_squared_edt_single_seed_anywhere(shape):
    for r, c in itertools.product(range(shape[0]), range(shape[1])):
        seeds = np.zeros(shape, dtype=bool)
        seeds[r, c] = True
        rr, cc = np.indices(shape)
        np.testing.assert_array_equal(squared_edt(seeds), (rr - r) ** 2 + (cc - c) ** 2)


def test_signed_distance_row():
    sdf = signed_distance(BinaryMask(np.array([[0, 1, 1, 0]])))
    assert sdf.data.tolist() == [[1.0, -1.0, -1.0, 1.0]]
    assert not sdf.normalized


def test_signed_distance_center_in_5x5():
    m = np.zeros((5, 5), dtype=np.uint8)
    m[2, 2] = 1
    d = signed_distance(BinaryMask(m)).data
    assert d[2, 2] == -1.0
    assert d[1, 2] == d[3, 2] == d[2, 1] == d[2, 3] == 1.0
    for r, c in [(0, 0), (0, 4), (4, 0), (4, 4)]:
        assert d[r, c] == pytest.approx(2 * SQRT2, abs=1e-15)


def test_brute_force_small_cases():
    assert brute_force_signed_distance(BinaryMask(np.array([[1, 0]]))).data.tolist() == [[-1.0, 1.0]]
    d = brute_force_signed_distance(BinaryMask(np.array([[1, 0], [0, 0]]))).data
    assert d.tolist() == [[-1.0, 1.0], [1.0, SQRT2]]


@pytest.mark.parametrize("fn", [signed_distance, brute_force_signed_distance])
def test_single_class_rejected(fn):
    for fill in (0, 1):
        with pytest.raises(SingleClassMaskError):
            fn(BinaryMask(np.full((3, 3), fill, dtype=np.uint8)))


@settings(max_examples=30, deadline=None)
@given(two_class)
def test_against_scalar_oracle(data):
    d = signed_distance(BinaryMask(data)).data
    listed = data.tolist()
    for r, c in itertools.product(range(data.shape[0]), range(data.shape[1])):
        assert d[r, c] == nearest_opposite(listed, r, c)


@settings(max_examples=80, deadline=None)
@given(two_class)
def test_properties(data):
    m = BinaryMask(data)
    sq = signed_squared_distance(m)
    assert np.array_equal(sq, brute_force_signed_squared_distance(m))
    d = signed_distance(m).data
    assert np.array_equal(d < 0, data == 1)
    assert np.array_equal(d > 0, data == 0)
    assert np.all(np.abs(d) >= 1.0)
    np.testing.assert_array_equal(signed_distance(m.complement()).data, -d)


def test_translation_equivariance(rng):
    base = random_two_class_mask(rng, (10, 10), 0.3).data
    pad = np.zeros((30, 30), dtype=np.uint8)
    pad[5:15, 5:15] = base
    shifted = np.zeros_like(pad)
    shifted[8:18, 12:22] = base
    a = signed_distance(BinaryMask(pad)).data
    b = signed_distance(BinaryMask(shifted)).data
    np.testing.assert_array_equal(a[5:15, 5:15], b[8:18, 12:22])


def test_normalize_examples():
    n = normalize_sdf(SdfMap(np.array([[-1.0, 1.0]])))
    assert n.data.tolist() == [[-1.0, 1.0]]
    assert n.normalized and n.norm_params == (0.0, 1.0)
    with pytest.raises(DegenerateMapError):
        normalize_sdf(SdfMap(np.full((3, 3), 7.0)))
    with pytest.raises(NormalizationError):
        normalize_sdf(n)


def test_normalize_zscore(rng):
    for _ in range(10):
        sdf = signed_distance(random_two_class_mask(rng, (20, 17), 0.3))
        n = normalize_sdf(sdf)
        assert abs(n.data.mean()) <= 1e-12
        assert abs(n.data.std() - 1.0) <= 1e-12
        back = denormalize_sdf(n)
        np.testing.assert_allclose(back.data, sdf.data, rtol=1e-9, atol=1e-12)
        assert not back.normalized


def test_denormalize_examples():
    assert denormalize_sdf(SdfMap(np.zeros((2, 2)), True, (3.0, 2.0))).data.tolist() == [[3.0, 3.0]] * 2
    assert denormalize_sdf(SdfMap(np.array([[-1.0, 1.0]]), True, (0.0, 5.0))).data.tolist() == [[-5.0, 5.0]]
    with pytest.raises(NormalizationError):
        denormalize_sdf(SdfMap(np.zeros((1, 1))))
