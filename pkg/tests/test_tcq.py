import zlib

import numpy as np
import pytest

from tcqlib import TCQ, build_trellis, code_table, decode, encode, encode_batch, parse_code
from tcqlib.codebook import LatticeCodebook, init_alphabet
from tcqlib.labeling import (
    distance_preserving_labeling_z2z2,
    distance_preserving_labeling_z4,
    ungerboeck_labeling_z2z2,
    ungerboeck_labeling_z4,
)
from oracles import brute_force_min_error, greedy_error

SMALL = ["5 2", "5 7", "13 04", "13 17", "23 04", "23 35"]
LABELINGS = [
    ungerboeck_labeling_z4(),
    distance_preserving_labeling_z4(),
    ungerboeck_labeling_z2z2(),
    distance_preserving_labeling_z2z2(),
]


def quantizer(spec, lab, cb=None):
    return TCQ(build_trellis(parse_code(spec)), lab, cb or LatticeCodebook(lab.partition))


def test_zero_path_is_fixed_point():
    q = quantizer("5 7", distance_preserving_labeling_z4())
    x = np.array([0.0, 4.0, -8.0, 12.0, 0.0, 4.0])
    res = q.encode(x)
    assert res.total_sq_error == 0.0
    assert not res.path_bits.any()
    np.testing.assert_array_equal(res.reconstruction, x)


def test_validation():
    q = quantizer("5 7", distance_preserving_labeling_z2z2())
    with pytest.raises(ValueError):
        q.encode(np.zeros(3))
    with pytest.raises(ValueError):
        q.encode(np.zeros(0))
    with pytest.raises(ValueError):
        q.encode(np.zeros(4), start_state=4)


@pytest.mark.parametrize("spec", SMALL)
@pytest.mark.parametrize("lab", LABELINGS, ids=lambda l: l.name)
def test_viterbi_matches_exhaustive_search(spec, lab):
    rng = np.random.default_rng(zlib.crc32(f"{spec}|{lab.name}".encode()))
    q = quantizer(spec, lab)
    for _ in range(5):
        L = int(rng.integers(1, 9))
        x = rng.uniform(-20, 20, L * lab.partition.dim)
        res = q.encode(x)
        assert res.total_sq_error == brute_force_min_error(x, q.trellis.code, lab, q.codebook)


def test_viterbi_any_start_matches_exhaustive():
    rng = np.random.default_rng(8)
    lab = distance_preserving_labeling_z4()
    q = quantizer("13 17", lab)
    for _ in range(5):
        x = rng.uniform(-10, 10, 7)
        res = q.encode(x, start_state=-1)
        assert res.total_sq_error == brute_force_min_error(x, q.trellis.code, lab, q.codebook, any_start=True)
        np.testing.assert_array_equal(q.decode(res.path_bits, res.point_selectors, res.initial_state), res.reconstruction)


def test_viterbi_finite_alphabet_matches_exhaustive():
    rng = np.random.default_rng(9)
    lab = ungerboeck_labeling_z4()
    q = quantizer("23 04", lab, init_alphabet(2, 0.5))
    for _ in range(10):
        x = rng.normal(size=8)
        assert q.encode(x).total_sq_error == brute_force_min_error(x, q.trellis.code, lab, q.codebook)


def test_encode_self_consistency_and_greedy_bound():
    rng = np.random.default_rng(10)
    for lab in LABELINGS:
        q = quantizer("133 171", lab)
        x = rng.uniform(0, 300, 400)
        res = q.encode(x)
        assert res.reconstruction.shape == x.shape
        assert res.total_sq_error == pytest.approx(((x - res.reconstruction) ** 2).sum(), rel=1e-12)
        assert res.total_sq_error <= greedy_error(x, q.trellis, lab, q.codebook) + 1e-9


@pytest.mark.parametrize("lab", LABELINGS, ids=lambda l: l.name)
def test_decode_roundtrip_all_codes(lab):
    from tcqlib.convcode import CODE_TABLE

    rng = np.random.default_rng(12)
    for fam in CODE_TABLE.values():
        for spec in fam.values():
            q = quantizer(spec, lab)
            for _ in range(8):
                x = rng.uniform(-100, 100, 2 * int(rng.integers(1, 40)))
                res = q.encode(x)
                np.testing.assert_array_equal(q.decode(res.path_bits, res.point_selectors), res.reconstruction)


def test_decode_finite_alphabet_and_selector_range():
    lab = distance_preserving_labeling_z4()
    q = quantizer("23 35", lab, init_alphabet(3, 0.3))
    x = np.random.default_rng(1).normal(size=50)
    res = q.encode(x)
    np.testing.assert_array_equal(q.decode(res.path_bits, res.point_selectors), res.reconstruction)
    bad = res.point_selectors.copy()
    bad[0, 0] = 4
    with pytest.raises(ValueError):
        q.decode(res.path_bits, bad)


def test_decode_all_zero():
    lab = distance_preserving_labeling_z2z2()
    q = quantizer("5 7", lab)
    out = q.decode(np.zeros(5, int), np.zeros((5, 2), int))
    np.testing.assert_array_equal(out, np.zeros(10))


@pytest.mark.parametrize("lab", LABELINGS, ids=lambda l: l.name)
def test_shift_invariance(lab):
    q = quantizer("53 75", lab)
    x = np.random.default_rng(2).uniform(0, 40, 200)
    a = q.encode(x)
    step = lab.partition.step
    b = q.encode(x + step)
    assert b.total_sq_error == pytest.approx(a.total_sq_error, rel=1e-12)
    np.testing.assert_allclose(b.reconstruction, a.reconstruction + step)
    np.testing.assert_array_equal(a.path_bits, b.path_bits)


def test_determinism_and_batch_equivalence():
    lab = ungerboeck_labeling_z4()
    q = quantizer("515 362", lab)
    x = np.random.default_rng(3).uniform(0, 512, (9, 300))
    r1 = q.encode_batch(x, want_path=True, chunk_size=2, workers=3)
    r2 = q.encode_batch(x, want_path=True, chunk_size=100, workers=1)
    for f in ("totals", "bits", "cosets", "selectors", "starts"):
        assert getattr(r1, f).tobytes() == getattr(r2, f).tobytes()
    for i in range(9):
        single = q.encode(x[i])
        assert single.total_sq_error == r1.totals[i]
        np.testing.assert_array_equal(single.path_bits, r1.bits[i])


def test_any_start_never_worse():
    lab = distance_preserving_labeling_z4()
    q = quantizer("133 171", lab)
    x = np.random.default_rng(4).uniform(0, 512, (20, 100))
    zero = q.encode_batch(x).totals
    free = q.encode_batch(x, start_state=-1).totals
    assert np.all(free <= zero)
