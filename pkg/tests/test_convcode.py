import itertools

import numpy as np
import pytest

from tcqlib.convcode import (
    CODE_TABLE,
    CodeTableError,
    ConvCode,
    build_trellis,
    code_table,
    free_distance,
    parse_code,
)
from oracles import brute_free_distance, convolve_labels, gf2_gcd

ALL_TABLE_CODES = sorted({c for fam in CODE_TABLE.values() for c in fam.values()})


@pytest.mark.parametrize(
    "spec, nu, states",
    [("133 171", 6, 64), ("5 7", 2, 4), ("[13 04]", 3, 8), ("  2335   3661 ", 10, 1024)],
)
def test_parse_code(spec, nu, states):
    code = parse_code(spec)
    assert code.nu == nu
    assert code.n_states == states


@pytest.mark.parametrize("spec", ["1 1", "5 8", "0 7", "57", "5 7 1", "", "[5 7"])
def test_parse_code_rejects(spec):
    with pytest.raises(ValueError):
        parse_code(spec)


def test_convcode_rejects_missing_end_taps():
    with pytest.raises(ValueError):
        ConvCode(0b110, 0b010, 2)  # no delay-2 tap
    with pytest.raises(ValueError):
        ConvCode(0b011, 0b001, 2)  # no delay-0 tap


def test_octal_roundtrip():
    for spec in ALL_TABLE_CODES:
        assert parse_code(spec).octal() == spec


def test_trellis_5_7_first_branches():
    tr = build_trellis(parse_code("5 7"))
    assert tr.out_label[0, 0] == 0 and tr.next_state[0, 0] == 0
    # g0 = 101, g1 = 111 with register (1, 0, 0): both parities are 1
    assert tr.out_label[0, 1] == 3
    assert tr.next_state[0, 1] == 0b10


@pytest.mark.parametrize("spec", ALL_TABLE_CODES)
def test_trellis_is_function_graph(spec):
    tr = build_trellis(parse_code(spec))
    n = tr.n_states
    assert tr.next_state.shape == (n, 2)
    indeg = np.bincount(tr.next_state.ravel(), minlength=n)
    assert np.all(indeg == 2)
    assert set(np.unique(tr.out_label)) <= {0, 1, 2, 3}
    for s, b in itertools.product(range(n), (0, 1)):
        ns = tr.next_state[s, b]
        assert tr.input_bit(ns) == b
        assert s in tr.prev_state[ns]
    for ns in range(n):
        for x in (0, 1):
            p = tr.prev_state[ns, x]
            b = tr.input_bit(ns)
            assert tr.next_state[p, b] == ns
            assert tr.prev_label[ns, x] == tr.out_label[p, b]


@pytest.mark.parametrize("spec", ALL_TABLE_CODES)
def test_trellis_matches_direct_convolution(spec):
    code = parse_code(spec)
    tr = build_trellis(code)
    rng = np.random.default_rng(7)
    u = rng.integers(0, 2, 60).tolist()
    s, labels = 0, []
    for b in u:
        labels.append(int(tr.out_label[s, b]))
        s = tr.next_state[s, b]
    assert labels == convolve_labels(code, u)


def test_label_balance_when_both_generators_have_end_taps():
    for spec in ["5 7", "13 17", "23 35", "53 75", "133 171", "561 753"]:
        tr = build_trellis(parse_code(spec))
        counts = np.bincount(tr.out_label.ravel(), minlength=4)
        assert np.all(counts == counts[0]), spec


@pytest.mark.parametrize(
    "spec, dfree",
    [("5 7", 5), ("13 17", 6), ("23 35", 7), ("53 75", 8), ("133 171", 10),
     ("561 753", 12), ("2335 3661", 14), ("5 2", 3), ("13 04", 4), ("23 04", 4),
     ("45 10", 4), ("103 024", 5), ("235 126", 8), ("515 362", 8)],
)
def test_free_distance_table(spec, dfree):
    # values frozen from brute_free_distance for nu <= 6
    assert free_distance(parse_code(spec)) == dfree


def _valid_codes(nu):
    for g0, g1 in itertools.product(range(1, 1 << (nu + 1)), repeat=2):
        top = 1 << nu
        if (g0 | g1) & top and (g0 | g1) & 1 and gf2_gcd(g0, g1) == 1:
            yield ConvCode(g0, g1, nu)


@pytest.mark.parametrize("nu", [1, 2, 3])
def test_free_distance_matches_brute_force_exhaustive(nu):
    for code in _valid_codes(nu):
        assert free_distance(code) == brute_free_distance(code), code


def test_5_7_is_best_four_state_code():
    best = max(free_distance(c) for c in _valid_codes(2))
    assert free_distance(parse_code("5 7")) == best == 5


def test_distance_optimal_never_worse_than_ungerboeck():
    for n, spec in CODE_TABLE["distance_optimal"].items():
        if n in CODE_TABLE["ungerboeck"]:
            assert free_distance(parse_code(spec)) >= free_distance(code_table("ungerboeck", n))


def test_code_table_entries():
    assert code_table("distance_optimal", 256) == parse_code("561 753")
    assert code_table("ungerboeck", 4) == parse_code("5 2")
    assert code_table("proposed", 1024).octal() == "2335 3661"
    with pytest.raises(CodeTableError, match="absent"):
        code_table("distance_optimal", 128)
    with pytest.raises(CodeTableError):
        code_table("ungerboeck", 1024)
    with pytest.raises(ValueError):
        code_table("turbo", 4)
