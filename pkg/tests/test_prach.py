import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybrid_ra.exceptions import InvalidConfigError, InvalidInputError
from hybrid_ra.geometry import DevicePlacement, GeometryConfig
from hybrid_ra.prach import (
    PreambleAssignment,
    detect_occupancy,
    preamble_from_uniform,
    select_preambles,
    subcarrier_start,
)
from hybrid_ra.traffic import MmtcPopulation, activate_mmtc


def population(ta_indexes):
    return MmtcPopulation(tuple(DevicePlacement(k, 0.0, i) for k, i in enumerate(ta_indexes)))


def assign(preamble, ta, device_id=0):
    return PreambleAssignment(device_id, preamble, ta, 0)


@pytest.mark.parametrize("annuli, i, expected", [(8, 1, 10), (8, 8, 17), (26, 1, 1), (7, 1, 10), (1, 1, 13)])
def test_subcarrier_start_examples(annuli, i, expected):
    assert subcarrier_start(annuli, i) == expected


def test_subcarrier_start_rejects_wide_window():
    with pytest.raises(InvalidConfigError):
        subcarrier_start(27, 1)


def test_subcarrier_start_rejects_index_outside_cell():
    with pytest.raises(InvalidInputError):
        subcarrier_start(8, 9)


@given(st.integers(1, 26))
def test_subcarrier_start_injective_and_inside_window(annuli):
    starts = [subcarrier_start(annuli, i) for i in range(1, annuli + 1)]
    assert len(set(starts)) == annuli
    assert min(starts) >= 1 and max(starts) <= 26


def test_single_device_single_preamble():
    (a,) = select_preambles(population([3]), 1, np.random.default_rng(0), annuli=8)
    assert a.preamble == 1 and a.ta_index == 3


def test_select_preambles_placement():
    (a,) = select_preambles(population([1]), 10, np.random.default_rng(0), annuli=8)
    assert a.subcarrier_start == 10


def test_select_preambles_rejects_zero_preambles():
    with pytest.raises(InvalidConfigError):
        select_preambles(population([1]), 0, np.random.default_rng(0))


def test_preamble_choice_is_uniform():
    n, tp = 10**5, 40
    pop = activate_mmtc(n, GeometryConfig(1200), np.random.default_rng(1))
    picks = np.array([a.preamble for a in select_preambles(pop, tp, np.random.default_rng(2), annuli=8)])
    counts = np.bincount(picks, minlength=tp + 1)[1:]
    p = 1 / tp
    assert np.all(np.abs(counts - n * p) <= 3 * np.sqrt(n * p * (1 - p)) + 1)


def test_preamble_from_uniform_edges():
    assert preamble_from_uniform(0.0, 40) == 1
    assert preamble_from_uniform(1 - 1e-16, 40) == 40
    assert preamble_from_uniform(1.0, 40) == 40


def test_detect_empty():
    occ = detect_occupancy([], 5, 8)
    assert occ.counts.shape == (5, 8) and occ.total == 0


def test_detect_direct_counts():
    occ = detect_occupancy([assign(3, 2), assign(3, 5)], 10, 8)
    assert occ.n(3, 2) == 1 and occ.n(3, 5) == 1 and occ.total == 2
    occ = detect_occupancy([assign(7, 4, k) for k in range(3)], 10, 8)
    assert occ.n(7, 4) == 3
    assert occ.num_preambles == 10 and occ.annuli == 8


def test_detect_rejects_out_of_range():
    with pytest.raises(InvalidInputError):
        detect_occupancy([assign(11, 1)], 10, 8)


@given(st.lists(st.tuples(st.integers(1, 12), st.integers(1, 6)), max_size=60))
def test_detect_is_lossless_histogram(pairs):
    occ = detect_occupancy([assign(r, i, k) for k, (r, i) in enumerate(pairs)], 12, 6)
    assert occ.total == len(pairs)
    for r in range(1, 13):
        assert occ.counts[r - 1].sum() == sum(1 for p, _ in pairs if p == r)


def test_miss_hook_drops_cells():
    pairs = [assign(r, 1, r) for r in range(1, 11)]
    assert detect_occupancy(pairs, 10, 1, miss_probability=1.0, rng=np.random.default_rng(0)).total == 0
    partial = detect_occupancy(pairs, 10, 1, miss_probability=0.5, rng=np.random.default_rng(0))
    assert set(np.unique(partial.counts)) <= {0, 1}


def test_miss_hook_needs_rng():
    with pytest.raises(InvalidInputError):
        detect_occupancy([assign(1, 1)], 2, 2, miss_probability=0.1)
