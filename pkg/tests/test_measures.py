from fractions import Fraction as Q

import pytest
from hypothesis import given
from hypothesis import strategies as st

from signed_ce.errors import CriticalLevel
from signed_ce.measures import AtomicMeasure, mu_full_at, mu_tilde_at, pair, total_variation
from signed_ce.pwl import level_gaps, preimages, stage_function
from signed_ce.stagegen import build


def f_(K):
    return stage_function(build(K))


def test_mu_tilde_examples():
    m = mu_tilde_at(f_(1), Q(7, 3))
    assert m.atoms == ((Q(1, 3), 1), (Q(1, 2), -1), (Q(2, 3), 1))
    assert total_variation(m) == 3
    assert mu_tilde_at(f_(0), Q(5, 2)) == AtomicMeasure.dirac(Q(1, 2))
    assert len(mu_tilde_at(f_(1), Q(7, 2))) == 0


def test_mu_full_examples():
    assert len(mu_full_at(f_(1), 1)) == 0
    assert mu_full_at(f_(1), 3).atoms == ((0, -1), (1, 1))
    m = mu_full_at(f_(1), Q(7, 3))
    assert m.atoms == ((0, -1), (Q(1, 3), 1), (Q(1, 2), -1), (Q(2, 3), 1))


def test_mu_rejects_critical_levels():
    with pytest.raises(CriticalLevel):
        mu_tilde_at(f_(1), Q(8, 3))


def test_total_variation_and_pairing():
    assert total_variation(AtomicMeasure()) == 0
    m = mu_tilde_at(f_(1), Q(7, 3))
    assert pair(m, lambda x: x) == Q(1, 2)
    assert pair(AtomicMeasure(), lambda x: 1 / 0) == 0
    assert pair(AtomicMeasure.dirac(Q(2, 5)), lambda x: x * x) == Q(4, 25)


def test_tv_in_stage_two_witness_window():
    m = mu_tilde_at(f_(2), Q(214, 96))
    assert total_variation(m) == 5


@pytest.mark.parametrize("K", [0, 1, 2, 5, 9])
def test_tv_equals_preimage_count_and_total_mass_vanishes(K):
    f = f_(K)
    for g in level_gaps(f):
        t = (g.lo + g.hi) / 2
        assert total_variation(mu_tilde_at(f, t)) == len(preimages(f, t)) == g.count
        assert pair(mu_full_at(f, t), lambda x: 1) == 0
    # also below and above the range
    lo, hi = f.value_range()
    for t in (lo - 1, hi + Q(1, 3)):
        assert pair(mu_full_at(f, t), lambda x: 1) == 0


@pytest.mark.parametrize("K", [0, 3, 8])
def test_integrated_tv_is_one(K):
    f = f_(K)
    total = sum(((g.hi - g.lo) * total_variation(mu_tilde_at(f, (g.lo + g.hi) / 2)) for g in level_gaps(f)), Q(0))
    assert total == 1


atoms = st.lists(
    st.tuples(st.fractions(-2, 2, max_denominator=20), st.integers(-3, 3)),
    max_size=8,
)


@given(atoms, atoms)
def test_arithmetic_and_merge(a, b):
    ma, mb = AtomicMeasure.from_pairs(a), AtomicMeasure.from_pairs(b)
    g = lambda x: x * x + 1  # noqa: E731
    assert pair(ma + mb, g) == pair(ma, g) + pair(mb, g)
    assert pair(ma - mb, g) == pair(ma, g) - pair(mb, g)
    assert len(ma - ma) == 0
    assert all(w != 0 for w in ma.weights)
    assert list(ma.locations) == sorted(set(ma.locations))
    assert total_variation(ma) <= sum(abs(w) for _, w in a)


@given(atoms)
def test_json_round_trip(a):
    m = AtomicMeasure.from_pairs(a)
    assert AtomicMeasure.from_json(m.to_json()) == m
    for item in m.to_list():
        assert "/" in item["x"]


def test_rational_weights_need_flag():
    with pytest.raises(TypeError):
        AtomicMeasure(((Q(0), Q(1, 2)),))
    m = AtomicMeasure(((Q(0), Q(1, 2)),), allow_rational_weights=True)
    assert AtomicMeasure.from_json(m.to_json()) == m


def test_invalid_atoms():
    with pytest.raises(ValueError):
        AtomicMeasure(((Q(1), 1), (Q(0), 1)))
    with pytest.raises(ValueError):
        AtomicMeasure(((Q(0), 1), (Q(0), -1)))
    with pytest.raises(ValueError):
        AtomicMeasure(((Q(0), 0),))
