import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import inverted_panel
from hv3d.errors import RatingsError
from hv3d.harness.subjective import compute_mos, read_mos, screen_outliers, write_mos
from hv3d.videoio import RatingsTable


def test_identical_ratings_none_rejected():
    t = RatingsTable(["a", "b", "c"], ["s1", "s2", "s3", "s4"], np.array([[5.0] * 4, [7.0] * 4, [2.0] * 4]))
    res = screen_outliers(t)
    assert res.rejected == {} and res.retained == t.subjects


def test_inverted_rater_rejected():
    t = inverted_panel()
    res = screen_outliers(t)
    assert list(res.rejected) == ["obs07"]
    assert "obs07" not in res.retained and len(res.retained) == 17
    tally = {x.subject: x for x in res.tallies}["obs07"]
    assert tally.outlier_fraction > 0.05 and tally.balance < 0.3


def test_screening_needs_three_subjects():
    with pytest.raises(RatingsError, match="3 subjects"):
        screen_outliers(RatingsTable(["a"], ["s1", "s2"], np.array([[5.0, 6.0]])))


@settings(max_examples=20, deadline=None)
@given(perm_seed=st.integers(0, 2**31 - 1), bad=st.integers(0, 17))
def test_screening_permutation_equivariant(perm_seed, bad):
    t = inverted_panel(bad=bad)
    perm = np.random.default_rng(perm_seed).permutation(len(t.subjects))
    tp = RatingsTable(t.items, [t.subjects[k] for k in perm], t.scores[:, perm])
    assert set(screen_outliers(tp).rejected) == set(screen_outliers(t).rejected) == {t.subjects[bad]}


def test_compute_mos_examples():
    t = RatingsTable(["a", "b"], ["s1", "s2", "s3"], np.array([[4.0, 5.0, 6.0], [4.0, np.nan, 6.0]]))
    mos = compute_mos(t, t.subjects)
    assert [m.mos for m in mos] == [5.0, 5.0]
    assert [m.n_subjects_retained for m in mos] == [3, 2]


def test_compute_mos_errors():
    t = RatingsTable(["a"], ["s1", "s2", "s3"], np.array([[np.nan, 5.0, 6.0]]))
    with pytest.raises(RatingsError, match="no ratings"):
        compute_mos(t, ["s1"])
    with pytest.raises(RatingsError, match="no retained"):
        compute_mos(t, [])
    with pytest.raises(RatingsError, match="unknown"):
        compute_mos(t, ["zz"])


def test_compute_mos_full_panel_oracle(rng):
    scores = rng.integers(1, 11, (32, 18)).astype(float)
    scores[rng.random(scores.shape) < 0.05] = np.nan
    t = RatingsTable([f"i{j}" for j in range(32)], [f"s{i}" for i in range(18)], scores)
    keep = [f"s{i}" for i in range(18) if i != 4]
    got = compute_mos(t, keep)
    for j, rec in enumerate(got):
        vals = [scores[j, i] for i in range(18) if i != 4 and scores[j, i] == scores[j, i]]
        total = 0.0
        for v in vals:
            total += v
        assert rec.mos == pytest.approx(total / len(vals), abs=1e-12)
        assert rec.n_subjects_retained == len(vals)


def test_mos_file_round_trip(tmp_path):
    t = inverted_panel()
    recs = compute_mos(t, screen_outliers(t).retained)
    p = tmp_path / "mos.csv"
    write_mos(recs, p)
    assert read_mos(p) == recs
    with open(p, newline="") as fh:
        assert next(csv.reader(fh)) == ["item", "mos", "n_subjects_retained"]
