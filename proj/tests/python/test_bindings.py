import math

import pytest

import rankstab


def test_rbo_identical_and_swapped():
    same = rankstab.rbo(["a", "b", "c"], ["a", "b", "c"])
    assert same.ext == 1.0
    assert same.min == pytest.approx(1 - 0.85**3)
    assert same.max == pytest.approx(1.0)

    swapped = rankstab.rbo(["a", "b"], ["b", "a"], p=0.5)
    assert swapped.min == pytest.approx(0.25)
    assert swapped.ext == pytest.approx(0.5)
    assert swapped.max == pytest.approx(0.5)


def test_rbo_rejects_duplicates_and_bad_persistence():
    with pytest.raises(ValueError):
        rankstab.rbo(["a", "a"], ["a"])
    with pytest.raises(ValueError):
        rankstab.rbo(["a"], ["a"], p=1.0)


def test_parameter_diagnostics():
    assert rankstab.prefix_weight(0.85, 10) == pytest.approx(0.9333257275417703, abs=1e-12)
    assert rankstab.prefix_weight(0.5, 1) == pytest.approx(math.log(2), abs=1e-12)
    assert rankstab.expected_depth(0.85) == pytest.approx(1 / 0.15)
    assert rankstab.DEFAULT_PERSISTENCE == 0.85


def test_aggregate_orders_by_mean_rank_and_drops_rare_urls():
    lists = [["x", "y", "z"], ["y", "x"], ["y", "w"]]
    assert rankstab.aggregate(lists) == ["y", "x"]
    assert rankstab.aggregate(lists, threshold=0.1) == ["y", "x", "w", "z"]


def test_series_and_smoothing():
    times = ["2017-09-01T05:00:00Z", "2017-09-01T17:00:00Z", "2017-09-02T05:00:00Z"]
    rankings = [["a", "b"], ["b", "a"], ["b", "a"]]
    successive = rankstab.stability_series(times, rankings, mode="successive", p=0.5)
    assert [round(pt.rbo_ext, 12) for pt in successive] == [0.5, 1.0]
    assert successive[0].timepoint == "2017-09-01T17:00:00Z"
    fixed = rankstab.stability_series(times, rankings, mode="fixed", p=0.5)
    assert [round(pt.rbo_ext, 12) for pt in fixed] == [0.5, 0.5]
    smoothed = rankstab.moving_average(successive, 2)
    assert smoothed[1].rbo_ext == pytest.approx(0.75)
    with pytest.raises(ValueError):
        rankstab.stability_series(times[:1], rankings[:1])


def test_window_for_days():
    times = [f"2017-09-{day:02d}T{hour:02d}:00:00Z" for day in range(1, 11) for hour in (4, 16)]
    assert rankstab.window_for_days(times, 3.0) == 6


def test_parse_suggestions_groups_fetches():
    text = (
        "source,queryterm,date,suggestterm,position\n"
        "google,Die Linke,2017-09-01 05:03:00,die linke wahlprogramm,0\n"
        "google,Die Linke,2017-09-01 05:03:00,die linke umfrage,1\n"
        "google,die linke,2017-09-01 17:01:00,die linke umfrage,0\n"
    )
    log = rankstab.parse_suggestions(text, aliases="Die Linke = dielinke\ndie linke = dielinke\n")
    assert [s["query"] for s in log["snapshots"]] == ["dielinke", "dielinke"]
    assert log["snapshots"][0]["ranking"] == ["die linke wahlprogramm", "die linke umfrage"]
    assert log["stats"]["unique_terms"] == 2
    assert log["diagnostics"] == []


def test_parse_suggestions_bad_header():
    with pytest.raises(rankstab.InputError):
        rankstab.parse_suggestions("a,b,c\n")
