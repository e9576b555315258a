import json
import math

import pytest

import lmfractal as lf


def test_power_law_exact():
    pts = [(t, 3.0 * t ** -1.5) for t in (8, 16, 32, 64, 128)]
    fit = lf.fit_power_law(pts)
    assert fit.slope == pytest.approx(-1.5, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0)


def test_rs_hand_values():
    assert lf.rs_statistic([1.0, 2.0], 2) == pytest.approx(1.0, abs=1e-12)
    assert lf.rs_statistic([1.0, -1.0, 1.0, -1.0], 4) == pytest.approx(4 / 3, abs=1e-12)
    assert lf.rs_statistic([2.0, 2.0], 2) is None


def test_fgn_round_trip():
    corpus = lf.generate("fgn", hurst=0.7, docs=300, length=400, seed=3)
    assert len(corpus) == 300 and len(corpus[0]) == 400
    est = lf.estimate_hurst(corpus)
    assert abs(est.point - 0.7) <= 0.06
    assert est.kind == "hurst"


def test_bootstrap_is_deterministic():
    corpus = lf.generate("iid", docs=100, length=400, seed=1)
    cfg = lf.EstimationConfig(bootstrap_samples=4, seed=9)
    a = lf.bootstrap(corpus, "holder", cfg)
    assert a == lf.bootstrap(corpus, "holder", cfg)
    assert len(a.resamples) == 4


def test_errors_map_to_python():
    with pytest.raises(lf.ValidationError):
        lf.EstimationConfig(scales=[8, 4, 16])
    flat = [[1.0] * 400 for _ in range(3)]
    with pytest.raises(lf.EstimationError):
        lf.estimate_hurst(flat)
    with pytest.raises(lf.Error):
        lf.parse_quality_rating("no rating here.")


def test_mutual_information():
    xs = ["a", "b", "c", "d"] * 50
    mi, norm = lf.mutual_information(xs, xs)
    assert norm == pytest.approx(1.0, abs=1e-9)
    assert mi == pytest.approx(math.log(4))
    assert lf.bin_values([0.05, 0.15, 0.65]) == [0, 1, 6]


def test_load_scores(tmp_path):
    path = tmp_path / "store.jsonl"
    rows = [
        {"id": f"d{i}", "source": "human", "scoring_model": "m", "domain": "news",
         "scores": [float(j % 7) for j in range(470 + i)]}
        for i in range(3)
    ]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    series = lf.load_scores(path, ["domain=news"])
    assert [len(s) for s in series] == [400, 400, 400]
    with pytest.raises(lf.EmptySelectionError):
        lf.load_scores(path, ["domain=patent"])
