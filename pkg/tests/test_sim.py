import json

import numpy as np
import pytest

from polarbp.code import construct_frozen_set
from polarbp.decoder import PRESETS
from polarbp.sim import CSV_FIELDS, ChannelParams, StatsRow, frame_rng, run_campaign, run_point, transmit


def test_sigma2():
    p = ChannelParams(ebno_db=3.0, rate=0.5)
    assert p.sigma2 == pytest.approx(1.0 / 10 ** 0.3)
    assert ChannelParams(0.0, 1.0).sigma2 == 0.5


class TestTransmit:
    def test_noiseless_limit_signs(self):
        x = np.array([0, 1, 1, 0, 0, 1, 0, 1])
        llr = transmit(x, ChannelParams(60.0, 0.5), 3)
        np.testing.assert_array_equal(llr > 0, x == 0)

    def test_seeded(self):
        x = np.zeros(64, dtype=int)
        p = ChannelParams(2.0, 0.5)
        np.testing.assert_array_equal(transmit(x, p, 42), transmit(x, p, 42))
        assert not np.array_equal(transmit(x, p, 42), transmit(x, p, 43))

    def test_llr_mean(self):
        p = ChannelParams(1.0, 0.5)
        llr = transmit(np.zeros(100_000, dtype=int), p, 0)
        sigma2 = p.sigma2
        se = (2.0 / np.sqrt(sigma2)) / np.sqrt(llr.size)
        assert abs(llr.mean() - 2.0 / sigma2) < 3 * se


def test_frame_rng_distinguishes_inputs():
    draws = {
        key: frame_rng(*key).standard_normal()
        for key in [(0, "xjbp", 3.0, 0), (1, "xjbp", 3.0, 0), (0, "roundtrip", 3.0, 0), (0, "xjbp", 3.5, 0), (0, "xjbp", 3.0, 1)]
    }
    assert len(set(draws.values())) == len(draws)
    assert frame_rng(0, "xjbp", 3.0, 7).standard_normal() == frame_rng(0, "xjbp", 3.0, 7).standard_normal()
    with pytest.raises(ValueError):
        frame_rng(-1, "xjbp", 3.0, 0)


class TestCampaign:
    def test_noiseless(self):
        code = construct_frozen_set(64, 32)
        rep = run_campaign(code, list(PRESETS), [60.0], max_frames=20)
        for row in rep.rows:
            assert row.fer == 0 and row.ber == 0 and row.mean_iters == 1
            assert row.frames == 20

    def test_row_invariants(self):
        code = construct_frozen_set(64, 32)
        rep = run_campaign(code, ["roundtrip", "conventional"], [2.0, 1.0], max_frames=300, min_frame_errors=None)
        assert [(r.variant, r.ebno_db) for r in rep.rows] == [
            ("roundtrip", 1.0), ("roundtrip", 2.0), ("conventional", 1.0), ("conventional", 2.0)
        ]
        for r in rep.rows:
            assert r.ber == r.bit_errors / (r.frames * code.k)
            assert r.fer == r.frame_errors / r.frames
            assert r.mean_op_units == pytest.approx(r.mean_iters * 2 * 64 * 6)

    def test_min_errors_stops_exactly(self):
        code = construct_frozen_set(64, 32)
        row = run_point(code, "roundtrip", PRESETS["roundtrip"], 0.0, max_frames=5000, min_frame_errors=17)
        assert row.frame_errors == 17 and row.frames < 5000
        full = run_point(code, "roundtrip", PRESETS["roundtrip"], 0.0, max_frames=row.frames, min_frame_errors=None)
        assert full.frame_errors == 17 and full.bit_errors == row.bit_errors

    @pytest.mark.parametrize("threads,chunk", [(1, 250), (3, 250), (4, 37), (2, 1000)])
    def test_independent_of_threads_and_chunks(self, threads, chunk):
        code = construct_frozen_set(128, 64)
        ref = run_point(code, "xjbp", PRESETS["xjbp"], 2.0, max_frames=600, min_frame_errors=9, base_seed=5)
        row = run_point(
            code, "xjbp", PRESETS["xjbp"], 2.0, max_frames=600, min_frame_errors=9, base_seed=5,
            threads=threads, chunk_size=chunk,
        )
        for f in CSV_FIELDS:
            assert getattr(row, f) == getattr(ref, f)

    def test_seed_matters(self):
        code = construct_frozen_set(64, 32)
        a = run_campaign(code, ["roundtrip"], [1.0], max_frames=400, min_frame_errors=None, base_seed=1)
        b = run_campaign(code, ["roundtrip"], [1.0], max_frames=400, min_frame_errors=None, base_seed=2)
        c = run_campaign(code, ["roundtrip"], [1.0], max_frames=400, min_frame_errors=None, base_seed=1)
        assert a.to_csv() == c.to_csv() != b.to_csv()

    def test_csv_and_json(self):
        code = construct_frozen_set(32, 16)
        rep = run_campaign(code, ["xjbp"], [1.0, 3.0], max_frames=50, base_seed=3)
        lines = rep.to_csv().splitlines()
        assert lines[0] == "variant,ebno_db,frames,bit_errors,frame_errors,ber,fer,mean_iters,mean_op_units"
        assert len(lines) == 3 and lines[1].startswith("xjbp,1.0,")
        doc = json.loads(rep.to_json())
        assert [list(r) for r in doc["rows"]] == [list(CSV_FIELDS)] * 2
        assert doc["config"]["seed"] == 3 and doc["config"]["mask"].count("1") == 16
        for r, line in zip(doc["rows"], lines[1:]):
            assert ",".join(repr(v) if isinstance(v, float) else str(v) for v in r.values()) == line

    def test_rejects_empty(self):
        code = construct_frozen_set(8, 4)
        with pytest.raises(ValueError):
            run_campaign(code, [], [1.0])
        with pytest.raises(ValueError):
            run_campaign(code, ["xjbp"], [])


def test_fer_interval():
    row = StatsRow("x", 1.0, 1000, 0, 10, 0.0, 0.01, 1.0, 1.0)
    lo, hi = row.fer_interval()
    assert lo < 0.01 < hi
    assert lo == pytest.approx(0.0048, abs=2e-4) and hi == pytest.approx(0.0183, abs=2e-4)
