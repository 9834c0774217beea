import csv
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamentropy import io as bio
from beamentropy.array import ArrayGeometry
from beamentropy.beamstats import BeamHistogram
from beamentropy.channel import ChannelMatrix, Scenario
from beamentropy.errors import ChannelFormatError, ConfigError
from beamentropy.montecarlo import ExperimentSpec, run, run_on_matrices

MINIMAL = "scenario: UMi\ncarrier_ghz: 28\nruns: 500\nseed: 42\n"

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


def _csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


class TestConfig:
    def test_minimal(self):
        cfg = bio.parse_config(MINIMAL)
        assert cfg.scenario.kind is Scenario.UMi and cfg.scenario.carrier_ghz == 28.0
        assert (cfg.runs, cfg.seed, cfg.nt, cfg.nr) == (500, 42, 256, 16)
        spec = cfg.to_spec()
        assert spec.n_runs == 500 and spec.tx_geom.num_elements == 256

    def test_channel_section(self):
        cfg = bio.parse_config(MINIMAL + "channel:\n  max_clusters: 1\n  k_factor_db: 30\n")
        assert cfg.scenario.max_clusters == 1 and cfg.scenario.k_factor_db == 30.0

    def test_unknown_key_names_line_and_field(self):
        with pytest.raises(ConfigError) as e:
            bio.parse_config(MINIMAL + "fooo: 3\n")
        assert "line 5" in str(e.value) and "fooo" in str(e.value)

    def test_unknown_section_key(self):
        with pytest.raises(ConfigError) as e:
            bio.parse_config(MINIMAL + "channel:\n  k_factr_db: 3\n")
        assert "line 6" in str(e.value) and "channel.k_factr_db" in str(e.value)

    def test_bad_type(self):
        with pytest.raises(ConfigError, match="line 3.*runs"):
            bio.parse_config("scenario: UMi\ncarrier_ghz: 28\nruns: lots\n")

    def test_rma_above_cap(self):
        with pytest.raises(ConfigError, match="7 GHz"):
            bio.parse_config("scenario: RMa\ncarrier_ghz: 28\n")

    def test_rma_ok(self):
        cfg = bio.parse_config("scenario: RMa\ncarrier_ghz: 3.5\nnt: 128\nnr: 4\n")
        assert cfg.scenario.bs_height_m == 35

    @pytest.mark.parametrize("text", [
        "carrier_ghz: 28\n",
        "scenario: UMi\n",
        "scenario: UMi\ncarrier_ghz: 28\nrank_threshold: 2\n",
        "scenario: UMi\ncarrier_ghz: 28\nsubcarrier_count: 4\n",
        "scenario: UMi\ncarrier_ghz: 28\ningest: x.csv\n",
        "- a\n- b\n",
        "scenario: [unclosed\n",
    ])
    def test_rejected(self, text):
        with pytest.raises(ConfigError):
            bio.parse_config(text)

    def test_out_dir_precedence(self, monkeypatch):
        cfg = bio.parse_config(MINIMAL + "out: from_cfg\n")
        monkeypatch.delenv(bio.OUT_DIR_ENV, raising=False)
        assert str(cfg.out_dir()) == "from_cfg"
        monkeypatch.setenv(bio.OUT_DIR_ENV, "from_env")
        assert str(cfg.out_dir()) == "from_env"
        monkeypatch.delenv(bio.OUT_DIR_ENV)
        assert str(bio.parse_config(MINIMAL).out_dir()) == bio.DEFAULT_OUT_DIR


class TestChannelCsv:
    def test_round_trip_bit_exact(self, tmp_path, rng):
        mats = [ChannelMatrix(rng.normal(size=(4, 8)) + 1j * rng.normal(size=(4, 8)), 28.0),
                ChannelMatrix(np.array([[complex(1e-300, -0.0), complex(-5e-324, 1e308)]]), 73.5)]
        p = tmp_path / "h.csv"
        bio.write_channels(p, mats)
        back = bio.ingest_channels(p)
        assert back == mats
        assert np.signbit(back[1].entries[0, 0].imag)

    @given(st.integers(1, 4), st.integers(1, 4), st.data())
    @settings(max_examples=40, deadline=None)
    def test_round_trip_property(self, tmp_path_factory, nr, nt, data):
        vals = data.draw(st.lists(st.tuples(finite, finite), min_size=nr * nt, max_size=nr * nt))
        h = ChannelMatrix(np.array([complex(a, b) for a, b in vals]).reshape(nr, nt), 28.0)
        p = tmp_path_factory.mktemp("c") / "h.csv"
        bio.write_channels(p, h)
        assert bio.ingest_channels(p) == [h]

    def _bad(self, tmp_path, text):
        p = tmp_path / "bad.csv"
        p.write_text(text)
        with pytest.raises(ChannelFormatError) as e:
            bio.ingest_channels(p)
        return str(e.value)

    def test_truncated(self, tmp_path):
        msg = self._bad(tmp_path, "# rows=2 cols=2 carrier_ghz=28\n0,0,1,0\n0,1,1,0\n1,0,1,0\n")
        assert msg.startswith("line 5") and "truncated" in msg

    def test_truncated_before_next_block(self, tmp_path):
        msg = self._bad(tmp_path, "# rows=1 cols=2 carrier_ghz=28\n0,0,1,0\n# rows=1 cols=1 carrier_ghz=28\n0,0,1,0\n")
        assert msg.startswith("line 3")

    def test_non_numeric(self, tmp_path):
        assert self._bad(tmp_path, "# rows=1 cols=1 carrier_ghz=28\n0,0,abc,0\n").startswith("line 2")

    def test_out_of_order(self, tmp_path):
        assert self._bad(tmp_path, "# rows=1 cols=2 carrier_ghz=28\n0,1,1,0\n0,0,1,0\n").startswith("line 2")

    def test_missing_header(self, tmp_path):
        assert self._bad(tmp_path, "0,0,1,0\n").startswith("line 1")

    def test_non_finite(self, tmp_path):
        assert self._bad(tmp_path, "# rows=1 cols=1 carrier_ghz=28\n0,0,nan,0\n").startswith("line 2")


class TestHistogramCsv:
    def test_round_trip(self, tmp_path):
        h = BeamHistogram(np.array([3, 0, 7, 1]))
        bio.write_histogram(tmp_path / "h.csv", h)
        back, probs = bio.read_histogram(tmp_path / "h.csv")
        assert back == h
        assert probs[2] == 7 / 11
        assert math.fsum(probs) == pytest.approx(1.0, abs=1e-12)

    @given(st.lists(st.integers(0, 10**9), min_size=1, max_size=64).filter(lambda c: sum(c) > 0))
    @settings(max_examples=40, deadline=None)
    def test_round_trip_property(self, tmp_path_factory, counts):
        p = tmp_path_factory.mktemp("h") / "h.csv"
        h = BeamHistogram(np.array(counts))
        bio.write_histogram(p, h)
        back, probs = bio.read_histogram(p)
        assert back == h
        np.testing.assert_array_equal(probs, np.array(counts) / sum(counts))


@pytest.fixture(scope="module")
def result():
    cfg = bio.parse_config("scenario: UMi\ncarrier_ghz: 28\nruns: 600\nseed: 3\nnt: 64\nnr: 16\n")
    return cfg, run(cfg.to_spec())


class TestReports:
    def test_files_and_columns(self, tmp_path, result):
        cfg, res = result
        bundle = bio.emit_reports(res, cfg, tmp_path)
        names = {p.name for p in bundle.files}
        assert {"summary.csv", "rx_hist.csv", "tx_hist.csv", "entropy_trace.csv",
                "sv_spectrum.csv", "metadata.csv", "rx_hist.dat", "tx_hist.dat"} == names
        rows = _csv(tmp_path / "summary.csv")
        assert tuple(rows[0]) == bio.SUMMARY_FIELDS and len(rows) == 2
        rec = dict(zip(rows[0], rows[1]))
        assert float(rec["rx_entropy_bits"]) == res.rx_entropy.entropy_bits
        assert int(rec["runs"]) == 600

    def test_hist_rows_and_probabilities(self, tmp_path, result):
        cfg, res = result
        bio.emit_reports(res, cfg, tmp_path)
        rows = _csv(tmp_path / "rx_hist.csv")
        assert len(rows) == 17
        assert math.fsum(float(r[2]) for r in rows[1:]) == pytest.approx(1.0, abs=1e-12)
        assert sum(int(r[1]) for r in rows[1:]) == 600

    def test_metadata(self, tmp_path, result):
        cfg, res = result
        bio.emit_reports(res, cfg, tmp_path)
        meta = dict(_csv(tmp_path / "metadata.csv")[1:])
        assert meta["seed"] == "3" and meta["source"] == "UMi" and "timestamp" in meta

    def test_csv_only(self, tmp_path, result):
        cfg, res = result
        from dataclasses import replace
        bundle = bio.emit_reports(res, replace(cfg, formats=("csv",)), tmp_path)
        assert not any(p.suffix == ".dat" for p in bundle.files)

    @pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
    def test_unwritable_permissions(self, tmp_path, result):
        cfg, res = result
        d = tmp_path / "ro"
        d.mkdir(mode=0o500)
        with pytest.raises(OSError):
            bio.emit_reports(res, cfg, d)

    def test_unwritable_path_is_a_file(self, tmp_path, result):
        cfg, res = result
        f = tmp_path / "file"
        f.write_text("x")
        with pytest.raises(OSError):
            bio.emit_reports(res, cfg, f / "sub")

    def test_ingested_report(self, tmp_path):
        mats = [ChannelMatrix(np.ones((4, 8)), 28.0)]
        spec = ExperimentSpec(None, ArrayGeometry(8), ArrayGeometry(4), 1, 0)
        res = run_on_matrices(spec, mats)
        bundle = bio.emit_reports(res, bio.RunConfig(scenario=None, nt=8, nr=4, runs=1), tmp_path)
        assert bundle.metadata["source"] == "ingested"
