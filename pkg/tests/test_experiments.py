import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from dsos import cli, io, model, shape
from dsos.experiments import (ExperimentSpec, RunManifest, ks_to_cdf,
                              ks_two_sample, run)
from dsos.model import InvalidInputError


class TestKolmogorovSmirnov:
    def test_two_sample_closed_form(self):
        # F_a steps 0.5 at 1 and 1.0 at 2; F_b steps 1.0 at 1.5:
        # the sup distance is attained at 1.5 with value 0.5 exactly
        assert ks_two_sample([1.0, 2.0], [1.5]) == 0.5

    def test_two_sample_identical(self):
        a = np.linspace(0, 1, 17)
        assert ks_two_sample(a, a) == 0.0

    def test_to_cdf_uniform(self):
        # for the sample {0.5} against U(0,1): D = max(0.5, 0.5) = 0.5
        assert ks_to_cdf([0.5], lambda x: np.clip(x, 0, 1)) == 0.5
        v = np.arange(1, 5) / 5
        # {0.2,0.4,0.6,0.8} vs identity: i/4 - i/5 peaks at 1 - 0.8 = 0.2
        assert ks_to_cdf(v, lambda x: np.clip(x, 0, 1)) == pytest.approx(0.2)


class TestTables:
    def test_round_trip_bit_exact(self, tmp_path):
        rows = [(0.1, 1 / 3, 5), (math.pi, 2e-300, -7)]
        p = io.write_table(tmp_path / "t.csv", ["a", "b", "c"], rows)
        _, back = io.read_table(p)
        assert back.tolist() == [[0.1, 1 / 3, 5.0], [math.pi, 2e-300, -7.0]]

    def test_ecdf_reingest_reproduces_ks(self, tmp_path):
        rng = np.random.default_rng(0)
        a, b = rng.random(400), rng.random(300)
        ks = ks_two_sample(a, b)
        pa = io.write_ecdf(tmp_path / "a.csv", a)
        pb = io.write_ecdf(tmp_path / "b.csv", b)
        assert ks_two_sample(io.read_ecdf(pa), io.read_ecdf(pb)) == ks

    def test_corrupted_header_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("value;cdf\n0.1,0.5\n")
        with pytest.raises(io.ParseError, match="header"):
            io.read_table(p, expected_header=["value", "cdf"])

    def test_bad_field_reports_position(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b\n0.1,0.2\n0.3,oops\n")
        with pytest.raises(io.ParseError, match=r":3:2"):
            io.read_table(p)

    def test_width_mismatch(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b\n0.1\n")
        with pytest.raises(io.ParseError, match=":2:"):
            io.read_table(p)


class TestManifest:
    def test_round_trip(self, tmp_path):
        spec = ExperimentSpec(kind="tw-table", out=str(tmp_path))
        m = RunManifest(spec=spec.to_dict(), streams=[0, 1],
                        summary={"x": 1.5}, files=["a.csv"])
        m.save(tmp_path / "manifest.json")
        back = RunManifest.load(tmp_path / "manifest.json")
        assert back == m

    def test_version_guard(self, tmp_path):
        p = tmp_path / "manifest.json"
        p.write_text(json.dumps({"spec": {}, "version": 99}))
        with pytest.raises(io.ParseError, match="version"):
            RunManifest.load(p)


class TestSpecValidation:
    def test_unknown_kind(self):
        with pytest.raises(InvalidInputError):
            ExperimentSpec(kind="mystery")

    def test_degenerate_line(self):
        with pytest.raises(InvalidInputError):
            ExperimentSpec(kind="universality", line_s=1.0)

    def test_bad_distribution_fails_before_sampling(self):
        with pytest.raises(ValueError):
            ExperimentSpec(kind="corner", distributions=("nope",))

    def test_kernel_validate_oracle_regime(self, tmp_path):
        with pytest.raises(InvalidInputError):
            run(ExperimentSpec(kind="kernel-validate", n=5, samples=10,
                               out=str(tmp_path)))


class TestCampaigns:
    def test_worker_count_invariance(self, tmp_path):
        kw = dict(kind="universality", n=10, samples=300,
                  distributions=("uniform", "exp"), seed=7)
        a = run(ExperimentSpec(out=str(tmp_path / "w1"), workers=1, **kw))
        b = run(ExperimentSpec(out=str(tmp_path / "w2"), workers=2, **kw))
        assert a.summary == b.summary
        ea = (tmp_path / "w1" / "ecdf_uniform.csv").read_text()
        eb = (tmp_path / "w2" / "ecdf_uniform.csv").read_text()
        assert ea == eb

    def test_coupled_seeds_identical_law(self, tmp_path):
        m = run(ExperimentSpec(kind="universality", n=8, samples=200,
                               distributions=("uniform", "beta:1"),
                               couple_seeds=True, seed=3,
                               out=str(tmp_path)))
        # beta:1 is the uniform law, so the coupling makes the two scaled
        # samples identical and the pairwise distance exactly zero
        assert m.summary["pairwise_ks"]["uniform|beta:1"] == 0.0

    def test_universality_outputs(self, tmp_path):
        m = run(ExperimentSpec(kind="universality", n=16, samples=400,
                               distributions=("uniform",), seed=5,
                               out=str(tmp_path)))
        assert set(m.summary) == {"line", "pairwise_ks", "ks_vs_limit"}
        assert (tmp_path / "manifest.json").exists()
        assert (tmp_path / "ecdf.png").stat().st_size > 0
        vals = io.read_ecdf(tmp_path / "ecdf_uniform.csv")
        assert vals.size == 400 and np.all(np.diff(vals) >= 0)

    def test_shape_campaign(self, tmp_path):
        m = run(ExperimentSpec(kind="shape", resolution=12, n=20, samples=30,
                               seed=2, out=str(tmp_path)))
        assert m.summary["antidiagonal_max_error"] < 1e-8
        assert m.summary["mc_max_deviation"] < 0.1
        header, data = io.read_table(tmp_path / "surface.csv",
                                     expected_header=["x", "y", "h"])
        k = 5  # spot-check a few rows against the solver
        for x, y, h in data[:: max(1, len(data) // k)]:
            assert h == pytest.approx(shape.shape_height(x, y), abs=1e-9)
        assert (tmp_path / "surface.png").stat().st_size > 0

    def test_kernel_validate_campaign(self, tmp_path):
        m = run(ExperimentSpec(kind="kernel-validate", n=2, samples=30_000,
                               seed=4, out=str(tmp_path)))
        gp = m.summary["gap_probability"]
        assert gp["abs_error"] < 0.02
        assert m.summary["sampler_cross_ks_max"] < 0.03
        header, _ = io.read_table(tmp_path / "density_error.csv",
                                  expected_header=["line", "sup_error"])

    def test_corner_campaign(self, tmp_path):
        m = run(ExperimentSpec(kind="corner", n=20, samples=1500,
                               distributions=("uniform", "exp"), seed=6,
                               out=str(tmp_path)))
        for name in ("uniform", "exp"):
            assert m.summary[name]["ks_exact"] < 0.05
            assert m.summary[name]["ks_limit"] < 0.08

    def test_tw_table_campaign(self, tmp_path):
        m = run(ExperimentSpec(kind="tw-table", v_min=-3, v_max=1, v_step=0.5,
                               out=str(tmp_path)))
        _, data = io.read_table(tmp_path / "tw.csv",
                                expected_header=["v", "F2"])
        assert np.all(np.diff(data[:, 1]) > 0)
        assert np.all((data[:, 1] >= 0) & (data[:, 1] <= 1))

    def test_sample_campaign(self, tmp_path):
        m = run(ExperimentSpec(kind="sample", n=4, samples=6,
                               distributions=("exp",), seed=9,
                               out=str(tmp_path)))
        lines = (tmp_path / "samples.jsonl").read_text().splitlines()
        assert len(lines) == 6
        for line in lines:
            g = model.grid_from_json(line)
            assert model.validate_grid(g)

    def test_sample_determinism(self, tmp_path):
        kw = dict(kind="sample", n=3, samples=5, distributions=("uniform",),
                  seed=11)
        run(ExperimentSpec(out=str(tmp_path / "a"), **kw))
        run(ExperimentSpec(out=str(tmp_path / "b"), **kw))
        assert (tmp_path / "a" / "samples.jsonl").read_text() == \
            (tmp_path / "b" / "samples.jsonl").read_text()


class TestCli:
    def test_tw_table(self, tmp_path):
        res = CliRunner().invoke(cli.main, ["tw-table", "--v-min", "-2",
                                            "--v-max", "0", "--v-step", "1",
                                            "--out", str(tmp_path)])
        assert res.exit_code == 0, res.output
        assert (tmp_path / "tw.csv").exists() and (tmp_path / "tw.png").exists()

    def test_sample(self, tmp_path):
        res = CliRunner().invoke(cli.main, ["sample", "--n", "3", "--samples",
                                            "4", "--dist", "exp", "--seed", "1",
                                            "--out", str(tmp_path)])
        assert res.exit_code == 0, res.output
        assert len((tmp_path / "samples.jsonl").read_text().splitlines()) == 4

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 3, "samples": 2,
                                   "distributions": ["uniform"], "seed": 5,
                                   "out": str(tmp_path / "out")}))
        res = CliRunner().invoke(cli.main, ["sample", "--config", str(cfg)])
        assert res.exit_code == 0, res.output
        m = RunManifest.load(tmp_path / "out" / "manifest.json")
        assert m.spec["n"] == 3 and m.spec["samples"] == 2

    def test_flag_overrides_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 3, "samples": 2,
                                   "out": str(tmp_path / "out")}))
        res = CliRunner().invoke(cli.main, ["sample", "--config", str(cfg),
                                            "--samples", "3"])
        assert res.exit_code == 0, res.output
        m = RunManifest.load(tmp_path / "out" / "manifest.json")
        assert m.spec["samples"] == 3

    def test_invalid_spec_reports_error(self, tmp_path):
        res = CliRunner().invoke(cli.main, ["edge-fluct", "--line-s", "1.0",
                                            "--out", str(tmp_path)])
        assert res.exit_code != 0
