import csv
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from campanato import Domain, FormatError, GridError, GridFunction, emit, generate, ingest
from campanato.checks import REGISTRY, CheckResult, SuiteConfig, emit_report, load_report, run_suite
from campanato.cli import main
from campanato.generators import KINDS

TAGS = ["thm2.1", "jn3.1", "def3.5", "pc1", "jncp", "jnm1", "jnmalpha", "cmain", "mlip", "jnlip", "weighted5", "bilinear6"]


class TestIO:
    @pytest.mark.parametrize("fmt", ["csv", "json"])
    @pytest.mark.parametrize("dom", [Domain(1, 2.0, 10, lower=-1.0), Domain(2, 1.0, 6)])
    def test_round_trip(self, fmt, dom, tmp_path, rng):
        f = GridFunction(dom, rng.normal(size=dom.shape))
        g = ingest(emit(f, tmp_path / f"f.{fmt}"))
        np.testing.assert_array_equal(g.values, f.values)
        assert g.domain.same_grid(f.domain)

    def test_csv_wrong_count(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("# n=1 side=1.0 res=4\n1\n2\n3\n")
        with pytest.raises(FormatError, match="expected 4, got 3"):
            ingest(p)

    @pytest.mark.parametrize("text", ["1\n2\n", "# n=1 side=abc res=2\n1\n2\n", "# n=1 res\n1\n"])
    def test_csv_bad_header(self, text, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text(text)
        with pytest.raises(FormatError):
            ingest(p)

    def test_json_mask(self, tmp_path):
        mask = [1, 1, 0, 1, 0, 1]
        p = tmp_path / "m.json"
        p.write_text(json.dumps({"dimension": 1, "side": 1.0, "resolution": 6, "mask": mask, "samples": [1, 2, 3, 4]}))
        f = ingest(p)
        assert f.domain.n_active == sum(mask)
        np.testing.assert_array_equal(f.samples, [1, 2, 3, 4])
        g = ingest(emit(f, tmp_path / "m2.json"))
        np.testing.assert_array_equal(g.domain.mask, f.domain.mask)

    def test_json_mask_count_mismatch(self, tmp_path):
        p = tmp_path / "m.json"
        p.write_text(json.dumps({"dimension": 1, "side": 1.0, "resolution": 4, "mask": [1, 0, 1, 1], "samples": [1, 2]}))
        with pytest.raises(FormatError, match="expected 3, got 2"):
            ingest(p)

    def test_masked_csv_refused(self, tmp_path):
        f = GridFunction(Domain(1, 1.0, 3, mask=np.array([True, False, True])), [1.0, 2.0])
        with pytest.raises(FormatError):
            emit(f, tmp_path / "f.csv")


@given(arrays(float, 7, elements=st.floats(allow_nan=False, allow_infinity=False, width=64)))
def test_csv_round_trip_exact(x):
    from campanato.io import dumps_csv, loads_csv

    f = GridFunction(Domain(1, 1.0, 7), x)
    np.testing.assert_array_equal(loads_csv(dumps_csv(f)).values, f.values)


class TestGenerate:
    def test_constant(self):
        assert np.all(generate("constant", Domain(1, 1.0, 8), c=3.0).values == 3.0)

    def test_power_cusp_formula(self):
        d = Domain(1, 1.0, 64)
        np.testing.assert_allclose(generate("power_cusp", d, beta=0.5).values, np.abs(d.centers(0) - 0.5) ** 0.5)

    def test_log_clamp(self):
        d = Domain(1, 1.0, 64)
        want = np.log(1 / (np.abs(d.centers(0) - 0.5) + 0.5 / 64))
        np.testing.assert_allclose(generate("log_singularity", d).values, want)

    @pytest.mark.parametrize("kind", KINDS)
    def test_deterministic(self, kind):
        d = Domain(2, 1.0, 8)
        np.testing.assert_array_equal(generate(kind, d, seed=7).values, generate(kind, d, seed=7).values)

    def test_random_signs_values(self):
        assert set(np.unique(generate("random_signs", seed=3).values)) == {-1.0, 1.0}

    @pytest.mark.parametrize("kw", [{"kind": "power_cusp", "beta": 0.0}, {"kind": "power_cusp", "beta": 1.5}, {"kind": "nope"}])
    def test_invalid(self, kw):
        with pytest.raises(GridError):
            generate(domain=Domain(1, 1.0, 8), **kw)

    def test_resolution_floor(self):
        with pytest.raises(GridError):
            generate("constant", Domain(1, 1.0, 1))

    def test_refinement_samples_same_smooth_function(self):
        a = generate("random_smooth", Domain(1, 1.0, 64), seed=2).values
        b = generate("random_smooth", Domain(1, 1.0, 128), seed=2).values
        assert np.abs(a - 0.5 * (b[::2] + b[1::2])).max() < 0.05


class TestSuite:
    def test_registry_tags(self):
        assert sorted(REGISTRY) == sorted(TAGS)

    def test_empty(self):
        assert run_suite(SuiteConfig(checks=[])) == []

    def test_thm21(self):
        (r,) = run_suite(SuiteConfig(checks=["thm2.1"], samples=2))
        assert r.passed and r.measured["max_forward_ratio"] <= 1.0 + 1e-10

    def test_unknown_tag_before_work(self, monkeypatch):
        calls = []
        monkeypatch.setitem(REGISTRY, "pc1", lambda cfg: calls.append(1) or (True, {}, None))
        with pytest.raises(GridError, match="bogus"):
            run_suite(SuiteConfig(checks=["pc1", "bogus"]))
        assert calls == []

    def test_unknown_config_field(self):
        with pytest.raises(GridError):
            SuiteConfig.from_dict({"checks": [], "colour": 1})


class TestReport:
    def sample(self, k):
        return [CheckResult(f"t{i}", i % 2 == 0, {"ratio": 0.5 + i}, 1e-10, None if i % 2 == 0 else {"cube": [i]})
                for i in range(k)]

    @pytest.mark.parametrize("fmt", ["json", "csv"])
    def test_empty(self, fmt, tmp_path):
        p = emit_report([], tmp_path / f"r.{fmt}")
        assert load_report(p) == []
        if fmt == "json":
            assert json.loads(p.read_text()) == {"results": []}

    @pytest.mark.parametrize("fmt", ["json", "csv"])
    def test_round_trip(self, fmt, tmp_path):
        res = self.sample(1)
        back = load_report(emit_report(res, tmp_path / f"r.{fmt}"))
        assert [r.as_dict() for r in back] == [r.as_dict() for r in res]

    def test_csv_rows(self, tmp_path):
        p = emit_report(self.sample(10), tmp_path / "r.csv")
        rows = list(csv.reader(p.read_text().splitlines()))
        assert len(rows) == 11 and rows[0] == ["tag", "passed", "tolerance", "measured", "witness"]

    def test_field_order(self, tmp_path):
        p = emit_report(self.sample(2), tmp_path / "r.json")
        assert list(json.loads(p.read_text())["results"][0]) == ["tag", "passed", "tolerance", "measured", "witness"]

    def test_timings_opt_in(self, tmp_path):
        p = emit_report(self.sample(1), tmp_path / "r.json", timings=True)
        assert "runtime" in json.loads(p.read_text())["results"][0]


class TestCLI:
    def test_generate_then_compute(self, tmp_path, capsys):
        out = tmp_path / "f.json"
        assert main(["generate", "--kind", "power_cusp", "--beta", "0.5", "--resolution", "32", "--out", str(out)]) == 0
        assert main(["compute", "seminorm", "--input", str(out), "--variant", "campanato"]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["spec"]["kind"] == "campanato" and rep["sup"] > 0

    @pytest.mark.parametrize("quantity,extra", [("maximal", ["--alpha", "0.5"]), ("czd", []), ("weight", ["--class", "A1"])])
    def test_compute_kinds(self, quantity, extra, capsys):
        kind = "lognormal_weight" if quantity == "weight" else "log_singularity"
        assert main(["compute", quantity, "--kind", kind, "--resolution", "64", *extra]) == 0
        assert json.loads(capsys.readouterr().out)

    def test_czd_profile_out(self, tmp_path, capsys):
        p = tmp_path / "prof.csv"
        assert main(["compute", "czd", "--kind", "log_singularity", "--resolution", "128", "--profile-out", str(p)]) == 0
        assert p.read_text().startswith("t,fraction\n")

    def test_usage_errors(self, tmp_path, capsys):
        assert main([]) == 2
        assert main(["compute", "seminorm"]) == 2
        assert main(["compute", "seminorm", "--input", str(tmp_path / "missing.csv")]) == 2
        assert main(["suite", "--checks", "bogus"]) == 2

    def test_suite_pass_and_env_override(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("CAMPANATO_OUTPUT_DIR", str(tmp_path / "env"))
        assert main(["suite", "--checks", "pc1", "bilinear6", "--output-dir", str(tmp_path / "flag")]) == 0
        assert (tmp_path / "env" / "report.json").exists()
        assert not (tmp_path / "flag").exists()

    def test_suite_failure_exit_code(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setitem(REGISTRY, "pc1", lambda cfg: (False, {"x": 1.0}, {"cube": [0]}))
        assert main(["suite", "--checks", "pc1", "--output-dir", str(tmp_path)]) == 1
        assert "FAIL pc1" in capsys.readouterr().out

    def test_suite_config_file_byte_identical(self, tmp_path, monkeypatch, capsys):
        monkeypatch.delenv("CAMPANATO_OUTPUT_DIR", raising=False)
        texts = []
        for run in ("a", "b"):
            cfg = tmp_path / f"{run}.json"
            cfg.write_text(json.dumps({"checks": ["def3.5", "jn3.1", "weighted5"], "seed": 5,
                                       "output_dir": str(tmp_path / run)}))
            assert main(["suite", "--config", str(cfg), "--format", "csv"]) == 0
            texts.append((tmp_path / run / "report.csv").read_bytes())
        assert texts[0] == texts[1]
