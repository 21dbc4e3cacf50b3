import json


from wzlab import cli, polar


def run_cli(argv, monkeypatch=None, env=None):
    if env is not None and monkeypatch is not None:
        for k, v in env.items():
            monkeypatch.setenv(k, v)
    return cli.main(argv)


class TestRd:
    def test_scalar_rate(self, capsys):
        assert cli.main(["rd", "--sigma2", "2", "--d", "0.5"]) == 0
        assert capsys.readouterr().out.strip() == "1.0"

    def test_zero_rate_boundary(self, capsys):
        assert cli.main(["rd", "--sigma2", "1", "--d", "1"]) == 0
        assert capsys.readouterr().out.strip() == "0.0"

    def test_waterfill_table(self, capsys):
        assert cli.main(["rd", "--lambdas", "1,0.5", "--d", "0.5"]) == 0
        out = capsys.readouterr().out
        assert "component,lambda,rate_bits,distortion,active" in out
        assert "level_lambda=0.25" in out

    def test_missing_args_is_usage_error(self, capsys):
        assert cli.main(["rd", "--d", "0.5"]) == 2


class TestBound:
    def test_reference_terms(self, capsys):
        rc = cli.main(["bound", "--sigma2-z", "1", "--sigma2-d", "0.5",
                       "--A", "10", "--M", "64"])
        assert rc == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "sigma2_d,t_iz,shaping_excess,total"
        total = float(out[1].split(",")[3])
        assert abs(total - 0.5243) < 5e-5

    def test_large_interval_approaches_target(self, capsys):
        rc = cli.main(["bound", "--sigma2-z", "1", "--sigma2-d", "0.5",
                       "--A", "24", "--M", "8192"])
        assert rc == 0
        total = float(capsys.readouterr().out.splitlines()[1].split(",")[3])
        assert abs(total - 0.5) < 1e-3

    def test_invalid_regime_exit_2(self, capsys):
        rc = cli.main(["bound", "--sigma2-z", "1", "--sigma2-d", "0.5",
                       "--A", "10", "--M", "4"])
        assert rc == 2


class TestSim:
    def make_cfg(self, tmp_path, **kw):
        doc = {"experiment": "excess", "codec": "source2-pcqmod", "trials": 4,
               "master_seed": 11, "sigma2_ey": 1.0, "jobs": 1}
        doc.update(kw)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(doc))
        return str(path)

    def test_run_writes_outputs(self, tmp_path, capsys):
        cfg = self.make_cfg(tmp_path)
        out = tmp_path / "out"
        assert cli.main(["sim", "--config", cfg, "--out", str(out)]) == 0
        assert (out / "excess.csv").exists()
        assert (out / "cdf.csv").exists()
        meta = json.loads((out / "meta.json").read_text())
        assert meta["master_seed"] == 11

    def test_missing_config_exit_2(self, capsys):
        assert cli.main(["sim", "--config", "/no/such/file.json"]) == 2

    def test_unknown_key_rejected(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"experiment": "excess", "bogus": 1}))
        assert cli.main(["sim", "--config", str(path)]) == 2

    def test_unknown_preset_rejected(self, tmp_path, capsys):
        cfg = self.make_cfg(tmp_path, codec="nope")
        assert cli.main(["sim", "--config", cfg]) == 2

    def test_inline_codec_document(self, tmp_path, capsys):
        doc = {
            "experiment": "excess", "sigma2_ey": 0.0, "trials": 3,
            "master_seed": 2, "jobs": 1,
            "codec": {"kind": "onebit", "M": 2, "sigma2_z": 2.0,
                      "sigma2_d": 1.0, "level_info": [], "level_shaping": [],
                      "n": 128},
        }
        path = tmp_path / "ob.json"
        path.write_text(json.dumps(doc))
        assert cli.main(["sim", "--config", str(path)]) == 0

    def test_seed_precedence(self, tmp_path, capsys, monkeypatch):
        cfg = self.make_cfg(tmp_path)
        out1, out2, out3 = (tmp_path / n for n in ("o1", "o2", "o3"))
        monkeypatch.setenv("WZLAB_SEED", "999")
        assert cli.main(["sim", "--config", cfg, "--out", str(out1)]) == 0
        meta = json.loads((out1 / "meta.json").read_text())
        assert meta["master_seed"] == 999  # env beats config
        assert cli.main(["sim", "--config", cfg, "--out", str(out2), "--seed", "123"]) == 0
        meta = json.loads((out2 / "meta.json").read_text())
        assert meta["master_seed"] == 123  # flag beats env
        monkeypatch.delenv("WZLAB_SEED")
        assert cli.main(["sim", "--config", cfg, "--out", str(out3)]) == 0
        meta = json.loads((out3 / "meta.json").read_text())
        assert meta["master_seed"] == 11  # config fallback

    def test_rdsweep_config(self, tmp_path, capsys):
        doc = {"experiment": "rdsweep", "sigma2_z": 2.0,
               "grid": [[8, 10.0, 0.5]], "mc_samples": 5000, "master_seed": 1}
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps(doc))
        out = tmp_path / "sweepout"
        assert cli.main(["sim", "--config", str(path), "--out", str(out)]) == 0
        assert (out / "rdsweep.csv").exists()


class TestSelftest:
    def test_fresh_checkout_passes(self, capsys):
        assert cli.main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 5
        assert "5/5 passed" in out

    def test_deterministic_output(self, capsys):
        cli.main(["selftest"])
        first = capsys.readouterr().out
        cli.main(["selftest"])
        second = capsys.readouterr().out
        assert first == second

    def test_corrupted_reliability_detected(self, capsys, monkeypatch):
        monkeypatch.setattr(polar, "RELIABILITY_SHA256", "0" * 64)
        assert cli.main(["selftest"]) == 1
        assert "FAIL reliability data file" in capsys.readouterr().out
