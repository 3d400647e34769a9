import json
import logging

import pandas as pd
import pytest

from main import EXIT_DIMENSION, EXIT_OK, EXIT_USAGE, main


def document(tmp_path, p, q, name="pair.json", **extra):
    path = tmp_path / name
    path.write_text(json.dumps({"p": p, "q": q, **extra}), encoding="utf-8")
    return str(path)


class TestTv:
    def test_small_example(self, tmp_path, capsys):
        path = document(tmp_path, [0.1, 0.2], [0.05, 0.1], label="example")
        assert main(["tv", path]) == EXIT_OK
        out = capsys.readouterr().out
        assert "label: example" in out
        assert "regime: small" in out
        assert "tv_exact:" in out
        assert "small_upper" in out

    def test_length_mismatch(self, tmp_path, caplog):
        path = document(tmp_path, [0.1, 0.2], [0.1])
        assert main(["tv", path]) == EXIT_USAGE
        assert "field 'q'" in caplog.text

    def test_large_n(self, tmp_path, capsys):
        path = document(tmp_path, [0.01] * 30, [0.02] * 30)
        assert main(["tv", path, "--exact"]) == EXIT_DIMENSION
        assert main(["tv", path]) == EXIT_OK
        out = capsys.readouterr().out
        assert "tv_exact" not in out
        assert "tv_upper:" in out

    def test_enum_limit_flag(self, tmp_path):
        path = document(tmp_path, [0.1] * 5, [0.2] * 5)
        assert main(["--enum-limit", "4", "tv", path, "--exact"]) == EXIT_DIMENSION


def test_slices_csv(tmp_path):
    path = document(tmp_path, [0.5, 0.5], [0.25, 0.75])
    out = tmp_path / "slices.csv"
    assert main(["slices", path, "--out", str(out)]) == EXIT_OK
    frame = pd.read_csv(out, dtype={"k": str})
    assert frame["k"].tolist() == ["0", "1", "2", "tv", "two_tv", "slice_sum", "residual"]
    values = dict(zip(frame["k"], frame["delta_k"]))
    assert values["slice_sum"] == pytest.approx(values["two_tv"], abs=1e-12)


class TestVerify:
    def test_single_theorem(self, capsys):
        code = main(["verify", "--theorem", "Sqrt2", "--n-min", "1", "--n-max", "5",
                     "--trials", "50", "--seed", "1"])
        assert code == EXIT_OK
        assert "Sqrt2" in capsys.readouterr().out

    def test_unknown_theorem(self):
        with pytest.raises(SystemExit) as info:
            main(["verify", "--theorem", "Nope", "--seed", "1"])
        assert info.value.code == EXIT_USAGE

    def test_bad_seed(self):
        with pytest.raises(SystemExit) as info:
            main(["verify", "--all", "--seed", "-1"])
        assert info.value.code == EXIT_USAGE

    def test_all_as_csv_is_deterministic(self, capsys):
        argv = ["verify", "--all", "--n-max", "4", "--trials", "3", "--seed", "11", "--csv"]
        assert main(argv) == EXIT_OK
        first = capsys.readouterr().out
        assert main(argv) == EXIT_OK
        assert capsys.readouterr().out == first
        assert len(first.strip().splitlines()) == 23


class TestBk:
    def test_n3(self, capsys):
        assert main(["bk", "--n", "3"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "k,B_k_recurrence,B_k_closed_form"
        assert lines[2].startswith("2,0.6,")
        assert lines[4].startswith("sum_tail,")

    def test_n_too_small(self):
        assert main(["bk", "--n", "1"]) == EXIT_USAGE

    def test_unwritable_out(self, tmp_path):
        out = tmp_path / "missing" / "bk.csv"
        assert main(["bk", "--n", "3", "--out", str(out)]) == EXIT_USAGE


def test_sweep(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--regime", "small", "--n-list", "2,3,6", "--trials", "10",
                 "--seed", "3", "--out", str(out)])
    assert code == EXIT_OK
    frame = pd.read_csv(out)
    assert len(frame) == 30
    assert sorted(frame["n"].unique().tolist()) == [2, 3, 6]
    assert "min_ratio_tv_delta1" in capsys.readouterr().out


class TestLogging:
    @pytest.fixture(autouse=True)
    def restore_root_level(self):
        level = logging.getLogger().level
        yield
        logging.getLogger().setLevel(level)

    def test_config_format_and_level_reach_the_root_handler(self, tmp_path, monkeypatch, capsys):
        calls = []
        monkeypatch.setattr(logging, "basicConfig", lambda **kwargs: calls.append(kwargs))
        config = tmp_path / "config.toml"
        config.write_text('[logging]\nlevel = "warning"\nformat = "%(levelname)s|%(message)s"\n',
                          encoding="utf-8")
        assert main(["--config", str(config), "bk", "--n", "2"]) == EXIT_OK
        assert calls[0]["format"] == "%(levelname)s|%(message)s"
        assert calls[0]["level"] == "WARNING"
        assert logging.getLogger().level == logging.WARNING

    def test_flag_overrides_config_level(self, tmp_path, monkeypatch, capsys):
        calls = []
        monkeypatch.setattr(logging, "basicConfig", lambda **kwargs: calls.append(kwargs))
        config = tmp_path / "config.toml"
        config.write_text('[logging]\nlevel = "warning"\n', encoding="utf-8")
        assert main(["--config", str(config), "--log-level", "DEBUG", "bk", "--n", "2"]) == EXIT_OK
        assert calls[0]["level"] == "DEBUG"

    def test_unreadable_config(self, tmp_path, monkeypatch):
        monkeypatch.setattr(logging, "basicConfig", lambda **kwargs: None)
        assert main(["--config", str(tmp_path / "absent.toml"), "bk", "--n", "2"]) == EXIT_USAGE
