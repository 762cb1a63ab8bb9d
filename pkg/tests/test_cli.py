import io
import json

import numpy as np
import pandas as pd
import pytest

from app.cli import EXIT_INPUT, EXIT_OK, EXIT_VALIDATION, HEDGE_COLUMNS, PRICE_COLUMNS, main
from app.models.run_config import RunConfig


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    """Cada prueba escribe su run.config en un directorio propio"""
    monkeypatch.chdir(tmp_path)
    return tmp_path


def _table(capsys) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(capsys.readouterr().out))


def test_price_default_configuration(capsys, workdir):
    assert main(["price"]) == EXIT_OK
    table = _table(capsys)
    assert list(table.columns) == PRICE_COLUMNS
    assert len(table) == 1
    row = table.iloc[0]
    assert row["method"] == "quadrature"
    assert row["eps"] == pytest.approx(1e-4)
    assert 0 < row["price"] < row["K"]
    assert (workdir / "output" / "run.config").is_file()


def test_price_from_config_file(capsys, workdir):
    config = workdir / "run.conf"
    config.write_text("# referencia\nvariant=gamma\nT=1\nK=0.2\nalpha=1.75\n", encoding="utf-8")
    assert main(["price", "--config", str(config), "--t", "0.5"]) == EXIT_OK
    row = _table(capsys).iloc[0]
    assert row["K"] == pytest.approx(0.2)
    assert row["t"] == pytest.approx(0.5)


@pytest.mark.parametrize(
    "argv",
    [
        ["price", "--K", "0.1"],
        ["price", "--eps", "0"],
        ["price", "--alpha", "20"],
        ["validate", "--b", "-1"],
        ["price", "--config", "no-existe.conf"],
        ["sweep", "--axis", "time", "--T", "0.5"],
    ],
)
def test_invalid_input_exits_with_2(argv, capsys):
    assert main(argv) == EXIT_INPUT
    assert "Error de entrada" in capsys.readouterr().err


def test_blank_required_value_is_rejected(workdir, capsys):
    config = workdir / "bad.conf"
    config.write_text("spot=\n", encoding="utf-8")
    assert main(["price", "--config", str(config)]) == EXIT_INPUT


def test_hedge_is_negative_with_leverage(capsys):
    assert main(["hedge", "--t", "0.5"]) == EXIT_OK
    table = _table(capsys)
    assert list(table.columns) == HEDGE_COLUMNS
    row = table.iloc[0]
    assert row["xi"] < 0
    expected_eta = np.exp(-0.007 * 0.5) * (row["price"] - row["xi"] * 1124.47)
    assert row["eta"] == pytest.approx(expected_eta, rel=1e-9)


def test_hedge_without_leverage_is_zero(capsys):
    assert main(["hedge", "--t", "0.5", "--rho", "0"]) == EXIT_OK
    assert _table(capsys).iloc[0]["xi"] == 0.0


def test_strike_sweep(capsys):
    assert main(["sweep", "--axis", "strike", "--t", "0.5"]) == EXIT_OK
    table = _table(capsys)
    assert len(table) == 10
    np.testing.assert_allclose(table["K"], [0.12 + 0.02 * k for k in range(10)])
    assert np.all(np.diff(table["price"]) < 0)
    assert np.all(table["xi"] < 0)


def test_degenerate_strike_range_gives_one_row(capsys):
    assert main(["sweep", "--axis", "strike", "--K_min", "0.2", "--K_max", "0.2"]) == EXIT_OK
    assert len(_table(capsys)) == 1


def test_inverted_strike_range_is_rejected():
    assert main(["sweep", "--axis", "strike", "--K_min", "0.3", "--K_max", "0.2"]) == EXIT_INPUT


@pytest.mark.slow
def test_time_sweep(capsys):
    assert main(["sweep", "--axis", "time"]) == EXIT_OK
    table = _table(capsys)
    assert len(table) == 50
    assert table["t"].iloc[-1] == pytest.approx(0.98)
    assert np.all(table["xi"] < 0)


def test_check_reports_conditions(capsys):
    assert main(["check"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "hedging_condition: True" in out
    report = json.loads(out.strip().splitlines()[-1])
    assert report["hedging_condition"] is True
    assert report["requires_eps"] is True


def test_check_flags_violated_hedging_condition(capsys):
    assert main(["check", "--b", "1"]) == EXIT_VALIDATION
    assert "hedging_condition: False" in capsys.readouterr().out


def test_validate_with_few_paths_passes_with_warnings(capsys):
    assert main(["validate", "--n_paths", "10"]) == EXIT_OK
    captured = capsys.readouterr()
    assert "INCONCLUSIVE" in captured.out
    assert "no concluyente" in captured.err


def test_sidecar_round_trip(workdir, capsys):
    out = workdir / "results" / "price.csv"
    assert main(["price", "--t", "0.25", "--out", str(out)]) == EXIT_OK
    sidecar = workdir / "results" / "price.csv.config"
    assert out.is_file() and sidecar.is_file()

    original = RunConfig.load(None, {"t": 0.25, "out": str(out)})
    assert RunConfig.load(str(sidecar)).resolved() == original.resolved()


def test_output_is_bit_stable(workdir):
    first, second = workdir / "a.csv", workdir / "b.csv"
    assert main(["price", "--out", str(first)]) == EXIT_OK
    assert main(["price", "--out", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
