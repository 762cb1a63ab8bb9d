from pathlib import Path

import pytest
from pydantic import ValidationError

from app.core.config import Settings, load_key_value_file, settings
from app.core.exceptions import DomainError
from app.models.params import Variant
from app.models.run_config import RunConfig

REFERENCE_CONF = Path(__file__).resolve().parent.parent / "config" / "reference.conf"


def test_load_key_value_file(tmp_path):
    assert load_key_value_file(None) == {}
    with pytest.raises(FileNotFoundError):
        load_key_value_file(str(tmp_path / "missing.conf"))

    path = tmp_path / "run.conf"
    path.write_text("# comentario\nb=2.5\nK=\n", encoding="utf-8")
    assert load_key_value_file(str(path)) == {"b": "2.5", "K": ""}


def test_defaults_reproduce_reference_experiment():
    config = RunConfig()
    assert config.variant is Variant.GAMMA_OU
    assert config.eps_value == settings.DEFAULT_EPS_GAMMA
    assert config.strikes() == [0.12, 0.14, 0.16, 0.18, 0.2, 0.22, 0.24, 0.26, 0.28, 0.3]
    times = config.times()
    assert len(times) == 50
    assert times[0] == 0.0 and times[-1] == 0.98
    assert config.strike() == pytest.approx(0.18588, abs=5e-4)


def test_reference_file_matches_defaults():
    assert RunConfig.load(str(REFERENCE_CONF)).resolved() == RunConfig().resolved()


def test_ig_default_eps_is_zero():
    assert RunConfig(variant="IG-OU").eps_value == 0.0
    assert RunConfig(variant="ig", eps=1e-3).eps_value == 1e-3


def test_overrides_take_precedence_over_file(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("b=2.5\nseed=7\nK=\n", encoding="utf-8")
    config = RunConfig.load(str(path), {"seed": 9, "a": None})
    assert config.b == 2.5
    assert config.seed == 9
    assert config.a == 1.4338
    assert config.K is None


@pytest.mark.parametrize(
    "values",
    [
        {"K_min": 0.3, "K_max": 0.2},
        {"t_min": 0.5, "t_max": 0.4},
        {"t": 1.0},
        {"rho": 0.5},
        {"format": "parquet"},
        {"unknown": 1},
        {"fft_size": 1000},
    ],
)
def test_invalid_configurations(values):
    with pytest.raises(ValidationError):
        RunConfig(**values)


def test_time_grid_must_end_before_maturity():
    with pytest.raises(DomainError):
        RunConfig(T=0.5).times()


def test_degenerate_ranges_give_single_points():
    config = RunConfig(K_min=0.2, K_max=0.2, t_min=0.3, t_max=0.3)
    assert config.strikes() == [0.2]
    assert config.times() == [0.3]


def test_to_text_can_be_reloaded(tmp_path):
    config = RunConfig(variant="ig", t=0.5, K=0.22, antithetic=True, n_paths=5000)
    path = tmp_path / "run.config"
    path.write_text(config.to_text(), encoding="utf-8")
    reloaded = RunConfig.load(str(path))
    assert reloaded.resolved() == config.resolved()
    assert "lambda=0.5783" in config.to_text()


def test_environment_overrides_settings(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("DEFAULT_SEED", "7")
    monkeypatch.setenv("DEFAULT_EPS_GAMMA", "0.001")
    overridden = Settings()
    assert overridden.DEFAULT_SEED == 7
    assert overridden.DEFAULT_EPS_GAMMA == 1e-3
    # Los nombres distinguen mayúsculas
    monkeypatch.delenv("DEFAULT_ALPHA", raising=False)
    monkeypatch.setenv("default_alpha", "3.0")
    assert Settings().DEFAULT_ALPHA == 1.75


def test_env_file_is_read_from_working_directory(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("MC_WORKERS", raising=False)
    (tmp_path / ".env").write_text("MC_WORKERS=2\nUNRELATED_KEY=x\n", encoding="utf-8")
    assert Settings().MC_WORKERS == 2
