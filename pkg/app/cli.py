"""
Línea de comandos: price, hedge, sweep, validate y check

Ejemplos:
    python -m app price --config config/reference.conf
    python -m app hedge --t 0.5 --out output/hedge.csv
    python -m app sweep --axis strike --t 0.5 --out output/strike.csv
    python -m app validate --n_paths 1000000 --seed 42
    python -m app check --variant gamma --b 1

Códigos de salida: 0 correcto, 1 falla la validación (o la operación pedida no
está soportada), 2 entrada inválida, 3 fallo numérico.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import pandas as pd
import structlog
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import INPUT_ERRORS, NUMERICAL_ERRORS
from app.core.logging import configure_logging
from app.models.pricing import PricingMethod
from app.models.run_config import RunConfig
from app.services.hedging_service import hedging_service
from app.services.levy_model import check_conditions
from app.services.pricing_service import pricing_service
from app.services.validation_service import validation_service

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

PRICE_COLUMNS = ["t", "T", "K", "alpha", "eps", "price", "method", "im_residual"]
HEDGE_COLUMNS = ["t", "T", "K", "alpha", "eps", "xi", "eta", "price"]
FLOAT_FORMAT = "%.12g"


def _flag_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"Valor booleano inválido: {value}")


# Una bandera por clave del archivo de configuración
CONFIG_FLAGS: Dict[str, Callable[[str], Any]] = {
    "lambda": float, "a": float, "b": float, "rho": float, "r": float, "tau": float,
    "t": float, "spot": float, "sigma_sq": float, "T": float, "K": float,
    "K_min": float, "K_max": float, "K_step": float,
    "t_min": float, "t_max": float, "t_step": float,
    "alpha": float, "eps": float, "v_max": float, "abs_tol": float,
    "max_nodes": int, "fft_size": int, "method": str,
    "n_paths": int, "seed": int, "antithetic": _flag_bool, "format": str,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--config", help="Archivo key=value con comentarios '#'")
    common.add_argument("--out", help="CSV de salida (por defecto stdout)")
    common.add_argument("--variant", choices=["gamma", "ig"], help="Variante del modelo")
    common.add_argument("--log-level", dest="log_level", help="Nivel de log (stderr)")
    group = common.add_argument_group("claves de configuración")
    for key, kind in CONFIG_FLAGS.items():
        group.add_argument(f"--{key}", dest=key, type=kind, default=None)

    parser = argparse.ArgumentParser(
        prog="python -m app",
        description="Valoración y cobertura LRM de calls sobre el VIX en modelos BNS",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
        allow_abbrev=False,
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("price", parents=[common], help="Precio de la call", allow_abbrev=False)
    commands.add_parser("hedge", parents=[common], help="Estrategia LRM (ξ, η)", allow_abbrev=False)
    sweep = commands.add_parser("sweep", parents=[common], help="Barrido en t o en K", allow_abbrev=False)
    sweep.add_argument("--axis", choices=["time", "strike"], required=True)
    commands.add_parser("validate", parents=[common], help="Batería de oráculos", allow_abbrev=False)
    commands.add_parser("check", parents=[common], help="Condiciones de aplicabilidad", allow_abbrev=False)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    overrides = {key: getattr(args, key) for key in CONFIG_FLAGS}
    overrides["variant"] = args.variant
    overrides["out"] = args.out
    return RunConfig.load(args.config, overrides)


# ---------------------------------------------------------------------- #
# Salidas
# ---------------------------------------------------------------------- #


def write_table(rows: List[Dict[str, Any]], columns: Sequence[str], out: Optional[str]) -> None:
    frame = pd.DataFrame(rows, columns=list(columns))
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    else:
        frame.to_csv(sys.stdout, index=False, float_format=FLOAT_FORMAT)


def write_sidecar(config: RunConfig) -> Path:
    """Guardar la configuración resuelta junto a la salida (<out>.config)"""
    if config.out:
        path = Path(f"{config.out}.config")
    else:
        path = Path(settings.OUTPUT_DIR) / "run.config"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(config.to_text(), encoding="utf-8")
    return path


def _hedge_row(config: RunConfig, t: float, K: float, result) -> Dict[str, Any]:
    return {
        "t": t, "T": config.T, "K": K, "alpha": result.alpha_used, "eps": result.eps_used,
        "xi": result.xi, "eta": result.eta, "price": result.price,
    }


# ---------------------------------------------------------------------- #
# Comandos
# ---------------------------------------------------------------------- #


def cmd_price(config: RunConfig) -> int:
    params, state, quad = config.model_params(), config.market_state(), config.quadrature()
    K = config.strike()
    if config.method is PricingMethod.FFT:
        result = pricing_service.price_via_fft(params, state, config.T, [K], config.alpha, quad)[0]
    else:
        result = pricing_service.price(params, state, config.T, K, config.alpha, quad)
    row = {
        "t": state.t, "T": config.T, "K": K, "alpha": result.alpha_used, "eps": result.eps_used,
        "price": result.price, "method": result.method.value, "im_residual": result.im_residual,
    }
    write_table([row], PRICE_COLUMNS, config.out)
    return EXIT_OK


def cmd_hedge(config: RunConfig) -> int:
    state = config.market_state()
    K = config.strike()
    result = hedging_service.hedge(
        config.model_params(), state, config.T, K, config.alpha, config.quadrature()
    )
    write_table([_hedge_row(config, state.t, K, result)], HEDGE_COLUMNS, config.out)
    return EXIT_OK


def cmd_sweep(config: RunConfig, axis: str) -> int:
    params, quad = config.model_params(), config.quadrature()
    state = config.market_state()
    if axis == "time":
        K = config.strike()
        times = config.times()
        results = hedging_service.sweep_time(params, state, config.T, K, config.alpha, times, quad)
        rows = [_hedge_row(config, t, K, result) for t, result in zip(times, results)]
    else:
        strikes = config.strikes()
        results = hedging_service.sweep_strike(params, state, config.T, strikes, config.alpha, quad)
        rows = [_hedge_row(config, state.t, K, result) for K, result in zip(strikes, results)]
    write_table(rows, HEDGE_COLUMNS, config.out)
    return EXIT_OK


def cmd_validate(config: RunConfig) -> int:
    report = validation_service.run(
        config.model_params(), config.market_state(), config.T, config.strike(),
        config.alpha, config.quadrature(), config.mc_settings(),
    )
    table = pd.DataFrame([check.model_dump(mode="json") for check in report.checks])
    if config.out:
        write_table(table.to_dict("records"), ["name", "status", "detail"], config.out)
    print(table.to_string(index=False))
    print(json.dumps(report.summary(), ensure_ascii=False))
    for check in report.inconclusive:
        print(f"AVISO: {check.name} no concluyente ({check.detail})", file=sys.stderr)
    for check in report.failed:
        print(f"FALLA: {check.name}: {check.detail}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_check(config: RunConfig) -> int:
    report = check_conditions(config.model_params(), config.T)
    pricing_path = "ε" if report.requires_eps else "directa"
    lines = {
        "variant": report.variant.value,
        "T": config.T,
        "u_hat_positive": f"{report.u_hat_positive} (û = {report.u_hat:.6g})",
        "fourier_integrable": report.fourier_integrable,
        "bounded_cf": report.bounded_cf,
        "hedging_condition": f"{report.hedging_condition} (û = {report.u_hat:.6g}, 2B(T) = {report.two_b_t:.6g})",
        "pricing": f"{report.pricing_allowed} (vía {pricing_path})",
        "hedging": report.hedging_allowed,
    }
    for key, value in lines.items():
        print(f"{key}: {value}")
    print(json.dumps(report.model_dump(mode="json"), ensure_ascii=False))
    return EXIT_OK if report.hedging_allowed else EXIT_VALIDATION


# ---------------------------------------------------------------------- #
# Punto de entrada
# ---------------------------------------------------------------------- #


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(level=args.log_level)
    log = logger.bind(command=args.command)

    try:
        config = load_config(args)
        write_sidecar(config)
        if args.command == "price":
            return cmd_price(config)
        if args.command == "hedge":
            return cmd_hedge(config)
        if args.command == "sweep":
            return cmd_sweep(config, args.axis)
        if args.command == "validate":
            return cmd_validate(config)
        return cmd_check(config)
    except (ValidationError, FileNotFoundError, *INPUT_ERRORS) as e:
        log.error("Invalid input", error=str(e))
        print(f"Error de entrada: {e}", file=sys.stderr)
        return EXIT_INPUT
    except NUMERICAL_ERRORS as e:
        log.error("Numerical failure", error=str(e), check=type(e).__name__)
        print(f"Fallo numérico ({type(e).__name__}): {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
