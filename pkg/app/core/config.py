from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Dict, Optional
from pathlib import Path

from dotenv import dotenv_values


class Settings(BaseSettings):
    """
    Configuración de la aplicación usando Pydantic Settings
    """

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True, extra="ignore")

    # Configuración general
    ENVIRONMENT: str = "development"
    DEBUG: bool = False
    API_BASE_URL: str = "http://localhost:8000"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "json"  # json | console

    # Numérica (valores por defecto de QuadratureSettings)
    DEFAULT_ABS_TOL: float = 1e-9
    DEFAULT_V_MAX: float = 2048.0
    DEFAULT_MAX_NODES: int = 2_000_000
    DEFAULT_FFT_SIZE: int = 2 ** 14
    DEFAULT_EPS_GAMMA: float = 1e-4  # ε del experimento numérico
    DEFAULT_ALPHA: float = 1.75

    # Monte Carlo
    DEFAULT_N_PATHS: int = 1_000_000
    DEFAULT_SEED: int = 42
    MC_BLOCK_SIZE: int = 65_536
    MC_WORKERS: int = 4

    # Barridos
    SWEEP_WORKERS: int = 4

    # Salidas
    OUTPUT_DIR: str = "output"


# Instancia global de configuración
settings = Settings()


def load_key_value_file(path: Optional[str]) -> Dict[str, str]:
    """
    Leer un archivo plano key=value con comentarios '#'

    Args:
        path: Ruta del archivo, None para no cargar nada

    Returns:
        Dict: Claves del archivo con sus valores como texto
    """
    if not path:
        return {}
    config_path = Path(path)
    if not config_path.is_file():
        raise FileNotFoundError(f"Archivo de configuración no encontrado: {path}")
    values = dotenv_values(config_path)
    return {key: value for key, value in values.items() if value is not None}
