"""
Modelos de los oráculos Monte Carlo
"""
from pydantic import BaseModel, ConfigDict, Field

from app.core.config import settings


class McSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_paths: int = Field(default_factory=lambda: settings.DEFAULT_N_PATHS, ge=1)
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0, lt=2 ** 64)
    antithetic: bool = False


class McEstimate(BaseModel):
    """Estimación Monte Carlo con su error estándar"""

    model_config = ConfigDict(frozen=True)

    mean: float
    std_error: float = Field(ge=0)
    n_paths: int
    seed: int = 0

    def within(self, value: float, n_std: float = 3.0, slack: float = 0.0) -> bool:
        """¿Está value dentro de n_std errores estándar (más una holgura)?"""
        return abs(self.mean - value) <= n_std * self.std_error + slack
