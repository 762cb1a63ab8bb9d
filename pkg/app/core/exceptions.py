"""
Excepciones del dominio de valoración
"""


class BnsError(Exception):
    """Error base de la librería"""


class DomainError(BnsError, ValueError):
    """Argumento fuera del dominio analítico de la fórmula (Re u ≥ û, α ∉ (0, û), K < √C_V...)"""


class IntegrabilityError(BnsError, ValueError):
    """La integral de Fourier no es integrable sin regularización ε (caso gamma-OU)"""


class ConditionViolationError(BnsError, ValueError):
    """No se cumple la condición de cobertura 2B(T) < û"""


class VariantError(BnsError, ValueError):
    """Operación no disponible para la variante del modelo"""


class QuadratureError(BnsError, ArithmeticError):
    """La cuadratura no alcanzó la tolerancia dentro del presupuesto de nodos"""


class GridResolutionError(BnsError, ArithmeticError):
    """La malla FFT no cubre el punto C_V/B_V"""


class InversionAccuracyError(BnsError, ArithmeticError):
    """La densidad invertida no integra a 1 dentro de la tolerancia"""


# Errores de entrada (exit 2) frente a fallos numéricos (exit 3)
INPUT_ERRORS = (DomainError, IntegrabilityError, ConditionViolationError, VariantError)
NUMERICAL_ERRORS = (QuadratureError, GridResolutionError, InversionAccuracyError)
