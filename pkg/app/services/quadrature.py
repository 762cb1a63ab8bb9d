"""
Cuadratura de las integrales de Fourier

adaptive_gauss_kronrod delega en scipy.integrate.quad_vec (regla GK15). Todos
los paneles iniciales se integran a la vez: s ∈ [0, 1] se lleva a cada panel y
el integrando vectorial devuelve un valor por panel, así φ, ĝ y el erfc
complejo se evalúan en bloque.
"""
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy import integrate

from app.core.exceptions import QuadratureError

logger = structlog.get_logger()


@dataclass(frozen=True)
class QuadratureOutcome:
    value: complex
    error: float
    nodes: int
    panels: int


def oscillatory_breakpoints(
    upper: float, period: Optional[float], dense_until: float = 64.0, max_panels: int = 200_000
) -> np.ndarray:
    """
    Paneles iniciales sobre [0, upper]

    Uniformes de ancho 2 cerca de 0 y, más allá, de ancho medio periodo de
    oscilación del integrando (sin superar max_panels).
    """
    dense = np.linspace(0.0, min(upper, dense_until), int(np.ceil(min(upper, dense_until) / 2.0)) + 1)
    if dense.size < 2:
        dense = np.array([0.0, upper])
    if upper <= dense_until:
        return dense
    width = 0.5 * period if period and period > 0 else upper - dense_until
    n = int(np.clip(np.ceil((upper - dense_until) / max(width, 1.0)), 1, max_panels))
    tail = np.linspace(dense_until, upper, n + 1)
    return np.unique(np.concatenate([dense, tail]))


def adaptive_gauss_kronrod(
    func: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    abs_tol: float,
    max_nodes: int,
    raise_on_failure: bool = True,
) -> QuadratureOutcome:
    """
    Integrar func sobre [breakpoints[0], breakpoints[-1]]

    Cada subdivisión de quad_vec en s biseca a la vez todos los paneles. La
    norma 2 del error por panel, escalada por √(2P), acota el error de la suma.

    Args:
        func: Función vectorizada (arreglo de abscisas → arreglo complejo o real)
        breakpoints: Bordes iniciales de los paneles, crecientes
        abs_tol: Tolerancia absoluta sobre el valor total
        max_nodes: Presupuesto de evaluaciones (fija el límite de subintervalos)
        raise_on_failure: Lanzar QuadratureError si no se alcanza la tolerancia

    Returns:
        QuadratureOutcome: valor, error estimado, nodos y paneles usados
    """
    edges = np.asarray(breakpoints, dtype=float)
    lo = edges[:-1]
    width = np.diff(edges)
    n_panels = lo.size
    scale = np.sqrt(2.0 * n_panels)

    def stacked(s: float) -> np.ndarray:
        values = np.asarray(func(lo + s * width), dtype=complex) * width
        return np.concatenate([values.real, values.imag])

    result, error, info = integrate.quad_vec(
        stacked,
        0.0,
        1.0,
        epsabs=abs_tol / scale,
        epsrel=1e-13,
        norm="2",
        limit=max(1, max_nodes // (15 * n_panels)),
        quadrature="gk15",
        full_output=True,
    )
    outcome = QuadratureOutcome(
        value=complex(result[:n_panels].sum(), result[n_panels:].sum()),
        error=float(error * scale),
        nodes=int(info.neval) * n_panels,
        panels=len(info.intervals) * n_panels,
    )
    if not info.success:
        logger.warning(
            "Quadrature did not converge", error=outcome.error, abs_tol=abs_tol,
            nodes=outcome.nodes, status=info.status,
        )
        if raise_on_failure and outcome.error > abs_tol:
            raise QuadratureError(
                f"Cuadratura sin converger dentro del presupuesto de nodos: "
                f"error {outcome.error:.3e} > {abs_tol:.3e}"
            )
    return outcome


def gauss_legendre_panels(edges: Sequence[float], order: int = 16) -> Tuple[np.ndarray, np.ndarray]:
    """
    Regla compuesta de Gauss–Legendre

    Args:
        edges: Bordes de los paneles
        order: Puntos por panel

    Returns:
        (nodos, pesos) aplanados
    """
    edges = np.asarray(edges, dtype=float)
    xg, wg = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    center = 0.5 * (edges[1:] + edges[:-1])
    nodes = center[:, None] + half[:, None] * xg[None, :]
    weights = half[:, None] * wg[None, :]
    return nodes.ravel(), weights.ravel()


def symmetric_integrand(func: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    """h(v) + h(−v): ∫_{−N}^{N} h = ∫_0^N (h(v) + h(−v)) dv"""

    def folded(v: np.ndarray) -> np.ndarray:
        return func(v) + func(-v)

    return folded


def tail_estimate(func: Callable[[np.ndarray], np.ndarray], upper: float, samples: int = 33) -> float:
    """
    Estimación de la cola ∫_N^∞|h| ≈ max|h|·N sobre [0.9N, N]

    Cota conservadora para integrandos que decaen al menos como v⁻²; el máximo
    sobre una ventana evita caer en un cero de la oscilación.
    """
    v = np.linspace(0.9 * upper, upper, samples)
    return float(np.max(np.abs(func(v))) * upper)
