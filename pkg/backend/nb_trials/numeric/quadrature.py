"""Adaptive Gauss-Kronrod quadrature on a finite interval."""

from __future__ import annotations

import logging
from typing import Callable, Iterable, Optional

from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate as sp_integrate

from ..core.config import settings
from ..core.errors import DomainError, QuadratureAccuracyError

logger = logging.getLogger(__name__)


class QuadratureSpec(BaseModel):
    """Accuracy targets for ``integrate``."""

    model_config = ConfigDict(frozen=True)

    abs_tol: float = Field(default=1e-10, gt=0)
    rel_tol: float = Field(default=1e-10, ge=0)
    max_subdivisions: int = Field(default=200, ge=1)

    @classmethod
    def from_settings(cls) -> "QuadratureSpec":
        return cls(
            abs_tol=settings.quad_abs_tol,
            rel_tol=settings.quad_rel_tol,
            max_subdivisions=settings.quad_max_subdivisions,
        )


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: Optional[QuadratureSpec] = None,
    breakpoints: Iterable[float] = (),
) -> float:
    """Integrate ``f`` over [a, b].

    Each piece between consecutive breakpoints is integrated separately so
    that a kink in ``f`` never sits inside a Kronrod panel.

    Raises:
        DomainError: if a > b
        QuadratureAccuracyError: if any piece misses the tolerance; the
            exception carries the summed best estimate
    """
    if a > b:
        raise DomainError(f"integration bounds out of order: [{a}, {b}]")
    if a == b:
        return 0.0
    spec = spec or QuadratureSpec.from_settings()

    cuts = [a, *sorted(p for p in breakpoints if a < p < b), b]
    total = 0.0
    total_err = 0.0
    failure: Optional[str] = None
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        out = sp_integrate.quad(
            f,
            lo,
            hi,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            limit=spec.max_subdivisions,
            full_output=1,
        )
        total += out[0]
        total_err += out[1]
        # quad appends a message only when QUADPACK reports ier > 0
        if len(out) > 3 and failure is None:
            failure = f"[{lo}, {hi}]: {out[3]}"

    if failure is not None:
        logger.warning(f"Quadrature missed tolerance on {failure}")
        raise QuadratureAccuracyError(
            f"quadrature did not converge on {failure}", estimate=total, abs_error=total_err
        )
    return total
