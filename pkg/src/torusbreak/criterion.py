"""Non-existence criterion for invariant Lagrangian graphs of twist maps.

For a map generated by ``|x - x'|^2/2 + Psi(x')``, let ``T`` be one
d-th of the trace of the Hessian of ``Psi`` (equivalently the kick
derivative in one dimension).  If

    1 / (1 + min(T)/2)  >  1 + max(T)/2 + sqrt(max(T) + max(T)^2/4)

holds strictly, the map admits no invariant Lipschitz Lagrangian graph at
all.  The inequality is sufficient only: when it fails the report draws no
conclusion.  The asymptotic flag uses the small-field surrogate
``-min(T)/2 > sqrt(max(T)) + max(T)`` (explicit coefficient 1 on the
higher-order term, a documented convention slightly stricter than needed
for small fields).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .grid import GridFunction, c0_norm, from_spectrum, laplacian


class CriterionError(ValueError):
    """Criterion formulas evaluated outside their domain."""


@dataclass(frozen=True)
class CriterionReport:
    """Extrema of the test field and both sides of the inequality."""

    dims: int
    source: str
    min_t: float
    max_t: float
    lhs: float
    rhs: float
    satisfied: bool
    asymptotic_satisfied: bool

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def verdict_text(self) -> str:
        if self.satisfied:
            return (
                "criterion satisfied: no invariant Lipschitz Lagrangian graph "
                "exists for this map"
            )
        return (
            "criterion not satisfied: no conclusion (the inequality is a "
            "sufficient condition only)"
        )

    def to_json_dict(self) -> dict:
        return {
            "d": self.dims,
            "source": self.source,
            "min_t": self.min_t,
            "max_t": self.max_t,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "satisfied": self.satisfied,
            "asymptotic_satisfied": self.asymptotic_satisfied,
            "verdict": self.verdict_text,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    CSV_HEADER = "d,source,min_t,max_t,lhs,rhs,satisfied,asymptotic_satisfied"

    def to_csv_row(self) -> str:
        return ",".join(
            [
                str(self.dims),
                self.source,
                repr(self.min_t),
                repr(self.max_t),
                repr(self.lhs),
                repr(self.rhs),
                str(self.satisfied),
                str(self.asymptotic_satisfied),
            ]
        )


def _evaluate(dims: int, source: str, min_t: float, max_t: float) -> CriterionReport:
    if min_t <= -2.0:
        raise CriterionError(
            f"left side undefined: min of the field must exceed -2, got {min_t}"
        )
    if max_t < 0.0:
        raise CriterionError(
            f"square root undefined: max of the field must be >= 0, got {max_t}"
        )
    lhs = 1.0 / (1.0 + 0.5 * min_t)
    rhs = 1.0 + 0.5 * max_t + math.sqrt(max_t + 0.25 * max_t * max_t)
    asymptotic = -0.5 * min_t > math.sqrt(max_t) + max_t
    return CriterionReport(
        dims=dims,
        source=source,
        min_t=min_t,
        max_t=max_t,
        lhs=lhs,
        rhs=rhs,
        satisfied=bool(lhs > rhs),
        asymptotic_satisfied=bool(asymptotic),
    )


def check_1d(min_d: float, max_d: float, source: str = "kick derivative",
             ) -> CriterionReport:
    """Criterion from the extrema of the 1-D kick derivative."""
    return _evaluate(1, source, float(min_d), float(max_d))


def check_multi(t_field: GridFunction, source: str = "trace field",
                ) -> CriterionReport:
    """Criterion from the grid extrema of the d-dimensional trace field."""
    values = t_field.values
    return _evaluate(
        t_field.dims, source, float(np.min(values)), float(np.max(values))
    )


def trace_field(psi: GridFunction, dims: int | None = None) -> GridFunction:
    """One d-th of the Laplacian of the potential, computed spectrally."""
    d = psi.dims if dims is None else dims
    if d != psi.dims:
        raise CriterionError(
            f"dims argument {d} does not match the potential's {psi.dims}"
        )
    scale = max(1.0, c0_norm(psi))
    if abs(psi.mean()) > 1e-10 * scale:
        raise CriterionError("potential must have mean zero")
    return (1.0 / d) * laplacian(psi)


def verdict_pipeline(psi: GridFunction, dims: int | None = None,
                     source: str = "potential") -> CriterionReport:
    """Compose the trace field with the criterion check."""
    return check_multi(trace_field(psi, dims), source=source)
