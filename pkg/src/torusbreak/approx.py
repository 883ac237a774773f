"""Smoothing operators for periodic approximation and certified error bounds.

The degree-(m-1) positive-kernel smoother ``F_m`` acts along one axis; its
frequency response is the triangular weight ``max(0, 1 - |xi|/m)``.  The
combination ``P_m = 2*F_{2m} - F_m`` reproduces polynomials of per-axis
degree <= m exactly, is linear, and has operator norm at most 3 in the sup
norm.  Applying ``P_{m_j}`` along every axis gives the tensor operator whose
output has degree at most ``2*m_j - 1`` in axis ``j``.

All operators are implemented spectrally (weight multiplication on the
coefficient lattice); the classical kernel-integral form is kept in the test
suite as an independent quadrature oracle.  Approximation errors are
certified against the bound ``A * N^{-k} * ||f||_{C^k}`` with the constant
``A`` calibrated empirically per (dimension, order).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .grid import (
    GridError,
    GridFunction,
    TrigPoly,
    c0_norm,
    cr_norm,
    differentiate,
    from_spectrum,
    to_spectrum,
)


class ApproxError(ValueError):
    """Invalid operator parameters or unreachable tolerance."""


class AliasingResolutionError(ApproxError):
    """The working resolution cannot hold the operator's output degree."""

    def __init__(self, resolution: int, degree: int):
        super().__init__(
            f"resolution {resolution} too small for operator output degree "
            f"{degree} (need >= {2 * degree + 2})"
        )


@dataclass(frozen=True)
class ApproxParams:
    """Per-axis smoothing degrees and smoothness orders for certification.

    ``degrees[j] = m_j`` controls the operator along axis j (output degree at
    most 2*m_j - 1); ``orders[j] = r_j`` is the smoothness order used in the
    error bound; ``sigma`` is the target approximation tolerance; ``a_const``
    the calibrated bound constant (None until calibrated).
    """

    degrees: tuple[int, ...]
    orders: tuple[int, ...]
    sigma: float = 0.05
    a_const: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(m) for m in self.degrees))
        object.__setattr__(self, "orders", tuple(int(r) for r in self.orders))
        if len(self.degrees) != len(self.orders):
            raise ApproxError("degrees and orders must have equal length")
        if any(m < 1 for m in self.degrees):
            raise ApproxError(f"all degrees must be >= 1, got {self.degrees}")
        if any(r < 1 for r in self.orders):
            raise ApproxError(f"all orders must be >= 1, got {self.orders}")
        if not 0.0 < self.sigma < 1.0:
            raise ApproxError(f"sigma must lie in (0, 1), got {self.sigma}")
        if self.a_const is not None and self.a_const <= 0.0:
            raise ApproxError(f"calibrated constant must be > 0, got {self.a_const}")

    @property
    def dims(self) -> int:
        return len(self.degrees)


def _triangular_weights(freqs: np.ndarray, m: int) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(freqs) / m)


def _vp_weights(freqs: np.ndarray, m: int) -> np.ndarray:
    """2*(1 - |xi|/2m)_+ - (1 - |xi|/m)_+ : equal to 1 for |xi| <= m, linear
    down to 0 at |xi| = 2m."""
    return 2.0 * _triangular_weights(freqs, 2 * m) - _triangular_weights(freqs, m)


def _apply_axis_weights(f: GridFunction, axis: int, weights_fn, m: int) -> GridFunction:
    if m < 1:
        raise ApproxError(f"degree parameter must be >= 1, got {m}")
    if not 0 <= axis < f.dims:
        raise GridError(f"axis {axis} out of range for dims {f.dims}")
    p = to_spectrum(f)
    w = weights_fn(p.frequencies().astype(float), m)
    shape = [1] * f.dims
    shape[axis] = w.size
    smoothed = TrigPoly(f.dims, p.degree, p.coeffs * w.reshape(shape))
    return from_spectrum(smoothed, f.resolution)


def fejer(f: GridFunction, axis: int, m: int) -> GridFunction:
    """Positive-kernel smoother along one axis; output degree <= m-1 there.

    Sup-norm non-increasing (the kernel is nonnegative with unit mass) and
    maps nonnegative functions to nonnegative functions.
    """
    return _apply_axis_weights(f, axis, _triangular_weights, m)


def vallee_poussin(f: GridFunction, axis: int, m: int) -> GridFunction:
    """Delayed-mean smoother 2*F_{2m} - F_m along one axis.

    Reproduces trigonometric polynomials of degree <= m in the axis exactly,
    is linear, outputs degree <= 2m-1, and has sup-norm bound 3*||f||.
    """
    return _apply_axis_weights(f, axis, _vp_weights, m)


def vallee_poussin_tensor(f: GridFunction, params: ApproxParams) -> TrigPoly:
    """Sequential per-axis application of the delayed-mean smoother.

    The per-axis frequency weights commute, so the axis order does not
    matter.  The result is truncated to the centered lattice of degree
    ``max_j (2*m_j - 1)``; the zero frequency is preserved exactly.
    """
    if params.dims != f.dims:
        raise ApproxError(
            f"params have {params.dims} axes but the function has {f.dims}"
        )
    out_degree = max(2 * m - 1 for m in params.degrees)
    if f.resolution < 2 * out_degree + 2:
        raise AliasingResolutionError(f.resolution, out_degree)
    p = to_spectrum(f)
    freqs = p.frequencies().astype(float)
    coeffs = p.coeffs
    for axis, m in enumerate(params.degrees):
        w = _vp_weights(freqs, m)
        shape = [1] * f.dims
        shape[axis] = w.size
        coeffs = coeffs * w.reshape(shape)
    lo = p.degree - out_degree
    hi = p.degree + out_degree + 1
    window = (slice(lo, hi),) * f.dims
    return TrigPoly(f.dims, out_degree, coeffs[window])


@dataclass(frozen=True)
class JacksonCertificate:
    """Measured approximation error against the calibrated N^{-k} bound."""

    error: float
    bound: float
    degree_n: int
    order_k: int
    passed: bool

    def to_json_record(self) -> str:
        return json.dumps(
            {
                "N": self.degree_n,
                "k": self.order_k,
                "error": self.error,
                "bound": self.bound,
                "pass": self.passed,
            }
        )


def jackson_certificate(f: GridFunction, params: ApproxParams) -> JacksonCertificate:
    """Measure ``||f - P(f)||_C0`` and compare with ``A * N^{-k} * ||f||_C^k``.

    The governing axis is the one with the largest ``m_j^{-r_j} *
    ||d^{r_j}_j f||_C0`` contribution; ``N = 2*m - 1`` and ``k = r`` of that
    axis.  Requires a calibrated constant in ``params``.
    """
    if params.a_const is None:
        raise ApproxError("params.a_const must be calibrated before certification")
    p = vallee_poussin_tensor(f, params)
    error = c0_norm(f - from_spectrum(p, f.resolution))
    spectrum = to_spectrum(f)
    scores = []
    for axis, (m, r) in enumerate(zip(params.degrees, params.orders)):
        beta = tuple(r if j == axis else 0 for j in range(f.dims))
        deriv = from_spectrum(differentiate(spectrum, beta), f.resolution)
        scores.append(c0_norm(deriv) / m**r)
    governing = int(np.argmax(scores))
    degree_n = 2 * params.degrees[governing] - 1
    order_k = params.orders[governing]
    bound = params.a_const * degree_n ** (-order_k) * cr_norm(f, order_k)
    return JacksonCertificate(
        error=error,
        bound=bound,
        degree_n=degree_n,
        order_k=order_k,
        passed=bool(error <= bound),
    )


def jackson_error(f: GridFunction, params: ApproxParams) -> float:
    """Sup-norm error of the tensor smoother at the given degrees."""
    p = vallee_poussin_tensor(f, params)
    return c0_norm(f - from_spectrum(p, f.resolution))


A_CONST_FLOOR = 1e-6


def calibrate_A(family: list[GridFunction], k: int, degrees: list[int]) -> float:
    """Smallest constant A with error <= A * N^{-k} * ||f||_{C^k} across the
    family and degree list, times a 1.1 safety factor (floored at 1e-6)."""
    if not family:
        raise ApproxError("calibration family must be nonempty")
    if k < 1:
        raise ApproxError(f"order must be >= 1, got {k}")
    worst = 0.0
    for f in family:
        norm_k = cr_norm(f, k)
        if norm_k == 0.0:
            continue
        for m in degrees:
            params = ApproxParams(
                degrees=(int(m),) * f.dims, orders=(k,) * f.dims
            )
            error = jackson_error(f, params)
            n = 2 * int(m) - 1
            worst = max(worst, error * n**k / norm_k)
    return max(1.1 * worst, A_CONST_FLOOR)


def adaptive_degree(
    f: GridFunction,
    k: int,
    sigma: float,
    a_const: float,
    m_start: int = 2,
    norm_k: float | None = None,
) -> tuple[TrigPoly, JacksonCertificate]:
    """Smallest per-axis degree whose certified bound and measured error both
    fall below sigma; degrees are scanned by doubling then bisection.

    ``norm_k`` overrides the grid-measured C^k norm (callers with structural
    knowledge of the input can supply a sharper value).  Raises if the
    working resolution cannot accommodate the required degree, which is the
    caller's signal to re-sample and retry.
    """
    if a_const <= 0.0:
        raise ApproxError("a_const must be positive")
    if norm_k is None:
        norm_k = cr_norm(f, k)

    def certify(m: int) -> JacksonCertificate:
        params = ApproxParams(
            degrees=(m,) * f.dims, orders=(k,) * f.dims, sigma=sigma, a_const=a_const
        )
        p = vallee_poussin_tensor(f, params)
        error = c0_norm(f - from_spectrum(p, f.resolution))
        n = 2 * m - 1
        bound = a_const * n ** (-k) * norm_k
        return JacksonCertificate(error, bound, n, k, bool(error <= bound))

    def acceptable(cert: JacksonCertificate) -> bool:
        return cert.error <= sigma and cert.bound <= sigma

    m_cap = (f.resolution // 2 - 2) // 2 + 1  # largest m with 2(2m-1)+2 <= M
    m = m_start
    cert = certify(m)
    while not acceptable(cert):
        if m >= m_cap:
            raise AliasingResolutionError(f.resolution, 2 * (2 * m) - 1)
        m = min(2 * m, m_cap)
        cert = certify(m)
    lo, hi = max(m_start, m // 2), m
    while lo < hi:
        mid = (lo + hi) // 2
        cert_mid = certify(mid)
        if acceptable(cert_mid):
            hi = mid
        else:
            lo = mid + 1
    cert = certify(hi)
    params = ApproxParams(
        degrees=(hi,) * f.dims, orders=(k,) * f.dims, sigma=sigma, a_const=a_const
    )
    return vallee_poussin_tensor(f, params), cert
