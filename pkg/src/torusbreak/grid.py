"""Periodic grid functions on the d-torus: spectral transforms, derivatives, norms.

Conventions used throughout the package:

* A function is sampled on the uniform tensor grid ``x_j = -pi + 2*pi*j/M``,
  ``j = 0..M-1``, with the same power-of-two resolution ``M`` on every axis
  and no duplicated endpoint (periodicity is implicit).
* A trigonometric polynomial is stored by its complex coefficients on the
  centered frequency lattice ``{-degree, ..., degree}^d``; the coefficient at
  frequency zero equals the mean of the represented function.
* ``to_spectrum`` splits the Nyquist band symmetrically (half weight at
  ``-M/2`` and ``+M/2``), which keeps the coefficient array Hermitian and
  makes the grid -> spectrum -> grid round trip exact at the nodes.
* ``C^r`` norms in several variables are the max over all multi-indices of
  total order ``<= r`` of the sup-norm of the corresponding mixed partial;
  sup norms are grid maxima, i.e. lower bounds of the true sup that converge
  as ``M`` grows.
* Hoelder norms are reported as the interpolation upper bound
  ``2 * ||f||_{C^r}^{1-a} * ||f||_{C^{r+1}}^a``, not as exact fractional
  seminorms.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from itertools import product as _iter_product

import numpy as np

TWO_PI = 2.0 * np.pi


class GridError(ValueError):
    """Invalid grid data (bad shape, non-finite values, bad resolution)."""


class AliasingError(GridError):
    """Resolution too small to represent the requested frequency content."""


def _is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


def axis_nodes(resolution: int) -> np.ndarray:
    """Sample points -pi + 2*pi*j/M, j = 0..M-1, of one axis."""
    return -np.pi + TWO_PI * np.arange(resolution) / resolution


def mesh(dims: int, resolution: int) -> tuple[np.ndarray, ...]:
    """Full tensor meshgrid (ij indexing) of the sampling nodes."""
    nodes = axis_nodes(resolution)
    return tuple(np.meshgrid(*([nodes] * dims), indexing="ij"))


@dataclass(frozen=True)
class GridFunction:
    """Real 2*pi-periodic function sampled on the uniform tensor grid."""

    dims: int
    resolution: int
    values: np.ndarray

    def __post_init__(self):
        if self.dims < 1:
            raise GridError(f"dims must be >= 1, got {self.dims}")
        if not _is_power_of_two(self.resolution) or self.resolution < 4:
            raise GridError(
                f"resolution must be a power of two >= 4, got {self.resolution}"
            )
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.resolution,) * self.dims:
            raise GridError(
                f"values shape {values.shape} does not match "
                f"({self.resolution},)*{self.dims}"
            )
        if not np.all(np.isfinite(values)):
            raise GridError("grid values must all be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values: np.ndarray) -> "GridFunction":
        values = np.asarray(values, dtype=float)
        return cls(values.ndim, values.shape[0], values)

    @classmethod
    def from_callable(cls, dims: int, resolution: int, fn) -> "GridFunction":
        return cls(dims, resolution, fn(*mesh(dims, resolution)))

    @classmethod
    def zeros(cls, dims: int, resolution: int) -> "GridFunction":
        return cls(dims, resolution, np.zeros((resolution,) * dims))

    def mean(self) -> float:
        return float(np.mean(self.values))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_compatible(other)
        return GridFunction(self.dims, self.resolution, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_compatible(other)
        return GridFunction(self.dims, self.resolution, self.values - other.values)

    def __mul__(self, scalar: float) -> "GridFunction":
        return GridFunction(self.dims, self.resolution, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.dims, self.resolution, -self.values)

    def _check_compatible(self, other: "GridFunction") -> None:
        if (self.dims, self.resolution) != (other.dims, other.resolution):
            raise GridError(
                f"incompatible grids: ({self.dims},{self.resolution}) vs "
                f"({other.dims},{other.resolution})"
            )


@dataclass(frozen=True)
class TrigPoly:
    """Trigonometric polynomial on the centered lattice {-degree..degree}^d.

    ``coeffs[i1,...,id]`` is the coefficient of ``exp(i * xi . x)`` with
    ``xi_k = i_k - degree``.  A real-valued polynomial has Hermitian
    coefficients: ``c[-xi] == conj(c[xi])``.
    """

    dims: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.dims < 1:
            raise GridError(f"dims must be >= 1, got {self.dims}")
        if self.degree < 0:
            raise GridError(f"degree must be >= 0, got {self.degree}")
        coeffs = np.asarray(self.coeffs, dtype=complex)
        side = 2 * self.degree + 1
        if coeffs.shape != (side,) * self.dims:
            raise GridError(
                f"coeffs shape {coeffs.shape} does not match ({side},)*{self.dims}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise GridError("coefficients must all be finite")
        coeffs = coeffs.copy()
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def frequencies(self) -> np.ndarray:
        """Per-axis frequency values -degree..degree."""
        return np.arange(-self.degree, self.degree + 1)

    def coefficient(self, xi: tuple[int, ...]) -> complex:
        """Coefficient at the integer frequency vector ``xi``."""
        if len(xi) != self.dims:
            raise GridError(f"frequency vector must have length {self.dims}")
        idx = tuple(int(k) + self.degree for k in xi)
        if any(i < 0 or i > 2 * self.degree for i in idx):
            return 0.0 + 0.0j
        return complex(self.coeffs[idx])

    def hermitian_defect(self) -> float:
        """Max deviation from c[-xi] == conj(c[xi]); 0 for real polynomials."""
        flipped = self.coeffs[(slice(None, None, -1),) * self.dims]
        return float(np.max(np.abs(self.coeffs - np.conj(flipped))))

    def mean(self) -> float:
        return float(self.coeffs[(self.degree,) * self.dims].real)

    def scale(self, factor: float) -> "TrigPoly":
        return TrigPoly(self.dims, self.degree, self.coeffs * float(factor))

    def evaluate(self, points: np.ndarray, chunk: int = 4096) -> np.ndarray:
        """Evaluate at arbitrary points, shape (P, dims) or (dims,) -> (P,).

        Direct summation over the lattice; exact for band-limited data.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dims:
            raise GridError(f"points must have {self.dims} columns")
        freqs = self.frequencies()
        out = np.empty(pts.shape[0])
        for start in range(0, pts.shape[0], chunk):
            block = pts[start : start + chunk]
            acc = self.coeffs
            for axis in range(self.dims):
                phases = np.exp(1j * np.outer(block[:, axis], freqs))
                if axis == 0:
                    acc = np.tensordot(phases, acc, axes=([1], [0]))
                else:
                    acc = np.einsum("pk,pk...->p...", phases, acc)
            out[start : start + chunk] = acc.real
        return out


def _node_phase(shape: tuple[int, ...], center: int) -> np.ndarray:
    """Tensor of prod_axis (-1)^(i_axis - center): the phase between FFT bins
    and true Fourier coefficients for a grid starting at -pi."""
    phase = np.ones((1,) * len(shape))
    for axis, length in enumerate(shape):
        signs = (-1.0) ** ((np.arange(length) - center) % 2)
        reshaped = [1] * len(shape)
        reshaped[axis] = length
        phase = phase * signs.reshape(reshaped)
    return phase


def _split_nyquist(coeffs: np.ndarray, axis: int) -> np.ndarray:
    """Duplicate the -M/2 slice at +M/2 with half weight on both copies."""
    half = 0.5 * np.take(coeffs, [0], axis=axis)
    rest = np.take(coeffs, range(1, coeffs.shape[axis]), axis=axis)
    return np.concatenate([half, rest, half], axis=axis)


def _fold_nyquist(coeffs: np.ndarray, axis: int) -> np.ndarray:
    """Add the +degree slice onto the -degree slice and drop it."""
    head = np.take(coeffs, [0], axis=axis) + np.take(coeffs, [-1], axis=axis)
    rest = np.take(coeffs, range(1, coeffs.shape[axis] - 1), axis=axis)
    return np.concatenate([head, rest], axis=axis)


def to_spectrum(f: GridFunction) -> TrigPoly:
    """Discrete Fourier coefficients, zero frequency normalized to the mean.

    Returns a polynomial of degree ``M/2``; the Nyquist band is split
    symmetrically so the result is Hermitian and ``from_spectrum`` at the
    same resolution reproduces the samples exactly.
    """
    coeffs = np.fft.fftn(f.values) / f.values.size
    coeffs = np.fft.fftshift(coeffs)
    coeffs = coeffs * _node_phase(coeffs.shape, f.resolution // 2)
    for axis in range(f.dims):
        coeffs = _split_nyquist(coeffs, axis)
    return TrigPoly(f.dims, f.resolution // 2, coeffs)


def from_spectrum(p: TrigPoly, resolution: int) -> GridFunction:
    """Exact evaluation of the polynomial on the grid of the given resolution.

    Requires ``resolution >= 2*degree``.  At the boundary case
    ``resolution == 2*degree`` the two Nyquist slices are folded onto one FFT
    bin; evaluation at the nodes is still exact there (the two exponentials
    coincide on the grid), which is what makes the round trip with
    ``to_spectrum`` the identity.  Faithful representation of an arbitrary
    polynomial (round trip starting from the spectrum) needs
    ``resolution >= 2*degree + 2``.
    """
    if not _is_power_of_two(resolution) or resolution < 4:
        raise GridError(f"resolution must be a power of two >= 4, got {resolution}")
    if resolution < 2 * p.degree:
        raise AliasingError(
            f"resolution {resolution} cannot represent degree {p.degree}"
        )
    coeffs = p.coeffs * _node_phase(p.coeffs.shape, p.degree)
    if resolution == 2 * p.degree:
        for axis in range(p.dims):
            coeffs = _fold_nyquist(coeffs, axis)
    else:
        pad = resolution // 2 - p.degree
        coeffs = np.pad(coeffs, [(pad, pad - 1)] * p.dims)
    values = np.fft.ifftn(np.fft.ifftshift(coeffs)) * coeffs.size
    return GridFunction(p.dims, resolution, values.real)


def _derivative_weights(p: TrigPoly, beta: tuple[int, ...]) -> np.ndarray:
    """Coefficient multipliers prod_j (i*xi_j)^beta_j on the lattice of p."""
    freqs = p.frequencies()
    weights = np.ones((1,) * p.dims, dtype=complex)
    for axis, order in enumerate(beta):
        if order == 0:
            continue
        shape = [1] * p.dims
        shape[axis] = freqs.size
        weights = weights * (1j * freqs.reshape(shape)) ** order
    return np.broadcast_to(weights, p.coeffs.shape)


def differentiate(p: TrigPoly, beta: tuple[int, ...]) -> TrigPoly:
    """Mixed partial of a polynomial by coefficient multiplication."""
    if len(beta) != p.dims or any(b < 0 for b in beta):
        raise GridError(f"bad multi-index {beta} for dims {p.dims}")
    return TrigPoly(p.dims, p.degree, p.coeffs * _derivative_weights(p, beta))


def spectral_derivative(f: GridFunction, axis: int, order: int) -> GridFunction:
    """Samples of the order-th partial derivative along one axis.

    Exact for band-limited input; the caller is responsible for the input
    being resolved at the working resolution.
    """
    if order < 0:
        raise GridError(f"derivative order must be >= 0, got {order}")
    if not 0 <= axis < f.dims:
        raise GridError(f"axis {axis} out of range for dims {f.dims}")
    if order == 0:
        return f
    beta = tuple(order if j == axis else 0 for j in range(f.dims))
    return from_spectrum(differentiate(to_spectrum(f), beta), f.resolution)


def laplacian(f: GridFunction) -> GridFunction:
    """Sum of pure second partials, computed spectrally."""
    p = to_spectrum(f)
    freqs = p.frequencies().astype(float)
    total = np.zeros(p.coeffs.shape, dtype=complex)
    for axis in range(f.dims):
        shape = [1] * f.dims
        shape[axis] = freqs.size
        total += p.coeffs * -(freqs.reshape(shape) ** 2)
    return from_spectrum(TrigPoly(f.dims, p.degree, total), f.resolution)


def c0_norm(f: GridFunction) -> float:
    """Grid sup-norm: max |f| over the samples (lower bound of the true sup)."""
    return float(np.max(np.abs(f.values)))


def multi_indices(dims: int, max_order: int):
    """All multi-indices beta with |beta| <= max_order, order-0 included."""
    for beta in _iter_product(range(max_order + 1), repeat=dims):
        if sum(beta) <= max_order:
            yield beta


def cr_norm(f: GridFunction, r: int) -> float:
    """C^r norm: max over multi-indices |beta| <= r of sup |d^beta f|."""
    if r < 0:
        raise GridError(f"norm order must be >= 0, got {r}")
    p = to_spectrum(f)
    best = 0.0
    for beta in multi_indices(f.dims, r):
        if sum(beta) == 0:
            best = max(best, c0_norm(f))
            continue
        deriv = from_spectrum(differentiate(p, beta), f.resolution)
        best = max(best, c0_norm(deriv))
    return best


def holder_norm(f: GridFunction, r: int, alpha: float) -> float:
    """Interpolation upper bound for the C^{r+alpha} norm.

    Returns ``2 * cr_norm(f, r)^(1-alpha) * cr_norm(f, r+1)^alpha``.  This is
    an upper-bound convention (constant 2), not the exact Hoelder seminorm.
    """
    if not 0.0 < alpha < 1.0:
        raise GridError(f"alpha must lie in (0, 1), got {alpha}")
    low = cr_norm(f, r)
    high = cr_norm(f, r + 1)
    return 2.0 * low ** (1.0 - alpha) * high**alpha


@dataclass(frozen=True)
class NormReport:
    """Bundle of measured norms of one grid function."""

    c0: float
    cr: dict[int, float] = field(default_factory=dict)
    holder: dict[tuple[int, float], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.c0 < 0 or any(v < 0 for v in self.cr.values()):
            raise GridError("norms must be nonnegative")
        if any(v < 0 for v in self.holder.values()):
            raise GridError("norms must be nonnegative")


def norm_report(
    f: GridFunction,
    orders: tuple[int, ...] = (0, 1),
    holder_pairs: tuple[tuple[int, float], ...] = (),
) -> NormReport:
    """Measure C^0, the requested integer norms, and interpolation bounds."""
    cr = {r: cr_norm(f, r) for r in orders}
    holder = {(r, a): holder_norm(f, r, a) for r, a in holder_pairs}
    return NormReport(c0=c0_norm(f), cr=cr, holder=holder)


_HEADER = struct.Struct("<qq")


def save_binary(f: GridFunction, path) -> None:
    """Flat binary container: int64 d, int64 M, then M^d little-endian float64
    values in row-major order."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(f.dims, f.resolution))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def load_binary(path) -> GridFunction:
    with open(path, "rb") as fh:
        dims, resolution = _HEADER.unpack(fh.read(_HEADER.size))
        count = resolution**dims
        values = np.frombuffer(fh.read(8 * count), dtype="<f8", count=count)
    return GridFunction(dims, resolution, values.reshape((resolution,) * dims))


def save_csv(f: GridFunction, path) -> None:
    """One line per grid point: coordinates then value, row-major order."""
    grids = mesh(f.dims, f.resolution)
    columns = [g.ravel() for g in grids] + [f.values.ravel()]
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join([f"x{j+1}" for j in range(f.dims)] + ["value"]) + "\n")
        for row in zip(*columns):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
