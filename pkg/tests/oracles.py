"""Independent oracles used to freeze expected values in the test suite.

Everything here deliberately avoids the code paths under test: the DFT oracle
is direct summation (no FFT), the smoothing-operator oracle is numerical
quadrature of the kernel integral, and sup-norm oracles are dense sampling of
closed forms.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def dft_direct(values: np.ndarray) -> np.ndarray:
    """Centered-lattice Fourier coefficients by direct summation.

    Returns an array over frequencies ``-M/2 .. M/2`` per axis with the
    Nyquist band split into two half-weight copies, matching the package's
    spectrum convention, but computed with explicit exponential sums.
    """
    values = np.asarray(values, dtype=float)
    m = values.shape[0]
    dims = values.ndim
    nodes = -np.pi + TWO_PI * np.arange(m) / m
    freqs = np.arange(-m // 2, m // 2 + 1)
    # E[k, j] = exp(-i * xi_k * x_j) / M, with half weight at xi = -M/2, +M/2
    e = np.exp(-1j * np.outer(freqs, nodes)) / m
    e[0] *= 0.5
    e[-1] *= 0.5
    out = values.astype(complex)
    for _ in range(dims):
        # contract the leading sample axis into a leading frequency axis
        out = np.tensordot(e, out, axes=([1], [0]))
        out = np.moveaxis(out, 0, dims - 1)
    return out


def trig_eval_direct(coeffs: np.ndarray, degree: int, points: np.ndarray) -> np.ndarray:
    """Evaluate a centered-lattice polynomial at points by explicit summation."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dims = coeffs.ndim
    freqs = np.arange(-degree, degree + 1)
    out = np.empty(pts.shape[0], dtype=complex)
    for i, x in enumerate(pts):
        phase = np.ones((), dtype=complex)
        acc = coeffs
        for axis in range(dims):
            acc = np.tensordot(np.exp(1j * freqs * x[axis]), acc, axes=([0], [0]))
        out[i] = acc
    return out.real


def fejer_kernel_quadrature(fn, x: np.ndarray, axis_unit: np.ndarray, m: int,
                            nodes: int = 10_000) -> np.ndarray:
    """Kernel-integral form of the degree-(m-1) smoothing operator.

    (1/(m*pi)) * integral_{-pi/2}^{pi/2} fn(x + 2*t*e) * (sin(m t)/sin t)^2 dt
    by the midpoint rule; the integrand is pi-periodic and smooth, so the rule
    is spectrally accurate.  ``fn`` maps an (P, d) array to (P,) values.
    """
    h = np.pi / nodes
    t = -np.pi / 2 + (np.arange(nodes) + 0.5) * h
    kernel = (np.sin(m * t) / np.sin(t)) ** 2
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.empty(x.shape[0])
    for i, xi in enumerate(x):
        pts = xi[None, :] + 2.0 * np.outer(t, axis_unit)
        out[i] = np.sum(fn(pts) * kernel) * h / (m * np.pi)
    return out


def fejer_kernel_mass(m: int, nodes: int = 10_000) -> float:
    """Quadrature of (1/(m*pi)) * integral (sin(m t)/sin t)^2 dt; equals 1."""
    h = np.pi / nodes
    t = -np.pi / 2 + (np.arange(nodes) + 0.5) * h
    return float(np.sum((np.sin(m * t) / np.sin(t)) ** 2) * h / (m * np.pi))


def toy_phi_formula(n: int, x: np.ndarray) -> np.ndarray:
    """Closed form of the 1-D toy perturbation kick."""
    return -(5.0 / (4 * n)) * np.cos(n * x) + (1.0 / (8 * n)) * np.sin(2 * n * x)


def toy_dphi_formula(n: int, x: np.ndarray) -> np.ndarray:
    return (5.0 / 4) * np.sin(n * x) + (1.0 / 4) * np.cos(2 * n * x)


def dense_sup_norm(fn, n_points: int = 1_000_000) -> float:
    """Dense 1-D sampling sup-norm oracle on [-pi, pi)."""
    x = -np.pi + TWO_PI * np.arange(n_points) / n_points
    return float(np.max(np.abs(fn(x))))
