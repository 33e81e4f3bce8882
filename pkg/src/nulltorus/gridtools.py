"""Spectral utilities on the unit 2-torus grid.

Conventions used throughout the package:

* the N x N grid samples ``x = i/N`` in each coordinate, ``meshgrid`` with
  ``indexing='ij'`` so axis 0 is x1 and axis 1 is x2;
* all sampled fields are 1-periodic in both coordinates (metric coefficients,
  frames, and the stored *periodic representatives* of twisted spinor
  components are all periodic by construction);
* derivatives of grid data are spectral (FFT); pointwise derivatives of
  callables use central differences elsewhere.

Periodic antiderivatives split off the mean: for f(s, y) periodic in s,
``int_0^x f(s, y) ds = x * mean_s f(., y) + P(x, y) - P(0, y)`` with P the
zero-mean Fourier antiderivative.  This is exact for band-limited data and
spectrally accurate for smooth data, which is what keeps downstream residual
checks at the 1e-6 tolerance honest (grid-scale quadrature noise would be
amplified by the spectral derivative in those checks).
"""

from __future__ import annotations

import numpy as np

TWO_PI_I = 2j * np.pi


def grid_points(n: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.arange(n) / n
    return np.meshgrid(x, x, indexing="ij")


def _wavenumbers(n: int) -> np.ndarray:
    """Integer frequencies in FFT order, Nyquist zeroed (derivative use)."""
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    return k


def spectral_derivatives(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(d/dx1, d/dx2) of a periodic grid field, spectrally."""
    n0, n1 = values.shape
    vhat = np.fft.fft2(values)
    k0 = _wavenumbers(n0)[:, None]
    k1 = _wavenumbers(n1)[None, :]
    d0 = np.fft.ifft2(vhat * (TWO_PI_I * k0))
    d1 = np.fft.ifft2(vhat * (TWO_PI_I * k1))
    if np.isrealobj(values):
        return d0.real, d1.real
    return d0, d1


class TrigSeries1:
    """Finite Fourier series on the circle, evaluable at arbitrary points."""

    def __init__(self, coeffs: np.ndarray, freqs: np.ndarray):
        self.coeffs = np.asarray(coeffs, dtype=complex)
        self.freqs = np.asarray(freqs)

    @classmethod
    def from_samples(cls, values: np.ndarray, trim: float = 1e-13) -> "TrigSeries1":
        n = len(values)
        c = np.fft.fft(np.asarray(values, dtype=complex)) / n
        f = np.fft.fftfreq(n, 1.0 / n)
        keep = np.abs(c) > trim * max(np.abs(c).max(), 1e-300)
        keep[0] = True
        return cls(c[keep], f[keep])

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        phase = np.exp(TWO_PI_I * np.multiply.outer(x, self.freqs))
        return phase @ self.coeffs

    def antiderivative(self) -> tuple[complex, "TrigSeries1"]:
        """Return (mean, P) with  int_0^x f = mean*x + P(x) - P(0)."""
        mean = complex(self.coeffs[self.freqs == 0].sum())
        osc = self.freqs != 0
        return mean, TrigSeries1(self.coeffs[osc] / (TWO_PI_I * self.freqs[osc]),
                                 self.freqs[osc])


class TrigSeries2:
    """Finite 2D Fourier series; modes kept sparse after trimming."""

    def __init__(self, coeffs: np.ndarray, k1: np.ndarray, k2: np.ndarray):
        self.coeffs = np.asarray(coeffs, dtype=complex)   # (M,)
        self.k1 = np.asarray(k1)
        self.k2 = np.asarray(k2)

    @classmethod
    def from_samples(cls, values: np.ndarray, trim: float = 1e-13) -> "TrigSeries2":
        n0, n1 = values.shape
        c = np.fft.fft2(np.asarray(values, dtype=complex)) / (n0 * n1)
        f0 = np.fft.fftfreq(n0, 1.0 / n0)
        f1 = np.fft.fftfreq(n1, 1.0 / n1)
        K1, K2 = np.meshgrid(f0, f1, indexing="ij")
        keep = np.abs(c) > trim * max(np.abs(c).max(), 1e-300)
        keep[0, 0] = True
        return cls(c[keep], K1[keep], K2[keep])

    def __call__(self, x1, x2) -> np.ndarray:
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        shape = np.broadcast_shapes(x1.shape, x2.shape)
        x1 = np.broadcast_to(x1, shape).ravel()
        x2 = np.broadcast_to(x2, shape).ravel()
        phase = np.exp(TWO_PI_I * (np.multiply.outer(x1, self.k1)
                                   + np.multiply.outer(x2, self.k2)))
        out = phase @ self.coeffs
        return out.reshape(shape)

    def antiderivative_x1(self) -> tuple["TrigSeries1", "TrigSeries2"]:
        """(m, P) with  int_0^{x1} f(s, x2) ds = x1*m(x2) + P(x1,x2) - P(0,x2)."""
        zero = self.k1 == 0
        mean = TrigSeries1(self.coeffs[zero], self.k2[zero])
        osc = ~zero
        P = TrigSeries2(self.coeffs[osc] / (TWO_PI_I * self.k1[osc]),
                        self.k1[osc], self.k2[osc])
        return mean, P

    def antiderivative_x2(self) -> tuple["TrigSeries1", "TrigSeries2"]:
        zero = self.k2 == 0
        mean = TrigSeries1(self.coeffs[zero], self.k1[zero])
        osc = ~zero
        P = TrigSeries2(self.coeffs[osc] / (TWO_PI_I * self.k2[osc]),
                        self.k1[osc], self.k2[osc])
        return mean, P


def mollifier(t) -> np.ndarray:
    """Standard bump exp(-1/(1-t^2)) on |t|<1, rescaled to peak value 1."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
    return out


def wrap_unit(x) -> np.ndarray:
    """Representative in [0, 1)."""
    return np.asarray(x, dtype=float) % 1.0


def torus_delta(x, center) -> np.ndarray:
    """Signed distance x - center wrapped to [-1/2, 1/2)."""
    return (np.asarray(x, dtype=float) - center + 0.5) % 1.0 - 0.5


def rk4_fixed(f, y0: np.ndarray, t0: float, n_steps: int, h: float,
              callback=None) -> np.ndarray:
    """Classical RK4 with a fixed step; y may be any ndarray (batched).

    ``callback(i, t, y)`` — optional per-step hook (used to record samples).
    """
    y = np.array(y0, dtype=float, copy=True)
    t = t0
    for i in range(n_steps):
        k1 = f(t, y)
        k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t0 + (i + 1) * h
        if callback is not None:
            callback(i, t, y)
    return y
