"""Spatial discretisations: a periodic box proxy for R^d (d <= 3) and a
radial grid for radial functions on R^n (any n >= 2).

Both grids expose the same small surface used by the rest of the package:

``forward`` / ``inverse``
    Fourier transform along the trailing spatial axes (any number of leading
    batch axes is allowed); ``spectral_l2`` carries the Plancherel weights;
``kmag``
    |xi| on the spectral side;
``lp_norm`` / ``integrate``
    Lebesgue norms on R^n by the grid quadrature.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import fft as sfft
from scipy import special

from .exceptions import DomainError, GridMismatchError, TruncationError

__all__ = ["PeriodicGrid", "RadialGrid", "check_same_grid", "sphere_area"]


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1}."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def check_same_grid(a, b):
    ga = getattr(a, "grid", a)
    gb = getattr(b, "grid", b)
    if not ga.same_as(gb):
        raise GridMismatchError(f"grid mismatch: {ga!r} vs {gb!r}")
    return ga


def _lp_reduce(absvals, weights, p, axes):
    if np.isinf(p):
        return absvals.max(axis=axes)
    if p == 2:
        return np.sqrt(np.sum(absvals ** 2 * weights, axis=axes))
    return np.sum(absvals ** p * weights, axis=axes) ** (1.0 / p)


class PeriodicGrid:
    """Uniform grid on the box [-L, L)^d with N points per axis.

    The box stands in for R^d; the zero mode (the spatial mean) is quotiented
    out whenever a homogeneous norm is evaluated.
    """

    kind = "periodic"

    def __init__(self, d: int = 1, N: int = 64, L: float = 16.0):
        if d not in (1, 2, 3):
            raise DomainError(f"periodic grids support d in {{1, 2, 3}}, got {d}")
        if N < 4 or N % 2:
            raise DomainError("N must be an even integer >= 4")
        if L <= 0:
            raise DomainError("L must be positive")
        self.d, self.N, self.L = int(d), int(N), float(L)
        self.dx = 2.0 * self.L / self.N
        self.cell = self.dx ** self.d
        x1 = -self.L + self.dx * np.arange(self.N)
        k1 = np.fft.fftfreq(self.N, d=self.dx) * 2.0 * np.pi
        self.x1d, self.k1d = x1, k1
        self.shape = (self.N,) * self.d
        self.axes = tuple(range(-self.d, 0))
        self._kmag = None
        self._coords = None

    @property
    def dim(self) -> int:
        return self.d

    @property
    def coords(self):
        if self._coords is None:
            self._coords = np.meshgrid(*([self.x1d] * self.d), indexing="ij")
        return self._coords

    @property
    def radius(self):
        return np.sqrt(sum(c ** 2 for c in self.coords))

    @property
    def kvec(self):
        return np.meshgrid(*([self.k1d] * self.d), indexing="ij")

    @property
    def kmag(self):
        if self._kmag is None:
            self._kmag = np.sqrt(sum(k ** 2 for k in self.kvec))
        return self._kmag

    @property
    def nyquist(self) -> float:
        return math.pi / self.dx

    @property
    def k_min(self) -> float:
        return math.pi / self.L

    @property
    def k_max(self) -> float:
        return math.sqrt(self.d) * self.nyquist

    @property
    def spectral_shape(self):
        return self.shape

    def forward(self, u):
        # plain DFT; spectral_l2 supplies the Plancherel weights
        return sfft.fftn(u, axes=self.axes)

    def inverse(self, c, real=False):
        out = sfft.ifftn(c, axes=self.axes)
        return out.real if real else out

    def inverse_real(self, c):
        """Inverse transform of a Hermitian spectrum (the field is real)."""
        half = np.asarray(c)[..., : self.N // 2 + 1]
        return sfft.irfftn(half, s=self.shape, axes=self.axes)

    def spectral_l2(self, c):
        """L2 norm of the physical field from its FFT coefficients."""
        return np.sqrt(np.sum(np.abs(c) ** 2, axis=self.axes) * self.cell / self.N ** self.d)

    def spectral_weights(self):
        return self.cell / self.N ** self.d

    def lp_norm(self, u, p):
        return _lp_reduce(np.abs(u), self.cell, p, self.axes)

    def integrate(self, u):
        return np.sum(u, axis=self.axes) * self.cell

    def mean(self, u):
        return np.mean(u, axis=self.axes)

    def remove_mean(self, u):
        return u - np.mean(u, axis=self.axes, keepdims=True)

    def wraparound_time(self, support_radius: float) -> float:
        """Hard cap L - diam(supp) on the time horizon of the box proxy."""
        return self.L - 2.0 * support_radius

    def same_as(self, other) -> bool:
        return (isinstance(other, PeriodicGrid) and other.d == self.d
                and other.N == self.N and other.L == self.L)

    def __repr__(self):
        return f"PeriodicGrid(d={self.d}, N={self.N}, L={self.L})"


def _composite_gauss(a, b, breaks, nodes_per_panel):
    pts = np.unique(np.concatenate([[a, b], [x for x in breaks if a < x < b]]))
    xg, wg = np.polynomial.legendre.leggauss(nodes_per_panel)
    xs, ws = [], []
    for lo, hi in zip(pts[:-1], pts[1:]):
        half = 0.5 * (hi - lo)
        xs.append(lo + half * (xg + 1.0))
        ws.append(half * wg)
    return np.concatenate(xs), np.concatenate(ws)


def _hankel_kernel(z, nu):
    """z^{-nu} J_nu(z) with its limit 1/(2^nu Gamma(nu+1)) at z = 0."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < 1e-6
    zs = z[small]
    c0 = 1.0 / (2.0 ** nu * math.gamma(nu + 1.0))
    out[small] = c0 * (1.0 - zs ** 2 / (4.0 * (nu + 1.0)))
    zl = z[~small]
    out[~small] = special.jv(nu, zl) * zl ** (-nu)
    return out


class RadialGrid:
    """Radial functions u(|x|) on R^n sampled at composite Gauss-Legendre
    nodes in r, with a dual set of nodes in |xi|.

    The n-dimensional unitary Fourier transform of a radial function is the
    Hankel-type integral ``hat u(rho) = int_0^inf u(r) K(rho r) r^{n-1} dr``
    with ``K(z) = z^{1-n/2} J_{n/2-1}(z)``; both directions are applied as
    dense quadrature matrices.
    """

    kind = "radial"

    def __init__(self, n: int, R: float = 20.0, rho_max: float = 16.0,
                 panels: int = 40, nodes_per_panel: int = 12,
                 rho_panels: int | None = None, breaks=(), rho_breaks=()):
        if n < 2:
            raise DomainError("radial grids need n >= 2")
        self.n = int(n)
        self.R, self.rho_max = float(R), float(rho_max)
        self.panels, self.nodes_per_panel = int(panels), int(nodes_per_panel)
        self.rho_panels = int(rho_panels or panels)
        self.breaks, self.rho_breaks = tuple(breaks), tuple(rho_breaks)
        r_breaks = list(np.linspace(0.0, self.R, self.panels + 1)) + list(self.breaks)
        k_breaks = list(np.linspace(0.0, self.rho_max, self.rho_panels + 1)) + list(self.rho_breaks)
        self.r, self.wr = _composite_gauss(0.0, self.R, r_breaks, self.nodes_per_panel)
        self.rho, self.wrho = _composite_gauss(0.0, self.rho_max, k_breaks, self.nodes_per_panel)
        self.nu = self.n / 2.0 - 1.0
        self.area = sphere_area(self.n)
        self.shape = (self.r.size,)
        self.spectral_shape = (self.rho.size,)
        self.axes = (-1,)
        self._fwd = None
        self._inv = None

    @property
    def dim(self) -> int:
        return self.n

    @property
    def kmag(self):
        return self.rho

    @property
    def radius(self):
        return self.r

    @property
    def k_min(self) -> float:
        return float(self.rho[0])

    @property
    def k_max(self) -> float:
        return self.rho_max

    @property
    def forward_matrix(self):
        if self._fwd is None:
            K = _hankel_kernel(np.outer(self.rho, self.r), self.nu)
            self._fwd = K * (self.r ** (self.n - 1) * self.wr)[None, :]
        return self._fwd

    @property
    def inverse_matrix(self):
        if self._inv is None:
            K = _hankel_kernel(np.outer(self.r, self.rho), self.nu)
            self._inv = K * (self.rho ** (self.n - 1) * self.wrho)[None, :]
        return self._inv

    def forward(self, u):
        return np.asarray(u) @ self.forward_matrix.T

    def inverse(self, c, real=False):
        out = np.asarray(c) @ self.inverse_matrix.T
        return out.real if (real and np.iscomplexobj(out)) else out

    def inverse_real(self, c):
        out = self.inverse(c)
        return out.real if np.iscomplexobj(out) else out

    def evaluation_matrix(self, r_points):
        """Matrix E with inverse(c) at ``r_points`` equal to c @ E.T."""
        r_points = np.asarray(r_points, dtype=float)
        K = _hankel_kernel(np.outer(r_points, self.rho), self.nu)
        return K * (self.rho ** (self.n - 1) * self.wrho)[None, :]

    def evaluate(self, c, r_points):
        """Inverse transform evaluated at arbitrary radii."""
        return np.asarray(c) @ self.evaluation_matrix(r_points).T

    def spectral_l2(self, c):
        w = self.area * self.rho ** (self.n - 1) * self.wrho
        return np.sqrt(np.sum(np.abs(c) ** 2 * w, axis=-1))

    def spectral_weights(self):
        return self.area * self.rho ** (self.n - 1) * self.wrho

    @property
    def volume_weights(self):
        return self.area * self.r ** (self.n - 1) * self.wr

    def lp_norm(self, u, p):
        return _lp_reduce(np.abs(u), self.volume_weights, p, -1)

    def integrate(self, u):
        return np.sum(u * self.volume_weights, axis=-1)

    def mean(self, u):
        return np.zeros(np.shape(u)[:-1])

    def remove_mean(self, u):
        return u

    def dual(self) -> "RadialGrid":
        """The grid with the roles of r and rho exchanged."""
        g = RadialGrid(self.n, R=self.rho_max, rho_max=self.R, panels=self.rho_panels,
                       nodes_per_panel=self.nodes_per_panel, rho_panels=self.panels,
                       breaks=self.rho_breaks, rho_breaks=self.breaks)
        return g

    def check_decay(self, u, tol=1e-12):
        """Raise TruncationError unless |u| is below ``tol`` (relative) near R."""
        u = np.asarray(u)
        scale = max(float(np.max(np.abs(u))), 1e-300)
        tail = float(np.max(np.abs(u[..., self.r > 0.95 * self.R])))
        if tail > tol * scale:
            raise TruncationError(f"profile not decayed at R={self.R}: tail {tail:.2e}",
                                  bound=tail / scale)
        return tail / scale

    def same_as(self, other) -> bool:
        return (isinstance(other, RadialGrid) and other.n == self.n and other.R == self.R
                and other.rho_max == self.rho_max and other.panels == self.panels
                and other.nodes_per_panel == self.nodes_per_panel
                and other.rho_panels == self.rho_panels
                and other.breaks == self.breaks and other.rho_breaks == self.rho_breaks)

    def __repr__(self):
        return (f"RadialGrid(n={self.n}, R={self.R}, rho_max={self.rho_max}, "
                f"nodes={self.r.size}x{self.rho.size})")
