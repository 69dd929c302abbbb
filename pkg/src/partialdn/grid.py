"""Discretization substrate: the cube grid, nodal scalar fields, Fourier
quadrature, and volume Sobolev norms on the zero-padded periodic box.

The domain is the open cube (-1,1)^3.  A grid with ``n_axis`` interior nodes
per axis has spacing h = 2/(n_axis+1); node i sits at -1+(i+1)h.  Boundary
values live on the six faces and are handled by :mod:`partialdn.boundary`.

Volume L^2 quantities use the plain nodal sum h^3 * sum(.), which is exactly
Parseval-consistent with the padded-box DFT below.  The Fourier quadrature
``fourier_coefficient`` additionally corrects the first/last node weights so
that constants integrate exactly over the cube.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

__all__ = [
    "Grid",
    "ScalarField",
    "make_grid",
    "scalar_field",
    "l2_norm",
    "fourier_coefficient",
    "volume_sobolev_norm",
    "box_lattice_frequencies",
    "box_dft",
    "box_synthesis",
    "lowpass_truncate",
]

# padded periodic box is (-2,2)^3: factor-2 zero extension of the cube
PAD_HALF_WIDTH = 2.0


@dataclass(frozen=True)
class Grid:
    """Uniform interior grid of the cube (-1,1)^3.

    ``d`` is the radius of the closed cube, max |x| = sqrt(3).
    """

    n_axis: int
    spacing: float
    d: float

    @property
    def axis(self):
        """Interior node coordinates along one axis."""
        h = self.spacing
        return -1.0 + h * np.arange(1, self.n_axis + 1)

    @property
    def shape(self):
        return (self.n_axis,) * 3

    @property
    def n_nodes(self):
        return self.n_axis**3

    def meshgrid(self):
        ax = self.axis
        return np.meshgrid(ax, ax, ax, indexing="ij")


def make_grid(n_axis: int) -> Grid:
    """Build the interior grid; n_axis >= 4 so all stencils are defined."""
    n = int(n_axis)
    if n != n_axis or n < 4:
        raise ValueError(f"n_axis must be an integer >= 4, got {n_axis!r}")
    return Grid(n_axis=n, spacing=2.0 / (n + 1), d=float(np.sqrt(3.0)))


@dataclass(frozen=True)
class ScalarField:
    """Nodal samples at the interior nodes; real or complex."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.shape != self.grid.shape:
            raise ValueError(f"field shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite entries")

    @property
    def kind(self) -> str:
        return "complex" if np.iscomplexobj(self.values) else "real"


def scalar_field(grid: Grid, values) -> ScalarField:
    """Wrap nodal values (reshaped and made read-only) into a ScalarField."""
    v = np.asarray(values)
    if v.dtype.kind not in "fc":
        v = v.astype(float)
    v = np.ascontiguousarray(v).reshape(grid.shape)
    v = v.copy()
    v.setflags(write=False)
    return ScalarField(grid=grid, values=v)


def l2_norm(field: ScalarField) -> float:
    """Nodal L^2(Omega) norm, h^3-weighted."""
    h = field.grid.spacing
    return float(np.sqrt(h**3) * np.linalg.norm(field.values))


def _quad_weights_1d(grid: Grid) -> np.ndarray:
    # trapezoid realized on interior nodes: end nodes absorb the boundary
    # strip, so constants integrate to exactly 2 per axis
    w = np.full(grid.n_axis, grid.spacing)
    w[0] = w[-1] = 1.5 * grid.spacing
    return w


def fourier_coefficient(q: ScalarField, kappa) -> complex:
    """Quadrature of int_Omega q(x) e^{-i kappa.x} dx, second order in h."""
    kappa = np.asarray(kappa, dtype=float)
    if kappa.shape != (3,):
        raise ValueError("kappa must be a 3-vector")
    g = q.grid
    ax = g.axis
    w = _quad_weights_1d(g)
    px = w * np.exp(-1j * kappa[0] * ax)
    py = w * np.exp(-1j * kappa[1] * ax)
    pz = w * np.exp(-1j * kappa[2] * ax)
    return complex(np.einsum("i,j,k,ijk->", px, py, pz, q.values))


def _box_points(grid: Grid) -> int:
    # padded box side 4 = Nb*h with h = 2/(n+1)
    return 2 * (grid.n_axis + 1)


def box_lattice_frequencies(grid: Grid) -> np.ndarray:
    """1-D DFT frequencies (radians) of the padded box, FFT ordering."""
    nb = _box_points(grid)
    return 2.0 * np.pi * np.fft.fftfreq(nb, d=grid.spacing)


def box_dft(q: ScalarField) -> np.ndarray:
    """Nodal-sum Fourier amplitudes h^3 sum q(x) e^{-i k.x} on the padded box.

    The cube field is zero-extended; amplitudes carry the true node phases,
    so entry [m1,m2,m3] equals the plain h^3-weighted quadrature of
    q(x) e^{-i k_m . x} over the cube.
    """
    g = q.grid
    nb = _box_points(g)
    buf = np.zeros((nb, nb, nb), dtype=complex if q.kind == "complex" else float)
    buf[: g.n_axis, : g.n_axis, : g.n_axis] = q.values
    spec = scipy.fft.fftn(buf)
    k1 = box_lattice_frequencies(g)
    # lattice position of embedded node l is x0 + l*h; restore absolute phase
    phase = np.exp(-1j * k1 * g.axis[0])
    spec = spec * phase[:, None, None] * phase[None, :, None] * phase[None, None, :]
    return spec * g.spacing**3


def box_synthesis(grid: Grid, spec: np.ndarray) -> np.ndarray:
    """Invert :func:`box_dft`: nodal values on the cube from box amplitudes."""
    nb = _box_points(grid)
    if spec.shape != (nb, nb, nb):
        raise ValueError("spectrum shape does not match the padded box")
    k1 = box_lattice_frequencies(grid)
    phase = np.exp(1j * k1 * grid.axis[0])
    buf = spec * phase[:, None, None] * phase[None, :, None] * phase[None, None, :]
    vals = scipy.fft.ifftn(buf) / grid.spacing**3
    return vals[: grid.n_axis, : grid.n_axis, : grid.n_axis]


def lowpass_truncate(q: ScalarField, radius: float) -> ScalarField:
    """Low-pass projection: keep box amplitudes with |k| <= radius."""
    g = q.grid
    spec = box_dft(q)
    k1 = box_lattice_frequencies(g)
    k2 = k1[:, None, None] ** 2 + k1[None, :, None] ** 2 + k1[None, None, :] ** 2
    spec = np.where(k2 <= radius**2, spec, 0.0)
    vals = box_synthesis(g, spec)
    if q.kind == "real":
        vals = vals.real
    return scalar_field(g, vals)


def volume_sobolev_norm(q: ScalarField, s: float) -> float:
    """H^s norm of the zero-extended field via the padded-box DFT lattice.

    At s=0 this coincides with the nodal L^2(Omega) norm exactly (discrete
    Parseval); in general it is the Riemann sum of the whole-space Fourier
    integral over the box lattice.
    """
    if not -2.0 <= s <= 2.0:
        raise ValueError(f"s must lie in [-2, 2], got {s}")
    g = q.grid
    spec = box_dft(q)
    k1 = box_lattice_frequencies(g)
    k2 = k1[:, None, None] ** 2 + k1[None, :, None] ** 2 + k1[None, None, :] ** 2
    vol = (2.0 * PAD_HALF_WIDTH) ** 3
    total = np.sum((1.0 + k2) ** s * np.abs(spec) ** 2) / vol
    return float(np.sqrt(total))
