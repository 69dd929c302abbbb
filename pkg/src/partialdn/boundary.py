"""Boundary calculus on the six faces of the cube: face partitions driven by
a probe direction, traces and one-sided normal derivatives, smooth boundary
cutoffs, and facewise fractional Sobolev norms.

Face order is fixed everywhere (including binary dumps):
index 0..5 <-> outward normals +e1, -e1, +e2, -e2, +e3, -e3.
Each face carries the n_axis^2 samples at the projections of the interior
nodes, so faces exclude the cube edges; the two in-face axes are the
remaining coordinate axes in increasing order.

The facewise H^s norms (s in {-1/2, 0, +1/2}) are discrete-sine-transform
multiplier norms computed per face and summed over a face region.  They
ignore inter-face coupling, so they are equivalent to the true boundary
norms only for traces vanishing in a margin near each face's edges; the
operator-norm machinery in :mod:`partialdn.dnmap` enforces a 2-node margin
on its admissible inputs for exactly this reason.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import GeometryError, SupportError
from .grid import Grid, ScalarField

__all__ = [
    "FACE_NORMALS",
    "BoundaryTrace",
    "FacePartition",
    "DirectionFrame",
    "boundary_trace",
    "zero_trace",
    "trace_of_function",
    "face_node_coordinates",
    "face_partition",
    "direction_frame",
    "trace0",
    "trace1",
    "boundary_cutoff",
    "boundary_sobolev_norm",
    "sobolev_multiplier_apply",
    "trace_dot",
    "trace_l2_norm",
    "edge_margin_mask",
]

FACE_NORMALS = np.array(
    [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]],
    dtype=float,
)
# axis each face is orthogonal to, and the two in-face axes (increasing order)
FACE_AXIS = (0, 0, 1, 1, 2, 2)
FACE_SIGN = (1, -1, 1, -1, 1, -1)
FACE_TANGENTS = ((1, 2), (1, 2), (0, 2), (0, 2), (0, 1), (0, 1))


@dataclass(frozen=True)
class BoundaryTrace:
    """Per-face nodal boundary values: array of shape (6, n_axis, n_axis)."""

    grid: Grid
    faces: np.ndarray

    def __post_init__(self):
        n = self.grid.n_axis
        if self.faces.shape != (6, n, n):
            raise ValueError(f"trace shape {self.faces.shape} != (6, {n}, {n})")
        if not np.all(np.isfinite(self.faces)):
            raise ValueError("trace contains non-finite entries")

    @property
    def kind(self) -> str:
        return "complex" if np.iscomplexobj(self.faces) else "real"


def boundary_trace(grid: Grid, faces) -> BoundaryTrace:
    f = np.ascontiguousarray(faces)
    if f.dtype.kind not in "fc":
        f = f.astype(float)
    f = f.copy()
    f.setflags(write=False)
    return BoundaryTrace(grid=grid, faces=f)


def zero_trace(grid: Grid, dtype=float) -> BoundaryTrace:
    return boundary_trace(grid, np.zeros((6, grid.n_axis, grid.n_axis), dtype=dtype))


def face_node_coordinates(grid: Grid, face: int):
    """(3, n, n) coordinates of the nodes of one face."""
    ax = grid.axis
    t1, t2 = FACE_TANGENTS[face]
    a, b = np.meshgrid(ax, ax, indexing="ij")
    coords = np.empty((3, grid.n_axis, grid.n_axis))
    coords[FACE_AXIS[face]] = float(FACE_SIGN[face])
    coords[t1] = a
    coords[t2] = b
    return coords


def trace_of_function(grid: Grid, fn) -> BoundaryTrace:
    """Sample a callable f(x, y, z) on all six faces."""
    vals = [fn(*face_node_coordinates(grid, f)) for f in range(6)]
    faces = np.stack([np.broadcast_to(v, (grid.n_axis,) * 2) for v in vals])
    return boundary_trace(grid, faces)


@dataclass(frozen=True)
class FacePartition:
    """Face-level sets induced by a unit direction xi and a margin eps.

    On the cube the outward normal is constant per face, so every node set
    of the continuum definitions collapses to a set of whole faces; the
    boolean masks index the fixed face order.  ``faces_f`` excludes the face
    opposing xi most strongly (the input region F keeps everything else);
    ``faces_g`` excludes the face aligned with xi (the output region G).
    """

    xi: np.ndarray
    eps: float
    gamma_plus: np.ndarray
    gamma_minus: np.ndarray
    gamma_minus_eps: np.ndarray
    faces_f: np.ndarray
    faces_g: np.ndarray


def _unit(vec, name="vector"):
    v = np.asarray(vec, dtype=float).reshape(3)
    nrm = np.linalg.norm(v)
    if not np.isfinite(nrm) or nrm < 1e-300:
        raise ValueError(f"{name} must be a nonzero 3-vector")
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"{name} must be a unit vector (|{name}| = {nrm:.6f})")
    return v / nrm


def face_partition(xi, eps: float) -> FacePartition:
    """Classify the six faces relative to the direction xi with margin eps."""
    xi = _unit(xi, "xi")
    eps = float(eps)
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    dots = FACE_NORMALS @ xi
    gamma_plus = dots > 0.0
    gamma_minus = dots < 0.0
    gamma_minus_eps = dots < -eps
    if not gamma_minus_eps.any():
        raise GeometryError(
            f"no face satisfies xi.nu < -eps for eps = {eps:.4f}; "
            f"strongest is xi.nu = {dots.min():.4f}"
        )
    tol = 1e-12
    faces_f = dots > dots.min() + tol
    faces_g = dots < dots.max() - tol
    return FacePartition(
        xi=xi,
        eps=eps,
        gamma_plus=gamma_plus,
        gamma_minus=gamma_minus,
        gamma_minus_eps=gamma_minus_eps,
        faces_f=faces_f,
        faces_g=faces_g,
    )


@dataclass(frozen=True)
class DirectionFrame:
    """Orthogonal matrix t_matrix with t_matrix @ xi = e1."""

    xi: np.ndarray
    t_matrix: np.ndarray


def direction_frame(xi) -> DirectionFrame:
    """Householder-based orthogonal map sending xi to e1."""
    xi = _unit(xi, "xi")
    e1 = np.array([1.0, 0.0, 0.0])
    w = xi - e1
    if np.linalg.norm(w) < 1e-12:
        t = np.eye(3)
    else:
        t = np.eye(3) - 2.0 * np.outer(w, w) / (w @ w)
    return DirectionFrame(xi=xi, t_matrix=t)


# -- traces -------------------------------------------------------------

def trace0(field: ScalarField, dirichlet: BoundaryTrace) -> BoundaryTrace:
    """Dirichlet trace of a solved field (validated passthrough of g)."""
    if dirichlet.grid.n_axis != field.grid.n_axis:
        raise ValueError("grid mismatch between field and boundary data")
    return dirichlet

def _inward_layers(values: np.ndarray, face: int):
    """First and second interior node layers adjacent to a face, as (n,n)."""
    n = values.shape[0]
    axis, sign = FACE_AXIS[face], FACE_SIGN[face]
    idx1 = n - 1 if sign > 0 else 0
    idx2 = n - 2 if sign > 0 else 1
    u1 = np.take(values, idx1, axis=axis)
    u2 = np.take(values, idx2, axis=axis)
    return u1, u2


def trace1(field: ScalarField, dirichlet: BoundaryTrace) -> BoundaryTrace:
    """Outward normal derivative by one-sided second-order differences."""
    h = field.grid.spacing
    out = np.empty_like(dirichlet.faces, dtype=np.result_type(field.values, dirichlet.faces))
    for f in range(6):
        u1, u2 = _inward_layers(field.values, f)
        out[f] = (3.0 * dirichlet.faces[f] - 4.0 * u1 + u2) / (2.0 * h)
    return boundary_trace(field.grid, out)


# -- cutoff -------------------------------------------------------------

def _quintic_ramp(t):
    """C^2 monotone ramp: 0 at t<=0, 1 at t>=1."""
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def boundary_cutoff(grid: Grid, partition: FacePartition) -> BoundaryTrace:
    """Smooth facewise cutoff: 1 where xi.nu < -eps, 0 where xi.nu >= -eps/2.

    On the cube the cutoff is constant per face (the normal is); the quintic
    ramp interpolates on faces with xi.nu in (-eps, -eps/2).
    """
    eps = partition.eps
    if eps <= 0.0:
        raise GeometryError("boundary cutoff needs eps > 0 (ramp width eps/2)")
    dots = FACE_NORMALS @ partition.xi
    # ramp variable: 0 at xi.nu = -eps/2, 1 at xi.nu = -eps
    t = (-dots - eps / 2.0) / (eps / 2.0)
    vals = _quintic_ramp(t)
    n = grid.n_axis
    faces = np.broadcast_to(vals[:, None, None], (6, n, n)).copy()
    return boundary_trace(grid, faces)


# -- facewise Sobolev norms ----------------------------------------------

_REGIONS = ("F", "G", "Gamma")


def _region_mask(region, partition: FacePartition | None):
    if isinstance(region, str):
        if region == "Gamma":
            return np.ones(6, dtype=bool)
        if region in ("F", "G"):
            if partition is None:
                raise ValueError(f"region {region!r} needs a FacePartition")
            return partition.faces_f if region == "F" else partition.faces_g
        raise ValueError(f"region must be one of {_REGIONS} or a 6-mask")
    mask = np.asarray(region, dtype=bool).reshape(6)
    return mask


def _face_mode_multiplier(grid: Grid, s: float) -> np.ndarray:
    # face modes sin(pi a (t+1)/2), a = 1..n; |k|^2 = (pi/2)^2 (a^2+b^2)
    a = np.arange(1, grid.n_axis + 1) * (np.pi / 2.0)
    k2 = a[:, None] ** 2 + a[None, :] ** 2
    return (1.0 + k2) ** s


def _dst2(face_values: np.ndarray) -> np.ndarray:
    return scipy.fft.dstn(face_values, type=1)


def _idst2(coeffs: np.ndarray) -> np.ndarray:
    return scipy.fft.idstn(coeffs, type=1)


def _dst_coeff_scale(grid: Grid) -> float:
    # normalizes DST-I output so sum |c|^2 = facewise nodal L^2 norm squared
    return grid.spacing / (2.0 * (grid.n_axis + 1))


def boundary_sobolev_norm(g: BoundaryTrace, s: float, region="Gamma",
                          partition: FacePartition | None = None) -> float:
    """Facewise H^s norm over a face region, s in {-1/2, 0, +1/2}.

    The trace must vanish on faces outside the region (enforced); for the
    norm to be equivalent to the true boundary norm the trace should also
    vanish in a 2-node margin near face edges (caller's responsibility).
    """
    if s not in (-0.5, 0.0, 0.5):
        raise ValueError(f"s must be one of -1/2, 0, +1/2, got {s}")
    mask = _region_mask(region, partition)
    scale = np.max(np.abs(g.faces)) if g.faces.size else 0.0
    for f in range(6):
        if not mask[f] and np.max(np.abs(g.faces[f])) > 1e-12 * max(scale, 1.0):
            raise SupportError(f"trace is supported outside the requested region (face {f})")
    mult = _face_mode_multiplier(g.grid, s)
    c = _dst_coeff_scale(g.grid)
    total = 0.0
    for f in range(6):
        if not mask[f]:
            continue
        coeffs = _dst2(g.faces[f]) * c
        total += float(np.sum(mult * np.abs(coeffs) ** 2))
    return float(np.sqrt(total))


def sobolev_multiplier_apply(g: BoundaryTrace, s: float,
                             face_mask=None) -> BoundaryTrace:
    """Apply the facewise spectral multiplier (1+|k|^2)^s (Riesz map R_s)."""
    mask = np.ones(6, dtype=bool) if face_mask is None else np.asarray(face_mask, dtype=bool)
    mult = _face_mode_multiplier(g.grid, s)
    out = np.zeros_like(g.faces)
    for f in range(6):
        if not mask[f]:
            continue
        out[f] = _idst2(mult * _dst2(g.faces[f]))
    return boundary_trace(g.grid, out)


def trace_dot(a: BoundaryTrace, b: BoundaryTrace, face_mask=None) -> complex:
    """Facewise quadrature pairing h^2 sum a * conj(b) over selected faces."""
    mask = np.ones(6, dtype=bool) if face_mask is None else np.asarray(face_mask, dtype=bool)
    h = a.grid.spacing
    total = 0.0 + 0.0j
    for f in range(6):
        if mask[f]:
            total += np.sum(a.faces[f] * np.conj(b.faces[f]))
    out = complex(total * h**2)
    if a.kind == "real" and b.kind == "real":
        return out.real
    return out


def trace_l2_norm(g: BoundaryTrace, face_mask=None) -> float:
    mask = np.ones(6, dtype=bool) if face_mask is None else np.asarray(face_mask, dtype=bool)
    h = g.grid.spacing
    total = sum(float(np.sum(np.abs(g.faces[f]) ** 2)) for f in range(6) if mask[f])
    return float(np.sqrt(h**2 * total))


def edge_margin_mask(grid: Grid, margin: int = 2) -> np.ndarray:
    """(n, n) mask that is False within ``margin`` nodes of a face's edges."""
    n = grid.n_axis
    m = np.zeros((n, n), dtype=bool)
    m[margin : n - margin, margin : n - margin] = True
    return m
