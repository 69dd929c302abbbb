"""Dirichlet-to-Neumann maps: full, difference, and partial variants, plus
operator-norm estimation in the mixed Sobolev topology (inputs measured in
the facewise H^{-1/2} norm and supported on the face region F, outputs in
the facewise H^{+1/2} norm on the region G).

The discrete DN map factors as  Lambda_q = T0 + T1 A^{-1} B  with
  * B  folding boundary data into the right-hand side (g / h^2 on the node
    layer adjacent to each face),
  * T1 the one-sided normal-derivative stencil acting on interior values,
  * T0 its boundary-sample part (3/(2h) on the same face node).
The exact transpose with respect to the facewise quadrature pairing is
  Lambda_q^T = T0 + B^T A^{-1} T1^T,
assembled matrix-free from the same solver; symmetry of A makes this exact
up to Krylov tolerance, which keeps the power iteration monotone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg
import scipy.linalg

from .boundary import (
    FACE_AXIS,
    FACE_SIGN,
    BoundaryTrace,
    FacePartition,
    boundary_trace,
    edge_margin_mask,
    sobolev_multiplier_apply,
    trace_dot,
    trace_l2_norm,
    zero_trace,
)
from .errors import SupportError
from .grid import Grid, ScalarField
from .solver import (
    SchrodingerOperator,
    _run_krylov,
    check_invertible,
    fold_dirichlet,
    trace1,
)

__all__ = [
    "PartialDnOperator",
    "OperatorNormReport",
    "dn_apply",
    "dn_transpose_apply",
    "dn_diff_apply",
    "operator_norm",
    "assemble_dense",
    "dense_operator_norm",
    "dn_symmetry_defect",
]

DN_RTOL = 1e-12


def _adjacent_layers(grid: Grid, face: int):
    n = grid.n_axis
    i1 = n - 1 if FACE_SIGN[face] > 0 else 0
    i2 = n - 2 if FACE_SIGN[face] > 0 else 1
    return i1, i2


def _take(values, face, idx):
    return np.take(values, idx, axis=FACE_AXIS[face])


class SchrodingerDn:
    """Matrix-free DN map g -> normal derivative of the (-Delta+q)-harmonic
    extension of g, with its exact discrete transpose."""

    def __init__(self, q: ScalarField, rtol: float = DN_RTOL):
        self.q = q
        self.grid = q.grid
        self.rtol = rtol
        self.op = SchrodingerOperator(q.grid, q)
        if not self.op.definitely_positive():
            check_invertible(q)  # raises on numerical singularity

    def _solve(self, b: np.ndarray) -> np.ndarray:
        x, _, _, _ = _run_krylov(self.op, b, self.rtol, 10_000)
        return x

    def harmonic_extension(self, g: BoundaryTrace) -> np.ndarray:
        return self._solve(np.asarray(fold_dirichlet(self.grid, g)))

    def apply(self, g: BoundaryTrace) -> BoundaryTrace:
        from .grid import scalar_field

        u = self.harmonic_extension(g)
        return trace1(scalar_field(self.grid, u), g)

    def transpose_apply(self, g: BoundaryTrace) -> BoundaryTrace:
        grid = self.grid
        h = grid.spacing
        n = grid.n_axis
        # T1^T: scatter face values into the two interior layers
        interior = np.zeros(grid.shape, dtype=g.faces.dtype)
        for f in range(6):
            i1, i2 = _adjacent_layers(grid, f)
            idx1 = [slice(None)] * 3
            idx1[FACE_AXIS[f]] = i1
            idx2 = [slice(None)] * 3
            idx2[FACE_AXIS[f]] = i2
            interior[tuple(idx1)] += (-2.0 / h**2) * g.faces[f]
            interior[tuple(idx2)] += (0.5 / h**2) * g.faces[f]
        v = self._solve(interior)
        faces = np.empty_like(g.faces)
        for f in range(6):
            i1, _ = _adjacent_layers(grid, f)
            faces[f] = _take(v, f, i1) / h + 1.5 / h * g.faces[f]
        return boundary_trace(grid, faces)


def dn_apply(q: ScalarField, g: BoundaryTrace, rtol: float = DN_RTOL) -> BoundaryTrace:
    """Normal derivative of the solution of (-Delta+q)u = 0, u = g."""
    return SchrodingerDn(q, rtol).apply(g)


def dn_transpose_apply(q: ScalarField, g: BoundaryTrace, rtol: float = DN_RTOL) -> BoundaryTrace:
    return SchrodingerDn(q, rtol).transpose_apply(g)


def _restrict(g: BoundaryTrace, mask) -> BoundaryTrace:
    faces = g.faces.copy()
    faces[~np.asarray(mask, dtype=bool)] = 0.0
    return boundary_trace(g.grid, faces)


def _check_support(g: BoundaryTrace, mask, what: str):
    scale = max(float(np.max(np.abs(g.faces))), 1.0)
    for f in range(6):
        if not mask[f] and np.max(np.abs(g.faces[f])) > 1e-12 * scale:
            raise SupportError(f"{what} must vanish outside its face region (face {f})")


@dataclass
class PartialDnOperator:
    """The measurement operator: difference of two DN maps, inputs supported
    on the face region F, outputs restricted to the face region G.

    ``dn_a`` / ``dn_b`` provide ``apply`` and ``transpose_apply``; use
    :meth:`from_potentials` for the Schrodinger pair.  Optional additive
    relative noise perturbs every measured output trace; ``noise_tag``
    values make the draws reproducible under any execution order.
    """

    dn_a: object
    dn_b: object
    partition: FacePartition
    grid: Grid
    noise_level: float = 0.0
    noise_seed: int = 0
    _noise_counter: int = field(default=0, repr=False)

    @classmethod
    def from_potentials(cls, q1: ScalarField, q2: ScalarField,
                        partition: FacePartition, rtol: float = DN_RTOL,
                        noise_level: float = 0.0, noise_seed: int = 0):
        return cls(dn_a=SchrodingerDn(q1, rtol), dn_b=SchrodingerDn(q2, rtol),
                   partition=partition, grid=q1.grid,
                   noise_level=noise_level, noise_seed=noise_seed)

    def _perturb(self, out: BoundaryTrace, noise_tag) -> BoundaryTrace:
        if self.noise_level <= 0.0:
            return out
        if noise_tag is None:
            noise_tag = self._noise_counter
            self._noise_counter += 1
        rng = np.random.default_rng([self.noise_seed, int(noise_tag)])
        noise = rng.standard_normal(out.faces.shape)
        if out.kind == "complex":
            noise = noise + 1j * rng.standard_normal(out.faces.shape)
        nt = boundary_trace(out.grid, noise)
        scale = self.noise_level * trace_l2_norm(out) / max(trace_l2_norm(nt), 1e-300)
        return boundary_trace(out.grid, out.faces + scale * nt.faces)

    def diff_apply(self, g: BoundaryTrace, noise_tag=None) -> BoundaryTrace:
        """(Lambda_a - Lambda_b) g restricted to G, for g supported in F."""
        _check_support(g, self.partition.faces_f, "input trace")
        from .grid import scalar_field

        ua = self.dn_a.harmonic_extension(g)
        ub = self.dn_b.harmonic_extension(g)
        w = scalar_field(self.grid, ua - ub)
        t1w = trace1(w, zero_trace(self.grid, dtype=g.faces.dtype))
        out = _restrict(t1w, self.partition.faces_g)
        return self._perturb(out, noise_tag)

    def diff_transpose_apply(self, g: BoundaryTrace) -> BoundaryTrace:
        _check_support(g, self.partition.faces_g, "transpose input trace")
        ta = self.dn_a.transpose_apply(g)
        tb = self.dn_b.transpose_apply(g)
        return _restrict(boundary_trace(self.grid, ta.faces - tb.faces),
                         self.partition.faces_f)


def dn_diff_apply(op: PartialDnOperator, g: BoundaryTrace) -> BoundaryTrace:
    return op.diff_apply(g)


@dataclass(frozen=True)
class OperatorNormReport:
    norm: float
    iterations: int
    rayleigh_history: tuple
    converged: bool


def _admissible_mask(grid: Grid, face_mask, margin: int = 2) -> np.ndarray:
    m = edge_margin_mask(grid, margin)
    full = np.zeros((6, grid.n_axis, grid.n_axis), dtype=bool)
    for f in range(6):
        if face_mask[f]:
            full[f] = m
    return full


def _gram_solve(grid: Grid, adm: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Invert the H^{-1/2} Gram matrix restricted to the admissible node set."""

    def matvec(x):
        t = np.zeros_like(adm, dtype=float)
        t[adm] = x
        out = sobolev_multiplier_apply(boundary_trace(grid, t), -0.5)
        return out.faces[adm]

    size = int(adm.sum())
    lin = LinearOperator((size, size), matvec=matvec, dtype=float)
    rhs = w[adm]
    x, info = cg(lin, rhs, rtol=1e-12, maxiter=2000)
    if info != 0:
        raise RuntimeError("restricted Gram solve failed to converge")
    out = np.zeros_like(adm, dtype=float)
    out[adm] = x
    return out


def operator_norm(op: PartialDnOperator, *, seed: int = 0, tol: float = 1e-5,
                  maxiter: int = 80, margin: int = 2,
                  faces_f=None, faces_g=None) -> OperatorNormReport:
    """Power iteration for the H^{-1/2}(F) -> H^{+1/2}(G) operator norm.

    Iterates g <- Gram^{-1} Ldag R_{+1/2} L g on the admissible set (faces of
    F, 2-node edge margin); the Rayleigh quotient sequence is non-decreasing
    because the exact discrete transpose makes the iteration matrix
    self-adjoint in the restricted H^{-1/2} inner product.
    """
    grid = op.grid
    f_mask = op.partition.faces_f if faces_f is None else np.asarray(faces_f, dtype=bool)
    g_mask = op.partition.faces_g if faces_g is None else np.asarray(faces_g, dtype=bool)
    adm = _admissible_mask(grid, f_mask, margin)
    rng = np.random.default_rng(seed)
    g = np.zeros(adm.shape)
    g[adm] = rng.standard_normal(int(adm.sum()))
    # smooth start: damp high face modes for a faster, deterministic ascent
    g = sobolev_multiplier_apply(boundary_trace(grid, g), -0.5).faces.copy()
    g[~adm] = 0.0

    history = []
    sigma = 0.0
    converged = False
    it = 0
    for it in range(1, maxiter + 1):
        gt = boundary_trace(grid, g)
        xg = sobolev_multiplier_apply(gt, -0.5)
        denom = float(np.real(trace_dot(gt, xg)))
        y = op.diff_apply(gt, noise_tag=10_000_000 + it if op.noise_level > 0 else None)
        ry = sobolev_multiplier_apply(y, 0.5, face_mask=g_mask)
        numer = float(np.real(trace_dot(y, ry)))
        sigma_new = np.sqrt(max(numer, 0.0) / denom)
        history.append(sigma_new)
        w = op.diff_transpose_apply(ry)
        wf = np.real(w.faces).copy()
        wf[~adm] = 0.0
        if not np.any(wf) or sigma_new == 0.0:
            sigma = 0.0
            converged = True
            break
        z = _gram_solve(grid, adm, wf)
        zn = np.sqrt(float(np.real(trace_dot(
            boundary_trace(grid, z), sobolev_multiplier_apply(boundary_trace(grid, z), -0.5)))))
        g = z / zn
        if len(history) >= 2 and abs(history[-1] - history[-2]) <= tol * max(history[-1], 1e-300):
            sigma = sigma_new
            converged = True
            break
        sigma = sigma_new
    return OperatorNormReport(norm=float(sigma), iterations=it,
                              rayleigh_history=tuple(history), converged=converged)


def assemble_dense(op: PartialDnOperator, margin: int = 2):
    """Column-by-column dense assembly of the partial operator over the
    admissible nodal basis of F (coarse grids only).

    Returns (matrix, admissible_mask): matrix maps admissible nodal values to
    stacked face values on G.
    """
    grid = op.grid
    adm = _admissible_mask(grid, op.partition.faces_f, margin)
    idx = np.argwhere(adm)
    cols = []
    for flat in idx:
        e = np.zeros(adm.shape)
        e[tuple(flat)] = 1.0
        out = op.diff_apply(boundary_trace(grid, e))
        cols.append(np.real(out.faces).ravel())
    return np.array(cols).T, adm


def dense_operator_norm(op: PartialDnOperator, margin: int = 2) -> float:
    """Reference operator norm by dense generalized eigensolve (small grids)."""
    grid = op.grid
    mat, adm = assemble_dense(op, margin)
    size = int(adm.sum())

    def gram(s, mask_faces):
        cols = []
        for j in range(size):
            e = np.zeros(adm.shape)
            e[adm] = np.eye(size)[j]
            r = sobolev_multiplier_apply(boundary_trace(grid, e), s, face_mask=mask_faces)
            cols.append(r.faces[adm])
        return np.array(cols).T

    h2 = grid.spacing**2
    x_gram = h2 * gram(-0.5, np.ones(6, dtype=bool))
    x_gram = 0.5 * (x_gram + x_gram.T)
    # output Gram: h^2 <L e_i, R_{1/2} L e_j> over G for the assembled columns
    n = grid.n_axis
    mat_faces = mat.reshape(6 * n * n, size)
    y_basis = []
    for j in range(size):
        yj = boundary_trace(grid, mat_faces[:, j].reshape(6, n, n))
        ryj = sobolev_multiplier_apply(yj, 0.5, face_mask=op.partition.faces_g)
        y_basis.append(ryj.faces.ravel())
    a_mat = h2 * (mat_faces.T @ np.array(y_basis).T)
    a_mat = 0.5 * (a_mat + a_mat.T)
    vals = scipy.linalg.eigh(a_mat, x_gram, eigvals_only=True)
    return float(np.sqrt(max(vals.max(), 0.0)))


def dn_symmetry_defect(q: ScalarField, n_modes: int = 3, rtol: float = DN_RTOL) -> float:
    """Max over low face-mode pairs (g,h) of the normalized symmetry defect
    |<Lambda g, h> - <g, Lambda h>| / (|g| |h|) in the facewise quadrature
    pairing.  Decays under refinement for real potentials."""
    grid = q.grid
    n = grid.n_axis
    ax = grid.axis
    dn = SchrodingerDn(q, rtol)
    traces = []
    for f, a, b in [(0, 1, 1), (1, 1, 2), (2, 2, 1), (4, 1, 1)][: max(n_modes, 2)]:
        faces = np.zeros((6, n, n))
        faces[f] = np.outer(np.sin(np.pi * a * (ax + 1) / 2), np.sin(np.pi * b * (ax + 1) / 2))
        traces.append(boundary_trace(grid, faces))
    images = [dn.apply(t) for t in traces]
    worst = 0.0
    for i in range(len(traces)):
        for j in range(len(traces)):
            lhs = trace_dot(images[i], traces[j])
            rhs = trace_dot(traces[i], images[j])
            denom = trace_l2_norm(traces[i]) * trace_l2_norm(traces[j])
            worst = max(worst, abs(lhs - rhs) / denom)
    return float(worst)
