"""Screen problems (sound-soft/hard) and aperture problems, fields, far fields.

The sound-soft screen reduces to the single-layer equation -S_k phi = g_D for
the normal-derivative jump; the sound-hard screen to T_k psi = g_N for the
field jump.  Aperture problems reuse the same equations with halved data and
half-space sign bookkeeping at field-evaluation time.  Scattered fields are
evaluated by per-element Gauss quadrature of the layer-potential kernels;
far-field patterns come out in closed form through the basis transforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.special import hankel1

from .geometry import Mesh, Screen, build_mesh, dist_to_screen
from .operators import (GalerkinSystem, assemble_hypersingular,
                        assemble_single_layer)
from .sobolev import Density, WaveContext, rhs_functional
from .spectral import mesh_dof_factors


class NumericalError(RuntimeError):
    """Numerical failure (singular system, quadrature breakdown)."""


@dataclass
class TraceData:
    """Boundary data sampler on the screen plane.

    kind: "plane_wave" (superposition), "point_source", or "custom";
    role:  dirichlet | neumann | aperture_h | aperture_i.
    For plane waves ``values`` are the trace of sum a_j e^{i k x . d_j} or of
    its x_n-derivative, times ``scale``.
    """

    kind: str
    role: str
    k: float
    amplitudes: np.ndarray | None = None
    directions: np.ndarray | None = None
    source: np.ndarray | None = None
    sampler: object = None
    derivative: bool = False
    scale: complex = 1.0

    def __post_init__(self):
        if self.kind == "plane_wave":
            self.directions = np.atleast_2d(np.asarray(self.directions, float))
            norms = np.linalg.norm(self.directions, axis=1)
            if not np.allclose(norms, 1.0, atol=1e-12):
                raise ValueError("plane-wave directions must be unit vectors")
            if self.amplitudes is None:
                self.amplitudes = np.ones(self.directions.shape[0], dtype=complex)
            self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        elif self.kind == "point_source":
            self.source = np.asarray(self.source, dtype=float)
        elif self.kind != "custom":
            raise ValueError(f"unknown trace kind {self.kind!r}")
        if self.role.startswith("aperture"):
            if self.kind == "plane_wave" and np.any(self.directions[:, -1] >= 0):
                raise ValueError("aperture incidence must come from above (d_n < 0)")

    def scaled(self, factor: complex) -> "TraceData":
        out = TraceData(self.kind, self.role, self.k, self.amplitudes,
                        self.directions, self.source, self.sampler,
                        self.derivative, self.scale * factor)
        return out

    def quad_scale(self, mesh: Mesh | None = None) -> float | None:
        """Smallest length scale of the data beyond the k-oscillation."""
        if self.kind == "point_source":
            if mesh is not None:
                d = dist_to_screen(self.source, mesh.screen)
                return max(d, mesh.h / 16.0) / 2.0
            return max(abs(float(self.source[-1])), 1e-6) / 2.0
        return None

    def sample(self, points: np.ndarray) -> np.ndarray:
        """Trace values at in-plane points, shape (m, d) -> (m,)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "plane_wave":
            d_t = self.directions[:, :-1]
            phases = np.exp(1j * self.k * (pts @ d_t.T))
            if self.derivative:
                amp = self.amplitudes * (1j * self.k * self.directions[:, -1])
            else:
                amp = self.amplitudes
            return self.scale * phases @ amp
        if self.kind == "point_source":
            d = pts.shape[1]
            diff = pts - self.source[:d]
            rr = np.sqrt(np.sum(diff ** 2, axis=1) + self.source[d] ** 2)
            if d == 1:
                vals = 0.25j * hankel1(0, self.k * rr)
            else:
                vals = np.exp(1j * self.k * rr) / (4.0 * np.pi * rr)
            return self.scale * vals
        return self.scale * np.asarray(self.sampler(pts), dtype=complex)


def incident_dirichlet(ctx: WaveContext, directions, amplitudes=None) -> TraceData:
    """g_D = -u^i|_Gamma for a plane-wave superposition."""
    return TraceData("plane_wave", "dirichlet", ctx.k, amplitudes, directions,
                     scale=-1.0)


def incident_neumann(ctx: WaveContext, directions, amplitudes=None) -> TraceData:
    """g_N = -du^i/dn|_Gamma for a plane-wave superposition."""
    return TraceData("plane_wave", "neumann", ctx.k, amplitudes, directions,
                     derivative=True, scale=-1.0)


def point_source_dirichlet(ctx: WaveContext, source) -> TraceData:
    """g_D = -Phi(x_s, .)|_Gamma."""
    return TraceData("point_source", "dirichlet", ctx.k, source=source, scale=-1.0)


def aperture_h_data(ctx: WaveContext, direction, amplitude=1.0) -> TraceData:
    """g_H = -2 du^i/dn|_Gamma, incidence from the upper half-space."""
    return TraceData("plane_wave", "aperture_h", ctx.k, [amplitude], [direction],
                     derivative=True, scale=-2.0)


def aperture_i_data(ctx: WaveContext, direction, amplitude=1.0) -> TraceData:
    """g_I = -2 u^i|_Gamma, incidence from the upper half-space."""
    return TraceData("plane_wave", "aperture_i", ctx.k, [amplitude], [direction],
                     scale=-2.0)


@dataclass
class Solution:
    """Density solving one of the four problems, plus solve diagnostics."""

    density: Density
    problem: str                 # "S" | "T" | "aperture_H" | "aperture_I"
    ctx: WaveContext
    system: GalerkinSystem
    rhs: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def _solve_dense(system: GalerkinSystem, rhs: np.ndarray) -> np.ndarray:
    try:
        lu, piv = sla.lu_factor(system.matrix)
    except (sla.LinAlgError, ValueError) as exc:
        raise NumericalError(f"LU factorization failed: {exc}") from exc
    if not np.all(np.isfinite(lu)):
        raise NumericalError("singular Galerkin system: assembly defect "
                             "(coercivity guarantees invertibility)")
    c = sla.lu_solve((lu, piv), rhs)
    res = np.linalg.norm(system.matrix @ c - rhs)
    scale = max(np.linalg.norm(rhs), 1e-300)
    if not np.all(np.isfinite(c)) or res > 1e-8 * scale + 1e-13:
        raise NumericalError("singular Galerkin system: assembly defect "
                             "(coercivity guarantees invertibility)")
    return c


def _check_point_source(g: TraceData, screen: Screen) -> None:
    if g.kind == "point_source":
        if dist_to_screen(g.source, screen) <= 0.0:
            raise ValueError("point source lies on the screen closure")


def solve_problem_S(screen: Screen, ctx: WaveContext, g_D: TraceData,
                    h: float, tol: float = 1e-10,
                    system: GalerkinSystem | None = None) -> Solution:
    """Galerkin solution of -S_k phi = g_D; phi approximates [du/dn]."""
    if g_D.role not in ("dirichlet", "aperture_i"):
        raise ValueError("solve_problem_S expects Dirichlet-role data")
    _check_point_source(g_D, screen)
    mesh = system.mesh if system is not None else build_mesh(screen, h, "P0")
    sysA = system if system is not None else assemble_single_layer(mesh, ctx, tol)
    f = rhs_functional(g_D, mesh, ctx, tol)
    c = _solve_dense(sysA, -f)
    sol = Solution(Density(mesh, c), "S", ctx, sysA, f)
    sol.diagnostics["algebraic_residual"] = float(
        np.linalg.norm(sysA.matrix @ c + f))
    return sol


def solve_problem_T(screen: Screen, ctx: WaveContext, g_N: TraceData,
                    h: float, tol: float = 1e-10,
                    system: GalerkinSystem | None = None) -> Solution:
    """Galerkin solution of T_k psi = g_N; psi approximates [u]."""
    if g_N.role not in ("neumann", "aperture_h"):
        raise ValueError("solve_problem_T expects Neumann-role data")
    _check_point_source(g_N, screen)
    mesh = system.mesh if system is not None else build_mesh(screen, h, "P1")
    sysB = system if system is not None else assemble_hypersingular(mesh, ctx, tol)
    f = rhs_functional(g_N, mesh, ctx, tol)
    c = _solve_dense(sysB, f)
    sol = Solution(Density(mesh, c), "T", ctx, sysB, f)
    sol.diagnostics["algebraic_residual"] = float(
        np.linalg.norm(sysB.matrix @ c - f))
    return sol


def solve_aperture_H(screen: Screen, ctx: WaveContext, g_H: TraceData,
                     h: float, tol: float = 1e-10) -> Solution:
    """Sound-soft aperture: {u} solves T_k psi = g_H / 2."""
    sol = solve_problem_T(screen, ctx, g_H.scaled(0.5), h, tol)
    sol.problem = "aperture_H"
    return sol


def solve_aperture_I(screen: Screen, ctx: WaveContext, g_I: TraceData,
                     h: float, tol: float = 1e-10) -> Solution:
    """Sound-hard aperture: {du/dn} solves -S_k phi = g_I / 2."""
    sol = solve_problem_S(screen, ctx, g_I.scaled(0.5), h, tol)
    sol.problem = "aperture_I"
    return sol


# ---------------------------------------------------------------------------
# potentials, fields, far fields
# ---------------------------------------------------------------------------
def _element_rule(mesh: Mesh, k: float):
    n_g = int(min(24, max(8, np.ceil(k * mesh.h) + 6)))
    x0, w0 = np.polynomial.legendre.leggauss(n_g)
    x0 = 0.5 * (x0 + 1.0) * mesh.h
    w0 = 0.5 * w0 * mesh.h
    if mesh.dim_screen == 1:
        return x0[:, None], w0
    gx, gy = np.meshgrid(x0, x0, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()]), np.outer(w0, w0).ravel()


def _density_quad_points(sol: Solution):
    """All element quadrature points with density values and weights."""
    mesh = sol.density.mesh
    offs, ww = _element_rule(mesh, sol.ctx.k)
    pts_all, val_all, w_all = [], [], []
    c = sol.density.coefficients
    for e in range(mesh.n_elements):
        origin = mesh.element_center[e] - mesh.h / 2.0
        pts = origin + offs
        if mesh.basis_kind == "P0":
            vals = np.full(pts.shape[0], c[e])
        else:
            vals = np.zeros(pts.shape[0], dtype=complex)
            for j in range(mesh.n_dofs):
                if np.all(np.abs(mesh.dof_points[j] - mesh.element_center[e])
                          <= mesh.h * 0.5 + 1e-12):
                    hat = np.prod(1.0 - np.abs(pts - mesh.dof_points[j]) / mesh.h,
                                  axis=1)
                    vals += c[j] * hat
        pts_all.append(pts)
        val_all.append(vals)
        w_all.append(ww)
    return (np.concatenate(pts_all), np.concatenate(val_all),
            np.concatenate(w_all))


def eval_field(sol: Solution, points) -> np.ndarray:
    """Scattered/diffracted field at points of R^n (off the screen closure).

    Problem S: u = -Scal_k phi;  problem T: u = Dcal_k psi; aperture problems
    apply the half-space signs u = -sign(x_n) Scal phi (I) and
    u = sign(x_n) Dcal psi (H).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    mesh = sol.density.mesh
    screen = mesh.screen
    if pts.shape[1] != screen.dim_ambient:
        raise ValueError("evaluation points have wrong ambient dimension")
    floor = 0.5 * mesh.h
    dists = np.array([dist_to_screen(p, screen) for p in pts])
    if np.any(dists < floor):
        bad = np.nonzero(dists < floor)[0]
        raise ValueError(
            f"points {bad.tolist()} closer than the 0.5 h floor to the screen")
    if sol.problem.startswith("aperture") and np.any(pts[:, -1] == 0.0):
        raise ValueError("aperture fields are two-sided: evaluation points "
                         "must leave the screen plane")

    qp, qv, qw = _density_quad_points(sol)
    k = sol.ctx.k
    xt = pts[:, :-1]
    xn = pts[:, -1]
    diff = xt[:, None, :] - qp[None, :, :]
    r = np.sqrt(np.sum(diff ** 2, axis=2) + xn[:, None] ** 2)
    if sol.problem in ("S", "aperture_I"):
        if screen.dim_ambient == 2:
            kern = 0.25j * hankel1(0, k * r)
        else:
            kern = np.exp(1j * k * r) / (4.0 * np.pi * r)
        u = -(kern * qw[None, :]) @ qv
        if sol.problem == "aperture_I":
            u = u * np.sign(xn)
    else:
        if screen.dim_ambient == 2:
            kern = 0.25j * k * hankel1(1, k * r) * xn[:, None] / r
        else:
            kern = xn[:, None] * np.exp(1j * k * r) * (1.0 - 1j * k * r) \
                / (4.0 * np.pi * r ** 3)
        u = (kern * qw[None, :]) @ qv
        if sol.problem == "aperture_H":
            u = u * np.sign(xn)
    return u if u.shape[0] > 1 else u[0]


def far_field(sol: Solution, directions) -> np.ndarray:
    """Far-field pattern u(R xhat) ~ e^{ikR} R^{-(n-1)/2} u_inf(xhat).

    Closed form through the basis transforms: the surface integrals
    int e^{-ik xhat.y} basis_j(y) ds equal (2 pi)^{(n-1)/2} fhat_j(k xhat~).
    """
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    if not np.allclose(np.linalg.norm(dirs, axis=1), 1.0, atol=1e-10):
        raise ValueError("far-field directions must be unit vectors")
    mesh = sol.density.mesh
    k = sol.ctx.k
    n = mesh.screen.dim_ambient
    factors = mesh_dof_factors(mesh)
    c = sol.density.coefficients
    xi = k * dirs[:, :-1]
    tw = (2.0 * np.pi) ** ((n - 1) / 2.0)
    surf = np.zeros(dirs.shape[0], dtype=complex)
    for j, fac in enumerate(factors):
        if n == 2:
            vals = fac[0].value(xi[:, 0])
        else:
            vals = fac[0].value(xi[:, 0]) * fac[1].value(xi[:, 1])
        surf += c[j] * vals
    surf *= tw

    pref = 1.0 / (4.0 * np.pi) if n == 3 else np.exp(1j * np.pi / 4.0) \
        / np.sqrt(8.0 * np.pi * k)
    if sol.problem in ("S", "aperture_I"):
        out = -pref * surf
        if sol.problem == "aperture_I":
            out = out * (-np.sign(dirs[:, -1]))
    else:
        out = pref * (-1j * k * dirs[:, -1]) * surf
        if sol.problem == "aperture_H":
            out = out * np.sign(dirs[:, -1])
    return out


def aperture_total_field(sol: Solution, direction, points,
                         amplitude: complex = 1.0) -> np.ndarray:
    """Total field for aperture scattering of one incident plane wave.

    Upper half-space: diffracted + incident + reflected wave, the latter with
    sign -1 for the sound-soft configuration (problem H) and +1 for the
    sound-hard one (problem I); lower half-space: diffracted field only.
    """
    if sol.problem not in ("aperture_H", "aperture_I"):
        raise ValueError("total-field assembly applies to aperture solutions")
    d = np.asarray(direction, dtype=float)
    if d[-1] >= 0:
        raise ValueError("aperture incidence must come from above (d_n < 0)")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    k = sol.ctx.k
    u = np.atleast_1d(eval_field(sol, pts))
    c_refl = -1.0 if sol.problem == "aperture_H" else 1.0
    d_refl = d.copy()
    d_refl[-1] *= -1.0
    upper = pts[:, -1] > 0
    ui = amplitude * np.exp(1j * k * (pts @ d))
    ur = c_refl * amplitude * np.exp(1j * k * (pts @ d_refl))
    total = u.astype(complex)
    total[upper] += ui[upper] + ur[upper]
    return total if total.size > 1 else total[0]
