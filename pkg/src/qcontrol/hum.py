"""Hilbert Uniqueness Method for ``i u_t + Δu = φ h``.

Conventions (checked in the test suite):

* adjoint datum ``v0`` lives in H⁻¹ and flows freely, ``v(t) = E(t) v0``;
* the control is ``h(t) = Λ⁻¹(φ v(t))`` and enters the state equation as ``φ h``;
* ``Γ v0 = -i u(0)`` where ``u`` solves the controlled equation backward from
  ``u(T) = 0``;
* pairings are real parts of the L² pivot pairing, so that
  ``<v0, Γ v0> = ∫ ||φ v(t)||²_{H⁻¹} dt``; with the trapezoid stepper this
  holds exactly at the discrete level, not just up to O(dt²).

The null control for ``u(0) = u0`` is read off the solution of ``Γ v0 = -i u0``,
obtained by conjugate gradients in the H⁻¹ Riesz geometry.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import CGStagnation, ConvergenceError, GridMismatch, ObservabilityViolation
from .geometry import CutoffPhi
from .propagators import (
    TimeGrid,
    Trajectory,
    forced_linear_solve,
    free_flow_trajectory,
)
from .spectral import (
    Field,
    Grid,
    fft,
    hs_inner,
    ifft,
    lambda_apply,
    multiply,
    sobolev_norm,
    sobolev_norms,
    spectral_sum,
)


@dataclass(frozen=True)
class HumProblem:
    grid: Grid
    phi: CutoffPhi
    horizon: float
    nt: int
    target_initial: Field

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.nt < 8:
            raise ValueError(f"need at least 8 time steps, got {self.nt}")
        if self.phi.grid != self.grid or self.target_initial.grid != self.grid:
            raise GridMismatch("problem data live on different grids")

    @property
    def times(self) -> TimeGrid:
        return TimeGrid(0.0, self.horizon, self.nt)

    def with_target(self, u0: Field) -> "HumProblem":
        return HumProblem(self.grid, self.phi, self.horizon, self.nt, u0)

    def with_phi(self, phi: CutoffPhi) -> "HumProblem":
        return HumProblem(self.grid, phi, self.horizon, self.nt, self.target_initial)


def adjoint_flow(v0: Field, times: TimeGrid) -> Trajectory:
    return free_flow_trajectory(v0, times)


def synthesize_control(v0: Field, problem: HumProblem) -> Trajectory:
    """``h(t) = Λ⁻¹(φ v(t))`` on the time nodes."""
    grid = problem.grid
    v = adjoint_flow(v0, problem.times)
    h = multiply(problem.phi.values * v.frames, 1.0 / (1.0 + grid.k_squared), grid)
    return Trajectory(grid, problem.times, h)


def control_source(h: Trajectory, phi: CutoffPhi) -> Trajectory:
    """The forcing ``φ h`` actually applied to the state equation."""
    return h.map_frames(lambda fr: phi.values * fr)


def gamma_apply(v0: Field, problem: HumProblem) -> Field:
    h = synthesize_control(v0, problem)
    u = forced_linear_solve(
        Field.zeros(problem.grid), control_source(h, problem.phi), problem.times, "backward"
    )
    return -1j * u.initial


def observed_energy(v0: Field, problem: HumProblem, s: float = -1) -> np.ndarray:
    """``||φ v(t_m)||²_{H^s}`` at every node."""
    grid = problem.grid
    v = adjoint_flow(v0, problem.times)
    obs = fft(problem.phi.values * v.frames, grid)
    return spectral_sum(obs, obs, grid, s)


def gramian_form(v0: Field, w0: Field, problem: HumProblem) -> float:
    """``a(v0, w0) = ∫ (φ v, φ w)_{H⁻¹} dt`` by the trapezoid rule."""
    grid = problem.grid
    if v0.grid != grid or w0.grid != grid:
        raise GridMismatch("data and problem live on different grids")
    times = problem.times
    phi = problem.phi.values
    pv = fft(phi * adjoint_flow(v0, times).frames, grid)
    pw = fft(phi * adjoint_flow(w0, times).frames, grid)
    return float(np.sum(times.trapezoid_weights() * spectral_sum(pv, pw, grid, -1)))


# -- conjugate gradients ------------------------------------------------------


@dataclass
class CGResult:
    solution: Field
    iterations: int
    residual: float
    residual_history: list
    ritz_min: float
    ritz_max: float
    iterates: Optional[list] = None


def _ritz_extremes(alphas, betas):
    """Extreme eigenvalues of the Lanczos matrix hidden in the CG coefficients."""
    k = len(alphas)
    if k == 0:
        return float("nan"), float("nan")
    diag = np.empty(k)
    off = np.empty(max(k - 1, 0))
    for j in range(k):
        diag[j] = 1.0 / alphas[j] + (betas[j - 1] / alphas[j - 1] if j > 0 else 0.0)
        if j < k - 1:
            off[j] = np.sqrt(betas[j]) / alphas[j]
    t = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    ev = np.linalg.eigvalsh(t)
    return float(ev[0]), float(ev[-1])


def solve_gramian(
    rhs: Field,
    problem: HumProblem,
    tol: float = 1e-8,
    max_iter: int = 400,
    x0: Optional[Field] = None,
    keep_iterates: bool = False,
) -> CGResult:
    """Solve ``Γ x = rhs`` for an H¹ right-hand side.

    CG runs on ``ΛΓ`` with H⁻¹ inner products: residuals ``r`` (H¹ objects) are
    pulled back by ``Λ`` to give search directions, and the stopping test is
    ``||r||_{H¹} < tol ||rhs||_{H¹}``.
    """
    grid = problem.grid
    b_norm = sobolev_norm(rhs, 1)
    x = Field.zeros(grid) if x0 is None else x0
    iterates = [x] if keep_iterates else None
    if b_norm == 0 and x0 is None:
        return CGResult(x, 0, 0.0, [0.0], float("nan"), float("nan"), iterates)
    r = rhs - gamma_apply(x, problem) if x0 is not None else rhs
    scale = b_norm if b_norm > 0 else 1.0
    rr = hs_inner(r, r, 1)
    history = [np.sqrt(rr) / scale]
    alphas, betas = [], []
    p = lambda_apply(r)
    for it in range(1, max_iter + 1):
        if history[-1] < tol:
            lo, hi = _ritz_extremes(alphas, betas)
            return CGResult(x, it - 1, history[-1], history, lo, hi, iterates)
        gp = gamma_apply(p, problem)
        curvature = hs_inner(p, gp, 0)
        if curvature <= 0:
            raise ConvergenceError(f"Gramian lost positivity (curvature {curvature:.3e})")
        alpha = rr / curvature
        x = x + alpha * p
        r = r - alpha * gp
        rr_new = hs_inner(r, r, 1)
        beta = rr_new / rr
        alphas.append(alpha)
        betas.append(beta)
        rr = rr_new
        history.append(np.sqrt(rr) / scale)
        if keep_iterates:
            iterates.append(x)
        p = lambda_apply(r) + beta * p
    lo, hi = _ritz_extremes(alphas, betas)
    if history[-1] < tol:
        return CGResult(x, max_iter, history[-1], history, lo, hi, iterates)
    raise CGStagnation(
        f"CG stagnated after {max_iter} iterations at relative residual {history[-1]:.3e}; "
        f"smallest Ritz value {lo:.3e}",
        ritz_min=lo,
    )


@dataclass
class HumSolution:
    minimizer: Field
    control: Trajectory
    cg_iterations: int
    cg_residual: float
    terminal_residual: float
    target_norm: float
    residual_history: list = field(default_factory=list)
    ritz_min: float = float("nan")
    scheme_residual: float = float("nan")
    state: Optional[Trajectory] = None
    iterates: Optional[list] = None

    @property
    def relative_terminal_residual(self) -> float:
        return self.terminal_residual / self.target_norm if self.target_norm else 0.0

    def to_dict(self) -> dict:
        return {
            "cg_iterations": self.cg_iterations,
            "cg_residual": self.cg_residual,
            "terminal_residual": self.terminal_residual,
            "target_norm_hm1": self.target_norm,
            "relative_terminal_residual": self.relative_terminal_residual,
            "ritz_min": self.ritz_min,
            "scheme_residual": self.scheme_residual,
            "minimizer_norm_hm1": sobolev_norm(self.minimizer, -1),
        }


def interpolate_control(h: Trajectory, factor: int) -> Trajectory:
    """Piecewise-linear refinement of a nodal control onto a finer time grid."""
    times = h.times.refine(factor)
    frames = np.empty((times.nt + 1,) + h.grid.shape, dtype=complex)
    frames[::factor] = h.frames
    for j in range(1, factor):
        w = j / factor
        frames[j::factor] = (1 - w) * h.frames[:-1] + w * h.frames[1:]
    return Trajectory(h.grid, times, frames)


def verify_control(u0: Field, h: Trajectory, phi: CutoffPhi) -> Trajectory:
    return forced_linear_solve(u0, control_source(h, phi), h.times)


def hum_solve(
    problem: HumProblem,
    tol: float = 1e-8,
    max_iter: int = 400,
    keep_iterates: bool = False,
) -> HumSolution:
    """Null control of the linear equation for ``u(0) = problem.target_initial``.

    After CG, the synthesized control is replayed forward from ``u0`` on the
    same time grid (``terminal_residual``) and, as a discretization check, on a
    grid twice as fine with the control interpolated linearly
    (``scheme_residual``).
    """
    u0 = problem.target_initial
    cg = solve_gramian(-1j * u0, problem, tol, max_iter, keep_iterates=keep_iterates)
    h = synthesize_control(cg.solution, problem)
    state = verify_control(u0, h, problem.phi)
    fine = verify_control(u0, interpolate_control(h, 2), problem.phi)
    return HumSolution(
        minimizer=cg.solution,
        control=h,
        cg_iterations=cg.iterations,
        cg_residual=cg.residual,
        terminal_residual=sobolev_norm(state.final, -1),
        target_norm=sobolev_norm(u0, -1),
        residual_history=cg.residual_history,
        ritz_min=cg.ritz_min,
        scheme_residual=sobolev_norm(fine.final, -1),
        state=state,
        iterates=cg.iterates,
    )


def duality_sides(solution: HumSolution, problem: HumProblem) -> tuple[float, float]:
    """Both sides of ``<v0, -i u0> = ∫ <φ v, h> dt``.

    The left side is a spectral pairing; the right side is evaluated as a
    physical-space Riemann sum, so the two share no code beyond the free flow.
    """
    grid = problem.grid
    v0 = solution.minimizer
    lhs = hs_inner(v0, -1j * problem.target_initial, 0)
    v = adjoint_flow(v0, problem.times).frames
    h = solution.control.frames
    per_node = np.real(np.sum(problem.phi.values * v * h.conj(), axis=grid.axes)) * grid.cell_volume
    rhs = float(np.sum(problem.times.trapezoid_weights() * per_node))
    return float(lhs), rhs


# -- observability -----------------------------------------------------------


def worker_count() -> int:
    """Thread cap from ``QCONTROL_THREADS`` (default 1)."""
    raw = os.environ.get("QCONTROL_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _columns(func, size: int) -> np.ndarray:
    def column(j):
        e = np.zeros(size, dtype=complex)
        e[j] = 1.0
        return func(e)

    workers = worker_count()
    if workers == 1:
        cols = [column(j) for j in range(size)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cols = list(pool.map(column, range(size)))
    return np.stack(cols, axis=1)


def assemble_gramian(problem: HumProblem) -> np.ndarray:
    """Dense matrix of Γ in the physical point basis (row-major flattening)."""
    grid = problem.grid
    return _columns(lambda e: gamma_apply(Field(grid, e.reshape(grid.shape)), problem).flat(), grid.size)


def _symmetrized_apply(y: np.ndarray, problem: HumProblem) -> np.ndarray:
    """``S^{1/2} F Γ F⁻¹ S^{1/2}`` with ``S = 1 + |k|²``: Hermitian, same spectrum as ``ΛΓ``."""
    grid = problem.grid
    root = np.sqrt(1.0 + grid.k_squared)
    v = Field(grid, ifft(root * y.reshape(grid.shape), grid))
    return (root * fft(gamma_apply(v, problem).values, grid)).reshape(-1)


def _mode_from_spectral(y: np.ndarray, grid: Grid) -> Field:
    root = np.sqrt(1.0 + grid.k_squared)
    v = Field(grid, ifft(root * y.reshape(grid.shape), grid))
    return v / sobolev_norm(v, -1)


def symmetrized_gramian(problem: HumProblem) -> np.ndarray:
    h = _columns(lambda e: _symmetrized_apply(e, problem), problem.grid.size)
    return 0.5 * (h + h.conj().T)


def lanczos_smallest(matvec, dim: int, rng: np.random.Generator, tol: float = 1e-10, max_iter=None):
    """Smallest eigenpair of a Hermitian operator by Lanczos with full reorthogonalization."""
    max_iter = dim if max_iter is None else min(max_iter, dim)
    q = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    q /= np.linalg.norm(q)
    basis = [q]
    alphas, betas = [], []
    theta, vec = np.nan, None
    for k in range(max_iter):
        w = matvec(basis[-1])
        alpha = float(np.real(np.vdot(basis[-1], w)))
        alphas.append(alpha)
        q_mat = np.stack(basis, axis=1)
        for _ in range(2):
            w = w - q_mat @ (q_mat.conj().T @ w)
        beta = float(np.linalg.norm(w))
        t = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
        ev, evec = np.linalg.eigh(t)
        theta, s = ev[0], evec[:, 0]
        if beta * abs(s[-1]) <= tol * max(abs(theta), np.finfo(float).tiny) or k + 1 == dim:
            vec = q_mat @ s
            return theta, vec, k + 1
        betas.append(beta)
        basis.append(w / beta)
    raise ConvergenceError(f"Lanczos did not converge in {max_iter} iterations (estimate {theta:.3e})")


class ObservabilityEstimate(NamedTuple):
    c_obs: float
    worst_mode: Field
    iterations: int
    method: str


DENSE_LIMIT = 64


def observability_constant(
    problem: HumProblem,
    method: str = "auto",
    tol: float = 1e-10,
    seed: int = 0,
    max_iter: Optional[int] = None,
) -> ObservabilityEstimate:
    """Largest ``c`` with ``a(v, v) >= c ||v||²_{H⁻¹}``, and the datum attaining it."""
    grid = problem.grid
    if method == "auto":
        method = "dense" if grid.size <= DENSE_LIMIT else "lanczos"
    if method == "dense":
        ev, evec = np.linalg.eigh(symmetrized_gramian(problem))
        return ObservabilityEstimate(float(ev[0]), _mode_from_spectral(evec[:, 0], grid), 0, "dense")
    if method == "lanczos":
        rng = np.random.default_rng(seed)
        theta, vec, iters = lanczos_smallest(
            lambda y: _symmetrized_apply(y, problem), grid.size, rng, tol, max_iter
        )
        return ObservabilityEstimate(float(theta), _mode_from_spectral(vec, grid), iters, "lanczos")
    raise ValueError(f"unknown method {method!r}")


def h1_observability_ratio(w0: Field, problem: HumProblem) -> float:
    """``||w0||²_{H¹} / ∫ ||φ w(t)||²_{H¹} dt`` for the free flow ``w`` of ``w0``."""
    denom = float(np.sum(problem.times.trapezoid_weights() * observed_energy(w0, problem, 1)))
    numer = sobolev_norm(w0, 1) ** 2
    if denom <= np.finfo(float).tiny or not np.isfinite(denom):
        raise ObservabilityViolation("observed H¹ energy vanishes; ratio undefined")
    return numer / denom


def observed_norm_series(traj: Trajectory, s: float) -> np.ndarray:
    return sobolev_norms(traj.frames, traj.grid, s)
