"""Time evolution: free flow, forced linear flow, defocusing NLS, Duhamel-Picard.

Sign conventions follow ``i u_t + Δu - |u|^p u = S``: the free propagator is
the multiplier ``exp(-i t |k|^2)`` and a source enters as ``u_t = ... - i S``.

The forced linear stepper is the exponential trapezoid rule

    u_{m+1} = E(dt) (u_m - i dt S_{m+1/2}),   S_{m+1/2} = (S_m + E(-dt) S_{m+1}) / 2,

i.e. the midpoint source is the average of the two nodal sources carried back
to the start of the step.  It is exact for zero source, second order, and
symmetric: a step of ``-dt`` undoes a step of ``dt`` exactly.  The NLS stepper
is its Strang-split counterpart (nonlinear half phase, source half kick, free
step, source half kick, nonlinear half phase) and collapses to the linear
stepper when the nonlinearity is switched off.

Backward solves run the forward kernel on the time-reversed, conjugated
problem ``w(s) = conj(u(T - s))``, which solves the same equation with source
``conj(S(T - s))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .errors import (
    BlowupDetected,
    ConvergenceError,
    GridMismatch,
    InvalidExponent,
    MisalignedTrajectory,
    SmallnessViolation,
)
from .spectral import (
    Field,
    Grid,
    fft,
    gradient_modulus,
    ifft,
    lp_norms,
    sobolev_norm,
)

Direction = Literal["forward", "backward"]

BLOWUP_LEVEL = 1e6
ADMISSIBLE_TOL = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    t1: float
    nt: int

    def __post_init__(self):
        if int(self.nt) != self.nt or self.nt < 1:
            raise ValueError(f"need at least one time step, got nt={self.nt}")
        if self.t1 == self.t0:
            raise ValueError("time interval is empty")

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / self.nt

    @property
    def nodes(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.nt + 1)

    @property
    def length(self) -> float:
        return abs(self.t1 - self.t0)

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.nt + 1, abs(self.dt))
        w[0] = w[-1] = abs(self.dt) / 2
        return w

    def reversed(self) -> "TimeGrid":
        return TimeGrid(self.t1, self.t0, self.nt)

    def refine(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t0, self.t1, self.nt * factor)


class Trajectory:
    """Frames on the nodes of a time grid; ``frames[m]`` lives at ``times.nodes[m]``."""

    __slots__ = ("grid", "times", "frames")

    def __init__(self, grid: Grid, times: TimeGrid, frames):
        arr = np.array(frames, dtype=np.complex128)
        expected = (times.nt + 1,) + grid.shape
        if arr.shape != expected:
            raise MisalignedTrajectory(f"frames have shape {arr.shape}, expected {expected}")
        arr.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "frames", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Trajectory is immutable")

    def __len__(self):
        return self.times.nt + 1

    def frame(self, m: int) -> Field:
        return Field(self.grid, self.frames[m])

    @property
    def initial(self) -> Field:
        return self.frame(0)

    @property
    def final(self) -> Field:
        return self.frame(-1)

    @classmethod
    def zeros(cls, grid: Grid, times: TimeGrid) -> "Trajectory":
        return cls(grid, times, np.zeros((times.nt + 1,) + grid.shape))

    @classmethod
    def constant(cls, f: Field, times: TimeGrid) -> "Trajectory":
        return cls(f.grid, times, np.broadcast_to(f.values, (times.nt + 1,) + f.grid.shape))

    def map_frames(self, func) -> "Trajectory":
        return Trajectory(self.grid, self.times, func(self.frames))

    def __sub__(self, other: "Trajectory") -> "Trajectory":
        _check_aligned(self, other.grid, other.times)
        return Trajectory(self.grid, self.times, self.frames - other.frames)

    def __add__(self, other: "Trajectory") -> "Trajectory":
        _check_aligned(self, other.grid, other.times)
        return Trajectory(self.grid, self.times, self.frames + other.frames)

    def __mul__(self, scalar) -> "Trajectory":
        return Trajectory(self.grid, self.times, self.frames * scalar)

    __rmul__ = __mul__


def _check_aligned(traj: Optional[Trajectory], grid: Grid, times: TimeGrid):
    if traj is None:
        return
    if traj.grid != grid:
        raise GridMismatch("trajectory lives on a different grid")
    if traj.times.nt != times.nt or not np.allclose(traj.times.nodes, times.nodes, rtol=0, atol=1e-12):
        raise MisalignedTrajectory("trajectory frames are not aligned with the time grid")


# -- free flow ---------------------------------------------------------------


def propagator(grid: Grid, t: float) -> np.ndarray:
    return np.exp(-1j * t * grid.k_squared)


def free_flow(psi: Field, t: float) -> Field:
    return Field(psi.grid, ifft(propagator(psi.grid, t) * fft(psi.values, psi.grid), psi.grid))


def free_flow_trajectory(psi: Field, times: TimeGrid) -> Trajectory:
    """Exact free evolution sampled at every node of ``times``."""
    grid = psi.grid
    hat = fft(psi.values, grid)
    t = times.nodes.reshape((-1,) + (1,) * grid.d)
    frames = ifft(np.exp(-1j * t * grid.k_squared) * hat, grid)
    return Trajectory(grid, times, frames)


# -- forced linear flow -------------------------------------------------------


def _linear_forward(data: np.ndarray, source: Optional[np.ndarray], grid: Grid, times: TimeGrid):
    dt = times.dt
    e = propagator(grid, dt)
    out_hat = np.empty((times.nt + 1,) + grid.shape, dtype=np.complex128)
    u = fft(data, grid)
    out_hat[0] = u
    if source is None:
        for m in range(times.nt):
            u = e * u
            out_hat[m + 1] = u
    else:
        s_hat = fft(source, grid)
        half = 0.5j * dt
        for m in range(times.nt):
            u = e * (u - half * s_hat[m]) - half * s_hat[m + 1]
            out_hat[m + 1] = u
    return ifft(out_hat, grid)


def _reverse_conjugate(frames: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if frames is None:
        return None
    return frames[::-1].conj()


def forced_linear_solve(
    data: Field,
    source: Optional[Trajectory],
    times: TimeGrid,
    direction: Direction = "forward",
) -> Trajectory:
    """Solve ``i u_t + Δu = S`` on ``times``.

    ``data`` is the value at ``times.t0`` for a forward solve and at
    ``times.t1`` for a backward solve.  Frames of the result are always in node
    order.
    """
    grid = data.grid
    _check_aligned(source, grid, times)
    src = None if source is None else source.frames
    if direction == "forward":
        frames = _linear_forward(data.values, src, grid, times)
    elif direction == "backward":
        w = _linear_forward(data.values.conj(), _reverse_conjugate(src), grid, times)
        frames = _reverse_conjugate(w)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return Trajectory(grid, times, frames)


# -- nonlinear flow -----------------------------------------------------------


def nonlinear_potential(u: np.ndarray, grid: Grid, power: int = 4) -> np.ndarray:
    """Dealiased real potential ``P(|u|^p)`` so that the nonlinearity reads ``P(|u|^p) u``."""
    pot = ifft(grid.dealias_mask * fft(np.abs(u) ** power, grid), grid)
    return pot.real


def nonlinearity(u: np.ndarray, grid: Grid, power: int = 4) -> np.ndarray:
    return nonlinear_potential(u, grid, power) * u


def _nls_forward(data, source, grid: Grid, times: TimeGrid, power: int):
    dt = times.dt
    h = dt / 2
    e = propagator(grid, dt)
    frames = np.empty((times.nt + 1,) + grid.shape, dtype=np.complex128)
    u = np.array(data, dtype=np.complex128)
    frames[0] = u
    for m in range(times.nt):
        u = u * np.exp(-1j * h * nonlinear_potential(u, grid, power))
        if source is not None:
            u = u - 1j * h * source[m]
        u = ifft(e * fft(u, grid), grid)
        if source is not None:
            u = u - 1j * h * source[m + 1]
        u = u * np.exp(-1j * h * nonlinear_potential(u, grid, power))
        peak = np.max(np.abs(u))
        if not np.isfinite(peak) or peak > BLOWUP_LEVEL:
            raise BlowupDetected(f"|u| reached {peak:.3e} at step {m + 1}; smallness regime left")
        frames[m + 1] = u
    return frames


def nls_solve(
    data: Field,
    control: Optional[Trajectory],
    times: TimeGrid,
    direction: Direction = "forward",
    power: int = 4,
) -> Trajectory:
    """Strang-split solve of ``i u_t + Δu - |u|^p u = S`` (defocusing)."""
    grid = data.grid
    _check_aligned(control, grid, times)
    src = None if control is None else control.frames
    if direction == "forward":
        frames = _nls_forward(data.values, src, grid, times, power)
    elif direction == "backward":
        w = _nls_forward(data.values.conj(), _reverse_conjugate(src), grid, times, power)
        frames = _reverse_conjugate(w)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return Trajectory(grid, times, frames)


# -- mixed norms -------------------------------------------------------------


def _check_exponent(p):
    if not (np.isinf(p) or p >= 1) or np.isnan(p) or p == -np.inf:
        raise InvalidExponent(f"exponent {p} is not in [1, inf]")


def frame_norms(traj: Trajectory, r: float, of_gradient: bool = False) -> np.ndarray:
    _check_exponent(r)
    vals = traj.frames
    if of_gradient:
        vals = gradient_modulus(vals, traj.grid)
    return lp_norms(vals, traj.grid, r)


def mixed_norm(traj: Trajectory, q: float, r: float, of_gradient: bool = False) -> float:
    """``L^q_t L^r_x`` norm; trapezoid rule in time, Riemann sum in space."""
    _check_exponent(q)
    norms = frame_norms(traj, r, of_gradient)
    if np.isinf(q):
        return float(norms.max())
    w = traj.times.trapezoid_weights()
    return float(np.sum(w * norms**q) ** (1.0 / q))


@dataclass(frozen=True)
class AdmissiblePair:
    q: float
    r: float
    kind: Literal["L2", "H1"] = "L2"

    def __post_init__(self):
        if not check_admissible(self.q, self.r, self.kind):
            raise InvalidExponent(f"({self.q}, {self.r}) is not {self.kind}-admissible")


def check_admissible(q: float, r: float, kind: str = "L2") -> bool:
    """Strichartz scaling in three dimensions: L2 pairs need 2 <= r <= 6, H1 pairs 6 <= r < inf."""
    if np.isnan(q) or np.isnan(r) or not (np.isinf(q) or q >= 1):
        return False
    inv_q = 0.0 if np.isinf(q) else 1.0 / q
    if kind == "L2":
        if not 2 <= r <= 6:
            return False
        target = 1.5
    elif kind == "H1":
        if not (6 <= r < np.inf):
            return False
        target = 0.5
    else:
        raise ValueError(f"unknown admissibility kind {kind!r}")
    return abs(2 * inv_q + 3.0 / r - target) <= ADMISSIBLE_TOL


@dataclass(frozen=True)
class NormBundle:
    sup_l2: float
    sup_grad: float
    s_norm: float
    w_norm: float
    z_norm: float

    @property
    def triple(self) -> float:
        return self.sup_l2 + self.sup_grad + self.s_norm + self.w_norm + self.z_norm

    def to_dict(self) -> dict:
        return {
            "sup_l2": self.sup_l2,
            "sup_grad": self.sup_grad,
            "s_norm": self.s_norm,
            "w_norm": self.w_norm,
            "z_norm": self.z_norm,
            "triple": self.triple,
        }


def norm_bundle(traj: Trajectory) -> NormBundle:
    grid = traj.grid
    grad = gradient_modulus(traj.frames, grid)
    w = traj.times.trapezoid_weights()

    def lqlr(values, q, r):
        return float(np.sum(w * lp_norms(values, grid, r) ** q) ** (1.0 / q))

    return NormBundle(
        sup_l2=float(lp_norms(traj.frames, grid, 2).max()),
        sup_grad=float(lp_norms(grad, grid, 2).max()),
        s_norm=lqlr(traj.frames, 10, 10),
        w_norm=lqlr(grad, 10 / 3, 10 / 3),
        z_norm=lqlr(grad, 10, 30 / 13),
    )


# -- Duhamel-Picard iteration ---------------------------------------------------


@dataclass
class PicardResult:
    trajectory: Trajectory
    norms: NormBundle
    differences: list = field(default_factory=list)
    ratios: list = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.differences)


def picard_solve(
    u0: Field,
    g: Optional[Trajectory],
    times: TimeGrid,
    tol: float = 1e-9,
    max_iter: int = 50,
    smallness: float = 0.1,
    power: int = 4,
) -> PicardResult:
    """Iterate the Duhamel map ``u -> E(t)u0 - i ∫ E(t-τ)(|u|^p u + g) dτ``.

    The time integral uses the trapezoid rule on the nodes of ``times``, which
    is exactly what :func:`forced_linear_solve` computes for the source
    ``|u|^p u + g``.  Iteration stops when the triple norm of the update drops
    below ``tol`` times the triple norm of the iterate.
    """
    h1 = sobolev_norm(u0, 1)
    if h1 > smallness:
        raise SmallnessViolation(f"||u0||_H1 = {h1:.3e} exceeds smallness threshold {smallness}")
    grid = u0.grid
    _check_aligned(g, grid, times)
    u = Trajectory.zeros(grid, times)
    diffs, ratios = [], []
    for k in range(max_iter):
        src = nonlinearity(u.frames, grid, power)
        if g is not None:
            src = src + g.frames
        new = forced_linear_solve(u0, Trajectory(grid, times, src), times)
        diff = norm_bundle(new - u).triple
        size = norm_bundle(new).triple
        diffs.append(diff)
        if len(diffs) > 1 and diffs[-2] > 0:
            ratios.append(diff / diffs[-2])
        u = new
        if diff <= tol * size:
            return PicardResult(u, norm_bundle(u), diffs, ratios)
        if ratios and ratios[-1] >= 1 and diff > 1e3 * np.finfo(float).eps * size:
            raise ConvergenceError(
                f"Duhamel iteration stopped contracting (ratio {ratios[-1]:.3f}); data too large"
            )
    raise ConvergenceError(f"Duhamel iteration did not converge in {max_iter} iterations")
