"""Null control of the defocusing quintic NLS by a perturbative fixed point.

Given an adjoint datum ``Φ0`` the control ``h = Λ⁻¹(φ Φ(t))`` (``Φ`` the free
flow of ``Φ0``) drives the nonlinear state backward from ``u(T) = 0``.  Split
``u = Ψ + v`` where ``Ψ`` solves the linear equation with source ``φ h`` and
``v`` solves the linear equation with source ``|u|⁴u``, both vanishing at
``T``.  Then ``Ψ(0) = iΓΦ0`` and ``u(0) = u0`` becomes

    Φ0 = Γ⁻¹(-i u0) - Γ⁻¹(-i J Φ0),     J Φ0 := v(0),

so ``B(Φ0) = Γ⁻¹(-i u0) + sign·Γ⁻¹(-i J Φ0)`` with ``sign = -1``.  The sign
is a parameter only so the opposite choice can be shown to fail the
consistency check ``u(0) = u0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import (
    BlowupDetected,
    ConvergenceError,
    InconsistentFixedPoint,
    SmallnessViolation,
)
from .hum import HumProblem, control_source, solve_gramian, synthesize_control
from .propagators import (
    Trajectory,
    forced_linear_solve,
    mixed_norm,
    nls_solve,
    nonlinearity,
)
from .spectral import Field, random_band_limited, sobolev_norm

STRICHARTZ_Q = 10.0
STRICHARTZ_R = 30.0 / 13.0


@dataclass(frozen=True)
class NonlinearControlProblem:
    hum: HumProblem
    smallness_delta: float = 0.05
    ball_radius: float = 0.5
    tol: float = 1e-8
    max_iter: int = 50
    sign: int = -1
    known_good_delta: Optional[float] = None
    power: int = 4

    def __post_init__(self):
        if not self.ball_radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.ball_radius}")
        if self.sign not in (-1, 1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        size = sobolev_norm(self.hum.target_initial, 1)
        if size > self.smallness_delta:
            raise SmallnessViolation(
                f"||u0||_H1 = {size:.3e} exceeds smallness bound {self.smallness_delta:.3e}"
            )

    @property
    def u0(self) -> Field:
        return self.hum.target_initial

    @property
    def inner_tol(self) -> float:
        return 0.1 * self.tol

    def with_target(self, u0: Field, **changes) -> "NonlinearControlProblem":
        return replace(self, hum=self.hum.with_target(u0), **changes)


@dataclass
class CoupledPair:
    state: Trajectory
    correction: Field
    source: Trajectory


def coupled_pair(phi0: Field, problem: NonlinearControlProblem) -> CoupledPair:
    hum = problem.hum
    source = control_source(synthesize_control(phi0, hum), hum.phi)
    zero = Field.zeros(hum.grid)
    u = nls_solve(zero, source, hum.times, "backward", problem.power)
    grid = hum.grid
    nl = Trajectory(grid, hum.times, nonlinearity(u.frames, grid, problem.power))
    v = forced_linear_solve(zero, nl, hum.times, "backward")
    return CoupledPair(u, v.initial, source)


def solve_coupled_pair(phi0: Field, problem: NonlinearControlProblem) -> tuple[Trajectory, Field]:
    """Backward nonlinear state from ``u(T) = 0`` and ``J Φ0 = v(0)``."""
    pair = coupled_pair(phi0, problem)
    return pair.state, pair.correction


def psi_solve(phi0: Field, problem: NonlinearControlProblem) -> Trajectory:
    """Linear part ``Ψ`` of the backward state, solved on its own."""
    hum = problem.hum
    source = control_source(synthesize_control(phi0, hum), hum.phi)
    return forced_linear_solve(Field.zeros(hum.grid), source, hum.times, "backward")


def correction_operator(phi0: Field, problem: NonlinearControlProblem) -> Field:
    return coupled_pair(phi0, problem).correction


def gamma_inverse(rhs: Field, problem: NonlinearControlProblem) -> Field:
    return solve_gramian(rhs, problem.hum, tol=problem.inner_tol).solution


def linear_part(problem: NonlinearControlProblem) -> Field:
    """``Γ⁻¹(-i u0)``, the linear null-control datum and first iterate."""
    return gamma_inverse(-1j * problem.u0, problem)


def operator_B(
    phi0: Field, problem: NonlinearControlProblem, linear: Optional[Field] = None
) -> Field:
    if linear is None:
        linear = linear_part(problem)
    correction = correction_operator(phi0, problem)
    return linear + problem.sign * gamma_inverse(-1j * correction, problem)


def consistency_residual(phi0: Field, problem: NonlinearControlProblem) -> float:
    """``||v(0) + Ψ(0) - u0||_H1`` with ``v`` and ``Ψ`` from separate solves."""
    correction = correction_operator(phi0, problem)
    psi0 = psi_solve(phi0, problem).initial
    return sobolev_norm(correction + psi0 - problem.u0, 1)


def claim_ratios(phi0: Field, pair: CoupledPair) -> tuple[float, float]:
    """Measured constants of ``||J Φ0||_H1 <= C ||∇u||⁵_Z`` and ``||∇u||_Z <= C ||Φ0||_H⁻¹``."""
    grad = mixed_norm(pair.state, STRICHARTZ_Q, STRICHARTZ_R, of_gradient=True)
    size = sobolev_norm(phi0, -1)
    if grad == 0 or size == 0:
        return float("nan"), float("nan")
    return sobolev_norm(pair.correction, 1) / grad**5, grad / size


@dataclass
class ControlResult:
    phi0: Field
    control: Trajectory
    iterates: list
    contraction_factors: list
    terminal_residual: float
    claim1_ratio: float
    claim2_ratio: float
    consistency_residual: float = 0.0
    target_norm: float = 0.0
    sign: int = -1
    claim_history: list = field(default_factory=list)
    state: Optional[Trajectory] = None

    @property
    def iterations(self) -> int:
        return len(self.iterates)

    @property
    def relative_terminal_residual(self) -> float:
        return self.terminal_residual / self.target_norm if self.target_norm else 0.0

    def history_rows(self) -> list[tuple]:
        rows = []
        for k, inc in enumerate(self.iterates, start=1):
            factor = self.contraction_factors[k - 2] if k >= 2 else float("nan")
            c1, c2 = self.claim_history[k - 1] if k - 1 < len(self.claim_history) else (np.nan, np.nan)
            rows.append((k, inc, factor, c1, c2))
        return rows

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "increments": list(self.iterates),
            "contraction_factors": list(self.contraction_factors),
            "terminal_residual_h1": self.terminal_residual,
            "target_norm_h1": self.target_norm,
            "relative_terminal_residual": self.relative_terminal_residual,
            "claim1_ratio": self.claim1_ratio,
            "claim2_ratio": self.claim2_ratio,
            "consistency_residual": self.consistency_residual,
            "sign": self.sign,
            "phi0_norm_hm1": sobolev_norm(self.phi0, -1),
        }


def _regime_hint(problem: NonlinearControlProblem) -> str:
    size = sobolev_norm(problem.u0, 1)
    known = problem.known_good_delta
    tail = "no working size recorded" if known is None else f"largest size known to work {known:.3e}"
    return f"||u0||_H1 = {size:.3e} is beyond the working smallness regime ({tail})"


def nonlinear_null_control(problem: NonlinearControlProblem, verify: bool = True) -> ControlResult:
    """Iterate ``B`` from 0, then replay the synthesized control forward.

    Stops when the H⁻¹ increment drops below ``tol`` times the iterate's norm.
    Raises ``ConvergenceError`` if the iteration stops contracting or leaves the
    ball, ``InconsistentFixedPoint`` if the limit does not reproduce ``u0``.
    """
    hum = problem.hum
    u0 = problem.u0
    linear = linear_part(problem)
    phi = Field.zeros(hum.grid)
    increments, factors, claims = [], [], []
    try:
        for _ in range(problem.max_iter):
            pair = coupled_pair(phi, problem)
            claims.append(claim_ratios(phi, pair))
            new = linear + problem.sign * gamma_inverse(-1j * pair.correction, problem)
            inc = sobolev_norm(new - phi, -1)
            if increments:
                factors.append(inc / increments[-1] if increments[-1] > 0 else 0.0)
                if factors[-1] >= 1:
                    raise ConvergenceError(f"iteration stopped contracting (factor {factors[-1]:.3f}); " + _regime_hint(problem))
            increments.append(inc)
            phi = new
            if sobolev_norm(phi, -1) > problem.ball_radius:
                raise ConvergenceError(
                    f"iterate left the ball of radius {problem.ball_radius}; " + _regime_hint(problem)
                )
            if inc <= problem.tol * sobolev_norm(phi, -1):
                break
        else:
            raise ConvergenceError(f"no convergence in {problem.max_iter} iterations; " + _regime_hint(problem))
    except BlowupDetected as exc:
        raise BlowupDetected(f"{exc}; " + _regime_hint(problem)) from exc

    pair = coupled_pair(phi, problem)
    claim1, claim2 = claim_ratios(phi, pair)
    size = sobolev_norm(u0, 1)
    mismatch = sobolev_norm(pair.correction + psi_solve(phi, problem).initial - u0, 1)
    if mismatch > 10 * problem.tol * size:
        raise InconsistentFixedPoint(
            f"fixed point misses u0 by {mismatch:.3e} in H1 (allowed {10 * problem.tol * size:.3e}) "
            f"with sign {problem.sign:+d}",
            residual=mismatch,
        )
    control = synthesize_control(phi, hum)
    state = None
    terminal = float("nan")
    if verify:
        state = nls_solve(u0, control_source(control, hum.phi), hum.times, "forward", problem.power)
        terminal = sobolev_norm(state.final, 1)
    return ControlResult(
        phi0=phi,
        control=control,
        iterates=increments,
        contraction_factors=factors,
        terminal_residual=terminal,
        claim1_ratio=claim1,
        claim2_ratio=claim2,
        consistency_residual=mismatch,
        target_norm=size,
        sign=problem.sign,
        claim_history=claims,
        state=state,
    )


# -- instrumentation ---------------------------------------------------------


def probe_directions(problem: NonlinearControlProblem, count: int, seed: int = 0) -> list[Field]:
    """Random unit vectors in H⁻¹, band-limited to the lower third of the spectrum."""
    grid = problem.hum.grid
    rng = np.random.default_rng(seed)
    k_max = np.pi * (grid.n // 6) / grid.half_side
    out = []
    for _ in range(count):
        f = random_band_limited(grid, rng, k_max)
        out.append(f / sobolev_norm(f, -1))
    return out


@dataclass
class LipschitzProbe:
    radii: list
    ratios: list

    @property
    def reductions(self) -> list:
        return [a / b for a, b in zip(self.ratios, self.ratios[1:])]


def lipschitz_ratio(phi_a: Field, phi_b: Field, problem: NonlinearControlProblem) -> float:
    """``||B Φa - B Φb||_H⁻¹ / ||Φa - Φb||_H⁻¹``.

    The ``Γ⁻¹(-i u0)`` term cancels, so the difference is formed from the
    correction terms and inverted once.
    """
    diff = correction_operator(phi_a, problem) - correction_operator(phi_b, problem)
    out = gamma_inverse(-1j * diff, problem)
    return sobolev_norm(out, -1) / sobolev_norm(phi_a - phi_b, -1)


def lipschitz_probe(
    problem: NonlinearControlProblem, radii, pairs: int = 2, seed: int = 0
) -> LipschitzProbe:
    """Largest Lipschitz ratio of ``B`` over fixed random pairs scaled to each radius."""
    dirs = probe_directions(problem, 2 * pairs, seed)
    ratios = []
    for rho in radii:
        worst = 0.0
        for j in range(pairs):
            worst = max(worst, lipschitz_ratio(rho * dirs[2 * j], 0.5 * rho * dirs[2 * j + 1], problem))
        ratios.append(worst)
    return LipschitzProbe(list(radii), ratios)


@dataclass
class OrderSweep:
    scales: list
    values: list

    @property
    def orders(self) -> list:
        return [
            float(np.log(a / b) / np.log(s / t))
            for a, b, s, t in zip(self.values, self.values[1:], self.scales, self.scales[1:])
        ]


def quintic_order_sweep(
    problem: NonlinearControlProblem, scales, direction: Optional[Field] = None, seed: int = 0
) -> OrderSweep:
    """``||J(ε Φ)||_H1`` along a ray; the observed order should be 5."""
    if direction is None:
        direction = probe_directions(problem, 1, seed)[0]
    values = [sobolev_norm(correction_operator(eps * direction, problem), 1) for eps in scales]
    return OrderSweep(list(scales), values)


@dataclass
class DeltaSweep:
    sizes: list
    outcomes: list
    max_factors: list
    working_delta: float


def delta_sweep(
    problem: NonlinearControlProblem, start: float, doublings: int = 8
) -> DeltaSweep:
    """Double ``||u0||_H1`` along the direction of ``u0`` until the iteration fails."""
    u0 = problem.u0
    unit = u0 / sobolev_norm(u0, 1)
    sizes, outcomes, worst = [], [], []
    known = None
    for j in range(doublings + 1):
        size = start * 2**j
        trial = problem.with_target(unit * size, smallness_delta=max(size, problem.smallness_delta),
                                    known_good_delta=known)
        sizes.append(size)
        try:
            res = nonlinear_null_control(trial, verify=False)
        except (ConvergenceError, BlowupDetected) as exc:
            outcomes.append(type(exc).__name__)
            worst.append(float("nan"))
            break
        outcomes.append("converged")
        worst.append(max(res.contraction_factors, default=0.0))
        known = size
    return DeltaSweep(sizes, outcomes, worst, known if known is not None else 0.0)
