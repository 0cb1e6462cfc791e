"""Control region geometry: the cutoff φ, the multiplier field q, and A = Λ⁻¹(φ ·)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryOverflow, GridMismatch
from .spectral import Field, Grid, lambda_inverse, partial_derivative, sobolev_norm


def smooth_step(s):
    """C-infinity transition: 0 for s <= 0, 1 for s >= 1, ``f(s)/(f(s)+f(1-s))`` between."""
    s = np.asarray(s, dtype=float)
    out = np.where(s >= 1.0, 1.0, 0.0)
    inner = (s > 0) & (s < 1)
    a = np.exp(-1.0 / s[inner])
    b = np.exp(-1.0 / (1.0 - s[inner]))
    out[inner] = a / (a + b)
    return out


@dataclass(frozen=True)
class CutoffPhi:
    """Radial cutoff vanishing for ``|x| <= radius``, equal to 1 for ``|x| >= radius + width``."""

    radius: float
    field: Field
    width: float = 1.0

    @property
    def grid(self) -> Grid:
        return self.field.grid

    @property
    def values(self) -> np.ndarray:
        return self.field.values.real

    def dilated(self, factor: float = 2.0) -> "CutoffPhi":
        """The cutoff ``x -> φ(x / factor)``."""
        grid = self.grid
        if self.radius == 0:
            return self
        radius, width = self.radius * factor, self.width * factor
        if radius + width > grid.half_side:
            raise GeometryOverflow(
                f"dilated cutoff plateau |x| >= {radius + width} does not fit in half side {grid.half_side}"
            )
        return CutoffPhi(radius, _radial_step(grid, radius, width), width)

    @classmethod
    def full(cls, grid: Grid) -> "CutoffPhi":
        """Degenerate φ ≡ 1 (observation of the whole box)."""
        return cls(0.0, Field(grid, np.ones(grid.shape)))


def _radial_step(grid: Grid, radius: float, width: float) -> Field:
    return Field(grid, smooth_step((grid.radius - radius) / width))


def build_cutoff(grid: Grid, radius: float) -> CutoffPhi:
    if radius < 1:
        raise GeometryOverflow(f"cutoff radius must be at least 1, got {radius}")
    if radius + 3 > grid.half_side - 1:
        raise GeometryOverflow(
            f"radius {radius} needs half side >= {radius + 4}, box has {grid.half_side}"
        )
    return CutoffPhi(float(radius), _radial_step(grid, radius, 1.0))


@dataclass(frozen=True)
class MultiplierQ:
    """Compactly supported vector field equal to ``x`` on ``|x| <= radius + 2``."""

    radius: float
    components: tuple

    @property
    def grid(self) -> Grid:
        return self.components[0].grid

    def divergence(self) -> Field:
        return sum((partial_derivative(c, j) for j, c in enumerate(self.components)),
                   Field.zeros(self.grid))


def build_multiplier(grid: Grid, radius: float) -> MultiplierQ:
    if radius + 4 > grid.half_side:
        raise GeometryOverflow(
            f"multiplier support |x| <= {radius + 3} needs half side >= {radius + 4}"
        )
    envelope = 1.0 - smooth_step(grid.radius - (radius + 2))
    comps = tuple(Field(grid, x * envelope) for x in grid.mesh())
    return MultiplierQ(float(radius), comps)


def control_insert(phi: CutoffPhi, f: Field) -> Field:
    """``A f = Λ⁻¹(φ f)``."""
    if phi.grid != f.grid:
        raise GridMismatch("cutoff and field live on different grids")
    return lambda_inverse(phi.field * f)


def control_region_bump(grid: Grid, radius: float, h1_norm: float, axis: int = 0) -> Field:
    """Gaussian bump inside the plateau ``φ = 1``, scaled to a prescribed H¹ norm.

    Centred on the positive ``axis`` half-line midway between ``radius + 1`` and
    the box edge, with width a tenth of that gap.
    """
    gap = grid.half_side - (radius + 1)
    if gap <= 0:
        raise GeometryOverflow("no room for a bump between the cutoff plateau and the box edge")
    centre = radius + 1 + gap / 2
    sigma = gap / 10
    x = grid.mesh()
    r2 = sum((xi - (centre if j == axis else 0.0)) ** 2 for j, xi in enumerate(x))
    bump = Field(grid, np.exp(-r2 / (2 * sigma**2)))
    if h1_norm == 0:
        return Field.zeros(grid)
    return bump * (h1_norm / sobolev_norm(bump, 1))
