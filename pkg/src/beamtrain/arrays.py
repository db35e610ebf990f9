"""Complex-weight primitives for half-wave uniform linear arrays.

Angles live in the cosine domain (Omega = cos of the physical angle), where
the array response of an N-element ULA is periodic with period 2.  All
coverage arithmetic therefore wraps on [-1, 1).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Awv",
    "AngleGrid",
    "CoverageSet",
    "steering_vector",
    "steering_matrix",
    "leaf_angles",
    "beam_gain",
    "coverage_factor_rho",
    "beam_coverage",
    "rotate",
    "subarray_phase_objective",
    "random_awv",
    "default_grid",
]

# Relative slack for the constant-amplitude check; generated vectors are exact
# to machine precision, this only guards against malformed inputs.
_AMPLITUDE_TOL = 1e-9

DEFAULT_GRID_POINTS = 4096


@dataclass(frozen=True, eq=False)
class Awv:
    """Antenna weight vector under the constant-amplitude-or-zero constraint.

    Every entry is either exactly zero (antenna off) or has the common
    amplitude ``nu = 1/sqrt(active_count)``, which makes the vector unit
    power.  Instances are immutable and safe to share between threads.
    """

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=np.complex128)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-D sequence")
        active = w != 0
        n_active = int(np.count_nonzero(active))
        if n_active == 0:
            raise ValueError("weight vector has no active entries")
        nu = 1.0 / math.sqrt(n_active)
        if np.max(np.abs(np.abs(w[active]) - nu)) > _AMPLITUDE_TOL:
            raise ValueError(
                "active entries must share the amplitude 1/sqrt(active_count)"
            )
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return int(self.weights.size)

    @property
    def active_count(self) -> int:
        return int(np.count_nonzero(self.weights))

    @property
    def nu(self) -> float:
        """Common amplitude of the active entries."""
        return 1.0 / math.sqrt(self.active_count)

    def __len__(self) -> int:
        return self.size


def steering_vector(n: int, omega: float) -> Awv:
    """Steering vector of an n-element half-wave ULA along cosine angle omega.

    Entry k (0-based) is ``exp(j*pi*k*omega)/sqrt(n)``; the result has unit
    power with all antennas active.
    """
    if n < 1:
        raise ValueError("array size must be a positive integer")
    phases = np.exp(1j * np.pi * np.arange(n) * omega)
    return Awv(phases / math.sqrt(n))


def leaf_angles(n: int) -> np.ndarray:
    """The n evenly sampled steering angles -1 + (2i - 1)/n, i = 1..n.

    Adjacent angles are spaced by the steering beam width 2/n, so the
    corresponding steering vectors tile the whole domain.
    """
    if n < 1:
        raise ValueError("array size must be a positive integer")
    return -1.0 + (2.0 * np.arange(1, n + 1) - 1.0) / n


@functools.lru_cache(maxsize=32)
def steering_matrix(n: int) -> np.ndarray:
    """Column-stacked steering vectors at ``leaf_angles(n)``; cached."""
    mat = np.exp(1j * np.pi * np.outer(np.arange(n), leaf_angles(n))) / math.sqrt(n)
    mat.setflags(write=False)
    return mat


def beam_gain(w, omega):
    """Beam gain A(w, omega) = sum_k [w]_k exp(-j*pi*(k-1)*omega).

    ``w`` may be an Awv or a plain complex sequence; ``omega`` may be a
    scalar or an ndarray (the gain is evaluated pointwise).
    """
    weights = w.weights if isinstance(w, Awv) else np.asarray(w, dtype=np.complex128)
    om = np.asarray(omega, dtype=np.float64)
    phases = np.exp(-1j * np.pi * om[..., np.newaxis] * np.arange(weights.size))
    out = phases @ weights
    if om.ndim == 0:
        return complex(out)
    return out


def coverage_factor_rho(n: int) -> float:
    """Gain ratio of an n-element steering beam at half its width from center.

    Equals ``|sum_k exp(j*pi*k/n)|/n`` (k = 0..n-1); approaches 2/pi for
    large n and is commonly used as the coverage threshold for steered beams.
    """
    if n < 1:
        raise ValueError("array size must be a positive integer")
    return float(np.abs(np.exp(1j * np.pi * np.arange(n) / n).sum()) / n)


def rotate(w: Awv, psi: float) -> Awv:
    """Rotate the beam of ``w`` by psi in the cosine-angle domain.

    Entry k of the result is ``[w]_k * exp(j*pi*(k-1)*psi)``; zero entries
    stay zero and unit power is preserved, so the coverage of the result is
    the coverage of ``w`` translated by psi (mod 2).
    """
    phases = np.exp(1j * np.pi * np.arange(w.size) * psi)
    return Awv(w.weights * phases)


def subarray_phase_objective(n_sub: int, delta_theta: float) -> complex:
    """Edge-gain objective for two adjacent equally sized sub-array beams.

    Returns ``S* + exp(j*delta_theta)*S`` with ``S = sum_i exp(j*pi*(i-1)/n_sub)``,
    the combined gain of two neighbouring sub-beams at their crossover angle
    when their scalar phases differ by delta_theta.  Maximizing its modulus
    over delta_theta picks the inter-sub-array phase that removes the
    crossover dip; the maximizer is ``delta_theta = -pi*(n_sub-1)/n_sub``
    (mod 2*pi).  Requires an even sub-array size.
    """
    if n_sub < 2 or n_sub % 2 != 0:
        raise ValueError("sub-array size must be a positive even integer")
    s = np.exp(1j * np.pi * np.arange(n_sub) / n_sub).sum()
    return complex(np.conj(s) + np.exp(1j * delta_theta) * s)


def random_awv(n: int, rng: np.random.Generator, activation_prob: float = 0.5) -> Awv:
    """Random member of the weight set: random on/off pattern, uniform phases.

    At least one antenna is always active.
    """
    if n < 1:
        raise ValueError("array size must be a positive integer")
    active = rng.random(n) < activation_prob
    if not active.any():
        active[int(rng.integers(n))] = True
    phases = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=n))
    w = np.where(active, phases / math.sqrt(int(active.sum())), 0.0)
    return Awv(w)


@dataclass(frozen=True, eq=False)
class AngleGrid:
    """Ascending discretization of the cosine-angle domain.

    ``uniform(m)`` builds the canonical half-open grid -1 + 2*i/m, i = 0..m-1;
    on that grid a shift by a whole number of steps is an exact roll, which
    is what the coverage arithmetic relies on.
    """

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("grid needs at least two points")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly ascending")
        if pts[0] < -1.0 or pts[-1] > 1.0:
            raise ValueError("grid points must lie within [-1, 1]")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, num_points: int = DEFAULT_GRID_POINTS) -> "AngleGrid":
        if num_points < 2:
            raise ValueError("grid needs at least two points")
        return cls(-1.0 + 2.0 * np.arange(num_points) / num_points)

    @property
    def size(self) -> int:
        return int(self.points.size)

    @property
    def resolution(self) -> float:
        """Largest spacing between adjacent grid points."""
        return float(np.max(np.diff(self.points)))

    @property
    def is_uniform(self) -> bool:
        steps = np.diff(self.points)
        return bool(np.allclose(steps, steps[0], rtol=0.0, atol=1e-12))

    def roll_steps(self, psi: float) -> int:
        """Number of grid steps closest to a shift by psi (uniform grids only)."""
        if not self.is_uniform:
            raise ValueError("shifts are only defined on uniform grids")
        return int(round(psi / self.resolution))


@functools.lru_cache(maxsize=8)
def default_grid(num_points: int = DEFAULT_GRID_POINTS) -> AngleGrid:
    """Shared uniform grid; 4096 points oversample beams of arrays up to N=1024."""
    return AngleGrid.uniform(num_points)


@dataclass(frozen=True, eq=False)
class CoverageSet:
    """Grid points where a beam's gain exceeds ``rho`` times its peak gain.

    The boolean ``mask`` is aligned with ``grid.points``; ``intervals`` merges
    adjacent covered points into closed intervals for reporting.  Wrapping
    coverage shows up as separate intervals at both ends of the domain.
    """

    grid: AngleGrid
    mask: np.ndarray
    rho: float

    def __post_init__(self) -> None:
        mask = np.array(self.mask, dtype=bool)
        if mask.shape != self.grid.points.shape:
            raise ValueError("mask must align with the grid")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @property
    def intervals(self) -> list[tuple[float, float]]:
        pts = self.grid.points
        mask = self.mask
        out: list[tuple[float, float]] = []
        start = None
        for i, covered in enumerate(mask):
            if covered and start is None:
                start = i
            elif not covered and start is not None:
                out.append((float(pts[start]), float(pts[i - 1])))
                start = None
        if start is not None:
            out.append((float(pts[start]), float(pts[-1])))
        return out

    @property
    def covered_fraction(self) -> float:
        return float(np.count_nonzero(self.mask)) / self.mask.size

    def covered_points(self) -> np.ndarray:
        return self.grid.points[self.mask]

    def issuperset(self, other: "CoverageSet") -> bool:
        self._check_same_grid(other)
        return bool(np.all(self.mask[other.mask]))

    def union_mask(self, other: "CoverageSet") -> np.ndarray:
        self._check_same_grid(other)
        return self.mask | other.mask

    def shifted(self, psi: float) -> "CoverageSet":
        """Coverage translated by psi (mod 2), snapped to whole grid steps."""
        rolled = np.roll(self.mask, self.grid.roll_steps(psi))
        return CoverageSet(grid=self.grid, mask=rolled, rho=self.rho)

    def _check_same_grid(self, other: "CoverageSet") -> None:
        if self.grid.points.shape != other.grid.points.shape or not np.array_equal(
            self.grid.points, other.grid.points
        ):
            raise ValueError("coverage sets live on different grids")


def beam_coverage(w: Awv, rho: float, grid: AngleGrid | None = None) -> CoverageSet:
    """Numerical beam coverage: points with |A(w, omega)| > rho * peak |A|.

    The peak is taken over the grid, so the grid must oversample the beam
    structure; a resolution of at most 1/(4*N) (eight points per steering
    beam width) is enforced.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie strictly between 0 and 1")
    if grid is None:
        grid = default_grid()
    if grid.resolution > 0.25 / w.size + 1e-15:
        raise ValueError(
            f"grid resolution {grid.resolution:.2e} too coarse for N={w.size}; "
            f"need at most {0.25 / w.size:.2e}"
        )
    gains = np.abs(beam_gain(w, grid.points))
    mask = gains > rho * gains.max()
    return CoverageSet(grid=grid, mask=mask, rho=rho)
