"""Empirical measures in R^d and their one-dimensional projections."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, IncompatibleInputError

_WEIGHT_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Weighted point cloud with a certified support radius.

    Parameters
    ----------
    points : ndarray, shape (n, d)
    weights : ndarray, shape (n,), optional
        Defaults to uniform weights.
    radius_bound : float, optional
        Radius ``R`` of a closed ball around the origin containing every
        point. Computed from the points when omitted.
    """

    points: np.ndarray
    weights: np.ndarray = None
    radius_bound: float = None
    uniform: bool = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise DomainError("points must be a nonempty (n, d) array")
        if not np.all(np.isfinite(pts)):
            raise DomainError("points must be finite")
        n = pts.shape[0]

        if self.weights is None:
            w = np.full(n, 1.0 / n)
            uniform = True
        else:
            w = np.asarray(self.weights, dtype=np.float64)
            if w.shape != (n,):
                raise DomainError(f"expected {n} weights, got shape {w.shape}")
            if np.any(w < 0):
                raise DomainError("weights must be nonnegative")
            if abs(w.sum() - 1.0) > _WEIGHT_TOL:
                raise DomainError(f"weights sum to {w.sum()!r}, not 1")
            uniform = bool(np.all(w == w[0]))

        norm_max = float(np.sqrt((pts**2).sum(axis=1)).max())
        if self.radius_bound is None:
            radius = norm_max
        else:
            radius = float(self.radius_bound)
            if norm_max > radius * (1 + 1e-12) + 1e-12:
                raise DomainError(
                    f"point of norm {norm_max!r} outside radius bound {radius!r}"
                )

        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "radius_bound", radius)
        object.__setattr__(self, "uniform", uniform)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @classmethod
    def from_csv(cls, path, radius_bound=None) -> "EmpiricalMeasure":
        """Load a headerless CSV with one point per row."""
        pts = np.loadtxt(Path(path), delimiter=",", dtype=np.float64, ndmin=2)
        return cls(pts, radius_bound=radius_bound)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            for row in self.points:
                fh.write(",".join(repr(float(x)) for x in row) + "\n")

    def resample(self, idx: np.ndarray) -> "EmpiricalMeasure":
        """Uniform empirical measure on ``points[idx]``, keeping the radius bound."""
        return EmpiricalMeasure(self.points[idx], radius_bound=self.radius_bound)


@dataclass(frozen=True, eq=False)
class Direction:
    """Unit vector on the sphere S^{d-1}."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=np.float64).ravel()
        if c.size == 0 or abs(np.linalg.norm(c) - 1.0) > 1e-12:
            raise DomainError("direction must have unit Euclidean norm")
        object.__setattr__(self, "coords", _frozen(c))

    @classmethod
    def from_vector(cls, v) -> "Direction":
        v = np.asarray(v, dtype=np.float64).ravel()
        nrm = np.linalg.norm(v)
        if nrm == 0 or not np.isfinite(nrm):
            raise DomainError("cannot normalize a zero or non-finite vector")
        return cls(v / nrm)

    @property
    def dim(self) -> int:
        return self.coords.size

    def canonical(self) -> "Direction":
        """Antipodal representative whose first nonzero coordinate is positive."""
        return Direction(canonical_sign(self.coords))

    def __neg__(self) -> "Direction":
        return Direction(-self.coords)


def canonical_sign(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    nz = np.flatnonzero(u)
    if nz.size and u[nz[0]] < 0:
        return -u
    return u.copy()


def as_unit_vector(u) -> np.ndarray:
    if isinstance(u, Direction):
        return u.coords
    return Direction(u).coords


@dataclass(frozen=True, eq=False)
class SortedSlice:
    """Sorted 1D projection of a measure.

    ``cum_weights[i]`` is the CDF just after ``values[i]``;
    ``source_perm[i]`` is the index of the original point at sorted
    position ``i``.
    """

    values: np.ndarray
    weights: np.ndarray
    cum_weights: np.ndarray
    source_perm: np.ndarray
    radius: float
    uniform: bool = True

    @classmethod
    def from_values(cls, values, weights=None, radius=None) -> "SortedSlice":
        """Build a slice from unsorted 1D values (stable sort)."""
        x = np.asarray(values, dtype=np.float64).ravel()
        if x.size == 0:
            raise DomainError("slice must be nonempty")
        perm = np.argsort(x, kind="stable")
        if weights is None:
            w = np.full(x.size, 1.0 / x.size)
            uniform = True
        else:
            w = np.asarray(weights, dtype=np.float64)[perm]
            uniform = bool(np.all(w == w[0]))
        if radius is None:
            radius = float(np.abs(x).max())
        return cls._build(x[perm], w, perm, radius, uniform)

    @classmethod
    def _build(cls, values, weights, perm, radius, uniform):
        n = values.size
        if uniform:
            cum = np.arange(1, n + 1, dtype=np.float64) / n
        else:
            cum = np.cumsum(weights)
            cum[-1] = 1.0
        perm = np.asarray(perm)
        perm.setflags(write=False)
        return cls(
            _frozen(values), _frozen(weights), _frozen(cum), perm, float(radius), uniform
        )

    @property
    def n(self) -> int:
        return self.values.size

    def cdf(self, x):
        """Right-continuous CDF of the slice."""
        idx = np.searchsorted(self.values, x, side="right")
        cum = np.concatenate(([0.0], self.cum_weights))
        return cum[idx]


def project(m: EmpiricalMeasure, u) -> SortedSlice:
    """Project ``m`` onto direction ``u`` and sort (ties kept in index order)."""
    u = as_unit_vector(u)
    if u.size != m.dim:
        raise IncompatibleInputError(
            f"direction has dimension {u.size}, measure has {m.dim}"
        )
    vals = m.points @ u
    perm = np.argsort(vals, kind="stable")
    return SortedSlice._build(vals[perm], m.weights[perm], perm, m.radius_bound, m.uniform)


def quantile(s: SortedSlice, t):
    """Generalized inverse ``inf{x : CDF(x) >= t}``; ``t = 0`` gives the minimum."""
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any((t_arr < 0) | (t_arr > 1)) or np.any(np.isnan(t_arr)):
        raise DomainError("quantile level must lie in [0, 1]")
    idx = np.searchsorted(s.cum_weights, t_arr, side="left")
    idx = np.minimum(idx, s.n - 1)
    out = s.values[idx]
    return float(out) if np.ndim(out) == 0 else out


def support_radius(m: EmpiricalMeasure) -> float:
    return float(np.sqrt((m.points**2).sum(axis=1)).max())


def joint_radius(P: EmpiricalMeasure, Q: EmpiricalMeasure) -> float:
    """Shared radius used for potentials between ``P`` and ``Q``."""
    return max(P.radius_bound, Q.radius_bound)
