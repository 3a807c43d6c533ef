"""Synthetic models: spheres, ellipsoid surfaces, boxes and spiked pairs."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, DomainError
from .measures import EmpiricalMeasure
from .seeding import mix64

MODEL_KINDS = (
    "unit_sphere",
    "shifted_sphere",
    "ellipsoid_surface",
    "uniform_interval_product",
    "spiked",
)


@dataclass(frozen=True)
class Marginal:
    """One-dimensional law ``Uniform(low, high)`` used along a spike."""

    low: float = -1.0
    high: float = 1.0

    def __post_init__(self):
        if not self.high > self.low:
            raise ConfigError("marginal needs high > low")

    def sample(self, n: int, rng) -> np.ndarray:
        return rng.uniform(self.low, self.high, size=n)

    def quantile(self, t):
        return self.low + (self.high - self.low) * np.asarray(t)

    @property
    def bound(self) -> float:
        return max(abs(self.low), abs(self.high))


@dataclass(frozen=True)
class ModelSpec:
    """Description of a synthetic distribution and how many points to draw.

    ``kind`` selects the model; the remaining fields are used as follows:

    - ``shifted_sphere``: unit sphere translated by ``center``.
    - ``ellipsoid_surface``: surface with ``semi_axes``; ``surface_measure`` is
      ``"linear"`` (image of the uniform sphere under ``diag(semi_axes)``) or
      ``"area"`` (uniform with respect to surface area).
    - ``uniform_interval_product``: ``Uniform(low, high)^d``.
    - ``spiked``: ``X v + Z`` with ``X ~ marginal`` along ``spike`` and ``Z``
      uniform on the ball of radius ``z_radius`` in the orthogonal complement.
    """

    kind: str
    dim: int = 3
    n: int = 100
    seed: int = 0
    center: tuple | None = None
    semi_axes: tuple | None = None
    surface_measure: str = "linear"
    low: float = -1.0
    high: float = 1.0
    spike: tuple | None = None
    marginal: Marginal = field(default_factory=Marginal)
    z_radius: float = 1.0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}")
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if self.kind == "shifted_sphere":
            if self.center is None or len(self.center) != self.dim:
                raise ConfigError("shifted_sphere needs a center of length dim")
        if self.kind == "ellipsoid_surface":
            if self.semi_axes is None or len(self.semi_axes) != self.dim:
                raise ConfigError("ellipsoid_surface needs semi_axes of length dim")
            if any(a <= 0 for a in self.semi_axes):
                raise ConfigError("semi_axes must be positive")
            if self.surface_measure not in ("linear", "area"):
                raise ConfigError("surface_measure must be 'linear' or 'area'")
        if self.kind == "uniform_interval_product" and not self.high > self.low:
            raise ConfigError("need high > low")
        if self.kind == "spiked":
            if self.spike is None or len(self.spike) != self.dim:
                raise ConfigError("spiked needs a spike of length dim")
            if abs(np.linalg.norm(self.spike) - 1.0) > 1e-12:
                raise DomainError("spike direction must have unit norm")
            if self.dim < 2:
                raise ConfigError("spiked model needs dim >= 2")
            if isinstance(self.marginal, dict):
                object.__setattr__(self, "marginal", Marginal(**self.marginal))

    def with_n(self, n: int, seed: int | None = None) -> "ModelSpec":
        return replace(self, n=n, seed=self.seed if seed is None else seed)

    @property
    def radius_bound(self) -> float:
        if self.kind == "unit_sphere":
            return 1.0
        if self.kind == "shifted_sphere":
            return float(np.linalg.norm(self.center)) + 1.0
        if self.kind == "ellipsoid_surface":
            return float(max(self.semi_axes))
        if self.kind == "uniform_interval_product":
            return float(np.sqrt(self.dim) * max(abs(self.low), abs(self.high)))
        return float(np.hypot(self.marginal.bound, self.z_radius))


def _sphere(n: int, d: int, rng) -> np.ndarray:
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _ellipsoid_area(n: int, axes: np.ndarray, rng) -> np.ndarray:
    # accept sphere proposals with probability proportional to the area
    # element of the map u -> axes * u; the element is ||u * prod(axes) / axes||
    scale = np.prod(axes) / axes
    w_max = scale.max()
    out, have = [], 0
    while have < n:
        u = _sphere(max(2 * (n - have), 64), axes.size, rng)
        w = np.linalg.norm(u * scale, axis=1)
        keep = rng.random(u.shape[0]) * w_max < w
        out.append(u[keep] * axes)
        have += int(keep.sum())
    return np.concatenate(out)[:n]


def _ball(n: int, d: int, radius: float, rng) -> np.ndarray:
    if d == 0:
        return np.zeros((n, 0))
    r = radius * rng.random(n) ** (1.0 / d)
    return _sphere(n, d, rng) * r[:, None]


def _orthonormal_complement(v: np.ndarray) -> np.ndarray:
    """Rows form an orthonormal basis of ``v``'s orthogonal complement."""
    d = v.size
    q, _ = np.linalg.qr(np.column_stack([v, np.eye(d)]))
    return q[:, 1:d].T


def sample(spec: ModelSpec) -> EmpiricalMeasure:
    """Draw ``spec.n`` i.i.d. points from the model, seeded by ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    n, d = spec.n, spec.dim
    if spec.kind == "unit_sphere":
        pts = _sphere(n, d, rng)
    elif spec.kind == "shifted_sphere":
        pts = _sphere(n, d, rng) + np.asarray(spec.center, dtype=np.float64)
    elif spec.kind == "ellipsoid_surface":
        axes = np.asarray(spec.semi_axes, dtype=np.float64)
        if spec.surface_measure == "linear" or np.all(axes == axes[0]):
            pts = _sphere(n, d, rng) * axes
        else:
            pts = _ellipsoid_area(n, axes, rng)
    elif spec.kind == "uniform_interval_product":
        pts = rng.uniform(spec.low, spec.high, size=(n, d))
    else:
        v = np.asarray(spec.spike, dtype=np.float64)
        x = spec.marginal.sample(n, rng)
        z = _ball(n, d - 1, spec.z_radius, rng) @ _orthonormal_complement(v)
        pts = x[:, None] * v + z
    return EmpiricalMeasure(pts, radius_bound=spec.radius_bound)


def spiked_pair(
    spike,
    marginal_a: Marginal,
    marginal_b: Marginal,
    n: int,
    seed: int = 0,
    z_radius: float = 1.0,
    m: int | None = None,
) -> tuple[EmpiricalMeasure, EmpiricalMeasure]:
    """Independent samples of ``law(X + Z)`` and ``law(Y + Z)``.

    Both sides share the law of ``Z`` (uniform ball in the complement of the
    spike) but not its draws. ``P`` uses seed ``mix64(seed, 0)``, ``Q`` uses
    ``mix64(seed, 1)``.
    """
    spike = tuple(float(c) for c in np.ravel(spike))
    base = dict(kind="spiked", dim=len(spike), spike=spike, z_radius=z_radius)
    P = sample(ModelSpec(n=n, seed=mix64(seed, 0), marginal=marginal_a, **base))
    Q = sample(ModelSpec(n=n if m is None else m, seed=mix64(seed, 1), marginal=marginal_b, **base))
    # both sides must certify the same radius for potential construction
    R = max(P.radius_bound, Q.radius_bound)
    return (
        EmpiricalMeasure(P.points, radius_bound=R),
        EmpiricalMeasure(Q.points, radius_bound=R),
    )


def marginal_cost(marginal_a: Marginal, marginal_b: Marginal, p: float = 2.0) -> float:
    """``W_p^p`` between two uniform marginals via their quantile functions."""
    from scipy.integrate import quad

    def integrand(t):
        return abs(marginal_a.quantile(t) - marginal_b.quantile(t)) ** p

    # the integrand has at most one kink, where the quantile lines cross
    da = marginal_a.high - marginal_a.low
    db = marginal_b.high - marginal_b.low
    pts = []
    if da != db:
        t0 = (marginal_b.low - marginal_a.low) / (da - db)
        if 0 < t0 < 1:
            pts = [t0]
    val, _ = quad(integrand, 0.0, 1.0, points=pts or None, epsabs=1e-13, epsrel=1e-12)
    return float(val)
