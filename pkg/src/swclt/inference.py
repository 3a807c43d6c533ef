"""Covariance estimation, limiting variances and the rescaled bootstrap."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, IncompatibleInputError
from .measures import Direction, EmpiricalMeasure, SortedSlice, as_unit_vector, joint_radius
from .ot1d import PiecewisePotential, c_transform, kantorovich_potential
from .seeding import mix64
from .sliced import Functional, sphere_design


@dataclass(frozen=True)
class SampleRatio:
    """Sample sizes ``n`` (for P) and ``m`` (for Q); ``lam = n / (n + m)``."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise DomainError("sample sizes must be positive")

    @property
    def lam(self) -> float:
        return self.n / (self.n + self.m)

    @property
    def rate(self) -> float:
        return float(np.sqrt(self.n * self.m / (self.n + self.m)))


@dataclass(frozen=True)
class CovarianceEstimate:
    """Plug-in estimate of the limiting covariance at ``(u, v)``.

    ``value`` is on the scale of ``sqrt(n)(W_n - W)`` for ``n = m``: twice the
    ``lam``-weighted combination, i.e. the plain sum of the P and Q terms when
    ``n = m``. ``rate_value`` is the ``lam``-weighted combination itself, the
    covariance for the ``sqrt(nm/(n+m))`` scaling.
    """

    u: Direction
    v: Direction
    value: float
    rate_value: float
    p_cross: float
    p_means: float
    q_cross: float
    q_means: float
    simulation_compat: bool = False


def slice_potential(P: EmpiricalMeasure, Q: EmpiricalMeasure, u, p: float, radius=None) -> PiecewisePotential:
    u = as_unit_vector(u)
    R = joint_radius(P, Q) if radius is None else radius
    a = SortedSlice.from_values(P.points @ u, radius=R)
    b = SortedSlice.from_values(Q.points @ u, radius=R)
    return kantorovich_potential(a, b, p, R)


def potential_columns(P: EmpiricalMeasure, Q: EmpiricalMeasure, dirs: np.ndarray, p: float):
    """Potential values at the samples for each direction.

    Returns ``F`` of shape ``(n, K)`` with ``F[i, k] = f_k(u_k . x_i)`` and
    ``G`` of shape ``(m, K)`` with ``G[j, k] = f_k^c(u_k . y_j)``.
    """
    if P.dim != Q.dim:
        raise IncompatibleInputError("measures have different dimensions")
    R = joint_radius(P, Q)
    U = np.atleast_2d(dirs)
    F = np.empty((P.n, U.shape[0]))
    G = np.empty((Q.n, U.shape[0]))
    for k, u in enumerate(U):
        xa = P.points @ u
        yb = Q.points @ u
        f = kantorovich_potential(
            SortedSlice.from_values(xa, radius=R), SortedSlice.from_values(yb, radius=R), p, R
        )
        F[:, k] = f(xa)
        G[:, k] = c_transform(f, yb)
    return F, G


def _cross_and_means(A, k, j):
    a = A[:, k]
    b = A[:, j]
    return float(np.mean(a * b)), float(np.mean(a) * np.mean(b))


def covariance_estimate(
    P: EmpiricalMeasure,
    Q: EmpiricalMeasure,
    p: float,
    u,
    v,
    ratio: SampleRatio | None = None,
) -> CovarianceEstimate:
    """Plug-in covariance of the limiting process at directions ``u`` and ``v``."""
    ratio = ratio or SampleRatio(P.n, Q.n)
    uu = as_unit_vector(u)
    vv = as_unit_vector(v)
    F, G = potential_columns(P, Q, np.vstack([uu, vv]), p)
    pc, pm = _cross_and_means(F, 0, 1)
    qc, qm = _cross_and_means(G, 0, 1)
    lam = ratio.lam
    rate_value = (1 - lam) * (pc - pm) + lam * (qc - qm)
    return CovarianceEstimate(
        Direction(uu), Direction(vv), 2.0 * rate_value, rate_value, pc, pm, qc, qm, p == 1
    )


def covariance_matrix(P, Q, p: float, dirs, ratio: SampleRatio | None = None) -> np.ndarray:
    """All pairwise covariance estimates on a direction grid (``value`` scale)."""
    ratio = ratio or SampleRatio(P.n, Q.n)
    F, G = potential_columns(P, Q, np.atleast_2d(dirs), p)
    Fc = F - F.mean(axis=0)
    Gc = G - G.mean(axis=0)
    lam = ratio.lam
    S = (1 - lam) * (Fc.T @ Fc) / P.n + lam * (Gc.T @ Gc) / Q.n
    S = 0.5 * (S + S.T)
    return 2.0 * S


class VarianceEstimate(NamedTuple):
    var: float
    mc_stderr: float


def sw_limit_variance(
    P: EmpiricalMeasure,
    Q: EmpiricalMeasure,
    p: float = 2.0,
    n_pairs: int = 2000,
    seed=None,
    ratio: SampleRatio | None = None,
    n_groups: int = 10,
) -> VarianceEstimate:
    """Variance of the Gaussian limit of the sliced statistic.

    Estimates the double sphere integral of the covariance estimate. The
    ``n_pairs`` directions are split into ``n_groups`` independent randomly
    rotated spherical designs; each group integrates over all of its direction
    pairs, which equals the plug-in variance of the direction-averaged
    potentials. With i.i.d. directions (``d`` not 2 or 3) the diagonal pairs
    are dropped. ``mc_stderr`` is the spread across groups.
    """
    if n_pairs < 1:
        raise DomainError("n_pairs must be >= 1")
    ratio = ratio or SampleRatio(P.n, Q.n)
    lam = ratio.lam
    G_count = max(1, min(n_groups, n_pairs // 2))
    sizes = np.full(G_count, n_pairs // G_count)
    sizes[: n_pairs % G_count] += 1
    rng = np.random.default_rng(seed)
    estimates = []
    for size in sizes:
        U, iid = sphere_design(P.dim, max(int(size), 2), rng)
        F, G = potential_columns(P, Q, U, p)
        K = U.shape[0]
        total = 0.0
        for A, w in ((F, 1 - lam), (G, lam)):
            Ac = A - A.mean(axis=0)
            s = Ac.sum(axis=1)
            pair_sum = float(s @ s) / A.shape[0]
            if iid:
                diag = float((Ac**2).sum()) / A.shape[0]
                total += w * (pair_sum - diag) / (K * (K - 1))
            else:
                total += w * pair_sum / K**2
        estimates.append(2.0 * total)
    est = np.asarray(estimates)
    se = float(est.std(ddof=1) / np.sqrt(est.size)) if est.size > 1 else float("nan")
    return VarianceEstimate(float(est.mean()), se)


def msw_limit_variance(P, Q, p: float, v_hat) -> float:
    """Variance of the Gaussian limit of the max-sliced statistic at a singleton argmax."""
    return covariance_estimate(P, Q, p, v_hat, v_hat).value


@dataclass(frozen=True, eq=False)
class BootstrapSample:
    """Replicates ``sqrt(l) (F(W*) - F(W_n))``."""

    replicates: np.ndarray
    l: int
    B: int
    functional_tag: str
    seed: int
    point: float
    child_seeds: np.ndarray


def bootstrap_distribution(
    P: EmpiricalMeasure,
    Q: EmpiricalMeasure,
    functional: Functional,
    l: int,
    B: int,
    seed: int,
    p: float = 2.0,
    trim: float = 0.0,
) -> BootstrapSample:
    """m-out-of-n bootstrap of a slice functional.

    Each replicate draws ``l`` points with replacement from each sample.
    Monte-Carlo directions are bound once per call and shared by every
    replicate. Replicate ``b`` uses seed ``mix64(seed, b)``.
    """
    n = min(P.n, Q.n)
    if l < 1 or l > n:
        raise DomainError(f"resample size l={l} must lie in [1, {n}]")
    if B < 1:
        raise DomainError("B must be >= 1")
    F = functional.bind(P.dim, mix64(seed, 2**32)) if not functional.is_bound else functional
    point = F.evaluate(P, Q, p, trim)
    reps = np.empty(B)
    seeds = np.empty(B, dtype=np.uint64)
    for b in range(B):
        child = mix64(seed, b)
        seeds[b] = child
        rng = np.random.default_rng(child)
        Ps = P.resample(rng.integers(0, P.n, size=l))
        Qs = Q.resample(rng.integers(0, Q.n, size=l))
        reps[b] = np.sqrt(l) * (F.evaluate(Ps, Qs, p, trim) - point)
    return BootstrapSample(reps, int(l), int(B), F.kind, int(seed), float(point), seeds)


class ConfidenceInterval(NamedTuple):
    lo: float
    hi: float
    degenerate: bool


def confidence_interval(bs: BootstrapSample, point: float, n: int, alpha: float = 0.05) -> ConfidenceInterval:
    """Percentile interval ``[point - q_{1-a/2}/sqrt(n), point - q_{a/2}/sqrt(n)]``.

    Quantiles are type-1 (inverted CDF).
    """
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    reps = np.asarray(bs.replicates)
    if reps.size == 0:
        raise DomainError("bootstrap sample is empty")
    q_lo, q_hi = np.quantile(reps, [alpha / 2, 1 - alpha / 2], method="inverted_cdf")
    root = np.sqrt(n)
    return ConfidenceInterval(
        float(point - q_hi / root), float(point - q_lo / root), bool(np.all(reps == reps[0]))
    )
