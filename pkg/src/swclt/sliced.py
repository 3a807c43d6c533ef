"""Sliced distances: aggregates of 1D transport costs over directions."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DomainError,
    IncompatibleInputError,
    NumericalError,
    UnsupportedConfigurationError,
)
from .measures import Direction, EmpiricalMeasure, SortedSlice, as_unit_vector, canonical_sign
from .ot1d import wasserstein_1d


def random_directions(d: int, n: int, rng) -> np.ndarray:
    """``n`` i.i.d. uniform directions on S^{d-1}, shape ``(n, d)``."""
    rng = np.random.default_rng(rng)
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sphere_design(d: int, n: int, rng) -> tuple[np.ndarray, bool]:
    """Randomly rotated, well-spread set of ``n`` directions on S^{d-1}.

    Uses the spherical Fibonacci lattice for ``d = 3`` and equispaced angles
    for ``d = 2``, both under a Haar-random rotation, so that every point is
    marginally uniform. Other dimensions fall back to i.i.d. directions.
    Returns ``(directions, is_iid)``.
    """
    rng = np.random.default_rng(rng)
    if d == 3:
        i = np.arange(n) + 0.5
        z = 1.0 - 2.0 * i / n
        r = np.sqrt(1.0 - z**2)
        phi = np.pi * (3.0 - np.sqrt(5.0)) * i
        base = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    elif d == 2:
        ang = 2 * np.pi * np.arange(n) / n
        base = np.column_stack([np.cos(ang), np.sin(ang)])
    else:
        return random_directions(d, n, rng), True
    q, rr = np.linalg.qr(rng.standard_normal((d, d)))
    q = q * np.sign(np.diag(rr))
    U = base @ q.T
    return U / np.linalg.norm(U, axis=1, keepdims=True), False


def _as_dir_matrix(dirs, d: int) -> np.ndarray:
    if isinstance(dirs, Direction):
        dirs = [dirs]
    if isinstance(dirs, np.ndarray):
        U = np.atleast_2d(np.asarray(dirs, dtype=np.float64))
    else:
        dirs = list(dirs)
        if not dirs:
            raise DomainError("direction list is empty")
        U = np.vstack([as_unit_vector(u) for u in dirs])
    if U.shape[0] == 0:
        raise DomainError("direction list is empty")
    if U.shape[1] != d:
        raise IncompatibleInputError(f"directions have dimension {U.shape[1]}, measures {d}")
    if np.any(np.abs(np.linalg.norm(U, axis=1) - 1.0) > 1e-12):
        raise DomainError("directions must have unit norm")
    return U


def _check_dims(P: EmpiricalMeasure, Q: EmpiricalMeasure):
    if P.dim != Q.dim:
        raise IncompatibleInputError(f"measures live in R^{P.dim} and R^{Q.dim}")


def slice_costs(P: EmpiricalMeasure, Q: EmpiricalMeasure, dirs, p: float = 2.0, trim: float = 0.0) -> np.ndarray:
    """``W_p^p(P_u, Q_u)`` for every row ``u`` of ``dirs``."""
    _check_dims(P, Q)
    U = _as_dir_matrix(dirs, P.dim)
    if trim == 0.0 and P.uniform and Q.uniform and P.n == Q.n:
        out = np.empty(U.shape[0])
        # chunk so the (n, chunk) projection matrices stay small
        step = max(1, 2_000_000 // max(P.n, 1))
        for s in range(0, U.shape[0], step):
            A = np.sort(P.points @ U[s:s + step].T, axis=0)
            B = np.sort(Q.points @ U[s:s + step].T, axis=0)
            out[s:s + step] = np.mean(np.abs(A - B) ** p, axis=0)
        return out
    R = max(P.radius_bound, Q.radius_bound)
    out = np.empty(U.shape[0])
    for k, u in enumerate(U):
        a = SortedSlice.from_values(P.points @ u, P.weights, R)
        b = SortedSlice.from_values(Q.points @ u, Q.weights, R)
        out[k] = wasserstein_1d(a, b, p, trim)
    return out


@dataclass(frozen=True, eq=False)
class SliceField:
    """Transport costs ``W(u)`` on a finite set of directions."""

    directions: np.ndarray
    values: np.ndarray
    exponent: float
    trim: float = 0.0

    @classmethod
    def compute(cls, P, Q, dirs, p=2.0, trim=0.0) -> "SliceField":
        U = _as_dir_matrix(dirs, P.dim)
        return cls(U, slice_costs(P, Q, U, p, trim), float(p), float(trim))

    def argmax(self) -> Direction:
        return Direction(canonical_sign(self.directions[int(np.argmax(self.values))]))


def sliced_wasserstein(
    P: EmpiricalMeasure,
    Q: EmpiricalMeasure,
    p: float = 2.0,
    n_dirs: int = 500,
    trim: float = 0.0,
    seed=None,
) -> tuple[float, float]:
    """Monte-Carlo sliced cost ``SW_p^p`` and its Monte-Carlo standard error."""
    _check_dims(P, Q)
    if n_dirs < 1:
        raise DomainError("n_dirs must be >= 1")
    U = random_directions(P.dim, n_dirs, seed)
    vals = slice_costs(P, Q, U, p, trim)
    se = float(vals.std(ddof=1) / np.sqrt(n_dirs)) if n_dirs > 1 else 0.0
    return float(vals.mean()), se


def discrete_sliced(P, Q, p: float = 2.0, dirs=None, trim: float = 0.0) -> float:
    """Average cost over a fixed list of directions."""
    if dirs is None:
        raise DomainError("direction list is empty")
    return float(slice_costs(P, Q, dirs, p, trim).mean())


def _matched_differences(P, Q, u):
    xa = P.points @ u
    xb = Q.points @ u
    ia = np.argsort(xa, kind="stable")
    ib = np.argsort(xb, kind="stable")
    return P.points[ia] - Q.points[ib]


def slice_gradient(P: EmpiricalMeasure, Q: EmpiricalMeasure, p: float, u) -> np.ndarray:
    """Ambient (sub)gradient of ``u -> W_p^p(P_u, Q_u)`` for the sorted matching.

    With ``d_i`` the matched differences,
    ``grad = mean_i p |u.d_i|^{p-2} (u.d_i) d_i``.
    """
    _check_dims(P, Q)
    if not (P.uniform and Q.uniform) or P.n != Q.n:
        raise UnsupportedConfigurationError("gradient needs uniform measures of equal size")
    u = as_unit_vector(u)
    D = _matched_differences(P, Q, u)
    r = D @ u
    if p == 1:
        coef = np.sign(r)
    else:
        coef = p * np.abs(r) ** (p - 1) * np.sign(r)
    return coef @ D / P.n


@dataclass(frozen=True)
class MaxSlicedOptions:
    restarts: int = 8
    max_iter: int = 500
    step0: float = 0.5
    tol: float = 1e-7
    n_probes: int = 200


@dataclass(frozen=True, eq=False)
class MaxSlicedResult:
    value: float
    argmax: Direction
    restarts_used: int
    ascent_trace: list = field(default_factory=list)
    probe_best: float = float("nan")


def _ascend(P, Q, p, u, opts: MaxSlicedOptions, trace: list, restart: int):
    def cost(v):
        return slice_costs(P, Q, v[None, :], p)[0]

    val = cost(u)
    step = opts.step0
    for it in range(opts.max_iter):
        g = slice_gradient(P, Q, p, u)
        g_tan = g - (g @ u) * u
        gnorm = np.linalg.norm(g_tan)
        if not np.isfinite(gnorm):
            raise NumericalError("non-finite gradient during ascent", trace)
        trace.append((restart, it, float(val)))
        if gnorm < opts.tol:
            break
        direction = g_tan / gnorm
        accepted = False
        while step > 1e-12:
            cand = u + step * direction
            cand /= np.linalg.norm(cand)
            cval = cost(cand)
            if cval > val + 1e-4 * step * gnorm:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        u, val = cand, cval
        step = min(step * 2.0, opts.step0)
    return u, val


def max_sliced(
    P: EmpiricalMeasure,
    Q: EmpiricalMeasure,
    p: float = 2.0,
    opts: MaxSlicedOptions | None = None,
    seed=None,
) -> MaxSlicedResult:
    """Max-sliced cost by projected gradient ascent on the sphere.

    Random probe directions are scored first; the best ``opts.restarts`` of
    them seed backtracking ascents. The returned value is a lower bound on the
    true maximum and is never below the best probe.
    """
    _check_dims(P, Q)
    if not (P.uniform and Q.uniform) or P.n != Q.n:
        raise UnsupportedConfigurationError("max-sliced needs uniform measures of equal size")
    opts = opts or MaxSlicedOptions()
    rng = np.random.default_rng(seed)
    probes = random_directions(P.dim, max(opts.n_probes, opts.restarts), rng)
    probe_vals = slice_costs(P, Q, probes, p)
    order = np.argsort(-probe_vals, kind="stable")[: opts.restarts]

    trace: list = []
    best_u, best_val = probes[order[0]], probe_vals[order[0]]
    n_ok = 0
    for r, idx in enumerate(order):
        try:
            u, val = _ascend(P, Q, p, probes[idx].copy(), opts, trace, r)
        except NumericalError:
            continue
        if not np.isfinite(val):
            continue
        n_ok += 1
        if val > best_val:
            best_u, best_val = u, val
    if n_ok == 0:
        raise NumericalError("all max-sliced restarts failed", trace)
    best_u = canonical_sign(best_u / np.linalg.norm(best_u))
    value = float(slice_costs(P, Q, best_u[None, :], p)[0])
    return MaxSlicedResult(value, Direction(best_u), int(len(order)), trace, float(probe_vals.max()))


def distributional_sliced(P, Q, p: float = 2.0, family=None, trim: float = 0.0) -> tuple[float, int]:
    """Maximum over a finite family of direction measures of the averaged cost.

    ``family`` is a list of ``(directions, weights)`` pairs, each describing a
    finitely supported probability measure on the sphere.
    """
    if not family:
        raise DomainError("family of direction measures is empty")
    best, best_idx = -np.inf, -1
    for i, (dirs, w) in enumerate(family):
        w = np.asarray(w, dtype=np.float64)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise DomainError("direction weights must be nonnegative and sum to 1")
        val = float(np.dot(w, slice_costs(P, Q, dirs, p, trim)))
        if val > best:
            best, best_idx = val, i
    return best, best_idx


def amplitude_stat(P, Q, p: float = 2.0, dirs=None) -> tuple[float, Direction, Direction]:
    """``sup W - inf W`` over ``dirs`` with the two witnessing directions."""
    if dirs is None:
        raise DomainError("direction list is empty")
    field_ = SliceField.compute(P, Q, dirs, p)
    hi = int(np.argmax(field_.values))
    lo = int(np.argmin(field_.values))
    U = field_.directions
    return (
        float(field_.values[hi] - field_.values[lo]),
        Direction(canonical_sign(U[hi])),
        Direction(canonical_sign(U[lo])),
    )


FUNCTIONAL_KINDS = ("sliced", "discrete", "max_sliced", "amplitude", "distributional")


@dataclass(frozen=True, eq=False)
class Functional:
    """A functional ``F`` of the slice field, evaluated on a pair of measures.

    ``sliced`` draws ``n_dirs`` Monte-Carlo directions once, in :meth:`bind`,
    so that repeated evaluations share them.
    """

    kind: str
    n_dirs: int | None = None
    dirs: np.ndarray | None = None
    family: tuple | None = None
    options: MaxSlicedOptions | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in FUNCTIONAL_KINDS:
            raise DomainError(f"unknown functional {self.kind!r}")

    def bind(self, d: int, seed=None) -> "Functional":
        if self.kind == "sliced" and self.dirs is None:
            if not self.n_dirs or self.n_dirs < 1:
                raise DomainError("sliced functional needs n_dirs >= 1")
            return replace(self, dirs=random_directions(d, self.n_dirs, seed), seed=seed)
        if self.kind == "max_sliced" and self.seed is None:
            return replace(self, seed=seed)
        return self

    @property
    def is_bound(self) -> bool:
        if self.kind == "sliced":
            return self.dirs is not None
        if self.kind == "max_sliced":
            return self.seed is not None
        return True

    def evaluate(self, P, Q, p: float = 2.0, trim: float = 0.0) -> float:
        if self.kind in ("sliced", "discrete"):
            if self.dirs is None:
                raise DomainError(f"{self.kind} functional has no directions (call bind)")
            return discrete_sliced(P, Q, p, self.dirs, trim)
        if self.kind == "amplitude":
            return amplitude_stat(P, Q, p, self.dirs)[0]
        if self.kind == "distributional":
            return distributional_sliced(P, Q, p, self.family, trim)[0]
        return max_sliced(P, Q, p, self.options, self.seed).value

    def reduce(self, values: np.ndarray) -> float:
        """Apply ``F`` to slice values given on ``self.dirs`` (direction-list kinds)."""
        if self.kind in ("sliced", "discrete"):
            return float(np.mean(values))
        if self.kind == "amplitude":
            return float(np.max(values) - np.min(values))
        raise DomainError(f"{self.kind} cannot be reduced from a direction grid")
