"""Exact one-dimensional optimal transport between sorted slices.

Costs are ``|x - y|**p``. The Kantorovich potential built here is the
antiderivative of ``p |x - T(x)|^{p-2} (x - T(x))`` with ``T`` the monotone
quantile map, normalized by ``f(0) = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedConfigurationError
from .measures import SortedSlice

_EDGE_TOL = 1e-12


def wasserstein_1d(a: SortedSlice, b: SortedSlice, p: float = 2.0, trim: float = 0.0) -> float:
    r"""Trimmed transport cost between two slices.

    Computes :math:`\int_\delta^{1-\delta} |F^{-1}(t) - G^{-1}(t)|^p \, dt`
    exactly: the integrand is constant between consecutive cumulative
    weights of either slice.

    Parameters
    ----------
    a, b : SortedSlice
    p : float
        Cost exponent, ``p >= 1``.
    trim : float
        Trimming level ``delta`` in ``[0, 1/2)``.

    Returns
    -------
    float
        The cost ``W_p^p`` (not its ``p``-th root).
    """
    if a.n == 0 or b.n == 0:
        raise DomainError("slices must be nonempty")
    if p < 1:
        raise DomainError("exponent p must be >= 1")
    if not 0.0 <= trim < 0.5:
        raise DomainError("trim must lie in [0, 1/2)")

    if trim == 0.0 and a.uniform and b.uniform and a.n == b.n:
        return float(np.mean(np.abs(a.values - b.values) ** p))

    lo, hi = trim, 1.0 - trim
    brk = np.concatenate(([lo, hi], a.cum_weights, b.cum_weights))
    brk = np.unique(brk[(brk >= lo) & (brk <= hi)])
    widths = np.diff(brk)
    mids = 0.5 * (brk[:-1] + brk[1:])
    ia = np.minimum(np.searchsorted(a.cum_weights, mids, side="left"), a.n - 1)
    ib = np.minimum(np.searchsorted(b.cum_weights, mids, side="left"), b.n - 1)
    return float(np.sum(widths * np.abs(a.values[ia] - b.values[ib]) ** p))


@dataclass(frozen=True, eq=False)
class PiecewisePotential:
    """Continuous potential on ``[-R, R]``.

    On segment ``[knots[k], knots[k+1])`` the potential equals
    ``offsets[k] + |x - targets[k]|**p - |knots[k] - targets[k]|**p``.
    ``targets`` is nondecreasing, which is what :func:`c_transform` relies on.
    The zero potential (used when both slices coincide) is flagged by
    ``identically_zero`` since it has no segment representation.
    """

    exponent: float
    knots: np.ndarray
    targets: np.ndarray
    offsets: np.ndarray
    radius: float
    simulation_compat: bool = False
    identically_zero: bool = False

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.identically_zero:
            return 0.0 if x.ndim == 0 else np.zeros_like(x)
        k = np.clip(np.searchsorted(self.knots, x, side="right") - 1, 0, self.targets.size - 1)
        c = self.targets[k]
        p = self.exponent
        out = self.offsets[k] + np.abs(x - c) ** p - np.abs(self.knots[k] - c) ** p
        return float(out) if out.ndim == 0 else out

    @property
    def knot_values(self) -> np.ndarray:
        """``f`` evaluated at every knot, including ``R``."""
        return np.append(self.offsets, self(self.radius))

    def lipschitz_constant(self) -> float:
        """Largest slope magnitude over all segments."""
        p = self.exponent
        left = np.abs(self.knots[:-1] - self.targets)
        right = np.abs(self.knots[1:] - self.targets)
        if self.identically_zero:
            return 0.0
        if p == 1:
            return 1.0
        return float(p * np.maximum(left, right).max() ** (p - 1))

    @classmethod
    def zero(cls, p: float, radius: float) -> "PiecewisePotential":
        return cls(
            float(p),
            np.array([-radius, radius]),
            np.array([0.0]),
            np.array([0.0]),
            float(radius),
            simulation_compat=(p == 1),
            identically_zero=True,
        )


def _check_pair(a: SortedSlice, b: SortedSlice):
    if not (a.uniform and b.uniform) or a.n != b.n:
        raise UnsupportedConfigurationError(
            "potential construction needs uniform-weight slices of equal size"
        )


def kantorovich_potential(
    a: SortedSlice, b: SortedSlice, p: float = 2.0, radius: float | None = None
) -> PiecewisePotential:
    """Kantorovich potential for transporting slice ``a`` onto slice ``b``.

    The map ``T`` sends ``[a_(i), a_(i+1))`` to ``b_(i)`` and everything
    below ``a_(2)`` to ``b_(1)``. ``p = 1`` is accepted (sign potential) and
    flagged as ``simulation_compat``; uniqueness does not hold there.
    """
    _check_pair(a, b)
    if p < 1:
        raise DomainError("exponent p must be >= 1")
    R = float(max(a.radius, b.radius) if radius is None else radius)
    lo = min(a.values[0], b.values[0])
    hi = max(a.values[-1], b.values[-1])
    if lo < -R * (1 + _EDGE_TOL) - _EDGE_TOL or hi > R * (1 + _EDGE_TOL) + _EDGE_TOL:
        raise DomainError("slice values exceed the radius")

    if np.array_equal(a.values, b.values):
        return PiecewisePotential.zero(p, R)

    inner = np.unique(a.values[1:])
    inner = inner[(inner > -R) & (inner < R)]
    knots = np.concatenate(([-R], inner, [R]))
    # T on [knots[k], knots[k+1]) is b_(j) with j = #{a_i <= knots[k]}, at least 1
    count = np.searchsorted(a.values, knots[:-1], side="right")
    targets = b.values[np.maximum(count - 1, 0)]

    inc = np.abs(knots[1:] - targets) ** p - np.abs(knots[:-1] - targets) ** p
    offsets = np.concatenate(([0.0], np.cumsum(inc[:-1])))
    raw = PiecewisePotential(float(p), knots, targets, offsets, R, p == 1)
    shift = raw(0.0)
    return PiecewisePotential(float(p), knots, targets, offsets - shift, R, p == 1)


def sign_potential(a: SortedSlice, b: SortedSlice, radius: float | None = None) -> PiecewisePotential:
    """Potential with slope ``-sign(T(x) - x)`` for the ``p = 1`` cost."""
    return kantorovich_potential(a, b, 1.0, radius)


def _check_y(f: PiecewisePotential, y: np.ndarray):
    R = f.radius
    if np.any(np.abs(y) > R * (1 + _EDGE_TOL) + _EDGE_TOL) or np.any(np.isnan(y)):
        raise DomainError("c-transform argument outside [-R, R]")


def c_transform(f: PiecewisePotential, y, method: str = "search"):
    r"""Evaluate :math:`f^c(y) = \min_{x \in [-R, R]} |x - y|^p - f(x)`.

    The objective is monotone on every segment, so the minimum sits at a
    knot. With ``method="search"`` the minimizing knot is the first one whose
    segment target is ``>= y`` (or ``R`` if none is), located by binary
    search. ``method="enumerate"`` scans all knots.
    """
    y_arr = np.asarray(y, dtype=np.float64)
    _check_y(f, y_arr)
    p = f.exponent
    if f.identically_zero:
        return 0.0 if y_arr.ndim == 0 else np.zeros_like(y_arr)
    if method == "search":
        k = np.searchsorted(f.targets, y_arr, side="left")
        xs = f.knots[k]
        fx = f.knot_values[k]
        out = np.abs(xs - y_arr) ** p - fx
    elif method == "enumerate":
        s = f.knots
        vals = f.knot_values
        flat = y_arr.reshape(-1)
        out = np.empty_like(flat)
        for start in range(0, flat.size, 256):
            chunk = flat[start:start + 256]
            cost = np.abs(s[None, :] - chunk[:, None]) ** p - vals[None, :]
            out[start:start + 256] = cost.min(axis=1)
        out = out.reshape(y_arr.shape)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(out) if np.ndim(out) == 0 else out


def dual_value(f: PiecewisePotential, a: SortedSlice, b: SortedSlice) -> float:
    """Dual objective ``sum_i w_i f(a_i) + sum_j w'_j f^c(b_j)``."""
    return float(np.dot(a.weights, f(a.values)) + np.dot(b.weights, c_transform(f, b.values)))
