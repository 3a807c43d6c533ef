"""Closed-form population slice costs for the shipped models."""

from __future__ import annotations

import numpy as np

from .samplers import ModelSpec, marginal_cost
from .sliced import Functional


def _same_law(A: ModelSpec, B: ModelSpec) -> bool:
    return A.with_n(1, 0) == B.with_n(1, 0)


def _center(m: ModelSpec):
    if m.kind == "unit_sphere":
        return np.zeros(m.dim)
    if m.kind == "shifted_sphere":
        return np.asarray(m.center, dtype=np.float64)
    return None


def _axes3(m: ModelSpec):
    """Semi-axes when the projections are uniform on intervals (d = 3 only)."""
    if m.dim != 3:
        return None
    if m.kind == "unit_sphere":
        return np.ones(3)
    if m.kind == "ellipsoid_surface" and (
        m.surface_measure == "linear" or len(set(m.semi_axes)) == 1
    ):
        return np.asarray(m.semi_axes, dtype=np.float64)
    return None


def slice_costs(P: ModelSpec, Q: ModelSpec, dirs: np.ndarray, p: float):
    """Population ``W_p^p(P_u, Q_u)`` for each row of ``dirs``, or ``None``.

    Covers identical laws, translated spheres (cost ``|u.(c_Q - c_P)|^p``)
    and, in ``d = 3``, linearly mapped spheres, whose projections are
    ``Uniform(-|A u|, |A u|)`` so the cost is ``||A u| - |B u||^p / (p + 1)``.
    """
    U = np.atleast_2d(dirs)
    if _same_law(P, Q):
        return np.zeros(U.shape[0])
    cP, cQ = _center(P), _center(Q)
    if cP is not None and cQ is not None:
        return np.abs(U @ (cQ - cP)) ** p
    aP, aQ = _axes3(P), _axes3(Q)
    if aP is not None and aQ is not None:
        sP = np.linalg.norm(U * aP, axis=1)
        sQ = np.linalg.norm(U * aQ, axis=1)
        return np.abs(sP - sQ) ** p / (p + 1)
    return None


def max_cost(P: ModelSpec, Q: ModelSpec, p: float):
    """Population max-sliced cost, or ``None`` when no closed form is known."""
    if _same_law(P, Q):
        return 0.0
    cP, cQ = _center(P), _center(Q)
    if cP is not None and cQ is not None:
        return float(np.linalg.norm(cQ - cP) ** p)
    aP, aQ = _axes3(P), _axes3(Q)
    if aP is not None and aQ is not None and (np.all(aP == 1) or np.all(aQ == 1)):
        axes = aQ if np.all(aP == 1) else aP
        dev = max(abs(axes.max() - 1), abs(axes.min() - 1))
        return float(dev**p / (p + 1))
    if (
        P.kind == "spiked"
        and Q.kind == "spiked"
        and P.spike == Q.spike
        and P.z_radius == Q.z_radius
        and P.dim == Q.dim
    ):
        return marginal_cost(P.marginal, Q.marginal, p)
    return None


def functional_value(P: ModelSpec, Q: ModelSpec, F: Functional, p: float, delta: float = 0.0):
    """Population value ``F(W)``; ``None`` when not available in closed form."""
    if delta != 0.0:
        return None
    if F.kind == "max_sliced":
        return max_cost(P, Q, p)
    if F.kind == "distributional":
        vals = []
        for U, w in F.family:
            c = slice_costs(P, Q, U, p)
            if c is None:
                return None
            vals.append(float(np.dot(w, c)))
        return max(vals)
    c = slice_costs(P, Q, F.dirs, p)
    if c is None:
        return None
    return F.reduce(c)
