"""Convex functions represented by their proximity operators.

A :class:`ProxFunction` is a proper lsc convex function ``g`` carried
computationally as the family ``gamma -> prox_{gamma g}``, optionally with
a value oracle ``x -> g(x)`` (extended reals, ``inf`` allowed) and a
conjugate value oracle when a closed form exists.

The catalog covers indicators of convex sets, the l1 norm, quadratics,
half squared distances to a point, separable sums on weighted product
spaces, and conjugates.  On top of the catalog this module implements the
Moreau calculus (conjugate prox, envelopes) and the proximal composition,
cocomposition, mixture and value operations for a linear map with
``0 < ||L|| <= 1``.

Proximity operators are taken with respect to the metric of the function's
space: closed forms are per-coordinate with weight-adjusted thresholds
(the l1 soft threshold at coordinate i is ``gamma / w_i``).  Functions are
immutable and evaluation is pure; the inner solver behind
:func:`proximal_composition_value` allocates all of its state per call.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    CapabilityError,
    ContractionConditionError,
    ConvergenceError,
    ValidationError,
)
from .hilbert import NORM_GATE_TOL, block_slices, check_contraction, product_space
from .sets import Ball, Box, ConvexSet, Singleton

# Membership tolerance when an indicator function is asked for its value.
INDICATOR_TOL = 1e-8


class ProxFunction:
    """A proper lsc convex function represented by its prox family."""

    def __init__(self, space, tag, prox_evaluator, value=None,
                 conjugate_value=None, minimizer=None):
        self.space = space
        self.tag = tag
        self._prox = prox_evaluator
        self._value = value
        self._conjugate_value = conjugate_value
        self._minimizer = None if minimizer is None else space.validate(minimizer).copy()

    # -- evaluation ----------------------------------------------------

    def prox(self, gamma, x):
        """``prox_{gamma g}(x)`` for ``gamma > 0``."""
        if gamma <= 0.0:
            raise ValidationError(f"prox scale must be positive, got {gamma}")
        x = self.space.validate(x)
        return self._prox(float(gamma), x)

    @property
    def has_value(self):
        return self._value is not None

    def value(self, x):
        """``g(x)`` as an extended real (``float('inf')`` outside dom g)."""
        if self._value is None:
            raise CapabilityError(f"function {self.tag!r} carries no value oracle")
        x = self.space.validate(x)
        return float(self._value(x))

    @property
    def has_conjugate_value(self):
        return self._conjugate_value is not None

    def minimizer(self):
        """One global minimizer, when the catalog knows it."""
        if self._minimizer is None:
            raise CapabilityError(f"function {self.tag!r} has no recorded minimizer")
        return self._minimizer.copy()

    # -- conjugation ---------------------------------------------------

    def conjugate(self):
        """The conjugate function, with prox given by the Moreau identity."""
        base = self

        def conj_prox(gamma, x):
            # prox_{gamma g*}(x) = x - gamma prox_{g / gamma}(x / gamma)
            return x - gamma * base._prox(1.0 / gamma, x / gamma)

        return ProxFunction(
            self.space,
            f"conjugate-of({self.tag})",
            conj_prox,
            value=self._conjugate_value,
            conjugate_value=self._value,  # g** = g for catalog functions
        )

    def __repr__(self):
        return f"ProxFunction({self.tag!r} on dim {self.space.dim})"


# ---------------------------------------------------------------------------
# catalog constructors
# ---------------------------------------------------------------------------


def indicator(cset: ConvexSet):
    """Indicator function of a convex set; prox is the projection."""
    space = cset.space

    def value(x):
        return 0.0 if cset.contains(x, INDICATOR_TOL) else np.inf

    conj = _support_function(cset)
    minimizer = cset.any_point()
    return ProxFunction(
        space,
        f"indicator({cset.tag})",
        lambda gamma, x: cset.project(x),
        value=value,
        conjugate_value=conj,
        minimizer=minimizer,
    )


def _support_function(cset):
    """Closed-form support function for set tags that have one."""
    space = cset.space
    w = space.weights
    if isinstance(cset, Singleton):
        p = cset.point
        return lambda y: space.inner(p, y)
    if isinstance(cset, Box):
        lo, hi = cset.lower, cset.upper

        def sup_box(y):
            total = 0.0
            for li, ui, yi, wi in zip(lo, hi, y, w):
                if yi > 0.0:
                    if np.isinf(ui):
                        return np.inf
                    total += wi * ui * yi
                elif yi < 0.0:
                    if np.isinf(li):
                        return np.inf
                    total += wi * li * yi
            return total

        return sup_box
    if isinstance(cset, Ball):
        c, r = cset.center, cset.radius
        return lambda y: space.inner(c, y) + r * space.norm(y)
    return None


def one_norm(space):
    """``g(x) = sum_i |x_i|`` with the metric-adjusted soft threshold."""
    w = space.weights

    def prox(gamma, x):
        thresh = gamma / w
        return np.sign(x) * np.maximum(np.abs(x) - thresh, 0.0)

    def conj_value(y):
        # conjugate is the indicator of {y : |w_i y_i| <= 1 for all i}
        return 0.0 if np.max(np.abs(w * y)) <= 1.0 + INDICATOR_TOL else np.inf

    return ProxFunction(
        space,
        "abs-l1",
        prox,
        value=lambda x: float(np.sum(np.abs(x))),
        conjugate_value=conj_value,
        minimizer=space.zeros(),
    )


def quadratic(space, Q, b=None):
    """``g(x) = (1/2)<Qx, x> - <b, x>`` in the metric inner product.

    ``Q`` must be self-adjoint positive semidefinite with respect to the
    metric.  The prox solves ``(Id + gamma Q) p = x + gamma b``.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (space.dim, space.dim):
        raise ValidationError("quadratic form has wrong shape")
    b = space.zeros() if b is None else space.validate(b).copy()
    WQ = space.weights[:, None] * Q
    if np.max(np.abs(WQ - WQ.T)) > 1e-10 * max(1.0, np.max(np.abs(WQ))):
        raise ValidationError("quadratic form is not self-adjoint in the metric")
    sym = 0.5 * (WQ + WQ.T)
    min_eig = float(np.min(np.linalg.eigvalsh(sym)))
    if min_eig < -1e-10 * max(1.0, np.max(np.abs(sym))):
        raise ValidationError("quadratic form is not positive semidefinite")

    eye = np.eye(space.dim)

    def prox(gamma, x):
        return np.linalg.solve(eye + gamma * Q, x + gamma * b)

    def value(x):
        return 0.5 * space.inner(Q @ x, x) - space.inner(b, x)

    conj_value = None
    minimizer = None
    if min_eig > 1e-12:

        def conj_value(y):
            z = np.linalg.solve(Q, y + b)
            return 0.5 * space.inner(y + b, z)

        minimizer = np.linalg.solve(Q, b)

    return ProxFunction(space, "quadratic", prox, value=value,
                        conjugate_value=conj_value, minimizer=minimizer)


def half_squared_distance(space, p):
    """``g(x) = (1/2) ||x - p||^2`` in the metric norm."""
    p = space.validate(p).copy()

    def prox(gamma, x):
        return (x + gamma * p) / (1.0 + gamma)

    return ProxFunction(
        space,
        "half-sq-dist",
        prox,
        value=lambda x: 0.5 * space.norm(x - p) ** 2,
        conjugate_value=lambda y: 0.5 * space.norm(y) ** 2 + space.inner(p, y),
        minimizer=p,
    )


def separable(gs, weights):
    """``g(y) = sum_k w_k g_k(y_k)`` on the weighted product space.

    The prox is blockwise (the block weights cancel inside each block), so
    the mixture machinery can treat the product function like any other
    catalog member.
    """
    gs = list(gs)
    weights = [float(w) for w in weights]
    space = product_space([g.space for g in gs], weights)
    slices = block_slices([g.space for g in gs])

    def prox(gamma, x):
        out = np.empty_like(x)
        for g, sl in zip(gs, slices):
            out[sl] = g.prox(gamma, x[sl])
        return out

    value = None
    if all(g.has_value for g in gs):

        def value(x):
            return float(sum(w * g.value(x[sl]) for g, w, sl in zip(gs, weights, slices)))

    minimizer = None
    if all(g._minimizer is not None for g in gs):
        minimizer = np.concatenate([g.minimizer() for g in gs])

    f = ProxFunction(space, "separable", prox, value=value, minimizer=minimizer)
    f.blocks = list(zip(gs, weights, slices))
    return f


# ---------------------------------------------------------------------------
# Moreau calculus
# ---------------------------------------------------------------------------


def conjugate_prox(g, gamma, x):
    """``prox_{gamma g*}(x) = x - gamma prox_{g/gamma}(x/gamma)``."""
    if gamma <= 0.0:
        raise ValidationError(f"prox scale must be positive, got {gamma}")
    x = g.space.validate(x)
    return x - gamma * g.prox(1.0 / gamma, x / gamma)


def moreau_envelope(g, gamma, x):
    """Envelope value ``g(p) + ||x - p||^2 / (2 gamma)`` with ``p = prox``.

    The envelope gradient is the Yosida map ``(x - p) / gamma``; callers
    that need it can recover it from the same prox evaluation.
    """
    if gamma <= 0.0:
        raise ValidationError(f"envelope scale must be positive, got {gamma}")
    if not g.has_value:
        raise CapabilityError("moreau_envelope needs a value oracle")
    x = g.space.validate(x)
    p = g.prox(gamma, x)
    return g.value(p) + g.space.norm(x - p) ** 2 / (2.0 * gamma)


# ---------------------------------------------------------------------------
# proximal compositions
# ---------------------------------------------------------------------------


def proximal_composition_prox(L, g, x, unsafe=False):
    """Prox of the composition of ``g`` with ``L``: ``L*(prox_g(L x))``."""
    check_contraction(L, unsafe=unsafe, require_nonzero=True)
    if L.codomain != g.space:
        raise ValidationError("L must map into the space of g")
    x = L.domain.validate(x)
    return L.adjoint_apply(g.prox(1.0, L.apply(x)))


def proximal_cocomposition_prox(L, g, x, unsafe=False):
    """Prox of the cocomposition: ``x - L*(L x) + L*(prox_g(L x))``."""
    check_contraction(L, unsafe=unsafe, require_nonzero=True)
    if L.codomain != g.space:
        raise ValidationError("L must map into the space of g")
    x = L.domain.validate(x)
    y = L.apply(x)
    return x - L.adjoint_apply(y) + L.adjoint_apply(g.prox(1.0, y))


def proximal_mixture_prox(gs, Ls, weights, x, unsafe=False):
    """Prox of the mixture: ``sum_k w_k L_k*(prox_{g_k}(L_k x))``.

    Requires the stacked-map norm condition
    ``sum_k w_k ||L_k||^2 <= 1``.
    """
    gs, Ls = list(gs), list(Ls)
    weights = [float(w) for w in weights]
    if not (len(gs) == len(Ls) == len(weights)):
        raise ValidationError("mixture needs matching functions, maps, weights")
    total = sum(w * L.op_norm() ** 2 for w, L in zip(weights, Ls))
    if total <= 0.0:
        raise ContractionConditionError("mixture requires a nonzero stacked map")
    if total > 1.0 + NORM_GATE_TOL and not unsafe:
        raise ContractionConditionError(
            f"sum_k w_k ||L_k||^2 = {total:.6g} exceeds 1; pass unsafe=True to override"
        )
    domain = Ls[0].domain
    x = domain.validate(x)
    out = np.zeros(domain.dim)
    for g, L, w in zip(gs, Ls, weights):
        if L.domain != domain:
            raise ValidationError("mixture maps must share their domain")
        if L.codomain != g.space:
            raise ValidationError("each map must land in its function's space")
        out += w * L.adjoint_apply(g.prox(1.0, L.apply(x)))
    return out


def proximal_composition_value(L, g, x, inner_tol=1e-10, max_iterations=200_000,
                               unsafe=False):
    """Value of the proximal composition of ``g`` with ``L`` at ``x``.

    Evaluates ``min { g(y) + ||y||^2/2 : L* y = x } - ||x||^2/2``
    numerically: the affine-constrained strongly convex inner problem is
    solved by Douglas-Rachford splitting driven by the package's proximal
    point engine, until the fixed-point residual is below ``inner_tol``.

    Returns ``inf`` when the affine constraint ``L* y = x`` is infeasible
    (least-squares residual above 1e-8).
    """
    from .solvers import Schedule, proximal_point  # deferred: avoids an import cycle

    check_contraction(L, unsafe=unsafe, require_nonzero=True)
    if not g.has_value:
        raise CapabilityError("proximal_composition_value needs a value oracle")
    H, G = L.domain, L.codomain
    x = H.validate(x)

    A = L.adjoint_matrix  # L* in coordinates, maps G -> H
    y_ls, *_ = np.linalg.lstsq(A, x, rcond=None)
    if H.norm(A @ y_ls - x) > 1e-8 * (1.0 + H.norm(x)):
        return np.inf

    # metric projection onto {y : A y = x}
    winv = 1.0 / G.weights
    S = A @ (winv[:, None] * A.T)
    S_pinv = np.linalg.pinv(S, rcond=1e-12)

    def proj_affine(v):
        lam = S_pinv @ (A @ v - x)
        return v - winv * (A.T @ lam)

    def prox_g_plus_q(v):
        # prox_{g + Q} at step 1: prox_{g/2}(v/2)
        return g.prox(0.5, 0.5 * v)

    def dr_map(z):
        p = proj_affine(z)
        return z + prox_g_plus_q(2.0 * p - z) - p

    schedule = Schedule(lam=1.0, max_iterations=max_iterations, tol=inner_tol)
    z, trace = proximal_point(G, dr_map, y_ls, schedule)
    if trace.reason != "converged":
        raise ConvergenceError(
            "inner solver did not reach tolerance; "
            "is x in the adjoint image of dom g?"
        )
    y = proj_affine(z)
    val = g.value(y)
    if not np.isfinite(val):
        # the prox path keeps iterates near dom g; fall back to the prox point
        y = g.prox(1e-9, y)
        val = g.value(y)
    return val + 0.5 * G.norm(y) ** 2 - 0.5 * H.norm(x) ** 2
