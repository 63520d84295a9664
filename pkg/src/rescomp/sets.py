"""Closed convex sets with metric projections.

Each set knows how to project in the metric of its space.  Projections are
idempotent and firmly nonexpansive, which makes every normal-cone operator
and indicator function built from them well behaved.

Box projections clip per coordinate (valid because metrics are diagonal);
balls and halfspaces are defined with respect to the metric norm.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .hilbert import SubspaceProjector


class ConvexSet:
    """Base class: a nonempty closed convex subset of ``space``."""

    tag = "abstract"

    def __init__(self, space):
        self.space = space

    def project(self, x):
        raise NotImplementedError

    def contains(self, x, tol=1e-8):
        x = self.space.validate(x)
        return self.space.norm(x - self.project(x)) <= tol

    def distance(self, x):
        x = self.space.validate(x)
        return self.space.norm(x - self.project(x))

    def any_point(self):
        """Some point of the set (used to seed feasibility tests)."""
        return self.project(self.space.zeros())


class Box(ConvexSet):
    """``{x : lower <= x <= upper}`` coordinatewise (entries may be +-inf)."""

    tag = "box"

    def __init__(self, space, lower, upper):
        super().__init__(space)
        self.lower = np.broadcast_to(np.asarray(lower, dtype=float), (space.dim,)).copy()
        self.upper = np.broadcast_to(np.asarray(upper, dtype=float), (space.dim,)).copy()
        if np.any(self.lower > self.upper):
            raise ValidationError("empty box: lower > upper somewhere")

    def project(self, x):
        x = self.space.validate(x)
        return np.clip(x, self.lower, self.upper)


class Ball(ConvexSet):
    """Metric-norm ball ``{x : ||x - center|| <= radius}``."""

    tag = "ball"

    def __init__(self, space, center, radius):
        super().__init__(space)
        self.center = space.validate(center).copy()
        self.radius = float(radius)
        if self.radius < 0:
            raise ValidationError("negative ball radius")

    def project(self, x):
        x = self.space.validate(x)
        d = x - self.center
        nd = self.space.norm(d)
        if nd <= self.radius:
            return x.copy()
        return self.center + (self.radius / nd) * d


class Halfspace(ConvexSet):
    """``{x : <normal, x> <= offset}`` in the metric inner product."""

    tag = "halfspace"

    def __init__(self, space, normal, offset):
        super().__init__(space)
        self.normal = space.validate(normal).copy()
        self.offset = float(offset)
        nn = space.inner(self.normal, self.normal)
        if nn == 0.0:
            raise ValidationError("halfspace normal must be nonzero")
        self._nn = nn

    def project(self, x):
        x = self.space.validate(x)
        excess = self.space.inner(self.normal, x) - self.offset
        if excess <= 0.0:
            return x.copy()
        return x - (excess / self._nn) * self.normal


class AffineSubspace(ConvexSet):
    """``anchor + span(directions)``; a vector subspace when anchor = 0."""

    tag = "affine"

    def __init__(self, space, anchor, directions):
        super().__init__(space)
        self.anchor = space.validate(anchor).copy()
        self.projector = SubspaceProjector(space, directions)

    def project(self, x):
        x = self.space.validate(x)
        return self.anchor + self.projector.apply(x - self.anchor)


class Singleton(ConvexSet):
    """The one-point set ``{point}``."""

    tag = "singleton"

    def __init__(self, space, point):
        super().__init__(space)
        self.point = space.validate(point).copy()

    def project(self, x):
        self.space.validate(x)
        return self.point.copy()


class ProductSet(ConvexSet):
    """Cartesian product of sets living in the blocks of a product space."""

    tag = "product"

    def __init__(self, space, sets, slices):
        super().__init__(space)
        if len(sets) != len(slices):
            raise ValidationError("one block slice per factor set is required")
        self.sets = list(sets)
        self.slices = list(slices)

    def project(self, x):
        x = self.space.validate(x)
        out = np.empty_like(x)
        for s, sl in zip(self.sets, self.slices):
            out[sl] = s.project(x[sl])
        return out
