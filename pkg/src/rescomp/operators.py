"""Maximally monotone operators represented by their resolvent families.

An operator ``B`` never appears as a set-valued map here: the only thing
algorithms ever evaluate is ``J_{gamma B} = (gamma B + Id)^{-1}``, so a
:class:`ResolventFamily` carries exactly that evaluator, together with the
set of scales at which it is valid.  Catalog members with closed forms
(zero, scaled identity, normal cones, monotone linear maps,
subdifferentials) support every ``gamma > 0``; constructions pinned to one
scale (Wiener-type operators, compositions) support a single fixed scale
and refuse anything else rather than silently rescaling, because the
rescaled family is a different operator.

Derived families -- inverses, positive rescalings, products on product
spaces -- are provided as wrappers so the composition calculus can be
expressed without touching evaluator internals.

Families are immutable after construction and evaluation is pure, so
they may be shared across threads (the linear catalog member keeps an
idempotent per-scale factorization cache, which is safe to race).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import ScaleRestrictionError, ValidationError
from .hilbert import block_slices, product_space

ALL_SCALES = "all"

_WIENER_SPOT_CHECKS = 100
_WIENER_TOL = 1e-8


class GraphPoint(NamedTuple):
    """A candidate pair ``(x, xstar)`` for membership in a graph."""

    x: np.ndarray
    xstar: np.ndarray


class ResolventFamily:
    """An operator ``B`` given by ``gamma -> J_{gamma B}``."""

    def __init__(self, space, kind, evaluator, scale_domain=ALL_SCALES):
        self.space = space
        self.kind = kind
        self._evaluator = evaluator
        self.scale_domain = scale_domain

    # -- scale bookkeeping ----------------------------------------------

    def supports_scale(self, gamma):
        if gamma <= 0.0:
            return False
        if self.scale_domain == ALL_SCALES:
            return True
        return abs(gamma - self.scale_domain) <= 1e-12 * max(1.0, abs(gamma))

    def _check_scale(self, gamma):
        if gamma <= 0.0:
            raise ScaleRestrictionError(f"resolvent scale must be positive, got {gamma}")
        if not self.supports_scale(gamma):
            raise ScaleRestrictionError(
                f"operator {self.kind!r} only supports scale {self.scale_domain}, "
                f"got {gamma}"
            )

    # -- evaluation -------------------------------------------------------

    def resolvent(self, gamma, y):
        """``J_{gamma B}(y)``."""
        self._check_scale(gamma)
        y = self.space.validate(y)
        return self._evaluator(float(gamma), y)

    def yosida(self, gamma, x):
        """``(x - J_{gamma B} x) / gamma``; gamma-cocoercive."""
        x = self.space.validate(x)
        return (x - self.resolvent(gamma, x)) / gamma

    def inverse_resolvent(self, gamma, x):
        """``J_{gamma B^{-1}}(x) = x - gamma J_{B/gamma}(x/gamma)``."""
        x = self.space.validate(x)
        return x - gamma * self.resolvent(1.0 / gamma, x / gamma)

    def graph_contains(self, point, tol):
        """Whether ``xstar in B(x)``, tested as ``x == J_B(x + xstar)``."""
        x = self.space.validate(point.x)
        xstar = self.space.validate(point.xstar)
        return self.space.norm(x - self.resolvent(1.0, x + xstar)) <= tol

    def sample_graph(self, n, seed=0, scale=1.0):
        """``n`` pairs ``(J_B z, z - J_B z)``, which always lie in gra B."""
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(n):
            z = self.space.random(rng, scale=scale)
            jz = self.resolvent(1.0, z)
            out.append(GraphPoint(jz, z - jz))
        return out

    # -- derived families ---------------------------------------------------

    def scaled(self, c):
        """The operator ``c B`` for ``c > 0`` (graphs scale in the output)."""
        if c <= 0.0:
            raise ValidationError(f"operator scaling must be positive, got {c}")
        if self.scale_domain == ALL_SCALES:
            domain = ALL_SCALES
        else:
            domain = self.scale_domain / c
        return ResolventFamily(
            self.space,
            f"scaled({c:g},{self.kind})",
            lambda gamma, y: self._evaluator(gamma * c, y),
            scale_domain=domain,
        )

    def inverse(self):
        """The inverse operator, via ``J_{gamma B^{-1}} = Id - gamma J_{B/gamma}(./gamma)``."""
        if self.scale_domain == ALL_SCALES:
            domain = ALL_SCALES
        else:
            domain = 1.0 / self.scale_domain
        return ResolventFamily(
            self.space,
            f"inverse({self.kind})",
            lambda gamma, x: x - gamma * self._evaluator(1.0 / gamma, x / gamma),
            scale_domain=domain,
        )

    def __repr__(self):
        return f"ResolventFamily({self.kind!r} on dim {self.space.dim})"


# ---------------------------------------------------------------------------
# catalog constructors
# ---------------------------------------------------------------------------


def zero_operator(space):
    """``B = 0``: the resolvent is the identity at every scale."""
    return ResolventFamily(space, "zero", lambda gamma, y: y.copy())


def scaled_identity(space, c):
    """``B = c Id`` with ``c >= 0``: ``J_{gamma B}(y) = y / (1 + gamma c)``."""
    c = float(c)
    if c < 0.0:
        raise ValidationError("scaled identity needs c >= 0 to stay monotone")
    return ResolventFamily(
        space, f"identity-scaled({c:g})", lambda gamma, y: y / (1.0 + gamma * c)
    )


def normal_cone(cset):
    """Normal cone of a convex set: the resolvent is the projection, at any scale."""
    fam = ResolventFamily(
        cset.space,
        f"normal-cone({cset.tag})",
        lambda gamma, y: cset.project(y),
    )
    fam.cset = cset
    return fam


def linear_monotone(space, M):
    """A monotone linear operator ``M``: the resolvent solves ``(Id + gamma M) x = y``.

    Monotonicity in the metric means the symmetric part of ``W M`` is PSD;
    this is validated at construction.  LU factors are cached per scale.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (space.dim, space.dim):
        raise ValidationError("linear operator has wrong shape")
    WM = space.weights[:, None] * M
    sym = 0.5 * (WM + WM.T)
    min_eig = float(np.min(np.linalg.eigvalsh(sym)))
    if min_eig < -1e-10 * max(1.0, np.max(np.abs(sym))):
        raise ValidationError("linear operator is not monotone in the metric")

    eye = np.eye(space.dim)
    factor_cache = {}

    def evaluator(gamma, y):
        fac = factor_cache.get(gamma)
        if fac is None:
            fac = lu_factor(eye + gamma * M)
            factor_cache[gamma] = fac
        return lu_solve(fac, y)

    fam = ResolventFamily(space, "linear", evaluator)
    fam.matrix = M
    return fam


def subdifferential(g):
    """The subdifferential of a ProxFunction: ``J_{gamma B} = prox_{gamma g}``."""
    return ResolventFamily(
        g.space, f"subdifferential({g.tag})", lambda gamma, y: g.prox(gamma, y)
    )


def make_wiener(space, F, p, rng_seed=0):
    """The operator ``(Id - F + p)^{-1} - Id`` for firmly nonexpansive ``F``.

    Its resolvent exists in closed form only at scale one:
    ``J_B = Id - F + p``, hence ``yosida(1, .) = F - p``.  Firm
    nonexpansiveness of ``F`` is the caller's responsibility; it is spot
    checked here on random pairs, which validates without proving.
    """
    p = space.validate(p).copy()
    rng = np.random.default_rng(rng_seed)
    for _ in range(_WIENER_SPOT_CHECKS):
        a = space.random(rng)
        b = space.random(rng)
        lhs = space.norm(F(a) - F(b)) ** 2 + space.norm((a - F(a)) - (b - F(b))) ** 2
        if lhs > space.norm(a - b) ** 2 + _WIENER_TOL:
            raise ValidationError(
                "supplied map failed the firm-nonexpansiveness spot check"
            )

    def evaluator(gamma, y):
        return y - F(y) + p

    fam = ResolventFamily(space, "wiener", evaluator, scale_domain=1.0)
    fam.forward = F
    fam.target = p
    return fam


def product_family(families, weights=None):
    """Blockwise operator ``B(y) = B_1 y_1 x ... x B_p y_p`` on the product space.

    The resolvent acts block by block; the product supports a scale exactly
    when every factor does.
    """
    families = list(families)
    if not families:
        raise ValidationError("product of zero operators")
    spaces = [f.space for f in families]
    space = product_space(spaces, weights)
    slices = block_slices(spaces)
    domains = {f.scale_domain for f in families}
    if len(domains) == 1:
        scale_domain = domains.pop()
    else:
        fixed = {d for d in domains if d != ALL_SCALES}
        if len(fixed) > 1:
            raise ValidationError("factors pin incompatible resolvent scales")
        scale_domain = fixed.pop()

    def evaluator(gamma, y):
        out = np.empty_like(y)
        for fam, sl in zip(families, slices):
            out[sl] = fam.resolvent(gamma, y[sl])
        return out

    prod = ResolventFamily(space, "product", evaluator, scale_domain=scale_domain)
    prod.factors = families
    prod.slices = slices
    return prod
