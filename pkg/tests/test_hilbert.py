"""Spaces, adjoints, norms, projectors, stacking."""

import numpy as np
import pytest

from rescomp.errors import DimensionMismatchError, ValidationError
from rescomp.hilbert import (
    LinearMap,
    Space,
    SubspaceProjector,
    identity_map,
    product_space,
    stack,
)
from rescomp.properties import (
    suite_adjoint_identity,
    suite_projector_firm,
    suite_stack_norm,
)


def rng():
    return np.random.default_rng(42)


class TestSpace:
    def test_euclidean_inner(self):
        s = Space(2)
        assert s.inner([3.0, 4.0], [3.0, 4.0]) == 25.0

    def test_weighted_inner_direct_sum(self):
        s = Space(2, [0.5, 0.5])
        assert s.inner([1.0, 1.0], [1.0, 1.0]) == pytest.approx(1.0, abs=1e-15)

    def test_inner_with_zero(self):
        s = Space(3, [2.0, 0.1, 1.3])
        x = np.array([4.0, -1.0, 0.3])
        assert s.inner(x, np.zeros(3)) == 0.0

    def test_dimension_mismatch(self):
        s = Space(2)
        with pytest.raises(DimensionMismatchError):
            s.inner([1.0, 2.0, 3.0], [1.0, 2.0])

    def test_rejects_bad_weights(self):
        with pytest.raises(ValidationError):
            Space(2, [1.0, 0.0])
        with pytest.raises(ValidationError):
            Space(2, [1.0, -1.0])

    def test_rejects_nonfinite_vector(self):
        s = Space(2)
        with pytest.raises(ValidationError):
            s.validate([np.nan, 0.0])

    def test_inner_symmetric_positive_definite(self):
        g = rng()
        for _ in range(50):
            dim = int(g.integers(1, 6))
            s = Space(dim, g.uniform(0.2, 3.0, size=dim))
            x, y = g.standard_normal(dim), g.standard_normal(dim)
            assert s.inner(x, y) == pytest.approx(s.inner(y, x), rel=1e-12)
            if np.linalg.norm(x) > 1e-9:
                assert s.inner(x, x) > 0.0


class TestAdjoint:
    def test_weighted_stacking_adjoint(self):
        # H = R^1, G = R^2 with weights (1/2, 1/2), L x = (x, x)
        H, G = Space(1), Space(2, [0.5, 0.5])
        L = LinearMap(H, G, [[1.0], [1.0]])
        assert L.adjoint_apply([2.0, 6.0]) == pytest.approx([4.0])

    def test_identity_self_adjoint(self):
        s = Space(3, [1.5, 0.5, 2.0])
        L = identity_map(s)
        y = np.array([1.0, -2.0, 0.5])
        assert L.adjoint_apply(y) == pytest.approx(y)

    def test_plain_transpose_in_euclidean_metric(self):
        s = Space(2)
        L = LinearMap(s, s, [[0.0, 1.0], [0.0, 0.0]])
        a, b = 3.0, -7.0
        assert L.adjoint_apply([a, b]) == pytest.approx([0.0, a])

    def test_adjoint_identity_many_random_triples(self):
        res = suite_adjoint_identity(np.random.default_rng([7, 0]), 1000)
        assert res.passed, res.line()


class TestOpNorm:
    def test_diagonal(self):
        s = Space(2)
        L = LinearMap(s, s, np.diag([0.6, 0.8]))
        assert L.op_norm() == pytest.approx(0.8, abs=1e-11)

    def test_stacking_isometry_has_norm_one(self):
        H = Space(1)
        L = stack([identity_map(H)] * 3, [0.2, 0.3, 0.5])
        assert L.op_norm() == pytest.approx(1.0, abs=1e-11)

    def test_zero_map(self):
        s = Space(2)
        L = LinearMap(s, s, np.zeros((2, 2)))
        assert L.op_norm() == 0.0

    def test_norm_dominates_sampled_ratios(self):
        g = rng()
        for _ in range(20):
            H = Space(3, g.uniform(0.3, 2.0, size=3))
            G = Space(2, g.uniform(0.3, 2.0, size=2))
            L = LinearMap(H, G, g.standard_normal((2, 3)))
            for _ in range(50):
                x = g.standard_normal(3)
                if H.norm(x) > 1e-9:
                    ratio = G.norm(L.apply(x)) / H.norm(x)
                    assert L.norm_estimate >= ratio * (1 - 1e-9)


class TestProjector:
    def test_projection_onto_diagonal(self):
        s = Space(2)
        P = SubspaceProjector(s, [[1.0, 1.0]])
        assert P.apply([2.0, 0.0]) == pytest.approx([1.0, 1.0])

    def test_idempotent_on_member(self):
        s = Space(2)
        P = SubspaceProjector(s, [[1.0, 1.0]])
        x = np.array([3.0, 3.0])
        assert P.apply(x) == pytest.approx(x)

    def test_full_space(self):
        s = Space(3, [2.0, 1.0, 0.5])
        P = SubspaceProjector.full(s)
        x = np.array([1.0, -2.0, 5.0])
        assert P.apply(x) == pytest.approx(x)
        assert P.is_full()

    def test_residual_metric_orthogonal_to_basis(self):
        g = rng()
        for _ in range(30):
            dim = int(g.integers(2, 6))
            s = Space(dim, g.uniform(0.3, 2.0, size=dim))
            k = int(g.integers(1, dim))
            P = SubspaceProjector(s, [g.standard_normal(dim) for _ in range(k)])
            x = g.standard_normal(dim)
            r = x - P.apply(x)
            for b in P.basis:
                assert abs(s.inner(r, b)) <= 1e-12 * (1 + s.norm(x))

    def test_dependent_spanning_vectors_are_dropped(self):
        s = Space(3)
        spanning = [[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
        P = SubspaceProjector(s, spanning)
        assert P.rank == 2
        for v in spanning:  # the range still covers every input vector
            assert P.apply(v) == pytest.approx(v)

    def test_rejects_zero_spanning_set(self):
        with pytest.raises(ValidationError):
            SubspaceProjector(Space(2), [[0.0, 0.0]])

    def test_firmly_nonexpansive(self):
        res = suite_projector_firm(np.random.default_rng([7, 1]), 500)
        assert res.passed, res.line()

    def test_double_projection_idempotent(self):
        g = rng()
        s = Space(4, g.uniform(0.3, 2.0, size=4))
        P = SubspaceProjector(s, [g.standard_normal(4) for _ in range(2)])
        x = g.standard_normal(4)
        once, twice = P.apply(x), P.apply(P.apply(x))
        assert s.norm(once - twice) <= 1e-12

    def test_self_adjoint_in_metric(self):
        g = rng()
        for _ in range(20):
            s = Space(3, g.uniform(0.3, 2.0, size=3))
            P = SubspaceProjector(s, [g.standard_normal(3) for _ in range(2)])
            x, y = g.standard_normal(3), g.standard_normal(3)
            assert s.inner(P.apply(x), y) == pytest.approx(s.inner(x, P.apply(y)), abs=1e-11)


class TestStack:
    def test_two_identities_average_adjoint(self):
        H = Space(1)
        L = stack([identity_map(H), identity_map(H)], [0.5, 0.5])
        assert L.adjoint_apply([1.0, 3.0]) == pytest.approx([2.0])

    def test_single_map_roundtrip(self):
        H, G = Space(2), Space(3)
        base = LinearMap(H, G, rng().standard_normal((3, 2)))
        L = stack([base], [1.0])
        x = np.array([1.0, -1.0])
        assert L.apply(x) == pytest.approx(base.apply(x))

    def test_coordinate_rows_norm(self):
        H = Space(2)
        L1 = LinearMap(H, Space(1), [[1.0, 0.0]])
        L2 = LinearMap(H, Space(1), [[0.0, 1.0]])
        L = stack([L1, L2], [0.5, 0.5])
        assert L.op_norm() == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-11)

    def test_rejects_empty_and_bad_weights(self):
        H = Space(1)
        with pytest.raises(ValidationError):
            stack([], [])
        with pytest.raises(ValidationError):
            stack([identity_map(H)], [-1.0])

    def test_norm_bound(self):
        res = suite_stack_norm(np.random.default_rng([7, 2]), 300)
        assert res.passed, res.line()


class TestProductSpace:
    def test_weights_multiply_block_metrics(self):
        s = product_space([Space(1, [2.0]), Space(2)], [0.5, 3.0])
        assert s.weights == pytest.approx([1.0, 3.0, 3.0])

    def test_compose_chains_maps(self):
        g = rng()
        H, G, K = Space(2), Space(3), Space(2)
        Q = LinearMap(H, G, g.standard_normal((3, 2)))
        L = LinearMap(G, K, g.standard_normal((2, 3)))
        x = g.standard_normal(2)
        assert L.compose(Q).apply(x) == pytest.approx(L.apply(Q.apply(x)))
