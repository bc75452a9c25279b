"""Gluing relations, closure classes, chart class keys, boundary images."""

import pytest

from artifact import charts, curves, quotient, strata, trees
from artifact.charts import ChartDomainError
from artifact.curves import (
    cross_ratio_q,
    in_D_tilde,
    in_divisor,
    moduli_key,
    sample_curve,
)
from artifact.exactfield import GaussRat, ProjPoint, pp
from artifact.quotient import (
    QuotientError,
    add_mark,
    base_of,
    bubble_at_mark,
    class_key,
    equivalent,
    excluded_labels,
    fiber_samples,
    mark_at_node,
    relation_closure,
    relation_labels,
    verify_injectivity,
    y_membership,
)


def tree_with_split(l, rho, real=False):
    rho = frozenset(rho)
    for t in trees.enumerate_trees(l, real=real):
        if len(t.edges) == 1 and strata.stratum_edge(t, rho) is not None:
            return t
    raise AssertionError("no such tree")


RHO = frozenset({1, 2})


@pytest.fixture(scope="module")
def boundary_base():
    t = tree_with_split(4, RHO)
    return sample_curve(t, 30, ("ybase",))


@pytest.fixture(scope="module")
def engineered_triple(boundary_base):
    c = boundary_base
    e = strata.stratum_edge(c.tree, RHO)
    node_v = [v for v in range(len(c.tree.adjacency()))
              if ("m", 3) in c.coords[v]][0]
    chain = mark_at_node(c, e, pp(7))
    generic = add_mark(c, node_v, pp(9))
    bubble = bubble_at_mark(c, 3, pp(5))
    return chain, generic, bubble


class TestBuilders:
    def test_all_valid_and_same_base(self, boundary_base, engineered_triple):
        for x in engineered_triple:
            assert x.validate() == []
            assert moduli_key(base_of(x)) == moduli_key(boundary_base)

    def test_memberships(self, engineered_triple):
        chain, generic, bubble = engineered_triple
        # chain: the new mark sits at the node, so both splits appear
        assert in_divisor(chain, RHO)
        assert in_divisor(chain, RHO | {5})
        # generic: only the original node
        assert in_divisor(generic, RHO)
        assert not in_divisor(generic, RHO | {5})
        # bubble at mark 3: original node plus the {3,5}-bubble
        assert in_divisor(bubble, RHO)
        assert in_divisor(bubble, frozenset({1, 2, 4}))
        assert not in_divisor(bubble, RHO | {5})


class TestYIdentities:
    def test_y_membership_flags(self, engineered_triple):
        chain, generic, bubble = engineered_triple
        assert y_membership(chain, RHO, "0") and y_membership(chain, RHO, "+")
        assert y_membership(generic, RHO, "0") and not y_membership(generic, RHO, "+")
        assert y_membership(bubble, RHO, "0") and not y_membership(bubble, RHO, "+")

    def test_intersection_characterization(self, engineered_triple):
        # a point of the boundary image lies in the deeper piece iff its
        # closure class contains both a node-chain and per-i bubble
        # representatives; here the three representatives are equivalent
        chain, generic, bubble = engineered_triple
        assert equivalent(chain, generic, RHO)
        assert equivalent(chain, bubble, RHO)
        assert equivalent(generic, bubble, RHO)
        # bubble at i=3 realizes membership in the i-slice divisor
        assert in_divisor(bubble, frozenset({1, 2, 4}))

    def test_class_keys_agree(self, engineered_triple):
        chain, generic, bubble = engineered_triple
        k = [class_key(x, ()) for x in engineered_triple]
        assert k[0] == k[1] == k[2]

    def test_deep_cut_excludes_fiber(self, engineered_triple):
        # at the deepest cut the fiber over this boundary base is excluded
        rho_max = max((lab.rho_set for lab in strata.build_a_ell(4)),
                      key=strata.order_key)
        for x in engineered_triple:
            with pytest.raises(ChartDomainError):
                class_key(x, rho_max)


class TestRelationClosure:
    def test_equivalence_needs_shared_base(self):
        t = tree_with_split(4, RHO)
        a = sample_curve(t, 30, ("cl", 0))
        b = sample_curve(t, 30, ("cl", 1))
        ea = strata.stratum_edge(a.tree, RHO)
        eb = strata.stratum_edge(b.tree, RHO)
        xa = mark_at_node(a, ea, pp(7))
        xb = mark_at_node(b, eb, pp(7))
        if moduli_key(base_of(xa)) != moduli_key(base_of(xb)):
            assert not equivalent(xa, xb, RHO)

    def test_closure_partitions(self, boundary_base):
        import random

        rng = random.Random("closure")
        samples = fiber_samples(boundary_base, rng)
        classes = relation_closure(samples, ())
        seen = sorted(i for cl in classes for i in cl)
        assert seen == list(range(len(samples)))

    def test_relation_labels_ordering(self):
        labs = relation_labels(4, RHO)
        key0 = strata.order_key(RHO)
        assert all(strata.order_key(r) > key0 for r in labs)


class TestInjectivity:
    def test_complex_l4_smooth_tree(self):
        t = [x for x in trees.enumerate_trees(4) if not x.edges][0]
        rep = verify_injectivity(t, (), n_samples=40, seed=11)
        assert rep["key_collisions_across_classes"] == 0
        assert rep["intra_class_key_splits"] == 0
        assert rep["samples"] >= 40

    def test_complex_l4_nodal_with_cut(self):
        t = tree_with_split(4, RHO)
        rep = verify_injectivity(t, RHO, n_samples=40, seed=12)
        assert rep["key_collisions_across_classes"] == 0
        assert rep["intra_class_key_splits"] == 0

    def test_real_l2(self):
        t = trees.enumerate_trees(2, real=True)[0]
        rep = verify_injectivity(t, (), n_samples=40, seed=13, real=True)
        assert rep["key_collisions_across_classes"] == 0
        assert rep["intra_class_key_splits"] == 0

    def test_real_flag_mismatch(self):
        t = trees.enumerate_trees(4)[0]
        with pytest.raises(QuotientError):
            verify_injectivity(t, (), real=True)


class TestExcludedLabels:
    def test_worked_example(self):
        # on the {1,2}|{3,4} tree at the deepest cut, the label {1,2}
        # is excluded at the far-side vertex
        t = tree_with_split(4, RHO)
        rho_max = max((lab.rho_set for lab in strata.build_a_ell(4)),
                      key=strata.order_key)
        vp = charts.v_gamma(t, rho_max)[0]
        labels = excluded_labels(t, vp, rho_max)
        assert any(r in (RHO, frozenset({3, 4})) for r in labels)


class TestRealDTilde:
    def test_double_prime_union(self):
        # membership in the double-prime locus is the union of the plain
        # and minus-mark-extended divisors
        for idx, t in enumerate(trees.enumerate_trees(3, real=True)):
            c = sample_curve(t, 30, ("dp", idx))
            for lab in strata.build_a_ell_real(2)[0]:
                rho = lab.rho_set
                lhs = in_D_tilde(c, rho, '"')
                rhs = in_divisor(c, rho) or in_divisor(c, rho | {"3-"})
                assert lhs == rhs
