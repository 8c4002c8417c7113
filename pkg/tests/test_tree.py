import math

import numpy as np
import pytest

import fixtures as F
from forestdsh import model, solver
from forestdsh import tree as tree_mod
from forestdsh.errors import EmptyBucketSet, NodeBudgetExceeded, ValidationError
from forestdsh.tree import NodeStatus


DIMS = model.ProblemDims(n=512, m=512, s=200)


@pytest.fixture(scope="module")
def setup():
    jd = F.jd_example1()
    params = solver.solve_params(jd, DIMS)
    tree = tree_mod.build_tree(jd, params, DIMS, c1=0.5, c2=0.5, c3=0.5)
    return jd, params, tree


def ancestors(tree, nid):
    node = tree.nodes[nid]
    while node.parent is not None:
        yield node.parent
        node = tree.nodes[node.parent]


class TestBuild:
    def test_threshold_rule_holds_at_every_node(self, setup):
        _jd, _params, tree = setup
        lc1, lc2, lc3 = tree.log_c
        log_n = math.log(tree.n)
        t_accept = lc1 + (1.0 + tree.delta - tree.lam) * log_n
        t_pa = lc2 + (1.0 - tree.lam) * log_n
        t_pb = lc3 + (tree.delta - tree.lam) * log_n
        for nd in tree.nodes:
            ratio = nd.log_phi - nd.log_psi
            if nd.status is NodeStatus.BUCKET:
                assert ratio >= t_accept
            elif nd.status is NodeStatus.INTERNAL:
                assert ratio < t_accept
                assert nd.log_phi - nd.log_psi_a > t_pa
                assert nd.log_phi - nd.log_psi_b > t_pb

    def test_recursion_consistency(self, setup):
        jd, _params, tree = setup
        for nd in tree.nodes:
            if nd.parent is None:
                assert nd.log_phi == nd.log_psi_a == nd.log_psi_b == 0.0
                continue
            parent = tree.nodes[nd.parent]
            ai, bj = nd.edge
            assert nd.log_phi == pytest.approx(parent.log_phi + jd.logp[ai, bj])
            assert nd.log_psi_a == pytest.approx(parent.log_psi_a + jd.logpa[ai])
            assert nd.log_psi_b == pytest.approx(parent.log_psi_b + jd.logpb[bj])
            assert nd.depth == parent.depth + 1

    def test_buckets_form_antichain(self, setup):
        _jd, _params, tree = setup
        bucket_set = set(tree.buckets)
        for b in tree.buckets:
            assert bucket_set.isdisjoint(ancestors(tree, b))

    def test_buckets_have_no_children(self, setup):
        _jd, _params, tree = setup
        for b in tree.buckets:
            assert not tree.nodes[b].children

    def test_prefix_reconstruction(self, setup):
        _jd, _params, tree = setup
        b = tree.buckets[0]
        sa, sb = tree.seq_a(b), tree.seq_b(b)
        assert len(sa) == len(sb) == tree.nodes[b].depth

    def test_max_depth_caps_buckets(self, setup):
        jd, params, _ = setup
        tree = tree_mod.build_tree(jd, params, DIMS, c1=0.5, c2=0.5, c3=0.5, max_depth=5)
        assert tree.max_bucket_depth <= 5

    def test_node_budget(self, setup):
        jd, params, _ = setup
        with pytest.raises(NodeBudgetExceeded):
            tree_mod.build_tree(jd, params, DIMS, c1=0.5, c2=0.5, c3=0.5, max_nodes=10)

    def test_empty_bucket_set(self, setup):
        jd, params, _ = setup
        # Huge prune constants kill the root before anything can be accepted.
        with pytest.raises(EmptyBucketSet):
            tree_mod.build_tree(jd, params, DIMS, c1=1e9, c2=1e6, c3=1e6)

    def test_nonpositive_threshold_rejected(self, setup):
        jd, params, _ = setup
        with pytest.raises(ValidationError):
            tree_mod.build_tree(jd, params, DIMS, c1=-1.0, c2=0.5, c3=0.5)


class TestFamilyStats:
    def test_alpha_is_bucket_phi_sum(self, setup):
        _jd, _params, tree = setup
        st = tree_mod.family_stats(tree, 0.9)
        assert st.alpha == pytest.approx(
            sum(math.exp(tree.nodes[b].log_phi) for b in tree.buckets)
        )
        assert st.beta == pytest.approx(
            sum(math.exp(tree.nodes[b].log_psi) for b in tree.buckets)
        )

    def test_ordering(self, setup):
        _jd, _params, tree = setup
        st = tree_mod.family_stats(tree, 0.9)
        assert 0 < st.beta < st.alpha <= 1.0
        assert st.beta <= st.gamma_a * st.gamma_b * len(tree.buckets)

    def test_band_count_reaches_target(self, setup):
        _jd, _params, tree = setup
        for tp in (0.5, 0.9, 0.99):
            st = tree_mod.family_stats(tree, tp)
            assert st.predicted_tp >= tp - 1e-9
            if st.n_bands > 1:
                assert 1.0 - (1.0 - st.alpha) ** (st.n_bands - 1) < tp + st.alpha

    def test_invalid_target(self, setup):
        _jd, _params, tree = setup
        with pytest.raises(ValidationError):
            tree_mod.family_stats(tree, 1.0)


class TestMonteCarlo:
    def test_estimates_match_exact_sums(self, setup):
        jd, _params, tree = setup
        st = tree_mod.family_stats(tree, 0.9)
        n_samples = 20_000
        a_hat, b_hat, ga_hat, gb_hat = tree_mod.estimate_family_stats(
            tree, jd, n_samples, seed=11
        )
        for hat, exact in ((a_hat, st.alpha), (b_hat, st.beta)):
            se = math.sqrt(max(exact * (1 - exact), 1e-12) / n_samples)
            assert abs(hat - exact) <= 3 * se + 1e-9
        # Membership counts are not Bernoulli; allow a loose relative check.
        assert ga_hat == pytest.approx(st.gamma_a, rel=0.2)
        assert gb_hat == pytest.approx(st.gamma_b, rel=0.2)


class TestComplexityReport:
    def test_positive_and_monotone(self, setup):
        _jd, _params, tree = setup
        st = tree_mod.family_stats(tree, 0.9)
        base = tree_mod.complexity_report(tree, st, DIMS)
        assert base > 0
        doubled = tree_mod.complexity_report(tree, st, DIMS, (2.0, 2.0, 2.0, 2.0))
        assert doubled == pytest.approx(2 * base)


class TestSerialization:
    def test_roundtrip(self, setup, tmp_path):
        _jd, _params, tree = setup
        path = tmp_path / "tree.json"
        tree_mod.save_tree(tree, path)
        back = tree_mod.load_tree(path)
        assert back.buckets == tree.buckets
        assert back.log_c == tree.log_c
        assert len(back.nodes) == len(tree.nodes)
        for a, b in zip(tree.nodes, back.nodes):
            assert (a.parent, a.edge, a.depth, a.status) == (b.parent, b.edge, b.depth, b.status)
            assert a.log_phi == pytest.approx(b.log_phi)
        st_a = tree_mod.family_stats(tree, 0.9)
        st_b = tree_mod.family_stats(back, 0.9)
        assert st_a == st_b
