import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mirror_transfer.hamiltonian import (
    CHAIN,
    JUNCTION,
    WIRE,
    ChainSpec,
    DisorderSpec,
    GraphError,
    SystemGraph,
    WireSpec,
    apply_disorder,
    attach_wire,
    build_engineered_chain,
    build_uniform_chain,
    build_wire,
    disorder_factors,
    flip_wire_hoppings,
    min_wire_length,
)

from oracles import chain_matrix, combined_matrix


def hoppings(graph, tag=None):
    return {(e.a, e.b): e.hopping for e in graph.edges if tag is None or e.tag == tag}


def scheme_b_graph(N=5, L=40, sigma=1.5):
    return attach_wire(build_uniform_chain(ChainSpec(N, 1.0, sigma)), WireSpec(L, 2.0, 2.0))


class TestEngineeredChain:
    def test_n1(self):
        g = build_engineered_chain(ChainSpec(1, 1.0, engineered=True))
        assert g.num_sites == 3
        assert hoppings(g) == pytest.approx({(0, 1): math.sqrt(2), (1, 2): math.sqrt(2)})
        assert g.onsite == (0.0, 0.0, 0.0)

    def test_n5_edge_hopping(self):
        g = build_engineered_chain(ChainSpec(5, 1.0, engineered=True))
        assert g.edges[0].hopping == pytest.approx(math.sqrt(10))
        assert g.edges[0].hopping == pytest.approx(3.1623, abs=1e-4)
        assert all(e.tag == CHAIN for e in g.edges)

    def test_labels(self):
        g = build_engineered_chain(ChainSpec(5, 1.0, engineered=True))
        assert g.index(-5) == 0 and g.index(0) == 5 and g.index(("S", 5)) == 10

    @given(st.integers(1, 40), st.floats(0.1, 5))
    def test_mirror_symmetric_profile(self, N, delta):
        g = build_engineered_chain(ChainSpec(N, delta, engineered=True))
        h = [e.hopping for e in g.edges]
        assert h == pytest.approx(h[::-1], rel=1e-14)

    def test_matches_reference_matrix(self):
        g = build_engineered_chain(ChainSpec(4, 0.7, engineered=True))
        np.testing.assert_allclose(g.matrix, chain_matrix(4, 0.7, engineered=True), atol=1e-14)

    @pytest.mark.parametrize("spec", [
        ChainSpec(0, 1.0, engineered=True),
        ChainSpec(3, 0.0, engineered=True),
        ChainSpec(3, -1.0, engineered=True),
    ])
    def test_rejects(self, spec):
        with pytest.raises(GraphError):
            build_engineered_chain(spec)

    def test_engineered_forbids_sigma(self):
        with pytest.raises(GraphError):
            ChainSpec(3, 1.0, sigma=0.5, engineered=True)


class TestUniformChain:
    def test_staircase_n1(self):
        g = build_uniform_chain(ChainSpec(1, 1.0, 1.5))
        assert g.onsite == (-1.5, 0.0, 1.5)
        assert [e.hopping for e in g.edges] == [1.0, 1.0]

    def test_sigma_zero(self):
        g = build_uniform_chain(ChainSpec(4, 1.0, 0.0))
        assert set(g.onsite) == {0.0}

    def test_eleven_sites(self):
        g = build_uniform_chain(ChainSpec(5, 1.0, 1.5))
        assert g.num_sites == 11 and len(g.edges) == 10

    def test_rejects_n0(self):
        with pytest.raises(GraphError):
            build_uniform_chain(ChainSpec(0, 1.0, 1.0))


class TestAttachWire:
    def test_counts(self):
        g = scheme_b_graph(L=400)
        assert g.num_sites == 411
        tags = [e.tag for e in g.edges]
        assert tags.count(CHAIN) == 10 and tags.count(WIRE) == 399 and tags.count(JUNCTION) == 1

    def test_junction_and_wire_layout(self):
        g = scheme_b_graph(L=10)
        (j,) = g.edges_with(JUNCTION)
        assert {j.a, j.b} == {g.index(0), g.index(("C", 1))}
        assert j.hopping == 2.0
        assert all(g.onsite[i] == 0.0 for i in g.region_indices("C"))

    def test_matches_reference_matrix(self):
        g = scheme_b_graph(L=30)
        np.testing.assert_array_equal(g.matrix, combined_matrix(5, 1.0, 1.5, 2.0, 2.0, 30))

    def test_symmetric(self):
        h = scheme_b_graph(L=50).matrix
        assert np.array_equal(h, h.T)

    def test_isolated_wire_spectrum(self):
        L, kappa = 12, 1.3
        w = np.linalg.eigvalsh(build_wire(L, kappa).matrix)
        expected = np.sort(2 * kappa * np.cos(np.arange(1, L + 1) * np.pi / (L + 1)))
        np.testing.assert_allclose(w, expected, atol=1e-12)

    def test_even_chain_rejected(self):
        two = SystemGraph(2, [0, 0], [], {("S", 0): 0, ("S", 1): 1})
        with pytest.raises(GraphError):
            attach_wire(two, WireSpec(5, 1.0, 1.0))

    def test_truncation_bound(self):
        chain = build_uniform_chain(ChainSpec(5, 1.0, 1.5))
        assert min_wire_length(2.0, 80.0) == 240
        attach_wire(chain, WireSpec(240, 2.0, 2.0), t_total=80.0)
        with pytest.raises(GraphError, match="too short"):
            attach_wire(chain, WireSpec(239, 2.0, 2.0), t_total=80.0)

    @pytest.mark.parametrize("kw", [dict(L=1), dict(kappa=0.0), dict(g=0.0)])
    def test_wirespec_invariants(self, kw):
        args = dict(L=10, kappa=2.0, g=2.0) | kw
        with pytest.raises(GraphError):
            WireSpec(**args)


class TestDisorder:
    def test_zero_is_identity(self):
        g = scheme_b_graph()
        assert apply_disorder(g, DisorderSpec(0.0, 3, {CHAIN, WIRE})) == g

    def test_empty_scope_is_identity(self):
        g = scheme_b_graph()
        assert apply_disorder(g, DisorderSpec(0.2, 3, frozenset())) == g

    def test_deterministic(self):
        g = scheme_b_graph()
        spec = DisorderSpec(0.05, 1234, {CHAIN, WIRE, JUNCTION})
        assert apply_disorder(g, spec) == apply_disorder(g, spec)
        assert apply_disorder(g, spec) != apply_disorder(g, DisorderSpec(0.05, 1235, spec.scope))

    def test_factor_range(self):
        g = scheme_b_graph(L=200)
        d = apply_disorder(g, DisorderSpec(0.03, 7, {CHAIN, WIRE, JUNCTION}))
        ratios = np.array([e2.hopping / e1.hopping for e1, e2 in zip(g.edges, d.edges)])
        assert np.all((ratios > 0.97) & (ratios < 1.03))
        assert np.any(ratios != 1.0)

    def test_scope_and_onsite(self):
        g = scheme_b_graph()
        d = apply_disorder(g, DisorderSpec(0.1, 5, {CHAIN}))
        assert d.onsite == g.onsite
        assert hoppings(d, WIRE) == hoppings(g, WIRE)
        assert hoppings(d, JUNCTION) == hoppings(g, JUNCTION)
        assert hoppings(d, CHAIN) != hoppings(g, CHAIN)

    def test_scope_toggle_keeps_draws(self):
        g = scheme_b_graph()
        chain_only = apply_disorder(g, DisorderSpec(0.1, 5, {CHAIN}))
        everything = apply_disorder(g, DisorderSpec(0.1, 5, {CHAIN, WIRE, JUNCTION}))
        assert hoppings(chain_only, CHAIN) == hoppings(everything, CHAIN)

    @pytest.mark.parametrize("delta", [-0.1, 1.0, 1.2])
    def test_strength_range(self, delta):
        with pytest.raises(GraphError):
            DisorderSpec(delta, 0)

    def test_factor_statistics(self):
        n, delta = 100_000, 0.03
        f = disorder_factors(n, delta, seed=99)
        u = f - 1
        # mean of U(-d, d) has std d / sqrt(3 n)
        assert abs(u.mean()) < 3 * delta / math.sqrt(3 * n)
        # sample variance has std sqrt(4 / (45 n)) d^2
        assert abs(u.var() - delta**2 / 3) < 3 * math.sqrt(4 / (45 * n)) * delta**2
        assert np.abs(u).max() <= delta
        assert np.abs(u).max() > delta * (1 - 10 / n)


class TestFlip:
    def test_involution(self):
        g = apply_disorder(scheme_b_graph(), DisorderSpec(0.05, 1, {CHAIN, WIRE, JUNCTION}))
        assert flip_wire_hoppings(flip_wire_hoppings(g)) == g

    def test_only_wire_changes(self):
        g = apply_disorder(scheme_b_graph(), DisorderSpec(0.05, 1, {CHAIN, WIRE, JUNCTION}))
        f = flip_wire_hoppings(g)
        assert hoppings(f, CHAIN) == hoppings(g, CHAIN)
        assert hoppings(f, JUNCTION) == hoppings(g, JUNCTION)
        assert f.onsite == g.onsite
        for (k, v), (k2, v2) in zip(hoppings(g, WIRE).items(), hoppings(f, WIRE).items()):
            assert k == k2 and v2 == -v

    def test_bare_chain_rejected(self):
        with pytest.raises(GraphError):
            flip_wire_hoppings(build_uniform_chain(ChainSpec(3, 1.0, 1.0)))

    @settings(max_examples=25)
    @given(st.integers(1, 8), st.integers(2, 30), st.floats(0, 0.5), st.integers(0, 2**32))
    def test_involution_property(self, N, L, delta, seed):
        g = scheme_b_graph(N=N, L=L)
        g = apply_disorder(g, DisorderSpec(delta, seed, {CHAIN, WIRE, JUNCTION}))
        assert flip_wire_hoppings(flip_wire_hoppings(g)) == g
        h = flip_wire_hoppings(g).matrix
        assert np.array_equal(h, h.T)


class TestGraphInvariants:
    def test_self_edge(self):
        from mirror_transfer.hamiltonian import Edge

        with pytest.raises(GraphError):
            SystemGraph(2, [0, 0], [Edge(0, 0, 1.0, CHAIN)])

    def test_duplicate_edge(self):
        from mirror_transfer.hamiltonian import Edge

        with pytest.raises(GraphError):
            SystemGraph(2, [0, 0], [Edge(0, 1, 1.0, CHAIN), Edge(1, 0, 1.0, CHAIN)])

    def test_bad_tag(self):
        from mirror_transfer.hamiltonian import Edge

        with pytest.raises(GraphError):
            SystemGraph(2, [0, 0], [Edge(0, 1, 1.0, "bridge")])

    def test_json_round_trip(self):
        g = apply_disorder(scheme_b_graph(L=20), DisorderSpec(0.05, 2, {CHAIN, WIRE}))
        doc = g.to_dict()
        assert set(doc) == {"num_sites", "onsite", "edges", "labels"}
        assert doc["labels"]["S-5"] == 0 and doc["labels"]["C1"] == 11
        assert SystemGraph.from_json(g.to_json()) == g

    @given(st.integers(1, 20), st.floats(0.1, 3), st.floats(0, 4))
    def test_matrix_symmetric(self, N, delta, sigma):
        for g in (build_uniform_chain(ChainSpec(N, delta, sigma)),
                  build_engineered_chain(ChainSpec(N, delta, engineered=True))):
            assert np.array_equal(g.matrix, g.matrix.T)
