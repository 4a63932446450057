"""
Unit tests for permutation-switching equivalence
Tests automorphism generation, switching solutions, witnesses, canonical
forms and the fast criterion for bipartite eliminations
"""

import unittest
import os
import random
from unittest.mock import patch

# Add src directory to path for imports
import sys
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from catalog import make_hypermetric, make_pentagonal
from config import config
from cut_geometry import CapExceededError
from equivalence import (
    BudgetExceededError,
    EquivalenceError,
    EquivWitness,
    are_ps_equivalent,
    are_switching_equivalent,
    automorphism_count,
    automorphisms,
    bipartite_group,
    canonical_form,
    compose_witness,
    fast_equiv_bipartite,
    find_bipartite_witness,
    format_cycles,
    invert_witness,
    multipartite_parts,
    replay_witness,
    solve_switching,
)
from graph_core import (
    EliminationPlan,
    build_bipartite_layout,
    complete_graph,
    complete_multipartite_graph,
    cycle_graph,
)
from inequality_ops import Inequality, is_automorphism, make_triangle, normalize, permute, relabel, switch
from trielim import eliminate, eliminate_multistage


AB_LABELS = {'1': 'A_1', '2': 'A_2', '3': 'B_1', '4': 'B_2', '5': 'B_3'}


def example_pair():
    """The two K_{3,1,1,3} eliminations of the pentagonal inequality."""
    pent = make_pentagonal()
    target = complete_multipartite_graph([['1', '2', '3'], ['4'], ['5'], ['6', '7', '8']])
    edges = [('1', '2'), ('1', '3'), ('2', '3')]
    outputs = []
    for forms in (['uw.v', 'uv.w', 'uv.w'], ['wv.u', 'uv.w', 'uvw']):
        plan = EliminationPlan.for_edges(pent.graph, edges, ['6', '7', '8'], forms)
        outputs.append(eliminate(pent, pent.graph, target, plan).output)
    return outputs


class TestAutomorphisms(unittest.TestCase):
    """Test automorphism generation for complete multipartite graphs"""

    def test_parts(self):
        g = complete_multipartite_graph([['1', '2', '3'], ['4'], ['5'], ['6', '7', '8']])
        self.assertEqual(multipartite_parts(g),
                         [('1', '2', '3'), ('4',), ('5',), ('6', '7', '8')])
        self.assertEqual(len(multipartite_parts(complete_graph(4))), 4)
        with self.assertRaises(EquivalenceError):
            multipartite_parts(cycle_graph(5))

    def test_counts(self):
        """|Aut| = prod over part sizes s of c! (s!)^c"""
        g = complete_multipartite_graph([['1', '2', '3'], ['4'], ['5'], ['6', '7', '8']])
        self.assertEqual(automorphism_count(multipartite_parts(g)), 144)
        self.assertEqual(automorphism_count(multipartite_parts(complete_graph(5))), 120)
        k54 = build_bipartite_layout(2, 3).target
        self.assertEqual(automorphism_count(multipartite_parts(k54)), 2880)

    def test_generated_group(self):
        """Identity first, no repeats, every element preserves edges"""
        g = complete_multipartite_graph([['1', '2'], ['3', '4']])
        group = list(automorphisms(g))
        self.assertEqual(len(group), 8)
        self.assertTrue(all(sigma[v] == v for v in g.nodes for sigma in group[:1]))
        self.assertEqual(len({tuple(sorted(s.items())) for s in group}), 8)
        self.assertTrue(all(is_automorphism(g, s) for s in group))
        self.assertEqual(len(list(automorphisms(complete_graph(4)))), 24)

    def test_bipartite_group(self):
        nodes = ['1', '2', '3', '4', '5']
        self.assertEqual(len(list(bipartite_group(nodes, 2, 3))), 12)
        self.assertEqual(len(list(bipartite_group(nodes[:4], 2, 2))), 8)
        for sigma in bipartite_group(nodes, 2, 3):
            self.assertEqual({sigma['1'], sigma['2']}, {'1', '2'})


class TestSwitchingSolver(unittest.TestCase):
    """Test the switching solver"""

    def setUp(self):
        self.pent = make_pentagonal()

    def test_recovers_subset(self):
        """The smaller side of the switching is returned"""
        target = switch(self.pent, {'1', '3'})
        self.assertEqual(solve_switching(self.pent, target), frozenset({'1', '3'}))
        target = switch(self.pent, {'2', '4', '5'})
        self.assertEqual(solve_switching(self.pent, target), frozenset({'1', '3'}))
        self.assertEqual(solve_switching(self.pent, self.pent), frozenset())

    def test_no_solution(self):
        tri = make_triangle(self.pent.graph, '1', '2', '3')
        self.assertIsNone(solve_switching(self.pent, tri))
        flipped = Inequality.build(self.pent.graph, {('1', '2'): -1, ('1', '3'): -1,
                                                     ('2', '3'): -1}, 0)
        self.assertIsNone(solve_switching(tri, flipped))

    def test_rhs_must_match(self):
        other = Inequality.build(self.pent.graph, self.pent.as_dict(), 1)
        self.assertIsNone(solve_switching(self.pent, other))

    def test_example_pair(self):
        first, second = example_pair()
        self.assertEqual(are_switching_equivalent(first, second), (True, frozenset({'6', '8'})))


class TestPSEquivalence(unittest.TestCase):
    """Test the exhaustive orbit search"""

    def setUp(self):
        self.pent = make_pentagonal()

    def test_example_pair_witness(self):
        first, second = example_pair()
        equivalent, witness = are_ps_equivalent(first, second)
        self.assertTrue(equivalent)
        self.assertEqual(str(witness), 'sigma=() S={6,8}')

    def test_not_equivalent(self):
        tri = make_triangle(self.pent.graph, '1', '2', '3')
        self.assertEqual(are_ps_equivalent(self.pent, tri), (False, None))
        self.assertEqual(are_ps_equivalent(self.pent, tri, verify_short_circuit=True),
                         (False, None))

    def test_witness_replays(self):
        sigma = {'1': '3', '3': '5', '5': '1'}
        other = switch(permute(self.pent, sigma), {'2', '4'})
        equivalent, witness = are_ps_equivalent(self.pent, other)
        self.assertTrue(equivalent)
        self.assertEqual(replay_witness(normalize(self.pent), witness), normalize(other))

    def test_witness_algebra(self):
        """Inverse and composed witnesses replay correctly"""
        rng = random.Random(2)
        graph = self.pent.graph
        nodes = list(graph.nodes)
        q1 = self.pent
        q2 = switch(permute(q1, dict(zip(nodes, rng.sample(nodes, 5)))), {'1', '5'})
        q3 = switch(permute(q2, dict(zip(nodes, rng.sample(nodes, 5)))), {'2'})
        _, w12 = are_ps_equivalent(q1, q2)
        _, w23 = are_ps_equivalent(q2, q3)
        n1, n2, n3 = normalize(q1), normalize(q2), normalize(q3)
        self.assertEqual(replay_witness(n1, w12), n2)
        self.assertEqual(replay_witness(n2, invert_witness(w12, graph)), n1)
        self.assertEqual(replay_witness(n1, compose_witness(w12, w23, graph)), n3)

    def test_scaling_is_ignored(self):
        doubled = Inequality.build(self.pent.graph, {e: 2 * c for e, c in self.pent.coeffs}, 0)
        self.assertTrue(are_ps_equivalent(self.pent, doubled)[0])

    def test_errors(self):
        with self.assertRaises(EquivalenceError):
            are_ps_equivalent(self.pent, make_triangle(complete_graph(3), '1', '2', '3'))
        bound = Inequality.build(cycle_graph(5), {('1', '2'): 1}, 1)
        with self.assertRaises(EquivalenceError):
            are_ps_equivalent(bound, bound)
        with patch.object(config, 'EQUIV_BUDGET', 10):
            with self.assertRaises(BudgetExceededError):
                are_ps_equivalent(self.pent, self.pent)
            with self.assertRaises(BudgetExceededError):
                canonical_form(self.pent)

    def test_node_cap(self):
        with self.assertRaises(CapExceededError):
            are_ps_equivalent(self.pent, self.pent, max_nodes=4)
        with self.assertRaises(CapExceededError):
            canonical_form(self.pent, max_nodes=4)
        self.assertTrue(are_ps_equivalent(self.pent, self.pent, max_nodes=5)[0])


class TestWitnessFormatting(unittest.TestCase):
    """Test witness rendering"""

    def test_cycles(self):
        self.assertEqual(format_cycles({'1': '1', '2': '2'}), '()')
        self.assertEqual(format_cycles({'1': '2', '2': '3', '3': '1', '4': '4'}), '(1 2 3)')
        self.assertEqual(format_cycles({'1': '2', '2': '1', '3': '4', '4': '3'}), '(1 2)(3 4)')

    def test_str(self):
        witness = EquivWitness.from_mapping({'1': '2', '2': '1', '3': '3'}, {'3'})
        self.assertEqual(str(witness), 'sigma=(1 2) S={3}')
        self.assertEqual(witness.sigma, (('1', '2'), ('2', '1')))


class TestCanonicalForm(unittest.TestCase):
    """Test canonical orbit representatives"""

    def test_orbit_members_share_canonical_form(self):
        pent = make_pentagonal()
        reference = canonical_form(pent)
        self.assertEqual(canonical_form(switch(pent, {'2', '3'})), reference)
        self.assertEqual(canonical_form(permute(pent, {'4': '5', '5': '4'})), reference)
        self.assertTrue(are_ps_equivalent(pent, reference)[0])

    def test_different_orbits(self):
        pent = make_pentagonal()
        tri = make_triangle(pent.graph, '1', '2', '3')
        self.assertNotEqual(canonical_form(pent), canonical_form(tri))

    def test_example_pair(self):
        first, second = example_pair()
        self.assertEqual(canonical_form(first), canonical_form(second))


class TestFastBipartite(unittest.TestCase):
    """Test the fast criterion for K_n -> K_{r,s}"""

    def setUp(self):
        self.pent = make_pentagonal()

    def test_equivalent_within_groups(self):
        other = switch(permute(self.pent, {'3': '4', '4': '5', '5': '3'}), {'1', '4'})
        self.assertTrue(fast_equiv_bipartite(self.pent, other, 2, 3))
        witness = find_bipartite_witness(self.pent, other, 2, 3)
        self.assertEqual(replay_witness(normalize(self.pent), witness), normalize(other))

    def test_zero_node_side_matters(self):
        """A zero-lifted pentagonal cannot move its zero node from B to A"""
        zero_in_b = make_hypermetric((-1, -1, 1, 1, 1, 0))
        zero_in_a = make_hypermetric((0, -1, -1, 1, 1, 1))
        other_b = make_hypermetric((-1, -1, 1, 1, 0, 1))
        self.assertFalse(fast_equiv_bipartite(zero_in_b, zero_in_a, 2, 4))
        self.assertTrue(fast_equiv_bipartite(zero_in_b, other_b, 2, 4))

    def test_triangles_rejected(self):
        """Triangles are excluded: their lifts may be equivalent while the inputs are not"""
        k5 = self.pent.graph
        a = Inequality.build(k5, {('1', '2'): -1, ('1', '3'): -1, ('2', '3'): 1}, 0)
        b = Inequality.build(k5, {('1', '3'): -1, ('1', '4'): 1, ('3', '4'): -1}, 0)
        with self.assertRaises(EquivalenceError) as ctx:
            fast_equiv_bipartite(a, b, 2, 3)
        self.assertIn('triangulares', str(ctx.exception))

        layout = build_bipartite_layout(2, 3)
        lifted = [eliminate(relabel(x, AB_LABELS, 'K5'), layout.source, layout.target,
                            layout.plan).output for x in (a, b)]
        self.assertTrue(are_ps_equivalent(*lifted)[0])
        within = [s for s in bipartite_group(k5.nodes, 2, 3)
                  if solve_switching(permute(normalize(a), s), normalize(b)) is not None]
        self.assertEqual(within, [])

    def test_input_checks(self):
        with self.assertRaises(EquivalenceError):
            fast_equiv_bipartite(self.pent, self.pent, 2, 2)
        with self.assertRaises(EquivalenceError):
            fast_equiv_bipartite(self.pent, self.pent, 3, 3)
        bad = Inequality.build(self.pent.graph, self.pent.as_dict(), -1)
        with self.assertRaises(EquivalenceError):
            fast_equiv_bipartite(self.pent, bad, 2, 3)

    def test_agrees_with_exhaustive_search(self):
        """Fast verdicts match the exhaustive search on the K_{5,4} lifts"""
        rng = random.Random(9)
        layout = build_bipartite_layout(2, 3)
        nodes = list(self.pent.graph.nodes)
        for _ in range(10):
            qa = permute(self.pent, dict(zip(nodes, rng.sample(nodes, 5))))
            qb = switch(permute(self.pent, dict(zip(nodes, rng.sample(nodes, 5)))),
                        set(rng.sample(nodes, 2)))
            fast = fast_equiv_bipartite(qa, qb, 2, 3)
            lifted = [eliminate_multistage(relabel(x, AB_LABELS, 'K5'), layout).output
                      for x in (qa, qb)]
            self.assertEqual(are_ps_equivalent(*lifted)[0], fast)


if __name__ == '__main__':
    unittest.main()
