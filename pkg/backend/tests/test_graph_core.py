"""
Unit tests for graph construction
Tests label ordering, graph validation, contraction, elimination plans,
triangular elimination graphs and the k-partite / bipartite layouts
"""

import unittest
import os

# Add src directory to path for imports
import sys
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from graph_core import (
    EliminationPlan,
    FormKind,
    Graph,
    GraphError,
    build_bipartite_layout,
    build_kpartite_layout,
    build_trielim_graph,
    check_trielim_graph,
    complete_graph,
    complete_multipartite_graph,
    contract_edge,
    cycle_graph,
    edge_key,
    format_node_set,
    multistage_graphs,
    sort_nodes,
)


EXAMPLE_GROUPING = {'V1': 0, 'V2': 1, 'V3': 2, 'W1': 3}


class TestLabelsAndGraphs(unittest.TestCase):
    """Test label ordering and graph validation"""

    def test_natural_label_order(self):
        """Numeric chunks compare as numbers"""
        self.assertEqual(sort_nodes(['10', '2', '1']), ['1', '2', '10'])
        self.assertEqual(sort_nodes(['A_10', 'B_1', 'A_2']), ['A_2', 'A_10', 'B_1'])
        self.assertEqual(edge_key('10', '9'), ('9', '10'))
        self.assertEqual(format_node_set({'8', '6'}), '{6,8}')
        self.assertEqual(format_node_set(set()), '{}')

    def test_build_sorts_nodes_and_edges(self):
        """Nodes and edges come out in label order"""
        g = Graph.build(['3', '1', '2'], [('3', '1'), ('2', '1')], 'P3')
        self.assertEqual(g.nodes, ('1', '2', '3'))
        self.assertEqual(g.edges, (('1', '2'), ('1', '3')))
        self.assertTrue(g.has_edge('3', '1'))
        self.assertEqual(g.neighbours('1'), frozenset({'2', '3'}))
        self.assertEqual(g.degree('2'), 1)

    def test_build_rejects_bad_input(self):
        """Loops, undeclared nodes, repeated edges and bad labels are rejected"""
        with self.assertRaises(GraphError):
            Graph.build(['1', '2'], [('1', '1')])
        with self.assertRaises(GraphError) as ctx:
            Graph.build(['1', '2'], [('1', '3')])
        self.assertEqual(str(ctx.exception), 'La arista 1-3 usa el nodo no declarado 3')
        with self.assertRaises(GraphError):
            Graph.build(['1', '2'], [('1', '2'), ('2', '1')])
        with self.assertRaises(GraphError):
            Graph.build(['a-b'], [])
        with self.assertRaises(GraphError):
            Graph.build(['1', '1'], [])

    def test_graph_equality_ignores_name(self):
        self.assertEqual(complete_graph(3), complete_graph(3).renamed('other'))

    def test_constructors(self):
        """Complete, cycle and complete multipartite graphs"""
        k5 = complete_graph(5)
        self.assertEqual(k5.name, 'K5')
        self.assertEqual(len(k5.edges), 10)

        c5 = cycle_graph(5)
        self.assertEqual(c5.name, 'C5')
        self.assertEqual(len(c5.edges), 5)
        self.assertTrue(all(c5.degree(v) == 2 for v in c5.nodes))
        self.assertTrue(c5.has_edge('1', '5'))

        g = complete_multipartite_graph([['1', '2', '3'], ['4'], ['5'], ['6', '7', '8']])
        self.assertEqual(g.name, 'K3,1,1,3')
        self.assertEqual(len(g.edges), 22)
        self.assertFalse(g.has_edge('1', '2'))

        with self.assertRaises(GraphError):
            cycle_graph(2)

    def test_contract_edge(self):
        """Contraction keeps the first label and drops parallel edges"""
        g = contract_edge(complete_graph(4), '1', '2')
        self.assertEqual(g, complete_graph(['1', '3', '4']))
        self.assertEqual(g.name, 'K4/12')
        with self.assertRaises(GraphError):
            contract_edge(cycle_graph(5), '1', '3')

    def test_subgraph_and_removal(self):
        k4 = complete_graph(4)
        k5 = complete_graph(5)
        self.assertTrue(k4.is_subgraph_of(k5))
        self.assertFalse(k5.is_subgraph_of(k4))
        self.assertEqual(k5.remove_nodes(['5']), k4)
        with self.assertRaises(GraphError):
            k5.remove_nodes(['9'])

    def test_networkx_round_trip(self):
        g = cycle_graph(6)
        self.assertEqual(Graph.from_networkx(g.to_networkx(), 'C6'), g)


class TestEliminationPlans(unittest.TestCase):
    """Test plans and triangular elimination graphs"""

    def setUp(self):
        self.k5 = complete_graph(5)

    def test_for_edges_defaults(self):
        """Default labels are W_<u>_<v> and forms are canonical"""
        plan = EliminationPlan.for_edges(self.k5, [('2', '1')])
        self.assertEqual(plan.eliminated, (('1', '2'),))
        self.assertEqual(plan.associated, ('W_1_2',))
        self.assertEqual(plan.forms, (FormKind.CANONICAL,))
        self.assertEqual(len(plan), 1)

    def test_for_edges_rejects_bad_plans(self):
        with self.assertRaises(GraphError):
            EliminationPlan.for_edges(cycle_graph(5), [('1', '3')])
        with self.assertRaises(GraphError):
            EliminationPlan.for_edges(self.k5, [('1', '2')], ['3'])
        with self.assertRaises(GraphError):
            EliminationPlan.for_edges(self.k5, [('1', '2'), ('1', '3')], ['6', '6'])
        with self.assertRaises(GraphError):
            EliminationPlan.for_edges(self.k5, [('1', '2')], ['6', '7'])

    def test_build_trielim_graph(self):
        """G' drops F and joins each w_i to u_i and v_i"""
        plan = EliminationPlan.for_edges(self.k5, [('1', '2'), ('1', '3'), ('2', '3')],
                                         ['6', '7', '8'])
        target = build_trielim_graph(self.k5, plan)
        self.assertEqual(len(target.nodes), 8)
        self.assertEqual(len(target.edges), 13)
        self.assertFalse(target.has_edge('1', '2'))
        self.assertTrue(target.has_edge('6', '2'))

    def test_independence_flag(self):
        """Edges between associated nodes are rejected on request"""
        plan = EliminationPlan.for_edges(self.k5, [('1', '2'), ('3', '4')], ['6', '7'])
        target = build_trielim_graph(self.k5, plan, extra_edges=[('6', '7')])
        self.assertTrue(target.has_edge('6', '7'))
        with self.assertRaises(GraphError):
            build_trielim_graph(self.k5, plan, extra_edges=[('6', '7')], require_independent=True)
        with self.assertRaises(GraphError):
            build_trielim_graph(self.k5, plan, extra_edges=[('1', '2')])

    def test_check_trielim_graph(self):
        """A target that lost a kept edge is rejected"""
        plan = EliminationPlan.for_edges(self.k5, [('1', '2')], ['6'])
        target = build_trielim_graph(self.k5, plan)
        broken = Graph.build(target.nodes, [e for e in target.edges if e != ('4', '5')])
        with self.assertRaises(GraphError):
            check_trielim_graph(self.k5, broken, plan)
        check_trielim_graph(self.k5, target, plan)


class TestLayouts(unittest.TestCase):
    """Test k-partite and bipartite layouts"""

    def test_example_layout(self):
        """K_5 split 3,1,1 with W_1 as a fourth part gives K_{3,1,1,3}"""
        layout = build_kpartite_layout([3, 1, 1], EXAMPLE_GROUPING, fresh_labels=['6', '7', '8'])
        source, target, plan = layout
        self.assertEqual(source, complete_graph(5))
        self.assertEqual(target.name, 'K3,1,1,3')
        self.assertEqual(len(target.edges), 22)
        self.assertEqual(plan.eliminated, (('1', '2'), ('1', '3'), ('2', '3')))
        self.assertEqual(plan.associated, ('6', '7', '8'))
        self.assertEqual(layout.group('W1'), ('6', '7', '8'))
        self.assertEqual(layout.stage_count, 3)

    def test_grouping_conditions(self):
        """The violated clause is named"""
        with self.assertRaises(GraphError) as ctx:
            build_kpartite_layout([3, 1, 1], {'V1': 0, 'W1': 0, 'V2': 1, 'V3': 2})
        self.assertIn('condición (i)', str(ctx.exception))
        with self.assertRaises(GraphError) as ctx:
            build_kpartite_layout([3, 1, 1], {'V1': 0, 'V2': 0, 'V3': 1, 'W1': 2})
        self.assertIn('condición (ii)', str(ctx.exception))

    def test_bipartite_layout(self):
        """(p, q) = (2, 3) gives K_{5,4}"""
        layout = build_bipartite_layout(2, 3)
        self.assertEqual(layout.target.name, 'K5,4')
        self.assertEqual(len(layout.target.nodes), 9)
        self.assertEqual(len(layout.target.edges), 20)
        self.assertEqual(layout.plan.associated, ('B_1_2', 'A_1_2', 'A_1_3', 'A_2_3'))
        self.assertEqual(layout.plan.eliminated[0], ('A_1', 'A_2'))
        self.assertEqual(set(layout.parts[0]),
                         {'A_1', 'A_2', 'A_1_2', 'A_1_3', 'A_2_3'})

    def test_bipartite_sizes(self):
        """p + q >= 5 unless strict checking is off"""
        with self.assertRaises(GraphError):
            build_bipartite_layout(2, 2)
        small = build_bipartite_layout(1, 1, strict=False)
        self.assertEqual(small.target.name, 'K1,1')
        self.assertEqual(len(small.target.edges), 1)
        for p, q in [(1, 1), (1, 4), (3, 3), (5, 5)]:
            layout = build_bipartite_layout(p, q, strict=False)
            r = p + q * (q - 1) // 2
            s = q + p * (p - 1) // 2
            self.assertEqual(len(layout.target.edges), r * s)

    def test_multistage_graphs(self):
        """Each stage removes a clique and joins its fresh nodes to everything so far"""
        layout = build_bipartite_layout(2, 3)
        graphs = multistage_graphs(layout)
        self.assertEqual(len(graphs), 3)
        self.assertEqual(len(graphs[1].nodes), 6)
        self.assertEqual(len(graphs[1].edges), 14)
        self.assertEqual(len(graphs[2].nodes), 9)
        self.assertEqual(len(graphs[2].edges), 29)
        self.assertTrue(layout.target.is_subgraph_of(graphs[2]))


if __name__ == '__main__':
    unittest.main()
