"""
Unit tests for cut vectors and exact linear algebra
Tests cut enumeration, node caps, rank computation, nullspaces and the
parallel cut scan
"""

import unittest
import os
import random
from fractions import Fraction
from unittest.mock import patch

# Add src directory to path for imports
import sys
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

import cut_geometry
from config import config
from cut_geometry import (
    CapExceededError,
    CutGeometryError,
    EchelonBasis,
    RationalMatrix,
    affine_rank,
    anchored_masks,
    check_cap,
    cut_vector,
    enumerate_cuts,
    mask_to_set,
    naive_rank,
    nullspace,
    rank_exact,
    roots,
    scan_cuts,
    set_to_mask,
)
from graph_core import complete_graph, cycle_graph
from inequality_ops import make_triangle


class TestCutVectors(unittest.TestCase):
    """Test cut vectors and anchored enumeration"""

    def setUp(self):
        self.k3 = complete_graph(3)

    def test_cut_vector(self):
        """delta(S) is 1 exactly on edges leaving S"""
        cut = cut_vector(self.k3, {'1'})
        self.assertEqual(cut.coords, (1, 1, 0))
        self.assertEqual(cut[('2', '3')], 0)
        self.assertEqual(cut_vector(self.k3, set()).coords, (0, 0, 0))
        with self.assertRaises(CutGeometryError):
            cut_vector(self.k3, {'9'})

    def test_complement_gives_same_cut(self):
        g = cycle_graph(5)
        self.assertEqual(cut_vector(g, {'1', '3'}), cut_vector(g, {'2', '4', '5'}))

    def test_enumerate_k3(self):
        """Four cuts, the greatest node never in S"""
        cuts = list(enumerate_cuts(self.k3))
        self.assertEqual([c.coords for c in cuts],
                         [(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)])
        self.assertTrue(all('3' not in c.source for c in cuts))

    def test_enumeration_is_complete(self):
        """Every cut of K_5 appears exactly once"""
        g = complete_graph(5)
        cuts = [c.coords for c in enumerate_cuts(g)]
        self.assertEqual(len(cuts), 16)
        self.assertEqual(len(set(cuts)), 16)
        self.assertEqual(len(anchored_masks(g)), 16)

    def test_masks(self):
        g = complete_graph(5)
        self.assertEqual(mask_to_set(g, 0b101), frozenset({'1', '3'}))
        self.assertEqual(set_to_mask(g, {'1', '3'}), 0b101)

    def test_node_cap(self):
        """Graphs over the cap are refused before enumeration"""
        g = complete_graph(5)
        with self.assertRaises(CapExceededError):
            list(enumerate_cuts(g, max_nodes=4))
        self.assertEqual(check_cap(g, 5), 5)
        # the hard limit always wins
        self.assertEqual(check_cap(g, 1000), config.HARD_MAX_NODES)


class TestExactRank(unittest.TestCase):
    """Test rank, nullspace and echelon bases"""

    def test_rank_small(self):
        m = RationalMatrix([[Fraction(1, 2), 1], [1, 2]])
        self.assertEqual(rank_exact(m), 1)
        self.assertEqual(naive_rank(m), 1)
        self.assertEqual(rank_exact(RationalMatrix([], ncols=3)), 0)

    def test_rank_matches_naive(self):
        """Fraction-free and plain elimination agree on random matrices"""
        rng = random.Random(7)
        for trial in range(1000):
            rows = rng.randint(1, 6)
            cols = rng.randint(1, 6)
            data = [[Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(cols)]
                    for _ in range(rows)]
            if trial % 2 and rows > 1:
                # force dependent rows
                k = rng.randint(-2, 2)
                data[-1] = [x + k * y for x, y in zip(data[0], data[-2])]
            m = RationalMatrix(data)
            self.assertEqual(rank_exact(m), naive_rank(m))

    def test_ragged_rows_rejected(self):
        with self.assertRaises(CutGeometryError):
            RationalMatrix([[1, 2], [3]])

    def test_nullspace(self):
        """Every basis vector is annihilated by the matrix"""
        m = RationalMatrix([[1, 1, -1], [2, 0, 1]])
        basis = nullspace(m)
        self.assertEqual(len(basis), 1)
        for y in basis:
            for row in m.rows:
                self.assertEqual(sum(a * b for a, b in zip(row, y)), 0)
        self.assertEqual(len(nullspace(RationalMatrix([[1, 1, -1]]))), 2)

    def test_echelon_basis(self):
        basis = EchelonBasis(2)
        self.assertTrue(basis.add([1, 0]))
        self.assertFalse(basis.add([2, 0]))
        self.assertTrue(basis.add([1, 1]))
        self.assertFalse(basis.add([5, 7]))
        self.assertEqual(len(basis), 2)

    def test_affine_rank(self):
        """Cut vectors of K_n span R^E affinely"""
        for n in (3, 4):
            g = complete_graph(n)
            self.assertEqual(affine_rank(list(enumerate_cuts(g))), len(g.edges))
        self.assertEqual(affine_rank([(1, 2)]), 0)
        with self.assertRaises(CutGeometryError):
            affine_rank([])


class TestCutScan(unittest.TestCase):
    """Test root search and the parallel scan"""

    def test_roots_of_triangle(self):
        """x12 - x13 - x23 <= 0 on K_3 is tight on three cuts"""
        ineq = make_triangle(complete_graph(3), '1', '2', '3')
        self.assertEqual(roots(ineq), [frozenset(), frozenset({'1'}), frozenset({'2'})])
        scan = scan_cuts(ineq)
        self.assertIsNone(scan.violation_mask)
        self.assertEqual(scan.max_value, 0)

    def test_roots_on_wrong_graph(self):
        ineq = make_triangle(complete_graph(3), '1', '2', '3')
        with self.assertRaises(CutGeometryError):
            roots(ineq, complete_graph(4))

    def test_parallel_scan_matches_serial(self):
        """Worker processes return the same roots, violation and maximum"""
        k5 = complete_graph(5)
        ineq = make_triangle(k5, '1', '2', '3')
        serial = scan_cuts(ineq)
        with patch.object(config, 'THREADS', 2), patch.object(config, 'PARALLEL_THRESHOLD', 1):
            parallel = scan_cuts(ineq)
        self.assertEqual(serial, parallel)

    def test_chunk_reports_first_violation(self):
        terms = [(0, 1, 1)]
        found, violation, best = cut_geometry._scan_chunk((terms, 0, 0, 4))
        self.assertEqual(found, [0, 3])
        self.assertEqual(violation, 1)
        self.assertEqual(best, 1)


if __name__ == '__main__':
    unittest.main()
