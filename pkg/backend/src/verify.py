"""
Verification module for the cutlift toolkit.
Ground-truth checkers over exhaustive cut enumeration: validity with a
violating cut, facetness with an affinely independent root certificate,
the degree-2 pruning rule and a complete facet oracle for tiny graphs.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, List, Optional, Sequence, Tuple

from config import config
from cut_geometry import (
    CapExceededError, EchelonBasis, RationalMatrix, check_cap,
    enumerate_cuts, mask_to_set, nullspace, rank_exact, scan_cuts,
)
from graph_core import Graph, edge_key, format_node_set, sort_nodes
from inequality_ops import Inequality, is_triangle_inequality, normalize

logger = logging.getLogger(__name__)

VERDICT_NOT_FACET = 'not facet'
VERDICT_INCONCLUSIVE = 'inconclusive'


class VerificationError(Exception):
    """Custom exception for verification failures"""
    pass


class InvalidInequalityError(VerificationError):
    """Raised when a facet check meets an invalid inequality; carries a violating S."""

    def __init__(self, message: str, violating: FrozenSet[str]):
        super().__init__(message)
        self.violating = violating


@dataclass(frozen=True)
class FacetCertificate:
    """Roots of an inequality that are affinely independent, and their dimension."""

    roots: Tuple[FrozenSet[str], ...]
    affine_dim: int

    def lines(self) -> List[str]:
        return [f"root {format_node_set(s)}" for s in self.roots]


def check_validity(ineq: Inequality,
                   max_nodes: Optional[int] = None) -> Tuple[bool, Optional[FrozenSet[str]]]:
    """
    Check a.delta(S) <= a_0 on every cut.

    Args:
        ineq: Inequality to check
        max_nodes: Node cap override

    Returns:
        Tuple of (is_valid, first violating anchored S or None)

    Raises:
        CapExceededError: If the graph exceeds the node cap
    """
    scan = scan_cuts(ineq, max_nodes)
    if scan.violation_mask is None:
        return True, None
    violating = mask_to_set(ineq.graph, scan.violation_mask)
    logger.info(f"Inequality over {ineq.graph.name} violated by S={format_node_set(violating)}")
    return False, violating


def is_valid(ineq: Inequality, max_nodes: Optional[int] = None) -> bool:
    """True iff ineq holds on every cut vector of its graph."""
    return check_validity(ineq, max_nodes)[0]


def _certificate(ineq: Inequality, root_masks: Sequence[int]) -> FacetCertificate:
    graph = ineq.graph
    edges = [(graph.node_index[u], graph.node_index[v]) for u, v in graph.edges]
    if not root_masks:
        return FacetCertificate((), -1)

    def coords(mask):
        return [(mask >> i ^ mask >> j) & 1 for i, j in edges]

    base = coords(root_masks[0])
    basis = EchelonBasis(len(edges))
    chosen = [root_masks[0]]
    for mask in root_masks[1:]:
        if len(basis) == len(edges):
            break
        if basis.add([a - b for a, b in zip(coords(mask), base)]):
            chosen.append(mask)
    return FacetCertificate(tuple(mask_to_set(graph, m) for m in chosen), len(basis))


def root_certificate(ineq: Inequality, max_nodes: Optional[int] = None) -> Tuple[bool, Optional[FrozenSet[str]], FacetCertificate]:
    """
    Validity verdict plus a maximal affinely independent root subset.

    Returns:
        Tuple of (is_valid, violating S or None, certificate)
    """
    scan = scan_cuts(ineq, max_nodes)
    violating = (mask_to_set(ineq.graph, scan.violation_mask)
                 if scan.violation_mask is not None else None)
    return violating is None, violating, _certificate(ineq, scan.root_masks)


def is_facet(ineq: Inequality, max_nodes: Optional[int] = None) -> Tuple[bool, FacetCertificate]:
    """
    Decide whether ineq induces a facet of the cut polytope of its graph.

    Args:
        ineq: Inequality to check; must be valid
        max_nodes: Node cap override, config.FACET_MAX_NODES by default

    Returns:
        Tuple of (is_facet, certificate)

    Raises:
        InvalidInequalityError: If ineq is not valid
        CapExceededError: If the graph exceeds the facet cap
    """
    cap = max_nodes if max_nodes is not None else config.FACET_MAX_NODES
    valid, violating, certificate = root_certificate(ineq, cap)
    if not valid:
        error_msg = (f"La desigualdad sobre {ineq.graph.name} no es válida "
                     f"(la viola S={format_node_set(violating)})")
        logger.error(error_msg)
        raise InvalidInequalityError(error_msg, violating)

    need = len(ineq.graph.edges) - 1
    if ineq.rhs == 0 and certificate.roots:
        # cone and polytope dimensions must agree for homogeneous inequalities
        linear = rank_exact(RationalMatrix.from_vectors(
            [[int((u in s) != (v in s)) for u, v in ineq.graph.edges] for s in certificate.roots]))
        if linear != certificate.affine_dim:
            error_msg = (f"Error interno: el rango lineal {linear} difiere de la dimensión "
                         f"afín {certificate.affine_dim} en una desigualdad homogénea")
            logger.error(error_msg)
            raise VerificationError(error_msg)

    facet = certificate.affine_dim == need
    logger.info(f"Facet check on {ineq.graph.name}: dim={certificate.affine_dim} need={need}")
    return facet, certificate


def degree2_prune(ineq: Inequality) -> Tuple[str, Optional[Tuple[str, str, str]]]:
    """
    Cheap non-facet test from a node l meeting a triangle luv.

    If G contains the triangle l,u,v, one of a_lu, a_lv is nonzero and
    a_li = 0 for every other neighbour i of l, then ineq is not a facet
    unless it is a triangle inequality on l,u,v.

    Returns:
        Tuple of (verdict, (l, u, v) witnessing "not facet" or None)
    """
    graph = ineq.graph
    support = set(ineq.support)

    for l in graph.nodes:
        active = {i for i in graph.neighbours(l) if edge_key(l, i) in support}
        if not 1 <= len(active) <= 2:
            continue
        for u, v in itertools.combinations(sort_nodes(graph.neighbours(l)), 2):
            if not graph.has_edge(u, v) or not active <= {u, v}:
                continue
            triangle = {edge_key(l, u), edge_key(l, v), edge_key(u, v)}
            if support <= triangle and is_triangle_inequality(ineq):
                continue
            logger.debug(f"Degree-2 rule applies at l={l}, u={u}, v={v}")
            return VERDICT_NOT_FACET, (l, u, v)
    return VERDICT_INCONCLUSIVE, None


def _primitive(vector: List[int]) -> List[int]:
    g = math.gcd(*vector)
    return [x // g for x in vector] if g > 1 else vector


def _integral(vector: Sequence[Fraction]) -> List[int]:
    scale = math.lcm(*(x.denominator for x in vector))
    return _primitive([int(x * scale) for x in vector])


def _hull_by_subsets(graph: Graph, points: List[Tuple[int, ...]]) -> List[Inequality]:
    dim = len(graph.edges)
    seen = set()
    facets = []
    for subset in itertools.combinations(points, dim):
        kernel = nullspace(RationalMatrix([list(p) + [-1] for p in subset]))
        if len(kernel) != 1:
            continue
        y = _integral(kernel[0])
        a, a0 = y[:-1], y[-1]
        if not any(a):
            continue
        # hyperplane key: first nonzero coefficient positive
        if next(x for x in a if x != 0) < 0:
            y = [-x for x in y]
            a, a0 = y[:-1], y[-1]
        if tuple(y) in seen:
            continue
        seen.add(tuple(y))
        values = [sum(c * x for c, x in zip(a, p)) - a0 for p in points]
        if all(val <= 0 for val in values):
            orient = 1
        elif all(val >= 0 for val in values):
            orient = -1
        else:
            continue
        facets.append(normalize(Inequality.build(
            graph, {e: orient * c for e, c in zip(graph.edges, a)}, orient * a0)))
    return facets


def _hull_by_double_description(graph: Graph, points: List[Tuple[int, ...]]) -> List[Inequality]:
    """Extreme rays of {(a, a_0) : a.x - a_0 <= 0 for every cut x}."""
    d = len(graph.edges) + 1
    lineality: List[List[int]] = [[int(i == j) for j in range(d)] for i in range(d)]
    rays: List[Tuple[List[int], FrozenSet[int]]] = []
    constraints = [list(p) + [-1] for p in points]

    def dot(h, y):
        return sum(a * b for a, b in zip(h, y))

    for index, h in enumerate(constraints):
        pick = next((k for k, l in enumerate(lineality) if dot(h, l) != 0), None)
        if pick is not None:
            moving = lineality[pick]
            if dot(h, moving) > 0:
                moving = [-x for x in moving]
            hl = dot(h, moving)
            lineality = [_primitive([hl * x - dot(h, l) * m for x, m in zip(l, moving)])
                         for k, l in enumerate(lineality) if k != pick]
            lineality = [l for l in lineality if any(l)]
            rays = [(_primitive([-hl * x + dot(h, r) * m for x, m in zip(r, moving)]),
                     zeros | {index}) for r, zeros in rays]
            rays.append((_primitive(moving), frozenset(range(index))))
            continue

        positive, negative, kept = [], [], []
        for r, zeros in rays:
            value = dot(h, r)
            if value > 0:
                positive.append((r, zeros, value))
            elif value < 0:
                negative.append((r, zeros, value))
                kept.append((r, zeros))
            else:
                kept.append((r, zeros | {index}))
        pointed_dim = d - len(lineality)
        new_rays = []
        for rp, zp, vp in positive:
            for rn, zn, vn in negative:
                common = zp & zn
                if len(common) < pointed_dim - 2:
                    continue
                if any(common <= z for r, z in rays if r is not rp and r is not rn):
                    continue
                combo = _primitive([vp * x - vn * y for x, y in zip(rn, rp)])
                new_rays.append((combo, common | {index}))
        rays = kept + new_rays

    if lineality:
        raise VerificationError(f"El politopo de cortes de {graph.name} no es de dimensión completa")

    facets = []
    for r, _ in rays:
        a, a0 = r[:-1], r[-1]
        if not any(a):
            continue
        facets.append(normalize(Inequality.build(graph, dict(zip(graph.edges, a)), a0)))
    return facets


def hull_oracle(graph: Graph, method: str = 'auto') -> List[Inequality]:
    """
    Complete irredundant facet list of the cut polytope of a tiny graph.

    Args:
        graph: Graph with at most config.HULL_MAX_EDGES edges and HULL_MAX_NODES nodes
        method: 'subsets' (hyperplanes through |E| cuts), 'double-description' or 'auto'

    Returns:
        Normalized facets sorted by coefficients then rhs

    Raises:
        CapExceededError: If the graph exceeds the oracle caps
        VerificationError: On an unknown method
    """
    if len(graph.edges) > config.HULL_MAX_EDGES or len(graph.nodes) > config.HULL_MAX_NODES:
        error_msg = (f"Límites del oráculo de envolvente excedidos para {graph.name}: |E|={len(graph.edges)} "
                     f"(max {config.HULL_MAX_EDGES}), |V|={len(graph.nodes)} "
                     f"(max {config.HULL_MAX_NODES})")
        logger.error(error_msg)
        raise CapExceededError(error_msg)
    if not graph.edges:
        return []
    check_cap(graph)

    points = sorted({cut.coords for cut in enumerate_cuts(graph)})
    if method == 'auto':
        method = 'subsets' if math.comb(len(points), len(graph.edges)) <= 5000 \
            else 'double-description'
    if method == 'subsets':
        facets = _hull_by_subsets(graph, points)
    elif method == 'double-description':
        facets = _hull_by_double_description(graph, points)
    else:
        raise VerificationError(f"Método de envolvente desconocido '{method}'")

    unique = {}
    for facet in facets:
        key = (tuple(facet.coeff(u, v) for u, v in graph.edges), facet.rhs)
        unique.setdefault(key, facet)
    ordered = [unique[k] for k in sorted(unique)]
    logger.info(f"Hull oracle ({method}) found {len(ordered)} facets for {graph.name}")
    return ordered
