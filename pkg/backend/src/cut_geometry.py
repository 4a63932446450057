"""
Cut geometry module for the cutlift toolkit.
Provides cut vectors, anchored cut enumeration, exact rational rank
computations and the cut scan used by every verification routine.

All arithmetic is exact: rationals are fractions.Fraction, and rank
computations clear denominators and run fraction-free elimination on
Python integers.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from config import config
from graph_core import Graph, format_node_set
from validation import validate_node_cap

logger = logging.getLogger(__name__)


class CutGeometryError(Exception):
    """Custom exception for cut vector and rank errors"""
    pass


class CapExceededError(CutGeometryError):
    """Raised when a graph is too large for exhaustive enumeration"""
    pass


@dataclass(frozen=True)
class CutVector:
    """Incidence vector of the cut delta(S), indexed by graph.edges."""

    graph: Graph
    coords: Tuple[int, ...]
    source: FrozenSet[str] = field(default=frozenset(), compare=False)

    def __getitem__(self, edge) -> int:
        return self.coords[self.graph.edge_index[edge]]

    def as_dict(self) -> Dict[Tuple[str, str], int]:
        return dict(zip(self.graph.edges, self.coords))


def check_cap(graph: Graph, cap: Optional[int] = None) -> int:
    """
    Enforce the enumeration cap on a graph.

    Args:
        graph: Graph to enumerate
        cap: Node cap, config.MAX_NODES when omitted

    Returns:
        The cap that was applied

    Raises:
        CapExceededError: If the graph has more nodes than the cap
    """
    limit = min(cap if cap is not None else config.MAX_NODES, config.HARD_MAX_NODES)
    is_valid, error = validate_node_cap(len(graph.nodes), limit)
    if not is_valid:
        error_msg = f"Límite de nodos excedido para {graph.name}: {len(graph.nodes)} > {limit}"
        logger.error(error_msg)
        raise CapExceededError(error_msg)
    return limit


def cut_vector(graph: Graph, subset: Iterable[str]) -> CutVector:
    """
    Cut vector delta(S): 1 on edges with exactly one endpoint in S.

    Raises:
        CutGeometryError: If S contains a node not in the graph
    """
    s = frozenset(str(v) for v in subset)
    unknown = [v for v in s if not graph.has_node(v)]
    if unknown:
        raise CutGeometryError(f"Nodos desconocidos {format_node_set(unknown)} en el conjunto del corte")
    coords = tuple(int((u in s) != (v in s)) for u, v in graph.edges)
    return CutVector(graph, coords, s)


def mask_to_set(graph: Graph, mask: int) -> FrozenSet[str]:
    """Anchored subset encoded by mask; bit i stands for graph.nodes[i]."""
    return frozenset(v for i, v in enumerate(graph.nodes) if mask >> i & 1)


def set_to_mask(graph: Graph, subset: Iterable[str]) -> int:
    index = graph.node_index
    return sum(1 << index[v] for v in subset)


def anchored_masks(graph: Graph) -> range:
    """Masks over all nodes but the greatest one, which never lies in S."""
    return range(1 << max(len(graph.nodes) - 1, 0))


def enumerate_cuts(graph: Graph, max_nodes: Optional[int] = None) -> Iterator[CutVector]:
    """
    Yield the 2^(n-1) cut vectors of graph, one per pair {S, V \\ S}.

    The greatest node is the anchor and is never in S; masks ascend.

    Raises:
        CapExceededError: If n exceeds the node cap
    """
    check_cap(graph, max_nodes)
    edges = [(graph.node_index[u], graph.node_index[v]) for u, v in graph.edges]
    for mask in anchored_masks(graph):
        coords = tuple((mask >> i ^ mask >> j) & 1 for i, j in edges)
        yield CutVector(graph, coords, mask_to_set(graph, mask))


class RationalMatrix:
    """Dense matrix of exact rationals, stored row-major."""

    def __init__(self, rows: Iterable[Iterable], ncols: Optional[int] = None):
        self.rows: List[Tuple[Fraction, ...]] = [tuple(Fraction(x) for x in row) for row in rows]
        if self.rows:
            widths = {len(r) for r in self.rows}
            if len(widths) != 1:
                raise CutGeometryError("Las filas de la matriz deben tener la misma longitud")
            self.ncols = widths.pop()
        else:
            self.ncols = ncols or 0

    @classmethod
    def from_vectors(cls, vectors: Iterable) -> 'RationalMatrix':
        return cls(v.coords if isinstance(v, CutVector) else v for v in vectors)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def integer_rows(self) -> List[List[int]]:
        """Rows scaled by the lcm of their denominators."""
        result = []
        for row in self.rows:
            scale = math.lcm(*(x.denominator for x in row)) if row else 1
            result.append([int(x * scale) for x in row])
        return result

    def __repr__(self) -> str:
        return f"RationalMatrix({self.nrows}x{self.ncols})"


def _bareiss_rank(rows: List[List[int]], ncols: int) -> int:
    m = [list(r) for r in rows]
    rank = 0
    previous = 1
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        p = m[rank][col]
        for i in range(rank + 1, len(m)):
            factor = m[i][col]
            row = m[i]
            for j in range(col + 1, ncols):
                # exact by Sylvester's identity
                row[j] = (p * row[j] - factor * m[rank][j]) // previous
            row[col] = 0
        previous = p
        rank += 1
        if rank == len(m):
            break
    return rank


def rank_exact(matrix: RationalMatrix) -> int:
    """
    Exact rank over the rationals.

    Denominators are cleared row by row and the integer matrix is reduced
    with fraction-free (Bareiss) elimination.
    """
    if matrix.nrows == 0 or matrix.ncols == 0:
        return 0
    return _bareiss_rank(matrix.integer_rows(), matrix.ncols)


def naive_rank(matrix: RationalMatrix) -> int:
    """Rank by plain Gaussian elimination over Fraction."""
    m = [list(r) for r in matrix.rows]
    rank = 0
    for col in range(matrix.ncols):
        pivot = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for i in range(rank + 1, len(m)):
            if m[i][col] != 0:
                ratio = m[i][col] / m[rank][col]
                m[i] = [a - ratio * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


class EchelonBasis:
    """Incrementally maintained row echelon basis, used to pick independent vectors."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self._rows: Dict[int, List[Fraction]] = {}

    def __len__(self) -> int:
        return len(self._rows)

    def reduce(self, vector: Sequence) -> List[Fraction]:
        v = [Fraction(x) for x in vector]
        for col in sorted(self._rows):
            if v[col] != 0:
                row = self._rows[col]
                factor = v[col] / row[col]
                v = [a - factor * b for a, b in zip(v, row)]
        return v

    def add(self, vector: Sequence) -> bool:
        """Add vector if it is independent of the basis; report whether it was."""
        v = self.reduce(vector)
        pivot = next((i for i, x in enumerate(v) if x != 0), None)
        if pivot is None:
            return False
        self._rows[pivot] = v
        return True


def nullspace(matrix: RationalMatrix) -> List[List[Fraction]]:
    """Basis of the right nullspace {y : M y = 0} over the rationals."""
    m = [list(r) for r in matrix.rows]
    ncols = matrix.ncols
    pivots: List[int] = []
    rank = 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        lead = m[rank][col]
        m[rank] = [x / lead for x in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                factor = m[i][col]
                m[i] = [a - factor * b for a, b in zip(m[i], m[rank])]
        pivots.append(col)
        rank += 1
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        y = [Fraction(0)] * ncols
        y[free] = Fraction(1)
        for row, col in enumerate(pivots):
            y[col] = -m[row][free]
        basis.append(y)
    return basis


def affine_rank(vectors: Sequence) -> int:
    """
    Affine dimension of a set of vectors: rank of {v - v_0}.

    Raises:
        CutGeometryError: If the list is empty
    """
    if not vectors:
        raise CutGeometryError("El rango afín de una lista vacía de vectores no está definido")
    rows = [v.coords if isinstance(v, CutVector) else tuple(v) for v in vectors]
    base = rows[0]
    diffs = [[a - b for a, b in zip(row, base)] for row in rows[1:]]
    return rank_exact(RationalMatrix(diffs, ncols=len(base)))


@dataclass(frozen=True)
class CutScan:
    """Outcome of evaluating an inequality on every anchored cut."""

    root_masks: Tuple[int, ...]
    violation_mask: Optional[int]
    max_value: Fraction


def _integer_terms(ineq) -> Tuple[List[Tuple[int, int, int]], int, int]:
    graph = ineq.graph
    denominators = [c.denominator for _, c in ineq.coeffs] + [ineq.rhs.denominator]
    scale = math.lcm(*denominators)
    index = graph.node_index
    terms = [(index[u], index[v], int(c * scale)) for (u, v), c in ineq.coeffs]
    return terms, int(ineq.rhs * scale), scale


def _scan_chunk(args: Tuple[List[Tuple[int, int, int]], int, int, int]) -> Tuple[List[int], Optional[int], Optional[int]]:
    terms, rhs, start, stop = args
    roots: List[int] = []
    violation = None
    best = None
    for mask in range(start, stop):
        value = 0
        for i, j, c in terms:
            if (mask >> i ^ mask >> j) & 1:
                value += c
        if best is None or value > best:
            best = value
        if value == rhs:
            roots.append(mask)
        elif value > rhs and violation is None:
            violation = mask
    return roots, violation, best


def scan_cuts(ineq, max_nodes: Optional[int] = None) -> CutScan:
    """
    Evaluate ineq on every anchored cut of its graph.

    Runs in worker processes when config.THREADS > 1 and the cut count
    reaches config.PARALLEL_THRESHOLD; the result is identical either way.

    Raises:
        CapExceededError: If the graph exceeds the node cap
    """
    graph = ineq.graph
    check_cap(graph, max_nodes)
    terms, rhs, scale = _integer_terms(ineq)
    total = len(anchored_masks(graph))

    if config.THREADS > 1 and total >= config.PARALLEL_THRESHOLD:
        step = -(-total // (config.THREADS * 4))
        chunks = [(terms, rhs, lo, min(lo + step, total)) for lo in range(0, total, step)]
        logger.debug(f"Scanning {total} cuts of {graph.name} in {len(chunks)} chunks")
        with ProcessPoolExecutor(max_workers=config.THREADS) as pool:
            parts = list(pool.map(_scan_chunk, chunks))
    else:
        parts = [_scan_chunk((terms, rhs, 0, total))]

    roots: List[int] = []
    violation = None
    best = None
    for chunk_roots, chunk_violation, chunk_best in parts:
        roots.extend(chunk_roots)
        if violation is None:
            violation = chunk_violation
        if chunk_best is not None and (best is None or chunk_best > best):
            best = chunk_best
    return CutScan(tuple(roots), violation, Fraction(best if best is not None else 0, scale))


def roots(ineq, graph: Optional[Graph] = None,
          max_nodes: Optional[int] = None) -> List[FrozenSet[str]]:
    """
    Anchored subsets S with a . delta(S) = a_0, in ascending mask order.

    Args:
        ineq: Inequality to test
        graph: Graph the inequality should live on (checked when given)
        max_nodes: Node cap override

    Raises:
        CutGeometryError: If ineq does not live on graph
        CapExceededError: If the graph exceeds the node cap
    """
    if graph is not None and ineq.graph != graph:
        raise CutGeometryError(f"La desigualdad sobre {ineq.graph.name} no está definida sobre {graph.name}")
    scan = scan_cuts(ineq, max_nodes)
    return [mask_to_set(ineq.graph, mask) for mask in scan.root_masks]
