"""
Equivalence module for the cutlift toolkit.
Decides permutation-switching equivalence of inequalities on complete and
complete multipartite graphs, builds canonical orbit representatives and
implements the fast criterion for eliminations K_n -> K_{r,s}.
"""

import itertools
import logging
import math
from collections import Counter, deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from config import config
from cut_geometry import CapExceededError, anchored_masks, check_cap, mask_to_set
from graph_core import Graph, format_node_set, label_key, sort_nodes
from inequality_ops import Inequality, is_triangle_inequality, normalize, permute, switch
from validation import validate_bipartite_sizes
from verify import VerificationError, is_facet

logger = logging.getLogger(__name__)

TRIANGLE_EXCLUSION = ("las desigualdades triangulares quedan excluidas del criterio bipartito "
                      "rápido: para ellas la equivalencia tras la eliminación no implica "
                      "la equivalencia dentro de los grupos A/B (contraejemplo con p=2, q=3)")


class EquivalenceError(Exception):
    """Custom exception for equivalence testing errors"""
    pass


class BudgetExceededError(EquivalenceError):
    """Raised when |Aut(G)| * 2^(n-1) is above the search budget"""
    pass


@dataclass(frozen=True)
class EquivWitness:
    """switch(permute(q1, sigma), subset) equals q2 after normalization."""

    sigma: Tuple[Tuple[str, str], ...]
    subset: FrozenSet[str]

    @classmethod
    def from_mapping(cls, sigma: Mapping[str, str], subset) -> 'EquivWitness':
        pairs = tuple(sorted(((str(k), str(v)) for k, v in sigma.items() if k != v),
                             key=lambda kv: label_key(kv[0])))
        return cls(pairs, frozenset(subset))

    def mapping(self) -> Dict[str, str]:
        return dict(self.sigma)

    def sigma_cycles(self) -> str:
        return format_cycles(self.mapping())

    def __str__(self) -> str:
        return f"sigma={self.sigma_cycles()} S={format_node_set(self.subset)}"


def format_cycles(sigma: Mapping[str, str]) -> str:
    """Cycle notation, each cycle starting at its smallest label; "()" for the identity."""
    seen = set()
    cycles = []
    for start in sort_nodes(sigma):
        if start in seen or sigma[start] == start:
            continue
        cycle = [start]
        seen.add(start)
        node = sigma[start]
        while node != start:
            cycle.append(node)
            seen.add(node)
            node = sigma.get(node, node)
        cycles.append('(' + ' '.join(cycle) + ')')
    return ''.join(cycles) or '()'


def _full(sigma: Mapping[str, str], nodes: Sequence[str]) -> Dict[str, str]:
    return {v: sigma.get(v, v) for v in nodes}


def invert_witness(witness: EquivWitness, graph: Graph) -> EquivWitness:
    """Witness for q2 -> q1: (sigma^-1, sigma(S))."""
    sigma = _full(witness.mapping(), graph.nodes)
    inverse = {image: v for v, image in sigma.items()}
    return EquivWitness.from_mapping(inverse, {sigma[v] for v in witness.subset})


def compose_witness(first: EquivWitness, second: EquivWitness, graph: Graph) -> EquivWitness:
    """
    Witness for q1 -> q3 from witnesses q1 -> q2 and q2 -> q3.

    (sigma, S) then (tau, T) gives (sigma o tau, tau^-1(S) xor T).
    """
    sigma = _full(first.mapping(), graph.nodes)
    tau = _full(second.mapping(), graph.nodes)
    tau_inverse = {image: v for v, image in tau.items()}
    composed = {v: sigma[tau[v]] for v in graph.nodes}
    pulled = {tau_inverse[v] for v in first.subset}
    return EquivWitness.from_mapping(composed, pulled ^ set(second.subset))


def replay_witness(ineq: Inequality, witness: EquivWitness) -> Inequality:
    """Apply permutation then switching."""
    return switch(permute(ineq, witness.mapping()), witness.subset)


def multipartite_parts(graph: Graph) -> List[Tuple[str, ...]]:
    """
    Parts of a complete multipartite graph (K_n has n singleton parts).

    Raises:
        EquivalenceError: If the graph is not complete multipartite
    """
    complement = nx.complement(graph.to_networkx())
    parts = [tuple(sort_nodes(c)) for c in nx.connected_components(complement)]
    parts.sort(key=lambda p: label_key(p[0]))
    n = len(graph.nodes)
    expected = n * (n - 1) // 2 - sum(len(p) * (len(p) - 1) // 2 for p in parts)
    within = any(graph.has_edge(u, v) for p in parts for u, v in itertools.combinations(p, 2))
    if within or len(graph.edges) != expected:
        raise EquivalenceError(f"Grafo no soportado {graph.name}: los automorfismos sólo se "
                               "generan para grafos completos y multipartitos completos")
    return parts


def automorphism_count(parts: Sequence[Sequence[str]]) -> int:
    sizes = Counter(len(p) for p in parts)
    return math.prod(math.factorial(c) * math.factorial(s) ** c for s, c in sizes.items())


def _group_from_parts(blocks: Sequence[Sequence[Sequence[str]]]) -> Iterator[Dict[str, str]]:
    """Within-part permutations times permutations of interchangeable parts; identity first."""
    per_block = []
    for parts in blocks:
        options = []
        for order in itertools.permutations(range(len(parts))):
            images = [itertools.permutations(parts[j]) for j in order]
            for chosen in itertools.product(*images):
                options.append({v: w for i, image in enumerate(chosen)
                                for v, w in zip(parts[i], image)})
        per_block.append(options)
    for combo in itertools.product(*per_block):
        sigma: Dict[str, str] = {}
        for piece in combo:
            sigma.update(piece)
        yield sigma


def automorphisms(graph: Graph) -> Iterator[Dict[str, str]]:
    """
    Aut(G) for complete and complete multipartite graphs, identity first.

    Raises:
        EquivalenceError: For any other graph
    """
    parts = multipartite_parts(graph)
    by_size: Dict[int, List[Tuple[str, ...]]] = {}
    for part in parts:
        by_size.setdefault(len(part), []).append(part)
    return _group_from_parts([by_size[s] for s in sorted(by_size)])


def _check_budget(graph: Graph, group_order: int) -> None:
    cost = group_order * 2 ** (len(graph.nodes) - 1)
    if cost > config.EQUIV_BUDGET:
        error_msg = (f"La búsqueda de equivalencia sobre {graph.name} necesita {group_order} permutaciones x "
                     f"{2 ** (len(graph.nodes) - 1)} switchings, por encima del presupuesto "
                     f"{config.EQUIV_BUDGET}")
        logger.error(error_msg)
        raise BudgetExceededError(error_msg)


def _orbit_invariant(ineq: Inequality) -> tuple:
    profile: Dict[str, List] = {v: [] for v in ineq.graph.nodes}
    for (u, v), c in ineq.coeffs:
        profile[u].append(abs(c))
        profile[v].append(abs(c))
    return tuple(sorted(tuple(sorted(values)) for values in profile.values()))


def _preferred_side(graph: Graph, subset: FrozenSet[str]) -> FrozenSet[str]:
    complement = frozenset(graph.nodes) - subset
    if len(subset) != len(complement):
        return subset if len(subset) < len(complement) else complement
    return complement if graph.nodes[-1] in subset else subset


def solve_switching(ineq: Inequality, target: Inequality) -> Optional[FrozenSet[str]]:
    """
    Find S with switch(ineq, S) == target, or None.

    Switching flips a_e exactly on the edges of delta(S), so S is a
    2-colouring of the support graph where flipped edges join different
    colours. Each support component is coloured from its first node;
    recolouring a whole component does not change the rhs.
    """
    graph = ineq.graph
    if graph != target.graph:
        return None
    a, b = ineq.as_dict(), target.as_dict()
    if a.keys() != b.keys():
        return None

    adjacency: Dict[str, List[Tuple[str, int]]] = {}
    for (u, v), c in a.items():
        if abs(c) != abs(b[(u, v)]):
            return None
        flip = int(c != b[(u, v)])
        adjacency.setdefault(u, []).append((v, flip))
        adjacency.setdefault(v, []).append((u, flip))

    colour: Dict[str, int] = {}
    for start in sort_nodes(adjacency):
        if start in colour:
            continue
        colour[start] = 0
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for other, flip in adjacency[node]:
                expected = colour[node] ^ flip
                if other not in colour:
                    colour[other] = expected
                    queue.append(other)
                elif colour[other] != expected:
                    return None

    subset = frozenset(v for v, side in colour.items() if side)
    if switch(ineq, subset) != target:
        return None
    return _preferred_side(graph, subset)


def are_switching_equivalent(q1: Inequality, q2: Inequality) -> Tuple[bool, Optional[FrozenSet[str]]]:
    """Switching-only equivalence of normalized forms; returns (equivalent, S)."""
    subset = solve_switching(normalize(q1), normalize(q2))
    return subset is not None, subset


def _search(n1: Inequality, n2: Inequality,
            group: Iterator[Dict[str, str]]) -> Optional[EquivWitness]:
    for sigma in group:
        subset = solve_switching(permute(n1, sigma, check=False), n2)
        if subset is not None:
            return EquivWitness.from_mapping(sigma, subset)
    return None


def are_ps_equivalent(q1: Inequality, q2: Inequality,
                      verify_short_circuit: bool = False,
                      max_nodes: Optional[int] = None) -> Tuple[bool, Optional[EquivWitness]]:
    """
    Permutation-switching equivalence over Aut(G) x switchings.

    Args:
        q1: First inequality
        q2: Second inequality on the same graph
        verify_short_circuit: Re-run the full search when the orbit invariant says no
        max_nodes: Node cap override, config.MAX_NODES by default

    Returns:
        Tuple of (equivalent, witness mapping normalize(q1) onto normalize(q2))

    Raises:
        EquivalenceError: On different graphs or an unsupported graph family
        BudgetExceededError: If the search exceeds config.EQUIV_BUDGET
        CapExceededError: If the graph exceeds the node cap
    """
    graph = q1.graph
    if graph != q2.graph:
        raise EquivalenceError(f"Las desigualdades están sobre grafos distintos "
                               f"({q1.graph.name}, {q2.graph.name})")
    check_cap(graph, max_nodes)
    parts = multipartite_parts(graph)
    _check_budget(graph, automorphism_count(parts))

    n1, n2 = normalize(q1), normalize(q2)
    if _orbit_invariant(n1) != _orbit_invariant(n2):
        logger.debug("Orbit invariants differ; not equivalent")
        if verify_short_circuit and _search(n1, n2, automorphisms(graph)) is not None:
            raise EquivalenceError("Error interno: el invariante de órbita rechazó desigualdades equivalentes")
        return False, None

    witness = _search(n1, n2, automorphisms(graph))
    if witness is None:
        logger.info(f"Inequalities on {graph.name} are not equivalent")
        return False, None
    logger.info(f"Inequalities on {graph.name} are equivalent: {witness}")
    return True, witness


def _canonical_key(ineq: Inequality) -> tuple:
    return (tuple((label_key(u), label_key(v), c) for (u, v), c in ineq.coeffs), ineq.rhs)


def canonical_form(ineq: Inequality, max_nodes: Optional[int] = None) -> Inequality:
    """
    Lexicographically least normalized inequality in the orbit of ineq.

    Raises:
        EquivalenceError: On an unsupported graph family
        CapExceededError: If the graph exceeds the node cap, config.MAX_NODES by default
        BudgetExceededError: If |Aut(G)| * 2^(n-1) exceeds config.EQUIV_BUDGET
    """
    graph = ineq.graph
    check_cap(graph, max_nodes)
    _check_budget(graph, automorphism_count(multipartite_parts(graph)))
    base = normalize(ineq)
    masks = anchored_masks(graph)
    best, best_key = None, None
    for sigma in automorphisms(graph):
        permuted = permute(base, sigma, check=False)
        for mask in masks:
            candidate = switch(permuted, mask_to_set(graph, mask))
            key = _canonical_key(candidate)
            if best_key is None or key < best_key:
                best, best_key = candidate, key
    return best


def bipartite_group(nodes: Sequence[str], p: int, q: int) -> Iterator[Dict[str, str]]:
    """S_p x S_q on the first p and last q labels, with the side swap when p = q."""
    ordered = sort_nodes(nodes)
    a_side, b_side = ordered[:p], ordered[p:]
    for pa in itertools.permutations(a_side):
        for pb in itertools.permutations(b_side):
            yield dict(zip(a_side + b_side, pa + pb))
    if p == q:
        for pa in itertools.permutations(a_side):
            for pb in itertools.permutations(b_side):
                yield dict(zip(a_side + b_side, pb + pa))


def _check_bipartite_input(ineq: Inequality, max_nodes: Optional[int]) -> None:
    if is_triangle_inequality(ineq):
        logger.error(f"Rejected triangle inequality: {ineq}")
        raise EquivalenceError(f"Rechazada: {TRIANGLE_EXCLUSION}")
    try:
        facet, certificate = is_facet(ineq, max_nodes)
    except (VerificationError, CapExceededError) as e:
        raise EquivalenceError(str(e)) from e
    if not facet:
        raise EquivalenceError(f"La entrada no induce una faceta de {ineq.graph.name} "
                               f"(dim={certificate.affine_dim} need={len(ineq.graph.edges) - 1})")


def find_bipartite_witness(src_a: Inequality, src_b: Inequality, p: int, q: int,
                           max_nodes: Optional[int] = None) -> Optional[EquivWitness]:
    """
    Witness for src_a -> src_b using permutations within A and within B only.

    The first p labels of K_n (in label order) form A and the remaining q form B.

    Raises:
        EquivalenceError: On bad sizes, triangle inputs or non-facet inputs
    """
    is_valid, error = validate_bipartite_sizes(p, q)
    if not is_valid:
        raise EquivalenceError(error)
    graph = src_a.graph
    if graph != src_b.graph:
        raise EquivalenceError("Las desigualdades están sobre grafos distintos")
    if len(graph.nodes) != p + q or len(graph.edges) != (p + q) * (p + q - 1) // 2:
        raise EquivalenceError(f"Se esperaba K_{p + q}, se recibió {graph.name}")
    for ineq in (src_a, src_b):
        _check_bipartite_input(ineq, max_nodes)

    return _search(normalize(src_a), normalize(src_b), bipartite_group(graph.nodes, p, q))


def fast_equiv_bipartite(src_a: Inequality, src_b: Inequality, p: int, q: int,
                         max_nodes: Optional[int] = None) -> bool:
    """
    Decide equivalence of the K_{r,s} eliminations from the K_n inputs.

    For non-triangle facets the eliminations are PS-equivalent exactly when the
    inputs are related by switching and permutations inside A, inside B and
    (when p = q) the exchange of A and B.
    """
    witness = find_bipartite_witness(src_a, src_b, p, q, max_nodes)
    logger.info(f"Fast bipartite criterion (p={p}, q={q}): "
                f"{'equivalent' if witness else 'not equivalent'}")
    return witness is not None
