"""
Graph module for the cutlift toolkit.
Provides immutable labeled graphs with deterministic ordering, edge
contraction, elimination plans and the graph side of triangular
elimination (single plans, k-partite and bipartite layouts).
"""

import itertools
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from validation import validate_bipartite_sizes, validate_label, validate_partite_grouping

logger = logging.getLogger(__name__)

Edge = Tuple[str, str]


class GraphError(Exception):
    """Custom exception for graph construction and plan errors"""
    pass


def label_key(label: str) -> tuple:
    """
    Natural sort key for node labels, so that "2" < "10" and "A_2" < "A_10".

    Args:
        label: Node label

    Returns:
        Tuple alternating text chunks and integers
    """
    return tuple(int(chunk) if i % 2 else chunk
                 for i, chunk in enumerate(re.split(r'(\d+)', label)))


def edge_key(u: str, v: str) -> Edge:
    """Return the edge uv with its endpoints in label order."""
    return (u, v) if label_key(u) <= label_key(v) else (v, u)


def sort_nodes(nodes: Iterable[str]) -> List[str]:
    return sorted(nodes, key=label_key)


def sort_edges(edges: Iterable[Edge]) -> List[Edge]:
    return sorted(edges, key=lambda e: (label_key(e[0]), label_key(e[1])))


def format_node_set(nodes: Iterable[str]) -> str:
    """Render a node set as {a,b,c} in label order."""
    return '{' + ','.join(sort_nodes(nodes)) + '}'


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph over string labels; nodes and edges kept sorted."""

    nodes: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    name: str = field(default='G', compare=False)

    @classmethod
    def build(cls, nodes: Iterable[str], edges: Iterable[Tuple[str, str]],
              name: str = 'G') -> 'Graph':
        """
        Build a graph, validating labels and edges.

        Args:
            nodes: Node labels
            edges: Pairs of node labels
            name: Name written in file headers

        Returns:
            The graph with sorted nodes and edges

        Raises:
            GraphError: On invalid labels, loops, unknown endpoints or repeated edges
        """
        node_list = [str(v) for v in nodes]
        for label in node_list:
            is_valid, error = validate_label(label)
            if not is_valid:
                raise GraphError(error)
        if len(set(node_list)) != len(node_list):
            raise GraphError(f"El grafo {name} declara un nodo dos veces")

        declared = set(node_list)
        seen = set()
        for u, v in edges:
            u, v = str(u), str(v)
            if u == v:
                raise GraphError(f"No se permiten lazos (nodo {u})")
            if u not in declared or v not in declared:
                missing = u if u not in declared else v
                raise GraphError(f"La arista {u}-{v} usa el nodo no declarado {missing}")
            e = edge_key(u, v)
            if e in seen:
                raise GraphError(f"La arista {u}-{v} está declarada dos veces")
            seen.add(e)

        return cls(tuple(sort_nodes(node_list)), tuple(sort_edges(seen)), name)

    @cached_property
    def _adjacency(self) -> Dict[str, FrozenSet[str]]:
        adj: Dict[str, set] = {v: set() for v in self.nodes}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return {v: frozenset(ns) for v, ns in adj.items()}

    @cached_property
    def edge_index(self) -> Dict[Edge, int]:
        return {e: i for i, e in enumerate(self.edges)}

    @cached_property
    def node_index(self) -> Dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    def has_node(self, v: str) -> bool:
        return v in self._adjacency

    def has_edge(self, u: str, v: str) -> bool:
        return u in self._adjacency and v in self._adjacency[u]

    def neighbours(self, v: str) -> FrozenSet[str]:
        """N_G(v)."""
        if v not in self._adjacency:
            raise GraphError(f"Nodo desconocido {v} en el grafo {self.name}")
        return self._adjacency[v]

    def degree(self, v: str) -> int:
        return len(self.neighbours(v))

    def renamed(self, name: str) -> 'Graph':
        return Graph(self.nodes, self.edges, name)

    def is_subgraph_of(self, other: 'Graph') -> bool:
        return (set(self.nodes) <= set(other.nodes)
                and all(other.has_edge(u, v) for u, v in self.edges))

    def remove_nodes(self, nodes: Iterable[str], name: Optional[str] = None) -> 'Graph':
        """Return G minus the given nodes and their incident edges."""
        drop = set(nodes)
        unknown = drop - set(self.nodes)
        if unknown:
            raise GraphError(f"No se pueden eliminar nodos desconocidos {format_node_set(unknown)}")
        return Graph(tuple(v for v in self.nodes if v not in drop),
                     tuple(e for e in self.edges if e[0] not in drop and e[1] not in drop),
                     name or self.name)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.edges)
        return g

    @classmethod
    def from_networkx(cls, g: nx.Graph, name: str = 'G') -> 'Graph':
        return cls.build(g.nodes, g.edges, name)


def complete_graph(n_or_labels, name: Optional[str] = None) -> Graph:
    """
    Complete graph K_n.

    Args:
        n_or_labels: Node count (labels 1..n) or explicit labels
        name: Graph name, "K<n>" by default
    """
    labels = ([str(i) for i in range(1, n_or_labels + 1)]
              if isinstance(n_or_labels, int) else [str(v) for v in n_or_labels])
    return Graph.build(labels, itertools.combinations(labels, 2),
                       name or f"K{len(labels)}")


def cycle_graph(n: int, name: Optional[str] = None) -> Graph:
    """Cycle C_n on labels 1..n with edges i(i+1) and 1n."""
    if n < 3:
        raise GraphError(f"Un ciclo necesita al menos 3 nodos, se recibió {n}")
    g = nx.cycle_graph([str(i) for i in range(1, n + 1)])
    return Graph.from_networkx(g, name or f"C{n}")


def cycle_edges(n: int) -> List[Edge]:
    """Edges of cycle_graph(n) in cycle order."""
    labels = [str(i) for i in range(1, n + 1)]
    return [edge_key(labels[i], labels[(i + 1) % n]) for i in range(n)]


def complete_multipartite_graph(parts: Sequence[Sequence[str]],
                                name: Optional[str] = None) -> Graph:
    """
    Complete multipartite graph with the given parts.

    Args:
        parts: Node labels of each part
        name: Graph name, "K<s1>,<s2>,..." by default
    """
    parts = [list(p) for p in parts]
    nodes = [v for part in parts for v in part]
    edges = [(u, v)
             for i, j in itertools.combinations(range(len(parts)), 2)
             for u in parts[i] for v in parts[j]]
    return Graph.build(nodes, edges,
                       name or 'K' + ','.join(str(len(p)) for p in parts))


def contract_edge(graph: Graph, u: str, v: str) -> Graph:
    """
    Contract the edge uv; the merged node keeps label u.

    Args:
        graph: Graph containing uv
        u: Endpoint that survives
        v: Endpoint merged into u

    Returns:
        G/uv without loops or parallel edges

    Raises:
        GraphError: If uv is not an edge
    """
    if not graph.has_edge(u, v):
        raise GraphError(f"No se puede contraer la arista desconocida {u}-{v} del grafo {graph.name}")
    merged = nx.contracted_nodes(graph.to_networkx(), u, v, self_loops=False)
    return Graph.from_networkx(merged, f"{graph.name}/{u}{v}")


class FormKind(str, Enum):
    """Triangular form used to cancel an eliminated edge uv with fresh node w."""

    UV_W = 'uv.w'     # x_uv - x_uw - x_vw
    WV_U = 'wv.u'     # x_wv - x_wu - x_uv
    UW_V = 'uw.v'     # x_uw - x_uv - x_wv
    UVW = 'uvw'       # x_uv + x_uw + x_vw - 2
    CANONICAL = 'canonical'


@dataclass(frozen=True)
class EliminationPlan:
    """Eliminated edges u_i v_i, their associated fresh nodes w_i and form choices."""

    eliminated: Tuple[Edge, ...]
    associated: Tuple[str, ...]
    forms: Tuple[FormKind, ...]

    def __post_init__(self):
        if not (len(self.eliminated) == len(self.associated) == len(self.forms)):
            raise GraphError("El plan necesita exactamente un nodo asociado y una forma por arista eliminada")
        if len(set(self.associated)) != len(self.associated):
            raise GraphError("Los nodos asociados de un plan deben ser distintos entre sí")
        if len(set(self.eliminated)) != len(self.eliminated):
            raise GraphError("Una arista se elimina dos veces en el plan")

    @classmethod
    def for_edges(cls, graph: Graph, edges: Sequence[Tuple[str, str]],
                  fresh_labels: Optional[Sequence[str]] = None,
                  forms: Optional[Sequence] = None) -> 'EliminationPlan':
        """
        Build a plan for the given edges of graph.

        Args:
            graph: Source graph G
            edges: Edges to eliminate, in plan order
            fresh_labels: Labels w_i, "W_<u>_<v>" when omitted
            forms: Form per edge, canonical when omitted

        Raises:
            GraphError: On non-edges, reused labels or size mismatches
        """
        keyed = [edge_key(str(u), str(v)) for u, v in edges]
        for u, v in keyed:
            if not graph.has_edge(u, v):
                raise GraphError(f"No se puede eliminar {u}-{v}: no es una arista de {graph.name}")
        if fresh_labels is None:
            fresh_labels = [f"W_{u}_{v}" for u, v in keyed]
        fresh = [str(w) for w in fresh_labels]
        if len(fresh) != len(keyed):
            raise GraphError(f"Se esperaban {len(keyed)} etiquetas nuevas, se recibieron {len(fresh)}")
        for w in fresh:
            if graph.has_node(w):
                raise GraphError(f"El nodo asociado {w} ya pertenece a {graph.name}")
            is_valid, error = validate_label(w)
            if not is_valid:
                raise GraphError(error)
        kinds = [FormKind(f) for f in (forms or [FormKind.CANONICAL] * len(keyed))]
        return cls(tuple(keyed), tuple(fresh), tuple(kinds))

    def __len__(self) -> int:
        return len(self.eliminated)

    def __iter__(self) -> Iterator[Tuple[Edge, str, FormKind]]:
        return iter(zip(self.eliminated, self.associated, self.forms))

    def with_forms(self, forms: Sequence[FormKind]) -> 'EliminationPlan':
        return EliminationPlan(self.eliminated, self.associated, tuple(forms))


def check_trielim_graph(graph: Graph, target: Graph, plan: EliminationPlan) -> None:
    """
    Check that target is a triangular elimination of graph w.r.t. plan.

    Raises:
        GraphError: Naming the first violated requirement
    """
    eliminated = set(plan.eliminated)
    for u, v in plan.eliminated:
        if not graph.has_edge(u, v):
            raise GraphError(f"La arista eliminada {u}-{v} no es una arista de {graph.name}")
    for w in plan.associated:
        if graph.has_node(w):
            raise GraphError(f"El nodo asociado {w} ya pertenece a {graph.name}")

    expected_nodes = set(graph.nodes) | set(plan.associated)
    if set(target.nodes) != expected_nodes:
        extra = set(target.nodes) - expected_nodes
        missing = expected_nodes - set(target.nodes)
        raise GraphError(f"Los nodos destino difieren de V más los nodos asociados "
                         f"(sobran {format_node_set(extra)}, faltan {format_node_set(missing)})")

    for u, v in graph.edges:
        kept = target.has_edge(u, v)
        if (u, v) in eliminated and kept:
            raise GraphError(f"La arista eliminada {u}-{v} sigue presente en {target.name}")
        if (u, v) not in eliminated and not kept:
            raise GraphError(f"La arista {u}-{v} de {graph.name} falta en {target.name}")

    for (u, v), w in zip(plan.eliminated, plan.associated):
        if not (target.has_edge(u, w) and target.has_edge(v, w)):
            raise GraphError(f"El nodo asociado {w} debe ser adyacente a {u} y a {v}")


def build_trielim_graph(graph: Graph, plan: EliminationPlan,
                        extra_edges: Iterable[Tuple[str, str]] = (),
                        require_independent: bool = False,
                        name: Optional[str] = None) -> Graph:
    """
    Build G' = (V + {w_i}, (E \\ F) + {w_i u_i, w_i v_i} + extra_edges).

    Args:
        graph: Source graph G
        plan: Elimination plan over edges of G
        extra_edges: Additional edges of G'
        require_independent: Reject extra edges between two associated nodes
        name: Name of G'

    Returns:
        The triangular elimination graph

    Raises:
        GraphError: If an extra edge re-introduces an eliminated edge or breaks independence
    """
    eliminated = set(plan.eliminated)
    fresh = set(plan.associated)
    extra = [edge_key(str(u), str(v)) for u, v in extra_edges]
    for u, v in extra:
        if (u, v) in eliminated:
            raise GraphError(f"La arista extra {u}-{v} reintroduce una arista eliminada")
        if require_independent and u in fresh and v in fresh:
            raise GraphError(f"La arista extra {u}-{v} une dos nodos asociados")

    edges = [e for e in graph.edges if e not in eliminated]
    for (u, v), w in zip(plan.eliminated, plan.associated):
        edges.extend([edge_key(u, w), edge_key(v, w)])
    edges = set(edges) | set(extra)

    target = Graph.build(list(graph.nodes) + list(plan.associated), edges,
                         name or f"{graph.name}'")
    check_trielim_graph(graph, target, plan)
    logger.debug(f"Built triangular elimination {target.name} with "
                 f"{len(target.nodes)} nodes and {len(target.edges)} edges")
    return target


@dataclass(frozen=True)
class Layout:
    """Source K_n, complete k-partite target and the plan linking them."""

    source: Graph
    target: Graph
    plan: EliminationPlan
    groups: Tuple[Tuple[str, Tuple[str, ...]], ...]
    parts: Tuple[Tuple[str, ...], ...]

    def __iter__(self):
        return iter((self.source, self.target, self.plan))

    def group(self, key: str) -> Tuple[str, ...]:
        return dict(self.groups).get(key, ())

    @property
    def stage_count(self) -> int:
        return sum(1 for key, _ in self.groups if key.startswith('V'))


def build_kpartite_layout(part_sizes: Sequence[int], grouping: Mapping[str, int],
                          node_labels: Optional[Sequence[str]] = None,
                          fresh_labels: Optional[Sequence[str]] = None,
                          target_name: Optional[str] = None) -> Layout:
    """
    Build K_n, a complete k-partite triangular elimination of it and the plan.

    K_n is split into groups V_1..V_m of the given sizes; the clique edges of
    each V_l are eliminated with fresh nodes W_l, and every group is placed
    into the target part named by grouping ("V1" -> 0, "W1" -> 3, ...).

    Args:
        part_sizes: |V_1|, ..., |V_m|
        grouping: Target part index for every V_l and every non-empty W_l
        node_labels: Labels of K_n, 1..n when omitted
        fresh_labels: Labels for all fresh nodes in plan order
        target_name: Name of the target graph

    Returns:
        Layout (iterates as (source, target, plan))

    Raises:
        GraphError: If grouping violates condition (i) or (ii), naming the clause
    """
    is_valid, error = validate_partite_grouping(part_sizes, grouping)
    if not is_valid:
        raise GraphError(error)

    n = sum(part_sizes)
    labels = [str(v) for v in node_labels] if node_labels is not None \
        else [str(i) for i in range(1, n + 1)]
    if len(labels) != n:
        raise GraphError(f"Se esperaban {n} etiquetas de nodo, se recibieron {len(labels)}")
    source = complete_graph(labels, f"K{n}")

    v_groups: List[List[str]] = []
    start = 0
    for size in part_sizes:
        v_groups.append(labels[start:start + size])
        start += size

    clique_edges = [edge_key(u, v)
                    for group in v_groups for u, v in itertools.combinations(group, 2)]
    plan = EliminationPlan.for_edges(source, clique_edges, fresh_labels)

    groups: List[Tuple[str, Tuple[str, ...]]] = []
    fresh_iter = iter(plan.associated)
    for l, group in enumerate(v_groups, start=1):
        t = len(group) * (len(group) - 1) // 2
        groups.append((f"V{l}", tuple(group)))
        groups.append((f"W{l}", tuple(next(fresh_iter) for _ in range(t))))

    k = max(grouping.values()) + 1
    parts: List[List[str]] = [[] for _ in range(k)]
    for key, members in groups:
        if members:
            parts[grouping[key]].extend(members)
    if any(not part for part in parts):
        raise GraphError("Cada parte destino debe recibir al menos un nodo")

    target = complete_multipartite_graph(parts, target_name)
    check_trielim_graph(source, target, plan)
    logger.info(f"Built {k}-partite layout {target.name} from {source.name} "
                f"eliminating {len(plan)} edges")
    return Layout(source, target, plan, tuple(groups), tuple(tuple(p) for p in parts))


def build_bipartite_layout(p: int, q: int, strict: bool = True) -> Layout:
    """
    Build K_{p+q} on A_1..A_p, B_1..B_q and its elimination K_{r,s}.

    r = p + C(q,2), s = q + C(p,2); edge A_iA_i' is associated with B_i_i'
    and edge B_jB_j' with A_j_j'.

    Args:
        p: Number of A nodes
        q: Number of B nodes
        strict: Require p + q >= 5

    Raises:
        GraphError: If p + q < 5 (strict) or a side is empty
    """
    is_valid, error = validate_bipartite_sizes(p, q, strict)
    if not is_valid:
        raise GraphError(error)

    a_nodes = [f"A_{i}" for i in range(1, p + 1)]
    b_nodes = [f"B_{j}" for j in range(1, q + 1)]
    fresh = [f"B_{i}_{j}" for i, j in itertools.combinations(range(1, p + 1), 2)]
    fresh += [f"A_{i}_{j}" for i, j in itertools.combinations(range(1, q + 1), 2)]
    r = p + q * (q - 1) // 2
    s = q + p * (p - 1) // 2
    return build_kpartite_layout([p, q], {'V1': 0, 'W1': 1, 'V2': 1, 'W2': 0},
                                 node_labels=a_nodes + b_nodes, fresh_labels=fresh,
                                 target_name=f"K{r},{s}")


def multistage_graphs(layout: Layout) -> List[Graph]:
    """
    Intermediate graphs G^(0), ..., G^(m) of the stage-wise elimination.

    G^(l) adds W_l to G^(l-1), removes the clique edges of V_l and joins
    every w in W_l to every node of G^(l-1).
    """
    graphs = [layout.source]
    current = layout.source
    m = layout.stage_count
    for l in range(1, m + 1):
        v_group = set(layout.group(f"V{l}"))
        w_group = layout.group(f"W{l}")
        if not w_group:
            graphs.append(current)
            continue
        edges = [e for e in current.edges if not (e[0] in v_group and e[1] in v_group)]
        edges += [(v, w) for v in current.nodes for w in w_group]
        current = Graph.build(list(current.nodes) + list(w_group), edges,
                              f"{layout.source.name}^({l})")
        graphs.append(current)
    return graphs
