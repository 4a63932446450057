"""
Inequality module for the cutlift toolkit.
Defines the exact-rational inequality value a.x <= a_0 over the edges
of a graph, triangular forms, and the symmetry and reduction operations:
switching, permutation, relabeling, collapsing, zero-lifting, support
graphs and normalization.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Tuple

from graph_core import (
    Edge, FormKind, Graph, GraphError, contract_edge, edge_key, format_node_set,
    sort_edges,
)

logger = logging.getLogger(__name__)

Coefficients = Tuple[Tuple[Edge, Fraction], ...]


class InequalityError(Exception):
    """Custom exception for inequality construction and operations"""
    pass


def to_fraction(value) -> Fraction:
    if isinstance(value, float):
        raise InequalityError(f"No se permite el valor de punto flotante {value!r}; use racionales exactos")
    return Fraction(value)


@dataclass(frozen=True)
class Inequality:
    """a.x <= rhs over graph.edges; coeffs holds the nonzero entries in edge order."""

    graph: Graph
    coeffs: Coefficients
    rhs: Fraction

    @classmethod
    def build(cls, graph: Graph, coeffs: Mapping[Tuple[str, str], object],
              rhs=0) -> 'Inequality':
        """
        Build an inequality, validating that every key is an edge.

        Args:
            graph: Underlying graph
            coeffs: Map from node pairs (either order) to rationals
            rhs: Right-hand side

        Raises:
            InequalityError: On loops, non-edges, repeated edges or floats
        """
        values: Dict[Edge, Fraction] = {}
        for (u, v), c in coeffs.items():
            u, v = str(u), str(v)
            if u == v:
                raise InequalityError(f"No se permite un coeficiente sobre el lazo {u}-{v}")
            if not graph.has_edge(u, v):
                raise InequalityError(f"Coeficiente sobre {u}-{v}, que no es arista de {graph.name}")
            e = edge_key(u, v)
            if e in values:
                raise InequalityError(f"Coeficiente de la arista {u}-{v} dado dos veces")
            values[e] = to_fraction(c)
        ordered = tuple((e, values[e]) for e in sort_edges(values) if values[e] != 0)
        return cls(graph, ordered, to_fraction(rhs))

    def coeff(self, u: str, v: str) -> Fraction:
        return self.as_dict().get(edge_key(u, v), Fraction(0))

    def as_dict(self) -> Dict[Edge, Fraction]:
        return dict(self.coeffs)

    @property
    def support(self) -> Tuple[Edge, ...]:
        return tuple(e for e, _ in self.coeffs)

    def evaluate(self, subset: Iterable[str]) -> Fraction:
        """a . delta(S)."""
        s = set(subset)
        return sum((c for (u, v), c in self.coeffs if (u in s) != (v in s)), Fraction(0))

    def on_graph(self, graph: Graph) -> 'Inequality':
        """Same coefficients on another graph containing the support."""
        return Inequality.build(graph, self.as_dict(), self.rhs)

    def __str__(self) -> str:
        terms = []
        for (u, v), c in self.coeffs:
            sign = '-' if c < 0 else '+'
            mag = abs(c)
            terms.append(f"{sign} {'' if mag == 1 else str(mag) + '*'}x_{u},{v}")
        lhs = ' '.join(terms).lstrip('+ ') if terms else '0'
        return f"{lhs} <= {self.rhs}"


@dataclass(frozen=True)
class LinearExpression:
    """sum c_e x_e - rhs, as produced by expanding a triangular form."""

    terms: Tuple[Tuple[Edge, Fraction], ...]
    rhs: Fraction

    def as_dict(self) -> Dict[Edge, Fraction]:
        return dict(self.terms)

    def evaluate(self, subset: Iterable[str]) -> Fraction:
        """Value of the expression at delta(S); nonpositive on every cut."""
        s = set(subset)
        total = sum((c for (u, v), c in self.terms if (u in s) != (v in s)), Fraction(0))
        return total - self.rhs

    def scaled(self, factor) -> 'LinearExpression':
        f = Fraction(factor)
        return LinearExpression(tuple((e, c * f) for e, c in self.terms), self.rhs * f)


@dataclass(frozen=True)
class TriangularForm:
    kind: FormKind
    u: str
    v: str
    w: str

    def __post_init__(self):
        if len({self.u, self.v, self.w}) != 3:
            raise InequalityError(f"Una forma triangular necesita tres nodos distintos, se recibió "
                                  f"{self.u}, {self.v}, {self.w}")
        if FormKind(self.kind) is FormKind.CANONICAL:
            raise InequalityError("Resuelva la elección canónica antes de construir la forma")


# Coefficients of x_uv, x_uw, x_vw and the constant moved to the rhs.
FORM_TABLE = {
    FormKind.UV_W: (1, -1, -1, 0),
    FormKind.WV_U: (-1, -1, 1, 0),
    FormKind.UW_V: (-1, 1, -1, 0),
    FormKind.UVW: (1, 1, 1, 2),
}


def expand_form(form: TriangularForm) -> LinearExpression:
    """
    Expand a triangular form into a linear expression.

    Delta(u,v;w) = x_uv - x_uw - x_vw and Delta(u,v,w) = x_uv + x_uw + x_vw - 2.
    """
    c_uv, c_uw, c_vw, constant = FORM_TABLE[FormKind(form.kind)]
    terms = {
        edge_key(form.u, form.v): Fraction(c_uv),
        edge_key(form.u, form.w): Fraction(c_uw),
        edge_key(form.v, form.w): Fraction(c_vw),
    }
    return LinearExpression(tuple((e, terms[e]) for e in sort_edges(terms)), Fraction(constant))


def form_cancels(kind: FormKind, coefficient: Fraction) -> bool:
    """True when adding |a| times the form removes the coefficient a of x_uv."""
    if coefficient == 0:
        return True
    return coefficient + abs(coefficient) * FORM_TABLE[FormKind(kind)][0] == 0


def switch(ineq: Inequality, subset: Iterable[str]) -> Inequality:
    """
    S-switching: a'_e = (-1)^delta_e(S) a_e and a'_0 = a_0 - a . delta(S).

    Raises:
        InequalityError: If S contains an unknown node
    """
    s = frozenset(str(v) for v in subset)
    unknown = [v for v in s if not ineq.graph.has_node(v)]
    if unknown:
        raise InequalityError(f"Nodos desconocidos {format_node_set(unknown)} en el conjunto de switching")
    shift = Fraction(0)
    coeffs = []
    for (u, v), c in ineq.coeffs:
        if (u in s) != (v in s):
            shift += c
            coeffs.append(((u, v), -c))
        else:
            coeffs.append(((u, v), c))
    return Inequality(ineq.graph, tuple(coeffs), ineq.rhs - shift)


def is_automorphism(graph: Graph, sigma: Mapping[str, str]) -> bool:
    nodes = set(graph.nodes)
    if set(sigma) != nodes or set(sigma.values()) != nodes:
        return False
    return all(graph.has_edge(sigma[u], sigma[v]) for u, v in graph.edges)


def permute(ineq: Inequality, sigma: Mapping[str, str], check: bool = True) -> Inequality:
    """
    Permutation: a'_ij = a_sigma(i)sigma(j), rhs unchanged.

    Args:
        ineq: Inequality to permute
        sigma: Node bijection; missing nodes are fixed
        check: Verify that sigma is an automorphism of the graph

    Raises:
        InequalityError: If sigma is not a bijection or does not preserve edges
    """
    graph = ineq.graph
    full = {v: sigma.get(v, v) for v in graph.nodes}
    if check:
        if set(sigma) - set(graph.nodes):
            raise InequalityError(f"La permutación mueve nodos desconocidos "
                                  f"{format_node_set(set(sigma) - set(graph.nodes))}")
        if set(full.values()) != set(graph.nodes):
            raise InequalityError("La permutación no es una biyección de los nodos")
        if not is_automorphism(graph, full):
            raise InequalityError(f"La permutación no es un automorfismo de {graph.name}")
    inverse = {image: v for v, image in full.items()}
    values = {}
    for (u, v), c in ineq.coeffs:
        values[edge_key(inverse[u], inverse[v])] = c
    return Inequality(graph, tuple((e, values[e]) for e in sort_edges(values)), ineq.rhs)


def relabel(ineq: Inequality, mapping: Mapping[str, str],
            name: Optional[str] = None) -> Inequality:
    """
    Move an inequality onto a relabeled copy of its graph.

    Args:
        ineq: Inequality to relabel
        mapping: Injective map old label -> new label; missing labels are kept
        name: Name of the relabeled graph

    Raises:
        InequalityError: If the mapping merges two nodes
    """
    graph = ineq.graph
    full = {v: str(mapping.get(v, v)) for v in graph.nodes}
    if len(set(full.values())) != len(full):
        raise InequalityError("El reetiquetado debe ser inyectivo")
    try:
        new_graph = Graph.build(full.values(), ((full[u], full[v]) for u, v in graph.edges),
                                name or graph.name)
    except GraphError as e:
        raise InequalityError(str(e)) from e
    return Inequality.build(new_graph, {(full[u], full[v]): c for (u, v), c in ineq.coeffs},
                            ineq.rhs)


def collapse(ineq: Inequality, u: str, v: str) -> Inequality:
    """
    uv-collapsing: contract uv keeping label u, merge a_uj and a_vj.

    Raises:
        InequalityError: If uv is not an edge
    """
    graph = ineq.graph
    if not graph.has_edge(u, v):
        raise InequalityError(f"No se puede colapsar la arista desconocida {u}-{v} de {graph.name}")
    contracted = contract_edge(graph, u, v)
    values: Dict[Edge, Fraction] = defaultdict(Fraction)
    for (i, j), c in ineq.coeffs:
        if {i, j} == {u, v}:
            continue
        i = u if i == v else i
        j = u if j == v else j
        values[edge_key(i, j)] += c
    return Inequality.build(contracted, values, ineq.rhs)


def zero_lift(ineq: Inequality, sub: Graph, sup: Graph) -> Inequality:
    """
    Zero-lifting from a subgraph to a supergraph.

    Raises:
        InequalityError: If ineq is not on sub or sub is not a subgraph of sup
    """
    if ineq.graph != sub:
        raise InequalityError(f"La desigualdad sobre {ineq.graph.name} no está definida sobre {sub.name}")
    if not sub.is_subgraph_of(sup):
        raise InequalityError(f"{sub.name} no es un subgrafo de {sup.name}")
    return Inequality(sup, ineq.coeffs, ineq.rhs)


def support_graph(ineq: Inequality) -> Graph:
    """Subgraph spanned by the edges with nonzero coefficient."""
    nodes = {v for e in ineq.support for v in e}
    return Graph.build(nodes, ineq.support, f"supp({ineq.graph.name})")


def normalize(ineq: Inequality) -> Inequality:
    """
    Scale by a positive rational so that coefficients and rhs are coprime integers.

    The zero inequality 0 <= r keeps r's sign: it becomes 0 <= 1, 0 <= 0 or 0 <= -1.
    """
    values = [c for _, c in ineq.coeffs] + [ineq.rhs]
    nonzero = [x for x in values if x != 0]
    if not nonzero:
        return ineq
    scale = math.lcm(*(x.denominator for x in nonzero))
    divisor = math.gcd(*(int(x * scale) for x in nonzero))
    factor = Fraction(scale, divisor)
    return Inequality(ineq.graph, tuple((e, c * factor) for e, c in ineq.coeffs),
                      ineq.rhs * factor)


def is_triangle_inequality(ineq: Inequality) -> bool:
    """
    True for the switchings of x_uv - x_uw - x_vw <= 0 up to positive scaling.

    The support must be a triangle with equal |coefficients| c, an odd number
    of positive signs, and rhs = c * (positives - 1).
    """
    if len(ineq.coeffs) != 3:
        return False
    nodes = {v for e in ineq.support for v in e}
    if len(nodes) != 3:
        return False
    magnitudes = {abs(c) for _, c in ineq.coeffs}
    if len(magnitudes) != 1:
        return False
    c = magnitudes.pop()
    positives = sum(1 for _, x in ineq.coeffs if x > 0)
    return positives % 2 == 1 and ineq.rhs == c * (positives - 1)


def make_triangle(graph: Graph, u: str, v: str, w: str) -> Inequality:
    """Triangle inequality x_uv - x_uw - x_vw <= 0 on graph."""
    return Inequality.build(graph, {(u, v): 1, (u, w): -1, (v, w): -1}, 0)
