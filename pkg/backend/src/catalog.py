"""
Catalog module for the cutlift toolkit.
Generators for the named inequality families (triangle, cycle,
pentagonal, hypermetric), built-in graph names, and the line-oriented
text formats for graphs, inequalities, bundles and elimination plans.
"""

import itertools
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from cut_geometry import CapExceededError
from graph_core import (
    EliminationPlan, FormKind, Graph, GraphError, complete_graph,
    complete_multipartite_graph, cycle_edges, cycle_graph, edge_key,
)
from inequality_ops import Inequality, InequalityError, make_triangle
from validation import (
    sanitize_line, validate_family_params, validate_form_name, validate_fraction_token,
    validate_graph_name, validate_label,
)
from verify import check_validity

logger = logging.getLogger(__name__)

SECTION_SEPARATOR = '---'


class CatalogError(Exception):
    """Custom exception for catalog generators and built-in names"""
    pass


class ParseError(CatalogError):
    """Parse failure carrying the 1-based line number and the offending token."""

    def __init__(self, message: str, line: int, token: str = ''):
        self.line = line
        self.token = token
        detail = f" (token '{token}')" if token else ''
        super().__init__(f"línea {line}: {message}{detail}")


@dataclass(frozen=True)
class FamilySpec:
    """Family name plus its parameters, validated on construction."""

    family: str
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        is_valid, error = validate_family_params(self.family, self.params)
        if not is_valid:
            raise CatalogError(error)


def make_cycle(graph: Graph, cycle: Sequence[Tuple[str, str]],
               odd: Iterable[Tuple[str, str]]) -> Inequality:
    """
    Cycle inequality sum_{F} x_e - sum_{C minus F} x_e <= |F| - 1.

    Args:
        graph: Graph containing the cycle
        cycle: Edges of the cycle C
        odd: Odd subset F of C

    Raises:
        CatalogError: If C is not a cycle of graph, F is not in C or |F| is even
    """
    edges = [edge_key(str(u), str(v)) for u, v in cycle]
    odd_edges = {edge_key(str(u), str(v)) for u, v in odd}
    is_valid, error = validate_family_params('cycle', {'cycle': edges, 'F': odd_edges})
    if not is_valid:
        raise CatalogError(error)

    for u, v in edges:
        if not graph.has_edge(u, v):
            raise CatalogError(f"La arista de ciclo {u}-{v} no es una arista de {graph.name}")
    ring = nx.Graph(edges)
    if (len(set(edges)) != len(edges) or not nx.is_connected(ring)
            or any(d != 2 for _, d in ring.degree())):
        raise CatalogError("Las aristas dadas no forman un ciclo")
    if not odd_edges <= set(edges):
        raise CatalogError("F debe ser un subconjunto de las aristas del ciclo")

    coeffs = {e: (1 if e in odd_edges else -1) for e in edges}
    return Inequality.build(graph, coeffs, len(odd_edges) - 1)


def make_hypermetric(b: Sequence[int], n: Optional[int] = None,
                     labels: Optional[Sequence[str]] = None) -> Inequality:
    """
    Hypermetric inequality sum_{i<j} b_i b_j x_ij <= 0 on K_n, with sum(b) = 1.

    The result is re-checked for validity by enumeration when K_n is within
    the node cap.

    Args:
        b: Integer vector, padded with zeros up to n
        n: Number of nodes, len(b) by default
        labels: Node labels, 1..n by default

    Raises:
        CatalogError: If sum(b) != 1 or the generated inequality is not valid
    """
    values = [Fraction(x) for x in b]
    is_valid, error = validate_family_params('hypermetric', {'b': values})
    if not is_valid:
        raise CatalogError(error)
    n = n or len(values)
    if n < len(values):
        raise CatalogError(f"n={n} es menor que la longitud de b ({len(values)})")
    values = [int(x) for x in values] + [0] * (n - len(values))
    graph = complete_graph(labels if labels is not None else n)
    if len(graph.nodes) != n:
        raise CatalogError(f"Se esperaban {n} etiquetas, se recibieron {len(graph.nodes)}")

    order = list(labels) if labels is not None else [str(i) for i in range(1, n + 1)]
    coeffs = {(order[i], order[j]): values[i] * values[j]
              for i, j in itertools.combinations(range(n), 2)}
    ineq = Inequality.build(graph, coeffs, 0)

    try:
        valid, violating = check_validity(ineq)
    except CapExceededError:
        logger.warning(f"Skipping validity re-check of hypermetric inequality on K{n}")
        return ineq
    if not valid:
        error_msg = f"Error interno: la hipermétrica b={values} es violada por S={sorted(violating)}"
        logger.error(error_msg)
        raise CatalogError(error_msg)
    return ineq


def make_pentagonal(labels: Optional[Sequence[str]] = None) -> Inequality:
    """x_12 + x_34 + x_35 + x_45 - sum_{u in {1,2}, v in {3,4,5}} x_uv <= 0 on K_5."""
    return make_hypermetric((-1, -1, 1, 1, 1), 5, labels)


def make_family(spec: FamilySpec) -> Inequality:
    """
    Generate a family member from its FamilySpec.

    Params:
        triangle: 'graph' (K_3 by default), 'nodes' (u, v, w)
        cycle: 'n' and 'F' as 1-based positions along C_n, or 'graph', 'cycle', 'F' edges
        pentagonal: optional 'labels'
        hypermetric: 'b', optional 'n' and 'labels'
    """
    params = spec.params
    if spec.family == 'triangle':
        graph = params.get('graph') or complete_graph(3)
        u, v, w = params.get('nodes') or graph.nodes[:3]
        if not (graph.has_edge(u, v) and graph.has_edge(u, w) and graph.has_edge(v, w)):
            raise CatalogError(f"Los nodos {u}, {v}, {w} no forman un triángulo de {graph.name}")
        return make_triangle(graph, u, v, w)
    if spec.family == 'cycle':
        if 'graph' in params:
            return make_cycle(params['graph'], params['cycle'], params['F'])
        n = int(params.get('n', len(params.get('cycle') or ())))
        edges = cycle_edges(n)
        positions = [int(i) for i in params['F']]
        if any(i < 1 or i > n for i in positions):
            raise CatalogError(f"Las posiciones de F deben estar entre 1 y {n}")
        return make_cycle(cycle_graph(n), edges, [edges[i - 1] for i in positions])
    if spec.family == 'pentagonal':
        return make_pentagonal(params.get('labels'))
    return make_hypermetric(params['b'], params.get('n'), params.get('labels'))


BUILTIN_COMPLETE = re.compile(r'^K(\d+)$')
BUILTIN_CYCLE = re.compile(r'^C(\d+)$')
BUILTIN_MULTIPARTITE = re.compile(r'^K(\d+(?:,\d+)+)$')


def resolve_graph(name: str) -> Graph:
    """
    Built-in graphs: K<n>, C<n> and K<a>,<b>,... on labels 1..n.

    Raises:
        CatalogError: If the name is not a built-in graph
    """
    try:
        match = BUILTIN_COMPLETE.match(name)
        if match:
            return complete_graph(int(match.group(1)))
        match = BUILTIN_CYCLE.match(name)
        if match:
            return cycle_graph(int(match.group(1)))
        match = BUILTIN_MULTIPARTITE.match(name)
        if match:
            sizes = [int(s) for s in match.group(1).split(',')]
            labels = iter(str(i) for i in range(1, sum(sizes) + 1))
            return complete_multipartite_graph([[next(labels) for _ in range(s)] for s in sizes],
                                               name)
    except GraphError as e:
        raise CatalogError(str(e)) from e
    raise CatalogError(f"Grafo desconocido '{name}'; los predefinidos son K<n>, C<n> y K<a>,<b>,...")


def _lines(text: str, offset: int = 0) -> List[Tuple[int, List[str]]]:
    rows = []
    for number, raw in enumerate(text.splitlines(), start=1 + offset):
        line = sanitize_line(raw)
        if line:
            rows.append((number, line.split()))
    return rows


def _sections(text: str) -> List[List[Tuple[int, List[str]]]]:
    sections: List[List[Tuple[int, List[str]]]] = [[]]
    for number, tokens in _lines(text):
        if tokens == [SECTION_SEPARATOR]:
            sections.append([])
        else:
            sections[-1].append((number, tokens))
    return sections


def _label(token: str, line: int) -> str:
    is_valid, error = validate_label(token)
    if not is_valid:
        raise ParseError(error, line, token)
    return token


def _fraction(token: str, line: int) -> Fraction:
    is_valid, error = validate_fraction_token(token)
    if not is_valid:
        raise ParseError(error, line, token)
    return Fraction(token)


def _header(rows, keyword: str, arity: int) -> Tuple[int, List[str]]:
    if not rows:
        raise ParseError(f"Falta la cabecera '{keyword}'", 1)
    number, tokens = rows[0]
    if tokens[:len(keyword.split())] != keyword.split() or len(tokens) != arity:
        raise ParseError(f"Se esperaba la cabecera '{keyword} <nombre>'", number, ' '.join(tokens))
    name = tokens[-1]
    is_valid, error = validate_graph_name(name)
    if not is_valid:
        raise ParseError(error, number, name)
    return number, tokens


def _parse_graph_rows(rows) -> Graph:
    _, tokens = _header(rows, 'graph', 2)
    name = tokens[1]
    nodes: List[str] = []
    edges: List[Tuple[str, str]] = []
    declared = set()
    seen = set()
    for number, tokens in rows[1:]:
        kind = tokens[0]
        if kind == 'node' and len(tokens) == 2:
            label = _label(tokens[1], number)
            if label in declared:
                raise ParseError("Nodo declarado dos veces", number, label)
            declared.add(label)
            nodes.append(label)
        elif kind == 'edge' and len(tokens) == 3:
            u, v = _label(tokens[1], number), _label(tokens[2], number)
            if u == v:
                raise ParseError("No se permiten lazos", number, f"{u} {v}")
            for end in (u, v):
                if end not in declared:
                    raise ParseError("La arista usa un nodo no declarado", number, end)
            if edge_key(u, v) in seen:
                raise ParseError("Arista declarada dos veces", number, f"{u} {v}")
            seen.add(edge_key(u, v))
            edges.append((u, v))
        else:
            raise ParseError("Se esperaba 'node <etiqueta>' o 'edge <u> <v>'", number, ' '.join(tokens))
    return Graph.build(nodes, edges, name)


def _parse_inequality_rows(rows, graph: Optional[Graph]) -> Inequality:
    number, tokens = _header(rows, 'ineq over', 3)
    name = tokens[2]
    if graph is None:
        try:
            graph = resolve_graph(name)
        except CatalogError as e:
            raise ParseError(str(e), number, name) from e
    elif name != graph.name:
        raise ParseError(f"La desigualdad es sobre '{name}' pero el grafo es '{graph.name}'",
                         number, name)

    coeffs: Dict[Tuple[str, str], Fraction] = {}
    rhs: Optional[Fraction] = None
    for number, tokens in rows[1:]:
        if rhs is not None:
            raise ParseError("Nada puede seguir a la línea 'rhs'", number, ' '.join(tokens))
        if tokens[0] == 'coef' and len(tokens) == 4:
            u, v = _label(tokens[1], number), _label(tokens[2], number)
            if u == v:
                raise ParseError("Coeficiente sobre un lazo", number, f"{u} {v}")
            if not graph.has_edge(u, v):
                raise ParseError(f"No es una arista de {graph.name}", number, f"{u} {v}")
            if edge_key(u, v) in coeffs:
                raise ParseError("Coeficiente dado dos veces", number, f"{u} {v}")
            coeffs[edge_key(u, v)] = _fraction(tokens[3], number)
        elif tokens[0] == 'rhs' and len(tokens) == 2:
            rhs = _fraction(tokens[1], number)
        else:
            raise ParseError("Se esperaba 'coef <u> <v> <p/q>' o 'rhs <p/q>'", number,
                             ' '.join(tokens))
    if rhs is None:
        raise ParseError("Falta la línea 'rhs'", rows[-1][0] if rows else 1)
    return Inequality.build(graph, coeffs, rhs)


def parse_graph(text: str) -> Graph:
    """
    Parse the graph format: 'graph <name>', 'node <label>' lines, 'edge <u> <v>' lines.

    Raises:
        ParseError: With the line number and offending token
    """
    sections = _sections(text)
    if len(sections) != 1:
        raise ParseError("Separador de sección inesperado en un archivo de grafo",
                         sections[1][0][0] if sections[1] else 1, SECTION_SEPARATOR)
    try:
        return _parse_graph_rows(sections[0])
    except GraphError as e:
        raise ParseError(str(e), sections[0][0][0]) from e


def parse_inequality(text: str, graph: Optional[Graph] = None) -> Inequality:
    """
    Parse an inequality file or a bundle.

    A bundle is a graph section, '---', then 'ineq over <name>', 'coef' lines
    and a final 'rhs' line. A bare inequality is placed on graph, or on the
    built-in graph of that name.

    Raises:
        ParseError: With the line number and offending token
    """
    sections = _sections(text)
    if len(sections) == 2:
        try:
            graph = _parse_graph_rows(sections[0])
        except GraphError as e:
            raise ParseError(str(e), sections[0][0][0] if sections[0] else 1) from e
        rows = sections[1]
    elif len(sections) == 1:
        rows = sections[0]
    else:
        raise ParseError("Demasiadas secciones", sections[2][0][0] if sections[2] else 1,
                         SECTION_SEPARATOR)
    try:
        return _parse_inequality_rows(rows, graph)
    except InequalityError as e:
        raise ParseError(str(e), rows[0][0] if rows else 1) from e


def parse_plan(text: str) -> Tuple[EliminationPlan, Optional[Graph]]:
    """
    Parse an elimination plan: 'elim <u> <v> -> <w> [form]' lines.

    The target graph G' may lead the file as a graph section followed by '---'.

    Returns:
        Tuple of (plan, target graph or None)

    Raises:
        ParseError: With the line number and offending token
    """
    sections = _sections(text)
    target = None
    if len(sections) == 2:
        try:
            target = _parse_graph_rows(sections[0])
        except GraphError as e:
            raise ParseError(str(e), sections[0][0][0] if sections[0] else 1) from e
        rows = sections[1]
    elif len(sections) == 1:
        rows = sections[0]
    else:
        raise ParseError("Demasiadas secciones", sections[2][0][0] if sections[2] else 1,
                         SECTION_SEPARATOR)

    eliminated, associated, forms = [], [], []
    for number, tokens in rows:
        if tokens[0] != 'elim' or len(tokens) not in (5, 6) or tokens[3] != '->':
            raise ParseError("Se esperaba 'elim <u> <v> -> <w> [forma]'", number, ' '.join(tokens))
        u, v, w = (_label(t, number) for t in (tokens[1], tokens[2], tokens[4]))
        if u == v:
            raise ParseError("No se puede eliminar un lazo", number, f"{u} {v}")
        form = tokens[5] if len(tokens) == 6 else FormKind.CANONICAL.value
        is_valid, error = validate_form_name(form)
        if not is_valid:
            raise ParseError(error, number, form)
        eliminated.append(edge_key(u, v))
        associated.append(w)
        forms.append(FormKind(form))
    if not eliminated:
        raise ParseError("El plan no elimina ninguna arista", rows[-1][0] if rows else 1)
    try:
        plan = EliminationPlan(tuple(eliminated), tuple(associated), tuple(forms))
    except GraphError as e:
        raise ParseError(str(e), rows[0][0]) from e
    return plan, target


def serialize_graph(graph: Graph) -> str:
    lines = [f"graph {graph.name}"]
    lines += [f"node {v}" for v in graph.nodes]
    lines += [f"edge {u} {v}" for u, v in graph.edges]
    return '\n'.join(lines) + '\n'


def serialize_inequality(ineq: Inequality, bundle: bool = False) -> str:
    """Inequality text in edge order; with bundle=True the graph section comes first."""
    lines = [f"ineq over {ineq.graph.name}"]
    lines += [f"coef {u} {v} {c}" for (u, v), c in ineq.coeffs]
    lines.append(f"rhs {ineq.rhs}")
    body = '\n'.join(lines) + '\n'
    if bundle:
        return serialize_graph(ineq.graph) + SECTION_SEPARATOR + '\n' + body
    return body


def serialize_plan(plan: EliminationPlan, target: Optional[Graph] = None) -> str:
    lines = [f"elim {u} {v} -> {w} {FormKind(form).value}" for (u, v), w, form in plan]
    body = '\n'.join(lines) + '\n'
    if target is not None:
        return serialize_graph(target) + SECTION_SEPARATOR + '\n' + body
    return body


def read_text(path: str) -> str:
    """
    Read an ASCII text file.

    Raises:
        ParseError: On a non-ASCII byte, with its line and byte offset
    """
    with open(path, 'rb') as f:
        data = f.read()
    try:
        return data.decode('ascii').replace('\r\n', '\n')
    except UnicodeDecodeError as e:
        line = data[:e.start].count(b'\n') + 1
        raise ParseError(f"byte no ASCII en la posición {e.start}", line,
                         f"0x{data[e.start]:02x}") from e


def write_text(path: str, text: str) -> None:
    with open(path, 'w', encoding='ascii', newline='\n') as f:
        f.write(text)
    logger.debug(f"Wrote {len(text)} bytes to {path}")
