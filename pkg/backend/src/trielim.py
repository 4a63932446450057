"""
Triangular elimination module for the cutlift toolkit.
Lifts an inequality on G to a triangular elimination G' by adding
multiples of triangular forms, collapses lifted inequalities back, and
reports the graph conditions under which facets are preserved.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Tuple

from cut_geometry import CapExceededError
from graph_core import (
    Edge, EliminationPlan, FormKind, Graph, GraphError, Layout, check_trielim_graph,
    edge_key, format_node_set, multistage_graphs, sort_nodes,
)
from inequality_ops import (
    Inequality, InequalityError, TriangularForm, collapse, expand_form, form_cancels,
    is_triangle_inequality, switch,
)
from validation import validate_partite_grouping
from verify import VerificationError, is_facet

logger = logging.getLogger(__name__)


class EliminationError(Exception):
    """Custom exception for triangular elimination errors"""
    pass


class SwitchingRequiredError(EliminationError):
    """Raised when collapsing back needs a switching first; carries the switching set."""

    def __init__(self, message: str, switching_set: FrozenSet[str]):
        super().__init__(message)
        self.switching_set = switching_set


@dataclass(frozen=True)
class EliminationResult:
    """Lifted inequality plus everything needed to audit or undo the lift."""

    output: Inequality
    plan_used: EliminationPlan
    rhs_shift: Fraction
    source: Inequality
    stages: Tuple[Tuple[Graph, Inequality], ...] = field(default=(), compare=False)
    pruned: Tuple[str, ...] = ()


def resolve_form(kind: FormKind, coefficient: Fraction) -> FormKind:
    """
    Resolve the canonical choice and check that the form cancels x_uv.

    Canonical: Delta(u,v;w) when a_uv <= 0, Delta(u,w;v) when a_uv > 0.

    Raises:
        EliminationError: If the form cannot cancel the coefficient
    """
    kind = FormKind(kind)
    if kind is FormKind.CANONICAL:
        return FormKind.UV_W if coefficient <= 0 else FormKind.UW_V
    if not form_cancels(kind, coefficient):
        raise EliminationError(f"La forma {kind.value} no puede cancelar el coeficiente {coefficient}")
    return kind


def eliminate(ineq: Inequality, graph: Graph, target: Graph, plan: EliminationPlan,
              prune: bool = False) -> EliminationResult:
    """
    Triangular elimination of an inequality.

    a'.x - a'_0 = a.x - a_0 + sum_i |a_{u_i v_i}| (Delta_i(x) - constant_i)

    Args:
        ineq: Inequality on graph
        graph: Source graph G
        target: Triangular elimination G' of G w.r.t. plan
        plan: Eliminated edges, associated nodes and form choices
        prune: Drop associated nodes whose eliminated coefficient is zero

    Returns:
        EliminationResult whose output lives on target (or target minus pruned nodes)

    Raises:
        EliminationError: If the graphs do not match the plan or a form does not cancel
    """
    if ineq.graph != graph:
        raise EliminationError(f"La desigualdad está sobre {ineq.graph.name}, no sobre {graph.name}")
    try:
        check_trielim_graph(graph, target, plan)
    except GraphError as e:
        logger.error(f"Invalid elimination target: {str(e)}")
        raise EliminationError(str(e)) from e

    values: Dict[Edge, Fraction] = ineq.as_dict()
    shift = Fraction(0)
    resolved: List[FormKind] = []
    unused: List[str] = []

    for (u, v), w, kind in plan:
        a = ineq.coeff(u, v)
        form = resolve_form(kind, a)
        resolved.append(form)
        if a == 0:
            unused.append(w)
            continue
        expression = expand_form(TriangularForm(form, u, v, w))
        for e, c in expression.terms:
            values[e] = values.get(e, Fraction(0)) + abs(a) * c
        shift += abs(a) * expression.rhs

    for e in plan.eliminated:
        if values.get(e, 0) != 0:
            raise EliminationError(f"Error interno: la arista eliminada {e[0]}-{e[1]} conservó "
                                   f"el coeficiente {values[e]}")
        values.pop(e, None)

    lifted_graph = target
    if prune and unused:
        lifted_graph = target.remove_nodes(unused, f"{target.name}-{format_node_set(unused)}")
        logger.info(f"Pruned unused associated nodes {format_node_set(unused)}")

    output = Inequality.build(lifted_graph, {e: c for e, c in values.items() if c != 0},
                              ineq.rhs + shift)
    logger.info(f"Eliminated {len(plan)} edges of {graph.name} into {lifted_graph.name}: "
                f"support {len(output.coeffs)}, rhs {output.rhs}")
    return EliminationResult(output, plan.with_forms(resolved), shift, ineq,
                             pruned=tuple(unused) if prune else ())


def collapse_back(result: EliminationResult, auto_switch: bool = False) -> Inequality:
    """
    Undo an elimination by collapsing every associated node w_i.

    Delta(w,v;u) forms collapse w_i onto u_i; the other forms onto v_i.
    Delta(u,v,w) forms with a nonzero coefficient need switching by their
    w_i first, which turns them into Delta(u,v;w).

    Args:
        result: Result of eliminate or eliminate_multistage
        auto_switch: Apply the required switching instead of raising

    Returns:
        The source inequality, restricted to the edges of the source graph

    Raises:
        SwitchingRequiredError: If a switching is needed and auto_switch is off
        EliminationError: If the collapsed inequality has support outside E(G)
    """
    source = result.source
    current = result.output
    rows = [row for row in result.plan_used if row[1] not in result.pruned]

    switching = frozenset(w for (u, v), w, kind in rows
                          if kind is FormKind.UVW and source.coeff(u, v) != 0)
    if switching:
        if not auto_switch:
            raise SwitchingRequiredError(
                f"Colapsar de vuelta requiere antes el switching por {format_node_set(switching)}",
                switching)
        logger.debug(f"Switching by {format_node_set(switching)} before collapsing")
        current = switch(current, switching)

    try:
        for (u, v), w, kind in rows:
            keep = u if kind is FormKind.WV_U else v
            current = collapse(current, keep, w)
    except InequalityError as e:
        raise EliminationError(f"No se puede colapsar de vuelta: {str(e)}") from e

    graph = source.graph
    stray = [e for e in current.support if not graph.has_edge(*e)]
    if stray:
        raise EliminationError(f"La desigualdad colapsada tiene soporte fuera de {graph.name}: "
                               f"{', '.join(f'{u}-{v}' for u, v in stray)}")
    return Inequality.build(graph, current.as_dict(), current.rhs)


class ConditionStatus(str, Enum):
    PASS = 'pass'
    FAIL = 'fail'
    NOT_GUARANTEED = 'not guaranteed'
    UNCHECKED = 'unchecked'


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    status: ConditionStatus
    detail: str


@dataclass(frozen=True)
class FacetConditionReport:
    """Per-condition verdicts of a facet-preservation check."""

    checks: Tuple[ConditionCheck, ...]
    independent: Optional[bool] = None

    @property
    def all_pass(self) -> bool:
        return all(c.status is ConditionStatus.PASS for c in self.checks)

    @property
    def violated(self) -> bool:
        return any(c.status in (ConditionStatus.FAIL, ConditionStatus.NOT_GUARANTEED)
                   for c in self.checks)

    def status(self, name: str) -> ConditionStatus:
        for check in self.checks:
            if check.name == name:
                return check.status
        raise KeyError(name)

    def lines(self) -> List[str]:
        out = [f"condition {c.name}: {c.status.value} ({c.detail})" for c in self.checks]
        if self.independent is not None:
            out.append(f"associated nodes independent: {'yes' if self.independent else 'no'}")
        return out


def _facet_check(ineq: Inequality, name: str, max_nodes: Optional[int]) -> ConditionCheck:
    try:
        facet, certificate = is_facet(ineq, max_nodes)
    except CapExceededError as e:
        return ConditionCheck(name, ConditionStatus.UNCHECKED, str(e))
    except VerificationError as e:
        return ConditionCheck(name, ConditionStatus.FAIL, str(e))
    need = len(ineq.graph.edges) - 1
    status = ConditionStatus.PASS if facet else ConditionStatus.FAIL
    return ConditionCheck(name, status, f"dim={certificate.affine_dim} need={need}")


def _not_triangle_check(ineq: Inequality, name: str) -> ConditionCheck:
    nodes = {v for e in ineq.support for v in e}
    if len(nodes) > 3:
        return ConditionCheck(name, ConditionStatus.PASS,
                              f"support graph has {len(nodes)} nodes")
    return ConditionCheck(name, ConditionStatus.NOT_GUARANTEED,
                          f"support graph has only {len(nodes)} nodes")


def check_facet_conditions(ineq: Inequality, graph: Graph, target: Graph,
                           plan: EliminationPlan,
                           max_nodes: Optional[int] = None) -> FacetConditionReport:
    """
    Check the sufficient conditions for the elimination of a facet to be a facet.

    (i) ineq is facet inducing for CUT(G); (ii) N_G'(w_i) minus {u_i, v_i} lies
    in N_G(u_i) and N_G(v_i); (iii) ineq is not supported only by edges u_i l,
    v_i l (l a neighbour of w_i) and u_i v_i. For (iii) the operative test is
    that the support graph has more than three nodes; the literal edge-set
    test is reported in the detail.

    Returns:
        FacetConditionReport; never raises for condition failures
    """
    checks = [_facet_check(ineq, '(i)', max_nodes)]

    failures = []
    for (u, v), w in zip(plan.eliminated, plan.associated):
        if not target.has_node(w):
            failures.append(f"{w} missing from {target.name}")
            continue
        outside = set(target.neighbours(w)) - {u, v}
        common = graph.neighbours(u) & graph.neighbours(v)
        extra = outside - common
        if extra:
            failures.append(f"N({w}) has {format_node_set(extra)} outside N({u}) & N({v})")
    checks.append(ConditionCheck(
        '(ii)', ConditionStatus.FAIL if failures else ConditionStatus.PASS,
        '; '.join(failures) if failures else 'neighbourhoods nested'))

    third = _not_triangle_check(ineq, '(iii)')
    support = set(ineq.support)
    literal_fail = []
    for (u, v), w in zip(plan.eliminated, plan.associated):
        if not target.has_node(w):
            continue
        allowed = {(u, v)}
        for l in target.neighbours(w) - {u, v}:
            if graph.has_node(l):
                allowed.add(edge_key(u, l))
                allowed.add(edge_key(v, l))
        if support <= allowed:
            literal_fail.append(w)
    literal = ('literal edge-set test holds' if not literal_fail else
               f"literal edge-set test fails at {format_node_set(literal_fail)}")
    checks.append(ConditionCheck('(iii)', third.status, f"{third.detail}; {literal}"))

    fresh = set(plan.associated)
    independent = not any(u in fresh and v in fresh for u, v in target.edges)
    report = FacetConditionReport(tuple(checks), independent)
    logger.info(f"Facet conditions for {graph.name} -> {target.name}: "
                f"{', '.join(f'{c.name}={c.status.value}' for c in checks)}")
    return report


def _layout_grouping(layout: Layout) -> Tuple[List[int], Dict[str, int]]:
    part_of = {v: index for index, part in enumerate(layout.parts) for v in part}
    sizes = [len(nodes) for key, nodes in layout.groups if key.startswith('V')]
    grouping = {key: part_of[nodes[0]] for key, nodes in layout.groups if nodes}
    return sizes, grouping


def check_multistage_conditions(ineq: Inequality, layout: Layout,
                                max_nodes: Optional[int] = None) -> FacetConditionReport:
    """Conditions of the K_n to k-partite route: n >= 5, facet input, layout, non-triangle."""
    n = len(layout.source.nodes)
    checks = [ConditionCheck('n>=5', ConditionStatus.PASS if n >= 5 else ConditionStatus.FAIL,
                             f"n={n}")]
    checks.append(_facet_check(ineq, '(i)', max_nodes))

    sizes, grouping = _layout_grouping(layout)
    is_valid, error = validate_partite_grouping(sizes, grouping)
    checks.append(ConditionCheck('layout', ConditionStatus.PASS if is_valid else ConditionStatus.FAIL,
                                 error or f"{len(layout.parts)} parts"))

    if is_triangle_inequality(ineq):
        checks.append(ConditionCheck('non-triangle', ConditionStatus.FAIL,
                                     'input is a triangle inequality'))
    else:
        checks.append(_not_triangle_check(ineq, 'non-triangle'))

    fresh = set(layout.plan.associated)
    independent = not any(u in fresh and v in fresh for u, v in layout.target.edges)
    return FacetConditionReport(tuple(checks), independent)


def check_zero_lift_conditions(ineq: Inequality, graph: Graph, target: Graph,
                               anchor: Optional[str] = None,
                               max_nodes: Optional[int] = None) -> FacetConditionReport:
    """
    Check the sufficient conditions for the zero lift of a facet to be a facet.

    Setting: G' is G plus one node w, G is induced in G' and n >= 3.
    (i) ineq is facet inducing for CUT(G); (ii) some node u of G has
    N_G'(w) minus {u} inside N_G(u); (iii) the support graph of ineq has
    at least three nodes.

    Args:
        ineq: Inequality on graph
        graph: G
        target: G'
        anchor: Only try this node as u; every node of G by default
        max_nodes: Node cap override for the facet check

    Returns:
        FacetConditionReport; never raises for condition failures

    Raises:
        EliminationError: If anchor is not a node of G
    """
    if anchor is not None and not graph.has_node(anchor):
        raise EliminationError(f"El nodo ancla {anchor} no pertenece a {graph.name}")

    problems = []
    if len(graph.nodes) < 3:
        problems.append(f"n={len(graph.nodes)}")
    missing = [v for v in graph.nodes if not target.has_node(v)]
    if missing:
        problems.append(f"{format_node_set(missing)} missing from {target.name}")
    added = [v for v in target.nodes if not graph.has_node(v)]
    if len(added) != 1:
        problems.append(f"{target.name} adds {len(added)} nodes")
    if not missing:
        induced = graph.is_subgraph_of(target) and all(
            graph.has_edge(u, v) for u, v in target.edges
            if graph.has_node(u) and graph.has_node(v))
        if not induced:
            problems.append(f"{graph.name} is not induced in {target.name}")
    checks = [ConditionCheck('setting', ConditionStatus.FAIL if problems else ConditionStatus.PASS,
                             '; '.join(problems) if problems else f"w={added[0]}")]

    checks.append(_facet_check(ineq, '(i)', max_nodes))

    if problems:
        checks.append(ConditionCheck('(ii)', ConditionStatus.UNCHECKED, 'setting not met'))
    else:
        w = added[0]
        candidates = [anchor] if anchor is not None else graph.nodes
        nested = [u for u in candidates
                  if target.neighbours(w) - {u} <= graph.neighbours(u)]
        if nested:
            checks.append(ConditionCheck('(ii)', ConditionStatus.PASS, f"u={nested[0]}"))
        else:
            checks.append(ConditionCheck('(ii)', ConditionStatus.FAIL,
                                         f"no u with N({w}) - u inside N(u)"))

    nodes = {v for e in ineq.support for v in e}
    checks.append(ConditionCheck(
        '(iii)', ConditionStatus.PASS if len(nodes) >= 3 else ConditionStatus.NOT_GUARANTEED,
        f"support graph has {len(nodes)} nodes"))

    report = FacetConditionReport(tuple(checks))
    logger.info(f"Zero-lift conditions for {graph.name} -> {target.name}: "
                f"{', '.join(f'{c.name}={c.status.value}' for c in checks)}")
    return report


def eliminate_multistage(ineq: Inequality, layout: Layout,
                         prune: bool = False) -> EliminationResult:
    """
    Eliminate the clique of every source group V_l in turn, with canonical forms.

    Each stage lifts from G^(l-1) to G^(l); the last stage's inequality is
    placed on the k-partite target of the layout.

    Args:
        ineq: Non-triangle inequality on layout.source (K_n, n >= 5)
        layout: Output of build_kpartite_layout or build_bipartite_layout
        prune: Drop associated nodes that end up unused

    Returns:
        EliminationResult on layout.target, with the intermediate (G^(l), a^(l)) in stages

    Raises:
        EliminationError: If n < 5, ineq is a triangle inequality or lives elsewhere
    """
    source = layout.source
    if len(source.nodes) < 5:
        raise EliminationError(f"La eliminación multietapa requiere n >= 5, se recibió n={len(source.nodes)}")
    if ineq.graph != source:
        raise EliminationError(f"La desigualdad está sobre {ineq.graph.name}, no sobre {source.name}")
    if is_triangle_inequality(ineq):
        error_msg = "Las desigualdades triangulares quedan excluidas de la eliminación multietapa"
        logger.error(error_msg)
        raise EliminationError(error_msg)

    graphs = multistage_graphs(layout)
    current = ineq
    stages: List[Tuple[Graph, Inequality]] = [(graphs[0], ineq)]
    forms: Dict[Edge, FormKind] = {}
    shift = Fraction(0)
    for l in range(1, layout.stage_count + 1):
        members = set(layout.group(f"V{l}"))
        rows = [row for row in layout.plan if row[0][0] in members and row[0][1] in members]
        if not rows:
            stages.append((graphs[l], current))
            continue
        stage_plan = EliminationPlan(tuple(r[0] for r in rows), tuple(r[1] for r in rows),
                                     tuple(r[2] for r in rows))
        step = eliminate(current, graphs[l - 1], graphs[l], stage_plan)
        forms.update(zip(step.plan_used.eliminated, step.plan_used.forms))
        shift += step.rhs_shift
        current = step.output
        stages.append((graphs[l], current))
        logger.debug(f"Stage {l}: {graphs[l - 1].name} -> {graphs[l].name}")

    plan_used = layout.plan.with_forms([forms[e] for e in layout.plan.eliminated])
    target = layout.target
    unused: Tuple[str, ...] = ()
    if prune:
        used = {v for e in current.support for v in e}
        unused = tuple(w for w in plan_used.associated if w not in used)
        if unused:
            target = target.remove_nodes(unused, f"{target.name}-{format_node_set(unused)}")
    try:
        output = current.on_graph(target)
    except InequalityError as e:
        raise EliminationError(f"El soporte levantado no cabe en {target.name}: {str(e)}") from e
    logger.info(f"Multi-stage elimination {source.name} -> {target.name} in "
                f"{layout.stage_count} stages, support nodes "
                f"{len(sort_nodes({v for e in output.support for v in e}))}")
    return EliminationResult(output, plan_used, shift, ineq, tuple(stages), unused)
