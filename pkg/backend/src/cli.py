"""
Command-line interface for the cutlift toolkit.
Wires catalog, elimination, verification and equivalence into the
commands lift, verify, equiv, catalog, hull and canon. Standard output
carries only deterministic results; logs go to standard error.
"""

import functools
import logging
import os
import sys
from typing import Dict, List, Optional, Tuple

import click

from catalog import (
    CatalogError, FamilySpec, make_family, parse_graph, parse_inequality, parse_plan,
    read_text, resolve_graph, serialize_inequality, write_text,
)
from config import config
from cut_geometry import CutGeometryError
from equivalence import (
    EquivalenceError, are_ps_equivalent, canonical_form, find_bipartite_witness,
)
from graph_core import (
    Graph, GraphError, Layout, build_bipartite_layout, build_kpartite_layout, build_trielim_graph,
    format_node_set,
)
from inequality_ops import Inequality, InequalityError, relabel, zero_lift
from trielim import (
    EliminationError, check_facet_conditions, check_multistage_conditions,
    check_zero_lift_conditions, eliminate, eliminate_multistage,
)
from validation import FAMILY_NAMES, GROUP_KEY_PATTERN, ValidationError
from verify import (
    InvalidInequalityError, VerificationError, hull_oracle, is_facet, root_certificate,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2

KNOWN_ERRORS = (CatalogError, CutGeometryError, EliminationError, EquivalenceError,
                GraphError, InequalityError, ValidationError, VerificationError)


def setup_logging(level: Optional[str] = None):
    """Send log records to standard error so standard output stays deterministic."""
    numeric = getattr(logging, level.upper(), logging.WARNING) if level else config.log_level()
    logging.basicConfig(
        level=numeric,
        format='%(asctime)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True,
    )


def handle_errors(func):
    """Map toolkit exceptions to exit code 2 with the message on standard error."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except KNOWN_ERRORS as e:
            logger.debug(f"{type(e).__name__}: {str(e)}")
            click.echo(f"Error: {str(e)}", err=True)
            sys.exit(EXIT_USAGE)
        except OSError as e:
            click.echo(f"Error: {str(e)}", err=True)
            sys.exit(EXIT_USAGE)
    return wrapper


def load_inequality(path: str) -> Inequality:
    return parse_inequality(read_text(path))


def load_graph(ref: str) -> Graph:
    """Graph file when ref names one, otherwise a built-in graph name."""
    if os.path.isfile(ref):
        return parse_graph(read_text(ref))
    return resolve_graph(ref)


def resolve_cap(max_nodes: Optional[int]) -> Optional[int]:
    """Checked --max-nodes override; None keeps each check's default cap."""
    if max_nodes is None:
        return None
    return config.effective_max_nodes(max_nodes)


def to_layout_labels(ineq: Inequality, layout: Layout) -> Inequality:
    """Move an inequality on K_n onto the layout's source labels, in label order."""
    source = layout.source
    if ineq.graph == source:
        return ineq
    if len(ineq.graph.nodes) != len(source.nodes) or len(ineq.graph.edges) != len(source.edges):
        raise EliminationError(f"El grafo de entrada {ineq.graph.name} no coincide con {source.name}")
    mapping = dict(zip(ineq.graph.nodes, source.nodes))
    moved = relabel(ineq, mapping, source.name)
    if moved.graph != source:
        raise EliminationError(f"El grafo de entrada {ineq.graph.name} no coincide con {source.name}")
    return moved


def parse_kpartite_spec(spec: str) -> Tuple[List[int], Dict[str, int]]:
    """
    Parse "3,1,1:V1=0,V2=1,V3=2,W1=3" into part sizes and a grouping.

    Raises:
        click.BadParameter: On malformed text
    """
    try:
        sizes_text, grouping_text = spec.split(':', 1)
        sizes = [int(s) for s in sizes_text.split(',')]
        grouping = {}
        for item in grouping_text.split(','):
            key, part = item.split('=')
            if not GROUP_KEY_PATTERN.match(key.strip()):
                raise ValueError(key)
            grouping[key.strip()] = int(part)
    except ValueError:
        raise click.BadParameter(f"Se esperaba 'tamaños:V1=parte,W1=parte,...', se recibió '{spec}'")
    return sizes, grouping


def split_list(text: Optional[str]) -> Optional[List[str]]:
    if text is None:
        return None
    return [t.strip() for t in text.split(',') if t.strip()]


@click.group()
@click.option('--log-level', default=None,
              help='Logging level for standard error (overrides CUTLIFT_LOG_LEVEL).')
def cli(log_level):
    """Triangular elimination and cut polytope toolkit."""
    setup_logging(log_level)


@cli.command()
@click.option('--in', 'in_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--plan', 'plan_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--bipartite', nargs=2, type=int, default=None)
@click.option('--kpartite', default=None, help='Layout such as 3,1,1:V1=0,V2=1,V3=2,W1=3')
@click.option('--zero-lift', 'zero_target', default=None,
              help='Zero-lift onto this graph file or built-in name (G plus one node)')
@click.option('--anchor', default=None, help='With --zero-lift, the node u tried in condition (ii)')
@click.option('--fresh', default=None, help='Comma-separated labels of the associated nodes')
@click.option('--out', 'out_path', type=click.Path(dir_okay=False))
@click.option('--check-conditions', is_flag=True)
@click.option('--prune', is_flag=True, help='Drop associated nodes left unused')
@click.option('--max-nodes', type=int, default=None,
              help='Node cap for the facet check of --check-conditions')
@handle_errors
def lift(in_path, plan_path, bipartite, kpartite, zero_target, anchor, fresh, out_path,
         check_conditions, prune, max_nodes):
    """Lift an inequality by triangular elimination or zero-lifting."""
    chosen = sum(x is not None for x in (plan_path, bipartite, kpartite, zero_target))
    if chosen != 1:
        raise click.UsageError("Indique exactamente una de --plan, --bipartite, --kpartite o --zero-lift")
    if anchor is not None and zero_target is None:
        raise click.UsageError("--anchor requiere --zero-lift")
    cap = resolve_cap(max_nodes)

    ineq = load_inequality(in_path)
    report = None
    if zero_target:
        target = load_graph(zero_target)
        output = zero_lift(ineq, ineq.graph, target)
        if check_conditions:
            report = check_zero_lift_conditions(ineq, ineq.graph, target, anchor, cap)
    elif plan_path:
        plan, target = parse_plan(read_text(plan_path))
        if target is None:
            target = build_trielim_graph(ineq.graph, plan)
        output = eliminate(ineq, ineq.graph, target, plan, prune=prune).output
        if check_conditions:
            report = check_facet_conditions(ineq, ineq.graph, target, plan, cap)
    else:
        if bipartite:
            layout = build_bipartite_layout(*bipartite)
            ineq = to_layout_labels(ineq, layout)
        else:
            sizes, grouping = parse_kpartite_spec(kpartite)
            layout = build_kpartite_layout(sizes, grouping, node_labels=ineq.graph.nodes,
                                           fresh_labels=split_list(fresh))
            ineq = to_layout_labels(ineq, layout)
        output = eliminate_multistage(ineq, layout, prune=prune).output
        if check_conditions:
            report = check_multistage_conditions(ineq, layout, cap)

    text = serialize_inequality(output, bundle=True)
    if out_path:
        write_text(out_path, text)
        click.echo(f"LIFTED edges={len(output.graph.edges)} support={len(output.coeffs)} "
                   f"rhs={output.rhs}")
    else:
        click.echo(text, nl=False)

    if report is not None:
        for line in report.lines():
            click.echo(line)
        if report.violated:
            sys.exit(EXIT_NEGATIVE)


@cli.command()
@click.option('--in', 'in_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--facet', 'mode', flag_value='facet')
@click.option('--valid', 'mode', flag_value='valid')
@click.option('--certificate', is_flag=True, help='Dump the affinely independent roots')
@click.option('--max-nodes', type=int, default=None)
@handle_errors
def verify(in_path, mode, certificate, max_nodes):
    """Check validity or facetness by cut enumeration."""
    if mode is None:
        raise click.UsageError("Indique --facet o --valid")
    ineq = load_inequality(in_path)
    cap = resolve_cap(max_nodes)
    need = len(ineq.graph.edges) - 1

    if mode == 'valid':
        valid, violating, cert = root_certificate(ineq, cap)
        facet = True
    else:
        try:
            facet, cert = is_facet(ineq, cap)
            valid = True
        except InvalidInequalityError as e:
            valid, violating = False, e.violating
    if not valid:
        click.echo(f"INVALID dim=-1 need={need}")
        click.echo(f"violating S={format_node_set(violating)}")
        sys.exit(EXIT_NEGATIVE)

    if mode == 'valid':
        click.echo(f"VALID dim={cert.affine_dim} need={need}")
    else:
        click.echo(f"{'FACET' if facet else 'NOT_FACET'} dim={cert.affine_dim} need={need}")
    if certificate:
        for line in cert.lines():
            click.echo(line)
    if not facet:
        sys.exit(EXIT_NEGATIVE)


def _verdict(equivalent: bool, witness) -> str:
    return f"EQUIV {witness}" if equivalent else "NOT_EQUIV"


@cli.command()
@click.argument('first', type=click.Path(exists=True, dir_okay=False))
@click.argument('second', type=click.Path(exists=True, dir_okay=False))
@click.option('--fast-bipartite', nargs=2, type=int, default=None)
@click.option('--cross-check', is_flag=True,
              help='With --fast-bipartite, also search the lifted pair exhaustively')
@click.option('--max-nodes', type=int, default=None)
@handle_errors
def equiv(first, second, fast_bipartite, cross_check, max_nodes):
    """Decide permutation-switching equivalence."""
    cap = resolve_cap(max_nodes)
    q1, q2 = load_inequality(first), load_inequality(second)
    if not fast_bipartite:
        if cross_check:
            raise click.UsageError("--cross-check requiere --fast-bipartite")
        equivalent, witness = are_ps_equivalent(q1, q2, max_nodes=cap)
        click.echo(_verdict(equivalent, witness))
        sys.exit(EXIT_OK if equivalent else EXIT_NEGATIVE)

    p, q = fast_bipartite
    witness = find_bipartite_witness(q1, q2, p, q, cap)
    fast = witness is not None
    click.echo(_verdict(fast, witness))

    if cross_check:
        layout = build_bipartite_layout(p, q)
        lifted = [eliminate_multistage(to_layout_labels(x, layout), layout).output
                  for x in (q1, q2)]
        brute, brute_witness = are_ps_equivalent(*lifted, max_nodes=cap)
        click.echo(f"lifted {_verdict(brute, brute_witness)}")
        if brute != fast:
            click.echo("Error: el criterio rápido y la búsqueda exhaustiva no coinciden", err=True)
            sys.exit(EXIT_USAGE)
    sys.exit(EXIT_OK if fast else EXIT_NEGATIVE)


@cli.command()
@click.argument('family', type=click.Choice(FAMILY_NAMES))
@click.option('--n', 'n', type=int, default=None, help='Cycle length or K_n size')
@click.option('--F', 'odd', default=None, help='Comma-separated 1-based cycle positions')
@click.option('--b', 'b', default=None, help='Comma-separated hypermetric vector')
@click.option('--labels', default=None, help='Comma-separated node labels')
@click.option('--out', 'out_path', type=click.Path(dir_okay=False))
@handle_errors
def catalog(family, n, odd, b, labels, out_path):
    """Generate a member of a named inequality family."""
    params: Dict[str, object] = {}
    if family == 'cycle':
        params = {'n': n or 0, 'F': [int(x) for x in split_list(odd) or []]}
    elif family == 'hypermetric':
        params = {'b': [int(x) for x in split_list(b) or []], 'n': n}
    if labels and family in ('pentagonal', 'hypermetric'):
        params['labels'] = split_list(labels)
    if family == 'triangle' and n:
        params['graph'] = resolve_graph(f"K{n}")

    ineq = make_family(FamilySpec(family, params))
    text = serialize_inequality(ineq, bundle=True)
    if out_path:
        write_text(out_path, text)
        click.echo(f"CATALOG {family} edges={len(ineq.graph.edges)} "
                   f"support={len(ineq.coeffs)} rhs={ineq.rhs}")
    else:
        click.echo(text, nl=False)


@cli.command()
@click.option('--graph', 'graph_ref', required=True,
              help='Graph file or built-in name (K<n>, C<n>, K<a>,<b>,...)')
@click.option('--method', type=click.Choice(['auto', 'subsets', 'double-description']),
              default='auto')
@handle_errors
def hull(graph_ref, method):
    """List every facet of the cut polytope of a tiny graph."""
    graph = load_graph(graph_ref)
    facets = hull_oracle(graph, method)
    click.echo(f"FACETS {len(facets)}")
    for index, facet in enumerate(facets):
        if index:
            click.echo('---')
        click.echo(serialize_inequality(facet), nl=False)


@cli.command()
@click.option('--in', 'in_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--max-nodes', type=int, default=None)
@handle_errors
def canon(in_path, max_nodes):
    """Print the canonical representative of the inequality's orbit."""
    cap = resolve_cap(max_nodes)
    ineq = load_inequality(in_path)
    click.echo(serialize_inequality(canonical_form(ineq, cap), bundle=True), nl=False)


def main():
    cli()


if __name__ == '__main__':
    main()
