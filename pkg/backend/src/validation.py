"""
Input validation module for the cutlift toolkit.
Provides validation functions for labels, form names, partite layouts,
family parameters and text tokens. Every validator returns a tuple
(is_valid, error_message) and callers turn failures into their own
module exceptions.
"""

import re
from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence, Tuple


class ValidationError(Exception):
    """Custom exception for validation errors"""
    pass


LABEL_PATTERN = re.compile(r'^[A-Za-z0-9_]+$')
GRAPH_NAME_PATTERN = re.compile(r"^[A-Za-z0-9_,.'()+-]+$")
FRACTION_PATTERN = re.compile(r'^-?\d+(/\d+)?$')
GROUP_KEY_PATTERN = re.compile(r'^([VW])(\d+)$')

FORM_NAMES = ('uv.w', 'wv.u', 'uw.v', 'uvw', 'canonical')
FAMILY_NAMES = ('triangle', 'cycle', 'pentagonal', 'hypermetric')


def validate_label(label: str) -> Tuple[bool, Optional[str]]:
    """
    Validate a node label.

    Args:
        label: The label to validate

    Returns:
        Tuple of (is_valid, error_message)
    """
    if label is None or not str(label).strip():
        return False, "La etiqueta del nodo es requerida"

    label = str(label)

    if len(label) > 64:
        return False, "La etiqueta del nodo no puede tener más de 64 caracteres"

    if not LABEL_PATTERN.match(label):
        return False, (f"La etiqueta '{label}' solo puede contener letras, "
                       "números y guiones bajos")

    return True, None


def validate_graph_name(name: str) -> Tuple[bool, Optional[str]]:
    """
    Validate a graph name as written in file headers.

    Args:
        name: The graph name

    Returns:
        Tuple of (is_valid, error_message)
    """
    if not name or not name.strip():
        return False, "El nombre del grafo es requerido"

    if not GRAPH_NAME_PATTERN.match(name):
        return False, f"El nombre del grafo '{name}' contiene caracteres no permitidos"

    return True, None


def validate_form_name(name: str) -> Tuple[bool, Optional[str]]:
    """Validate a triangular form name."""
    if name not in FORM_NAMES:
        return False, (f"Forma triangular desconocida '{name}'; "
                       f"use una de: {', '.join(FORM_NAMES)}")
    return True, None


def validate_fraction_token(token: str) -> Tuple[bool, Optional[str]]:
    """
    Validate an exact rational token of the form p/q or p.

    Args:
        token: The token to validate

    Returns:
        Tuple of (is_valid, error_message)
    """
    if not token:
        return False, "Se requiere un número racional"

    if not FRACTION_PATTERN.match(token):
        return False, f"'{token}' no es un racional exacto p/q"

    if '/' in token and int(token.split('/')[1]) == 0:
        return False, f"'{token}' tiene denominador cero"

    return True, None


def validate_bipartite_sizes(p: int, q: int, strict: bool = True) -> Tuple[bool, Optional[str]]:
    """
    Validate the side sizes of a bipartite layout.

    Args:
        p: Number of A nodes
        q: Number of B nodes
        strict: Require p + q >= 5 (needed for the facet guarantee)

    Returns:
        Tuple of (is_valid, error_message)
    """
    if p < 1 or q < 1:
        return False, "p y q deben ser al menos 1"

    if strict and p + q < 5:
        return False, f"Se requiere p+q >= 5, se recibió p+q = {p + q}"

    return True, None


def validate_partite_grouping(part_sizes: Sequence[int],
                              grouping: Mapping[str, int]) -> Tuple[bool, Optional[str]]:
    """
    Validate a k-partite grouping of source groups V_l and fresh groups W_l.

    Condition (i): V_l and W_l lie in different target parts.
    Condition (ii): distinct V_l lie in distinct target parts.

    Args:
        part_sizes: Sizes |V_1|, ..., |V_m|
        grouping: Map like {"V1": 0, "W1": 3} from group key to target part

    Returns:
        Tuple of (is_valid, error_message); the message names the violated clause
    """
    if not part_sizes:
        return False, "Se requiere al menos un grupo V_l"

    if any(size < 1 for size in part_sizes):
        return False, "Cada grupo V_l debe tener al menos un nodo"

    m = len(part_sizes)
    for key, part in grouping.items():
        match = GROUP_KEY_PATTERN.match(key)
        if not match:
            return False, f"Clave de agrupación inválida '{key}' (use V<l> o W<l>)"
        index = int(match.group(2))
        if index < 1 or index > m:
            return False, f"La clave '{key}' no corresponde a ningún grupo V_1..V_{m}"
        if part < 0:
            return False, f"La parte asignada a '{key}' debe ser no negativa"

    for l in range(1, m + 1):
        if f"V{l}" not in grouping:
            return False, f"Falta la parte destino para V{l}"
        t = part_sizes[l - 1] * (part_sizes[l - 1] - 1) // 2
        if t > 0 and f"W{l}" not in grouping:
            return False, f"Falta la parte destino para W{l}"

    for l in range(1, m + 1):
        w_key = f"W{l}"
        if w_key in grouping and grouping[w_key] == grouping[f"V{l}"]:
            return False, (f"condición (i) violada: V{l} y W{l} quedan en la "
                           f"misma parte {grouping[w_key]}")

    seen: Dict[int, int] = {}
    for l in range(1, m + 1):
        part = grouping[f"V{l}"]
        if part in seen:
            return False, (f"condición (ii) violada: V{seen[part]} y V{l} quedan "
                           f"en la misma parte {part}")
        seen[part] = l

    used = sorted(set(grouping.values()))
    if used != list(range(len(used))):
        return False, "Las partes destino deben numerarse 0..k-1 sin huecos"

    if not m <= len(used) <= 2 * m:
        return False, f"El número de partes k={len(used)} debe cumplir {m} <= k <= {2 * m}"

    return True, None


def validate_family_params(family: str, params: Mapping[str, object]) -> Tuple[bool, Optional[str]]:
    """
    Validate generator parameters for an inequality family.

    Args:
        family: One of FAMILY_NAMES
        params: Family parameters

    Returns:
        Tuple of (is_valid, error_message)
    """
    if family not in FAMILY_NAMES:
        return False, f"Familia desconocida '{family}'; use una de: {', '.join(FAMILY_NAMES)}"

    if family == 'cycle':
        cycle = params.get('cycle') or range(int(params.get('n') or 0))
        odd = params.get('F') or ()
        if len(cycle) < 3:
            return False, "Un ciclo necesita al menos 3 aristas"
        if len(odd) % 2 == 0:
            return False, f"|F| debe ser impar, se recibió |F| = {len(odd)}"

    if family == 'hypermetric':
        b = params.get('b') or ()
        if not b:
            return False, "Se requiere el vector b"
        if sum(Fraction(x) for x in b) != 1:
            return False, f"La suma de b debe ser 1, se recibió {sum(Fraction(x) for x in b)}"
        if any(Fraction(x).denominator != 1 for x in b):
            return False, "El vector b debe ser entero"

    return True, None


def validate_node_cap(node_count: int, cap: int) -> Tuple[bool, Optional[str]]:
    """Check a node count against an enumeration cap."""
    if node_count > cap:
        return False, f"El grafo tiene {node_count} nodos y el límite es {cap}"
    return True, None


def sanitize_line(input_str: str) -> str:
    """
    Sanitize a text line by removing control characters and comments.

    Args:
        input_str: The raw line

    Returns:
        Sanitized line without trailing comment or surrounding whitespace
    """
    if not input_str:
        return ""

    sanitized = re.sub(r'[\x00-\x08\x0B\x0C\x0E-\x1F\x7F]', '', input_str)

    if '#' in sanitized:
        sanitized = sanitized[:sanitized.index('#')]

    return sanitized.strip()
