"""
Configuration module for the cutlift toolkit.
Handles enumeration caps, parallelism and logging settings read from
environment variables, optionally layered over a .env file.
"""

import logging
import os
from typing import Any, Dict, Optional

from dotenv import dotenv_values

from validation import ValidationError

logger = logging.getLogger(__name__)


class Config:
    """Toolkit configuration class"""

    # Hard limits; overrides may lower them but never raise them.
    HARD_MAX_NODES = 24
    HARD_HULL_MAX_EDGES = 12
    HARD_HULL_MAX_NODES = 6

    def __init__(self, env_file: Optional[str] = None):
        self.ENV_FILE = env_file or os.environ.get(
            'CUTLIFT_ENV_FILE',
            os.path.join(os.path.dirname(__file__), '..', '..', '.env'))

        values: Dict[str, Any] = {}
        if os.path.exists(self.ENV_FILE):
            values.update(dotenv_values(self.ENV_FILE))
        values.update(os.environ)
        self._values = values

        # Parallel cut scanning
        self.THREADS = max(1, self._int('CUTLIFT_THREADS', 1))
        self.PARALLEL_THRESHOLD = self._int('CUTLIFT_PARALLEL_THRESHOLD', 2 ** 15)

        # Enumeration caps
        self.MAX_NODES = min(self._int('CUTLIFT_MAX_NODES', self.HARD_MAX_NODES),
                             self.HARD_MAX_NODES)
        self.FACET_MAX_NODES = min(self._int('CUTLIFT_FACET_MAX_NODES', 20),
                                   self.MAX_NODES)
        self.HULL_MAX_EDGES = min(self._int('CUTLIFT_HULL_MAX_EDGES', 12),
                                  self.HARD_HULL_MAX_EDGES)
        self.HULL_MAX_NODES = min(self._int('CUTLIFT_HULL_MAX_NODES', 6),
                                  self.HARD_HULL_MAX_NODES)

        # Orbit searches: |Aut(G)| * 2^(n-1) must stay below this
        self.EQUIV_BUDGET = self._int('CUTLIFT_EQUIV_BUDGET', 10 ** 8)

        self.LOG_LEVEL = str(values.get('CUTLIFT_LOG_LEVEL', 'WARNING')).upper()

    def _int(self, key: str, default: int) -> int:
        raw = self._values.get(key)
        if raw is None or str(raw).strip() == '':
            return default
        try:
            return int(raw)
        except (TypeError, ValueError):
            logger.warning(f"Ignoring malformed {key}={raw!r}, using {default}")
            return default

    def effective_max_nodes(self, requested: Optional[int] = None,
                            hard_cap: Optional[int] = None) -> int:
        """
        Resolve a node cap override against the hard limit.

        Args:
            requested: Value given on the command line, or None for the default
            hard_cap: Limit the override may not exceed (defaults to HARD_MAX_NODES)

        Returns:
            The cap to enforce

        Raises:
            ValidationError: If the request exceeds the hard cap or is not positive
        """
        limit = hard_cap if hard_cap is not None else self.HARD_MAX_NODES
        if requested is None:
            return min(self.MAX_NODES, limit)
        if requested < 1:
            raise ValidationError(f"max-nodes debe ser positivo, se recibió {requested}")
        if requested > limit:
            raise ValidationError(
                f"max-nodes {requested} supera el límite estricto de {limit} nodos")
        return requested

    def log_level(self) -> int:
        """Numeric logging level for LOG_LEVEL, WARNING if unknown."""
        return getattr(logging, self.LOG_LEVEL, logging.WARNING)


# Global configuration instance
config = Config()
