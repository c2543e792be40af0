"""Project configuration loaded from mobile-maps.yaml."""

import copy
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

_logger = logging.getLogger(__name__)

CONFIG_FILENAME = "mobile-maps.yaml"

DEFAULTS: Dict[str, Any] = {
    "seed": 0,
    "vertex_cap": 100_000,
    "attempt_cap": 100_000,
    "max_vertices": 7,
    "truncation": 64,
    "solver": {"tolerance": 1e-12, "damping": 0.5, "max_iterations": 10_000},
    "stats": {"alpha": 0.001},
    "reports_dir": ".",
}


def _merge(base: Dict, override: Dict) -> Dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def find_config_file(start_path: Optional[Path] = None) -> Optional[Path]:
    """Walk up from start_path looking for mobile-maps.yaml."""
    if start_path is None:
        start_path = Path.cwd()

    current = start_path.resolve()
    for parent in [current, *list(current.parents)]:
        candidate = parent / CONFIG_FILENAME
        if candidate.is_file():
            return candidate
    return None


class ProjectConfig:
    """Settings for a run: built-in defaults overlaid with the project file."""

    def __init__(self, config_file: Optional[Path] = None, search: bool = True):
        if config_file is None and search:
            config_file = find_config_file()
        self.config_file = Path(config_file) if config_file is not None else None
        self._data: Optional[Dict] = None

    @property
    def data(self) -> Dict:
        """Load and cache the merged configuration."""
        if self._data is None:
            loaded: Dict = {}
            if self.config_file is not None and self.config_file.exists():
                try:
                    with open(self.config_file) as f:
                        loaded = yaml.safe_load(f) or {}
                    if not isinstance(loaded, dict):
                        _logger.warning(
                            "Ignoring %s: top level is not a mapping", self.config_file
                        )
                        loaded = {}
                except yaml.YAMLError as e:
                    _logger.warning(
                        "Ignoring invalid config %s: %s", self.config_file, e
                    )
                    loaded = {}
            self._data = _merge(DEFAULTS, loaded)
        return self._data

    def get(self, dotted_key: str, default: Any = None) -> Any:
        """Resolve a dotted key such as 'solver.tolerance'."""
        node: Any = self.data
        for part in dotted_key.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def resolve(self, dotted_key: str, override: Any = None) -> Any:
        """Return override when given, else the configured value."""
        if override is not None:
            return override
        return self.get(dotted_key)
