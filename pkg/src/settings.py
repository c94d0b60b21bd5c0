"""
Haar-Ruelle Lab - Settings Management
Handles experiment configuration: defaults, presets and JSON documents.
"""

import copy
import json
import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from cocycles import CocycleSpec, ModularParameters
from errors import ConfigError, HaarRuelleError
from operators import Flavor, OperatorSpec
from presets import preset_document
from relations import FreeCoordinateRelation
from symbolic import Point, parse_point

logger = logging.getLogger(__name__)

# sections replaced as a whole rather than merged key by key
REPLACED_KEYS = {'potential', 'terms', 'beta_list', 'free_set'}


class ConfigManager:
    """Manages experiment settings with JSON documents layered over defaults."""

    def __init__(self, config_file: Optional[str] = None, preset: Optional[str] = None):
        """Initialize with defaults, then the preset, then the config file."""
        self.config_file = config_file

        # Default settings
        self.default_settings = {
            'preset': None,
            'relation': {
                'd': 2,
                'free_set': [3]
            },
            'cocycle': {
                'kind': 'separable',  # separable, general
                'potential': {'builtin': 'quarter_square_first_coord'}
            },
            'operator': {
                'flavor': 'haar_ruelle_separable'
            },
            'experiment': {
                'beta_list': [1.0, 10.0, 30.0],
                'cylinder_depth': 5,
                'iteration_steps': 9,
                'base_point': '|1',
                'method': 'matrix'  # tree, memo, matrix
            },
            'tolerances': {
                'eigen': 1e-13,
                'max_iter': 100000,
                'verification': 1e-9
            },
            'output': {
                'directory': 'output',
                'bar_width': 60,
                'plot_script': True
            },
            'runtime': {
                'threads': 1
            }
        }

        self.current_settings = {}
        self.load_settings(preset)

    def load_settings(self, preset: Optional[str] = None):
        """Load the config file (if any) and merge it over the defaults and preset."""
        loaded = {}
        if self.config_file:
            try:
                with open(self.config_file, 'r') as f:
                    loaded = json.load(f)
            except (json.JSONDecodeError, OSError) as e:
                raise ConfigError(f"cannot read config {self.config_file}: {e}") from None
            if not isinstance(loaded, dict):
                raise ConfigError(f"config {self.config_file} must hold a JSON object")

        name = preset or loaded.get('preset')
        base = self.default_settings
        if name:
            base = self._merge_settings(base, preset_document(name))
            base['preset'] = name
        self.current_settings = self._merge_settings(base, loaded)
        if preset:
            self.current_settings['preset'] = preset

    def _merge_settings(self, defaults: Dict[str, Any], loaded: Dict[str, Any]) -> Dict[str, Any]:
        """Recursively merge loaded settings with defaults."""
        result = copy.deepcopy(defaults)

        for key, value in loaded.items():
            if key in result and key not in REPLACED_KEYS and isinstance(value, dict) \
                    and isinstance(result[key], dict):
                result[key] = self._merge_settings(result[key], value)
            else:
                result[key] = copy.deepcopy(value)

        return result

    def save_settings(self, path: str):
        """Save current settings to a JSON file."""
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, 'w') as f:
            json.dump(self.current_settings, f, indent=2, sort_keys=True)

    def get(self, category: str, key: str, default=None) -> Any:
        """Get a setting value by category and key."""
        section = self.current_settings.get(category, {})
        if not isinstance(section, dict):
            return default
        return section.get(key, default)

    def set(self, category: str, key: str, value: Any):
        """Set a setting value by category and key."""
        if category not in self.current_settings:
            self.current_settings[category] = {}

        self.current_settings[category][key] = value

    def get_all(self, category: str) -> Dict[str, Any]:
        """Get all settings in a category."""
        return self.current_settings.get(category, {})

    def apply_overrides(self, out: Optional[str] = None, threads: Optional[int] = None,
                        tolerance: Optional[float] = None, betas: Tuple[float, ...] = ()):
        """Command-line flags win over every document."""
        if out is not None:
            self.set('output', 'directory', out)
        if threads is not None:
            self.set('runtime', 'threads', threads)
        if tolerance is not None:
            self.set('tolerances', 'verification', tolerance)
        if betas:
            self.set('experiment', 'beta_list', [float(b) for b in betas])

    def export_settings(self) -> str:
        """Export settings as JSON string."""
        return json.dumps(self.current_settings, indent=2, sort_keys=True)


def _positive(value: Any, name: str, kind=float):
    try:
        number = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a {kind.__name__}, got {value!r}") from None
    if kind is int and isinstance(value, float) and not value.is_integer():
        raise ConfigError(f"{name} must be a whole number, got {value!r}")
    if isinstance(value, bool) or number <= 0:
        raise ConfigError(f"{name} must be positive, got {value!r}")
    return number


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment, ready to build operator specs from."""

    relation: FreeCoordinateRelation
    cocycle: CocycleSpec
    flavor: Flavor
    beta_list: Tuple[float, ...]
    cylinder_depth: int
    iteration_steps: int
    base_point: Point
    method: str
    eigen_tol: float
    max_iter: int
    verification_tol: float
    output_dir: str
    bar_width: int
    plot_script: bool
    threads: int
    preset: Optional[str] = None

    @classmethod
    def from_manager(cls, manager: ConfigManager) -> 'ExperimentConfig':
        """Validate the merged document into a typed configuration."""
        s = manager.current_settings
        try:
            relation = FreeCoordinateRelation.from_config(s['relation'])
            cocycle = CocycleSpec.from_config(s['cocycle'], relation.alphabet)
            try:
                flavor = Flavor(manager.get('operator', 'flavor'))
            except ValueError:
                raise ConfigError(f"unknown operator flavor {manager.get('operator', 'flavor')!r}; "
                                  f"choose from {[f.value for f in Flavor]}") from None
            if not flavor.extends:
                raise ConfigError("experiments run a Haar-Ruelle flavor; the Haar operators are "
                                  "used by verification")
            betas = manager.get('experiment', 'beta_list')
            if not isinstance(betas, list) or not betas:
                raise ConfigError(f"beta_list must be a non-empty list, got {betas!r}")
            beta_list = tuple(float(b) for b in betas)
            if any(b < 0 for b in beta_list):
                raise ConfigError(f"inverse temperatures must be >= 0, got {list(beta_list)}")
            if len(set(beta_list)) != len(beta_list):
                raise ConfigError(f"beta_list repeats a value: {list(beta_list)}")
            method = manager.get('experiment', 'method')
            if method not in ('tree', 'memo', 'matrix'):
                raise ConfigError(f"unknown ratio method {method!r}")
            config = cls(
                relation=relation,
                cocycle=cocycle,
                flavor=flavor,
                beta_list=beta_list,
                cylinder_depth=_positive(manager.get('experiment', 'cylinder_depth'), 'cylinder_depth', int),
                iteration_steps=_positive(manager.get('experiment', 'iteration_steps'), 'iteration_steps', int),
                base_point=parse_point(str(manager.get('experiment', 'base_point')), relation.alphabet),
                method=method,
                eigen_tol=_positive(manager.get('tolerances', 'eigen'), 'tolerances.eigen'),
                max_iter=_positive(manager.get('tolerances', 'max_iter'), 'tolerances.max_iter', int),
                verification_tol=_positive(manager.get('tolerances', 'verification'), 'tolerances.verification'),
                output_dir=str(manager.get('output', 'directory')),
                bar_width=_positive(manager.get('output', 'bar_width'), 'output.bar_width', int),
                plot_script=bool(manager.get('output', 'plot_script')),
                threads=_positive(manager.get('runtime', 'threads'), 'runtime.threads', int),
                preset=s.get('preset'),
            )
        except KeyError as e:
            raise ConfigError(f"missing config section {e}") from None
        except HaarRuelleError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid config: {e}") from None

        config.check_depth()
        logger.info("experiment: d=%d S=%s k=%d n=%d betas=%s",
                    relation.d, list(relation.free_set), config.cylinder_depth,
                    config.iteration_steps, list(beta_list))
        return config

    def spec(self, beta: float, flavor: Optional[Flavor] = None) -> OperatorSpec:
        """Operator spec for one beta, with the configured flavor unless given."""
        return OperatorSpec(self.relation, ModularParameters(float(beta), self.cocycle), flavor or self.flavor)

    def check_depth(self):
        """Operator and Haar verification must both close on depth-k functions."""
        self.spec(0.0).check_depth(self.cylinder_depth)
        self.spec(0.0, Flavor.HAAR).check_depth(self.cylinder_depth)
