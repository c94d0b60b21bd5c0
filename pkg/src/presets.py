"""
Haar-Ruelle Lab - Presets
Named base documents merged under a user configuration.
"""

import copy
from typing import Any, Dict

from errors import ConfigError

PRESETS: Dict[str, Dict[str, Any]] = {
    # sigma(x) = sigma(y), zero potential: the textbook Ruelle operator
    'classical': {
        'relation': {'d': 2, 'free_set': [1]},
        'cocycle': {'kind': 'separable', 'potential': {'builtin': 'zero'}},
        'experiment': {'beta_list': [1.0], 'cylinder_depth': 3},
    },
    # third coordinate free, V(x) = (x_1 - 1)^2 / 4
    'example3': {
        'relation': {'d': 2, 'free_set': [3]},
        'cocycle': {'kind': 'separable',
                    'potential': {'builtin': 'quarter_square_first_coord'}},
        'experiment': {'beta_list': [1.0, 10.0, 30.0], 'cylinder_depth': 5,
                       'iteration_steps': 9, 'base_point': '|1'},
    },
    # three symbols, first and third coordinates free
    'example31': {
        'relation': {'d': 3, 'free_set': [1, 3]},
        'cocycle': {'kind': 'separable',
                    'potential': {'builtin': 'quarter_square_first_coord'}},
        'experiment': {'beta_list': [1.0], 'cylinder_depth': 3, 'iteration_steps': 9},
    },
}


def preset_document(name: str) -> Dict[str, Any]:
    """A fresh copy of a named preset."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return copy.deepcopy(PRESETS[name])
