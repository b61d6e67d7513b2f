"""
Run configuration: defaults, config.json loading and validation.

The JSON file uses flat keys named after RunConfig fields; the loss weight
`lam` is spelled `lambda` in files. Only `synthetic` is nested.
"""

import copy
import json
import logging
from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from .data.synthetic import SyntheticSpec
from .errors import ConfigurationError
from .federation.ablation import Ablation
from .federation.partition import PartitionScheme
from .federation.state import FederationConfig, Round0Prototypes
from .hashing.codes import Distance
from .hashing.models import GeneratorLoss
from .retrieval.evaluator import DEFAULT_TOPN

logger = logging.getLogger(__name__)


# Default configuration
DEFAULT_CONFIG = {
    "clients": 20,
    "rounds": 100,
    "local_epochs": 5,
    "code_bits": 48,
    "lr": 0.005,
    "mu": 0.05,
    "lambda": 0.1,
    "margin_a": None,
    "distance": "cosine",
    "batch_size": 64,
    "partition": "iid",
    "classes_per_client": 3,
    "ablation": "full",
    "seed": 0,
    "hidden_dim": 256,
    "disc_hidden_dim": 128,
    "generator_loss": "nonsaturating",
    "round0_prototypes": "random",
    "weighted_prototypes": False,
    "weighted_fedavg": False,
    "eval_every": 5,
    "snapshot_every": 0,
    "map_topn": None,
    "pr_topn": list(DEFAULT_TOPN),
    "output_dir": "results",
    "dataset_csv": None,
    "synthetic": SyntheticSpec().to_dict(),
    "train_from_database": False,
    "jobs": None,
}

_ENUM_FIELDS = {
    'distance': Distance,
    'partition': PartitionScheme,
    'ablation': Ablation,
    'generator_loss': GeneratorLoss,
    'round0_prototypes': Round0Prototypes,
}
_INT_FIELDS = {'clients', 'rounds', 'local_epochs', 'code_bits', 'batch_size', 'classes_per_client',
               'seed', 'hidden_dim', 'disc_hidden_dim', 'eval_every', 'snapshot_every'}
_FLOAT_FIELDS = {'lr', 'mu', 'lam'}
_BOOL_FIELDS = {'weighted_prototypes', 'weighted_fedavg', 'train_from_database'}
_FILE_KEYS = {'lam': 'lambda'}


def parse_enum(enum_cls, key: str, value: Any) -> Enum:
    """Enum member for a config value; the error names the valid set."""
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls(str(value).lower())
    except ValueError:
        valid = ', '.join(m.value for m in enum_cls)
        raise ConfigurationError(f"Invalid {key} '{value}'; valid values: {valid}") from None


def _as_int(key: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigurationError(f"{key} must be an integer, got {value!r}")
    return int(value)


def _as_float(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{key} must be a number, got {value!r}")
    return float(value)


@dataclass
class RunConfig(FederationConfig):
    """Federation settings plus dataset source, evaluation and output options."""

    map_topn: Optional[int] = None
    pr_topn: List[int] = field(default_factory=lambda: list(DEFAULT_TOPN))
    output_dir: str = 'results'
    dataset_csv: Optional[str] = None
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)
    train_from_database: bool = False
    jobs: Optional[int] = None

    def __post_init__(self):
        super().__post_init__()
        if self.map_topn is not None and self.map_topn <= 0:
            raise ConfigurationError(f"map_topn must be positive, got {self.map_topn}")
        if not self.pr_topn or any(n <= 0 for n in self.pr_topn):
            raise ConfigurationError(f"pr_topn must be a list of positive ints, got {self.pr_topn}")
        if self.jobs is not None and self.jobs <= 0:
            raise ConfigurationError(f"jobs must be positive, got {self.jobs}")

    @classmethod
    def from_dict(cls, data: Dict) -> 'RunConfig':
        """
        Build and validate a RunConfig from flat config keys.

        Args:
            data: Config dictionary (file spelling, e.g. 'lambda')

        Returns:
            RunConfig

        Raises:
            ConfigurationError: unknown keys, bad types or out-of-range values
        """
        to_field = {v: k for k, v in _FILE_KEYS.items()}
        names = {f.name for f in fields(cls)}
        kwargs: Dict[str, Any] = {}
        unknown = []
        for key, value in data.items():
            name = to_field.get(key, key)
            if name not in names or name in _FILE_KEYS and key != _FILE_KEYS[name]:
                unknown.append(key)
                continue
            kwargs[name] = value
        if unknown:
            raise ConfigurationError(f"Unknown config keys: {sorted(unknown)}")

        for name, value in list(kwargs.items()):
            if name in _ENUM_FIELDS:
                kwargs[name] = parse_enum(_ENUM_FIELDS[name], name, value)
            elif name in _INT_FIELDS:
                kwargs[name] = _as_int(name, value)
            elif name in _FLOAT_FIELDS:
                kwargs[name] = _as_float(name, value)
            elif name in _BOOL_FIELDS:
                if not isinstance(value, bool):
                    raise ConfigurationError(f"{name} must be true or false, got {value!r}")
            elif name == 'margin_a' and value is not None:
                kwargs[name] = _as_float(name, value)
            elif name in ('map_topn', 'jobs') and value is not None:
                kwargs[name] = _as_int(name, value)
            elif name == 'pr_topn':
                if not isinstance(value, list):
                    raise ConfigurationError(f"pr_topn must be a list, got {value!r}")
                kwargs[name] = [_as_int(name, v) for v in value]
            elif name == 'synthetic':
                if isinstance(value, dict):
                    kwargs[name] = SyntheticSpec.from_dict(value)
                elif not isinstance(value, SyntheticSpec):
                    raise ConfigurationError(f"synthetic must be an object, got {value!r}")
            elif name in ('output_dir', 'dataset_csv') and value is not None:
                kwargs[name] = str(value)
        try:
            return cls(**kwargs)
        except TypeError as e:
            raise ConfigurationError(str(e)) from e

    def to_dict(self) -> Dict:
        """Flat, JSON-ready form; from_dict(to_dict()) reproduces the config."""
        data: Dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Enum):
                value = value.value
            elif isinstance(value, SyntheticSpec):
                value = value.to_dict()
            elif isinstance(value, list):
                value = list(value)
            data[_FILE_KEYS.get(f.name, f.name)] = value
        return data

    def with_overrides(self, **overrides) -> 'RunConfig':
        """Copy with file-spelled keys replaced; values go through validation."""
        data = self.to_dict()
        data.update(overrides)
        return RunConfig.from_dict(data)


def merge_config(base: Dict, user: Dict) -> Dict:
    """Merge user keys over base; nested dicts merge key by key."""
    merged = copy.deepcopy(base)
    for key, value in user.items():
        if key in merged and isinstance(merged[key], dict) and isinstance(value, dict):
            merged[key].update(value)
        else:
            merged[key] = value
    return merged


def load_config(config_path: Optional[str] = None) -> Dict:
    """
    Load configuration from a JSON file over DEFAULT_CONFIG.

    With no path, looks for config.json in the working directory and then
    beside the package.

    Args:
        config_path: Path to a config file

    Returns:
        Configuration dictionary

    Raises:
        ConfigurationError: if the file is missing or not valid JSON
    """
    if config_path is None:
        for candidate in (Path("config.json"), Path(__file__).parent.parent / "config.json"):
            if candidate.exists():
                config_path = str(candidate)
                break
        else:
            logger.debug("No config.json found; using defaults")
            return copy.deepcopy(DEFAULT_CONFIG)

    path = Path(config_path)
    if not path.exists():
        raise ConfigurationError(f"Config file not found: {config_path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            user_config = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Config file {config_path} is not valid JSON: {e}") from e
    if not isinstance(user_config, dict):
        raise ConfigurationError(f"Config file {config_path} must contain a JSON object")
    logger.debug("Loaded config from %s", path)
    return merge_config(DEFAULT_CONFIG, user_config)


def load_run_config(config_path: Optional[str] = None) -> RunConfig:
    return RunConfig.from_dict(load_config(config_path))
