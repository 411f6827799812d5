"""Experiment configuration: strict ``key = value`` (or flat YAML) files.

Every key has a default in ``src.data.defaults``; a file only lists what it
changes. Unknown keys, unparsable values and invalid task/mode pairs are
reported with the line they came from.
"""

import os
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional, Tuple

import yaml

from src.data import defaults
from src.errors import ConfigError, TypeMismatchError, UnknownKeyError
from src.validators.config_validator import ConfigValidator

NONE_TOKENS = ("none", "null", "")
YAML_SUFFIXES = (".yaml", ".yml")


@dataclass
class ExperimentConfig:
    task: str = "cartpole"
    mode: str = "Baseline"
    seed: int = 0
    output_dir: str = ""

    # screener
    margin_M: float = defaults.MARGIN_M
    l1_alpha: float = defaults.L1_ALPHA
    blend_lambda: float = defaults.BLEND_LAMBDA
    error_cap: float = defaults.ERROR_CAP
    screener_pin: Optional[float] = None

    # optimization / replay
    lr: float = defaults.LEARNING_RATE
    batch_size: int = defaults.BATCH_SIZE
    capacity: int = defaults.BUFFER_CAPACITY
    alpha_exp: float = defaults.PER_ALPHA
    epsilon: float = defaults.PER_EPSILON
    beta_start: float = defaults.BETA_START
    beta_end: float = defaults.BETA_END
    beta_anneal_steps: int = defaults.BETA_ANNEAL_STEPS

    # cart-pole
    gamma: float = defaults.GAMMA
    explore_start: float = defaults.EXPLORE_START
    explore_end: float = defaults.EXPLORE_END
    explore_decay_steps: int = defaults.EXPLORE_DECAY_STEPS
    target_sync_interval: int = defaults.TARGET_SYNC_INTERVAL
    warmup_steps: int = defaults.WARMUP_STEPS
    total_steps: int = defaults.TOTAL_STEPS
    eval_interval: int = defaults.EVAL_INTERVAL
    eval_episodes: int = defaults.EVAL_EPISODES

    # supervised
    epochs: int = defaults.EPOCHS
    synthetic_n: int = defaults.SYNTHETIC_N
    synthetic_overlap: float = defaults.SYNTHETIC_OVERLAP
    train_subset: int = defaults.TRAIN_SUBSET
    track_samples: int = defaults.TRACK_SAMPLES
    extreme_k: int = defaults.EXTREME_K

    @property
    def run_id(self) -> str:
        return f"{self.task}-{self.mode}-s{self.seed}"

    @property
    def resolved_output_dir(self) -> str:
        return self.output_dir or os.path.join("runs", self.run_id)

    @property
    def primary_metric(self) -> str:
        return defaults.PRIMARY_METRIC[self.task]


FIELD_TYPES: Dict[str, Any] = {
    f.name: f.type for f in fields(ExperimentConfig)
}


def _coerce(key: str, raw: str, line: Optional[int]):
    kind = FIELD_TYPES[key]
    text = raw.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        text = text[1:-1]
    if kind == Optional[float]:
        if text.lower() in NONE_TOKENS:
            return None
        kind = float
    try:
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
    except ValueError:
        raise TypeMismatchError(f"'{key}' expects {kind.__name__}, got '{raw.strip()}'", line) from None
    return text


def _read_pairs(path: str) -> Tuple[Dict[str, str], Dict[str, int]]:
    """Raw ``key -> value text`` plus ``key -> line number``."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    values: Dict[str, str] = {}
    lines: Dict[str, int] = {}

    def add(key: str, value: str, line: int):
        if key in values:
            raise ConfigError(f"duplicate key '{key}' (first set on line {lines[key]})", line)
        values[key] = value
        lines[key] = line

    if path.endswith(YAML_SUFFIXES):
        try:
            root = yaml.compose(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise ConfigError(f"invalid YAML: {e}", mark.line + 1 if mark else None) from None
        if root is None:
            return values, lines
        if not isinstance(root, yaml.MappingNode):
            raise ConfigError("YAML config must be a flat mapping", root.start_mark.line + 1)
        for key_node, value_node in root.value:
            line = key_node.start_mark.line + 1
            if not isinstance(value_node, yaml.ScalarNode):
                raise TypeMismatchError(f"'{key_node.value}' must be a scalar", line)
            add(str(key_node.value), value_node.value, line)
        return values, lines

    for number, raw_line in enumerate(text.splitlines(), start=1):
        content = raw_line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"expected 'key = value', got '{content}'", number)
        key, value = content.split("=", 1)
        add(key.strip(), value, number)
    return values, lines


def parse_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None,
                 validate: bool = True) -> ExperimentConfig:
    """Build an ExperimentConfig from a file plus command-line overrides.

    Args:
        path: Config file; ``None`` means all defaults
        overrides: Values that win over the file (``None`` entries are ignored)
        validate: Run ConfigValidator and raise on the first problem

    Returns:
        ExperimentConfig

    Raises:
        UnknownKeyError, TypeMismatchError, InvalidCombinationError, ConfigError
    """
    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    if path is not None:
        if not os.path.exists(path):
            raise FileNotFoundError(f"Config file not found: {path}")
        raw, lines = _read_pairs(path)
        for key, text in raw.items():
            if key not in FIELD_TYPES:
                raise UnknownKeyError(f"unknown key '{key}'", lines[key])
            values[key] = _coerce(key, text, lines[key])

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in FIELD_TYPES:
            raise UnknownKeyError(f"unknown key '{key}'")
        values[key] = _coerce(key, str(value), None) if isinstance(value, str) else value
        lines.pop(key, None)

    config = ExperimentConfig(**values)
    if validate:
        ConfigValidator().check(config, lines)
    return config


def _format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_resolved_config(config: ExperimentConfig, path: str):
    """Write every effective value so the file alone reproduces the run."""
    values = asdict(config)
    values["output_dir"] = config.resolved_output_dir
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# resolved configuration for {config.run_id}\n")
        for key, value in values.items():
            f.write(f"{key} = {_format_value(value)}\n")
