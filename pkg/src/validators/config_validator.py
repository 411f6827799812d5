"""Range and combination checks for experiment configurations."""

from typing import Dict, List, Optional, Tuple

from src.data.defaults import MODES, SUPERVISED_MODES, TASKS
from src.errors import ConfigError, InvalidCombinationError


class ConfigValidator:
    """Validates an ExperimentConfig before anything is trained."""

    def __init__(self, logger=None):
        self.logger = logger

    def errors(self, config, lines: Optional[Dict[str, int]] = None) -> List[ConfigError]:
        """Every problem found, each tied to the line of the offending key when known.

        Args:
            config: ExperimentConfig
            lines: Key -> source line number

        Returns:
            List of ConfigError (empty when valid)
        """
        lines = lines or {}
        found: List[ConfigError] = []

        def fail(key: str, message: str, kind=ConfigError):
            found.append(kind(message, lines.get(key)))

        if config.task not in TASKS:
            fail("task", f"unknown task '{config.task}', expected one of {TASKS}")
        if config.mode not in MODES:
            fail("mode", f"unknown mode '{config.mode}', expected one of {MODES}")
        elif config.task in TASKS and config.task != "cartpole" and config.mode not in SUPERVISED_MODES:
            fail("mode", f"mode {config.mode} is only defined for task cartpole, not {config.task}",
                 InvalidCombinationError)

        if config.seed < 0:
            fail("seed", "seed must be non-negative")
        if config.margin_M <= 0:
            fail("margin_M", "margin_M must be positive")
        if config.l1_alpha < 0:
            fail("l1_alpha", "l1_alpha must be non-negative")
        if not 0.0 <= config.blend_lambda <= 1.0:
            fail("blend_lambda", "blend_lambda must lie in [0, 1]")
        if config.error_cap <= 0:
            fail("error_cap", "error_cap must be positive")
        if config.screener_pin is not None and not 0.0 < config.screener_pin <= 1.0:
            fail("screener_pin", "screener_pin must lie in (0, 1]")
        if config.screener_pin is not None and config.screener_pin == 1.0 and config.mode == "SN_Sampling":
            fail("screener_pin", "SN_Sampling needs screener weights strictly below 1",
                 InvalidCombinationError)

        if config.lr <= 0:
            fail("lr", "lr must be positive")
        if config.batch_size < 1:
            fail("batch_size", "batch_size must be at least 1")
        if config.capacity < max(1, config.batch_size):
            fail("capacity", "capacity must hold at least one batch")
        if config.alpha_exp < 0:
            fail("alpha_exp", "alpha_exp must be non-negative")
        if config.epsilon <= 0:
            fail("epsilon", "epsilon must be positive")
        if not 0.0 <= config.beta_start <= config.beta_end <= 1.0:
            fail("beta_start", "beta schedule must satisfy 0 <= beta_start <= beta_end <= 1")
        if config.beta_anneal_steps < 1:
            fail("beta_anneal_steps", "beta_anneal_steps must be at least 1")

        if not 0.0 < config.gamma <= 1.0:
            fail("gamma", "gamma must lie in (0, 1]")
        if not 0.0 <= config.explore_end <= config.explore_start <= 1.0:
            fail("explore_start", "exploration must satisfy 0 <= explore_end <= explore_start <= 1")
        for key in ("explore_decay_steps", "target_sync_interval", "total_steps",
                    "eval_interval", "eval_episodes", "epochs"):
            if getattr(config, key) < 1:
                fail(key, f"{key} must be at least 1")
        for key in ("warmup_steps", "train_subset", "track_samples", "extreme_k"):
            if getattr(config, key) < 0:
                fail(key, f"{key} must be non-negative")
        if config.synthetic_n < 4:
            fail("synthetic_n", "synthetic_n must be at least 4")
        if not 0.0 <= config.synthetic_overlap <= 1.0:
            fail("synthetic_overlap", "synthetic_overlap must lie in [0, 1]")
        return found

    def validate(self, config, lines: Optional[Dict[str, int]] = None) -> Tuple[bool, List[str]]:
        """Validate a configuration.

        Returns:
            Tuple of (is_valid, list_of_issues)
        """
        issues = [str(e) for e in self.errors(config, lines)]
        is_valid = len(issues) == 0
        if self.logger:
            if is_valid:
                self.logger.info("Config validation passed", run_id=config.run_id)
            else:
                self.logger.warning("Config validation failed", run_id=config.run_id, issues=issues)
        return is_valid, issues

    def check(self, config, lines: Optional[Dict[str, int]] = None):
        """Raise the first problem found."""
        problems = self.errors(config, lines)
        if problems:
            raise problems[0]
