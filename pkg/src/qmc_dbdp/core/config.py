"""
Configuration Management

Loading, validation and serialization of experiment configurations.

A configuration is a YAML file with one mapping per section (``problem``,
``sampler``, ``network``, ``training``, ``evaluation``, ``rate_probe``,
``experiment``, ``logging``). Every section is a pydantic model that rejects
unknown keys; validation errors are reported with the line of the offending
key. Values that depend on the dimension (network width, domain, drift and
volatility) may be left out and are filled in by ``resolve_config``.
"""

import copy
import hashlib
import json
import logging
import os
from typing import Any, Dict, List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from qmc_dbdp.dbdp.schedule import NetworkOptions, TrainingSchedule
from qmc_dbdp.exceptions import ConfigurationError
from qmc_dbdp.lowdisc.scramble import ScrambleMode
from qmc_dbdp.problems.base_problem import McReferenceConfig, ProblemKind, ProblemSpec
from qmc_dbdp.problems.grid import TimeGrid

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "config", "default_config.yaml"
)

_LOG_LEVELS = ("debug", "info", "warning", "error", "critical")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class ProblemSection(_Section):
    kind: ProblemKind = ProblemKind.HEAT
    d: int = Field(10, ge=1)
    T: float = Field(1.0, gt=0)
    N: int = Field(2, ge=1)
    a: Optional[float] = None
    b: Optional[float] = None
    mu: Optional[float] = None
    sigma: Optional[float] = None


class SamplerSection(_Section):
    kind: Literal["mc", "rqmc"] = "rqmc"
    scramble: ScrambleMode = ScrambleMode.OWEN_NESTED


class NetworkSection(_Section):
    width: Optional[int] = Field(None, ge=1)
    depth: int = Field(4, ge=1)
    batch_norm: bool = False
    weight_decay: float = Field(0.01, ge=0)
    param_bound: Optional[float] = Field(None, gt=0)


class TrainingSection(_Section):
    batch_size: int = Field(4096, ge=1)
    iterations_first: int = Field(4000, ge=0)
    iterations_rest: int = Field(1500, ge=0)
    lr_first: float = Field(0.01, gt=0)
    lr_rest: float = Field(0.001, gt=0)
    halve_every_first: int = Field(1000, ge=1)
    halve_every_rest: int = Field(500, ge=1)
    warm_start: bool = True
    log_every: int = Field(500, ge=0)
    progress: bool = False


class EvaluationSection(_Section):
    m_eval: int = Field(65536, ge=1)
    seed: Optional[int] = Field(None, ge=0, le=2 ** 64 - 1)
    hjb_eval_points: int = Field(256, ge=1)
    reference_samples: int = Field(131072, ge=2)
    histogram_range: Tuple[float, float] = (-0.1, 0.1)
    histogram_bins: int = Field(50, ge=1)

    @field_validator("histogram_range")
    @classmethod
    def _ordered_range(cls, value):
        if not value[0] < value[1]:
            raise ValueError("histogram_range must be [low, high] with low < high")
        return value


class RateProbeSection(_Section):
    mode: Literal["network", "genz", "constant"] = "network"
    d: int = Field(5, ge=1)
    m_list: List[int] = Field(default_factory=lambda: [1 << k for k in range(8, 15)])
    replications: int = Field(32, ge=2)
    oracle_m: int = Field(1 << 22, ge=1)
    genz_dimension: int = Field(6, ge=1)

    @field_validator("m_list")
    @classmethod
    def _powers_of_two(cls, value):
        if not value:
            raise ValueError("m_list must not be empty")
        if any(m < 1 or m & (m - 1) for m in value):
            raise ValueError("m_list entries must be powers of two")
        if any(b <= a for a, b in zip(value[:-1], value[1:])):
            raise ValueError("m_list must be strictly increasing")
        return value


class ExperimentSection(_Section):
    master_seed: int = Field(0, ge=0, le=2 ** 64 - 1)
    n_runs: int = Field(4, ge=1)
    dims: Optional[List[int]] = None
    batch_sizes: Optional[List[int]] = None
    samplers: List[Literal["mc", "rqmc"]] = Field(default_factory=lambda: ["mc", "rqmc"])
    output_dir: str = "results"
    workers: Optional[int] = Field(None, ge=1)
    scale: Literal["desk", "full"] = "desk"


class LoggingSection(_Section):
    level: str = "info"
    file: Optional[str] = None
    max_size_mb: int = Field(10, ge=1)
    max_files: int = Field(5, ge=0)

    @field_validator("level")
    @classmethod
    def _known_level(cls, value):
        if value.lower() not in _LOG_LEVELS:
            raise ValueError(f"level must be one of {', '.join(_LOG_LEVELS)}")
        return value.lower()


class ExperimentConfig(_Section):
    """Complete experiment configuration."""

    problem: ProblemSection = Field(default_factory=ProblemSection)
    sampler: SamplerSection = Field(default_factory=SamplerSection)
    network: NetworkSection = Field(default_factory=NetworkSection)
    training: TrainingSection = Field(default_factory=TrainingSection)
    evaluation: EvaluationSection = Field(default_factory=EvaluationSection)
    rate_probe: RateProbeSection = Field(default_factory=RateProbeSection)
    experiment: ExperimentSection = Field(default_factory=ExperimentSection)
    logging: LoggingSection = Field(default_factory=LoggingSection)

    @model_validator(mode="after")
    def _consistent(self):
        if self.network.batch_norm and self.training.batch_size < 2:
            raise ValueError("batch normalization needs training.batch_size >= 2")
        return self

    def problem_spec(self, d: Optional[int] = None) -> ProblemSpec:
        """Problem spec at dimension ``d`` (default ``problem.d``)."""
        p = self.problem
        return ProblemSpec.create(p.kind, d or p.d, T=p.T, a=p.a, b=p.b, mu=p.mu, sigma=p.sigma)

    def time_grid(self) -> TimeGrid:
        return TimeGrid.uniform(self.problem.T, self.problem.N)

    def schedule(self, batch_size: Optional[int] = None) -> TrainingSchedule:
        t = self.training
        return TrainingSchedule(
            iterations_first=t.iterations_first,
            iterations_rest=t.iterations_rest,
            lr_first=t.lr_first,
            lr_rest=t.lr_rest,
            halve_every_first=t.halve_every_first,
            halve_every_rest=t.halve_every_rest,
            batch_size=batch_size or t.batch_size,
        )

    def network_options(self, d: Optional[int] = None) -> NetworkOptions:
        n = self.network
        return NetworkOptions(
            width=n.width or (d or self.problem.d) + 20,
            depth=n.depth,
            batch_norm=n.batch_norm,
            weight_decay=n.weight_decay,
            param_bound=n.param_bound,
        )

    def evaluation_seed(self) -> int:
        return self.evaluation.seed if self.evaluation.seed is not None else self.experiment.master_seed

    def reference_config(self, seed: int) -> McReferenceConfig:
        return McReferenceConfig(samples=self.evaluation.reference_samples, seed=seed)

    def dims(self) -> List[int]:
        return list(self.experiment.dims or [self.problem.d])

    def batch_sizes(self) -> List[int]:
        return list(self.experiment.batch_sizes or [self.training.batch_size])


def get_default_config() -> Dict[str, Any]:
    """
    Default configuration as a plain dictionary.

    Returns:
        Dict[str, Any]: Every section with its defaults
    """
    return ExperimentConfig().model_dump(mode="json")


def _merge_configs(base_config: Dict[str, Any], override_config: Dict[str, Any]):
    """
    Recursively merge two configuration dictionaries.

    Args:
        base_config (Dict[str, Any]): Base configuration (will be modified)
        override_config (Dict[str, Any]): Configuration to override with
    """
    for key, value in override_config.items():
        if key in base_config and isinstance(base_config[key], dict) and isinstance(value, dict):
            _merge_configs(base_config[key], value)
        else:
            base_config[key] = value


def _key_lines(node, prefix: Tuple[str, ...] = ()) -> Dict[Tuple[str, ...], int]:
    lines: Dict[Tuple[str, ...], int] = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = prefix + (str(key_node.value),)
            lines[path] = key_node.start_mark.line + 1
            lines.update(_key_lines(value_node, path))
    return lines


def _line_for(loc: Tuple, lines: Dict[Tuple[str, ...], int]) -> Optional[int]:
    keys = tuple(str(part) for part in loc)
    for end in range(len(keys), 0, -1):
        if keys[:end] in lines:
            return lines[keys[:end]]
    return None


def validate_config(
    raw: Dict[str, Any], path: Optional[str] = None, lines: Optional[Dict[Tuple[str, ...], int]] = None
) -> ExperimentConfig:
    """
    Validate a configuration dictionary.

    Raises:
        ConfigurationError: For the first invalid or unknown key, with its line when known
    """
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        error = e.errors()[0]
        loc = tuple(error.get("loc", ()))
        where = ".".join(str(part) for part in loc) or "config"
        message = error.get("msg", "invalid value")
        if error.get("type") == "extra_forbidden":
            message = "unknown key"
        extra = f" ({len(e.errors()) - 1} more errors)" if len(e.errors()) > 1 else ""
        raise ConfigurationError(f"{where}: {message}{extra}", path=path, line=_line_for(loc, lines or {}))


def load_config(config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Load and validate a configuration file.

    Args:
        config_path (Optional[str]): YAML file; None for the built-in defaults
        overrides (Optional[Dict[str, Any]]): Values merged over the file before validation

    Returns:
        ExperimentConfig: Validated configuration (dimension-dependent values may still be unset)

    Raises:
        ConfigurationError: If the file is missing, unparsable or invalid
    """
    raw: Dict[str, Any] = {}
    lines: Dict[Tuple[str, ...], int] = {}
    if config_path is not None:
        if not os.path.exists(config_path):
            raise ConfigurationError("Config file not found", path=config_path)
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                text = f.read()
            lines = _key_lines(yaml.compose(text))
            raw = yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise ConfigurationError(
                f"YAML syntax error: {getattr(e, 'problem', None) or e}",
                path=config_path,
                line=mark.line + 1 if mark is not None else None,
            )
        except OSError as e:
            raise ConfigurationError(f"Cannot read config: {e}", path=config_path)
        if not isinstance(raw, dict):
            raise ConfigurationError("Top level of the config must be a mapping", path=config_path, line=1)
        logger.info("Loaded configuration from %s", config_path)
    else:
        logger.info("No config file specified, using default configuration")

    if overrides:
        raw = copy.deepcopy(raw)
        _merge_configs(raw, overrides)
    return validate_config(raw, config_path, lines)


def resolve_config(config: ExperimentConfig) -> ExperimentConfig:
    """
    Effective configuration: every dimension-dependent default filled in.

    Resolving a resolved config is the identity.
    """
    data = config.model_dump(mode="json")
    spec = config.problem_spec()
    data["problem"].update({"a": spec.a, "b": spec.b, "mu": spec.mu, "sigma": spec.sigma})
    data["network"]["width"] = config.network_options().width
    data["evaluation"]["seed"] = config.evaluation_seed()
    data["experiment"]["dims"] = config.dims()
    data["experiment"]["batch_sizes"] = config.batch_sizes()
    return ExperimentConfig.model_validate(data)


def dump_config(config: ExperimentConfig) -> str:
    """Effective configuration as YAML text."""
    return yaml.safe_dump(resolve_config(config).model_dump(mode="json"), default_flow_style=False, sort_keys=False)


def config_fingerprint(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON of the effective configuration."""
    canonical = json.dumps(resolve_config(config).model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def cell_config(config: ExperimentConfig, d: int, batch_size: int, sampler: str) -> ExperimentConfig:
    """
    Configuration of one suite cell.

    Dimension-dependent values left unset in ``config`` are re-derived for ``d``.
    """
    data = config.model_dump(mode="json")
    data["problem"]["d"] = d
    data["training"]["batch_size"] = batch_size
    data["sampler"]["kind"] = sampler
    return ExperimentConfig.model_validate(data)


_DESK_TRAINING = {
    "batch_size": 4096,
    "iterations_first": 4000,
    "iterations_rest": 1500,
    "halve_every_first": 1000,
    "halve_every_rest": 500,
}
_FULL_TRAINING = {
    "batch_size": 16384,
    "iterations_first": 50000,
    "iterations_rest": 5000,
    "halve_every_first": 5000,
    "halve_every_rest": 500,
}


def preset_config(table_id: str, scale: str = "desk", master_seed: int = 0) -> ExperimentConfig:
    """
    Configuration reproducing one results table.

    Desk scale runs d = 10, N = 2, m = 2^12 with shortened schedules (2 runs
    per sampler for hjb, 4 otherwise); full scale runs d in {20, 50},
    m in {2^12, 2^14, 2^16} and 8 runs with the long schedules.

    Raises:
        ConfigurationError: For an unknown table or scale
    """
    try:
        kind = ProblemKind(table_id)
    except ValueError:
        raise ConfigurationError(f"Unknown table id: {table_id} (expected one of heat, hjb, bs1, bs2)")
    if scale not in ("desk", "full"):
        raise ConfigurationError(f"Unknown scale: {scale} (expected desk or full)")

    raw: Dict[str, Any] = {
        "problem": {"kind": kind.value, "d": 10, "N": 2},
        "experiment": {"master_seed": master_seed, "scale": scale, "samplers": ["mc", "rqmc"]},
    }
    if scale == "desk":
        raw["training"] = dict(_DESK_TRAINING)
        raw["experiment"].update({"n_runs": 2 if kind is ProblemKind.HJB else 4, "dims": [10], "batch_sizes": [4096]})
    else:
        raw["problem"]["d"] = 20
        raw["training"] = dict(_FULL_TRAINING)
        raw["experiment"].update({"n_runs": 8, "dims": [20, 50], "batch_sizes": [4096, 16384, 65536]})
    return validate_config(raw)
