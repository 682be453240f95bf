"""
Seeded random search over network hyperparameters

Learning rates are sampled log-uniformly, everything else uniformly. Each
trial applies the sampled values to all four networks, trains a bundle with
a short epoch budget and scores it on the development corpus.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import pandas as pd
import yaml

from path_srl.config import NetworkConfig, RerankerConfig, RunConfig
from path_srl.errors import ConfigError
from path_srl.processing.conll_io import Sentence
from path_srl.training.neural_core import ALPHA_RANGE, DROPOUT_RANGE
from path_srl.training.train_pipeline import train_bundle

logger = logging.getLogger(__name__)

PARAMETER_KINDS = ("log_uniform", "uniform", "int", "choice")

DEFAULT_SPACE = {
    "alpha": {"type": "log_uniform", "low": ALPHA_RANGE[0], "high": ALPHA_RANGE[1]},
    "dropout": {"type": "uniform", "low": DROPOUT_RANGE[0], "high": DROPOUT_RANGE[1]},
    "embed_dim": {"type": "int", "low": 1, "high": 100},
    "hidden_dim": {"type": "int", "low": 1, "high": 500},
    "use_forget_gate": {"type": "choice", "values": [True, False]},
    "memory_to_gates": {"type": "choice", "values": [True, False]},
}
DEFAULT_BUDGET = 3


@dataclass(frozen=True)
class Parameter:
    name: str
    kind: str
    low: float | None = None
    high: float | None = None
    values: tuple = ()

    def sample(self, rng: np.random.Generator):
        if self.kind == "log_uniform":
            return float(math.exp(rng.uniform(math.log(self.low), math.log(self.high))))
        if self.kind == "uniform":
            return float(rng.uniform(self.low, self.high))
        if self.kind == "int":
            return int(rng.integers(self.low, self.high + 1))
        return self.values[int(rng.integers(len(self.values)))]

    def contains(self, value) -> bool:
        if self.kind == "choice":
            return value in self.values
        return self.low <= value <= self.high


def parse_space(space: dict) -> list[Parameter]:
    if not space:
        raise ConfigError("search space is empty")
    fields = set(NetworkConfig.__dataclass_fields__) - {"epochs"}
    parameters = []
    for name, spec in space.items():
        if name not in fields:
            raise ConfigError(f"cannot search over '{name}', expected one of {sorted(fields)}")
        spec = dict(spec or {})
        kind = spec.get("type")
        if kind not in PARAMETER_KINDS:
            raise ConfigError(f"{name}: type must be one of {PARAMETER_KINDS}, got {kind!r}")
        if kind == "choice":
            values = tuple(spec.get("values") or ())
            if not values:
                raise ConfigError(f"{name}: choice needs at least one value")
            parameters.append(Parameter(name, kind, values=values))
            continue
        try:
            low, high = float(spec["low"]), float(spec["high"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"{name}: numeric parameters need 'low' and 'high'") from e
        if low > high or (kind == "log_uniform" and low <= 0):
            raise ConfigError(f"{name}: invalid range [{low}, {high}]")
        if kind == "int":
            low, high = int(math.ceil(low)), int(math.floor(high))
        parameters.append(Parameter(name, kind, low, high))
    return parameters


def load_search_space(path=None) -> list[Parameter]:
    if path is None:
        return parse_space(DEFAULT_SPACE)
    try:
        with open(path) as f:
            space = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    if space is not None and not isinstance(space, dict):
        raise ConfigError(f"{path}: search space must be a mapping")
    return parse_space(space)


@dataclass
class Trial:
    number: int
    config: dict
    score: float
    metadata: dict = field(default_factory=dict)


class RandomSearch:
    """Random search optimizer; samples come from one generator seeded once"""

    def __init__(self, parameters: Sequence[Parameter], seed: int = 1):
        if not parameters:
            raise ConfigError("search space is empty")
        self.parameters = list(parameters)
        self.rng = np.random.default_rng(seed)
        self.trials: list[Trial] = []
        self.best_config: dict | None = None
        self.best_score = float("-inf")

    def sample_config(self) -> dict:
        return {p.name: p.sample(self.rng) for p in self.parameters}

    def record_evaluation(self, config: dict, score: float, metadata: dict | None = None) -> None:
        self.trials.append(Trial(len(self.trials) + 1, config, score, metadata or {}))
        if score > self.best_score:
            self.best_config, self.best_score = config, score

    def optimize(self, objective: Callable[[dict, int], float], n_iterations: int = 25) -> dict:
        if n_iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {n_iterations}")
        logger.info("Starting random search with %d trials", n_iterations)
        for i in range(n_iterations):
            config = self.sample_config()
            logger.info("Trial %d/%d: %s", i + 1, n_iterations, config)
            score = objective(config, i)
            logger.info("Trial %d dev F1 %.2f", i + 1, score)
            self.record_evaluation(config, score, {"trial": i + 1})
        logger.info("Best dev F1 %.2f with %s", self.best_score, self.best_config)
        return self.best_config

    def to_frame(self) -> pd.DataFrame:
        """Trials ranked by dev F1; ties keep the earlier trial first"""
        rows = [{"trial": t.number, **t.config, "dev_f1": round(t.score, 2)} for t in self.trials]
        frame = pd.DataFrame(rows)
        return frame.sort_values("dev_f1", ascending=False, kind="stable").reset_index(drop=True)


def apply_trial(config: RunConfig, trial: dict, epochs: int = DEFAULT_BUDGET) -> RunConfig:
    """Sampled values on every network, a short epoch budget and no reranker"""
    networks = {name: replace(network, **trial, epochs=epochs) for name, network in config.networks.items()}
    return replace(config, networks=networks, reranker=RerankerConfig(enabled=False, nbest=config.reranker.nbest))


def bundle_objective(train: Sequence[Sentence], dev: Sequence[Sentence], config: RunConfig, epochs: int = DEFAULT_BUDGET):
    def objective(trial: dict, number: int) -> float:
        run = train_bundle(train, dev, apply_trial(config, trial, epochs))
        return run.dev_f1 if run.dev_f1 is not None else 0.0

    return objective


def write_results(search: RandomSearch, base: RunConfig, output_dir) -> tuple[Path, Path]:
    """trials.csv (ranked) and best.yaml (a full run configuration with the best values)"""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    trials = output_dir / "trials.csv"
    search.to_frame().to_csv(trials, index=False)
    best = replace(base, networks={name: replace(n, **search.best_config) for name, n in base.networks.items()})
    best_file = output_dir / "best.yaml"
    with open(best_file, "w") as f:
        yaml.safe_dump(best.to_dict(), f, sort_keys=True)
    return trials, best_file
