"""
Run configuration: YAML file, then PATHSRL_SEED, then command-line overrides.
"""

import logging
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import yaml

from path_srl.errors import ConfigError
from path_srl.processing.features import DEFAULT_TEMPLATES, MIN_WORD_COUNT, validate_templates
from path_srl.training.neural_core import LstmSpec, TrainConfig

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = Path(__file__).resolve().parent.parent / "config" / "default.yaml"
SEED_ENV = "PATHSRL_SEED"
DEFAULT_SEED = 1

CATEGORIES = ("verb", "noun")
TASKS = ("identification", "classification")
NETWORKS = tuple(f"{c}-{t}" for t in TASKS for c in CATEGORIES)
ABLATIONS = ("path", "binary")


@dataclass(frozen=True)
class NetworkConfig:
    use_forget_gate: bool = True
    memory_to_gates: bool = False
    embed_dim: int = 25
    hidden_dim: int = 90
    alpha: float = 0.01
    dropout: float = 0.0
    epochs: int = 10

    def lstm_spec(self, input_dim: int) -> LstmSpec:
        return LstmSpec(input_dim, self.embed_dim, self.use_forget_gate, self.memory_to_gates)

    def train_config(self, seed: int, ablation: frozenset[str] = frozenset()) -> TrainConfig:
        return TrainConfig(
            alpha=self.alpha,
            dropout=self.dropout,
            epochs=self.epochs,
            seed=seed,
            disable_path_embeddings="path" in ablation,
            disable_binary_features="binary" in ablation,
        )


# hyperparameters selected on the CoNLL-2009 development set
DEFAULT_NETWORKS = {
    "verb-identification": NetworkConfig(False, True, 25, 90, 0.0006, 0.42),
    "noun-identification": NetworkConfig(False, True, 16, 125, 0.0009, 0.25),
    "verb-classification": NetworkConfig(True, False, 5, 300, 0.0155, 0.50),
    "noun-classification": NetworkConfig(False, False, 88, 500, 0.0055, 0.46),
}


@dataclass(frozen=True)
class FeatureConfig:
    templates: tuple[str, ...] = DEFAULT_TEMPLATES
    path_words: str = "plemma"
    min_word_count: int = MIN_WORD_COUNT


@dataclass(frozen=True)
class RerankerConfig:
    enabled: bool = True
    nbest: int = 4


@dataclass(frozen=True)
class LabelingConfig:
    gold_predicates: bool = True
    threshold: float = 0.5


@dataclass(frozen=True)
class RunConfig:
    seed: int = DEFAULT_SEED
    networks: dict[str, NetworkConfig] = field(default_factory=lambda: dict(DEFAULT_NETWORKS))
    features: FeatureConfig = FeatureConfig()
    reranker: RerankerConfig = RerankerConfig()
    labeling: LabelingConfig = LabelingConfig()
    ablation: frozenset[str] = frozenset()
    jobs: int = 1

    def network_seed(self, name: str) -> int:
        return self.seed + NETWORKS.index(name)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["ablation"] = sorted(self.ablation)
        data["features"]["templates"] = list(self.features.templates)
        return data


def _section(cls, data, name):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    known = set(cls.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid '{name}' section: {e}") from e


def _check_network(name: str, network: NetworkConfig) -> NetworkConfig:
    if network.embed_dim < 1 or network.hidden_dim < 1:
        raise ConfigError(f"{name}: embed_dim and hidden_dim must be >= 1")
    try:
        network.train_config(DEFAULT_SEED)
    except ValueError as e:
        raise ConfigError(f"{name}: {e}") from e
    return network


def _parse_ablation(values) -> frozenset[str]:
    if values is None:
        return frozenset()
    if isinstance(values, str):
        values = [values]
    ablation = frozenset(values)
    if not ablation <= set(ABLATIONS):
        raise ConfigError(f"unknown ablation {sorted(ablation - set(ABLATIONS))}, expected one of {ABLATIONS}")
    return ablation


def config_from_dict(data: dict) -> RunConfig:
    data = dict(data or {})
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")

    networks = dict(DEFAULT_NETWORKS)
    for name, values in (data.get("networks") or {}).items():
        if name not in NETWORKS:
            raise ConfigError(f"unknown network '{name}', expected one of {NETWORKS}")
        base = asdict(networks[name])
        base.update(values or {})
        networks[name] = _check_network(name, _section(NetworkConfig, base, name))

    features = _section(FeatureConfig, data.get("features"), "features")
    try:
        features = replace(features, templates=validate_templates(features.templates))
    except ValueError as e:
        raise ConfigError(str(e)) from e
    if features.path_words not in ("plemma", "form"):
        raise ConfigError(f"features.path_words must be 'plemma' or 'form', got {features.path_words!r}")

    reranker = _section(RerankerConfig, data.get("reranker"), "reranker")
    if reranker.nbest < 1:
        raise ConfigError(f"reranker.nbest must be >= 1, got {reranker.nbest}")
    labeling = _section(LabelingConfig, data.get("labeling"), "labeling")
    if not 0.0 <= labeling.threshold <= 1.0:
        raise ConfigError(f"labeling.threshold must be in [0, 1], got {labeling.threshold}")

    try:
        seed = int(data.get("seed", DEFAULT_SEED))
        jobs = int(data.get("jobs", 1))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"seed and jobs must be integers: {e}") from e
    return RunConfig(
        seed=seed,
        networks=networks,
        features=features,
        reranker=reranker,
        labeling=labeling,
        ablation=_parse_ablation(data.get("ablation")),
        jobs=max(1, jobs),
    )


def load_config(path=None, **overrides) -> RunConfig:
    """
    Reads `path` (or config/default.yaml when present), applies PATHSRL_SEED,
    then any keyword overrides whose value is not None.
    """
    data = {}
    source = Path(path) if path else DEFAULT_CONFIG
    if path or source.exists():
        try:
            with open(source) as f:
                data = yaml.safe_load(f) or {}
        except FileNotFoundError:
            raise ConfigError(f"configuration file {source} does not exist") from None
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse {source}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{source}: configuration must be a mapping")
        logger.debug("Loaded configuration from %s", source)

    data["seed"] = os.environ.get(SEED_ENV, data.get("seed", DEFAULT_SEED))
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("gold_predicates", "threshold"):
            data["labeling"] = {**(data.get("labeling") or {}), key: value}
        elif key == "nbest":
            data["reranker"] = {**(data.get("reranker") or {}), "nbest": value}
        elif key == "use_reranker":
            data["reranker"] = {**(data.get("reranker") or {}), "enabled": value}
        elif key == "epochs":
            networks = data.get("networks") or {}
            data["networks"] = {**networks, **{name: {**(networks.get(name) or {}), "epochs": value} for name in NETWORKS}}
        else:
            data[key] = value
    return config_from_dict(data)
