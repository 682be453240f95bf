"""
Dense network used by every argument labeling step

    i_t = sig([m_{t-1} W^mi] + W^xi[x_t] + b^i)
    f_t = sig([m_{t-1} W^mf] + W^xf[x_t] + b^f)        (f_t = 1 without forget gate)
    m_t = i_t * W^xm[x_t] + f_t * m_{t-1} + b^m
    o_t = sig([m_t W^mo] + W^xo[x_t] + b^o)
    e_t = o_t * sig(m_t)

    h = max(0, sum_{b in B} W^Bh[b] + e_n W^eh + b^h)
    s = softmax(e_n W^es + h W^hs + b^s)

Bracketed terms exist only with memory-to-gate connections. Inputs are one-hot
so every W^x product is a row lookup. All arithmetic is float64.
"""

import copy
import io
import json
import logging
import struct
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from path_srl.errors import BundleError

logger = logging.getLogger(__name__)

DTYPE = np.float64
INIT_SCALE = 0.1

MAGIC = b"PATHSRL"
FORMAT_VERSION = 1

ALPHA_RANGE = (0.00006, 0.3)
DROPOUT_RANGE = (0.0, 0.5)


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def softmax(z):
    shifted = np.exp(z - np.max(z))
    return shifted / shifted.sum()


@dataclass(frozen=True)
class LstmSpec:
    input_dim: int
    embed_dim: int
    use_forget_gate: bool = True
    memory_to_gates: bool = False

    def __post_init__(self):
        if self.input_dim < 1 or self.embed_dim < 1:
            raise ValueError(f"input_dim and embed_dim must be >= 1, got {self.input_dim}, {self.embed_dim}")

    @property
    def gates(self) -> tuple[str, ...]:
        return ("i", "f", "o") if self.use_forget_gate else ("i", "o")

    def shapes(self) -> dict[str, tuple[int, ...]]:
        """Parameter names and shapes in serialization order"""
        n, e = self.input_dim, self.embed_dim
        shapes = {f"Wx{g}": (n, e) for g in ("i", "f", "m", "o") if g != "f" or self.use_forget_gate}
        if self.memory_to_gates:
            shapes.update({f"Wm{g}": (e, e) for g in self.gates})
        shapes.update({f"b{g}": (e,) for g in ("i", "f", "m", "o") if g != "f" or self.use_forget_gate})
        return shapes


@dataclass(frozen=True)
class HeadSpec:
    binary_dim: int
    embed_dim: int
    hidden_dim: int
    num_classes: int

    def __post_init__(self):
        if self.binary_dim < 0 or self.hidden_dim < 1 or self.num_classes < 2:
            raise ValueError(
                f"invalid head dimensions: binary={self.binary_dim} hidden={self.hidden_dim} classes={self.num_classes}"
            )

    def shapes(self) -> dict[str, tuple[int, ...]]:
        e, h, c = self.embed_dim, self.hidden_dim, self.num_classes
        return {
            "WBh": (self.binary_dim, h),
            "Weh": (e, h),
            "bh": (h,),
            "Wes": (e, c),
            "Whs": (h, c),
            "bs": (c,),
        }


def _init_arrays(shapes: dict[str, tuple[int, ...]], rng: np.random.Generator) -> dict[str, np.ndarray]:
    return {name: rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape).astype(DTYPE) for name, shape in shapes.items()}


@dataclass
class LstmParams:
    arrays: dict[str, np.ndarray]

    @classmethod
    def init(cls, spec: LstmSpec, rng: np.random.Generator) -> "LstmParams":
        return cls(_init_arrays(spec.shapes(), rng))

    @classmethod
    def zeros(cls, spec: LstmSpec) -> "LstmParams":
        return cls({name: np.zeros(shape, dtype=DTYPE) for name, shape in spec.shapes().items()})

    def __getitem__(self, name):
        return self.arrays[name]


@dataclass
class DenseHead:
    spec: HeadSpec
    arrays: dict[str, np.ndarray]

    @classmethod
    def init(cls, spec: HeadSpec, rng: np.random.Generator) -> "DenseHead":
        return cls(spec, _init_arrays(spec.shapes(), rng))

    @classmethod
    def zeros(cls, spec: HeadSpec) -> "DenseHead":
        return cls(spec, {name: np.zeros(shape, dtype=DTYPE) for name, shape in spec.shapes().items()})

    def __getitem__(self, name):
        return self.arrays[name]


@dataclass
class SparseRows:
    """Gradient of a lookup matrix: rows[k] receives values[k]; rows may repeat"""

    rows: np.ndarray
    values: np.ndarray

    def to_dense(self, shape) -> np.ndarray:
        dense = np.zeros(shape, dtype=DTYPE)
        if len(self.rows):
            np.add.at(dense, self.rows, self.values)
        return dense


@dataclass
class LstmCache:
    sequence: np.ndarray
    gates: dict[str, np.ndarray]
    memory: np.ndarray  # memory[0] is m_0
    squashed: np.ndarray
    candidate: np.ndarray


def lstm_forward(spec: LstmSpec, params: LstmParams, sequence: Sequence[int]) -> tuple[np.ndarray, LstmCache]:
    seq = np.asarray(sequence, dtype=np.int64)
    if seq.ndim != 1 or len(seq) == 0:
        raise ValueError("LSTM input sequence must be non-empty")
    if seq.min() < 0 or seq.max() >= spec.input_dim:
        raise ValueError(f"input index out of range [0, {spec.input_dim})")

    steps, e = len(seq), spec.embed_dim
    p = params.arrays
    memory = np.zeros((steps + 1, e), dtype=DTYPE)
    gates = {g: np.zeros((steps, e), dtype=DTYPE) for g in spec.gates}
    candidate = p["Wxm"][seq]
    for t, x in enumerate(seq):
        prev = memory[t]
        for g in ("i", "f"):
            if g not in gates:
                continue
            a = p[f"Wx{g}"][x] + p[f"b{g}"]
            if spec.memory_to_gates:
                a = a + prev @ p[f"Wm{g}"]
            gates[g][t] = sigmoid(a)
        forget = gates["f"][t] if spec.use_forget_gate else 1.0
        memory[t + 1] = gates["i"][t] * candidate[t] + forget * prev + p["bm"]
        a = p["Wxo"][x] + p["bo"]
        if spec.memory_to_gates:
            a = a + memory[t + 1] @ p["Wmo"]
        gates["o"][t] = sigmoid(a)
    squashed = sigmoid(memory[1:])
    embedding = gates["o"][-1] * squashed[-1]
    return embedding, LstmCache(seq, gates, memory, squashed, candidate)


@dataclass
class LstmGradients:
    params: dict[str, np.ndarray | SparseRows]
    inputs: np.ndarray | None = None


def lstm_backward(
    spec: LstmSpec, params: LstmParams, cache: LstmCache, d_embedding: np.ndarray, with_inputs: bool = False
) -> LstmGradients:
    """
    Backpropagation through time from the gradient of the final output e_n.

    Input matrices get SparseRows gradients; with `with_inputs` the gradient
    with respect to each one-hot input vector is returned as well.
    """
    e = spec.embed_dim
    d_embedding = np.asarray(d_embedding, dtype=DTYPE)
    if d_embedding.shape != (e,):
        raise ValueError(f"expected gradient of shape {(e,)}, got {d_embedding.shape}")

    p = params.arrays
    seq = cache.sequence
    steps = len(seq)
    gates = cache.gates
    lookup = {f"Wx{g}": np.zeros((steps, e), dtype=DTYPE) for g in ("i", "f", "m", "o") if g != "f" or spec.use_forget_gate}
    grads: dict[str, np.ndarray | SparseRows] = {
        name: np.zeros(shape, dtype=DTYPE) for name, shape in spec.shapes().items() if not name.startswith("Wx")
    }

    d_memory = np.zeros(e, dtype=DTYPE)
    for t in reversed(range(steps)):
        m_t, m_prev = cache.memory[t + 1], cache.memory[t]
        o, sq = gates["o"][t], cache.squashed[t]
        d_e = d_embedding if t == steps - 1 else 0.0

        d_o = d_e * sq
        d_m = d_memory + d_e * o * sq * (1.0 - sq)
        d_ao = d_o * o * (1.0 - o)
        lookup["Wxo"][t] = d_ao
        grads["bo"] += d_ao
        if spec.memory_to_gates:
            grads["Wmo"] += np.outer(m_t, d_ao)
            d_m = d_m + p["Wmo"] @ d_ao

        i = gates["i"][t]
        d_i = d_m * cache.candidate[t]
        lookup["Wxm"][t] = d_m * i
        grads["bm"] += d_m

        d_a = {"i": d_i * i * (1.0 - i)}
        if spec.use_forget_gate:
            f = gates["f"][t]
            d_a["f"] = d_m * m_prev * f * (1.0 - f)
            d_prev = d_m * f
        else:
            d_prev = d_m.copy()

        for g, d_ag in d_a.items():
            lookup[f"Wx{g}"][t] = d_ag
            grads[f"b{g}"] += d_ag
            if spec.memory_to_gates:
                grads[f"Wm{g}"] += np.outer(m_prev, d_ag)
                d_prev += p[f"Wm{g}"] @ d_ag
        d_memory = d_prev

    for name, values in lookup.items():
        grads[name] = SparseRows(seq, values)

    inputs = None
    if with_inputs:
        inputs = sum(values @ p[name].T for name, values in lookup.items())
    return LstmGradients(grads, inputs)


@dataclass
class DropoutMasks:
    hidden: np.ndarray | None = None
    embedding: np.ndarray | None = None

    @classmethod
    def sample(cls, rate: float, hidden_dim: int, embed_dim: int, rng: np.random.Generator) -> "DropoutMasks":
        if rate <= 0.0:
            return cls()
        keep = 1.0 - rate
        hidden = (rng.random(hidden_dim) < keep).astype(DTYPE) / keep
        embedding = (rng.random(embed_dim) < keep).astype(DTYPE) / keep
        return cls(hidden, embedding)


@dataclass
class HeadCache:
    embedding: np.ndarray
    features: np.ndarray
    pre_hidden: np.ndarray
    hidden: np.ndarray
    out_hidden: np.ndarray
    out_embedding: np.ndarray
    masks: DropoutMasks
    probabilities: np.ndarray


def head_forward(
    head: DenseHead, embedding: np.ndarray, features: Sequence[int], masks: DropoutMasks | None = None
) -> tuple[np.ndarray, np.ndarray, HeadCache]:
    """Returns (h, s, cache)"""
    features = np.asarray(features, dtype=np.int64)
    if len(features) and (features.min() < 0 or features.max() >= head.spec.binary_dim):
        raise ValueError(f"binary feature index out of range [0, {head.spec.binary_dim})")
    masks = masks or DropoutMasks()
    w = head.arrays
    pre = w["Weh"].T @ embedding + w["bh"]
    if len(features):
        pre = pre + w["WBh"][features].sum(axis=0)
    hidden = np.maximum(pre, 0.0)
    out_hidden = hidden if masks.hidden is None else hidden * masks.hidden
    out_embedding = embedding if masks.embedding is None else embedding * masks.embedding
    logits = out_embedding @ w["Wes"] + out_hidden @ w["Whs"] + w["bs"]
    probabilities = softmax(logits)
    cache = HeadCache(embedding, features, pre, hidden, out_hidden, out_embedding, masks, probabilities)
    return hidden, probabilities, cache


def head_backward(head: DenseHead, cache: HeadCache, gold: int) -> tuple[dict[str, np.ndarray | SparseRows], np.ndarray]:
    """Cross-entropy gradients; returns (parameter gradients, gradient wrt e_n)"""
    w = head.arrays
    d_logits = cache.probabilities.copy()
    d_logits[gold] -= 1.0
    grads: dict[str, np.ndarray | SparseRows] = {
        "Wes": np.outer(cache.out_embedding, d_logits),
        "Whs": np.outer(cache.out_hidden, d_logits),
        "bs": d_logits,
    }
    d_hidden = w["Whs"] @ d_logits
    d_embedding = w["Wes"] @ d_logits
    if cache.masks.hidden is not None:
        d_hidden = d_hidden * cache.masks.hidden
        d_embedding = d_embedding * cache.masks.embedding
    d_pre = d_hidden * (cache.pre_hidden > 0)
    grads["WBh"] = SparseRows(cache.features, np.tile(d_pre, (len(cache.features), 1)))
    grads["Weh"] = np.outer(cache.embedding, d_pre)
    grads["bh"] = d_pre
    d_embedding = d_embedding + w["Weh"] @ d_pre
    return grads, d_embedding


@dataclass(frozen=True)
class TrainConfig:
    alpha: float = 0.01
    dropout: float = 0.0
    epochs: int = 10
    seed: int = 1
    disable_path_embeddings: bool = False
    disable_binary_features: bool = False

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not ALPHA_RANGE[0] <= self.alpha <= ALPHA_RANGE[1]:
            logger.warning("alpha %g outside the searched range %s", self.alpha, ALPHA_RANGE)
        if not DROPOUT_RANGE[0] <= self.dropout <= DROPOUT_RANGE[1]:
            logger.warning("dropout %g outside the searched range %s", self.dropout, DROPOUT_RANGE)


@dataclass(frozen=True)
class Example:
    path: tuple[int, ...]
    features: tuple[int, ...]
    gold: int


@dataclass
class Prediction:
    probabilities: np.ndarray
    embedding: np.ndarray
    hidden: np.ndarray


@dataclass
class PathNetwork:
    """LSTM path encoder plus dense head, with the ablation switches baked in"""

    lstm_spec: LstmSpec
    lstm: LstmParams
    head: DenseHead
    disable_path_embeddings: bool = False
    disable_binary_features: bool = False

    @classmethod
    def init(
        cls,
        lstm_spec: LstmSpec,
        binary_dim: int,
        hidden_dim: int,
        num_classes: int,
        rng: np.random.Generator,
        disable_path_embeddings: bool = False,
        disable_binary_features: bool = False,
    ) -> "PathNetwork":
        lstm = LstmParams.init(lstm_spec, rng)
        head = DenseHead.init(HeadSpec(binary_dim, lstm_spec.embed_dim, hidden_dim, num_classes), rng)
        return cls(lstm_spec, lstm, head, disable_path_embeddings, disable_binary_features)

    @property
    def num_classes(self) -> int:
        return self.head.spec.num_classes

    def parameters(self) -> Iterator[tuple[str, np.ndarray]]:
        """Qualified name and array of every parameter, in serialization order"""
        for name in self.lstm_spec.shapes():
            yield f"lstm.{name}", self.lstm.arrays[name]
        for name in self.head.spec.shapes():
            yield f"head.{name}", self.head.arrays[name]

    def _encode(self, path: Sequence[int]):
        if self.disable_path_embeddings:
            return np.zeros(self.lstm_spec.embed_dim, dtype=DTYPE), None
        return lstm_forward(self.lstm_spec, self.lstm, path)

    def _features(self, features: Sequence[int]) -> Sequence[int]:
        return () if self.disable_binary_features else features

    def predict(self, path: Sequence[int], features: Sequence[int]) -> Prediction:
        embedding, _ = self._encode(path)
        hidden, probabilities, _ = head_forward(self.head, embedding, self._features(features))
        return Prediction(probabilities, embedding, hidden)

    def loss(self, example: Example, masks: DropoutMasks | None = None) -> float:
        embedding, _ = self._encode(example.path)
        _, probabilities, _ = head_forward(self.head, embedding, self._features(example.features), masks)
        return -float(np.log(probabilities[example.gold]))

    def gradients(self, example: Example, masks: DropoutMasks | None = None) -> tuple[float, dict]:
        """Loss and gradients keyed like `parameters()`"""
        embedding, lstm_cache = self._encode(example.path)
        _, probabilities, head_cache = head_forward(self.head, embedding, self._features(example.features), masks)
        head_grads, d_embedding = head_backward(self.head, head_cache, example.gold)
        grads = {f"head.{k}": v for k, v in head_grads.items()}
        if lstm_cache is not None:
            lstm_grads = lstm_backward(self.lstm_spec, self.lstm, lstm_cache, d_embedding)
            grads.update({f"lstm.{k}": v for k, v in lstm_grads.params.items()})
        return -float(np.log(probabilities[example.gold])), grads

    def apply(self, grads: dict, alpha: float) -> None:
        params = dict(self.parameters())
        for name, grad in grads.items():
            target = params[name]
            if isinstance(grad, SparseRows):
                if len(grad.rows):
                    np.add.at(target, grad.rows, -alpha * grad.values)
            else:
                target -= alpha * grad


def train_epoch(
    network: PathNetwork, examples: Sequence[Example], config: TrainConfig, rng: np.random.Generator
) -> tuple[PathNetwork, float]:
    """One shuffled pass of per-example SGD; returns the network and its mean loss"""
    if not examples:
        return network, 0.0
    total = 0.0
    embed_dim, hidden_dim = network.lstm_spec.embed_dim, network.head.spec.hidden_dim
    for k in rng.permutation(len(examples)):
        masks = DropoutMasks.sample(config.dropout, hidden_dim, embed_dim, rng)
        loss, grads = network.gradients(examples[k], masks)
        network.apply(grads, config.alpha)
        total += loss
    return network, total / len(examples)


EpochCallback = Callable[[int, float, float | None], None]


def train_network(
    network: PathNetwork,
    examples: Sequence[Example],
    config: TrainConfig,
    dev_examples: Sequence[Example] = (),
    evaluate: Callable[[PathNetwork, Sequence[Example]], float] | None = None,
    on_epoch: EpochCallback | None = None,
) -> PathNetwork:
    """
    Runs `config.epochs` epochs. With dev examples and an `evaluate` scorer the
    parameters of the best-scoring epoch are retained.
    """
    rng = np.random.default_rng(config.seed)
    best, best_score = None, float("-inf")
    for epoch in range(1, config.epochs + 1):
        network, loss = train_epoch(network, examples, config, rng)
        score = evaluate(network, dev_examples) if evaluate and dev_examples else None
        if on_epoch:
            on_epoch(epoch, loss, score)
        if score is not None and score > best_score:
            best, best_score = copy.deepcopy(network), score
    return best if best is not None else network


@dataclass
class GradCheckReport:
    max_relative_error: float
    per_parameter: dict[str, float] = field(default_factory=dict)
    tolerance: float = 1e-4

    @property
    def passed(self) -> bool:
        return self.max_relative_error <= self.tolerance


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-5) -> float:
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale)) if analytic.size else 0.0


def grad_check(network: PathNetwork, example: Example, tolerance: float = 1e-4, epsilon: float = 1e-5) -> GradCheckReport:
    """Central finite differences against backprop over every parameter (no dropout)"""
    _, grads = network.gradients(example)
    report = GradCheckReport(0.0, tolerance=tolerance)
    for name, array in network.parameters():
        grad = grads.get(name)
        if grad is None:
            analytic = np.zeros_like(array)
        elif isinstance(grad, SparseRows):
            analytic = grad.to_dense(array.shape)
        else:
            analytic = grad
        numeric = np.zeros_like(array)
        flat, flat_numeric = array.reshape(-1), numeric.reshape(-1)
        for k in range(flat.size):
            original = flat[k]
            flat[k] = original + epsilon
            plus = network.loss(example)
            flat[k] = original - epsilon
            minus = network.loss(example)
            flat[k] = original
            flat_numeric[k] = (plus - minus) / (2 * epsilon)
        error = relative_error(analytic, numeric)
        report.per_parameter[name] = error
        report.max_relative_error = max(report.max_relative_error, error)
    return report


def save_network(stream: io.BufferedIOBase, network: PathNetwork, metadata: dict | None = None) -> None:
    """
    PATHSRL layout: 7-byte magic, uint16 version, uint32 header length, UTF-8
    JSON header, then every parameter array row-major as little-endian float64
    in `PathNetwork.parameters()` order.
    """
    header = {
        "lstm": {
            "input_dim": network.lstm_spec.input_dim,
            "embed_dim": network.lstm_spec.embed_dim,
            "use_forget_gate": network.lstm_spec.use_forget_gate,
            "memory_to_gates": network.lstm_spec.memory_to_gates,
        },
        "head": {
            "binary_dim": network.head.spec.binary_dim,
            "hidden_dim": network.head.spec.hidden_dim,
            "num_classes": network.head.spec.num_classes,
        },
        "ablation": {
            "disable_path_embeddings": network.disable_path_embeddings,
            "disable_binary_features": network.disable_binary_features,
        },
        "arrays": [[name, list(array.shape)] for name, array in network.parameters()],
        "metadata": metadata or {},
    }
    encoded = json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8")
    stream.write(MAGIC)
    stream.write(struct.pack("<HI", FORMAT_VERSION, len(encoded)))
    stream.write(encoded)
    for _, array in network.parameters():
        stream.write(np.ascontiguousarray(array, dtype="<f8").tobytes())


def load_network(stream: io.BufferedIOBase) -> tuple[PathNetwork, dict]:
    magic = stream.read(len(MAGIC))
    if magic != MAGIC:
        raise BundleError(f"not a PATHSRL model file (magic {magic!r})")
    prefix = stream.read(struct.calcsize("<HI"))
    if len(prefix) != struct.calcsize("<HI"):
        raise BundleError("truncated model file header")
    version, length = struct.unpack("<HI", prefix)
    if version != FORMAT_VERSION:
        raise BundleError(f"unsupported PATHSRL format version {version}, expected {FORMAT_VERSION}")
    try:
        header = json.loads(stream.read(length).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise BundleError(f"corrupt model file header: {e}") from e

    lstm_spec = LstmSpec(**header["lstm"])
    head_spec = HeadSpec(embed_dim=lstm_spec.embed_dim, **header["head"])
    network = PathNetwork(
        lstm_spec, LstmParams.zeros(lstm_spec), DenseHead.zeros(head_spec), **header["ablation"]
    )
    shapes = {n: tuple(s) for n, s in header["arrays"]}
    for name, array in network.parameters():
        expected = shapes.get(name)
        if expected != array.shape:
            raise BundleError(f"array {name} has shape {expected}, expected {array.shape}")
        raw = stream.read(array.size * 8)
        if len(raw) != array.size * 8:
            raise BundleError(f"truncated model file while reading {name}")
        array[...] = np.frombuffer(raw, dtype="<f8").reshape(array.shape)
    return network, header["metadata"]
