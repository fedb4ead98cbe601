"""Dense feed-forward network engine: forward, backprop, Adam, binary
cross-entropy, early stopping and finite-difference gradient verification.

Everything is float64 and seed-deterministic; that is what makes the
gradient checks tight and benchmark runs bitwise reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, make_rng, child_seed, train_test_split, SplitSpec
from .errors import ConfigError, TrainingError

BCE_EPS = 1e-7
LEAKY_SLOPE = 0.2

ACTIVATIONS = ("relu", "leaky_relu", "sigmoid", "linear")


def _act(name, z):
    if name == "relu":
        return np.maximum(0.0, z)
    if name == "leaky_relu":
        return np.where(z > 0.0, z, LEAKY_SLOPE * z)
    if name == "sigmoid":
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    if name == "linear":
        return z
    raise ConfigError(f"unknown activation {name!r}")


def _act_grad(name, z, a):
    # derivative wrt pre-activation, using cached z and a = act(z)
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    if name == "leaky_relu":
        return np.where(z > 0.0, 1.0, LEAKY_SLOPE)
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "linear":
        return np.ones_like(z)
    raise ConfigError(f"unknown activation {name!r}")


@dataclass(frozen=True)
class LayerSpec:
    fan_in: int
    fan_out: int
    activation: str

    def __post_init__(self):
        if self.fan_in < 1 or self.fan_out < 1:
            raise ConfigError("layer fan_in and fan_out must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")


@dataclass
class TrainConfig:
    batch_size: int = 32
    epochs: int = 100
    learning_rate: float = 1e-3
    early_stop_patience: int = 10
    min_delta: float = 1e-4
    seed: int = 0


@dataclass
class TrainReport:
    loss_per_epoch: list[float]
    stopped_epoch: int
    final_train_accuracy: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "loss_per_epoch": self.loss_per_epoch,
                "stopped_epoch": self.stopped_epoch,
                "final_train_accuracy": self.final_train_accuracy,
            },
            sort_keys=True,
        )


class DenseNet:
    """Fully connected stack with per-parameter Adam state.

    He-uniform init for relu/leaky_relu layers, Xavier-uniform for
    sigmoid/linear, biases zero, drawn from ``init_seed``.
    """

    def __init__(self, specs: list[LayerSpec], init_seed: int = 0,
                 adam_betas=(0.9, 0.999), adam_eps=1e-8):
        for a, b in zip(specs, specs[1:]):
            if a.fan_out != b.fan_in:
                raise ConfigError(f"layer shapes do not chain: {a} -> {b}")
        self.specs = list(specs)
        self.init_seed = init_seed
        self.adam_betas = adam_betas
        self.adam_eps = adam_eps
        rng = make_rng(init_seed)
        self.W, self.b = [], []
        for s in specs:
            if s.activation in ("relu", "leaky_relu"):
                limit = np.sqrt(6.0 / s.fan_in)
            else:
                limit = np.sqrt(6.0 / (s.fan_in + s.fan_out))
            self.W.append(rng.uniform(-limit, limit, size=(s.fan_in, s.fan_out)))
            self.b.append(np.zeros(s.fan_out))
        self._m = [np.zeros_like(p) for p in self.parameters()]
        self._v = [np.zeros_like(p) for p in self.parameters()]
        self._t = 0
        self._cache = None

    @property
    def input_width(self) -> int:
        return self.specs[0].fan_in

    @property
    def output_width(self) -> int:
        return self.specs[-1].fan_out

    def parameters(self) -> list[np.ndarray]:
        out = []
        for W, b in zip(self.W, self.b):
            out.extend((W, b))
        return out

    def forward(self, batch, cache: bool = True):
        """Return (per-layer activations, outputs); caches for backward."""
        a = np.atleast_2d(np.asarray(batch, dtype=np.float64))
        if a.shape[1] != self.input_width:
            raise ConfigError(
                f"batch has {a.shape[1]} columns but layer 0 expects {self.input_width}"
            )
        zs, acts = [], [a]
        for i, s in enumerate(self.specs):
            z = acts[-1] @ self.W[i] + self.b[i]
            zs.append(z)
            acts.append(_act(s.activation, z))
        if cache:
            self._cache = (zs, acts)
        return acts[1:], acts[-1]

    def backward(self, targets=None, output_grad=None):
        """Backprop using the cached forward pass.

        Exactly one of ``targets`` (mean-BCE at a sigmoid head) or
        ``output_grad`` (dLoss/dOutput injected from outside, e.g. a
        generator receiving gradient through a frozen discriminator) must
        be given. Returns (grads matching parameters(), input gradient).
        """
        if self._cache is None:
            raise TrainingError("backward() called without a cached forward pass")
        zs, acts = self._cache
        n = acts[0].shape[0]
        if (targets is None) == (output_grad is None):
            raise ConfigError("pass exactly one of targets / output_grad")
        if targets is not None:
            if self.specs[-1].activation != "sigmoid":
                raise ConfigError("BCE head requires a sigmoid output layer")
            t = np.asarray(targets, dtype=np.float64).reshape(acts[-1].shape)
            dz = (acts[-1] - t) / (n * acts[-1].shape[1])  # fused sigmoid+BCE
        else:
            g = np.asarray(output_grad, dtype=np.float64).reshape(acts[-1].shape)
            dz = g * _act_grad(self.specs[-1].activation, zs[-1], acts[-1])
        grads = [None] * (2 * len(self.specs))
        for i in range(len(self.specs) - 1, -1, -1):
            grads[2 * i] = acts[i].T @ dz
            grads[2 * i + 1] = dz.sum(axis=0)
            da = dz @ self.W[i].T
            if i > 0:
                dz = da * _act_grad(self.specs[i - 1].activation, zs[i - 1], acts[i])
        return grads, da

    def adam_step(self, grads, learning_rate: float) -> None:
        """Bias-corrected Adam update in place."""
        for g in grads:
            if not np.all(np.isfinite(g)):
                raise TrainingError("non-finite gradient in Adam step")
        b1, b2 = self.adam_betas
        self._t += 1
        t = self._t
        for p, m, v, g in zip(self.parameters(), self._m, self._v, grads):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            mhat = m / (1 - b1 ** t)
            vhat = v / (1 - b2 ** t)
            p -= learning_rate * mhat / (np.sqrt(vhat) + self.adam_eps)
            if not np.all(np.isfinite(p)):
                raise TrainingError("parameters became non-finite after Adam step "
                                    "(learning rate too large?)")

    def predict(self, X) -> np.ndarray:
        _, out = self.forward(X, cache=False)
        return out

    def state_dict(self) -> dict:
        return {
            "format_version": 1,
            "specs": [[s.fan_in, s.fan_out, s.activation] for s in self.specs],
            "weights": [W.tolist() for W in self.W],
            "biases": [b.tolist() for b in self.b],
        }

    @classmethod
    def from_state_dict(cls, state: dict) -> "DenseNet":
        if state.get("format_version") != 1:
            raise ConfigError(f"unsupported model format {state.get('format_version')!r}")
        net = cls([LayerSpec(*s) for s in state["specs"]])
        net.W = [np.asarray(W, dtype=np.float64) for W in state["weights"]]
        net.b = [np.asarray(b, dtype=np.float64) for b in state["biases"]]
        net._m = [np.zeros_like(p) for p in net.parameters()]
        net._v = [np.zeros_like(p) for p in net.parameters()]
        net._t = 0
        return net


def bce_loss(predictions, targets) -> float:
    """Mean binary cross-entropy with predictions clamped to [eps, 1-eps]."""
    p = np.asarray(predictions, dtype=np.float64).ravel()
    t = np.asarray(targets, dtype=np.float64).ravel()
    if p.shape != t.shape:
        raise ConfigError(f"length mismatch: {p.shape} predictions vs {t.shape} targets")
    p = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
    return float(-np.mean(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)))


def build_classifier(n_features: int, hidden=(64, 32), seed: int = 0) -> DenseNet:
    """Default benchmark classifier: leaky_relu hidden stack, sigmoid head."""
    sizes = [n_features, *hidden]
    specs = [LayerSpec(a, b, "leaky_relu") for a, b in zip(sizes, sizes[1:])]
    specs.append(LayerSpec(sizes[-1], 1, "sigmoid"))
    return DenseNet(specs, init_seed=seed)


def train_supervised(net: DenseNet, train: Dataset, cfg: TrainConfig,
                     validation: Dataset | None = None) -> TrainReport:
    """Minibatch Adam training with early stopping.

    The epoch loss recorded (and watched by early stopping) is the loss on
    ``validation`` when given, otherwise on the full training set. Stops
    when the watched loss has not improved by ``min_delta`` for
    ``early_stop_patience`` consecutive epochs.
    """
    X, y = train.features, train.labels.astype(np.float64)
    watch = validation if validation is not None else train
    rng = make_rng(cfg.seed)
    losses: list[float] = []
    best = np.inf
    stale = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(X.shape[0])
        for start in range(0, X.shape[0], cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            net.forward(X[idx])
            grads, _ = net.backward(targets=y[idx])
            net.adam_step(grads, cfg.learning_rate)
        loss = bce_loss(net.predict(watch.features), watch.labels)
        if not np.isfinite(loss):
            raise TrainingError(f"training diverged at epoch {epoch + 1}")
        losses.append(loss)
        if loss < best - cfg.min_delta:
            best = loss
            stale = 0
        else:
            stale += 1
            if stale >= cfg.early_stop_patience:
                break
    preds = (net.predict(X).ravel() >= 0.5).astype(np.int64)
    acc = float(np.mean(preds == train.labels)) if X.shape[0] else 0.0
    return TrainReport(losses, len(losses), acc)


def finite_difference_max_error(loss_fn, params: list[np.ndarray],
                                analytic: list[np.ndarray], h: float = 1e-4,
                                sample_per_tensor: int | None = None,
                                seed: int = 0) -> float:
    """Max relative error between analytic grads and central differences.

    ``loss_fn`` re-evaluates the scalar loss from the current parameter
    values. With ``sample_per_tensor`` set, only a seeded random subset of
    each tensor's entries is probed (large nets would otherwise take hours).

    Central differences are only meaningful where the loss is locally
    smooth; a relu/leaky-relu kink inside the probe interval corrupts the
    numeric estimate by O(1) regardless of backprop. Each coordinate is
    therefore probed at geometrically shrinking steps until two consecutive
    estimates agree (smooth at that scale); coordinates that never
    stabilise sit on a kink and are skipped.
    """
    rng = make_rng(seed)
    worst = 0.0
    for p, g in zip(params, analytic):
        flat_p = p.reshape(-1)
        flat_g = g.reshape(-1)
        idx = np.arange(flat_p.size)
        if sample_per_tensor is not None and flat_p.size > sample_per_tensor:
            idx = rng.choice(flat_p.size, size=sample_per_tensor, replace=False)
        for i in idx:
            orig = flat_p[i]
            prev = None
            stable = None
            for step in (h, h / 8.0, h / 64.0):
                flat_p[i] = orig + step
                lp = loss_fn()
                flat_p[i] = orig - step
                lm = loss_fn()
                cd = (lp - lm) / (2.0 * step)
                if prev is not None and abs(cd - prev) <= 1e-4 * (
                    abs(cd) + abs(prev) + 1e-12
                ):
                    stable = cd
                    break
                prev = cd
            flat_p[i] = orig
            if stable is None:
                continue  # kink at the probe point: numeric estimate unreliable
            err = abs(flat_g[i] - stable) / (abs(flat_g[i]) + abs(stable) + 1e-12)
            worst = max(worst, err)
    return worst


def grad_check(net: DenseNet, batch, targets, h: float = 1e-4,
               sample_per_tensor: int | None = 20, seed: int = 0) -> float:
    """Verify backprop against central differences for a BCE-headed net."""
    batch = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    targets = np.asarray(targets, dtype=np.float64)
    net.forward(batch)
    grads, _ = net.backward(targets=targets)

    def loss_fn():
        _, out = net.forward(batch, cache=False)
        return bce_loss(out, targets)

    return finite_difference_max_error(loss_fn, net.parameters(), grads, h,
                                       sample_per_tensor, seed)


def grid_search(train: Dataset, candidates: list[TrainConfig],
                net_builder=None, seed: int = 0):
    """Pick the config with the best held-out accuracy.

    A fixed seeded stratified 80/20 split of ``train`` serves as the
    validation set for every candidate. Ties prefer the lower learning
    rate, then the smaller batch. Returns (best config, evaluation log).
    """
    if not candidates:
        raise ConfigError("grid_search needs at least one candidate config")
    if net_builder is None:
        net_builder = lambda cfg: build_classifier(train.n_features, seed=child_seed(seed, 1))
    fit, val = train_test_split(train, SplitSpec(0.8, seed=child_seed(seed, 0)))
    log = []
    for cfg in candidates:
        try:
            net = net_builder(cfg)
            train_supervised(net, fit, cfg, validation=val)
            preds = (net.predict(val.features).ravel() >= 0.5).astype(np.int64)
            acc = float(np.mean(preds == val.labels))
        except TrainingError as exc:
            acc = -np.inf
            log.append({"config": cfg, "val_accuracy": None, "error": str(exc)})
            continue
        log.append({"config": cfg, "val_accuracy": acc, "error": None})
    def key(entry):
        acc = entry["val_accuracy"]
        cfg = entry["config"]
        return (-(acc if acc is not None else -np.inf), cfg.learning_rate, cfg.batch_size)
    best = min(log, key=key)["config"]
    return best, log
