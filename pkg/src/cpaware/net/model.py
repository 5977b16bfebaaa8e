"""Shared-backbone multitask network: intent classifier + log-BER regressor.

The backbone is a stack of conv blocks (convolution, batch normalization,
ReLU, average pooling), followed by a flatten; two dense heads read the
shared features.  Both heads backpropagate into the backbone, which is
what couples the tasks during training.

Everything runs in float64; weights follow the He normal scheme
(variance 2 / fan_in, zero biases).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .layers import (
    AvgPool2D,
    BatchNorm2D,
    Conv2D,
    Dense,
    Flatten,
    GlobalAvgPool,
    GlobalStatPool,
    ReLU,
)
from .losses import softmax


@dataclass(frozen=True)
class NetworkConfig:
    """Architecture plus the loss/optimizer hyperparameters it trains with."""

    input_shape: tuple  # (frames, bins, channels)
    conv_blocks: tuple = ((8, 3, 1), (16, 3, 1), (32, 3, 1))  # (filters, kernel, stride)
    pool: int = 2
    # Head input: "meanmax" or "mean" pool the remaining spatial grid into
    # per-channel statistics, "flatten" keeps every position.  Textures here
    # are stationary, so pooled statistics generalize far better than a wide
    # flatten from a few hundred training samples.
    global_pool: str = "meanmax"
    n_classes: int = 3
    l2_coeff: float = 1e-4
    focal_gamma: float = 2.0
    reg_amplification: float = 10.0
    reg_label_variance: float = 1.0
    learning_rate: float = 1e-4
    bn_momentum: float = 0.9
    bn_eps: float = 1e-5

    def __post_init__(self) -> None:
        if len(self.input_shape) != 3:
            raise ValueError("input_shape must be (frames, bins, channels)")
        if not self.conv_blocks:
            raise ValueError("at least one conv block is required")
        if self.focal_gamma < 0:
            raise ValueError("focal_gamma must be non-negative")
        if self.global_pool not in ("meanmax", "mean", "flatten"):
            raise ValueError("global_pool must be 'meanmax', 'mean' or 'flatten'")
        for name in ("l2_coeff",):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("reg_amplification", "reg_label_variance", "learning_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def with_label_variance(self, variance: float) -> "NetworkConfig":
        return replace(self, reg_label_variance=float(variance))

    def to_dict(self) -> dict:
        return {
            "input_shape": list(self.input_shape),
            "conv_blocks": [list(b) for b in self.conv_blocks],
            "pool": self.pool,
            "global_pool": self.global_pool,
            "n_classes": self.n_classes,
            "l2_coeff": self.l2_coeff,
            "focal_gamma": self.focal_gamma,
            "reg_amplification": self.reg_amplification,
            "reg_label_variance": self.reg_label_variance,
            "learning_rate": self.learning_rate,
            "bn_momentum": self.bn_momentum,
            "bn_eps": self.bn_eps,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkConfig":
        data = dict(data)
        data["input_shape"] = tuple(data["input_shape"])
        data["conv_blocks"] = tuple(tuple(b) for b in data["conv_blocks"])
        return cls(**data)


@dataclass
class Batch:
    """Stacked feature tensors with both label kinds."""

    tensors: np.ndarray        # (batch, frames, bins, 3)
    intent_one_hot: np.ndarray  # (batch, n_classes)
    log_ber: np.ndarray        # (batch,)

    def __post_init__(self) -> None:
        n = self.tensors.shape[0]
        if self.intent_one_hot.shape[0] != n or self.log_ber.shape[0] != n:
            raise ValueError("batch fields disagree on the sample count")

    def __len__(self) -> int:
        return self.tensors.shape[0]


class MultitaskNet:
    """Configurable conv backbone feeding a softmax head and a scalar head."""

    def __init__(self, config: NetworkConfig):
        self.config = config
        h, w, c = config.input_shape
        self.backbone: list = []
        for filters, kernel, stride in config.conv_blocks:
            conv = Conv2D(c, filters, kernel_size=kernel, stride=stride)
            h, w = conv.out_shape(h, w)
            if h % config.pool or w % config.pool:
                raise ValueError(
                    f"feature map {(h, w)} not divisible by pool {config.pool}; "
                    "adjust input_shape or conv_blocks"
                )
            self.backbone += [
                conv,
                BatchNorm2D(filters, momentum=config.bn_momentum, eps=config.bn_eps),
                ReLU(),
                AvgPool2D(config.pool),
            ]
            h, w, c = h // config.pool, w // config.pool, filters
        if config.global_pool:
            self.backbone.append(GlobalAvgPool())
            self.feature_size = c
        else:
            self.backbone.append(Flatten())
            self.feature_size = h * w * c
        self.head_cls = Dense(self.feature_size, config.n_classes)
        self.head_reg = Dense(self.feature_size, 1)
        self._layer_index = {
            **{f"backbone.{i}": layer for i, layer in enumerate(self.backbone)},
            "head_cls": self.head_cls,
            "head_reg": self.head_reg,
        }

    # -- parameter bookkeeping -------------------------------------------

    def _named_layers(self):
        for i, layer in enumerate(self.backbone):
            yield f"backbone.{i}", layer
        yield "head_cls", self.head_cls
        yield "head_reg", self.head_reg

    def init_params(self, rng: np.random.Generator) -> None:
        for _, layer in self._named_layers():
            layer.init_params(rng)

    def named_params(self) -> dict[str, np.ndarray]:
        out = {}
        for prefix, layer in self._named_layers():
            for key, value in layer.params.items():
                out[f"{prefix}.{key}"] = value
        return out

    def named_grads(self) -> dict[str, np.ndarray]:
        out = {}
        for prefix, layer in self._named_layers():
            for key, value in layer.grads.items():
                out[f"{prefix}.{key}"] = value
        return out

    def set_param(self, name: str, value: np.ndarray) -> None:
        prefix, key = name.rsplit(".", 1)
        self._layer_index[prefix].params[key] = value

    def kernel_names(self) -> list[str]:
        """Weight matrices subject to L2 regularization (no biases, no BN)."""
        names = []
        for prefix, layer in self._named_layers():
            for key in layer.kernel_keys:
                names.append(f"{prefix}.{key}")
        return names

    def kernel_sq_sum(self) -> float:
        params = self.named_params()
        return float(sum(np.sum(params[k] ** 2) for k in self.kernel_names()))

    def named_state(self) -> dict[str, np.ndarray]:
        """Non-trainable state (batch-norm running statistics)."""
        out = {}
        for prefix, layer in self._named_layers():
            for key, value in getattr(layer, "state", {}).items():
                out[f"{prefix}.{key}"] = value
        return out

    def set_state(self, name: str, value: np.ndarray) -> None:
        prefix, key = name.rsplit(".", 1)
        self._layer_index[prefix].state[key] = value

    # -- computation ------------------------------------------------------

    def forward(self, x: np.ndarray, train: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """Logits (batch, n_classes) and log-BER predictions (batch,)."""
        out = np.asarray(x, dtype=float)
        for layer in self.backbone:
            out = layer.forward(out, train)
        logits = self.head_cls.forward(out, train)
        log_ber = self.head_reg.forward(out, train).reshape(-1)
        return logits, log_ber

    def backward(self, dlogits: np.ndarray | None,
                 dlog_ber: np.ndarray | None) -> None:
        """Backpropagate head cotangents; either may be None (no task signal)."""
        batch = None
        dfeat = None
        if dlogits is not None:
            dfeat = self.head_cls.backward(dlogits)
            batch = dlogits.shape[0]
        else:
            self.head_cls.grads = {k: np.zeros_like(v)
                                   for k, v in self.head_cls.params.items()}
        if dlog_ber is not None:
            dreg = self.head_reg.backward(dlog_ber.reshape(-1, 1))
            dfeat = dreg if dfeat is None else dfeat + dreg
            batch = dlog_ber.shape[0]
        else:
            self.head_reg.grads = {k: np.zeros_like(v)
                                   for k, v in self.head_reg.params.items()}
        if dfeat is None:
            raise ValueError("at least one head cotangent is required")
        out = dfeat
        for layer in reversed(self.backbone):
            out = layer.backward(out)

    def predict(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Inference-mode class probabilities and log-BER predictions."""
        logits, log_ber = self.forward(x, train=False)
        return softmax(logits), log_ber

    def predict_batched(self, x: np.ndarray,
                        batch_size: int = 64) -> tuple[np.ndarray, np.ndarray]:
        probs, log_ber = [], []
        for start in range(0, x.shape[0], batch_size):
            p, r = self.predict(x[start: start + batch_size])
            probs.append(p)
            log_ber.append(r)
        return np.concatenate(probs), np.concatenate(log_ber)


def he_init(config: NetworkConfig, rng: np.random.Generator) -> MultitaskNet:
    """Build a network and initialize it (He normal kernels, zero biases)."""
    net = MultitaskNet(config)
    net.init_params(rng)
    return net
