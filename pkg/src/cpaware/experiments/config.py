"""Experiment configuration: generation, training and evaluation settings.

Two presets ship with the package.  ``desk_config`` keeps the whole
pipeline (generate, train, evaluate) in the tens of minutes on a laptop
CPU; ``full_scale_config`` selects the full frame geometry and sample
counts and is intended for long unattended runs.

Configs serialize to JSON with sorted keys, so identical configs always
produce identical bytes.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..features import FeatureConfig
from ..net.model import NetworkConfig
from ..ofdm import FrameConfig
from ..threats import ScenarioSpace


@dataclass(frozen=True)
class TrainRegime:
    epochs: int = 20
    batch_size: int = 16
    train_seed: int = 7

    def __post_init__(self) -> None:
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("epochs and batch_size must be positive")


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int = 1
    test_seed: int = 2
    train_per_kind: int = 200
    test_per_kind: int = 100
    frame: FrameConfig = field(default_factory=lambda: FrameConfig(64, 8, 64))
    feature: FeatureConfig = field(default_factory=lambda: FeatureConfig(3))
    space: ScenarioSpace = field(default_factory=ScenarioSpace)
    net: NetworkConfig = field(default_factory=lambda: NetworkConfig((64, 64, 3)))
    regime: TrainRegime = field(default_factory=TrainRegime)
    theta_sweep: tuple = (1e-2, 1e-3, 1e-4)

    def __post_init__(self) -> None:
        if self.train_per_kind <= 0 or self.test_per_kind <= 0:
            raise ValueError("sample counts must be positive")
        expected = (self.frame.n_symbols, self.frame.n_subcarriers, 3)
        if tuple(self.net.input_shape) != expected:
            raise ValueError(
                f"net input_shape {self.net.input_shape} does not match the "
                f"feature tensor shape {expected}"
            )

    def to_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "test_seed": self.test_seed,
            "train_per_kind": self.train_per_kind,
            "test_per_kind": self.test_per_kind,
            "frame": dataclasses.asdict(self.frame),
            "feature": dataclasses.asdict(self.feature),
            "space": dataclasses.asdict(self.space),
            "net": self.net.to_dict(),
            "regime": dataclasses.asdict(self.regime),
            "theta_sweep": list(self.theta_sweep),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        space = dict(data["space"])
        for key in ("legit_powers_w", "legit_distances_m", "adversary_powers_w",
                    "adversary_distances_m", "noise_dbw_levels"):
            space[key] = tuple(space[key])
        return cls(
            master_seed=data["master_seed"],
            test_seed=data["test_seed"],
            train_per_kind=data["train_per_kind"],
            test_per_kind=data["test_per_kind"],
            frame=FrameConfig(**data["frame"]),
            feature=FeatureConfig(**data["feature"]),
            space=ScenarioSpace(**space),
            net=NetworkConfig.from_dict(data["net"]),
            regime=TrainRegime(**data["regime"]),
            theta_sweep=tuple(data["theta_sweep"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def desk_config(**overrides) -> ExperimentConfig:
    """Laptop-scale defaults: 64x64 frames, 200/100 samples per kind."""
    return dataclasses.replace(ExperimentConfig(), **overrides)


def full_scale_config(**overrides) -> ExperimentConfig:
    """Full frame geometry and sample counts; hours of CPU, not minutes."""
    base = ExperimentConfig(
        train_per_kind=3600,
        test_per_kind=3600,
        frame=FrameConfig(512, 64, 600),
        feature=FeatureConfig(15),
        net=NetworkConfig((600, 512, 3)),
    )
    return dataclasses.replace(base, **overrides)


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(json.loads(Path(path).read_text()))


def save_config(path, config: ExperimentConfig) -> None:
    Path(path).write_text(config.to_json())
