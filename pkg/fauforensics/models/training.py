"""Training configuration and per-step records"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from fauforensics.errors import ConfigError

OPTIMIZER_NOTE = "adamw-decoupled-weight-decay (AdamP projection step not reproduced)"


@dataclass
class TrainConfig:
    """Optimization schedule; defaults follow the published recipe"""
    lr0: float = 1e-4
    batch: int = 32
    epochs: int = 50
    poly_power: float = 0.9
    weight_decay: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    val_fraction: float = 0.1
    seed: int = 0

    def validate(self) -> None:
        if self.lr0 <= 0:
            raise ConfigError(f"lr0 must be > 0, got {self.lr0}")
        if self.batch < 1:
            raise ConfigError(f"batch must be >= 1, got {self.batch}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.poly_power <= 0:
            raise ConfigError(f"poly_power must be > 0, got {self.poly_power}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigError(f"val_fraction must lie in [0, 1), got {self.val_fraction}")


@dataclass
class StepRecord:
    """One line of the loss log"""
    step: int
    lr: float
    total: float
    av: float
    a: float
    v: float

    def to_line(self) -> str:
        return '\t'.join([str(self.step)] + [f"{x:.17g}" for x in (self.lr, self.total, self.av, self.a, self.v)])

    @classmethod
    def from_line(cls, line: str) -> 'StepRecord':
        parts = line.rstrip('\n').split('\t')
        if len(parts) != 6:
            raise ValueError(f"Loss log line needs 6 fields, got {len(parts)}")
        return cls(int(parts[0]), *(float(p) for p in parts[1:]))


@dataclass
class EpochSummary:
    """Validation result at the end of an epoch"""
    epoch: int
    val_accuracy: Optional[float]
    val_loss: Optional[float]


@dataclass
class TrainResult:
    """Paths and histories produced by a training run"""
    out_dir: Path
    init_checkpoint: Path
    final_checkpoint: Path
    best_checkpoint: Path
    loss_log: Path
    records: List[StepRecord] = field(default_factory=list)
    epochs: List[EpochSummary] = field(default_factory=list)
    best_epoch: int = 0
    model: Any = None


@dataclass
class OptimState:
    """Adaptive-moment buffers, one pair per learnable parameter"""
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)
    step: int = 0


@dataclass
class GradCheckReport:
    """Analytic vs central-difference gradients, one relative error per parameter tensor"""
    T: int
    L: int
    batch: int
    seed: int
    h: float
    tolerance: float
    errors: Dict[str, float] = field(default_factory=dict)
    coordinates: int = 0

    @property
    def max_error(self) -> float:
        return max(self.errors.values()) if self.errors else 0.0

    @property
    def worst(self) -> str:
        return max(self.errors, key=self.errors.get) if self.errors else ''

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance

    def summary(self) -> str:
        verdict = 'PASS' if self.passed else 'FAIL'
        return (f"{verdict} max_rel_error={self.max_error:.3e} worst={self.worst} "
                f"tensors={len(self.errors)} coordinates={self.coordinates}")
