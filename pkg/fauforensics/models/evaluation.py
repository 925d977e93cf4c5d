"""Evaluation report and perturbation models"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from fauforensics.config import pairs_to_text

LEVELS = (0, 1, 2, 3, 4)


class PerturbKind(Enum):
    """Video post-processing perturbations, each with five intensity levels"""
    GAUSSIAN_NOISE = "gaussian_noise"
    GAUSSIAN_BLUR = "gaussian_blur"
    CONTRAST = "contrast"
    SATURATION = "saturation"
    BLOCK_QUANTIZATION = "block_quantization"
    TEMPORAL_DROP = "temporal_drop"


# Severity ladders for levels 1..4; level 0 is the identity
PERTURB_LADDERS: Dict[PerturbKind, Tuple[float, ...]] = {
    PerturbKind.GAUSSIAN_NOISE: (0.02, 0.05, 0.1, 0.2),
    PerturbKind.GAUSSIAN_BLUR: (0.5, 1.0, 1.5, 2.0),
    PerturbKind.CONTRAST: (0.85, 0.7, 0.55, 0.4),
    PerturbKind.SATURATION: (0.85, 0.7, 0.55, 0.4),
    PerturbKind.BLOCK_QUANTIZATION: (8 / 255, 16 / 255, 32 / 255, 64 / 255),
    PerturbKind.TEMPORAL_DROP: (8, 6, 4, 2),
}


@dataclass
class GroupStatistic:
    """Population summary of one per-clip statistic"""
    name: str
    count: int
    mean: float
    std: float
    stderr: float


@dataclass
class CorrelationSummary:
    """Real-video vs fake-video comparison of FAU temporal consistency"""
    statistic: str
    real: GroupStatistic
    fake: GroupStatistic
    separation: float

    def to_pairs(self) -> List[Tuple[str, str]]:
        pairs = []
        for group in (self.real, self.fake):
            prefix = f"{self.statistic}.{group.name}"
            pairs += [(f"{prefix}.count", str(group.count)), (f"{prefix}.mean", repr(group.mean)),
                      (f"{prefix}.std", repr(group.std)), (f"{prefix}.stderr", repr(group.stderr))]
        pairs.append((f"{self.statistic}.separation_se", repr(self.separation)))
        return pairs


@dataclass
class EvalReport:
    """Metrics for one checkpoint on one corpus"""
    n_samples: int
    head_mode: str
    accuracy: float
    auc: float
    confusion: np.ndarray
    per_class_recall: List[float]
    perturbation_grid: Dict[Tuple[str, int], float] = field(default_factory=dict)
    variant: str = 'full'
    correlation: List[CorrelationSummary] = field(default_factory=list)

    def to_text(self) -> str:
        """Structured text: key=value sections and tab-separated matrices"""
        parts = ["[summary]\n", pairs_to_text([
            ('n_samples', self.n_samples),
            ('head_mode', self.head_mode),
            ('variant', self.variant),
            ('accuracy', repr(self.accuracy)),
            ('auc', repr(self.auc)),
        ])]
        parts.append("\n[per_class_recall]\n")
        parts.append(pairs_to_text((f"class{i}", repr(r)) for i, r in enumerate(self.per_class_recall)))
        parts.append("\n[confusion]\n")
        parts.append("# rows: true class, columns: predicted class\n")
        for row in self.confusion:
            parts.append('\t'.join(str(int(c)) for c in row) + '\n')
        if self.perturbation_grid:
            parts.append("\n[perturbation_auc]\n")
            parts.append(self.grid_tsv())
        if self.correlation:
            parts.append("\n" + correlation_text(self.correlation))
        return ''.join(parts)

    def grid_tsv(self) -> str:
        """Plot-ready grid: one row per kind, one column per level"""
        kinds = sorted({kind for kind, _ in self.perturbation_grid})
        lines = ['kind\t' + '\t'.join(f"level{lv}" for lv in LEVELS)]
        for kind in kinds:
            cells = [repr(self.perturbation_grid[(kind, lv)]) if (kind, lv) in self.perturbation_grid else ''
                     for lv in LEVELS]
            lines.append(kind + '\t' + '\t'.join(cells))
        return '\n'.join(lines) + '\n'

    def clean_auc_for(self, kind: str) -> Optional[float]:
        return self.perturbation_grid.get((kind, 0))


def correlation_text(summaries: List[CorrelationSummary]) -> str:
    """One [correlation.<statistic>] section per summary"""
    return '\n'.join(f"[correlation.{s.statistic}]\n" + pairs_to_text(s.to_pairs()) for s in summaries)
