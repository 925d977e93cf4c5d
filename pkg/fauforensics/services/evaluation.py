"""Checkpoint evaluation: clean metrics, perturbation grid and FAU correlation analysis"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from fauforensics.errors import DataError
from fauforensics.models.clip import AVClip, Corpus, VideoMode
from fauforensics.models.evaluation import LEVELS, CorrelationSummary, EvalReport, PerturbKind, correlation_text
from fauforensics.models.network import InferenceResult
from fauforensics.services import metrics
from fauforensics.services.network import FauForensicsModel
from fauforensics.services.perturbation import PerturbationService

logger = logging.getLogger(__name__)


class EvaluationService:
    """Score corpora with a read-only model"""

    def __init__(self, workers: int = 1, perturbations: Optional[PerturbationService] = None):
        """
        Initialize evaluation service

        Args:
            workers: Threads scoring clips in parallel; results never depend on it
            perturbations: Perturbation service; a default one is created when omitted
        """
        self.workers = max(1, int(workers))
        self.perturbations = perturbations or PerturbationService()

    def infer_all(self, model: FauForensicsModel, clips: Sequence[AVClip]) -> List[InferenceResult]:
        if self.workers > 1 and len(clips) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                return list(pool.map(model.infer, clips))
        return [model.infer(clip) for clip in clips]

    def targets(self, model: FauForensicsModel, clips: Sequence[AVClip]) -> Tuple[List[int], List[int]]:
        """(multimodal-head targets, binary fake labels)"""
        return [model.target_label(c) for c in clips], [c.label.binary for c in clips]

    def clean_metrics(self, model: FauForensicsModel, corpus: Corpus) -> Tuple[float, float, np.ndarray]:
        """(accuracy, AUC, confusion) of the multimodal head"""
        results = self.infer_all(model, corpus.clips)
        labels, binary = self.targets(model, corpus.clips)
        preds = [r.predicted_class for r in results]
        scores = [r.fake_probability for r in results]
        num_classes = model.config.head_mode.num_classes
        return (metrics.accuracy(preds, labels), metrics.auc(scores, binary),
                metrics.confusion(preds, labels, num_classes))

    def corpus_auc(self, model: FauForensicsModel, corpus: Corpus) -> float:
        results = self.infer_all(model, corpus.clips)
        _, binary = self.targets(model, corpus.clips)
        return metrics.auc([r.fake_probability for r in results], binary)

    def perturbation_grid(self, model: FauForensicsModel, corpus: Corpus,
                          kinds: Optional[Sequence[PerturbKind]] = None):
        """AUC for every (kind, level); level 0 is the unperturbed corpus"""
        grid = {}
        for kind in kinds or list(PerturbKind):
            for level in LEVELS:
                perturbed = self.perturbations.perturb_corpus(corpus, kind, level)
                grid[(kind.value, level)] = self.corpus_auc(model, perturbed)
            logger.info(f"Perturbation {kind.value}: " +
                        ' '.join(f"{grid[(kind.value, lv)]:.4f}" for lv in LEVELS))
        return grid

    def analyze_correlation(self, corpus: Corpus) -> List[CorrelationSummary]:
        """Compare FAU temporal consistency of real-video and fake-video clips"""
        if len(corpus) == 0:
            raise DataError("Cannot analyze an empty corpus")
        real = [c for c in corpus.clips if not c.label.video_fake]
        fake = [c for c in corpus.clips if c.label.video_fake]
        summaries = []
        for name, statistic in ((metrics.COSINE_STATISTIC, metrics.correlation_intensity),
                                (metrics.AUTOCORR_STATISTIC, metrics.lag1_autocorrelation)):
            summaries.append(metrics.compare_groups(
                name, [statistic(c.fau) for c in real], [statistic(c.fau) for c in fake]))
        for s in summaries:
            logger.info(f"{s.statistic}: real={s.real.mean:.4f} fake={s.fake.mean:.4f} "
                        f"separation={s.separation:.1f} SE")
        return summaries

    def run_eval(self, model: FauForensicsModel, corpus: Corpus,
                 with_perturbations: bool = False, with_correlation: bool = False) -> EvalReport:
        """
        Evaluate one model on one corpus

        Args:
            model: Loaded model (treated as read-only)
            corpus: Corpus matching the model's mode and T
            with_perturbations: Add the perturbation AUC grid (raw-mode corpora only)
            with_correlation: Add FAU correlation summaries

        Returns:
            Populated EvalReport
        """
        if len(corpus) == 0:
            raise DataError("Cannot evaluate on an empty corpus")
        if corpus.T != model.config.T or corpus.mode is not model.config.video_mode:
            raise DataError(f"Corpus (mode={corpus.mode.value}, T={corpus.T}) does not match checkpoint "
                            f"(mode={model.config.video_mode.value}, T={model.config.T})")
        if with_perturbations and corpus.mode is not VideoMode.RAW:
            raise DataError("Perturbation evaluation needs a raw-mode corpus")

        accuracy, auc, matrix = self.clean_metrics(model, corpus)
        report = EvalReport(
            n_samples=len(corpus),
            head_mode=model.config.head_mode.value,
            accuracy=accuracy,
            auc=auc,
            confusion=matrix,
            per_class_recall=metrics.per_class_recall(matrix),
            variant=model.config.variant,
        )
        if with_perturbations:
            report.perturbation_grid = self.perturbation_grid(model, corpus)
        if with_correlation:
            report.correlation = self.analyze_correlation(corpus)
        logger.info(f"Evaluated {len(corpus)} clips: acc={accuracy:.4f} auc={auc:.4f}")
        return report

    def write_report(self, report: EvalReport, path: Path) -> List[Path]:
        """Structured report at path, plus <path>.grid.tsv when a perturbation grid exists"""
        path = Path(path)
        written = []
        try:
            path.write_text(report.to_text(), encoding='utf-8')
            written.append(path)
            if report.perturbation_grid:
                grid_path = Path(str(path) + '.grid.tsv')
                grid_path.write_text(report.grid_tsv(), encoding='utf-8')
                written.append(grid_path)
        except OSError as e:
            logger.error(f"Error writing report {path}: {str(e)}")
            raise
        logger.info(f"Wrote report {path}")
        return written

    def write_correlation(self, summaries: List[CorrelationSummary], path: Path) -> Path:
        path = Path(path)
        try:
            path.write_text(correlation_text(summaries), encoding='utf-8')
        except OSError as e:
            logger.error(f"Error writing correlation report {path}: {str(e)}")
            raise
        logger.info(f"Wrote correlation report {path}")
        return path
