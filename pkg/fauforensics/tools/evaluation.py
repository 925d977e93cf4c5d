"""Evaluation tools: metrics, perturbation robustness, FAU correlation, inference and gradient check"""

import logging
from dataclasses import asdict
from pathlib import Path

from fauforensics.errors import UsageError
from fauforensics.models.evaluation import LEVELS
from fauforensics.models.tool_models import (
    AnalyzeCorrelationRequest, AnalyzeCorrelationResponse,
    EvaluateCheckpointRequest, EvaluateCheckpointResponse,
    GradientCheckRequest, GradientCheckResponse,
    InferClipRequest, InferClipResponse,
    PerturbationEvalRequest, PerturbationEvalResponse,
    error_info
)
from fauforensics.services.checkpoint import CheckpointService
from fauforensics.services.corpus import CorpusService
from fauforensics.services.evaluation import EvaluationService
from fauforensics.services.gradcheck import GradientChecker

logger = logging.getLogger(__name__)


def register_evaluation_tools(mcp):
    """Register all evaluation tools with the MCP server"""

    @mcp.tool(
        name="evaluate_checkpoint",
        description="Accuracy, AUC and confusion matrix of a checkpoint on a corpus file"
    )
    async def evaluate_checkpoint(request: EvaluateCheckpointRequest) -> EvaluateCheckpointResponse:
        """
        Evaluate a checkpoint

        Args:
            request: Checkpoint path, corpus path and optional report path
        """
        config = mcp.config

        try:
            model = CheckpointService().load(Path(request.checkpoint))
            corpus = CorpusService(config.workers).read_corpus(Path(request.corpus))
            service = EvaluationService(config.workers)
            report = service.run_eval(model, corpus, with_correlation=request.with_correlation)
            report_path = None
            if request.report:
                report_path = str(service.write_report(report, Path(request.report))[0])
            return EvaluateCheckpointResponse(
                n_samples=report.n_samples,
                accuracy=report.accuracy,
                auc=report.auc,
                confusion=report.confusion.tolist(),
                report_path=report_path,
                status="SUCCESS"
            )
        except Exception as e:
            logger.error(f"Error evaluating {request.checkpoint}: {str(e)}")
            return EvaluateCheckpointResponse(status="FAILED", error=error_info(e))

    @mcp.tool(
        name="perturbation_eval",
        description="AUC of a checkpoint on a raw-mode corpus under six video perturbations at levels 0-4"
    )
    async def perturbation_eval(request: PerturbationEvalRequest) -> PerturbationEvalResponse:
        """Evaluate robustness to video post-processing"""
        config = mcp.config

        try:
            model = CheckpointService().load(Path(request.checkpoint))
            corpus = CorpusService(config.workers).read_corpus(Path(request.corpus))
            service = EvaluationService(config.workers)
            report = service.run_eval(model, corpus, with_perturbations=True)
            report_path = None
            if request.report:
                report_path = str(service.write_report(report, Path(request.report))[0])
            kinds = sorted({kind for kind, _ in report.perturbation_grid})
            return PerturbationEvalResponse(
                clean_auc=report.auc,
                grid={kind: [report.perturbation_grid[(kind, lv)] for lv in LEVELS] for kind in kinds},
                report_path=report_path,
                status="SUCCESS"
            )
        except Exception as e:
            logger.error(f"Error in perturbation eval of {request.checkpoint}: {str(e)}")
            return PerturbationEvalResponse(status="FAILED", error=error_info(e))

    @mcp.tool(
        name="analyze_correlation",
        description="Compare FAU temporal correlation intensity of real-video and fake-video clips"
    )
    async def analyze_correlation(request: AnalyzeCorrelationRequest) -> AnalyzeCorrelationResponse:
        """Population statistics of FAU temporal consistency"""
        config = mcp.config

        try:
            corpus = CorpusService(config.workers).read_corpus(Path(request.corpus))
            service = EvaluationService(config.workers)
            summaries = service.analyze_correlation(corpus)
            if request.report:
                service.write_correlation(summaries, Path(request.report))
            return AnalyzeCorrelationResponse(
                statistics={s.statistic: asdict(s) for s in summaries},
                status="SUCCESS"
            )
        except Exception as e:
            logger.error(f"Error analyzing correlation of {request.corpus}: {str(e)}")
            return AnalyzeCorrelationResponse(status="FAILED", error=error_info(e))

    @mcp.tool(
        name="infer_clip",
        description="Score one clip of a corpus file with a checkpoint (multimodal head only)"
    )
    async def infer_clip(request: InferClipRequest) -> InferClipResponse:
        """Run inference on a single clip"""
        config = mcp.config

        try:
            model = CheckpointService().load(Path(request.checkpoint))
            corpus = CorpusService(config.workers).read_corpus(Path(request.corpus))
            if not 0 <= request.index < len(corpus):
                raise UsageError(f"Clip index {request.index} outside corpus of {len(corpus)} clips")
            result = model.infer(corpus.clips[request.index])
            return InferClipResponse(
                predicted_class=result.predicted_class,
                class_name=result.class_name(),
                fake_probability=result.fake_probability,
                probabilities=result.probabilities.tolist(),
                status="SUCCESS"
            )
        except Exception as e:
            logger.error(f"Error inferring clip {request.index} of {request.corpus}: {str(e)}")
            return InferClipResponse(status="FAILED", error=error_info(e))

    @mcp.tool(
        name="gradient_check",
        description="Compare analytic and finite-difference gradients of every learnable parameter"
    )
    async def gradient_check(request: GradientCheckRequest) -> GradientCheckResponse:
        """End-to-end gradient check on a small model"""
        try:
            report = GradientChecker().check(T=request.T, L=request.L, batch=request.batch, seed=request.seed)
            return GradientCheckResponse(
                passed=report.passed,
                max_error=report.max_error,
                worst=report.worst,
                errors=dict(report.errors),
                status="SUCCESS"
            )
        except Exception as e:
            logger.error(f"Error running gradient check: {str(e)}")
            return GradientCheckResponse(status="FAILED", error=error_info(e))
