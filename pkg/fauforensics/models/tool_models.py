"""Request and Response models for all FauForensics MCP tools"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


# ============================================================================
# Common Response Models
# ============================================================================

@dataclass
class ErrorInfo:
    """Error information"""
    message: str
    code: Optional[str] = None
    details: Optional[Dict[str, Any]] = None


def error_info(exc: Exception) -> ErrorInfo:
    """ErrorInfo whose code is the error kind (or 'internal' for unexpected errors)"""
    return ErrorInfo(message=str(exc), code=getattr(exc, 'kind', 'internal'))


# ============================================================================
# Corpus Tool Models
# ============================================================================

@dataclass
class GenerateCorpusRequest:
    """Request to generate a synthetic corpus file"""
    out: str
    count: int
    seed: int = 0
    mode: str = "feature"
    T: int = 25


@dataclass
class GenerateCorpusResponse:
    """Response from generate corpus"""
    path: str
    count: int
    label_histogram: Dict[str, int] = field(default_factory=dict)
    manifest_path: Optional[str] = None
    status: str = "SUCCESS"
    error: Optional[ErrorInfo] = None


@dataclass
class DescribeCorpusRequest:
    """Request to describe a corpus file"""
    path: str


@dataclass
class DescribeCorpusResponse:
    """Response from describe corpus"""
    path: str
    count: int = 0
    mode: str = ""
    T: int = 0
    label_histogram: Dict[str, int] = field(default_factory=dict)
    status: str = "SUCCESS"
    error: Optional[ErrorInfo] = None


# ============================================================================
# Training Tool Models
# ============================================================================

@dataclass
class TrainModelRequest:
    """Request to train a model on a corpus file"""
    corpus: str
    out_dir: str
    epochs: int = 50
    batch: int = 32
    lr: float = 1e-4
    lambda_av: float = 0.8
    lambda_a: float = 0.1
    lambda_v: float = 0.1
    head_mode: str = "binary"
    latent: int = 512
    seed: int = 0


@dataclass
class TrainModelResponse:
    """Response from train model"""
    out_dir: str
    final_checkpoint: Optional[str] = None
    best_checkpoint: Optional[str] = None
    loss_log: Optional[str] = None
    steps: int = 0
    best_epoch: int = 0
    final_loss: Optional[float] = None
    status: str = "SUCCESS"
    error: Optional[ErrorInfo] = None


# ============================================================================
# Evaluation Tool Models
# ============================================================================

@dataclass
class EvaluateCheckpointRequest:
    """Request to evaluate a checkpoint on a corpus"""
    checkpoint: str
    corpus: str
    report: Optional[str] = None
    with_correlation: bool = False


@dataclass
class EvaluateCheckpointResponse:
    """Response from evaluate checkpoint"""
    n_samples: int = 0
    accuracy: Optional[float] = None
    auc: Optional[float] = None
    confusion: List[List[int]] = field(default_factory=list)
    report_path: Optional[str] = None
    status: str = "SUCCESS"
    error: Optional[ErrorInfo] = None


@dataclass
class PerturbationEvalRequest:
    """Request to evaluate a checkpoint under video perturbations"""
    checkpoint: str
    corpus: str
    report: Optional[str] = None


@dataclass
class PerturbationEvalResponse:
    """Response from perturbation eval; grid maps kind to AUC per level 0..4"""
    clean_auc: Optional[float] = None
    grid: Dict[str, List[float]] = field(default_factory=dict)
    report_path: Optional[str] = None
    status: str = "SUCCESS"
    error: Optional[ErrorInfo] = None


@dataclass
class AnalyzeCorrelationRequest:
    """Request to compare FAU temporal consistency of real and fake video"""
    corpus: str
    report: Optional[str] = None


@dataclass
class AnalyzeCorrelationResponse:
    """Response from analyze correlation, keyed by statistic name"""
    statistics: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    status: str = "SUCCESS"
    error: Optional[ErrorInfo] = None


@dataclass
class InferClipRequest:
    """Request to score one clip of a corpus file"""
    checkpoint: str
    corpus: str
    index: int = 0


@dataclass
class InferClipResponse:
    """Response from infer clip"""
    predicted_class: Optional[int] = None
    class_name: Optional[str] = None
    fake_probability: Optional[float] = None
    probabilities: List[float] = field(default_factory=list)
    status: str = "SUCCESS"
    error: Optional[ErrorInfo] = None


@dataclass
class GradientCheckRequest:
    """Request to run the end-to-end gradient check"""
    T: int = 8
    L: int = 16
    batch: int = 2
    seed: int = 0


@dataclass
class GradientCheckResponse:
    """Response from gradient check"""
    passed: bool = False
    max_error: Optional[float] = None
    worst: Optional[str] = None
    errors: Dict[str, float] = field(default_factory=dict)
    status: str = "SUCCESS"
    error: Optional[ErrorInfo] = None
