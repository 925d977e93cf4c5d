"""Services package: signal processing, data, model, training and evaluation"""

from fauforensics.services.audio import AudioFrontend
from fauforensics.services.corpus import CorpusService
from fauforensics.services.network import FauForensicsModel
from fauforensics.services.checkpoint import CheckpointService
from fauforensics.services.trainer import Trainer
from fauforensics.services import metrics
from fauforensics.services.perturbation import PerturbationService
from fauforensics.services.evaluation import EvaluationService
from fauforensics.services.gradcheck import GradientChecker

__all__ = [
    'AudioFrontend',
    'CorpusService',
    'FauForensicsModel',
    'CheckpointService',
    'Trainer',
    'metrics',
    'PerturbationService',
    'EvaluationService',
    'GradientChecker'
]
