"""Training tools"""

import logging
from pathlib import Path

from fauforensics.config import build_dataclass
from fauforensics.models.network import ModelConfig
from fauforensics.models.tool_models import TrainModelRequest, TrainModelResponse, error_info
from fauforensics.models.training import TrainConfig
from fauforensics.services.corpus import CorpusService
from fauforensics.services.trainer import Trainer

logger = logging.getLogger(__name__)


def register_training_tools(mcp):
    """Register training tools with the MCP server"""

    @mcp.tool(
        name="train_model",
        description="Train a FauForensics model on a corpus file and write checkpoints plus a loss log"
    )
    async def train_model(request: TrainModelRequest) -> TrainModelResponse:
        """
        Train from scratch

        Args:
            request: Corpus path, output directory and the main schedule/loss settings

        Returns:
            TrainModelResponse with checkpoint paths and the last logged loss
        """
        config = mcp.config

        try:
            corpus = CorpusService(config.workers).read_corpus(Path(request.corpus))
            model_config = build_dataclass(ModelConfig, config.section(ModelConfig), {
                'T': corpus.T,
                'video_mode': corpus.mode,
                'L': request.latent,
                'head_mode': request.head_mode,
                'lambda_av': request.lambda_av,
                'lambda_a': request.lambda_a,
                'lambda_v': request.lambda_v,
                'seed': request.seed,
            })
            train_config = build_dataclass(TrainConfig, config.section(TrainConfig), {
                'lr0': request.lr,
                'batch': request.batch,
                'epochs': request.epochs,
                'seed': request.seed,
            })
            result = Trainer(model_config, train_config, workers=config.workers).train(
                corpus, Path(request.out_dir), inputs=request.corpus)

            logger.info(f"Trained model into {request.out_dir}")

            return TrainModelResponse(
                out_dir=str(result.out_dir),
                final_checkpoint=str(result.final_checkpoint),
                best_checkpoint=str(result.best_checkpoint),
                loss_log=str(result.loss_log),
                steps=len(result.records),
                best_epoch=result.best_epoch,
                final_loss=result.records[-1].total if result.records else None,
                status="SUCCESS"
            )
        except Exception as e:
            logger.error(f"Error training on {request.corpus}: {str(e)}")
            return TrainModelResponse(
                out_dir=request.out_dir,
                status="FAILED",
                error=error_info(e)
            )
