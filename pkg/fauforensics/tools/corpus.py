"""Corpus tools for generating and inspecting synthetic clip corpora"""

import logging
from pathlib import Path

from fauforensics.config import build_dataclass
from fauforensics.models.clip import GenConfig
from fauforensics.models.tool_models import (
    DescribeCorpusRequest, DescribeCorpusResponse,
    GenerateCorpusRequest, GenerateCorpusResponse,
    error_info
)
from fauforensics.services.corpus import CorpusService

logger = logging.getLogger(__name__)


def register_corpus_tools(mcp):
    """Register all corpus tools with the MCP server"""

    @mcp.tool(
        name="generate_corpus",
        description="Generate a seeded synthetic audio-visual corpus (labels cycle RARV, FARV, RAFV, FAFV)"
    )
    async def generate_corpus(request: GenerateCorpusRequest) -> GenerateCorpusResponse:
        """
        Generate and write a corpus file

        Args:
            request: Output path, clip count, seed, mode and frame count
        """
        config = mcp.config

        try:
            gen = build_dataclass(GenConfig, config.section(GenConfig), {'mode': request.mode, 'T': request.T})
            service = CorpusService(config.workers)
            corpus = service.generate(request.count, request.seed, gen)
            path = service.write_corpus(corpus, Path(request.out))
            return GenerateCorpusResponse(
                path=str(path),
                count=len(corpus),
                label_histogram=service.label_histogram(corpus),
                manifest_path=str(service.manifest_path(path)),
                status="SUCCESS"
            )
        except Exception as e:
            logger.error(f"Error generating corpus {request.out}: {str(e)}")
            return GenerateCorpusResponse(
                path=request.out,
                count=0,
                status="FAILED",
                error=error_info(e)
            )

    @mcp.tool(
        name="describe_corpus",
        description="Get clip count, mode, frame count and label histogram of a corpus file"
    )
    async def describe_corpus(request: DescribeCorpusRequest) -> DescribeCorpusResponse:
        """Read a corpus file and summarize it"""
        config = mcp.config

        try:
            service = CorpusService(config.workers)
            corpus = service.read_corpus(Path(request.path))
            return DescribeCorpusResponse(
                path=request.path,
                count=len(corpus),
                mode=corpus.mode.value,
                T=corpus.T,
                label_histogram=service.label_histogram(corpus),
                status="SUCCESS"
            )
        except Exception as e:
            logger.error(f"Error describing corpus {request.path}: {str(e)}")
            return DescribeCorpusResponse(
                path=request.path,
                status="FAILED",
                error=error_info(e)
            )
