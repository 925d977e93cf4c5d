"""Discovery tools for FauForensics overview statistics"""

import logging
from pathlib import Path
from typing import Any, Dict

from fauforensics.models.evaluation import PerturbKind
from fauforensics.models.training import OPTIMIZER_NOTE

logger = logging.getLogger(__name__)


def count_artifacts(directory: Path) -> Dict[str, int]:
    """Corpus, checkpoint, report and loss-log files below directory"""
    directory = Path(directory)
    counts = {'corpora_count': 0, 'checkpoints_count': 0, 'reports_count': 0, 'loss_logs_count': 0}
    if not directory.is_dir():
        return counts
    for path in directory.rglob('*'):
        if not path.is_file():
            continue
        if path.suffix == '.ffc':
            counts['corpora_count'] += 1
        elif path.suffix == '.ffm':
            counts['checkpoints_count'] += 1
        elif path.suffix == '.report' or path.name.endswith('.grid.tsv'):
            counts['reports_count'] += 1
        elif path.name == 'loss.log':
            counts['loss_logs_count'] += 1
    return counts


def register_discovery_tools(mcp):
    """Register overview discovery tools with the MCP server"""

    @mcp.tool(
        name="fauforensics_overview",
        description="Count corpora, checkpoints and reports in a directory and list supported perturbations"
    )
    async def fauforensics_overview(directory: str = ".") -> Dict[str, Any]:
        """Get counts of FauForensics artifacts in a directory"""
        config = mcp.config

        logger.info(f"Getting FauForensics overview of {directory}...")

        overview: Dict[str, Any] = dict(count_artifacts(Path(directory)))
        overview['workers'] = config.workers
        overview['perturbations'] = [kind.value for kind in PerturbKind]
        overview['optimizer'] = OPTIMIZER_NOTE
        return overview
