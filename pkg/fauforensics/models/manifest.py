"""Run manifest written next to every command's outputs"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

from fauforensics import __version__
from fauforensics.config import pairs_to_text


@dataclass
class RunManifest:
    """What ran, with which configuration, reading and writing which files"""
    command: str
    seed: int
    config_text: str = ''
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    substitutions: List[str] = field(default_factory=list)
    wall_time_s: float = 0.0
    tool_version: str = __version__

    def to_text(self) -> str:
        pairs = [('command', self.command), ('tool_version', self.tool_version), ('seed', self.seed)]
        pairs += [(f"input.{k}", v) for k, v in sorted(self.inputs.items())]
        pairs += [(f"output.{k}", v) for k, v in sorted(self.outputs.items())]
        pairs += [(f"substitution.{i}", s) for i, s in enumerate(self.substitutions)]
        pairs.append(('wall_time_s', f"{self.wall_time_s:.3f}"))
        text = pairs_to_text(pairs)
        if self.config_text:
            text += "\n[config]\n" + self.config_text
        return text

    def write(self, path: Path) -> Path:
        path.write_text(self.to_text(), encoding='utf-8')
        return path
