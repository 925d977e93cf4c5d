"""FFM1 checkpoint files

Layout (little-endian): magic "FFM1", u32 header length, UTF-8 key=value
header (ModelConfig fields plus optimizer_note), u32 tensor count, then per
tensor: u16 name length, name, u8 frozen flag, FFT1 tensor.
"""

import logging
import struct
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from fauforensics.config import build_dataclass, parse_key_value_text, to_key_value_text
from fauforensics.errors import ConfigError, FormatError
from fauforensics.models.network import ModelConfig
from fauforensics.models.training import OPTIMIZER_NOTE
from fauforensics.serialization import ByteReader, encode_tensor
from fauforensics.services.network import FauForensicsModel

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b'FFM1'
HEADER_ONLY_KEYS = ('optimizer_note',)


class CheckpointService:
    """Save and restore models bit-exactly"""

    def encode(self, model: FauForensicsModel, optimizer_note: str = OPTIMIZER_NOTE) -> bytes:
        header = to_key_value_text(model.config) + f"optimizer_note={optimizer_note}\n"
        header_bytes = header.encode('utf-8')
        tensors = model.named_tensors()
        chunks = [CHECKPOINT_MAGIC, struct.pack('<I', len(header_bytes)), header_bytes,
                  struct.pack('<I', len(tensors))]
        for name, tensor, frozen in tensors:
            name_bytes = name.encode('utf-8')
            chunks.append(struct.pack('<H', len(name_bytes)))
            chunks.append(name_bytes)
            chunks.append(struct.pack('<B', 1 if frozen else 0))
            chunks.append(encode_tensor(tensor.data))
        return b''.join(chunks)

    def save(self, model: FauForensicsModel, path: Path, optimizer_note: str = OPTIMIZER_NOTE) -> Path:
        """Write the model to path"""
        path = Path(path)
        try:
            path.write_bytes(self.encode(model, optimizer_note))
            logger.info(f"Saved checkpoint {path}")
            return path
        except OSError as e:
            logger.error(f"Error saving checkpoint {path}: {str(e)}")
            raise

    def read_header(self, data: bytes) -> Dict[str, str]:
        reader = ByteReader(data)
        reader.expect_magic(CHECKPOINT_MAGIC, 'checkpoint')
        return self._header(reader)

    def _header(self, reader: ByteReader) -> Dict[str, str]:
        length = reader.unpack('<I', 'checkpoint header length')
        start = reader.offset
        raw = reader.take(length, 'checkpoint header')
        try:
            return parse_key_value_text(raw.decode('utf-8'))
        except (UnicodeDecodeError, ConfigError) as e:
            raise FormatError(f"Malformed checkpoint header: {e}", start)

    def decode(self, data: bytes) -> FauForensicsModel:
        reader = ByteReader(data)
        reader.expect_magic(CHECKPOINT_MAGIC, 'checkpoint')
        header_offset = reader.offset
        header = self._header(reader)
        model_keys = {k: v for k, v in header.items() if k not in HEADER_ONLY_KEYS}
        try:
            config = build_dataclass(ModelConfig, model_keys)
        except ConfigError as e:
            raise FormatError(f"Checkpoint header is not a valid model config: {e}", header_offset)
        model = FauForensicsModel(config)
        expected = {name: (tensor, frozen) for name, tensor, frozen in model.named_tensors()}

        count_offset = reader.offset
        count = reader.unpack('<I', 'tensor count')
        if count != len(expected):
            raise FormatError(f"Checkpoint holds {count} tensors, config implies {len(expected)}", count_offset)
        seen = set()
        for index in range(count):
            entry_offset = reader.offset
            name_len = reader.unpack('<H', f'tensor {index} name length')
            name = reader.take(name_len, f'tensor {index} name').decode('utf-8', errors='replace')
            frozen = bool(reader.unpack('<B', f'tensor {name} frozen flag'))
            array = reader.read_tensor(f'tensor {name}')
            if name not in expected or name in seen:
                raise FormatError(f"Unexpected tensor {name!r}", entry_offset)
            target, target_frozen = expected[name]
            if frozen != target_frozen:
                raise FormatError(f"Tensor {name!r} frozen flag mismatch", entry_offset)
            if array.shape != target.shape or array.dtype != np.float64:
                raise FormatError(f"Tensor {name!r} has shape {array.shape} {array.dtype}, "
                                  f"expected {target.shape} float64", entry_offset)
            target.data[...] = array
            seen.add(name)
        if reader.remaining:
            raise FormatError(f"{reader.remaining} trailing bytes after checkpoint", reader.offset)
        return model

    def load(self, path: Path) -> FauForensicsModel:
        """Read a checkpoint; the returned model is bit-identical to the saved one"""
        path = Path(path)
        try:
            data = path.read_bytes()
        except OSError as e:
            logger.error(f"Error reading checkpoint {path}: {str(e)}")
            raise FormatError(f"Cannot read checkpoint {path}: {e}")
        model = self.decode(data)
        logger.info(f"Loaded checkpoint {path} (variant={model.config.variant})")
        return model

    def optimizer_note(self, path: Path) -> Optional[str]:
        return self.read_header(Path(path).read_bytes()).get('optimizer_note')

    def frozen_bytes(self, path: Path) -> bytes:
        """Concatenated FFT1 bytes of the frozen tensors, for bit-exact comparisons"""
        model = self.load(path)
        return b''.join(encode_tensor(t.data) for _, t, frozen in model.named_tensors() if frozen)
