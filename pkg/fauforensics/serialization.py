"""FFT1 tensor codec and the byte-level reader shared by corpus and checkpoint files

Layout (little-endian): magic "FFT1", rank u32, extents u32 each,
dtype tag u8 (0 = float64, 1 = float32), raw row-major payload.
"""

import struct

import numpy as np

from fauforensics.errors import FormatError

TENSOR_MAGIC = b'FFT1'

DTYPE_TAGS = {
    np.dtype('<f8'): 0,
    np.dtype('<f4'): 1,
}
TAG_DTYPES = {tag: dtype for dtype, tag in DTYPE_TAGS.items()}


def encode_tensor(array: np.ndarray) -> bytes:
    """Serialize a float32/float64 array into FFT1 bytes"""
    dtype = np.dtype(array.dtype).newbyteorder('<')
    if dtype not in DTYPE_TAGS:
        raise FormatError(f"FFT1 supports float64 and float32 only, got {array.dtype}")
    if array.ndim == 0:
        array = array.reshape(1)
    header = TENSOR_MAGIC + struct.pack('<I', array.ndim)
    header += struct.pack(f'<{array.ndim}I', *array.shape)
    header += struct.pack('<B', DTYPE_TAGS[dtype])
    payload = np.ascontiguousarray(array, dtype=dtype).tobytes(order='C')
    return header + payload


class ByteReader:
    """Sequential reader that reports the byte offset of every failure"""

    def __init__(self, data: bytes, offset: int = 0):
        self.data = data
        self.offset = offset

    @property
    def remaining(self) -> int:
        return len(self.data) - self.offset

    def take(self, n: int, what: str) -> bytes:
        if n < 0 or self.offset + n > len(self.data):
            raise FormatError(f"Truncated while reading {what}: need {n} bytes, have {self.remaining}", self.offset)
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt: str, what: str):
        size = struct.calcsize(fmt)
        values = struct.unpack(fmt, self.take(size, what))
        return values[0] if len(values) == 1 else values

    def expect_magic(self, magic: bytes, what: str) -> None:
        start = self.offset
        got = self.take(len(magic), f"{what} magic")
        if got != magic:
            raise FormatError(f"Bad {what} magic {got!r}, expected {magic!r}", start)

    def read_tensor(self, what: str = 'tensor') -> np.ndarray:
        self.expect_magic(TENSOR_MAGIC, what)
        rank = self.unpack('<I', f'{what} rank')
        shape = self.unpack(f'<{rank}I', f'{what} extents') if rank else ()
        if isinstance(shape, int):
            shape = (shape,)
        tag_offset = self.offset
        tag = self.unpack('<B', f'{what} dtype tag')
        if tag not in TAG_DTYPES:
            raise FormatError(f"Unknown dtype tag {tag} in {what}", tag_offset)
        dtype = TAG_DTYPES[tag]
        count = int(np.prod(shape)) if shape else 1
        payload = self.take(count * dtype.itemsize, f'{what} payload')
        return np.frombuffer(payload, dtype=dtype).reshape(shape).copy()


def decode_tensor(data: bytes) -> np.ndarray:
    reader = ByteReader(data)
    array = reader.read_tensor()
    if reader.remaining:
        raise FormatError(f"{reader.remaining} trailing bytes after tensor", reader.offset)
    return array
