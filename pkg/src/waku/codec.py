"""Low-level binary primitives shared by the message and frame codecs.

All multi-byte integers inside encoded bodies are little-endian; the only
big-endian value in the whole wire format is the outer 4-byte frame length
prefix (see wire.py). Variable-length values carry a little-endian length
prefix. The full layout is documented in docs/wire.md.
"""

from __future__ import annotations

import struct


class DecodeError(ValueError):
    """Raised when a byte sequence cannot be decoded.

    ``position`` is the byte offset at which decoding failed.
    """

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at byte {position})")
        self.position = position


class EncodeError(ValueError):
    """Raised when a value violates a codec bound and cannot be encoded."""


class Writer:
    """Accumulates a deterministic byte encoding."""

    def __init__(self) -> None:
        self._parts: list[bytes] = []

    def u8(self, value: int) -> None:
        self._parts.append(struct.pack("<B", value))

    def u32(self, value: int) -> None:
        self._parts.append(struct.pack("<I", value))

    def u64(self, value: int) -> None:
        self._parts.append(struct.pack("<Q", value))

    def i64(self, value: int) -> None:
        self._parts.append(struct.pack("<q", value))

    def raw(self, data: bytes) -> None:
        self._parts.append(data)

    def bytes32(self, data: bytes) -> None:
        """Length-prefixed (u32) byte string."""
        self.u32(len(data))
        self.raw(data)

    def str32(self, text: str) -> None:
        self.bytes32(text.encode("utf-8"))

    def str8(self, text: str) -> None:
        """Length-prefixed (u8) short string, at most 255 UTF-8 bytes."""
        data = text.encode("utf-8")
        if len(data) > 255:
            raise EncodeError(f"short string exceeds 255 bytes: {len(data)}")
        self.u8(len(data))
        self.raw(data)

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class Reader:
    """Cursor over a byte sequence with strict bounds checking.

    Every read failure raises DecodeError carrying the offending offset.
    """

    def __init__(self, data: bytes):
        self._data = data
        self.pos = 0

    def _take(self, n: int) -> bytes:
        if self.pos + n > len(self._data):
            raise DecodeError(
                f"truncated input: need {n} bytes, have {len(self._data) - self.pos}",
                self.pos,
            )
        chunk = self._data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self._take(1)[0]

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self._take(8))[0]

    def i64(self) -> int:
        return struct.unpack("<q", self._take(8))[0]

    def raw(self, n: int) -> bytes:
        return self._take(n)

    def bytes32(self, limit: int | None = None) -> bytes:
        at = self.pos
        n = self.u32()
        if limit is not None and n > limit:
            raise DecodeError(f"length {n} exceeds limit {limit}", at)
        return self._take(n)

    def str32(self, limit: int | None = None) -> str:
        at = self.pos
        data = self.bytes32(limit)
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError(f"invalid UTF-8: {exc}", at) from None

    def str8(self) -> str:
        at = self.pos
        n = self.u8()
        data = self._take(n)
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError(f"invalid UTF-8: {exc}", at) from None

    def remaining(self) -> int:
        return len(self._data) - self.pos

    def expect_end(self) -> None:
        if self.pos != len(self._data):
            raise DecodeError(
                f"trailing garbage: {len(self._data) - self.pos} unconsumed bytes",
                self.pos,
            )
