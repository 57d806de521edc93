"""Framed transport: protocol-ID multiplexed frames and capability handshake.

One logical framed channel per connection; the protocol id travels inside
each frame. Frames are length-prefixed with a 4-byte big-endian outer
length; everything inside is little-endian (see docs/wire.md). The same
bytes travel over real TCP sockets and simulated links.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .codec import DecodeError, EncodeError, Reader, Writer

# Registered protocol ids. The handshake protocol is internal plumbing for
# capability advertisement; the other four carry the messaging protocols.
PROTO_RELAY = "/vac/waku/relay/2.0.0"
PROTO_STORE = "/vac/waku/store/2.0.0"
PROTO_FILTER = "/vac/waku/filter/2.0.0"
PROTO_LIGHTPUSH = "/vac/waku/lightpush/2.0.0"
PROTO_HANDSHAKE = "/vac/waku/handshake/2.0.0"

REGISTERED_PROTOCOLS = frozenset(
    {PROTO_RELAY, PROTO_STORE, PROTO_FILTER, PROTO_LIGHTPUSH, PROTO_HANDSHAKE}
)

MAX_FRAME_BODY = 2 << 20  # 2 MiB default bound on the frame body

HANDSHAKE_TIMEOUT_NS = 5_000_000_000
REQUEST_TIMEOUT_NS = 10_000_000_000


class FrameKind(enum.IntEnum):
    REQUEST = 0
    RESPONSE = 1
    PUSH = 2


class Mode(enum.IntEnum):
    """Request/reply protocol role: full = requester and responder,
    light = requester only. Relay is full-only."""

    FULL = 0
    LIGHT = 1

    def label(self) -> str:
        return "full" if self is Mode.FULL else "light"


@dataclass(frozen=True, slots=True)
class Frame:
    protocol: str
    request_id: int
    kind: FrameKind
    body: bytes


@dataclass(frozen=True)
class Capabilities:
    """A peer's advertised protocol set, exchanged at connection setup.

    ``protocols`` maps protocol id to mode. Adaptive nodes may
    re-advertise at any time; the latest advertisement wins.
    """

    peer: str
    protocols: dict[str, Mode]

    def supports(self, protocol: str, mode: Mode | None = None) -> bool:
        have = self.protocols.get(protocol)
        if have is None:
            return False
        return mode is None or have == mode


def encode_frame(frame: Frame, max_body: int = MAX_FRAME_BODY) -> bytes:
    """4-byte big-endian length prefix followed by the frame payload."""
    if frame.protocol not in REGISTERED_PROTOCOLS:
        raise EncodeError(f"unregistered protocol id: {frame.protocol!r}")
    if len(frame.body) > max_body:
        raise EncodeError(f"frame body too large: {len(frame.body)} > {max_body}")
    w = Writer()
    w.str8(frame.protocol)
    w.u64(frame.request_id)
    w.u8(int(frame.kind))
    w.bytes32(frame.body)
    payload = w.getvalue()
    return len(payload).to_bytes(4, "big") + payload


def decode_frame(data: bytes, max_body: int = MAX_FRAME_BODY) -> Frame:
    """Decode exactly one frame; trailing bytes are an error."""
    if len(data) < 4:
        raise DecodeError("truncated input: missing length prefix", 0)
    length = int.from_bytes(data[:4], "big")
    if 4 + length != len(data):
        raise DecodeError(
            f"frame length mismatch: prefix says {length}, have {len(data) - 4}", 0
        )
    frame, _ = _decode_payload(data[4:], offset=4, max_body=max_body)
    return frame


def _decode_payload(payload: bytes, offset: int, max_body: int) -> tuple[Frame, int]:
    r = Reader(payload)
    try:
        protocol = r.str8()
        if protocol not in REGISTERED_PROTOCOLS:
            raise DecodeError(f"unregistered protocol id: {protocol!r}", 0)
        request_id = r.u64()
        at = r.pos
        kind_raw = r.u8()
        try:
            kind = FrameKind(kind_raw)
        except ValueError:
            raise DecodeError(f"unknown frame kind {kind_raw}", at) from None
        body = r.bytes32(limit=max_body)
        r.expect_end()
    except DecodeError as exc:
        raise DecodeError(str(exc).rsplit(" (at byte", 1)[0], exc.position + offset) from None
    return Frame(protocol, request_id, kind, body), r.pos


class FrameReader:
    """Incremental framer for byte streams.

    Feed arbitrary chunks; complete frames come out in order. Used by the
    TCP transport, where frame boundaries do not align with reads.
    """

    def __init__(self, max_body: int = MAX_FRAME_BODY):
        self._buf = bytearray()
        self._max_body = max_body

    def feed(self, chunk: bytes) -> list[Frame]:
        self._buf.extend(chunk)
        frames: list[Frame] = []
        while True:
            if len(self._buf) < 4:
                return frames
            length = int.from_bytes(self._buf[:4], "big")
            # header is bounded: str8 proto + u64 + u8 + u32 body prefix
            if length > self._max_body + 4096:
                raise DecodeError(f"frame payload length {length} exceeds bound", 0)
            if len(self._buf) < 4 + length:
                return frames
            payload = bytes(self._buf[4 : 4 + length])
            del self._buf[: 4 + length]
            frame, _ = _decode_payload(payload, offset=4, max_body=self._max_body)
            frames.append(frame)


def encode_capabilities(caps: Capabilities) -> bytes:
    """Handshake advertisement body: peer id plus sorted protocol/mode pairs."""
    w = Writer()
    w.str8(caps.peer)
    entries = sorted(caps.protocols.items())
    w.u8(len(entries))
    for protocol, mode in entries:
        w.str8(protocol)
        w.u8(int(mode))
    return w.getvalue()


def decode_capabilities(body: bytes) -> Capabilities:
    r = Reader(body)
    peer = r.str8()
    if not peer:
        raise DecodeError("empty peer id in advertisement", 0)
    count = r.u8()
    protocols: dict[str, Mode] = {}
    for _ in range(count):
        at = r.pos
        protocol = r.str8()
        if protocol not in REGISTERED_PROTOCOLS:
            raise DecodeError(f"unregistered protocol id: {protocol!r}", at)
        mode_at = r.pos
        mode_raw = r.u8()
        try:
            mode = Mode(mode_raw)
        except ValueError:
            raise DecodeError(f"unknown mode {mode_raw}", mode_at) from None
        if protocol == PROTO_RELAY and mode is not Mode.FULL:
            raise DecodeError("relay is full-only", mode_at)
        protocols[protocol] = mode
    r.expect_end()
    return Capabilities(peer=peer, protocols=protocols)


def handshake_frame(caps: Capabilities) -> Frame:
    return Frame(PROTO_HANDSHAKE, 0, FrameKind.PUSH, encode_capabilities(caps))


def usable_intersection(local: Capabilities, remote: Capabilities) -> set[str]:
    """Protocols advertised by both sides of a connection.

    Requests are additionally allowed toward any protocol the remote
    advertises in full mode, even when the local side does not advertise
    it (light clients); see Connection.can_request.
    """
    return set(local.protocols) & set(remote.protocols)
