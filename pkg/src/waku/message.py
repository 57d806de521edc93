"""The Waku message data unit and its deterministic binary codec.

A message couples an opaque payload with a content topic. The content topic
is an application-level label: it drives content filtering and history
queries but is never consulted by routing (routing keys are pubsub topics,
which are plain strings handled by the relay layer).

The binary encoding is field-tagged, little-endian and length-prefixed so
that golden vectors stay byte-identical across runs and platforms. Layout
details live in docs/wire.md.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .codec import DecodeError, EncodeError, Reader, Writer

MAX_PAYLOAD_BYTES = 1 << 20  # 1 MiB default hard bound, configurable per call
MAX_TOPIC_BYTES = 1024

DIGEST_SIZE = 32

_TAG_PAYLOAD = 0x01
_TAG_CONTENT_TOPIC = 0x02
_TAG_VERSION = 0x03
_TAG_TIMESTAMP = 0x04

_U32_MAX = (1 << 32) - 1
_I64_MIN = -(1 << 63)
_I64_MAX = (1 << 63) - 1


@dataclass(frozen=True, slots=True)
class WakuMessage:
    """The routed data unit.

    ``timestamp`` is sender-assigned, in nanoseconds since the Unix epoch.
    Receiver-side time is tracked separately by the history store.
    """

    payload: bytes
    content_topic: str
    version: int = 0
    timestamp: int = 0


@dataclass(frozen=True, slots=True)
class ContentFilter:
    """Content-level query key: a set of content topics to accept.

    An empty topic list matches every message (match-all convention).
    Matching is exact string equality, no wildcards.
    """

    content_topics: tuple[str, ...] = ()

    def __init__(self, content_topics=()):  # accept any iterable of str
        object.__setattr__(self, "content_topics", tuple(content_topics))


def validate_pubsub_topic(topic: str) -> None:
    """Pubsub topics are nonempty UTF-8, at most 1024 bytes."""
    if not isinstance(topic, str) or not topic:
        raise ValueError("pubsub topic must be a nonempty string")
    if len(topic.encode("utf-8")) > MAX_TOPIC_BYTES:
        raise ValueError(f"pubsub topic exceeds {MAX_TOPIC_BYTES} bytes")


def validate_message(msg: WakuMessage, max_payload: int = MAX_PAYLOAD_BYTES) -> None:
    """Check the message invariants, raising EncodeError on violation."""
    if not msg.content_topic:
        raise EncodeError("content_topic must be nonempty")
    if len(msg.content_topic.encode("utf-8")) > MAX_TOPIC_BYTES:
        raise EncodeError(f"content_topic exceeds {MAX_TOPIC_BYTES} bytes")
    if len(msg.payload) > max_payload:
        raise EncodeError(
            f"payload too large: {len(msg.payload)} > {max_payload} bytes"
        )
    if not 0 <= msg.version <= _U32_MAX:
        raise EncodeError("version out of unsigned 32-bit range")
    if not _I64_MIN <= msg.timestamp <= _I64_MAX:
        raise EncodeError("timestamp out of signed 64-bit range")


def encode_message(msg: WakuMessage, max_payload: int = MAX_PAYLOAD_BYTES) -> bytes:
    """Encode a message to its canonical binary form.

    Fields appear in fixed tag order (payload, content topic, version,
    timestamp), all mandatory, so encoding is a bijection on valid messages.
    """
    validate_message(msg, max_payload)
    w = Writer()
    w.u8(_TAG_PAYLOAD)
    w.bytes32(msg.payload)
    w.u8(_TAG_CONTENT_TOPIC)
    w.str32(msg.content_topic)
    w.u8(_TAG_VERSION)
    w.u32(msg.version)
    w.u8(_TAG_TIMESTAMP)
    w.i64(msg.timestamp)
    return w.getvalue()


def decode_message(data: bytes, max_payload: int = MAX_PAYLOAD_BYTES) -> WakuMessage:
    """Decode the canonical binary form back into a message.

    Strict: mandatory fields in tag order, no unknown tags, no trailing
    bytes. Raises DecodeError with the failing byte position.
    """
    r = Reader(data)

    def expect_tag(tag: int, name: str) -> None:
        at = r.pos
        got = r.u8()
        if got != tag:
            raise DecodeError(f"expected {name} tag 0x{tag:02x}, got 0x{got:02x}", at)

    expect_tag(_TAG_PAYLOAD, "payload")
    payload = r.bytes32(limit=max_payload)
    expect_tag(_TAG_CONTENT_TOPIC, "content_topic")
    at = r.pos
    content_topic = r.str32(limit=MAX_TOPIC_BYTES)
    if not content_topic:
        raise DecodeError("content_topic must be nonempty", at)
    expect_tag(_TAG_VERSION, "version")
    version = r.u32()
    expect_tag(_TAG_TIMESTAMP, "timestamp")
    timestamp = r.i64()
    r.expect_end()
    return WakuMessage(
        payload=payload,
        content_topic=content_topic,
        version=version,
        timestamp=timestamp,
    )


def digest(msg: WakuMessage) -> bytes:
    """32-byte content digest identifying a message for dedup and cursors.

    SHA-256 over the length-prefixed content topic followed by the payload.
    Version and timestamp are deliberately excluded so a republished
    identical payload deduplicates.
    """
    topic = msg.content_topic.encode("utf-8")
    h = hashlib.sha256()
    h.update(len(topic).to_bytes(4, "little"))
    h.update(topic)
    h.update(msg.payload)
    return h.digest()


def matches(msg: WakuMessage, content_filter: ContentFilter) -> bool:
    """True iff the filter is empty (match-all) or lists the message's topic."""
    topics = content_filter.content_topics
    return not topics or msg.content_topic in topics
