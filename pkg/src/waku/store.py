"""Historical message persistence and paged querying.

A full-mode store node archives every fresh message its relay processes
and serves paged history queries; a light-mode node only issues queries.
The archive is a capacity-bounded container ordered by the index key
(receiver_time, digest): receiver time rather than the sender timestamp,
because sender clocks are untrusted. Eviction is strictly oldest-first.

Cursors are exclusive resume points and tolerate eviction: a cursor whose
entry has been evicted simply resumes at the next surviving key.
"""

from __future__ import annotations

import enum
from bisect import bisect_left, bisect_right, insort
from dataclasses import dataclass, field

from . import message as msg_mod
from .codec import DecodeError, Reader, Writer
from .errors import ProtocolError
from .message import ContentFilter, WakuMessage, matches

DEFAULT_PAGE_SIZE = 20
MAX_PAGE_SIZE = 100
DEFAULT_CAPACITY = 1000

SNAPSHOT_MAGIC = b"WAKUSTO1"

IndexKey = tuple[int, bytes]  # (receiver_time ns, digest)


class Direction(enum.IntEnum):
    FORWARD = 0
    BACKWARD = 1


@dataclass(frozen=True, slots=True)
class StoredMessage:
    msg: WakuMessage
    pubsub_topic: str
    receiver_time: int
    digest: bytes

    @property
    def index_key(self) -> IndexKey:
        return (self.receiver_time, self.digest)


@dataclass(frozen=True, slots=True)
class HistoryQuery:
    pubsub_topic: str | None = None
    content_filter: ContentFilter = field(default_factory=ContentFilter)
    time_start: int | None = None  # inclusive, on receiver_time
    time_end: int | None = None  # exclusive
    page_size: int = DEFAULT_PAGE_SIZE
    cursor: IndexKey | None = None
    direction: Direction = Direction.FORWARD


@dataclass(frozen=True, slots=True)
class HistoryResponse:
    messages: tuple[StoredMessage, ...]
    next_cursor: IndexKey | None = None


def clamp_page_size(page_size: int) -> int:
    return max(1, min(MAX_PAGE_SIZE, page_size))


def _entry_matches(entry: StoredMessage, q: HistoryQuery) -> bool:
    if q.pubsub_topic is not None and entry.pubsub_topic != q.pubsub_topic:
        return False
    if q.time_start is not None and entry.receiver_time < q.time_start:
        return False
    if q.time_end is not None and entry.receiver_time >= q.time_end:
        return False
    return matches(entry.msg, q.content_filter)


class Archive:
    """Capacity-bounded message archive ordered by (receiver_time, digest)."""

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if capacity < 1:
            raise ValueError("store capacity must be >= 1")
        self.capacity = capacity
        self._keys: list[IndexKey] = []
        self._entries: dict[IndexKey, StoredMessage] = {}

    def __len__(self) -> int:
        return len(self._keys)

    def __iter__(self):
        return (self._entries[k] for k in self._keys)

    def insert(self, msg: WakuMessage, pubsub_topic: str, receiver_time: int) -> None:
        """Insert at the sorted position, evicting the oldest entry when
        over capacity. Duplicate (receiver_time, digest) keys are ignored."""
        entry = StoredMessage(
            msg=msg,
            pubsub_topic=pubsub_topic,
            receiver_time=receiver_time,
            digest=msg_mod.digest(msg),
        )
        key = entry.index_key
        if key in self._entries:
            return
        insort(self._keys, key)
        self._entries[key] = entry
        while len(self._keys) > self.capacity:
            evicted = self._keys.pop(0)
            del self._entries[evicted]

    def query(self, q: HistoryQuery) -> HistoryResponse:
        """One page of matches, starting strictly after the cursor in the
        query direction. next_cursor is present iff more matches remain."""
        page_size = clamp_page_size(q.page_size)
        keys = self._keys
        if q.direction is Direction.FORWARD:
            idx = bisect_right(keys, q.cursor) if q.cursor is not None else 0
            step = 1
        else:
            idx = (bisect_left(keys, q.cursor) - 1) if q.cursor is not None else len(keys) - 1
            step = -1
        out: list[StoredMessage] = []
        next_cursor: IndexKey | None = None
        while 0 <= idx < len(keys):
            entry = self._entries[keys[idx]]
            if _entry_matches(entry, q):
                if len(out) == page_size:
                    next_cursor = out[-1].index_key
                    break
                out.append(entry)
            idx += step
        return HistoryResponse(messages=tuple(out), next_cursor=next_cursor)


def validate_response(resp: HistoryResponse, q: HistoryQuery) -> None:
    """Client-side enforcement of the response invariants.

    Raises ProtocolError when the responder returned an over-full page,
    out-of-order entries, inconsistent digests, or entries that do not
    match the query.
    """
    if len(resp.messages) > clamp_page_size(q.page_size):
        raise ProtocolError("store response exceeds requested page size")
    for entry in resp.messages:
        if entry.digest != msg_mod.digest(entry.msg):
            raise ProtocolError("store response entry digest mismatch")
        if not _entry_matches(entry, q):
            raise ProtocolError("store response entry does not match query")
    keys = [e.index_key for e in resp.messages]
    ordered = sorted(keys) if q.direction is Direction.FORWARD else sorted(keys, reverse=True)
    if keys != ordered or len(set(keys)) != len(keys):
        raise ProtocolError("store response entries not strictly ordered")


# Wire bodies (layout in docs/wire.md)

_HAS_PUBSUB = 0x01
_HAS_START = 0x02
_HAS_END = 0x04
_HAS_CURSOR = 0x08

STATUS_OK = 0
STATUS_ERROR = 1


def encode_query(q: HistoryQuery) -> bytes:
    w = Writer()
    flags = 0
    if q.pubsub_topic is not None:
        flags |= _HAS_PUBSUB
    if q.time_start is not None:
        flags |= _HAS_START
    if q.time_end is not None:
        flags |= _HAS_END
    if q.cursor is not None:
        flags |= _HAS_CURSOR
    w.u8(flags)
    if q.pubsub_topic is not None:
        w.str32(q.pubsub_topic)
    w.u32(len(q.content_filter.content_topics))
    for topic in q.content_filter.content_topics:
        w.str32(topic)
    if q.time_start is not None:
        w.i64(q.time_start)
    if q.time_end is not None:
        w.i64(q.time_end)
    w.u32(q.page_size)
    if q.cursor is not None:
        w.i64(q.cursor[0])
        w.raw(q.cursor[1])
    w.u8(int(q.direction))
    return w.getvalue()


def decode_query(body: bytes) -> HistoryQuery:
    r = Reader(body)
    flags = r.u8()
    pubsub_topic = r.str32(limit=msg_mod.MAX_TOPIC_BYTES) if flags & _HAS_PUBSUB else None
    count = r.u32()
    if count > 10_000:
        raise DecodeError(f"unreasonable filter topic count {count}", r.pos)
    topics = [r.str32(limit=msg_mod.MAX_TOPIC_BYTES) for _ in range(count)]
    time_start = r.i64() if flags & _HAS_START else None
    time_end = r.i64() if flags & _HAS_END else None
    page_size = r.u32()
    cursor = None
    if flags & _HAS_CURSOR:
        cursor = (r.i64(), r.raw(msg_mod.DIGEST_SIZE))
    at = r.pos
    direction_raw = r.u8()
    try:
        direction = Direction(direction_raw)
    except ValueError:
        raise DecodeError(f"unknown direction {direction_raw}", at) from None
    r.expect_end()
    return HistoryQuery(
        pubsub_topic=pubsub_topic,
        content_filter=ContentFilter(topics),
        time_start=time_start,
        time_end=time_end,
        page_size=page_size,
        cursor=cursor,
        direction=direction,
    )


def _encode_stored(w: Writer, entry: StoredMessage) -> None:
    w.bytes32(msg_mod.encode_message(entry.msg))
    w.str32(entry.pubsub_topic)
    w.i64(entry.receiver_time)
    w.raw(entry.digest)


def _decode_stored(r: Reader) -> StoredMessage:
    at = r.pos
    msg = msg_mod.decode_message(r.bytes32(limit=msg_mod.MAX_PAYLOAD_BYTES + 4096))
    pubsub_topic = r.str32(limit=msg_mod.MAX_TOPIC_BYTES)
    receiver_time = r.i64()
    digest = r.raw(msg_mod.DIGEST_SIZE)
    if digest != msg_mod.digest(msg):
        raise DecodeError("stored message digest mismatch", at)
    return StoredMessage(msg, pubsub_topic, receiver_time, digest)


def encode_response(resp: HistoryResponse) -> bytes:
    w = Writer()
    w.u8(STATUS_OK)
    w.u32(len(resp.messages))
    for entry in resp.messages:
        _encode_stored(w, entry)
    if resp.next_cursor is not None:
        w.u8(1)
        w.i64(resp.next_cursor[0])
        w.raw(resp.next_cursor[1])
    else:
        w.u8(0)
    return w.getvalue()


def encode_error_response(reason: str) -> bytes:
    w = Writer()
    w.u8(STATUS_ERROR)
    w.str32(reason)
    return w.getvalue()


def decode_response(body: bytes) -> HistoryResponse:
    """Decode a response body; a status=error body raises ProtocolError."""
    r = Reader(body)
    status = r.u8()
    if status == STATUS_ERROR:
        raise ProtocolError(f"store error: {r.str32(limit=4096)}")
    if status != STATUS_OK:
        raise DecodeError(f"unknown response status {status}", 0)
    count = r.u32()
    if count > 100_000:
        raise DecodeError(f"unreasonable entry count {count}", r.pos)
    entries = tuple(_decode_stored(r) for _ in range(count))
    next_cursor = None
    if r.u8():
        next_cursor = (r.i64(), r.raw(msg_mod.DIGEST_SIZE))
    r.expect_end()
    return HistoryResponse(messages=entries, next_cursor=next_cursor)


def save_snapshot(archive: Archive) -> bytes:
    """Length-prefixed stored messages, preceded by a magic header."""
    w = Writer()
    w.raw(SNAPSHOT_MAGIC)
    w.u32(len(archive))
    for entry in archive:
        inner = Writer()
        _encode_stored(inner, entry)
        w.bytes32(inner.getvalue())
    return w.getvalue()


def load_snapshot(data: bytes, capacity: int) -> Archive:
    r = Reader(data)
    if r.raw(len(SNAPSHOT_MAGIC)) != SNAPSHOT_MAGIC:
        raise DecodeError("bad snapshot magic", 0)
    count = r.u32()
    archive = Archive(capacity)
    for _ in range(count):
        record = Reader(r.bytes32())
        entry = _decode_stored(record)
        record.expect_end()
        archive.insert(entry.msg, entry.pubsub_topic, entry.receiver_time)
    r.expect_end()
    return archive
