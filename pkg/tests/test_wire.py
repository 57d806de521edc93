from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from waku.codec import DecodeError, EncodeError
from waku.wire import (
    Capabilities,
    Frame,
    FrameKind,
    FrameReader,
    Mode,
    PROTO_FILTER,
    PROTO_LIGHTPUSH,
    PROTO_RELAY,
    PROTO_STORE,
    REGISTERED_PROTOCOLS,
    decode_capabilities,
    decode_frame,
    encode_capabilities,
    encode_frame,
    usable_intersection,
)

FIXTURES = Path(__file__).parent / "fixtures"

frames = st.builds(
    Frame,
    protocol=st.sampled_from(sorted(REGISTERED_PROTOCOLS)),
    request_id=st.integers(min_value=0, max_value=2**64 - 1),
    kind=st.sampled_from(list(FrameKind)),
    body=st.binary(max_size=1024),
)


class TestFrameCodec:
    def test_golden_vector(self):
        frame = Frame(PROTO_RELAY, 7, FrameKind.REQUEST, b"hello")
        golden = bytes.fromhex((FIXTURES / "frame_request.hex").read_text().strip())
        assert encode_frame(frame) == golden
        assert decode_frame(golden) == frame

    @given(frames)
    def test_roundtrip(self, frame):
        assert decode_frame(encode_frame(frame)) == frame

    def test_unregistered_protocol_encode(self):
        with pytest.raises(EncodeError, match="unregistered"):
            encode_frame(Frame("/vac/waku/bogus/2.0.0", 0, FrameKind.PUSH, b""))

    def test_unregistered_protocol_decode(self):
        data = encode_frame(Frame(PROTO_RELAY, 0, FrameKind.PUSH, b""))
        # splice a bogus protocol string of identical length over the real one
        bogus = data.replace(b"/vac/waku/relay/2.0.0", b"/vac/waku/bogus/2.0.0")
        with pytest.raises(DecodeError, match="unregistered"):
            decode_frame(bogus)

    def test_oversize_body(self):
        with pytest.raises(EncodeError, match="too large"):
            encode_frame(Frame(PROTO_RELAY, 0, FrameKind.PUSH, b"x" * ((2 << 20) + 1)))

    def test_truncation(self):
        data = encode_frame(Frame(PROTO_RELAY, 1, FrameKind.PUSH, b"abc"))
        with pytest.raises(DecodeError):
            decode_frame(data[:-1])

    def test_trailing_garbage(self):
        data = encode_frame(Frame(PROTO_RELAY, 1, FrameKind.PUSH, b"abc"))
        with pytest.raises(DecodeError, match="length mismatch"):
            decode_frame(data + b"\x00")

    @given(st.binary(max_size=128))
    def test_decode_never_crashes(self, junk):
        try:
            decode_frame(junk)
        except DecodeError:
            pass


class TestFrameReader:
    def test_incremental_feed(self):
        f1 = Frame(PROTO_RELAY, 1, FrameKind.PUSH, b"one")
        f2 = Frame(PROTO_STORE, 2, FrameKind.REQUEST, b"two")
        stream = encode_frame(f1) + encode_frame(f2)
        reader = FrameReader()
        got = []
        for i in range(0, len(stream), 5):
            got.extend(reader.feed(stream[i : i + 5]))
        assert got == [f1, f2]

    def test_partial_header_yields_nothing(self):
        reader = FrameReader()
        assert reader.feed(b"\x00\x00") == []

    def test_bound_enforced(self):
        reader = FrameReader(max_body=64)
        with pytest.raises(DecodeError):
            reader.feed((1 << 24).to_bytes(4, "big"))


class TestCapabilities:
    def test_roundtrip(self):
        caps = Capabilities(
            "16Uiu2peer",
            {PROTO_RELAY: Mode.FULL, PROTO_STORE: Mode.LIGHT, PROTO_FILTER: Mode.FULL},
        )
        assert decode_capabilities(encode_capabilities(caps)) == caps

    def test_deterministic_ordering(self):
        a = Capabilities("p", {PROTO_STORE: Mode.FULL, PROTO_RELAY: Mode.FULL})
        b = Capabilities("p", {PROTO_RELAY: Mode.FULL, PROTO_STORE: Mode.FULL})
        assert encode_capabilities(a) == encode_capabilities(b)

    def test_relay_light_rejected(self):
        caps = Capabilities("p", {PROTO_RELAY: Mode.FULL})
        body = encode_capabilities(caps)
        # flip the relay mode byte (last byte of the single entry)
        with pytest.raises(DecodeError, match="full-only"):
            decode_capabilities(body[:-1] + bytes([int(Mode.LIGHT)]))

    def test_empty_advertisement_allowed(self):
        caps = Capabilities("lightest", {})
        assert decode_capabilities(encode_capabilities(caps)) == caps

    def test_intersection_relay_only_vs_store_full(self):
        relay_only = Capabilities("a", {PROTO_RELAY: Mode.FULL})
        store_full = Capabilities(
            "b", {PROTO_RELAY: Mode.FULL, PROTO_STORE: Mode.FULL}
        )
        assert usable_intersection(relay_only, store_full) == {PROTO_RELAY}

    def test_intersection_identical_sets(self):
        caps = {PROTO_RELAY: Mode.FULL, PROTO_LIGHTPUSH: Mode.FULL}
        a = Capabilities("a", dict(caps))
        b = Capabilities("b", dict(caps))
        assert usable_intersection(a, b) == set(caps)

    def test_intersection_with_empty(self):
        a = Capabilities("a", {PROTO_RELAY: Mode.FULL})
        b = Capabilities("b", {})
        assert usable_intersection(a, b) == set()
