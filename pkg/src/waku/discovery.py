"""Peer bootstrap: static multiaddrs and authenticated signed peer lists.

Two sources feed a node's dial list: static peer multiaddrs from
configuration, and an updateable peer-list document signed by a trusted
publisher. The document is fetched from a file path or an HTTP URL; its
authentication and replay protection (strictly increasing sequence
numbers) are what matter, not the transport. Discovery failures never
prevent node startup: static peers are always used.
"""

from __future__ import annotations

import ipaddress
import logging
import urllib.request
from dataclasses import dataclass
from pathlib import Path

from .keys import NodeIdentity, is_b58_token, verify_signature

logger = logging.getLogger(__name__)

DOCUMENT_HEADER = "waku-peers/1"

FETCH_TIMEOUT_S = 5.0


class MultiaddrError(ValueError):
    """A multiaddr string does not match the supported grammar."""


class PeerListError(ValueError):
    """A signed peer-list document was rejected (malformed, unauthenticated
    or stale)."""


@dataclass(frozen=True, slots=True)
class Multiaddr:
    """Textual network address of the form /ip4/<a.b.c.d>/tcp/<port>/p2p/<peerid>."""

    ip: str
    port: int
    peer: str

    def __str__(self) -> str:
        return format_multiaddr(self)


def parse_multiaddr(text: str) -> Multiaddr:
    """Parse the supported multiaddr grammar; format(parse(s)) == s.

    Only /ip4/<dotted-quad>/tcp/<port>/p2p/<peerid> is accepted. Errors
    name the offending segment.
    """
    parts = text.split("/")
    # leading slash yields an empty first element
    if len(parts) != 7 or parts[0] != "":
        raise MultiaddrError(
            f"multiaddr must have form /ip4/<ip>/tcp/<port>/p2p/<peerid>: {text!r}"
        )
    _, scheme, ip_text, transport, port_text, p2p, peer = parts
    if scheme != "ip4":
        raise MultiaddrError(f"unsupported address scheme {scheme!r} (only ip4)")
    try:
        ip = ipaddress.IPv4Address(ip_text)
    except ValueError:
        raise MultiaddrError(f"invalid IPv4 address {ip_text!r}") from None
    if str(ip) != ip_text:
        raise MultiaddrError(f"non-canonical IPv4 address {ip_text!r}")
    if transport != "tcp":
        raise MultiaddrError(f"unsupported transport {transport!r} (only tcp)")
    try:
        port = int(port_text, 10)
    except ValueError:
        raise MultiaddrError(f"invalid port {port_text!r}") from None
    if not 1 <= port <= 65535 or port_text != str(port):
        raise MultiaddrError(f"port out of range: {port_text!r}")
    if p2p != "p2p":
        raise MultiaddrError(f"missing /p2p/ segment, got {p2p!r}")
    if not is_b58_token(peer):
        raise MultiaddrError(f"invalid peer id {peer!r} (base58 token expected)")
    return Multiaddr(ip=str(ip), port=port, peer=peer)


def format_multiaddr(addr: Multiaddr) -> str:
    return f"/ip4/{addr.ip}/tcp/{addr.port}/p2p/{addr.peer}"


@dataclass(frozen=True)
class SignedPeerList:
    """An authenticated, updateable list of bootstrap peers."""

    seq: int
    peers: tuple[Multiaddr, ...]
    signer: str  # hex-encoded Ed25519 public key
    signature: bytes


def _is_canonical_hex(text: str, size: int) -> bool:
    return len(text) == 2 * size and all(c in "0123456789abcdef" for c in text)


def _canonical_payload(seq: int, peers: tuple[Multiaddr, ...]) -> bytes:
    lines = [DOCUMENT_HEADER, f"seq: {seq}"]
    lines.extend(f"peer: {format_multiaddr(p)}" for p in peers)
    return ("\n".join(lines) + "\n").encode("utf-8")


class PeerListPublisher:
    """Builds signed peer-list documents with strictly increasing sequence
    numbers. One publisher instance stands for one signing identity."""

    def __init__(self, identity: NodeIdentity, last_seq: int = -1):
        self.identity = identity
        self.last_seq = last_seq

    def build(self, peers: list[Multiaddr], seq: int) -> str:
        """Serialize and sign a peer-list document.

        The peers are de-duplicated by peer id, order preserved. An empty
        list is a valid tombstone update.
        """
        if seq <= self.last_seq:
            raise PeerListError(
                f"seq must increase: {seq} <= last published {self.last_seq}"
            )
        if not 0 <= seq < 2**64:
            raise PeerListError("seq out of unsigned 64-bit range")
        unique: dict[str, Multiaddr] = {}
        for p in peers:
            unique.setdefault(p.peer, p)
        deduped = tuple(unique.values())
        payload = _canonical_payload(seq, deduped)
        signature = self.identity.sign(payload)
        self.last_seq = seq
        doc = payload.decode("utf-8")
        doc += f"signer: {self.identity.public_key_hex()}\n"
        doc += f"signature: {signature.hex()}\n"
        return doc


def parse_peer_list(document: str) -> SignedPeerList:
    """Strict parse of the single-file text format (see docs/wire.md)."""
    lines = document.split("\n")
    if lines and lines[-1] == "":
        lines = lines[:-1]
    if len(lines) < 4 or lines[0] != DOCUMENT_HEADER:
        raise PeerListError(f"bad document header (expected {DOCUMENT_HEADER!r})")
    if not lines[1].startswith("seq: "):
        raise PeerListError("missing seq line")
    seq_text = lines[1][len("seq: "):]
    if not seq_text.isdigit():
        raise PeerListError(f"invalid seq {seq_text!r}")
    seq = int(seq_text)
    if seq >= 2**64:
        raise PeerListError("seq out of unsigned 64-bit range")
    peers: list[Multiaddr] = []
    idx = 2
    while idx < len(lines) and lines[idx].startswith("peer: "):
        try:
            peers.append(parse_multiaddr(lines[idx][len("peer: "):]))
        except MultiaddrError as exc:
            raise PeerListError(f"invalid peer entry: {exc}") from None
        idx += 1
    if len({p.peer for p in peers}) != len(peers):
        raise PeerListError("redundant peer entries")
    if idx + 2 != len(lines):
        raise PeerListError("expected exactly signer and signature lines at end")
    if not lines[idx].startswith("signer: "):
        raise PeerListError("missing signer line")
    signer = lines[idx][len("signer: "):]
    if not _is_canonical_hex(signer, 32):
        raise PeerListError("signer is not a 32-byte lowercase hex key")
    if not lines[idx + 1].startswith("signature: "):
        raise PeerListError("missing signature line")
    sig_hex = lines[idx + 1][len("signature: "):]
    if not _is_canonical_hex(sig_hex, 64):
        raise PeerListError("signature is not 64 bytes of lowercase hex")
    signature = bytes.fromhex(sig_hex)
    return SignedPeerList(seq=seq, peers=tuple(peers), signer=signer, signature=signature)


def verify_peer_list(
    document: str, trusted_key_hex: str, last_seen_seq: int = -1
) -> list[Multiaddr]:
    """Authenticate a peer-list document and enforce seq monotonicity.

    Returns the peers iff the signature verifies under the trusted key and
    doc.seq > last_seen_seq. The caller persists the new seq.
    """
    doc = parse_peer_list(document)
    if doc.signer != trusted_key_hex:
        raise PeerListError("unauthenticated: signer does not match trusted key")
    payload = _canonical_payload(doc.seq, doc.peers)
    if not verify_signature(trusted_key_hex, payload, doc.signature):
        raise PeerListError("unauthenticated: bad signature")
    if doc.seq <= last_seen_seq:
        raise PeerListError(
            f"stale list: seq {doc.seq} not greater than last seen {last_seen_seq}"
        )
    return list(doc.peers)


def fetch_document(source: str) -> str:
    """Fetch a peer-list document from a file path or http(s) URL."""
    if source.startswith(("http://", "https://")):
        with urllib.request.urlopen(source, timeout=FETCH_TIMEOUT_S) as resp:
            return resp.read().decode("utf-8")
    return Path(source).read_text(encoding="utf-8")


@dataclass
class BootstrapResult:
    dial_list: list[Multiaddr]
    new_seq: int  # unchanged when no list was accepted


def bootstrap(
    static_nodes: list[Multiaddr],
    peer_list_url: str | None = None,
    peer_list_key: str | None = None,
    last_seen_seq: int = -1,
    fetch=fetch_document,
) -> BootstrapResult:
    """Assemble the ordered dial list: static nodes first, then verified
    peer-list entries, de-duplicated by peer id.

    Any failure fetching or verifying the list is logged and ignored;
    startup proceeds with the static nodes.
    """
    dial: list[Multiaddr] = []
    seen: set[str] = set()
    for addr in static_nodes:
        if addr.peer not in seen:
            seen.add(addr.peer)
            dial.append(addr)
    new_seq = last_seen_seq
    if peer_list_url and peer_list_key:
        try:
            document = fetch(peer_list_url)
            peers = verify_peer_list(document, peer_list_key, last_seen_seq)
        except (OSError, PeerListError) as exc:
            logger.warning("peer list from %s rejected: %s", peer_list_url, exc)
        else:
            new_seq = parse_peer_list(document).seq
            for addr in peers:
                if addr.peer not in seen:
                    seen.add(addr.peer)
                    dial.append(addr)
    elif peer_list_url or peer_list_key:
        logger.warning(
            "peer list source ignored: both --peer-list-url and --peer-list-key "
            "are required"
        )
    return BootstrapResult(dial_list=dial, new_seq=new_seq)
