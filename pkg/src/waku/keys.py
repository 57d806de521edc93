"""Node identity keypairs and peer-id derivation.

Identities are Ed25519 keypairs. Ed25519 signatures are deterministic
(same key and payload always produce the same signature), which keeps
signed artifacts byte-stable; the same scheme authenticates discovery
peer lists. The peer id is the base58 encoding of the SHA-256 of the raw
public key, an opaque token used as the /p2p/ component of multiaddrs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.exceptions import InvalidSignature

B58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_B58_INDEX = {c: i for i, c in enumerate(B58_ALPHABET)}


def b58encode(data: bytes) -> str:
    num = int.from_bytes(data, "big")
    out = []
    while num > 0:
        num, rem = divmod(num, 58)
        out.append(B58_ALPHABET[rem])
    # leading zero bytes map to the alphabet's zero symbol
    pad = 0
    for byte in data:
        if byte == 0:
            pad += 1
        else:
            break
    return B58_ALPHABET[0] * pad + "".join(reversed(out))


def is_b58_token(token: str) -> bool:
    return bool(token) and all(c in _B58_INDEX for c in token)


def peer_id_from_public_key(public_key: Ed25519PublicKey) -> str:
    raw = public_key.public_bytes_raw()
    return b58encode(hashlib.sha256(raw).digest())


@dataclass(frozen=True)
class NodeIdentity:
    """An Ed25519 keypair plus the peer id derived from it."""

    private_key: Ed25519PrivateKey
    peer_id: str

    @classmethod
    def generate(cls) -> "NodeIdentity":
        key = Ed25519PrivateKey.generate()
        return cls(key, peer_id_from_public_key(key.public_key()))

    @classmethod
    def from_seed(cls, seed: bytes) -> "NodeIdentity":
        """Deterministic identity from a 32-byte seed (simulation injection)."""
        if len(seed) != 32:
            raise ValueError("identity seed must be exactly 32 bytes")
        key = Ed25519PrivateKey.from_private_bytes(seed)
        return cls(key, peer_id_from_public_key(key.public_key()))

    @classmethod
    def load_or_create(cls, path: Path) -> "NodeIdentity":
        """Load the keypair persisted at ``path``, creating it on first start."""
        if path.exists():
            seed = bytes.fromhex(path.read_text().strip())
            return cls.from_seed(seed)
        key = Ed25519PrivateKey.generate()
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(key.private_bytes_raw().hex() + "\n")
        return cls(key, peer_id_from_public_key(key.public_key()))

    def sign(self, payload: bytes) -> bytes:
        return self.private_key.sign(payload)

    def public_key_hex(self) -> str:
        return self.private_key.public_key().public_bytes_raw().hex()


def verify_signature(public_key_hex: str, payload: bytes, signature: bytes) -> bool:
    try:
        key = Ed25519PublicKey.from_public_bytes(bytes.fromhex(public_key_hex))
    except ValueError:
        return False
    try:
        key.verify(signature, payload)
        return True
    except InvalidSignature:
        return False
