"""Sealed submissions: additive secret shares under hybrid envelopes.

Every sensitive value x (a seller's ask, a buyer's bid or demand) is
split into two uniform shares x = x1 + x2 mod 2^B.  Share 1 is sealed
to the auctioneer's public key, share 2 to the agent's, so each server
can open exactly one share and neither learns anything about x alone.
Insensitive fields (ids, channel counts, locations) travel in clear.

Envelopes are ECIES-style: X25519 ephemeral key agreement, HKDF-SHA256
key derivation, AES-256-GCM payload encryption.  The wire form is
ephemeral-public-key(32) || nonce(12) || ciphertext+tag.  Payloads are
a fixed 8 bytes so every envelope has the same size regardless of the
value inside.  Any decryption or format failure surfaces as
EnvelopeError and the submission is rejected.
"""

from __future__ import annotations

import base64
import json
import os
import random
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from cryptography.hazmat.primitives import hashes

from .circuit import Bus, Circuit, add
from .scenario import Buyer, Scenario, Seller

PAYLOAD_BYTES = 8
ENVELOPE_BYTES = 32 + 12 + PAYLOAD_BYTES + 16
_HKDF_INFO = b"sealed-share-envelope"


class EnvelopeError(Exception):
    pass


# ------------------------------------------------------------- shares


def split_value(x: int, bit_length: int, rng: random.Random) -> tuple[int, int]:
    """Uniform additive split of x mod 2^bit_length."""
    mod = 1 << bit_length
    if not 0 <= x < mod:
        raise ValueError(f"value {x} out of range for {bit_length} bits")
    share1 = rng.randrange(mod)
    share2 = (x - share1) % mod
    return share1, share2


def combine_shares(share1: int, share2: int, bit_length: int) -> int:
    mod = 1 << bit_length
    if not (0 <= share1 < mod and 0 <= share2 < mod):
        raise ValueError("share out of range")
    return (share1 + share2) % mod


def reconstruct_bus(c: Circuit, share1: Bus, share2: Bus) -> Bus:
    """In-circuit reconstruction: a mod-2^W adder over the share buses."""
    return add(c, share1, share2)


# ------------------------------------------------------------ envelopes


def generate_keypair() -> tuple[X25519PrivateKey, bytes]:
    """Fresh keypair; the public half as raw 32 bytes."""
    sk = X25519PrivateKey.generate()
    return sk, sk.public_key().public_bytes_raw()


def seal(public_key: bytes, value: int) -> bytes:
    if len(public_key) != 32:
        raise EnvelopeError("public key must be 32 raw bytes")
    if not 0 <= value < 1 << (8 * PAYLOAD_BYTES):
        raise EnvelopeError("value out of payload range")
    peer = X25519PublicKey.from_public_bytes(public_key)
    eph = X25519PrivateKey.generate()
    secret = eph.exchange(peer)
    key = HKDF(
        algorithm=hashes.SHA256(), length=32, salt=None, info=_HKDF_INFO
    ).derive(secret)
    nonce = os.urandom(12)
    ct = AESGCM(key).encrypt(nonce, value.to_bytes(PAYLOAD_BYTES, "big"), None)
    return eph.public_key().public_bytes_raw() + nonce + ct


def open_envelope(secret_key: X25519PrivateKey, blob: bytes) -> int:
    if len(blob) != ENVELOPE_BYTES:
        raise EnvelopeError("envelope has wrong size")
    peer = X25519PublicKey.from_public_bytes(blob[:32])
    secret = secret_key.exchange(peer)
    key = HKDF(
        algorithm=hashes.SHA256(), length=32, salt=None, info=_HKDF_INFO
    ).derive(secret)
    try:
        pt = AESGCM(key).decrypt(blob[32:44], blob[44:], None)
    except InvalidTag as exc:
        raise EnvelopeError("envelope failed authentication") from exc
    return int.from_bytes(pt, "big")


# ----------------------------------------------------- sealed documents


@dataclass(frozen=True)
class SealedSeller:
    """Seller submission: id and channel count in clear, ask sealed."""

    id: int
    c: int
    s_share1: bytes  # to the auctioneer
    s_share2: bytes  # to the agent


@dataclass(frozen=True)
class SealedBuyer:
    """Buyer submission: id and location in clear, bid and demand sealed."""

    id: int
    x: float
    y: float
    b_share1: bytes
    b_share2: bytes
    d_share1: bytes
    d_share2: bytes


def seal_seller(
    seller: Seller, bit_length: int, pk1: bytes, pk2: bytes, rng: random.Random
) -> SealedSeller:
    sh1, sh2 = split_value(seller.s, bit_length, rng)
    return SealedSeller(
        id=seller.id, c=seller.c, s_share1=seal(pk1, sh1), s_share2=seal(pk2, sh2)
    )


def seal_buyer(
    buyer: Buyer,
    bit_length: int,
    d_max: int,
    pk1: bytes,
    pk2: bytes,
    rng: random.Random,
) -> SealedBuyer:
    d = min(max(buyer.d, 1), d_max)  # demands are capped at submission time
    b1, b2 = split_value(buyer.b, bit_length, rng)
    d1, d2 = split_value(d, bit_length, rng)
    return SealedBuyer(
        id=buyer.id,
        x=buyer.x,
        y=buyer.y,
        b_share1=seal(pk1, b1),
        b_share2=seal(pk2, b2),
        d_share1=seal(pk1, d1),
        d_share2=seal(pk2, d2),
    )


@dataclass
class SealedAuction:
    """Everything bidders hand to the auctioneer for one auction."""

    bit_length: int
    d_max: int
    sellers: list[SealedSeller]
    buyers: list[SealedBuyer]


def make_submissions(
    scenario: Scenario, pk1: bytes, pk2: bytes, rng: random.Random
) -> SealedAuction:
    """Bidder-side sealing of a whole scenario (test/bench harness)."""
    scenario.validate()
    return SealedAuction(
        bit_length=scenario.bit_length,
        d_max=scenario.d_max,
        sellers=[
            seal_seller(v, scenario.bit_length, pk1, pk2, rng)
            for v in scenario.sellers
        ],
        buyers=[
            seal_buyer(u, scenario.bit_length, scenario.d_max, pk1, pk2, rng)
            for u in scenario.buyers
        ],
    )


# ------------------------------------------------- agent-side transport


def _b64(raw: bytes) -> str:
    return base64.b64encode(raw).decode("ascii")


def _unb64(text: str) -> bytes:
    return base64.b64decode(text.encode("ascii"))


def agent_shares_json(sealed: SealedAuction) -> str:
    """The share-2 envelopes plus clear fields, as forwarded to the agent.

    The auctioneer cannot open these: they are sealed to the agent's key.
    Locations are omitted; the agent receives the grouping instead.
    """
    doc = {
        "bit_length": sealed.bit_length,
        "d_max": sealed.d_max,
        "sellers": [
            {"id": v.id, "c": v.c, "s": _b64(v.s_share2)} for v in sealed.sellers
        ],
        "buyers": [
            {"id": u.id, "b": _b64(u.b_share2), "d": _b64(u.d_share2)}
            for u in sealed.buyers
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


@dataclass
class AgentShares:
    bit_length: int
    d_max: int
    seller_s: dict[int, int]
    buyer_b: dict[int, int]
    buyer_d: dict[int, int]


def open_agent_shares(text: str, secret_key: X25519PrivateKey) -> AgentShares:
    """Agent-side opening of its half of every submission.

    Raises EnvelopeError on the first envelope that fails; the protocol
    turns that into an abort (a tampered submission cannot be attributed
    without the bidders online, so the whole run stops).
    """
    doc = json.loads(text)
    seller_s = {}
    for v in doc["sellers"]:
        seller_s[v["id"]] = open_envelope(secret_key, _unb64(v["s"]))
    buyer_b = {}
    buyer_d = {}
    for u in doc["buyers"]:
        buyer_b[u["id"]] = open_envelope(secret_key, _unb64(u["b"]))
        buyer_d[u["id"]] = open_envelope(secret_key, _unb64(u["d"]))
    return AgentShares(
        bit_length=doc["bit_length"],
        d_max=doc["d_max"],
        seller_s=seller_s,
        buyer_b=buyer_b,
        buyer_d=buyer_d,
    )


@dataclass
class AuctioneerShares:
    seller_s: dict[int, int]
    buyer_b: dict[int, int]
    buyer_d: dict[int, int]
    rejected: list[int]


def open_auctioneer_shares(
    sealed: SealedAuction, secret_key: X25519PrivateKey
) -> AuctioneerShares:
    """Auctioneer-side opening of share 1 of every submission.

    A submission whose envelope fails to open is dropped and its bidder
    id recorded; the caller excludes that bidder before the protocol
    starts.
    """
    seller_s: dict[int, int] = {}
    buyer_b: dict[int, int] = {}
    buyer_d: dict[int, int] = {}
    rejected: list[int] = []
    for v in sealed.sellers:
        try:
            seller_s[v.id] = open_envelope(secret_key, v.s_share1)
        except EnvelopeError:
            rejected.append(v.id)
    for u in sealed.buyers:
        try:
            b = open_envelope(secret_key, u.b_share1)
            d = open_envelope(secret_key, u.d_share1)
        except EnvelopeError:
            rejected.append(u.id)
            continue
        buyer_b[u.id] = b
        buyer_d[u.id] = d
    return AuctioneerShares(
        seller_s=seller_s, buyer_b=buyer_b, buyer_d=buyer_d, rejected=rejected
    )
