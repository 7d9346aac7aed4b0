"""Semi-honest 1-out-of-2 oblivious transfer over a Schnorr group.

Diffie-Hellman base OT in the spirit of Naor-Pinkas / Chou-Orlandi,
specialized to the semi-honest two-party setting this package targets:

    sender                           receiver (choice bit sigma)
    a <- Z_q, A = g^a
            -- A -->
                                     b <- Z_q
                                     B = g^b        if sigma = 0
                                     B = A * g^b    if sigma = 1
            <-- B --
    k0 = H(i, B^a)
    k1 = H(i, (B/A)^a)
    e0 = k0 ^ x0, e1 = k1 ^ x1
            -- (e0, e1) -->
                                     k_sigma = H(i, A^b)
                                     x_sigma = e_sigma ^ k_sigma

Whatever sigma is, B is a uniform group element and both directions
carry the same byte count, so the transcript's shape and distribution
are independent of the choice bits.

The group is the 1024-bit MODP group with 160-bit prime-order subgroup
from RFC 5114 (section 2.1).  Group elements travel as fixed 128-byte
big-endian strings.  Payloads are exactly 16 bytes (wire labels).
Exponentiations use gmpy2 when available and fall back to pow().
"""

from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass

try:
    from gmpy2 import mpz, powmod
except ImportError:  # pragma: no cover - gmpy2 is a normal dependency
    mpz = int

    def powmod(base, exp, mod):
        return pow(base, exp, mod)


# RFC 5114 section 2.1: 1024-bit prime p, 160-bit prime q | p - 1,
# g generates the order-q subgroup.
P_HEX = (
    "B10B8F96A080E01DDE92DE5EAE5D54EC52C99FBCFB06A3C69A6A9DCA52D23B61"
    "6073E28675A23D189838EF1E2EE652C013ECB4AEA906112324975C3CD49B83BF"
    "ACCBDD7D90C4BD7098488E9C219A73724EFFD6FAE5644738FAA31A4FF55BCCC0"
    "A151AF5F0DC8B4BD45BF37DF365C1A65E68CFDA76D4DA708DF1FB2BC2E4A4371"
)
G_HEX = (
    "A4D1CBD5C3FD34126765A442EFB99905F8104DD258AC507FD6406CFF14266D31"
    "266FEA1E5C41564B777E690F5504F213160217B4B01B886A5E91547F9E2749F4"
    "D7FBD7D3B9A92EE1909D0D2263F80A76A6A24C087A091F531DBF0A0169B6A28A"
    "D662A4D18E73AFA32D779D5918D08BC8858F4DCEF97C2A24855E6EEB22B3B2E5"
)
Q_HEX = "F518AA8781A8DF278ABA4E7D64B7CB9D49462353"

P = int(P_HEX, 16)
G = int(G_HEX, 16)
Q = int(Q_HEX, 16)

ELEM_BYTES = 128
MSG_BYTES = 16

_P = mpz(P)
_G = mpz(G)


class OtError(Exception):
    pass


def _encode(x: int) -> bytes:
    return int(x).to_bytes(ELEM_BYTES, "big")


def _decode(data: bytes, off: int) -> int:
    x = int.from_bytes(data[off : off + ELEM_BYTES], "big")
    if not 1 <= x < P:
        raise OtError("malformed group element")
    return x


def _kdf(index: int, shared: int) -> int:
    h = hashlib.sha256(
        index.to_bytes(4, "big") + _encode(shared)
    ).digest()
    return int.from_bytes(h[:MSG_BYTES], "big")


def _rand_exp(rng) -> int:
    return rng.randrange(1, Q)


class _Rng:
    """randrange provider over secrets (default) or a seeded PRNG."""

    def __init__(self, seed: int | None):
        if seed is None:
            self.randrange = lambda lo, hi: lo + secrets.randbelow(hi - lo)
        else:
            import random

            self.randrange = random.Random(seed).randrange


@dataclass
class OtSender:
    """Holds n (x0, x1) pairs of 16-byte messages."""

    pairs: list[tuple[bytes, bytes]]
    seed: int | None = None

    def __post_init__(self):
        if not self.pairs:
            raise OtError("empty OT batch")
        for x0, x1 in self.pairs:
            if len(x0) != MSG_BYTES or len(x1) != MSG_BYTES:
                raise OtError("OT payloads must be 16 bytes")
        rng = _Rng(self.seed)
        self._a = _rand_exp(rng)
        self._bigA = powmod(_G, self._a, _P)
        self._inv_bigA_a = powmod(self._bigA, Q - self._a, _P)  # A^{-a}

    def setup_msg(self) -> bytes:
        return _encode(self._bigA)

    def response_msg(self, choice_msg: bytes) -> bytes:
        n = len(self.pairs)
        if len(choice_msg) != n * ELEM_BYTES:
            raise OtError("choice message has wrong size")
        out = bytearray()
        for i, (x0, x1) in enumerate(self.pairs):
            bigB = mpz(_decode(choice_msg, i * ELEM_BYTES))
            s = powmod(bigB, self._a, _P)  # B^a
            k0 = _kdf(i, int(s))
            k1 = _kdf(i, int(s * self._inv_bigA_a % _P))  # (B/A)^a
            e0 = (int.from_bytes(x0, "big") ^ k0).to_bytes(MSG_BYTES, "big")
            e1 = (int.from_bytes(x1, "big") ^ k1).to_bytes(MSG_BYTES, "big")
            out += e0 + e1
        return bytes(out)


@dataclass
class OtReceiver:
    """Holds n choice bits; learns exactly one message per instance."""

    choices: list[int]
    seed: int | None = None

    def __post_init__(self):
        if not self.choices:
            raise OtError("empty OT batch")
        if any(c not in (0, 1) for c in self.choices):
            raise OtError("choice bits must be 0 or 1")
        self._exps: list[int] | None = None
        self._bigA: int | None = None

    def choice_msg(self, setup_msg: bytes) -> bytes:
        if len(setup_msg) != ELEM_BYTES:
            raise OtError("setup message has wrong size")
        bigA = mpz(_decode(setup_msg, 0))
        rng = _Rng(self.seed)
        self._bigA = bigA
        self._exps = []
        out = bytearray()
        for sigma in self.choices:
            b = _rand_exp(rng)
            self._exps.append(b)
            bigB = powmod(_G, b, _P)
            if sigma:
                bigB = bigB * bigA % _P
            out += _encode(int(bigB))
        return bytes(out)

    def finish(self, response_msg: bytes) -> list[bytes]:
        if self._exps is None or self._bigA is None:
            raise OtError("choice_msg must be sent first")
        n = len(self.choices)
        if len(response_msg) != n * 2 * MSG_BYTES:
            raise OtError("response message has wrong size")
        out = []
        for i, (sigma, b) in enumerate(zip(self.choices, self._exps)):
            k = _kdf(i, int(powmod(self._bigA, b, _P)))
            off = i * 2 * MSG_BYTES + sigma * MSG_BYTES
            e = response_msg[off : off + MSG_BYTES]
            out.append((int.from_bytes(e, "big") ^ k).to_bytes(MSG_BYTES, "big"))
        return out


def ot_exchange(
    pairs: list[tuple[bytes, bytes]],
    choices: list[int],
    sender_seed: int | None = None,
    receiver_seed: int | None = None,
) -> list[bytes]:
    """In-memory run of the three message flows; returns receiver output."""
    if len(pairs) != len(choices):
        raise OtError("pair/choice count mismatch")
    snd = OtSender(pairs, seed=sender_seed)
    rcv = OtReceiver(choices, seed=receiver_seed)
    setup = snd.setup_msg()
    choice = rcv.choice_msg(setup)
    resp = snd.response_msg(choice)
    return rcv.finish(resp)
