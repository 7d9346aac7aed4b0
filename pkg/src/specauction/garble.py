"""Garbled circuit engine: free-XOR with point-and-permute.

Wire labels are 128-bit integers.  A single global offset delta with
LSB 1 links the two labels of every wire (label1 = label0 ^ delta), so
XOR gates need no ciphertexts: the output zero-label is the XOR of the
input zero-labels.  The LSB of a label is its permute (color) bit;
because LSB(delta) = 1 the two labels of a wire always carry opposite
colors.

AND gates ship four ciphertexts ordered by the color bits of the input
labels, each of the form

    ct[ca,cb] = PRF(A, B, gate) ^ (out0 ^ (va & vb) * delta)

where A, B are the labels colored (ca, cb), va, vb their plaintext
bits, and PRF is SHA-256 truncated to 128 bits.  No row reduction is
applied: a garbled AND is exactly 4 x 16 bytes on the wire.

The engine streams: all wire labels are assigned up front (a cheap
pass), so input encodings and output decoders exist before any gate is
garbled, and ciphertext production/consumption proceed gate by gate in
topological order.
"""

from __future__ import annotations

import hashlib
import secrets
import random
from dataclasses import dataclass

from .circuit import AND, CONST, INPUT, XOR, Bus, Circuit

KAPPA = 128
LABEL_BYTES = 16
CHECK_BYTES = 8
GATE_CT_BYTES = 4 * LABEL_BYTES


class GarbleError(Exception):
    pass


class DecodeError(GarbleError):
    """Label fails the decoder's authenticity check."""


def _prf(a: int, b: int, tweak: int) -> int:
    h = hashlib.sha256(
        a.to_bytes(LABEL_BYTES, "big")
        + b.to_bytes(LABEL_BYTES, "big")
        + tweak.to_bytes(8, "big")
    ).digest()
    return int.from_bytes(h[:LABEL_BYTES], "big")


def _check_hash(wire: int, label: int) -> bytes:
    h = hashlib.sha256(
        b"decode" + wire.to_bytes(4, "big") + label.to_bytes(LABEL_BYTES, "big")
    ).digest()
    return h[:CHECK_BYTES]


@dataclass(frozen=True)
class OutputDecoder:
    """Per revealed bus: one (color, hash0, hash1) triple per wire.

    Decoding compares the check hash of the received label against both
    stored hashes; a miss means the label is not one of the two valid
    labels for that wire and decoding fails loudly.  Wires outside the
    designated buses have no entry and can never be decoded.
    """

    entries: dict[str, tuple[tuple[int, bytes, bytes], ...]]
    wires: dict[str, tuple[int, ...]]

    def entry_count(self) -> int:
        return sum(len(v) for v in self.entries.values())


class Garbler:
    """Garbles one circuit; exposes encodings before gate production.

    `seed` makes the garbling deterministic (tests); without it labels
    come from the OS entropy pool.
    """

    def __init__(
        self, circuit: Circuit, reveal_buses: list[str], seed: int | None = None
    ):
        for name in reveal_buses:
            if name not in circuit.output_buses:
                raise GarbleError(f"unknown output bus {name!r}")
        self.circuit = circuit
        self.reveal_buses = list(reveal_buses)
        if seed is None:
            rand = secrets.randbits
        else:
            rand = random.Random(seed).getrandbits
        self.delta = rand(KAPPA) | 1
        kinds = circuit.kinds
        arg_a = circuit.arg_a
        arg_b = circuit.arg_b
        label0 = [0] * circuit.n_wires
        for w in range(circuit.n_wires):
            k = kinds[w]
            if k == XOR:
                label0[w] = label0[arg_a[w]] ^ label0[arg_b[w]]
            else:
                label0[w] = rand(KAPPA)
        self.label0 = label0
        self._cursor = 0

    # --------------------------------------------------------- encoders

    def input_pairs(self, name: str) -> list[tuple[int, int]]:
        bus = self.circuit.input_buses.get(name)
        if bus is None:
            raise GarbleError(f"unknown input bus {name!r}")
        return [(self.label0[w], self.label0[w] ^ self.delta) for w in bus.wires]

    def encode_inputs(self, values: dict[str, int]) -> dict[str, list[int]]:
        """Active labels for the garbler's own input values."""
        out: dict[str, list[int]] = {}
        for name, value in values.items():
            bus = self.circuit.input_buses.get(name)
            if bus is None:
                raise GarbleError(f"unknown input bus {name!r}")
            if value < 0 or value >> bus.width:
                raise GarbleError(f"value {value} does not fit bus {name!r}")
            labels = []
            for i, w in enumerate(bus.wires):
                bit = (value >> i) & 1
                labels.append(self.label0[w] ^ (self.delta if bit else 0))
            out[name] = labels
        return out

    def const_labels(self) -> list[tuple[int, int]]:
        """Active labels of CONST wires: (wire index, label)."""
        out = []
        c = self.circuit
        for w in range(c.n_wires):
            if c.kinds[w] == CONST:
                bit = c.arg_a[w]
                out.append((w, self.label0[w] ^ (self.delta if bit else 0)))
        return out

    def output_decoder(self) -> OutputDecoder:
        entries = {}
        wires = {}
        for name in self.reveal_buses:
            bus = self.circuit.output_buses[name]
            rows = []
            for w in bus.wires:
                l0 = self.label0[w]
                rows.append(
                    (l0 & 1, _check_hash(w, l0), _check_hash(w, l0 ^ self.delta))
                )
            entries[name] = tuple(rows)
            wires[name] = bus.wires
        return OutputDecoder(entries=entries, wires=wires)

    # ------------------------------------------------------- production

    def garble_chunk(self, max_gates: int) -> list[tuple[int, bytes]]:
        """Next up-to-max_gates garbled AND gates, in wire order.

        Returns (wire_index, 64-byte table) pairs; an empty list means
        production is complete.  XOR and CONST wires cost nothing and
        are skipped over.
        """
        c = self.circuit
        kinds = c.kinds
        arg_a = c.arg_a
        arg_b = c.arg_b
        label0 = self.label0
        delta = self.delta
        out = []
        w = self._cursor
        n = c.n_wires
        while w < n and len(out) < max_gates:
            if kinds[w] == AND:
                a0 = label0[arg_a[w]]
                b0 = label0[arg_b[w]]
                o0 = label0[w]
                ta = a0 & 1
                tb = b0 & 1
                ct = bytearray()
                for ca in (0, 1):
                    va = ca ^ ta
                    a_lab = a0 ^ (delta if va else 0)
                    for cb in (0, 1):
                        vb = cb ^ tb
                        b_lab = b0 ^ (delta if vb else 0)
                        o_lab = o0 ^ (delta if va & vb else 0)
                        row = _prf(a_lab, b_lab, w) ^ o_lab
                        ct += row.to_bytes(LABEL_BYTES, "big")
                out.append((w, bytes(ct)))
            w += 1
        self._cursor = w
        return out

    def garble_all(self) -> dict[int, bytes]:
        tables: dict[int, bytes] = {}
        while True:
            chunk = self.garble_chunk(4096)
            if not chunk:
                return tables
            tables.update(chunk)


def garble(
    circuit: Circuit, reveal_buses: list[str], seed: int | None = None
) -> tuple[dict[int, bytes], Garbler, OutputDecoder]:
    """One-shot garbling. Returns (tables, garbler-as-encoder, decoder)."""
    g = Garbler(circuit, reveal_buses, seed=seed)
    tables = g.garble_all()
    return tables, g, g.output_decoder()


class StreamingEvaluator:
    """Consumes garbled AND tables in order, evaluating as they arrive.

    Input labels (the evaluator's OT outputs, the garbler's encoded
    inputs, and the CONST wire labels) must all be set before the first
    `feed`.  Free gates are evaluated eagerly whenever their operands
    are ready, so evaluation finishes with the last fed table.
    """

    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        self.labels: list[int | None] = [None] * circuit.n_wires
        self._cursor = 0
        self._and_pending = sum(1 for k in circuit.kinds if k == AND)

    def set_input_labels(self, name: str, labels: list[int]) -> None:
        bus = self.circuit.input_buses.get(name)
        if bus is None:
            raise GarbleError(f"unknown input bus {name!r}")
        if len(labels) != bus.width:
            raise GarbleError(f"label count mismatch on bus {name!r}")
        for w, lab in zip(bus.wires, labels):
            self.labels[w] = lab

    def set_const_labels(self, pairs: list[tuple[int, int]]) -> None:
        for w, lab in pairs:
            if self.circuit.kinds[w] != CONST:
                raise GarbleError(f"wire {w} is not CONST")
            self.labels[w] = lab

    def _advance(self, upto: int) -> None:
        c = self.circuit
        kinds = c.kinds
        arg_a = c.arg_a
        arg_b = c.arg_b
        labels = self.labels
        w = self._cursor
        while w < upto:
            k = kinds[w]
            if k == XOR:
                la = labels[arg_a[w]]
                lb = labels[arg_b[w]]
                if la is None or lb is None:
                    raise GarbleError(f"wire {w}: operand label missing")
                labels[w] = la ^ lb
            elif k in (INPUT, CONST):
                if labels[w] is None:
                    raise GarbleError(f"wire {w}: no label supplied")
            w += 1
        self._cursor = w

    def feed(self, items: list[tuple[int, bytes]]) -> None:
        c = self.circuit
        labels = self.labels
        for w, table in items:
            if w >= c.n_wires or c.kinds[w] != AND:
                raise GarbleError(f"wire {w} is not an AND gate")
            if len(table) != GATE_CT_BYTES:
                raise GarbleError(f"gate {w}: malformed table size")
            if w < self._cursor:
                raise GarbleError(f"gate {w} fed twice or out of order")
            self._advance(w)
            la = labels[c.arg_a[w]]
            lb = labels[c.arg_b[w]]
            if la is None or lb is None:
                raise GarbleError(f"gate {w}: operand label missing")
            row = ((la & 1) << 1) | (lb & 1)
            ct = int.from_bytes(
                table[row * LABEL_BYTES : (row + 1) * LABEL_BYTES], "big"
            )
            labels[w] = _prf(la, lb, w) ^ ct
            self._cursor = w + 1
            self._and_pending -= 1

    @property
    def done(self) -> bool:
        return self._and_pending == 0

    def finish(self) -> list[int]:
        if self._and_pending:
            raise GarbleError(f"{self._and_pending} AND gates still unfed")
        self._advance(self.circuit.n_wires)
        return [lab if lab is not None else 0 for lab in self.labels]


def evaluate_garbled(
    circuit: Circuit,
    tables: dict[int, bytes],
    input_labels: dict[str, list[int]],
    const_labels: list[tuple[int, int]],
) -> list[int]:
    """Non-streaming wrapper used by tests."""
    ev = StreamingEvaluator(circuit)
    for name, labels in input_labels.items():
        ev.set_input_labels(name, labels)
    ev.set_const_labels(const_labels)
    items = sorted(tables.items())
    ev.feed(items)
    return ev.finish()


def decode(
    decoder: OutputDecoder,
    wire_labels: list[int],
    buses: list[str] | None = None,
) -> dict[str, int]:
    """Decode designated buses from evaluated labels.

    Raises DecodeError if a label matches neither check hash (tampered
    table or forged label) and KeyError-like GarbleError for buses the
    decoder does not cover.
    """
    names = decoder.entries.keys() if buses is None else buses
    out: dict[str, int] = {}
    for name in names:
        if name not in decoder.entries:
            raise GarbleError(f"bus {name!r} is not decodable")
        value = 0
        for pos, (wire, (color, h0, h1)) in enumerate(
            zip(decoder.wires[name], decoder.entries[name])
        ):
            label = wire_labels[wire]
            h = _check_hash(wire, label)
            if h == h0:
                bit = 0
            elif h == h1:
                bit = 1
            else:
                raise DecodeError(f"bus {name!r} wire {wire}: label fails check")
            if (label & 1) != (color ^ bit):
                raise DecodeError(f"bus {name!r} wire {wire}: color mismatch")
            value |= bit << pos
        out[name] = value
    return out


def gc_bytes(and_gates: int) -> int:
    """Transferred garbled-table bytes: 4 ciphertexts of 16 bytes per AND."""
    return and_gates * GATE_CT_BYTES
