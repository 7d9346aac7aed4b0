"""Two-party execution of the garbled auction over a byte stream.

Roles.  The auctioneer holds share 1 of every sealed value, knows the
buyer locations, and evaluates the garbled circuit.  The agent holds
share 2, garbles, and serves the oblivious transfers.  Neither ever
sees a clear bid, ask or demand; the only values that leave the
garbled domain are the ones in the reveal plan.

Framing.  Every message is one frame: tag byte, big-endian u32 payload
length, payload.  The conversation is a fixed ping-pong schedule, so a
tag mismatch means the peer aborted or the stream is corrupt and the
session raises immediately.  All frame payloads have sizes determined
by the public parameters alone: value-dependent material (the stage-2
release) travels in fixed-capacity slots with presence flags, so two
runs with the same public shape produce byte-identical traffic counts.

Schedule:

    A -> B   HANDSHAKE   version, mode, share width, params digest
    A -> B   GROUPING    canonical public-parameter JSON
    A -> B   ENC_SHARES  the agent's envelopes (share 2), unopenable by A
    B -> A   HANDSHAKE   byte-identical echo after the agent's checks
    B -> A   OT_MSG      transfer setup
    A -> B   OT_MSG      blinded choices, one group element per input bit
    B -> A   OT_MSG      encrypted label pairs
    B -> A   INPUT_LABELS  the agent's own active labels plus constants
    B -> A   DECODER     stage-1 decoding table
    B -> A   GARBLED_GATES  AND tables in order, chunked; A evaluates as
                            they arrive
    A -> B   RESULT      stage-1 values (W, seller count, phi, id arrays)
    B -> A   DECODER     stage-2 table, fixed capacity, presence-flagged
    A -> B   RESULT      the final outcome in fixed-width binary

Aborts.  A failed envelope on the agent side, a digest mismatch, or a
pin violation closes the connection; the peer then sees EOF and raises
ProtocolError.  Nothing decodable has left the garbler before the
handshake echo, so an aborted session reveals nothing.
"""

from __future__ import annotations

import random
import socket
import struct
import threading
import time
from dataclasses import dataclass, field

from .auction import (
    AuctionOutcome,
    BuyerAward,
    Group,
    SellerAward,
    build_conflict_graph,
    form_groups,
)
from .garble import LABEL_BYTES, Garbler, OutputDecoder, StreamingEvaluator, decode
from .oblivious import (
    MODES,
    PublicParams,
    Stage1Values,
    assemble_full_circuit,
    outcome_from_reveals,
)
from .ot import OtReceiver, OtSender
from .scenario import Scenario
from .submission import (
    SealedAuction,
    SealedBuyer,
    agent_shares_json,
    generate_keypair,
    make_submissions,
    open_agent_shares,
    open_auctioneer_shares,
)

VERSION = 1

HANDSHAKE = 1
ENC_SHARES = 2
GROUPING = 3
GARBLED_GATES = 4
OT_MSG = 5
INPUT_LABELS = 6
DECODER = 7
RESULT = 8

TAG_NAMES = {
    HANDSHAKE: "handshake",
    ENC_SHARES: "enc_shares",
    GROUPING: "grouping",
    GARBLED_GATES: "garbled_gates",
    OT_MSG: "ot_msg",
    INPUT_LABELS: "input_labels",
    DECODER: "decoder",
    RESULT: "result",
}

DEFAULT_CHUNK_GATES = 4096
_DECODER_ENTRY_BYTES = 17  # color byte + two 8-byte check hashes


class ProtocolError(Exception):
    """The conversation broke: bad frame, bad size, peer gone."""


class HandshakeError(ProtocolError):
    """The parties disagree on what they are about to compute."""


class FrameStream:
    """Tagged length-prefixed frames over a connected socket.

    Tracks payload bytes and frame counts per tag in each direction so
    a session can report its exact traffic breakdown.
    """

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.sent_bytes: dict[str, int] = {}
        self.recv_bytes: dict[str, int] = {}
        self.sent_frames: dict[str, int] = {}
        self.recv_frames: dict[str, int] = {}

    def send(self, tag: int, payload: bytes) -> None:
        name = TAG_NAMES[tag]
        try:
            self.sock.sendall(struct.pack(">BI", tag, len(payload)) + payload)
        except OSError as exc:
            raise ProtocolError(f"send failed: {exc}") from exc
        self.sent_bytes[name] = self.sent_bytes.get(name, 0) + len(payload)
        self.sent_frames[name] = self.sent_frames.get(name, 0) + 1

    def _recv_exact(self, n: int) -> bytes:
        chunks = []
        got = 0
        while got < n:
            try:
                part = self.sock.recv(min(n - got, 1 << 20))
            except OSError as exc:
                raise ProtocolError(f"recv failed: {exc}") from exc
            if not part:
                raise ProtocolError("peer closed the connection")
            chunks.append(part)
            got += len(part)
        return b"".join(chunks)

    def recv(self, expect_tag: int) -> bytes:
        head = self._recv_exact(5)
        tag, size = struct.unpack(">BI", head)
        if tag != expect_tag:
            raise ProtocolError(
                f"expected {TAG_NAMES.get(expect_tag, expect_tag)} frame, "
                f"got tag {tag}"
            )
        payload = self._recv_exact(size)
        name = TAG_NAMES[tag]
        self.recv_bytes[name] = self.recv_bytes.get(name, 0) + size
        self.recv_frames[name] = self.recv_frames.get(name, 0) + 1
        return payload

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


@dataclass
class RunMetrics:
    role: str
    mode: str
    and_gates: int = 0
    gc_bytes: int = 0
    ot_count: int = 0
    wall_ms: float = 0.0
    phase_ms: dict[str, float] = field(default_factory=dict)
    sent_bytes: dict[str, int] = field(default_factory=dict)
    recv_bytes: dict[str, int] = field(default_factory=dict)
    sent_frames: dict[str, int] = field(default_factory=dict)
    recv_frames: dict[str, int] = field(default_factory=dict)
    rejected: list[int] = field(default_factory=list)

    @property
    def total_bytes(self) -> int:
        return sum(self.sent_bytes.values()) + sum(self.recv_bytes.values())


class _Phases:
    def __init__(self):
        self.ms: dict[str, float] = {}
        self._t = time.perf_counter()
        self._t0 = self._t

    def lap(self, name: str) -> None:
        now = time.perf_counter()
        self.ms[name] = self.ms.get(name, 0.0) + (now - self._t) * 1000.0
        self._t = now

    @property
    def total_ms(self) -> float:
        return (time.perf_counter() - self._t0) * 1000.0


# ------------------------------------------------------------ handshake


def _handshake_blob(params: PublicParams) -> bytes:
    digest = bytes.fromhex(params.digest())
    return struct.pack(
        ">BBB", VERSION, MODES.index(params.mode), params.bit_length
    ) + digest


def _share_bits(value: int, width: int) -> list[int]:
    return [(value >> i) & 1 for i in range(width)]


def _canonical_values(shares, layout) -> dict[str, int]:
    """Map bus names to this party's share values (suffix 1 or 2)."""
    vals = {}
    for name in layout:
        _, kind, ident = name.split(".")
        ident = int(ident)
        if kind.startswith("s"):
            vals[name] = shares.seller_s[ident]
        elif kind.startswith("b"):
            vals[name] = shares.buyer_b[ident]
        else:
            vals[name] = shares.buyer_d[ident]
    return vals


# ------------------------------------------------- decoder serialization


def _pack_decoder(decoder: OutputDecoder, buses: list[str]) -> bytes:
    out = bytearray()
    for name in buses:
        for color, h0, h1 in decoder.entries[name]:
            out += struct.pack(">B", color) + h0 + h1
    return bytes(out)


def _unpack_decoder(
    plan_buses: list[str],
    wires_of: dict[str, tuple[int, ...]],
    blob: bytes,
) -> OutputDecoder:
    entries = {}
    off = 0
    for name in plan_buses:
        rows = []
        for _ in wires_of[name]:
            if off + _DECODER_ENTRY_BYTES > len(blob):
                raise ProtocolError("decoder frame truncated")
            color = blob[off]
            if color not in (0, 1):
                raise ProtocolError("decoder color byte out of range")
            rows.append((color, blob[off + 1 : off + 9], blob[off + 9 : off + 17]))
            off += _DECODER_ENTRY_BYTES
        entries[name] = tuple(rows)
    if off != len(blob):
        raise ProtocolError("decoder frame has trailing bytes")
    return OutputDecoder(
        entries=entries, wires={n: wires_of[n] for n in plan_buses}
    )


# -------------------------------------------------------- result frames


def _pack_stage1_result(params: PublicParams, st: Stage1Values, gids: list[int]) -> bytes:
    out = bytearray(struct.pack(">BIII", 1, st.w, st.num_sellers, st.phi))
    ids = st.winning_seller_ids + [0] * (params.num_sellers - st.num_sellers)
    for sid in ids:
        out += struct.pack(">I", sid)
    for gid in gids:
        out += struct.pack(">I", gid)
    return bytes(out)


def _unpack_stage1_result(params: PublicParams, blob: bytes) -> Stage1Values:
    want = 13 + 4 * params.num_sellers + 4 * params.num_vbgs
    if len(blob) != want:
        raise ProtocolError("stage-1 result frame has wrong size")
    stage, w_val, n_sellers, phi = struct.unpack(">BIII", blob[:13])
    if stage != 1:
        raise ProtocolError("expected stage-1 result")
    if n_sellers > params.num_sellers or w_val > params.num_vbgs:
        raise ProtocolError("stage-1 result out of range")
    off = 13
    ids = []
    for r in range(params.num_sellers):
        (sid,) = struct.unpack(">I", blob[off : off + 4])
        if r < n_sellers:
            ids.append(sid)
        off += 4
    counts: dict[int, int] = {}
    for r in range(params.num_vbgs):
        (gid,) = struct.unpack(">I", blob[off : off + 4])
        if r < w_val:
            counts[gid] = counts.get(gid, 0) + 1
        off += 4
    return Stage1Values(
        w=w_val,
        num_sellers=n_sellers,
        phi=phi,
        winning_seller_ids=ids,
        winning_counts=counts,
    )


def _pack_final_result(params: PublicParams, outcome: AuctionOutcome) -> bytes:
    sellers = {a.id: a for a in outcome.sellers}
    buyers = {a.id: a for a in outcome.buyers}
    out = bytearray(struct.pack(">BII", 2, outcome.phi, outcome.w))
    for sid, _ in params.sellers:
        award = sellers.get(sid)
        out += struct.pack(">BQ", 1 if award else 0, award.payment if award else 0)
    for mid in sorted(m for _, ms in params.groups for m in ms):
        award = buyers.get(mid)
        out += struct.pack(
            ">BIQ",
            1 if award else 0,
            award.channels if award else 0,
            award.price if award else 0,
        )
    return bytes(out)


def _unpack_final_result(params: PublicParams, blob: bytes) -> AuctionOutcome:
    members = sorted(m for _, ms in params.groups for m in ms)
    want = 9 + 9 * params.num_sellers + 13 * len(members)
    if len(blob) != want:
        raise ProtocolError("final result frame has wrong size")
    stage, phi, w_val = struct.unpack(">BII", blob[:9])
    if stage != 2:
        raise ProtocolError("expected final result")
    outcome = AuctionOutcome(phi=phi, w=w_val)
    off = 9
    for sid, cnt in params.sellers:
        won, payment = struct.unpack(">BQ", blob[off : off + 9])
        off += 9
        if won:
            outcome.sellers.append(
                SellerAward(id=sid, channels_sold=cnt, payment=payment)
            )
    for mid in members:
        won, channels, price = struct.unpack(">BIQ", blob[off : off + 13])
        off += 13
        if won:
            outcome.buyers.append(BuyerAward(id=mid, channels=channels, price=price))
    return outcome


# --------------------------------------------------------------- parties


def _grouping_from_submissions(
    buyers: list[SealedBuyer], radius_m: float
) -> list[Group]:
    adj = build_conflict_graph(buyers, radius_m)
    return form_groups(adj)


def run_auctioneer(
    stream: FrameStream,
    sealed: SealedAuction,
    secret_key,
    *,
    radius_m: float,
    mode: str,
    ot_seed: int | None = None,
) -> tuple[AuctionOutcome, RunMetrics]:
    """Drive the auctioneer (evaluator) side of one session."""
    phases = _Phases()
    shares = open_auctioneer_shares(sealed, secret_key)
    keep_s = [v for v in sealed.sellers if v.id in shares.seller_s]
    keep_b = [u for u in sealed.buyers if u.id in shares.buyer_b]
    if not keep_s or not keep_b:
        raise ProtocolError("no valid submissions to run an auction on")
    groups = _grouping_from_submissions(keep_b, radius_m)
    params = PublicParams(
        bit_length=sealed.bit_length,
        d_max=sealed.d_max,
        mode=mode,
        sellers=tuple((v.id, v.c) for v in keep_s),
        groups=tuple((g.group_id, g.members) for g in groups),
    )
    forward = SealedAuction(
        bit_length=sealed.bit_length,
        d_max=sealed.d_max,
        sellers=keep_s,
        buyers=keep_b,
    )
    phases.lap("open")

    hello = _handshake_blob(params)
    stream.send(HANDSHAKE, hello)
    stream.send(GROUPING, params.canonical_json().encode())
    stream.send(ENC_SHARES, agent_shares_json(forward).encode())
    echo = stream.recv(HANDSHAKE)
    if echo != hello:
        raise HandshakeError("handshake echo mismatch")
    phases.lap("handshake")

    asm = assemble_full_circuit(params)
    circuit = asm.circuit
    phases.lap("build")

    my_values = _canonical_values(shares, asm.auctioneer_buses)
    choices = []
    for name in asm.auctioneer_buses:
        choices.extend(_share_bits(my_values[name], params.bit_length))
    receiver = OtReceiver(choices, seed=ot_seed)
    setup = stream.recv(OT_MSG)
    stream.send(OT_MSG, receiver.choice_msg(setup))
    response = stream.recv(OT_MSG)
    my_labels_flat = receiver.finish(response)
    phases.lap("ot")

    evaluator = StreamingEvaluator(circuit)
    pos = 0
    for name in asm.auctioneer_buses:
        width = circuit.input_buses[name].width
        labels = [
            int.from_bytes(my_labels_flat[pos + i], "big") for i in range(width)
        ]
        evaluator.set_input_labels(name, labels)
        pos += width

    blob = stream.recv(INPUT_LABELS)
    off = 0
    for name in asm.agent_buses:
        width = circuit.input_buses[name].width
        need = width * LABEL_BYTES
        if off + need > len(blob):
            raise ProtocolError("input label frame truncated")
        labels = [
            int.from_bytes(blob[off + i * 16 : off + (i + 1) * 16], "big")
            for i in range(width)
        ]
        evaluator.set_input_labels(name, labels)
        off += need
    if off + 4 > len(blob):
        raise ProtocolError("input label frame missing constants")
    (n_const,) = struct.unpack(">I", blob[off : off + 4])
    off += 4
    const_pairs = []
    for _ in range(n_const):
        if off + 20 > len(blob):
            raise ProtocolError("input label frame truncated in constants")
        (wire,) = struct.unpack(">I", blob[off : off + 4])
        label = int.from_bytes(blob[off + 4 : off + 20], "big")
        const_pairs.append((wire, label))
        off += 20
    if off != len(blob):
        raise ProtocolError("input label frame has trailing bytes")
    evaluator.set_const_labels(const_pairs)
    phases.lap("labels")

    dec1_blob = stream.recv(DECODER)
    if not dec1_blob or dec1_blob[0] != 1:
        raise ProtocolError("expected stage-1 decoder")
    wires_of = {n: circuit.output_buses[n].wires for n in asm.plan.bus_names()}
    stage1_buses = asm.plan.stage1_buses()
    decoder1 = _unpack_decoder(stage1_buses, wires_of, dec1_blob[1:])
    phases.lap("decoder1")

    fed = 0
    while fed < circuit.and_count:
        chunk = stream.recv(GARBLED_GATES)
        if len(chunk) < 4:
            raise ProtocolError("garbled gate frame truncated")
        (count,) = struct.unpack(">I", chunk[:4])
        if len(chunk) != 4 + count * 68:
            raise ProtocolError("garbled gate frame has wrong size")
        items = []
        off = 4
        for _ in range(count):
            (wire,) = struct.unpack(">I", chunk[off : off + 4])
            items.append((wire, chunk[off + 4 : off + 68]))
            off += 68
        evaluator.feed(items)
        fed += count
    if not evaluator.done:
        raise ProtocolError("garbled gate stream ended early")
    wire_labels = evaluator.finish()
    phases.lap("evaluate")

    decoded1 = decode(decoder1, wire_labels)
    gids = [decoded1[f"out.sorted_vbg_gid.{r}"] for r in range(1, params.num_vbgs + 1)]
    st1 = Stage1Values(
        w=decoded1["out.w"],
        num_sellers=decoded1["out.nsellers"],
        phi=decoded1["out.phi"],
        winning_seller_ids=[
            decoded1[f"out.sorted_seller_id.{r}"]
            for r in range(1, decoded1["out.nsellers"] + 1)
        ],
        winning_counts={},
    )
    for gid in gids[: st1.w]:
        st1.winning_counts[gid] = st1.winning_counts.get(gid, 0) + 1
    stream.send(RESULT, _pack_stage1_result(params, st1, gids))
    phases.lap("stage1")

    dec2_blob = stream.recv(DECODER)
    if not dec2_blob or dec2_blob[0] != 2:
        raise ProtocolError("expected stage-2 decoder")
    released = asm.plan.released_stage2(st1.winning_counts)
    released_names = {s.bus for s in released}
    entries = {}
    off = 1
    for slot in asm.plan.stage2_slots():
        width = len(wires_of[slot.bus])
        need = 1 + width * _DECODER_ENTRY_BYTES
        if off + need > len(dec2_blob):
            raise ProtocolError("stage-2 decoder truncated")
        present = dec2_blob[off]
        body = dec2_blob[off + 1 : off + need]
        off += need
        if bool(present) != (slot.bus in released_names):
            raise ProtocolError("stage-2 release flags disagree with the plan")
        if present:
            entries[slot.bus] = body
    if off != len(dec2_blob):
        raise ProtocolError("stage-2 decoder has trailing bytes")
    stage2_vals = {}
    for name, body in entries.items():
        dec = _unpack_decoder([name], wires_of, body)
        stage2_vals[name] = decode(dec, wire_labels)[name]
    outcome = outcome_from_reveals(params, st1, stage2_vals)
    phases.lap("stage2")

    stream.send(RESULT, _pack_final_result(params, outcome))
    phases.lap("result")

    metrics = RunMetrics(
        role="auctioneer",
        mode=mode,
        and_gates=circuit.and_count,
        gc_bytes=circuit.and_count * 64,
        ot_count=len(choices),
        wall_ms=phases.total_ms,
        phase_ms=phases.ms,
        sent_bytes=stream.sent_bytes,
        recv_bytes=stream.recv_bytes,
        sent_frames=stream.sent_frames,
        recv_frames=stream.recv_frames,
        rejected=shares.rejected,
    )
    return outcome, metrics


def run_agent(
    stream: FrameStream,
    secret_key,
    *,
    expect_bit_length: int | None = None,
    expect_mode: str | None = None,
    garble_seed: int | None = None,
    ot_seed: int | None = None,
    chunk_gates: int = DEFAULT_CHUNK_GATES,
) -> tuple[AuctionOutcome, RunMetrics]:
    """Drive the agent (garbler) side of one session."""
    phases = _Phases()
    hello = stream.recv(HANDSHAKE)
    if len(hello) != 35:
        raise HandshakeError("handshake frame has wrong size")
    version, mode_idx, bit_length = struct.unpack(">BBB", hello[:3])
    if version != VERSION:
        raise HandshakeError(f"unsupported protocol version {version}")
    if mode_idx >= len(MODES):
        raise HandshakeError("unknown circuit mode")
    mode = MODES[mode_idx]
    if expect_mode is not None and mode != expect_mode:
        raise HandshakeError(f"peer wants mode {mode!r}, pinned to {expect_mode!r}")
    if expect_bit_length is not None and bit_length != expect_bit_length:
        raise HandshakeError(
            f"peer wants {bit_length}-bit shares, pinned to {expect_bit_length}"
        )

    grouping = stream.recv(GROUPING)
    params = PublicParams.from_json(grouping.decode())
    if params.digest() != hello[3:].hex():
        raise HandshakeError("grouping does not match the handshake digest")
    if params.mode != mode or params.bit_length != bit_length:
        raise HandshakeError("grouping contradicts the handshake header")

    shares_blob = stream.recv(ENC_SHARES)
    agent_shares = open_agent_shares(shares_blob.decode(), secret_key)
    if agent_shares.bit_length != params.bit_length:
        raise HandshakeError("share width disagrees with the public parameters")
    want_sellers = {sid for sid, _ in params.sellers}
    want_buyers = {m for _, ms in params.groups for m in ms}
    if set(agent_shares.seller_s) != want_sellers or (
        set(agent_shares.buyer_b) != want_buyers
    ):
        raise HandshakeError("share set does not cover the public parameters")
    stream.send(HANDSHAKE, hello)
    phases.lap("handshake")

    asm = assemble_full_circuit(params)
    circuit = asm.circuit
    garbler = Garbler(circuit, asm.plan.bus_names(), seed=garble_seed)
    phases.lap("build")

    pairs = []
    for name in asm.auctioneer_buses:
        for l0, l1 in garbler.input_pairs(name):
            pairs.append((l0.to_bytes(16, "big"), l1.to_bytes(16, "big")))
    sender = OtSender(pairs, seed=ot_seed)
    stream.send(OT_MSG, sender.setup_msg())
    choice = stream.recv(OT_MSG)
    stream.send(OT_MSG, sender.response_msg(choice))
    phases.lap("ot")

    my_values = _canonical_values(agent_shares, asm.agent_buses)
    encoded = garbler.encode_inputs(my_values)
    blob = bytearray()
    for name in asm.agent_buses:
        for label in encoded[name]:
            blob += label.to_bytes(16, "big")
    consts = garbler.const_labels()
    blob += struct.pack(">I", len(consts))
    for wire, label in consts:
        blob += struct.pack(">I", wire) + label.to_bytes(16, "big")
    stream.send(INPUT_LABELS, bytes(blob))
    phases.lap("labels")

    decoder = garbler.output_decoder()
    stream.send(
        DECODER, b"\x01" + _pack_decoder(decoder, asm.plan.stage1_buses())
    )
    phases.lap("decoder1")

    while True:
        chunk = garbler.garble_chunk(chunk_gates)
        if not chunk:
            break
        frame = bytearray(struct.pack(">I", len(chunk)))
        for wire, table in chunk:
            frame += struct.pack(">I", wire) + table
        stream.send(GARBLED_GATES, bytes(frame))
    phases.lap("garble")

    st1 = _unpack_stage1_result(params, stream.recv(RESULT))
    released = {s.bus for s in asm.plan.released_stage2(st1.winning_counts)}
    frame = bytearray(b"\x02")
    for slot in asm.plan.stage2_slots():
        width = circuit.output_buses[slot.bus].width
        if slot.bus in released:
            frame += b"\x01" + _pack_decoder(decoder, [slot.bus])
        else:
            frame += b"\x00" + bytes(width * _DECODER_ENTRY_BYTES)
    stream.send(DECODER, bytes(frame))

    outcome = _unpack_final_result(params, stream.recv(RESULT))
    phases.lap("result")

    metrics = RunMetrics(
        role="agent",
        mode=mode,
        and_gates=circuit.and_count,
        gc_bytes=circuit.and_count * 64,
        ot_count=len(pairs),
        wall_ms=phases.total_ms,
        phase_ms=phases.ms,
        sent_bytes=stream.sent_bytes,
        recv_bytes=stream.recv_bytes,
        sent_frames=stream.sent_frames,
        recv_frames=stream.recv_frames,
    )
    return outcome, metrics


# ------------------------------------------------------------- sessions


@dataclass
class SessionResult:
    outcome_auctioneer: AuctionOutcome
    outcome_agent: AuctionOutcome
    metrics_auctioneer: RunMetrics
    metrics_agent: RunMetrics


class SessionFailure(ProtocolError):
    """One or both sides of a session raised; carries both errors."""

    def __init__(self, auctioneer_error, agent_error):
        self.auctioneer_error = auctioneer_error
        self.agent_error = agent_error
        super().__init__(
            f"auctioneer: {auctioneer_error!r}; agent: {agent_error!r}"
        )


def run_session(
    sock_a: socket.socket,
    sock_b: socket.socket,
    sealed: SealedAuction,
    auctioneer_key,
    agent_key,
    *,
    radius_m: float,
    mode: str,
    seed: int | None = None,
) -> SessionResult:
    """Run both parties on the given socket pair, one thread each."""
    results: dict[str, tuple] = {}
    errors: dict[str, BaseException] = {}

    def a_side():
        stream = FrameStream(sock_a)
        try:
            results["a"] = run_auctioneer(
                stream,
                sealed,
                auctioneer_key,
                radius_m=radius_m,
                mode=mode,
                ot_seed=None if seed is None else seed + 1,
            )
        except BaseException as exc:
            errors["a"] = exc
            stream.close()

    def b_side():
        stream = FrameStream(sock_b)
        try:
            results["b"] = run_agent(
                stream,
                agent_key,
                garble_seed=None if seed is None else seed + 2,
                ot_seed=None if seed is None else seed + 3,
            )
        except BaseException as exc:
            errors["b"] = exc
            stream.close()

    ta = threading.Thread(target=a_side, name="auctioneer")
    tb = threading.Thread(target=b_side, name="agent")
    ta.start()
    tb.start()
    ta.join()
    tb.join()
    sock_a.close()
    sock_b.close()
    if errors:
        raise SessionFailure(errors.get("a"), errors.get("b"))
    out_a, met_a = results["a"]
    out_b, met_b = results["b"]
    return SessionResult(
        outcome_auctioneer=out_a,
        outcome_agent=out_b,
        metrics_auctioneer=met_a,
        metrics_agent=met_b,
    )


def loopback_session(
    scenario: Scenario, mode: str, *, seed: int | None = None
) -> SessionResult:
    """Seal a scenario, run both parties over a socketpair, return both views."""
    rng = random.Random(seed)
    sk1, pk1 = generate_keypair()
    sk2, pk2 = generate_keypair()
    sealed = make_submissions(scenario, pk1, pk2, rng)
    sock_a, sock_b = socket.socketpair()
    return run_session(
        sock_a,
        sock_b,
        sealed,
        sk1,
        sk2,
        radius_m=scenario.radius_m,
        mode=mode,
        seed=seed,
    )
