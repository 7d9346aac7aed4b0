"""Garbling engine tests: correctness against the clear evaluator,
free-XOR cost model, streaming consumption, decoder authenticity."""

import random

import pytest

from specauction.circuit import (
    Bus,
    Circuit,
    add,
    evaluate,
    ge,
    min_bus,
    mul,
    sort_network,
)
from specauction.garble import (
    GATE_CT_BYTES,
    DecodeError,
    GarbleError,
    Garbler,
    StreamingEvaluator,
    decode,
    evaluate_garbled,
    garble,
    gc_bytes,
)


def adder_circuit(width=4):
    c = Circuit()
    a = c.new_input_bus("a", width)
    b = c.new_input_bus("b", width)
    c.mark_output("sum", add(c, a, b))
    return c


def run_garbled(circuit, garbler_values, evaluator_values, reveal, seed=7):
    """Helper: agent garbles, auctioneer evaluates; OT is simulated by
    handing over the selected labels directly."""
    tables, g, decoder = garble(circuit, reveal, seed=seed)
    labels = g.encode_inputs(garbler_values)
    for name, value in evaluator_values.items():
        pairs = g.input_pairs(name)
        labels[name] = [
            pair[(value >> i) & 1] for i, pair in enumerate(pairs)
        ]
    wires = evaluate_garbled(circuit, tables, labels, g.const_labels())
    return decode(decoder, wires)


def test_adder_garbled_exhaustive():
    c = adder_circuit(4)
    tables, g, decoder = garble(c, ["sum"], seed=1)
    const = g.const_labels()
    for x in range(16):
        for y in range(16):
            labels = g.encode_inputs({"a": x})
            labels["b"] = [
                p[(y >> i) & 1] for i, p in enumerate(g.input_pairs("b"))
            ]
            wires = evaluate_garbled(c, tables, labels, const)
            assert decode(decoder, wires)["sum"] == (x + y) & 15


def test_garbled_matches_clear_on_mixed_circuit():
    rng = random.Random(40)
    c = Circuit()
    a = c.new_input_bus("a", 6)
    b = c.new_input_bus("b", 6)
    k = c.new_input_bus("k", 6)
    s = add(c, a, b)
    c.mark_output("cmp", Bus((ge(c, s, k),)))
    c.mark_output("prod", mul(c, a, b, width=8))
    c.mark_output("low", min_bus(c, a, k))
    recs = sort_network(c, [a, b, k])
    for i, r in enumerate(recs):
        c.mark_output(f"sorted{i}", r)
    outs = ["cmp", "prod", "low"] + [f"sorted{i}" for i in range(3)]
    for trial in range(25):
        vals = {n: rng.randrange(64) for n in ("a", "b", "k")}
        want = evaluate(c, vals)
        got = run_garbled(
            c, {"a": vals["a"]}, {"b": vals["b"], "k": vals["k"]}, outs,
            seed=trial,
        )
        for name in outs:
            assert got[name] == want[name], name


def test_free_xor_no_tables_for_linear_circuit():
    c = Circuit()
    a = c.new_input_bus("a", 8)
    b = c.new_input_bus("b", 8)
    out = Bus(tuple(c.xor(x, y) for x, y in zip(a.wires, b.wires)))
    c.mark_output("x", out)
    tables, g, decoder = garble(c, ["x"], seed=3)
    assert tables == {}
    labels = g.encode_inputs({"a": 0xA5, "b": 0x0F})
    wires = evaluate_garbled(c, tables, labels, g.const_labels())
    assert decode(decoder, wires)["x"] == 0xA5 ^ 0x0F


def test_table_count_and_bytes_match_and_count():
    c = adder_circuit(16)
    tables, _, _ = garble(c, ["sum"], seed=5)
    assert len(tables) == c.and_count == 15
    assert sum(len(t) for t in tables.values()) == gc_bytes(c.and_count)
    assert gc_bytes(c.and_count) == c.and_count * 4 * 16
    for t in tables.values():
        assert len(t) == GATE_CT_BYTES


def test_garbling_deterministic_under_seed():
    c = adder_circuit(8)
    t1, g1, d1 = garble(c, ["sum"], seed=42)
    t2, g2, d2 = garble(c, ["sum"], seed=42)
    assert t1 == t2
    assert g1.delta == g2.delta
    assert d1 == d2
    t3, g3, _ = garble(c, ["sum"], seed=43)
    assert g3.delta != g1.delta


def test_labels_are_distinct_kappa_bit_strings():
    c = adder_circuit(6)
    g = Garbler(c, ["sum"], seed=9)
    assert g.delta & 1 == 1
    for name in ("a", "b"):
        for l0, l1 in g.input_pairs(name):
            assert l0 != l1
            assert 0 <= l0 < (1 << 128) and 0 <= l1 < (1 << 128)
            assert (l0 ^ l1) == g.delta
            assert (l0 & 1) != (l1 & 1)


def test_streaming_feed_in_chunks():
    c = adder_circuit(8)
    g = Garbler(c, ["sum"], seed=11)
    ev = StreamingEvaluator(c)
    for name, value in (("a", 200), ("b", 100)):
        labels = [p[(value >> i) & 1] for i, p in enumerate(g.input_pairs(name))]
        ev.set_input_labels(name, labels)
    ev.set_const_labels(g.const_labels())
    decoder = g.output_decoder()  # available before any gate is garbled
    while True:
        chunk = g.garble_chunk(3)
        if not chunk:
            break
        ev.feed(chunk)
    assert ev.done
    assert decode(decoder, ev.finish())["sum"] == (200 + 100) & 255


def test_streaming_rejects_out_of_order_and_double_feed():
    c = adder_circuit(8)
    g = Garbler(c, ["sum"], seed=12)
    ev = StreamingEvaluator(c)
    for name in ("a", "b"):
        ev.set_input_labels(name, [p[0] for p in g.input_pairs(name)])
    ev.set_const_labels(g.const_labels())
    chunk = g.garble_all()
    items = sorted(chunk.items())
    ev.feed(items)
    with pytest.raises(GarbleError):
        ev.feed([items[0]])


def test_unfinished_stream_detected():
    c = adder_circuit(8)
    g = Garbler(c, ["sum"], seed=13)
    ev = StreamingEvaluator(c)
    for name in ("a", "b"):
        ev.set_input_labels(name, [p[0] for p in g.input_pairs(name)])
    ev.set_const_labels(g.const_labels())
    ev.feed(g.garble_chunk(2))
    assert not ev.done
    with pytest.raises(GarbleError):
        ev.finish()


def test_tampered_table_fails_authenticity():
    c = adder_circuit(4)
    tables, g, decoder = garble(c, ["sum"], seed=21)
    labels = g.encode_inputs({"a": 7})
    labels["b"] = [p[1] for p in g.input_pairs("b")]
    # flip a byte in every row so the active one is hit for sure
    victim = sorted(tables)[1]
    broken = bytearray(tables[victim])
    for row in range(4):
        broken[row * 16 + 5] ^= 0xFF
    tampered = dict(tables)
    tampered[victim] = bytes(broken)
    wires = evaluate_garbled(c, tampered, labels, g.const_labels())
    with pytest.raises(DecodeError):
        decode(decoder, wires)


def test_decode_refuses_undesignated_bus():
    c = Circuit()
    a = c.new_input_bus("a", 2)
    b = c.new_input_bus("b", 2)
    c.mark_output("sum", add(c, a, b))
    c.mark_output("hidden", Bus((c.and_(a.wires[0], b.wires[0]),)))
    tables, g, decoder = garble(c, ["sum"], seed=2)
    labels = g.encode_inputs({"a": 1, "b": 2})
    wires = evaluate_garbled(c, tables, labels, g.const_labels())
    assert decode(decoder, wires) == {"sum": 3}
    with pytest.raises(GarbleError):
        decode(decoder, wires, ["hidden"])
    assert decoder.entry_count() == 2


def test_encode_rejects_bad_values():
    c = adder_circuit(4)
    g = Garbler(c, ["sum"], seed=1)
    with pytest.raises(GarbleError):
        g.encode_inputs({"zz": 0})
    with pytest.raises(GarbleError):
        g.encode_inputs({"a": 16})
    with pytest.raises(GarbleError):
        Garbler(c, ["nope"], seed=1)
