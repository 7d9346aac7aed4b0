"""Oblivious transfer tests: group sanity, correctness, transcript shape."""

import secrets

import gmpy2
import pytest

from specauction.ot import (
    ELEM_BYTES,
    G,
    MSG_BYTES,
    P,
    Q,
    OtError,
    OtReceiver,
    OtSender,
    ot_exchange,
)


def test_group_constants_are_a_schnorr_group():
    # transcription guard for the RFC constants
    assert P.bit_length() == 1024
    assert Q.bit_length() == 160
    assert gmpy2.is_prime(P)
    assert gmpy2.is_prime(Q)
    assert (P - 1) % Q == 0
    assert G != 1
    assert pow(G, Q, P) == 1


def rand_pairs(n):
    return [(secrets.token_bytes(16), secrets.token_bytes(16)) for _ in range(n)]


def test_receiver_gets_chosen_message():
    pairs = rand_pairs(64)
    choices = [(i * 7) % 2 for i in range(64)]
    got = ot_exchange(pairs, choices, sender_seed=1, receiver_seed=2)
    for (x0, x1), sigma, out in zip(pairs, choices, got):
        assert out == (x1 if sigma else x0)


def test_receiver_never_gets_other_message():
    # with a wrong-key decode the other message would appear only by a
    # 2^-128 accident; check it does not
    pairs = rand_pairs(16)
    got = ot_exchange(pairs, [0] * 16, sender_seed=3, receiver_seed=4)
    for (x0, x1), out in zip(pairs, got):
        assert out == x0 and out != x1


def test_transcript_sizes_independent_of_choices():
    pairs = rand_pairs(20)
    sizes = {}
    for tag, choices in (("zeros", [0] * 20), ("ones", [1] * 20)):
        snd = OtSender(pairs, seed=7)
        rcv = OtReceiver(choices, seed=8)
        setup = snd.setup_msg()
        choice = rcv.choice_msg(setup)
        resp = snd.response_msg(choice)
        rcv.finish(resp)
        sizes[tag] = (len(setup), len(choice), len(resp))
    assert sizes["zeros"] == sizes["ones"]
    assert sizes["zeros"] == (ELEM_BYTES, 20 * ELEM_BYTES, 20 * 2 * MSG_BYTES)


def test_empty_batch_rejected():
    with pytest.raises(OtError):
        OtSender([])
    with pytest.raises(OtError):
        OtReceiver([])


def test_bad_payload_size_rejected():
    with pytest.raises(OtError):
        OtSender([(b"short", b"also-short")])


def test_bad_choice_bits_rejected():
    with pytest.raises(OtError):
        OtReceiver([0, 2])


def test_malformed_group_element_aborts():
    pairs = rand_pairs(2)
    snd = OtSender(pairs, seed=5)
    rcv = OtReceiver([0, 1], seed=6)
    choice = bytearray(rcv.choice_msg(snd.setup_msg()))
    choice[:ELEM_BYTES] = (0).to_bytes(ELEM_BYTES, "big")
    with pytest.raises(OtError):
        snd.response_msg(bytes(choice))
    big = P.to_bytes(ELEM_BYTES, "big")  # >= p is out of range too
    choice[:ELEM_BYTES] = big
    with pytest.raises(OtError):
        snd.response_msg(bytes(choice))
    with pytest.raises(OtError):
        rcv.finish(b"\x00" * 3)


def test_wrong_flow_order_rejected():
    rcv = OtReceiver([0], seed=1)
    with pytest.raises(OtError):
        rcv.finish(b"\x00" * (2 * MSG_BYTES))


def test_mismatched_batch_sizes_rejected():
    with pytest.raises(OtError):
        ot_exchange(rand_pairs(3), [0, 1])
    snd = OtSender(rand_pairs(3), seed=9)
    with pytest.raises(OtError):
        snd.response_msg(b"\x00" * ELEM_BYTES)  # one element, three expected
