"""Data-oblivious auction circuits and the reveal plan.

This module turns the public auction structure (seller ids and channel
counts, buyer grouping, demand cap, share width) into one fixed boolean
circuit evaluating the whole mechanism over secret-shared inputs.  The
circuit's wiring is a function of public parameters only: every control
decision that depends on a bid is folded into the dataflow with
multiplexers, conditional swaps and one-hot flag arithmetic, so two
scenarios with the same public shape produce byte-identical circuits.

Group stage.  Each group runs one bubble pass over (bid, ~id) keys that
parks the minimum bidder (ties: larger id) at the end as the critical
buyer, then counts demands to build the D virtual group bids
pi_k = b_min * n_k.  The group bid b_min is carried forward in garbled
form, never recomputed.

Winner stage.  Sellers sort ascending by (ask, id), virtual groups
descending by bid with (group, slice) tie order, both on Batcher
networks.  The profitable-volume scan is branch-free: with prefix
channel sums P_j, the flags lambda_j = [P_j < i] form a monotone
1...10...0 pattern whose XOR derivative picks out the supplying seller
j(i); multiplying the derivative into s_{j+1}, P_j and the constant j
accumulates phi_i, W_i and j_i without any data-dependent indexing.
The scan includes the j = 0 term (an implicit lambda_0 = 1): when the
whole volume i is supplied by the cheapest seller, the sacrificed
seller is seller 1 and the accumulators must pick s_1 / P_0 = 0, a
case the flag pattern otherwise misses.  Profitability omega_i is
non-increasing in i, so the final (phi, W, J) are accumulated at the
single omega edge plus an omega_Q term for the all-profitable case;
J is the number of winning sellers (prefix sums are strictly
increasing, so the seller index at the last profitable volume equals
the reveal the pricing stage needs).

Reveal plan.  Outputs are organized in two stages so the decoding
information released never exceeds the published outcome: stage 1
covers W, phi, the winning-seller count and full resorted id arrays
(winners first, both blocks in a public order); stage 2 covers, per
winning group, the member ids of the group's bubble output, the group
bid, and h = min(d, v) variant buses of which only v = D_t is ever
released.  Everything else stays garbled forever.

Two construction modes exist: "original" literally re-instantiates the
prefix-sum subcircuits inside both nested loops, "improved" hoists them
out and reuses one prefix-sum array.  Both reveal identical outcomes;
their AND-gate counts differ, which the benchmarks measure.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .auction import (
    AuctionOutcome,
    BuyerAward,
    Group,
    SellerAward,
    build_conflict_graph,
    form_groups,
)
from .circuit import (
    Bus,
    Circuit,
    add,
    concat,
    constant_bus,
    cond_swap,
    ge,
    lt,
    min_bus,
    mul,
    mul_const,
    not_bus,
    prefix_sums,
    sort_network,
    subbus,
    zext,
)
from .scenario import Scenario

MODES = ("original", "improved")


def _blen(x: int) -> int:
    return max(1, int(x).bit_length())


@dataclass(frozen=True)
class PublicParams:
    """Everything both servers must agree on before building circuits."""

    bit_length: int
    d_max: int
    mode: str
    sellers: tuple[tuple[int, int], ...]  # (id, channel count), id ascending
    groups: tuple[tuple[int, tuple[int, ...]], ...]  # (gid, member ids asc)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.sellers or not self.groups:
            raise ValueError("need at least one seller and one group")

    # ---------------------------------------------------- derived shape

    @property
    def num_sellers(self) -> int:
        return len(self.sellers)

    @property
    def num_groups(self) -> int:
        return len(self.groups)

    @property
    def total_channels(self) -> int:
        return sum(c for _, c in self.sellers)

    @property
    def num_vbgs(self) -> int:
        return self.num_groups * self.d_max

    @property
    def max_volume(self) -> int:
        return min(self.total_channels, self.num_vbgs)

    def widths(self) -> dict[str, int]:
        b = self.bit_length
        w_n = _blen(max(len(m) - 1 for _, m in self.groups))
        w_pi = b + w_n
        return {
            "value": b,
            "sid": _blen(max(i for i, _ in self.sellers)),
            "bid": _blen(max(max(m) for _, m in self.groups)),
            "gid": _blen(max(g for g, _ in self.groups)),
            "k": _blen(self.d_max),
            "c": _blen(max(c for _, c in self.sellers)),
            "n": w_n,
            "pi": w_pi,
            "L": _blen(self.total_channels),
            "sumpi": w_pi + _blen(self.num_vbgs),
            "iphi": b + _blen(self.max_volume),
            "j": _blen(max(1, self.num_sellers - 1)),
        }

    def canonical_json(self) -> str:
        doc = {
            "bit_length": self.bit_length,
            "d_max": self.d_max,
            "mode": self.mode,
            "sellers": [[i, c] for i, c in self.sellers],
            "groups": [[g, list(m)] for g, m in self.groups],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    @classmethod
    def from_json(cls, text: str) -> "PublicParams":
        doc = json.loads(text)
        return cls(
            bit_length=doc["bit_length"],
            d_max=doc["d_max"],
            mode=doc["mode"],
            sellers=tuple((i, c) for i, c in doc["sellers"]),
            groups=tuple((g, tuple(m)) for g, m in doc["groups"]),
        )

    @classmethod
    def from_scenario(
        cls, scenario: Scenario, mode: str, groups: list[Group] | None = None
    ) -> "PublicParams":
        if groups is None:
            groups = form_groups(
                build_conflict_graph(scenario.buyers, scenario.radius_m)
            )
        return cls(
            bit_length=scenario.bit_length,
            d_max=scenario.d_max,
            mode=mode,
            sellers=tuple((v.id, v.c) for v in scenario.sellers),
            groups=tuple((g.group_id, g.members) for g in groups),
        )


def input_layout(params: PublicParams) -> tuple[list[str], list[str]]:
    """Canonical input bus names per party: (auctioneer, agent).

    Share 1 belongs to the auctioneer (the circuit evaluator), share 2
    to the agent (the garbler).  All buses are bit_length wide.  The OT
    batch transfers the auctioneer buses in exactly this order.
    """
    mine = []
    theirs = []
    for sid, _ in params.sellers:
        mine.append(f"in.s1.{sid}")
        theirs.append(f"in.s2.{sid}")
    members = sorted(m for _, ms in params.groups for m in ms)
    for bid in members:
        mine.append(f"in.b1.{bid}")
        mine.append(f"in.d1.{bid}")
        theirs.append(f"in.b2.{bid}")
        theirs.append(f"in.d2.{bid}")
    return mine, theirs


@dataclass(frozen=True)
class RevealSlot:
    """One decodable output bus and the condition for its release."""

    bus: str
    stage: int  # 1: always released; 2: released per the conditions below
    group_id: int | None = None  # stage 2: only if this group wins
    variant: int | None = None  # for h buses: only if D_t equals this


@dataclass
class RevealPlan:
    slots: tuple[RevealSlot, ...]

    def stage1_buses(self) -> list[str]:
        return [s.bus for s in self.slots if s.stage == 1]

    def stage2_slots(self) -> list[RevealSlot]:
        return [s for s in self.slots if s.stage == 2]

    def released_stage2(self, winning_counts: dict[int, int]) -> list[RevealSlot]:
        """Slots whose condition holds for the given D_t map."""
        out = []
        for s in self.stage2_slots():
            d_t = winning_counts.get(s.group_id, 0)
            if d_t < 1:
                continue
            if s.variant is not None and s.variant != d_t:
                continue
            out.append(s)
        return out

    def bus_names(self) -> list[str]:
        return [s.bus for s in self.slots]


# ------------------------------------------------------------ grouping


@dataclass
class GroupStage:
    gid: int
    member_ids: tuple[int, ...]  # pre-pass order (ascending id)
    pos_id: list[Bus]  # post-pass id bus per position (0..N_t-1)
    pos_d: list[Bus]  # post-pass demand bus per position
    min_bid: Bus  # b of the last position (the critical buyer's bid)
    vbg_records: list[Bus]  # concat(k, gid, ~pi) per k = 1..D


def build_group_stage(
    c: Circuit,
    params: PublicParams,
    gid: int,
    member_ids: tuple[int, ...],
    b_of: dict[int, Bus],
    d_of: dict[int, Bus],
) -> GroupStage:
    """One group's stage: the min-bid pass, demand counts, virtual bids."""
    w = params.widths()
    n_members = len(member_ids)
    ids = [constant_bus(c, m, w["bid"]) for m in member_ids]
    bs = [b_of[m] for m in member_ids]
    ds = [d_of[m] for m in member_ids]

    # One bubble pass: after step j the larger (b, ~id) key of positions
    # j, j+1 sits at j; the overall minimum ends at the last position.
    for j in range(n_members - 1):
        key_j = concat(not_bus(c, ids[j]), bs[j])
        key_n = concat(not_bus(c, ids[j + 1]), bs[j + 1])
        swap = lt(c, key_j, key_n)
        rec_j = concat(ids[j], bs[j], ds[j])
        rec_n = concat(ids[j + 1], bs[j + 1], ds[j + 1])
        out_j, out_n = cond_swap(c, swap, rec_j, rec_n)
        for pos, rec in ((j, out_j), (j + 1, out_n)):
            ids[pos] = subbus(rec, 0, w["bid"])
            bs[pos] = subbus(rec, w["bid"], w["bid"] + w["value"])
            ds[pos] = subbus(rec, w["bid"] + w["value"], rec.width)

    min_bid = bs[-1]
    vbg_records = []
    for k in range(1, params.d_max + 1):
        count = constant_bus(c, 0, w["n"])
        k_bus = constant_bus(c, k, w["value"])
        for j in range(n_members - 1):
            gamma = ge(c, ds[j], k_bus)
            count = add(c, count, Bus((gamma,)), width=w["n"])
        pi = mul(c, min_bid, count, width=w["pi"])
        rec = concat(
            constant_bus(c, k, w["k"]),
            constant_bus(c, gid, w["gid"]),
            not_bus(c, pi),
        )
        vbg_records.append(rec)
    return GroupStage(
        gid=gid,
        member_ids=member_ids,
        pos_id=ids,
        pos_d=ds,
        min_bid=min_bid,
        vbg_records=vbg_records,
    )


# ------------------------------------------------------- winner stage


@dataclass
class WinnerStage:
    w_bus: Bus
    nsellers_bus: Bus
    phi_bus: Bus
    seller_id_buses: list[Bus]  # resorted: winners (id asc) then losers
    vbg_gid_buses: list[Bus]  # resorted: winners (gid, k) then losers


def build_winner_stage(
    c: Circuit,
    params: PublicParams,
    s_of: dict[int, Bus],
    vbg_records: list[Bus],
) -> WinnerStage:
    """Winner stage: sorts, the profitable-volume scan, flags, resorts."""
    w = params.widths()
    mode = params.mode
    m = params.num_sellers
    big_q = params.max_volume

    # sellers ascending by (s, id); channel counts ride along outside the key
    seller_recs = []
    for sid, cnt in params.sellers:
        seller_recs.append(
            concat(
                constant_bus(c, cnt, w["c"]),
                constant_bus(c, sid, w["sid"]),
                s_of[sid],
            )
        )
    seller_recs = sort_network(c, seller_recs, key_lo=w["c"])
    c_rank = [subbus(r, 0, w["c"]) for r in seller_recs]
    id_rank = [subbus(r, w["c"], w["c"] + w["sid"]) for r in seller_recs]
    s_rank = [subbus(r, w["c"] + w["sid"], r.width) for r in seller_recs]

    # virtual groups descending by bid: the key stores ~pi above (gid, k)
    vbg_sorted = sort_network(c, vbg_records)
    k_rank = [subbus(r, 0, w["k"]) for r in vbg_sorted]
    gid_rank = [subbus(r, w["k"], w["k"] + w["gid"]) for r in vbg_sorted]
    pi_rank = [not_bus(c, subbus(r, w["k"] + w["gid"], r.width)) for r in vbg_sorted]

    # prefix machinery; "improved" hoists these two arrays out of the loops
    def fresh_channel_prefix(j: int) -> Bus:
        acc = zext(c, c_rank[0], w["L"])
        for l in range(1, j):
            acc = add(c, acc, c_rank[l], width=w["L"])
        return acc

    def fresh_bid_prefix(i: int) -> Bus:
        acc = zext(c, pi_rank[0], w["sumpi"])
        for l in range(1, i):
            acc = add(c, acc, pi_rank[l], width=w["sumpi"])
        return acc

    if mode == "improved":
        channel_prefix = prefix_sums(c, [zext(c, b, w["L"]) for b in c_rank], w["L"])
        bid_prefix = prefix_sums(
            c, [zext(c, b, w["sumpi"]) for b in pi_rank], w["sumpi"]
        )

    def scaled(bit: int, bus: Bus) -> Bus:
        return Bus(tuple(c.and_(bit, x) for x in bus.wires))

    zero_j = constant_bus(c, 0, w["j"])
    zero_phi = constant_bus(c, 0, w["value"])
    zero_w = constant_bus(c, 0, w["L"])
    j_out, phi_out, w_out = zero_j, zero_phi, zero_w
    prev_omega: int | None = None
    prev_vals: tuple[Bus, Bus, Bus] | None = None

    for i in range(1, big_q + 1):
        i_bus = constant_bus(c, i, w["L"])
        lambdas = [c.const(1)]  # lambda_0: P_0 = 0 < i always
        for j in range(1, m):
            if mode == "improved":
                p_j = channel_prefix[j - 1]
            else:
                p_j = fresh_channel_prefix(j)
            lambdas.append(lt(c, p_j, i_bus))
        lambdas.append(c.const(0))  # lambda_M: all channels precede volume i

        j_i, phi_i, w_i = zero_j, zero_phi, zero_w
        for j in range(m):
            delta = c.xor(lambdas[j], lambdas[j + 1])
            if j > 0:
                j_i = add(
                    c,
                    j_i,
                    Bus(
                        tuple(
                            delta if (j >> t) & 1 else c.const(0)
                            for t in range(w["j"])
                        )
                    ),
                    width=w["j"],
                )
            phi_i = add(c, phi_i, scaled(delta, s_rank[j]), width=w["value"])
            if j > 0:
                if mode == "improved":
                    p_j = channel_prefix[j - 1]
                else:
                    p_j = fresh_channel_prefix(j)
                w_i = add(c, w_i, scaled(delta, p_j), width=w["L"])

        if mode == "improved":
            sum_pi = bid_prefix[i - 1]
        else:
            sum_pi = fresh_bid_prefix(i)
        threshold = mul_const(c, phi_i, i, width=w["iphi"])
        cw = max(w["sumpi"], w["iphi"])
        omega = ge(c, zext(c, sum_pi, cw), zext(c, threshold, cw))

        if prev_omega is not None:
            edge = c.xor(prev_omega, omega)
            pj, pphi, pw = prev_vals
            j_out = add(c, j_out, scaled(edge, pj), width=w["j"])
            phi_out = add(c, phi_out, scaled(edge, pphi), width=w["value"])
            w_out = add(c, w_out, scaled(edge, pw), width=w["L"])
        prev_omega = omega
        prev_vals = (j_i, phi_i, w_i)

    # the all-volumes-profitable case: omega_Q itself is the edge
    pj, pphi, pw = prev_vals
    j_out = add(c, j_out, scaled(prev_omega, pj), width=w["j"])
    phi_out = add(c, phi_out, scaled(prev_omega, pphi), width=w["value"])
    w_out = add(c, w_out, scaled(prev_omega, pw), width=w["L"])

    # seller resort: key = (loser flag, id); winners surface in id order
    w_rank = max(w["j"], _blen(m))
    recs = []
    for r in range(1, m + 1):
        win = ge(c, zext(c, j_out, w_rank), constant_bus(c, r, w_rank))
        recs.append(concat(id_rank[r - 1], Bus((c.not_(win),))))
    recs = sort_network(c, recs)
    seller_id_buses = [subbus(r, 0, w["sid"]) for r in recs]

    # virtual-group resort: key = (loser flag, gid, k)
    w_vrank = max(w["L"], _blen(params.num_vbgs))
    vrecs = []
    for r in range(1, params.num_vbgs + 1):
        win = ge(c, zext(c, w_out, w_vrank), constant_bus(c, r, w_vrank))
        vrecs.append(concat(k_rank[r - 1], gid_rank[r - 1], Bus((c.not_(win),))))
    vrecs = sort_network(c, vrecs)
    vbg_gid_buses = [subbus(r, w["k"], w["k"] + w["gid"]) for r in vrecs]

    return WinnerStage(
        w_bus=w_out,
        nsellers_bus=j_out,
        phi_bus=phi_out,
        seller_id_buses=seller_id_buses,
        vbg_gid_buses=vbg_gid_buses,
    )


# ------------------------------------------------------ pricing stage


def build_pricing_buses(
    c: Circuit, params: PublicParams, stages: list[GroupStage]
) -> list[RevealSlot]:
    """Pricing-stage reveal material: member ids, h variants, group bid.

    h = min(d, D_t) needs the winning-slice count D_t, which is known
    only after stage 1 is decoded; to keep the circuit fixed, one h bus
    per candidate value v = 1..D is built and the decoder releases only
    the v = D_t variant.  Groups of size 1 price nobody and contribute
    no stage-2 material at all.
    """
    w = params.widths()
    slots: list[RevealSlot] = []
    for st in stages:
        n_members = len(st.member_ids)
        if n_members < 2:
            continue
        name = f"out.group_minbid.{st.gid}"
        c.mark_output(name, st.min_bid)
        slots.append(RevealSlot(bus=name, stage=2, group_id=st.gid))
        for q in range(n_members - 1):
            name = f"out.member_id.{st.gid}.{q}"
            c.mark_output(name, st.pos_id[q])
            slots.append(RevealSlot(bus=name, stage=2, group_id=st.gid))
            for v in range(1, params.d_max + 1):
                h = min_bus(c, st.pos_d[q], constant_bus(c, v, w["value"]))
                name = f"out.member_h.{st.gid}.{q}.{v}"
                c.mark_output(name, h)
                slots.append(
                    RevealSlot(bus=name, stage=2, group_id=st.gid, variant=v)
                )
    return slots


# ------------------------------------------------------------- assembly


@dataclass
class AssembledAuction:
    params: PublicParams
    circuit: Circuit
    plan: RevealPlan
    auctioneer_buses: list[str]
    agent_buses: list[str]

    @property
    def and_count(self) -> int:
        return self.circuit.and_count

    def structure_hash(self) -> str:
        return self.circuit.structure_hash()


def assemble_full_circuit(params: PublicParams) -> AssembledAuction:
    """The complete auction circuit plus its reveal plan."""
    c = Circuit()
    w = params.widths()
    mine, theirs = input_layout(params)
    for name in mine + theirs:
        c.new_input_bus(name, params.bit_length)

    def recon(prefix: str, ident: int) -> Bus:
        return add(
            c,
            c.input_buses[f"{prefix}1.{ident}"],
            c.input_buses[f"{prefix}2.{ident}"],
        )

    s_of = {sid: recon("in.s", sid) for sid, _ in params.sellers}
    b_of = {}
    d_of = {}
    for _, members in params.groups:
        for mid in members:
            b_of[mid] = recon("in.b", mid)
            d_of[mid] = recon("in.d", mid)

    stages = [
        build_group_stage(c, params, gid, members, b_of, d_of)
        for gid, members in params.groups
    ]
    vbg_records = [rec for st in stages for rec in st.vbg_records]
    winner = build_winner_stage(c, params, s_of, vbg_records)

    slots: list[RevealSlot] = []
    c.mark_output("out.w", winner.w_bus)
    slots.append(RevealSlot(bus="out.w", stage=1))
    c.mark_output("out.nsellers", winner.nsellers_bus)
    slots.append(RevealSlot(bus="out.nsellers", stage=1))
    c.mark_output("out.phi", winner.phi_bus)
    slots.append(RevealSlot(bus="out.phi", stage=1))
    for r, bus in enumerate(winner.seller_id_buses, start=1):
        name = f"out.sorted_seller_id.{r}"
        c.mark_output(name, bus)
        slots.append(RevealSlot(bus=name, stage=1))
    for r, bus in enumerate(winner.vbg_gid_buses, start=1):
        name = f"out.sorted_vbg_gid.{r}"
        c.mark_output(name, bus)
        slots.append(RevealSlot(bus=name, stage=1))
    slots.extend(build_pricing_buses(c, params, stages))

    return AssembledAuction(
        params=params,
        circuit=c,
        plan=RevealPlan(slots=tuple(slots)),
        auctioneer_buses=mine,
        agent_buses=theirs,
    )


# --------------------------------------------------- outcome from reveals


@dataclass
class Stage1Values:
    w: int
    num_sellers: int
    phi: int
    winning_seller_ids: list[int]
    winning_counts: dict[int, int]  # gid -> D_t


def parse_stage1(params: PublicParams, decoded: dict[str, int]) -> Stage1Values:
    w_val = decoded["out.w"]
    n_sellers = decoded["out.nsellers"]
    phi = decoded["out.phi"]
    seller_ids = [
        decoded[f"out.sorted_seller_id.{r}"] for r in range(1, n_sellers + 1)
    ]
    counts: dict[int, int] = {}
    for r in range(1, w_val + 1):
        gid = decoded[f"out.sorted_vbg_gid.{r}"]
        counts[gid] = counts.get(gid, 0) + 1
    return Stage1Values(
        w=w_val,
        num_sellers=n_sellers,
        phi=phi,
        winning_seller_ids=seller_ids,
        winning_counts=counts,
    )


def outcome_from_reveals(
    params: PublicParams, stage1: Stage1Values, stage2: dict[str, int]
) -> AuctionOutcome:
    """Assemble the published outcome from decoded buses.

    Mirrors the clear pricing step: winning sellers are paid c*phi, the
    members of winning groups get h = min(d, D_t) channels at the group
    bid each (positions 0..N_t-2 of the group's bubble output are
    exactly the non-critical members).
    """
    c_by_id = dict(params.sellers)
    size_by_gid = {gid: len(m) for gid, m in params.groups}
    outcome = AuctionOutcome(phi=stage1.phi, w=stage1.w)
    for sid in stage1.winning_seller_ids:
        outcome.sellers.append(
            SellerAward(
                id=sid, channels_sold=c_by_id[sid], payment=c_by_id[sid] * stage1.phi
            )
        )
    for gid in sorted(stage1.winning_counts):
        d_t = stage1.winning_counts[gid]
        if size_by_gid[gid] < 2:
            continue
        min_bid = stage2[f"out.group_minbid.{gid}"]
        for q in range(size_by_gid[gid] - 1):
            mid = stage2[f"out.member_id.{gid}.{q}"]
            h = stage2[f"out.member_h.{gid}.{q}.{d_t}"]
            outcome.buyers.append(BuyerAward(id=mid, channels=h, price=h * min_bid))
    outcome.sellers.sort(key=lambda a: a.id)
    outcome.buyers.sort(key=lambda a: a.id)
    return outcome
