"""Plain-text reference implementation of the double spectrum auction.

The mechanism runs in four steps:

1. Conflict graph.  Two buyers interfere when their Euclidean distance
   is at most the interference radius; interfering buyers can never
   share a channel.

2. Buyer grouping.  Buyers are greedily colored in ascending id order
   (each buyer takes the smallest color absent from its already-colored
   neighbors); a color class is a buyer group, and every member of a
   group can reuse the same channels.  Grouping looks at ids and
   locations only, never at bids, so it is safe to run in the clear.

3. Group bidding.  Each group runs a min-bid split: the member with the
   smallest per-channel bid (ties broken toward the larger id) becomes
   the critical buyer, is excluded from winning, and its bid b_min
   prices the rest.  For every channel count k in 1..d_max the group
   forms a virtual group bid pi_{t,k} = b_min * n_{t,k}, where n_{t,k}
   counts the non-critical members still demanding at least k channels.
   Virtual group k, if it wins, grants each counted member its k-th
   channel.

4. Winner determination and pricing, McAfee style.  Sellers are sorted
   by ascending ask, virtual groups by descending bid.  Expanding each
   seller j into c_j unit asks yields a supply sequence; the last index
   k_l at which the top-i group bids can profitably cover supply
   determines one sacrificed seller whose ask phi clears the market:
   sellers strictly cheaper than seller j(k_l) sell all their channels
   at phi each, and the first W = c_1 + ... + c_{j(k_l)-1} virtual
   groups win.  A buyer in a winning group receives
   h = min(d, D_t) channels (D_t = number of winning virtual groups of
   its group) and pays h * b_min.

Ties are resolved deterministically everywhere: sellers compare by
(ask, id), virtual groups by (bid descending, group id, k), and the
critical-buyer scan prefers the larger id on equal bids.  The garbled
circuit implements the same total orders bit for bit, so outcomes of
the two paths are comparable with plain equality.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .scenario import Buyer, Scenario, Seller


@dataclass(frozen=True)
class Group:
    """A buyer group: one color class of the conflict graph."""

    group_id: int
    members: tuple[int, ...]  # buyer ids, ascending


@dataclass(frozen=True)
class VbgBid:
    """One virtual buyer group: group t asking for its k-th channel."""

    group_id: int
    k: int
    bid: int
    size: int  # n_{t,k}: members counted into this bid


@dataclass(frozen=True)
class GroupBidding:
    group_id: int
    min_bid: int
    critical_id: int
    vbgs: tuple[VbgBid, ...]


@dataclass(frozen=True)
class WinnerResult:
    phi: int                      # clearing ask; 0 when no trade happens
    num_winning_sellers: int      # j(k_l) - 1
    winning_sellers: tuple[Seller, ...]   # ascending (s, id)
    winning_vbgs: tuple[VbgBid, ...]      # the first W in sorted order
    k_l: int | None = None

    @property
    def w(self) -> int:
        return len(self.winning_vbgs)


@dataclass(frozen=True)
class SellerAward:
    id: int
    channels_sold: int
    payment: int


@dataclass(frozen=True)
class BuyerAward:
    id: int
    channels: int
    price: int


@dataclass
class AuctionOutcome:
    phi: int
    w: int
    sellers: list[SellerAward] = field(default_factory=list)
    buyers: list[BuyerAward] = field(default_factory=list)

    def to_json(self) -> str:
        doc = {
            "phi": self.phi,
            "w": self.w,
            "sellers": [
                {"id": a.id, "channels_sold": a.channels_sold, "payment": a.payment}
                for a in sorted(self.sellers, key=lambda a: a.id)
            ],
            "buyers": [
                {"id": a.id, "channels": a.channels, "price": a.price}
                for a in sorted(self.buyers, key=lambda a: a.id)
            ],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def build_conflict_graph(buyers: list[Buyer], radius: float) -> dict[int, set[int]]:
    """Adjacency sets keyed by buyer id; an edge means interference."""
    ids = [u.id for u in buyers]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate buyer ids")
    adj: dict[int, set[int]] = {u.id: set() for u in buyers}
    r2 = radius * radius
    for i, u in enumerate(buyers):
        for v in buyers[i + 1:]:
            dx = u.x - v.x
            dy = u.y - v.y
            if dx * dx + dy * dy <= r2:
                adj[u.id].add(v.id)
                adj[v.id].add(u.id)
    return adj


def form_groups(adj: dict[int, set[int]]) -> list[Group]:
    """Greedy coloring in ascending id order; color classes are groups.

    Group ids are 1-based and ordered by first appearance, which for
    this traversal equals ascending smallest-member id.
    """
    color: dict[int, int] = {}
    for bid in sorted(adj):
        taken = {color[n] for n in adj[bid] if n in color}
        c = 1
        while c in taken:
            c += 1
        color[bid] = c
    ngroups = max(color.values(), default=0)
    groups = []
    for g in range(1, ngroups + 1):
        members = tuple(sorted(b for b, col in color.items() if col == g))
        groups.append(Group(group_id=g, members=members))
    return groups


def mmin_split_and_bid(members: list[Buyer], d_max: int) -> GroupBidding:
    """Min-bid split of one group into d_max virtual group bids.

    The critical buyer is the one with the smallest bid, breaking ties
    toward the larger id; it never wins and its bid prices the rest.
    """
    if not members:
        raise ValueError("empty group")
    critical = min(members, key=lambda u: (u.b, -u.id))
    rest = [u for u in members if u.id != critical.id]
    gid = -1  # caller rewrites the group id; see group_biddings()
    vbgs = []
    for k in range(1, d_max + 1):
        n = sum(1 for u in rest if u.d >= k)
        vbgs.append(VbgBid(group_id=gid, k=k, bid=critical.b * n, size=n))
    return GroupBidding(
        group_id=gid, min_bid=critical.b, critical_id=critical.id, vbgs=tuple(vbgs)
    )


def group_biddings(
    scenario: Scenario, groups: list[Group]
) -> list[GroupBidding]:
    by_id = {u.id: u for u in scenario.buyers}
    out = []
    for g in groups:
        bidding = mmin_split_and_bid([by_id[m] for m in g.members], scenario.d_max)
        out.append(
            GroupBidding(
                group_id=g.group_id,
                min_bid=bidding.min_bid,
                critical_id=bidding.critical_id,
                vbgs=tuple(
                    VbgBid(g.group_id, v.k, v.bid, v.size) for v in bidding.vbgs
                ),
            )
        )
    return out


def determine_winners(sellers: list[Seller], vbgs: list[VbgBid]) -> WinnerResult:
    """Find the clearing point over expanded supply.

    With sellers sorted by (s, id) and virtual groups by
    (bid desc, group_id, k), trade volume i is profitable when the top
    i group bids sum to at least i times the ask of the seller
    supplying the i-th channel.  k_l is the largest profitable volume;
    seller j(k_l) is sacrificed to price the trades.
    """
    if not sellers or not vbgs:
        raise ValueError("need at least one seller and one virtual group")
    svs = sorted(sellers, key=lambda v: (v.s, v.id))
    pis = sorted(vbgs, key=lambda v: (-v.bid, v.group_id, v.k))
    supply = sum(v.c for v in svs)
    q = min(supply, len(pis))

    # j(i): 1-based index of the seller providing the i-th cheapest channel.
    prefix = [0]
    for v in svs:
        prefix.append(prefix[-1] + v.c)

    def j_of(i: int) -> int:
        # largest h with prefix[h] < i, then 1-based seller index h+1
        h = 0
        while h + 1 < len(prefix) and prefix[h + 1] < i:
            h += 1
        return h + 1

    bid_sum = 0
    k_l = None
    for i in range(1, q + 1):
        bid_sum += pis[i - 1].bid
        if bid_sum >= i * svs[j_of(i) - 1].s:
            k_l = i
    if k_l is None:
        return WinnerResult(
            phi=0, num_winning_sellers=0, winning_sellers=(), winning_vbgs=()
        )
    jk = j_of(k_l)
    phi = svs[jk - 1].s
    w = prefix[jk - 1]
    return WinnerResult(
        phi=phi,
        num_winning_sellers=jk - 1,
        winning_sellers=tuple(svs[: jk - 1]),
        winning_vbgs=tuple(pis[:w]),
        k_l=k_l,
    )


def run_clear_auction(scenario: Scenario) -> AuctionOutcome:
    """End-to-end clear-text auction over a validated scenario."""
    scenario.validate()
    adj = build_conflict_graph(scenario.buyers, scenario.radius_m)
    groups = form_groups(adj)
    biddings = group_biddings(scenario, groups)
    vbgs = [v for gb in biddings for v in gb.vbgs]
    result = determine_winners(scenario.sellers, vbgs)
    return price(scenario, groups, biddings, result)


def price(
    scenario: Scenario,
    groups: list[Group],
    biddings: list[GroupBidding],
    result: WinnerResult,
) -> AuctionOutcome:
    """Awards and payments for one winner determination result.

    Every winning seller is paid phi per channel for all its channels.
    A group that won D_t virtual groups grants each non-critical member
    h = min(d, D_t) channels at min_bid each; the critical buyer never
    receives channels.
    """
    outcome = AuctionOutcome(phi=result.phi, w=result.w)
    for v in result.winning_sellers:
        outcome.sellers.append(
            SellerAward(id=v.id, channels_sold=v.c, payment=v.c * result.phi)
        )
    won_per_group: dict[int, int] = {}
    for vbg in result.winning_vbgs:
        won_per_group[vbg.group_id] = won_per_group.get(vbg.group_id, 0) + 1
    by_buyer = {u.id: u for u in scenario.buyers}
    by_gid = {g.group_id: g for g in groups}
    bid_by_gid = {gb.group_id: gb for gb in biddings}
    for gid in sorted(won_per_group):
        d_t = won_per_group[gid]
        gb = bid_by_gid[gid]
        for mid in by_gid[gid].members:
            if mid == gb.critical_id:
                continue
            h = min(by_buyer[mid].d, d_t)
            outcome.buyers.append(
                BuyerAward(id=mid, channels=h, price=h * gb.min_bid)
            )
    outcome.sellers.sort(key=lambda a: a.id)
    outcome.buyers.sort(key=lambda a: a.id)
    return outcome
