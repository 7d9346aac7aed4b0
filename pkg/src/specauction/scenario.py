"""Auction scenario model and JSON serialization.

A scenario bundles everything a single auction run needs: the public
parameters (share bit width, per-buyer demand cap, interference radius,
deployment area) and the two participant lists.  Sellers offer `c`
identical spectrum channels at unit ask `s`; buyers sit at a planar
location, bid `b` per channel and demand up to `d` channels.

The JSON layout is stable (sorted keys, fixed separators) so that a
scenario generated from a seed serializes byte-identically everywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass(frozen=True)
class Seller:
    id: int
    s: int
    c: int


@dataclass(frozen=True)
class Buyer:
    id: int
    x: float
    y: float
    b: int
    d: int


@dataclass
class Scenario:
    bit_length: int
    d_max: int
    radius_m: float
    area_m: float
    sellers: list[Seller]
    buyers: list[Buyer]

    def validate(self) -> None:
        """Raise ValueError on any malformed field.

        Monetary values must fit the share width with headroom for the
        sums the circuit forms, so they are capped at 2^bit_length - 1;
        demands are clamped nowhere here, out-of-range is an error.
        """
        if not (4 <= self.bit_length <= 30):
            raise ValueError(f"bit_length {self.bit_length} out of range")
        if self.d_max < 1:
            raise ValueError("d_max must be >= 1")
        if self.radius_m <= 0 or self.area_m <= 0:
            raise ValueError("radius and area must be positive")
        if not self.sellers:
            raise ValueError("need at least one seller")
        if not self.buyers:
            raise ValueError("need at least one buyer")
        limit = 1 << self.bit_length
        seen: set[int] = set()
        for v in self.sellers:
            if v.id in seen:
                raise ValueError(f"duplicate seller id {v.id}")
            seen.add(v.id)
            if not (0 < v.s < limit):
                raise ValueError(f"seller {v.id}: ask {v.s} out of range")
            if v.c < 1:
                raise ValueError(f"seller {v.id}: channel count {v.c} < 1")
        seen = set()
        for u in self.buyers:
            if u.id in seen:
                raise ValueError(f"duplicate buyer id {u.id}")
            seen.add(u.id)
            if not (0 < u.b < limit):
                raise ValueError(f"buyer {u.id}: bid {u.b} out of range")
            if not (1 <= u.d <= self.d_max):
                raise ValueError(f"buyer {u.id}: demand {u.d} out of range")
            if not (0 <= u.x <= self.area_m and 0 <= u.y <= self.area_m):
                raise ValueError(f"buyer {u.id}: location outside area")

    def to_json(self) -> str:
        doc = {
            "bit_length": self.bit_length,
            "d_max": self.d_max,
            "radius_m": self.radius_m,
            "area_m": self.area_m,
            "sellers": [{"id": v.id, "s": v.s, "c": v.c} for v in self.sellers],
            "buyers": [
                {"id": u.id, "x": u.x, "y": u.y, "b": u.b, "d": u.d}
                for u in self.buyers
            ],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        doc = json.loads(text)
        sc = cls(
            bit_length=doc["bit_length"],
            d_max=doc["d_max"],
            radius_m=doc["radius_m"],
            area_m=doc["area_m"],
            sellers=[Seller(v["id"], v["s"], v["c"]) for v in doc["sellers"]],
            buyers=[
                Buyer(u["id"], u["x"], u["y"], u["b"], u["d"])
                for u in doc["buyers"]
            ],
        )
        sc.validate()
        return sc
