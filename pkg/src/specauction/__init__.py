"""Privacy-preserving multi-channel double spectrum auction.

A sealed-bid double auction between spectrum sellers and spatially
distributed buyers, executed by two mutually distrusting servers (an
auctioneer and an auction agent) so that neither ever sees a bid, an
ask, or a demand in the clear.  Bidders split every sensitive value
into two additive shares mod 2^B and seal one share to each server;
the servers then evaluate the auction logic as a garbled boolean
circuit and learn only the published outcome.

The package also contains a plain-text implementation of the same
mechanism (`specauction.auction`) used as the correctness reference,
plus a benchmark harness and a small CLI.
"""

__version__ = "0.1.0"

from .scenario import Buyer, Scenario, Seller
from .auction import AuctionOutcome, run_clear_auction

__all__ = [
    "Buyer",
    "Seller",
    "Scenario",
    "AuctionOutcome",
    "run_clear_auction",
]
