"""Boolean circuit IR and data-oblivious combinators.

Circuits are flat DAGs over four wire kinds: INPUT, CONST, XOR and AND.
Every wire is defined exactly once and operands always point backwards,
so a single forward pass evaluates (or garbles) the whole thing.  NOT
is encoded as XOR with a CONST-1 wire.  Buses are little-endian tuples
of wire indices.

The builder folds constants aggressively but deterministically: folding
decisions depend only on which operands are CONST wires, which is
itself a function of circuit structure, never of run-time values.  AND
counts therefore stay reproducible, and the combinators below have
fixed non-linear cost:

    add (W bits, equal widths)    W - 1 AND
    ge / lt (W bits)              W AND
    mux (W bits)                  W AND
    cond_swap (W bits)            W AND
    min_bus (W bits)              2W AND

Costs shrink when operands contain CONST wires (e.g. comparison against
a public constant), which the auction circuits exploit heavily.
"""

from __future__ import annotations

import hashlib
from array import array
from dataclasses import dataclass

INPUT, CONST, XOR, AND = 0, 1, 2, 3

_KIND_NAME = {INPUT: "IN", CONST: "CONST", XOR: "XOR", AND: "AND"}


@dataclass(frozen=True)
class Bus:
    """Little-endian group of wires; wires[0] is the least significant."""

    wires: tuple[int, ...]

    @property
    def width(self) -> int:
        return len(self.wires)

    def __iter__(self):
        return iter(self.wires)


class CircuitError(Exception):
    pass


class Circuit:
    """Mutable circuit under construction; also the evaluation subject."""

    def __init__(self) -> None:
        self.kinds = bytearray()
        self.arg_a = array("q")  # operand wire, or the bit for CONST
        self.arg_b = array("q")
        self.input_buses: dict[str, Bus] = {}
        self.output_buses: dict[str, Bus] = {}
        self.and_count = 0
        self._const_wire: dict[int, int] = {}  # bit -> wire
        self._const_of: dict[int, int] = {}  # wire -> bit

    @property
    def n_wires(self) -> int:
        return len(self.kinds)

    def _new(self, kind: int, a: int, b: int) -> int:
        w = len(self.kinds)
        self.kinds.append(kind)
        self.arg_a.append(a)
        self.arg_b.append(b)
        return w

    def new_input_bus(self, name: str, width: int) -> Bus:
        if name in self.input_buses:
            raise CircuitError(f"duplicate input bus {name!r}")
        if width < 1:
            raise CircuitError("bus width must be >= 1")
        bus = Bus(tuple(self._new(INPUT, 0, 0) for _ in range(width)))
        self.input_buses[name] = bus
        return bus

    def mark_output(self, name: str, bus: Bus) -> None:
        if name in self.output_buses:
            raise CircuitError(f"duplicate output bus {name!r}")
        for w in bus.wires:
            if not (0 <= w < self.n_wires):
                raise CircuitError(f"output bus {name!r} references unknown wire")
        self.output_buses[name] = bus

    def const(self, bit: int) -> int:
        bit = 1 if bit else 0
        w = self._const_wire.get(bit)
        if w is None:
            w = self._new(CONST, bit, 0)
            self._const_wire[bit] = w
            self._const_of[w] = bit
        return w

    def xor(self, a: int, b: int) -> int:
        ca = self._const_of.get(a)
        cb = self._const_of.get(b)
        if ca is not None and cb is not None:
            return self.const(ca ^ cb)
        if ca == 0:
            return b
        if cb == 0:
            return a
        if a == b:
            return self.const(0)
        return self._new(XOR, a, b)

    def and_(self, a: int, b: int) -> int:
        ca = self._const_of.get(a)
        cb = self._const_of.get(b)
        if ca == 0 or cb == 0:
            return self.const(0)
        if ca == 1:
            return b
        if cb == 1:
            return a
        if a == b:
            return a
        self.and_count += 1
        return self._new(AND, a, b)

    def not_(self, a: int) -> int:
        return self.xor(a, self.const(1))

    # ------------------------------------------------------------ audit

    def gate_counts(self) -> dict[str, int]:
        counts = {"IN": 0, "CONST": 0, "XOR": 0, "AND": 0}
        for k in self.kinds:
            counts[_KIND_NAME[k]] += 1
        return counts

    def dump(self) -> str:
        """One line per wire: index, kind, operands; then the bus map."""
        lines = []
        for w in range(self.n_wires):
            k = self.kinds[w]
            if k == INPUT:
                lines.append(f"{w} IN")
            elif k == CONST:
                lines.append(f"{w} CONST {self.arg_a[w]}")
            else:
                lines.append(f"{w} {_KIND_NAME[k]} {self.arg_a[w]} {self.arg_b[w]}")
        for name in sorted(self.input_buses):
            ws = " ".join(map(str, self.input_buses[name].wires))
            lines.append(f"in {name} {ws}")
        for name in sorted(self.output_buses):
            ws = " ".join(map(str, self.output_buses[name].wires))
            lines.append(f"out {name} {ws}")
        return "\n".join(lines) + "\n"

    def structure_hash(self) -> str:
        return hashlib.sha256(self.dump().encode()).hexdigest()


# -------------------------------------------------------------- helpers


def constant_bus(c: Circuit, value: int, width: int) -> Bus:
    if value < 0 or value >> width:
        raise CircuitError(f"constant {value} does not fit in {width} bits")
    return Bus(tuple(c.const((value >> i) & 1) for i in range(width)))


def zext(c: Circuit, bus: Bus, width: int) -> Bus:
    if width < bus.width:
        raise CircuitError("zext cannot shrink a bus")
    if width == bus.width:
        return bus
    zero = c.const(0)
    return Bus(bus.wires + (zero,) * (width - bus.width))


def concat(*buses: Bus) -> Bus:
    ws: tuple[int, ...] = ()
    for b in buses:
        ws = ws + b.wires
    return Bus(ws)


def subbus(bus: Bus, lo: int, hi: int) -> Bus:
    return Bus(bus.wires[lo:hi])


def not_bus(c: Circuit, bus: Bus) -> Bus:
    return Bus(tuple(c.not_(w) for w in bus.wires))


# ----------------------------------------------------------- arithmetic


def add(c: Circuit, a: Bus, b: Bus, width: int | None = None) -> Bus:
    """Ripple-carry sum.

    Without `width` the operands must have equal width W and the result
    is mod 2^W (W-1 AND gates: the carry out of the top bit is never
    formed).  With `width`, both operands are zero-extended and the sum
    is mod 2^width; extension bits cost nothing thanks to folding.

    The carry step uses the XOR-majority form
        carry' = ((a ^ carry) & (b ^ carry)) ^ carry
    which spends a single AND per bit.
    """
    if width is None:
        if a.width != b.width:
            raise CircuitError("add: operand widths differ; pass width explicitly")
        width = a.width
    if a.width > width or b.width > width:
        raise CircuitError("add: operand wider than result")
    a = zext(c, a, width)
    b = zext(c, b, width)
    out = []
    carry = c.const(0)
    for i in range(width):
        ax = c.xor(a.wires[i], carry)
        out.append(c.xor(ax, b.wires[i]))
        if i + 1 < width:
            bx = c.xor(b.wires[i], carry)
            carry = c.xor(c.and_(ax, bx), carry)
    return Bus(tuple(out))


def ge(c: Circuit, a: Bus, b: Bus) -> int:
    """Single wire [a >= b], unsigned; widths must match (zext first).

    Computed as the carry out of a + ~b + 1: W AND gates.
    """
    if a.width != b.width:
        raise CircuitError("ge: operand widths differ")
    carry = c.const(1)
    for i in range(a.width):
        ax = c.xor(a.wires[i], carry)
        bx = c.xor(c.not_(b.wires[i]), carry)
        carry = c.xor(c.and_(ax, bx), carry)
    return carry


def lt(c: Circuit, a: Bus, b: Bus) -> int:
    return c.not_(ge(c, a, b))


def mux(c: Circuit, sel: int, a: Bus, b: Bus) -> Bus:
    """sel ? a : b, bitwise ((a ^ b) & sel) ^ b: W AND gates."""
    if a.width != b.width:
        raise CircuitError("mux: operand widths differ")
    out = []
    for wa, wb in zip(a.wires, b.wires):
        out.append(c.xor(c.and_(c.xor(wa, wb), sel), wb))
    return Bus(tuple(out))


def cond_swap(c: Circuit, sel: int, a: Bus, b: Bus) -> tuple[Bus, Bus]:
    """Swap a and b when sel = 1; exactly one AND per bit pair.

    The second output reuses the masked difference:
        t  = (a ^ b) & sel
        a' = t ^ a,  b' = t ^ b
    """
    if a.width != b.width:
        raise CircuitError("cond_swap: operand widths differ")
    outa = []
    outb = []
    for wa, wb in zip(a.wires, b.wires):
        t = c.and_(c.xor(wa, wb), sel)
        outa.append(c.xor(t, wa))
        outb.append(c.xor(t, wb))
    return Bus(tuple(outa)), Bus(tuple(outb))


def mul(c: Circuit, a: Bus, b: Bus, width: int | None = None) -> Bus:
    """Schoolbook shift-and-add product, truncated to `width` bits.

    Default width is a.width + b.width (exact product).
    """
    if width is None:
        width = a.width + b.width
    zero = c.const(0)
    acc: Bus | None = None
    for i, bit in enumerate(b.wires):
        if i >= width:
            break
        take = min(a.width, width - i)
        part = Bus(
            (zero,) * i
            + tuple(c.and_(a.wires[j], bit) for j in range(take))
        )
        part = zext(c, part, width)
        acc = part if acc is None else add(c, acc, part, width=width)
    if acc is None:
        acc = constant_bus(c, 0, width)
    return acc


def mul_const(c: Circuit, a: Bus, k: int, width: int) -> Bus:
    """a * k for a public constant k, as shifted adds (no AND per bit)."""
    if k < 0:
        raise CircuitError("mul_const: negative constant")
    zero = c.const(0)
    acc: Bus | None = None
    pos = 0
    while k:
        if k & 1:
            take = min(a.width, width - pos)
            if take > 0:
                part = zext(c, Bus((zero,) * pos + a.wires[:take]), width)
                acc = part if acc is None else add(c, acc, part, width=width)
        k >>= 1
        pos += 1
    if acc is None:
        acc = constant_bus(c, 0, width)
    return acc


def min_bus(c: Circuit, a: Bus, b: Bus) -> Bus:
    """min(a, b) as ge + mux."""
    if a.width != b.width:
        raise CircuitError("min_bus: operand widths differ")
    sel = ge(c, a, b)  # a >= b -> take b
    return mux(c, sel, b, a)


def prefix_sums(c: Circuit, values: list[Bus], width: int) -> list[Bus]:
    """Running sums out[j] = v0 + ... + vj, all at the given width."""
    if not values:
        return []
    out = [zext(c, values[0], width)]
    for v in values[1:]:
        out.append(add(c, out[-1], v, width=width))
    return out


# ------------------------------------------------------- sorting network


def batcher_pairs(n: int) -> list[tuple[int, int]]:
    """Comparator list of Batcher's odd-even mergesort for any n.

    Non-recursive form; each pair (i, j) means compare-exchange into
    ascending order.  Comparator count is O(n log^2 n) and depends only
    on n.
    """
    pairs: list[tuple[int, int]] = []
    p = 1
    while p < n:
        k = p
        while k >= 1:
            j = k % p
            while j + k < n:
                for i in range(min(k, n - j - k)):
                    if (i + j) // (2 * p) == (i + j + k) // (2 * p):
                        pairs.append((i + j, i + j + k))
                j += 2 * k
            k //= 2
        p *= 2
    return pairs


def sort_network(
    c: Circuit,
    records: list[Bus],
    key_lo: int = 0,
    key_hi: int | None = None,
) -> list[Bus]:
    """Sort equal-width records ascending by the key slice of each bus.

    Descending orders are realized by complementing the relevant key
    field before sorting (unsigned complement reverses the order).
    The comparator count is data-independent: batcher_pairs(len(records)).
    """
    if not records:
        return []
    w = records[0].width
    for r in records:
        if r.width != w:
            raise CircuitError("sort_network: records must share a width")
    hi = w if key_hi is None else key_hi
    recs = list(records)
    for i, j in batcher_pairs(len(recs)):
        ki = Bus(recs[i].wires[key_lo:hi])
        kj = Bus(recs[j].wires[key_lo:hi])
        swap = c.not_(ge(c, kj, ki))  # key_i > key_j
        recs[i], recs[j] = cond_swap(c, swap, recs[i], recs[j])
    return recs


# ------------------------------------------------------------ evaluation


def evaluate_many(
    circuit: Circuit, inputs: dict[str, list[int]]
) -> dict[str, list[int]]:
    """Bit-sliced clear evaluation of many instances at once.

    Every wire carries an int whose bit i is the wire's value in
    instance i, so XOR/AND over all instances are single big-int ops.
    """
    missing = set(circuit.input_buses) - set(inputs)
    if missing:
        raise CircuitError(f"missing inputs: {sorted(missing)}")
    extra = set(inputs) - set(circuit.input_buses)
    if extra:
        raise CircuitError(f"unknown inputs: {sorted(extra)}")
    counts = {len(v) for v in inputs.values()} or {0}
    if len(counts) != 1:
        raise CircuitError("instance counts differ between buses")
    n = counts.pop()
    full = (1 << n) - 1

    vals = [0] * circuit.n_wires
    for name, xs in inputs.items():
        bus = circuit.input_buses[name]
        for x in xs:
            if x < 0 or x >> bus.width:
                raise CircuitError(f"value {x} does not fit bus {name!r}")
        for pos, wire in enumerate(bus.wires):
            acc = 0
            for inst, x in enumerate(xs):
                acc |= ((x >> pos) & 1) << inst
            vals[wire] = acc

    kinds = circuit.kinds
    arg_a = circuit.arg_a
    arg_b = circuit.arg_b
    for w in range(circuit.n_wires):
        k = kinds[w]
        if k == XOR:
            vals[w] = vals[arg_a[w]] ^ vals[arg_b[w]]
        elif k == AND:
            vals[w] = vals[arg_a[w]] & vals[arg_b[w]]
        elif k == CONST:
            vals[w] = full if arg_a[w] else 0

    out: dict[str, list[int]] = {}
    for name, bus in circuit.output_buses.items():
        res = [0] * n
        for pos, wire in enumerate(bus.wires):
            v = vals[wire]
            for inst in range(n):
                res[inst] |= ((v >> inst) & 1) << pos
        out[name] = res
    return out


def evaluate(circuit: Circuit, inputs: dict[str, int]) -> dict[str, int]:
    """Clear evaluation of a single instance; reference for all tests."""
    many = evaluate_many(circuit, {k: [v] for k, v in inputs.items()})
    return {k: v[0] for k, v in many.items()}
