"""Command line front end.

Four subcommands:

    gen      write a random scenario as JSON
    auction  run the clear auction on a scenario file
    run      sweep an experiment grid and write a CSV
    serve    run one party of the two-server protocol over TCP

`serve --role agent` owns a long-lived keypair; the auctioneer seals
the scenario's submissions against the agent's public key (playing the
bidders, which keeps the demo self-contained) and connects.
"""

from __future__ import annotations

import argparse
import json
import random
import socket
import sys
from pathlib import Path

from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey
from cryptography.hazmat.primitives.serialization import (
    Encoding,
    NoEncryption,
    PrivateFormat,
    PublicFormat,
)

from .auction import run_clear_auction
from .bench import (
    ExperimentGrid,
    ScenarioParams,
    emit_csv,
    generate_scenario,
    generate_scenario_with_groups,
    run_experiment,
)
from .protocol import FrameStream, ProtocolError, run_agent, run_auctioneer
from .scenario import Scenario
from .submission import make_submissions


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part)


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(part for part in text.split(",") if part)


def _host_port(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host:
        raise argparse.ArgumentTypeError("expected HOST:PORT")
    return host, int(port)


def _write_out(text: str, out: str | None) -> None:
    if out in (None, "-"):
        print(text)
    else:
        Path(out).write_text(text + "\n")


def cmd_gen(args) -> int:
    params = ScenarioParams(
        sellers=args.sellers,
        buyers=args.buyers,
        bit_length=args.bit_length,
        d_max=args.d_max,
        radius_m=args.radius,
        area_m=args.area,
        profitable_bias=args.profitable_bias,
    )
    if args.min_groups > 0:
        scenario = generate_scenario_with_groups(params, args.seed, args.min_groups)
    else:
        scenario = generate_scenario(params, args.seed)
    _write_out(scenario.to_json(), args.out)
    return 0


def cmd_auction(args) -> int:
    scenario = Scenario.from_json(Path(args.scenario).read_text())
    outcome = run_clear_auction(scenario)
    _write_out(outcome.digest() if args.digest else outcome.to_json(), args.out)
    return 0


def cmd_run(args) -> int:
    grid = ExperimentGrid(
        sellers=args.sellers,
        buyers=args.buyers,
        bit_lengths=args.bit_lengths,
        d_max=args.d_max,
        reps=args.reps,
        seed=args.seed,
        modes=args.modes,
        impls=args.impls,
    )
    rows = run_experiment(grid)
    emit_csv(rows, args.out, mode="x" if args.no_overwrite else "w")
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return 0


def _load_or_create_agent_key(path: str) -> X25519PrivateKey:
    key_file = Path(path)
    if key_file.exists():
        raw = bytes.fromhex(key_file.read_text().strip())
        return X25519PrivateKey.from_private_bytes(raw)
    secret = X25519PrivateKey.generate()
    raw = secret.private_bytes(Encoding.Raw, PrivateFormat.Raw, NoEncryption())
    key_file.write_text(raw.hex() + "\n")
    pub = secret.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
    Path(path + ".pub").write_text(pub.hex() + "\n")
    print(f"new agent key in {path}; public key: {pub.hex()}", file=sys.stderr)
    return secret


def _read_pubkey(text: str) -> bytes:
    candidate = Path(text)
    if candidate.exists():
        text = candidate.read_text().strip()
    raw = bytes.fromhex(text)
    if len(raw) != 32:
        raise ValueError("public key must be 32 bytes of hex")
    return raw


def cmd_serve(args) -> int:
    if args.role == "agent":
        secret = _load_or_create_agent_key(args.key)
        host, port = args.listen
        listener = socket.socket()
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        listener.bind((host, port))
        listener.listen(1)
        print(f"agent listening on {host}:{listener.getsockname()[1]}",
              file=sys.stderr)
        conn, peer = listener.accept()
        print(f"session from {peer[0]}:{peer[1]}", file=sys.stderr)
        stream = FrameStream(conn)
        try:
            outcome, metrics = run_agent(
                stream,
                secret,
                expect_bit_length=args.pin_bit_length,
                expect_mode=args.pin_mode,
            )
        finally:
            stream.close()
            listener.close()
        _write_out(outcome.to_json(), args.out)
        if args.metrics:
            print(json.dumps(metrics.__dict__, default=str), file=sys.stderr)
        return 0

    scenario = Scenario.from_json(Path(args.scenario).read_text())
    agent_pub = _read_pubkey(args.agent_pub)
    own_secret = X25519PrivateKey.generate()
    own_pub = own_secret.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
    sealed = make_submissions(
        scenario, own_pub, agent_pub, random.Random(args.seed)
    )
    host, port = args.connect
    sock = socket.create_connection((host, port))
    stream = FrameStream(sock)
    try:
        outcome, metrics = run_auctioneer(
            stream,
            sealed,
            own_secret,
            radius_m=scenario.radius_m,
            mode=args.mode,
        )
    finally:
        stream.close()
    _write_out(outcome.to_json(), args.out)
    if args.metrics:
        print(json.dumps(metrics.__dict__, default=str), file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specauction",
        description="privacy-preserving multi-channel spectrum auctions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random scenario")
    p.add_argument("--sellers", type=int, required=True)
    p.add_argument("--buyers", type=int, required=True)
    p.add_argument("--bit-length", type=int, default=16)
    p.add_argument("--d-max", type=int, default=4)
    p.add_argument("--radius", type=float, default=400.0)
    p.add_argument("--area", type=float, default=2000.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-groups", type=int, default=0,
                   help="retry seeds until the grouping has this many groups")
    p.add_argument("--profitable-bias", action="store_true",
                   help="narrow the value ranges so trades are likely")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("auction", help="run the clear auction on a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--digest", action="store_true",
                   help="print the outcome digest instead of the JSON")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_auction)

    p = sub.add_parser("run", help="sweep an experiment grid into a CSV")
    p.add_argument("--sellers", type=_int_list, required=True,
                   help="comma list, e.g. 2,4,8")
    p.add_argument("--buyers", type=_int_list, required=True)
    p.add_argument("--bit-lengths", type=_int_list, default=(16,))
    p.add_argument("--d-max", type=int, default=4)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--modes", type=_str_list, default=("original", "improved"))
    p.add_argument("--impls", type=_str_list, default=("clear", "secure"),
                   help="subset of clear,secure,gates")
    p.add_argument("--no-overwrite", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="run one protocol party over TCP")
    p.add_argument("--role", choices=("auctioneer", "agent"), required=True)
    p.add_argument("--listen", type=_host_port, default=("127.0.0.1", 0),
                   help="agent: HOST:PORT to listen on")
    p.add_argument("--connect", type=_host_port,
                   help="auctioneer: HOST:PORT of the agent")
    p.add_argument("--key", default="agent.key",
                   help="agent: private key file (created if missing)")
    p.add_argument("--pin-bit-length", type=int, default=None)
    p.add_argument("--pin-mode", default=None)
    p.add_argument("--scenario", help="auctioneer: scenario JSON file")
    p.add_argument("--agent-pub", help="auctioneer: agent public key (hex or file)")
    p.add_argument("--mode", default="improved",
                   choices=("original", "improved"))
    p.add_argument("--seed", type=int, default=0,
                   help="auctioneer: submission rng seed")
    p.add_argument("--metrics", action="store_true",
                   help="print run metrics to stderr")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve" and args.role == "auctioneer":
        missing = [
            name
            for name, val in (
                ("--connect", args.connect),
                ("--scenario", args.scenario),
                ("--agent-pub", args.agent_pub),
            )
            if not val
        ]
        if missing:
            print(f"auctioneer role needs {', '.join(missing)}", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except ProtocolError as exc:
        print(f"protocol failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
