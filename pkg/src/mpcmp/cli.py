"""Command-line entry point: ``mpcmp gen | run | verify | bench``.

Exit codes: 0 ok, 1 verification failure, 2 usage error, 3 tape error,
4 protocol abort.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import random
import sys
from pathlib import Path
from typing import Sequence

from . import session as sess
from .abb import Tamper
from .errors import Abort, DomainTooSmall, InvalidArgument, TapeError, TransportError
from .harness import SUITES, reports_csv, run_suite
from .tapes import NonceRegistry, REGISTRY_NAME, TapeFile, load_tape, ring_header, tape_path, write_tape
from .transport import NetProfile, read_endpoints

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_TAPE, EXIT_ABORT = 0, 1, 2, 3, 4

CSV_COLUMNS = (
    "protocol", "domain", "param", "security", "parties", "n_branch",
    "batch", "rounds", "bytes_per_party", "modeled_ms", "wall_ms", "seed",
)

TAPE_KIND = {
    "ltbits_p": "power",
    "ltbits_2n": "prefix",
    "prefix_and": "prefix",
    "and_m": "and",
    "msb_p": "msb_p",
    "msb_2k": "msb_2k",
}
MASKED_INPUTS = ("ltbits_2n", "prefix_and", "and_m")


class UsageError(Exception):
    pass


# -- parameters --------------------------------------------------------------------


def _seed(value) -> int:
    if value is None or value == "":
        env = os.environ.get("MPCMP_SEED")
        if env:
            return int(env)
        return random.SystemRandom().getrandbits(32)
    return int(value)


def _params(args, protocol: str | None = None, n_branch: int | None = None, active: bool | None = None) -> sess.Params:
    protocol = protocol or args.protocol
    if protocol is None:
        raise UsageError("--protocol is required")
    active = (args.security == "active") if active is None else active
    return sess.Params(
        protocol,
        n_parties=args.parties,
        active=active,
        p=args.prime,
        ell=args.ell,
        k=args.k,
        n_branch=n_branch if n_branch is not None else args.branch_single,
        s=args.sigma,
    )


def _domain(params: sess.Params) -> tuple[str, int]:
    if params.protocol in ("ltbits_p", "msb_p"):
        return "Fp", params.p
    if params.protocol == "msb_2k":
        return "Z2k", params.k
    return "F2", params.ell


def _int_list(text: str) -> list[int]:
    """``"2..10"``, ``"1,10,100"`` or a mix; empty text gives an empty list."""
    out: list[int] = []
    for part in (text or "").split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _parse_inputs(params: sess.Params, text: str | None, batch: int, rng: random.Random) -> list:
    proto = params.protocol
    if text:
        items = [t.strip() for t in text.split(",") if t.strip()]
        out = []
        for it in items:
            if proto in ("ltbits_p", "ltbits_2n"):
                x, _, R = it.partition(":")
                out.append((int(x, 0), int(R, 0)))
            elif proto in ("prefix_and", "and_m"):
                out.append([int(c) for c in it])
            else:
                out.append(int(it, 0))
        return out
    out = []
    for _ in range(batch):
        if proto in ("ltbits_p", "ltbits_2n"):
            out.append((rng.getrandbits(params.ell), rng.getrandbits(params.ell)))
        elif proto in ("prefix_and", "and_m"):
            out.append([int(rng.random() < 0.8) for _ in range(params.ell)])
        elif proto == "msb_p":
            out.append(rng.randrange(params.p))
        else:
            out.append(rng.getrandbits(params.k))
    return out


def _row(params: sess.Params, batch: int, report, seed: int) -> dict:
    domain, param = _domain(params)
    return {
        "protocol": params.protocol,
        "domain": domain,
        "param": param,
        "security": "active" if params.active else "passive",
        "parties": params.n_parties,
        "n_branch": params.n_branch,
        "batch": batch,
        "rounds": report.rounds,
        "bytes_per_party": report.bytes_sent_per_party,
        "modeled_ms": f"{report.modeled_ms:.3f}",
        "wall_ms": "" if report.wall_ms is None else f"{report.wall_ms:.3f}",
        "seed": seed,
    }


def _csv_text(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _emit_csv(rows: Sequence[dict], path: str | None) -> None:
    text = _csv_text(rows)
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# -- tape files ----------------------------------------------------------------------


def _tape_header(params: sess.Params) -> dict:
    kind = TAPE_KIND[params.protocol]
    if kind == "power":
        return dict(modulus=params.p, ell=params.ell)
    if kind == "prefix":
        return dict(ell=params.ell, n_branch=params.n_branch)
    if kind == "and":
        return dict(ell=params.ell, arity=params.ell)
    if kind == "msb_p":
        return dict(modulus=params.p, ell=params.p.bit_length())
    width, k = ring_header(params.k, params.active, params.s)
    return dict(modulus=width, ell=k, n_branch=params.n_branch)


def _owner_path(directory, protocol: str) -> Path:
    return Path(directory) / f"{protocol}.owner"


def write_session(prep: sess.Preprocessing, directory) -> list[Path]:
    """One tape file per party, plus the input owner's masks when needed."""
    params = prep.params
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    NonceRegistry(d / REGISTRY_NAME).forget(prep.nonce)
    paths = []
    for i in range(params.n_parties):
        tf = TapeFile(
            TAPE_KIND[params.protocol], params.n_parties, i, params.active,
            nonce=prep.nonce, items=prep.tapes[i], alphas=prep.alphas[i], **_tape_header(params),
        )
        path = tape_path(d, params.protocol, i)
        write_tape(tf, path)
        paths.append(path)
    if params.protocol in MASKED_INPUTS:
        lines = ["".join(str(b) for b in sigma) for sigma in prep.owner_masks]
        owner = _owner_path(d, params.protocol)
        owner.write_text("\n".join(lines) + "\n")
        paths.append(owner)
    return paths


def _params_from_tape(tf: TapeFile, protocol: str) -> sess.Params:
    if TAPE_KIND.get(protocol) != tf.protocol:
        raise TapeError(f"{tf.protocol} tape cannot drive {protocol}")
    common = dict(n_parties=tf.n_parties, active=tf.active)
    if tf.protocol == "power":
        return sess.Params(protocol, p=tf.modulus, ell=tf.ell, **common)
    if tf.protocol == "prefix":
        return sess.Params(protocol, ell=tf.ell, n_branch=tf.n_branch, **common)
    if tf.protocol == "and":
        return sess.Params(protocol, ell=tf.arity, **common)
    if tf.protocol == "msb_p":
        return sess.Params(protocol, p=tf.modulus, **common)
    s = tf.modulus - tf.ell if tf.active else 64
    return sess.Params(protocol, k=tf.ell, n_branch=tf.n_branch, s=s, **common)


def _check_against_flags(params: sess.Params, args) -> None:
    wanted = {
        "p": args.prime, "ell": args.ell, "k": args.k,
        "n_branch": args.branch_single if args.branch else None,
        "n_parties": args.parties if args.parties_given else None,
    }
    if args.security_given:
        wanted["active"] = args.security == "active"
    for name, value in wanted.items():
        if value is not None and getattr(params, name) not in (None, value):
            raise TapeError(f"tape has {name}={getattr(params, name)}, configuration asks for {value}")


def read_session(directory, protocol: str | None, args) -> sess.Preprocessing:
    d = Path(directory)
    if protocol is None:
        found = sorted({p.name.split(".p")[0] for p in d.glob("*.p0.tape")})
        if len(found) != 1:
            raise UsageError(f"--protocol needed: tapes for {found or 'nothing'} in {d}")
        protocol = found[0]
    first = tape_path(d, protocol, 0)
    if not first.exists():
        raise TapeError(f"no tapes for {protocol} in {d}")
    head = load_tape(first, 0, registry=None)
    params = _params_from_tape(head, protocol)
    _check_against_flags(params, args)
    # consumption is recorded by the caller once the run is about to start
    files = [load_tape(tape_path(d, protocol, i), i, registry=None) for i in range(head.n_parties)]
    if len({f.nonce for f in files}) != 1 or len({f.batch for f in files}) != 1:
        raise TapeError("tape files come from different dealer sessions")
    owner = []
    if protocol in MASKED_INPUTS:
        path = _owner_path(d, protocol)
        if not path.exists():
            raise TapeError(f"input owner masks missing: {path}")
        owner = [[int(c) for c in line.strip()] for line in path.read_text().split()]
    return sess.Preprocessing(params, [f.items for f in files], [f.alphas for f in files], owner, head.nonce)


# -- commands --------------------------------------------------------------------------


def cmd_gen(args) -> int:
    params = _params(args)
    seed = _seed(args.seed)
    if args.batch_single < 1:
        raise UsageError("--batch must be at least 1")
    prep = sess.preprocess(params, args.batch_single, random.Random(f"dealer:{seed}"))
    directory = args.tapes or "tapes"
    for path in write_session(prep, directory):
        print(path)
    return EXIT_OK


def _tamper_arg(text: str | None):
    if not text:
        return None
    party, open_index, element = (int(v) for v in text.split(":"))
    return party, Tamper(open_index, element)


def cmd_run(args) -> int:
    seed = _seed(args.seed)
    if args.tapes:
        prep = read_session(args.tapes, args.protocol, args)
        params = prep.params
    else:
        params = _params(args)
        prep = sess.preprocess(params, args.batch_single, random.Random(f"dealer:{seed}"))
    inputs = _parse_inputs(params, args.inputs, prep.batch, random.Random(f"inputs:{seed}"))
    jobs = sess.share_inputs(params, prep, inputs, random.Random(f"input:{seed}"))
    if args.tapes:
        registry = NonceRegistry(Path(args.tapes) / REGISTRY_NAME)
        for i in range(params.n_parties):
            registry.mark(prep.nonce, i)
    addresses = read_endpoints(args.endpoints) if args.endpoints else None
    out = sess.execute(params, jobs, args.fabric, _tamper_arg(args.tamper), addresses)
    if args.mode == "share":
        for i, shares in enumerate(out.shares):
            print(f"party {i}: {shares}")
    else:
        for item, value in zip(inputs, out.outputs):
            print(f"{item} -> {value}")
    report = out.report.under(NetProfile.parse(args.net))
    _emit_csv([_row(params, prep.batch, report, seed)], args.csv)
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(SUITES) if not args.suite or "all" in args.suite else args.suite
    for name in names:
        if name not in SUITES:
            raise UsageError(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
    reports = []
    for name in names:
        rep = run_suite(name, args.budget)
        print(rep.line(), flush=True)
        reports.append(rep)
    if args.csv:
        Path(args.csv).write_text(reports_csv(reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


def bench_rows(args) -> list[dict]:
    seed = _seed(args.seed)
    branches = _int_list(args.branch) if args.branch is not None else [2]
    batches = _int_list(args.batch) if args.batch is not None else [1]
    profiles = [NetProfile.parse(t) for t in args.net.split(",") if t.strip()]
    securities = [t.strip() for t in args.security.split(",") if t.strip()]
    rows = []
    for security in securities:
        if security not in ("passive", "active"):
            raise UsageError(f"unknown security mode {security!r}")
        for n in branches:
            params = _params(args, n_branch=n, active=security == "active")
            for batch in batches:
                prep = sess.preprocess(params, batch, random.Random(f"dealer:{seed}"))
                inputs = _parse_inputs(params, None, batch, random.Random(f"inputs:{seed}"))
                jobs = sess.share_inputs(params, prep, inputs, random.Random(f"input:{seed}"))
                out = sess.execute(params, jobs, args.fabric)
                for prof in profiles:
                    row = _row(params, batch, out.report.under(prof), seed)
                    row["profile"] = prof.name
                    row["exact_ms"] = out.report.under(prof).modeled_ms
                    rows.append(row)
    return rows


def argmin_table(rows: Sequence[dict]) -> str:
    """Markdown table marking the modeled-time argmin n per (param, security, profile, batch)."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["protocol"], r["param"], r["security"], r["profile"], r["batch"]), []).append(r)
    lines = [
        "| protocol | param | security | profile | batch | best n | modeled_ms | n=2 modeled_ms | speedup |",
        "|---|---|---|---|---|---|---|---|---|",
    ]
    for (proto, param, security, profile, batch), rs in groups.items():
        best = min(rs, key=lambda r: (r["exact_ms"], r["n_branch"]))
        base = next((r for r in rs if r["n_branch"] == 2), None)
        base_ms = base["exact_ms"] if base else None
        speed = f"{base_ms / best['exact_ms']:.2f}x" if base_ms else ""
        lines.append(
            f"| {proto} | {param} | {security} | {profile} | {batch} | {best['n_branch']} | "
            f"{best['modeled_ms']} | {'' if base_ms is None else base['modeled_ms']} | {speed} |"
        )
    return "\n".join(lines) + "\n"


def cmd_bench(args) -> int:
    rows = bench_rows(args)
    _emit_csv([{k: r[k] for k in CSV_COLUMNS} for r in rows], args.csv)
    if rows:
        table = argmin_table(rows)
        if args.md:
            Path(args.md).write_text(table)
        else:
            sys.stdout.write("\n" + table)
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, bench: bool = False) -> None:
    p.add_argument("--config", help="key=value file; command-line flags win")
    p.add_argument("--protocol", choices=sess.PROTOCOLS, default="msb_2k" if bench else None)
    p.add_argument("--prime", type=int, help="prime p for ltbits_p / msb_p")
    p.add_argument("--k", type=int, help="ring width k for msb_2k")
    p.add_argument("--ell", type=int, help="bit length (comparisons, prefix) or AND arity")
    p.add_argument("--sigma", type=int, default=64, help="statistical security s for active Z_2^k")
    p.add_argument("--parties", type=int, default=3)
    p.add_argument("--seed", help="fixes all randomness; falls back to $MPCMP_SEED")
    p.add_argument("--fabric", choices=("sim", "tcp"), default="sim")
    p.add_argument("--csv", help="write CSV here instead of stdout")
    if bench:
        p.add_argument("--security", default="passive", help="passive, active or both comma-separated")
        p.add_argument("--branch", default=None, help="branching factors, e.g. 2..10")
        p.add_argument("--batch", default=None, help="batch sizes, e.g. 1,10,100")
        p.add_argument("--net", default="wan", help="profiles, e.g. lan,wan or custom:50:1e9")
        p.add_argument("--md", help="write the argmin markdown table here")
    else:
        p.add_argument("--security", choices=("passive", "active"), default="passive")
        p.add_argument("--branch", type=int, default=None, help="prefix-tree branching factor n")
        p.add_argument("--batch", type=int, default=None, help="batch size (run: defaults to the number of --inputs)")
        p.add_argument("--net", default="lan", help="lan, wan or custom:<rtt ms>:<bits/s>")
        p.add_argument("--tapes", help="tape directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mpcmp", description="Dealer-assisted comparison and MSB protocols")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate per-party tape files")
    _add_common(gen)
    gen.set_defaults(func=cmd_gen)

    run = sub.add_parser("run", help="execute a batch and print outputs plus a CSV row")
    _add_common(run)
    run.add_argument("--endpoints", help="host:port per line, party order (tcp fabric)")
    run.add_argument("--inputs", help="comma list: x:R for comparisons, bit strings, or integers")
    run.add_argument("--mode", choices=("test", "share"), default="test")
    run.add_argument("--tamper", help="PARTY:OPEN:ELEMENT fault injection (active mode)")
    run.set_defaults(func=cmd_run)

    verify = sub.add_parser("verify", help="run verification suites")
    verify.add_argument("--config")
    verify.add_argument("--suite", action="append", help=f"one of: all, {', '.join(SUITES)}")
    verify.add_argument("--budget", type=int, default=None, help="max cases per suite")
    verify.add_argument("--csv")
    verify.set_defaults(func=cmd_verify)

    bench = sub.add_parser("bench", help="sweep parameters and tabulate cost")
    _add_common(bench, bench=True)
    bench.set_defaults(func=cmd_bench)
    return parser


def read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    flags = {a.split("=", 1)[0] for a in argv if a.startswith("--")}
    if getattr(args, "config", None):
        cfg = read_config(args.config)
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subparser._actions}
        unknown = set(cfg) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        subparser.set_defaults(**cfg)
        args = parser.parse_args(argv)
        flags |= {f"--{k}" for k in cfg}
    args.parties_given = "--parties" in flags
    args.security_given = "--security" in flags
    if args.command in ("gen", "run"):
        args.branch_single = args.branch if args.branch is not None else 2
        args.batch_single = args.batch
        if args.batch_single is None:
            given = getattr(args, "inputs", None)
            args.batch_single = len([t for t in given.split(",") if t.strip()]) if given else 1
    elif args.command == "bench":
        args.branch_single = 2
    return args


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, InvalidArgument, DomainTooSmall, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TapeError as exc:
        print(f"tape error: {exc}", file=sys.stderr)
        return EXIT_TAPE
    except (Abort, TransportError) as exc:
        print(f"abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
