"""Command-line front end.

Subcommands: ``simulate`` (protocol runs), ``attack`` (Monte-Carlo
detection studies), ``plan`` (controller distribution layouts), ``tables``
(exhaustive verification of the two- and three-controller outcome tables).

Machine output is line-delimited JSON with a ``schema_version`` field,
written to stdout; logs go to stderr.  Identical flags plus an identical
seed produce byte-identical records (use ``--no-timing`` to zero the one
wall-clock field).  Exit codes: 0 success, 1 usage error, 2 protocol abort
or failed verification.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from .adversary import AttackKind, AttackStrategy, TargetPhase, detection_stats
from .multictrl import SHARED_PAIR_REFERENCE, distribution_plan, run_swapping, shared_pair_from_outcomes, swap_schedule
from .protocol import PauliOp, ProtocolConfig, efficiency, run_cqsc
from .sim import BellKind

SCHEMA_VERSION = 1

_CONFIG_KEYS = {
    "controllers", "message", "triples", "check_fraction", "decoys",
    "threshold", "seed", "format", "attack", "target", "trials",
    "message_bits", "no_timing", "events",
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the exit-code contract reserves 2 for
    # protocol aborts, so usage problems must map to 1 instead.
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="cqsc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--controllers", type=int, default=None, help="number of trusted controllers (default 1)")
        p.add_argument("--message", type=str, default=None, help="bit string or 0x-prefixed hex payload")
        p.add_argument("--triples", type=int, default=None, help="GHZ-like triples to prepare (default: sized to the message)")
        p.add_argument("--check-fraction", type=float, default=None, dest="check_fraction", help="fraction sampled by the first eavesdrop check (default 0.5)")
        p.add_argument("--decoys", type=int, default=None, help="decoy photons in the encoded sequence (default 16)")
        p.add_argument("--threshold", type=float, default=None, help="abort threshold on either error rate (default 0.05)")
        p.add_argument("--seed", type=int, default=None, help="64-bit run seed (default 0)")
        p.add_argument("--format", choices=("text", "json", "csv"), default=None, help="output format (default text)")
        p.add_argument("--config", type=str, default=None, help="JSON config file; explicit flags override it")
        p.add_argument("--no-timing", action="store_true", default=None, dest="no_timing", help="zero the timing field for byte-stable output")

    p_sim = sub.add_parser("simulate", help="run the protocol end to end")
    common(p_sim)
    p_sim.add_argument("--events", action="store_true", default=None,
                       help="write the classical-traffic event log to stderr")

    p_att = sub.add_parser("attack", help="Monte-Carlo detection statistics for an eavesdropping strategy")
    common(p_att)
    p_att.add_argument("--attack", choices=("intercept", "measure", "entangle"), default=None, help="attack family")
    p_att.add_argument("--target", choices=("distribution", "return", "both"), default=None, help="attacked transmission (default distribution)")
    p_att.add_argument("--trials", type=int, default=None, help="number of independent runs (default 1000)")
    p_att.add_argument("--message-bits", type=int, default=None, dest="message_bits", help="random message bits per trial (default 8)")

    p_plan = sub.add_parser("plan", help="print the particle distribution plan and swap schedule")
    common(p_plan)

    p_tab = sub.add_parser("tables", help="verify the controller outcome tables row by row")
    common(p_tab)
    return parser


_DEFAULTS = {
    "controllers": 1,
    "message": "",
    "triples": None,
    "check_fraction": 0.5,
    "decoys": 16,
    "threshold": 0.05,
    "seed": 0,
    "format": "text",
    "attack": None,
    "target": "distribution",
    "trials": 1000,
    "message_bits": 8,
    "no_timing": False,
    "events": False,
}


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _UsageError(f"cannot read config file {path}: {exc}")
    if not isinstance(data, dict):
        raise _UsageError("config file must hold a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise _UsageError(f"unknown config keys: {sorted(unknown)}")
    return data


def _resolve(args: argparse.Namespace) -> dict:
    """Layer defaults < config file < explicit flags."""
    file_values = _load_config_file(args.config) if getattr(args, "config", None) else {}
    settings = dict(_DEFAULTS)
    settings.update(file_values)
    for key in _DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = flag
    return settings


def _parse_message(raw: str) -> str:
    if raw.startswith(("0x", "0X")):
        digits = raw[2:]
        if not digits or set(digits.lower()) - set("0123456789abcdef"):
            raise _UsageError(f"malformed hex message {raw!r}")
        return "".join(format(int(d, 16), "04b") for d in digits)
    if set(raw) - {"0", "1"}:
        raise _UsageError(f"malformed message {raw!r}: expected bits or 0x-prefixed hex")
    if len(raw) % 2:
        raise _UsageError("message length must be even (two bits per pair)")
    return raw


def _default_triples(message_bits: int, check_fraction: float) -> int:
    needed = (message_bits + 1) // 2
    n = max(2, 2 * needed + 2)
    while n - min(n, max(1, round(check_fraction * n))) < needed:
        n += 1
    return n


def _emit(record: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(record, sort_keys=True) + "\n")
    elif fmt == "csv":
        flat = _flatten(record)
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(flat.keys())
        writer.writerow(flat.values())
    else:
        for key, value in sorted(_flatten(record).items()):
            out.write(f"{key}: {value}\n")


def _flatten(record: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, prefix=f"{name}."))
        elif isinstance(value, (list, tuple)):
            flat[name] = json.dumps(value)
        else:
            flat[name] = value
    return flat


def _protocol_config(settings: dict, n_triples: int) -> ProtocolConfig:
    return ProtocolConfig(
        n_triples=n_triples,
        check_fraction=settings["check_fraction"],
        n_decoys=settings["decoys"],
        error_threshold=settings["threshold"],
        seed=settings["seed"],
    )


_ATTACK_KINDS = {
    "intercept": AttackKind.INTERCEPT_RESEND,
    "measure": AttackKind.MEASURE_RESEND,
    "entangle": AttackKind.ENTANGLE_MEASURE,
}

_TARGET_PHASES = {
    "distribution": TargetPhase.DISTRIBUTION,
    "return": TargetPhase.ENCODED_RETURN,
    "both": TargetPhase.BOTH,
}


def _strategy_from(settings: dict) -> AttackStrategy | None:
    name = settings["attack"]
    if name is None:
        return None
    if name not in _ATTACK_KINDS:
        raise _UsageError(f"unknown attack {name!r}: choose from {sorted(_ATTACK_KINDS)}")
    if settings["target"] not in _TARGET_PHASES:
        raise _UsageError(f"unknown target phase {settings['target']!r}")
    return AttackStrategy(_ATTACK_KINDS[name], _TARGET_PHASES[settings["target"]])


def _cmd_simulate(settings: dict, out) -> int:
    if settings["controllers"] < 1:
        raise _UsageError("--controllers must be at least 1")
    message = _parse_message(settings["message"])
    n_triples = settings["triples"] or _default_triples(len(message), settings["check_fraction"])
    config = _protocol_config(settings, n_triples)
    attacker = _strategy_from(settings)
    started = time.perf_counter()
    try:
        transcript = run_cqsc(config, message, attacker=attacker,
                              n_controllers=settings["controllers"])
    except ValueError as exc:
        raise _UsageError(str(exc))
    elapsed_ms = 0.0 if settings["no_timing"] else (time.perf_counter() - started) * 1000.0
    if settings["events"]:
        for line in transcript.event_lines():
            print(line, file=sys.stderr)
    record = {
        "schema_version": SCHEMA_VERSION,
        "record": "run_summary",
        "seed": config.seed,
        "controllers": settings["controllers"],
        "config": {
            "triples": config.n_triples,
            "check_fraction": config.check_fraction,
            "decoys": config.n_decoys,
            "threshold": config.error_threshold,
            "attack": settings["attack"],
        },
        "message": message,
        "decoded_message": transcript.decoded_message,
        "first_check_error_rate": transcript.first_check_error_rate,
        "decoy_error_rate": transcript.decoy_error_rate,
        "charlie_bits": transcript.charlie_bits,
        "release_codes": list(transcript.release_codes) if transcript.release_codes else None,
        "bell_codes": transcript.bell_code_string,
        "aborted_at": transcript.aborted_at,
        "timing_ms": elapsed_ms,
    }
    _emit(record, settings["format"], out)
    if transcript.aborted_at is not None or transcript.decoded_message != message:
        return 2
    return 0


def _cmd_attack(settings: dict, out) -> int:
    if settings["attack"] is None:
        raise _UsageError("--attack is required (intercept, measure, or entangle)")
    if settings["controllers"] < 1:
        raise _UsageError("--controllers must be at least 1")
    if settings["trials"] < 1:
        raise _UsageError("--trials must be at least 1")
    strategy = _strategy_from(settings)
    message_bits = settings["message_bits"]
    n_triples = settings["triples"] or _default_triples(message_bits, settings["check_fraction"])
    config = _protocol_config(settings, n_triples)
    started = time.perf_counter()
    report = detection_stats(strategy, config, settings["trials"],
                             rng=np.random.default_rng(config.seed),
                             message_bits=message_bits,
                             n_controllers=settings["controllers"])
    elapsed_ms = 0.0 if settings["no_timing"] else (time.perf_counter() - started) * 1000.0
    record = {
        "schema_version": SCHEMA_VERSION,
        "record": "detection_report",
        "seed": config.seed,
        "config": {
            "triples": config.n_triples,
            "check_fraction": config.check_fraction,
            "decoys": config.n_decoys,
            "threshold": config.error_threshold,
            "message_bits": message_bits,
            "controllers": settings["controllers"],
        },
        **report.to_dict(),
        "timing_ms": elapsed_ms,
    }
    _emit(record, settings["format"], out)
    return 0


def _cmd_plan(settings: dict, out) -> int:
    n = settings["controllers"]
    if n < 1:
        raise _UsageError("--controllers must be at least 1")
    plan = distribution_plan(n)
    schedule = swap_schedule(plan)
    record = {
        "schema_version": SCHEMA_VERSION,
        "record": "distribution_plan",
        "controllers": n,
        "ghz_count": len(plan.triples),
        "triples": [[t.name for t in triple] for triple in plan.triples],
        "holders": plan.holders,
        "z_measurements": [[holder, tag.name] for holder, tag in schedule.z_measurements],
        "bell_measurements": [[holder, [pair[0].name, pair[1].name]]
                              for holder, pair in schedule.bell_measurements],
    }
    if settings["format"] == "text":
        out.write(f"controllers: {n}\n")
        out.write(f"ghz-like states required: {len(plan.triples)}\n")
        for i, triple in enumerate(plan.triples, start=1):
            names = ", ".join(t.name for t in triple)
            out.write(f"triple {i}: ({names})\n")
        out.write("holders: " + ", ".join(f"{k}->{v}" for k, v in sorted(plan.holders.items())) + "\n")
        for holder, tag in schedule.z_measurements:
            out.write(f"z measurement: {holder} on {tag.name}\n")
        for holder, pair in schedule.bell_measurements:
            out.write(f"bell measurement: {holder} on ({pair[0].name}, {pair[1].name})\n")
    else:
        _emit(record, settings["format"], out)
    return 0


def _cmd_tables(settings: dict, out) -> int:
    rng = np.random.default_rng(settings["seed"])
    rows = []
    failures = 0
    for n in (2, 3):
        plan = distribution_plan(n)
        reference = SHARED_PAIR_REFERENCE[n]
        for z_bits in ((0, 0), (0, 1), (1, 0), (1, 1)):
            for outcome in BellKind:
                simulated, log = run_swapping(plan, rng, z_bits=list(z_bits),
                                              bell_outcomes=[outcome])
                resolved = shared_pair_from_outcomes(plan, log.z_bits, log.bell_outcomes)
                expected = reference[z_bits][outcome]
                ok = simulated == resolved == expected
                failures += 0 if ok else 1
                rows.append({
                    "controllers": n,
                    "z_bits": list(z_bits),
                    "bell_outcome": outcome.code,
                    "expected": expected.symbol,
                    "simulated": simulated.symbol,
                    "resolver": resolved.symbol,
                    "pass": ok,
                })
    encoding_map = {op.message: op.gate_kind for op in PauliOp}
    record = {
        "schema_version": SCHEMA_VERSION,
        "record": "table_verification",
        "rows": rows,
        "passed": len(rows) - failures,
        "failed": failures,
        "encoding_map": encoding_map,
        "efficiency_example": efficiency(2, 3, 1),
    }
    if settings["format"] == "text":
        for row in rows:
            verdict = "pass" if row["pass"] else "FAIL"
            out.write(
                f"controllers={row['controllers']} z={row['z_bits']} "
                f"bell={row['bell_outcome']} expected={row['expected']} "
                f"simulated={row['simulated']} resolver={row['resolver']} {verdict}\n")
        out.write(f"rows passed: {record['passed']}/{len(rows)}\n")
        out.write("encoding map: " + ", ".join(f"{code}->{op}" for code, op in encoding_map.items()) + "\n")
        out.write(f"efficiency(2,3,1): {record['efficiency_example']}\n")
    else:
        _emit(record, settings["format"], out)
    return 0 if failures == 0 else 2


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        settings = _resolve(args)
        command = {
            "simulate": _cmd_simulate,
            "attack": _cmd_attack,
            "plan": _cmd_plan,
            "tables": _cmd_tables,
        }[args.command]
        return command(settings, sys.stdout)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    raise SystemExit(main())
