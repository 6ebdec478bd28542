"""Batch command-line surface over JSONL streams.

Subcommands: score, mask, advantage, check-format, simulate,
anchor-calibrate. Records stream line by line in bounded memory and
outputs preserve input order. Exit status: 0 on full success, 1 when any
record-level error was reported (processing continues), 2 on
configuration or provider failure (aborts).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .core import RewardConfig, parse_rollout_record, validate_config
from .csg import SectionMode
from .dynamics import StrategyProfile, simulate_grpo_selection
from .eaig import entropy_mask
from .errors import (
    GroupTooSmallError,
    InvalidConfigError,
    MalformedLineError,
    MissingFieldError,
    MoriError,
    ProviderUnavailableError,
)
from .grpo import group_advantages
from .providers import RemoteProvider
from .scoring import builtin_provider_for, reasoning_length_of, score_record
from .shaping import format_valid, suggest_anchor_length

PROVIDER_ENV = "MORI_PROVIDER_URL"

EXIT_OK = 0
EXIT_RECORD_ERRORS = 1
EXIT_FATAL = 2


def _fmt(value: float, golden: bool) -> float:
    return value if golden else float(f"{value:.6g}")


def _open_input(path: str):
    if path == "-":
        return sys.stdin
    return open(path, "r", encoding="utf-8")


def _open_output(path: str):
    if path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8")


def _diagnostic(stream, line_no: int, err: Exception, record_id: str | None = None) -> None:
    code = err.code if isinstance(err, MoriError) else "ERROR"
    payload = {"line": line_no, "error": code, "message": str(err)}
    if record_id is not None:
        payload["id"] = record_id
    print(json.dumps(payload, ensure_ascii=False), file=stream)


def _load_config(path: str | None) -> RewardConfig:
    if path is None:
        return validate_config({})
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InvalidConfigError(f"config {path} must be a JSON object")
    return validate_config(raw)


def _resolve_provider(selector: str | None):
    """Return None for the per-record builtin provider, or a RemoteProvider."""
    if selector is None:
        selector = os.environ.get(PROVIDER_ENV, "builtin")
    if selector == "builtin":
        return None
    if selector.startswith("http://") or selector.startswith("https://"):
        return RemoteProvider(selector)
    raise InvalidConfigError(f"provider must be 'builtin' or an http(s) URL, got {selector!r}")


def _cmd_score(args, config: RewardConfig, instream, outstream, errstream) -> int:
    remote = _resolve_provider(args.provider)
    section_mode = SectionMode(args.section_mode)
    had_errors = False
    for line_no, line in enumerate(instream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = parse_rollout_record(line)
        except MoriError as err:
            had_errors = True
            _diagnostic(errstream, line_no, err)
            continue
        provider = remote if remote is not None else builtin_provider_for(record)
        try:
            report = score_record(record, provider, config, section_mode, args.length_unit)
        except ProviderUnavailableError:
            raise
        except MoriError as err:
            had_errors = True
            _diagnostic(errstream, line_no, err, record.id)
            continue
        print(report.to_jsonl(precision=None if args.golden else 6), file=outstream)
    return EXIT_RECORD_ERRORS if had_errors else EXIT_OK


def _cmd_mask(args, config: RewardConfig, instream, outstream, errstream) -> int:
    remote = _resolve_provider(args.provider)
    had_errors = False
    for line_no, line in enumerate(instream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = parse_rollout_record(line)
        except MoriError as err:
            had_errors = True
            _diagnostic(errstream, line_no, err)
            continue
        provider = remote if remote is not None else builtin_provider_for(record)
        try:
            entropies = provider.token_entropy(record.query, record.ground_truth_method)
            mask = entropy_mask(entropies, config.entropy_quantile)
        except ProviderUnavailableError:
            raise
        except MoriError as err:
            had_errors = True
            _diagnostic(errstream, line_no, err, record.id)
            continue
        payload = {
            "id": record.id,
            "entropies": [_fmt(h, args.golden) for h in entropies.entropies],
            "flags": list(mask.flags),
            "selected_count": mask.selected_count,
        }
        print(json.dumps(payload, ensure_ascii=False), file=outstream)
    return EXIT_RECORD_ERRORS if had_errors else EXIT_OK


def _cmd_advantage(args, config: RewardConfig, instream, outstream, errstream) -> int:
    had_errors = False
    groups: dict[str, list[tuple[str | None, float]]] = {}
    order: list[str] = []
    for line_no, line in enumerate(instream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            had_errors = True
            _diagnostic(errstream, line_no, MalformedLineError(str(exc)))
            continue
        if not isinstance(obj, dict):
            had_errors = True
            _diagnostic(errstream, line_no, MalformedLineError("line is not a JSON object"))
            continue
        group_id = obj.get("group_id")
        reward = obj.get("reward", obj.get("r_total"))
        if group_id is None:
            had_errors = True
            _diagnostic(errstream, line_no, MissingFieldError("group_id required"), obj.get("id"))
            continue
        if not isinstance(reward, (int, float)) or isinstance(reward, bool):
            had_errors = True
            _diagnostic(errstream, line_no, MissingFieldError("reward (or r_total) required"), obj.get("id"))
            continue
        if group_id not in groups:
            groups[group_id] = []
            order.append(group_id)
        groups[group_id].append((obj.get("id"), float(reward)))
    for group_id in order:
        members = groups[group_id]
        try:
            advantages = group_advantages([r for _, r in members])
        except MoriError as err:
            had_errors = True
            _diagnostic(errstream, 0, err, group_id)
            continue
        payload = {
            "group_id": group_id,
            "ids": [i for i, _ in members],
            "advantages": [_fmt(a, args.golden) for a in advantages.advantages],
            "mean": _fmt(advantages.mean, args.golden),
            "std": _fmt(advantages.std, args.golden),
        }
        print(json.dumps(payload, ensure_ascii=False), file=outstream)
    return EXIT_RECORD_ERRORS if had_errors else EXIT_OK


def _cmd_check_format(args, config: RewardConfig, instream, outstream, errstream) -> int:
    had_errors = False
    for line_no, line in enumerate(instream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = parse_rollout_record(line)
        except MoriError as err:
            had_errors = True
            _diagnostic(errstream, line_no, err)
            continue
        verdict = format_valid(record.reasoning, config)
        payload = {"id": record.id, "valid": verdict.valid, "reasons": list(verdict.reasons)}
        print(json.dumps(payload, ensure_ascii=False), file=outstream)
    return EXIT_RECORD_ERRORS if had_errors else EXIT_OK


def _cmd_simulate(args, config: RewardConfig, instream, outstream, errstream) -> int:
    had_errors = False
    profiles = []
    for line_no, line in enumerate(instream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            profiles.append(
                StrategyProfile(
                    name=str(obj["name"]),
                    reward_mean=float(obj["reward_mean"]),
                    reward_std=float(obj["reward_std"]),
                    cot_length=int(obj["cot_length"]),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            had_errors = True
            _diagnostic(errstream, line_no, MalformedLineError(f"bad strategy profile: {exc}"))
    try:
        trace = simulate_grpo_selection(
            profiles,
            steps=args.steps,
            group_size=args.group_size or config.group_size,
            anchoring=args.anchoring == "on",
            config=config,
            seed=args.seed if args.seed is not None else 0,
        )
    except (GroupTooSmallError, InvalidConfigError) as err:
        _diagnostic(errstream, 0, err)
        return EXIT_FATAL
    except ValueError as exc:
        _diagnostic(errstream, 0, InvalidConfigError(str(exc)))
        return EXIT_FATAL
    for line in trace.iter_jsonl():
        print(line, file=outstream)
    return EXIT_RECORD_ERRORS if had_errors else EXIT_OK


def _cmd_anchor_calibrate(args, config: RewardConfig, instream, outstream, errstream) -> int:
    remote = _resolve_provider(args.provider)
    had_errors = False
    lengths = []
    for line_no, line in enumerate(instream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = parse_rollout_record(line)
        except MoriError as err:
            had_errors = True
            _diagnostic(errstream, line_no, err)
            continue
        provider = remote if remote is not None else builtin_provider_for(record)
        lengths.append(reasoning_length_of(record, provider, args.length_unit))
    if not lengths:
        _diagnostic(errstream, 0, InvalidConfigError("no records to calibrate on"))
        return EXIT_FATAL
    payload = {
        "anchor_length": suggest_anchor_length(lengths),
        "length_unit": args.length_unit,
        "records": len(lengths),
    }
    print(json.dumps(payload, ensure_ascii=False), file=outstream)
    return EXIT_RECORD_ERRORS if had_errors else EXIT_OK


_COMMANDS = {
    "score": _cmd_score,
    "mask": _cmd_mask,
    "advantage": _cmd_advantage,
    "check-format": _cmd_check_format,
    "simulate": _cmd_simulate,
    "anchor-calibrate": _cmd_anchor_calibrate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mori", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", default="-", help="input JSONL path, - for stdin")
        p.add_argument("--output", default="-", help="output JSONL path, - for stdout")
        p.add_argument("--config", default=None, help="JSON reward config path")
        p.add_argument(
            "--provider",
            default=None,
            help=f"'builtin' or a provider URL; falls back to ${PROVIDER_ENV}",
        )
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--section-mode", choices=("full", "overview"), default="overview")
        p.add_argument("--length-unit", choices=("tokens", "chars"), default="tokens")
        p.add_argument("--anchoring", choices=("on", "off"), default="on")
        p.add_argument("--golden", action="store_true", help="full-precision numeric output")
        if name == "simulate":
            p.add_argument("--steps", type=int, default=1000)
            p.add_argument("--group-size", type=int, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    errstream = sys.stderr
    try:
        config = _load_config(args.config)
    except InvalidConfigError as err:
        _diagnostic(errstream, 0, err)
        return EXIT_FATAL

    instream = outstream = None
    try:
        try:
            instream = _open_input(args.input)
        except OSError as exc:
            _diagnostic(errstream, 0, InvalidConfigError(f"cannot open input: {exc}"))
            return EXIT_FATAL
        try:
            outstream = _open_output(args.output)
        except OSError as exc:
            _diagnostic(errstream, 0, InvalidConfigError(f"cannot open output: {exc}"))
            return EXIT_FATAL
        try:
            return _COMMANDS[args.command](args, config, instream, outstream, errstream)
        except (ProviderUnavailableError, InvalidConfigError) as err:
            _diagnostic(errstream, 0, err)
            return EXIT_FATAL
    finally:
        if instream is not None and instream is not sys.stdin:
            instream.close()
        if outstream is not None and outstream is not sys.stdout:
            outstream.close()


if __name__ == "__main__":
    sys.exit(main())
