"""Command line front end for the consensus simulator.

Four subcommands: `run` executes one scenario and writes its transcript,
`sweep` runs batches of randomly scripted adversaries, `acceptance`
executes the acceptance checklist, and `replay` re-runs a serialized
case twice and compares transcripts byte for byte.

Exit codes follow the usual convention: 0 for success, 1 for a run or
sweep that found a violation (or missed an expected outcome), 2 for
configuration errors such as inconsistent parameters or a malformed
scenario file.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
from pathlib import Path
from typing import Any

from .diagnosis import ConfigurationError
from .scripts import crafted_cases
from .sim import (
    ALG1,
    ALG2,
    AdversaryScript,
    ExecutionConfig,
    check_complexity,
    load_case,
    random_inputs,
    random_script,
    run_execution,
    serialize_case,
    sweep,
)

# scenario keys that map straight onto ExecutionConfig fields
_CONFIG_KEYS = (
    "algorithm", "n", "t", "q", "l_bits", "d_bits", "seed",
    "broadcast_coefficient",
)
_INT_KEYS = {"n", "t", "q", "l_bits", "d_bits", "seed", "broadcast_coefficient"}
# accepted spellings for override keys (flag style and field style)
_KEY_ALIASES = {
    "alg": "algorithm",
    "l-bits": "l_bits",
    "d-bits": "d_bits",
    "broadcast-coefficient": "broadcast_coefficient",
}

_DEFAULTS: dict[str, Any] = {
    "algorithm": ALG1,
    "n": 4,
    "t": 1,
    "q": None,
    "l_bits": 2400,
    "d_bits": None,
    "seed": 0,
    "broadcast_coefficient": 1,
}


def choose_d(l_bits: int, n: int, t: int, q: int | None = None) -> int:
    """Default block size for a value of `l_bits` bits.

    The per-generation broadcast overhead is fixed while the number of
    generations is l_bits/D, so total overhead is minimized near
    D = sqrt(l_bits). Returns the smallest multiple of the 8k-bit block
    unit at or above ceil(sqrt(l_bits)), capped at the largest multiple
    that still fits inside l_bits so short values run in one generation.
    """
    k = q if q is not None else n - t
    unit = 8 * k
    if l_bits < unit:
        raise ConfigurationError(
            f"l_bits={l_bits} is smaller than one {unit}-bit block"
        )
    target = math.isqrt(l_bits - 1) + 1
    d = unit * -(-target // unit)
    if d > l_bits:
        d = unit * (l_bits // unit)
    return d


# ------------------------------------------------------------- scenarios


def _coerce(key: str, value: Any) -> Any:
    if key in _INT_KEYS and value is not None:
        return int(value)
    return value


def parse_override(text: str) -> tuple[str, Any]:
    """One KEY=VALUE pair from --override."""
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise ConfigurationError(f"override {text!r} is not KEY=VALUE")
    key = _KEY_ALIASES.get(key, key)
    if key not in _CONFIG_KEYS:
        raise ConfigurationError(f"unknown override key {key!r}")
    if key == "q" and value.lower() in ("none", ""):
        return key, None
    return key, _coerce(key, value)


def flag_overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Config fields taken from dedicated flags plus --override pairs."""
    merged: dict[str, Any] = {}
    for text in getattr(args, "override", None) or []:
        key, value = parse_override(text)
        merged[key] = value
    for attr, key in (
        ("alg", "algorithm"), ("n", "n"), ("t", "t"), ("q", "q"),
        ("l_bits", "l_bits"), ("d_bits", "d_bits"), ("seed", "seed"),
    ):
        value = getattr(args, attr, None)
        if value is not None:
            merged[key] = value
    return merged


def generate_inputs(layout: Any, n: int, l_bits: int, seed: int) -> tuple[str, ...]:
    """Input values from a scenario: explicit hex list or generator."""
    if isinstance(layout, (list, tuple)):
        return tuple(str(v) for v in layout)
    if layout is None:
        layout = {}
    if not isinstance(layout, dict):
        raise ConfigurationError("inputs must be a list of hex or a generator")
    rng = random.Random(layout.get("seed", seed))
    kind = layout.get("generator", "identical")
    size = l_bits // 8
    if kind == "identical":
        return random_inputs(rng, n, l_bits)
    if kind == "shared-prefix":
        sharers = list(range(1, int(layout.get("sharers", n - 1)) + 1))
        return random_inputs(rng, n, l_bits, sharers=sharers)
    if kind == "split":
        first, second = rng.randbytes(size).hex(), rng.randbytes(size).hex()
        cut = (n + 1) // 2
        return tuple(first if p <= cut else second for p in range(1, n + 1))
    if kind == "random":
        return tuple(rng.randbytes(size).hex() for _ in range(n))
    raise ConfigurationError(f"unknown input generator {kind!r}")


def build_config(data: dict) -> ExecutionConfig:
    """Scenario dictionary (after overrides) to a validated config."""
    merged = dict(_DEFAULTS)
    for key in _CONFIG_KEYS:
        if key in data and data[key] is not None:
            merged[key] = _coerce(key, data[key])
    algorithm = merged["algorithm"]
    if algorithm not in (ALG1, ALG2):
        raise ConfigurationError(f"unknown algorithm {algorithm!r}")
    n, t, seed = merged["n"], merged["t"], merged["seed"]
    q = merged["q"] if algorithm == ALG2 else None
    if algorithm == ALG2 and q is None:
        raise ConfigurationError("alg2 requires q")
    l_bits = merged["l_bits"]
    d_bits = merged["d_bits"]
    if d_bits is None:
        d_bits = choose_d(l_bits, n, t, q)
    inputs = generate_inputs(data.get("inputs"), n, l_bits, seed)
    return ExecutionConfig(
        algorithm=algorithm,
        n=n,
        t=t,
        q=q,
        l_bits=l_bits,
        d_bits=d_bits,
        inputs=inputs,
        seed=seed,
        broadcast_coefficient=merged["broadcast_coefficient"],
    )


def build_script(data: dict, config: ExecutionConfig) -> AdversaryScript:
    """Adversary for a scenario: inline script, crafted case, or quiet."""
    if data.get("script") is not None:
        script = AdversaryScript.from_jsonable(data["script"])
        script.validate_shapes(config)
        return script
    if data.get("crafted"):
        name = data["crafted"]
        for case in crafted_cases(config):
            if case.name == name:
                return case.script
        raise ConfigurationError(f"no crafted case named {name!r}")
    return AdversaryScript(data.get("faulty") or ())


def check_expected(result, report, expected: dict) -> list[str]:
    """Mismatches between a finished run and the scenario's `expected`."""
    problems = []
    if "verdict" in expected and result.verdict != expected["verdict"]:
        problems.append(
            f"verdict {result.verdict} != expected {expected['verdict']}"
        )
    if "outcome_kinds" in expected:
        kinds = sorted({o["kind"] for o in result.outcomes})
        want = sorted(expected["outcome_kinds"])
        if kinds != want:
            problems.append(f"outcome kinds {kinds} != expected {want}")
    if "data_bits" in expected and report.data_bits != int(expected["data_bits"]):
        problems.append(
            f"data bits {report.data_bits} != expected {expected['data_bits']}"
        )
    if "diagnosis_count" in expected:
        want = int(expected["diagnosis_count"])
        if result.diagnosis_count != want:
            problems.append(
                f"diagnosis count {result.diagnosis_count} != expected {want}"
            )
    return problems


# ----------------------------------------------------------- subcommands


def _repro_line(args: argparse.Namespace, config: ExecutionConfig) -> str:
    scenario = getattr(args, "scenario", None) or "-"
    overrides = " ".join(
        f"--override {text}" for text in (getattr(args, "override", None) or [])
    )
    return (
        f"repro: scenario={scenario} seed={config.seed}"
        f" {overrides}".rstrip()
    )


def cmd_run(args: argparse.Namespace) -> int:
    data: dict = {}
    if args.scenario:
        data = json.loads(Path(args.scenario).read_text())
        if not isinstance(data, dict):
            raise ConfigurationError("scenario file must hold a JSON object")
    data.update(flag_overrides(args))
    if args.script:
        data["script"] = json.loads(Path(args.script).read_text())
    if args.faulty:
        data["faulty"] = [int(p) for p in args.faulty.split(",") if p]
        data.setdefault("script", None)
    config = build_config(data)
    script = build_script(data, config)
    result = run_execution(config, script)
    report = check_complexity(result)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "transcript.jsonl").write_text(result.transcript.to_jsonl())
    mismatches = check_expected(result, report, data.get("expected") or {})
    report_doc = {
        "scenario": data.get("name"),
        "verdict": result.verdict,
        "violations": result.violations,
        "expected_mismatches": mismatches,
        "diagnosis_count": result.diagnosis_count,
        "outcome_kinds": sorted({o["kind"] for o in result.outcomes}),
        "complexity": report.to_jsonable(),
        "config": config.to_jsonable(),
    }
    (out_dir / "report.json").write_text(
        json.dumps(report_doc, indent=2, sort_keys=True) + "\n"
    )

    print(_repro_line(args, config))
    print(
        f"{result.verdict} alg={config.algorithm} n={config.n} t={config.t}"
        + (f" q={config.q}" if config.q is not None else "")
        + f" data_bits={report.data_bits}"
        f" overhead_bits={report.overhead_bits}"
        f" diagnoses={result.diagnosis_count}"
    )
    for line in result.violations:
        print(f"violation: {line}")
    for line in mismatches:
        print(f"expected-mismatch: {line}")
    print(f"wrote {out_dir / 'transcript.jsonl'} and {out_dir / 'report.json'}")
    return 0 if result.passed and not mismatches else 1


def _parse_q_values(text: str | None) -> list[int | None]:
    if not text:
        return [None]
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",") if part]


def cmd_sweep(args: argparse.Namespace) -> int:
    algorithm = args.alg or ALG1
    q_values = _parse_q_values(args.q)
    if algorithm == ALG1:
        q_values = [None]
    elif q_values == [None]:
        raise ConfigurationError("alg2 sweeps need --q (single value or lo..hi)")
    n, t = args.n or 4, args.t if args.t is not None else 1
    base_seed = args.seed or 0

    cases = []
    for q in q_values:
        k = q if q is not None else n - t
        l_bits = args.l_bits or 8 * k * 10  # ten single-unit generations
        d_bits = args.d_bits or choose_d(l_bits, n, t, q)
        for trial in range(args.trials):
            seed = base_seed + trial
            rng = random.Random(seed)
            style = trial % 3
            if style == 0:
                inputs = random_inputs(rng, n, l_bits)
            elif style == 1:
                share = max(q or 0, n - t)
                inputs = random_inputs(rng, n, l_bits, sharers=range(1, share + 1))
            else:
                inputs = tuple(
                    rng.randbytes(l_bits // 8).hex() for _ in range(n)
                )
            config = ExecutionConfig(
                algorithm=algorithm, n=n, t=t, q=q,
                l_bits=l_bits, d_bits=d_bits, inputs=inputs, seed=seed,
            )
            cases.append((config, random_script(config, seed)))

    report = sweep(cases, workers=args.workers)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "summary.csv").write_text(report.to_csv())
    for index in report.failures:
        config, script = cases[index]
        (out_dir / f"failure_{index:04d}.json").write_text(
            serialize_case(config, script)
        )

    print(
        f"sweep alg={algorithm} n={n} t={t} trials={len(cases)}"
        f" failures={len(report.failures)}"
        f" max_diagnoses={report.max_diagnosis_count(algorithm)}"
    )
    print(f"wrote {out_dir / 'summary.csv'}")
    if report.failures:
        print(f"replay files: {out_dir}/failure_*.json")
        return 1
    return 0


def cmd_acceptance(args: argparse.Namespace) -> int:
    from .acceptance import run_all

    results = run_all(quick=args.quick)
    for line in results.lines():
        print(line)
    print(results.summary())
    return 0 if results.all_passed else 1


def cmd_replay(args: argparse.Namespace) -> int:
    text = Path(args.case).read_text()
    config, script = load_case(text)
    first = run_execution(config, script)
    second = run_execution(*load_case(text))
    identical = (
        first.transcript.to_jsonl().encode()
        == second.transcript.to_jsonl().encode()
    )
    print(
        f"replay verdict={first.verdict}"
        f" identical={'yes' if identical else 'NO'}"
    )
    return 0 if identical else 1


# ---------------------------------------------------------------- parser


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alg", choices=(ALG1, ALG2), help="protocol to run")
    parser.add_argument("--n", type=int, help="number of processors")
    parser.add_argument("--t", type=int, help="fault budget (n >= 3t+1)")
    parser.add_argument("--l-bits", type=int, dest="l_bits",
                        help="value length in bits (multiple of 8)")
    parser.add_argument("--d-bits", type=int, dest="d_bits",
                        help="generation block size in bits (default: balanced)")
    parser.add_argument("--seed", type=int, help="base seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codedbft",
        description="coded Byzantine consensus simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario end to end")
    run_p.add_argument("scenario", nargs="?", help="scenario JSON file")
    _add_config_flags(run_p)
    run_p.add_argument("--q", type=int, help="match quorum size (alg2)")
    run_p.add_argument("--override", action="append", metavar="KEY=VALUE",
                       help="set one config field (repeatable)")
    run_p.add_argument("--faulty", help="comma separated faulty ids (no script)")
    run_p.add_argument("--script", help="adversary script JSON file")
    run_p.add_argument("--out-dir", default="out", dest="out_dir",
                       help="directory for transcript.jsonl and report.json")
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="batch of random-adversary runs")
    _add_config_flags(sweep_p)
    sweep_p.add_argument("--q", help="quorum size or range lo..hi (alg2)")
    sweep_p.add_argument("--trials", type=int, default=100,
                         help="runs per parameter point")
    sweep_p.add_argument("--workers", type=int, default=1,
                         help="thread pool size")
    sweep_p.add_argument("--out-dir", default="out", dest="out_dir",
                         help="directory for summary.csv and failure cases")
    sweep_p.set_defaults(func=cmd_sweep)

    acc_p = sub.add_parser("acceptance", help="run the acceptance checklist")
    acc_p.add_argument("--quick", action="store_true",
                       help="reduced trial counts, same checks")
    acc_p.set_defaults(func=cmd_acceptance)

    replay_p = sub.add_parser("replay", help="re-run a serialized case twice")
    replay_p.add_argument("case", help="case JSON produced by sweep failures")
    replay_p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"error: invalid scenario or arguments: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
