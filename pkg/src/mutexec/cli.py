"""Command-line entry point wiring the pipeline together.

Subcommands: sample, transpile, build-dsl-list, build-llm-list, ingest,
mutate, run-pred, run-choice, report.  A flat ``key = value`` config file can
supply any long-form option; explicit flags win.  Every artifact-producing
command writes a ``<out>.manifest.json`` recording the command, seed, input
hashes, and tool version.  Usage errors exit 2, pipeline failures exit 1.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys

from . import __version__, datasets, harness, metrics
from .dsl import list_dsl, parse_sexpr, to_sexpr
from .executors import DEFAULT_TIMEOUT, BuiltinExecutor, ExternalExecutor
from .grammar import SamplerConfig, compile_cfg, list_program_type, sample_valid_program
from .llm_client import ModelConfig, Transcript, parse_model_spec
from .mutate import mutate_dataset
from .problems import load_jsonl, pair_by_id, save_jsonl
from .transpile import translate
from .values import canonical_repr, format_args


def load_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` pairs; '#' starts a comment."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {raw.strip()!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_path: str, command: str, args: argparse.Namespace,
                   inputs: list[str], outputs: list[str],
                   extra: dict | None = None) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "config_file": getattr(args, "config", None),
        "options": {
            k: v for k, v in sorted(vars(args).items())
            if k != "func" and not k.startswith("_") and isinstance(v, (str, int, float, bool, list, tuple, type(None)))
        },
        "inputs": {p: _sha256(p) for p in inputs if p and os.path.exists(p)},
        "outputs": outputs,
    }
    manifest.update(extra or {})
    path = out_path + ".manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _apply_config_defaults(subparser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Pre-scan for --config and inject file values as subcommand defaults.

    Config keys use the option's dest name (dashes become underscores);
    explicit command-line flags still override.
    """
    path = None
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif arg.startswith("--config="):
            path = arg.split("=", 1)[1]
    if path is None:
        return
    values = load_config_file(path)
    defaults = {}
    for action in subparser._actions:
        key = action.dest
        if key not in values:
            continue
        raw = values[key]
        if action.type is not None:
            defaults[key] = action.type(raw)
        elif isinstance(action.default, bool):
            defaults[key] = raw.lower() in ("1", "true", "yes")
        else:
            defaults[key] = raw
        if action.required:
            action.required = False
    subparser.set_defaults(**defaults)


def _sampler_config(args: argparse.Namespace) -> SamplerConfig:
    overrides = {}
    for item in (args.weight or []):
        name, _, value = item.partition("=")
        overrides[name] = float(value)
    return SamplerConfig(
        program_type=list_program_type(args.arity),
        max_depth=args.depth,
        weight_overrides=overrides,
        rng_seed=args.seed,
        input_count=args.input_count,
        list_len_range=(args.list_len_min, args.list_len_max),
        element_range=(args.element_min, args.element_max),
        max_attempts=args.max_attempts,
    )


def _make_executor(args: argparse.Namespace):
    cmd = getattr(args, "executor_cmd", None)
    if getattr(args, "executor", "external") == "builtin":
        return BuiltinExecutor()
    return ExternalExecutor(cmd, getattr(args, "executor_timeout", DEFAULT_TIMEOUT))


def _make_model(args: argparse.Namespace, pairs=None):
    transcript = Transcript(getattr(args, "transcript", None))
    config = ModelConfig(
        endpoint=getattr(args, "endpoint", ModelConfig.endpoint),
        profile=getattr(args, "model_profile", "traditional"),
        parallelism=getattr(args, "parallelism", 4),
    )
    if getattr(args, "max_tokens", None) is not None:
        config.max_tokens = args.max_tokens
    return parse_model_spec(args.model, pairs=pairs, transcript=transcript,
                            config=config), transcript


# ---------------------------------------------------------------------------
# Subcommands


def cmd_sample(args) -> int:
    primitives, constraints = list_dsl()
    config = _sampler_config(args)
    cfg = compile_cfg(primitives, constraints, config.program_type, config.max_depth)
    rng = random.Random(args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        for _ in range(args.count):
            sp = sample_valid_program(cfg, config, rng=rng)
            fh.write(json.dumps({
                "dsl_text": to_sexpr(sp.term),
                "type": repr(config.program_type),
                "depth": sp.term.depth(),
                "inputs": [format_args(a) for a in sp.inputs],
                "outputs": [canonical_repr(o) for o in sp.outputs],
            }, ensure_ascii=False) + "\n")
    write_manifest(args.out, "sample", args, [], [args.out])
    return 0


def cmd_transpile(args) -> int:
    with open(getattr(args, "in"), encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    with open(args.out, "w", encoding="utf-8") as fh:
        for line in lines:
            text = json.loads(line)["dsl_text"] if line.startswith("{") else line
            program = translate(parse_sexpr(text), args.function_name)
            fh.write(json.dumps({
                "dsl_text": text,
                "source": program.source,
                "loc": program.loc,
            }, ensure_ascii=False) + "\n")
    write_manifest(args.out, "transpile", args, [getattr(args, "in")], [args.out])
    return 0


def cmd_build_dsl_list(args) -> int:
    overrides = {}
    for item in (args.weight or []):
        name, _, value = item.partition("=")
        overrides[name] = float(value)
    config = datasets.DslListConfig(
        seed=args.seed,
        programs_per_combo=args.programs_per_combo,
        per_bin=args.per_bin,
        input_count=args.input_count,
        list_len_range=(args.list_len_min, args.list_len_max),
        element_range=(args.element_min, args.element_max),
        weight_overrides=overrides,
        max_attempts=args.max_attempts,
    )
    problems = datasets.build_dsl_list(config)
    save_jsonl(problems, args.out)
    write_manifest(args.out, "build-dsl-list", args, [], [args.out])
    print(f"wrote {len(problems)} problems to {args.out}")
    return 0


def cmd_build_llm_list(args) -> int:
    model, transcript = _make_model(args)
    executor = _make_executor(args)
    try:
        problems = datasets.build_llm_list(
            model, executor,
            datasets.LlmListConfig(max_regenerations=args.max_regenerations),
        )
    finally:
        executor.close()
        model.close()
    save_jsonl(problems, args.out)
    write_manifest(args.out, "build-llm-list", args, [], [args.out])
    print(f"wrote {len(problems)} problems to {args.out} "
          f"({transcript.entries} model calls logged)")
    return 0


def cmd_ingest(args) -> int:
    with open(getattr(args, "in"), encoding="utf-8") as fh:
        records = [json.loads(line) for line in fh if line.strip()]
    executor = _make_executor(args)
    try:
        problems, rejections = datasets.ingest_external(
            records, executor,
            datasets.IngestConfig(args.min_chars, args.max_chars, args.max_steps),
        )
    finally:
        executor.close()
    save_jsonl(problems, args.out)
    rejects_path = args.out + ".rejected.jsonl"
    with open(rejects_path, "w", encoding="utf-8") as fh:
        for r in rejections:
            fh.write(json.dumps(vars(r), ensure_ascii=False) + "\n")
    write_manifest(args.out, "ingest", args, [getattr(args, "in")],
                   [args.out, rejects_path])
    print(f"ingested {len(problems)} problems, rejected {len(rejections)}")
    return 0


def cmd_mutate(args) -> int:
    problems = load_jsonl(getattr(args, "in"))
    if not problems:
        print("no problems in input", file=sys.stderr)
        return 1
    executor = (
        BuiltinExecutor() if all(p.executor == "builtin" for p in problems)
        else _make_executor(args)
    )
    try:
        kept, mutants = mutate_dataset(problems, executor, seed=args.seed)
    finally:
        executor.close()
    os.makedirs(args.out, exist_ok=True)
    kept_path = os.path.join(args.out, "originals.jsonl")
    mut_path = os.path.join(args.out, "mutants.jsonl")
    save_jsonl(kept, kept_path)
    save_jsonl(mutants, mut_path)
    write_manifest(os.path.join(args.out, "mutate"), "mutate", args,
                   [getattr(args, "in")], [kept_path, mut_path])
    dropped = len(problems) - len(kept)
    print(f"kept {len(kept)} pairs ({dropped} dropped for empty mutant sets)")
    return 0


def _check_templates() -> bool:
    mismatched = harness.verify_templates()
    if mismatched:
        print(f"error: prompt templates drifted from their committed digests: "
              f"{', '.join(mismatched)}", file=sys.stderr)
    return not mismatched


def _model_config_sha(args) -> str:
    fields = {k: getattr(args, k, None)
              for k in ("model", "model_profile", "endpoint", "max_tokens", "mode")}
    return hashlib.sha256(
        json.dumps(fields, sort_keys=True).encode("utf-8")
    ).hexdigest()


def cmd_run_pred(args) -> int:
    if not _check_templates():
        return 1
    originals = load_jsonl(args.orig)
    mutants = load_jsonl(args.mut)
    pairs = pair_by_id(originals, mutants)
    model, transcript = _make_model(args, pairs=pairs)
    resume = None
    if args.resume and os.path.exists(args.out):
        resume = harness.load_prediction_records(args.out)
    elif os.path.exists(args.out) and not args.resume:
        os.unlink(args.out)
    try:
        records = harness.run_prediction(
            originals, mutants, model, n=args.n, mode=args.mode,
            out_path=args.out, resume=resume,
        )
    finally:
        model.close()
    write_manifest(args.out, "run-pred", args, [args.orig, args.mut], [args.out],
                   extra={"model_config_sha": _model_config_sha(args)})
    print(f"{len(records)} prediction records -> {args.out} "
          f"({transcript.entries} model calls logged)")
    return 0


def cmd_run_choice(args) -> int:
    if not _check_templates():
        return 1
    originals = load_jsonl(args.orig)
    mutants = load_jsonl(args.mut)
    pairs = pair_by_id(originals, mutants)
    model, transcript = _make_model(args, pairs=pairs)
    resume = None
    if args.resume and os.path.exists(args.out):
        resume = harness.load_choice_records(args.out)
    elif os.path.exists(args.out) and not args.resume:
        os.unlink(args.out)
    try:
        records = harness.run_choice(
            originals, mutants, model, mode=args.mode,
            out_path=args.out, resume=resume,
        )
    finally:
        model.close()
    write_manifest(args.out, "run-choice", args, [args.orig, args.mut], [args.out],
                   extra={"model_config_sha": _model_config_sha(args)})
    print(f"{len(records)} choice records -> {args.out} "
          f"({transcript.entries} model calls logged)")
    return 0


def cmd_report(args) -> int:
    prediction = choice = None
    pred_records = []
    if args.pred:
        pred_records = harness.load_prediction_records(args.pred)
        prediction = metrics.prediction_metrics(pred_records)
    if args.choice:
        choice = metrics.choice_metrics(harness.load_choice_records(args.choice))
    if prediction is None and choice is None:
        print("nothing to report: pass --pred and/or --choice", file=sys.stderr)
        return 2
    text = metrics.render_report(args.label, prediction, choice)
    print(text, end="")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(metrics.metrics_csv(args.label, prediction, choice))
    if args.loc_csv or args.loc_dat:
        rows = metrics.loc_series(pred_records)
        if args.loc_csv:
            with open(args.loc_csv, "w", encoding="utf-8") as fh:
                fh.write(metrics.loc_series_csv(rows))
        if args.loc_dat:
            with open(args.loc_dat, "w", encoding="utf-8") as fh:
                fh.write(metrics.loc_series_dat(rows))
    return 0


# ---------------------------------------------------------------------------
# Argument wiring


def _add_common(parser):
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--seed", type=int, default=0, help="global random seed")


def _add_sampler_options(parser):
    parser.add_argument("--arity", type=int, default=1, choices=(1, 2))
    parser.add_argument("--depth", type=int, default=5, help="max AST depth")
    parser.add_argument("--input-count", type=int, default=3)
    parser.add_argument("--list-len-min", type=int, default=3)
    parser.add_argument("--list-len-max", type=int, default=5)
    parser.add_argument("--element-min", type=int, default=0)
    parser.add_argument("--element-max", type=int, default=5)
    parser.add_argument("--max-attempts", type=int, default=10_000)
    parser.add_argument("--weight", action="append", metavar="NAME=W",
                        help="override a primitive weight (repeatable)")


def _add_executor_options(parser):
    parser.add_argument("--executor", choices=("builtin", "external"),
                        default="external")
    parser.add_argument("--executor-cmd",
                        help="external executor command (default: bundled)")
    parser.add_argument("--executor-timeout", type=float, default=DEFAULT_TIMEOUT)


def _add_model_options(parser):
    parser.add_argument("--model", required=True,
                        help="mock:ground-truth-given | mock:ground-truth-original |"
                             " mock:always-a | mock:fixed:<text> |"
                             " mock:scripted:<transcript> | http:<model-id>")
    parser.add_argument("--model-profile", default="traditional",
                        choices=("traditional", "reasoning", "effort"))
    parser.add_argument("--endpoint", default=ModelConfig.endpoint)
    parser.add_argument("--parallelism", type=int, default=4)
    parser.add_argument("--max-tokens", type=int, default=None)
    parser.add_argument("--transcript", help="append-only request/response log")
    parser.add_argument("--mode", choices=harness.MODES, default=None,
                        help="prompt mode (default: per model profile)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mutexec",
        description="Generate, mutate, execute, and evaluate list-processing programs.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample valid programs to a JSONL corpus")
    _add_common(p)
    _add_sampler_options(p)
    p.add_argument("--count", "-n", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("transpile", help="translate s-expression terms to source")
    _add_common(p)
    p.add_argument("--in", required=True, help="s-expression lines or sample JSONL")
    p.add_argument("--function-name", default="f")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_transpile)

    p = sub.add_parser("build-dsl-list", help="build the sampled-program dataset")
    _add_common(p)
    _add_sampler_options(p)
    p.add_argument("--programs-per-combo", type=int, default=1000)
    p.add_argument("--per-bin", type=int, default=10,
                   help="programs selected per lines-of-code bin")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_dsl_list)

    p = sub.add_parser("build-llm-list", help="build the LLM-generated dataset")
    _add_common(p)
    _add_model_options(p)
    _add_executor_options(p)
    p.add_argument("--max-regenerations", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_llm_list)

    p = sub.add_parser("ingest", help="ingest externally collected problems")
    _add_common(p)
    _add_executor_options(p)
    p.add_argument("--in", required=True)
    p.add_argument("--min-chars", type=int, default=100)
    p.add_argument("--max-chars", type=int, default=800)
    p.add_argument("--max-steps", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("mutate", help="produce paired original/mutant datasets")
    _add_common(p)
    _add_executor_options(p)
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_mutate)

    p = sub.add_parser("run-pred", help="execution-prediction experiment")
    _add_common(p)
    _add_model_options(p)
    p.add_argument("--orig", required=True)
    p.add_argument("--mut", required=True)
    p.add_argument("--n", type=int, default=5, help="samples per problem-variant")
    p.add_argument("--resume", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run_pred)

    p = sub.add_parser("run-choice", help="execution-choice experiment")
    _add_common(p)
    _add_model_options(p)
    p.add_argument("--orig", required=True)
    p.add_argument("--mut", required=True)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run_choice)

    p = sub.add_parser("report", help="aggregate records into metric tables")
    _add_common(p)
    p.add_argument("--pred", help="prediction records JSONL")
    p.add_argument("--choice", help="choice records JSONL")
    p.add_argument("--label", default="run")
    p.add_argument("--out", help="plain-text report path")
    p.add_argument("--csv", help="metrics CSV path")
    p.add_argument("--loc-csv", help="LOC-binned series CSV path")
    p.add_argument("--loc-dat", help="LOC-binned series plot data path")
    p.set_defaults(func=cmd_report)

    return parser


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    subparsers = next(
        a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
    )
    command = next((a for a in argv if a in subparsers.choices), None)
    if command is not None:
        try:
            _apply_config_defaults(subparsers.choices[command], argv)
        except (OSError, ValueError) as exc:
            print(f"error reading config: {exc}", file=sys.stderr)
            return 2
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
