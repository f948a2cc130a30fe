"""Command-line entry point.

Subcommands: mutate, compile, dedup, sample, run, analyze, report, bench-gen.
Exit codes: 0 success, 1 stage failure, 2 invalid configuration/arguments.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import shutil
import sys
from pathlib import Path

import yaml

from . import bench as bench_mod
from . import build as build_mod
from . import mutator
from .analyze import DEFAULT_METRIC
from .coverage import read_matrix
from .execute import SimulatedExecutor, run_mutant
from .pipeline import ConfigError, StageError, load_config, run_pipeline
from .prioritize import prioritize_and_reduce
from .sampling import SamplingConfig, fsci_loop, sample_fixed, sample_proportional

log = logging.getLogger("mutpipe")


def _cmd_mutate(args) -> int:
    operators = set(args.operators.split(",")) if args.operators else None
    covered = None
    if args.coverage:
        vectors = read_matrix(args.coverage)
        covered_by_file: dict[str, set[int]] = {}
        for v in vectors:
            covered_by_file.setdefault(v.file, set()).update(v.covered())
    mutants = []
    for src in args.sources:
        text = Path(src).read_text()
        unit = mutator.parse_unit(text, src)
        if args.coverage:
            covered = covered_by_file.get(src, set())
        mutants.extend(mutator.generate_mutants(unit, operators, covered))
    mutator.write_manifest(mutants, args.out)
    print(f"generated {len(mutants)} mutants -> {args.out}")
    return 0


def _load_profile(path) -> build_mod.BuildProfile:
    with open(path) as fh:
        d = yaml.safe_load(fh)
    return build_mod.BuildProfile(
        build_command=d["build_command"],
        artifact_path=d["artifact_path"],
        optimization_levels=list(d["optimization_levels"]),
        workdir=d.get("workdir", "."),
    )


def _compile_in_workdir(profile, mutants, units, levels, archive) -> list:
    records = []
    for level in levels:
        records.append(build_mod.compile_original(profile, level))
        for m in mutants:
            text = mutator.render_mutant(units[m.file], m)
            records.append(build_mod.compile_mutant(
                profile, m, level, text, archive))
    return records


def _cmd_compile(args) -> int:
    profile = _load_profile(args.profile)
    mutants = mutator.read_manifest(args.manifest)
    levels = args.levels.split(",") if args.levels else profile.optimization_levels
    usable = []
    for level in levels:
        if build_mod.check_level_reproducible(profile, level):
            usable.append(level)
        else:
            log.warning("level %s is not reproducible; excluded", level)
    if not usable:
        print("no reproducible optimization level available", file=sys.stderr)
        return 1
    units = {}
    for m in mutants:
        if m.file not in units:
            path = Path(profile.workdir) / m.file
            units[m.file] = mutator.parse_unit(path.read_text(), m.file)

    if args.jobs <= 1:
        records = _compile_in_workdir(profile, mutants, units, usable,
                                      args.archive)
    else:
        # isolated workdir copy per job stream; strictly sequential inside
        chunks = [mutants[i::args.jobs] for i in range(args.jobs)]
        records = []
        copies = []
        try:
            with concurrent.futures.ThreadPoolExecutor(args.jobs) as pool:
                futures = []
                for i, chunk in enumerate(chunks):
                    if not chunk:
                        continue
                    copy = Path(profile.workdir).parent / (
                        Path(profile.workdir).name + f".job{i}")
                    shutil.copytree(profile.workdir, copy, dirs_exist_ok=True)
                    copies.append(copy)
                    p = build_mod.BuildProfile(
                        profile.build_command, profile.artifact_path,
                        profile.optimization_levels, str(copy))
                    futures.append(pool.submit(
                        _compile_in_workdir, p, chunk, units, usable,
                        args.archive))
                for fut in futures:
                    records.extend(fut.result())
        finally:
            for copy in copies:
                shutil.rmtree(copy, ignore_errors=True)
        # dedupe original records per level (one per job stream)
        seen = set()
        unique = []
        for r in records:
            key = (r.mutant_id, r.level)
            if r.mutant_id == build_mod.ORIGINAL_ID and key in seen:
                continue
            seen.add(key)
            unique.append(r)
        records = unique

    build_mod.write_ledger(records, args.out)
    ok = sum(1 for r in records
             if r.mutant_id != build_mod.ORIGINAL_ID and r.build_ok)
    total = sum(1 for r in records if r.mutant_id != build_mod.ORIGINAL_ID)
    share = 100.0 * ok / total if total else 0.0
    print(f"compiled {ok}/{total} (mutant, level) builds ({share:.2f}%) "
          f"-> {args.out}")
    return 0


def _cmd_dedup(args) -> int:
    records = build_mod.read_ledger(args.ledger)
    equivalent, groups = build_mod.detect_trivial(records)
    compiled = sorted({r.mutant_id for r in records
                       if r.mutant_id != build_mod.ORIGINAL_ID and r.build_ok})
    unique = build_mod.unique_mutants(compiled, equivalent, groups)
    out = {
        "trivially_equivalent": sorted(equivalent),
        "duplicate_groups": [sorted(g) for g in groups],
        "unique_mutants": unique,
    }
    Path(args.out).write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    print(f"{len(equivalent)} trivially equivalent, "
          f"{len(groups)} duplicate groups, {len(unique)} unique mutants "
          f"-> {args.out}")
    return 0


def _cmd_sample(args) -> int:
    bench = bench_mod.read_bundle(args.bench)
    cfg = SamplingConfig(strategy=args.strategy, ratio=args.ratio,
                         fixed_size=args.fixed_size, t_ci=args.t_ci,
                         level=args.level, seed=args.seed,
                         calibration_size=args.calibration_size)
    rows = []
    if cfg.strategy == "fsci":
        executor = SimulatedExecutor(bench.matrix)
        tests_by_id = {t.id: t for t in bench.tests}
        file_cov = {f: bench.coverage_for_file(f)
                    for f in {m.file for m in bench.mutants}}

        def execute(m):
            cov = file_cov[m.file]
            covering = {t for t, v in cov.items()
                        if v.count_at(m.statement_id) > 0}
            if not covering:
                return False
            ordered = prioritize_and_reduce(m.statement_id, covering, cov,
                                            args.metric, cfg.seed)
            return run_mutant(m.id, [tests_by_id[t] for t in ordered],
                              executor).killed

        result = fsci_loop(bench.mutants, execute, cfg)
        killed = 0
        for i, (m, k) in enumerate(result.sampled, 1):
            killed += int(k)
            rows.append({"id": m.id, "killed": k,
                         "estimate": killed / i})
        rows.append({"interval": [result.interval.lower,
                                  result.interval.upper],
                     "converged": result.converged})
    else:
        if cfg.strategy == "fixed-size":
            chosen = sample_fixed(bench.mutants, cfg.fixed_size, cfg.seed)
        else:
            chosen = sample_proportional(
                bench.mutants, cfg.ratio,
                by_method=(cfg.strategy == "proportional-method"),
                seed=cfg.seed)
        rows = [{"id": m.id} for m in chosen]
    Path(args.out).write_text(
        "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))
    print(f"{len(rows)} records -> {args.out}")
    return 0


def _cmd_run(args) -> int:
    report = run_pipeline(args.config, workdir=args.workdir)
    print(report.summary())
    return 0


def _cmd_analyze(args) -> int:
    # analysis is a pipeline stage; rerunning is a no-op when inputs match
    report = run_pipeline(args.config, workdir=args.workdir)
    print(report.summary())
    return 0


def _cmd_report(args) -> int:
    path = Path(args.workdir) / "report" / "report.json"
    if not path.exists():
        print(f"no report at {path}; run the pipeline first", file=sys.stderr)
        return 1
    d = json.loads(path.read_text())
    print(json.dumps(d, indent=2, sort_keys=True))
    return 0


def _cmd_bench_gen(args) -> int:
    kwargs = dict(bench_mod.PRESETS.get(args.preset, {}))
    if args.true_ms is not None:
        kwargs["true_ms"] = args.true_ms
    spec = bench_mod.BenchSpec(
        n_mutants=args.mutants, n_tests=args.tests,
        live_equiv_fraction=args.live_equiv_fraction,
        correlation=args.correlation, killer_bias=args.killer_bias,
        coverage_profiles=args.coverage_profiles,
        **kwargs)
    bench = bench_mod.generate_bench(spec, seed=args.seed)
    bench_mod.write_bundle(bench, args.out)
    print(f"bench with {len(bench.mutants)} mutants "
          f"(true MS {bench_mod.true_score(bench):.4f}) -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mutpipe")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("mutate", help="generate mutants from C-like sources")
    sp.add_argument("sources", nargs="+")
    sp.add_argument("--operators", help="comma-separated operator subset")
    sp.add_argument("--coverage", help="coverage matrix to gate generation")
    sp.add_argument("--out", default="mutants.jsonl")
    sp.set_defaults(func=_cmd_mutate)

    sp = sub.add_parser("compile", help="build mutants and hash executables")
    sp.add_argument("--profile", required=True, help="build profile YAML")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--levels", help="comma-separated level subset")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--archive", help="directory for mutant executables")
    sp.add_argument("--out", default="hashes.jsonl")
    sp.set_defaults(func=_cmd_compile)

    sp = sub.add_parser("dedup", help="trivially equivalent/duplicate detection")
    sp.add_argument("--ledger", required=True)
    sp.add_argument("--out", default="dedup.json")
    sp.set_defaults(func=_cmd_dedup)

    sp = sub.add_parser("sample", help="select mutants to execute")
    sp.add_argument("--bench", required=True)
    sp.add_argument("--strategy", default="fsci",
                    choices=["proportional-uniform", "proportional-method",
                             "fixed-size", "fsci"])
    sp.add_argument("--ratio", type=float, default=0.1)
    sp.add_argument("--fixed-size", type=int, default=1000)
    sp.add_argument("--t-ci", type=float, default=0.10)
    sp.add_argument("--level", type=float, default=0.95)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--calibration-size", type=int, default=100)
    sp.add_argument("--metric", default=DEFAULT_METRIC)
    sp.add_argument("--out", default="sampling.jsonl")
    sp.set_defaults(func=_cmd_sample)

    sp = sub.add_parser("run", help="run the full pipeline on a bench bundle")
    sp.add_argument("--config", required=True)
    sp.add_argument("--workdir")
    sp.set_defaults(func=_cmd_run)

    sp = sub.add_parser("analyze", help="(re)run classification and scoring")
    sp.add_argument("--config", required=True)
    sp.add_argument("--workdir")
    sp.set_defaults(func=_cmd_analyze)

    sp = sub.add_parser("report", help="print the analysis report")
    sp.add_argument("--workdir", default="mutpipe-out")
    sp.set_defaults(func=_cmd_report)

    sp = sub.add_parser("bench-gen", help="generate a synthetic bench bundle")
    sp.add_argument("--mutants", type=int, default=1000)
    sp.add_argument("--tests", type=int, default=50)
    sp.add_argument("--true-ms", type=float, default=None)
    sp.add_argument("--preset", default="default",
                    choices=sorted(bench_mod.PRESETS))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--live-equiv-fraction", type=float, default=0.0)
    sp.add_argument("--correlation", type=float, default=0.0)
    sp.add_argument("--killer-bias", default="random",
                    choices=["random", "max-count"])
    sp.add_argument("--coverage-profiles", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_bench_gen)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, bench_mod.InfeasibleSpecError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (OSError, build_mod.MissingOriginalError,
            mutator.ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
