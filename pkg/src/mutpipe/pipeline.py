"""End-to-end pipeline orchestration with per-stage artifact persistence.

Stages run in order (mutate -> compile -> dedup -> sample -> analyze ->
report); each stage records a manifest with a hash of its inputs so a rerun
with unchanged inputs is a no-op and an interrupted run resumes from the last
completed stage. On a bench bundle (simulated executor) the compile and
dedup stages are skipped with a notice.

All randomness derives from the single config seed, fanned out per stage via
a stable hash, so full runs are reproducible.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

import yaml

from . import analyze as analyze_mod
from . import bench as bench_mod
from .execute import SimulatedExecutor, run_mutant, savings_report
from .prioritize import prioritize_and_reduce
from .sampling import (
    SamplingConfig,
    estimate_kerr,
    fsci_loop,
    reusable_calibration,
    sample_fixed,
    sample_proportional,
)

log = logging.getLogger(__name__)

STAGES = ("mutate", "compile", "dedup", "sample", "analyze", "report")


class ConfigError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, artifact: str, message: str):
        super().__init__(f"stage {stage} failed ({artifact}): {message}")
        self.stage = stage
        self.artifact = artifact


def derive_seed(master: int, stage: str) -> int:
    digest = hashlib.sha256(f"{master}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def load_config(path) -> dict:
    with open(path) as fh:
        cfg = yaml.safe_load(fh)
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping")
    if "bench" not in cfg and "sources" not in cfg:
        raise ConfigError("config needs either 'bench' or 'sources'")
    return cfg


def _input_hash(parts: list[str]) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode())
        h.update(b"\0")
    return h.hexdigest()


class StageStore:
    """Per-stage artifact directories with skip-if-unchanged manifests."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def dir(self, stage: str) -> Path:
        d = self.root / stage
        d.mkdir(parents=True, exist_ok=True)
        return d

    def is_done(self, stage: str, input_hash: str) -> bool:
        mf = self.root / stage / "manifest.json"
        if not mf.exists():
            return False
        try:
            return json.loads(mf.read_text()).get("input_hash") == input_hash
        except json.JSONDecodeError:
            return False

    def mark_done(self, stage: str, input_hash: str, outputs: list[str]) -> None:
        mf = self.dir(stage) / "manifest.json"
        mf.write_text(json.dumps(
            {"input_hash": input_hash, "outputs": sorted(outputs)},
            sort_keys=True, indent=2) + "\n")


def run_pipeline(config: dict | str, workdir: str | None = None
                 ) -> analyze_mod.AnalysisReport:
    """Run the full pipeline from a config mapping (or YAML path)."""
    if not isinstance(config, dict):
        config = load_config(config)
    workdir = Path(workdir or config.get("workdir", "mutpipe-out"))
    store = StageStore(workdir)

    if "bench" not in config:
        raise ConfigError(
            "real-build pipeline runs are driven per stage via the CLI "
            "(mutate/compile/dedup); run_pipeline needs a 'bench' bundle")
    log.info("simulated executor: compile and dedup stages skipped")

    seed = int(config.get("seed", 0))
    metric = config.get("metric", analyze_mod.DEFAULT_METRIC)
    t_e = float(config.get("t_e", analyze_mod.DEFAULT_T_E))
    t_d = float(config.get("t_d", 0.0))
    discard_duplicates = bool(config.get("discard_duplicates", False))
    sampling_cfg = dict(config.get("sampling", {}))
    sampling_cfg.setdefault("seed", derive_seed(seed, "sample"))
    scfg = SamplingConfig(**sampling_cfg)

    bench = bench_mod.read_bundle(config["bench"])
    ihash = _input_hash([
        str(config["bench"]), str(seed), metric, str(t_e), str(t_d),
        str(discard_duplicates), json.dumps(sampling_cfg, sort_keys=True),
    ])

    report_path = store.dir("report") / "report.json"
    if store.is_done("report", ihash) and report_path.exists():
        log.info("pipeline already complete for these inputs")
        return _report_from_file(report_path)

    executor = SimulatedExecutor(bench.matrix)
    tests_by_id = {t.id: t for t in bench.tests}
    file_coverage = {f: bench.coverage_for_file(f)
                     for f in {m.file for m in bench.mutants}}

    verdicts: dict[str, object] = {}
    prio_seed = derive_seed(seed, "prioritize")

    def execute(mutant) -> bool:
        cov = file_coverage[mutant.file]
        covering = {t for t, v in cov.items()
                    if v.count_at(mutant.statement_id) > 0}
        if not covering:
            return False
        ordered = prioritize_and_reduce(
            mutant.statement_id, covering, cov, metric, prio_seed)
        verdict = run_mutant(mutant.id, [tests_by_id[t] for t in ordered],
                             executor)
        verdicts[mutant.id] = verdict
        return verdict.killed and not verdict.inconclusive

    def execute_full(mutant) -> bool:
        cov = file_coverage[mutant.file]
        covering = sorted(t for t, v in cov.items()
                          if v.count_at(mutant.statement_id) > 0)
        if not covering:
            return False
        verdict = run_mutant(mutant.id, [tests_by_id[t] for t in covering],
                             executor)
        verdicts[mutant.id] = verdict
        return verdict.killed and not verdict.inconclusive

    # --- sample stage ---
    if scfg.strategy == "fsci":
        kerr = None
        preexecuted = None
        if bool(config.get("reduced_suite_correction", False)):
            calibration = sample_fixed(
                bench.mutants, scfg.calibration_size,
                derive_seed(seed, "kerr"))
            kerr = estimate_kerr(calibration, execute_full, execute, scfg.level)
            preexecuted = reusable_calibration(kerr)
        if kerr is not None and kerr.interval.upper > scfg.t_ci:
            # reduction too lossy: prioritize but do not reduce
            result = fsci_loop(bench.mutants, execute_full, scfg)
        else:
            result = fsci_loop(bench.mutants, execute, scfg, kerr=kerr,
                               preexecuted=preexecuted)
        sampled = [m for m, _ in result.sampled]
        interval = (result.interval.lower, result.interval.upper,
                    result.interval.level)
        converged = result.converged
    else:
        if scfg.strategy == "fixed-size":
            sampled = sample_fixed(bench.mutants, scfg.fixed_size, scfg.seed)
        else:
            sampled = sample_proportional(
                bench.mutants, scfg.ratio,
                by_method=(scfg.strategy == "proportional-method"),
                seed=scfg.seed)
        for m in sampled:
            execute(m)
        interval = None
        converged = True

    sample_rows = []
    for m in sampled:
        v = verdicts.get(m.id)
        sample_rows.append({
            "id": m.id,
            "killed": bool(v.killed) if v else False,
            "tests_run": v.tests_run if v else 0,
        })
    (store.dir("sample") / "sampled.jsonl").write_text(
        "".join(json.dumps(r, sort_keys=True) + "\n" for r in sample_rows))
    store.mark_done("sample", ihash, ["sampled.jsonl"])

    # --- analyze stage ---
    executed = [m for m in sampled if m.id in verdicts]
    killed_ids = {m.id for m in executed if verdicts[m.id].killed}
    live_ids = [m.id for m in executed
                if not verdicts[m.id].killed
                and not verdicts[m.id].inconclusive
                and verdicts[m.id].tests_run > 0]
    uncovered = [m.id for m in executed if verdicts[m.id].tests_run == 0]

    mut_cov = {m.id: bench.mutant_coverage(m.id) for m in executed}
    file_of = {m.id: m.file for m in executed}
    noneq: set[str] = set()
    likely_eq: set[str] = set()
    for file in sorted({file_of[mid] for mid in live_ids}):
        ne, eq = analyze_mod.classify_equivalent(
            [mid for mid in live_ids if file_of[mid] == file],
            file_coverage[file], mut_cov, metric, t_e)
        noneq |= ne
        likely_eq |= eq

    dup_groups = analyze_mod.classify_duplicates(
        executed, verdicts, mut_cov, metric, t_d)

    score = analyze_mod.mutation_score_nodup(len(killed_ids), len(noneq))
    score_dup = None
    if discard_duplicates or dup_groups:
        drop = set()
        for g in dup_groups:
            drop.update(g - {min(g)})
        knd = len(killed_ids - drop)
        lnend = len(set(noneq) - drop)
        if knd + lnend > 0:
            score_dup = analyze_mod.mutation_score(knd, lnend)

    # savings vs original-order full-suite execution on the same mutants
    baseline = []
    ordered_all = sorted(tests_by_id)
    for m in executed:
        cov = file_coverage[m.file]
        covering = [t for t in ordered_all
                    if cov[t].count_at(m.statement_id) > 0]
        baseline.append(run_mutant(
            m.id, [tests_by_id[t] for t in covering], executor))
    time_saving, test_saving = savings_report(
        [verdicts[m.id] for m in executed], baseline)

    classifications = {}
    for m in executed:
        if m.id in killed_ids:
            classifications[m.id] = "killed"
        elif m.id in noneq:
            classifications[m.id] = "live-nonequivalent"
        elif m.id in likely_eq:
            classifications[m.id] = "discarded-equivalent"
        elif m.id in uncovered:
            classifications[m.id] = "uncovered"
        else:
            classifications[m.id] = "unclassified"

    report = analyze_mod.AnalysisReport(
        classifications=classifications,
        duplicate_groups=[sorted(g) for g in dup_groups],
        score=score,
        score_with_duplicates_discarded=score_dup,
        interval=interval,
        counts={
            "sampled": len(sampled),
            "executed": len(executed),
            "killed": len(killed_ids),
            "live-nonequivalent": len(noneq),
            "likely-equivalent": len(likely_eq),
            "uncovered": len(uncovered),
            "fsci-converged": int(converged),
        },
        savings={"time": time_saving, "tests": test_saving},
    )
    store.mark_done("analyze", ihash, [])

    report_path.write_text(
        json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n")
    (store.dir("report") / "summary.txt").write_text(report.summary() + "\n")
    store.mark_done("report", ihash, ["report.json", "summary.txt"])
    return report


def _report_from_file(path) -> analyze_mod.AnalysisReport:
    d = json.loads(Path(path).read_text())
    return analyze_mod.AnalysisReport(
        classifications=d["classifications"],
        duplicate_groups=[sorted(g) for g in d["duplicate_groups"]],
        score=d["score"],
        score_with_duplicates_discarded=d["score_with_duplicates_discarded"],
        interval=tuple(d["interval"]) if d["interval"] else None,
        counts=d["counts"],
        savings=d["savings"],
    )
