"""Mutant compilation via the subject's own build command, plus trivial
equivalent/duplicate detection from executable hashes across optimization
levels.

Compilation follows a backup / swap-in / build / restore protocol: the
original source file is always restored byte-identically, whatever the build
outcome. Hashes are SHA-512 digests of the final linked executable.
"""

from __future__ import annotations

import hashlib
import json
import logging
import shutil
import subprocess
from dataclasses import dataclass
from pathlib import Path

log = logging.getLogger(__name__)

ORIGINAL_ID = "ORIGINAL"


class RestoreError(Exception):
    """Original source could not be restored; the working tree is dirty."""


class MissingOriginalError(Exception):
    """Hash ledger lacks the original's record for some level."""


@dataclass
class BuildProfile:
    build_command: str  # template; {level} expands to the optimization level
    artifact_path: str  # path of the produced executable, relative to workdir
    optimization_levels: list[str]
    workdir: str

    def __post_init__(self):
        if not self.optimization_levels:
            raise ValueError("at least one optimization level required")
        if len(set(self.optimization_levels)) != len(self.optimization_levels):
            raise ValueError("duplicate optimization levels")


@dataclass
class HashRecord:
    mutant_id: str  # ORIGINAL_ID for the unmutated program
    level: str
    digest: str | None  # 512-bit lowercase hex, present iff build_ok
    build_ok: bool
    file: str | None = None  # source file the mutant lives in; None for ORIGINAL

    def __post_init__(self):
        if self.build_ok != (self.digest is not None):
            raise ValueError("digest must be present exactly when build_ok")


def _sha512(path: Path) -> str:
    h = hashlib.sha512()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _run_build(profile: BuildProfile, level: str) -> bool:
    cmd = profile.build_command.format(level=level)
    proc = subprocess.run(
        cmd, shell=True, cwd=profile.workdir,
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT,
    )
    if proc.returncode != 0:
        log.debug("build failed at %s: %s", level,
                  proc.stdout.decode(errors="replace")[-2000:])
    return proc.returncode == 0


def compile_original(profile: BuildProfile, level: str) -> HashRecord:
    ok = _run_build(profile, level)
    digest = None
    if ok:
        digest = _sha512(Path(profile.workdir) / profile.artifact_path)
    return HashRecord(ORIGINAL_ID, level, digest, ok)


def compile_mutant(profile: BuildProfile, mutant, level: str,
                   mutated_text: str, archive_dir: str | None = None
                   ) -> HashRecord:
    """Build one mutant at one optimization level.

    Backs up the original source, writes the mutated text in its place, runs
    the build, hashes (and optionally archives) the executable, and restores
    the original. Restore failure is fatal.
    """
    src = Path(profile.workdir) / mutant.file
    backup = src.read_bytes()
    try:
        src.write_text(mutated_text)
        ok = _run_build(profile, level)
        digest = None
        if ok:
            artifact = Path(profile.workdir) / profile.artifact_path
            digest = _sha512(artifact)
            if archive_dir is not None:
                dest = Path(archive_dir) / f"{mutant.id}.{level}"
                dest.parent.mkdir(parents=True, exist_ok=True)
                shutil.copy2(artifact, dest)
        return HashRecord(mutant.id, level, digest, ok, file=mutant.file)
    finally:
        try:
            src.write_bytes(backup)
        except OSError as exc:  # pragma: no cover
            raise RestoreError(f"could not restore {src}: {exc}") from exc


def check_level_reproducible(profile: BuildProfile, level: str) -> bool:
    """Build the original twice; False means the level embeds
    nondeterminism (timestamps etc.) and should be excluded."""
    a = compile_original(profile, level)
    b = compile_original(profile, level)
    if not (a.build_ok and b.build_ok):
        return False
    return a.digest == b.digest


class _UnionFind:
    def __init__(self):
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the lexicographically smallest id as root
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def detect_trivial(records: list[HashRecord]
                   ) -> tuple[set[str], list[set[str]]]:
    """Trivially equivalent mutants and duplicate groups from a hash ledger.

    A mutant is trivially equivalent when its digest matches the original's
    at SOME level. Two mutants of the same source file sharing a digest at
    some level are trivially duplicate; groups are the transitive closure of
    those pairs. Equivalent mutants are removed before grouping.
    """
    originals = {r.level: r.digest for r in records
                 if r.mutant_id == ORIGINAL_ID}
    levels = sorted({r.level for r in records})
    missing = [lv for lv in levels if lv not in originals]
    if missing:
        raise MissingOriginalError(
            f"no original record for levels: {missing}")

    equivalent: set[str] = set()
    for r in records:
        if r.mutant_id == ORIGINAL_ID or not r.build_ok:
            continue
        if originals.get(r.level) is not None and r.digest == originals[r.level]:
            equivalent.add(r.mutant_id)

    uf = _UnionFind()
    by_key: dict[tuple[str, str, str], list[str]] = {}
    for r in sorted(records, key=lambda r: (r.level, r.mutant_id)):
        if r.mutant_id == ORIGINAL_ID or not r.build_ok:
            continue
        if r.mutant_id in equivalent:
            continue
        key = (r.level, r.file or "", r.digest)
        by_key.setdefault(key, []).append(r.mutant_id)
    for ids in by_key.values():
        for other in ids[1:]:
            uf.union(ids[0], other)

    groups: dict[str, set[str]] = {}
    for mid in uf.parent:
        groups.setdefault(uf.find(mid), set()).add(mid)
    duplicate_groups = sorted(
        (g for g in groups.values() if len(g) > 1), key=lambda g: min(g)
    )
    return equivalent, duplicate_groups


def unique_mutants(compiled_ids: list[str], equivalent: set[str],
                   duplicate_groups: list[set[str]]) -> list[str]:
    """Step-4 output: compiled mutants minus equivalent minus
    non-representative duplicates (each group keeps its lowest id)."""
    drop = set(equivalent)
    for group in duplicate_groups:
        drop.update(group - {min(group)})
    return [m for m in compiled_ids if m not in drop]


# ---------------------------------------------------------------------------
# Hash ledger file: one JSON record per (mutant, level)
# ---------------------------------------------------------------------------

def write_ledger(records: list[HashRecord], path) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps({
                "mutant_id": r.mutant_id, "level": r.level,
                "digest": r.digest, "build_ok": r.build_ok, "file": r.file,
            }) + "\n")


def read_ledger(path) -> list[HashRecord]:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                out.append(HashRecord(**json.loads(line)))
    return out
