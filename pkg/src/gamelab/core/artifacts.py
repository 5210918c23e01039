"""Artifact persistence: atomic CSV/JSON writes and verdict blocks.

Every CSV opens with two comment lines carrying the config hash and the
seed; floats are written with 17 significant digits so reruns with the
same seed are byte-identical. Verdict JSON is written with sorted keys
and carries no timestamps.
"""

import csv
import io
import json
import logging
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from filelock import FileLock

from gamelab.exceptions import ArtifactError

logger = logging.getLogger(__name__)

VERDICT_SUFFIX = ".verdict.json"
LOCK_TIMEOUT = 30


def atomic_write_text(path: Path, text: str) -> Path:
    """Write text via temp file + fsync + os.replace under a FileLock."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with FileLock(str(path) + ".lock", timeout=LOCK_TIMEOUT):
        fd = None
        tmp_path = None
        try:
            fd, tmp_path = tempfile.mkstemp(dir=str(path.parent), suffix=".tmp", prefix=".gl_")
            with os.fdopen(fd, "w", newline="") as f:
                fd = None
                f.write(text)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp_path, str(path))
            tmp_path = None
        except Exception:
            if fd is not None:
                os.close(fd)
            if tmp_path and os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise
    return path


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, (list, tuple)):
        return ";".join(format_value(v) for v in value)
    if hasattr(value, "item"):
        return format_value(value.item())
    return str(value)


def write_csv(
    path: Path, header: list[str], rows: list[list[Any]], config_hash: str, seed: int | None
) -> Path:
    buf = io.StringIO()
    buf.write(f"# config_hash: {config_hash}\n")
    buf.write(f"# seed: {seed if seed is not None else ''}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    logger.debug("Writing %s (%d rows)", path, len(rows))
    return atomic_write_text(path, buf.getvalue())


def read_csv(path: Path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Return (comment metadata, header, rows)."""
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"missing artifact: {path}")
    meta: dict[str, str] = {}
    lines = path.read_text().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
        else:
            body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        raise ArtifactError(f"artifact has no header: {path}")
    return meta, rows[0], rows[1:]


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_json(path: Path, data: Any) -> Path:
    return atomic_write_text(path, dump_json(data))


def to_plain(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    return value


@dataclass
class Check:
    name: str
    passed: bool
    value: Any = None
    threshold: Any = None
    witness: Any = None

    def to_dict(self) -> dict:
        return to_plain(asdict(self))


@dataclass
class Verdict:
    """Machine-readable outcome of one command."""

    command: str
    config_hash: str
    seed: int | None
    checks: list[Check] = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, value=None, threshold=None, witness=None) -> Check:
        check = Check(name, bool(passed), value, threshold, witness)
        self.checks.append(check)
        return check

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "artifacts": sorted(self.artifacts),
        }

    def write(self, out_dir: Path) -> Path:
        path = Path(out_dir) / f"{self.command}{VERDICT_SUFFIX}"
        return write_json(path, self.to_dict())


class ArtifactWriter:
    """Writes a command's artifacts into one directory and tracks their names."""

    def __init__(self, out_dir: Path, config_hash: str, seed: int | None):
        self.out_dir = Path(out_dir)
        self.config_hash = config_hash
        self.seed = seed
        self.written: list[str] = []

    def csv(self, name: str, header: list[str], rows: list[list[Any]]) -> Path:
        path = write_csv(self.out_dir / name, header, rows, self.config_hash, self.seed)
        self.written.append(name)
        return path

    def json(self, name: str, data: Any) -> Path:
        payload = {"config_hash": self.config_hash, "seed": self.seed, **to_plain(data)}
        path = write_json(self.out_dir / name, payload)
        self.written.append(name)
        return path

    def verdict(self, command: str) -> Verdict:
        return Verdict(command, self.config_hash, self.seed, artifacts=self.written)


def load_verdicts(out_dir: Path) -> list[dict]:
    """All verdict blocks in out_dir, sorted by file name.

    Raises:
        ArtifactError: directory missing, empty or holding malformed verdicts
    """
    out_dir = Path(out_dir)
    if not out_dir.is_dir():
        raise ArtifactError(f"not a directory: {out_dir}")
    paths = sorted(out_dir.glob(f"*{VERDICT_SUFFIX}"))
    if not paths:
        raise ArtifactError(f"no verdict blocks in {out_dir}")
    verdicts = []
    for path in paths:
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ArtifactError(f"malformed verdict {path.name}: {e}") from e
        missing = {"command", "config_hash", "passed", "checks"} - set(data)
        if missing:
            raise ArtifactError(f"verdict {path.name} lacks keys {sorted(missing)}")
        verdicts.append(data)
    return verdicts


def artifact_hash(path: Path) -> str | None:
    """The config hash embedded in a CSV or JSON artifact."""
    path = Path(path)
    if path.suffix == ".csv":
        meta, _, _ = read_csv(path)
        return meta.get("config_hash")
    if path.suffix == ".json":
        try:
            return json.loads(path.read_text()).get("config_hash")
        except json.JSONDecodeError as e:
            raise ArtifactError(f"malformed artifact {path.name}: {e}") from e
    return None


def cross_check(out_dir: Path, verdict: dict) -> None:
    """Every artifact a verdict lists must exist and carry the verdict's config hash.

    Raises:
        ArtifactError: missing artifact or hash mismatch
    """
    for name in verdict.get("artifacts", []):
        path = Path(out_dir) / name
        if not path.exists():
            raise ArtifactError(f"{verdict['command']}: listed artifact {name} is missing")
        found = artifact_hash(path)
        if found is not None and found != verdict["config_hash"]:
            raise ArtifactError(
                f"{verdict['command']}: {name} carries hash {found}, "
                f"verdict has {verdict['config_hash']}"
            )


def consolidate(out_dir: Path) -> dict:
    """Merge the verdict blocks of out_dir into one report.

    Raises:
        ArtifactError: no verdicts, malformed verdicts or hash mismatches
    """
    verdicts = load_verdicts(out_dir)
    for verdict in verdicts:
        cross_check(out_dir, verdict)
    failures = [
        {"command": v["command"], **c}
        for v in verdicts
        for c in v["checks"]
        if not c["passed"]
    ]
    hashes = sorted({v["config_hash"] for v in verdicts})
    return {
        "config_hashes": hashes,
        "passed": all(v["passed"] for v in verdicts),
        "n_pass": sum(1 for v in verdicts if v["passed"]),
        "n_fail": sum(1 for v in verdicts if not v["passed"]),
        "verdicts": verdicts,
        "failures": failures,
    }
