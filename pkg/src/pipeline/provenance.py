"""
Run manifests
Content hashes of every input and output artifact of a pipeline stage, used
to refuse work on stale or modified upstream artifacts.
"""

import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Set, Tuple, Union

from pydantic import BaseModel, Field

from src.config import Config
from src.exporters import JSONExporter
from src.utils.errors import MissingArtifactError, ProvenanceError
from src.utils.helpers import hash_file

logger = logging.getLogger(__name__)

MANIFEST_DIR = "manifests"


class RunManifest(BaseModel):
    stage: str
    command: str
    tool_version: str = Config.APP_VERSION
    format_version: int = Config.FORMAT_VERSION
    command_line: List[str] = Field(default_factory=list)
    seed: int
    label: Optional[str] = None
    config_hash: str = ""
    inputs: Dict[str, str] = Field(default_factory=dict)
    outputs: Dict[str, str] = Field(default_factory=dict)
    started_at: str
    finished_at: str


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def manifest_path(run_dir: Union[str, Path], stage: str) -> Path:
    return Path(run_dir) / MANIFEST_DIR / f"{stage.replace('/', '__')}.json"


def _expand(paths: Iterable[Union[str, Path]]) -> List[Path]:
    files: List[Path] = []
    for path in paths:
        p = Path(path)
        if p.is_dir():
            files.extend(sorted(f for f in p.rglob("*") if f.is_file()))
        elif p.exists():
            files.append(p)
    return files


def hash_artifacts(run_dir: Union[str, Path], paths: Iterable[Union[str, Path]]) -> Dict[str, str]:
    """Relative path -> SHA-256 for every file under the given files and directories"""
    root = Path(run_dir).resolve()
    out = {}
    for f in _expand(paths):
        resolved = f.resolve()
        try:
            key = resolved.relative_to(root).as_posix()
        except ValueError:
            key = resolved.as_posix()
        out[key] = hash_file(resolved)
    return dict(sorted(out.items()))


def write_manifest(
    run_dir: Union[str, Path],
    stage: str,
    command: str,
    seed: int,
    inputs: Iterable[Union[str, Path]],
    outputs: Iterable[Union[str, Path]],
    started_at: str,
    command_line: Optional[List[str]] = None,
    label: Optional[str] = None,
    config_hash: str = "",
) -> RunManifest:
    """Hash the stage's artifacts and write manifests/<stage>.json"""
    manifest = RunManifest(
        stage=stage,
        command=command,
        command_line=list(command_line or []),
        seed=seed,
        label=label,
        config_hash=config_hash,
        inputs=hash_artifacts(run_dir, inputs),
        outputs=hash_artifacts(run_dir, outputs),
        started_at=started_at,
        finished_at=utc_now(),
    )
    JSONExporter.export(manifest, manifest_path(run_dir, stage))
    logger.info(f"Manifest for {stage}: {len(manifest.inputs)} inputs, {len(manifest.outputs)} outputs")
    return manifest


def load_manifest(run_dir: Union[str, Path], stage: str) -> RunManifest:
    """
    Raises:
        MissingArtifactError: If the stage has not been run
    """
    path = manifest_path(run_dir, stage)
    if not path.exists():
        raise MissingArtifactError(f"stage '{stage}' has no manifest; run it first", field=stage)
    return RunManifest.model_validate(JSONExporter.load(path))


def _changed(root: Path, recorded: Dict[str, str]) -> Dict[str, Tuple[str, str]]:
    diff: Dict[str, Tuple[str, str]] = {}
    for rel, expected in recorded.items():
        path = Path(rel) if Path(rel).is_absolute() else root / rel
        actual = hash_file(path) if path.exists() else "missing"
        if actual != expected:
            diff[rel] = (expected, actual)
    return diff


def verify_stage(run_dir: Union[str, Path], stage: str, _seen: Optional[Set[str]] = None) -> RunManifest:
    """
    Check a stage and everything it was built from

    Every recorded output must still have its hash, and every recorded
    input must still match what the stage consumed. Inputs that are
    manifests of other stages are verified the same way, so a re-run
    anywhere upstream invalidates everything built on the old artifacts.

    Raises:
        MissingArtifactError: If the stage has not been run
        ProvenanceError: With a diff of path -> (expected, actual)
    """
    seen = set() if _seen is None else _seen
    manifest = load_manifest(run_dir, stage)
    seen.add(stage)
    root = Path(run_dir)

    diff = _changed(root, manifest.outputs)
    if diff:
        logger.error(f"Provenance mismatch for stage '{stage}': {sorted(diff)}")
        raise ProvenanceError(f"artifacts of stage '{stage}' changed since they were written", diff=diff)

    diff = _changed(root, manifest.inputs)
    if diff:
        logger.error(f"Stage '{stage}' was built from inputs that have since changed: {sorted(diff)}")
        raise ProvenanceError(
            f"inputs of stage '{stage}' changed since it ran; re-run '{manifest.command}'", diff=diff
        )

    manifest_dir = root / MANIFEST_DIR
    for rel in manifest.inputs:
        path = Path(rel) if Path(rel).is_absolute() else root / rel
        if path.parent.resolve() != manifest_dir.resolve():
            continue
        upstream = RunManifest.model_validate(JSONExporter.load(path)).stage
        if upstream not in seen:
            verify_stage(run_dir, upstream, seen)
    return manifest
