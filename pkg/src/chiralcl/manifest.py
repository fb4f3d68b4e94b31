"""Run manifests: structured-text records tying a run to its artifacts.

A manifest carries the scenario hash, toolkit version, timing, scalar
analysis results, and a file inventory with SHA-256 content hashes, so
the manifest alone locates and verifies every output artifact.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__


class ManifestError(ValueError):
    pass


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    scenario_hash: str
    version: str = __version__
    elapsed_s: float = 0.0
    results: dict = field(default_factory=dict)   # name -> float
    files: dict = field(default_factory=dict)     # relative path -> sha256

    def add_file(self, root, relpath):
        self.files[str(relpath)] = sha256_file(Path(root) / relpath)

    def text(self) -> str:
        out = ["[manifest]",
               f"scenario_hash = {self.scenario_hash}",
               f"version = {self.version}",
               f"elapsed_s = {self.elapsed_s:.3f}",
               "", "[results]"]
        for name in sorted(self.results):
            out.append(f"{name} = {float(self.results[name])!r}")
        out += ["", "[files]"]
        for name in sorted(self.files):
            out.append(f"{name} = {self.files[name]}")
        return "\n".join(out) + "\n"

    def write(self, root, name="manifest.txt"):
        Path(root, name).write_text(self.text())


def parse_manifest(text: str) -> RunManifest:
    section = None
    head, results, files = {}, {}, {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1]
            continue
        if "=" not in line:
            raise ManifestError(f"malformed manifest line: {line!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if section == "manifest":
            head[key] = value
        elif section == "results":
            results[key] = float(value)
        elif section == "files":
            files[key] = value
        else:
            raise ManifestError(f"line outside known section: {line!r}")
    if "scenario_hash" not in head:
        raise ManifestError("manifest lacks a scenario hash")
    return RunManifest(scenario_hash=head["scenario_hash"],
                       version=head.get("version", "?"),
                       elapsed_s=float(head.get("elapsed_s", "0")),
                       results=results, files=files)


def verify_manifest(root, name="manifest.txt") -> RunManifest:
    """Re-hash every inventoried file; raise on any mismatch."""
    root = Path(root)
    man = parse_manifest((root / name).read_text())
    problems = []
    for rel, digest in man.files.items():
        path = root / rel
        if not path.exists():
            problems.append(f"missing artifact: {rel}")
        elif sha256_file(path) != digest:
            problems.append(f"content hash mismatch: {rel}")
    if problems:
        raise ManifestError("; ".join(problems))
    return man
