"""Deterministic artifacts: CSV tables, JSON payloads, run manifests.

Every command-line run writes its numbers as CSV (UTF-8, LF endings,
'.' decimal point) plus a JSON manifest that snapshots the fully
resolved configuration.  Replaying a manifest reproduces the CSV bytes
exactly; only the manifest timestamp differs.  The readers here feed
the resilience pipeline, which consumes the sampling outputs of the
other commands from disk.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "RunManifest",
    "format_value",
    "write_csv",
    "read_csv_rows",
    "read_table",
    "write_json",
    "read_json",
    "write_manifest",
    "read_manifest",
    "load_config",
    "env_overrides",
    "RATE_SCHEMA",
    "GAP_HIST_SCHEMA",
    "GAP_DENSITY_SCHEMA",
    "DENSITY_SCHEMA",
    "MONITOR_RMS_SCHEMA",
    "DEPHASING_SCHEMA",
    "PERCOLATION_SCHEMA",
    "ROUTE_SCHEMA",
    "RESILIENCE_SCHEMA",
]

ENV_PREFIX = "SNAKEQEC_"

# Column name -> reader type for every table the package emits.  Writers
# use the key order as the header; readers require all keys present.
RATE_SCHEMA = {
    "d": int, "p": float, "omega": float, "g_min": int, "method": str,
    "shots": int, "accepted": int, "failures": int,
    "rate": float, "ci_low": float, "ci_high": float, "seed": int,
}
GAP_HIST_SCHEMA = {
    "d": int, "p": float, "omega": float, "g_min": int,
    "gap": int, "count": int, "failure_count": int, "seed": int,
}
GAP_DENSITY_SCHEMA = {"d": int, "omega": float, "density": float}
DENSITY_SCHEMA = {"omega": float, "density": float}
MONITOR_RMS_SCHEMA = {
    "N": int, "lam": float, "nu": int, "n": int, "omega": float,
    "rms": float, "cr_bound": float, "noisy_cr_bound": float, "ratio": float,
}
DEPHASING_SCHEMA = {
    "encoding": str, "separation": float, "speed": float,
    "infidelity": float, "variance": float, "method": str,
}
PERCOLATION_SCHEMA = {
    "topology": str, "mode": str, "size": int, "trials": int, "seed": int,
    "deactivation_fraction": float, "spanning_probability": float,
    "ci_low": float, "ci_high": float,
}
ROUTE_SCHEMA = {
    "query": int, "source": str, "target": str, "reachable": int,
    "n_links": int, "increments": int, "duration": float,
}
RESILIENCE_SCHEMA = {
    "d": int, "logical_rate": float, "defect_rate": float,
    "rejection_rate": float, "cutoff_angle": float, "integral": float,
    "ratio": float, "rejection_term": float, "defect_term": float,
    "subdominant_bound": float, "total": float,
}


# ----------------------------------------------------------------------
# scalar formatting


def format_value(value) -> str:
    """Shortest round-trip text for one CSV cell.

    Floats use repr (shortest string that parses back to the same
    double), so identical numbers always produce identical bytes.
    """
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        value = value.item()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    raise TypeError(f"cannot format {type(value).__name__} as a CSV cell")


def _json_default(value):
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


# ----------------------------------------------------------------------
# CSV


def write_csv(path, columns, rows, manifest: str | None = None) -> None:
    """Write one table; the optional comment line names the manifest."""
    columns = tuple(columns)
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        if manifest is not None:
            fh.write(f"# manifest: {manifest}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            row = tuple(row)
            if len(row) != len(columns):
                raise ValueError(
                    f"row has {len(row)} cells, header has {len(columns)}")
            writer.writerow([format_value(cell) for cell in row])


def read_csv_rows(path) -> tuple[tuple[str, ...], list[dict[str, str]]]:
    """Header and raw string rows; '#' comment lines are skipped."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.split("\n") if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path} contains no CSV header")
    parsed = list(csv.reader(lines))
    header = tuple(parsed[0])
    rows = []
    for cells in parsed[1:]:
        if len(cells) != len(header):
            raise ValueError(f"{path}: row width does not match the header")
        rows.append(dict(zip(header, cells)))
    return header, rows


def read_table(path, schema: dict[str, type]) -> list[dict]:
    """Typed rows; every schema column must be present."""
    header, raw = read_csv_rows(path)
    missing = [c for c in schema if c not in header]
    if missing:
        raise ValueError(f"{path} is missing columns {missing}")
    out = []
    for idx, row in enumerate(raw):
        typed = {}
        for col, kind in schema.items():
            try:
                typed[col] = kind(row[col])
            except ValueError as exc:
                raise ValueError(
                    f"{path} row {idx + 1}: bad {col!r} value "
                    f"{row[col]!r}") from exc
        out.append(typed)
    return out


# ----------------------------------------------------------------------
# JSON


def write_json(path, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True,
                      ensure_ascii=False, default=_json_default)
    Path(path).write_text(text + "\n", encoding="utf-8", newline="\n")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


# ----------------------------------------------------------------------
# run manifests


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce one command-line run bit for bit.

    ``config`` is the fully resolved parameter mapping (defaults, config
    file, environment and flags already merged), restricted to JSON
    scalar/list values so it survives a round trip through disk.
    ``created`` is informational and excluded from reproducibility.
    """

    subcommand: str
    config: dict
    seed: int
    version: str
    created: str
    outputs: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "created": self.created,
            "outputs": list(self.outputs),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RunManifest":
        try:
            return cls(
                subcommand=str(payload["subcommand"]),
                config=dict(payload["config"]),
                seed=int(payload["seed"]),
                version=str(payload["version"]),
                created=str(payload["created"]),
                outputs=tuple(payload["outputs"]),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"not a run manifest: {exc}") from exc


def write_manifest(path, manifest: RunManifest) -> None:
    write_json(path, manifest.to_dict())


def read_manifest(path) -> RunManifest:
    return RunManifest.from_dict(read_json(path))


# ----------------------------------------------------------------------
# configuration files


def _parse_scalar(text: str):
    """One right-hand side: JSON first, then a bare string."""
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        # bare word such as  gmin = half  or  topology = square
        if text and all(part.strip() for part in text.split(",")):
            if "," in text:
                return [_parse_scalar(part) for part in text.split(",")]
            return text
        raise ValueError(f"cannot parse config value {text!r}") from None


def _parse_keyvalue(text: str) -> dict:
    out: dict = {}
    section = out
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise ValueError(f"line {lineno}: empty section name")
            section = out.setdefault(name, {})
            if not isinstance(section, dict):
                raise ValueError(f"line {lineno}: {name!r} is not a section")
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        section[key] = _parse_scalar(value)
    return out


def load_config(path) -> dict:
    """Key-value config with sections, or a JSON object as fallback."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        payload = json.loads(text)
    else:
        try:
            payload = _parse_keyvalue(text)
        except ValueError:
            try:
                payload = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ValueError(
                    f"{path} is neither key-value nor JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ValueError(f"{path} must hold a key-value mapping")
    return payload


def env_overrides(environ=None) -> dict:
    """Config keys taken from SNAKEQEC_* environment variables."""
    if environ is None:
        environ = os.environ
    out = {}
    for name, value in environ.items():
        if not name.startswith(ENV_PREFIX) or name == ENV_PREFIX:
            continue
        key = name[len(ENV_PREFIX):].lower()
        out[key] = _parse_scalar(value)
    return out
