"""CSV ingestion, simulation-config parsing, and table emission.

Input data schema (exact): header ``id,z,w,y,x1,...,xp``; one row per unit;
z in {0,1}; w and y must be empty exactly when z = 0; UTF-8, comma-delimited,
``.`` decimal point.  Output tables are CSV preceded by ``#``-prefixed
metadata lines, with floats printed to 17 significant digits so a re-parse
reproduces the binary values exactly.
"""

import csv
import hashlib
import io
import itertools
import json
from dataclasses import fields

import numpy as np

from .errors import SchemaError
from .model import OutcomeRange, StudyData
from .simulation import SimConfig

FORMAT_VERSION = "1"

# Fields whose JSON value is naturally a list; a flat list means one value,
# a list of lists means a grid over those values.
_LIST_FIELDS = {"beta", "gamma", "covariate_combo", "declared_range"}
_CONFIG_FIELDS = [f.name for f in fields(SimConfig)]


def fmt(value) -> str:
    """Render a number for output; floats use 17 significant digits."""
    if isinstance(value, float):
        if np.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


def read_study_csv(path, outcome_range: OutcomeRange) -> StudyData:
    """Parse the unit-level CSV schema into a StudyData."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file")
        if len(header) < 5 or header[:4] != ["id", "z", "w", "y"]:
            raise SchemaError(
                f"{path}: header must start with id,z,w,y,x1,... got {header[:4]}"
            )
        p = len(header) - 4
        expected = [f"x{i}" for i in range(1, p + 1)]
        if header[4:] != expected:
            raise SchemaError(
                f"{path}: covariate columns must be x1..x{p}, got {header[4:]}"
            )
        ids, z, w, y, x = [], [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4 + p:
                raise SchemaError(f"{path} row {lineno}: expected {4 + p} fields")
            uid, z_raw, w_raw, y_raw = row[0], row[1], row[2], row[3]
            if z_raw not in ("0", "1"):
                raise SchemaError(f"{path} row {lineno}: z must be 0 or 1, got {z_raw!r}")
            sampled = z_raw == "1"
            if sampled:
                if w_raw not in ("0", "1"):
                    raise SchemaError(
                        f"{path} row {lineno}: sampled row needs w in {{0,1}}, got {w_raw!r}"
                    )
                try:
                    y_val = float(y_raw)
                except ValueError:
                    raise SchemaError(
                        f"{path} row {lineno}: sampled row needs numeric y, got {y_raw!r}"
                    )
                if not outcome_range.y_lo <= y_val <= outcome_range.y_hi:
                    raise SchemaError(
                        f"{path} row {lineno} (id {uid!r}): y={y_val} outside the "
                        f"declared range [{outcome_range.y_lo}, {outcome_range.y_hi}]"
                    )
                w_val = float(w_raw)
            else:
                if w_raw != "" or y_raw != "":
                    raise SchemaError(
                        f"{path} row {lineno}: non-sampled row must leave w and y empty"
                    )
                w_val = np.nan
                y_val = np.nan
            try:
                x_vals = [float(v) for v in row[4:]]
            except ValueError:
                raise SchemaError(f"{path} row {lineno}: non-numeric covariate")
            ids.append(uid)
            z.append(sampled)
            w.append(w_val)
            y.append(y_val)
            x.append(x_vals)
    if not ids:
        raise SchemaError(f"{path}: no data rows")
    return StudyData(
        ids=tuple(ids),
        z=np.array(z, dtype=bool),
        w=np.array(w),
        y=np.array(y),
        x=np.array(x),
        outcome_range=outcome_range,
    )


def write_table(stream, columns, rows, metadata: dict) -> None:
    """Write ``#`` metadata lines, then a CSV table (floats at 17 sig. digits)."""
    for key, value in metadata.items():
        stream.write(f"# {key}: {value}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


def render_table(columns, rows, metadata: dict) -> str:
    buf = io.StringIO()
    write_table(buf, columns, rows, metadata)
    return buf.getvalue()


def read_table(path) -> tuple[dict, list[str], list[list[str]]]:
    """Re-parse a table written by :func:`write_table`."""
    metadata: dict = {}
    data_lines = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, value = body.split(":", 1)
                    metadata[key.strip()] = value.strip()
            elif line.strip():
                data_lines.append(line)
    rows = list(csv.reader(data_lines))
    if not rows:
        raise SchemaError(f"{path}: no table rows")
    return metadata, rows[0], rows[1:]


def config_hash(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _is_grid(name: str, value) -> bool:
    if not isinstance(value, list):
        return False
    if name in _LIST_FIELDS:
        return bool(value) and isinstance(value[0], list)
    return True


def expand_config_grid(document: dict) -> list[SimConfig]:
    """Expand a config document into the cartesian product of its list-valued fields.

    Unknown keys are rejected, so a typo never silently shrinks a grid.
    """
    if not isinstance(document, dict):
        raise SchemaError("config document must be a JSON object")
    unknown = sorted(set(document) - set(_CONFIG_FIELDS))
    if unknown:
        raise SchemaError(f"unknown config keys: {', '.join(unknown)}")
    axes: list[tuple[str, list]] = []
    for name in _CONFIG_FIELDS:
        if name not in document:
            continue
        value = document[name]
        axes.append((name, value if _is_grid(name, value) else [value]))
    configs = []
    for combo in itertools.product(*(values for _, values in axes)):
        kwargs = {}
        for (name, _), value in zip(axes, combo):
            if name in _LIST_FIELDS and value is not None:
                value = tuple(value)
            kwargs[name] = value
        try:
            configs.append(SimConfig(**kwargs))
        except TypeError as exc:
            raise SchemaError(f"bad config value: {exc}")
    return configs


def load_config_grid(path) -> list[SimConfig]:
    with open(path, encoding="utf-8") as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})")
    return expand_config_grid(document)
