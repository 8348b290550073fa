"""Scenario files and the counts file formats (JSON and CSV)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .bell import CoincidenceCounts
from .errors import CountsParseError, ValidationError
from .model import APPARATUS_PRESETS, AnalyzerConfig, ApparatusSpec, parse_hypothesis
from .montecarlo import DEFAULT_CHUNK_SIZE, MAX_SEED
from .spacetime import DEFAULT_GEOMETRY, GEOMETRY_PRESETS, ExperimentGeometry

COUNTS_SCHEMA = "nullresult.counts/1"
CSV_HEADER = ["n_ab", "n_ab_perp", "n_aperp_b", "n_aperp_bperp", "n_pairs", "angle_deg", "hypothesis", "seed"]
CHSH_ROW_ORDER = ("ab", "ab'", "a'b", "a'b'")

_SCENARIO_KEYS = {
    "hypothesis",
    "angle_deg",
    "angles_deg",
    "apparatus",
    "trials",
    "seed",
    "chunk_size",
    "workers",
    "absorption_is_ordinary",
    "geometry",
    "output",
}


@dataclass(frozen=True)
class Scenario:
    """Complete description of one predict/simulate/geometry run.

    ``angles_deg`` holds the four orientations (a, a', b, b') for CHSH
    runs; ``angle_deg`` is a single relative analyzer angle.  ``output`` is
    a file prefix; None means report to stdout only.
    """

    hypothesis: str = "qm"
    angle_deg: float | None = 22.5
    angles_deg: tuple[float, float, float, float] | None = None
    apparatus: ApparatusSpec = field(default_factory=ApparatusSpec)
    trials: int = 1_000_000
    seed: int = 42
    chunk_size: int = DEFAULT_CHUNK_SIZE
    workers: int = 1
    absorption_is_ordinary: bool = True
    geometry: ExperimentGeometry = DEFAULT_GEOMETRY
    output: str | None = None

    def __post_init__(self):
        parse_hypothesis(self.hypothesis)
        if self.angle_deg is not None and not _is_real(self.angle_deg):
            raise ValidationError("must be a finite number", "angle_deg")
        if self.angles_deg is not None:
            if len(self.angles_deg) != 4 or not all(_is_real(x) for x in self.angles_deg):
                raise ValidationError("must be four finite numbers (a, a', b, b')", "angles_deg")
            object.__setattr__(self, "angles_deg", tuple(float(x) for x in self.angles_deg))
        if self.angle_deg is None and self.angles_deg is None:
            raise ValidationError("one of angle_deg or angles_deg is required", "angle_deg")
        if self.angle_deg is not None:
            object.__setattr__(self, "angle_deg", float(self.angle_deg))
        _check_int(self.trials, "trials", 1)
        _check_int(self.seed, "seed", 0, MAX_SEED - 1)
        _check_int(self.chunk_size, "chunk_size", 1)
        _check_int(self.workers, "workers", 1)
        if not isinstance(self.absorption_is_ordinary, bool):
            raise ValidationError("must be true or false", "absorption_is_ordinary")

    @property
    def hypothesis_obj(self):
        return parse_hypothesis(self.hypothesis)

    @property
    def config(self) -> AnalyzerConfig | None:
        return AnalyzerConfig.from_degrees(*self.angles_deg) if self.angles_deg else None

    def to_dict(self) -> dict:
        return {
            "hypothesis": self.hypothesis,
            "angle_deg": self.angle_deg,
            "angles_deg": list(self.angles_deg) if self.angles_deg else None,
            "apparatus": self.apparatus.to_dict(),
            "trials": self.trials,
            "seed": self.seed,
            "chunk_size": self.chunk_size,
            "workers": self.workers,
            "absorption_is_ordinary": self.absorption_is_ordinary,
            "geometry": self.geometry.to_dict(),
            "output": self.output,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        if not isinstance(d, dict):
            raise ValidationError("scenario must be a JSON object", "scenario")
        unknown = set(d) - _SCENARIO_KEYS
        if unknown:
            raise ValidationError(f"unknown field(s) {sorted(unknown)}", "scenario")
        kw = dict(d)
        if "apparatus" in kw:
            kw["apparatus"] = _nested(kw["apparatus"], "apparatus", APPARATUS_PRESETS, ApparatusSpec)
        if "geometry" in kw:
            kw["geometry"] = _nested(kw["geometry"], "geometry", GEOMETRY_PRESETS, ExperimentGeometry)
        if kw.get("angles_deg") is not None:
            if not isinstance(kw["angles_deg"], (list, tuple)):
                raise ValidationError("must be a list of four numbers", "angles_deg")
            kw["angles_deg"] = tuple(kw["angles_deg"])
        return cls(**kw)


def _is_real(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _check_int(value, name, lo, hi=None):
    if isinstance(value, bool) or not isinstance(value, int) or value < lo or (hi is not None and value > hi):
        rng = f"[{lo}, {hi}]" if hi is not None else f">= {lo}"
        raise ValidationError(f"must be an integer {rng}, got {value!r}", name)


def _nested(value, name, presets, cls):
    if isinstance(value, str):
        try:
            return presets[value]
        except KeyError:
            raise ValidationError(f"unknown preset {value!r}; choose from {sorted(presets)}", name) from None
    if isinstance(value, cls):
        return value
    if not isinstance(value, dict):
        raise ValidationError("must be an object or a preset name", name)
    try:
        return cls.from_dict(value)
    except ValidationError as exc:
        if exc.path and exc.path != name:
            raise ValidationError(str(exc).split(": ", 1)[-1], f"{name}.{exc.path}") from None
        raise
    except TypeError as exc:
        raise ValidationError(str(exc), name) from None


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CountsParseError(f"{path}: {exc.msg}", exc.lineno, exc.colno) from None
    return Scenario.from_dict(data)


def dump_scenario(s: Scenario) -> str:
    return json.dumps(s.to_dict(), indent=2)


# ---------------------------------------------------------------------------
# Counts files
# ---------------------------------------------------------------------------


def counts_to_json(counts: list[CoincidenceCounts]) -> str:
    return json.dumps({"schema": COUNTS_SCHEMA, "counts": [c.to_dict() for c in counts]}, indent=2)


def counts_to_csv(counts: list[CoincidenceCounts]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in _chsh_ordered(counts):
        w.writerow(
            [
                c.n_ab,
                c.n_ab_perp,
                c.n_aperp_b,
                c.n_aperp_bperp,
                c.n_pairs,
                "" if c.angle_deg is None else repr(c.angle_deg),
                c.hypothesis,
                "" if c.seed is None else c.seed,
            ]
        )
    return buf.getvalue()


def _chsh_ordered(counts):
    if len(counts) == 4 and {c.setting for c in counts} == set(CHSH_ROW_ORDER):
        by = {c.setting: c for c in counts}
        return [by[p] for p in CHSH_ROW_ORDER]
    return list(counts)


def parse_counts_json(text: str) -> list[CoincidenceCounts]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CountsParseError(exc.msg, exc.lineno, exc.colno) from None
    if isinstance(data, dict) and "counts" in data:
        items = data["counts"]
    elif isinstance(data, list):
        items = data
    elif isinstance(data, dict):
        items = [data]
    else:
        raise CountsParseError("expected an object with a 'counts' list")
    if not isinstance(items, list):
        raise CountsParseError("'counts' must be a list")
    out = []
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise CountsParseError(f"counts[{i}] must be an object")
        try:
            out.append(CoincidenceCounts.from_dict(item))
        except (ValidationError, TypeError) as exc:
            raise CountsParseError(f"counts[{i}]: {exc}") from None
    if not out:
        raise CountsParseError("no counts records")
    return out


def parse_counts_csv(text: str) -> list[CoincidenceCounts]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise CountsParseError("empty file", 1)
    header = [h.strip() for h in rows[0]]
    if header != CSV_HEADER:
        raise CountsParseError(f"header must be {','.join(CSV_HEADER)}", 1, 1)
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise CountsParseError(f"expected {len(CSV_HEADER)} fields, got {len(row)}", lineno)
        values = {}
        for col, (name, raw) in enumerate(zip(CSV_HEADER, row), start=1):
            raw = raw.strip()
            try:
                if name in ("angle_deg",):
                    values[name] = float(raw) if raw else None
                elif name == "hypothesis":
                    if raw:
                        parse_hypothesis(raw)
                    values[name] = raw
                elif name == "seed":
                    values[name] = int(raw) if raw else None
                else:
                    n = int(raw)
                    if n < 0:
                        raise CountsParseError(f"{name} must be non-negative, got {n}", lineno, col)
                    values[name] = n
            except CountsParseError:
                raise
            except ValueError as exc:
                raise CountsParseError(f"bad value {raw!r} for {name}: {exc}", lineno, col) from None
        try:
            out.append(CoincidenceCounts(**values))
        except ValidationError as exc:
            col = CSV_HEADER.index(exc.path) + 1 if exc.path in CSV_HEADER else None
            raise CountsParseError(str(exc), lineno, col) from None
    if not out:
        raise CountsParseError("no data rows", 2)
    if len(out) == 4 and all(c.setting is None for c in out):
        out = [replace(c, setting=p) for c, p in zip(out, CHSH_ROW_ORDER)]
    return out


def read_counts(path: str | Path) -> list[CoincidenceCounts]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc
    if path.suffix.lower() == ".csv":
        return parse_counts_csv(text)
    return parse_counts_json(text)


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc
    return path
