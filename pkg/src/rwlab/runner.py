"""Scenario configs, result files and golden-file regression."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import platform
import shutil
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .scenarios import REGISTRY, ScenarioResult, run

CONFIG_KEYS = ("scenario", "seed", "options", "output_dir")
DEFAULT_OUT = "rwlab_out"


class ConfigError(ValueError):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _same_type(default, value) -> bool:
    if isinstance(default, bool) or isinstance(value, bool):
        return isinstance(default, bool) and isinstance(value, bool)
    if isinstance(default, (int, float)):
        return isinstance(value, (int, float))
    if isinstance(default, (list, tuple)):
        return isinstance(value, (list, tuple))
    return isinstance(value, type(default))


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    seed: int = 0
    options: dict = field(default_factory=dict)
    output_dir: str | None = None

    def __post_init__(self):
        if self.scenario not in REGISTRY:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {', '.join(REGISTRY)}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        defaults = REGISTRY[self.scenario][1]
        for k, v in self.options.items():
            if k not in defaults:
                raise ConfigError(f"unknown option {k!r} for scenario {self.scenario!r}")
            if not _same_type(defaults[k], v):
                raise ConfigError(f"option {k!r} should look like {defaults[k]!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        if not isinstance(d, dict):
            raise ConfigError("a config must be a JSON object")
        extra = set(d) - set(CONFIG_KEYS)
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
        if "scenario" not in d:
            raise ConfigError("config needs a 'scenario'")
        return cls(d["scenario"], d.get("seed", 0), dict(d.get("options") or {}), d.get("output_dir"))

    @property
    def resolved_options(self) -> dict:
        opt = dict(REGISTRY[self.scenario][1])
        opt.update(self.options)
        return opt

    def canonical(self) -> str:
        body = {"scenario": self.scenario, "seed": self.seed, "options": self.resolved_options, "version": __version__}
        return json.dumps(_jsonable(body), sort_keys=True, separators=(",", ":"))

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def out_root(self) -> Path:
        return Path(self.output_dir or os.environ.get("RWLAB_OUT", DEFAULT_OUT))

    def run_dir(self) -> Path:
        return self.out_root() / f"{self.scenario}-{self.config_hash[:12]}"


def load_configs(path: str | Path) -> list[ScenarioConfig]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    items = data if isinstance(data, list) else [data]
    return [ScenarioConfig.from_dict(d) for d in items]


@dataclass
class ResultRecord:
    scenario: str
    config_hash: str
    metric: str
    value: object
    uncertainty: float | None
    exact: bool
    band: float | None
    version: str = __version__


def records(cfg: ScenarioConfig, res: ScenarioResult) -> list[ResultRecord]:
    return [ResultRecord(cfg.scenario, cfg.config_hash, m.name, m.value, m.uncertainty, m.exact, m.band) for m in res.metrics]


def _sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_outputs(cfg: ScenarioConfig, res: ScenarioResult, runtime: float) -> Path:
    """Write results.json, tables/*.csv and manifest.json into the run directory atomically."""
    final = cfg.run_dir()
    final.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{final.name}-", dir=final.parent))
    try:
        results = {
            "scenario": cfg.scenario,
            "config_hash": cfg.config_hash,
            "version": __version__,
            "seed": cfg.seed,
            "options": cfg.resolved_options,
            "passed": res.passed,
            "checks": [asdict(c) for c in res.checks],
            "records": [asdict(r) for r in records(cfg, res)],
        }
        (tmp / "results.json").write_text(dumps(results))
        (tmp / "tables").mkdir()
        for name, (header, rows) in res.tables.items():
            with open(tmp / "tables" / f"{name}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows(_jsonable(rows))
        files = {str(p.relative_to(tmp)): _sha(p) for p in sorted(tmp.rglob("*")) if p.is_file()}
        manifest = {
            "config": json.loads(cfg.canonical()),
            "config_hash": cfg.config_hash,
            "runtime_seconds": round(runtime, 3),
            "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "platform": platform.platform(),
            "files": files,
        }
        (tmp / "manifest.json").write_text(dumps(manifest))
        if final.exists():
            shutil.rmtree(final)
        os.replace(tmp, final)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return final


def execute(cfg: ScenarioConfig) -> tuple[Path, bool]:
    t0 = time.perf_counter()
    res = run(cfg.scenario, cfg.options, cfg.seed)
    path = write_outputs(cfg, res, time.perf_counter() - t0)
    return path, res.passed


def execute_many(cfgs: list[ScenarioConfig], workers: int = 1) -> list[tuple[Path, bool]]:
    if workers <= 1 or len(cfgs) <= 1:
        return [execute(c) for c in cfgs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(execute, cfgs))


# ---------------------------------------------------------------------------
# regression against golden results


@dataclass
class Mismatch:
    scenario: str
    metric: str
    golden: object
    value: object
    tolerance: float | None


def _compare(g: dict, r: dict) -> Mismatch | None:
    gv, rv = g["value"], r["value"]
    if g["exact"] or isinstance(gv, (str, bool)) or gv is None:
        return None if gv == rv else Mismatch(g["scenario"], g["metric"], gv, rv, 0.0)
    if rv is None or isinstance(rv, (str, bool)):
        return Mismatch(g["scenario"], g["metric"], gv, rv, None)
    tol = g["band"] if g.get("band") is not None else 1e-12 * max(1.0, abs(gv))
    return None if abs(rv - gv) <= tol else Mismatch(g["scenario"], g["metric"], gv, rv, tol)


def compare_results(golden: dict, result: dict) -> list[Mismatch]:
    """Metrics of ``result`` that fall outside the golden tolerance bands."""
    got = {r["metric"]: r for r in result["records"]}
    out = []
    for g in golden["records"]:
        r = got.get(g["metric"])
        if r is None:
            out.append(Mismatch(golden["scenario"], g["metric"], g["value"], None, None))
            continue
        m = _compare(g, r)
        if m:
            out.append(m)
    return out


def regress(golden_dir: str | Path, results_dir: str | Path) -> dict:
    """Compare every golden results.json with the run of the same scenario under ``results_dir``.

    Runs are matched by scenario name; the config hash is reported so that
    perturbed configs can be compared against a golden.
    """
    goldens = sorted(Path(golden_dir).rglob("results.json"))
    runs = {}
    for p in sorted(Path(results_dir).rglob("results.json")):
        d = json.loads(p.read_text())
        runs.setdefault(d["scenario"], []).append(d)
    report = {}
    for gp in goldens:
        g = json.loads(gp.read_text())
        cands = runs.get(g["scenario"], [])
        match = next((c for c in cands if c["config_hash"] == g["config_hash"]), cands[0] if cands else None)
        if match is None:
            report[g["scenario"]] = {"status": "missing", "mismatches": []}
            continue
        mm = compare_results(g, match)
        report[g["scenario"]] = {"status": "ok" if not mm else "drift", "config_hash": match["config_hash"], "mismatches": [asdict(m) for m in mm]}
    for name in sorted(set(runs) - set(report)):
        report[name] = {"status": "no-golden", "mismatches": []}
    return report
