"""Batch command-line front end.

Subcommands: ``synth``, ``derive-weights``, ``estimate``, ``evaluate`` and
``report``.  Settings come from flags, then an optional ``--config`` JSON
file, then defaults.  Errors exit with 2 (configuration), 3 (data) or 4
(algorithm) and print a JSON object on stderr.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from . import gbt
from .bidir import EngineConfig, TargetMode, WeightSchedule, derive_weights, estimate_baseline
from .errors import ConfigError, CvrError, InvalidConfig
from .evaluation import EvalProtocol, aggregate_cvr_report, cvr_factor, event_voltages, run_virtual_evaluation
from .evaluation.cvr import CvrResult
from .ingest import Dataset, TIMESTAMP_FORMAT, load_csv, load_events, read_holidays, write_csv, write_events, \
    write_holidays
from .similar import SimilarityConfig
from .synth import SynthConfig, generate
from .timeseries import Resolution, season_of

log = logging.getLogger("cvr_baseline")

RELAX_RETRIES = 3
RELAX_FACTOR = 1.25


@dataclass
class RunConfig:
    data: Optional[str] = None
    events: Optional[str] = None
    holidays: Optional[str] = None
    temperature: Optional[str] = None
    weights: Optional[str] = None
    output_dir: str = "out"
    feeder_id: Optional[str] = None
    resolution: int = 5
    context_hours: float = 4.0
    match_hours: float = 2.0
    eps_f: float = 1.0
    eps_b: float = 1.0
    eps_sim: int = 5
    growth: str = "LevelWise"
    # overrides of the tuned defaults for the chosen growth mode and resolution
    hyperparams: dict = field(default_factory=dict)
    mode: str = "dP"
    k: int = 10
    seed: int = 0
    derive_inline: bool = False
    relax_step: bool = False
    # evaluate
    season: str = "summer"
    start: str = "15:00"
    end: str = "18:00"
    count: int = 50
    # synth
    synth: dict = field(default_factory=dict)

    def __post_init__(self):
        try:
            Resolution(self.resolution)
            TargetMode(self.mode)
            gbt.Growth(self.growth)
        except ValueError as err:
            raise InvalidConfig(str(err)) from None
        for name, hours in (("context_hours", self.context_hours), ("match_hours", self.match_hours)):
            samples = hours * 60 / self.resolution
            if samples < 1 or samples != int(samples):
                raise InvalidConfig(f"{name}={hours} is not a whole number of {self.resolution}-min samples")
        if self.k < 1:
            raise InvalidConfig("k must be positive")

    @property
    def context_len(self) -> int:
        return int(self.context_hours * 60 // self.resolution)

    @property
    def match_len(self) -> int:
        return int(self.match_hours * 60 // self.resolution)

    def hp(self) -> gbt.GbtHyperparams:
        try:
            return gbt.default_hyperparams(self.resolution, gbt.Growth(self.growth), **self.hyperparams)
        except TypeError as err:
            raise InvalidConfig(f"bad hyperparameter override: {err}") from None

    def engine(self) -> EngineConfig:
        sim = SimilarityConfig(self.eps_f, self.eps_b, self.eps_sim, self.match_len)
        return EngineConfig(similarity=sim, context_len=self.context_len, mode=TargetMode(self.mode),
                            n_virtual_days=self.k, relax_retries=RELAX_RETRIES if self.relax_step else 0,
                            relax_factor=RELAX_FACTOR)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def _fmt(x) -> str:
    return f"{float(x):.6f}"


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _round(obj):
    """Round floats to six decimals for stable JSON output."""
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_dataset(cfg: RunConfig, with_events: bool = True) -> Dataset:
    if not cfg.data:
        raise ConfigError("no data file given (--data)")
    for p in (cfg.data, cfg.events, cfg.holidays, cfg.temperature):
        if p and not Path(p).exists():
            raise ConfigError(f"file not found: {p}")
    holidays = read_holidays(cfg.holidays) if cfg.holidays else None
    ds = load_csv(cfg.data, Resolution(cfg.resolution), holidays=holidays, temperature_path=cfg.temperature,
                  feeder_id=cfg.feeder_id)
    if with_events:
        if not cfg.events:
            raise ConfigError("no event file given (--events)")
        ds = load_events(cfg.events, ds, cfg.context_len)
    return ds


# weight cache: one schedule object, or a list of them

def read_weight_cache(path) -> list:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"weight cache not found: {path}")
    raw = json.loads(p.read_text())
    items = raw if isinstance(raw, list) else [raw]
    return [WeightSchedule.from_dict(d) for d in items]


def write_weight_cache(path, schedules: list) -> None:
    items = [s.to_dict() for s in schedules]
    _write_json(Path(path), _round(items[0] if len(items) == 1 else items))


def _find_schedule(schedules: list, season: str, length: int, resolution: int, feeder: str) -> WeightSchedule:
    """Exact (season, L, resolution) match; a schedule from another feeder is used with a notice."""
    matches = [s for s in schedules if s.season == season and s.length == length and s.resolution == resolution]
    if not matches:
        raise ConfigError(f"no cached weights for season={season} L={length} resolution={resolution}")
    same = [s for s in matches if s.feeder == feeder]
    if not same:
        log.warning("using weights derived on feeder %s for feeder %s", matches[0].feeder, feeder)
    return (same or matches)[0]


def _event_groups(ds: Dataset) -> dict:
    groups = {}
    for ev in ds.events:
        groups.setdefault((season_of(ev.date), ev.length), []).append(ev)
    return groups


def _derive_all(ds: Dataset, cfg: RunConfig) -> list:
    engine, hp = cfg.engine(), cfg.hp()
    out = []
    for (season, length), evs in sorted(_event_groups(ds).items()):
        log.info("deriving weights for %s events of %d samples", season, length)
        out.append(derive_weights(ds, evs[0], cfg.k, engine, hp, cfg.seed))
    return out


def cmd_synth(cfg: RunConfig) -> int:
    scfg = SynthConfig.from_dict({"resolution": cfg.resolution, "seed": cfg.seed, **cfg.synth})
    ds = generate(scfg)
    out = _out_dir(cfg)
    write_csv(ds, out / "load.csv")
    write_events(ds, out / "events.json")
    write_holidays([d for d in scfg.holidays], out / "holidays.txt")
    res = ds.resolution
    with open(out / "truth.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "baseline_kw"])
        for date, load in sorted(ds.ground_truth.items()):
            origin = dt.datetime.combine(date, dt.time())
            for k, v in enumerate(load):
                w.writerow([(origin + dt.timedelta(minutes=k * res.minutes)).strftime(TIMESTAMP_FORMAT), _fmt(v)])
    _write_json(out / "synth_config.json", scfg.to_dict())
    log.info("wrote %d days and %d events to %s", len(ds.days), len(ds.events), out)
    return 0


def cmd_derive_weights(cfg: RunConfig) -> int:
    ds = _load_dataset(cfg)
    if not ds.events:
        raise ConfigError("event file holds no events to derive weights for")
    path = cfg.weights or str(_out_dir(cfg) / "weights.json")
    write_weight_cache(path, _derive_all(ds, cfg))
    log.info("wrote weight cache %s", path)
    return 0


def cmd_estimate(cfg: RunConfig) -> int:
    ds = _load_dataset(cfg)
    if cfg.weights and Path(cfg.weights).exists():
        schedules = read_weight_cache(cfg.weights)
    elif cfg.derive_inline:
        schedules = _derive_all(ds, cfg)
    else:
        raise ConfigError("no weight cache; run derive-weights or pass --derive-inline")
    engine, hp = cfg.engine(), cfg.hp()
    out = _out_dir(cfg)
    results = []
    res = ds.resolution
    with open(out / "baseline.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "baseline_kw", "observed_kw"])
        for ev in ds.events:
            sched = _find_schedule(schedules, season_of(ev.date), ev.length, res.minutes, ds.feeder_id)
            est = estimate_baseline(ds, ev, engine, hp, sched, cfg.seed)
            day = ds.day(ev.date)
            observed = day.load[ev.t_on:ev.t_off + 1]
            origin = dt.datetime.combine(ev.date, dt.time())
            for k, (b, o) in enumerate(zip(est.restored, observed)):
                ts = origin + dt.timedelta(minutes=(ev.t_on + k) * res.minutes)
                w.writerow([ts.strftime(TIMESTAMP_FORMAT), _fmt(b), _fmt(o)])
            r = cvr_factor(est.restored, observed, *event_voltages(day, ev), season=season_of(ev.date),
                           feeder_id=ds.feeder_id, date=ev.date.isoformat())
            results.append(r.to_dict())
            log.info("%s: CVR factor %.4f", ev.date, r.cvr_factor)
    _write_json(out / "cvr_results.json", _round(results))
    return 0


def cmd_evaluate(cfg: RunConfig) -> int:
    ds = _load_dataset(cfg, with_events=bool(cfg.events))
    protocol = EvalProtocol(season=cfg.season, start=cfg.start, end=cfg.end, count=cfg.count,
                            context_len=cfg.context_len, n_weight_days=cfg.k)
    result = run_virtual_evaluation(ds, protocol, cfg.engine(), cfg.hp(), cfg.seed)
    out = _out_dir(cfg)
    with open(out / "metrics_long.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "variant", "metric", "value"])
        for row in result.long_rows():
            w.writerow([*row[:3], _fmt(row[3])])
    with open(out / "variants.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variant", "mape_ratio", "nrmse_ratio", "energy_error_ratio", "mpe_pct"])
        for variant, rep in result.reports.items():
            w.writerow([variant, _fmt(rep.mape), _fmt(rep.nrmse), _fmt(rep.energy_error), _fmt(rep.mpe)])
    with open(out / "step_errors.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variant", "step", "mean_abs_error_kw"])
        for variant in result.reports:
            for k, v in enumerate(result.step_errors(variant).mean(axis=0)):
                w.writerow([variant, k + 1, _fmt(v)])
    _write_json(out / "summary.json", _round(result.summary()))
    return 0


def cmd_report(cfg: RunConfig, inputs: list) -> int:
    if not inputs:
        raise ConfigError("report needs at least one cvr_results.json")
    results = []
    for path in inputs:
        if not Path(path).exists():
            raise ConfigError(f"file not found: {path}")
        results.extend(CvrResult.from_dict(d) for d in json.loads(Path(path).read_text()))
    rows = aggregate_cvr_report(results)
    out = _out_dir(cfg)
    with open(out / "cvr_report.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["season", "feeder_id", "n", "mean_cvr_factor", "ci95_low", "ci95_high"])
        for r in rows:
            w.writerow([r["season"], r["feeder_id"], r["n"], _fmt(r["mean"]), _fmt(r["ci_low"]), _fmt(r["ci_high"])])
    for r in rows:
        print(f"{r['season']:<8} {r['feeder_id']:<16} n={r['n']:<4} {r['mean']:.6f} "
              f"[{r['ci_low']:.6f}, {r['ci_high']:.6f}]")
    return 0


# flag name -> RunConfig field; None default means "not given"
_FLAGS = {
    "data": str, "events": str, "holidays": str, "temperature": str, "weights": str, "output_dir": str,
    "feeder_id": str, "resolution": int, "context_hours": float, "match_hours": float, "eps_f": float,
    "eps_b": float, "eps_sim": int, "growth": str, "mode": str, "k": int, "seed": int, "season": str,
    "start": str, "end": str, "count": int,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvr-baseline", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("synth", "derive-weights", "estimate", "evaluate", "report"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON RunConfig file")
        for flag, typ in _FLAGS.items():
            p.add_argument("--" + flag.replace("_", "-"), dest=flag, type=typ, default=None)
        p.add_argument("--hp", action="append", default=[], metavar="KEY=VALUE",
                       help="hyperparameter override, e.g. --hp n_estimators=50")
        p.add_argument("--set", dest="synth_set", action="append", default=[], metavar="KEY=VALUE",
                       help="synthetic generator setting (synth only)")
        p.add_argument("--derive-inline", action="store_true", default=None)
        p.add_argument("--relax-step", action="store_true", default=None,
                       help="on too few similar days, retry with thresholds x1.25 (up to 3 times)")
        if name == "report":
            p.add_argument("inputs", nargs="*", help="cvr_results.json files")
    return parser


def _kv(items: list) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise InvalidConfig(f"expected KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides the defaults."""
    base = {}
    if args.config:
        p = Path(args.config)
        if not p.exists():
            raise ConfigError(f"config file not found: {args.config}")
        try:
            base = json.loads(p.read_text())
        except json.JSONDecodeError as err:
            raise InvalidConfig(f"config file is not valid JSON: {err}") from None
    for name in _FLAGS:
        value = getattr(args, name)
        if value is not None:
            base[name] = value
    for name in ("derive_inline", "relax_step"):
        if getattr(args, name):
            base[name] = True
    if args.hp:
        base["hyperparams"] = {**base.get("hyperparams", {}), **_kv(args.hp)}
    if args.synth_set:
        base["synth"] = {**base.get("synth", {}), **_kv(args.synth_set)}
    return RunConfig.from_dict(base)


def _error_json(err: Exception, code: int) -> str:
    family = {2: "config", 3: "data", 4: "algorithm"}.get(code, "internal")
    return json.dumps({"error": type(err).__name__, "category": family, "message": str(err), "exit_code": code})


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "synth":
            return cmd_synth(cfg)
        if args.command == "derive-weights":
            return cmd_derive_weights(cfg)
        if args.command == "estimate":
            return cmd_estimate(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(cfg)
        return cmd_report(cfg, args.inputs)
    except CvrError as err:
        print(_error_json(err, err.exit_code), file=sys.stderr)
        return err.exit_code
    except (json.JSONDecodeError, KeyError, TypeError) as err:
        print(_error_json(err, 2), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
