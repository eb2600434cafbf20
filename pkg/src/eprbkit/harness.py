"""Simulated EPRB runs: per-pair shot generation from a quantum or hidden-variable
source, line-delimited JSON shot files, and correlation estimates from them.

Shots are generated in blocks, one block of ``shots_per_pair`` runs for each
configured setting pair.  Each pair draws from its own random stream keyed by
``(seed, pair index)``, so adding or dropping a pair never changes the data of
another.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from . import _jsonio
from .consistency import CorrelationEstimate, estimate_from_products
from .labels import MEASURED_PAIRS, PORT_A, PORT_B, SETTINGS, CorrelationSet, file_tag, pair_label, split_pair
from .lhv import LhvModel, load_model, model_from_dict, sample_outcomes
from .quantum import bell_state, joint_probabilities

log = logging.getLogger(__name__)

SHOT_FIELDS = ("run_index", "setting_a", "setting_b", "outcome_a", "outcome_b")
SUMMARY_NAME = "summary.json"


class ConfigError(ValueError):
    pass


class ShotFileError(ValueError):
    pass


@dataclass(frozen=True)
class QmSource:
    """Bell-state photons measured with analyzers at the given angles (radians)."""

    angles: Mapping[str, float]

    def __post_init__(self):
        missing = [s for s in SETTINGS if s not in self.angles]
        if missing:
            raise ConfigError(f"QM source lacks angles for {missing}")
        object.__setattr__(self, "angles", {s: float(self.angles[s]) for s in SETTINGS})

    def to_dict(self):
        return {"kind": "qm", "angles": dict(self.angles)}


@dataclass(frozen=True)
class LhvSource:
    model: LhvModel
    reference: str | None = None

    def to_dict(self):
        return {"kind": "lhv", "model": self.reference if self.reference else self.model.to_dict()}


@dataclass(frozen=True)
class ExperimentConfig:
    source: QmSource | LhvSource
    shots_per_pair: int
    seed: int
    pairs: tuple[str, ...] = MEASURED_PAIRS

    def __post_init__(self):
        n = self.shots_per_pair
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise ConfigError(f"shots_per_pair must be a positive integer, got {n!r}")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        pairs = tuple(_parse_pair(p) for p in self.pairs)
        if not pairs or len(set(pairs)) != len(pairs):
            raise ConfigError(f"pairs must be a nonempty list without repeats, got {self.pairs!r}")
        object.__setattr__(self, "pairs", tuple(p for p in MEASURED_PAIRS if p in pairs))
        object.__setattr__(self, "shots_per_pair", int(n))
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self):
        return {"source": self.source.to_dict(), "shots_per_pair": self.shots_per_pair,
                "seed": self.seed, "pairs": list(self.pairs)}


def _parse_pair(p) -> str:
    if isinstance(p, str):
        label = p
    else:
        try:
            label = pair_label(*p)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad pair {p!r}") from exc
    if label not in MEASURED_PAIRS:
        raise ConfigError(f"pair {p!r} is not a co-measurable (A-side, B-side) pair")
    return label


def config_from_dict(d: dict, base_dir: Path | None = None) -> ExperimentConfig:
    try:
        src = d["source"]
        kind = src.get("kind")
        if kind == "qm":
            source = QmSource(src["angles"])
        elif kind == "lhv":
            ref = src["model"]
            if isinstance(ref, str):
                path = Path(ref)
                if base_dir is not None and not path.is_absolute():
                    path = base_dir / path
                if not path.exists():
                    raise ConfigError(f"model file not found: {path}")
                source = LhvSource(load_model(path), ref)
            else:
                source = LhvSource(model_from_dict(ref))
        else:
            raise ConfigError(f"unknown source kind {kind!r}")
        return ExperimentConfig(source, d["shots_per_pair"], d["seed"],
                                tuple(d.get("pairs", MEASURED_PAIRS)))
    except KeyError as exc:
        raise ConfigError(f"config is missing field {exc.args[0]!r}") from None
    except (TypeError, AttributeError) as exc:
        raise ConfigError(f"malformed config: {exc}") from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path) as f:
            d = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(d, base_dir=path.parent)


def pair_stream(seed: int, pair: str) -> np.random.Generator:
    """Independent generator for one setting pair of one experiment."""
    index = MEASURED_PAIRS.index(pair)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def qm_outcomes(angle_a: float, angle_b: float, n: int,
                rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    probs = joint_probabilities(bell_state().density(), angle_a, angle_b)
    idx = rng.choice(4, size=n, p=probs)
    a = np.where(idx < 2, 1, -1).astype(np.int8)
    b = np.where(idx % 2 == 0, 1, -1).astype(np.int8)
    return a, b


def generate_pair(config: ExperimentConfig, pair: str) -> tuple[np.ndarray, np.ndarray]:
    xa, yb = split_pair(pair)
    rng = pair_stream(config.seed, pair)
    src = config.source
    if isinstance(src, QmSource):
        return qm_outcomes(src.angles[xa], src.angles[yb], config.shots_per_pair, rng)
    return sample_outcomes(src.model, xa, yb, config.shots_per_pair, rng)


def format_shots(pair: str, a: np.ndarray, b: np.ndarray) -> str:
    xa, yb = split_pair(pair)
    template = ('{{"run_index": {}, "setting_a": ' + json.dumps(xa) + ', "setting_b": '
                + json.dumps(yb) + ', "outcome_a": {}, "outcome_b": {}}}')
    lines = map(template.format, range(1, len(a) + 1), a.tolist(), b.tolist())
    return "\n".join(lines) + "\n"


def shot_path(out_dir, pair: str) -> Path:
    return Path(out_dir) / f"shots_{file_tag(pair)}.jsonl"


@dataclass
class ExperimentResult:
    estimates: dict[str, CorrelationEstimate]
    files: dict[str, Path] = field(default_factory=dict)

    @property
    def correlations(self) -> CorrelationSet:
        return CorrelationSet({p: e.value for p, e in self.estimates.items()},
                              {p: e.se for p, e in self.estimates.items()})

    def summary(self) -> dict:
        return {p: {"E": e.value, "SE": e.se, "N": e.n} for p, e in self.estimates.items()}


def run_experiment(config: ExperimentConfig, out_dir=None, workers: int = 1) -> ExperimentResult:
    """Generate every configured pair; write shot files and a summary when ``out_dir`` is set."""
    if out_dir is not None:
        out_dir = Path(out_dir)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc

    def one(pair):
        a, b = generate_pair(config, pair)
        path = None
        if out_dir is not None:
            path = shot_path(out_dir, pair)
            path.write_text(format_shots(pair, a, b))
        est = estimate_from_products(a.astype(np.int64) * b)
        log.debug("pair %s: E=%.6f SE=%.6f N=%d", pair, est.value, est.se, est.n)
        return pair, est, path

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, config.pairs))
    else:
        results = [one(p) for p in config.pairs]
    res = ExperimentResult({p: e for p, e, _ in results},
                           {p: f for p, _, f in results if f is not None})
    if out_dir is not None:
        with open(out_dir / SUMMARY_NAME, "w") as f:
            _jsonio.dump(res.summary(), f)
    return res


def read_shot_file(path) -> tuple[str, np.ndarray, np.ndarray]:
    """Parse and validate one shot file; returns ``(pair, outcomes_a, outcomes_b)``."""
    path = Path(path)
    a, b = [], []
    pair = None
    last = None
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ShotFileError(f"{where}: not valid JSON ({exc.msg})") from None
            if not isinstance(rec, dict) or set(rec) != set(SHOT_FIELDS):
                raise ShotFileError(f"{where}: expected fields {SHOT_FIELDS}")
            i, xa, yb, oa, ob = (rec[k] for k in SHOT_FIELDS)
            if xa not in PORT_A or yb not in PORT_B:
                raise ShotFileError(f"{where}: bad settings {xa!r}, {yb!r}")
            this = xa + yb
            if pair is None:
                pair = this
            elif this != pair:
                raise ShotFileError(f"{where}: setting pair {this} differs from {pair}")
            if type(oa) is not int or type(ob) is not int or oa not in (1, -1) or ob not in (1, -1):
                raise ShotFileError(f"{where}: outcomes must be +1 or -1, got {oa!r}, {ob!r}")
            if type(i) is not int or (last is not None and i <= last):
                raise ShotFileError(f"{where}: run_index {i!r} is not strictly increasing")
            last = i
            a.append(oa)
            b.append(ob)
    if pair is None:
        raise ShotFileError(f"{path}: no shot records")
    return pair, np.array(a, dtype=np.int8), np.array(b, dtype=np.int8)


def shot_files(source) -> list[Path]:
    if isinstance(source, (str, Path)):
        source = Path(source)
        if source.is_dir():
            return sorted(source.glob("shots_*.jsonl"))
        return [source]
    return [Path(p) for p in source]


def estimate(source: str | Path | Iterable) -> CorrelationSet:
    """Correlations and standard errors from a shot directory or list of files.

    Only co-measured pairs can appear; AA' and BB' stay absent.
    """
    files = shot_files(source)
    if not files:
        raise ShotFileError("no pairs: no shot files found")
    values, errors = {}, {}
    for path in files:
        pair, a, b = read_shot_file(path)
        if pair in values:
            raise ShotFileError(f"{path}: pair {pair} appears in more than one file")
        est = estimate_from_products(a.astype(np.int64) * b)
        values[pair], errors[pair] = est.value, est.se
    return CorrelationSet(values, errors)
