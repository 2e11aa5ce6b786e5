"""Monte Carlo sweeps over protocol scenarios, written as CSV."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from itertools import product
from pathlib import Path
from typing import Any

import numpy as np

from . import css_qpc, epr_qpc
from .codes import CssCode, load_css_code, steane_code
from .gf2 import BitString
from .network import intercept_resend
from .noise import (
    IDENTITY,
    PauliChannel,
    bit_flip_channel,
    compose,
    depolarizing_channel,
    phase_flip_channel,
    stream_rng,
)

SCENARIOS = ("epr-sweep", "css-keydist", "css-qpc", "eve-attack", "dishonest-charlie")
COLUMNS = ("scenario", "p", "q", "n", "m", "trials", "empirical", "analytic", "stderr", "seed", "verdict")
NOISE_MODELS = ("depolarizing", "bitphase")
EPR_CHUNK = 20_000
SIGMAS = 3.0


class SpecError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    scenario: str
    p: list[float] = field(default_factory=lambda: [0.0])
    q: list[float] = field(default_factory=lambda: [0.0])
    n: list[int] = field(default_factory=lambda: [10])
    m: list[int] = field(default_factory=lambda: [9])
    trials: int = 10_000
    seed: int = 0
    out: str | None = None
    noise: str = "depolarizing"
    threshold: float | None = None
    code: str | None = None  # code-pair file; Steane when None
    protocol: str = "epr"  # eve-attack target
    decoys: int | None = None  # EPR decoys per channel; None means n
    check_bits: int | None = None
    strategy: str = "flip-one"
    rho: float = 0.5
    full_protocol: bool = False  # dishonest-charlie: run real CSS comparisons
    workers: int = 1

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise SpecError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if self.trials < 1:
            raise SpecError("trials must be at least 1")
        if self.noise not in NOISE_MODELS:
            raise SpecError(f"noise must be one of {NOISE_MODELS}")
        if self.protocol not in ("epr", "css"):
            raise SpecError("protocol must be 'epr' or 'css'")
        if self.strategy not in css_qpc.CHARLIE_STRATEGIES:
            raise SpecError(f"strategy must be one of {css_qpc.CHARLIE_STRATEGIES}")
        for name in ("p", "q", "n", "m"):
            if not getattr(self, name):
                raise SpecError(f"grid axis {name} is empty")
        for v in self.p + self.q + [self.rho]:
            if not 0.0 <= v <= 1.0:
                raise SpecError(f"probability {v} outside [0, 1]")
        if any(v < 1 for v in self.n):
            raise SpecError("n values must be at least 1")
        if any(v < 0 for v in self.m):
            raise SpecError("m values must be non-negative")
        if self.threshold is not None and not 0.0 <= self.threshold <= 1.0:
            raise SpecError("threshold must lie in [0, 1]")
        if self.workers < 1:
            raise SpecError("workers must be at least 1")

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> ExperimentSpec:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise SpecError(f"unknown config keys: {', '.join(sorted(unknown))}")
        data = dict(data)
        for name in ("p", "q", "n", "m"):
            if name in data and not isinstance(data[name], list):
                data[name] = [data[name]]
        return cls(**data)


def _channel(noise: str, p: float, q: float) -> PauliChannel:
    if noise == "depolarizing":
        return depolarizing_channel(p)
    return compose(bit_flip_channel(p), phase_flip_channel(q))


def _grid(spec: ExperimentSpec) -> list[dict[str, Any]]:
    qs = spec.q if spec.noise == "bitphase" else [None]
    if spec.scenario == "dishonest-charlie":
        return [dict(p=None, q=None, n=n, m=m) for n, m in product(spec.n, spec.m)]
    return [dict(p=p, q=q, n=n, m=None) for p, q, n in product(spec.p, qs, spec.n)]


def _code(spec: ExperimentSpec) -> CssCode:
    return load_css_code(spec.code) if spec.code else steane_code()


# per-scenario cell runners: return (successes, analytic or None)


def _epr_cell(spec: ExperimentSpec, cell: dict, rng: np.random.Generator) -> tuple[int, float | None]:
    n = cell["n"]
    eve = spec.scenario == "eve-attack"
    ch = _channel(spec.noise, cell["p"], cell["q"] or 0.0)
    default_threshold = 0.0 if eve else 1.0
    cfg = epr_qpc.EprConfig(
        n=n,
        decoys_per_channel=spec.decoys,
        decoy_error_threshold=default_threshold if spec.threshold is None else spec.threshold,
        channel_ac=ch,
        channel_bc=ch,
        eve_ac=intercept_resend if eve else None,
    )
    hits = 0
    done = 0
    while done < spec.trials:
        t = min(EPR_CHUNK, spec.trials - done)
        M = rng.integers(0, 2, (t, n), dtype=np.uint8)
        batch = epr_qpc.simulate_protocol1(cfg, M, M, t, rng)
        if eve:
            hits += int(batch.aborted.sum())
        else:
            hits += int(np.sum(batch.output == 1))
        done += t
    analytic = epr_qpc.predict_abort_probability(cfg) if eve else epr_qpc.predict_wrong_output(cfg)
    return hits, analytic


def _keydist_cfg(spec: ExperimentSpec, cell: dict, key_length: int, eve: bool) -> css_qpc.KeyDistConfig:
    ch = IDENTITY if cell["p"] is None else _channel(spec.noise, cell["p"], cell["q"] or 0.0)
    kwargs = {}
    if spec.threshold is not None:
        kwargs["check_error_threshold"] = spec.threshold
    return css_qpc.KeyDistConfig(
        code=_code(spec),
        key_length=key_length,
        check_bits=spec.check_bits,
        channel=ch,
        eve=intercept_resend if eve else None,
        **kwargs,
    )


def _keydist_cell(spec: ExperimentSpec, cell: dict, rng: np.random.Generator) -> tuple[int, float | None]:
    eve = spec.scenario == "eve-attack"
    code = _code(spec)
    if eve:
        # n counts check bits; one code block carries the key
        cfg = replace(_keydist_cfg(spec, cell, code.logical_dim, True), check_bits=cell["n"])
    else:
        cfg = _keydist_cfg(spec, cell, cell["n"], False)
    hits = 0
    for _ in range(spec.trials):
        key = BitString.random(cfg.key_length, rng)
        out = css_qpc.run_protocol2(cfg, key, rng)
        if eve:
            hits += out.aborted
        else:
            hits += (not out.aborted) and out.delivered_key != key
    analytic = css_qpc.predict_keydist_abort(cfg) if eve else css_qpc.predict_keydist_failure(cfg)
    return hits, analytic


def _qpc_cell(spec: ExperimentSpec, cell: dict, rng: np.random.Generator) -> tuple[int, float | None]:
    cfg = _keydist_cfg(spec, cell, cell["n"], False)
    hits = 0
    for _ in range(spec.trials):
        M = BitString.random(cfg.key_length, rng)
        out = css_qpc.run_protocol3(cfg, cfg, M, M, rng)
        hits += out.output == 1
    return hits, css_qpc.predict_qpc_failure(cfg, cfg)


def _dishonest_cell(spec: ExperimentSpec, cell: dict, rng: np.random.Generator) -> tuple[int, float | None]:
    n, m = cell["n"], cell["m"]
    compare = css_qpc.ideal_compare
    if spec.full_protocol:
        cfg = _keydist_cfg(spec, dict(p=None, q=None), n, False)
        compare = css_qpc.protocol3_comparator(cfg, cfg)
    hits = 0
    for _ in range(spec.trials):
        M_A = BitString.random(n, rng)
        M_B = M_A if rng.integers(0, 2) else BitString.random(n, rng)
        out = css_qpc.run_repeated_qpc(m, M_A, M_B, rng, charlie=spec.strategy, rho=spec.rho, compare=compare)
        hits += out.verdict == "caught"
    return hits, css_qpc.predict_caught_probability(m, spec.strategy, spec.rho)


def verdict(empirical: float, analytic: float | None, trials: int) -> tuple[float, str]:
    """Binomial standard error of the estimate and pass/fail against 3 sigma."""
    stderr = math.sqrt(empirical * (1 - empirical) / trials)
    if analytic is None:
        return stderr, "n/a"
    # an estimate of exactly 0 or 1 has zero sample spread; fall back to the model's
    sigma = max(stderr, math.sqrt(analytic * (1 - analytic) / trials))
    return stderr, "pass" if abs(empirical - analytic) <= SIGMAS * sigma + 1e-12 else "fail"


def run_cell(spec: ExperimentSpec, index: int, cell: dict) -> dict[str, Any]:
    seed = spec.seed + index
    rng = stream_rng(spec.seed, index)
    if spec.scenario == "dishonest-charlie":
        hits, analytic = _dishonest_cell(spec, cell, rng)
    elif spec.scenario == "css-qpc":
        hits, analytic = _qpc_cell(spec, cell, rng)
    elif spec.scenario == "css-keydist" or (spec.scenario == "eve-attack" and spec.protocol == "css"):
        hits, analytic = _keydist_cell(spec, cell, rng)
    else:
        hits, analytic = _epr_cell(spec, cell, rng)
    empirical = hits / spec.trials
    stderr, result = verdict(empirical, analytic, spec.trials)
    return dict(scenario=spec.scenario, **cell, trials=spec.trials, empirical=empirical,
                analytic=analytic, stderr=stderr, seed=seed, verdict=result)


def _run_cell_args(args: tuple[ExperimentSpec, int, dict]) -> dict[str, Any]:
    return run_cell(*args)


def run_rows(spec: ExperimentSpec) -> list[dict[str, Any]]:
    spec.validate()
    if spec.code:
        _code(spec)  # fail early on a bad code file
    cells = _grid(spec)
    jobs = [(spec, i, c) for i, c in enumerate(cells)]
    if spec.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            return list(pool.map(_run_cell_args, jobs))
    return [run_cell(*j) for j in jobs]


def _fmt(key: str, value: Any) -> str:
    if value is None:
        return ""
    if key in ("empirical", "analytic", "stderr"):
        return f"{value:.6f}"
    if key in ("p", "q"):
        return f"{value:g}"
    return str(value)


def format_csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(c, row[c]) for c in COLUMNS])
    return buf.getvalue()


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def run_experiment(spec: ExperimentSpec) -> tuple[str, list[dict[str, Any]]]:
    """Run every grid cell, then (and only then) write the CSV to ``spec.out``."""
    rows = run_rows(spec)
    text = format_csv(rows)
    if spec.out:
        write_atomic(spec.out, text)
    return text, rows
