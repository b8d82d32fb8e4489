"""Parameter sweeps over bundled or user scenarios, with CSV output.

Sweeps vary either the data volume scale factor or the idle gap between
queries and emulate a set of strategies at every point.  Rows come out in
axis-then-strategy order and numbers are formatted identically on every
run, so repeated sweeps are byte-identical.  RECONFIG_SIM_THREADS caps the
worker threads used to evaluate sweep points (default 1).
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from importlib import resources

from .emulator import analytic_total, execute_schedule
from .model import Scenario, load_scenario
from .optimizer import FIXED_STRATEGIES, candidate_schedules, optimize

SWEEP_AXES = ("scale_factor", "gap_ms")
STRATEGY_ORDER = FIXED_STRATEGIES + ("auto",)

CSV_HEADER = "axis,value,strategy,total_ms,improvement_pct"

EQUIVALENCE_TOLERANCE_MS = 1e-9


def format_ms(value: float) -> str:
    return format(value, ".9g")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple[float, ...]
    strategies: tuple[str, ...] = STRATEGY_ORDER

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis: {self.axis!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        # a gap of zero is meaningful; a scale factor of zero is not
        minimum = 0.0 if self.axis == "gap_ms" else None
        if self.axis == "scale_factor" and self.values[0] <= 0:
            raise ValueError("scale factors must be positive")
        if minimum is not None and self.values[0] < minimum:
            raise ValueError("gaps cannot be negative")
        if not self.strategies:
            raise ValueError("sweep needs at least one strategy")
        unknown = [st for st in self.strategies if st not in STRATEGY_ORDER]
        if unknown:
            raise ValueError(f"unknown strategies: {unknown}")


def with_scale_factor(s: Scenario, scale_factor: float) -> Scenario:
    """The same scenario with its volumes rebased to a new scale factor."""
    if scale_factor <= 0:
        raise ValueError("scale factor must be positive")
    tables = tuple(replace(t, volume=t.volume / s.scale_factor * scale_factor)
                   for t in s.tables)
    return replace(s, tables=tables, scale_factor=scale_factor)


def with_gaps(s: Scenario, gap_ms: float) -> Scenario:
    """The same scenario with every inter-query gap set to gap_ms."""
    if gap_ms < 0:
        raise ValueError("gap cannot be negative")
    sequence = list(s.sequence)
    for i in range(len(sequence) - 1):
        sequence[i] = replace(sequence[i], gap_after_ms=gap_ms)
    return replace(s, sequence=tuple(sequence))


def _sweep_point(s: Scenario, spec: SweepSpec, value: float) -> list[str]:
    varied = with_scale_factor(s, value) if spec.axis == "scale_factor" else with_gaps(s, value)
    rows = []
    for strategy in STRATEGY_ORDER:
        if strategy not in spec.strategies:
            continue
        outcome = optimize(varied, strategy)
        rows.append(",".join((spec.axis, format_ms(value), strategy,
                              format_ms(outcome.total_ms), format_ms(outcome.improvement_pct))))
    return rows


def _worker_count() -> int:
    raw = os.environ.get("RECONFIG_SIM_THREADS", "").strip()
    if not raw:
        return 1
    try:
        count = int(raw)
    except ValueError:
        raise ValueError(f"RECONFIG_SIM_THREADS must be an integer, got {raw!r}") from None
    return max(1, count)


def run_sweep(s: Scenario, spec: SweepSpec) -> str:
    """Evaluate every (value, strategy) point and return the CSV text.

    improvement_pct in each row compares against the baseline strategy at
    the same axis value.
    """
    workers = min(_worker_count(), len(spec.values))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_value = list(pool.map(lambda v: _sweep_point(s, spec, v), spec.values))
    else:
        per_value = [_sweep_point(s, spec, v) for v in spec.values]
    lines = [CSV_HEADER]
    for rows in per_value:
        lines.extend(rows)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# bundled scenarios

def _data_root():
    return resources.files("reconfig_sim") / "data"


def bundled_names() -> list[str]:
    """Names of all bundled scenarios; corpus entries carry a corpus/ prefix."""
    root = _data_root()
    names = sorted(p.name.removesuffix(".json") for p in root.iterdir()
                   if p.name.endswith(".json"))
    names += sorted("corpus/" + p.name.removesuffix(".json")
                    for p in (root / "corpus").iterdir() if p.name.endswith(".json"))
    return names


def bundled_text(name: str) -> str:
    path = _data_root() / (name.removesuffix(".json") + ".json")
    if not path.is_file():
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return path.read_text(encoding="utf-8")


def load_bundled(name: str) -> Scenario:
    return load_scenario(bundled_text(name))


def corpus_names() -> list[str]:
    return [n for n in bundled_names() if n.startswith("corpus/")]


def verify_corpus() -> list[tuple[str, list[str]]]:
    """Check every bundled scenario: loads cleanly, the closed form matches
    the event emulation for all four strategies, auto never loses to
    baseline, and result volumes agree across strategies.
    """
    results = []
    for name in bundled_names():
        problems = []
        try:
            s = load_bundled(name)
            schedules = candidate_schedules(s)
            totals = {}
            for strategy, sched in schedules.items():
                emulated = execute_schedule(s, sched).total_ms
                closed = analytic_total(s, sched)
                totals[strategy] = emulated
                if abs(emulated - closed) > EQUIVALENCE_TOLERANCE_MS:
                    problems.append(
                        f"{strategy}: emulated {emulated!r} differs from closed form {closed!r}")
            if optimize(s, "auto").total_ms > totals["baseline"]:
                problems.append("auto is worse than baseline")
        except Exception as exc:  # surface the failure against its scenario
            problems.append(f"{type(exc).__name__}: {exc}")
        results.append((name, problems))
    return results
