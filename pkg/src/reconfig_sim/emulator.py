"""Discrete-event timing emulation of a query sequence on the device.

Three resources are tracked.  The storage scan streams the table while the
single reconfigurable region loads the first accelerator, so only the larger
of the two delays the first invocation.  Stages run store-and-forward: an
invocation needs its full input, so invocation k+1 cannot start before
invocation k has finished, and its reconfiguration cannot start before the
region frees up at that same moment.  The network transfer of a query's
result overlaps whatever the region does next; a speculative reconfiguration
requested by the schedule starts exactly when the region frees up after the
query's last invocation and runs under the transfer and the idle gap.

A speculative load of the wrong module does not break anything: the next
query's regular reconfiguration simply queues behind it on the region.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .costmodel import accel_runtime, propagate_volumes, reconfig_time, scan_time, transfer_time
from .model import Scenario, Schedule, ScheduleError, validate_schedule

LANES = ("scan", "reconfig", "accel", "transfer")

SPECULATIVE = "speculative"


@dataclass(frozen=True)
class Span:
    lane: str
    label: str
    start_ms: float
    end_ms: float
    query_id: str

    def __post_init__(self):
        if self.lane not in LANES:
            raise ValueError(f"unknown lane: {self.lane!r}")
        if self.end_ms < self.start_ms:
            raise ValueError(f"span ends before it starts: {self}")


@dataclass(frozen=True)
class TimelineReport:
    """Everything a run produced: spans, per-query latencies, and the total.

    per_query_ms measures each query from its arrival to the end of its
    transfer; total_ms runs from the first arrival to the last transfer end,
    idle gaps included.
    """

    spans: tuple[Span, ...]
    per_query_ms: tuple[float, ...]
    total_ms: float
    final_loaded_module: str

    def __post_init__(self):
        if not self.spans:
            raise ValueError("a timeline report must contain at least one span")


def execute_schedule(s: Scenario, sch: Schedule) -> TimelineReport:
    """Run the schedule event by event and report the resulting timeline."""
    violations = validate_schedule(s, sch)
    if violations:
        raise ScheduleError(violations)
    tables = {t.id: t for t in s.tables}
    modules = {m.id: m for m in s.library}

    spans: list[Span] = []
    per_query: list[float] = []
    loaded: str | None = None   # module owning the region, possibly still loading
    module_ready = 0.0          # when that module finishes loading
    region_free = 0.0           # when the region accepts the next reconfiguration
    arrival = 0.0
    transfer_end = 0.0

    for i, q in enumerate(s.sequence):
        profile = propagate_volumes(q, sch.orders[i], tables)
        t_scan = scan_time(tables[q.table_id].volume, s.rpu)
        spans.append(Span("scan", q.table_id, arrival, arrival + t_scan, q.id))
        data_ready = arrival + t_scan

        for k, idx in enumerate(sch.orders[i]):
            inv = q.invocations[idx]
            module = modules[inv.accelerator_id]
            if inv.accelerator_id != loaded:
                start = max(arrival, region_free)
                end = start + reconfig_time(module, loaded, s.rpu)
                spans.append(Span("reconfig", module.id, start, end, q.id))
                loaded, module_ready, region_free = module.id, end, end
            start = max(data_ready, module_ready)
            end = start + accel_runtime(profile.input_volumes[k], module)
            spans.append(Span("accel", module.id, start, end, q.id))
            data_ready = end
            region_free = end

        t_trans = transfer_time(profile.output_volume, s.rpu)
        spans.append(Span("transfer", "result", data_ready, data_ready + t_trans, q.id))
        transfer_end = data_ready + t_trans
        per_query.append(transfer_end - arrival)

        prefetch = sch.prefetches[i]
        if prefetch is not None and prefetch != loaded:
            module = modules[prefetch]
            end = region_free + reconfig_time(module, loaded, s.rpu)
            spans.append(Span("reconfig", module.id, region_free, end, SPECULATIVE))
            loaded, module_ready, region_free = prefetch, end, end

        if i < len(s.sequence) - 1:
            arrival = transfer_end + q.gap_after_ms

    assert loaded is not None
    return TimelineReport(tuple(spans), tuple(per_query), transfer_end, loaded)


def analytic_total(s: Scenario, sch: Schedule) -> float:
    """Closed-form total for the same schedule, computed without events.

    Per query: max(scan, effective first reconfiguration) + the invocation
    runtimes + the remaining reconfigurations + the transfer.  The effective
    first reconfiguration is zero when the module is already resident, the
    full time when nothing was prefetched, and the residual left after
    hiding behind the previous transfer plus gap when it was prefetched.
    """
    violations = validate_schedule(s, sch)
    if violations:
        raise ScheduleError(violations)
    tables = {t.id: t for t in s.tables}
    modules = {m.id: m for m in s.library}

    total = 0.0
    loaded: str | None = None
    pending: tuple[str, float] | None = None  # (prefetched module, hide window)

    for i, q in enumerate(s.sequence):
        order = sch.orders[i]
        profile = propagate_volumes(q, order, tables)
        invs = [q.invocations[idx] for idx in order]
        first = invs[0].accelerator_id

        if pending is not None:
            prefetched, hide = pending
            residual = max(0.0, reconfig_time(modules[prefetched], None, s.rpu) - hide)
            if first == prefetched:
                effective = residual
            else:
                effective = residual + reconfig_time(modules[first], prefetched, s.rpu)
        else:
            effective = reconfig_time(modules[first], loaded, s.rpu)

        duration = max(scan_time(tables[q.table_id].volume, s.rpu), effective)
        for volume, inv in zip(profile.input_volumes, invs):
            duration += accel_runtime(volume, modules[inv.accelerator_id])
        previous = first
        for inv in invs[1:]:
            duration += reconfig_time(modules[inv.accelerator_id], previous, s.rpu)
            previous = inv.accelerator_id
        t_trans = transfer_time(profile.output_volume, s.rpu)
        duration += t_trans

        gap = q.gap_after_ms if i < len(s.sequence) - 1 else 0.0
        total += duration + gap

        loaded = invs[-1].accelerator_id
        prefetch = sch.prefetches[i]
        if prefetch is not None and prefetch != loaded:
            pending = (prefetch, t_trans + gap)
            loaded = prefetch
        else:
            pending = None
    return total


def emit_trace(report: TimelineReport) -> str:
    """Serialize the spans for a timeline viewer; output is byte-deterministic."""
    records = [
        {"lane": sp.lane, "label": sp.label, "query": sp.query_id,
         "start_ms": sp.start_ms, "end_ms": sp.end_ms}
        for sp in sorted(report.spans, key=lambda sp: (sp.start_ms, sp.lane))
    ]
    return json.dumps(records, indent=2) + "\n"
