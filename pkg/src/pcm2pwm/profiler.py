"""Operation counting and weighted cycle/time estimation.

A conversion run is observed through an OpRecorder: each behavior reports
how many operations of each kind it performed.  Counts are turned into
cycle estimates by weighting each operation kind with a processing
element's cycles-per-op table (a MAC costs one cycle on a DSP, several on
a general-purpose core), and into time by dividing through the element's
clock.  Times are exact rationals until formatted.

Processing elements are described in a plain-text INI library, one section
per element:

    [DSP]
    description = DSP 56600 Motorola
    category = DSP
    cost = 8.00
    freq_mhz = 60
    weights = add:1, mul:1, mac:1, cmp:1, mem:1
    code_size = S0:1, S1:8, ...        ; optional

Categories are DSP, Microproc., Microcontrol. or FPGA.
"""

from __future__ import annotations

import configparser
import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction

from .chain import BEHAVIORS

OP_KINDS = ("add", "mul", "mac", "cmp", "mem")
CATEGORIES = ("DSP", "Microproc.", "Microcontrol.", "FPGA")

COUNTER_CAP = 2 ** 63 - 1


class UnknownBehavior(Exception):
    """Behavior name outside the fixed six-behavior set."""


class MissingWeight(Exception):
    """A counted operation kind has no weight on the target element."""


class CounterOverflow(Exception):
    """An operation counter hit the 2^63 - 1 cap."""


@dataclass
class OpCountVector:
    """Per-behavior, per-kind operation counts."""

    counts: dict = field(default_factory=lambda: {
        b: {k: 0 for k in OP_KINDS} for b in BEHAVIORS})

    def get(self, behavior: str, kind: str) -> int:
        return self.counts[behavior][kind]

    def behavior_total(self, behavior: str) -> int:
        return sum(self.counts[behavior].values())

    def __add__(self, other: "OpCountVector") -> "OpCountVector":
        out = OpCountVector()
        for b in BEHAVIORS:
            for k in OP_KINDS:
                out.counts[b][k] = self.counts[b][k] + other.counts[b][k]
        return out

    def __eq__(self, other):
        if not isinstance(other, OpCountVector):
            return NotImplemented
        return self.counts == other.counts


class OpRecorder:
    """Mutable counter set for one conversion run.

    Use one recorder per run; concurrent runs get independent instances.
    """

    def __init__(self):
        self._counts = OpCountVector()

    def record(self, behavior: str, kind: str, n: int = 1) -> None:
        if behavior not in BEHAVIORS:
            raise UnknownBehavior(f"{behavior!r} is not one of {BEHAVIORS}")
        if kind not in OP_KINDS:
            raise ValueError(f"unknown op kind {kind!r}")
        if n < 0:
            raise ValueError("count must be non-negative")
        new = self._counts.counts[behavior][kind] + n
        if new > COUNTER_CAP:
            self._counts.counts[behavior][kind] = COUNTER_CAP
            raise CounterOverflow(f"{behavior}.{kind} exceeded 2^63 - 1")
        self._counts.counts[behavior][kind] = new

    def reset(self) -> None:
        self._counts = OpCountVector()

    def snapshot(self) -> OpCountVector:
        """Copy of the current counts; the recorder keeps accumulating."""
        out = OpCountVector()
        for b in BEHAVIORS:
            out.counts[b] = dict(self._counts.counts[b])
        return out


@dataclass(frozen=True)
class ProcessingElement:
    name: str
    category: str
    cost_usd: float
    freq_mhz: Fraction
    weights: dict  # op kind -> cycles per op
    description: str = ""
    code_size: dict | None = None  # behavior -> abstract units

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"category {self.category!r} not in {CATEGORIES}")
        if self.freq_mhz <= 0:
            raise ValueError("freq_mhz must be positive")
        if self.cost_usd < 0:
            raise ValueError("cost must be non-negative")
        for kind, w in self.weights.items():
            if kind not in OP_KINDS:
                raise ValueError(f"unknown op kind {kind!r} in weights")
            if w < 1:
                raise ValueError(f"weight for {kind} must be >= 1")

    @property
    def is_hardware(self) -> bool:
        return self.category == "FPGA"


@dataclass
class CycleEstimate:
    """Weighted cycle counts per behavior on one processing element."""

    pe_name: str
    per_behavior: dict  # behavior -> cycles

    @property
    def total(self) -> int:
        return sum(self.per_behavior.values())


def cycles(counts: OpCountVector, pe: ProcessingElement) -> CycleEstimate:
    """Weight every counted operation with the element's cycles-per-op."""
    per_behavior = {}
    for b in BEHAVIORS:
        total = 0
        for kind, n in counts.counts[b].items():
            if n == 0:
                continue
            if kind not in pe.weights:
                raise MissingWeight(f"{pe.name} has no weight for {kind!r}")
            total += n * pe.weights[kind]
        per_behavior[b] = total
    return CycleEstimate(pe_name=pe.name, per_behavior=per_behavior)


def exec_time(cycle_count: int, pe: ProcessingElement) -> Fraction:
    """Execution time in seconds, exact: cycles / (freq_mhz * 10^6)."""
    if cycle_count < 0:
        raise ValueError("cycle count must be non-negative")
    return Fraction(cycle_count) / (pe.freq_mhz * 10 ** 6)


def meets_realtime(t_seconds, playback_seconds) -> bool:
    """Strictly faster than the audio it processes."""
    if playback_seconds <= 0:
        raise ValueError("playback duration must be positive")
    return t_seconds < playback_seconds


def load_pe_library(path) -> list[ProcessingElement]:
    """Parse the INI element library; see the module docstring for the grammar."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    with open(path, "r", encoding="utf-8") as fh:
        parser.read_file(fh)
    pes = []
    for name in parser.sections():
        sec = parser[name]
        try:
            weights = _parse_pairs(sec["weights"], int)
            code_size = (_parse_pairs(sec["code_size"], float)
                         if "code_size" in sec else None)
            pe = ProcessingElement(
                name=name,
                category=sec["category"].strip(),
                cost_usd=float(sec["cost"]),
                freq_mhz=Fraction(sec["freq_mhz"].strip()),
                weights=weights,
                description=sec.get("description", "").strip(),
                code_size=code_size,
            )
        except (KeyError, ValueError) as exc:
            raise ValueError(f"bad element entry [{name}]: {exc}") from exc
        pes.append(pe)
    if not pes:
        raise ValueError(f"no processing elements found in {path}")
    return pes


def _parse_pairs(text: str, value_type):
    out = {}
    for item in text.replace(",", " ").split():
        key, sep, value = item.partition(":")
        if not sep or not value:
            raise ValueError(f"expected key:value, got {item!r}")
        out[key.strip()] = value_type(value)
    return out


# --- reporting -------------------------------------------------------------

def profile_report_csv(counts: OpCountVector, pes: list[ProcessingElement]) -> str:
    """Flat CSV: one row per behavior/kind with cycles and time per element."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["behavior", "kind", "count"]
    for pe in pes:
        header += [f"{pe.name}_cycles", f"{pe.name}_time_s"]
    writer.writerow(header)
    per_pe = {pe.name: cycles(counts, pe) for pe in pes}
    for b in BEHAVIORS:
        for kind in OP_KINDS:
            n = counts.get(b, kind)
            row = [b, kind, n]
            for pe in pes:
                c = n * pe.weights.get(kind, 0) if n else 0
                row += [c, f"{float(exec_time(c, pe)):.6f}"]
            writer.writerow(row)
        row = [b, "total", counts.behavior_total(b)]
        for pe in pes:
            c = per_pe[pe.name].per_behavior[b]
            row += [c, f"{float(exec_time(c, pe)):.6f}"]
        writer.writerow(row)
    return buf.getvalue()


def principal_summary_rows(cycle_totals: dict, pes: list[ProcessingElement],
                           playback_s: float) -> list[dict]:
    """Per-element totals with the real-time verdict.

    cycle_totals maps element name -> total cycles (measured or given).
    """
    rows = []
    for pe in pes:
        total = cycle_totals[pe.name]
        t = exec_time(total, pe)
        rows.append({
            "element": pe.name,
            "type": "HW" if pe.is_hardware else "SW",
            "cycles": total,
            "time_s": t,
            "goal": meets_realtime(t, playback_s),
        })
    return rows


def format_principal_summary(rows: list[dict], playback_s: float) -> str:
    lines = [f"{'element':<10}{'type':<6}{'cycles':>14}{'time (s)':>12}  goal",
             "-" * 48]
    for r in rows:
        mark = "X" if r["goal"] else ""
        lines.append(f"{r['element']:<10}{r['type']:<6}{r['cycles']:>14,}"
                     f"{float(r['time_s']):>12.2f}  {mark}")
    lines.append(f"goal: execution faster than {playback_s:.2f} s of audio")
    return "\n".join(lines) + "\n"


def principal_summary_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["element", "type", "cycles", "time_s", "goal"])
    for r in rows:
        writer.writerow([r["element"], r["type"], r["cycles"],
                         f"{float(r['time_s']):.2f}", "X" if r["goal"] else ""])
    return buf.getvalue()
