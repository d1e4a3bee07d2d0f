from fractions import Fraction
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcm2pwm.audio_io import PcmStream
from pcm2pwm.chain import ChainConfig, convert
from pcm2pwm.profiler import (COUNTER_CAP, OP_KINDS, CounterOverflow,
                              CycleEstimate, MissingWeight, OpCountVector,
                              OpRecorder, ProcessingElement, UnknownBehavior,
                              cycles, exec_time, load_pe_library,
                              meets_realtime)

PE_LIB = str(resources.files("pcm2pwm").joinpath("data", "pe_library.ini"))


def make_pe(name="X", category="DSP", cost=1.0, freq=60, weights=None):
    return ProcessingElement(name=name, category=category, cost_usd=cost,
                             freq_mhz=Fraction(freq),
                             weights=weights or {k: 1 for k in OP_KINDS})


def counts_of(**behavior_kinds):
    v = OpCountVector()
    for behavior, kinds in behavior_kinds.items():
        for kind, n in kinds.items():
            v.counts[behavior][kind] = n
    return v


# --- recording -----------------------------------------------------------

def test_record_accumulates():
    rec = OpRecorder()
    rec.record("S1", "mac", 63)
    assert rec.snapshot().get("S1", "mac") == 63
    rec.record("S1", "mac", 63)
    assert rec.snapshot().get("S1", "mac") == 126


def test_record_fresh_read_back():
    rec = OpRecorder()
    rec.record("MOLD", "add", 5)
    snap = rec.snapshot()
    assert snap.get("MOLD", "add") == 5
    assert snap.behavior_total("MOLD") == 5
    assert snap.behavior_total("S0") == 0


def test_record_unknown_behavior():
    with pytest.raises(UnknownBehavior):
        OpRecorder().record("S9", "mac", 1)


def test_record_unknown_kind():
    with pytest.raises(ValueError):
        OpRecorder().record("S1", "div", 1)


def test_record_negative():
    with pytest.raises(ValueError):
        OpRecorder().record("S1", "mac", -1)


def test_counter_overflow_caps():
    rec = OpRecorder()
    rec.record("S1", "mac", COUNTER_CAP)
    with pytest.raises(CounterOverflow):
        rec.record("S1", "mac", 1)
    assert rec.snapshot().get("S1", "mac") == COUNTER_CAP


def test_snapshot_is_independent():
    rec = OpRecorder()
    rec.record("S2", "mem", 3)
    snap = rec.snapshot()
    rec.record("S2", "mem", 3)
    assert snap.get("S2", "mem") == 3


def test_reset():
    rec = OpRecorder()
    rec.record("S2", "mem", 3)
    rec.reset()
    assert rec.snapshot().behavior_total("S2") == 0


# --- cycle weighting ---------------------------------------------------------

def test_cycles_unit_weight():
    est = cycles(counts_of(S1={"mac": 10}), make_pe())
    assert est.per_behavior["S1"] == 10
    assert est.total == 10


def test_cycles_mixed_weights():
    pe = make_pe(weights={"add": 1, "mul": 2, "mac": 1, "cmp": 1, "mem": 1})
    est = cycles(counts_of(LINE={"add": 5, "mul": 2}), pe)
    assert est.per_behavior["LINE"] == 9


def test_cycles_general_purpose_mac():
    pes = {pe.name: pe for pe in load_pe_library(PE_LIB)}
    est = cycles(counts_of(S1={"mac": 10}), pes["uP"])
    assert est.per_behavior["S1"] == 30  # shipped general-purpose mac weight


def test_cycles_missing_weight():
    pe = make_pe(weights={"add": 1})
    with pytest.raises(MissingWeight):
        cycles(counts_of(S1={"mac": 1}), pe)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(("S0", "S1", "S2", "S3", "LINE",
                                           "MOLD")),
                          st.sampled_from(OP_KINDS),
                          st.integers(0, 10 ** 9)),
                max_size=20),
       st.lists(st.tuples(st.sampled_from(("S0", "S1", "S2", "S3", "LINE",
                                           "MOLD")),
                          st.sampled_from(OP_KINDS),
                          st.integers(0, 10 ** 9)),
                max_size=20))
def test_cycles_linearity(entries_a, entries_b):
    pe = make_pe(weights={"add": 1, "mul": 2, "mac": 3, "cmp": 1, "mem": 2})
    a, b = OpCountVector(), OpCountVector()
    for behavior, kind, n in entries_a:
        a.counts[behavior][kind] += n
    for behavior, kind, n in entries_b:
        b.counts[behavior][kind] += n
    lhs = cycles(a + b, pe)
    rhs_a, rhs_b = cycles(a, pe), cycles(b, pe)
    for behavior in lhs.per_behavior:
        assert lhs.per_behavior[behavior] == (rhs_a.per_behavior[behavior]
                                              + rhs_b.per_behavior[behavior])
    assert lhs.total == rhs_a.total + rhs_b.total


# --- execution time -----------------------------------------------------------

def test_exec_time_reference_rows():
    pes = {pe.name: pe for pe in load_pe_library(PE_LIB)}
    cases = [("DSP", 272_935_511, 4.55), ("uP", 935_152_757, 1.04),
             ("uC", 935_152_757, 116.89), ("HW", 250_224_089, 2.50)]
    for name, count, display in cases:
        t = exec_time(count, pes[name])
        assert isinstance(t, Fraction)
        assert abs(float(t) - display) <= 0.01
        assert f"{float(t):.2f}" == f"{display:.2f}"


def test_exec_time_zero():
    assert exec_time(0, make_pe()) == 0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 12), st.integers(1, 4000))
def test_exec_time_rational_identity(count, freq_mhz):
    pe = make_pe(freq=freq_mhz)
    assert exec_time(count, pe) * freq_mhz * 10 ** 6 == count


def test_meets_realtime():
    assert meets_realtime(3.7310, 4.3) is True
    assert meets_realtime(4.5489, 4.3) is False
    assert meets_realtime(4.3, 4.3) is False  # strict inequality
    with pytest.raises(ValueError):
        meets_realtime(1.0, 0.0)


def test_reference_goal_marks():
    """Only the microprocessor and the RTL fabric beat 4.3 s."""
    pes = {pe.name: pe for pe in load_pe_library(PE_LIB)}
    verdicts = {
        name: meets_realtime(exec_time(count, pes[name]), 4.3)
        for name, count in [("DSP", 272_935_511), ("uP", 935_152_757),
                            ("uC", 935_152_757), ("HW", 250_224_089)]
    }
    assert verdicts == {"DSP": False, "uP": True, "uC": False, "HW": True}


# --- element library ----------------------------------------------------------

def test_load_pe_library():
    pes = {pe.name: pe for pe in load_pe_library(PE_LIB)}
    assert set(pes) == {"DSP", "uP", "uC", "HW"}
    assert pes["DSP"].cost_usd == 8.00 and pes["DSP"].freq_mhz == 60
    assert pes["uP"].cost_usd == 40.00 and pes["uP"].freq_mhz == 900
    assert pes["uC"].cost_usd == 1.00 and pes["uC"].freq_mhz == 8
    assert pes["HW"].cost_usd == 35.00 and pes["HW"].freq_mhz == 100
    assert pes["HW"].is_hardware and not pes["DSP"].is_hardware
    assert pes["uC"].weights == {"add": 1, "mul": 2, "mac": 3, "cmp": 1,
                                 "mem": 2}


def test_load_pe_library_rejects_bad_weight(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[X]\ncategory = DSP\ncost = 1\nfreq_mhz = 10\n"
                    "weights = add:0\n")
    with pytest.raises(ValueError):
        load_pe_library(path)


def test_pe_validation():
    with pytest.raises(ValueError):
        make_pe(category="GPU")
    with pytest.raises(ValueError):
        make_pe(freq=0)


# --- live instrumentation ------------------------------------------------------

def test_live_run_stage_ordering():
    """Each x2 stage handles twice its predecessor's samples."""
    rng = np.random.default_rng(3)
    pcm = PcmStream(rng.integers(-8000, 8000, 4410).astype(np.int16), 44100)
    rec = OpRecorder()
    convert(pcm, ChainConfig(), recorder=rec)
    snap = rec.snapshot()
    s1 = snap.behavior_total("S1")
    s2 = snap.behavior_total("S2")
    s3 = snap.behavior_total("S3")
    assert s3 > s2 > s1 > 0
    for behavior in ("S0", "LINE", "MOLD"):
        assert snap.behavior_total(behavior) > 0
    assert snap.get("S1", "mac") == 63 * 2 * len(pcm)
