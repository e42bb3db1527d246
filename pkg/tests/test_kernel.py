import json

import pytest

from lgsim import kernel
from lgsim.config import SimConfig
from lgsim.kernel import (
    DECISION,
    ORDER,
    SENSE,
    CatalogMismatch,
    Kernel,
    ScenarioError,
    SeededRandomPolicy,
    Trace,
    apply_events,
    replay,
    run,
)
from lgsim.scenario import Scenario
from lgsim.state import HandleState, ObsEvent, initial_state

RETRACT_EXTEND = Scenario.pilot("retract-extend", [(0, "up"), (14, "down")], seed=7)


def test_initial_state_is_quiescent():
    k = Kernel()
    assert k.enabled_events() == []
    assert k.quiescent()


def test_retraction_step_one_enabled_for_both_modules_after_handle_up():
    k = Kernel()
    k.fire_scripted("pilot.handle_up")
    for phase in (SENSE,):  # drain sensing so the decision guards see fresh inputs
        k.run_phase(phase)
    enabled = k.enabled_events(DECISION)
    assert "ctrl.rt1_stmlt_general_EV.1" in enabled
    assert "ctrl.rt1_stmlt_general_EV.2" in enabled


def test_anomaly_disables_every_decision_event():
    from dataclasses import replace
    from lgsim.state import evolve, StateOutputs

    k = Kernel()
    k.fire_scripted("pilot.handle_up")
    k.state = evolve(k.state, outputs=replace(k.state.outputs, anomaly=True))
    assert [e for e in k.enabled_events(DECISION)] == []


def test_llc_strictly_increases_and_counts_firings():
    res = run(Scenario.pilot("x", [(0, "up"), (10, "down"), (22, "up")], seed=3))
    clocks = [r.llc for r in res.trace.records]
    assert clocks == sorted(set(clocks))
    assert clocks[0] == 1 and clocks[-1] == len(clocks)


def test_phases_fire_in_order_within_each_cycle():
    sc = Scenario.pilot("phase-order", [(0, "up")], seed=11)
    k = Kernel(policy=sc.make_policy())
    pending = sc.schedule()
    phase_of = {e.eid: e.phase for e in k.catalog}
    for cycle in range(16):
        for eid in pending.pop(cycle, []):
            k.fire_scripted(eid)
        before = len(k.records)
        k.run_cycle()
        phases = [phase_of[r.eid] for r in k.records[before:]]
        assert phases == sorted(phases), f"cycle {cycle}: {phases}"


def test_same_seed_same_trace_bytes():
    a = run(RETRACT_EXTEND, record_deltas=True).trace.dumps()
    b = run(RETRACT_EXTEND, record_deltas=True).trace.dumps()
    assert a == b


def test_nominal_double_cycle_reaches_dcge():
    res = run(RETRACT_EXTEND)
    assert res.stop_reason == "quiescent"
    assert not res.violations and not res.warnings
    s = res.final_state
    assert s.internals.endCycle
    assert s.stamp_of(ObsEvent.dcge) is not None
    assert s.outputs.gears_locked_down


def test_max_steps_budget_reported():
    res = run(RETRACT_EXTEND, max_steps=10)
    assert res.stop_reason == "max_steps"
    assert len(res.trace.records) == 10
    assert any("IncompleteCycle" in w for w in res.warnings)


def test_zero_step_budget_rejected():
    with pytest.raises(ScenarioError):
        run(RETRACT_EXTEND, max_steps=0)


def test_quiescent_stop_has_no_enabled_events():
    res = run(RETRACT_EXTEND)
    k = Kernel(state=res.final_state)
    assert k.quiescent()


class TestReplay:
    def test_unmodified_trace_ok(self):
        res = run(RETRACT_EXTEND)
        out = replay(res.trace)
        assert out.ok and out.steps == len(res.trace.records)

    def test_empty_trace_ok(self):
        sc = Scenario.pilot("idle", [], seed=0, max_steps=10)
        res = run(sc)
        assert res.trace.records == []
        assert replay(res.trace).ok

    def test_swapped_event_detected(self):
        res = run(RETRACT_EXTEND)
        records = list(res.trace.records)
        # swap the two module events of the first sequence step
        i = next(n for n, r in enumerate(records) if r.eid.endswith("stmlt_general_EV.1"))
        a, b = records[i], records[i + 1]
        records[i] = kernel.TraceRecord(a.step, b.eid, a.llc, a.fp, a.delta)
        records[i + 1] = kernel.TraceRecord(b.step, a.eid, b.llc, b.fp, b.delta)
        tampered = Trace(res.trace.header, records, res.trace.footer)
        out = replay(tampered)
        assert not out.ok
        assert "FingerprintDivergence" in out.detail
        assert out.steps == a.step

    def test_config_mismatch_rejected(self):
        res = run(RETRACT_EXTEND)
        res.trace.header["config"] = "0000000000000000"
        with pytest.raises(CatalogMismatch):
            replay(res.trace)

    def test_round_trip_through_file(self, tmp_path):
        res = run(RETRACT_EXTEND, record_deltas=True)
        path = tmp_path / "trace.jsonl"
        res.trace.dump(path)
        loaded = Trace.load(path)
        assert replay(loaded).ok
        assert loaded.footer["final_fp"] == res.trace.footer["final_fp"]


def test_trace_file_is_line_delimited_json(tmp_path):
    res = run(RETRACT_EXTEND)
    text = res.trace.dumps()
    lines = text.strip().split("\n")
    assert json.loads(lines[0])["kind"] == "header"
    assert json.loads(lines[-1])["kind"] == "footer"
    assert all(json.loads(l)["kind"] == "event" for l in lines[1:-1])


def test_seeded_policy_is_deterministic():
    p1, p2 = SeededRandomPolicy(9), SeededRandomPolicy(9)
    eids = [f"e{i}" for i in range(5)]
    assert [p1.choose(eids) for _ in range(50)] == [p2.choose(eids) for _ in range(50)]


def test_apply_events_rebuilds_run_states():
    res = run(RETRACT_EXTEND)
    state, ok = apply_events(res.trace.event_ids())
    assert ok
    from lgsim.state import fingerprint

    assert f"{fingerprint(state):016x}" == res.trace.footer["final_fp"]


def test_scripted_fault_injection_is_idempotent():
    k = Kernel()
    k.fire_scripted("fault.inject.gear_extended:1:FG:StuckWrong:0")
    fp1 = k.state.plant.faults
    k.fire_scripted("fault.inject.gear_extended:1:FG:StuckWrong:0")
    assert k.state.plant.faults == fp1


def test_stop_on_violation_halts_run():
    from lgsim.config import Mutant

    # invert to DOWN while the doors are still mid-opening: the mutated
    # gear step no longer waits for them
    sc = Scenario.pilot("mutant-run", [(0, "up"), (2, "down")], seed=1,
                        stop_on_violation=True)
    res = run(sc, SimConfig(mutant=Mutant.DropDoorGuardOnExtend))
    assert res.stop_reason == "violation"
    assert res.violations and res.violations[0]["requirement"] == "R31"
    assert res.trace.header["watermark"].startswith("MUTANT")


def test_step_fires_one_event_at_a_time_to_quiescence():
    k = Kernel()
    assert k.step() is None  # stable init
    k.fire_scripted("pilot.handle_up")
    fired = []
    while (eid := k.step()) is not None:
        fired.append(eid)
    assert fired[0] == "sense.refresh"
    assert k.state.internals.endCycle
    assert k.quiescent()
    # the step-by-step drive reaches the same end state as run()
    res = run(Scenario.pilot("same", [(0, "up")], seed=0))
    from lgsim.state import fingerprint

    assert fingerprint(k.state, include_clock=False) == fingerprint(
        res.final_state, include_clock=False
    )


def test_trace_from_events_round_trips():
    res = run(RETRACT_EXTEND)
    trace = kernel.trace_from_events(res.trace.event_ids(), name="rebuilt")
    assert replay(trace).ok
    assert trace.footer["final_fp"] == res.trace.footer["final_fp"]


def _boundary_states(scenario, cycles=40):
    k = Kernel(policy=scenario.make_policy(), record_events=False, check_every_step=False)
    pending = scenario.schedule()
    for c in range(cycles):
        for eid in pending.pop(c, []):
            k.fire_scripted(eid)
        k.run_cycle()
        yield k


def test_modules_stay_symmetric_through_nominal_runs():
    sc = Scenario.pilot("sym", [(0, "up"), (9, "down"), (23, "up")], seed=13)
    for k in _boundary_states(sc):
        assert k.state.kstate.k_orders[0] == k.state.kstate.k_orders[1]
        assert k.state.kstate.k_inputs[0] == k.state.kstate.k_inputs[1]


def test_or_absorption_with_one_silent_module():
    healthy = Scenario.pilot("h", [(0, "up")], seed=4)
    failed = Scenario.pilot("f", [(0, "up")], seed=4, silent_modules=(1,))
    healthy_orders = [k.state.orders for k in _boundary_states(healthy, 20)]
    for i, k in enumerate(_boundary_states(failed, 20)):
        assert k.state.orders == k.state.kstate.orders(2)  # merged = healthy module
        assert k.state.orders == healthy_orders[i]


def test_at_most_one_sequence_event_enabled_per_module():
    sc = Scenario.pilot("mutex", [(0, "up"), (10, "down")], seed=6)
    k = Kernel(policy=sc.make_policy(), record_events=False, check_every_step=False)
    pending = sc.schedule()
    for c in range(30):
        for eid in pending.pop(c, []):
            k.fire_scripted(eid)
        # evaluate before the decision runs: the counters pin one step
        k.run_phase(SENSE)
        enabled = [e for e in k.enabled_events(DECISION) if "_stmlt_" in e or "stop_stmlt" in e]
        for m in ("1", "2"):
            assert sum(1 for e in enabled if e.endswith(f".{m}")) <= 1, (c, enabled)
        k.run_phase(DECISION)
        k.run_phase(ORDER)
        k.cycle += 1


def test_state_invariants_hold_at_every_boundary():
    for seed in range(5):
        sc = Scenario.pilot("inv", [(0, "up"), (7, "down"), (18, "up")], seed=seed)
        for k in _boundary_states(sc, 35):
            stamps = list(k.state.stamps().values())
            assert len(stamps) == len(set(stamps))  # ldate stays injective
            assert all(t < k.state.llc for t in stamps)
            internals = k.state.internals
            assert 0 <= internals.nextOGseq <= 8 and 0 <= internals.nextRTseq <= 8
            assert not (internals.nextOGseq > 0 and internals.nextRTseq > 0)
