import pytest

from lgsim.config import Mutant
from lgsim.explorer import (
    ExploreConfig,
    FrontierBudgetExceeded,
    NotReproducible,
    explore,
    minimize,
    requirement_fails,
)
from lgsim.kernel import apply_events


def test_depth_zero_visits_only_the_initial_state():
    rep = explore(ExploreConfig(max_depth=0, pilot_budget=2))
    assert rep.states_visited == 1
    assert rep.violations == []


def test_nominal_exploration_from_post_up_state_with_no_pilot_moves():
    rep = explore(ExploreConfig(max_depth=400, pilot_budget=0,
                                initial_actions=("pilot.handle_up",)))
    assert rep.frontier_exhausted and not rep.truncated
    assert rep.violations == []
    assert rep.quiescent_states >= 1


def test_nominal_exploration_budget_two_exhausts_cleanly():
    rep = explore(ExploreConfig(max_depth=400, pilot_budget=2))
    assert rep.frontier_exhausted
    assert rep.violations == []
    assert rep.states_visited > 10
    assert rep.edges_fired > rep.states_visited


def test_dedupe_on_and_off_find_the_same_violations():
    base = dict(max_depth=60, pilot_budget=2, mutant=Mutant.DropDoorGuardOnExtend)
    on = explore(ExploreConfig(dedupe=True, **base))
    off = explore(ExploreConfig(dedupe=False, **base))
    key = lambda rep: {(v.requirement, v.fp) for v in rep.violations}
    assert key(on) == key(off)
    assert key(on)  # the mutant is visible at this depth
    assert off.states_visited >= on.states_visited


def test_budget_cap_raises_with_partial_report():
    with pytest.raises(FrontierBudgetExceeded) as exc:
        explore(ExploreConfig(max_depth=400, pilot_budget=2, max_states=3))
    assert exc.value.report.states_visited > 0


class TestMutants:
    def test_drop_door_guard_violates_exactly_r31_shallowly(self):
        cfg = ExploreConfig(max_depth=400, pilot_budget=2, mutant=Mutant.DropDoorGuardOnExtend)
        rep = explore(cfg)
        assert rep.violations
        assert {v.requirement for v in rep.violations} == {"R31"}
        best = rep.violations[0]
        assert best.depth <= 20
        # at the violating state nothing else fails
        state, ok = apply_events(best.events, cfg.sim_config())
        assert ok
        from lgsim import monitor

        failing = {v.requirement for v in monitor.check_safety(state, include_binding=True)
                   if not v.holds}
        assert failing == {"R31"}

    def test_drop_general_ev_guard_violates_r51(self):
        cfg = ExploreConfig(max_depth=400, pilot_budget=2, mutant=Mutant.DropGeneralEVGuard)
        rep = explore(cfg)
        assert any(v.requirement == "R51" for v in rep.violations)

    def test_and_merge_with_silent_module_trips_bind_and_stalls(self):
        cfg = ExploreConfig(max_depth=400, pilot_budget=1, mutant=Mutant.SwapMergeToAND,
                            module_failure_envelope=(1,))
        rep = explore(cfg)
        assert any(v.requirement == "BIND" for v in rep.violations)
        # the stalled cycle never completes: kernel-level view
        from lgsim.config import SimConfig
        from lgsim.kernel import run
        from lgsim.scenario import Scenario

        sc = Scenario.pilot("stall", [(0, "up")], seed=1, max_steps=400,
                            stop_on_violation=False, silent_modules=(1,))
        res = run(sc, SimConfig(mutant=Mutant.SwapMergeToAND))
        assert res.stop_reason == "quiescent"
        assert not res.final_state.orders.retract_EV  # AND keeps every order down
        assert any("IncompleteCycle" in w for w in res.warnings)

    def test_skip_spawn_trips_the_input_binding(self):
        cfg = ExploreConfig(max_depth=400, pilot_budget=2, mutant=Mutant.SkipSpawn)
        rep = explore(cfg)
        binds = [v for v in rep.violations if v.requirement == "BIND"]
        assert binds
        assert "module 2" in binds[0].witness

    def test_every_counterexample_replays_to_a_failing_state(self):
        for mutant, extra in [
            (Mutant.DropDoorGuardOnExtend, {}),
            (Mutant.DropGeneralEVGuard, {}),
            (Mutant.SwapMergeToAND, {"module_failure_envelope": (1,)}),
            (Mutant.SkipSpawn, {}),
        ]:
            cfg = ExploreConfig(max_depth=400, pilot_budget=2, mutant=mutant, **extra)
            rep = explore(cfg)
            assert rep.violations, mutant
            for c in rep.violations[:4]:
                state, ok = apply_events(c.events, cfg.sim_config())
                assert ok, (mutant, c.requirement)
                assert requirement_fails(state, c.requirement, cfg.sim_config()), (mutant, c.requirement)


class TestMinimize:
    def _r31_counterexample(self):
        cfg = ExploreConfig(max_depth=400, pilot_budget=2, mutant=Mutant.DropDoorGuardOnExtend)
        rep = explore(cfg)
        return rep.violations[0], cfg.sim_config()

    def test_minimized_still_violates_same_requirement(self):
        c, sim = self._r31_counterexample()
        m = minimize(c, sim)
        assert m.requirement == c.requirement
        assert m.depth <= c.depth
        state, ok = apply_events(m.events, sim)
        assert ok and requirement_fails(state, "R31", sim)

    def test_minimize_is_a_fixpoint(self):
        c, sim = self._r31_counterexample()
        once = minimize(c, sim)
        twice = minimize(once, sim)
        assert twice.events == once.events

    def test_appended_suffix_is_stripped(self):
        c, sim = self._r31_counterexample()
        m = minimize(c, sim)
        padded = type(c)(c.requirement, c.witness, m.events + ("ctrl.merge",),
                         len(m.events) + 1, m.fp)
        again = minimize(padded, sim)
        assert len(again.events) <= len(m.events)

    def test_non_reproducing_trace_rejected(self):
        c, sim = self._r31_counterexample()
        broken = type(c)(c.requirement, c.witness, ("pilot.handle_up",), 1, c.fp)
        with pytest.raises(NotReproducible):
            minimize(broken, sim)


def test_fault_envelope_masks_single_faults_from_requirements():
    from lgsim.state import FaultSpec, Gear, Sensor

    envelope = (FaultSpec(Sensor.gear_extended, 1, Gear.FG),
                FaultSpec(Sensor.gear_extended, 2, Gear.LG))
    rep = explore(ExploreConfig(max_depth=200, pilot_budget=1,
                                fault_envelope=envelope, f_max=1))
    assert rep.frontier_exhausted
    # a stuck channel is visible to the raw consistency check (that is the
    # whole point of ANO) but the voted requirements stay clean
    assert {v.requirement for v in rep.violations} <= {"ANO"}
    for v in rep.violations:
        assert any(e.startswith("fault.inject.") for e in v.events)


def test_reports_are_deterministic_across_runs():
    cfg = ExploreConfig(max_depth=120, pilot_budget=2, mutant=Mutant.DropGeneralEVGuard)
    assert explore(cfg).dumps() == explore(cfg).dumps()
