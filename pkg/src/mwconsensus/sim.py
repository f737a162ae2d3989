"""Hybrid fixed-step simulation engine.

Between events the broadcast vector is held constant, so the state flow is
exactly affine on each step: ``x(t + dt) = x(t) + dt * qhat(t)``.  The
auxiliary variables are advanced with a classical 4-stage explicit
integration; inside a step the measurement error is affine in time and the
disagreement terms are frozen, so the integrand is a polynomial and the
integration error per step is far below every tolerance used here.

Triggers are checked only at step boundaries and reported event times are
grid times.  The mechanisms guarantee strictly positive dwell times, so a
sufficiently small step (default 1e-3) resolves the event sequence; this is
a documented approximation, not a root-finding event detector.  When several
agents violate their thresholds at the same boundary, all broadcasts apply
atomically before the next step.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import mwgraph, trigger
from .errors import Diverged, InvalidScenario
from .linalg import sym_sqrt
from .mwgraph import MatrixWeightedGraph
from .trigger import LeaderFollower, Mode, TriggerParams

#: Abort when the state infinity-norm exceeds this.
DIVERGENCE_GUARD = 1e9

#: Default number of adjacent-step firings that triggers a dwell warning.
CONSECUTIVE_FIRE_WARN = 10

BASELINE_DYNAMIC = "dynamic"
BASELINE_STATIC = "static"


@dataclass(frozen=True, eq=False)
class Scenario:
    """Complete, runnable description of one simulation."""

    graph: MatrixWeightedGraph
    mode: Mode
    params: TriggerParams
    dt: float
    horizon: float
    x0: Optional[np.ndarray] = None
    seed: Optional[int] = 0
    baseline: str = BASELINE_DYNAMIC

    def __post_init__(self):
        if self.x0 is not None:
            arr = np.asarray(self.x0, dtype=float).reshape(-1).copy()
            arr.setflags(write=False)
            object.__setattr__(self, "x0", arr)

    def initial_state(self) -> np.ndarray:
        """Explicit x0 if given, otherwise seeded uniform draws from [-1, 1]."""
        if self.x0 is not None:
            return np.array(self.x0)
        rng = np.random.default_rng(0 if self.seed is None else self.seed)
        return rng.uniform(-1.0, 1.0, self.graph.n * self.graph.d)

    @property
    def step_count(self) -> int:
        return int(round(self.horizon / self.dt))


def validate_scenario(sc: Scenario, assumptions: bool = True) -> list[str]:
    """Every reason the scenario may not run, as printable strings.

    ``assumptions=False`` skips the structural checks (used by the forced
    run path); the parameter and shape checks always apply.
    """
    out = []
    if not sc.dt > 0.0:
        out.append(f"dt must be positive, got {sc.dt}")
    if not sc.horizon > 0.0 or (sc.dt > 0.0 and sc.dt > sc.horizon):
        out.append(f"horizon must satisfy 0 < dt <= T, got dt={sc.dt} T={sc.horizon}")
    if sc.baseline not in (BASELINE_DYNAMIC, BASELINE_STATIC):
        out.append(f"unknown baseline {sc.baseline!r}")
    if sc.params.n != sc.graph.n:
        out.append(f"params cover {sc.params.n} agents, graph has {sc.graph.n}")
    out.extend(str(v) for v in trigger.validate_params(sc.params, sc.mode))
    if sc.x0 is not None and sc.x0.shape != (sc.graph.n * sc.graph.d,):
        out.append(f"x0 must have length n*d={sc.graph.n * sc.graph.d}, "
                   f"got {sc.x0.shape}")
    if isinstance(sc.mode, LeaderFollower) and sc.mode.u0.shape != (sc.graph.d,):
        out.append(f"u0 must have length d={sc.graph.d}, got {sc.mode.u0.shape}")
    if not assumptions:
        return out
    report = mwgraph.verify_assumption1(sc.graph)
    if not report.holds:
        out.append(
            "assumption 1 fails: "
            + ("graph is structurally imbalanced" if not report.balanced else
               f"Laplacian nullity {report.nullity} != d={sc.graph.d} or kernel "
               "mismatch"))
    if isinstance(sc.mode, LeaderFollower):
        if not mwgraph.verify_assumption2(sc.graph, sc.mode.coupling):
            out.append("assumption 2 fails: extended graph imbalanced or total "
                       "input grounding not positive definite")
    return out


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """Full grid-sampled history of one run.

    ``broadcasts`` holds the post-event value at every grid time, so the
    measurement error ``broadcasts - states`` is exactly zero at each agent's
    event instants.  ``controls[k]`` is the control applied on the segment
    ``[times[k], times[k+1])``; the final row repeats the terminal control.
    """

    times: np.ndarray
    states: np.ndarray
    broadcasts: np.ndarray
    chi: np.ndarray
    controls: np.ndarray
    events: tuple[np.ndarray, ...]
    warnings: tuple[str, ...]
    scenario: Scenario
    limit_state: Optional[np.ndarray]
    duration_s: float

    @property
    def n(self) -> int:
        return self.scenario.graph.n

    @property
    def d(self) -> int:
        return self.scenario.graph.d

    def agent_states(self, i: int) -> np.ndarray:
        d = self.d
        return self.states[:, i * d:(i + 1) * d]


@dataclass
class SimState:
    """Mutable between-step state: time, true states, broadcasts, thresholds."""

    t: float
    x: np.ndarray
    xhat: np.ndarray
    chi: np.ndarray


class CompiledScenario:
    """Scenario with every per-step constant precomputed.

    The per-agent trigger quantities are evaluated in vectorized form; the
    formulas are exactly the per-agent functions in :mod:`mwconsensus.trigger`
    (the test suite cross-checks the two paths step by step).
    """

    def __init__(self, sc: Scenario):
        g = sc.graph
        self.scenario = sc
        self.n, self.d = g.n, g.d
        self.leader_follower = isinstance(sc.mode, LeaderFollower)
        self.static_baseline = sc.baseline == BASELINE_STATIC

        self.laplacian = mwgraph.build_laplacian(g).entries
        if self.leader_follower:
            coupling = sc.mode.coupling
            self.grounded = mwgraph.build_grounded_laplacian(g, coupling).entries
            self.input_drive = np.zeros(self.n * self.d)
            u0 = np.asarray(sc.mode.u0, dtype=float)
            for c in coupling.entries:
                i = c.agent
                self.input_drive[i * self.d:(i + 1) * self.d] += (
                    c.sign * c.abs_weight().entries) @ u0
            self.gamma = np.array(
                [trigger.gamma(i, g, coupling) for i in range(self.n)])
        else:
            self.grounded = None
            self.input_drive = None
            # Isolated agents never accumulate error (their control is zero),
            # so a zero constant keeps their trigger permanently silent.
            self.mu_bar = np.array(
                [trigger.mu_bar(i, g) if g.degree(i) else 0.0
                 for i in range(self.n)])
            self.deg = np.array([float(g.degree(i)) for i in range(self.n)])
            src, dst, sgn, sqrts = [], [], [], []
            for e in g.edges:
                root = sym_sqrt(e.abs_weight()).entries
                for a, b in ((e.i, e.j), (e.j, e.i)):
                    src.append(a)
                    dst.append(b)
                    sgn.append(float(e.sign))
                    sqrts.append(root)
            self.edge_src = np.array(src, dtype=int)
            self.edge_dst = np.array(dst, dtype=int)
            self.edge_sign = np.array(sgn)
            self.edge_sqrt = (np.array(sqrts) if sqrts
                              else np.zeros((0, self.d, self.d)))

        p = sc.params
        self.sigma, self.theta = p.sigma, p.theta
        self.beta = p.beta
        self.delta = np.zeros_like(p.delta) if self.static_baseline else p.delta
        self.chi0 = p.chi0

    def control(self, xhat: np.ndarray) -> np.ndarray:
        if self.leader_follower:
            return self.input_drive - self.grounded @ xhat
        return -(self.laplacian @ xhat)

    def disagreement_terms(self, xhat: np.ndarray) -> np.ndarray:
        """Per-agent sum of ||sqrt(|A_ij|) p_ij||^2 (leaderless trigger only)."""
        blocks = xhat.reshape(self.n, self.d)
        if self.edge_src.size == 0:
            return np.zeros(self.n)
        p = blocks[self.edge_src] - self.edge_sign[:, None] * blocks[self.edge_dst]
        rp = np.einsum("eij,ej->ei", self.edge_sqrt, p)
        per_edge = np.einsum("ei,ei->e", rp, rp)
        out = np.zeros(self.n)
        np.add.at(out, self.edge_src, per_edge)
        return out


def compile_scenario(sc: Scenario) -> CompiledScenario:
    return CompiledScenario(sc)


def initial_sim_state(compiled: CompiledScenario,
                      x0: Optional[np.ndarray] = None) -> SimState:
    sc = compiled.scenario
    x = sc.initial_state() if x0 is None else np.array(x0, dtype=float)
    # Every agent broadcasts at t = 0, so the error starts at exactly zero.
    return SimState(t=0.0, x=x, xhat=x.copy(), chi=np.array(compiled.chi0))


def step(state: SimState, dt: float,
         scenario: Union[Scenario, CompiledScenario]
         ) -> tuple[SimState, np.ndarray]:
    """Advance one step and apply any triggered broadcasts.

    Order of operations: (a) exact affine state update under the held
    control; (b) 4-stage explicit update of the auxiliary variables along the
    segment; (c) threshold evaluation at the segment end with the advanced
    values; (d) atomic rebroadcast for every agent that fired.  Returns the
    post-broadcast state and the array of fired agent indices.
    """
    compiled = scenario if isinstance(scenario, CompiledScenario) \
        else compile_scenario(scenario)
    n, d = compiled.n, compiled.d

    qhat = compiled.control(state.xhat)
    e0 = (state.xhat - state.x).reshape(n, d)
    q_blocks = qhat.reshape(n, d)

    if compiled.leader_follower:
        q_sq = np.einsum("ij,ij->i", q_blocks, q_blocks)

        def drive(s: float) -> np.ndarray:
            shifted = e0 - s * q_blocks
            e_sq = np.einsum("ij,ij->i", shifted, shifted)
            return compiled.delta * (compiled.sigma * q_sq - compiled.gamma * e_sq)
    else:
        disagreement = compiled.disagreement_terms(state.xhat)

        def drive(s: float) -> np.ndarray:
            shifted = e0 - s * q_blocks
            e_sq = np.einsum("ij,ij->i", shifted, shifted)
            return compiled.delta * (compiled.sigma / 4.0 * disagreement
                                     - compiled.mu_bar * compiled.deg * e_sq)

    g0 = drive(0.0)
    gh = drive(dt / 2.0)
    g1 = drive(dt)
    beta = compiled.beta
    chi = state.chi
    k1 = -beta * chi + g0
    k2 = -beta * (chi + dt / 2.0 * k1) + gh
    k3 = -beta * (chi + dt / 2.0 * k2) + gh
    k4 = -beta * (chi + dt * k3) + g1
    chi_next = chi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    x_next = state.x + dt * qhat

    if not np.all(np.isfinite(x_next)) or np.max(np.abs(x_next)) > DIVERGENCE_GUARD:
        raise Diverged(
            f"state norm exceeded {DIVERGENCE_GUARD:g} at t={state.t + dt:g}")

    e_end = (state.xhat - x_next).reshape(n, d)
    e_sq_end = np.einsum("ij,ij->i", e_end, e_end)
    if compiled.leader_follower:
        lhs = compiled.theta * (compiled.gamma * e_sq_end - compiled.sigma * q_sq)
    else:
        lhs = compiled.theta * (compiled.mu_bar * compiled.deg * e_sq_end
                                - compiled.sigma / 4.0 * disagreement)
    threshold = np.zeros(n) if compiled.static_baseline else chi_next
    fired = np.flatnonzero(lhs > threshold)

    xhat_next = state.xhat.copy()
    for i in fired:
        xhat_next[i * d:(i + 1) * d] = x_next[i * d:(i + 1) * d]

    return SimState(t=state.t + dt, x=x_next, xhat=xhat_next,
                    chi=chi_next), fired


def run(sc: Scenario, *, check_assumptions: bool = True) -> TrajectoryRecord:
    """Validate, simulate over [0, horizon], and record everything.

    Raises :class:`InvalidScenario` with the full violation list before
    touching the integrator, and :class:`Diverged` (carrying the partial
    record) if the divergence guard trips.
    """
    violations = validate_scenario(sc, assumptions=check_assumptions)
    if violations:
        raise InvalidScenario(violations)

    started = time.perf_counter()
    compiled = compile_scenario(sc)
    n, d = compiled.n, compiled.d
    steps = sc.step_count
    times = np.arange(steps + 1) * sc.dt

    states = np.empty((steps + 1, n * d))
    broadcasts = np.empty_like(states)
    chi = np.empty((steps + 1, n))
    controls = np.empty_like(states)
    events: list[list[float]] = [[0.0] for _ in range(n)]
    warnings: list[str] = []

    state = initial_sim_state(compiled)
    states[0] = state.x
    broadcasts[0] = state.xhat
    chi[0] = state.chi

    limit_state = _limit_state(sc)

    def finish(upto: int) -> TrajectoryRecord:
        ev = tuple(np.array(e) for e in events)
        return TrajectoryRecord(
            times=times[:upto + 1], states=states[:upto + 1],
            broadcasts=broadcasts[:upto + 1], chi=chi[:upto + 1],
            controls=controls[:upto + 1], events=ev, warnings=tuple(warnings),
            scenario=sc, limit_state=limit_state,
            duration_s=time.perf_counter() - started)

    for k in range(steps):
        controls[k] = compiled.control(state.xhat)
        try:
            state, fired = step(state, sc.dt, compiled)
        except Diverged as exc:
            controls[k + 1:] = 0.0
            raise Diverged(str(exc), partial_record=finish(k)) from None
        states[k + 1] = state.x
        broadcasts[k + 1] = state.xhat
        chi[k + 1] = state.chi
        for i in fired:
            events[i].append(float(times[k + 1]))
    controls[steps] = compiled.control(state.xhat)

    if np.min(chi) <= 0.0:
        warnings.append("auxiliary variable dropped to a nonpositive value")
    dwell = min_inter_event_from(events, times, sc.dt, sc.horizon)
    warnings.extend(dwell.warnings)
    return finish(steps)


def _limit_state(sc: Scenario) -> Optional[np.ndarray]:
    """Predicted asymptotic state: gauge-signed mean (leaderless) or
    gauge-signed input copies (leader-follower)."""
    report = mwgraph.verify_assumption1(sc.graph)
    if not report.holds:
        return None
    signs = mwgraph.gauge_matrix(report.bipartition).signs.astype(float)
    if isinstance(sc.mode, LeaderFollower):
        return (signs[:, None] * np.asarray(sc.mode.u0)[None, :]).reshape(-1)
    return mwgraph.predicted_bipartite_limit(sc.graph, sc.initial_state())


def chi_floor_check(record: TrajectoryRecord,
                    params: Optional[TriggerParams] = None) -> np.ndarray:
    """Minimum over the grid of chi_i(t) - chi_i(0) exp(-(beta_i + delta_i /
    theta_i) t), per agent.  Values at or above the (negated) integration
    tolerance certify the guaranteed positive lower envelope."""
    p = params if params is not None else record.scenario.params
    rate = p.beta + p.delta / p.theta
    floor = p.chi0[None, :] * np.exp(-np.outer(record.times, rate))
    return (record.chi - floor).min(axis=0)


@dataclass(frozen=True)
class DwellStats:
    min_dwell: np.ndarray
    max_consecutive: np.ndarray
    warnings: tuple[str, ...] = field(default=())


def min_inter_event_from(events, times, dt: float, horizon: float,
                         consecutive_warn: int = CONSECUTIVE_FIRE_WARN
                         ) -> DwellStats:
    n = len(events)
    min_dwell = np.empty(n)
    max_consec = np.zeros(n, dtype=int)
    warnings = []
    for i, ev in enumerate(events):
        ev = np.asarray(ev, dtype=float)
        if len(ev) < 2:
            # No dwell constraint binds with a single event; report the horizon.
            min_dwell[i] = horizon
            max_consec[i] = min(len(ev), 1)
            continue
        diffs = np.diff(ev)
        min_dwell[i] = float(diffs.min())
        steps = np.rint(diffs / dt).astype(int)
        streak = best = 1
        for s in steps:
            streak = streak + 1 if s == 1 else 1
            best = max(best, streak)
        max_consec[i] = best
        if best > consecutive_warn:
            warnings.append(
                f"agent {i} fired on {best} consecutive steps "
                f"(threshold {consecutive_warn})")
    return DwellStats(min_dwell, max_consec, tuple(warnings))


def min_inter_event(record: TrajectoryRecord,
                    consecutive_warn: int = CONSECUTIVE_FIRE_WARN) -> DwellStats:
    """Per-agent minimum inter-event time, plus adjacent-step firing streaks."""
    return min_inter_event_from(record.events, record.times,
                                record.scenario.dt, record.scenario.horizon,
                                consecutive_warn)
