"""Node-level Monte Carlo simulation of the voter dynamics.

Each iteration picks one node uniformly, which then copies the state of a
uniformly chosen neighbor; no-change events still consume an iteration.
Replicas are fully reproducible: replica r of a run with master seed s
draws from the splittable stream ``SeedSequence((s, r))``, so results are
independent of execution order and parallelism.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .topology import BIPARTITE, COMPLETE, Topology, consensus_scale

_CHUNK = 8192

#: censoring cap as a multiple of the analytic consensus scale
CAP_FACTOR = 100


class UnsupportedObservableError(ValueError):
    """Raised for observables defined only on specific topologies."""


@dataclass
class MicroState:
    """Binary opinion vector plus incrementally maintained counts."""

    states: list
    n_A: int
    #: occupation count per degree class {degree: number of A-nodes}
    alpha: dict

    def is_consensus(self, N):
        return self.n_A == 0 or self.n_A == N


@dataclass(frozen=True)
class SimulationConfig:
    topology: Topology
    #: ("count", n) | ("density", rho) | ("uniform",) | ("groups", n1, n2)
    init: tuple
    runs: int
    seed: int
    max_steps: int | None = None
    track_local_times: bool = False

    def step_cap(self):
        if self.max_steps is not None:
            return self.max_steps
        rho = _nominal_density(self.topology, self.init)
        return int(CAP_FACTOR * consensus_scale(self.topology, rho)) + CAP_FACTOR


@dataclass(frozen=True)
class RunRecord:
    replica: int
    steps: int
    censored: bool
    fixated: bool  # ended at all-A
    initial_count: int
    visits: tuple | None = None


@dataclass(frozen=True)
class SimulationReport:
    """Aggregate moment estimates with provenance for replay."""

    seed: int
    runs: int
    censored: int
    normalization: float
    p_values: tuple
    moments: tuple  # T_p = mean over runs of (T/normalization)^p
    std_errors: tuple
    log_moments: tuple  # ln(T_p / p!)
    slope: float
    intercept: float
    r_squared: float


def _nominal_density(topo, init):
    kind = init[0]
    if kind == "density":
        rho = float(init[1])
    elif kind == "count":
        rho = init[1] / topo.N
    elif kind == "groups":
        rho = (init[1] + init[2]) / topo.N
    elif kind == "uniform":
        rho = 0.5
    else:
        raise ValueError(f"unknown init spec {init!r}")
    # the cap only needs the right scale; keep the entropy factor finite
    return min(max(rho, 1.0 / topo.N), 1.0 - 1.0 / topo.N)


def replica_rng(seed, replica):
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(replica))))


def _initial_states(topo, init, rng):
    """Realize a microstate for the configured macrostate.

    A-nodes are placed uniformly at random (fresh randomness per replica);
    group inits place the given counts inside each bipartite group.
    """
    N = topo.N
    kind = init[0]
    states = [0] * N
    if kind == "groups":
        if topo.groups is None:
            raise ValueError("per-group init requires a bipartite topology")
        n1, n2 = int(init[1]), int(init[2])
        g1, g2 = topo.groups
        if not (0 <= n1 <= g1 and 0 <= n2 <= g2):
            raise ValueError(f"group counts ({n1}, {n2}) exceed group sizes {topo.groups}")
        for i in rng.choice(g1, size=n1, replace=False):
            states[i] = 1
        for i in rng.choice(g2, size=n2, replace=False):
            states[g1 + i] = 1
        return states, n1 + n2
    if kind == "count":
        count = int(init[1])
    elif kind == "density":
        count = round(float(init[1]) * N)
    elif kind == "uniform":
        count = int(rng.integers(0, N + 1))
    else:
        raise ValueError(f"unknown init spec {init!r}")
    if not 0 <= count <= N:
        raise ValueError(f"initial count {count} outside 0..{N}")
    for i in rng.choice(N, size=count, replace=False):
        states[i] = 1
    return states, count


def make_microstate(topo, init, rng):
    states, n_a = _initial_states(topo, init, rng)
    alpha = {}
    for deg, s in zip(topo.degrees, states):
        if s:
            alpha[deg] = alpha.get(deg, 0) + 1
    return MicroState(states=states, n_A=n_a, alpha=alpha)


def audit_counts(state, topo):
    """Debug check that the incremental counts match the state vector."""
    n_a = sum(state.states)
    alpha = {}
    for deg, s in zip(topo.degrees, state.states):
        if s:
            alpha[deg] = alpha.get(deg, 0) + 1
    return state.n_A == n_a and {k: v for k, v in state.alpha.items() if v} == alpha


def step(state, topo, rng):
    """One voter iteration in place; returns the same MicroState.

    The iteration counts even when the copied state equals the current one.
    """
    N = topo.N
    i = int(rng.integers(0, N))
    if topo.kind == COMPLETE:
        j = int(rng.integers(1, N))
        j = (i + j) % N
    elif topo.kind == BIPARTITE:
        n1 = topo.groups[0]
        if i < n1:
            j = n1 + int(rng.integers(0, topo.N - n1))
        else:
            j = int(rng.integers(0, n1))
    else:
        lo, hi = topo.indptr[i], topo.indptr[i + 1]
        j = topo.indices[lo + int(rng.integers(0, hi - lo))]
    si, sj = state.states[i], state.states[j]
    if si != sj:
        state.states[i] = sj
        state.n_A += sj - si
        deg = topo.degrees[i]
        state.alpha[deg] = state.alpha.get(deg, 0) + sj - si
    return state


def run_to_consensus(config, replica):
    """Simulate one replica to unanimity (or the censoring cap).

    For complete graphs with ``track_local_times`` the macrostate visit
    tally is incremented at every iteration from m = 0, matching the
    local-time counting convention.
    """
    topo = config.topology
    N = topo.N
    rng = replica_rng(config.seed, replica)
    states, n_a = _initial_states(topo, config.init, rng)
    cap = config.step_cap()
    track = config.track_local_times
    if track and topo.kind != COMPLETE:
        raise UnsupportedObservableError(
            "macrostate local times are defined only on the complete graph"
        )
    visits = [0] * (N + 1) if track else None
    initial = n_a
    steps = 0

    kind = topo.kind
    if kind == BIPARTITE:
        n1 = topo.groups[0]
        n2 = N - n1
    elif kind != COMPLETE:
        indptr = list(topo.indptr)
        indices = list(topo.indices)
        degrees = list(topo.degrees)

    while 0 < n_a < N and steps < cap:
        take = min(_CHUNK, cap - steps)
        nodes = rng.integers(0, N, take).tolist()
        if kind == COMPLETE:
            offsets = rng.integers(1, N, take).tolist()
        else:
            uniforms = rng.random(take).tolist()
        for t in range(take):
            if track:
                visits[n_a] += 1
            i = nodes[t]
            if kind == COMPLETE:
                j = i + offsets[t]
                if j >= N:
                    j -= N
            elif kind == BIPARTITE:
                j = n1 + int(uniforms[t] * n2) if i < n1 else int(uniforms[t] * n1)
            else:
                j = indices[indptr[i] + int(uniforms[t] * degrees[i])]
            sj = states[j]
            steps += 1
            if states[i] != sj:
                states[i] = sj
                n_a += 1 if sj else -1
                if n_a == 0 or n_a == N:
                    break

    censored = 0 < n_a < N
    return RunRecord(
        replica=replica,
        steps=steps,
        censored=censored,
        fixated=n_a == N,
        initial_count=initial,
        visits=tuple(visits) if track else None,
    )


def simulate(config):
    """All replicas of a configuration, in replica order."""
    if config.runs < 1:
        raise ValueError("need at least one run")
    records = [run_to_consensus(config, r) for r in range(config.runs)]
    n_censored = sum(rec.censored for rec in records)
    if n_censored:
        warnings.warn(
            f"{n_censored} of {config.runs} runs hit the step cap and are "
            "excluded from moment estimates",
            stacklevel=2,
        )
    return records


def estimate_moments(records, seed, p_max, normalization=1.0):
    """Moment estimates T_p = mean((T/normalization)^p) with diagnostics.

    Emits the ln(T_p/p!) sequence and its least-squares line in p, the
    linearity diagnostic predicted by the spectral gap analysis.
    """
    times = [rec.steps for rec in records if not rec.censored]
    censored = len(records) - len(times)
    if len(times) < 2:
        raise ValueError("need at least two uncensored runs to estimate moments")
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    t = np.asarray(times, dtype=float) / float(normalization)
    p_values = tuple(range(1, p_max + 1))
    moments, errors, logm = [], [], []
    for p in p_values:
        tp = t**p
        moments.append(tp.mean())
        errors.append(tp.std(ddof=1) / math.sqrt(len(tp)))
        logm.append(math.log(tp.mean()) - math.lgamma(p + 1))
    if p_max >= 2:
        slope, intercept, r2 = linear_fit(np.asarray(p_values, dtype=float), np.asarray(logm))
    else:
        slope = intercept = r2 = float("nan")
    return SimulationReport(
        seed=seed,
        runs=len(records),
        censored=censored,
        normalization=float(normalization),
        p_values=p_values,
        moments=tuple(moments),
        std_errors=tuple(errors),
        log_moments=tuple(logm),
        slope=slope,
        intercept=intercept,
        r_squared=r2,
    )


def local_time_histogram(records, N):
    """Mean visit count per macrostate across runs, with standard errors."""
    tallies = [rec.visits for rec in records if not rec.censored]
    if not tallies or tallies[0] is None:
        raise UnsupportedObservableError(
            "runs were not tracked for local times (complete graph only)"
        )
    arr = np.asarray(tallies, dtype=float)
    mean = arr.mean(axis=0)
    se = arr.std(axis=0, ddof=1) / math.sqrt(arr.shape[0])
    return mean, se


def linear_fit(x, y):
    """Least-squares line with the coefficient of determination."""
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
    return float(slope), float(intercept), r2
