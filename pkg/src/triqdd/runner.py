"""Experiment protocols: decay curves, ordering reports, star protection.

A Protocol names what runs on which qubits: free evolution or a DD
family on one, two (optionally m-modified), or all three spins. Decay
runs prepare a catalog state, evolve it over a commensurate time grid,
and record the state's tracked element normalized to its starting
value; star runs track the concurrence of one reduced pair instead.

Free evolution records the element magnitude. Pulsed runs record the
echo amplitude in phase with the prepared element, floored at zero: a
sequence only counts as preserving the coherence if it actually returns
the element, so phase left behind by couplings the sequence fails to
refocus registers as loss. This is what separates the protocols. The
third-order element rides on no coupling (every pair product is equal
on both of its basis states), so pulsing all three spins protects it;
lower orders are coupling-sensitive, and survive only under sequences
that delete (single spin) or refocus (m-modified pair) the couplings
they feel, while the all-spin sequence leaves every coupling running.

Static disorder is handled by shot averaging: each shot draws per-spin
offset shifts once and keeps them for the whole evolution, the complex
states are averaged across shots, and only then are magnitudes or
concurrences taken. Shots share the walk, batched along the leading
axis, so a curve is one pass over its pulse schedule.

Reference percentages from the published tables are bundled as data and
used strictly for qualitative ordering checks (which protocol beats
which, by at least a margin); matching the printed numbers is a non-goal
because the hardware noise behind them is not parameterized anywhere.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from . import circuits, ddseq, qmat, spinsys
from .qmat import InvariantError
from .spinsys import SpinSystem

GRID_T_MAX = 0.7
GRID_POINTS = 20
MARGIN_PP = 5.0

KINDS = ("FreeEv", "DD1sp", "DD2sp", "DD3sp", "mDD2sp")
_KIND_TARGET_COUNT = {"DD1sp": 1, "DD2sp": 2, "mDD2sp": 2, "DD3sp": 3}

TABLE_STATES = ("psi0a", "psi0b", "psi1a", "psi1b", "psi2a", "psi2b", "psi3")
STAR_PAIRS = {"AC": (1, 3), "BC": (2, 3)}


@dataclass(frozen=True)
class Protocol:
    """What runs during the evolution: nothing, or a DD cycle on targets."""

    kind: str
    family: str | None = None
    tau: float | None = None
    t_p: float = 0.0
    targets: tuple[int, ...] = ()
    slot: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown protocol kind '{self.kind}', expected one of {KINDS}")
        if self.kind == "FreeEv":
            if self.family is not None or self.targets:
                raise ValueError("FreeEv takes no family and no targets")
            return
        if self.family not in ddseq.known_families():
            raise ValueError(f"unknown family '{self.family}' for {self.kind}")
        if self.tau is None or self.tau <= 0:
            raise ValueError(f"{self.kind} needs a positive interpulse delay")
        if self.t_p < 0:
            raise ValueError("pulse width must be nonnegative")
        want = _KIND_TARGET_COUNT[self.kind]
        if len(self.targets) != want:
            raise ValueError(f"{self.kind} targets exactly {want} qubit(s), got {self.targets}")
        if self.slot is not None and self.kind != "mDD2sp":
            raise ValueError("a modification slot only applies to mDD2sp")

    @property
    def sequence_label(self) -> str:
        if self.kind == "FreeEv":
            return "-"
        return ("m" + self.family) if self.kind == "mDD2sp" else self.family


def build_cycle(protocol: Protocol) -> ddseq.DDCycle | None:
    """The executable cycle behind a protocol, None for free evolution."""
    if protocol.kind == "FreeEv":
        return None
    cycle = ddseq.generate(protocol.family, protocol.tau, protocol.t_p, protocol.targets)
    if protocol.kind == "mDD2sp":
        cycle = ddseq.modify(cycle, slot=protocol.slot)
    return cycle


# -- committed defaults ----------------------------------------------------

@lru_cache(maxsize=1)
def default_system() -> SpinSystem:
    """The committed run configuration bundled with the package."""
    text = resources.files("triqdd").joinpath("data/default_run.cfg").read_text()
    return spinsys.system_from_text(text)


@lru_cache(maxsize=1)
def load_baseline() -> dict:
    """Golden ordering verdicts frozen from the committed default run."""
    return json.loads(
        resources.files("triqdd").joinpath("data/ordering_baseline.json").read_text())


@lru_cache(maxsize=1)
def delay_table() -> dict:
    return json.loads(
        resources.files("triqdd").joinpath("data/protocol_delays.json").read_text())


def _delay_row(block: dict, state_id: str | None, family: str):
    rows = block.get(state_id) or block.get("*")
    if rows is None or family not in rows:
        raise ValueError(f"no default delay for state {state_id!r}, family {family!r}")
    tau_ms, cycle_s = rows[family]
    return tau_ms * 1e-3, cycle_s


def _pulse_width(family: str, tau: float, cycle_s: float, modified: bool) -> float:
    n = len(ddseq.phase_tables()[family])
    slack = cycle_s - n * tau
    t_p = slack / (n + 1) if modified else slack / n
    if t_p < 0:
        raise ValueError(f"delay table row for {family} leaves negative pulse width")
    return t_p


def differing_qubits(state_id: str) -> tuple[int, ...]:
    """Qubits whose bit differs across the state's tracked element."""
    a, b = circuits.tracked_element(state_id)
    diff = a ^ b
    return tuple(q for q in (1, 2, 3) if diff & (1 << (3 - q)))


def default_protocol(kind: str, state_id: str | None = None, family: str = "XY8") -> Protocol:
    """Protocol with the committed delay, width, and target mapping."""
    if kind == "FreeEv":
        return Protocol("FreeEv")
    blocks = delay_table()["protocols"]
    if kind not in blocks:
        raise ValueError(f"no delay defaults for kind '{kind}'")
    tau, cycle_s = _delay_row(blocks[kind], state_id, family)
    t_p = _pulse_width(family, tau, cycle_s, modified=(kind == "mDD2sp"))
    if kind == "DD3sp":
        targets = (1, 2, 3)
    else:
        if state_id is None:
            raise ValueError(f"{kind} needs a state to pick its target qubits")
        targets = differing_qubits(state_id)
        if len(targets) != _KIND_TARGET_COUNT[kind]:
            raise ValueError(
                f"{state_id} exposes qubits {targets}, unusable for {kind}")
    return Protocol(kind, family, tau, t_p, targets)


def star_protocol(pair: tuple[int, int], family: str = "XY8") -> Protocol:
    """Committed m-cycle protocol for one star pair."""
    key = f"{pair[0]}-{pair[1]}"
    rows = delay_table()["star_pairs"]
    if key not in rows:
        raise ValueError(f"no star delay for pair {pair}, expected one of {sorted(rows)}")
    if family not in rows[key]:
        raise ValueError(f"no star delay for pair {pair}, family {family!r}")
    tau_ms, cycle_s = rows[key][family]
    tau = tau_ms * 1e-3
    t_p = _pulse_width(family, tau, cycle_s, modified=True)
    return Protocol("mDD2sp", family, tau, t_p, tuple(pair))


# -- curves ----------------------------------------------------------------

@dataclass(frozen=True)
class DecayCurve:
    """One monitored quantity over a time grid under one protocol."""

    state: str
    protocol: Protocol
    kind: str  # "amplitude" or "concurrence"
    times: tuple[float, ...]
    values: tuple[float, ...]
    element: tuple[int, int] | None = None
    subsystem: str | None = None

    def __post_init__(self):
        if self.kind not in ("amplitude", "concurrence"):
            raise ValueError(f"unknown curve kind '{self.kind}'")
        if len(self.times) != len(self.values):
            raise ValueError("times and values length mismatch")
        if any(v < 0 for v in self.values):
            raise InvariantError("negative curve value")
        if (self.kind == "amplitude" and self.times and self.times[0] == 0.0
                and abs(self.values[0] - 1.0) > 1e-9):
            raise InvariantError("amplitude curve must start at 1")


def default_time_grid(unit: float | None, t_max: float = GRID_T_MAX,
                      points: int = GRID_POINTS) -> tuple[float, ...]:
    """Grid of `points` targets from 0 to t_max, snapped to whole units.

    Snapping can merge neighbors when the unit is coarse; the endpoints
    always survive. FreeEv (unit None) keeps the plain uniform grid.
    """
    if t_max < 0 or points < 2:
        raise ValueError("need t_max >= 0 and at least two grid points")
    if unit is None:
        return tuple(float(t) for t in np.linspace(0.0, t_max, points))
    total = round(t_max / unit)
    if abs(t_max - total * unit) > ddseq.REPEAT_ATOL:
        raise ValueError(
            f"t_max {t_max} s is not a whole number of {unit} s units; "
            f"nearest are {np.floor(t_max / unit) * unit:.6g} and "
            f"{np.ceil(t_max / unit) * unit:.6g}")
    counts = sorted(set(int(round(k)) for k in np.linspace(0, total, points)))
    return tuple(k * unit for k in counts)


def _unit_counts(times, unit, name) -> list[int]:
    counts = []
    for t in times:
        if t < 0:
            raise ValueError(f"negative time {t}")
        k = round(t / unit)
        if abs(t - k * unit) > ddseq.REPEAT_ATOL:
            lo, hi = np.floor(t / unit) * unit, np.ceil(t / unit) * unit
            raise ValueError(
                f"time {t} s is not a whole number of {name} units "
                f"({unit:.6g} s); nearest valid times are {lo:.6g} and {hi:.6g}")
        counts.append(int(k))
    return counts


def _disorder_shifts(sys: SpinSystem) -> np.ndarray:
    """Per-shot (8, 8) element frequency shifts; one zero shot without disorder."""
    if sys.disorder is None:
        return np.zeros((1, spinsys.DIM, spinsys.DIM))
    deltas = sys.disorder.draw()
    return np.stack([spinsys.disorder_phase_rates(tuple(d)) for d in deltas])


def _unit_plan(sys: SpinSystem, cycle: ddseq.DDCycle, shifts: np.ndarray) -> list:
    """Segment list for one repeat unit: ('free', stacked factors) and
    ('pulse', U, U dagger), batched over disorder shots.

    Hard pulses (internal Hamiltonian off) are rotations at the scheduled
    pulse centers while free evolution, dephasing included, runs through
    the nominal window spans; the window width then only shapes the
    schedule. With the internal Hamiltonian on, each window is integrated
    as a finite segment and free evolution covers the gaps alone.
    """
    events, duration = ddseq.program(cycle, cycle.unit_cycles)
    hard = not sys.pulse.internal_h_during_pulse
    plan = []
    gap_cache: dict[float, np.ndarray] = {}
    pulse_cache: dict[tuple, np.ndarray] = {}

    def free_segment(dt):
        key = round(dt, 15)
        if key not in gap_cache:
            gap_cache[key] = np.stack(
                [spinsys.free_factors(sys, dt, shift) for shift in shifts])
        plan.append(("free", gap_cache[key]))

    t = 0.0
    for ev in sorted(events, key=lambda e: e.start):
        edge = ev.start + ev.duration / 2.0 if hard else ev.start
        gap = edge - t
        if gap < -spinsys.TIME_ATOL:
            raise InvariantError(f"overlapping events in {cycle.name} program")
        if gap > spinsys.TIME_ATOL:
            free_segment(gap)
        key = (ev.targets, ev.phases, ev.flip, ev.duration)
        if key not in pulse_cache:
            pulse_cache[key] = spinsys.pulse_propagator(ev, sys)
        u = pulse_cache[key]
        plan.append(("pulse", u, u.conj().T))
        t = edge if hard else ev.end
    if duration - t > spinsys.TIME_ATOL:
        free_segment(duration - t)
    return plan


def _apply_unit(states: np.ndarray, plan) -> np.ndarray:
    for seg in plan:
        if seg[0] == "free":
            states = states * seg[1]
        else:
            states = np.matmul(seg[1], states) @ seg[2]
    return states


def _record(avg: np.ndarray, element, keep):
    qmat.assert_density_matrix(avg)
    if keep is not None:
        return qmat.concurrence(qmat.partial_trace(avg, keep))
    return complex(avg[element])


def _evolve_values(rho0, sys, cycle, times, element=None, keep=None,
                   tomo_sigma=None, tomo_seed=0):
    """Shot-averaged tracked values at the given times (DD or free)."""
    shifts = _disorder_shifts(sys)

    def finish(avg, index):
        if tomo_sigma is not None:
            avg = circuits.tomography(avg, sigma=tomo_sigma, seed=tomo_seed + index)
        return _record(avg, element, keep)

    if cycle is None:
        values = []
        for i, t in enumerate(times):
            stack = np.stack(
                [rho0 * spinsys.free_factors(sys, t, shift) for shift in shifts])
            values.append(finish(stack.mean(axis=0), i))
        return values

    counts = _unit_counts(times, cycle.unit_duration, cycle.name)
    plan = _unit_plan(sys, cycle, shifts)
    states = np.broadcast_to(rho0, (shifts.shape[0],) + rho0.shape).copy()
    values, applied = [], 0
    for i, k in enumerate(counts):
        while applied < k:
            states = _apply_unit(states, plan)
            applied += 1
        values.append(finish(states.mean(axis=0), i))
    return values


def run_decay(state_id: str, protocol: Protocol, sys: SpinSystem,
              times=None) -> DecayCurve:
    """Prepare a catalog state and track its element under one protocol.

    Free evolution records the element magnitude: the deterministic line
    phase carries no decay information there. Pulsed protocols record the
    echo amplitude in phase with the prepared element, floored at zero. A
    sequence that refocuses everything returns the element exactly, so any
    residual phase, couplings to pulsed partners included, registers as
    loss, the way an unphased echo line loses absorption amplitude.
    """
    rho0 = circuits.prepare(state_id)
    element = circuits.tracked_element(state_id)
    cycle = build_cycle(protocol)
    if times is None:
        times = default_time_grid(None if cycle is None else cycle.unit_duration)
    times = tuple(sorted(set(float(t) for t in times)))
    raw = _evolve_values(rho0, sys, cycle, times, element=element)
    ref = complex(rho0[element])
    if protocol.kind == "FreeEv":
        values = tuple(abs(v) / abs(ref) for v in raw)
    else:
        unit = ref / abs(ref)
        values = tuple(max((v * unit.conjugate()).real, 0.0) / abs(ref) for v in raw)
    return DecayCurve(state_id, protocol, "amplitude", times, values, element=element)


def percent_at(curve: DecayCurve, t: float, interpolate: bool = False) -> float:
    """100 * C(t); t must sit on the curve's grid unless interpolate."""
    times = np.asarray(curve.times)
    hit = np.nonzero(np.abs(times - t) <= ddseq.REPEAT_ATOL)[0]
    if hit.size:
        return 100.0 * curve.values[int(hit[0])]
    if interpolate:
        if not (times[0] <= t <= times[-1]):
            raise ValueError(f"time {t} outside the curve range")
        return 100.0 * float(np.interp(t, times, curve.values))
    shown = ", ".join(f"{x:.6g}" for x in curve.times[:8])
    raise ValueError(f"time {t} not on the curve grid ({shown}, ...); "
                     "pass interpolate=True to interpolate")


# -- table grid ------------------------------------------------------------

DESIGNATED_KIND = {"psi0a": "mDD2sp", "psi0b": "mDD2sp",
                   "psi1a": "DD1sp", "psi1b": "DD1sp",
                   "psi2a": "mDD2sp", "psi2b": "mDD2sp",
                   "psi3": "DD3sp"}


@dataclass(frozen=True)
class GridRun:
    """All decay curves of one table run plus their percents at t_eval."""

    curves: tuple[DecayCurve, ...]
    percents: dict = field(default_factory=dict)
    t_eval: float = GRID_T_MAX


def run_grid(sys: SpinSystem, families=None, states=TABLE_STATES,
             t_max: float = GRID_T_MAX, points: int = GRID_POINTS) -> GridRun:
    """FreeEv, the designated protocol, and DD3sp for every table state."""
    families = tuple(families) if families else ("XY8", "UR12", "XY16", "KDD20")
    curves, percents = [], {}
    for state_id in states:
        protos = [default_protocol("FreeEv")]
        for family in families:
            protos.append(default_protocol(DESIGNATED_KIND[state_id], state_id, family))
            if DESIGNATED_KIND[state_id] != "DD3sp":
                protos.append(default_protocol("DD3sp", state_id, family))
        for proto in protos:
            cycle = build_cycle(proto)
            unit = None if cycle is None else cycle.unit_duration
            curve = run_decay(state_id, proto, sys,
                              times=default_time_grid(unit, t_max, points))
            curves.append(curve)
            key = (state_id, proto.kind, proto.family)
            percents[key] = percent_at(curve, t_max)
    return GridRun(tuple(curves), percents, t_max)


# -- reference comparison --------------------------------------------------

@dataclass(frozen=True)
class ReferenceTable:
    """Published preservation percentages, for ordering checks only."""

    time_s: float
    blocks: tuple = ()

    def percent(self, state_id: str, row: str) -> float:
        for states, rows in self.blocks:
            if state_id in states:
                if row not in rows:
                    raise ValueError(f"reference table has no row '{row}' for {state_id}")
                return rows[row][states.index(state_id)]
        raise ValueError(f"reference table does not cover state '{state_id}'")

    def has(self, state_id: str, row: str) -> bool:
        try:
            self.percent(state_id, row)
            return True
        except ValueError:
            return False


@lru_cache(maxsize=1)
def load_reference() -> ReferenceTable:
    doc = json.loads(
        resources.files("triqdd").joinpath("data/reference_percentages.json").read_text())
    blocks = []
    for name in ("zero_and_second_order", "first_and_third_order"):
        block = doc[name]
        blocks.append((tuple(block["states"]), block["rows"]))
    return ReferenceTable(doc["time_s"], tuple(blocks))


def _reference_row(kind: str, family: str | None) -> str:
    if kind == "FreeEv":
        return "FreeEv"
    return ("m" + family) if kind == "mDD2sp" else family


@dataclass(frozen=True)
class FactCheck:
    """One simulated ordering claim with its verdict and published context."""

    state: str
    label: str
    lhs: tuple
    rhs: tuple
    lhs_pct: float
    rhs_pct: float
    margin_pp: float
    verdict: str  # "pass", "fail", "n/a"
    published_lhs: float | None = None
    published_rhs: float | None = None


def fact_check(percents: dict, state_id: str, lhs: tuple, rhs: tuple,
               margin_pp: float = MARGIN_PP,
               table: ReferenceTable | None = None) -> FactCheck:
    """Does protocol lhs beat protocol rhs for this state by the margin.

    lhs/rhs are (kind, family) with family None for FreeEv. Comparing a
    protocol against itself is not an ordering claim and returns "n/a".
    """
    label = f"{lhs[0]}>{rhs[0]}"
    if lhs == rhs:
        return FactCheck(state_id, label, lhs, rhs,
                         percents[(state_id,) + lhs], percents[(state_id,) + rhs],
                         0.0, "n/a")
    missing = [(state_id,) + side for side in (lhs, rhs)
               if (state_id,) + side not in percents]
    if missing:
        raise ValueError(f"results grid is missing cells: {missing}")
    lhs_pct = percents[(state_id,) + lhs]
    rhs_pct = percents[(state_id,) + rhs]
    margin = lhs_pct - rhs_pct
    verdict = "pass" if margin >= margin_pp else "fail"
    published = [None, None]
    if table is not None:
        for i, side in enumerate((lhs, rhs)):
            # a family row only speaks for the state's designated protocol
            if side[0] not in ("FreeEv", DESIGNATED_KIND.get(state_id)):
                continue
            row = _reference_row(*side)
            if table.has(state_id, row):
                published[i] = table.percent(state_id, row)
    return FactCheck(state_id, label, lhs, rhs, lhs_pct, rhs_pct,
                     margin, verdict, published[0], published[1])


@dataclass(frozen=True)
class OrderingReport:
    facts: tuple[FactCheck, ...]
    margin_pp: float = MARGIN_PP

    @property
    def all_pass(self) -> bool:
        return all(f.verdict == "pass" for f in self.facts if f.verdict != "n/a")

    def to_dict(self) -> dict:
        return {
            "margin_pp": self.margin_pp,
            "all_pass": self.all_pass,
            "facts": [
                {"state": f.state, "fact": f.label,
                 "lhs": list(f.lhs), "rhs": list(f.rhs),
                 "lhs_pct": f.lhs_pct, "rhs_pct": f.rhs_pct,
                 "margin_pp": f.margin_pp, "verdict": f.verdict,
                 "published_lhs": f.published_lhs, "published_rhs": f.published_rhs}
                for f in self.facts
            ],
        }


def ordering_facts(families=("XY8", "UR12", "XY16", "KDD20")):
    """The committed qualitative claims, per family: (state, lhs, rhs)."""
    free = ("FreeEv", None)
    out = []
    for family in families:
        out.append(("psi3", ("DD3sp", family), free))
        for state_id in ("psi1a", "psi1b"):
            out.append((state_id, ("DD1sp", family), free))
            out.append((state_id, ("DD1sp", family), ("DD3sp", family)))
        for state_id in ("psi2a", "psi2b"):
            out.append((state_id, ("mDD2sp", family), free))
            out.append((state_id, ("mDD2sp", family), ("DD3sp", family)))
        for state_id in ("psi0a", "psi0b"):
            out.append((state_id, ("mDD2sp", family), ("DD3sp", family)))
    return tuple(out)


def compare_to_reference(percents: dict, table: ReferenceTable | None = None,
                         margin_pp: float = MARGIN_PP,
                         families=("XY8", "UR12", "XY16", "KDD20")) -> OrderingReport:
    """Check every committed ordering fact against a results grid."""
    table = table or load_reference()
    facts = [fact_check(percents, state_id, lhs, rhs, margin_pp, table)
             for state_id, lhs, rhs in ordering_facts(families)]
    return OrderingReport(tuple(facts), margin_pp)


# -- star pair protection --------------------------------------------------

def star_protection(sys: SpinSystem, times=None, protected: bool = True,
                    family: str = "XY8", protocols: dict | None = None,
                    prep: str = "ideal", tomo_sigma: float | None = None,
                    seed: int = 0, t_max: float = GRID_T_MAX,
                    points: int = GRID_POINTS) -> dict[str, DecayCurve]:
    """Concurrence curves of both reduced star pairs, protected or free.

    Each pair is its own experiment: the m-cycle (or nothing) runs on
    that pair while the third spin rides along and is traced out. The
    free-evolution variant keeps the protected run's time grid so the
    two can be compared point by point. times may be one grid for both
    pairs or a {"AC": ..., "BC": ...} mapping. tomo_sigma, when given,
    routes every recorded state through the tomography pipeline first.
    """
    if prep not in ("ideal", "nmr"):
        raise ValueError(f"unknown preparation '{prep}', expected 'ideal' or 'nmr'")
    rho0 = circuits.prepare("star") if prep == "ideal" else circuits.prepare_star_nmr(sys)
    out = {}
    for name, pair in STAR_PAIRS.items():
        proto = (protocols or {}).get(name) or star_protocol(pair, family)
        cycle = build_cycle(proto)
        grid = times.get(name) if isinstance(times, dict) else times
        if grid is None:
            grid = default_time_grid(cycle.unit_duration, t_max, points)
        grid = tuple(sorted(set(float(t) for t in grid)))
        run_proto, run_cycle = (proto, cycle) if protected else (Protocol("FreeEv"), None)
        values = _evolve_values(rho0, sys, run_cycle, grid, keep=list(pair),
                                tomo_sigma=tomo_sigma, tomo_seed=seed)
        out[name] = DecayCurve("star", run_proto, "concurrence", grid,
                               tuple(values), subsystem=name)
    return out


# -- emission --------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def write_curves_csv(curves, path) -> None:
    """Plot-ready rows: state,protocol,sequence,time_s,value,kind."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["state", "protocol", "sequence", "time_s", "value", "kind"])
        for curve in curves:
            seq = curve.protocol.sequence_label
            for t, v in zip(curve.times, curve.values):
                w.writerow([curve.state, curve.protocol.kind, seq,
                            _fmt(t), _fmt(v), curve.kind])


def grid_summary(run: GridRun, report: OrderingReport,
                 config_echo: dict | None = None) -> dict:
    """JSON-ready summary: per-state percents plus the ordering report."""
    percents: dict[str, dict] = {}
    for (state_id, kind, family), pct in sorted(run.percents.items(),
                                                key=lambda kv: repr(kv[0])):
        label = kind if family is None else f"{kind}/{family}"
        percents.setdefault(state_id, {})[label] = pct
    return {
        "time_s": run.t_eval,
        "config": config_echo or {},
        "percents": percents,
        "ordering": report.to_dict(),
    }


def write_summary_json(summary: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
