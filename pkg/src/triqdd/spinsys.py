"""Three-spin system model: Hamiltonian, dephasing and pulse propagation.

Model conventions
-----------------
The register is three spin-1/2 nuclei in the weak-coupling (secular)
rotating-frame limit, so the internal Hamiltonian is diagonal in the
computational basis. With s_q = +1 for bit 0 and -1 for bit 1 of qubit q,
the energy of basis state b in Hz is

    E(b) = sum_q (nu_q / 2) s_q(b) + sum_{q<r} (J_qr / 4) s_q(b) s_r(b)

where nu_q are the resonance offsets and J_qr the scalar couplings. Free
evolution is element-wise: entry (a, b) picks up exp(-i 2 pi (E(a)-E(b)) t)
and, with dephasing on, the real decay exp(-R_ab t) with

    R_ab = sum_q gamma_q [bit_q(a) != bit_q(b)] + gamma_c (dm_ab)^2

where dm_ab is the coherence order of the element, gamma_q the independent
per-spin dephasing rates and gamma_c the rate of the correlated (common
mode) channel. Populations never decay; order-0 coherences are immune to
the correlated channel. The same map is what exponentiating the standard
dephasing generator gives, which the test suite checks against an
explicit superoperator exponential.

Pulses are transverse rf rotations. An instantaneous pulse on a target is
exp(-i (theta/2) (cos(phi) X + sin(phi) Y)); a pulse of finite duration
t_p integrates the rf term (amplitude theta / (2 pi t_p) in Hz) together
with the internal Hamiltonian when that is enabled, which is what exposes
simultaneously driven spins to their mutual coupling. Dephasing acts in
the free gaps between pulses, not inside pulse windows.

Static offset disorder (slow inhomogeneity) is modeled as Gaussian
per-spin offsets plus a correlated common-mode component, averaged over a
seeded set of shots by the experiment layer. It is off by default.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .qmat import coherence_order_matrix

N_QUBITS = 3
DIM = 8

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

# Schedule arithmetic tolerance, seconds.
TIME_ATOL = 1e-12


class ConfigError(Exception):
    """Bad or unknown configuration content."""


@dataclass(frozen=True)
class NoiseModel:
    """Markovian dephasing rates in 1/s."""

    gamma: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gamma_corr: float = 0.0

    def __post_init__(self):
        if len(self.gamma) != N_QUBITS:
            raise ValueError("gamma needs one rate per spin")
        if any(g < 0 for g in self.gamma) or self.gamma_corr < 0:
            raise ValueError("dephasing rates must be nonnegative")


@dataclass(frozen=True)
class PulseErrorModel:
    """Systematic pulse imperfections.

    flip_fraction_error scales every flip angle by (1 + eps); phase_error
    is added to every pulse phase in radians; duration_s is the default
    pulse width used when building schedules; internal_h_during_pulse
    keeps the internal Hamiltonian on inside finite pulse windows.
    """

    flip_fraction_error: float = 0.0
    phase_error: float = 0.0
    duration_s: float = 0.0
    internal_h_during_pulse: bool = False

    def __post_init__(self):
        if self.duration_s < 0:
            raise ValueError("pulse duration must be nonnegative")


@dataclass(frozen=True)
class DisorderModel:
    """Seeded static-offset disorder, Gaussian per spin plus common mode."""

    sigma: tuple[float, float, float] = (0.0, 0.0, 0.0)
    sigma_corr: float = 0.0
    shots: int = 128
    seed: int = 0

    def __post_init__(self):
        if len(self.sigma) != N_QUBITS:
            raise ValueError("sigma needs one width per spin")
        if any(s < 0 for s in self.sigma) or self.sigma_corr < 0:
            raise ValueError("disorder widths must be nonnegative")
        if self.shots < 1:
            raise ValueError("shots must be positive")

    def draw(self) -> np.ndarray:
        """Per-spin offset shifts in Hz, shape (shots, 3). Deterministic."""
        rng = np.random.default_rng(self.seed)
        z = rng.standard_normal((self.shots, N_QUBITS + 1))
        return z[:, :N_QUBITS] * np.array(self.sigma) + z[:, N_QUBITS:] * self.sigma_corr


@dataclass(frozen=True)
class SpinSystem:
    """Immutable description of the register and its imperfections.

    couplings is (J12, J13, J23) in Hz. The numeric defaults are working
    placeholders for a proton/fluorine/carbon-like molecule; every
    experiment reads its own values from config.
    """

    offsets: tuple[float, float, float] = (500.0, -300.0, 150.0)
    couplings: tuple[float, float, float] = (48.0, 161.0, -192.0)
    noise: NoiseModel = field(default_factory=lambda: NoiseModel((1.0, 1.2, 2.0), 1.5))
    pulse: PulseErrorModel = field(default_factory=PulseErrorModel)
    disorder: DisorderModel | None = None

    def __post_init__(self):
        if len(self.offsets) != N_QUBITS or len(self.couplings) != N_QUBITS:
            raise ValueError("offsets and couplings need three entries each")

    def coupling(self, q: int, r: int) -> float:
        """J between qubits q and r (1-based, order independent)."""
        pair = tuple(sorted((q, r)))
        try:
            return self.couplings[{(1, 2): 0, (1, 3): 1, (2, 3): 2}[pair]]
        except KeyError:
            raise ValueError(f"no coupling for qubit pair {pair}") from None

    def without_noise(self) -> "SpinSystem":
        return replace(self, noise=NoiseModel(), disorder=None)


def bit(b: int, q: int) -> int:
    """Bit of basis index b for 1-based qubit q, MSB first."""
    return (b >> (N_QUBITS - q)) & 1


def energies(sys: SpinSystem) -> np.ndarray:
    """E(b) in Hz for all eight basis states."""
    return _tables(sys.offsets, sys.couplings, sys.noise)[0]


@lru_cache(maxsize=None)
def _tables(offsets, couplings, noise):
    s = np.array([[1 - 2 * bit(b, q) for q in (1, 2, 3)] for b in range(DIM)], dtype=float)
    nu = np.array(offsets)
    j12, j13, j23 = couplings
    energy = (s @ nu) / 2.0 + (
        j12 * s[:, 0] * s[:, 1] + j13 * s[:, 0] * s[:, 2] + j23 * s[:, 1] * s[:, 2]
    ) / 4.0
    phase = energy[:, None] - energy[None, :]
    differs = s[:, None, :] != s[None, :, :]
    decay = differs @ np.array(noise.gamma) + noise.gamma_corr * coherence_order_matrix(N_QUBITS) ** 2
    # Per-spin offset sensitivity of each element, (s_q(a) - s_q(b)) / 2.
    sens = (s[:, None, :] - s[None, :, :]) / 2.0
    return energy, phase, decay, sens


def disorder_phase_rates(deltas: tuple[float, float, float], corr: float = 0.0) -> np.ndarray:
    """Element-wise frequency shift in Hz for static per-spin offset shifts."""
    sens = _tables((0.0,) * 3, (0.0,) * 3, NoiseModel())[3]
    shift = sens @ np.asarray(deltas, dtype=float)
    if corr:
        shift = shift + corr * coherence_order_matrix(N_QUBITS)
    return shift


def free_factors(sys: SpinSystem, t: float, extra_hz: np.ndarray | None = None) -> np.ndarray:
    """Element-wise factors of free evolution for time t.

    extra_hz, if given, is an (8, 8) matrix of additional element
    frequencies (static disorder shifts) folded into the phase.
    """
    if t < 0:
        raise ValueError(f"negative evolution time {t}")
    _, phase, decay, _ = _tables(sys.offsets, sys.couplings, sys.noise)
    if extra_hz is not None:
        phase = phase + extra_hz
    return np.exp((-2j * np.pi * phase - decay) * t)


def free_propagate(rho: np.ndarray, sys: SpinSystem, t: float,
                   extra_hz: np.ndarray | None = None) -> np.ndarray:
    """Evolve rho freely for time t under Hamiltonian phases and dephasing."""
    return np.asarray(rho, dtype=complex) * free_factors(sys, t, extra_hz)


@dataclass(frozen=True)
class PulseEvent:
    """One rf pulse: start time, width, targets and per-target phases.

    targets are 1-based qubit labels; phases in radians set the rotation
    axis per target; flip is the nominal rotation angle in radians shared
    by all targets. Zero duration means an instantaneous rotation.
    """

    start: float
    duration: float
    targets: tuple[int, ...]
    phases: tuple[float, ...]
    flip: float

    def __post_init__(self):
        if self.start < -TIME_ATOL:
            raise ValueError(f"pulse start {self.start} is negative")
        if self.duration < 0:
            raise ValueError("pulse duration must be nonnegative")
        if not self.targets:
            raise ValueError("pulse needs at least one target")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"duplicate target in {self.targets}")
        for q in self.targets:
            if not 1 <= q <= N_QUBITS:
                raise ValueError(f"target {q} out of range 1..{N_QUBITS}")
        if len(self.phases) != len(self.targets):
            raise ValueError("need one phase per target")

    @property
    def end(self) -> float:
        return self.start + self.duration


def pulse(start: float, targets, flip: float, phase, duration: float = 0.0) -> PulseEvent:
    """Convenience constructor; a scalar phase is broadcast to all targets."""
    targets = tuple(targets) if np.iterable(targets) else (int(targets),)
    if np.iterable(phase):
        phases = tuple(float(p) for p in phase)
    else:
        phases = (float(phase),) * len(targets)
    return PulseEvent(float(start), float(duration), targets, phases, float(flip))


def embed(op: np.ndarray, q: int) -> np.ndarray:
    """Single-qubit operator placed on 1-based qubit q of the register."""
    ops = [IDENTITY_2] * N_QUBITS
    ops[q - 1] = op
    out = ops[0]
    for o in ops[1:]:
        out = np.kron(out, o)
    return out


def rotation2(theta: float, phi: float) -> np.ndarray:
    """2x2 rotation about the transverse axis at phase phi."""
    axis = np.cos(phi) * SIGMA_X + np.sin(phi) * SIGMA_Y
    return np.cos(theta / 2) * IDENTITY_2 - 1j * np.sin(theta / 2) * axis


def pulse_propagator(ev: PulseEvent, sys: SpinSystem, *, ideal: bool = False) -> np.ndarray:
    """Unitary of one pulse event.

    ideal=True ignores the system's pulse error model and treats the
    pulse as an instantaneous error-free rotation.
    """
    if ideal:
        flips = [ev.flip] * len(ev.targets)
        phases = list(ev.phases)
        u = np.eye(DIM, dtype=complex)
        for q, th, ph in zip(ev.targets, flips, phases):
            u = embed(rotation2(th, ph), q) @ u
        return u
    err = sys.pulse
    flip = ev.flip * (1.0 + err.flip_fraction_error)
    phases = [p + err.phase_error for p in ev.phases]
    if ev.duration == 0.0:
        u = np.eye(DIM, dtype=complex)
        for q, ph in zip(ev.targets, phases):
            u = embed(rotation2(flip, ph), q) @ u
        return u
    if ev.flip == 0.0:
        raise ValueError("finite-duration pulse with zero flip angle has no defined rf amplitude")
    omega = flip / ev.duration  # rad/s
    h = np.zeros((DIM, DIM), dtype=complex)
    for q, ph in zip(ev.targets, phases):
        h += (omega / 2.0) * embed(np.cos(ph) * SIGMA_X + np.sin(ph) * SIGMA_Y, q)
    if err.internal_h_during_pulse:
        h = h + 2.0 * np.pi * np.diag(energies(sys)).astype(complex)
    return expm(-1j * h * ev.duration)


def apply_unitary(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u @ np.asarray(rho, dtype=complex) @ u.conj().T


def _validate_schedule(events: tuple[PulseEvent, ...], duration: float) -> None:
    for ev in events:
        if ev.end > duration + TIME_ATOL:
            raise ValueError(
                f"event at t={ev.start} runs to {ev.end}, past the sequence duration {duration}"
            )
    for a, b in zip(events, events[1:]):
        if b.start < a.end - TIME_ATOL:
            if set(a.targets) & set(b.targets):
                raise ValueError(
                    f"overlapping pulses on qubits {set(a.targets) & set(b.targets)} "
                    f"at t={a.start} and t={b.start}"
                )
            if a.duration > 0 and b.duration > 0:
                raise ValueError(
                    "time-overlapping finite pulses on disjoint qubits are not supported"
                )


def apply_sequence(rho: np.ndarray, sys: SpinSystem, events, duration: float,
                   *, ideal_pulses: bool = False,
                   extra_hz: np.ndarray | None = None) -> np.ndarray:
    """Run a timed pulse program: free evolution in the gaps, pulses between.

    Events are sorted by start time; same-instant zero-width events keep
    list order. Dephasing and Hamiltonian phases act in the gaps; pulses
    act through pulse_propagator.
    """
    if duration < 0:
        raise ValueError("sequence duration must be nonnegative")
    events = tuple(sorted(events, key=lambda e: e.start))
    _validate_schedule(events, duration)
    out = np.asarray(rho, dtype=complex).copy()
    cursor = 0.0
    for ev in events:
        gap = ev.start - cursor
        if gap > TIME_ATOL:
            out = free_propagate(out, sys, gap, extra_hz)
        u = pulse_propagator(ev, sys, ideal=ideal_pulses)
        out = apply_unitary(out, u)
        cursor = max(cursor, ev.end)
    if duration - cursor > TIME_ATOL:
        out = free_propagate(out, sys, duration - cursor, extra_hz)
    return out


# -- configuration ---------------------------------------------------------

_SYSTEM_SCHEMA = {
    "system": {"offsets_hz", "couplings_hz"},
    "noise": {"gamma_s", "gamma_corr_s"},
    "pulse": {"flip_fraction_error", "phase_error_rad", "duration_s", "internal_h_during_pulse"},
    "disorder": {"enabled", "sigma_hz", "sigma_corr_hz", "shots", "seed"},
}


def read_ini(text: str) -> dict[str, dict[str, str]]:
    """Parse key = value sections from plain text, preserving case."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    return {name: dict(cp[name]) for name in cp.sections()}


def check_known_keys(cfg: dict[str, dict[str, str]], schema: dict[str, set[str]]) -> None:
    for section, entries in cfg.items():
        if section not in schema:
            raise ConfigError(f"unknown config section [{section}]")
        for key in entries:
            if key not in schema[section]:
                raise ConfigError(f"unknown key '{key}' in section [{section}]")


def _floats(raw: str, count: int, where: str) -> tuple[float, ...]:
    parts = [p.strip() for p in raw.replace(",", " ").split()]
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"{where}: expected numbers, got '{raw}'") from exc
    if len(vals) != count:
        raise ConfigError(f"{where}: expected {count} values, got {len(vals)}")
    return vals


def _flag(raw: str, where: str) -> bool:
    val = raw.strip().lower()
    if val in ("on", "true", "yes", "1"):
        return True
    if val in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"{where}: expected on/off, got '{raw}'")


def system_from_mapping(cfg: dict[str, dict[str, str]], *, base: SpinSystem | None = None) -> SpinSystem:
    """Build a SpinSystem from parsed config sections, starting from base."""
    sys = base if base is not None else SpinSystem()
    sec = cfg.get("system", {})
    if "offsets_hz" in sec:
        sys = replace(sys, offsets=_floats(sec["offsets_hz"], 3, "[system] offsets_hz"))
    if "couplings_hz" in sec:
        sys = replace(sys, couplings=_floats(sec["couplings_hz"], 3, "[system] couplings_hz"))
    sec = cfg.get("noise", {})
    noise = sys.noise
    if "gamma_s" in sec:
        noise = replace(noise, gamma=_floats(sec["gamma_s"], 3, "[noise] gamma_s"))
    if "gamma_corr_s" in sec:
        noise = replace(noise, gamma_corr=_floats(sec["gamma_corr_s"], 1, "[noise] gamma_corr_s")[0])
    sys = replace(sys, noise=noise)
    sec = cfg.get("pulse", {})
    perr = sys.pulse
    if "flip_fraction_error" in sec:
        perr = replace(perr, flip_fraction_error=_floats(sec["flip_fraction_error"], 1, "[pulse] flip_fraction_error")[0])
    if "phase_error_rad" in sec:
        perr = replace(perr, phase_error=_floats(sec["phase_error_rad"], 1, "[pulse] phase_error_rad")[0])
    if "duration_s" in sec:
        perr = replace(perr, duration_s=_floats(sec["duration_s"], 1, "[pulse] duration_s")[0])
    if "internal_h_during_pulse" in sec:
        perr = replace(perr, internal_h_during_pulse=_flag(sec["internal_h_during_pulse"], "[pulse] internal_h_during_pulse"))
    sys = replace(sys, pulse=perr)
    sec = cfg.get("disorder", {})
    if sec:
        enabled = _flag(sec.get("enabled", "off"), "[disorder] enabled")
        if enabled:
            dis = DisorderModel(
                sigma=_floats(sec.get("sigma_hz", "0 0 0"), 3, "[disorder] sigma_hz"),
                sigma_corr=_floats(sec.get("sigma_corr_hz", "0"), 1, "[disorder] sigma_corr_hz")[0],
                shots=int(_floats(sec.get("shots", "128"), 1, "[disorder] shots")[0]),
                seed=int(_floats(sec.get("seed", "0"), 1, "[disorder] seed")[0]),
            )
            sys = replace(sys, disorder=dis)
        else:
            sys = replace(sys, disorder=None)
    return sys


def system_from_text(text: str) -> SpinSystem:
    """Build a SpinSystem from config text, rejecting unknown keys."""
    cfg = read_ini(text)
    check_known_keys(cfg, _SYSTEM_SCHEMA)
    return system_from_mapping(cfg)


def load_system_config(path) -> SpinSystem:
    """Read a SpinSystem from a plain-text key = value config file."""
    with open(path, "r", encoding="utf-8") as fh:
        return system_from_text(fh.read())
