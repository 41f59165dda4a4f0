"""Device behaviour: energy profiles, threshold diode model, diode-logic circuits and truth tables."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .builder import CONTACT_FERMI_EV, CompiledDesign
from .huckel import (
    FrontierReport,
    HuckelParameters,
    OrbitalSet,
    build_matrix,
    frontier,
    occupy,
    solve_eigensystem,
)
from .molgraph import PiSystem, extract_pi_system


class DeviceError(Exception):
    pass


class NonConvergence(DeviceError):
    pass


class FloatingNode(DeviceError):
    pass


class CircuitError(DeviceError, ValueError):
    pass


class AmbiguousLogicLevel(DeviceError):
    def __init__(self, message: str, table: "TruthTable"):
        super().__init__(message)
        self.table = table


@dataclass(frozen=True)
class ModelConfig:
    base_threshold: float = 0.3  # volts
    on_conductance: float = 1e-6  # siemens; math.inf gives an ideal fixed-drop diode
    bridge_barrier_ev: float = 1.0
    fermi_ev: Mapping[str, float] = field(default_factory=lambda: dict(CONTACT_FERMI_EV))
    wire_ohms: float = 1.0

    def __post_init__(self):
        if self.base_threshold < 0:
            raise ValueError("base threshold must be non-negative")
        if not self.on_conductance > 0:
            raise ValueError("on conductance must be positive")
        if not self.wire_ohms > 0:
            raise ValueError("wire resistance must be positive")


@dataclass(frozen=True)
class LogicLevels:
    v_low: float = 0.0
    v_high: float = 5.0
    v_low_max: float = 1.0
    v_high_min: float = 3.5

    def __post_init__(self):
        if not self.v_low <= self.v_low_max < self.v_high_min <= self.v_high:
            raise ValueError("logic levels must satisfy v_low <= v_low_max < v_high_min <= v_high")

    def classify(self, volts: float) -> int | None:
        if volts <= self.v_low_max:
            return 0
        if volts >= self.v_high_min:
            return 1
        return None


# ---------------------------------------------------------------------------
# energy profile


@dataclass(frozen=True)
class SideLevels:
    pi: PiSystem
    orbitals: OrbitalSet
    frontier: FrontierReport


def solve_side(pi: PiSystem, params: HuckelParameters) -> SideLevels:
    orbitals = solve_eigensystem(build_matrix(pi, params), params)
    occ = occupy(orbitals, pi.electron_count, params)
    return SideLevels(pi, orbitals, frontier(orbitals, occ, params))


@dataclass(frozen=True)
class EnergyProfile:
    """Frontier levels of the two conjugated halves, in beta units."""

    donor: SideLevels
    acceptor: SideLevels
    bridge_barrier_ev: float
    contact_fermi_ev: Mapping[str, float]
    ev_per_unit: float  # eV per natural energy unit

    @property
    def donor_levels(self) -> FrontierReport:
        return self.donor.frontier

    @property
    def acceptor_levels(self) -> FrontierReport:
        return self.acceptor.frontier

    @property
    def delta_e_lumo(self) -> float:
        return self.donor.frontier.e_lumo - self.acceptor.frontier.e_lumo

    @property
    def delta_e_lumo_ev(self) -> float:
        return self.delta_e_lumo * self.ev_per_unit


def profile_from_systems(donor_pi: PiSystem, acceptor_pi: PiSystem, params: HuckelParameters | None = None,
                         config: ModelConfig | None = None, contacts: Mapping[str, float] | None = None
                         ) -> EnergyProfile:
    params = params or HuckelParameters()
    config = config or ModelConfig()
    return EnergyProfile(solve_side(donor_pi, params), solve_side(acceptor_pi, params),
                         config.bridge_barrier_ev, dict(contacts or {}), params.beta_ev / params.beta)


def energy_profile(design: CompiledDesign, params: HuckelParameters | None = None,
                   config: ModelConfig | None = None) -> EnergyProfile:
    """Solve the donor and acceptor pi systems of a compiled diode independently."""
    if design.kind != "diode":
        raise DeviceError("energy profiles are defined for diodes; analyse the gate's diodes individually")
    config = config or ModelConfig()
    donor = extract_pi_system(design.graph, "donor")
    acceptor = extract_pi_system(design.graph, "acceptor")
    contacts = {c.side: config.fermi_ev.get(c.metal, c.fermi_ev) for c in design.contacts}
    return profile_from_systems(donor, acceptor, params, config, contacts)


@dataclass(frozen=True)
class DiodeModel:
    forward_threshold: float
    reverse_threshold: float
    on_conductance: float

    def __post_init__(self):
        if self.forward_threshold < 0 or self.reverse_threshold < 0:
            raise ValueError("thresholds must be non-negative")

    @property
    def rectifying(self) -> bool:
        return self.forward_threshold < self.reverse_threshold

    @property
    def rectification_ratio(self) -> float:
        if self.forward_threshold == 0:
            return math.inf if self.reverse_threshold > 0 else 1.0
        return self.reverse_threshold / self.forward_threshold

    def current(self, bias: float) -> float:
        """Closed-form I(V) of the threshold model with finite conductance."""
        g = self.on_conductance
        if bias > self.forward_threshold:
            return g * (bias - self.forward_threshold)
        if -bias > self.reverse_threshold:
            return -g * (-bias - self.reverse_threshold)
        return 0.0


def diode_model(profile: EnergyProfile | float, config: ModelConfig | None = None) -> DiodeModel:
    """Threshold model: forward = base, reverse = base + |delta E_lumo| (1 eV per volt).

    ``profile`` may also be a bare LUMO offset in eV.
    """
    config = config or ModelConfig()
    delta_ev = profile.delta_e_lumo_ev if isinstance(profile, EnergyProfile) else float(profile)
    base = config.base_threshold
    return DiodeModel(base, base + abs(delta_ev), config.on_conductance)


# ---------------------------------------------------------------------------
# circuits

OFF, FWD, REV = "off", "forward", "reverse"


@dataclass(frozen=True)
class Diode:
    name: str
    anode: str
    cathode: str
    model: DiodeModel
    reverse_conduction: bool = False


@dataclass(frozen=True)
class Resistor:
    name: str
    a: str
    b: str
    ohms: float


@dataclass(frozen=True)
class Circuit:
    nodes: tuple[str, ...]
    diodes: tuple[Diode, ...]
    resistors: tuple[Resistor, ...]
    inputs: tuple[str, ...]
    supply: str = "supply"
    ground: str = "ground"
    supply_voltage: float = 5.0
    kind: str = "circuit"
    output: str | None = None

    def __post_init__(self):
        names = set(self.nodes)
        if len(names) != len(self.nodes):
            raise CircuitError("duplicate node name")
        for n in (self.supply, self.ground, *self.inputs):
            if n not in names:
                raise CircuitError(f"node {n!r} is not declared")
        if self.supply == self.ground:
            raise CircuitError("supply and ground must be distinct")
        for d in self.diodes:
            if d.anode not in names or d.cathode not in names or d.anode == d.cathode:
                raise CircuitError(f"diode {d.name} must join two distinct declared nodes")
        for r in self.resistors:
            if r.a not in names or r.b not in names or r.a == r.b:
                raise CircuitError(f"resistor {r.name} must join two distinct declared nodes")
            if not r.ohms > 0:
                raise CircuitError(f"resistor {r.name} must have positive resistance")
        if self.kind in ("AND", "OR") and "Q" not in names:
            raise CircuitError("gate circuits need a common node Q")


@dataclass(frozen=True)
class CircuitSolution:
    voltages: Mapping[str, float]
    diode_states: Mapping[str, str]
    diode_currents: Mapping[str, float]  # anode to cathode
    resistor_currents: Mapping[str, float]  # a to b
    kirchhoff_residual: float  # largest net current into a free node
    iterations: int


def _edges(c: Circuit):
    for d in c.diodes:
        yield d.anode, d.cathode
    for r in c.resistors:
        yield r.a, r.b


def _check_floating(c: Circuit, fixed: set[str]) -> None:
    adj: dict[str, set[str]] = {n: set() for n in c.nodes}
    for a, b in _edges(c):
        adj[a].add(b)
        adj[b].add(a)
    seen = set(fixed)
    stack = list(fixed)
    while stack:
        cur = stack.pop()
        for j in adj[cur]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    loose = [n for n in c.nodes if n not in seen]
    if loose:
        raise FloatingNode(f"node {loose[0]!r} has no path to a driven node")


def _solve_states(c: Circuit, fixed: Mapping[str, float], states: Sequence[str]):
    """Modified nodal analysis with one branch-current unknown per resistor and conducting diode.

    Branch form keeps a 1 ohm wire next to a 1 Gohm load from being summed
    into one conductance, which would round the load away.
    """
    free = [n for n in c.nodes if n not in fixed]
    col = {n: i for i, n in enumerate(free)}
    active = [i for i, s in enumerate(states) if s != OFF]
    base = len(free) + len(c.resistors)
    size = base + len(active)
    a = np.zeros((size, size))
    rhs = np.zeros(size)

    def stamp_voltage(row, node, coef):
        if node in col:
            a[row, col[node]] += coef
        else:
            rhs[row] -= coef * fixed[node]

    def stamp_branch(row, src, dst):
        # branch current flows out of src and into dst
        if src in col:
            a[col[src], row] += 1.0
        if dst in col:
            a[col[dst], row] -= 1.0
        stamp_voltage(row, src, 1.0)
        stamp_voltage(row, dst, -1.0)

    for k, r in enumerate(c.resistors):
        row = len(free) + k
        stamp_branch(row, r.a, r.b)
        a[row, row] -= r.ohms
    for k, i in enumerate(active):
        d = c.diodes[i]
        row = base + k
        src, dst, drop = (d.anode, d.cathode, d.model.forward_threshold) if states[i] == FWD else \
            (d.cathode, d.anode, d.model.reverse_threshold)
        stamp_branch(row, src, dst)
        if math.isfinite(d.model.on_conductance):
            a[row, row] -= 1.0 / d.model.on_conductance
        rhs[row] += drop
    try:
        x = np.linalg.solve(a, rhs) if size else np.zeros(0)
    except np.linalg.LinAlgError:
        raise FloatingNode("a node voltage is undetermined for the current diode states") from None
    volts = dict(fixed)
    for n, i in col.items():
        volts[n] = float(x[i])
    currents = {}
    for i, d in enumerate(c.diodes):
        currents[d.name] = 0.0
    for k, i in enumerate(active):
        j = float(x[base + k])
        currents[c.diodes[i].name] = j if states[i] == FWD else -j
    return volts, currents


def simulate_circuit(c: Circuit, input_levels: Mapping[str, float], v_tol: float = 1e-9,
                     i_tol: float = 1e-18) -> CircuitSolution:
    """Nodal solution with ideal-threshold diodes.

    Starting from every diode off, the most strongly violated diode is
    toggled one at a time until the assignment is self-consistent: off
    diodes see less than their threshold, conducting diodes carry
    non-negative current. A repeated assignment means the search cycles.
    """
    missing = [n for n in c.inputs if n not in input_levels]
    if missing:
        raise CircuitError(f"no level given for input {missing[0]!r}")
    fixed = {c.ground: 0.0, c.supply: c.supply_voltage}
    fixed.update({n: float(input_levels[n]) for n in c.inputs})
    _check_floating(c, set(fixed))
    states = [OFF] * len(c.diodes)
    seen = set()
    iterations = 0
    while True:
        key = tuple(states)
        if key in seen:
            raise NonConvergence("diode state search revisited an assignment; unsupported topology")
        seen.add(key)
        iterations += 1
        volts, currents = _solve_states(c, fixed, states)
        worst, worst_i, worst_state = 0.0, None, None
        for i, d in enumerate(c.diodes):
            v = volts[d.anode] - volts[d.cathode]
            j = currents[d.name]
            if states[i] == OFF:
                over = v - d.model.forward_threshold
                if over > v_tol and over > worst:
                    worst, worst_i, worst_state = over, i, FWD
                under = -v - d.model.reverse_threshold
                if d.reverse_conduction and under > v_tol and under > worst:
                    worst, worst_i, worst_state = under, i, REV
            else:
                flow = j if states[i] == FWD else -j
                if flow < -i_tol:
                    score = -flow * 1e12  # compare currents against volts on a common footing
                    if score > worst:
                        worst, worst_i, worst_state = score, i, OFF
        if worst_i is None:
            break
        states[worst_i] = worst_state
    res_currents = {r.name: (volts[r.a] - volts[r.b]) / r.ohms for r in c.resistors}
    net = {n: 0.0 for n in c.nodes if n not in fixed}
    for d in c.diodes:
        j = currents[d.name]
        if d.anode in net:
            net[d.anode] -= j
        if d.cathode in net:
            net[d.cathode] += j
    for r in c.resistors:
        j = res_currents[r.name]
        if r.a in net:
            net[r.a] -= j
        if r.b in net:
            net[r.b] += j
    residual = max((abs(v) for v in net.values()), default=0.0)
    return CircuitSolution(volts, dict(zip((d.name for d in c.diodes), states)), currents, res_currents,
                           residual, iterations)


def gate_circuit(kind: str, model_a: DiodeModel, model_b: DiodeModel, load_resistance: float,
                 supply_voltage: float, wire_ohms: float = 1.0) -> Circuit:
    """Two-input diode-resistor gate.

    AND: diodes point from Q to the inputs and the load pulls Q up to the
    supply. OR: diodes point from the inputs to Q and the load pulls Q
    down to ground. The output C hangs off Q through an unloaded wire.
    """
    kind = kind.upper()
    if kind == "AND":
        diodes = (Diode("DA", "Q", "A", model_a), Diode("DB", "Q", "B", model_b))
        load = Resistor("R_load", "Q", "supply", load_resistance)
    elif kind == "OR":
        diodes = (Diode("DA", "A", "Q", model_a), Diode("DB", "B", "Q", model_b))
        load = Resistor("R_load", "Q", "ground", load_resistance)
    else:
        raise CircuitError(f"unsupported gate kind {kind!r}")
    wire = Resistor("R_wire", "Q", "C", wire_ohms)
    return Circuit(("A", "B", "Q", "C", "supply", "ground"), diodes, (load, wire), ("A", "B"),
                   supply_voltage=supply_voltage, kind=kind, output="C")


@dataclass(frozen=True)
class TruthRow:
    inputs: tuple[int, ...]
    input_volts: tuple[float, ...]
    voltages: Mapping[str, float]
    output_volts: float
    logic: int | None
    diode_states: Mapping[str, str]
    kirchhoff_residual: float
    reverse_stress: Mapping[str, bool]  # reverse bias beyond the model's reverse threshold


@dataclass(frozen=True)
class TruthTable:
    kind: str
    rows: tuple[TruthRow, ...]
    levels: LogicLevels

    @property
    def outputs(self) -> tuple[int | None, ...]:
        return tuple(r.logic for r in self.rows)

    @property
    def ambiguous_rows(self) -> tuple[TruthRow, ...]:
        return tuple(r for r in self.rows if r.logic is None)

    def matches(self, fn) -> bool:
        return all(r.logic == int(fn(*r.inputs)) for r in self.rows)


BOOLEAN = {"AND": lambda a, b: a and b, "OR": lambda a, b: a or b}


def truth_table(c: Circuit, levels: LogicLevels | None = None, strict: bool = True) -> TruthTable:
    """Simulate every input combination (first input most significant) and threshold V(output)."""
    levels = levels or LogicLevels()
    if c.output is None:
        raise CircuitError("circuit has no output node")
    rows = []
    for bits in itertools.product((0, 1), repeat=len(c.inputs)):
        volts_in = tuple(levels.v_high if b else levels.v_low for b in bits)
        sol = simulate_circuit(c, dict(zip(c.inputs, volts_in)))
        out = sol.voltages[c.output]
        stress = {}
        for d in c.diodes:
            stress[d.name] = sol.voltages[d.cathode] - sol.voltages[d.anode] > d.model.reverse_threshold
        rows.append(TruthRow(bits, volts_in, dict(sol.voltages), out, levels.classify(out),
                             sol.diode_states, sol.kirchhoff_residual, stress))
    table = TruthTable(c.kind, tuple(rows), levels)
    bad = table.ambiguous_rows
    if strict and bad:
        r = bad[0]
        raise AmbiguousLogicLevel(
            f"output {r.output_volts:.4g} V for inputs {r.inputs} lies between "
            f"{levels.v_low_max:g} V and {levels.v_high_min:g} V", table)
    return table


def compile_gate_circuit(design: CompiledDesign, params: HuckelParameters | None = None,
                         config: ModelConfig | None = None) -> Circuit:
    if design.kind not in ("AND", "OR"):
        raise DeviceError("design is not a gate")
    config = config or ModelConfig()
    models = [diode_model(energy_profile(d, params, config), config) for d in design.diodes]
    spec = design.spec
    return gate_circuit(design.kind, models[0], models[1], spec.load_resistance, spec.supply_voltage,
                        config.wire_ohms)


def iv_curve(model: DiodeModel, biases: Sequence[float]) -> list[tuple[float, float]]:
    """Current through one diode (anode at the bias source, cathode grounded) per bias value.

    Each point is a full circuit solve with reverse conduction enabled.
    """
    if not math.isfinite(model.on_conductance):
        raise DeviceError("an I-V sweep needs a finite on-conductance")
    out = []
    for v in biases:
        c = Circuit(("bias", "ground"), (Diode("D", "bias", "ground", model, reverse_conduction=True),), (),
                    ("bias",), supply="bias", ground="ground", supply_voltage=float(v))
        sol = simulate_circuit(c, {"bias": float(v)})
        out.append((float(v), sol.diode_currents["D"]))
    return out


def format_iv(points) -> str:
    lines = ["# bias_volts current_amps"]
    lines += [f"{v:.6f} {i:.9e}" for v, i in points]
    return "\n".join(lines) + "\n"
