import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import charpoly_roots

from polydiode.builder import DiodeSpec, GateSpec, build_diode, build_gate, enumerate_designs, resolver
from polydiode.device import (
    BOOLEAN,
    AmbiguousLogicLevel,
    Circuit,
    CircuitError,
    DeviceError,
    Diode,
    DiodeModel,
    FloatingNode,
    LogicLevels,
    ModelConfig,
    Resistor,
    compile_gate_circuit,
    diode_model,
    energy_profile,
    format_iv,
    gate_circuit,
    iv_curve,
    profile_from_systems,
    simulate_circuit,
    truth_table,
)
from polydiode.huckel import HuckelParameters, SiteParameter, build_matrix
from polydiode.molgraph import NoPiSystem, extract_pi_system, parse_molecule

IDEAL = DiodeModel(0.7, 5.0, math.inf)


def ideal_gate(kind, vt=0.7):
    m = DiodeModel(vt, 10.0, math.inf)
    return gate_circuit(kind, m, m, 1e9, 5.0)


# --- energy profile ------------------------------------------------------------


def test_default_design_has_positive_lumo_offset():
    p = energy_profile(build_diode(DiodeSpec("NH2", "NO2", "CH2")))
    assert p.delta_e_lumo > 0
    assert p.delta_e_lumo == p.donor_levels.e_lumo - p.acceptor_levels.e_lumo
    assert p.delta_e_lumo_ev == pytest.approx(2.4 * p.delta_e_lumo)
    assert p.contact_fermi_ev == {"donor": 5.1, "acceptor": 5.1}
    assert p.bridge_barrier_ev == 1.0


@pytest.mark.parametrize("group", ["CH3", "NH2", "NO2", "CN"])
def test_symmetric_design_has_zero_offset(group):
    d = build_diode(DiodeSpec(group, group, "CH2"), check_roles=False)
    assert energy_profile(d).delta_e_lumo == 0.0


def test_pseudo_site_ring_against_bare_ring_matches_charpoly_oracle():
    params = HuckelParameters(table={"NH2": SiteParameter(1.5, 0.8, 0.0)})
    donor = extract_pi_system(parse_molecule("[X:NH2]c6", resolver()))
    acceptor = extract_pi_system(parse_molecule("c6"))
    p = profile_from_systems(donor, acceptor, params)
    e7 = charpoly_roots(build_matrix(donor, params).entries)
    e6 = charpoly_roots(build_matrix(acceptor, params).entries)
    # 8 pi electrons fill four of seven levels, 6 fill three of six
    assert p.delta_e_lumo == pytest.approx(e7[4] - e6[3], abs=1e-9)
    assert e6[3] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("spec", list(enumerate_designs({})), ids=lambda s: f"{s.donor_group}-{s.bridge}-{s.acceptor_group}")
def test_swap_antisymmetry(spec):
    fwd = energy_profile(build_diode(spec)).delta_e_lumo
    rev = energy_profile(build_diode(spec.swapped(), check_roles=False)).delta_e_lumo
    assert fwd > 0
    assert rev == -fwd


def test_profile_rejects_gates_and_missing_sides():
    gate = build_gate(GateSpec("AND", DiodeSpec("NH2", "NO2", "CH2"), DiodeSpec("NH2", "NO2", "CH2")))
    with pytest.raises(DeviceError):
        energy_profile(gate)
    d = build_diode(DiodeSpec("NH2", "NO2", "CH2"))
    broken = type(d)(d.kind, d.graph.with_tags(["bridge"] * len(d.graph)), d.sections, d.spec, d.notation,
                     d.contacts, d.node_q, d.output_c, d.inputs, d.diodes)
    with pytest.raises(NoPiSystem):
        energy_profile(broken)


# --- diode model -----------------------------------------------------------------


def test_threshold_rule():
    m = diode_model(0.4, ModelConfig(base_threshold=0.3))
    assert m.forward_threshold == 0.3
    assert m.reverse_threshold == pytest.approx(0.7)
    assert m.rectifying
    assert m.rectification_ratio == pytest.approx(7 / 3)


def test_zero_offset_does_not_rectify():
    m = diode_model(0.0)
    assert m.forward_threshold == m.reverse_threshold
    assert m.rectification_ratio == 1.0
    assert not m.rectifying


def test_default_diode_numbers():
    m = diode_model(energy_profile(build_diode(DiodeSpec("NH2", "NO2", "CH2"))))
    assert m.reverse_threshold == pytest.approx(4.082, abs=1e-3)
    assert m.rectification_ratio == pytest.approx(13.606, abs=1e-3)


def test_iv_sweep_cross_checks_thresholds():
    m = diode_model(0.4, ModelConfig(base_threshold=0.3, on_conductance=1e-6))
    pts = dict(iv_curve(m, [-1.0, -0.7, -0.5, 0.0, 0.3, 0.5, 1.0]))
    assert pts[0.5] == pytest.approx(0.2e-6)
    assert pts[0.3] == 0.0
    assert pts[-0.5] == 0.0 and pts[-0.7] == 0.0
    assert pts[-1.0] == pytest.approx(-0.3e-6)
    for v, i in pts.items():
        assert i == pytest.approx(m.current(v), abs=1e-18)


def test_iv_needs_finite_conductance():
    with pytest.raises(DeviceError):
        iv_curve(IDEAL, [1.0])


def test_iv_text_format():
    text = format_iv([(0.0, 0.0), (1.0, 7e-7)])
    assert text.splitlines() == ["# bias_volts current_amps", "0.000000 0.000000000e+00", "1.000000 7.000000000e-07"]


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.05, 4.0))
def test_one_directional_conduction(base, delta):
    m = diode_model(delta, ModelConfig(base_threshold=base))
    grid = np.linspace(m.forward_threshold, m.reverse_threshold, 7)[1:-1]
    for v, i in iv_curve(m, grid):
        assert i > 0
    for v, i in iv_curve(m, -grid):
        assert i == 0.0


@settings(max_examples=100, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_ratio_is_monotone_in_offset(a, b):
    lo, hi = sorted((abs(a), abs(b)))
    assert diode_model(lo).rectification_ratio <= diode_model(hi).rectification_ratio


def test_config_rejects_bad_values():
    with pytest.raises(ValueError):
        ModelConfig(on_conductance=0)
    with pytest.raises(ValueError):
        DiodeModel(-1, 0, 1)
    with pytest.raises(ValueError):
        LogicLevels(v_low_max=4, v_high_min=3)


# --- circuits ---------------------------------------------------------------------


@pytest.mark.parametrize("a,b,vc", [(0, 0, 0.7), (0, 5, 0.7), (5, 0, 0.7), (5, 5, 5.0)])
def test_and_gate_hand_analysis(a, b, vc):
    sol = simulate_circuit(ideal_gate("AND"), {"A": a, "B": b})
    assert sol.voltages["C"] == pytest.approx(vc, abs=1e-9)
    assert sol.kirchhoff_residual < 1e-12


@pytest.mark.parametrize("a,b,vc", [(0, 0, 0.0), (0, 5, 4.3), (5, 0, 4.3), (5, 5, 4.3)])
def test_or_gate_hand_analysis(a, b, vc):
    sol = simulate_circuit(ideal_gate("OR"), {"A": a, "B": b})
    assert sol.voltages["C"] == pytest.approx(vc, abs=1e-9)


def test_and_gate_conducting_diode():
    sol = simulate_circuit(ideal_gate("AND"), {"A": 0, "B": 5})
    assert sol.diode_states == {"DA": "forward", "DB": "off"}
    assert sol.diode_currents["DB"] == 0.0
    assert sol.diode_currents["DA"] == pytest.approx(4.3e-9)


def test_truth_tables():
    assert truth_table(ideal_gate("AND")).outputs == (0, 0, 0, 1)
    assert truth_table(ideal_gate("OR")).outputs == (0, 1, 1, 1)
    assert [r.inputs for r in truth_table(ideal_gate("OR")).rows] == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_ambiguous_level_is_reported_with_the_table():
    levels = LogicLevels(0.0, 5.0, 1.0, 3.0)
    with pytest.raises(AmbiguousLogicLevel) as info:
        truth_table(ideal_gate("AND", vt=2.6), levels)
    rows = {r.inputs: r for r in info.value.table.rows}
    assert rows[(0, 1)].output_volts == pytest.approx(2.6, abs=1e-9)
    assert rows[(0, 1)].logic is None
    lax = truth_table(ideal_gate("AND", vt=2.6), levels, strict=False)
    assert len(lax.ambiguous_rows) == 3


def test_circuit_structure_errors():
    m = IDEAL
    with pytest.raises(CircuitError):
        Circuit(("A", "A"), (), (), ("A",))
    with pytest.raises(CircuitError):
        Circuit(("A", "supply", "ground"), (Diode("D", "A", "X", m),), (), ("A",))
    with pytest.raises(CircuitError):
        Circuit(("A", "supply", "ground"), (), (Resistor("R", "A", "ground", 0),), ("A",))
    with pytest.raises(CircuitError):
        Circuit(("A", "supply", "ground"), (), (), ("A",), kind="AND")
    c = Circuit(("A", "supply", "ground"), (), (Resistor("R", "A", "ground", 1.0),), ("A",))
    with pytest.raises(CircuitError):
        simulate_circuit(c, {})


def test_floating_node():
    c = Circuit(("A", "X", "supply", "ground"), (Diode("D", "A", "X", IDEAL),), (), ("A",))
    with pytest.raises(FloatingNode):
        simulate_circuit(c, {"A": 1.0})


def test_ideal_diode_between_driven_nodes_is_rejected():
    # a conducting ideal diode would have to clamp two fixed voltages to each other
    c = Circuit(("A", "supply", "ground"), (Diode("D", "A", "ground", IDEAL),), (), ("A",))
    with pytest.raises(FloatingNode):
        simulate_circuit(c, {"A": 1.0})


@pytest.mark.parametrize("kind", ["AND", "OR"])
def test_every_catalog_gate_is_correct(kind):
    for spec in enumerate_designs({}):
        design = build_gate(GateSpec(kind, spec, spec))
        table = truth_table(compile_gate_circuit(design))
        assert table.matches(BOOLEAN[kind]), spec
        assert max(r.kirchhoff_residual for r in table.rows) < 1e-12


def test_mixed_gate_default_voltages():
    a, b = DiodeSpec("NH2", "NO2", "CH2"), DiodeSpec("OH", "CN", "CH2CH2")
    c = compile_gate_circuit(build_gate(GateSpec("AND", a, b)))
    table = truth_table(c)
    assert table.outputs == (0, 0, 0, 1)
    # V(Q) = 0.3 + (5 - V(Q)) / (1e9 ohm * 1e-6 S) with the conducting diode in series
    assert table.rows[1].output_volts == pytest.approx(0.305 / 1.001, abs=1e-12)
    assert table.rows[3].output_volts == pytest.approx(5.0, abs=1e-9)
