"""Pipeline orchestration and report assembly (JSON and text)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from . import __version__
from .builder import CompiledDesign, DiodeSpec, GateSpec, build_diode, build_gate, enumerate_designs
from .designfile import Config, DesignFile
from .device import (
    BOOLEAN,
    DiodeModel,
    EnergyProfile,
    SideLevels,
    TruthTable,
    diode_model,
    energy_profile,
    gate_circuit,
    solve_side,
    truth_table,
)
from .huckel import HuckelParameters
from .molgraph import MolecularGraph, PiSystem, inventory, render_molecule, validate_graph

SCHEMA_VERSION = 1


def num(x: float):
    """JSON-safe number rounded to 12 significant digits, so reports do not carry solver noise."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, int):
        return x
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    y = float(f"{x:.12g}")
    return 0.0 if y == 0 else y


def to_units(e: float, params: HuckelParameters, units: str) -> float:
    if units == "beta":
        return e
    return params.alpha_ev + (e - params.alpha) / params.beta * params.beta_ev


# ---------------------------------------------------------------------------
# analysis


@dataclass(frozen=True)
class DiodeAnalysis:
    label: str
    design: CompiledDesign
    profile: EnergyProfile
    model: DiodeModel


@dataclass(frozen=True)
class Analysis:
    source: DesignFile
    design: CompiledDesign
    diodes: tuple[DiodeAnalysis, ...]


def analyze(source: DesignFile, config: Config) -> Analysis:
    if source.gate is not None:
        compiled = build_gate(source.gate, config.model.fermi_ev)
        parts = list(zip(("a", "b"), compiled.diodes))
    else:
        compiled = build_diode(source.diode, fermi_levels=config.model.fermi_ev)
        parts = [("diode", compiled)]
    out = []
    for label, d in parts:
        profile = energy_profile(d, config.params, config.model)
        out.append(DiodeAnalysis(label, d, profile, diode_model(profile, config.model)))
    return Analysis(source, compiled, tuple(out))


def simulate_gate(analysis: Analysis, config: Config, strict: bool = True) -> TruthTable:
    gate = analysis.source.gate
    circuit = gate_circuit(gate.kind, analysis.diodes[0].model, analysis.diodes[1].model,
                           gate.load_resistance, gate.supply_voltage, config.model.wire_ohms)
    return truth_table(circuit, config.levels, strict=strict)


def bias_grid(lo: float, hi: float, steps: int) -> list[float]:
    if steps < 2:
        return [lo]
    return [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]


# ---------------------------------------------------------------------------
# report blocks


def validation_block(g: MolecularGraph) -> dict:
    problems = validate_graph(g)
    return {
        "valid": not problems,
        "violations": [{"kind": v.kind, "site": v.site, "message": v.message} for v in problems],
    }


def inventory_block(g: MolecularGraph) -> dict:
    inv = inventory(g)
    return {
        "formula": inv.formula,
        "molecular_mass": num(inv.molecular_mass),
        "valence_electrons": inv.valence_electrons,
        "sigma_electrons": inv.sigma_electrons,
        "pi_electrons": inv.pi_electrons,
        "lone_pair_electrons": inv.lone_pair_electrons,
        "ring_count": inv.ring_count,
        "atoms": dict(sorted(inv.counts.items())),
    }


def graph_block(g: MolecularGraph, sections=None) -> dict:
    return {
        "notation": render_molecule(g),
        "formula": g.formula(),
        "atoms": [{"index": i, "element": a.element, "hybridization": a.hybridization,
                   "section": g.section_tags[i]} for i, a in enumerate(g.atoms)],
        "bonds": [[b.a, b.b, b.order] for b in g.bonds],
        "groups": [{"name": t.name, "role": t.role, "root": t.root, "atoms": list(t.atoms)} for t in g.groups],
        "sections": {k: list(v) for k, v in sorted((sections or {}).items())},
    }


def side_block(side: SideLevels, params: HuckelParameters, units: str) -> dict:
    o, f = side.orbitals, side.frontier
    from .huckel import occupy

    occ = occupy(o, side.pi.electron_count, params)
    return {
        "sites": [s.label for s in side.pi.sites],
        "electrons": side.pi.electron_count,
        "energies": [num(to_units(float(e), params, units)) for e in o.energies],
        "occupations": list(occ.counts),
        "labels": [lab.kind for lab in o.labels],
        "homo_index": f.homo_index,
        "lumo_index": f.lumo_index,
        "open_shell": occ.is_open_shell,
        "jacobi_sweeps": o.sweeps,
        "frontier": frontier_block(f, params, units),
    }


def frontier_block(f, params: HuckelParameters, units: str) -> dict:
    f = f if units == "beta" else f.to_ev(params)
    return {
        "e_homo": num(f.e_homo),
        "e_lumo": num(f.e_lumo),
        "gap": num(f.gap),
        "ionization_potential": num(f.ionization_potential),
        "electron_affinity": num(f.electron_affinity),
        "transfer_balance": num(f.transfer_balance),
    }


def profile_block(p: EnergyProfile, params: HuckelParameters, units: str) -> dict:
    return {
        "donor": frontier_block(p.donor_levels, params, units),
        "acceptor": frontier_block(p.acceptor_levels, params, units),
        "delta_e_lumo": num(p.delta_e_lumo if units == "beta" else p.delta_e_lumo_ev),
        "delta_e_lumo_ev": num(p.delta_e_lumo_ev),
        "bridge_barrier_ev": num(p.bridge_barrier_ev),
        "contact_fermi_ev": {k: num(v) for k, v in sorted(p.contact_fermi_ev.items())},
    }


def model_block(m: DiodeModel) -> dict:
    return {
        "forward_threshold_volts": num(m.forward_threshold),
        "reverse_threshold_volts": num(m.reverse_threshold),
        "on_conductance_siemens": num(m.on_conductance),
        "rectifying": m.rectifying,
        "rectification_ratio": num(m.rectification_ratio),
    }


def truth_block(t: TruthTable) -> dict:
    rows = []
    for r in t.rows:
        rows.append({
            "inputs": {"A": r.inputs[0], "B": r.inputs[1]},
            "input_volts": [num(v) for v in r.input_volts],
            "voltages": {k: num(v) for k, v in sorted(r.voltages.items())},
            "output_volts": num(r.output_volts),
            "logic": r.logic,
            "diode_states": dict(sorted(r.diode_states.items())),
            "reverse_stress": dict(sorted(r.reverse_stress.items())),
            "kirchhoff_residual_amps": num(r.kirchhoff_residual),
        })
    return {
        "kind": t.kind,
        "levels": {"v_low": t.levels.v_low, "v_high": t.levels.v_high,
                   "v_low_max": t.levels.v_low_max, "v_high_min": t.levels.v_high_min},
        "rows": rows,
        "ambiguous": bool(t.ambiguous_rows),
        "matches_boolean": (not t.ambiguous_rows) and t.matches(BOOLEAN[t.kind]),
    }


def header(command: str, config: Config, units: str) -> dict:
    return {"schema_version": SCHEMA_VERSION, "version": __version__, "command": command, "units": units,
            "config": config.echo()}


def design_report(command: str, analysis: Analysis, config: Config, units: str,
                  table: TruthTable | None = None, iv=None) -> dict:
    params = config.params
    d = analysis.design
    rep = header(command, config, units)
    rep["design"] = analysis.source.echo()
    rep["design"]["notation"] = render_molecule(d.graph)
    rep["validation"] = validation_block(d.graph)
    rep["inventory"] = inventory_block(d.graph)
    orbitals, profiles, models = {}, {}, {}
    for part in analysis.diodes:
        orbitals[part.label] = {"donor": side_block(part.profile.donor, params, units),
                                "acceptor": side_block(part.profile.acceptor, params, units)}
        profiles[part.label] = profile_block(part.profile, params, units)
        models[part.label] = model_block(part.model)
    rep["orbitals"], rep["profile"], rep["diode"] = orbitals, profiles, models
    if table is not None:
        rep["truth_table"] = truth_block(table)
    if iv is not None:
        rep["iv"] = [[num(v), num(i)] for v, i in iv]
    return rep


def molecule_report(command: str, g: MolecularGraph, systems: list[PiSystem], config: Config,
                    units: str) -> dict:
    rep = header(command, config, units)
    rep["design"] = {"kind": "molecule", "notation": render_molecule(g)}
    rep["validation"] = validation_block(g)
    rep["inventory"] = inventory_block(g)
    if command != "validate":
        rep["graph"] = graph_block(g)
    if command == "analyze":
        rep["orbitals"] = {f"system{i}": side_block(solve_side(pi, config.params), config.params, units)
                           for i, pi in enumerate(systems)}
    return rep


@dataclass(frozen=True)
class SweepRow:
    spec: DiodeSpec
    profile: EnergyProfile
    model: DiodeModel
    and_ok: bool
    or_ok: bool


def sweep(fixed, rings_donor: int, rings_acceptor: int, contact: str, config: Config) -> list[SweepRow]:
    """Analyse every enumerated diode and check it in both gate topologies."""
    rows = []
    for spec in enumerate_designs(fixed, rings_donor, rings_acceptor, contact):
        d = build_diode(spec, fermi_levels=config.model.fermi_ev)
        profile = energy_profile(d, config.params, config.model)
        model = diode_model(profile, config.model)
        ok = {}
        for kind in ("AND", "OR"):
            gs = GateSpec(kind, spec, spec)
            t = truth_table(gate_circuit(kind, model, model, gs.load_resistance, gs.supply_voltage,
                                         config.model.wire_ohms), config.levels, strict=False)
            ok[kind] = not t.ambiguous_rows and t.matches(BOOLEAN[kind])
        rows.append(SweepRow(spec, profile, model, ok["AND"], ok["OR"]))
    return rows


SWEEP_COLUMNS = ("donor", "acceptor", "bridge", "rings_donor", "rings_acceptor", "delta_e_lumo_ev",
                 "forward_volts", "reverse_volts", "ratio", "rectifying", "and_ok", "or_ok")


def sweep_row_dict(r: SweepRow) -> dict:
    return {
        "donor": r.spec.donor_group, "acceptor": r.spec.acceptor_group, "bridge": r.spec.bridge,
        "rings_donor": r.spec.rings_donor, "rings_acceptor": r.spec.rings_acceptor,
        "delta_e_lumo_ev": num(r.profile.delta_e_lumo_ev),
        "forward_volts": num(r.model.forward_threshold), "reverse_volts": num(r.model.reverse_threshold),
        "ratio": num(r.model.rectification_ratio), "rectifying": r.model.rectifying,
        "and_ok": r.and_ok, "or_ok": r.or_ok,
    }


def sweep_report(rows: list[SweepRow], fixed, config: Config, units: str) -> dict:
    rep = header("sweep", config, units)
    rep["fixed"] = dict(sorted(fixed.items()))
    rep["rows"] = [sweep_row_dict(r) for r in rows]
    return rep


# ---------------------------------------------------------------------------
# rendering


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float):
        return num(obj)
    return obj


def render_json(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _orbital_table(block: dict, units: str, title: str) -> list[str]:
    lines = [f"{title}: {block['electrons']} pi electrons over {len(block['sites'])} sites",
             f"  {'j':>3}  {'energy (' + units + ')':>14}  occ  kind"]
    for j, (e, occ, kind) in enumerate(zip(block["energies"], block["occupations"], block["labels"])):
        mark = "  HOMO" if j == block["homo_index"] else "  LUMO" if j == block["lumo_index"] else ""
        lines.append(f"  {j:>3}  {e:>14.6f}  {occ:>3}  {kind}{mark}")
    f = block["frontier"]
    lines.append(f"  gap {f['gap']:.6f}  I {f['ionization_potential']:.6f}  A {f['electron_affinity']:.6f}"
                 f"  A-I {f['transfer_balance']:.6f}")
    return lines


def render_text(report: dict) -> str:
    lines = []
    units = report.get("units", "beta")
    design = report.get("design", {})
    if "kind" in design:
        lines.append(f"design: {design['kind']}  {design.get('notation', '')}".rstrip())
    if "validation" in report:
        v = report["validation"]
        lines.append("validation: ok" if v["valid"] else f"validation: {len(v['violations'])} violation(s)")
        for item in v["violations"]:
            lines.append(f"  {item['kind']} at site {item['site']}: {item['message']}")
    if "inventory" in report:
        inv = report["inventory"]
        lines.append(f"formula {inv['formula']}  mass {inv['molecular_mass']:.3f} u  valence electrons "
                     f"{inv['valence_electrons']} (sigma {inv['sigma_electrons']}, pi {inv['pi_electrons']}, "
                     f"lone pair {inv['lone_pair_electrons']})")
    if "graph" in report and report.get("command") == "build":
        g = report["graph"]
        lines.append("atoms:")
        for a in g["atoms"]:
            lines.append(f"  {a['index']:>3} {a['element']:<2} {a['hybridization']:<8} {a['section']}")
        lines.append("bonds:")
        for a, b, order in g["bonds"]:
            lines.append(f"  {a:>3} {b:>3} {order}")
        for name, sites in g["sections"].items():
            lines.append(f"section {name}: {' '.join(map(str, sites))}")
    show_orbitals = report.get("command") != "simulate"
    for label, halves in report.get("orbitals", {}).items() if show_orbitals else ():
        if "energies" in halves:
            lines += _orbital_table(halves, units, label)
            continue
        for side in ("donor", "acceptor"):
            lines += _orbital_table(halves[side], units, f"{label} {side} half")
    for label, p in report.get("profile", {}).items():
        lines.append(f"{label} profile: LUMO donor {p['donor']['e_lumo']:.6f}, acceptor "
                     f"{p['acceptor']['e_lumo']:.6f}, delta {p['delta_e_lumo']:.6f} {units} "
                     f"({p['delta_e_lumo_ev']:.6f} eV), bridge barrier {p['bridge_barrier_ev']:g} eV")
    for label, m in report.get("diode", {}).items():
        lines.append(f"{label} model: forward {_fmt(m['forward_threshold_volts'])} V, reverse "
                     f"{_fmt(m['reverse_threshold_volts'])} V, ratio {_fmt(m['rectification_ratio'])}, "
                     f"rectifying {_fmt(m['rectifying'])}")
    if "truth_table" in report:
        t = report["truth_table"]
        lines.append(f"{t['kind']} truth table (V_low_max {t['levels']['v_low_max']:g} V, "
                     f"V_high_min {t['levels']['v_high_min']:g} V)")
        lines.append("  A  B  V(Q)        V(C)        out")
        for r in t["rows"]:
            out = "?" if r["logic"] is None else str(r["logic"])
            lines.append(f"  {r['inputs']['A']}  {r['inputs']['B']}  {r['voltages']['Q']:<10.6g}  "
                         f"{r['output_volts']:<10.6g}  {out}")
    if "iv" in report:
        lines.append("# bias_volts current_amps")
        lines += [f"{v:.6f} {i:.9e}" for v, i in report["iv"]]
    if "rows" in report:
        lines.append("\t".join(SWEEP_COLUMNS))
        for r in report["rows"]:
            lines.append("\t".join(_fmt(r[c]) for c in SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"
