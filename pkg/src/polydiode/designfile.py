"""Design and configuration files.

Both use one line-oriented grammar::

    # comment
    [section]
    key = value

A design file has exactly one ``[design]`` section. Diodes put their
groups there; gates put ``kind``, ``load_ohms`` and ``supply_volts`` there
and describe their two diodes in ``[diode.a]`` and ``[diode.b]``. A config
file uses ``[params]``, ``[levels]`` and ``[model]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .builder import (
    CONTACT_FERMI_EV,
    AromaticBridge,
    BuildError,
    DiodeSpec,
    GateSpec,
    RoleMismatch,
    UnknownGroup,
    catalog_groups,
)
from .device import LogicLevels, ModelConfig
from .huckel import DEFAULT_SITE_TABLE, HuckelParameters, SiteParameter


class DesignFileError(Exception):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.message = message
        self.line = line
        self.path = path
        where = path or "<input>"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}")


Sections = dict[str, dict[str, tuple[str, int]]]


def parse_sections(text: str, path: str | None = None) -> Sections:
    """Split text into ``{section: {key: (value, line)}}``."""
    out: Sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise DesignFileError(f"malformed section header {line!r}", lineno, path)
            current = line[1:-1].strip()
            if current in out:
                raise DesignFileError(f"section [{current}] appears twice", lineno, path)
            out[current] = {}
            continue
        if "=" not in line:
            raise DesignFileError(f"expected 'key = value', got {line!r}", lineno, path)
        if current is None:
            raise DesignFileError("key before any section header", lineno, path)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise DesignFileError(f"expected 'key = value', got {line!r}", lineno, path)
        if key in out[current]:
            raise DesignFileError(f"key {key!r} repeated in [{current}]", lineno, path)
        out[current][key] = (value, lineno)
    return out


# ---------------------------------------------------------------------------
# design files

DIODE_KEYS = ("donor", "acceptor", "bridge", "rings_donor", "rings_acceptor", "contact")
GATE_KEYS = ("kind", "load_ohms", "supply_volts")
KINDS = {"diode": "diode", "and_gate": "AND", "or_gate": "OR"}
# recognised only to reject them with a diode-logic diagnostic
INVERTING_KINDS = {"not_gate": "NOT", "xor_gate": "XOR", "nand_gate": "NAND", "nor_gate": "NOR"}


@dataclass(frozen=True)
class DesignFile:
    kind: str  # diode | AND | OR
    diode: DiodeSpec | None = None
    gate: GateSpec | None = None
    path: str | None = None

    @property
    def diodes(self) -> tuple[DiodeSpec, ...]:
        if self.gate is not None:
            return (self.gate.diode_a, self.gate.diode_b)
        return (self.diode,)

    def echo(self) -> dict:
        def d(s: DiodeSpec):
            return {"donor": s.donor_group, "acceptor": s.acceptor_group, "bridge": s.bridge,
                    "rings_donor": s.rings_donor, "rings_acceptor": s.rings_acceptor, "contact": s.contact_metal}
        if self.gate is None:
            return {"kind": "diode", **d(self.diode)}
        return {"kind": self.kind, "load_ohms": self.gate.load_resistance,
                "supply_volts": self.gate.supply_voltage, "diode_a": d(self.gate.diode_a),
                "diode_b": d(self.gate.diode_b)}


def _int(value, line, path, key):
    try:
        return int(value)
    except ValueError:
        raise DesignFileError(f"{key} must be an integer, got {value!r}", line, path) from None


def _float(value, line, path, key):
    try:
        x = float(value)
    except ValueError:
        raise DesignFileError(f"{key} must be a number, got {value!r}", line, path) from None
    if math.isnan(x):
        raise DesignFileError(f"{key} must be a number, got {value!r}", line, path)
    return x


def _diode_from(section: dict, path, header_line: int) -> DiodeSpec:
    for key in ("donor", "acceptor", "bridge"):
        if key not in section:
            raise DesignFileError(f"missing key {key!r}", header_line, path)
    kw = {}
    for key in ("rings_donor", "rings_acceptor"):
        if key in section:
            kw[key] = _int(*section[key], path, key)
    if "contact" in section:
        value, line = section["contact"]
        if value not in CONTACT_FERMI_EV:
            raise DesignFileError(f"unknown contact {value!r}; choose one of: Au, Al, U", line, path)
        kw["contact_metal"] = value
    spec = DiodeSpec(section["donor"][0], section["acceptor"][0], section["bridge"][0], **kw)
    try:
        return spec.check()
    except (UnknownGroup, RoleMismatch) as exc:
        key = _offending_key(spec, exc)
        value, line = section[key]
        role = {"donor": "donor", "acceptor": "acceptor", "bridge": "insulator"}[key]
        names = ", ".join(g.name for g in catalog_groups(role))
        if isinstance(exc, RoleMismatch):
            what = f"group {value!r} cannot be the {key}"
        else:
            what = f"unknown {key} group {value!r}"
        raise DesignFileError(f"{what}; catalog {key}s: {names}", line, path) from None
    except AromaticBridge as exc:
        raise DesignFileError(str(exc), section["bridge"][1], path) from None
    except BuildError as exc:
        raise DesignFileError(str(exc), header_line, path) from None


def _offending_key(spec: DiodeSpec, exc) -> str:
    from .builder import lookup_group

    for key, name, role in (("donor", spec.donor_group, "donor"), ("acceptor", spec.acceptor_group, "acceptor"),
                            ("bridge", spec.bridge, "insulator")):
        try:
            lookup_group(name, role)
        except (UnknownGroup, RoleMismatch):
            return key
    return "donor"


def _check_keys(section: dict, allowed, name, path):
    for key, (_, line) in section.items():
        if key not in allowed:
            raise DesignFileError(f"unknown key {key!r} in [{name}]", line, path)


def parse_design(text: str, path: str | None = None) -> DesignFile:
    sections = parse_sections(text, path)
    if "design" not in sections:
        raise DesignFileError("missing [design] section", None, path)
    for name, body in sections.items():
        if name not in ("design", "diode.a", "diode.b"):
            raise DesignFileError(f"unknown section [{name}]; expected [design], [diode.a] or [diode.b]",
                                  _header_line(text, name), path)
    design = sections["design"]
    header = _header_line(text, "design")
    if "kind" not in design:
        raise DesignFileError("missing key 'kind'", header, path)
    kind_value, kind_line = design["kind"]
    if kind_value in INVERTING_KINDS:
        try:
            GateSpec(INVERTING_KINDS[kind_value], None, None)
        except BuildError as exc:
            raise DesignFileError(str(exc), kind_line, path) from None
    if kind_value not in KINDS:
        raise DesignFileError(f"unknown kind {kind_value!r}; choose diode, and_gate or or_gate", kind_line, path)
    kind = KINDS[kind_value]
    if kind == "diode":
        _check_keys(design, ("kind", *DIODE_KEYS), "design", path)
        for sub in ("diode.a", "diode.b"):
            if sub in sections:
                raise DesignFileError(f"[{sub}] only belongs in gate files", _header_line(text, sub), path)
        return DesignFile("diode", diode=_diode_from(design, path, header), path=path)
    _check_keys(design, GATE_KEYS, "design", path)
    diodes = []
    for sub in ("diode.a", "diode.b"):
        if sub not in sections:
            raise DesignFileError(f"gate needs a [{sub}] section", header, path)
        _check_keys(sections[sub], DIODE_KEYS, sub, path)
        diodes.append(_diode_from(sections[sub], path, _header_line(text, sub)))
    kw = {}
    if "load_ohms" in design:
        kw["load_resistance"] = _float(*design["load_ohms"], path, "load_ohms")
    if "supply_volts" in design:
        kw["supply_voltage"] = _float(*design["supply_volts"], path, "supply_volts")
    try:
        gate = GateSpec(kind, diodes[0], diodes[1], **kw)
    except BuildError as exc:
        line = header
        for key in ("load_ohms", "supply_volts"):
            if key in design and key.split("_")[0] in str(exc):
                line = design[key][1]
        raise DesignFileError(str(exc), line, path) from None
    return DesignFile(kind, gate=gate, path=path)


def _header_line(text: str, name: str) -> int | None:
    for lineno, raw in enumerate(text.splitlines(), 1):
        if raw.split("#", 1)[0].strip().replace(" ", "") == f"[{name}]":
            return lineno
    return None


def load_design(path) -> DesignFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DesignFileError(f"cannot read design file: {exc.strerror or exc}", None, str(path)) from None
    return parse_design(text, str(path))


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class Config:
    params: HuckelParameters = field(default_factory=HuckelParameters)
    levels: LogicLevels = field(default_factory=LogicLevels)
    model: ModelConfig = field(default_factory=ModelConfig)

    def echo(self) -> dict:
        p = self.params
        return {
            "params": {
                "alpha": p.alpha, "beta": p.beta, "alpha_ev": p.alpha_ev, "beta_ev": p.beta_ev,
                "degeneracy_tol": p.degeneracy_tol, "jacobi_tol": p.jacobi_tol, "max_sweeps": p.max_sweeps,
                "sites": {name: {"h": s.h, "k": s.k, "ring_shift": s.ring_shift}
                          for name, s in sorted(p.table.items())},
            },
            "levels": {f.name: getattr(self.levels, f.name) for f in fields(self.levels)},
            "model": {
                "base_threshold": self.model.base_threshold,
                "on_conductance": self.model.on_conductance,
                "bridge_barrier_ev": self.model.bridge_barrier_ev,
                "wire_ohms": self.model.wire_ohms,
                "fermi": dict(sorted(self.model.fermi_ev.items())),
            },
        }


PARAM_KEYS = ("alpha", "beta", "alpha_ev", "beta_ev", "degeneracy_tol", "jacobi_tol", "max_sweeps")
SITE_KEYS = ("h", "k", "ring_shift")
LEVEL_KEYS = ("v_low", "v_high", "v_low_max", "v_high_min")
MODEL_KEYS = ("base_threshold", "on_conductance", "bridge_barrier_ev", "wire_ohms")


def parse_config(text: str, path: str | None = None) -> Config:
    sections = parse_sections(text, path)
    base = Config()
    params_kw: dict = {}
    table = dict(base.params.table)
    site_kw: dict[str, dict] = {}
    level_kw: dict = {}
    model_kw: dict = {}
    fermi = dict(base.model.fermi_ev)
    for name in sections:
        if name not in ("params", "levels", "model"):
            raise DesignFileError(f"unknown section [{name}]; expected [params], [levels] or [model]",
                                  _header_line(text, name), path)
    for name, body in sections.items():
        for key, (value, line) in body.items():
            if name == "params":
                if key in PARAM_KEYS:
                    params_kw[key] = _int(value, line, path, key) if key == "max_sweeps" else \
                        _float(value, line, path, key)
                elif "." in key and key.rsplit(".", 1)[1] in SITE_KEYS:
                    site, attr = key.rsplit(".", 1)
                    site_kw.setdefault(site, {})[attr] = _float(value, line, path, key)
                else:
                    raise DesignFileError(f"unknown key {key!r} in [params]", line, path)
            elif name == "levels":
                if key not in LEVEL_KEYS:
                    raise DesignFileError(f"unknown key {key!r} in [levels]", line, path)
                level_kw[key] = _float(value, line, path, key)
            elif name == "model":
                if key in MODEL_KEYS:
                    model_kw[key] = _float(value, line, path, key)
                elif key.startswith("fermi.") and key[6:] in CONTACT_FERMI_EV:
                    fermi[key[6:]] = _float(value, line, path, key)
                else:
                    raise DesignFileError(f"unknown key {key!r} in [model]", line, path)

    def build(section, make):
        try:
            return make()
        except (TypeError, ValueError) as exc:
            raise DesignFileError(f"invalid [{section}]: {exc}", _header_line(text, section), path) from None

    def make_params():
        for site, kw in site_kw.items():
            old = table.get(site)
            table[site] = replace(old, **kw) if old else SiteParameter(**{"h": 0.0, "k": 1.0, **kw})
        return HuckelParameters(**params_kw, table=table)

    params = build("params", make_params)
    levels = build("levels", lambda: replace(base.levels, **level_kw))
    model = build("model", lambda: replace(base.model, **model_kw, fermi_ev=fermi))
    return Config(params, levels, model)


def load_config(path) -> Config:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DesignFileError(f"cannot read config file: {exc.strerror or exc}", None, str(path)) from None
    return parse_config(text, str(path))


def _fmt(x) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return repr(x)


def defaults_text() -> str:
    """Every built-in default, in config-file grammar."""
    c = Config()
    p = c.params
    lines = ["[params]"]
    lines += [f"{k} = {_fmt(getattr(p, k))}" for k in PARAM_KEYS]
    for name, s in DEFAULT_SITE_TABLE.items():
        lines += [f"{name}.{k} = {_fmt(getattr(s, k))}" for k in SITE_KEYS]
    lines += ["", "[levels]"]
    lines += [f"{k} = {_fmt(getattr(c.levels, k))}" for k in LEVEL_KEYS]
    lines += ["", "[model]"]
    lines += [f"{k} = {_fmt(getattr(c.model, k))}" for k in MODEL_KEYS]
    lines += [f"fermi.{m} = {_fmt(v)}" for m, v in c.model.fermi_ev.items()]
    return "\n".join(lines) + "\n"
