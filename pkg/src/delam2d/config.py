"""Flat key-value run configuration.

The syntax is a small TOML subset: ``[section]`` headers, ``key =
value`` lines, ``#`` comments.  Values are numbers, booleans, quoted
strings, or bracketed lists of numbers/strings.  Parsing is strict:
unknown sections or keys, duplicate keys and malformed values are
reported with their line number; misspellings never fall back to
defaults silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import EDGE_TAGS, Mesh2D, build_two_block_mesh
from .interface import InterfaceField
from .limits import Scenario
from .materials import (
    LoadSchedule,
    ModelParams,
    ScalingMode,
    TimeProfile,
)
from .scenarios import LOAD_KINDS, build_scenario, make_load


class ConfigError(ValueError):
    """Schema or validation failure, with a line-precise message."""


# section -> key -> (type tag, default)
_SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "mesh": {
        "width": ("float", 2.0),
        "height": ("float", 0.5),
        "nx": ("int", 16),
        "ny": ("int", 4),
        "dirichlet": ("str_list", ["top", "bottom"]),
        "neumann": (
            "str_list",
            ["left_minus", "left_plus", "right_minus", "right_plus"],
        ),
    },
    "material": {
        "rho": ("float", 1.0),
        "lambda_c": ("float", 1.0),
        "mu_c": ("float", 1.0),
        "lambda_d": ("float", 0.1),
        "mu_d": ("float", 0.1),
    },
    "interface": {
        "a0": ("float", 0.05),
        "a1": ("float", 0.05),
        "b": ("float", 0.01),
        "k": ("float", 100.0),
        "scaling": ("str", "constant"),
        "z0_debonded": ("int_list", []),
    },
    "load": {
        "kind": ("str", "pull_apart"),
        "profile": ("str", "ramp"),
        "magnitude": ("float", 1.0),
        "omega": ("float", 1.0),
        "phase": ("float", 0.0),
    },
    "time": {
        "tau": ("float", 0.01),
        "t_end": ("float", 0.5),
    },
    "run": {
        "name": ("str", "run"),
        "k_values": ("float_list", [10.0, 100.0, 1000.0, 10000.0]),
        "strict_init": ("bool", True),
        "step_order": ("str", "uz"),
        "streaming": ("bool", False),
        "out_dir": ("str", "out"),
        "seed": ("int", 0),
        "samples": ("int", 10),
        "exclusion_steps": ("int", 2),
    },
}

_SECTION_ORDER = ("mesh", "material", "interface", "load", "time", "run")


@dataclass
class RunConfig:
    """Validated configuration; the single source for building runs."""

    values: dict[str, dict[str, object]] = field(default_factory=dict)

    def __getitem__(self, section: str) -> dict[str, object]:
        return self.values[section]

    def __eq__(self, other) -> bool:
        return isinstance(other, RunConfig) and self.values == other.values

    # -- builders -----------------------------------------------------------

    @property
    def tau(self) -> float:
        return float(self.values["time"]["tau"])

    @property
    def n_steps(self) -> int:
        t_end = float(self.values["time"]["t_end"])
        return max(1, int(round(t_end / self.tau)))

    @property
    def k_values(self) -> list[float]:
        return list(self.values["run"]["k_values"])

    def build_mesh(self) -> Mesh2D:
        m = self.values["mesh"]
        return build_two_block_mesh(
            float(m["width"]),
            float(m["height"]),
            int(m["nx"]),
            int(m["ny"]),
            dirichlet_spec=set(m["dirichlet"]),
            neumann_spec=set(m["neumann"]),
        )

    def build_load(self) -> LoadSchedule:
        ld = self.values["load"]
        profile = TimeProfile(
            kind=str(ld["profile"]),
            scale=1.0,
            omega=float(ld["omega"]),
            phase=float(ld["phase"]),
        )
        return make_load(str(ld["kind"]), float(ld["magnitude"]), profile)

    def build_params(self) -> ModelParams:
        mat = self.values["material"]
        itf = self.values["interface"]
        return ModelParams(
            rho=float(mat["rho"]),
            lame_lambda_C=float(mat["lambda_c"]),
            lame_mu_C=float(mat["mu_c"]),
            lame_lambda_D=float(mat["lambda_d"]),
            lame_mu_D=float(mat["mu_d"]),
            a0=float(itf["a0"]),
            a1=float(itf["a1"]),
            b=float(itf["b"]),
            k=float(itf["k"]),
            scaling=ScalingMode.parse(str(itf["scaling"])),
            load=self.build_load(),
        )

    def build_initial_bonding(self, mesh: Mesh2D) -> InterfaceField:
        z = InterfaceField.fully_bonded(mesh)
        vals = z.values.copy()
        for idx in self.values["interface"]["z0_debonded"]:
            if not 0 <= int(idx) < mesh.n_facets:
                raise ConfigError(
                    f"interface.z0_debonded index {idx} out of range "
                    f"[0, {mesh.n_facets})"
                )
            vals[int(idx)] = 0
        return z.with_values(vals)

    def build_scenario(self) -> Scenario:
        mesh = self.build_mesh()
        return build_scenario(
            name=str(self.values["run"]["name"]),
            mesh=mesh,
            params=self.build_params(),
            tau=self.tau,
            n_steps=self.n_steps,
            z0=self.build_initial_bonding(mesh),
        )


def _parse_scalar(token: str, lineno: int):
    token = token.strip()
    if token.startswith('"') and token.endswith('"') and len(token) >= 2:
        return token[1:-1]
    if token == "true":
        return True
    if token == "false":
        return False
    try:
        if any(c in token for c in ".eE") and not token.lstrip("+-").isdigit():
            return float(token)
        return int(token)
    except ValueError:
        raise ConfigError(f"line {lineno}: cannot parse value {token!r}") from None


def _parse_value(text: str, lineno: int):
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ConfigError(f"line {lineno}: unterminated list")
        inner = text[1:-1].strip()
        if not inner:
            return []
        return [_parse_scalar(tok, lineno) for tok in inner.split(",")]
    return _parse_scalar(text, lineno)


def _coerce(section: str, key: str, value, kind: str, lineno: int):
    def err(expected: str):
        raise ConfigError(
            f"line {lineno}: {section}.{key} expects {expected}, got {value!r}"
        )

    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            err("a number")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            err("an integer")
        return int(value)
    if kind == "bool":
        if not isinstance(value, bool):
            err("true or false")
        return value
    if kind == "str":
        if not isinstance(value, str):
            err("a quoted string")
        return value
    if kind == "float_list":
        if not isinstance(value, list) or any(
            isinstance(v, (str, bool)) for v in value
        ):
            err("a list of numbers")
        return [float(v) for v in value]
    if kind == "int_list":
        if not isinstance(value, list) or any(
            isinstance(v, (str, bool, float)) for v in value
        ):
            err("a list of integers")
        return [int(v) for v in value]
    if kind == "str_list":
        if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
            err("a list of quoted strings")
        return list(value)
    raise AssertionError(f"unknown schema kind {kind}")


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a configuration document."""
    values: dict[str, dict[str, object]] = {
        sec: {k: (list(d) if isinstance(d, list) else d) for k, (_, d) in keys.items()}
        for sec, keys in _SCHEMA.items()
    }
    seen: set[tuple[str, str]] = set()
    section: str | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {line!r}")
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(
                    f"line {lineno}: unknown section [{section}]; "
                    f"expected one of {list(_SECTION_ORDER)}"
                )
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, _, rhs = line.partition("=")
        key = key.strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(
                f"line {lineno}: unknown key {section}.{key}; "
                f"known keys: {sorted(_SCHEMA[section])}"
            )
        if (section, key) in seen:
            raise ConfigError(f"line {lineno}: duplicate key {section}.{key}")
        seen.add((section, key))
        kind = _SCHEMA[section][key][0]
        values[section][key] = _coerce(
            section, key, _parse_value(rhs, lineno), kind, lineno
        )

    cfg = RunConfig(values=values)
    _validate(cfg)
    return cfg


def _strip_comment(line: str) -> str:
    out = []
    in_string = False
    for ch in line:
        if ch == '"':
            in_string = not in_string
        if ch == "#" and not in_string:
            break
        out.append(ch)
    return "".join(out)


def _validate(cfg: RunConfig) -> None:
    v = cfg.values
    if v["time"]["tau"] <= 0.0:
        raise ConfigError("time.tau must be positive")
    if v["time"]["t_end"] < v["time"]["tau"]:
        raise ConfigError("time.t_end must be at least one time step")
    if v["mesh"]["nx"] < 1 or v["mesh"]["ny"] < 1:
        raise ConfigError("mesh.nx and mesh.ny must be >= 1")
    for tag in list(v["mesh"]["dirichlet"]) + list(v["mesh"]["neumann"]):
        if tag not in EDGE_TAGS:
            raise ConfigError(f"unknown edge tag {tag!r} in mesh section")
    if v["interface"]["k"] < 1.0:
        raise ConfigError("interface.k must be >= 1")
    ks = v["run"]["k_values"]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ConfigError("run.k_values must be strictly ascending")
    if any(k < 1.0 for k in ks):
        raise ConfigError("run.k_values entries must be >= 1")
    if v["interface"]["scaling"] not in ("constant", "one_over_k"):
        raise ConfigError(
            "interface.scaling must be 'constant' or 'one_over_k'"
        )
    if v["load"]["kind"] not in LOAD_KINDS:
        raise ConfigError(f"load.kind must be one of {list(LOAD_KINDS)}")
    if v["load"]["profile"] not in ("constant", "ramp", "sine"):
        raise ConfigError("load.profile must be 'constant', 'ramp' or 'sine'")
    if v["run"]["step_order"] not in ("uz", "zu"):
        raise ConfigError("run.step_order must be 'uz' or 'zu'")
    if v["run"]["samples"] < 1:
        raise ConfigError("run.samples must be >= 1")
    if v["run"]["exclusion_steps"] < 0:
        raise ConfigError("run.exclusion_steps must be >= 0")
    if min(v["interface"]["a0"], v["interface"]["a1"], v["interface"]["b"]) < 0:
        raise ConfigError("interface coefficients a0, a1, b must be >= 0")


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, list):
        return "[" + ", ".join(_format_value(x) for x in value) + "]"
    raise AssertionError(f"cannot format {value!r}")


def dump_config(cfg: RunConfig) -> str:
    """Normalized, reparseable dump (fixed section and key order)."""
    lines = []
    for section in _SECTION_ORDER:
        lines.append(f"[{section}]")
        for key in _SCHEMA[section]:
            lines.append(f"{key} = {_format_value(cfg.values[section][key])}")
        lines.append("")
    return "\n".join(lines)
