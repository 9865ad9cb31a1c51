"""Flat key = value run configuration with one section per concern.

Example::

    [protocol]
    kind = bell_odd
    engine = effective,analytic   ; optional second engine = agreement reference
    measure_basis = bare          ; ecs only

    [params]
    g_a_hz = 50e3                 ; g / 2pi in Hz (stored internally in rad/s)
    g_b_hz = 50e3
    omega_over_g = 100
    alpha = 1.0                   ; ecs target amplitude, sets t_a and t_b

    [dims]
    n_a = auto
    n_b = auto

    [noise]
    enabled = false
    kappa_a = 10.0
    kappa_b = 10.0
    gamma_atom = 33.3333

    [output]
    format = json
    path = result.json

    [sweep]
    axis_1 = omega_over_g
    values_1 = 20,50,100

Frequencies may be given either as ``*_hz`` (cyclic, multiplied by 2 pi) or
directly in rad/s; durations are seconds.  Detunings default to the
resonance condition of the protocol's leg generators and can be overridden
explicitly.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

from .errors import ConfigurationError
from .hilbert import SystemDims
from .models import ProtocolParams
from .propagate import NoiseParams
from .protocols import Engine, ProtocolKind

__all__ = ["SweepAxis", "RunConfig", "load_config", "SWEEPABLE_KEYS"]

TWO_PI = 2.0 * math.pi

_PARAM_KEYS = {
    "g_a_hz", "g_b_hz", "g_a", "g_b",
    "omega_over_g", "omega_a", "omega_b",
    "delta_a", "delta_b", "big_delta",
    "alpha", "t_a", "t_b",
    "omega_0", "omega_l", "nu_a", "nu_b",
    "omega_0_hz", "omega_l_hz", "nu_a_hz", "nu_b_hz",
}

SWEEPABLE_KEYS = sorted(_PARAM_KEYS)


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple[float, ...]


@dataclass
class RunConfig:
    """Parsed run description; parameters resolve lazily so sweep axes can
    override individual keys point by point."""

    protocol: ProtocolKind
    engines: tuple[Engine, ...]
    measure_basis: str
    raw_params: dict
    dims: SystemDims | None
    noise: NoiseParams | None
    out_format: str
    out_path: str | None
    sweep: tuple[SweepAxis, ...] = ()
    tolerance: float = 1e-8
    leak_tol: float = 1e-8
    conversions: tuple[str, ...] = field(default_factory=tuple)

    def resolve_params(self, overrides: dict | None = None) -> ProtocolParams:
        raw = dict(self.raw_params)
        if overrides:
            for key, value in overrides.items():
                if key not in _PARAM_KEYS:
                    raise ConfigurationError(f"unknown sweep parameter {key!r}")
                raw[key] = value
        return _build_params(self.protocol, raw)


def _get_float(section, key, parser_path) -> float:
    text = section[key]
    try:
        return float(text)
    except ValueError:
        raise ConfigurationError(
            f"{parser_path}: field [{section.name}] {key} = {text!r} is not a number"
        ) from None


def _cyclic_or_angular(raw: dict, base: str) -> float | None:
    """Resolve a frequency given as either <base> (rad/s) or <base>_hz."""
    if base in raw and f"{base}_hz" in raw:
        raise ConfigurationError(f"give either {base} or {base}_hz, not both")
    if base in raw:
        return float(raw[base])
    if f"{base}_hz" in raw:
        return TWO_PI * float(raw[f"{base}_hz"])
    return None


def _build_params(protocol: ProtocolKind, raw: dict) -> ProtocolParams:
    g_a = _cyclic_or_angular(raw, "g_a")
    g_b = _cyclic_or_angular(raw, "g_b")
    if g_a is None or g_b is None:
        raise ConfigurationError("params must define the couplings (g_a / g_a_hz and g_b / g_b_hz)")

    ratio = float(raw.get("omega_over_g", 100.0))
    omega_a = float(raw["omega_a"]) if "omega_a" in raw else ratio * g_a
    omega_b = float(raw["omega_b"]) if "omega_b" in raw else ratio * g_b

    # leg resonance defaults; explicit delta_a / delta_b override
    if protocol is ProtocolKind.ECS:
        default_da, default_db = 0.0, 0.0
    elif protocol is ProtocolKind.BELL_ODD:
        default_da, default_db = 2.0 * omega_a, 2.0 * omega_b
    else:
        default_da, default_db = 2.0 * omega_a, -2.0 * omega_b
    delta_a = float(raw.get("delta_a", default_da))
    delta_b = float(raw.get("delta_b", default_db))

    if protocol is ProtocolKind.ECS:
        if "alpha" in raw:
            alpha = float(raw["alpha"])
            default_ta, default_tb = 2.0 * alpha / g_a, 2.0 * alpha / g_b
        else:
            default_ta = default_tb = None
    else:
        default_ta, default_tb = math.pi / (2.0 * g_a), math.pi / g_b
    t_a = float(raw["t_a"]) if "t_a" in raw else default_ta
    t_b = float(raw["t_b"]) if "t_b" in raw else default_tb
    if t_a is None or t_b is None:
        raise ConfigurationError("ecs runs need either alpha or explicit t_a and t_b")

    return ProtocolParams(
        g_a=g_a,
        g_b=g_b,
        omega_a=omega_a,
        omega_b=omega_b,
        delta_a=delta_a,
        delta_b=delta_b,
        big_delta=float(raw.get("big_delta", 0.0)),
        t_a=t_a,
        t_b=t_b,
        omega_0=_cyclic_or_angular(raw, "omega_0"),
        omega_l=_cyclic_or_angular(raw, "omega_l"),
        nu_a=_cyclic_or_angular(raw, "nu_a"),
        nu_b=_cyclic_or_angular(raw, "nu_b"),
    )


def _parse_values(text: str, path: str, key: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text and "," not in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigurationError(f"{path}: {key} range must be start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(float(parts[2]))
        if count < 1:
            raise ConfigurationError(f"{path}: {key} range count must be >= 1")
        if count == 1:
            return (start,)
        step = (stop - start) / (count - 1)
        return tuple(start + i * step for i in range(count))
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigurationError(f"{path}: {key} = {text!r} is not a comma list of numbers") from None


def load_config(path: str) -> RunConfig:
    """Parse and validate a run configuration file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh, source=path)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigurationError(f"config parse error: {exc}") from exc

    known_sections = {"protocol", "params", "dims", "noise", "output", "sweep", "run"}
    for section in parser.sections():
        if section not in known_sections:
            raise ConfigurationError(f"{path}: unknown section [{section}]")

    if "protocol" not in parser or "kind" not in parser["protocol"]:
        raise ConfigurationError(f"{path}: missing [protocol] kind")
    kind_text = parser["protocol"]["kind"].strip().lower()
    try:
        protocol = ProtocolKind(kind_text)
    except ValueError:
        raise ConfigurationError(
            f"{path}: [protocol] kind = {kind_text!r}; expected one of "
            f"{[k.value for k in ProtocolKind]}"
        ) from None

    engine_text = parser["protocol"].get("engine", "effective")
    engines = []
    for token in engine_text.split(","):
        token = token.strip().lower()
        if not token:
            continue
        try:
            engines.append(Engine(token))
        except ValueError:
            raise ConfigurationError(
                f"{path}: [protocol] engine = {token!r}; expected one of "
                f"{[e.value for e in Engine]}"
            ) from None
    if not engines or len(engines) > 2:
        raise ConfigurationError(f"{path}: [protocol] engine must list one or two engines")

    measure_basis = parser["protocol"].get("measure_basis", "bare").strip().lower()
    if measure_basis not in ("bare", "none"):
        raise ConfigurationError(f"{path}: measure_basis must be 'bare' or 'none'")

    if "params" not in parser:
        raise ConfigurationError(f"{path}: missing [params] section")
    raw_params: dict = {}
    conversions = []
    for key in parser["params"]:
        if key not in _PARAM_KEYS:
            raise ConfigurationError(
                f"{path}: unknown [params] field {key!r}; known fields: {SWEEPABLE_KEYS}"
            )
        raw_params[key] = _get_float(parser["params"], key, path)
        if key.endswith("_hz"):
            conversions.append(
                f"{key} = {raw_params[key]:g} Hz -> {key[:-3]} = {TWO_PI * raw_params[key]:.6e} rad/s"
            )
    _build_params(protocol, raw_params)  # fail fast on incomplete parameters

    dims = None
    if "dims" in parser:
        n_a_text = parser["dims"].get("n_a", "auto").strip().lower()
        n_b_text = parser["dims"].get("n_b", "auto").strip().lower()
        if (n_a_text == "auto") != (n_b_text == "auto"):
            raise ConfigurationError(f"{path}: set both n_a and n_b or leave both auto")
        if n_a_text != "auto":
            try:
                dims = SystemDims(int(n_a_text), int(n_b_text))
            except ValueError:
                raise ConfigurationError(f"{path}: n_a / n_b must be integers or 'auto'") from None

    noise = None
    if "noise" in parser and parser["noise"].getboolean("enabled", fallback=False):
        noise = NoiseParams(
            kappa_a=float(parser["noise"].get("kappa_a", 0.0)),
            kappa_b=float(parser["noise"].get("kappa_b", 0.0)),
            gamma_atom=float(parser["noise"].get("gamma_atom", 0.0)),
        )

    out_format = "json"
    out_path = None
    if "output" in parser:
        out_format = parser["output"].get("format", "json").strip().lower()
        out_path = parser["output"].get("path", None)
    if out_format not in ("json", "csv"):
        raise ConfigurationError(f"{path}: output format must be 'json' or 'csv'")

    sweep_axes: list[SweepAxis] = []
    if "sweep" in parser:
        for i in (1, 2):
            axis_key, values_key = f"axis_{i}", f"values_{i}"
            if axis_key in parser["sweep"]:
                name = parser["sweep"][axis_key].strip()
                if name not in _PARAM_KEYS:
                    raise ConfigurationError(
                        f"{path}: sweep axis {name!r} is not a parameter; "
                        f"known: {SWEEPABLE_KEYS}"
                    )
                if values_key not in parser["sweep"]:
                    raise ConfigurationError(f"{path}: sweep {axis_key} has no {values_key}")
                sweep_axes.append(
                    SweepAxis(name, _parse_values(parser["sweep"][values_key], path, values_key))
                )
        extra = set(parser["sweep"]) - {"axis_1", "values_1", "axis_2", "values_2"}
        if extra:
            raise ConfigurationError(f"{path}: unknown [sweep] fields {sorted(extra)}")

    tolerance = 1e-8
    leak_tol = 1e-8
    if "run" in parser:
        tolerance = float(parser["run"].get("tolerance", tolerance))
        leak_tol = float(parser["run"].get("leak_tol", leak_tol))

    return RunConfig(
        protocol=protocol,
        engines=tuple(engines),
        measure_basis=measure_basis,
        raw_params=raw_params,
        dims=dims,
        noise=noise,
        out_format=out_format,
        out_path=out_path,
        sweep=tuple(sweep_axes),
        tolerance=tolerance,
        leak_tol=leak_tol,
        conversions=tuple(conversions),
    )
