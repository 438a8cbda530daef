"""Config documents for the batch front-end.

A config document is a JSON object with three sections:

* ``system``: the diagonal generator and control column, either explicit
  (``eigenvalues`` list) or via a named ``generator`` (``rod``, ``neumann``,
  ``custom_power``); the control column ``b`` is an explicit list or a
  power law ``{"delta": d}``.
* ``kernel``: the memory kernel, ``{"type": "power"|"exponential"|"log"|
  "stieltjes"|"shifted", ...}``.  Optional when a rod or neumann generator
  already determines the memory kernel.
* ``analysis``: the task name plus task parameters and tolerances.

Validation errors carry the dotted path of the offending field.  The
normalized document (defaults filled, complex values as ``{"re", "im"}``
pairs) is what gets hashed into reports, so two configs that resolve to
the same analysis share a hash.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

from .heat_examples import HeatSystemSpec, heat_system
from .kernels import (
    ExponentialKernel,
    ExponentialMixtureKernel,
    Kernel,
    LogKernel,
    PowerKernel,
    ShiftedKernel,
)
from .signals import (
    BoxcarSignal,
    ExponentialSignal,
    FrameSignal,
    PolyExpSignal,
    ScalarSignal,
)
from .systems import DiagonalSystem

__all__ = [
    "SCHEMA_VERSION",
    "TASKS",
    "ConfigDocument",
    "ConfigError",
    "canonical_json",
    "parse_config",
]

SCHEMA_VERSION = 1

TASKS = (
    "admissibility",
    "controllability",
    "simulate",
    "carleson",
    "resolvent",
    "example",
)

_SYSTEM_TASKS = ("admissibility", "controllability", "simulate")
_KERNEL_TASKS = ("admissibility", "simulate", "resolvent")


class ConfigError(ValueError):
    """Schema violation; ``path`` is the dotted field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


@dataclass(frozen=True)
class ConfigDocument:
    """A validated config with constructed objects and the normalized dict."""

    task: str
    system: DiagonalSystem | None
    kernel: Kernel | None
    params: dict[str, Any]
    tolerances: dict[str, float]
    normalized: dict[str, Any] = field(repr=False)

    @property
    def config_hash(self) -> str:
        digest = hashlib.sha256(canonical_json(self.normalized).encode("ascii"))
        return digest.hexdigest()

    def signal(self, spec_key: str = "input") -> ScalarSignal | None:
        spec = self.params.get(spec_key)
        return None if spec is None else _build_signal(spec, f"analysis.{spec_key}")


# ---------------------------------------------------------------------------
# scalar coercion helpers


def _mapping(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected an object, got {type(value).__name__}")
    return value


def _real(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise ConfigError(path, "must be finite")
    return out


def _complex(value: Any, path: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(float(value))
    if isinstance(value, dict):
        extra = set(value) - {"re", "im"}
        if extra:
            raise ConfigError(path, f"unknown keys {sorted(extra)}")
        return complex(
            _real(value.get("re", 0.0), f"{path}.re"),
            _real(value.get("im", 0.0), f"{path}.im"),
        )
    raise ConfigError(path, f'expected a number or {{"re", "im"}}, got {value!r}')


def _int(value: Any, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be >= {minimum}, got {value}")
    return value


def _choice(value: Any, path: str, options: tuple[str, ...]) -> str:
    if value not in options:
        raise ConfigError(path, f"expected one of {list(options)}, got {value!r}")
    return value


def _no_extras(raw: dict, path: str, allowed: set[str]) -> None:
    extra = set(raw) - allowed
    if extra:
        raise ConfigError(path, f"unknown fields {sorted(extra)}")


def _encode_complex(z: complex) -> Any:
    return z.real if z.imag == 0.0 else {"re": z.real, "im": z.imag}


# ---------------------------------------------------------------------------
# kernel section


def _build_kernel(raw: Any, path: str) -> tuple[Kernel, dict]:
    raw = _mapping(raw, path)
    if "type" not in raw:
        raise ConfigError(f"{path}.type", "required")
    kind = _choice(
        raw["type"],
        f"{path}.type",
        ("power", "exponential", "log", "stieltjes", "shifted"),
    )
    try:
        if kind == "power":
            _no_extras(raw, path, {"type", "exponent", "amplitude"})
            if "exponent" not in raw:
                raise ConfigError(f"{path}.exponent", "required")
            exponent = _real(raw["exponent"], f"{path}.exponent")
            amplitude = _real(raw.get("amplitude", 1.0), f"{path}.amplitude")
            kernel: Kernel = PowerKernel(exponent, amplitude)
            norm = {"type": kind, "exponent": exponent, "amplitude": amplitude}
        elif kind == "exponential":
            _no_extras(raw, path, {"type", "amplitude", "rate"})
            if "amplitude" not in raw:
                raise ConfigError(f"{path}.amplitude", "required")
            amplitude = _real(raw["amplitude"], f"{path}.amplitude")
            rate = _real(raw.get("rate", 0.0), f"{path}.rate")
            kernel = ExponentialKernel(amplitude, rate)
            norm = {"type": kind, "amplitude": amplitude, "rate": rate}
        elif kind == "log":
            _no_extras(raw, path, {"type"})
            kernel = LogKernel()
            norm = {"type": kind}
        elif kind == "stieltjes":
            _no_extras(raw, path, {"type", "weights", "rates"})
            for key in ("weights", "rates"):
                if key not in raw:
                    raise ConfigError(f"{path}.{key}", "required")
                if not isinstance(raw[key], list):
                    raise ConfigError(f"{path}.{key}", "expected a list")
            weights = [
                _real(w, f"{path}.weights[{i}]") for i, w in enumerate(raw["weights"])
            ]
            rates = [
                _real(r, f"{path}.rates[{i}]") for i, r in enumerate(raw["rates"])
            ]
            kernel = ExponentialMixtureKernel(tuple(weights), tuple(rates))
            norm = {"type": kind, "weights": weights, "rates": rates}
        else:
            _no_extras(raw, path, {"type", "base", "shift"})
            if "base" not in raw:
                raise ConfigError(f"{path}.base", "required")
            base, base_norm = _build_kernel(raw["base"], f"{path}.base")
            shift = _real(raw.get("shift", 0.0), f"{path}.shift")
            kernel = ShiftedKernel(base, shift)
            norm = {"type": kind, "base": base_norm, "shift": shift}
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc
    return kernel, norm


# ---------------------------------------------------------------------------
# system section


def _build_generator(raw: dict, path: str) -> tuple[list[complex], Kernel | None, dict]:
    if len(raw) != 1:
        raise ConfigError(
            path, "expected exactly one of rod | neumann | custom_power"
        )
    (name, body), = raw.items()
    if name not in ("rod", "neumann", "custom_power"):
        raise ConfigError(f"{path}.{name}", "unknown generator")
    body = _mapping(body, f"{path}.{name}")
    try:
        if name == "rod":
            _no_extras(body, f"{path}.{name}", {"N", "alpha"})
            n = _int(body.get("N"), f"{path}.{name}.N", minimum=1)
            alpha = _real(body.get("alpha", 0.0), f"{path}.{name}.alpha")
            spec = HeatSystemSpec("dirichlet_rod", alpha, 0.0, n)
            sys, kernel = heat_system(spec)
            norm = {"rod": {"N": n, "alpha": alpha}}
        elif name == "neumann":
            _no_extras(body, f"{path}.{name}", {"N", "alpha", "dim", "c_mid"})
            n = _int(body.get("N"), f"{path}.{name}.N", minimum=1)
            alpha = _real(body.get("alpha", 0.0), f"{path}.{name}.alpha")
            dim = _int(body.get("dim", 1), f"{path}.{name}.dim", minimum=1)
            c_mid = _real(body.get("c_mid", math.pi**2), f"{path}.{name}.c_mid")
            spec = HeatSystemSpec("neumann", alpha, 0.0, n, dim, c_mid)
            sys, kernel = heat_system(spec)
            norm = {"neumann": {"N": n, "alpha": alpha, "dim": dim, "c_mid": c_mid}}
        else:
            _no_extras(body, f"{path}.{name}", {"rate", "exponent", "N"})
            rate = _real(body.get("rate"), f"{path}.{name}.rate")
            exponent = _real(body.get("exponent"), f"{path}.{name}.exponent")
            n = _int(body.get("N"), f"{path}.{name}.N", minimum=1)
            if rate <= 0.0:
                raise ConfigError(f"{path}.{name}.rate", "must be positive")
            if exponent <= 0.0:
                raise ConfigError(f"{path}.{name}.exponent", "must be positive")
            eigs = [complex(-rate * k**exponent) for k in range(1, n + 1)]
            return eigs, None, {"custom_power": {
                "rate": rate, "exponent": exponent, "N": n,
            }}
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}.{name}", str(exc)) from exc
    return list(sys.eigenvalues), kernel, norm


def _build_system(
    raw: Any, path: str
) -> tuple[DiagonalSystem, Kernel | None, dict]:
    raw = _mapping(raw, path)
    _no_extras(raw, path, {"eigenvalues", "generator", "b", "condition_number"})
    has_explicit = "eigenvalues" in raw
    has_generator = "generator" in raw
    if has_explicit == has_generator:
        raise ConfigError(
            path, "need exactly one eigenvalue source: eigenvalues | generator"
        )
    default_kernel: Kernel | None = None
    if has_explicit:
        if not isinstance(raw["eigenvalues"], list):
            raise ConfigError(f"{path}.eigenvalues", "expected a list")
        eigs = [
            _complex(z, f"{path}.eigenvalues[{i}]")
            for i, z in enumerate(raw["eigenvalues"])
        ]
        norm_source: dict = {"eigenvalues": [_encode_complex(z) for z in eigs]}
    else:
        eigs, default_kernel, norm_source = _build_generator(
            _mapping(raw["generator"], f"{path}.generator"), f"{path}.generator"
        )
        norm_source = {"generator": norm_source}

    if "b" not in raw:
        raise ConfigError(f"{path}.b", "required")
    b_raw = raw["b"]
    if isinstance(b_raw, list):
        coeffs = [_complex(z, f"{path}.b[{i}]") for i, z in enumerate(b_raw)]
        if len(coeffs) != len(eigs):
            raise ConfigError(
                f"{path}.b",
                f"length {len(coeffs)} does not match {len(eigs)} eigenvalues",
            )
        norm_b: Any = [_encode_complex(z) for z in coeffs]
    elif isinstance(b_raw, dict):
        _no_extras(b_raw, f"{path}.b", {"delta"})
        if "delta" not in b_raw:
            raise ConfigError(f"{path}.b.delta", "required")
        delta = _real(b_raw["delta"], f"{path}.b.delta")
        coeffs = [complex(float(k) ** delta) for k in range(1, len(eigs) + 1)]
        norm_b = {"delta": delta}
    else:
        raise ConfigError(
            f"{path}.b", 'expected a list or a power law {"delta": ...}'
        )

    cond = _real(raw.get("condition_number", 1.0), f"{path}.condition_number")
    try:
        sys = DiagonalSystem(tuple(eigs), tuple(coeffs), cond)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc
    norm = dict(norm_source)
    norm["b"] = norm_b
    norm["condition_number"] = cond
    return sys, default_kernel, norm


# ---------------------------------------------------------------------------
# signals (simulate inputs)


def _build_signal(raw: Any, path: str) -> ScalarSignal:
    raw = _mapping(raw, path)
    if "type" not in raw:
        raise ConfigError(f"{path}.type", "required")
    kind = _choice(
        raw["type"], f"{path}.type", ("exponential", "boxcar", "frame", "polyexp")
    )
    try:
        if kind == "exponential":
            _no_extras(raw, path, {"type", "rate", "amplitude"})
            if "rate" not in raw:
                raise ConfigError(f"{path}.rate", "required")
            return ExponentialSignal(
                _complex(raw["rate"], f"{path}.rate"),
                _complex(raw.get("amplitude", 1.0), f"{path}.amplitude"),
            )
        if kind == "boxcar":
            _no_extras(raw, path, {"type", "start", "end", "height"})
            for key in ("start", "end"):
                if key not in raw:
                    raise ConfigError(f"{path}.{key}", "required")
            return BoxcarSignal(
                _real(raw["start"], f"{path}.start"),
                _real(raw["end"], f"{path}.end"),
                _complex(raw.get("height", 1.0), f"{path}.height"),
            )
        if kind == "frame":
            _no_extras(raw, path, {"type", "lam", "amplitude"})
            if "lam" not in raw:
                raise ConfigError(f"{path}.lam", "required")
            return FrameSignal(
                _complex(raw["lam"], f"{path}.lam"),
                _complex(raw.get("amplitude", 1.0), f"{path}.amplitude"),
            )
        _no_extras(raw, path, {"type", "coefficients", "rate"})
        for key in ("coefficients", "rate"):
            if key not in raw:
                raise ConfigError(f"{path}.{key}", "required")
        if not isinstance(raw["coefficients"], list):
            raise ConfigError(f"{path}.coefficients", "expected a list")
        coeffs = tuple(
            _complex(c, f"{path}.coefficients[{i}]")
            for i, c in enumerate(raw["coefficients"])
        )
        return PolyExpSignal(coeffs, _complex(raw["rate"], f"{path}.rate"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _normalize_signal(raw: Any, path: str) -> dict:
    signal = _build_signal(raw, path)
    if isinstance(signal, ExponentialSignal):
        return {
            "type": "exponential",
            "rate": _encode_complex(signal.rate),
            "amplitude": _encode_complex(signal.amplitude),
        }
    if isinstance(signal, BoxcarSignal):
        return {
            "type": "boxcar",
            "start": signal.start,
            "end": signal.end,
            "height": _encode_complex(signal.height),
        }
    if isinstance(signal, FrameSignal):
        return {
            "type": "frame",
            "lam": _encode_complex(signal.lam),
            "amplitude": _encode_complex(signal.amplitude),
        }
    return {
        "type": "polyexp",
        "coefficients": [_encode_complex(c) for c in signal.coefficients],
        "rate": _encode_complex(signal.rate),
    }


# ---------------------------------------------------------------------------
# analysis params, one table per task

_PARAM_TABLES: dict[str, dict[str, tuple]] = {
    # name -> (kind, default); kind in {real, positive, nonnegative, int,
    # complex, bool, str-choice tuple, "signal", "x0"}
    "admissibility": {
        "omega": ("nonnegative", 0.0),
        "beta": ("positive_or_none", None),
        "beta1": ("positive_or_none", None),
        "beta2": ("positive_or_none", None),
        "horizon": ("positive", 10.0),
        "grid_points": ("int9", 801),
    },
    "controllability": {
        "xi": ("real", 1.0),
        "s": ("real", 0.0),
        "mode": (("exact", "null"), "exact"),
        "tau": ("positive_or_none", None),
        "k_trunc": ("int1_or_none", None),
    },
    "simulate": {
        "horizon": ("positive", 10.0),
        "points": ("int4", 801),
        "x0": ("x0", None),
        "input": ("signal", None),
        "per_modes": ("bool", False),
    },
    "carleson": {
        "gamma": ("positive", 1.0),
        "h_max": ("positive_or_none", None),
        "measure_csv": ("str_or_none", None),
    },
    "resolvent": {
        "eigenvalue": ("complex_or_none", None),
        "t_max": ("positive", 5.0),
        "points": ("int4", 201),
        "method": (
            ("auto", "closed_form", "mittag_leffler", "numeric_inversion"),
            "auto",
        ),
    },
    "example": {
        "name": (("heat",), "heat"),
        "bc": (("dirichlet", "neumann"), "dirichlet"),
        "alpha": ("nonnegative", 0.0),
        "delta": ("real", 0.0),
        "n_modes": ("int1", 400),
        "dim": ("int1", 1),
        "c_mid": ("positive", math.pi**2),
        "h_min": ("positive", 1e2),
        "h_max": ("positive", 1e6),
        "h_count": ("int2", 25),
    },
}


def _coerce_param(kind, value: Any, path: str) -> Any:
    if isinstance(kind, tuple):
        return _choice(value, path, kind)
    if kind == "real":
        return _real(value, path)
    if kind == "positive":
        out = _real(value, path)
        if out <= 0.0:
            raise ConfigError(path, f"must be positive, got {out}")
        return out
    if kind == "nonnegative":
        out = _real(value, path)
        if out < 0.0:
            raise ConfigError(path, f"must be nonnegative, got {out}")
        return out
    if kind == "positive_or_none":
        return None if value is None else _coerce_param("positive", value, path)
    if kind == "complex_or_none":
        return None if value is None else _complex(value, path)
    if kind == "str_or_none":
        if value is None or isinstance(value, str):
            return value
        raise ConfigError(path, f"expected a string, got {value!r}")
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected true/false, got {value!r}")
        return value
    if kind == "int1":
        return _int(value, path, minimum=1)
    if kind == "int1_or_none":
        return None if value is None else _int(value, path, minimum=1)
    if kind == "int2":
        return _int(value, path, minimum=2)
    if kind == "int4":
        return _int(value, path, minimum=4)
    if kind == "int9":
        return _int(value, path, minimum=9)
    if kind == "x0":
        if value is None:
            return None
        if not isinstance(value, list):
            raise ConfigError(path, "expected a list")
        return [_complex(z, f"{path}[{i}]") for i, z in enumerate(value)]
    if kind == "signal":
        return None if value is None else _normalize_signal(value, path)
    raise AssertionError(f"unhandled param kind {kind!r}")


def _encode_param(value: Any) -> Any:
    if isinstance(value, complex):
        return _encode_complex(value)
    if isinstance(value, list):
        return [_encode_param(v) for v in value]
    return value


def _build_analysis(
    raw: Any, task: str | None, path: str
) -> tuple[str, dict, dict, dict]:
    raw = _mapping(raw, path) if raw is not None else {}
    declared = raw.get("task")
    if declared is not None:
        declared = _choice(declared, f"{path}.task", TASKS)
    if task is None:
        if declared is None:
            raise ConfigError(f"{path}.task", "required")
        task = declared
    elif declared is not None and declared != task:
        raise ConfigError(
            f"{path}.task",
            f"config says {declared!r} but the {task!r} subcommand was invoked",
        )
    table = _PARAM_TABLES[task]
    _no_extras(raw, path, {"task", "tolerances", *table})
    params: dict[str, Any] = {}
    for name, (kind, default) in table.items():
        value = raw.get(name, default)
        params[name] = (
            default if value is None else _coerce_param(kind, value, f"{path}.{name}")
        )
    tolerances: dict[str, float] = {}
    tol_raw = raw.get("tolerances")
    if tol_raw is not None:
        tol_raw = _mapping(tol_raw, f"{path}.tolerances")
        for name, value in tol_raw.items():
            tol = _real(value, f"{path}.tolerances.{name}")
            if tol <= 0.0:
                raise ConfigError(
                    f"{path}.tolerances.{name}", f"must be positive, got {tol}"
                )
            tolerances[name] = tol
    norm = {"task": task}
    norm.update({name: _encode_param(params[name]) for name in sorted(table)})
    if tolerances:
        norm["tolerances"] = dict(sorted(tolerances.items()))
    return task, params, tolerances, norm


# ---------------------------------------------------------------------------
# document assembly


def parse_config(raw: Any, task: str | None = None) -> ConfigDocument:
    """Validate a raw JSON object into a :class:`ConfigDocument`.

    ``task`` is the invoked subcommand; it fills a missing ``analysis.task``
    and must agree with an explicit one.
    """
    raw = _mapping(raw, "config")
    _no_extras(raw, "config", {"schema_version", "system", "kernel", "analysis"})
    if "schema_version" not in raw:
        raise ConfigError("schema_version", "required")
    version = raw["schema_version"]
    if version != SCHEMA_VERSION:
        raise ConfigError(
            "schema_version", f"expected {SCHEMA_VERSION}, got {version!r}"
        )

    task, params, tolerances, norm_analysis = _build_analysis(
        raw.get("analysis"), task, "analysis"
    )

    system = default_kernel = None
    norm_system = None
    if raw.get("system") is not None:
        system, default_kernel, norm_system = _build_system(raw["system"], "system")

    kernel = None
    norm_kernel = None
    if raw.get("kernel") is not None:
        kernel, norm_kernel = _build_kernel(raw["kernel"], "kernel")
    elif default_kernel is not None:
        kernel = default_kernel
        norm_kernel = {
            "type": "power",
            "exponent": default_kernel.exponent,
            "amplitude": default_kernel.amplitude,
        }

    needs_system = task in _SYSTEM_TASKS or (
        task == "carleson" and params.get("measure_csv") is None
    )
    if needs_system and system is None:
        raise ConfigError("system", f"required for the {task!r} task")
    if task in _KERNEL_TASKS and kernel is None:
        raise ConfigError("kernel", f"required for the {task!r} task")
    if task == "controllability" and params["mode"] == "null" and params["tau"] is None:
        raise ConfigError("analysis.tau", 'required when mode is "null"')
    if task == "resolvent" and params["eigenvalue"] is None and system is None:
        raise ConfigError(
            "analysis.eigenvalue", "required when the config has no system"
        )

    normalized: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "analysis": norm_analysis,
    }
    if norm_system is not None:
        normalized["system"] = norm_system
    if norm_kernel is not None:
        normalized["kernel"] = norm_kernel
    return ConfigDocument(
        task=task,
        system=system,
        kernel=kernel,
        params=params,
        tolerances=tolerances,
        normalized=normalized,
    )
