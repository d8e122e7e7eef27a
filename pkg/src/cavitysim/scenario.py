"""Declarative scenario files, builtin figure presets and the run driver.

A scenario is an INI-style document::

    [run]
    name = fig2a
    engine = exact

    [model]
    k = 1
    gamma1 = 1.0
    gamma2 = 0.2

    [prep]
    theta1 = 0
    theta2 = pi/4

    [field]
    kind = binomial
    eta = 0.2
    m = 70

    [time]
    start = 0
    stop = 60
    steps = 2401

    [output]
    observables = inversion

Numeric values may be arithmetic expressions over numbers, ``pi``, ``e`` and
``sqrt(...)``.  Times are the scaled times ``gamma1 t``.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
import ast
import hashlib
import io
import json
import math
import os
import re
from pathlib import Path
import time as _time

import numpy as np

from . import __version__, kernels
from .dispersive import DispersiveEngine
from .entanglement import branch_qubit_states, concurrence_analytic, concurrence_slice
from .field import binomial_amplitudes, coherent_amplitudes, number_state
from .model import AtomPrep, ExactEngine, ModelParams
from .observables import grid_axes, husimi_q, inversions_from_qubits, reduce_to_field, reduce_to_qubits

ENGINES = ("exact", "dispersive")
OBSERVABLES = ("inversion", "inversion_per_qubit", "q_grid", "concurrence_surface")
FIELD_KINDS = ("binomial", "number", "coherent")
CONCURRENCE_METHODS = ("wootters", "closed_form")
SECTIONS = ("run", "model", "prep", "field", "time", "output")
REQUIRED = {
    "model": ("k", "gamma1", "gamma2"),
    "prep": ("theta1", "theta2"),
    "field": ("kind",),
    "time": ("start", "stop", "steps"),
    "output": ("observables",),
}
FIELD_REQUIRED = {"binomial": ("eta", "m"), "number": ("m",), "coherent": ("alpha",)}
CSV_FORMAT = "%.17g"


class ScenarioError(ValueError):
    """Invalid scenario text; ``line`` is 1-based, or None when not tied to a line."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


# ---------------------------------------------------------------------------
# value parsing
# ---------------------------------------------------------------------------

_NAMES = {"pi": math.pi, "e": math.e, "inf": math.inf}
_FUNCS = {"sqrt": math.sqrt}
_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a ** b,
}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) \
            and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS \
            and len(node.args) == 1 and not node.keywords:
        return _FUNCS[node.func.id](_eval_node(node.args[0]))
    raise ValueError(f"unsupported expression element {ast.dump(node)[:40]}")


def evaluate(text):
    """Numeric value of a restricted arithmetic expression."""
    try:
        value = _eval_node(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError, TypeError) as exc:
        raise ValueError(f"cannot evaluate {text!r}: {exc}") from None
    if isinstance(value, complex) and value.imag == 0.0:
        value = value.real
    return value


# ---------------------------------------------------------------------------
# scenario types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldSpec:
    kind: str = "binomial"
    eta: float | None = None
    m: int | None = None
    alpha: complex | None = None
    n_max: int | None = None

    def build(self):
        if self.kind == "binomial":
            return binomial_amplitudes(self.eta, self.m)
        if self.kind == "number":
            return number_state(self.m, self.n_max)
        return coherent_amplitudes(self.alpha, self.n_max)


@dataclass(frozen=True)
class TimeGrid:
    start: float = 0.0
    stop: float = 1.0
    steps: int = 2

    def values(self):
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class QGridRequest:
    at_time: float | None = None
    points: int = 201
    half_width: float = 12.0


@dataclass(frozen=True)
class ConcurrenceRequest:
    theta_start: float = -math.pi
    theta_stop: float = math.pi
    theta_steps: int = 49
    method: str = "wootters"

    def thetas(self):
        return np.linspace(self.theta_start, self.theta_stop, self.theta_steps)


@dataclass(frozen=True)
class Scenario:
    params: ModelParams
    prep: AtomPrep
    field: FieldSpec
    time: TimeGrid
    outputs: tuple
    q_grid: QGridRequest = field(default_factory=QGridRequest)
    concurrence: ConcurrenceRequest = field(default_factory=ConcurrenceRequest)
    engine: str = "exact"
    name: str = ""


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

_MODEL_KEYS = ("k", "gamma1", "gamma2", "delta", "beta1_1", "beta1_2", "beta2_1", "beta2_2",
               "omega", "omega1", "omega2", "beta1", "stark_ratio")
_KEYS = {
    "run": ("name", "engine"),
    "model": _MODEL_KEYS,
    "prep": ("theta1", "theta2"),
    "field": ("kind", "eta", "m", "alpha", "n_max"),
    "time": ("start", "stop", "steps"),
    "output": ("observables", "q_time", "q_points", "q_half_width", "theta_start",
               "theta_stop", "theta_steps", "concurrence_method"),
}
_TEXT_KEYS = {("run", "name"), ("run", "engine"), ("field", "kind"), ("output", "observables"),
              ("output", "concurrence_method")}
_INT_KEYS = {("model", "k"), ("field", "m"), ("field", "n_max"), ("time", "steps"),
             ("output", "q_points"), ("output", "theta_steps")}
_COMPLEX_KEYS = {("model", "gamma1"), ("model", "gamma2"), ("field", "alpha")}


_INLINE_COMMENT = re.compile(r"\s[#;]")


def _read_sections(text):
    """``{section: {key: (raw_value, line)}}`` plus section header lines."""
    data, headers = {}, {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        # a '#' or ';' preceded by whitespace starts a trailing comment
        line = _INLINE_COMMENT.split(raw, 1)[0].strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioError(f"malformed section header {line!r}", lineno)
            current = line[1:-1].strip().lower()
            if current not in SECTIONS:
                raise ScenarioError(f"unknown section [{current}]; expected one of {', '.join(SECTIONS)}", lineno)
            if current in data:
                raise ScenarioError(f"duplicate section [{current}]", lineno)
            data[current] = {}
            headers[current] = lineno
            continue
        if "=" not in line:
            raise ScenarioError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ScenarioError("key outside of any section", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in _KEYS[current]:
            raise ScenarioError(f"unknown key {key!r} in [{current}]; allowed: {', '.join(_KEYS[current])}", lineno)
        if key in data[current]:
            raise ScenarioError(f"duplicate key {key!r} in [{current}]", lineno)
        data[current][key] = (value, lineno)
    return data, headers


def _from_mapping(data, headers):
    missing = [f"[{sec}] {key}" for sec, keys in REQUIRED.items() for key in keys
               if key not in data.get(sec, {})]
    if missing:
        raise ScenarioError("missing required keys: " + ", ".join(missing))

    def get(sec, key, default=None):
        if key not in data.get(sec, {}):
            return default
        raw, line = data[sec][key]
        if (sec, key) in _TEXT_KEYS:
            return str(raw).strip()
        try:
            value = raw if isinstance(raw, (int, float, complex)) and not isinstance(raw, bool) \
                else evaluate(str(raw))
        except ValueError as exc:
            raise ScenarioError(str(exc), line) from None
        if isinstance(value, complex) and (sec, key) not in _COMPLEX_KEYS:
            raise ScenarioError(f"{key} must be real, got {value!r}", line)
        if isinstance(value, complex):
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ScenarioError(f"{key} must be finite", line)
        elif not math.isfinite(value):
            raise ScenarioError(f"{key} must be finite", line)
        if (sec, key) in _INT_KEYS:
            if value != int(value):
                raise ScenarioError(f"{key} must be an integer, got {value!r}", line)
            return int(value)
        return value

    def line_of(sec, key):
        if key in data.get(sec, {}):
            return data[sec][key][1]
        return headers.get(sec)

    def check(cond, message, sec, key):
        if not cond:
            raise ScenarioError(message, line_of(sec, key))

    engine = get("run", "engine", "exact")
    check(engine in ENGINES, f"engine must be one of {ENGINES}, got {engine!r}", "run", "engine")

    # model
    k = get("model", "k")
    check(k >= 1, f"k must be >= 1, got {k}", "model", "k")
    model = {"k": k, "gamma1": get("model", "gamma1"), "gamma2": get("model", "gamma2"),
             "delta": get("model", "delta", 0.0)}
    for key in ("omega", "omega1", "omega2"):
        model[key] = get("model", key)
    explicit = [key for key in ("beta1_1", "beta1_2", "beta2_1", "beta2_2") if key in data["model"]]
    shorthand = [key for key in ("beta1", "stark_ratio") if key in data["model"]]
    if shorthand:
        check(not explicit, "give either beta1/stark_ratio or the four beta coefficients, not both",
              "model", shorthand[0])
        check(len(shorthand) == 2, "beta1 and stark_ratio must be given together", "model", shorthand[0])
        beta1, ratio = get("model", "beta1"), get("model", "stark_ratio")
        check(beta1 >= 0 and ratio >= 0, "beta1 and stark_ratio must be non-negative", "model", "beta1")
        beta2 = ratio * ratio * beta1
        model.update(beta1_1=beta1, beta1_2=beta1, beta2_1=beta2, beta2_2=beta2)
    else:
        for key in ("beta1_1", "beta1_2", "beta2_1", "beta2_2"):
            model[key] = get("model", key, 0.0)
    params = ModelParams(**model)

    prep = AtomPrep(get("prep", "theta1"), get("prep", "theta2"))

    # field
    kind = get("field", "kind").lower()
    check(kind in FIELD_KINDS, f"field kind must be one of {FIELD_KINDS}, got {kind!r}", "field", "kind")
    for key in FIELD_REQUIRED[kind]:
        check(key in data["field"], f"{kind} field needs {key!r}", "field", "kind")
    extra = {"binomial": ("alpha", "n_max"), "number": ("eta", "alpha"), "coherent": ("eta", "m")}[kind]
    for key in extra:
        check(key not in data["field"], f"{key!r} does not apply to a {kind} field", "field", key)
    spec = FieldSpec(kind, get("field", "eta"), get("field", "m"), get("field", "alpha"), get("field", "n_max"))
    if kind == "binomial":
        check(0.0 <= spec.eta <= 1.0, f"eta must lie in [0, 1], got {spec.eta}", "field", "eta")
    if spec.m is not None:
        check(spec.m >= 0, f"m must be >= 0, got {spec.m}", "field", "m")
    if spec.n_max is not None:
        check(spec.n_max >= 0, f"n_max must be >= 0, got {spec.n_max}", "field", "n_max")
        if kind == "number":
            check(spec.n_max >= spec.m, "n_max must be >= m", "field", "n_max")

    tg = TimeGrid(get("time", "start"), get("time", "stop"), get("time", "steps"))
    check(tg.steps >= 2, f"steps must be >= 2, got {tg.steps}", "time", "steps")
    check(tg.start >= 0, f"start must be >= 0, got {tg.start}", "time", "start")
    check(tg.stop > tg.start, f"stop must exceed start ({tg.stop} <= {tg.start})", "time", "stop")

    names = tuple(part.strip() for part in get("output", "observables").split(",") if part.strip())
    check(names, "observables list is empty", "output", "observables")
    for name in names:
        check(name in OBSERVABLES, f"unsupported observable {name!r}; supported: {', '.join(OBSERVABLES)}",
              "output", "observables")
    check(len(set(names)) == len(names), "observables listed twice", "output", "observables")

    q = QGridRequest(get("output", "q_time"), get("output", "q_points", 201),
                     get("output", "q_half_width", 12.0))
    if "q_grid" in names:
        check(q.at_time is not None, "q_grid needs q_time", "output", "observables")
        check(q.at_time >= 0, "q_time must be >= 0", "output", "q_time")
    check(q.points >= 2, "q_points must be >= 2", "output", "q_points")
    check(q.half_width > 0, "q_half_width must be positive", "output", "q_half_width")

    method = get("output", "concurrence_method", "wootters")
    c = ConcurrenceRequest(get("output", "theta_start", -math.pi), get("output", "theta_stop", math.pi),
                           get("output", "theta_steps", 49), method)
    check(method in CONCURRENCE_METHODS, f"concurrence_method must be one of {CONCURRENCE_METHODS}",
          "output", "concurrence_method")
    check(c.theta_steps >= 1, "theta_steps must be >= 1", "output", "theta_steps")
    check(c.theta_stop >= c.theta_start, "theta_stop must not be below theta_start", "output", "theta_stop")
    if "concurrence_surface" in names and method == "closed_form":
        check(prep.theta1 == 0.0, "closed_form concurrence needs theta1 = 0", "prep", "theta1")
        check(complex(params.gamma2).imag == 0.0, "closed_form concurrence needs a real gamma2",
              "model", "gamma2")
    if engine == "dispersive":
        check(complex(params.gamma2).imag == 0.0, "the dispersive engine needs a real gamma2", "model", "gamma2")

    return Scenario(params, prep, spec, tg, names, q, c, engine, get("run", "name", ""))


def parse_scenario(text):
    """Parse and validate INI-style scenario text."""
    try:
        data, headers = _read_sections(text)
        return _from_mapping(data, headers)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None


def parse_scenario_json(text):
    """Same as :func:`parse_scenario` for a JSON object of sections."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, dict):
        raise ScenarioError("JSON scenario must be an object of sections")
    data = {}
    for sec, body in doc.items():
        if sec not in SECTIONS:
            raise ScenarioError(f"unknown section {sec!r}")
        if not isinstance(body, dict):
            raise ScenarioError(f"section {sec!r} must be an object")
        for key in body:
            if key not in _KEYS[sec]:
                raise ScenarioError(f"unknown key {key!r} in {sec!r}")
        data[sec] = {key: (_json_value(v), None) for key, v in body.items()}
    try:
        return _from_mapping(data, {})
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None


def _json_value(v):
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    if isinstance(v, list):
        return ", ".join(str(x) for x in v)
    return v


def _fmt(value):
    if isinstance(value, complex):
        return repr(value.real) if value.imag == 0.0 else repr(value)
    return repr(value)


def _sections(s):
    p = s.params
    out = {
        "run": {"name": s.name, "engine": s.engine},
        "model": {f.name: getattr(p, f.name) for f in fields(p)},
        "prep": {"theta1": s.prep.theta1, "theta2": s.prep.theta2},
        "field": {key: v for key, v in asdict(s.field).items() if v is not None},
        "time": asdict(s.time),
        "output": {
            "observables": ", ".join(s.outputs),
            "q_time": s.q_grid.at_time,
            "q_points": s.q_grid.points,
            "q_half_width": s.q_grid.half_width,
            "theta_start": s.concurrence.theta_start,
            "theta_stop": s.concurrence.theta_stop,
            "theta_steps": s.concurrence.theta_steps,
            "concurrence_method": s.concurrence.method,
        },
    }
    out["model"] = {key: v for key, v in out["model"].items() if v is not None}
    out["output"] = {key: v for key, v in out["output"].items() if v is not None}
    return out


def emit_scenario(s):
    """INI text that :func:`parse_scenario` maps back to ``s``."""
    buf = io.StringIO()
    for sec, body in _sections(s).items():
        buf.write(f"[{sec}]\n")
        for key, value in body.items():
            buf.write(f"{key} = {value if isinstance(value, str) else _fmt(value)}\n")
        buf.write("\n")
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, complex):
        return value.real if value.imag == 0.0 else [value.real, value.imag]
    return value


def scenario_to_dict(s):
    return {sec: {key: _jsonable(v) for key, v in body.items()} for sec, body in _sections(s).items()}


def emit_scenario_json(s):
    return json.dumps(scenario_to_dict(s), indent=2) + "\n"


# ---------------------------------------------------------------------------
# builtin presets
# ---------------------------------------------------------------------------

_INVERSION_TIME = TimeGrid(0.0, 60.0, 2401)
_SURFACE_TIME = TimeGrid(0.0, 20.0, 201)


def _base(name, description, *, k=1, eta=0.2, gamma2=0.2, theta1=0.0, delta=0.0, **kw):
    params = ModelParams(k=k, gamma1=1.0, gamma2=gamma2, delta=delta)
    if "stark_ratio" in kw:
        params = params.with_stark(kw.pop("beta1", 1.0), kw.pop("stark_ratio"))
    s = Scenario(
        params=params,
        prep=AtomPrep(theta1, math.pi / 4),
        field=kw.pop("field", FieldSpec("binomial", eta, 70)),
        time=kw.pop("time", _INVERSION_TIME),
        outputs=kw.pop("outputs", ("inversion",)),
        engine=kw.pop("engine", "exact"),
        name=name,
    )
    if kw:
        s = replace(s, **kw)
    return s, description


def _surface(name, description, field_spec, *, k=1, gamma2=0.2, delta=0.0, method="closed_form",
             engine="dispersive"):
    return _base(name, description, k=k, gamma2=gamma2, delta=delta, field=field_spec,
                 time=_SURFACE_TIME, outputs=("concurrence_surface",), engine=engine,
                 concurrence=ConcurrenceRequest(method=method))


def _presets():
    q_request = QGridRequest(at_time=5 * math.pi / 2)
    q_time = TimeGrid(0.0, 5 * math.pi / 2, 2)
    items = [
        _base("fig2a", "total inversion, k=1, binomial eta=0.2, m=70", eta=0.2),
        _base("fig2b", "total inversion, k=1, binomial eta=0.7, m=70", eta=0.7),
        _base("fig3a", "total inversion, k=2 with Stark shifts r=1 (beta1 = gamma1, assumed)",
              k=2, stark_ratio=1.0, time=TimeGrid(0.0, 20.0, 4001)),
        _base("fig3b", "total inversion, k=2 with Stark shifts r=0.7 (beta1 = gamma1, assumed)",
              k=2, stark_ratio=0.7, time=TimeGrid(0.0, 20.0, 4001)),
        _base("fig4a", "total inversion, qubit 1 mixed at theta1=pi/3, eta=0.2", eta=0.2,
              theta1=math.pi / 3),
        _base("fig4b", "total inversion, qubit 1 mixed at theta1=pi/3, eta=0.7", eta=0.7,
              theta1=math.pi / 3),
        _base("fig5a", "field Q function at gamma1 t = 5 pi/2, eta=0.2", eta=0.2,
              time=q_time, outputs=("q_grid",), q_grid=q_request),
        _base("fig5b", "field Q function at gamma1 t = 5 pi/2, eta=0.7", eta=0.7,
              time=q_time, outputs=("q_grid",), q_grid=q_request),
        _surface("fig6a", "concurrence surface, coherent limit with mean photon number 20",
                 FieldSpec("coherent", alpha=math.sqrt(20.0))),
        _surface("fig6b", "concurrence surface, coherent limit with mean photon number 8",
                 FieldSpec("coherent", alpha=math.sqrt(8.0))),
        _surface("fig7a", "concurrence surface, binomial eta=0.7, m=70", FieldSpec("binomial", 0.7, 70)),
        _surface("fig7b", "concurrence surface, binomial eta=0.9, m=70", FieldSpec("binomial", 0.9, 70)),
        _surface("fig8a", "concurrence surface, eta=0.7, m=70, gamma2/gamma1=0.01",
                 FieldSpec("binomial", 0.7, 70), gamma2=0.01),
        _surface("fig8b", "concurrence surface, eta=0.9, m=70, gamma2/gamma1=0.01",
                 FieldSpec("binomial", 0.9, 70), gamma2=0.01),
        _surface("fig9a", "concurrence surface, k=2, eta=0.7, m=70", FieldSpec("binomial", 0.7, 70), k=2),
        _surface("fig9b", "concurrence surface, k=1, Delta/gamma1=10, exact evolution",
                 FieldSpec("binomial", 0.7, 70), delta=10.0, method="wootters", engine="exact"),
    ]
    return {s.name: (s, desc) for s, desc in items}


PRESETS = _presets()


def list_builtin_figures():
    """``[(name, description)]`` for every builtin preset."""
    return [(name, desc) for name, (_, desc) in PRESETS.items()]


def builtin_scenario(name):
    try:
        return PRESETS[name][0]
    except KeyError:
        raise ScenarioError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def thread_count():
    """Worker threads for time-series evaluation, capped by ``SIM_THREADS``."""
    raw = os.environ.get("SIM_THREADS")
    default = min(4, os.cpu_count() or 1)
    if raw is None:
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ScenarioError(f"SIM_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ScenarioError(f"SIM_THREADS must be >= 1, got {n}")
    return n


def _map(fn, items, threads):
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def make_engine(s, engine=None):
    name = engine or s.engine
    state = s.field.build()
    if name == "exact":
        return ExactEngine(s.params, state)
    if name == "dispersive":
        return DispersiveEngine(s.params, state)
    raise ScenarioError(f"unknown engine {name!r}")


def _write_csv(path, header, rows):
    buf = io.StringIO()
    buf.write(header + "\n")
    for row in rows:
        buf.write(",".join(CSV_FORMAT % v for v in row) + "\n")
    path.write_text(buf.getvalue(), encoding="utf-8", newline="\n")


def _sha256(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_scenario(s, out_dir, engine=None, threads=None):
    """Evaluate every requested observable and write the output files.

    Returns the manifest dictionary, which is also written to
    ``manifest.json``.  All files other than the manifest depend only on the
    scenario, so repeated runs produce identical bytes.
    """
    started = _time.perf_counter()
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc}") from exc
    threads = thread_count() if threads is None else threads
    eng = make_engine(s, engine)
    scale = s.params.time_scale
    taus = s.time.values()
    files = {}
    diagnostics = {"regime_warning": bool(getattr(eng, "regime_warning", False))}

    if "inversion" in s.outputs or "inversion_per_qubit" in s.outputs:
        def sample(tau):
            rho = eng.evolve(s.prep, tau / scale)
            q = reduce_to_qubits(rho)
            return (*inversions_from_qubits(q), rho.trace())

        values = np.array(_map(sample, list(taus), threads))
        diagnostics["max_trace_error"] = float(np.abs(values[:, 3] - 1.0).max())
        if "inversion" in s.outputs:
            _write_csv(out / "inversion.csv", "gamma1_t,value", zip(taus, values[:, 0]))
            files["inversion"] = "inversion.csv"
        if "inversion_per_qubit" in s.outputs:
            _write_csv(out / "inversion_qubit1.csv", "gamma1_t,value", zip(taus, values[:, 1]))
            _write_csv(out / "inversion_qubit2.csv", "gamma1_t,value", zip(taus, values[:, 2]))
            files["inversion_qubit1"] = "inversion_qubit1.csv"
            files["inversion_qubit2"] = "inversion_qubit2.csv"

    if "q_grid" in s.outputs:
        rho = eng.evolve(s.prep, s.q_grid.at_time / scale)
        x, y = grid_axes(s.q_grid.points, s.q_grid.half_width)
        grid = husimi_q(reduce_to_field(rho), x, y)
        doc = {"x_axis": grid.x.tolist(), "y_axis": grid.y.tolist(),
               "values": grid.values.tolist(), "time": s.q_grid.at_time,
               "coverage_ok": grid.coverage_ok}
        (out / "q_grid.json").write_text(json.dumps(doc) + "\n", encoding="utf-8", newline="\n")
        files["q_grid"] = "q_grid.json"
        diagnostics["q_coverage_ok"] = grid.coverage_ok

    if "concurrence_surface" in s.outputs:
        thetas = s.concurrence.thetas()
        if s.concurrence.method == "closed_form":
            state = s.field.build()

            def row(tau):
                return concurrence_analytic(s.params, state, thetas, tau / scale)
        else:
            def row(tau):
                return concurrence_slice(branch_qubit_states(eng, tau / scale), s.prep.theta1, thetas)

        surface = _map(row, list(taus), threads)
        rows = ((tau, th, c) for tau, vals in zip(taus, surface) for th, c in zip(thetas, vals))
        _write_csv(out / "concurrence.csv", "gamma1_t,theta2,concurrence", rows)
        files["concurrence_surface"] = "concurrence.csv"

    manifest = {
        "name": s.name,
        "version": __version__,
        "engine": eng.name,
        "kernel_backend": kernels.BACKEND,
        "scenario": scenario_to_dict(replace(s, engine=eng.name)),
        "initial_field": [[float(a.real), float(a.imag)] for a in s.field.build().amplitudes],
        "files": {key: {"path": name, "sha256": _sha256(out / name)} for key, name in files.items()},
        "diagnostics": diagnostics,
        "threads": threads,
        "wall_time_s": _time.perf_counter() - started,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest
