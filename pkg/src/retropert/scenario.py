"""Scenario files: a declarative TOML document describing one computation.

Top-level keys
--------------

``id``        string, echoed into every result row.
``mode``      one of ``probability``, ``band-rate``, ``harmonic-rate``,
              ``abl``, ``first-order-validity``.

``[system]``  (probability, first-order-validity)
    ``energies``      list of real eigenvalues of H0.
    ``hbar``          optional, default 1.0.
    ``[system.perturbation]``
        ``kind = "constant"``   ``matrix`` (square, entries number or
                                ``[re, im]``), optional ``switch_on_time``.
        ``kind = "harmonic"``   ``v`` (square matrix), ``frequency``,
                                optional ``switch_on_time``.
        ``kind = "sampled"``    ``times`` (strictly increasing),
                                ``matrices`` (one per time), optional
                                ``switch_on_time``.

``[lambda]``  optional everywhere, defaults to zero.
    ``base``              real, default 0.0.
    ``per_final_state``   table mapping state index (string key) to a real.
    ``[lambda.time_profile]``  with ``kind = "constant"`` (``value``),
        ``"sinusoid"`` (``amplitude``, ``frequency``) or ``"sampled"``
        (``times``, ``values``).
    ``composition``       ``"add"`` or ``"multiply"``; required exactly when
                          a time profile is present.

``[[channels]]``  (probability, first-order-validity)
    ``i``, ``f``      state indices, ``i != f``.
    ``window``        ``[t_i, t_f]``.

``[band]``  (band-rate, harmonic-rate)
    ``center_energy``, ``width``, ``count`` (odd), ``coupling`` (number,
    ``[re, im]``, or per-state list).

``[rate]``  (band-rate, harmonic-rate)
    ``t``                elapsed time, > 0.
    ``initial_energy``   default 0.0.
    ``hbar``             default 1.0.
    ``branch``           harmonic-rate only: ``"emission"`` |
                         ``"absorption"``.
    ``drive_frequency``  harmonic-rate only, > 0.

``[abl]``  (abl)
    ``pre``, ``post``    state vectors (entries number or ``[re, im]``);
                         normalized on load.
    ``basis = "computational"``  or one ``[[abl.measurement]]`` block per
    outcome with ``label`` and ``projector``.

``[validity]``  (first-order-validity)
    ``epsilons``     perturbation scale factors, default [0.1, 0.05, 0.025].

``[sweep]``  optional
    ``parameter``    dotted path to a numeric leaf, e.g. ``"lambda.base"``
                     or ``"rate.t"``.
    ``values``       list of numbers substituted at that path.

``[numerics]``  optional overrides
    ``quadrature_rel_tol`` (1e-10), ``quadrature_abs_tol`` (1e-12),
    ``max_subdivisions`` (1000000), ``min_panels_per_period`` (8),
    ``propagator_steps_per_unit_time`` (1000), ``propagator_method``
    ("rk4" | "midpoint-exponential"), ``unitarity_check_tol`` (1e-8).

``[output]``  optional
    ``path``     result file; stdout when omitted.
    ``format``   ``"csv"`` (default) or ``"jsonl"``.

All quantities are plain numbers in hbar-relative units unless ``hbar`` says
otherwise.  Validation returns diagnostics (field path + message) rather than
stopping at the first problem; anything from the physics constructors
(hermiticity, normalization, band invariants) is surfaced the same way.
"""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import RetropertError, SchemaError
from .model import (
    ConstantPerturbation,
    ConstantTimeProfile,
    HarmonicPerturbation,
    LambdaProfile,
    QuantumSystem,
    SampledPerturbation,
    SampledTimeProfile,
    SinusoidTimeProfile,
    TimeWindow,
    TransitionChannel,
    build_system,
)
from .numerics import PropagatorSettings, QuadratureSettings
from .rates import BandSpec
from .tsvf import ProjectiveMeasurement, TwoStateVector

MODES = ("probability", "band-rate", "harmonic-rate", "abl",
         "first-order-validity")

DEFAULT_EPSILONS = (0.1, 0.05, 0.025)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.field}: {self.message}"


@dataclass
class Scenario:
    scenario_id: str
    mode: str
    raw: Dict[str, Any]
    lambda_profile: LambdaProfile
    quadrature: QuadratureSettings
    propagator: PropagatorSettings
    system: Optional[QuantumSystem] = None
    channels: List[TransitionChannel] = field(default_factory=list)
    band: Optional[BandSpec] = None
    rate_time: Optional[float] = None
    rate_initial_energy: float = 0.0
    rate_hbar: float = 1.0
    rate_branch: Optional[str] = None
    rate_drive_frequency: Optional[float] = None
    tsv: Optional[TwoStateVector] = None
    measurement: Optional[ProjectiveMeasurement] = None
    epsilons: Tuple[float, ...] = DEFAULT_EPSILONS
    sweep_parameter: Optional[str] = None
    sweep_values: Tuple[float, ...] = ()
    output_path: Optional[str] = None
    output_format: str = "csv"


def load_raw(path: str) -> Dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read scenario file: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(f"scenario file is not valid TOML: {exc}") from exc


def parse_override(text: str) -> Tuple[str, Any]:
    """``key.path=value`` with the value parsed as TOML (bare words become
    strings)."""
    key, sep, value = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise SchemaError(f"override {text!r} is not of the form key=value")
    value = value.strip()
    try:
        parsed = tomllib.loads(f"v = {value}")["v"]
    except tomllib.TOMLDecodeError:
        parsed = value
    return key, parsed


def get_path(raw: Dict[str, Any], dotted: str) -> Any:
    node: Any = raw
    for part in dotted.split("."):
        if isinstance(node, list):
            node = node[int(part)]
        elif isinstance(node, dict):
            if part not in node:
                raise KeyError(dotted)
            node = node[part]
        else:
            raise KeyError(dotted)
    return node


def set_path(raw: Dict[str, Any], dotted: str, value: Any) -> None:
    parts = dotted.split(".")
    node: Any = raw
    for part in parts[:-1]:
        if isinstance(node, list):
            node = node[int(part)]
        else:
            node = node.setdefault(part, {})
            if not isinstance(node, (dict, list)):
                raise SchemaError(
                    f"cannot descend into {dotted!r}: {part!r} is a scalar"
                )
    last = parts[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


def apply_overrides(raw: Dict[str, Any], overrides) -> Dict[str, Any]:
    out = copy.deepcopy(raw)
    for text in overrides or ():
        key, value = parse_override(text)
        try:
            set_path(out, key, value)
        except (IndexError, ValueError) as exc:
            raise SchemaError(f"cannot apply override {text!r}: {exc}") from exc
    return out


# --------------------------------------------------------------------------
# building blocks


class _Builder:
    def __init__(self, raw: Dict[str, Any]):
        self.raw = raw
        self.diags: List[Diagnostic] = []

    def error(self, where: str, message: str) -> None:
        self.diags.append(Diagnostic("error", where, message))

    def warning(self, where: str, message: str) -> None:
        self.diags.append(Diagnostic("warning", where, message))

    def check_keys(self, block: Dict[str, Any], allowed, where: str) -> None:
        for key in block:
            if key not in allowed:
                self.warning(f"{where}.{key}" if where else key,
                             "unknown key (ignored)")

    def number(self, block, key, where, *, required=False, default=None,
               positive=False, nonneg=False):
        if key not in block:
            if required:
                self.error(f"{where}.{key}", "required number is missing")
            return default
        v = block[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.error(f"{where}.{key}", f"expected a number, got {type(v).__name__}")
            return default
        v = float(v)
        if positive and not v > 0:
            self.error(f"{where}.{key}", f"must be > 0, got {v}")
            return default
        if nonneg and v < 0:
            self.error(f"{where}.{key}", f"must be >= 0, got {v}")
            return default
        return v

    def complex_entry(self, v, where):
        if isinstance(v, bool):
            self.error(where, "expected a number or [re, im], got a boolean")
            return None
        if isinstance(v, (int, float)):
            return complex(v)
        if (isinstance(v, list) and len(v) == 2
                and all(isinstance(x, (int, float)) and not isinstance(x, bool)
                        for x in v)):
            return complex(v[0], v[1])
        self.error(where, "expected a number or a two-element [re, im] list")
        return None

    def complex_matrix(self, data, where):
        if not isinstance(data, list) or not data or not all(
                isinstance(row, list) for row in data):
            self.error(where, "expected a list of rows")
            return None
        rows = []
        for ri, row in enumerate(data):
            parsed = [self.complex_entry(v, f"{where}[{ri}][{ci}]")
                      for ci, v in enumerate(row)]
            if any(p is None for p in parsed):
                return None
            rows.append(parsed)
        if any(len(r) != len(rows) for r in rows):
            self.error(where, "matrix must be square")
            return None
        return np.array(rows, dtype=complex)

    def complex_vector(self, data, where):
        if not isinstance(data, list) or not data:
            self.error(where, "expected a non-empty list")
            return None
        parsed = [self.complex_entry(v, f"{where}[{k}]")
                  for k, v in enumerate(data)]
        if any(p is None for p in parsed):
            return None
        return np.array(parsed, dtype=complex)

    def real_vector(self, data, where):
        if not isinstance(data, list) or not data or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool)
                for v in data):
            self.error(where, "expected a non-empty list of numbers")
            return None
        return np.array(data, dtype=float)


def _build_perturbation(b: _Builder, block: Dict[str, Any]):
    where = "system.perturbation"
    kind = block.get("kind")
    if kind not in ("constant", "harmonic", "sampled"):
        b.error(f"{where}.kind",
                f"must be 'constant', 'harmonic' or 'sampled', got {kind!r}")
        return None
    switch = b.number(block, "switch_on_time", where)
    try:
        if kind == "constant":
            b.check_keys(block, {"kind", "matrix", "switch_on_time"}, where)
            m = b.complex_matrix(block.get("matrix"), f"{where}.matrix")
            if m is None:
                return None
            return ConstantPerturbation(m, switch)
        if kind == "harmonic":
            b.check_keys(block, {"kind", "v", "frequency", "switch_on_time"},
                         where)
            v = b.complex_matrix(block.get("v"), f"{where}.v")
            freq = b.number(block, "frequency", where, required=True)
            if v is None or freq is None:
                return None
            return HarmonicPerturbation(v, freq, switch)
        b.check_keys(block, {"kind", "times", "matrices", "switch_on_time"},
                     where)
        times = b.real_vector(block.get("times"), f"{where}.times")
        mats_raw = block.get("matrices")
        if times is None or not isinstance(mats_raw, list):
            b.error(f"{where}.matrices", "expected a list of matrices")
            return None
        mats = []
        for k, m_raw in enumerate(mats_raw):
            m = b.complex_matrix(m_raw, f"{where}.matrices[{k}]")
            if m is None:
                return None
            mats.append(m)
        return SampledPerturbation(times, np.array(mats), switch)
    except RetropertError as exc:
        b.error(where, str(exc))
        return None


def _build_lambda(b: _Builder, block: Dict[str, Any]) -> LambdaProfile:
    where = "lambda"
    b.check_keys(block, {"base", "per_final_state", "time_profile",
                         "composition"}, where)
    base = b.number(block, "base", where, default=0.0)
    per_state = None
    if "per_final_state" in block:
        table = block["per_final_state"]
        if not isinstance(table, dict):
            b.error(f"{where}.per_final_state", "expected a table of index = value")
        else:
            per_state = {}
            for key, val in table.items():
                try:
                    idx = int(key)
                except ValueError:
                    b.error(f"{where}.per_final_state.{key}",
                            "key must be a state index")
                    continue
                if isinstance(val, bool) or not isinstance(val, (int, float)):
                    b.error(f"{where}.per_final_state.{key}",
                            "value must be a number")
                    continue
                per_state[idx] = float(val)

    profile = None
    if "time_profile" in block:
        tp_block = block["time_profile"]
        tp_where = f"{where}.time_profile"
        if not isinstance(tp_block, dict):
            b.error(tp_where, "expected a table")
        else:
            kind = tp_block.get("kind")
            try:
                if kind == "constant":
                    b.check_keys(tp_block, {"kind", "value"}, tp_where)
                    v = b.number(tp_block, "value", tp_where, required=True)
                    profile = None if v is None else ConstantTimeProfile(v)
                elif kind == "sinusoid":
                    b.check_keys(tp_block, {"kind", "amplitude", "frequency"},
                                 tp_where)
                    amp = b.number(tp_block, "amplitude", tp_where, required=True)
                    freq = b.number(tp_block, "frequency", tp_where, required=True)
                    if amp is not None and freq is not None:
                        profile = SinusoidTimeProfile(amp, freq)
                elif kind == "sampled":
                    b.check_keys(tp_block, {"kind", "times", "values"}, tp_where)
                    times = b.real_vector(tp_block.get("times"), f"{tp_where}.times")
                    values = b.real_vector(tp_block.get("values"),
                                           f"{tp_where}.values")
                    if times is not None and values is not None:
                        profile = SampledTimeProfile(times, values)
                else:
                    b.error(f"{tp_where}.kind",
                            f"must be 'constant', 'sinusoid' or 'sampled', "
                            f"got {kind!r}")
            except RetropertError as exc:
                b.error(tp_where, str(exc))

    composition = block.get("composition")
    if composition is not None and composition not in ("add", "multiply"):
        b.error(f"{where}.composition",
                f"must be 'add' or 'multiply', got {composition!r}")
        composition = None
    if profile is not None and composition is None:
        b.error(f"{where}.composition",
                "required whenever a time profile is present "
                "('add' or 'multiply')")
        profile = None
    if profile is None:
        composition = None

    try:
        result = LambdaProfile(base if base is not None else 0.0, per_state,
                               profile, composition)
    except RetropertError as exc:
        b.error(where, str(exc))
        return LambdaProfile()

    lows = [v for v in ([result.base]
                        + list((per_state or {}).values())) if v < -1.0]
    if lows:
        b.warning(where, "resolved lambda goes below -1; probabilities may "
                         "leave [0, 1] (reported unclamped)")
    return result


def _build_channels(b: _Builder, raw: Dict[str, Any]) -> List[TransitionChannel]:
    blocks = raw.get("channels")
    if not isinstance(blocks, list) or not blocks:
        b.error("channels", "at least one [[channels]] block is required")
        return []
    out = []
    for k, block in enumerate(blocks):
        where = f"channels[{k}]"
        if not isinstance(block, dict):
            b.error(where, "expected a table")
            continue
        b.check_keys(block, {"i", "f", "window"}, where)
        i = block.get("i")
        f = block.get("f")
        win = block.get("window")
        if not isinstance(i, int) or isinstance(i, bool):
            b.error(f"{where}.i", "state index must be an integer")
            continue
        if not isinstance(f, int) or isinstance(f, bool):
            b.error(f"{where}.f", "state index must be an integer")
            continue
        if (not isinstance(win, list) or len(win) != 2
                or not all(isinstance(x, (int, float))
                           and not isinstance(x, bool) for x in win)):
            b.error(f"{where}.window", "expected [t_i, t_f]")
            continue
        try:
            out.append(TransitionChannel(i, f, TimeWindow(win[0], win[1])))
        except RetropertError as exc:
            b.error(where, str(exc))
    return out


def _build_band(b: _Builder, block: Dict[str, Any]) -> Optional[BandSpec]:
    where = "band"
    b.check_keys(block, {"center_energy", "width", "count", "coupling"}, where)
    center = b.number(block, "center_energy", where, required=True)
    width = b.number(block, "width", where, required=True, positive=True)
    count = block.get("count")
    if not isinstance(count, int) or isinstance(count, bool):
        b.error(f"{where}.count", "must be an integer")
        return None
    coupling_raw = block.get("coupling", 1.0)
    if isinstance(coupling_raw, list) and len(coupling_raw) != 2:
        coupling = b.complex_vector(coupling_raw, f"{where}.coupling")
    else:
        coupling = b.complex_entry(coupling_raw, f"{where}.coupling")
    if center is None or width is None or coupling is None:
        return None
    try:
        return BandSpec(center, width, count, coupling)
    except RetropertError as exc:
        b.error(where, str(exc))
        return None


def _build_abl(b: _Builder, block: Dict[str, Any]):
    where = "abl"
    b.check_keys(block, {"pre", "post", "basis", "measurement"}, where)
    pre = b.complex_vector(block.get("pre"), f"{where}.pre")
    post = b.complex_vector(block.get("post"), f"{where}.post")
    if pre is None or post is None:
        return None, None
    for name, vec in (("pre", pre), ("post", post)):
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            b.error(f"{where}.{name}", "vector has zero norm")
            return None, None
    # scenario vectors are normalized on load so hand-written entries like
    # 0.7071 are accepted; the core types themselves stay strict
    pre = pre / np.linalg.norm(pre)
    post = post / np.linalg.norm(post)

    basis = block.get("basis")
    meas_blocks = block.get("measurement")
    if (basis is None) == (meas_blocks is None):
        b.error(where, "exactly one of basis = 'computational' or "
                       "[[abl.measurement]] blocks is required")
        return None, None
    try:
        tsv = TwoStateVector(pre, post)
    except RetropertError as exc:
        b.error(where, str(exc))
        return None, None
    if basis is not None:
        if basis != "computational":
            b.error(f"{where}.basis", f"only 'computational' is supported, "
                                      f"got {basis!r}")
            return None, None
        meas = ProjectiveMeasurement.computational_basis(tsv.dimension)
        return tsv, meas
    if not isinstance(meas_blocks, list) or not meas_blocks:
        b.error(f"{where}.measurement", "expected [[abl.measurement]] blocks")
        return None, None
    outcomes = []
    for k, mb in enumerate(meas_blocks):
        mwhere = f"{where}.measurement[{k}]"
        if not isinstance(mb, dict):
            b.error(mwhere, "expected a table")
            return None, None
        b.check_keys(mb, {"label", "projector"}, mwhere)
        label = mb.get("label", k)
        proj = b.complex_matrix(mb.get("projector"), f"{mwhere}.projector")
        if proj is None:
            return None, None
        outcomes.append((label, proj))
    try:
        meas = ProjectiveMeasurement(outcomes)
    except RetropertError as exc:
        b.error(f"{where}.measurement", str(exc))
        return None, None
    return tsv, meas


def _build_numerics(b: _Builder, block: Dict[str, Any]):
    where = "numerics"
    b.check_keys(block, {"quadrature_rel_tol", "quadrature_abs_tol",
                         "max_subdivisions", "min_panels_per_period",
                         "propagator_steps_per_unit_time", "propagator_method",
                         "unitarity_check_tol"}, where)
    q_kwargs = {}
    rel = b.number(block, "quadrature_rel_tol", where, nonneg=True)
    if rel is not None:
        q_kwargs["rel_tol"] = rel
    abs_ = b.number(block, "quadrature_abs_tol", where, nonneg=True)
    if abs_ is not None:
        q_kwargs["abs_tol"] = abs_
    for key, name in (("max_subdivisions", "max_subdivisions"),
                      ("min_panels_per_period", "min_panels_per_period")):
        if key in block:
            v = block[key]
            if not isinstance(v, int) or isinstance(v, bool):
                b.error(f"{where}.{key}", "must be an integer")
            else:
                q_kwargs[name] = v
    p_kwargs = {}
    if "propagator_steps_per_unit_time" in block:
        v = block["propagator_steps_per_unit_time"]
        if not isinstance(v, int) or isinstance(v, bool):
            b.error(f"{where}.propagator_steps_per_unit_time",
                    "must be an integer")
        else:
            p_kwargs["steps_per_unit_time"] = v
    if "propagator_method" in block:
        p_kwargs["method"] = block["propagator_method"]
    ut = b.number(block, "unitarity_check_tol", where, positive=True)
    if ut is not None:
        p_kwargs["unitarity_check_tol"] = ut
    try:
        quad = QuadratureSettings(**q_kwargs)
    except RetropertError as exc:
        b.error(where, str(exc))
        quad = QuadratureSettings()
    try:
        prop = PropagatorSettings(**p_kwargs)
    except (RetropertError, TypeError) as exc:
        b.error(where, str(exc))
        prop = PropagatorSettings()
    return quad, prop


_TOP_KEYS = {"id", "mode", "system", "lambda", "channels", "band", "rate",
             "abl", "validity", "sweep", "numerics", "output"}

_MODE_BLOCKS = {
    "probability": ("system", "channels"),
    "first-order-validity": ("system", "channels"),
    "band-rate": ("band", "rate"),
    "harmonic-rate": ("band", "rate"),
    "abl": ("abl",),
}


def build_scenario(raw: Dict[str, Any]) -> Tuple[Optional[Scenario],
                                                 List[Diagnostic]]:
    """Validate a raw scenario dict and assemble the typed pieces.

    Returns ``(scenario, diagnostics)``; the scenario is ``None`` whenever
    any diagnostic has severity ``error``.
    """
    b = _Builder(raw)
    if not isinstance(raw, dict):
        b.error("", "scenario must be a table at top level")
        return None, b.diags
    b.check_keys(raw, _TOP_KEYS, "")

    scenario_id = raw.get("id", "scenario")
    if not isinstance(scenario_id, str):
        b.error("id", "must be a string")
        scenario_id = "scenario"

    mode = raw.get("mode")
    if mode not in MODES:
        b.error("mode", f"must be one of {', '.join(MODES)}; got {mode!r}")
        return None, b.diags

    for block_name in _MODE_BLOCKS[mode]:
        if block_name not in raw:
            b.error(block_name, f"required for mode {mode!r} and missing")

    lam = _build_lambda(b, raw.get("lambda", {})) \
        if isinstance(raw.get("lambda", {}), dict) else LambdaProfile()
    quad, prop = _build_numerics(b, raw.get("numerics", {})) \
        if isinstance(raw.get("numerics", {}), dict) else (
            QuadratureSettings(), PropagatorSettings())

    system = None
    channels: List[TransitionChannel] = []
    if "system" in raw and isinstance(raw["system"], dict):
        sys_block = raw["system"]
        b.check_keys(sys_block, {"energies", "hbar", "perturbation"}, "system")
        if "energies" not in sys_block:
            b.error("system.energies", "required list of level energies is missing")
            energies = None
        else:
            energies = b.real_vector(sys_block["energies"], "system.energies")
        hbar = b.number(sys_block, "hbar", "system", default=1.0, positive=True)
        pert_block = sys_block.get("perturbation")
        pert = None
        if not isinstance(pert_block, dict):
            b.error("system.perturbation", "required table is missing")
        else:
            pert = _build_perturbation(b, pert_block)
        if energies is not None and pert is not None and hbar is not None:
            try:
                system = build_system(energies, pert, hbar)
            except RetropertError as exc:
                b.error("system", str(exc))
    elif "system" in raw:
        b.error("system", "expected a table")

    if mode in ("probability", "first-order-validity"):
        channels = _build_channels(b, raw)
        if system is not None:
            for k, ch in enumerate(channels):
                if ch.i >= system.dimension or ch.f >= system.dimension:
                    b.error(f"channels[{k}]",
                            f"state indices ({ch.i}, {ch.f}) exceed system "
                            f"dimension {system.dimension}")

    band = None
    rate_time = None
    rate_e0 = 0.0
    rate_hbar = 1.0
    rate_branch = None
    rate_drive = None
    if mode in ("band-rate", "harmonic-rate"):
        if isinstance(raw.get("band"), dict):
            band = _build_band(b, raw["band"])
        elif "band" in raw:
            b.error("band", "expected a table")
        rate_block = raw.get("rate")
        if isinstance(rate_block, dict):
            allowed = {"t", "initial_energy", "hbar"}
            if mode == "harmonic-rate":
                allowed |= {"branch", "drive_frequency"}
            b.check_keys(rate_block, allowed, "rate")
            rate_time = b.number(rate_block, "t", "rate", required=True,
                                 positive=True)
            rate_e0 = b.number(rate_block, "initial_energy", "rate",
                               default=0.0)
            rate_hbar = b.number(rate_block, "hbar", "rate", default=1.0,
                                 positive=True)
            if mode == "harmonic-rate":
                rate_branch = rate_block.get("branch")
                if rate_branch not in ("emission", "absorption"):
                    b.error("rate.branch",
                            f"must be 'emission' or 'absorption', "
                            f"got {rate_branch!r}")
                rate_drive = b.number(rate_block, "drive_frequency", "rate",
                                      required=True, positive=True)
        elif "rate" in raw:
            b.error("rate", "expected a table")
        if not lam.is_time_independent:
            b.error("lambda", "rates are defined for constant lambda only")

    tsv = None
    meas = None
    if mode == "abl":
        if isinstance(raw.get("abl"), dict):
            tsv, meas = _build_abl(b, raw["abl"])
        elif "abl" in raw:
            b.error("abl", "expected a table")

    epsilons = DEFAULT_EPSILONS
    if mode == "first-order-validity" and isinstance(raw.get("validity"), dict):
        vblock = raw["validity"]
        b.check_keys(vblock, {"epsilons"}, "validity")
        eps = b.real_vector(vblock.get("epsilons", list(DEFAULT_EPSILONS)),
                            "validity.epsilons")
        if eps is not None:
            if np.any(eps <= 0):
                b.error("validity.epsilons", "must all be positive")
            else:
                epsilons = tuple(float(x) for x in eps)

    sweep_param = None
    sweep_values: Tuple[float, ...] = ()
    if isinstance(raw.get("sweep"), dict):
        sblock = raw["sweep"]
        b.check_keys(sblock, {"parameter", "values"}, "sweep")
        sweep_param = sblock.get("parameter")
        if not isinstance(sweep_param, str):
            b.error("sweep.parameter", "must be a dotted path string")
            sweep_param = None
        else:
            try:
                leaf = get_path(raw, sweep_param)
            except (KeyError, IndexError, ValueError):
                b.error("sweep.parameter",
                        f"path {sweep_param!r} does not exist in the scenario")
                sweep_param = None
            else:
                if isinstance(leaf, bool) or not isinstance(leaf, (int, float)):
                    b.error("sweep.parameter",
                            f"path {sweep_param!r} is not a numeric leaf")
                    sweep_param = None
        vals = b.real_vector(sblock.get("values"), "sweep.values")
        if vals is not None:
            sweep_values = tuple(float(x) for x in vals)
        if sweep_param is not None and not sweep_values:
            b.error("sweep.values", "non-empty list of numbers required")
            sweep_param = None
    elif "sweep" in raw:
        b.error("sweep", "expected a table")

    output_path = None
    output_format = "csv"
    if isinstance(raw.get("output"), dict):
        oblock = raw["output"]
        b.check_keys(oblock, {"path", "format"}, "output")
        output_path = oblock.get("path")
        if output_path is not None and not isinstance(output_path, str):
            b.error("output.path", "must be a string")
            output_path = None
        output_format = oblock.get("format", "csv")
        if output_format not in ("csv", "jsonl"):
            b.error("output.format",
                    f"must be 'csv' or 'jsonl', got {output_format!r}")
            output_format = "csv"
    elif "output" in raw:
        b.error("output", "expected a table")

    if any(d.severity == "error" for d in b.diags):
        return None, b.diags

    return Scenario(
        scenario_id=scenario_id,
        mode=mode,
        raw=raw,
        lambda_profile=lam,
        quadrature=quad,
        propagator=prop,
        system=system,
        channels=channels,
        band=band,
        rate_time=rate_time,
        rate_initial_energy=rate_e0 if rate_e0 is not None else 0.0,
        rate_hbar=rate_hbar if rate_hbar is not None else 1.0,
        rate_branch=rate_branch,
        rate_drive_frequency=rate_drive,
        tsv=tsv,
        measurement=meas,
        epsilons=epsilons,
        sweep_parameter=sweep_param,
        sweep_values=sweep_values,
        output_path=output_path,
        output_format=output_format,
    ), b.diags
