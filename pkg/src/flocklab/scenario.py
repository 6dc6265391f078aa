"""Declarative scenario files: validation, materialization, wiring.

A scenario is a UTF-8 JSON document naming a model variant, its parameter
blocks, the initial condition (explicit or generated), integrator settings,
and an optional certificate block.  Validation is strict: unknown keys are
errors, every diagnostic carries the JSON path to the offending field.

Materialization resolves every random choice (generated initial states,
seeded coupling offsets, seeded repulsion coefficients) from independent
substreams of one master seed, so a scenario plus a seed pins the whole
run.  Substream layout: np.random.default_rng([*seed_path, block]) with one
block id per randomised quantity.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coupling import (
    ConstantCoupling,
    CouplingModel,
    Envelope,
    ModulatedCoupling,
    PowerLawCoupling,
    envelope_of,
)
from .certify import (
    CollisionCertificate,
    StandardCertificate,
    SyncCertificate,
    certify_collision,
    certify_standard,
    certify_sync,
)
from .dynamics import (
    BUILTIN_DYNAMICS,
    InternalDynamics,
    RepulsionModel,
    k_region,
    logistic_cosine_envelope_bound,
    zero_dynamics,
)
from .integrate import IntegratorConfig
from .models import ModelSpec
from .state import FlockState, min_pair_distance_sq, spread

VARIANTS = ("baseline", "sync", "collision_free")
K_SOURCES = ("region", "trajectory", "user")

# rng substream ids, one per randomised block
_BLOCK_X = 0
_BLOCK_V = 1
_BLOCK_BETA = 2
_BLOCK_REPULSION = 3

_REJECTION_BUDGET = 10_000
_SEPARATION_HEADROOM = 1.1
_SPREAD_MATCH_TOL = 1e-12


class ScenarioError(ValueError):
    """Scenario failed validation; `diagnostics` lists path-tagged messages."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


@dataclass(frozen=True)
class CertificateSettings:
    k_source: Optional[str] = None
    k_value: Optional[float] = None
    relaxed: bool = False


@dataclass(eq=False)
class Scenario:
    """Fully materialized scenario: every random draw already resolved."""

    name: str
    variant: str
    n: int
    r: int
    seed: int
    coupling: CouplingModel
    internal: Optional[InternalDynamics]
    repulsion: Optional[RepulsionModel]
    x0: np.ndarray
    v0: np.ndarray
    integrator: IntegratorConfig
    certificate: Optional[CertificateSettings]
    doc: dict  # normalized source document (defaults filled)

    def initial_state(self) -> FlockState:
        return FlockState(t=self.integrator.t0, x=self.x0, v=self.v0)

    def model_spec(self) -> ModelSpec:
        return ModelSpec(
            variant=self.variant,
            n=self.n,
            r=self.r,
            coupling=self.coupling,
            internal=self.internal,
            repulsion=self.repulsion,
        )

    def envelope(self) -> Envelope:
        return envelope_of(self.coupling)


# ---------------------------------------------------------------------------
# validation


def _expect_keys(diags, path, block, required, optional):
    for key in block:
        if key not in required and key not in optional:
            diags.append(f"{path}{key}: unknown key")
    for key in required:
        if key not in block:
            diags.append(f"{path}{key}: required key missing")


def _number(diags, path, block, key, lo=None, hi=None, lo_open=False, nullable=False):
    if key not in block:
        return None
    val = block[key]
    if val is None and nullable:  # explicit null means "use the default"
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        diags.append(f"{path}{key}: must be a number")
        return None
    val = float(val)
    if not math.isfinite(val):
        diags.append(f"{path}{key}: must be finite")
        return None
    if lo is not None and (val <= lo if lo_open else val < lo):
        diags.append(f"{path}{key}: must be {'>' if lo_open else '>='} {lo}")
        return None
    if hi is not None and val > hi:
        diags.append(f"{path}{key}: must be <= {hi}")
        return None
    return val


def _integer(diags, path, block, key, lo=None):
    if key not in block:
        return None
    val = block[key]
    if isinstance(val, bool) or not isinstance(val, int):
        diags.append(f"{path}{key}: must be an integer")
        return None
    if lo is not None and val < lo:
        diags.append(f"{path}{key}: must be >= {lo}")
        return None
    return val


def _matrix_or_none(diags, path, values, n):
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError):
        diags.append(f"{path}: must be an {n}x{n} matrix of numbers")
        return None
    if arr.shape != (n, n):
        diags.append(f"{path}: must have shape ({n}, {n})")
        return None
    if not np.isfinite(arr).all():
        diags.append(f"{path}: entries must be finite")
        return None
    return arr


def _validate_coupling(diags, block, n):
    path = "coupling."
    family = block.get("family")
    if family == "power_law":
        _expect_keys(diags, path, block, ["family", "gain", "sigma", "exponent"], [])
        _number(diags, path, block, "gain", lo=0.0, lo_open=True)
        _number(diags, path, block, "sigma", lo=0.0, lo_open=True)
        _number(diags, path, block, "exponent", lo=0.0, lo_open=True)
    elif family == "modulated":
        _expect_keys(diags, path, block, ["family", "w", "delta", "beta"], [])
        _number(diags, path, block, "w", lo=0.0, lo_open=True)
        _number(diags, path, block, "delta", lo=0.0)
        beta = block.get("beta")
        if not isinstance(beta, dict):
            diags.append(f"{path}beta: must be an object")
        else:
            _validate_draw_spec(diags, f"{path}beta.", beta, n, lo_limit=0.0, hi_limit=math.sqrt(2.0))
    elif family == "constant":
        _expect_keys(diags, path, block, ["family", "w"], [])
        _number(diags, path, block, "w", lo=0.0, lo_open=True)
    elif family is None:
        diags.append(f"{path}family: required key missing")
    else:
        diags.append(f"{path}family: unknown family {family!r}")


def _validate_draw_spec(diags, path, block, n, lo_limit, hi_limit):
    """constant | explicit | seeded_uniform blocks for matrix-valued params."""
    mode = block.get("mode")
    if mode == "constant":
        _expect_keys(diags, path, block, ["mode", "value"], [])
        val = _number(diags, path, block, "value", lo=lo_limit, lo_open=True)
        if val is not None and val >= hi_limit:
            diags.append(f"{path}value: must be < {hi_limit}")
    elif mode == "explicit":
        _expect_keys(diags, path, block, ["mode", "values"], [])
        if "values" in block:
            arr = _matrix_or_none(diags, f"{path}values", block["values"], n)
            if arr is not None and n > 1:
                off = arr[~np.eye(n, dtype=bool)]
                if not ((off > lo_limit) & (off < hi_limit)).all():
                    diags.append(
                        f"{path}values: off-diagonal entries must lie in ({lo_limit}, {hi_limit})"
                    )
    elif mode == "seeded_uniform":
        _expect_keys(diags, path, block, ["mode", "lo", "hi"], [])
        lo = _number(diags, path, block, "lo", lo=lo_limit, lo_open=True)
        hi = _number(diags, path, block, "hi", lo=lo_limit, hi=hi_limit, lo_open=True)
        if lo is not None and hi is not None and not lo < hi:
            diags.append(f"{path}hi: must exceed lo")
    elif mode is None:
        diags.append(f"{path}mode: required key missing")
    else:
        diags.append(f"{path}mode: unknown mode {mode!r}")


def _validate_vectors(diags, path, values, n, r):
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError):
        diags.append(f"{path}: must be numeric")
        return None
    if r == 1 and arr.shape == (n,):
        arr = arr[:, None]
    if arr.shape != (n, r):
        diags.append(f"{path}: must have shape ({n}, {r})")
        return None
    if not np.isfinite(arr).all():
        diags.append(f"{path}: entries must be finite")
        return None
    return arr


def validate(doc) -> list[str]:
    """Full schema check; returns diagnostics (empty list means valid)."""
    diags: list[str] = []
    if not isinstance(doc, dict):
        return ["document: must be a JSON object"]

    _expect_keys(
        diags,
        "",
        doc,
        ["name", "variant", "n", "r", "seed", "coupling", "initial", "integrator"],
        ["internal", "repulsion", "certificate"],
    )
    if "name" in doc and not isinstance(doc["name"], str):
        diags.append("name: must be a string")
    variant = doc.get("variant")
    if variant is not None and variant not in VARIANTS:
        diags.append(f"variant: must be one of {VARIANTS}")
    n = _integer(diags, "", doc, "n", lo=1)
    r = _integer(diags, "", doc, "r", lo=1)
    _integer(diags, "", doc, "seed", lo=0)

    if variant == "collision_free" and isinstance(n, int) and n < 2:
        diags.append("n: collision_free needs at least two agents")

    coupling = doc.get("coupling")
    if isinstance(coupling, dict):
        _validate_coupling(diags, coupling, n if isinstance(n, int) else 0)
    elif coupling is not None:
        diags.append("coupling: must be an object")

    internal = doc.get("internal")
    if variant == "sync" and internal is None:
        diags.append("internal: required for the sync variant")
    if variant in ("baseline", "collision_free") and internal is not None:
        diags.append(f"internal: not allowed for the {variant} variant")
    if isinstance(internal, dict):
        _expect_keys(diags, "internal.", internal, ["name"], ["box"])
        name = internal.get("name")
        if name is not None and name not in BUILTIN_DYNAMICS:
            diags.append(f"internal.name: unknown dynamics {name!r}")
        elif name is not None and isinstance(r, int):
            dim = r if name == "zero" else BUILTIN_DYNAMICS[name]().dim
            if dim != r:
                diags.append(f"internal.name: {name!r} is {dim}-dimensional but r={r}")
        if internal.get("box") is not None and isinstance(r, int):
            box = _validate_vectors(diags, "internal.box", internal["box"], r, 2)
            if box is not None and not (box[:, 0] <= box[:, 1]).all():
                diags.append("internal.box: lower bounds must not exceed upper bounds")
    elif internal is not None:
        diags.append("internal: must be an object")

    repulsion = doc.get("repulsion")
    if variant == "collision_free" and repulsion is None:
        diags.append("repulsion: required for the collision_free variant")
    if variant in ("baseline", "sync") and repulsion is not None:
        diags.append(f"repulsion: not allowed for the {variant} variant")
    if isinstance(repulsion, dict):
        _expect_keys(diags, "repulsion.", repulsion, ["d0", "phi", "coeffs"], [])
        _number(diags, "repulsion.", repulsion, "d0", lo=0.0, lo_open=True)
        _number(diags, "repulsion.", repulsion, "phi", lo=1.0, lo_open=True)
        coeffs = repulsion.get("coeffs")
        if isinstance(coeffs, dict):
            _validate_draw_spec(
                diags,
                "repulsion.coeffs.",
                coeffs,
                n if isinstance(n, int) else 0,
                lo_limit=0.0,
                hi_limit=math.inf,
            )
        elif coeffs is not None:
            diags.append("repulsion.coeffs: must be an object")
    elif repulsion is not None:
        diags.append("repulsion: must be an object")

    initial = doc.get("initial")
    if isinstance(initial, dict):
        mode = initial.get("mode")
        if mode == "explicit":
            _expect_keys(diags, "initial.", initial, ["mode", "x", "v"], [])
            if isinstance(n, int) and isinstance(r, int):
                if "x" in initial:
                    _validate_vectors(diags, "initial.x", initial["x"], n, r)
                if "v" in initial:
                    _validate_vectors(diags, "initial.v", initial["v"], n, r)
        elif mode == "generate":
            _expect_keys(
                diags,
                "initial.",
                initial,
                ["mode", "spread_x", "spread_v"],
                ["x_center", "v_center"],
            )
            sx = _number(diags, "initial.", initial, "spread_x", lo=0.0)
            _number(diags, "initial.", initial, "spread_v", lo=0.0)
            for key in ("x_center", "v_center"):
                val = initial.get(key)
                if val is None or (isinstance(val, (int, float)) and not isinstance(val, bool)):
                    continue
                if isinstance(r, int):
                    _validate_vectors(diags, f"initial.{key}", val, r, 1)
            if variant == "collision_free" and sx == 0.0:
                diags.append("initial.spread_x: coincident agents violate the separation precondition")
        elif mode is None:
            diags.append("initial.mode: required key missing")
        else:
            diags.append(f"initial.mode: unknown mode {mode!r}")
    elif initial is not None:
        diags.append("initial: must be an object")

    integ = doc.get("integrator")
    if isinstance(integ, dict):
        _expect_keys(
            diags,
            "integrator.",
            integ,
            ["t_end", "sample_dt"],
            ["t0", "rtol", "atol", "h_init", "h_max", "collision_margin"],
        )
        t_end = _number(diags, "integrator.", integ, "t_end")
        t0 = _number(diags, "integrator.", integ, "t0")
        _number(diags, "integrator.", integ, "sample_dt", lo=0.0, lo_open=True)
        _number(diags, "integrator.", integ, "rtol", lo=0.0, lo_open=True)
        _number(diags, "integrator.", integ, "atol", lo=0.0, lo_open=True)
        _number(diags, "integrator.", integ, "h_init", lo=0.0, lo_open=True, nullable=True)
        _number(diags, "integrator.", integ, "h_max", lo=0.0, lo_open=True, nullable=True)
        _number(diags, "integrator.", integ, "collision_margin", lo=0.0)
        if t_end is not None and t_end <= (t0 if t0 is not None else 0.0):
            diags.append("integrator.t_end: must exceed t0")
    elif integ is not None:
        diags.append("integrator: must be an object")

    cert = doc.get("certificate")
    if isinstance(cert, dict):
        if variant == "sync":
            _expect_keys(diags, "certificate.", cert, ["k_source"], ["k_value", "relaxed"])
            source = cert.get("k_source")
            if source is not None and source not in K_SOURCES:
                diags.append(f"certificate.k_source: must be one of {K_SOURCES}")
            if source == "user":
                if cert.get("k_value") is None:
                    diags.append("certificate.k_value: required when k_source is 'user'")
                else:
                    _number(diags, "certificate.", cert, "k_value", lo=0.0)
            elif cert.get("k_value") is not None:
                diags.append("certificate.k_value: only valid when k_source is 'user'")
            if source == "trajectory" and isinstance(internal, dict):
                if internal.get("name") != "logistic_cosine":
                    diags.append(
                        "certificate.k_source: 'trajectory' needs the logistic_cosine dynamics"
                    )
            if "relaxed" in cert and not isinstance(cert["relaxed"], bool):
                diags.append("certificate.relaxed: must be a boolean")
        else:
            _expect_keys(diags, "certificate.", cert, [], [])
    elif cert is not None:
        diags.append("certificate: must be an object")

    return diags


# ---------------------------------------------------------------------------
# normalization and hashing

_INTEGRATOR_DEFAULTS = {
    "t0": 0.0,
    "rtol": 1e-6,
    "atol": 1e-9,
    "h_init": None,
    "h_max": None,
    "collision_margin": 1e-9,
}


def normalized(doc: dict) -> dict:
    """Deep copy with every optional default made explicit (idempotent)."""
    out = copy.deepcopy(doc)
    integ = dict(_INTEGRATOR_DEFAULTS)
    integ.update(out.get("integrator", {}))
    out["integrator"] = integ
    if "internal" not in out:
        out["internal"] = None
    elif isinstance(out["internal"], dict):
        out["internal"].setdefault("box", None)
    if "repulsion" not in out:
        out["repulsion"] = None
    if "certificate" not in out:
        out["certificate"] = None
    elif isinstance(out["certificate"], dict) and out.get("variant") == "sync":
        out["certificate"].setdefault("k_value", None)
        out["certificate"].setdefault("relaxed", False)
    init = out.get("initial")
    if isinstance(init, dict) and init.get("mode") == "generate":
        init.setdefault("x_center", 0.0)
        init.setdefault("v_center", None)
    return out


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def scenario_sha256(doc: dict) -> str:
    return hashlib.sha256(canonical_json(normalized(doc)).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# materialization


def _substream(seed_path, block: int) -> np.random.Generator:
    return np.random.default_rng([*seed_path, block])


def _rescale_to_spread(z: np.ndarray, target: float) -> np.ndarray:
    center = z.mean(axis=0)
    if target == 0.0:
        return np.tile(center, (z.shape[0], 1))
    current = spread(z)
    if current == 0.0:
        raise ValueError("cannot rescale coincident draws to a positive spread")
    return center + (z - center) * (target / current)


def _draw_matrix(spec: dict, n: int, rng_block, seed_path) -> np.ndarray:
    mode = spec["mode"]
    if mode == "constant":
        m = np.full((n, n), float(spec["value"]))
    elif mode == "explicit":
        m = np.asarray(spec["values"], dtype=float)
    else:
        rng = _substream(seed_path, rng_block)
        m = rng.uniform(float(spec["lo"]), float(spec["hi"]), size=(n, n))
    np.fill_diagonal(m, 1.0)  # diagonal unused downstream
    return m


@dataclass(frozen=True)
class InitialGenerator:
    """Uniform draws rescaled about the centroid to exact target spreads."""

    n: int
    r: int
    spread_x: float
    spread_v: float
    x_center: np.ndarray  # (r,)
    v_center: Optional[np.ndarray]  # ignored when v_box is given
    v_box: Optional[np.ndarray] = None  # (r, 2) containment requirement
    min_sep_sq: Optional[float] = None  # rejection threshold on squared separation


def generate_initial(gen: InitialGenerator, seed_path) -> tuple[np.ndarray, np.ndarray]:
    """Materialize (x0, v0); deterministic given the seed path.

    x is drawn uniform in a spread_x-wide box around x_center; v either in
    the invariant box (so the rescale shrinks and containment survives) or
    in a spread_v-wide box around v_center.  Both are rescaled about their
    centroid to hit the target spread to 1e-12.  Draws violating minimum
    separation or box containment are rejected and retried.
    """
    rng_x = _substream(seed_path, _BLOCK_X)
    rng_v = _substream(seed_path, _BLOCK_V)
    n, r = gen.n, gen.r

    x = None
    lo_x = gen.x_center - 0.5 * gen.spread_x
    hi_x = gen.x_center + 0.5 * gen.spread_x
    for _ in range(_REJECTION_BUDGET):
        cand = _rescale_to_spread(rng_x.uniform(lo_x, hi_x, size=(n, r)), gen.spread_x)
        if gen.min_sep_sq is not None and n > 1:
            sep, _, _ = min_pair_distance_sq(cand)
            if sep <= gen.min_sep_sq:
                continue
        x = cand
        break
    if x is None:
        raise ValueError(
            f"initial positions: no draw met min squared separation {gen.min_sep_sq} "
            f"in {_REJECTION_BUDGET} attempts"
        )

    v = None
    if gen.v_box is not None:
        lo_v, hi_v = gen.v_box[:, 0], gen.v_box[:, 1]
    else:
        center = gen.v_center if gen.v_center is not None else np.zeros(r)
        lo_v = center - 0.5 * gen.spread_v
        hi_v = center + 0.5 * gen.spread_v
    for _ in range(_REJECTION_BUDGET):
        cand = _rescale_to_spread(rng_v.uniform(lo_v, hi_v, size=(n, r)), gen.spread_v)
        if gen.v_box is not None:
            if (cand < gen.v_box[:, 0] - 1e-12).any() or (cand > gen.v_box[:, 1] + 1e-12).any():
                continue
        v = cand
        break
    if v is None:
        raise ValueError(
            f"initial velocities: no draw stayed inside the invariant box with "
            f"spread {gen.spread_v} in {_REJECTION_BUDGET} attempts"
        )
    return x, v


def _as_center(val, r: int) -> np.ndarray:
    if val is None:
        return np.zeros(r)
    if isinstance(val, (int, float)):
        return np.full(r, float(val))
    return np.asarray(val, dtype=float).reshape(r)


def _build_coupling(block: dict, n: int, seed_path) -> CouplingModel:
    family = block["family"]
    if family == "power_law":
        return PowerLawCoupling(
            gain=float(block["gain"]),
            sigma=float(block["sigma"]),
            exponent=float(block["exponent"]),
        )
    if family == "modulated":
        beta = _draw_matrix(block["beta"], n, _BLOCK_BETA, seed_path)
        return ModulatedCoupling(w=float(block["w"]), delta=float(block["delta"]), beta=beta)
    return ConstantCoupling(w=float(block["w"]))


def _build_internal(block, r: int) -> Optional[InternalDynamics]:
    if block is None:
        return None
    name = block["name"]
    dyn = zero_dynamics(r) if name == "zero" else BUILTIN_DYNAMICS[name]()
    box = block.get("box")
    if box is not None:
        dyn = InternalDynamics(
            name=dyn.name,
            dim=dyn.dim,
            g=dyn.g,
            jacobian=dyn.jacobian,
            jacobian_affine=dyn.jacobian_affine,
            box=np.asarray(box, dtype=float),
        )
    return dyn


def _build_repulsion(block, n: int, seed_path) -> Optional[RepulsionModel]:
    if block is None:
        return None
    coeffs = _draw_matrix(block["coeffs"], n, _BLOCK_REPULSION, seed_path)
    return RepulsionModel(d0=float(block["d0"]), phi=float(block["phi"]), coeffs=coeffs)


def materialize(doc: dict, seed_path=None) -> Scenario:
    """Validated document -> Scenario with all draws resolved."""
    diags = validate(doc)
    if diags:
        raise ScenarioError(diags)
    doc = normalized(doc)
    n, r = doc["n"], doc["r"]
    seed = doc["seed"]
    if seed_path is None:
        seed_path = (seed,)

    internal = _build_internal(doc["internal"], r)
    repulsion = _build_repulsion(doc["repulsion"], n, seed_path)
    coupling = _build_coupling(doc["coupling"], n, seed_path)

    init = doc["initial"]
    if init["mode"] == "explicit":
        x0 = np.asarray(init["x"], dtype=float).reshape(n, r)
        v0 = np.asarray(init["v"], dtype=float).reshape(n, r)
    else:
        min_sep = None
        if repulsion is not None:
            min_sep = repulsion.d0 * _SEPARATION_HEADROOM
        v_box = None
        if doc["variant"] == "sync" and internal is not None and internal.box is not None:
            v_box = np.asarray(internal.box, dtype=float)
        gen = InitialGenerator(
            n=n,
            r=r,
            spread_x=float(init["spread_x"]),
            spread_v=float(init["spread_v"]),
            x_center=_as_center(init["x_center"], r),
            v_center=None if init["v_center"] is None else _as_center(init["v_center"], r),
            v_box=v_box,
            min_sep_sq=min_sep,
        )
        x0, v0 = generate_initial(gen, seed_path)
        for target, got in ((gen.spread_x, spread(x0)), (gen.spread_v, spread(v0))):
            if abs(got - target) > _SPREAD_MATCH_TOL * max(1.0, target):
                raise ValueError(f"generated spread {got} missed target {target}")

    integ = doc["integrator"]
    cfg = IntegratorConfig(
        t_end=float(integ["t_end"]),
        sample_dt=float(integ["sample_dt"]),
        t0=float(integ["t0"]),
        rtol=float(integ["rtol"]),
        atol=float(integ["atol"]),
        h_init=None if integ["h_init"] is None else float(integ["h_init"]),
        h_max=None if integ["h_max"] is None else float(integ["h_max"]),
        collision_margin=float(integ["collision_margin"]),
    )

    cert_block = doc["certificate"]
    cert = None
    if cert_block is not None:
        if doc["variant"] == "sync":
            cert = CertificateSettings(
                k_source=cert_block["k_source"],
                k_value=cert_block["k_value"],
                relaxed=cert_block["relaxed"],
            )
        else:
            cert = CertificateSettings()

    return Scenario(
        name=doc["name"],
        variant=doc["variant"],
        n=n,
        r=r,
        seed=seed,
        coupling=coupling,
        internal=internal,
        repulsion=repulsion,
        x0=x0,
        v0=v0,
        integrator=cfg,
        certificate=cert,
        doc=doc,
    )


def load_scenario(text: str, seed_override: Optional[int] = None, seed_path=None) -> Scenario:
    """Parse, validate, and materialize a scenario document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"document: invalid JSON ({exc})"]) from exc
    if seed_override is not None:
        if not isinstance(doc, dict):
            raise ScenarioError(["document: must be a JSON object"])
        doc = {**doc, "seed": seed_override}
    return materialize(doc, seed_path=seed_path)


def load_scenario_file(path, seed_override: Optional[int] = None, seed_path=None) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return load_scenario(text, seed_override=seed_override, seed_path=seed_path)


# ---------------------------------------------------------------------------
# certificates from scenarios


def resolve_k_bound(sc: Scenario) -> tuple[float, str]:
    """K bound for a sync certificate, resolved from the configured source.

    region: exact corner maximum of the row penalties over the invariant
    box (affine Jacobians), a certified a priori bound.  trajectory: the
    closed-form orbit envelope of the logistic-cosine dynamics through the
    largest initial velocity, a diagnostic-grade estimate.  user: taken
    verbatim from the scenario.
    """
    if sc.certificate is None or sc.certificate.k_source is None:
        raise ValueError("scenario has no certificate block with a K source")
    source = sc.certificate.k_source
    if source == "user":
        return float(sc.certificate.k_value), "user"
    if source == "region":
        if sc.internal is None or sc.internal.box is None:
            raise ValueError("region K source needs internal dynamics with an invariant box")
        return k_region(sc.internal), "region"
    # trajectory: logistic_cosine only (validated on load)
    z_top = float(sc.v0.max())
    if not 1.0 < z_top < 2.0:
        raise ValueError("trajectory K source needs initial velocities inside (1, 2)")
    return logistic_cosine_envelope_bound(z_top), "trajectory"


def evaluate_certificate(sc: Scenario):
    """Dispatch to the certificate matching the scenario variant."""
    env = sc.envelope()
    s_x0 = spread(sc.x0)
    s_v0 = spread(sc.v0)
    if sc.variant == "sync":
        k, source = resolve_k_bound(sc)
        return certify_sync(
            env,
            s_x0,
            s_v0,
            sc.n,
            k,
            k_source=source,
            relaxed=sc.certificate.relaxed,
        )
    if sc.variant == "collision_free":
        return certify_collision(env, sc.repulsion, sc.x0, s_v0, sc.n)
    return certify_standard(env, s_x0, s_v0)


CertificateResult = SyncCertificate | CollisionCertificate | StandardCertificate
