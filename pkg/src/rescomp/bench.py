"""Instance generators, oracles, and the configuration-driven runner.

A run is described by one JSON document with the top-level keys

    kind, spaces, maps, sets, weights, subspace, gamma, schedule, seed, output

where ``kind`` is one of ``split-feasibility``, ``common-zero``,
``feasibility-product``, ``wiener`` or ``prox-mixture`` and the entries of
``sets`` are block descriptors whose meaning depends on the kind (convex
sets, operators, Wiener blocks or convex functions; see README).  The
environment variable ``RESCOMP_SEED`` overrides the configured seed.

Exit-code contract of :func:`run`: 0 on success, 1 on structural errors
(unparseable config, dimension mismatches, failed norm gates), 2 on
tolerance failures (no convergence, oracle mismatch).  File outputs are
written atomically (temp file then rename).
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import operators, proxfun
from .errors import RescompError, ValidationError
from .hilbert import LinearMap, Space, SubspaceProjector, identity_map, product_space
from .sets import AffineSubspace, Ball, Box, Halfspace, ProductSet, Singleton
from .solvers import (
    RelaxedInstance,
    Schedule,
    solve_relaxed,
    variational_residual,
    verify_exact_relaxation,
)

INSTANCE_KINDS = (
    "split-feasibility",
    "common-zero",
    "feasibility-product",
    "wiener",
    "prox-mixture",
)

ORACLE_MATCH_TOL = 1e-6
EXACTNESS_TOL = 1e-8


def _flat_numbers(value):
    """Yield every leaf number in a nested list structure (None leaves skipped)."""
    if isinstance(value, (list, tuple)):
        for v in value:
            yield from _flat_numbers(v)
    elif value is not None:
        yield float(value)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class InstanceSpec:
    """Parsed, validated form of a run configuration."""

    kind: str
    spaces: dict
    maps: list | None
    sets: list
    weights: list
    subspace: list
    gamma: float = 1.0
    schedule: dict = field(default_factory=dict)
    seed: int = 0
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ValidationError("config root must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        required = ["kind", "spaces", "sets"]
        if data.get("kind") != "feasibility-product":
            # the product construction implies the diagonal subspace
            required.append("subspace")
        for field_name in required:
            if field_name not in data:
                raise ValidationError(f"missing config field {field_name!r}")
        spec = cls(
            kind=data["kind"],
            spaces=data["spaces"],
            maps=data.get("maps"),
            sets=data["sets"],
            weights=data.get("weights", [1.0] * len(data["sets"])),
            subspace=data.get("subspace", []),
            gamma=float(data.get("gamma", 1.0)),
            schedule=dict(data.get("schedule", {})),
            seed=int(data.get("seed", 0)),
            output=dict(data.get("output", {})),
        )
        spec.validate()
        return spec

    def validate(self):
        if self.kind not in INSTANCE_KINDS:
            raise ValidationError(
                f"field 'kind': {self.kind!r} is not one of {INSTANCE_KINDS}"
            )
        if not isinstance(self.spaces, dict) or "domain" not in self.spaces:
            raise ValidationError("field 'spaces': needs a 'domain' entry")
        if not self.sets:
            raise ValidationError("field 'sets': at least one block is required")
        if len(self.weights) != len(self.sets):
            raise ValidationError("field 'weights': one weight per block is required")
        for i, w in enumerate(self.weights):
            if not np.isfinite(w) or w <= 0:
                raise ValidationError(f"field 'weights[{i}]': must be finite and positive")
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise ValidationError("field 'gamma': must be finite and positive")
        if not self.subspace and self.kind != "feasibility-product":
            raise ValidationError("field 'subspace': spanning vectors are required")
        for key, value in (("subspace", self.subspace), ("maps", self.maps or [])):
            for entry in _flat_numbers(value):
                if not np.isfinite(entry):
                    raise ValidationError(f"field {key!r}: non-finite entry")

    def to_dict(self):
        return {
            "kind": self.kind,
            "spaces": self.spaces,
            "maps": self.maps,
            "sets": self.sets,
            "weights": list(self.weights),
            "subspace": self.subspace,
            "gamma": self.gamma,
            "schedule": dict(self.schedule),
            "seed": self.seed,
            "output": dict(self.output),
        }

    def build_schedule(self):
        return Schedule(
            lam=self.schedule.get("lambda", 1.0),
            max_iterations=int(self.schedule.get("max_iterations", 100_000)),
            tol=float(self.schedule.get("tol", 1e-10)),
        )


def load_spec(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc
    return InstanceSpec.from_dict(data)


# ---------------------------------------------------------------------------
# descriptor -> object builders
# ---------------------------------------------------------------------------


def _build_space(desc):
    return Space(int(desc["dim"]), desc.get("weights"))


def _build_set(desc, space):
    tag = desc.get("tag")
    if tag == "singleton":
        return Singleton(space, desc["point"])
    if tag == "box":
        return Box(space, desc["lower"], desc["upper"])
    if tag == "ball":
        return Ball(space, desc["center"], float(desc["radius"]))
    if tag == "halfspace":
        return Halfspace(space, desc["normal"], float(desc["offset"]))
    if tag == "affine":
        return AffineSubspace(space, desc["anchor"], desc["directions"])
    raise ValidationError(f"unknown set tag {tag!r}")


def _build_operator(desc, space):
    tag = desc.get("tag")
    if tag == "zero":
        return operators.zero_operator(space)
    if tag == "scaled-identity":
        return operators.scaled_identity(space, float(desc["c"]))
    if tag == "linear":
        return operators.linear_monotone(space, np.asarray(desc["matrix"], dtype=float))
    if tag == "normal-cone":
        return operators.normal_cone(_build_set(desc["set"], space))
    return operators.normal_cone(_build_set(desc, space))


def _build_function(desc, space):
    tag = desc.get("tag")
    if tag == "abs":
        return proxfun.one_norm(space)
    if tag == "quadratic":
        return proxfun.quadratic(space, np.asarray(desc["q"], dtype=float), desc.get("b"))
    if tag == "half-sq-dist":
        return proxfun.half_squared_distance(space, desc["point"])
    if tag == "indicator":
        return proxfun.indicator(_build_set(desc["set"], space))
    return proxfun.indicator(_build_set(desc, space))


def _build_wiener_forward(desc, space):
    tag = desc.get("tag", "scale")
    if tag == "scale":
        c = float(desc["c"])
        return (lambda y: c * y), c
    if tag == "projection":
        cset = _build_set(desc["set"], space)
        return cset.project, None
    raise ValidationError(f"unknown wiener forward tag {tag!r}")


def _build_maps(spec, domain, block_spaces):
    descs = spec.maps if spec.maps is not None else [None] * len(block_spaces)
    if len(descs) != len(block_spaces):
        raise ValidationError("field 'maps': one matrix (or null) per block is required")
    out = []
    for i, (desc, g) in enumerate(zip(descs, block_spaces)):
        if desc is None:
            if g.dim != domain.dim:
                raise ValidationError(
                    f"field 'maps[{i}]': identity requested but block dim {g.dim} "
                    f"differs from domain dim {domain.dim}"
                )
            out.append(LinearMap(domain, g, np.eye(g.dim)))
        else:
            out.append(LinearMap(domain, g, np.asarray(desc, dtype=float)))
    return out


# ---------------------------------------------------------------------------
# instance generation
# ---------------------------------------------------------------------------


def generate_instance(spec, unsafe=False):
    """Build the relaxed instance described by ``spec`` (deterministic)."""
    domain = _build_space(spec.spaces["domain"])
    weights = [float(w) for w in spec.weights]

    if spec.kind != "feasibility-product":
        V = SubspaceProjector(domain, np.asarray(spec.subspace, dtype=float))

    if spec.kind == "feasibility-product":
        m = len(spec.sets)
        base_sets = [_build_set(d, domain) for d in spec.sets]
        prod = product_space([domain] * m, weights)
        slices = [slice(k * domain.dim, (k + 1) * domain.dim) for k in range(m)]
        cset = ProductSet(prod, base_sets, slices)
        diag = [np.tile(e, m) for e in np.eye(domain.dim)]
        V = SubspaceProjector(prod, diag)
        inst = RelaxedInstance(
            V, identity_map(prod), operators.normal_cone(cset), spec.gamma,
            kind=spec.kind, sets=base_sets, unsafe=unsafe,
        )
        return inst

    block_descs = spec.spaces.get("blocks")
    if block_descs is None:
        block_spaces = [domain] * len(spec.sets)
    else:
        block_spaces = [_build_space(d) for d in block_descs]
    if len(block_spaces) != len(spec.sets):
        raise ValidationError("field 'spaces.blocks': one space per block is required")
    maps = _build_maps(spec, domain, block_spaces)

    if spec.kind == "wiener":
        forwards, scales, points, fams = [], [], [], []
        for desc, g in zip(spec.sets, block_spaces):
            fwd, scale = _build_wiener_forward(desc.get("f", desc), g)
            p = g.validate(desc["point"])
            forwards.append(fwd)
            scales.append(scale)
            points.append(p)
            fams.append(operators.make_wiener(g, fwd, p))
        stacked_L = _stack_or_single(maps, weights)
        B = operators.product_family(fams, weights) if len(fams) > 1 else fams[0]
        inst = RelaxedInstance(
            V, stacked_L, B, spec.gamma, kind="wiener",
            blocks=list(zip(maps, forwards, points, weights)), unsafe=unsafe,
        )
        inst.wiener_scales = scales
        inst.wiener_points = points
        return inst

    if spec.kind == "split-feasibility":
        csets = [_build_set(d, g) for d, g in zip(spec.sets, block_spaces)]
        fams = [operators.normal_cone(c) for c in csets]
    elif spec.kind == "common-zero":
        fams = [_build_operator(d, g) for d, g in zip(spec.sets, block_spaces)]
        csets = None
    elif spec.kind == "prox-mixture":
        gs = [_build_function(d, g) for d, g in zip(spec.sets, block_spaces)]
        fams = [operators.subdifferential(g) for g in gs]
        csets = None
    else:  # pragma: no cover - kinds are validated upstream
        raise ValidationError(f"unknown kind {spec.kind!r}")

    stacked_L = _stack_or_single(maps, weights)
    B = operators.product_family(fams, weights) if len(fams) > 1 else fams[0]
    return RelaxedInstance(
        V, stacked_L, B, spec.gamma, kind=spec.kind,
        blocks=list(zip(maps, fams, weights)), sets=csets, unsafe=unsafe,
    )


def _stack_or_single(maps, weights):
    from .hilbert import stack

    if len(maps) == 1 and abs(weights[0] - 1.0) < 1e-15:
        return maps[0]
    return stack(maps, weights)


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------


def least_squares_oracle(inst):
    """Normal-equations solution of the singleton split-feasibility relaxation.

    Minimizes ``sum_k w_k ||L_k x - p_k||^2`` over ``x in V`` directly in
    the coordinates of V's orthonormal basis; fully independent of the
    iterative solver.  Returns ``(x, rank_deficient_flag)``.
    """
    if inst.kind != "split-feasibility" or not inst.blocks:
        raise ValidationError("least_squares_oracle needs a split-feasibility instance")
    basis = inst.V.basis  # rows
    k = basis.shape[0]
    M = np.zeros((k, k))
    rhs = np.zeros(k)
    for L_k, fam, w_k in inst.blocks:
        cset = getattr(fam, "cset", None)
        if not isinstance(cset, Singleton):
            raise ValidationError("least_squares_oracle needs singleton target sets")
        G = L_k.codomain
        lb = np.array([L_k.apply(b) for b in basis])  # k x dim_G
        for i in range(k):
            rhs[i] += w_k * G.inner(lb[i], cset.point)
            for j in range(k):
                M[i, j] += w_k * G.inner(lb[i], lb[j])
    flag = False
    try:
        coeffs = np.linalg.solve(M, rhs)
        if np.linalg.cond(M) > 1e12:
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        coeffs, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        flag = True
    return basis.T @ coeffs, flag


def wiener_oracle(inst):
    """Direct solve of the Wiener stationarity system over V, for linear blocks.

    Only available when every forward map is a scaled identity; the
    stationarity condition restricted to V's basis is then a small linear
    system.
    """
    if inst.kind != "wiener":
        raise ValidationError("wiener_oracle needs a wiener instance")
    scales = getattr(inst, "wiener_scales", None)
    if scales is None or any(c is None for c in scales):
        raise ValidationError("wiener_oracle needs scaled-identity forward maps")
    basis = inst.V.basis
    k = basis.shape[0]
    M = np.zeros((k, k))
    rhs = np.zeros(k)
    for (L_k, _fwd, p_k, w_k), c_k in zip(inst.blocks, scales):
        G = L_k.codomain
        lb = np.array([L_k.apply(b) for b in basis])
        for i in range(k):
            rhs[i] += w_k * G.inner(lb[i], p_k)
            for j in range(k):
                M[i, j] += w_k * c_k * G.inner(lb[i], lb[j])
    coeffs = np.linalg.solve(M, rhs)
    return basis.T @ coeffs


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------


@dataclass
class RunReport:
    """Summary of one configuration-driven solve."""

    kind: str
    seed: int
    converged: bool
    iterations: int
    final_iterate: list
    fp_residual: float
    var_residual: float
    original_residual: float
    membership_defect: float
    verdict: str
    oracle: dict | None
    trace_path: str | None
    x0_projected: bool

    def to_json(self):
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)


def _atomic_write_text(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def execute(spec, unsafe=False):
    """Build, solve and verify an instance; returns ``(report, trace)``."""
    env_seed = os.environ.get("RESCOMP_SEED")
    if env_seed is not None:
        spec.seed = int(env_seed)
    inst = generate_instance(spec, unsafe=unsafe)
    schedule = spec.build_schedule()
    x0 = inst.space.zeros()
    x, trace = solve_relaxed(inst, x0, schedule)
    report_check = verify_exact_relaxation(inst, x, tol=EXACTNESS_TOL)
    oracle_entry = None
    if inst.kind == "split-feasibility":
        try:
            ref, flag = least_squares_oracle(inst)
            oracle_entry = {
                "point": list(ref),
                "distance": inst.space.norm(x - ref),
                "rank_deficient": bool(flag),
            }
        except ValidationError:
            oracle_entry = None
    elif inst.kind == "wiener":
        try:
            ref = wiener_oracle(inst)
            oracle_entry = {
                "point": list(ref),
                "distance": inst.space.norm(x - ref),
                "rank_deficient": False,
            }
        except ValidationError:
            oracle_entry = None

    verdict = report_check.verdict
    if report_check.is_relaxed_solution:
        verdict = (
            "S1 attained"
            if report_check.original_residual <= EXACTNESS_TOL
            else "relaxed only"
        )
    report = RunReport(
        kind=inst.kind,
        seed=spec.seed,
        converged=trace.reason == "converged",
        iterations=trace.iterations,
        final_iterate=list(x),
        fp_residual=trace.fp_residual[-1],
        var_residual=variational_residual(inst, x),
        original_residual=report_check.original_residual,
        membership_defect=report_check.membership_defect,
        verdict=verdict,
        oracle=oracle_entry,
        trace_path=None,
        x0_projected=trace.x0_projected,
    )
    return report, trace


def run(config_path, trace_path=None, unsafe=False, out=print):
    """CLI body for ``rescomp solve``; returns the process exit code."""
    try:
        spec = load_spec(config_path)
        report, trace = execute(spec, unsafe=unsafe)
    except (RescompError, OSError, KeyError, TypeError) as exc:
        out(f"error: {exc}")
        return 1
    trace_target = trace_path or spec.output.get("trace")
    if trace_target:
        trace.to_csv(trace_target)
        report.trace_path = trace_target
    report_target = spec.output.get("report")
    if report_target:
        _atomic_write_text(report_target, report.to_json() + "\n")
    out(report.to_json())
    if not report.converged:
        out("tolerance failure: did not converge within the iteration budget")
        return 2
    if report.oracle is not None and report.oracle["distance"] > ORACLE_MATCH_TOL:
        out(
            f"tolerance failure: distance to oracle {report.oracle['distance']:.3g} "
            f"exceeds {ORACLE_MATCH_TOL}"
        )
        return 2
    return 0


def oracle_command(config_path, out=print):
    """CLI body for ``rescomp oracle``: print the closed-form reference."""
    try:
        spec = load_spec(config_path)
        env_seed = os.environ.get("RESCOMP_SEED")
        if env_seed is not None:
            spec.seed = int(env_seed)
        inst = generate_instance(spec)
        if inst.kind == "split-feasibility":
            ref, flag = least_squares_oracle(inst)
            out(json.dumps({"point": list(ref), "rank_deficient": bool(flag)}))
        elif inst.kind == "wiener":
            ref = wiener_oracle(inst)
            out(json.dumps({"point": list(ref), "rank_deficient": False}))
        else:
            out(f"error: no closed-form oracle for kind {inst.kind!r}")
            return 1
    except (RescompError, OSError, KeyError, TypeError) as exc:
        out(f"error: {exc}")
        return 1
    return 0
