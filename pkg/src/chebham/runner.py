"""End-to-end orchestration: assemble, prepare, anchor, evaluate, report.

A run is deterministic given (spec, method, seed, flags): the eigensolver is
deterministic under the sign convention, the nonlinear search uses a seeded
generator, and shot noise draws from per-point-seeded generators.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import yaml

from . import registry
from .assembly import AssembledProblem, assemble
from .basis import tau_matrix
from .groundstate import (GroundPrepConfig, eigensolve, evolution_time_bound,
                          nde_product_search, qite_evolve)
from .measurement import SolutionModel, recover_scale, reconstruct
from .operators import build_Pa
from .problems import ProblemSpec, parse_spec, resolve_shift
from .qsvt import qsvt_prepare_ground


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunReport:
    problem_id: str
    kind: str
    n: int
    method: str
    workflow: str
    seed: int
    shots: int
    grid: int
    eta: float = float("nan")
    signed_scale: float = float("nan")
    lambda_min: float = float("nan")
    lambda_2: float = float("nan")
    lambda_max: float = float("nan")
    gap: float = float("nan")
    zero_space_dim: int = 0
    de_residual_sup: float = float("nan")
    constraint_residuals: dict = field(default_factory=dict)
    error_sup: float | None = None
    error_rms: float | None = None
    error_peak: list | None = None      # grid point where |error| is largest
    reference: str | None = None
    prep_fidelity: float | None = None
    search_objective: float | None = None
    timings: dict = field(default_factory=dict)
    csv_path: str | None = None

    def as_dict(self) -> dict:
        d = asdict(self)
        return d

    def dumps(self) -> str:
        return yaml.safe_dump(self.as_dict(), sort_keys=False)


def _restricted_hamiltonian(assembled: AssembledProblem) -> np.ndarray:
    """Middle-qubit-zero restriction for the permutation-free workflow."""
    P = build_Pa(assembled.spec.n).entries
    return P @ assembled.hamiltonian.matrix @ P.T


def prepare_state(assembled: AssembledProblem, method: str = "eig",
                  config: GroundPrepConfig | None = None,
                  qsvt_degrees=(6, 7)) -> tuple:
    """Ground-state preparation dispatch.

    Returns (state, spectrum, extras) where state is psi for 1-d kinds, the
    doubled vector for pde-2d, or the product factor for nde.
    """
    spec = assembled.spec
    config = config or GroundPrepConfig(method=method)
    H = assembled.hamiltonian
    extras: dict = {}
    if spec.kind == "nde":
        res = nde_product_search(H, spec.n, config, regular=spec.regular_constraint)
        extras["search_objective"] = res.objective
        return res.factor, res.spectrum, extras
    h_work = H.matrix
    if spec.workflow == "permutation-free":
        h_work = _restricted_hamiltonian(assembled)
    spectrum = eigensolve(h_work, config.zero_tol)
    if method in ("eig", "eigensolve"):
        return spectrum.ground_vector, spectrum, extras
    t = config.t
    if t is None:
        t = 4.0 * evolution_time_bound(h_work, max(spec.n, 2), config.zero_tol)
    if method in ("qite", "qite-matrix"):
        res = qite_evolve(h_work, t, None)
        extras["prep_fidelity"] = res.fidelity
        return res.vector, spectrum, extras
    if method in ("qsvt", "qite-qsvt"):
        vec, phases, _ = qsvt_prepare_ground(h_work, t, *qsvt_degrees, seed=config.seed)
        extras["prep_fidelity"] = float((vec @ spectrum.ground_vector) ** 2)
        extras["phases"] = phases
        return vec, spectrum, extras
    raise ValueError(f"unknown method {method!r}")


def _anchor(model: SolutionModel, spec: ProblemSpec) -> SolutionModel:
    reg = spec.regular_constraint
    if reg.derivative:
        raw = model.raw_derivative(reg.x, reg.y, axis=reg.axis)
        if abs(raw) <= 1e-12:
            raise ValueError(f"ill-conditioned derivative anchor: |f_q*'| = {abs(raw):.3e}")
        target = reg.value  # the shift is x-independent, so derivatives need no offset
        s = target / raw
        if model.kind == "nde":
            s = float(np.sqrt(abs(s)))
        return SolutionModel(model.kind, model.n, model.ground, float(s),
                             model.shift, model.workflow, model.regular)
    # a post-shift spec declares the shifted value; recover_scale expects the
    # original-function value and removes the shift itself
    return recover_scale(model, reg.x, reg.value + model.shift, reg.y)


def residual_profile(assembled: AssembledProblem, model: SolutionModel,
                     points: int = 201) -> float:
    """Sup over the grid of the scaled latent equation residual."""
    spec = assembled.spec
    A = assembled.A.entries
    xs = np.linspace(-1.0, 1.0, points)
    if spec.kind == "pde-2d":
        psi = model.ground
        if spec.workflow == "permutation-free":
            psi = build_Pa(spec.n).entries.T @ psi  # embed for the P_a-shaped operator
        img = (A @ psi).reshape(2 ** spec.n, 2 ** spec.n)
        coarse = np.linspace(-1.0, 1.0, min(points, 41))
        tx = tau_matrix(spec.n, coarse)
        vals = tx @ img @ tx.T
        return float(np.max(np.abs(model.scale_factor * vals)))
    if spec.kind == "nde":
        Psi = np.kron(model.ground, model.ground)
        if spec.workflow == "permutation-free":
            Psi = build_Pa(spec.n).entries.T @ Psi
        img = A @ Psi
        rows = tau_matrix(spec.n + 1, xs)
        return float(np.max(np.abs(model.scale_factor * (rows @ img))))
    img = A @ model.ground
    level = spec.n if spec.kind == "ode-constant" else spec.n + 1
    rows = tau_matrix(level, xs)
    return float(np.max(np.abs(model.scale_factor * (rows @ img))))


def constraint_residuals(model: SolutionModel, spec: ProblemSpec) -> dict:
    """Worst declared-constraint violation per invariant constraint.

    For pde-2d the invariant constraints are lines (one coordinate pinned);
    the residual is the sup of the model over the free coordinate.
    """
    out = {}
    probe = np.linspace(-1.0, 1.0, 41)
    for i, c in enumerate(spec.invariant_constraints):
        if spec.kind == "pde-2d":
            loc = c.x if c.y is None else c.y
            if c.axis == 0:
                pts = [(loc, u) for u in probe]
            else:
                pts = [(u, loc) for u in probe]
            if c.derivative:
                vals = [model.derivative(p, q, axis=c.axis) for p, q in pts]
            else:
                vals = [model.value(p, q) for p, q in pts]
            val = float(np.max(np.abs(vals)))
        elif c.derivative:
            val = abs(model.derivative(c.x))
        else:
            val = abs(model.value(c.x) - model.shift) if spec.kind == "nde" else abs(model.value(c.x))
        out[f"{c.kind}@{i}"] = float(val)
    return out


def evaluate_grid(model: SolutionModel, grid: int, shots: int = 0, seed: int = 0):
    """(points, values) table of f_Q*; shot noise is per-point seeded."""
    xs = np.linspace(-1.0, 1.0, grid)
    if model.kind == "pde-2d":
        pts = [(x, y) for x in xs for y in xs]
        vals = np.empty(len(pts))
        for i, (x, y) in enumerate(pts):
            if shots:
                rng = np.random.default_rng((seed, i))
                est = reconstruct(model, x, y, shots, rng)
                vals[i] = est.value + model.shift
            else:
                vals[i] = model.value(x, y)
        return np.array(pts), vals
    vals = np.empty(grid)
    for i, x in enumerate(xs):
        if shots:
            rng = np.random.default_rng((seed, i))
            est = reconstruct(model, x, shots=shots, rng=rng)
            vals[i] = est.value + model.shift
        else:
            vals[i] = model.value(x)
    return xs.reshape(-1, 1), vals


def compare(points: np.ndarray, values: np.ndarray, reference_name: str):
    """Sup-norm and RMS error against a registry reference."""
    if not registry.has_reference(reference_name):
        raise KeyError(f"missing reference {reference_name!r}")
    f = registry.reference(reference_name)
    if points.shape[1] == 2:
        exact = f(points[:, 0], points[:, 1])
    else:
        exact = f(points[:, 0])
    err = values - exact
    return float(np.max(np.abs(err))), float(np.sqrt(np.mean(err ** 2))), exact


def _write_csv(path: Path, points: np.ndarray, values: np.ndarray, exact) -> None:
    cols = ["x"] if points.shape[1] == 1 else ["x", "y"]
    header = ",".join(cols + ["f_model", "f_exact", "abs_error"])
    lines = [header]
    for i in range(len(values)):
        row = [repr(float(v)) for v in points[i]]
        row.append(repr(float(values[i])))
        if exact is None:
            row += ["nan", "nan"]
        else:
            row.append(repr(float(exact[i])))
            row.append(repr(abs(float(values[i]) - float(exact[i]))))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def run(spec: ProblemSpec | str | Path, method: str = "eig", n: int | None = None,
        shots: int = 0, seed: int = 0, grid: int = 201, out_dir=None,
        t: float | None = None, qsvt_degrees=(6, 7),
        config: GroundPrepConfig | None = None):
    """Full pipeline; returns (RunReport, SolutionModel)."""
    if not isinstance(spec, ProblemSpec):
        spec = parse_spec(spec)
    timings = {}

    def stage(name, fn):
        t0 = time.perf_counter()
        try:
            out = fn()
        except Exception as exc:  # noqa: BLE001 - rewrapped with stage tag
            raise StageError(name, exc) from exc
        timings[name] = time.perf_counter() - t0
        return out

    if n is not None:
        spec = spec.with_n(n)
    work = stage("resolve", lambda: resolve_shift(spec.validate()))
    assembled = stage("assemble", lambda: assemble(work))
    cfg = config or GroundPrepConfig(method=method, t=t, seed=seed)
    state, spectrum, extras = stage(
        "prepare", lambda: prepare_state(assembled, method, cfg, qsvt_degrees))
    reg = assembled.spec.regular_constraint

    def make_model():
        m = SolutionModel(kind=work.kind, n=work.n, ground=state,
                          shift=work.shift if work.shift_applied else 0.0,
                          workflow=work.workflow,
                          regular=reg if work.kind == "nde" else None)
        return _anchor(m, assembled.spec)

    model = stage("scale", make_model)
    points, values = stage("evaluate", lambda: evaluate_grid(model, grid, shots, seed))
    report = RunReport(
        problem_id=work.problem_id, kind=work.kind, n=work.n, method=method,
        workflow=work.workflow, seed=seed, shots=shots, grid=grid,
        eta=float(model.eta), signed_scale=float(model.signed_scale),
        lambda_min=spectrum.lambda_min, lambda_2=spectrum.lambda_2,
        lambda_max=spectrum.lambda_max, gap=spectrum.gap,
        zero_space_dim=spectrum.zero_space_dim,
        reference=work.analytic_reference,
        prep_fidelity=extras.get("prep_fidelity"),
        search_objective=extras.get("search_objective"),
    )
    report.de_residual_sup = stage("residual", lambda: residual_profile(assembled, model))
    report.constraint_residuals = stage(
        "constraints", lambda: constraint_residuals(model, assembled.spec))
    exact = None
    if work.analytic_reference and registry.has_reference(work.analytic_reference):
        sup, rms, exact = stage("compare", lambda: compare(points, values, work.analytic_reference))
        report.error_sup, report.error_rms = sup, rms
        peak = int(np.argmax(np.abs(values - exact)))
        report.error_peak = [float(c) for c in points[peak]]
    report.timings = {k: round(v, 6) for k, v in timings.items()}
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{work.problem_id}.csv"
        stage("write", lambda: _write_csv(csv_path, points, values, exact))
        report.csv_path = str(csv_path)
        report.timings = {k: round(v, 6) for k, v in timings.items()}
        (out / f"{work.problem_id}.report.yaml").write_text(report.dumps())
    return report, model
