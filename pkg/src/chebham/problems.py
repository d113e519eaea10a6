"""Declarative problem descriptions and their structured-text serialization.

A ProblemSpec captures one differential-equation problem: the terms of the
equation, the data constraints that regularize and anchor it, and optional
extras (source expansion, variable shift, analytic reference).  Specs
round-trip losslessly through YAML; ``chebham/specs/`` ships one file per
bundled benchmark problem.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import sympy
import yaml

KINDS = ("ode-constant", "ode-variable", "ode-inhomogeneous", "pde-2d", "nde")
CONSTRAINT_KINDS = ("invariant-value", "invariant-derivative",
                    "regular-value", "regular-derivative")
WORKFLOWS = ("standard", "permutation-free")


class SpecValidationError(ValueError):
    """A ProblemSpec violates one of its invariants."""


@dataclass(frozen=True)
class DiffTerm:
    """One term of the equation.

    coeff_poly holds ascending monomial coefficients of the x-dependent
    multiplier.  degree 1 is a linear term with derivative order dx_order
    (dy_order for the second variable of a 2-d problem); degree 2 is a product
    of two factors whose derivative orders are dx_order and dy_order.
    """

    coeff_poly: tuple = (1.0,)
    dx_order: int = 0
    dy_order: int = 0
    degree: int = 1

    def as_dict(self) -> dict:
        return {"coeff_poly": list(self.coeff_poly), "dx_order": self.dx_order,
                "dy_order": self.dy_order, "degree": self.degree}


@dataclass(frozen=True)
class DataConstraint:
    kind: str
    x: float
    value: float = 0.0
    y: float | None = None
    axis: int = 0

    @property
    def invariant(self) -> bool:
        return self.kind.startswith("invariant")

    @property
    def derivative(self) -> bool:
        return self.kind.endswith("derivative")

    def as_dict(self) -> dict:
        d = {"kind": self.kind, "x": self.x, "value": self.value}
        if self.y is not None:
            d["y"] = self.y
        if self.axis:
            d["axis"] = self.axis
        return d


@dataclass(frozen=True)
class SourceSpec:
    """Right-hand-side function as a truncated power series.

    Either give maclaurin_coeffs directly, or an expression string in x;
    expressions are expanded by exact series arithmetic up to order pbar.
    """

    pbar: int
    maclaurin_coeffs: tuple = ()
    expr: str | None = None

    def coefficients(self) -> tuple:
        if self.maclaurin_coeffs:
            return tuple(self.maclaurin_coeffs)
        if self.expr is None:
            raise SpecValidationError("source needs maclaurin_coeffs or expr")
        return maclaurin_coefficients(self.expr, self.pbar)

    def as_dict(self) -> dict:
        d = {"pbar": self.pbar}
        if self.expr is not None:
            d["expr"] = self.expr
        if self.maclaurin_coeffs:
            d["maclaurin_coeffs"] = list(self.maclaurin_coeffs)
        return d


def maclaurin_coefficients(expr: str, pbar: int) -> tuple:
    """Exact power-series coefficients c_0..c_pbar of an expression in x."""
    x = sympy.symbols("x")
    series = sympy.series(sympy.sympify(expr), x, 0, pbar + 1).removeO()
    expanded = sympy.expand(series)
    return tuple(float(expanded.coeff(x, p)) for p in range(pbar + 1))


@dataclass(frozen=True)
class ProblemSpec:
    problem_id: str
    kind: str
    n: int
    terms: tuple = ()
    constraints: tuple = ()
    source: SourceSpec | None = None
    nde_xpoly: tuple = ()           # constant/linear explicit-x part of an NDE
    workflow: str = "standard"
    shift: float = 0.0              # dependent-variable shift c0 (g = f - c0)
    shift_applied: bool = False     # False on disk; True once shift_transform ran
    analytic_reference: str | None = None
    constraint_weights: tuple = ()  # optional per-invariant weights, default 1.0

    # ---- derived views -------------------------------------------------
    @property
    def invariant_constraints(self) -> tuple:
        return tuple(c for c in self.constraints if c.invariant)

    @property
    def regular_constraint(self) -> DataConstraint:
        regs = [c for c in self.constraints if not c.invariant]
        if len(regs) != 1:
            raise SpecValidationError("exactly one regular constraint required")
        return regs[0]

    @property
    def pending_shift(self) -> bool:
        return self.shift != 0.0 and not self.shift_applied

    def validate(self) -> "ProblemSpec":
        if self.kind not in KINDS:
            raise SpecValidationError(f"unknown kind {self.kind!r}")
        if self.workflow not in WORKFLOWS:
            raise SpecValidationError(f"unknown workflow {self.workflow!r}")
        if self.n < 1:
            raise SpecValidationError("n must be >= 1")
        cap = 2 ** self.n
        for c in self.constraints:
            if c.kind not in CONSTRAINT_KINDS:
                raise SpecValidationError(f"unknown constraint kind {c.kind!r}")
            for loc in (c.x,) + (() if c.y is None else (c.y,)):
                if abs(loc) > 1.0:
                    raise SpecValidationError(f"constraint location {loc} outside [-1, 1]")
            if c.invariant and c.value != 0.0:
                raise SpecValidationError("invariant constraints carry value 0")
            if not c.invariant and c.value == 0.0:
                raise SpecValidationError("regular constraint value must be nonzero")
        regs = [c for c in self.constraints if not c.invariant]
        if self.pending_shift:
            # the transform will consume one regular value as the manufactured zero
            if len(regs) not in (1, 2):
                raise SpecValidationError("a spec with a pending shift needs one or two regular values")
            if not any((not r.derivative) and r.value == self.shift for r in regs):
                raise SpecValidationError("pending shift must match one regular value exactly")
        else:
            if len(regs) != 1:
                raise SpecValidationError("exactly one regular constraint required")
            if not self.invariant_constraints:
                raise SpecValidationError(
                    "at least one invariant constraint required (or set shift to manufacture one)")
        for t in self.terms:
            if len(t.coeff_poly) - 1 > cap:
                raise SpecValidationError(f"coefficient degree {len(t.coeff_poly) - 1} over the 2^n cap")
            if t.degree == 2 and self.kind != "nde":
                raise SpecValidationError("degree-2 terms only valid for kind 'nde'")
            if t.degree not in (1, 2):
                raise SpecValidationError("term degree must be 1 or 2")
            if self.kind == "nde" and len(t.coeff_poly) > 2:
                raise SpecValidationError("nde terms support constant or linear-x coefficients only")
        if self.source is not None and self.source.pbar > cap:
            raise SpecValidationError(f"source truncation pbar={self.source.pbar} over 2^n={cap}")
        if self.kind == "ode-inhomogeneous" and self.source is None:
            raise SpecValidationError("inhomogeneous kind requires a source")
        if self.kind == "nde":
            if not any(t.degree == 2 for t in self.terms):
                raise SpecValidationError("nde kind requires at least one degree-2 term")
            if len(self.nde_xpoly) > 2:
                raise SpecValidationError("explicit-x part of an NDE is limited to degree 1")
        if self.constraint_weights and len(self.constraint_weights) != len(self.invariant_constraints):
            raise SpecValidationError("constraint_weights must match invariant constraints")
        return self

    def with_n(self, n: int) -> "ProblemSpec":
        return replace(self, n=n).validate()

    # ---- serialization -------------------------------------------------
    def as_dict(self) -> dict:
        d = {
            "id": self.problem_id,
            "kind": self.kind,
            "n": self.n,
            "terms": [t.as_dict() for t in self.terms],
            "constraints": [c.as_dict() for c in self.constraints],
            "workflow": self.workflow,
        }
        if self.source is not None:
            d["source"] = self.source.as_dict()
        if self.nde_xpoly:
            d["nde_xpoly"] = list(self.nde_xpoly)
        if self.shift:
            d["shift"] = self.shift
        if self.analytic_reference:
            d["analytic_reference"] = self.analytic_reference
        if self.constraint_weights:
            d["constraint_weights"] = list(self.constraint_weights)
        return d

    def dumps(self) -> str:
        return yaml.safe_dump(self.as_dict(), sort_keys=False)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())


def spec_from_dict(d: dict) -> ProblemSpec:
    try:
        terms = tuple(DiffTerm(coeff_poly=tuple(float(c) for c in t.get("coeff_poly", [1.0])),
                               dx_order=int(t.get("dx_order", 0)),
                               dy_order=int(t.get("dy_order", 0)),
                               degree=int(t.get("degree", 1)))
                      for t in d.get("terms", []))
        cons = tuple(DataConstraint(kind=str(c["kind"]), x=float(c["x"]),
                                    value=float(c.get("value", 0.0)),
                                    y=None if c.get("y") is None else float(c["y"]),
                                    axis=int(c.get("axis", 0)))
                     for c in d.get("constraints", []))
        source = None
        if d.get("source") is not None:
            s = d["source"]
            source = SourceSpec(pbar=int(s["pbar"]),
                                maclaurin_coeffs=tuple(float(c) for c in s.get("maclaurin_coeffs", [])),
                                expr=s.get("expr"))
        spec = ProblemSpec(
            problem_id=str(d["id"]),
            kind=str(d["kind"]),
            n=int(d["n"]),
            terms=terms,
            constraints=cons,
            source=source,
            nde_xpoly=tuple(float(c) for c in d.get("nde_xpoly", [])),
            workflow=str(d.get("workflow", "standard")),
            shift=float(d.get("shift", 0.0)),
            analytic_reference=d.get("analytic_reference"),
            constraint_weights=tuple(float(w) for w in d.get("constraint_weights", [])),
        )
    except SpecValidationError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecValidationError(f"malformed problem spec: {exc}") from exc
    return spec.validate()


def parse_spec(path) -> ProblemSpec:
    """Load and validate a problem spec file, reporting parse errors with context."""
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SpecValidationError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise SpecValidationError(f"{path}: expected a mapping at top level")
    return spec_from_dict(data)


def shift_transform(spec: ProblemSpec, c0: float | None = None) -> ProblemSpec:
    """Rewrite the problem for the shifted unknown g = f - c0.

    Each derivative-free factor of a degree-2 term spawns the matching linear
    term scaled by c0; derivative-free linear terms spawn a constant, which
    for NDEs lands in the explicit-x part.  Value constraints have c0
    subtracted; the regular value that lands exactly on 0 becomes the
    manufactured invariant constraint.  Evaluators add c0 back.
    """
    if c0 is None:
        c0 = spec.shift
    if spec.shift_applied:
        raise SpecValidationError("shift already applied to this spec")
    if c0 == 0.0:
        return spec
    new_terms = []
    const_extra = 0.0
    xpoly = list(spec.nde_xpoly)
    for t in spec.terms:
        new_terms.append(t)
        if t.degree == 2:
            scaled = tuple(c0 * c for c in t.coeff_poly)
            if t.dx_order == 0:
                new_terms.append(DiffTerm(coeff_poly=scaled, dx_order=t.dy_order, degree=1))
            if t.dy_order == 0:
                new_terms.append(DiffTerm(coeff_poly=scaled, dx_order=t.dx_order, degree=1))
            if t.dx_order == 0 and t.dy_order == 0:
                const_extra += c0 * c0 * t.coeff_poly[0]
        elif t.degree == 1 and t.dx_order == 0 and t.dy_order == 0:
            const_extra += c0 * t.coeff_poly[0]
    if const_extra != 0.0:
        if spec.kind != "nde":
            raise SpecValidationError("shift of a non-NDE problem produces a source; not supported")
        while len(xpoly) < 1:
            xpoly.append(0.0)
        xpoly[0] += const_extra
    new_cons = []
    for c in spec.constraints:
        if c.invariant or c.derivative:
            new_cons.append(c)
            continue
        v = c.value - c0
        if v == 0.0:
            new_cons.append(DataConstraint("invariant-value", c.x, 0.0, c.y, c.axis))
        else:
            new_cons.append(DataConstraint(c.kind, c.x, v, c.y, c.axis))
    out = replace(spec, terms=tuple(new_terms), constraints=tuple(new_cons),
                  nde_xpoly=tuple(xpoly), shift=c0, shift_applied=True)
    return out.validate()


def resolve_shift(spec: ProblemSpec) -> ProblemSpec:
    """Apply a pending shift, if any; no-op otherwise."""
    return shift_transform(spec) if spec.pending_shift else spec


def bundled_spec_dir() -> Path:
    return Path(__file__).parent / "specs"


def bundled_spec(problem_id: str) -> ProblemSpec:
    path = bundled_spec_dir() / f"{problem_id}.yaml"
    if not path.exists():
        known = sorted(p.stem for p in bundled_spec_dir().glob("*.yaml"))
        raise FileNotFoundError(f"no bundled spec {problem_id!r}; known: {known}")
    return parse_spec(path)


def bundled_spec_ids() -> list:
    return sorted(p.stem for p in bundled_spec_dir().glob("*.yaml"))
