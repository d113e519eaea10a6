"""Compile problem specs into latent governing operators and effective Hamiltonians.

The governing operator A annihilates the latent representation of an exact
solution; each data constraint contributes another annihilating operator.
Summing the Gram terms A^T A + sum_i C_i^T C_i yields a symmetric PSD matrix
whose lowest eigenspace encodes the solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (LatentOperator, build_B, build_D, build_G_T, build_M_xp,
                        build_N, build_Pa, gram)
from .problems import DataConstraint, ProblemSpec, SpecValidationError, resolve_shift


@dataclass(frozen=True)
class EffectiveHamiltonian:
    matrix: np.ndarray
    constituents: tuple            # (label, pre-Gram operator matrix) pairs
    kind: str
    n: int
    doubled: bool = False
    energy_power: int = 1

    def __post_init__(self):
        h = np.asarray(self.matrix, dtype=float)
        asym = np.max(np.abs(h - h.T)) if h.size else 0.0
        if asym > 1e-12 * max(1.0, np.max(np.abs(h))):
            raise ValueError(f"Hamiltonian not symmetric (defect {asym:.2e})")
        object.__setattr__(self, "matrix", (h + h.T) / 2.0)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def build_hamiltonian(A: LatentOperator, constraints, weights=()) -> EffectiveHamiltonian:
    """H = gram(A) + sum_i w_i gram(C_i); constraint weights default to 1."""
    ops = list(constraints)
    if not weights:
        weights = (1.0,) * len(ops)
    if len(weights) != len(ops):
        raise ValueError("one weight per constraint operator required")
    h = gram(A).entries.copy()
    parts = [("A", A.entries)]
    for w, c in zip(weights, ops):
        if c.col_dim != A.col_dim:
            raise ValueError(f"constraint {c.label} column dim {c.col_dim} != {A.col_dim}")
        h += w * gram(c).entries
        parts.append((c.label, c.entries))
    return EffectiveHamiltonian(h, tuple(parts), kind="generic", n=0)


# ---------------------------------------------------------------------------
# governing operators per problem class
# ---------------------------------------------------------------------------

def assemble_ode_constant(a: float, b: float, c: float, n: int) -> LatentOperator:
    """A = a (G^T)^2 + b G^T + c I on the n-qubit space."""
    if a == b == c == 0:
        raise SpecValidationError("all coefficients zero")
    G = build_G_T(n).entries
    A = a * (G @ G) + b * G + c * np.eye(2 ** n)
    return LatentOperator(A, f"ode-constant(n={n})")


def _poly_lift(coeff_poly, n: int) -> np.ndarray:
    """sum_p c_p M_{x^p} for a monomial coefficient polynomial."""
    out = np.zeros((2 ** (n + 1), 2 ** n))
    for p, cp in enumerate(coeff_poly):
        if cp:
            out += cp * build_M_xp(n, p).entries
    return out


def assemble_ode_variable(terms, n: int) -> LatentOperator:
    """A = sum_terms (sum_p c_p M_{x^p}) (G^T)^dx, mapping n -> n+1 qubits."""
    if not terms:
        raise SpecValidationError("no terms")
    G = build_G_T(n).entries
    A = np.zeros((2 ** (n + 1), 2 ** n))
    for t in terms:
        A += _poly_lift(t.coeff_poly, n) @ np.linalg.matrix_power(G, t.dx_order)
    return LatentOperator(A, f"ode-variable(n={n})")


def assemble_inhomogeneous(terms, source_coeffs, regular: DataConstraint, n: int) -> LatentOperator:
    """Variable-coefficient assembly minus the source lifted through D^(k)(x_s)."""
    if regular.value == 0:
        raise SpecValidationError("regular constraint value must be nonzero")
    A = assemble_ode_variable(terms, n).entries
    k = 1 if regular.derivative else 0
    D = build_D(n, k, regular.x, regular.value).entries
    S = np.zeros((2 ** (n + 1), 2 ** n))
    for p, cp in enumerate(source_coeffs):
        if cp:
            S += cp * build_M_xp(n, p).entries
    return LatentOperator(A - S @ D, f"ode-inhomogeneous(n={n})")


def assemble_pde(terms, n: int, workflow: str = "standard") -> LatentOperator:
    """Kronecker assembly sum_terms c (G^T)^dx (x) (G^T)^dy on the doubled register.

    The permutation-free workflow right-multiplies by the middle-qubit
    selection P_a, enlarging the column space to 2^(2n+1).
    """
    G = build_G_T(n).entries
    eye = np.eye(2 ** n)
    A = np.zeros((4 ** n, 4 ** n))
    for t in terms:
        if len(t.coeff_poly) != 1:
            raise SpecValidationError("pde-2d terms must have constant coefficients")
        gx = np.linalg.matrix_power(G, t.dx_order) if t.dx_order else eye
        gy = np.linalg.matrix_power(G, t.dy_order) if t.dy_order else eye
        A += t.coeff_poly[0] * np.kron(gx, gy)
    if workflow == "permutation-free":
        A = A @ build_Pa(n).entries
    return LatentOperator(A, f"pde-2d(n={n},{workflow})")


def assemble_nde(terms, xpoly, regular: DataConstraint, n: int,
                 workflow: str = "standard") -> LatentOperator:
    """Doubled-space assembly: linear terms are lifted by D^(0)(x_s) on the first
    register; quadratic terms pair the two registers; explicit x enters through
    the linear-x pairing with D (x) D."""
    if regular.value == 0 or regular.derivative:
        raise SpecValidationError("nde requires a regular value constraint (nonzero f(x_s))")
    G = build_G_T(n).entries
    eye = np.eye(2 ** n)
    D = build_D(n, 0, regular.x, regular.value).entries
    Ns = {0: build_N(n, "constant").entries, 1: build_N(n, "linear-x").entries}
    A = np.zeros((2 ** (n + 1), 4 ** n))
    for t in terms:
        for p, cp in enumerate(t.coeff_poly):
            if not cp:
                continue
            if t.degree == 1:
                right = np.linalg.matrix_power(G, t.dx_order) if t.dx_order else eye
                A += cp * (Ns[p] @ np.kron(D, right))
            else:
                left = np.linalg.matrix_power(G, t.dx_order) if t.dx_order else eye
                right = np.linalg.matrix_power(G, t.dy_order) if t.dy_order else eye
                A += cp * (Ns[p] @ np.kron(left, right))
    for a, ca in enumerate(xpoly):
        if ca:
            A += ca * (Ns[a] @ np.kron(D, D))
    if workflow == "permutation-free":
        A = A @ build_Pa(n).entries
    return LatentOperator(A, f"nde(n={n},{workflow})")


# ---------------------------------------------------------------------------
# constraint operators
# ---------------------------------------------------------------------------

def assemble_constraints(constraints, kind: str, n: int, workflow: str = "standard",
                         regular: DataConstraint | None = None) -> list:
    """One pre-Gram operator per invariant constraint, dimension-matched to A."""
    G = build_G_T(n).entries
    eye = np.eye(2 ** n)
    M1 = build_M_xp(n, 0).entries if kind in ("ode-variable", "ode-inhomogeneous") else None
    N1 = build_N(n, "constant").entries if kind == "nde" else None
    if kind == "nde":
        if regular is None:
            raise SpecValidationError("nde constraints need the regular constraint for the lift")
        D = build_D(n, 0, regular.x, regular.value).entries
    ops = []
    for c in constraints:
        if not c.invariant:
            continue
        if abs(c.x) > 1 or (c.y is not None and abs(c.y) > 1):
            raise SpecValidationError("constraint location outside [-1, 1]")
        tail = G if c.derivative else eye
        if kind == "ode-constant":
            m = build_B(n, c.x).entries @ tail
        elif kind in ("ode-variable", "ode-inhomogeneous"):
            m = build_B(n + 1, c.x).entries @ M1 @ tail
        elif kind == "pde-2d":
            if c.axis == 0:
                m = np.kron(build_B(n, c.x).entries @ tail, eye)
            else:
                loc = c.x if c.y is None else c.y
                m = np.kron(eye, build_B(n, loc).entries @ tail)
            if workflow == "permutation-free":
                m = m @ build_Pa(n).entries
        elif kind == "nde":
            m = N1 @ np.kron(D, build_B(n, c.x).entries @ tail)
            if workflow == "permutation-free":
                m = m @ build_Pa(n).entries
        else:
            raise SpecValidationError(f"unknown kind {kind!r}")
        label = f"{c.kind}@{c.x}" + ("" if c.y is None else f",{c.y}")
        ops.append(LatentOperator(m, label))
    return ops


# ---------------------------------------------------------------------------
# spec-level driver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AssembledProblem:
    spec: ProblemSpec                  # post-shift working spec
    A: LatentOperator
    constraint_ops: tuple
    hamiltonian: EffectiveHamiltonian

    @property
    def doubled(self) -> bool:
        return self.spec.kind == "nde"


def assemble(spec: ProblemSpec) -> AssembledProblem:
    spec = resolve_shift(spec.validate())
    n = spec.n
    kind = spec.kind
    if kind == "ode-constant":
        coeffs = {t.dx_order: t.coeff_poly[0] for t in spec.terms}
        A = assemble_ode_constant(coeffs.get(2, 0.0), coeffs.get(1, 0.0), coeffs.get(0, 0.0), n)
    elif kind == "ode-variable":
        A = assemble_ode_variable(spec.terms, n)
    elif kind == "ode-inhomogeneous":
        A = assemble_inhomogeneous(spec.terms, spec.source.coefficients(),
                                   spec.regular_constraint, n)
    elif kind == "pde-2d":
        A = assemble_pde(spec.terms, n, spec.workflow)
    elif kind == "nde":
        A = assemble_nde(spec.terms, spec.nde_xpoly, spec.regular_constraint, n, spec.workflow)
    else:
        raise SpecValidationError(f"unknown kind {kind!r}")
    regular = spec.regular_constraint if kind == "nde" else None
    cons = assemble_constraints(spec.constraints, kind, n, spec.workflow, regular)
    base = build_hamiltonian(A, cons, spec.constraint_weights)
    ham = EffectiveHamiltonian(base.matrix, base.constituents, kind=kind, n=n,
                               doubled=(kind == "nde"),
                               energy_power=2 if kind == "nde" else 1)
    return AssembledProblem(spec=spec, A=A, constraint_ops=tuple(cons), hamiltonian=ham)
