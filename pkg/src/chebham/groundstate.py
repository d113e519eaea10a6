"""Ground-state preparation: exact eigensolve, imaginary-time evolution, and the
degenerate-zero-space product search used by nonlinear problems."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import minimize

from .assembly import EffectiveHamiltonian
from .operators import build_Pa


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray        # ascending
    ground_vector: np.ndarray      # unit norm, largest-magnitude entry positive
    gap: float                     # lambda_2 - lambda_min
    zero_space_dim: int            # eigenvalues below tau_zero
    lambda_max: float

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_2(self) -> float:
        return float(self.eigenvalues[1]) if len(self.eigenvalues) > 1 else float("nan")


@dataclass(frozen=True)
class GroundPrepConfig:
    method: str = "eigensolve"      # eigensolve | qite-matrix | qite-qsvt
    t: float | None = None          # imaginary time; None = 4x the lower bound
    zero_tol: float | None = None   # tau_zero; None = max(1e-10, 1e-8 * lambda_max)
    seed: int = 0
    restarts: int = 40
    max_iterations: int = 4000
    search_tol: float = 1e-12


def _fix_sign(v: np.ndarray) -> np.ndarray:
    return -v if v[np.argmax(np.abs(v))] < 0 else v


def zero_tolerance(lambda_max: float, zero_tol: float | None = None) -> float:
    if zero_tol is not None:
        return zero_tol
    return max(1e-10, 1e-8 * lambda_max)


def eigensolve(H: EffectiveHamiltonian | np.ndarray, zero_tol: float | None = None) -> SpectrumResult:
    """Full dense spectrum; the ground vector follows the sign convention."""
    h = H.matrix if isinstance(H, EffectiveHamiltonian) else np.asarray(H, dtype=float)
    if np.max(np.abs(h - h.T)) > 1e-10 * max(1.0, np.max(np.abs(h))):
        raise ValueError("eigensolve requires a symmetric matrix")
    vals, vecs = eigh(h)
    lam_max = float(vals[-1])
    tol = zero_tolerance(lam_max, zero_tol)
    return SpectrumResult(
        eigenvalues=vals,
        ground_vector=_fix_sign(vecs[:, 0].copy()),
        gap=float(vals[1] - vals[0]) if len(vals) > 1 else float("nan"),
        zero_space_dim=int(np.sum(vals < tol)),
        lambda_max=lam_max,
    )


def evolution_time_bound(H: EffectiveHamiltonian | np.ndarray, n: int,
                         zero_tol: float | None = None) -> float:
    """Heuristic lower bound lambda_max / (lambda_2 (n - 1)) for the evolution time."""
    if n < 2:
        raise ValueError("bound needs n >= 2")
    spec = eigensolve(H, zero_tol)
    doubled = isinstance(H, EffectiveHamiltonian) and H.doubled
    tol = zero_tolerance(spec.lambda_max, zero_tol)
    if spec.lambda_2 <= tol and not doubled:
        raise ValueError("degenerate gap: lambda_2 is numerically zero; "
                         "pass an explicit evolution time or zero tolerance")
    return spec.lambda_max / (spec.lambda_2 * (n - 1))


@dataclass(frozen=True)
class QiteResult:
    vector: np.ndarray
    fidelity: float        # squared overlap with the eigensolve ground vector
    ground_overlap_ok: bool


def qite_evolve(H: EffectiveHamiltonian | np.ndarray, t: float,
                initial: np.ndarray | None = None) -> QiteResult:
    """exp(-t H) initial, renormalized.  Computed in the eigenbasis, which is
    stable for arbitrarily large t (underflow just projects exactly)."""
    if t <= 0:
        raise ValueError("imaginary time t must be positive")
    h = H.matrix if isinstance(H, EffectiveHamiltonian) else np.asarray(H, dtype=float)
    dim = h.shape[0]
    if initial is None:
        initial = np.full(dim, dim ** -0.5)
    initial = np.asarray(initial, dtype=float)
    vals, vecs = eigh(h)
    # exp(-t(lam - lam_min)) avoids global underflow without changing the ray
    coef = vecs.T @ initial
    ok = abs(coef[0]) >= 1e-6
    if not ok:
        warnings.warn("initial state has < 1e-6 overlap with the ground vector",
                      RuntimeWarning, stacklevel=2)
    evolved = vecs @ (np.exp(-t * (vals - vals[0])) * coef)
    nrm = np.linalg.norm(evolved)
    if nrm == 0:
        raise ValueError("evolved state vanished; initial state orthogonal to low spectrum")
    evolved = _fix_sign(evolved / nrm)
    g = _fix_sign(vecs[:, 0].copy())
    fid = float((evolved @ g) ** 2)
    return QiteResult(vector=evolved, fidelity=fid, ground_overlap_ok=ok)


# ---------------------------------------------------------------------------
# nonlinear (doubled-space) ground search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductSearchResult:
    factor: np.ndarray             # unit psi with Psi = psi (x) psi
    objective: float               # <Psi| H |Psi> at the optimum
    spectrum: SpectrumResult
    restarts_used: int


def _product_objective(h: np.ndarray, dim: int):
    def fun(p: np.ndarray):
        nrm = np.linalg.norm(p)
        q = p / nrm
        P = np.kron(q, q)
        hp = h @ P
        val = float(P @ hp)
        T = hp.reshape(dim, dim)
        grad_q = 2.0 * (T + T.T) @ q
        # chain rule through normalization: d/dp f(p/|p|) = (I - qq^T) grad_q / |p|
        grad = (grad_q - (grad_q @ q) * q) / nrm
        return val, grad
    return fun


def _als_refine(h4: np.ndarray, psi: np.ndarray, sweeps: int = 6) -> np.ndarray:
    """Alternating minimization on the asymmetric relaxation psi1 (x) psi2.

    Each leg update is an exact smallest-eigenvector solve of the quadratic
    form left by freezing the other leg; symmetrizing the two legs afterwards
    lands close to the best symmetric product, which the local polish then
    sharpens.  Much less prone to spurious basins than gradient descent alone.
    """
    a = psi / np.linalg.norm(psi)
    b = a.copy()
    for _ in range(sweeps):
        k = np.einsum("ijkl,i,k->jl", h4, a, a)
        b = eigh((k + k.T) / 2.0)[1][:, 0]
        k = np.einsum("ijkl,j,l->ik", h4, b, b)
        a = eigh((k + k.T) / 2.0)[1][:, 0]
    if a @ b < 0:
        b = -b
    v = a + b
    nrm = np.linalg.norm(v)
    return a if nrm < 1e-12 else v / nrm


def nde_product_search(H: EffectiveHamiltonian, n: int,
                       config: GroundPrepConfig | None = None,
                       regular=None) -> ProductSearchResult:
    """Find a unit psi minimizing <psi (x) psi| H |psi (x) psi>.

    The doubled-space Hamiltonian has a large degenerate zero space; the
    physical state is the product-form member.  Seeds come from the dominant
    rank-one factors of low-lying eigenvectors (reshaped to dim x dim), plus
    deterministic random restarts.  For the permutation-free workflow the
    search runs on the middle-qubit-zero restriction.

    Pure-derivative equations admit spurious zero-objective product states
    whose regular-constraint leg vanishes (the lift factor kappa is 0, so the
    state cannot represent any nonzero solution).  When the regular constraint
    is supplied, the search picks, among numerically-degenerate minima, the
    one with the largest |<tau(x_s), psi>|.
    """
    config = config or GroundPrepConfig()
    if not H.doubled:
        raise ValueError("product search requires a doubled (nde) Hamiltonian")
    dim = 2 ** n
    h = H.matrix
    if h.shape[0] == 2 * dim * dim:          # permutation-free: restrict to mid-qubit 0
        P = build_Pa(n).entries
        h = P @ h @ P.T
    elif h.shape[0] != dim * dim:
        raise ValueError(f"Hamiltonian dim {h.shape[0]} incompatible with n={n}")
    spec = eigensolve(h, config.zero_tol)
    if spec.zero_space_dim < 1:
        warnings.warn("no numerically-zero eigenvalue; product search may not reach zero",
                      RuntimeWarning, stacklevel=2)

    vals, vecs = eigh(h)
    h4 = h.reshape(dim, dim, dim, dim)
    rng = np.random.default_rng(config.seed)
    seeds = []
    n_low = min(len(vals), max(spec.zero_space_dim, 1), 24)
    for i in range(n_low):
        m = vecs[:, i].reshape(dim, dim)
        u, s, vt = np.linalg.svd(m)
        seeds.append(u[:, 0])
        seeds.append(vt[0])
    # random unit combinations of the zero space catch product states hiding
    # in non-extremal eigenvectors of the degenerate block
    nz = max(spec.zero_space_dim, 1)
    for _ in range(min(16, config.restarts)):
        combo = vecs[:, :nz] @ rng.standard_normal(nz)
        m = combo.reshape(dim, dim)
        u, s, vt = np.linalg.svd(m)
        seeds.append(u[:, 0])
    seeds.extend(np.eye(dim))
    seeds.append(np.full(dim, dim ** -0.5))
    while len(seeds) < config.restarts:
        seeds.append(rng.standard_normal(dim))

    from .basis import tau_state  # local import avoids a cycle at module load

    def leg_weight(p: np.ndarray) -> float:
        if regular is None:
            return 1.0
        q = p / np.linalg.norm(p)
        return abs(float(tau_state(n, regular.x).amplitudes @ q))

    fun = _product_objective(h, dim)
    opts = {"maxiter": config.max_iterations, "ftol": 1e-18, "gtol": 1e-14}
    candidates = []           # (objective, leg weight, vector)
    best_val = np.inf
    used = 0
    threshold_stop = config.search_tol * max(spec.lambda_max, 1.0)
    # every restart runs to completion: spurious dead-leg minima share the
    # zero objective, so stopping at the first tiny value would be premature
    for p0 in seeds[: config.restarts]:
        used += 1
        for cand in (_als_refine(h4, p0), p0):
            res = minimize(fun, cand, jac=True, method="L-BFGS-B", options=opts)
            candidates.append((float(res.fun), leg_weight(res.x), res.x))
            best_val = min(best_val, float(res.fun))
    # basin hops around the incumbent mop up near-miss local minima
    incumbent = min(candidates, key=lambda c: c[0])[2]
    for _ in range(15):
        if best_val <= threshold_stop:
            break
        cand = incumbent / np.linalg.norm(incumbent) + 0.25 * rng.standard_normal(dim)
        res = minimize(fun, cand, jac=True, method="L-BFGS-B", options=opts)
        candidates.append((float(res.fun), leg_weight(res.x), res.x))
        if res.fun < best_val:
            best_val, incumbent = float(res.fun), res.x
    # among numerically-degenerate minima keep the one whose regular leg is alive
    band = max(10.0 * abs(best_val), 1e-10 * max(spec.lambda_max, 1.0))
    viable = [c for c in candidates if c[0] <= band]
    if viable:
        obj_val, _, best_p = max(viable, key=lambda c: c[1])
    else:
        obj_val, _, best_p = min(candidates, key=lambda c: c[0])
    psi = _fix_sign(best_p / np.linalg.norm(best_p))
    threshold = 1e-10 * max(spec.lambda_max, 1.0)
    if obj_val > threshold and spec.zero_space_dim >= 1 and spec.lambda_min < threshold:
        warnings.warn(f"product search stalled at objective {obj_val:.3e} "
                      f"(threshold {threshold:.3e})", RuntimeWarning, stacklevel=2)
    return ProductSearchResult(factor=psi, objective=float(obj_val),
                               spectrum=spec, restarts_used=used)
