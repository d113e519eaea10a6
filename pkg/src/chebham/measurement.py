"""Statevector-level evaluation of solution models.

Implements the feature-map unitary, direct overlaps, the three interferometric
reconstruction formulas (single variable, two variables, quadratic-nonlinear)
with optional binomial shot noise, and signed-scale recovery.

Convention notes, fixed here and verified by the zero-shot oracle tests:
the ancilla-0 block of the feature map prepares tau(x)/sqrt(2), and the
combined-state probability is multiplied by the *squared* norm of the
unnormalized combined state.  With these two choices every reconstruction
formula reproduces the direct overlap exactly at zero shots.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .basis import basis_weights, check_domain, tau_state
from .problems import DataConstraint


@dataclass(frozen=True)
class SolutionModel:
    """Prepared ground state plus everything needed to evaluate f_Q*.

    ground holds psi (2^n) for the 1-d kinds, the full doubled-register vector
    (4^n) for pde-2d, and the product factor psi (2^n) for nde.  The evaluator
    is f_Q*(x) = s f_q*(x) + shift for linear kinds and s^2 f_q*(x) + shift
    for nde (energy_power 2).
    """

    kind: str
    n: int
    ground: np.ndarray
    signed_scale: float = float("nan")
    shift: float = 0.0
    workflow: str = "standard"
    regular: DataConstraint | None = None   # nde evaluation needs (x_s, f(x_s))

    @property
    def eta(self) -> float:
        return self.signed_scale ** 2

    @property
    def energy_power(self) -> int:
        return 2 if self.kind == "nde" else 1

    @property
    def scale_factor(self) -> float:
        """Multiplier applied to the raw overlap: s for linear, s^2 = eta for nde."""
        return self.signed_scale ** self.energy_power

    # ---- raw (unscaled) overlap f_q* ------------------------------------
    def raw_value(self, x: float, y: float | None = None) -> float:
        if self.kind == "pde-2d":
            tx = tau_state(self.n, x).amplitudes
            ty = tau_state(self.n, y).amplitudes
            return float(tx @ self.ground.reshape(2 ** self.n, -1) @ ty)
        t = tau_state(self.n, x).amplitudes
        if self.kind == "nde":
            reg = self._need_regular()
            kappa = float(tau_state(self.n, reg.x).amplitudes @ self.ground) / reg.value
            return kappa * float(t @ self.ground)
        return float(t @ self.ground)

    def value(self, x: float, y: float | None = None) -> float:
        return self.scale_factor * self.raw_value(x, y) + self.shift

    def raw_derivative(self, x: float, y: float | None = None, axis: int = 0) -> float:
        """d/dx (or d/dy) of the unscaled overlap, via Chebyshev-series
        differentiation of the coefficient vector (independent of the
        differentiation operator, so it can cross-check it)."""
        from numpy.polynomial import chebyshev as _cheb
        w = basis_weights(self.n)
        if self.kind == "pde-2d":
            c = (w[:, None] * self.ground.reshape(2 ** self.n, -1)) * w[None, :]
            cd = _cheb.chebder(c, axis=axis)
            return float(_cheb.chebval2d(x, y, cd))
        coeffs = w * self.ground
        d = _cheb.chebval(x, _cheb.chebder(coeffs))
        if self.kind == "nde":
            reg = self._need_regular()
            kappa = float(tau_state(self.n, reg.x).amplitudes @ self.ground) / reg.value
            return float(kappa * d)
        return float(d)

    def derivative(self, x: float, y: float | None = None, axis: int = 0) -> float:
        return self.scale_factor * self.raw_derivative(x, y, axis)

    def _need_regular(self) -> DataConstraint:
        if self.regular is None:
            raise ValueError("nde model requires its regular constraint")
        return self.regular


@dataclass(frozen=True)
class OverlapEstimate:
    value: float
    method: str = "direct"     # direct | interferometric
    shots: int = 0
    std_error: float = 0.0


# ---------------------------------------------------------------------------
# feature map
# ---------------------------------------------------------------------------

def feature_map_unitary(n: int, x: float) -> np.ndarray:
    """Real orthogonal U(x) on n+1 qubits with U(x)|0..0> = |0> tau(x)/sqrt(2) + |1>(...).

    Only the first column is pinned by the protocol; the rest is completed
    deterministically by a Householder reflection mapping e_0 onto it.
    """
    check_domain(x)
    t = tau_state(n, x).amplitudes
    dim = 2 ** (n + 1)
    c0 = np.zeros(dim)
    c0[: 2 ** n] = t / np.sqrt(2.0)
    rest = 1.0 - float(t @ t) / 2.0
    c0[2 ** n] = np.sqrt(max(rest, 0.0))
    v = np.zeros(dim)
    v[0] = 1.0
    v -= c0
    nrm2 = float(v @ v)
    if nrm2 < 1e-30:
        return np.eye(dim)
    return np.eye(dim) - 2.0 * np.outer(v, v) / nrm2


def _first_column(n: int, x: float) -> np.ndarray:
    u = np.zeros(2 ** (n + 1))
    t = tau_state(n, x).amplitudes
    u[: 2 ** n] = t / np.sqrt(2.0)
    u[2 ** n] = np.sqrt(max(1.0 - float(t @ t) / 2.0, 0.0))
    return u


# ---------------------------------------------------------------------------
# overlaps
# ---------------------------------------------------------------------------

def overlap_direct(model: SolutionModel, x: float, y: float | None = None) -> OverlapEstimate:
    """Exact unscaled overlap f_q*(x)."""
    return OverlapEstimate(model.raw_value(x, y), method="direct")


def _sample_prob(p: float, shots: int, rng) -> float:
    p = min(max(p, 0.0), 1.0)
    return rng.binomial(shots, p) / shots


def interferometric_1d(model: SolutionModel, x: float, shots: int = 0,
                       rng=None, sign_hint: int | None = None) -> OverlapEstimate:
    """Reconstruct s * f_q*(x) from the two overlap probabilities.

    sign_hint = +-1 selects the special-case branch for solutions of known
    sign, which needs only the ground-state probability.
    """
    if model.kind not in ("ode-constant", "ode-variable", "ode-inhomogeneous"):
        raise ValueError("1d reconstruction applies to the linear 1-d kinds")
    n = model.n
    N = 2 ** n
    psi = model.ground
    c0 = _first_column(n, x)
    psi_G = np.zeros(2 ** (n + 1))
    psi_G[:N] = psi
    o_g = float(c0 @ psi_G)
    eta = model.eta
    s = model.signed_scale
    if sign_hint is not None:
        p_g = o_g ** 2
        se = 0.0
        if shots:
            rng = rng or np.random.default_rng()
            p_g = _sample_prob(p_g, shots, rng)
            # delta method through the square root
            se = np.sqrt(2 * eta) * np.sqrt(p_g * (1 - p_g) / shots) / (2 * np.sqrt(max(p_g, 1e-300)))
        val = np.sign(sign_hint) * np.sqrt(2 * eta) * np.sqrt(p_g)
        return OverlapEstimate(float(val), "interferometric", shots, float(se))

    ref = np.zeros(2 ** (n + 1))
    ref[0] = 1.0
    combined = psi_G + ref
    nc2 = float(combined @ combined)
    if nc2 < 1e-12:
        raise ValueError("combined state nearly vanishes; reference degenerate with ground state")
    o_c = float(c0 @ combined) / np.sqrt(nc2)
    p_g, p_c = o_g ** 2, o_c ** 2
    se = 0.0
    if shots:
        rng = rng or np.random.default_rng()
        p_g = _sample_prob(p_g, shots, rng)
        p_c = _sample_prob(p_c, shots, rng)
        var = eta * N * (nc2 ** 2 * p_c * (1 - p_c) + p_g * (1 - p_g)) / shots
        se = float(np.sqrt(var))
    val = np.sqrt(eta * N) * (nc2 * p_c - p_g - 1.0 / (2 * N)) * np.sign(s if s else 1.0)
    return OverlapEstimate(float(val), "interferometric", shots, se)


def _pde_layout(n: int, Psi: np.ndarray) -> np.ndarray:
    """|0_a psi_x 0_a psi_y> ordering of a doubled-register vector (index permutation)."""
    N = 2 ** n
    big = np.zeros((2, N, 2, N))
    big[0, :, 0, :] = Psi.reshape(N, N)
    return big.reshape(-1)


def interferometric_2d(model: SolutionModel, x: float, y: float, shots: int = 0,
                       rng=None) -> OverlapEstimate:
    if model.kind != "pde-2d":
        raise ValueError("2d reconstruction applies to pde-2d models")
    n = model.n
    N = 2 ** n
    state = _pde_layout(n, model.ground)
    bra = np.kron(_first_column(n, x), _first_column(n, y))
    o_g = float(bra @ state)
    ref = np.zeros_like(state)
    ref[0] = 1.0
    combined = state + ref
    nc2 = float(combined @ combined)
    o_c = float(bra @ combined) / np.sqrt(nc2)
    p_g, p_c = o_g ** 2, o_c ** 2
    eta = model.eta
    se = 0.0
    if shots:
        rng = rng or np.random.default_rng()
        p_g = _sample_prob(p_g, shots, rng)
        p_c = _sample_prob(p_c, shots, rng)
        var = eta * (2 * N) ** 2 * (nc2 ** 2 * p_c * (1 - p_c) + p_g * (1 - p_g)) / shots
        se = float(np.sqrt(var))
    s = model.signed_scale
    val = np.sqrt(eta) * 2 * N * (nc2 * p_c - p_g - 1.0 / (4 * N * N)) * np.sign(s if s else 1.0)
    return OverlapEstimate(float(val), "interferometric", shots, se)


def interferometric_nde(model: SolutionModel, x: float, shots: int = 0,
                        rng=None) -> OverlapEstimate:
    """Quadratic-kind reconstruction: Hadamard basis on the constraint register,
    Chebyshev basis on the evaluation register."""
    if model.kind != "nde":
        raise ValueError("nde reconstruction applies to nde models")
    from .qsvt import block_encode_D  # local import; qsvt depends on this module

    n = model.n
    N = 2 ** n
    reg = model._need_regular()
    psi = model.ground
    Psi = np.kron(psi, psi)
    # registers [a1, a2, reg1, a3, reg2]; constraint encoding acts on the first n+2
    mid = np.zeros((N, 2, N))
    mid[:, 0, :] = Psi.reshape(N, N)
    base = np.kron(np.array([1.0, 0.0, 0.0, 0.0]), mid.reshape(-1))
    ud = block_encode_D(n, reg.x, reg.value).unitary
    state = np.kron(ud, np.eye(2 ** (n + 1))) @ base
    unif = np.full(2 ** (n + 1), 2.0 ** (-(n + 1) / 2.0))
    bra = np.kron(np.array([1.0, 0.0]), np.kron(unif, _first_column(n, x)))
    o_g = float(bra @ state)
    ref = np.zeros_like(state)
    ref[0] = 1.0
    combined = state + ref
    nc2 = float(combined @ combined)
    o_c = float(bra @ combined) / np.sqrt(nc2)
    p_g, p_c = o_g ** 2, o_c ** 2
    eta = model.eta
    pref = eta * np.sqrt(8.0 * N ** 3) / reg.value
    se = 0.0
    if shots:
        rng = rng or np.random.default_rng()
        p_g = _sample_prob(p_g, shots, rng)
        p_c = _sample_prob(p_c, shots, rng)
        var = pref ** 2 * (nc2 ** 2 * p_c * (1 - p_c) + p_g * (1 - p_g)) / shots
        se = float(np.sqrt(var))
    val = pref * (nc2 * p_c - p_g - 1.0 / (4 * N * N))
    return OverlapEstimate(float(val), "interferometric", shots, se)


def reconstruct(model: SolutionModel, x: float, y: float | None = None,
                shots: int = 0, rng=None) -> OverlapEstimate:
    """Kind-dispatched interferometric value of s^power * f_q* (shift not applied)."""
    if model.kind == "pde-2d":
        return interferometric_2d(model, x, y, shots, rng)
    if model.kind == "nde":
        return interferometric_nde(model, x, shots, rng)
    return interferometric_1d(model, x, shots, rng)


# ---------------------------------------------------------------------------
# scale recovery
# ---------------------------------------------------------------------------

def recover_scale(model: SolutionModel, x_s: float, f_value: float,
                  y_s: float | None = None) -> SolutionModel:
    """Anchor the model scale at a regular data point.

    Linear kinds: s = f(x_s) / f_q*(x_s), eta = s^2.  For nde the model is
    quadratic in the state, so eta = f(x_s)/f_q*(x_s) directly and s = sqrt(eta)
    (the product form makes f_q* sign-rigid, so the ratio is positive for a
    converged search).
    """
    if f_value == 0:
        raise ValueError("regular constraint value must be nonzero")
    shifted_target = f_value - model.shift
    raw = model.raw_value(x_s, y_s)
    if abs(raw) <= 1e-12:
        raise ValueError(f"ill-conditioned anchor: |f_q*(x_s)| = {abs(raw):.3e}")
    ratio = shifted_target / raw
    if model.kind == "nde":
        if ratio <= 0:
            warnings.warn(f"negative nde scale ratio {ratio:.3e}; search likely not converged",
                          RuntimeWarning, stacklevel=2)
        s = float(np.sqrt(abs(ratio)))
    else:
        s = float(ratio)
    return replace(model, signed_scale=s)
