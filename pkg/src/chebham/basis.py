"""Chebyshev latent-space primitives.

The latent space on n qubits is spanned by weighted Chebyshev polynomials of
the first kind: basis function k carries weight 2^(-n/2) for k = 0 and
2^(-(n-1)/2) for k >= 1, so a coefficient vector psi represents the function
f(x) = sum_k psi_k * w_k * T_k(x) = <tau(x), psi>.

At the 2^n Chebyshev nodes the tau vectors are orthonormal, which is what
makes the operator constructions in :mod:`chebham.operators` exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def check_domain(x, name: str = "x") -> None:
    """Reject evaluation points outside [-1, 1], where the basis is undefined."""
    arr = np.asarray(x, dtype=float)
    if np.any(np.abs(arr) > 1.0 + 1e-14):
        raise ValueError(f"{name} must lie in [-1, 1], got {arr[np.argmax(np.abs(arr))] if arr.ndim else x}")


def chebyshev_value(k: int, x: float) -> float:
    """Evaluate T_k(x) by the three-term recurrence T_{k+1} = 2x T_k - T_{k-1}."""
    if k < 0:
        raise ValueError("degree k must be nonnegative")
    check_domain(x)
    if k == 0:
        return 1.0
    tm, t = 1.0, float(x)
    for _ in range(k - 1):
        tm, t = t, 2.0 * x * t - tm
    return t


def chebyshev_values(max_degree: int, x) -> np.ndarray:
    """T_0(x) .. T_max_degree(x) for scalar or array x, shape (..., max_degree+1)."""
    check_domain(x)
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (max_degree + 1,))
    out[..., 0] = 1.0
    if max_degree >= 1:
        out[..., 1] = x
    for k in range(2, max_degree + 1):
        out[..., k] = 2.0 * x * out[..., k - 1] - out[..., k - 2]
    return out


def chebyshev_nodes(n: int) -> np.ndarray:
    """Roots of T_{2^n}: cos(pi (j + 1/2) / 2^n), strictly decreasing in (-1, 1)."""
    if n < 1:
        raise ValueError("qubit count n must be >= 1")
    dim = 2 ** n
    j = np.arange(dim)
    return np.cos(np.pi * (j + 0.5) / dim)


def basis_weights(n: int) -> np.ndarray:
    """Amplitude weights of the tau vector: w_0 = 2^(-n/2), w_k = 2^(-(n-1)/2)."""
    w = np.full(2 ** n, 2.0 ** (-(n - 1) / 2.0))
    w[0] = 2.0 ** (-n / 2.0)
    return w


@dataclass(frozen=True)
class LatentVector:
    """A vector in the 2^n-dimensional latent space.

    role is either "tau-state" (an evaluation functional tau(x)) or
    "coefficient-state" (holds expansion weights of a function).
    """

    n: int
    amplitudes: np.ndarray
    role: str = "coefficient-state"

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=float)
        if amps.shape != (2 ** self.n,):
            raise ValueError(f"amplitudes must have length 2^{self.n}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 2 ** self.n

    def normalized(self) -> "LatentVector":
        nrm = np.linalg.norm(self.amplitudes)
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return LatentVector(self.n, self.amplitudes / nrm, self.role)


def tau_state(n: int, x: float) -> LatentVector:
    """The evaluation vector tau(x): entry k is w_k T_k(x).

    Its squared norm never exceeds 2 (it equals 2 - 2^-n at x = +-1 and 1 at
    the Chebyshev nodes), which the measurement module relies on.
    """
    check_domain(x)
    t = chebyshev_values(2 ** n - 1, float(x))
    return LatentVector(n, basis_weights(n) * t, role="tau-state")


def tau_matrix(n: int, xs: np.ndarray) -> np.ndarray:
    """Rows of tau(x) for an array of points, shape (len(xs), 2^n)."""
    t = chebyshev_values(2 ** n - 1, np.asarray(xs, dtype=float))
    return t * basis_weights(n)


def function_state(fn, n: int) -> np.ndarray:
    """Latent coefficients of a smooth function: interpolate at the 2^n nodes.

    <tau(x), function_state(f, n)> reproduces the degree-(2^n - 1) Chebyshev
    interpolant of f.  Used as an independent oracle in tests and to seed the
    nonlinear ground-space search.
    """
    coeffs = np.polynomial.chebyshev.chebinterpolate(fn, 2 ** n - 1)
    return coeffs / basis_weights(n)
