"""Closed-form references for the bundled problems, plus the classical
boundary-value solve for the quadratic-value problem that has no closed form."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.integrate import solve_bvp
from scipy.special import eval_legendre, lpmv

_S7 = np.sqrt(7.0)
_S191 = np.sqrt(191.0)


@lru_cache(maxsize=1)
def _quadratic_value_reference():
    """High-accuracy collocation solve of g'' = 2 g^2 - x, g(-1) = -0.1, g(1) = 0.1."""
    def rhs(x, y):
        return np.vstack([y[1], 2.0 * y[0] ** 2 - x])

    def bc(ya, yb):
        return np.array([ya[0] + 0.1, yb[0] - 0.1])

    xg = np.linspace(-1.0, 1.0, 2001)
    y0 = np.vstack([4.0 * xg / 15.0 - xg ** 3 / 6.0, 4.0 / 15.0 - xg ** 2 / 2.0])
    sol = solve_bvp(rhs, bc, xg, y0, tol=1e-12, max_nodes=400000)
    if sol.status != 0:
        raise RuntimeError(f"reference boundary-value solve failed: {sol.message}")
    return sol


def _quadratic_value(x):
    return _quadratic_value_reference().sol(np.asarray(x, dtype=float))[0]


_REGISTRY_1D = {
    "ode_damped_repeated": lambda x: 0.5 * (np.exp(-2 * x) + x * np.exp(-2 * x)),
    "ode_growth_distinct": lambda x: 0.25 * (np.exp(3 * x) - np.exp(-x)),
    "ode_oscillatory": lambda x: np.exp(-2.5 * x) * (np.cos(7.5 * _S7 * x)
                                                     + (_S7 / 21.0) * np.sin(7.5 * _S7 * x)),
    "ode_growth_repeated": lambda x: 0.5 * np.exp(2 * x) - 1.5 * x * np.exp(2 * x),
    "ode_mixed_distinct": lambda x: 0.25 * (np.exp(-3 * x) + np.exp(x)),
    "ode_decay_distinct": lambda x: 2.0 * np.exp(-x) - np.exp(-2 * x),
    "ode_stiff_complex": lambda x: np.exp(1.5 * x) * (np.cos(_S191 * x / 2.0)
                                                      - (4.0 / _S191) * np.sin(_S191 * x / 2.0)),
    "inhomogeneous_variable": lambda x: 1.5 * np.exp(x) - 0.125 * x * (8 * x + 13) - 1.0,
    "inhomogeneous_repeated": lambda x: 0.5 * np.exp(-2 * x) * (x ** 2 - 2 * x - 2),
    "inhomogeneous_distinct": lambda x: (4 * np.exp(3 * x)
                                         - np.exp(2 * x) * (3 * x ** 2 + 6 * x + 2)) / 6.0,
    "inhomogeneous_oscillatory": lambda x: np.exp(-2 * x) * (-4 * (x ** 2 + 16) * np.cos(4 * x)
                                                             + (x - 48) * np.sin(4 * x)) / 64.0,
    "nde_quadratic_slope": lambda x: 1.0 - np.asarray(x, dtype=float) ** 2 / 8.0,
    "nde_quadratic_value": _quadratic_value,
    "nde_cubic_shift": lambda x: -((np.asarray(x, dtype=float) - 3.0) ** 3) / 27.0,
}

for _l in range(0, 8):
    _REGISTRY_1D[f"legendre_l{_l}"] = (lambda l: lambda x: eval_legendre(l, x))(_l)
    _REGISTRY_1D[f"assoc_legendre_l{_l}"] = (lambda l: lambda x: lpmv(1, l, x))(_l)

_REGISTRY_2D = {
    "laplace_dirichlet": lambda x, y: (np.cos(np.pi * x / 2.0)
                                       * np.sinh(np.pi * (y + 1.0) / 2.0) / np.sinh(np.pi)),
    "heat_sine": lambda t, x: np.exp(-4 * np.pi ** 2 * t / 25.0) * np.sin(2 * np.pi * x),
    "wave_sine": lambda t, x: np.cos(4 * np.pi * t) * np.sin(2 * np.pi * x),
}


def has_reference(name: str) -> bool:
    return name in _REGISTRY_1D or name in _REGISTRY_2D


def is_2d(name: str) -> bool:
    return name in _REGISTRY_2D


def reference(name: str):
    """Callable f(x) or f(x, y) for a named reference solution."""
    if name in _REGISTRY_1D:
        return _REGISTRY_1D[name]
    if name in _REGISTRY_2D:
        return _REGISTRY_2D[name]
    raise KeyError(f"no reference named {name!r}; known: {sorted({**_REGISTRY_1D, **_REGISTRY_2D})}")


def reference_names() -> list:
    return sorted(_REGISTRY_1D) + sorted(_REGISTRY_2D)
