"""Estimator-style front end so a solve composes with scikit-learn tooling.

``EffectiveHamiltonianSolver(...).fit(problem)`` runs the full pipeline and
stores the solution model; ``predict(X)`` evaluates f_Q* at points, where X is
an (m, 1) array for single-variable problems or (m, 2) for two-variable ones.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .problems import ProblemSpec, bundled_spec, parse_spec
from .runner import run


def as_spec(problem) -> ProblemSpec:
    """Accept a ProblemSpec, a path to a spec file, or a bundled problem id."""
    if isinstance(problem, ProblemSpec):
        return problem
    text = str(problem)
    if text.endswith((".yaml", ".yml")):
        return parse_spec(text)
    try:
        return bundled_spec(text)
    except FileNotFoundError:
        return parse_spec(text)


class EffectiveHamiltonianSolver(BaseEstimator, RegressorMixin):
    """Solve a differential-equation spec by ground-state preparation.

    Parameters mirror the CLI flags: preparation method, imaginary time,
    shot budget for the interferometric read-out, seed, and an optional
    override of the spec's register size.
    """

    def __init__(self, method: str = "eig", n: int | None = None,
                 t: float | None = None, shots: int = 0, seed: int = 0,
                 grid: int = 201, qsvt_degrees: tuple = (6, 7)):
        self.method = method
        self.n = n
        self.t = t
        self.shots = shots
        self.seed = seed
        self.grid = grid
        self.qsvt_degrees = qsvt_degrees

    def fit(self, X, y=None):
        """X is the problem description (spec object, path, or bundled id)."""
        spec = as_spec(X)
        report, model = run(spec, method=self.method, n=self.n, shots=self.shots,
                            seed=self.seed, grid=self.grid, t=self.t,
                            qsvt_degrees=tuple(self.qsvt_degrees))
        self.spec_ = spec
        self.report_ = report
        self.model_ = model
        self.eta_ = report.eta
        self.n_features_in_ = 2 if model.kind == "pde-2d" else 1
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, ensure_2d=True, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} coordinate column(s), got {X.shape[1]}")
        if np.any(np.abs(X) > 1.0):
            raise ValueError("evaluation points must lie in [-1, 1]")
        if self.n_features_in_ == 2:
            return np.array([self.model_.value(p, q) for p, q in X])
        return np.array([self.model_.value(p) for (p,) in X])
