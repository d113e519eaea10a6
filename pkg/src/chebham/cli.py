"""Command-line front end: solve a spec file, verify the operator identities,
or fit imaginary-time phase angles."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .basis import chebyshev_nodes, tau_matrix, tau_state
from .operators import (build_B, build_G_T, build_M_xp, build_N, build_Pa,
                        build_Qa)
from .problems import SpecValidationError
from .runner import StageError, run
from .qsvt import qsp_fit_angles
from .solver import as_spec


def _cmd_solve(args) -> int:
    try:
        spec = as_spec(args.spec)
        report, _ = run(spec, method=args.method, n=args.n, shots=args.shots,
                        seed=args.seed, grid=args.grid, out_dir=args.out, t=args.t)
    except (StageError, SpecValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(report.dumps())
    return 0


def _identity_suite(n: int, trials: int = 60, seed: int = 0) -> list:
    """Randomized residuals of every defining operator identity at size n."""
    rng = np.random.default_rng(seed)
    checks = []
    nodes = chebyshev_nodes(n)
    tmat = tau_matrix(n, nodes)
    gramm = tmat @ tmat.T
    checks.append(("node orthonormality", float(np.max(np.abs(gramm - np.eye(2 ** n))))))

    G = build_G_T(n).entries
    xs = rng.uniform(-0.99, 0.99, trials)
    h = 1e-6
    worst = 0.0
    for x in xs:
        v = rng.standard_normal(2 ** n)
        v /= np.linalg.norm(v)
        num = (tau_state(n, x + h).amplitudes @ v - tau_state(n, x - h).amplitudes @ v) / (2 * h)
        val = tau_state(n, x).amplitudes @ (G @ v)
        worst = max(worst, abs(val - num) / (1.0 + abs(val)))
    checks.append(("differentiation (finite-difference)", worst))

    worst = 0.0
    Ms = [build_M_xp(n, p).entries for p in range(2 ** n + 1)]
    for _ in range(trials):
        x = rng.uniform(-1, 1)
        v = rng.standard_normal(2 ** n)
        tn = tau_state(n, x).amplitudes
        tn1 = tau_state(n + 1, x).amplitudes
        for p, M in enumerate(Ms):
            worst = max(worst, abs(x ** p * (tn @ v) - tn1 @ (M @ v)))
    checks.append(("power lifting M_{x^p}", worst))

    N1 = build_N(n, "constant").entries
    Nx = build_N(n, "linear-x").entries
    worst = 0.0
    for _ in range(trials):
        x = rng.uniform(-1, 1)
        v = rng.standard_normal(2 ** n)
        u = rng.standard_normal(2 ** n)
        tn = tau_state(n, x).amplitudes
        tn1 = tau_state(n + 1, x).amplitudes
        prod = (tn @ v) * (tn @ u)
        kron = np.kron(v, u)
        worst = max(worst, abs(prod - tn1 @ (N1 @ kron)))
        worst = max(worst, abs(x * prod - tn1 @ (Nx @ kron)))
    checks.append(("pairing N_1 / N_x", worst))

    worst = 0.0
    for _ in range(trials):
        x, x0 = rng.uniform(-1, 1, 2)
        v = rng.standard_normal(2 ** n)
        B = build_B(n, x0).entries
        worst = max(worst, abs(tau_state(n, x0).amplitudes @ v
                               - tau_state(n, x).amplitudes @ (B @ v)))
    checks.append(("point evaluation B", worst))

    Pa = build_Pa(n).entries
    Qa = build_Qa(n).entries
    checks.append(("P_a row selection", float(np.max(np.abs(Pa @ Pa.T - np.eye(4 ** n))))))
    worst = 0.0
    for _ in range(trials):
        x, y = rng.uniform(-1, 1, 2)
        w = rng.standard_normal(2 ** (2 * n + 1))
        tx = tau_state(n, x).amplitudes
        ty = tau_state(n, y).amplitudes
        lhs = np.kron(tx, np.kron([1.0, 0.0], ty)) @ w
        worst = max(worst, abs(lhs - np.kron(tx, ty) @ (Pa @ w)))
    checks.append(("P_a selection identity", worst))
    worst = 0.0
    for _ in range(trials):
        x = rng.uniform(-1, 1)
        w = rng.standard_normal(2 ** (2 * n + 1))
        tx = tau_state(n, x).amplitudes
        tn1 = tau_state(n + 1, x).amplitudes
        lhs = np.kron(tx, np.kron([1.0, 0.0], tx)) @ w
        worst = max(worst, abs(lhs - tn1 @ (Qa @ w)))
    checks.append(("Q_a composition", worst))
    return checks


def _cmd_verify(args) -> int:
    bad = False
    for n in range(1, args.n + 1):
        for name, resid in _identity_suite(n):
            ok = resid < args.tol
            bad |= not ok
            print(f"n={n}  {name:38s} residual={resid:.3e}  {'ok' if ok else 'FAIL'}")
    return 1 if bad else 0


def _cmd_fit_angles(args) -> int:
    try:
        seq = qsp_fit_angles(args.t, args.de, args.do, domain=(args.lo, args.hi),
                             seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"t={seq.t} degrees={seq.degrees} fit_error={seq.fit_error:.6e}")
    print("even:", " ".join(f"{a:.12f}" for a in seq.even_angles))
    print("odd: ", " ".join(f"{a:.12f}" for a in seq.odd_angles))
    if args.out:
        seq.save(args.out)
        print(f"saved {args.out}")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="chebham",
                                 description="Chebyshev effective-Hamiltonian DE solver")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="run the full pipeline on a problem spec")
    sp.add_argument("spec", help="spec file path or bundled problem id")
    sp.add_argument("--method", choices=["eig", "qite", "qsvt"], default="eig")
    sp.add_argument("--n", type=int, default=None, help="override register size")
    sp.add_argument("--shots", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--grid", type=int, default=201)
    sp.add_argument("--t", type=float, default=None, help="imaginary time (qite/qsvt)")
    sp.add_argument("--out", default=None, help="directory for CSV + report files")
    sp.set_defaults(fn=_cmd_solve)

    vp = sub.add_parser("verify-operators", help="randomized operator identity suite")
    vp.add_argument("--n", type=int, default=3, help="largest register size to check")
    vp.add_argument("--tol", type=float, default=1e-10)
    vp.set_defaults(fn=_cmd_verify)

    fp = sub.add_parser("fit-angles", help="fit imaginary-time phase angles")
    fp.add_argument("--t", type=float, required=True)
    fp.add_argument("--de", type=int, default=6)
    fp.add_argument("--do", type=int, default=7)
    fp.add_argument("--lo", type=float, default=0.0)
    fp.add_argument("--hi", type=float, default=1.0)
    fp.add_argument("--seed", type=int, default=0)
    fp.add_argument("--out", default=None)
    fp.set_defaults(fn=_cmd_fit_angles)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
