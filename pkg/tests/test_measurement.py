import numpy as np
import pytest

from chebham.assembly import assemble
from chebham.basis import chebyshev_nodes, tau_state
from chebham.groundstate import eigensolve
from chebham.measurement import (SolutionModel, feature_map_unitary,
                                 interferometric_1d, interferometric_2d,
                                 interferometric_nde, overlap_direct, recover_scale)
from chebham.problems import bundled_spec
from chebham.runner import run


@pytest.fixture(scope="module")
def legendre2_model():
    spec = bundled_spec("legendre_l2")
    psi = eigensolve(assemble(spec).hamiltonian).ground_vector
    model = SolutionModel(kind="ode-variable", n=2, ground=psi)
    return recover_scale(model, 1.0, 1.0)


# ---------------------------------------------------------------------------
# feature map
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n,x", [(1, 0.0), (2, 0.5), (3, -0.99), (4, 1.0)])
def test_feature_map_unitary_and_block(n, x):
    u = feature_map_unitary(n, x)
    np.testing.assert_allclose(u @ u.T, np.eye(2 ** (n + 1)), atol=1e-12)
    first = u[:, 0]
    np.testing.assert_allclose(first[: 2 ** n],
                               tau_state(n, x).amplitudes / np.sqrt(2), atol=1e-12)


def test_feature_map_postselection_profile():
    n = 3
    xs = np.linspace(-1, 1, 1001)
    probs = []
    for x in xs:
        c = feature_map_unitary(n, x)[: 2 ** n, 0]
        probs.append(float(c @ c))
    probs = np.array(probs)
    assert np.max(probs) <= 1.0 + 1e-12
    assert abs(probs[0] - (1.0 - 2.0 ** -(n + 1))) < 1e-12   # near-unit at x = -1
    assert abs(probs[-1] - (1.0 - 2.0 ** -(n + 1))) < 1e-12


def test_feature_map_domain_error():
    with pytest.raises(ValueError):
        feature_map_unitary(2, 1.01)


# ---------------------------------------------------------------------------
# direct overlaps
# ---------------------------------------------------------------------------

def test_direct_constant_state():
    for n in (1, 2, 3):
        psi = np.zeros(2 ** n)
        psi[0] = 1.0
        model = SolutionModel(kind="ode-constant", n=n, ground=psi)
        for x in (-0.7, 0.1, 0.9):
            est = overlap_direct(model, x)
            assert abs(est.value - 2.0 ** (-n / 2)) < 1e-14


def test_direct_legendre_value(legendre2_model):
    est = overlap_direct(legendre2_model, 0.0)
    expected = 0.426401 * 0.5 + 0.904534 * (-1 / np.sqrt(2))
    assert abs(est.value - expected) < 1e-5


def test_direct_node_state():
    n = 2
    x0 = float(chebyshev_nodes(n)[2])
    model = SolutionModel(kind="ode-constant", n=n, ground=tau_state(n, x0).amplitudes)
    assert abs(overlap_direct(model, x0).value - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# interferometric reconstruction
# ---------------------------------------------------------------------------

def test_zero_shot_matches_direct_1d(legendre2_model):
    s = legendre2_model.signed_scale
    for x in np.linspace(-1, 1, 41):
        direct = s * overlap_direct(legendre2_model, x).value
        recon = interferometric_1d(legendre2_model, x).value
        assert abs(direct - recon) < 1e-10


def test_positive_branch(legendre2_model):
    # strictly positive solution (sum of two exponentials): single-probability path
    runrep, model = run(bundled_spec("ode_mixed_distinct"), grid=11)
    for x in np.linspace(-1, 1, 21):
        est = interferometric_1d(model, x, sign_hint=+1)
        direct = model.scale_factor * model.raw_value(x)
        assert abs(est.value - direct) < 1e-9


def test_zero_shot_matches_direct_2d(runs):
    rep, model = runs.get("laplace_dirichlet", grid=41)
    for x, y in [(-0.5, 0.25), (0.0, 1.0), (0.7, -0.3), (1.0, 1.0)]:
        direct = model.scale_factor * model.raw_value(x, y)
        recon = interferometric_2d(model, x, y).value
        assert abs(direct - recon) < 1e-10


def test_laplace_boundary_value(runs):
    rep, model = runs.get("laplace_dirichlet", grid=41)
    assert abs(model.value(0.0, 1.0) - 1.0) < 5e-3   # boundary peak of the exact solution


def test_2d_separable_factorizes():
    n = 2
    px = np.array([0.2, -0.4, 0.1, 0.8])
    py = np.array([0.5, 0.3, -0.2, 0.6])
    model2 = SolutionModel(kind="pde-2d", n=n, ground=np.kron(px, py), signed_scale=1.0)
    mx = SolutionModel(kind="ode-constant", n=n, ground=px, signed_scale=1.0)
    my = SolutionModel(kind="ode-constant", n=n, ground=py, signed_scale=1.0)
    for x, y in [(0.3, -0.7), (0.0, 0.5)]:
        prod = overlap_direct(mx, x).value * overlap_direct(my, y).value
        assert abs(model2.raw_value(x, y) - prod) < 1e-12


def test_zero_shot_matches_direct_nde(runs):
    rep, model = runs.get("nde_quadratic_slope", grid=41)
    for x in np.linspace(-1, 1, 21):
        direct = model.eta * model.raw_value(x)
        recon = interferometric_nde(model, x).value
        assert abs(direct - recon) < 1e-9


def test_nde_boundary_values(runs):
    rep, model = runs.get("nde_quadratic_slope", grid=41)
    assert abs(interferometric_nde(model, 0.0).value - 1.0) < 1e-6
    assert abs(interferometric_nde(model, 1.0).value - 0.875) < 1e-4
    assert abs(interferometric_nde(model, -1.0).value - 0.875) < 1e-4


# ---------------------------------------------------------------------------
# shot noise
# ---------------------------------------------------------------------------

def test_shot_noise_within_standard_errors(legendre2_model):
    rng = np.random.default_rng(99)
    hits = total = 0
    for x in np.linspace(-0.9, 0.9, 21):
        exact = interferometric_1d(legendre2_model, x).value
        for _ in range(20):
            est = interferometric_1d(legendre2_model, x, shots=10 ** 6, rng=rng)
            total += 1
            hits += abs(est.value - exact) < 5 * max(est.std_error, 1e-300)
    assert hits / total >= 0.99


def test_std_error_scaling(legendre2_model):
    means = []
    for shots in (10 ** 4, 10 ** 5, 10 ** 6):
        rng = np.random.default_rng(7)
        ses = [interferometric_1d(legendre2_model, x, shots=shots, rng=rng).std_error
               for x in np.linspace(-0.8, 0.8, 9)]
        means.append(np.mean(ses))
    for a, b in zip(means, means[1:]):
        ratio = a / b
        assert np.sqrt(10) / 2 < ratio < np.sqrt(10) * 2


def test_zero_shots_have_zero_std_error(legendre2_model):
    est = interferometric_1d(legendre2_model, 0.3)
    assert est.shots == 0 and est.std_error == 0.0


# ---------------------------------------------------------------------------
# scale recovery
# ---------------------------------------------------------------------------

def test_recover_scale_legendre_values():
    for pid, eta_caption, eta_exact in (("legendre_l2", 1.38, 11.0 / 8.0),
                                        ("legendre_l3", 1.06, 17.0 / 16.0)):
        spec = bundled_spec(pid)
        psi = eigensolve(assemble(spec).hamiltonian).ground_vector
        model = SolutionModel(kind="ode-variable", n=2, ground=psi)
        model = recover_scale(model, 1.0, 1.0)
        assert abs(model.eta - eta_caption) <= 0.005 + 1e-12   # two-decimal agreement
        if pid == "legendre_l2":
            assert abs(model.eta - eta_exact) < 1e-9


def test_recover_scale_errors(legendre2_model):
    with pytest.raises(ValueError):
        recover_scale(legendre2_model, 1.0, 0.0)
    psi = np.array([0.0, 1.0, 0.0, 0.0])   # odd state: f_q* = 0 at x = 0
    model = SolutionModel(kind="ode-constant", n=2, ground=psi)
    with pytest.raises(ValueError, match="ill-conditioned"):
        recover_scale(model, 0.0, 1.0)


def test_recovered_sign_is_carried(legendre2_model):
    # anchoring against the negated function flips the signed scale
    flipped = recover_scale(legendre2_model, 1.0, -1.0)
    assert flipped.signed_scale == -legendre2_model.signed_scale
    x = 0.37
    assert abs(flipped.value(x) + legendre2_model.value(x)) < 1e-12
    recon = interferometric_1d(flipped, x).value
    assert abs(recon - flipped.scale_factor * flipped.raw_value(x)) < 1e-10


def test_shot_noise_2d_and_nde_paths(runs):
    rng = np.random.default_rng(5)
    rep2, model2 = runs.get("laplace_dirichlet", grid=41)
    exact = interferometric_2d(model2, 0.3, 0.6).value
    est = interferometric_2d(model2, 0.3, 0.6, shots=10 ** 6, rng=rng)
    assert est.std_error > 0 and np.isfinite(est.value)
    assert abs(est.value - exact) < 8 * est.std_error
    repn, modeln = runs.get("nde_quadratic_slope")
    exact_n = interferometric_nde(modeln, 0.4).value
    est_n = interferometric_nde(modeln, 0.4, shots=10 ** 6, rng=rng)
    assert est_n.std_error > 0 and np.isfinite(est_n.value)
    assert abs(est_n.value - exact_n) < 8 * est_n.std_error
