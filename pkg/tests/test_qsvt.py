import numpy as np
import pytest
from scipy.linalg import expm

from chebham.assembly import assemble
from chebham.groundstate import eigensolve
from chebham.operators import build_B, build_D, build_G_T
from chebham.problems import bundled_spec
from chebham.qsvt import (BlockEncoding, _dilate, block_encode_B,
                          block_encode_D, block_encode_G, block_encode_dense,
                          build_reflection, g_subnormalization, load_phases,
                          mixed_value, qsp_fit_angles, qsp_value, qsvt_apply,
                          qsvt_prepare_ground)


@pytest.fixture(scope="module")
def phases8():
    return qsp_fit_angles(8.0, 6, 7, seed=0)


def test_dense_encoding_zero():
    enc = block_encode_dense(np.zeros((4, 4)))
    np.testing.assert_allclose(enc.unitary,
                               np.block([[np.zeros((4, 4)), np.eye(4)],
                                         [np.eye(4), np.zeros((4, 4))]]), atol=0)


def test_dilation_identity_block():
    u = _dilate(np.eye(4))
    np.testing.assert_allclose(u, np.block([[np.eye(4), np.zeros((4, 4))],
                                            [np.zeros((4, 4)), -np.eye(4)]]), atol=1e-12)


def test_dense_encoding_random(rng):
    m = rng.standard_normal((8, 8))
    h = m + m.T
    enc = block_encode_dense(h)
    assert enc.unitarity_defect() < 1e-10
    np.testing.assert_allclose(enc.block * enc.scale, h, atol=1e-10)
    np.testing.assert_allclose(enc.block, h / np.linalg.norm(h, "fro"), atol=1e-12)


def test_reflection():
    np.testing.assert_allclose(build_reflection(1), np.diag([1.0, -1.0]), atol=0)
    s = build_reflection(3)
    np.testing.assert_allclose(s @ s, np.eye(8), atol=0)
    proj = (s + np.eye(8)) / 2
    expected = np.zeros((8, 8))
    expected[0, 0] = 1.0
    np.testing.assert_allclose(proj, expected, atol=0)


@pytest.mark.parametrize("n,x0", [(1, 0.3), (2, -0.52), (3, 0.97)])
def test_b_encoding(n, x0):
    enc = block_encode_B(n, x0)
    assert enc.unitarity_defect() < 1e-10
    recovered = enc.block * enc.scale
    np.testing.assert_allclose(recovered, build_B(n, x0).entries, atol=1e-10)
    assert np.linalg.matrix_rank(recovered) == 1


def test_b_encoding_at_node():
    from chebham.basis import chebyshev_nodes, tau_state
    n = 2
    x0 = float(chebyshev_nodes(n)[1])
    enc = block_encode_B(n, x0)
    row = (enc.block * enc.scale)[0]
    node_state = tau_state(n, x0).amplitudes       # unit norm at the nodes
    np.testing.assert_allclose(row / np.linalg.norm(row), node_state, atol=1e-10)


def test_d_encoding():
    n, x_s, val = 2, 0.41, -0.7
    enc = block_encode_D(n, x_s, val)
    np.testing.assert_allclose(enc.block * enc.scale,
                               build_D(n, 0, x_s, val).entries, atol=1e-10)
    assert enc.unitarity_defect() < 1e-10
    with pytest.raises(ZeroDivisionError):
        block_encode_D(n, x_s, 0.0)


def test_d_unit_value_matches_b_scale():
    n, x_s = 2, 0.2
    eb = block_encode_B(n, x_s)
    ed = block_encode_D(n, x_s, 1.0)
    np.testing.assert_allclose(eb.unitary, ed.unitary, atol=0)
    assert abs(eb.scale - ed.scale) < 1e-14


@pytest.mark.parametrize("n", [1, 2, 3])
def test_g_encoding(n):
    enc = block_encode_G(n)
    assert enc.unitarity_defect() < 1e-10
    np.testing.assert_allclose(enc.block * enc.scale, build_G_T(n).entries, atol=1e-6)
    g = build_G_T(n).entries
    gt = g / g_subnormalization(n)
    assert np.linalg.norm(gt, 2) <= 1.0 + 1e-12


def test_g_subnormalization_definition():
    n = 2
    g = build_G_T(n).entries
    one_norm = lambda m: np.max(np.abs(m).sum(axis=0))
    assert abs(g_subnormalization(n) - max(one_norm(g @ g.T), one_norm(g.T @ g))) < 1e-12


# ---------------------------------------------------------------------------
# phase fitting
# ---------------------------------------------------------------------------

def test_fit_trivial_time():
    seq = qsp_fit_angles(0.0, 6, 7)
    assert seq.fit_error < 1e-12
    xs = np.linspace(0, 1, 31)
    np.testing.assert_allclose(mixed_value(seq, xs), 1.0, atol=1e-12)


def test_fit_parity_structure(phases8):
    xs = np.array([0.2, 0.55, 0.9])
    pe = qsp_value(phases8.even_angles, xs)
    pe_m = qsp_value(phases8.even_angles, -xs)
    np.testing.assert_allclose(pe, pe_m, atol=1e-12)
    po = qsp_value(phases8.odd_angles, xs)
    po_m = qsp_value(phases8.odd_angles, -xs)
    np.testing.assert_allclose(po, -po_m, atol=1e-12)


def test_fit_pieces_bounded(phases8):
    xs = np.linspace(-1, 1, 501)
    assert np.max(np.abs(qsp_value(phases8.even_angles, xs))) <= 1 + 1e-9
    assert np.max(np.abs(qsp_value(phases8.odd_angles, xs))) <= 1 + 1e-9


@pytest.mark.xfail(strict=True, reason=(
    "infeasible as stated: a linear program over the full realizable class "
    "(parity pieces bounded by 1 on [-1,1], degrees (6,7)) bounds the sup "
    "error of any fit of exp(-8x) on [0,1] below by 6.3e-2, so no unitary "
    "convention can reach 1e-3; see the t8 floor test"))
def test_fit_t8_reaches_declared_example_tolerance(phases8):
    assert phases8.fit_error < 1e-3


def test_fit_t8_reaches_the_lp_floor(phases8):
    # best achievable at (6,7): 6.27e-2; the fitter should land within 15%
    assert 0.05 < phases8.fit_error < 0.072


def test_fit_error_decreases_with_degree():
    errs = [qsp_fit_angles(2.0, de, do).fit_error
            for de, do in ((2, 3), (4, 5), (6, 7))]
    assert errs[0] > errs[1] > errs[2]


def test_fit_tolerance_failure_reports():
    with pytest.raises(ValueError, match="fit_error"):
        qsp_fit_angles(8.0, 6, 7, tolerance=1e-3)


def test_fit_parity_validation():
    with pytest.raises(ValueError):
        qsp_fit_angles(1.0, 5, 7)
    with pytest.raises(ValueError):
        qsp_fit_angles(1.0, 6, 6)


def test_phase_roundtrip(tmp_path, phases8):
    p = tmp_path / "phases.yaml"
    phases8.save(p)
    again = load_phases(p)
    np.testing.assert_allclose(again.even_angles, phases8.even_angles, atol=0)
    np.testing.assert_allclose(again.odd_angles, phases8.odd_angles, atol=0)
    assert again.t == phases8.t and again.fit_error == phases8.fit_error


# ---------------------------------------------------------------------------
# applying the walk
# ---------------------------------------------------------------------------

def test_apply_identity_polynomial():
    seq = qsp_fit_angles(0.0, 6, 7)
    h = assemble(bundled_spec("legendre_l2")).hamiltonian
    enc = block_encode_dense(h)
    blk = qsvt_apply(seq, enc)
    np.testing.assert_allclose(blk, np.eye(4), atol=1e-10)


def test_apply_spectral_mapping(phases8, rng):
    m = rng.standard_normal((8, 8))
    h = m @ m.T                     # PSD
    enc = block_encode_dense(h)
    ht = enc.block
    blk = qsvt_apply(phases8, enc)
    vals, vecs = np.linalg.eigh(ht)
    mapped = np.array([vecs[:, i] @ blk @ vecs[:, i] for i in range(8)])
    np.testing.assert_allclose(mapped, mixed_value(phases8, vals), atol=1e-8)


def test_apply_matches_exponential_oracle(phases8, rng):
    h = assemble(bundled_spec("legendre_l3")).hamiltonian
    enc = block_encode_dense(h)
    ht = h.matrix / np.linalg.norm(h.matrix, "fro")
    blk = qsvt_apply(phases8, enc)
    v = rng.standard_normal(4)
    v /= np.linalg.norm(v)
    err = np.linalg.norm(blk @ v - expm(-8.0 * ht) @ v)
    assert err <= phases8.fit_error + 1e-8


def test_apply_rejects_missing_ancilla():
    seq = qsp_fit_angles(0.0, 2, 3)
    bad = BlockEncoding(np.eye(4), "x", 1.0, 0, 2)
    with pytest.raises(ValueError):
        qsvt_apply(seq, bad)


@pytest.mark.parametrize("pid,t", [("legendre_l2", 15.0), ("legendre_l3", 8.0)])
def test_ground_prep_fidelity(pid, t):
    h = assemble(bundled_spec(pid).with_n(2)).hamiltonian
    srec = eigensolve(h)
    vec, seq, blk = qsvt_prepare_ground(h, t)
    assert (vec @ srec.ground_vector) ** 2 >= 1 - 1e-4
