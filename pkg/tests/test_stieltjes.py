import numpy as np
import pytest
import scipy.integrate
from scipy.special import eval_chebyu

from freedec import (
    ChebyshevPadeEvaluator,
    DensityModel,
    InputError,
    JacobiGlueEvaluator,
    LanczosEvaluator,
    LawEvaluator,
    chebyshev_coefficients_from_grid,
    fit_glue,
    jacobi_coefficients,
    joukowski,
    joukowski_inverse,
    lanczos_stieltjes,
    lanczos_tridiagonal,
    law_density,
    law_stieltjes,
    make_rng,
    marchenko_pastur_law,
    wigner_law,
    wynn_epsilon,
)


def _quad_transform(density, lo, hi, z):
    re = scipy.integrate.quad(lambda s: (density(s) / (s - z)).real, lo, hi, limit=400)[0]
    im = scipy.integrate.quad(lambda s: (density(s) / (s - z)).imag, lo, hi, limit=400)[0]
    return re + 1j * im


def _mp_model(lam=0.5, k_max=40):
    law = marchenko_pastur_law(lam)
    sup = (law.support[0] - 1e-9, law.support[1] + 1e-9)
    xs = np.linspace(sup[0], sup[1], 8192)
    psi = chebyshev_coefficients_from_grid(xs, law_density(law, xs), sup, k_max)
    return DensityModel(support=sup, basis="chebyshev-u", psi=psi), law


# ---------------------------------------------------------------------------
# Joukowski


def test_joukowski_inverse_pair():
    w = 0.5 * np.exp(1j * np.pi / 3)
    z = joukowski(w)
    assert abs(joukowski_inverse(z) - w) <= 1e-12


def test_joukowski_inverse_roundtrip():
    rng = make_rng(12)
    z = rng.uniform(-3, 3, 60) + 1j * rng.uniform(0.01, 2.0, 60)
    assert np.max(np.abs(joukowski(joukowski_inverse(z)) - z)) <= 1e-12


def test_joukowski_tail():
    y = 1e4
    want = 1.0 / (2j * y)
    got = joukowski_inverse(1j * y)
    assert abs(got - want) / abs(want) <= 1e-3


def test_joukowski_unit_disk():
    x = np.linspace(-0.99, 0.99, 41)
    assert np.max(np.abs(joukowski_inverse(x + 1e-6j))) <= 1.0 + 1e-12
    rng = make_rng(3)
    z = rng.uniform(-4, 4, 100) + 1j * rng.uniform(1e-4, 5, 100)
    assert np.max(np.abs(joukowski_inverse(z))) <= 1.0


def test_chebyshev_weight_transform_identity():
    # quadrature of U_k(x) sqrt(1-x^2) / (z - x) equals pi J(z)^(k+1)
    rng = make_rng(8)
    for k in range(6):
        for _ in range(3):
            z = rng.uniform(-2, 2) + 1j * rng.uniform(0.1, 2.0)
            got = _quad_transform(
                lambda s, k=k: eval_chebyu(k, s) * np.sqrt(1 - s * s), -1, 1, z
            )
            assert abs(-got - np.pi * joukowski_inverse(z) ** (k + 1)) <= 1e-8


# ---------------------------------------------------------------------------
# Wynn epsilon


def test_wynn_geometric_beyond_radius():
    assert abs(wynn_epsilon(np.ones(10), 2.0) - (-1.0)) <= 1e-10


def test_wynn_constant_series():
    assert wynn_epsilon([5.0, 0.0], 123.0) == pytest.approx(5.0)


def test_wynn_two_pole_rational():
    k = np.arange(12)
    coeffs = 1.5 - 0.5 * (1.0 / 3.0) ** k  # 1/((1-z)(1-z/3))
    want = 1.0 / ((1 - 2.0) * (1 - 2.0 / 3.0))
    assert abs(wynn_epsilon(coeffs, 2.0) - want) <= 1e-8


def test_wynn_vectorized_matches_scalar():
    coeffs = 0.7 ** np.arange(15)
    zs = np.array([0.2 + 0.1j, 1.7 - 0.3j, -2.4 + 0.0j])
    vec = wynn_epsilon(coeffs, zs)
    for i, z in enumerate(zs):
        assert abs(vec[i] - wynn_epsilon(coeffs, complex(z))) <= 1e-12


def test_wynn_breakdown_flag():
    _, _, broke = wynn_epsilon(np.array([1.0, 0.0, 0.0, 0.0]), 0.5, return_info=True)
    assert broke  # exact constant series trips the guard immediately


# ---------------------------------------------------------------------------
# Pade-Chebyshev evaluator


def test_single_mode_transform_closed_form():
    model = DensityModel(support=(-1.0, 1.0), basis="chebyshev-u", psi=np.array([2 / np.pi]))
    ev = ChebyshevPadeEvaluator(model)
    z = 2j
    got = ev.evaluate(z, "principal")
    want = _quad_transform(model.density, -1, 1, z)
    assert abs(got - want) <= 1e-8
    assert got == pytest.approx(-2.0 * joukowski_inverse(z), abs=1e-12)


def test_pade_matches_quadrature_upper_plane():
    model, law = _mp_model()
    ev = ChebyshevPadeEvaluator(model)
    rng = make_rng(4)
    for _ in range(5):
        z = complex(rng.uniform(0, 3), rng.uniform(0.2, 2.0))
        want = _quad_transform(model.density, *model.support, z)
        assert abs(ev.evaluate(z, "principal") - want) <= 1e-6


def test_pade_secondary_matches_law_second_sheet():
    model, law = _mp_model()
    ev = ChebyshevPadeEvaluator(model)
    pts = np.array([1.0 - 0.4j, 0.5 - 0.2j, 2.2 - 0.8j])
    got = ev.evaluate(pts, "secondary")
    want = law_stieltjes(law, pts, "secondary")
    assert np.max(np.abs(got - want)) <= 1e-3


def test_pade_cut_continuity_and_branch_agreement():
    model, _ = _mp_model()
    ev = ChebyshevPadeEvaluator(model)
    lo, hi = model.support
    x = np.linspace(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo), 11)
    jump = np.abs(ev.evaluate(x + 1e-6j, "secondary") - ev.evaluate(x - 1e-6j, "secondary"))
    assert np.max(jump) <= 1e-4
    z = x + 0.5j
    assert np.max(np.abs(ev.evaluate(z, "secondary") - ev.evaluate(z, "principal"))) <= 1e-10


def test_pade_tail_and_schwarz_and_herglotz():
    model, _ = _mp_model()
    ev = ChebyshevPadeEvaluator(model)
    lo, hi = model.support
    z_far = 0.5 * (lo + hi) + 1e4j * (hi - lo)
    assert abs(z_far * ev.evaluate(z_far, "principal") + 1.0) <= 1e-3
    rng = make_rng(6)
    z = rng.uniform(lo, hi, 20) + 1j * rng.uniform(0.05, 2, 20)
    m = ev.evaluate(z, "principal")
    assert np.min(m.imag) > 0
    assert np.max(np.abs(ev.evaluate(np.conj(z), "principal") - np.conj(m))) <= 1e-12


def test_pade_plemelj_recovery():
    model, _ = _mp_model()
    ev = ChebyshevPadeEvaluator(model)
    lo, hi = model.support
    x = np.linspace(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), 31)
    approx = ev.evaluate(x + 1e-6j, "secondary").imag / np.pi
    assert np.max(np.abs(approx - model.density(x))) <= 1e-3


# ---------------------------------------------------------------------------
# glue


def test_glue_exact_for_mp_law():
    law = marchenko_pastur_law(0.25)
    glue = fit_glue(law)
    lo, hi = law.support
    x = np.linspace(lo + 1e-3, hi - 1e-3, 64)
    lam = 0.25
    want = (1 - lam - x) / (lam * x)  # P/Q
    assert np.max(np.abs(glue(x).real - want)) <= 1e-6
    assert np.all((glue.poles < lo) | (glue.poles > hi))


def test_glue_wigner_is_linear():
    law = wigner_law(2.0)
    glue = fit_glue(law)
    assert glue.c == pytest.approx(-1.0, abs=1e-8)
    assert glue.d == pytest.approx(0.0, abs=1e-8)
    assert np.max(np.abs(glue.residues)) <= 1e-7 if glue.residues.size else True


def test_glue_linear_target_needs_no_poles():
    # a pure single-mode model has an exactly linear Hilbert transform
    model = DensityModel(support=(-1.0, 1.0), basis="chebyshev-u", psi=np.array([2 / np.pi]))
    glue = fit_glue(model, q=0)
    assert glue.residual <= 1e-10
    assert glue.poles.size == 0
    # radius-1 semicircle: H = -2x, so G = 2H = -4x
    assert glue.c == pytest.approx(-4.0, abs=1e-10)
    assert glue.d == pytest.approx(0.0, abs=1e-10)


def test_glue_continuation_matches_second_sheet():
    model, law = _mp_model(lam=0.25)
    glue = fit_glue(model)
    ev = ChebyshevPadeEvaluator(model, glue=glue)
    pts = np.array([1.1 - 0.3j, 0.8 - 0.1j, 1.6 - 0.5j])
    want = law_stieltjes(law, pts, "secondary")
    got = ev.evaluate(pts, "secondary")
    assert np.max(np.abs(got - want) / np.abs(want)) <= 0.02


# ---------------------------------------------------------------------------
# Jacobi-glue evaluator


def _jacobi_model(lam=0.5, k_max=24):
    law = marchenko_pastur_law(lam)
    sup = (law.support[0] - 1e-9, law.support[1] + 1e-9)
    xs = np.linspace(sup[0], sup[1], 8192)
    phi = jacobi_coefficients(xs, law_density(law, xs), sup, 0.5, 0.5, k_max, 0.0)
    return DensityModel(support=sup, basis="jacobi", psi=phi, alpha=0.5, beta=0.5), law


def test_jacobi_glue_node_counts():
    model, _ = _jacobi_model()
    ev = JacobiGlueEvaluator(model, n0=16)
    assert ev.node_counts == [max(k + 1, 16) for k in range(model.psi.size)]


def test_jacobi_glue_agrees_with_pade():
    model_j, law = _jacobi_model()
    model_u, _ = _mp_model(lam=0.5, k_max=24)
    ev_j = JacobiGlueEvaluator(model_j, n0=64)
    ev_u = ChebyshevPadeEvaluator(model_u)
    rng = make_rng(9)
    lo, hi = law.support
    z = rng.uniform(lo, hi, 50) + 1j * rng.uniform(0.3, 2.0, 50) * (hi - lo)
    got = ev_j.evaluate(z, "principal")
    want = ev_u.evaluate(z, "principal")
    assert np.max(np.abs(got - want)) <= 1e-5


def test_jacobi_glue_cut_behaviour():
    # The boundary-value jump through the cut is exactly |G - 2H|, the
    # glue's fit residual; across the real axis outside the support the two
    # sheets genuinely disagree.
    from freedec.stieltjes import _model_hilbert

    model, law = _jacobi_model()
    ev = JacobiGlueEvaluator(model, n0=64)
    lo, hi = law.support
    x_in = np.linspace(lo + 0.15 * (hi - lo), hi - 0.15 * (hi - lo), 9)
    jump_in = np.max(np.abs(ev.glue(x_in).real - 2.0 * _model_hilbert(model, x_in)))
    eta = 0.03 * (hi - lo)
    x_out = hi + 0.5 * (hi - lo)
    jump_out = abs(
        ev.evaluate(x_out + 1j * eta, "secondary") - ev.evaluate(x_out - 1j * eta, "secondary")
    )
    assert jump_in <= 10.0 * ev.glue.residual
    assert jump_out > 10.0 * jump_in


# ---------------------------------------------------------------------------
# Lanczos


def test_lanczos_diag_exact():
    a = np.diag([1.0, 2.0, 3.0])
    start = np.ones(3) / np.sqrt(3.0)
    z = 1j
    got = lanczos_stieltjes(a, 3, z, start=start)
    want = np.mean(1.0 / (np.array([1.0, 2.0, 3.0]) - z))
    assert abs(got - want) <= 1e-12


def test_lanczos_single_step():
    rng = make_rng(14)
    x = rng.standard_normal((6, 6))
    a = (x + x.T) / 2
    v0 = rng.standard_normal(6)
    v0 /= np.linalg.norm(v0)
    z = 0.3 + 0.7j
    got = lanczos_stieltjes(a, 1, z, start=v0)
    alpha0 = v0 @ a @ v0
    assert abs(got - 1.0 / (alpha0 - z)) <= 1e-12


def test_lanczos_goe_matches_eigensum():
    rng = make_rng(15)
    x = rng.standard_normal((200, 200))
    a = (x + x.T) / 2
    z = 2j * np.sqrt(200)
    got = lanczos_stieltjes(a, 60, z, seed=5, average=6)
    lam = np.linalg.eigvalsh(a)
    want = np.mean(1.0 / (lam - z))
    assert abs(got - want) <= 1e-4 * abs(want) / abs(want) + 1e-4


def test_lanczos_history_converges():
    rng = make_rng(16)
    x = rng.standard_normal((100, 100))
    a = (x + x.T) / 2
    z = 1j * np.sqrt(100)
    _, hist = lanczos_stieltjes(a, 30, z, seed=2, return_history=True)
    diffs = np.abs(np.diff(hist.ravel()))
    assert diffs[-1] <= 1e-6  # successive-approximant stopping signal


def test_lanczos_breakdown_terminates_exactly():
    a = np.diag([1.0, 2.0])
    alphas, betas, p_eff = lanczos_tridiagonal(a, 2, start=np.array([1.0, 0.0]))
    assert p_eff == 1  # start vector spans an invariant subspace
    assert alphas[0] == pytest.approx(1.0)


def test_lanczos_rejects_real_z():
    with pytest.raises(InputError):
        lanczos_stieltjes(np.eye(3), 2, 1.5, seed=0)


def test_lanczos_evaluator_branches_coincide():
    rng = make_rng(17)
    x = rng.standard_normal((50, 50))
    a = (x + x.T) / 2
    ev = LanczosEvaluator(a, 20, seed=3)
    z = 1.0 - 0.5j
    assert ev.evaluate(z, "principal") == ev.evaluate(z, "secondary")


# ---------------------------------------------------------------------------
# law evaluator plumbing


def test_law_evaluator_interface():
    law = marchenko_pastur_law(0.5)
    ev = LawEvaluator(law)
    z = 1.2 + 0.3j
    assert ev.evaluate(z) == law_stieltjes(law, z, "secondary")
    h = 1e-7
    fd = (law_stieltjes(law, z + h) - law_stieltjes(law, z - h)) / (2 * h)
    assert abs(ev.derivative(z, "principal") - fd) <= 1e-6 * abs(fd)
