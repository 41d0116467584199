import numpy as np
import pytest

from stabkit import alpha as al
from stabkit import odeint
from stabkit.errors import ZeroTrajectoryError
from conftest import gallery_system


def diag_exp_p(t):
    return np.diag([np.exp(-9.0 * t), 1.0])


def test_shifted_matrices_two_lag():
    ds = gallery_system("delay_two_lag")
    a0a, ais = al.shifted_matrices(ds, 0.5)
    assert np.allclose(a0a, [[-7.0 / 3.0, 0.0], [4.0 / 3.0, -3.0]], atol=1e-12)
    for aia in ais:
        assert np.allclose(aia, np.eye(2), atol=1e-12)


def test_shifted_matrices_identity_at_zero_rate():
    ds = gallery_system("delay_coupled")
    a0a, ais = al.shifted_matrices(ds, 0.0)
    assert np.allclose(a0a, ds.a0)
    for aia, (_, coeff) in zip(ais, ds.delays):
        assert np.allclose(aia, coeff)


def test_shifted_matrices_time_varying():
    ds = gallery_system("delay_gain_scheduled")
    a0a, _ = al.shifted_matrices(ds, 1.0)
    got = a0a(0.3)
    a0 = ds.a0_fn()(0.3)
    assert np.allclose(got, a0 + np.eye(2), atol=1e-14)
    assert got[1, 1] == pytest.approx(-6.5)


def test_rde_residual_gain_scheduled():
    ds = gallery_system("delay_gain_scheduled")
    assert al.rde_residual(ds, 1.0, diag_exp_p) < 1e-6


def test_rde_residual_two_lag_exact():
    ds = gallery_system("delay_two_lag")
    p = np.array([[1.0, -1.0], [-1.0, 1.0]])
    assert al.rde_residual(ds, 0.5, p) < 1e-9


def test_rde_residual_generic_defect():
    ds = gallery_system("delay_two_lag")
    assert al.rde_residual(ds, 0.5, np.eye(2)) > 0.1


def test_solve_delay_lyapunov():
    p = al.solve_delay_lyapunov([[-2.0, 0.5], [-1.0, -4.0]], 2)
    assert np.abs(p - np.diag([0.5, 0.25])).max() < 1e-10
    assert np.allclose(al.solve_delay_lyapunov(-np.eye(2), 2), np.eye(2))


def test_lyapunov_defect_time_varying():
    # dP/dt + A0'P + P A0 + 2I for P(t) = exp(-t) I on the rotating system
    ds = gallery_system("delay_rotating")
    p = al.SampledMatrixFunction.from_callable(
        lambda t: np.exp(-t) * np.eye(2), 0.0, 5.0, 20001)
    cert = al.certify(ds, 0.2, al.CertificateRoute.RATE_INEQUALITY,
                      p=p, horizon=0.0)
    assert cert.residual < 1e-6
    assert cert.p_semidefinite


def test_rate_inequality_values():
    lhs = al.rate_inequality_lhs(-0.5, 2.0, np.exp(-0.4) / 1600.0, 2, 1.0, 0.2)
    assert lhs == pytest.approx(-0.0975, abs=1e-10)
    eta = -3.0 + 0.5 * np.sqrt(4.25)
    lhs2 = al.rate_inequality_lhs(eta, 1.5, np.exp(-0.8) / 9.0, 2, 1.0, 0.4)
    assert lhs2 == pytest.approx(-1.1192235935955849, abs=1e-9)
    # alpha = 0 with negligible gain reduces to eta
    assert al.rate_inequality_lhs(-0.7, 1.0, 1e-12, 1, 1.0, 0.0) == \
        pytest.approx(-0.7, abs=1e-10)


def test_max_alpha_against_bisection_oracle():
    from scipy.optimize import brentq

    cases = [(-0.5, 2.0, np.exp(-0.4) / 1600.0, 2, 1.0),
             (-3.0 + 0.5 * np.sqrt(4.25), 1.5, np.exp(-0.8) / 9.0, 2, 1.0)]
    for eta, pn, a2, m, h in cases:
        got = al.max_alpha(eta, pn, a2, m, h)
        want = brentq(lambda a: al.rate_inequality_lhs(eta, pn, a2, m, h, a),
                      1e-12, 10.0, xtol=1e-12)
        assert got == pytest.approx(want, abs=1e-8)
        assert abs(al.rate_inequality_lhs(eta, pn, a2, m, h, got)) < 1e-6


def test_max_alpha_infeasible():
    assert al.max_alpha(1.0, 1.0, 0.01, 1, 1.0) is None


def test_max_alpha_monotonicity():
    rng = np.random.default_rng(31)
    for _ in range(40):
        eta = -float(rng.uniform(0.5, 3.0))
        pn = float(rng.uniform(0.5, 3.0))
        a2 = float(rng.uniform(1e-4, 0.1))
        m = int(rng.integers(1, 4))
        h = float(rng.uniform(0.1, 2.0))
        base = al.max_alpha(eta, pn, a2, m, h)
        if base is None:
            continue
        # bisection terminates on the boundary of the feasible set
        assert abs(al.rate_inequality_lhs(eta, pn, a2, m, h, base)) < 1e-6
        for bumped in (al.max_alpha(eta, pn * 1.2, a2, m, h),
                       al.max_alpha(eta, pn, a2 * 1.5, m, h),
                       al.max_alpha(eta, pn, a2, m, h * 1.3),
                       al.max_alpha(eta, pn, a2, m + 1, h)):
            assert bumped is None or bumped <= base + 1e-8
        lower_eta = al.max_alpha(eta - 0.5, pn, a2, m, h)
        assert lower_eta is not None and lower_eta >= base - 1e-8


def test_fit_envelope_modulated_decay():
    traj = odeint.integrate(gallery_system("modulated_decay"),
                            [1.0], 0.0, 20.0, 1e-3)
    env = al.fit_envelope(traj)
    assert 1.4 <= env.rate <= 1.6
    assert env.verified
    assert env.coefficient <= np.exp(0.25) * 1.001
    # bound holds on the window by construction
    mask = traj.times >= env.window[0]
    assert np.all(traj.norms()[mask]
                  <= env.coefficient * np.exp(-env.rate * traj.times[mask])
                  * (1 + 1e-12))


def test_fit_envelope_pure_exponential():
    sysd = odeint.SystemDef(1, odeint.Nonlinear(("-2*x1",)))
    traj = odeint.integrate(sysd, [1.0], 0.0, 10.0, 1e-3)
    env = al.fit_envelope(traj)
    assert env.rate == pytest.approx(2.0, abs=1e-3)
    assert env.coefficient == pytest.approx(1.0, abs=1e-2)


def test_fit_envelope_subexponential_decay():
    sysd = gallery_system("algebraic_decay")
    short = al.fit_envelope(odeint.integrate(sysd, [1.0], 0.0, 10.0, 1e-3),
                            t_lo=0.0)
    long = al.fit_envelope(odeint.integrate(sysd, [1.0], 0.0, 100.0, 1e-3),
                           t_lo=0.0)
    assert long.rate < short.rate  # fitted rate collapses with the window


def test_fit_envelope_rejects_zero_trajectory():
    traj = odeint.Trajectory(np.array([0.0, 1.0, 2.0]),
                             np.zeros((3, 1)), 1.0)
    with pytest.raises(ZeroTrajectoryError):
        al.fit_envelope(traj)


def test_certify_gain_scheduled_rde():
    cert = al.certify(gallery_system("delay_gain_scheduled"), 1.0,
                      al.CertificateRoute.RDE, p=diag_exp_p, horizon=20.0)
    assert cert.valid
    assert cert.residual < 1e-6
    assert cert.p_semidefinite
    assert cert.trajectory_check is not None and cert.trajectory_check.verified


def test_certify_two_lag_algebraic():
    p = np.array([[1.0, -1.0], [-1.0, 1.0]])
    cert = al.certify(gallery_system("delay_two_lag"), 0.5,
                      al.CertificateRoute.ALGEBRAIC_RDE, p=p,
                      residual_tol=1e-9, horizon=20.0)
    assert cert.valid
    assert cert.residual < 1e-9
    assert cert.trajectory_check.verified


def test_certify_coupled_rate_inequality():
    cert = al.certify(gallery_system("delay_coupled"), 0.4,
                      al.CertificateRoute.RATE_INEQUALITY, horizon=20.0)
    assert cert.valid
    assert cert.inequality_margin == pytest.approx(-1.11922359, abs=1e-6)
    assert cert.inputs.p_norm == pytest.approx(1.5, abs=1e-12)
    assert cert.trajectory_check.verified


def test_certified_trajectories_decay():
    # exponential stability implies asymptotic decay of the simulated norm
    for name, rate, route, p in [
        ("delay_coupled", 0.4, al.CertificateRoute.RATE_INEQUALITY, None),
        ("delay_two_lag", 0.5, al.CertificateRoute.ALGEBRAIC_RDE,
         np.array([[1.0, -1.0], [-1.0, 1.0]])),
    ]:
        ds = gallery_system(name)
        sd = ds.as_systemdef()
        h = odeint.dde_step([lag for lag, _ in ds.delays])
        traj = odeint.integrate_dde(
            sd, odeint.HistoryFn.constant(np.ones(2), ds.max_lag), 20.0, h)
        assert traj.norms()[-1] < 1e-2 * traj.norms()[0]


def test_certify_rejects_missing_p_on_residual_routes():
    with pytest.raises(ValueError):
        al.certify(gallery_system("delay_two_lag"), 0.5,
                   al.CertificateRoute.ALGEBRAIC_RDE)
