"""Norm extraction, power-law fitting, and verdict logic."""

import numpy as np
import pytest

import specband as sb
from specband.decay import L2_MARGIN, NORM_KINDS, SLOPE_MARGIN, judge


def _snapshot(t, values, norm_bound=0.0):
    return sb.StateSnapshot(t=t, values=np.asarray(values, dtype=complex),
                            norm_bound=norm_bound)


def test_state_norm_hand_values():
    snap = _snapshot(1.0, np.pad([3.0, -4.0j, 0.0], (0, 61)))
    assert sb.state_norm(snap, "sup") == 4.0
    assert sb.state_norm(snap, "wsup") == 3.0   # max(3/1, 4/2, 0/3)
    assert sb.state_norm(snap, "l2") == 5.0
    with pytest.raises(ValueError):
        sb.state_norm(snap, "huh")


def test_state_norm_range_guard():
    snap = _snapshot(100.0, np.ones(80), norm_bound=2.0)   # needs 264 sites
    with pytest.raises(sb.RangeTooSmall):
        sb.state_norm(snap, "sup")
    ok = _snapshot(1.0, np.ones(80), norm_bound=2.0)
    assert sb.state_norm(ok, "sup") == 1.0


def test_fit_exponent_recovers_exact_power_law():
    times = sb.geometric_times(10.0, 1000.0, 30)
    for slope, amp in [(-0.5, 2.0), (-1.0 / 3.0, 0.7), (0.0, 1.3)]:
        fit = sb.fit_exponent(times, amp * times**slope, t_min=10.0)
        assert fit.slope == pytest.approx(slope, abs=1e-12)
        assert fit.intercept == pytest.approx(np.log(amp), abs=1e-12)
        assert fit.stderr < 1e-12
        assert fit.n_points == 30
    fit = sb.fit_exponent(times, 2.0 * times**-0.5, t_min=100.0)
    assert fit.n_points == int(np.sum(times >= 100.0))
    assert fit.t_min == 100.0


def test_fit_exponent_guards():
    times = np.asarray([1.0, 2.0, 5.0, 30.0, 40.0, 50.0, 60.0, 70.0])
    with pytest.raises(sb.InsufficientPoints):
        sb.fit_exponent(times, np.ones_like(times), t_min=20.0)
    good_t = sb.geometric_times(20.0, 200.0, 10)
    vals = np.ones_like(good_t)
    vals[3] = 0.0
    with pytest.raises(sb.NonPositiveNorm):
        sb.fit_exponent(good_t, vals, t_min=20.0)
    vals[3] = np.nan
    with pytest.raises(sb.NonPositiveNorm):
        sb.fit_exponent(good_t, vals, t_min=20.0)


def test_fit_uncertainty_covers_noisy_truth():
    rng = np.random.default_rng(7)
    times = sb.geometric_times(20.0, 2000.0, 40)
    noise = rng.normal(0.0, 0.01, size=times.size)
    fit = sb.fit_exponent(times, 1.7 * times**-0.5 * np.exp(noise))
    assert abs(fit.slope + 0.5) < 3.0 * fit.stderr + 1e-3
    assert fit.half_width == pytest.approx(1.96 * fit.stderr)


def test_judge_rules():
    def fake(slope):
        return sb.FitResult(slope=slope, intercept=0.0, stderr=0.0,
                            half_width=0.0, n_points=24, t_min=20.0)

    assert judge("l2", fake(0.0), 0.0) is True
    assert judge("l2", fake(L2_MARGIN + 0.001), 0.0) is False
    assert judge("l2", fake(-L2_MARGIN - 0.001), 0.0) is False
    assert judge("sup", fake(-0.4), -1.0 / 3.0) is True
    assert judge("sup", fake(-1.0 / 3.0 + SLOPE_MARGIN - 0.001), -1.0 / 3.0) is True
    assert judge("sup", fake(-1.0 / 3.0 + SLOPE_MARGIN + 0.001), -1.0 / 3.0) is False
    assert judge("sup", fake(-0.2), None) is None
    assert judge("wsup", fake(-0.9), -0.5) is True


def test_geometric_times():
    g = sb.geometric_times(2.0, 32.0, 5)
    assert np.allclose(g, [2.0, 4.0, 8.0, 16.0, 32.0])
    for bad in [(0.0, 10.0, 5), (-1.0, 10.0, 5), (10.0, 10.0, 5), (5.0, 2.0, 3),
                (1.0, 10.0, 1)]:
        with pytest.raises(ValueError):
            sb.geometric_times(*bad)


def test_decay_experiment_on_laplacian(laplacian_data):
    times = sb.geometric_times(20.0, 200.0, 12)
    exp = sb.decay_experiment(
        laplacian_data.operator, sb.FiniteState.delta(1), times,
        data=laplacian_data,
    )
    assert set(exp.norms) == set(NORM_KINDS)
    by_kind = {r.kind: r for r in exp.reports}
    # free evolution: sup decays like t^(-1/3), the weighted norm much faster,
    # and the l2 norm of the continuous part is conserved
    assert by_kind["sup"].predicted == pytest.approx(-1.0 / 3.0)
    assert by_kind["sup"].passed is True
    assert by_kind["wsup"].predicted == -0.5
    assert by_kind["wsup"].passed is True
    assert by_kind["l2"].passed is True
    assert abs(by_kind["l2"].fit.slope) < 1e-6
    d = by_kind["sup"].to_dict()
    assert d["kind"] == "sup" and d["passed"] is True


def test_decay_report_unclassified_to_dict():
    fit = sb.FitResult(slope=-0.4, intercept=0.0, stderr=0.01,
                       half_width=0.0196, n_points=24, t_min=20.0)
    rep = sb.DecayReport(kind="sup", fit=fit, predicted=None, passed=None)
    d = rep.to_dict()
    assert d["predicted"] == "unclassified"
    assert d["passed"] is None


def test_norm_series_matches_manual(laplacian_data):
    times = [5.0, 9.0]
    res = sb.evolve_grid(
        laplacian_data.operator, sb.FiniteState.delta(1), times,
        data=laplacian_data,
    )
    series = sb.norm_series(res, "sup")
    manual = [float(np.max(np.abs(res.amplitudes[i]))) for i in range(2)]
    assert np.allclose(series, manual)
