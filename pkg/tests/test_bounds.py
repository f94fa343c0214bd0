"""Bound pipeline: envelope weights, generating-function integrals with
independent series oracles, the clamped tail bound, C_N regression values
frozen from the first validated run, and the selection contract."""

import json
import math

import numpy as np
import pytest

from orthoproc import (
    BoundReport,
    ConvergenceError,
    DomainError,
    Kernel,
    OrliczSpec,
    ProcessSpec,
    Resolution,
    TailBoundSpec,
    builtin_kernel,
    c_n_bound,
    check_conditions,
    gegenbauer,
    gegenbauer_norm_squared,
    gf_square_integral,
    gf_square_integral_oracle,
    laguerre,
    legendre,
    select_N,
    tail_norm_bound,
    tail_weights,
    tau_bound,
)

TB = TailBoundSpec(1.0, 0.5)


def make_spec(kernel_name, family, p=2.0, horizon=1.0, tb=TB):
    return ProcessSpec(
        kernel=builtin_kernel(kernel_name),
        family=family,
        horizon=horizon,
        p=p,
        orlicz=OrliczSpec(2.0),
        tail=tb,
    )


def gamma_by_reflection(x):
    """Gamma at negative non-integer x without calling math.gamma there."""
    return math.pi / (math.sin(math.pi * x) * math.gamma(1.0 - x))


def test_tau_bound_examples():
    assert tau_bound(legendre(), TB, 0) == pytest.approx(math.sqrt(2.0), rel=1e-14)
    # Gamma(3)/2! = 1, so only the geometric factor remains
    assert tau_bound(laguerre(0.0), TB, 2) == pytest.approx(0.25, rel=1e-14)
    assert tau_bound(laguerre(1.0), TailBoundSpec(1.0, 0.9), 2) == pytest.approx(
        math.sqrt(3.0) * 0.81, rel=1e-13
    )
    assert tau_bound(gegenbauer(0.5), TailBoundSpec(2.0, 0.9), 0) == pytest.approx(
        math.sqrt(2.0), rel=1e-13
    )


def test_tau_bound_negative_alpha_origin():
    # k=0, alpha<0: sqrt(alpha / Gamma(2 alpha)), both factors negative
    alpha = -0.3
    expected = math.sqrt(alpha / gamma_by_reflection(2.0 * alpha))
    assert tau_bound(gegenbauer(alpha), TB, 0) == pytest.approx(expected, rel=1e-13)
    assert tau_bound(gegenbauer(alpha), TB, 0) > 0.0


def test_tau_bound_survives_high_order():
    v = tau_bound(laguerre(1.7), TailBoundSpec(1.0, 0.99), 5000)
    assert math.isfinite(v) and v > 0.0
    v = tau_bound(gegenbauer(2.3), TailBoundSpec(1.0, 0.99), 5000)
    assert math.isfinite(v) and v > 0.0
    # deep geometric decay underflows gracefully to zero
    assert tau_bound(legendre(), TB, 5000) == 0.0


def test_tail_weights_consistency():
    tw = tail_weights(laguerre(1.7), TB, 6)
    assert tw.shape == (7,)
    for k in range(7):
        assert tw[k] == tau_bound(laguerre(1.7), TB, k)


def series_gf_integral(family, w, terms=500):
    """Independent oracle: sum of squared-norm-weighted powers w^{2k}."""
    if family.kind == "legendre":
        return sum(2.0 / (2 * k + 1) * w ** (2 * k) for k in range(terms))
    if family.kind == "laguerre":
        a = family.alpha
        return sum(
            math.exp(math.lgamma(k + a + 1.0) - math.lgamma(k + 1.0) - math.lgamma(a + 1.0))
            * math.gamma(a + 1.0)
            * w ** (2 * k)
            for k in range(terms)
        )
    return sum(gegenbauer_norm_squared(family.alpha, k) * w ** (2 * k) for k in range(terms))


def test_gf_square_integral_spot_values():
    assert gf_square_integral(legendre(), 0.5) == pytest.approx(2.0 * math.log(3.0), abs=1e-12)
    assert gf_square_integral(laguerre(0.0), 0.5) == pytest.approx(4.0 / 3.0, abs=1e-12)
    assert gf_square_integral(gegenbauer(1.0), 0.5) == pytest.approx(
        2.0 * math.pi / 3.0, abs=1e-9
    )


def test_gf_square_integral_atanh_identity():
    for w in (0.1, 0.4, 0.8):
        assert gf_square_integral(legendre(), w) == pytest.approx(
            2.0 * math.atanh(w) / w, rel=1e-14
        )


def test_gf_square_integral_against_series_oracle():
    for family in (legendre(), laguerre(0.0), laguerre(1.7), gegenbauer(1.0), gegenbauer(2.3)):
        for w in (0.3, 0.6):
            assert gf_square_integral(family, w) == pytest.approx(
                series_gf_integral(family, w), rel=1e-10
            )


def test_gf_square_integral_against_quadrature_oracle():
    for family in (legendre(), laguerre(-0.5), laguerre(1.7), gegenbauer(0.5), gegenbauer(2.3)):
        for w in (0.2, 0.7):
            closed = gf_square_integral(family, w)
            oracle = gf_square_integral_oracle(family, w, 384)
            assert closed == pytest.approx(oracle, rel=1e-8)


def test_gf_square_integral_w_guard():
    for w in (0.0, 1.0, 1.3, -0.1):
        with pytest.raises(DomainError):
            gf_square_integral(legendre(), w)


def test_tail_norm_bound_budget_only():
    # zero coefficients leave the full budget: sqrt(2 ln 3) at unit energy
    got = tail_norm_bound(legendre(), TB, 1.0, [0.0, 0.0, 0.0])
    assert got == pytest.approx(math.sqrt(2.0 * math.log(3.0)), rel=1e-12)
    assert tail_norm_bound(legendre(), TB, 1.0, []) == pytest.approx(
        math.sqrt(2.0 * math.log(3.0)), rel=1e-12
    )


def test_tail_norm_bound_clamp_and_zero():
    # spending beyond the budget clamps to zero instead of going negative
    assert tail_norm_bound(legendre(), TB, 1.0, [100.0]) == 0.0
    assert tail_norm_bound(legendre(), TB, 0.0, [0.0]) == 0.0
    with pytest.raises(DomainError):
        tail_norm_bound(legendre(), TB, -0.5, [0.0])


def test_tail_norm_bound_subtracts_weighted_sum():
    coeffs = [0.3, 0.1]
    budget = math.sqrt(2.0 * math.log(3.0))
    spent = math.sqrt(2.0) * 0.3 + math.sqrt(2.0 / 3.0) * 0.5 * 0.1
    got = tail_norm_bound(legendre(), TB, 1.0, coeffs)
    assert got == pytest.approx(budget - spent, rel=1e-12)


def test_c_n_regression_frozen():
    spec = make_spec("exp-bounded", legendre())
    assert c_n_bound(spec, 4, 0.1, 0.05).c_n == pytest.approx(
        0.0015995231371510796, abs=1e-12
    )
    assert c_n_bound(spec, 0, 0.1, 0.05).c_n == pytest.approx(
        0.060870801363565839, abs=1e-12
    )
    spec = make_spec("exp-decay", laguerre(0.0))
    assert c_n_bound(spec, 2, 0.01, 0.05).c_n == pytest.approx(
        0.0001967394951826293, abs=1e-12
    )
    spec = make_spec("poly-bounded", gegenbauer(1.0))
    assert c_n_bound(spec, 2, 3.3, 0.05).c_n == pytest.approx(
        0.39014946848376192, abs=1e-10
    )


def zero_kernel(energy_value):
    return Kernel(
        "zero",
        (-1.0, 1.0),
        lambda t, lam: np.zeros((np.asarray(t).size, np.asarray(lam).size)),
        lambda t: np.full(np.asarray(t).shape, energy_value),
    )


def test_c_n_constant_energy_closed_form():
    # all coefficients zero, energy 1, p=1: C_N = T tau sqrt(I(w))
    spec = ProcessSpec(
        kernel=zero_kernel(1.0),
        family=legendre(),
        horizon=2.0,
        p=1.0,
        orlicz=OrliczSpec(2.0),
        tail=TB,
    )
    report = c_n_bound(spec, 3, 0.1, 0.05)
    expected = 2.0 * math.sqrt(2.0 * math.log(3.0))
    assert report.c_n == pytest.approx(expected, rel=1e-12)
    assert report.clamped_fraction == 0.0


def test_c_n_zero_energy_passes_everything():
    spec = ProcessSpec(
        kernel=zero_kernel(0.0),
        family=legendre(),
        horizon=1.0,
        p=2.0,
        orlicz=OrliczSpec(2.0),
        tail=TB,
    )
    report = c_n_bound(spec, 1, 1e-9, 0.05)
    assert report.c_n == 0.0
    assert check_conditions(report)


def test_check_conditions_boundary_semantics():
    base = dict(
        family=legendre(),
        n=1,
        clamped_fraction=0.0,
        gf_integral_value=1.0,
        gf_integral_oracle=1.0,
    )
    at_rel = BoundReport(
        c_n=0.5, threshold_rel=0.5, threshold_acc=0.6, pass_rel=True, pass_acc=True, **base
    )
    assert check_conditions(at_rel)  # <= is inclusive
    at_acc = BoundReport(
        c_n=0.6, threshold_rel=0.7, threshold_acc=0.6, pass_rel=True, pass_acc=False, **base
    )
    assert not check_conditions(at_acc)  # < is strict


def test_gate_consistency():
    spec = make_spec("exp-bounded", legendre())
    for n in (0, 2, 4):
        report = c_n_bound(spec, n, 0.018, 0.05)
        assert check_conditions(report) == (report.pass_rel and report.pass_acc)
        assert report.pass_rel == (report.c_n <= report.threshold_rel)
        assert report.pass_acc == (report.c_n < report.threshold_acc)


def test_gf_oracle_cross_check_invariant():
    for name, fam, delta in (
        ("exp-bounded", legendre(), 0.1),
        ("exp-decay", laguerre(0.0), 0.01),
        ("poly-bounded", gegenbauer(1.0), 3.3),
    ):
        r = c_n_bound(make_spec(name, fam), 2, delta, 0.05)
        assert abs(r.gf_integral_value - r.gf_integral_oracle) <= max(
            1e-6, 1e-6 * abs(r.gf_integral_oracle)
        )


def test_gf_oracle_disagreement_rejects_run():
    # starving the oracle of nodes forces a detectable mismatch
    spec = make_spec("exp-bounded", legendre(), tb=TailBoundSpec(1.0, 0.9))
    with pytest.raises(ConvergenceError):
        c_n_bound(spec, 1, 0.1, 0.05, resolution=Resolution(oracle_nodes=2))


def test_select_n_contract():
    spec = make_spec("exp-bounded", legendre())
    result = select_N(spec, 0.018, 0.05, 8)
    assert result.selected_n == 2
    assert check_conditions(result.report)
    below = c_n_bound(spec, result.selected_n - 1, 0.018, 0.05)
    assert not check_conditions(below)


def test_select_n_huge_delta_picks_zero():
    result = select_N(make_spec("exp-bounded", legendre()), 1e6, 0.05, 4)
    assert result.selected_n == 0


def test_select_n_not_found():
    result = select_N(make_spec("exp-bounded", legendre()), 1e-12, 0.05, 0)
    assert result.selected_n is None
    assert result.report is None
    assert result.best_n == 0
    assert result.best_c_n > 0.0


def test_tail_weight_override_shape_guard():
    spec = make_spec("exp-bounded", legendre())
    with pytest.raises(DomainError):
        c_n_bound(spec, 3, 0.1, 0.05, tail_weight_override=np.ones(2))


def test_report_serialization_round_trip():
    report = c_n_bound(make_spec("exp-bounded", legendre()), 2, 0.1, 0.05)
    payload = json.loads(json.dumps(report.as_json_dict()))
    assert set(payload) == {
        "family",
        "N",
        "C_N",
        "threshold_rel",
        "threshold_acc",
        "pass_rel",
        "pass_acc",
        "clamped_fraction",
        "gf_integral_value",
        "gf_integral_oracle",
    }
    assert payload["family"] == "legendre"
    assert payload["C_N"] == report.c_n

    header = BoundReport.CSV_HEADER.split(",")
    row = report.csv_row().split(",")
    assert len(header) == len(row) == 10
    # 17 significant digits round-trip exactly
    assert float(row[header.index("C_N")]) == report.c_n
    assert row[header.index("pass_rel")] in ("true", "false")


def test_resolution_validation():
    with pytest.raises(DomainError):
        Resolution(spectral_nodes=0)
    with pytest.raises(DomainError):
        Resolution(spectral_nodes=5000)
    with pytest.raises(DomainError):
        Resolution(time_grid_points=256)
    with pytest.raises(DomainError):
        Resolution(time_grid_points=1)
    with pytest.raises(DomainError):
        Resolution(oracle_nodes=-1)


def test_order_validation():
    spec = make_spec("exp-bounded", legendre())
    with pytest.raises(DomainError):
        c_n_bound(spec, -1, 0.1, 0.05)
    with pytest.raises(DomainError):
        tau_bound(legendre(), TB, -2)
