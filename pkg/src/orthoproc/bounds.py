"""Certified truncation-error bounds and minimal-order selection.

Everything here serves one estimate. For a process X(t) with spectral kernel
f(t, .) expanded in an orthonormal polynomial family, the deviation norm of
the discarded tail at time t is bounded by

    max(0, tau * sqrt(E(t)) * sqrt(I(w)) - sum_{k<=N} tau_bound(k) * ahat_k(t))

where E(t) is the kernel energy, I(w) the squared generating-function
integral of the family, and tau_bound(k) the geometric per-coefficient norm
envelope. Raising the clamped bracket to the p-th power and integrating over
the horizon gives the constant C_N; the model meets reliability 1 - alpha
with accuracy delta when C_N passes the two threshold inequalities from the
Orlicz layer.

The subtracted partial sum is signed, not absolute: the clamp at zero keeps
the bound valid when cancellation drives the bracket negative, and
clamped_fraction reports how often that happened.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError
from .orlicz import TailBoundSpec, threshold_accuracy, threshold_reliability
from .orthopoly import MAX_DEGREE, PolynomialFamily
from .quadrature import (
    cosine_mapped_rule,
    gauss_legendre_rule,
    integrate,
    rule_for_family,
    semi_infinite_rule,
    simpson_weights,
)
from .specfun import hyp2f1_regularized

if TYPE_CHECKING:
    from .process import ProcessSpec

_GF_ORACLE_RTOL = 1e-6


@dataclass(frozen=True)
class Resolution:
    """Numerical fidelity knobs shared by the bound pipeline.

    Attributes:
        spectral_nodes: quadrature nodes for coefficient integrals.
        time_grid_points: odd uniform time-grid size on [0, T].
        oracle_nodes: nodes for the generating-function cross-check.
    """

    spectral_nodes: int = 256
    time_grid_points: int = 257
    oracle_nodes: int = 256

    def __post_init__(self) -> None:
        for name in ("spectral_nodes", "oracle_nodes"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not (1 <= v <= 4096):
                raise DomainError(f"{name} must be an integer in [1, 4096], got {v!r}")
        g = self.time_grid_points
        if not isinstance(g, (int, np.integer)) or g < 3 or g % 2 == 0:
            raise DomainError(f"time_grid_points must be an odd integer >= 3, got {g!r}")


def _check_order(k: int, what: str = "k") -> int:
    if not isinstance(k, (int, np.integer)) or k < 0 or k > MAX_DEGREE:
        raise DomainError(f"{what} must be an integer in [0, {MAX_DEGREE}], got {k!r}")
    return int(k)


def tau_bound(family: PolynomialFamily, tb: TailBoundSpec, k: int) -> float:
    """Geometric envelope on the k-th coefficient's process-variable norm.

    Legendre: sqrt(2/(2k+1)) tau w^k. Laguerre: sqrt(Gamma(k+a+1)/k!) tau w^k.
    Gegenbauer: sqrt(k! (k+a) / Gamma(k+2a)) tau w^k; gamma ratios run in log
    space so high orders neither overflow nor lose the small w^k factor.
    """
    k = _check_order(k)
    geo = tb.tau * tb.w**k
    if family.kind == "legendre":
        return math.sqrt(2.0 / (2.0 * k + 1.0)) * geo
    a = family.alpha
    if family.kind == "laguerre":
        return math.exp(0.5 * (math.lgamma(k + a + 1.0) - math.lgamma(k + 1.0))) * geo
    if k == 0 and a < 0.0:
        # Gamma(2a) < 0 exactly cancels the sign of a; the log-space route
        # would lose that sign, so evaluate the ratio directly.
        return math.sqrt(a / math.gamma(2.0 * a)) * geo
    return math.exp(0.5 * (math.lgamma(k + 1.0) + math.log(k + a) - math.lgamma(k + 2.0 * a))) * geo


def tail_weights(family: PolynomialFamily, tb: TailBoundSpec, k_max: int) -> np.ndarray:
    """Vector of tau_bound(k) for k = 0..k_max."""
    k_max = _check_order(k_max, "k_max")
    return np.array([tau_bound(family, tb, k) for k in range(k_max + 1)])


def _check_gf_w(w: float) -> float:
    if not (0.0 < w < 1.0):
        raise DomainError(f"w must lie strictly inside (0, 1), got {w}")
    return float(w)


def gf_square_integral(family: PolynomialFamily, w: float) -> float:
    """Integral of the squared generating function over the family domain.

    Closed forms: Legendre ln((1+w)/(1-w))/w; Laguerre
    Gamma(a+1) (1-w^2)^{-(a+1)}; Gegenbauer
    sqrt(pi) Gamma(a+1/2) (1+w^2)^{-2a} 2F1~(a, a+1/2; a+1; 4w^2/(1+w^2)^2)
    with 2F1~ the regularized Gauss hypergeometric function.
    """
    w = _check_gf_w(w)
    if family.kind == "legendre":
        return math.log((1.0 + w) / (1.0 - w)) / w
    a = family.alpha
    if family.kind == "laguerre":
        return math.gamma(a + 1.0) * (1.0 - w * w) ** (-(a + 1.0))
    z = 4.0 * w * w / (1.0 + w * w) ** 2
    hyp = hyp2f1_regularized(a, a + 0.5, a + 1.0, z).value
    return math.sqrt(math.pi) * math.gamma(a + 0.5) * (1.0 + w * w) ** (-2.0 * a) * hyp


def gf_square_integral_oracle(family: PolynomialFamily, w: float, n_nodes: int = 256) -> float:
    """Direct quadrature of the squared-generating-function integrand.

    Independent route used to cross-check the closed forms: Legendre
    integrates (1 - 2*l*w + w^2)^{-1}; Laguerre integrates the weighted
    exponential on the mapped semi-infinite rule; Gegenbauer integrates
    (1 - l^2)^{a - 1/2} (1 - 2*l*w + w^2)^{-2a} on the cosine-mapped rule.
    """
    w = _check_gf_w(w)
    if family.kind == "legendre":
        rule = gauss_legendre_rule(n_nodes)
        return integrate(rule, lambda lam: 1.0 / (1.0 - 2.0 * lam * w + w * w))
    a = family.alpha
    if family.kind == "laguerre":
        rule = semi_infinite_rule(n_nodes, singularity_power=a if a != 0.0 else 0.0)
        pref = (1.0 - w) ** (-2.0 * (a + 1.0))
        decay = 2.0 * w / (1.0 - w)

        def f(lam):
            with np.errstate(under="ignore"):
                return lam**a * np.exp(-lam) * pref * np.exp(-decay * lam)

        return integrate(rule, f)
    rule = cosine_mapped_rule(n_nodes)
    e = a - 0.5

    def g(lam):
        base = np.maximum(1.0 - lam * lam, 0.0)
        with np.errstate(under="ignore"):
            alg = np.ones_like(lam) if e == 0.0 else base**e
            return alg * (1.0 - 2.0 * lam * w + w * w) ** (-2.0 * a)

    return integrate(rule, g)


def tail_norm_bound(
    family: PolynomialFamily,
    tb: TailBoundSpec,
    kernel_energy_at_t: float,
    approx_coeffs: Sequence[float],
) -> float:
    """Certified bound on the deviation norm of the discarded tail at one t.

    max(0, tau sqrt(E(t)) sqrt(I(w)) - sum_k tau_bound(k) ahat_k(t)) over the
    supplied coefficients ahat_0(t)..ahat_N(t).

    Raises:
        DomainError: if kernel_energy_at_t < 0.
    """
    if kernel_energy_at_t < 0.0:
        raise DomainError(f"kernel energy must be >= 0, got {kernel_energy_at_t}")
    coeffs = np.asarray(approx_coeffs, dtype=float)
    budget = tb.tau * math.sqrt(kernel_energy_at_t) * math.sqrt(gf_square_integral(family, tb.w))
    spent = 0.0
    if coeffs.size:
        spent = float(np.dot(tail_weights(family, tb, coeffs.size - 1), coeffs))
    return max(0.0, budget - spent)


@dataclass(frozen=True)
class BoundReport:
    """Outcome of one C_N evaluation with its gate thresholds.

    pass_rel gates the reliability inequality (C_N <= threshold_rel),
    pass_acc the accuracy inequality (C_N < threshold_acc); the model
    certificate needs both.
    """

    family: PolynomialFamily
    n: int
    c_n: float
    threshold_rel: float
    threshold_acc: float
    pass_rel: bool
    pass_acc: bool
    clamped_fraction: float
    gf_integral_value: float
    gf_integral_oracle: float

    CSV_HEADER = (
        "family,N,C_N,threshold_rel,threshold_acc,pass_rel,pass_acc,"
        "clamped_fraction,gf_integral_value,gf_integral_oracle"
    )

    def as_json_dict(self) -> dict:
        return {
            "family": self.family.label,
            "N": self.n,
            "C_N": self.c_n,
            "threshold_rel": self.threshold_rel,
            "threshold_acc": self.threshold_acc,
            "pass_rel": self.pass_rel,
            "pass_acc": self.pass_acc,
            "clamped_fraction": self.clamped_fraction,
            "gf_integral_value": self.gf_integral_value,
            "gf_integral_oracle": self.gf_integral_oracle,
        }

    def csv_row(self) -> str:
        cells = [self.family.label, str(self.n)]
        for x in (self.c_n, self.threshold_rel, self.threshold_acc):
            cells.append(format(x, ".17g"))
        cells.append("true" if self.pass_rel else "false")
        cells.append("true" if self.pass_acc else "false")
        for x in (self.clamped_fraction, self.gf_integral_value, self.gf_integral_oracle):
            cells.append(format(x, ".17g"))
        return ",".join(cells)


def c_n_bound(
    spec: "ProcessSpec",
    n: int,
    delta: float,
    alpha: float,
    *,
    resolution: Resolution = Resolution(),
    tail_weight_override: np.ndarray | None = None,
) -> BoundReport:
    """Evaluate the truncation-error constant C_N and its gate thresholds.

    Computes the model coefficients on the time grid, forms the clamped
    pointwise bound, raises it to spec.p, and integrates over [0, T] by
    composite Simpson (C_N is the integral itself, not its p-th root; the
    thresholds carry the matching power scaling). The closed-form
    generating-function integral is cross-checked against direct quadrature
    and the run is rejected if they disagree beyond 1e-6 relative.

    tail_weight_override replaces the family's own tau_bound vector
    (length n+1) in the subtracted sum; the budget term keeps the family's
    gf integral. Used to compare two families on identical coefficient
    envelopes.

    Raises:
        ConvergenceError: if the gf closed form fails its oracle check.
        DomainError: on invalid n, delta, alpha, or override shape.
    """
    n = _check_order(n, "N")
    family = spec.family
    tb = spec.tail
    thr_rel = threshold_reliability(delta, alpha, spec.orlicz, spec.p)
    thr_acc = threshold_accuracy(delta, spec.p, spec.orlicz)

    gf_value = gf_square_integral(family, tb.w)
    gf_oracle = gf_square_integral_oracle(family, tb.w, resolution.oracle_nodes)
    if abs(gf_value - gf_oracle) > max(_GF_ORACLE_RTOL, _GF_ORACLE_RTOL * abs(gf_oracle)):
        raise ConvergenceError(
            f"generating-function integral failed its oracle cross-check for {family.label}: "
            f"closed form {gf_value!r} vs quadrature {gf_oracle!r}"
        )

    if tail_weight_override is None:
        tw = tail_weights(family, tb, n)
    else:
        tw = np.asarray(tail_weight_override, dtype=float)
        if tw.shape != (n + 1,):
            raise DomainError(f"tail_weight_override must have shape ({n + 1},), got {tw.shape}")

    # deferred import: process builds on this module's tail weights
    from .process import compute_coefficients

    time_grid = np.linspace(0.0, spec.horizon, resolution.time_grid_points)
    rule = rule_for_family(family, resolution.spectral_nodes)
    table = compute_coefficients(spec, n, rule, time_grid)

    energy = spec.kernel.energy_at(time_grid)
    budget = tb.tau * np.sqrt(energy) * math.sqrt(gf_value)
    bracket = budget - tw @ table.values
    clamped = float(np.mean(bracket < 0.0))
    envelope = np.maximum(bracket, 0.0)
    c_n = float(np.dot(simpson_weights(time_grid), envelope**spec.p))

    return BoundReport(
        family=family,
        n=n,
        c_n=c_n,
        threshold_rel=thr_rel,
        threshold_acc=thr_acc,
        pass_rel=bool(c_n <= thr_rel),
        pass_acc=bool(c_n < thr_acc),
        clamped_fraction=clamped,
        gf_integral_value=gf_value,
        gf_integral_oracle=gf_oracle,
    )


def check_conditions(report: BoundReport) -> bool:
    """True iff C_N <= threshold_rel and C_N < threshold_acc."""
    return report.c_n <= report.threshold_rel and report.c_n < report.threshold_acc


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of the minimal-order scan.

    selected_n / report are None when no order in [0, n_max] passed; best_n
    and best_c_n then identify the closest miss.
    """

    selected_n: int | None
    report: BoundReport | None
    best_n: int
    best_c_n: float


def select_N(
    spec: "ProcessSpec",
    delta: float,
    alpha: float,
    n_max: int,
    *,
    resolution: Resolution = Resolution(),
) -> SelectionResult:
    """Smallest truncation order in [0, n_max] meeting both gate conditions.

    Linear scan from 0: C_N is not provably monotone in N (retained
    coefficients enter the bracket with a minus sign), so no bisection.
    """
    n_max = _check_order(n_max, "n_max")
    best_n = 0
    best_c_n = math.inf
    for n in range(n_max + 1):
        report = c_n_bound(spec, n, delta, alpha, resolution=resolution)
        if report.c_n < best_c_n:
            best_n, best_c_n = n, report.c_n
        if check_conditions(report):
            return SelectionResult(n, report, best_n, best_c_n)
    return SelectionResult(None, None, best_n, best_c_n)
