"""Photon statistics of the conditionally prepared signal mode.

The source is a two-mode squeezed vacuum with Schmidt weight
``lam = tanh^2 r``.  A phase-randomized quadrature measurement on the
partner (idler) mode accepts a run when the measured value x satisfies
``|x| > x0``.  The heralded signal state is then diagonal in the Fock
basis with weights

    p_n = (1 - lam) lam^n q_n / C,

where q_n is the probability that the idler quadrature of the n-photon
component falls in the acceptance region and C is the overall acceptance
probability.  Everything in this module is closed-form or a stable
recurrence; independent integral and Monte Carlo checks live in
:mod:`quadherald.oracles`.

Numerical notes
---------------
* All acceptance probabilities are computed with ``erfc`` rather than
  ``1 - erf`` so that large thresholds do not lose precision.
* The moment formulas contain the ratio exp(-x0^2 (1-lam)/v) / C, which
  under- and overflows separately for large x0 but equals
  ``1 / erfcx(x0 sqrt((1-lam)/v))`` exactly; the scaled complementary
  error function keeps every moment finite for arbitrarily large
  thresholds.
* A detector with a thermal auxiliary mode (n_bar > 0) is reduced to an
  equivalent vacuum-auxiliary detector: the acceptance probability as a
  function of lam has the same functional form under
  eta' = eta / s, x0' = x0 / sqrt(s), s = 1 + 2 n_bar (1 - eta),
  and the acceptance probability as a function of lam determines the
  full photon statistics, so the reduction is exact for every reported
  quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as _sp

from .errors import NonConvergenceError, UndefinedQError
from .special import erfc, oscillator_eigenfunctions

__all__ = [
    "Squeezing",
    "AcceptanceWindow",
    "DetectorModel",
    "ConditionalStatistics",
    "acceptance_probability",
    "acceptance_probability_imperfect",
    "fock_acceptance_probabilities",
    "fock_acceptance_probabilities_imperfect",
    "photon_distribution",
    "mean_photon_number",
    "second_factorial_moment",
    "mandel_q",
    "moment_via_generating_function",
    "mandel_q_slope_at_zero_squeezing",
]

_SQRT_PI = math.sqrt(math.pi)

#: Hard cap on the truncation order of the photon-number distribution.
DEFAULT_N_CAP = 10_000


@dataclass(frozen=True)
class Squeezing:
    """Source strength of the two-mode squeezed vacuum, lam = tanh^2 r."""

    lam: float

    def __post_init__(self):
        if not (np.isfinite(self.lam) and 0.0 <= self.lam < 1.0):
            raise ValueError(f"lam must lie in [0, 1), got {self.lam!r}")

    @classmethod
    def from_r(cls, r: float) -> "Squeezing":
        """Build from the squeezing constant r >= 0."""
        if not (np.isfinite(r) and r >= 0.0):
            raise ValueError(f"r must be nonnegative and finite, got {r!r}")
        return cls(math.tanh(r) ** 2)

    @property
    def r(self) -> float:
        """Squeezing constant, r = atanh(sqrt(lam))."""
        return math.atanh(math.sqrt(self.lam))


@dataclass(frozen=True)
class AcceptanceWindow:
    """Acceptance region for the measured idler quadrature.

    The analytic pipeline handles the threshold form, |x| > x0.  A general
    union of disjoint intervals may be attached instead, but only the
    quadrature/Monte Carlo oracles accept it.
    """

    x0: float | None = None
    general_intervals: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if (self.x0 is None) == (self.general_intervals is None):
            raise ValueError("exactly one of x0 / general_intervals must be set")
        if self.x0 is not None:
            if not (np.isfinite(self.x0) and self.x0 >= 0.0):
                raise ValueError(f"x0 must be nonnegative and finite, got {self.x0!r}")
        else:
            iv = tuple(tuple(map(float, pair)) for pair in self.general_intervals)
            prev_hi = -math.inf
            for lo, hi in iv:
                if math.isnan(lo) or math.isnan(hi) or not lo < hi:
                    raise ValueError(f"bad interval ({lo}, {hi})")
                if lo < prev_hi:
                    raise ValueError("intervals must be disjoint and sorted")
                prev_hi = hi
            object.__setattr__(self, "general_intervals", iv)

    @classmethod
    def threshold(cls, x0: float) -> "AcceptanceWindow":
        return cls(x0=x0)

    @classmethod
    def from_intervals(cls, intervals) -> "AcceptanceWindow":
        return cls(general_intervals=tuple(tuple(p) for p in intervals))

    @property
    def is_threshold(self) -> bool:
        return self.x0 is not None

    def require_threshold(self) -> float:
        if not self.is_threshold:
            raise ValueError(
                "general-interval windows are supported only by the oracle "
                "module; the analytic pipeline needs a threshold window"
            )
        return self.x0

    def as_intervals(self) -> tuple[tuple[float, float], ...]:
        """The acceptance region as sorted disjoint intervals."""
        if self.is_threshold:
            return ((-math.inf, -self.x0), (self.x0, math.inf))
        return self.general_intervals

    def contains(self, x):
        """Vectorized membership test."""
        x = np.asarray(x)
        if self.is_threshold:
            return np.abs(x) > self.x0
        out = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.general_intervals:
            out |= (x > lo) & (x < hi)
        return out


@dataclass(frozen=True)
class DetectorModel:
    """Homodyne detector with efficiency eta and a thermal auxiliary mode.

    The measured quadrature is sqrt(eta) x + sqrt(1-eta) x_aux where the
    auxiliary mode carries n_bar mean thermal photons (vacuum for
    n_bar = 0).
    """

    eta: float = 1.0
    n_bar: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.eta) and 0.0 < self.eta <= 1.0):
            raise ValueError(f"eta must lie in (0, 1], got {self.eta!r}")
        if not (np.isfinite(self.n_bar) and self.n_bar >= 0.0):
            raise ValueError(f"n_bar must be nonnegative, got {self.n_bar!r}")

    @classmethod
    def ideal(cls) -> "DetectorModel":
        return cls(eta=1.0, n_bar=0.0)

    @property
    def is_ideal(self) -> bool:
        return self.eta == 1.0 and self.n_bar == 0.0

    def reduce_to_vacuum_auxiliary(self) -> tuple[float, float]:
        """Equivalent vacuum-auxiliary parameters ``(eta_eff, threshold_scale)``.

        A threshold x0 with this detector produces the same acceptance
        probability, as a function of lam, as threshold
        ``x0 / threshold_scale`` with efficiency ``eta_eff`` and a vacuum
        auxiliary mode.
        """
        s = 1.0 + 2.0 * self.n_bar * (1.0 - self.eta)
        return self.eta / s, math.sqrt(s)


@dataclass(frozen=True)
class ConditionalStatistics:
    """Truncated photon-number statistics of the heralded signal state."""

    p: np.ndarray
    q: np.ndarray
    acceptance_probability: float
    mean_n: float
    second_factorial: float
    mandel_q: float
    truncation_error_bound: float
    squeezing: Squeezing = field(repr=False, default=None)
    window: AcceptanceWindow = field(repr=False, default=None)
    detector: DetectorModel = field(repr=False, default=None)

    def __post_init__(self):
        self.p.setflags(write=False)
        self.q.setflags(write=False)

    @property
    def n_max(self) -> int:
        return len(self.p) - 1


def _reduced_params(x0: float, detector: DetectorModel) -> tuple[float, float]:
    """Map (x0, detector) to the equivalent vacuum-auxiliary (x0', eta')."""
    if detector.n_bar == 0.0:
        return x0, detector.eta
    eta_eff, scale = detector.reduce_to_vacuum_auxiliary()
    return x0 / scale, eta_eff


def idler_quadrature_variance(s: Squeezing, d: DetectorModel) -> float:
    """Variance of the measured idler quadrature (Gaussian, zero mean)."""
    lam, eta, nb = s.lam, d.eta, d.n_bar
    return (1.0 + 2.0 * nb * (1.0 - eta)
            + lam * (2.0 * eta * (1.0 + nb) - 1.0 - 2.0 * nb)) / (2.0 * (1.0 - lam))


def acceptance_probability(s: Squeezing, w: AcceptanceWindow) -> float:
    """Probability that an ideal detector heralds: P(|x| > x0).

    Equals the two-sided tail of the idler's zero-mean Gaussian marginal
    with variance (1 + lam) / (2 (1 - lam)).
    """
    x0 = w.require_threshold()
    return erfc(x0 * math.sqrt((1.0 - s.lam) / (1.0 + s.lam)))


def acceptance_probability_imperfect(s: Squeezing, w: AcceptanceWindow,
                                     d: DetectorModel) -> float:
    """Heralding probability with detector efficiency eta and thermal noise.

    Reduces to :func:`acceptance_probability` for an ideal detector.
    """
    x0 = w.require_threshold()
    variance = idler_quadrature_variance(s, d)
    return erfc(x0 / math.sqrt(2.0 * variance))


def fock_acceptance_probabilities(n_max: int, x0: float) -> np.ndarray:
    """q_0..q_{n_max}: acceptance probability of each Fock component, ideal.

    Uses the stable recurrence q_n = q_{n-1} + sqrt(2/n) psi_{n-1}(x0)
    psi_n(x0) from q_0 = erfc(x0); each q_n is a probability.
    """
    if not isinstance(n_max, (int, np.integer)) or n_max < 0:
        raise ValueError(f"n_max must be a nonnegative integer, got {n_max!r}")
    if not (np.isfinite(x0) and x0 >= 0.0):
        raise ValueError(f"x0 must be nonnegative and finite, got {x0!r}")
    q = np.empty(n_max + 1)
    q[0] = erfc(x0)
    if n_max >= 1:
        psi = oscillator_eigenfunctions(x0, n_max)
        n = np.arange(1, n_max + 1)
        increments = np.sqrt(2.0 / n) * psi[:-1] * psi[1:]
        q[1:] = q[0] + np.cumsum(increments)
    return np.clip(q, 0.0, 1.0)  # guard against roundoff at the endpoints


def fock_acceptance_probabilities_imperfect(n_max: int, x0: float,
                                            d: DetectorModel) -> np.ndarray:
    """q_0..q_{n_max} for an imperfect detector.

    The increment of order n is a binomial mixture of the ideal
    increments,

        q_n - q_{n-1} = sum_{m=1..n} C(n-1, m-1) eta^m (1-eta)^{n-m}
                        sqrt(2/m) psi_{m-1}(x0') psi_m(x0'),

    which is the overflow-free rewriting of the raw Hermite/factorial
    recurrence; binomial weights are evaluated through log-factorials.
    A thermal auxiliary mode is folded in through the vacuum-auxiliary
    reduction (exact, see module docstring).
    """
    if not isinstance(n_max, (int, np.integer)) or n_max < 0:
        raise ValueError(f"n_max must be a nonnegative integer, got {n_max!r}")
    if not (np.isfinite(x0) and x0 >= 0.0):
        raise ValueError(f"x0 must be nonnegative and finite, got {x0!r}")
    x0_eff, eta = _reduced_params(x0, d)
    if eta == 1.0:
        # single surviving mixture term: the ideal recurrence
        return fock_acceptance_probabilities(n_max, x0_eff)
    q = np.empty(n_max + 1)
    q[0] = erfc(x0_eff)
    if n_max >= 1:
        psi = oscillator_eigenfunctions(x0_eff, n_max)
        j = np.arange(n_max)
        base = np.sqrt(2.0 / (j + 1.0)) * psi[:-1] * psi[1:]
        log_eta, log_1m = math.log(eta), math.log1p(-eta)
        lg = _sp.gammaln(np.arange(n_max + 2))
        for n in range(1, n_max + 1):
            jj = j[:n]
            logw = (lg[n] - lg[jj + 1] - lg[n - jj]
                    + (jj + 1) * log_eta + (n - 1 - jj) * log_1m)
            q[n] = q[n - 1] + float(np.exp(logw) @ base[:n])
    return np.clip(q, 0.0, 1.0)


def _moments_closed_form(lam: float, x0: float, eta: float) -> tuple[float, float]:
    """(<n>, <n(n-1)>) for vacuum-auxiliary parameters, erfcx-stable."""
    u = 1.0 - lam
    v = 1.0 + (2.0 * eta - 1.0) * lam
    if lam == 0.0:
        return 0.0, 0.0
    if x0 == 0.0:
        return lam / u, 2.0 * lam * lam / (u * u)
    z = x0 * math.sqrt(u / v)
    # exp(-x0^2 u/v) / C == 1 / erfcx(z): no under/overflow for any x0
    common = 2.0 * eta * x0 / (_SQRT_PI * math.sqrt(u * v ** 3) * _sp.erfcx(z))
    mean = lam / u + lam * common
    bracket = (4.0 - 3.0 * eta + 4.0 * (2.0 * eta - 1.0) * lam) / (u * v) \
        + 2.0 * eta * x0 * x0 / (v * v)
    second = 2.0 * lam * lam / (u * u) + lam * lam * common * bracket
    return float(mean), float(second)


def mean_photon_number(s: Squeezing, w: AcceptanceWindow,
                       d: DetectorModel | None = None) -> float:
    """Closed-form mean photon number of the heralded state."""
    d = d or DetectorModel.ideal()
    x0_eff, eta = _reduced_params(w.require_threshold(), d)
    return _moments_closed_form(s.lam, x0_eff, eta)[0]


def second_factorial_moment(s: Squeezing, w: AcceptanceWindow,
                            d: DetectorModel | None = None) -> float:
    """Closed-form second factorial moment <n(n-1)> of the heralded state."""
    d = d or DetectorModel.ideal()
    x0_eff, eta = _reduced_params(w.require_threshold(), d)
    return _moments_closed_form(s.lam, x0_eff, eta)[1]


def mandel_q(s: Squeezing, w: AcceptanceWindow,
             d: DetectorModel | None = None) -> float:
    """Mandel Q = (<n(n-1)> - <n>^2) / <n>; negative means sub-Poissonian."""
    d = d or DetectorModel.ideal()
    x0_eff, eta = _reduced_params(w.require_threshold(), d)
    mean, second = _moments_closed_form(s.lam, x0_eff, eta)
    if mean == 0.0:
        raise UndefinedQError(
            "Mandel Q is undefined at lam = 0 (vacuum signal, zero mean)")
    return (second - mean * mean) / mean


def photon_distribution(s: Squeezing, w: AcceptanceWindow,
                        d: DetectorModel | None = None,
                        tol: float = 1e-12,
                        n_cap: int = DEFAULT_N_CAP) -> ConditionalStatistics:
    """Truncated photon-number distribution of the heralded state.

    The truncation order N is the least n with lam^(n+1) / C <= tol,
    which bounds the discarded tail because every q_n is a probability.

    Raises
    ------
    NonConvergenceError
        If the required truncation order exceeds ``n_cap``.
    """
    if not (0.0 < tol <= 1e-3):
        raise ValueError(f"tol must lie in (0, 1e-3], got {tol!r}")
    d = d or DetectorModel.ideal()
    x0 = w.require_threshold()
    lam = s.lam
    acceptance = acceptance_probability_imperfect(s, w, d)
    if acceptance == 0.0:
        raise NonConvergenceError(
            f"acceptance probability underflows double precision at "
            f"x0 = {x0}; the conditional distribution is not representable")

    if lam == 0.0:
        q = fock_acceptance_probabilities_imperfect(0, x0, d)
        return ConditionalStatistics(
            p=np.array([1.0]), q=q, acceptance_probability=acceptance,
            mean_n=0.0, second_factorial=0.0, mandel_q=math.nan,
            truncation_error_bound=0.0, squeezing=s, window=w, detector=d)

    n_max = max(0, math.ceil(math.log(tol * acceptance) / math.log(lam)) - 1)
    if n_max > n_cap:
        raise NonConvergenceError(
            f"photon distribution needs N_max = {n_max} > cap {n_cap} "
            f"(lam = {lam}, tol = {tol})")

    if d.is_ideal:
        q = fock_acceptance_probabilities(n_max, x0)
    else:
        q = fock_acceptance_probabilities_imperfect(n_max, x0, d)
    weights = np.exp(np.arange(n_max + 1) * math.log(lam))
    p = (1.0 - lam) * weights * q / acceptance
    mean, second = _moments_closed_form(lam, *_reduced_params(x0, d))
    return ConditionalStatistics(
        p=p, q=q, acceptance_probability=acceptance, mean_n=mean,
        second_factorial=second, mandel_q=(second - mean * mean) / mean,
        truncation_error_bound=lam ** (n_max + 1) / acceptance,
        squeezing=s, window=w, detector=d)


def moment_via_generating_function(k: int, s: Squeezing, w: AcceptanceWindow,
                                   d: DetectorModel | None = None,
                                   ordering: str = "raw",
                                   h: float = 1e-4) -> float:
    """Photon-number moment from lam-derivatives of C(lam)/(1 - lam).

    The acceptance probability, as a function of lam, generates both the
    raw moments (through (lam d/dlam)^k) and the normally ordered ones
    (through lam^k d^k/dlam^k).  Derivatives are central finite
    differences with one Richardson extrapolation; this is a cross-check
    of the closed forms, not a production path.
    """
    if k not in (0, 1, 2):
        raise ValueError(f"k must be 0, 1 or 2, got {k!r}")
    if ordering not in ("raw", "normal"):
        raise ValueError(f"ordering must be 'raw' or 'normal', got {ordering!r}")
    if k == 0:
        return 1.0
    d = d or DetectorModel.ideal()
    w.require_threshold()
    lam = s.lam
    if not (lam - h >= 0.0 and lam + h < 1.0):
        raise ValueError(
            f"lam = {lam} is too close to the boundary for the stencil h = {h}")

    def f(arg: float) -> float:
        return acceptance_probability_imperfect(Squeezing(arg), w, d) / (1.0 - arg)

    def d1(step: float) -> float:
        return (f(lam + step) - f(lam - step)) / (2.0 * step)

    def d2(step: float) -> float:
        return (f(lam + step) - 2.0 * f(lam) + f(lam - step)) / (step * step)

    fp = (4.0 * d1(h / 2) - d1(h)) / 3.0
    c = acceptance_probability_imperfect(s, w, d)
    if k == 1:
        return (1.0 - lam) * lam * fp / c
    fpp = (4.0 * d2(h / 2) - d2(h)) / 3.0
    if ordering == "normal":
        return (1.0 - lam) * lam * lam * fpp / c
    return (1.0 - lam) * lam * (fp + lam * fpp) / c


def mandel_q_slope_at_zero_squeezing(x0: float,
                                     d: DetectorModel | None = None) -> float:
    """dQ/dlam at lam -> 0 for fixed threshold, without cancellation.

    Q vanishes linearly in lam; the sign of this slope decides whether a
    threshold can ever reach sub-Poissonian statistics at weak squeezing.
    The slope's root over x0 (ideal detector) is the minimum threshold
    for Poissonian statistics.
    """
    if not (np.isfinite(x0) and x0 >= 0.0):
        raise ValueError(f"x0 must be nonnegative and finite, got {x0!r}")
    d = d or DetectorModel.ideal()
    x0_eff, eta = _reduced_params(x0, d)
    g = 2.0 * x0_eff / (_SQRT_PI * _sp.erfcx(x0_eff))
    numer = (1.0 + eta * g * (2.0 - 3.0 * eta)
             + 2.0 * eta * eta * g * x0_eff * x0_eff - (eta * g) ** 2)
    return float(numer / (1.0 + eta * g))
