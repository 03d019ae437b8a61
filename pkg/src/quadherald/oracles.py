"""Independent verification paths for the analytic pipeline.

Two routes that share no algebra with the closed forms and recurrences in
:mod:`quadherald.stats`:

* direct adaptive quadrature of the defining integrals (per-Fock
  acceptance probabilities, ideal or efficiency-smeared), and
* a shot-level Monte Carlo simulation of the heralding experiment.

The Monte Carlo stream layout is reproducible by construction: every
random value consumed by shot i is indexed by (seed, purpose, round,
shot), so reruns - and any future parallel split over shots - produce
bit-identical results.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp
from scipy.integrate import quad

from .errors import NonConvergenceError
from .special import fock_quadrature_pdf, oscillator_eigenfunctions
from .stats import AcceptanceWindow, DetectorModel, Squeezing, idler_quadrature_variance

__all__ = [
    "MonteCarloResult",
    "fock_acceptance_probability_quadrature",
    "fock_smeared_quadrature_pdf",
    "monte_carlo_experiment",
]

# accuracy contracts of the quadrature oracle
_IDEAL_ABS_TOL = 1e-10
_SMEARED_ABS_TOL = 1e-8

# beyond |x| = sqrt(2n+1) + 15 the n-photon quadrature pdf carries
# less than ~1e-30 of its mass
def _support_halfwidth(n: int) -> float:
    return math.sqrt(2.0 * n + 1.0) + 15.0


def _clip_interval(lo: float, hi: float, b: float) -> tuple[float, float] | None:
    lo, hi = max(lo, -b), min(hi, b)
    return (lo, hi) if lo < hi else None


def fock_acceptance_probability_quadrature(n: int, w: AcceptanceWindow,
                                           d: DetectorModel | None = None) -> float:
    """Acceptance probability of the n-photon component by direct quadrature.

    Ideal detector: integrates psi_n(x)^2 over the window.  Imperfect
    detector: integrates the Gaussian-smeared pdf over the window; the
    window integral of the smearing kernel is carried out in closed form
    (a pair of Gaussian tails), leaving one adaptive integral over the
    pre-detector quadrature.  Supports general interval unions.
    """
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    d = d or DetectorModel.ideal()
    b = _support_halfwidth(n)
    total, err_total = 0.0, 0.0

    if d.eta == 1.0:  # auxiliary mode never reaches the detector
        for pair in w.as_intervals():
            clipped = _clip_interval(*pair, b)
            if clipped is None:
                continue
            val, err = quad(lambda x: fock_quadrature_pdf(n, x),
                            *clipped, epsabs=1e-13, epsrel=1e-13, limit=400)
            total += val
            err_total += err
        if err_total > _IDEAL_ABS_TOL:
            raise NonConvergenceError(
                f"quadrature error estimate {err_total:.2e} exceeds "
                f"{_IDEAL_ABS_TOL} (n = {n}, window = {w})")
        return total

    sqrt_eta = math.sqrt(d.eta)
    sigma = math.sqrt((1.0 - d.eta) * (1.0 + 2.0 * d.n_bar) / 2.0)
    intervals = w.as_intervals()

    def window_mass(xp: float) -> float:
        # P(measured value in window | pre-detector quadrature xp)
        mu = sqrt_eta * xp
        acc = 0.0
        for lo, hi in intervals:
            if lo == -math.inf:
                acc += 0.5 * _sp.erfc((mu - hi) / (math.sqrt(2.0) * sigma))
            elif hi == math.inf:
                acc += 0.5 * _sp.erfc((lo - mu) / (math.sqrt(2.0) * sigma))
            else:
                acc += 0.5 * (_sp.erf((hi - mu) / (math.sqrt(2.0) * sigma))
                              - _sp.erf((lo - mu) / (math.sqrt(2.0) * sigma)))
        return acc

    val, err = quad(lambda xp: fock_quadrature_pdf(n, xp) * window_mass(xp),
                    -b, b, epsabs=1e-11, epsrel=1e-11, limit=400)
    if err > _SMEARED_ABS_TOL:
        raise NonConvergenceError(
            f"smeared quadrature error estimate {err:.2e} exceeds "
            f"{_SMEARED_ABS_TOL} (n = {n}, window = {w}, detector = {d})")
    return val


def fock_smeared_quadrature_pdf(n: int, x: float, d: DetectorModel) -> float:
    """Pdf of the measured quadrature given n photons, by inner quadrature.

    This is the literal convolution of psi_n^2 with the detector's
    Gaussian kernel; it exists so tests can check the closed-form window
    mass used by :func:`fock_acceptance_probability_quadrature` against
    the doubly numerical route.
    """
    if d.eta == 1.0:
        return fock_quadrature_pdf(n, x)
    sqrt_eta = math.sqrt(d.eta)
    var = (1.0 - d.eta) * (1.0 + 2.0 * d.n_bar) / 2.0
    norm = 1.0 / math.sqrt(2.0 * math.pi * var)
    b = _support_halfwidth(n)

    def integrand(xp: float) -> float:
        return fock_quadrature_pdf(n, xp) * norm * math.exp(
            -(x - sqrt_eta * xp) ** 2 / (2.0 * var))

    val, _ = quad(integrand, -b, b, epsabs=1e-12, epsrel=1e-12, limit=400)
    return val


# ---------------------------------------------------------------------------
# Monte Carlo simulation of the heralding experiment
# ---------------------------------------------------------------------------

# orders above this are sampled through the tabulated inverse CDF
_REJECTION_N_MAX = 50
_CDF_GRID_POINTS = 32_001

# stream purposes (second SeedSequence word)
_STREAM_FOCK, _STREAM_REJECT, _STREAM_INVCDF, _STREAM_AUX = 0, 1, 2, 3


@dataclass(frozen=True)
class MonteCarloResult:
    """Empirical statistics of a simulated heralding run."""

    shots: int
    accepted: int
    empirical_p: np.ndarray
    empirical_c: float
    empirical_mean: float
    empirical_q: float
    standard_errors: dict
    seed: int

    def __post_init__(self):
        self.empirical_p.setflags(write=False)

    def to_dict(self) -> dict:
        return {
            "shots": self.shots,
            "accepted": self.accepted,
            "empirical_C": self.empirical_c,
            "empirical_mean": self.empirical_mean,
            "empirical_Q": self.empirical_q,
            "standard_errors": dict(self.standard_errors),
            "empirical_p": [float(v) for v in self.empirical_p],
            "seed": self.seed,
        }


def _stream(seed: int, *words: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed,) + words))


def _pdf_at_orders(x: np.ndarray, orders: np.ndarray, n_top: int) -> np.ndarray:
    """psi_{orders[i]}(x[i])^2, one recurrence sweep to n_top."""
    out = np.empty_like(x)
    psi_prev = np.zeros_like(x)
    psi = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    hit = orders == 0
    out[hit] = psi[hit] ** 2
    for k in range(1, n_top + 1):
        psi_prev, psi = psi, (x * math.sqrt(2.0 / k) * psi
                              - math.sqrt((k - 1) / k) * psi_prev)
        hit = orders == k
        if hit.any():
            out[hit] = psi[hit] ** 2
    return out


_envelope_cache: dict[int, np.ndarray] = {}


def _envelope_constants(n_top: int) -> np.ndarray:
    """c_n with psi_n(x)^2 <= c_n N(x; 0, n+1) for n <= n_top.

    Grid maximum of the density ratio with 10% headroom; the grid spacing
    is far below the oscillation scale pi/sqrt(2n+1) of psi_n^2.
    """
    if n_top not in _envelope_cache:
        b = _support_halfwidth(n_top)
        grid = np.linspace(-b, b, 8001)
        psi = oscillator_eigenfunctions(grid, n_top)
        n = np.arange(n_top + 1)[:, None]
        envelope = np.exp(-grid[None, :] ** 2 / (2.0 * (n + 1.0))) \
            / np.sqrt(2.0 * math.pi * (n + 1.0))
        _envelope_cache[n_top] = 1.1 * (psi ** 2 / envelope).max(axis=1)
    return _envelope_cache[n_top]


def _sample_fock_quadratures(n: np.ndarray, seed: int) -> np.ndarray:
    """Draw x ~ psi_{n_i}^2 for every shot, deterministically in (seed, i).

    Orders up to _REJECTION_N_MAX use rejection sampling against a
    Gaussian envelope; every round consumes one proposal and one uniform
    per shot slot from a round-indexed stream, so acceptance order cannot
    perturb other shots.  Larger orders draw a single uniform each and
    invert a dense tabulated CDF.
    """
    shots = len(n)
    x = np.zeros(shots)

    small = n <= _REJECTION_N_MAX
    if small.any():
        n_top = int(n[small].max())
        c = _envelope_constants(max(n_top, 1))
        active = small.copy()
        t = 0
        while active.any():
            rng = _stream(seed, _STREAM_REJECT, t)
            z = rng.standard_normal(shots)
            u = rng.random(shots)
            idx = np.nonzero(active)[0]
            nn = n[idx]
            sigma = np.sqrt(nn + 1.0)
            proposal = z[idx] * sigma
            target = _pdf_at_orders(proposal, nn, n_top)
            envelope = np.exp(-proposal ** 2 / (2.0 * sigma * sigma)) \
                / (math.sqrt(2.0 * math.pi) * sigma)
            ok = u[idx] * c[nn] * envelope <= target
            x[idx[ok]] = proposal[ok]
            active[idx[ok]] = False
            t += 1

    big = ~small
    if big.any():
        u_all = _stream(seed, _STREAM_INVCDF).random(shots)
        n_top = int(n.max())
        b = _support_halfwidth(n_top)
        grid = np.linspace(-b, b, _CDF_GRID_POINTS)
        need = np.unique(n[big])
        # one recurrence sweep over the grid; invert the CDF of each
        # needed order as soon as its row appears
        psi_prev = np.zeros_like(grid)
        psi = math.pi ** -0.25 * np.exp(-0.5 * grid * grid)
        for k in range(1, n_top + 1):
            psi_prev, psi = psi, (grid * math.sqrt(2.0 / k) * psi
                                  - math.sqrt((k - 1) / k) * psi_prev)
            if k in need:
                pdf = psi * psi
                cdf = np.concatenate(([0.0], np.cumsum(
                    0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid))))
                cdf /= cdf[-1]
                cdf += np.arange(_CDF_GRID_POINTS) * 1e-15  # strictly increasing
                cdf /= cdf[-1]
                rows = big & (n == k)
                x[rows] = np.interp(u_all[rows], cdf, grid)
    return x


def monte_carlo_experiment(s: Squeezing, w: AcceptanceWindow,
                           d: DetectorModel | None = None,
                           shots: int = 1_000_000,
                           seed: int = 0) -> MonteCarloResult:
    """Simulate the heralding experiment shot by shot.

    Per shot: draw the joint photon number from the geometric law
    (1-lam) lam^n, draw the idler quadrature from the matching Fock pdf
    (phase-randomization leaves that pdf phase-independent), mix in the
    detector's auxiliary noise, and accept when the measured value falls
    in the window.  Identical (seed, shots, parameters) reproduce the
    result bit for bit.
    """
    if not isinstance(shots, (int, np.integer)) or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots!r}")
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed!r}")
    d = d or DetectorModel.ideal()

    u = _stream(seed, _STREAM_FOCK).random(shots)
    if s.lam > 0.0:
        n = np.floor(np.log1p(-u) / math.log(s.lam)).astype(np.int64)
    else:
        n = np.zeros(shots, dtype=np.int64)

    x_ideal = _sample_fock_quadratures(n, seed)
    z_aux = _stream(seed, _STREAM_AUX).standard_normal(shots)
    aux_sd = math.sqrt((1.0 - d.eta) * (1.0 + 2.0 * d.n_bar) / 2.0)
    x = math.sqrt(d.eta) * x_ideal + aux_sd * z_aux

    accept = w.contains(x)
    accepted = int(accept.sum())
    emp_c = accepted / shots
    se_c = math.sqrt(emp_c * (1.0 - emp_c) / shots)

    if accepted == 0:
        warnings.warn("no shots accepted; empirical statistics are undefined")
        return MonteCarloResult(
            shots=shots, accepted=0, empirical_p=np.zeros(0),
            empirical_c=0.0, empirical_mean=math.nan, empirical_q=math.nan,
            standard_errors={"C": se_c, "mean": math.nan, "Q": math.nan},
            seed=int(seed))
    if accepted < 100:
        warnings.warn(f"only {accepted} shots accepted; "
                      "empirical statistics will be noisy")

    na = n[accept].astype(float)
    m = float(accepted)
    emp_p = np.bincount(n[accept]) / m
    mean = float(na.mean())
    var1 = float(na.var(ddof=1)) if accepted > 1 else math.nan
    se_mean = math.sqrt(var1 / m) if accepted > 1 else math.nan
    if mean > 0.0 and accepted > 1:
        emp_q = (var1 - mean) / mean
        nb = na * na
        cov = np.cov(na, nb, ddof=1)
        grad = np.array([-nb.mean() / mean ** 2 - 1.0, 1.0 / mean])
        se_q = math.sqrt(max(float(grad @ cov @ grad), 0.0) / m)
    else:
        emp_q, se_q = math.nan, math.nan

    return MonteCarloResult(
        shots=shots, accepted=accepted, empirical_p=emp_p,
        empirical_c=emp_c, empirical_mean=mean, empirical_q=emp_q,
        standard_errors={"C": se_c, "mean": se_mean, "Q": se_q},
        seed=int(seed))


def idler_marginal_variance(s: Squeezing, d: DetectorModel | None = None) -> float:
    """Variance of the measured quadrature over all shots (no conditioning)."""
    return idler_quadrature_variance(s, d or DetectorModel.ideal())
