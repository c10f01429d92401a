"""Trial-level simulation of measurement followed by postselection.

Each trial draws the technical noise, then a meter readout from the prior,
updates the system state on that readout and accepts with probability
``<f|rho(readout)|f>``. The accepted readouts give empirical versions of
the postselected moments, independent of any closed form.

Seeding: ``SeedSequence(seed).spawn(workers)`` gives one PCG64 stream per
worker, each covering a contiguous share of the trials. Results are
bit-identical for a fixed ``(seed, trials, workers)``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytics import (amplified_mean_x, postselected_second_moment_x,
                        postselection_gamma_x, quadrature_moments_x)
from .meter import MeterConfig, bayes_update_p, bayes_update_x, postselect_prob
from .noise import (NoiseConfig, NoiseKind, p_basis_p0_moments, p_basis_x0_moments,
                    x_basis_x0_moments)
from .quantum import DensityMatrix, PureState

CHUNK = 1 << 17
Z_THRESHOLD = 4.0


class Basis(str, enum.Enum):
    X = "x"
    P = "p"


class NoAnalyticCounterpart(LookupError):
    """No closed form exists for this configuration."""


@dataclass(frozen=True)
class McConfig:
    trials: int
    seed: int
    basis: Basis = Basis.X
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    workers: int = 1
    postselect: bool = True

    def __post_init__(self):
        object.__setattr__(self, "basis", Basis(self.basis))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class MomentAccumulator:
    """Streaming mean and central moment sums up to fourth order.

    Chunks are folded in with the pairwise update formulas, so merging is
    associative up to rounding and free of large-N cancellation.
    """

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    def add(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return
        mu = float(values.mean())
        c = values - mu
        c2 = c * c
        other = MomentAccumulator(values.size, mu, float(c2.sum()),
                                  float((c2 * c).sum()), float((c2 * c2).sum()))
        self.merge(other)

    def merge(self, o: "MomentAccumulator") -> None:
        if o.n == 0:
            return
        if self.n == 0:
            self.n, self.mean, self.m2, self.m3, self.m4 = o.n, o.mean, o.m2, o.m3, o.m4
            return
        na, nb = self.n, o.n
        n = na + nb
        delta = o.mean - self.mean
        d_n = delta / n
        m2 = self.m2 + o.m2 + delta * d_n * na * nb
        m3 = (self.m3 + o.m3 + delta * d_n * d_n * na * nb * (na - nb)
              + 3.0 * d_n * (na * o.m2 - nb * self.m2))
        m4 = (self.m4 + o.m4
              + delta * d_n**3 * na * nb * (na * na - na * nb + nb * nb)
              + 6.0 * d_n * d_n * (na * na * o.m2 + nb * nb * self.m2)
              + 4.0 * d_n * (na * o.m3 - nb * self.m3))
        self.n, self.mean, self.m2, self.m3, self.m4 = n, self.mean + d_n * nb, m2, m3, m4


@dataclass(frozen=True)
class McEstimate:
    """Empirical postselection statistics with standard errors.

    Moment fields are NaN (and ``defined`` is False) when fewer than two
    trials were accepted.
    """

    n_total: int
    n_accepted: int
    gamma_hat: float
    gamma_se: float
    mean_hat: float
    mean_se: float
    second_moment_hat: float
    second_moment_se: float
    var_hat: float
    var_se: float
    snr_hat: float
    snr_se: float

    @property
    def defined(self) -> bool:
        return self.n_accepted >= 2


def _estimate(n_total: int, acc: MomentAccumulator) -> McEstimate:
    n = acc.n
    gamma = n / n_total
    gamma_se = math.sqrt(gamma * (1.0 - gamma) / n_total)
    if n < 2:
        nan = math.nan
        return McEstimate(n_total, n, gamma, gamma_se, nan, nan, nan, nan, nan, nan, nan, nan)
    mu = acc.mean
    c2, c3, c4 = acc.m2 / n, acc.m3 / n, acc.m4 / n
    second = mu * mu + c2
    fourth = mu**4 + 6 * mu * mu * c2 + 4 * mu * c3 + c4
    var_hat = acc.m2 / (n - 1)
    # delta-method error of mean/std, then of sqrt(gamma) * mean/std
    r = mu / math.sqrt(c2)
    var_r = (1.0 - r * c3 / c2**1.5 + 0.25 * r * r * (c4 / (c2 * c2) - 1.0)) / n
    snr = math.sqrt(gamma) * r
    var_snr = gamma * var_r + (r * r * gamma_se**2 / (4.0 * gamma) if gamma > 0 else 0.0)
    return McEstimate(
        n_total=n_total,
        n_accepted=n,
        gamma_hat=gamma,
        gamma_se=gamma_se,
        mean_hat=mu,
        mean_se=math.sqrt(c2 / n),
        second_moment_hat=second,
        second_moment_se=math.sqrt(max(fourth - second * second, 0.0) / n),
        var_hat=var_hat,
        var_se=math.sqrt(max(c4 - c2 * c2, 0.0) / n),
        snr_hat=snr,
        snr_se=math.sqrt(max(var_snr, 0.0)),
    )


def _p_update_with_x0(rho: DensityMatrix, p: np.ndarray, x0: np.ndarray,
                      m: MeterConfig) -> DensityMatrix:
    # Conditional state from the x0-shifted momentum amplitudes, without
    # assuming the x0 phase cancels.
    env = np.exp(-(m.sigma**2) * p * p)
    ph1 = env * np.exp(-1j * (m.d + x0) * p)
    ph2 = env * np.exp(1j * (m.d - x0) * p)
    n = rho.r11 * np.abs(ph1) ** 2 + rho.r22 * np.abs(ph2) ** 2
    r12 = rho.r12 * ph1 * np.conj(ph2) / n
    return DensityMatrix(rho.r11 * np.abs(ph1) ** 2 / n, rho.r22 * np.abs(ph2) ** 2 / n, r12)


def _simulate_chunk(rng: np.random.Generator, size: int, i: PureState, f: PureState,
                    m: MeterConfig, cfg: McConfig) -> np.ndarray:
    rho = i.density()
    kind, width = cfg.noise.kind, cfg.noise.width
    shift = rng.standard_normal(size) * width if kind is not NoiseKind.NONE else np.zeros(size)

    if cfg.basis is Basis.X:
        branch1 = rng.random(size) < rho.r11
        y = np.where(branch1, m.d, -m.d) + m.sigma * rng.standard_normal(size)
        post = bayes_update_x(rho, y, m)
        # a p0 kick multiplies both branches by e^{i p0 x}: no effect on x statistics
        readout = y + shift if kind is NoiseKind.X0 else y
    else:
        q = rng.standard_normal(size) / (2.0 * m.sigma)
        if kind is NoiseKind.P0:
            readout = q + shift
            post = bayes_update_p(rho, readout, m)
        elif kind is NoiseKind.X0:
            readout = q
            post = _p_update_with_x0(rho, readout, shift, m)
        else:
            readout = q
            post = bayes_update_p(rho, readout, m)

    u = rng.random(size)
    if not cfg.postselect:
        return readout
    return readout[u < postselect_prob(post, f)]


def _run_stream(seed_seq: np.random.SeedSequence, trials: int, i, f, m, cfg) -> MomentAccumulator:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    acc = MomentAccumulator()
    done = 0
    while done < trials:
        size = min(CHUNK, trials - done)
        acc.add(_simulate_chunk(rng, size, i, f, m, cfg))
        done += size
    return acc


def run_trials(i: PureState, f: PureState, m: MeterConfig, cfg: McConfig) -> McEstimate:
    """Simulate ``cfg.trials`` measurement-plus-postselection trials."""
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.workers)
    shares = [cfg.trials // cfg.workers + (w < cfg.trials % cfg.workers)
              for w in range(cfg.workers)]
    if cfg.workers == 1:
        accs = [_run_stream(streams[0], shares[0], i, f, m, cfg)]
    else:
        with ThreadPoolExecutor(cfg.workers) as pool:
            accs = list(pool.map(lambda w: _run_stream(streams[w], shares[w], i, f, m, cfg),
                                 range(cfg.workers)))
    total = MomentAccumulator()
    for acc in accs:  # fixed order keeps the merge deterministic
        total.merge(acc)
    return _estimate(cfg.trials, total)


# --- validation -----------------------------------------------------------------

def analytic_reference(i: PureState, f: PureState, m: MeterConfig, cfg: McConfig) -> dict:
    """Closed-form ``gamma``, mean, second moment (and ``snr`` in the p basis)."""
    kind, width = cfg.noise.kind, cfg.noise.width
    if cfg.basis is Basis.X:
        if kind is NoiseKind.P0:
            raise NoAnalyticCounterpart("position readout with momentum-kick noise")
        mean, second = x_basis_x0_moments(i, f, m, width if kind is NoiseKind.X0 else 0.0)
        return {"gamma": postselection_gamma_x(i, f, m), "mean": mean, "second_moment": second}
    if kind is NoiseKind.P0:
        rep = p_basis_p0_moments(i, f, m, width)
    else:
        rep = p_basis_x0_moments(i, f, m)
    return {"gamma": rep.gamma, "mean": rep.mean_p, "second_moment": rep.second_moment_p,
            "snr": rep.snr}


def quadrature_reference(i: PureState, f: PureState, m: MeterConfig, cfg: McConfig) -> dict:
    """Fallback reference by integrating the joint density."""
    if cfg.basis is Basis.X and cfg.noise.kind is not NoiseKind.X0:
        q = quadrature_moments_x(i, f, m)
        return {k: q[k] for k in ("gamma", "mean", "second_moment")}
    raise NoAnalyticCounterpart(f"no quadrature reference for {cfg.basis.value}/{cfg.noise.kind.value}")


@dataclass(frozen=True)
class McCase:
    name: str
    pre: PureState
    post: PureState
    meter: MeterConfig
    config: McConfig
    corrupt: float = 0.0  # shift applied to references, in standard errors


def validate_against_analytics(i: PureState, f: PureState, m: MeterConfig, cfg: McConfig,
                               case: str = "", corrupt: float = 0.0,
                               estimate: McEstimate | None = None) -> list[dict]:
    """z-scores of the Monte Carlo estimates against their references.

    Returns one row per statistic with keys ``case, quantity, analytic,
    empirical, std_error, z, pass``. The gamma error uses the binomial
    error at the reference value.
    """
    try:
        ref = analytic_reference(i, f, m, cfg)
        source = "closed_form"
    except NoAnalyticCounterpart:
        ref = quadrature_reference(i, f, m, cfg)
        source = "quadrature"
    est = estimate if estimate is not None else run_trials(i, f, m, cfg)

    emp = {
        "gamma": (est.gamma_hat, math.sqrt(ref["gamma"] * (1 - ref["gamma"]) / est.n_total)),
        "mean": (est.mean_hat, est.mean_se),
        "second_moment": (est.second_moment_hat, est.second_moment_se),
        "snr": (est.snr_hat, est.snr_se),
    }
    rows = []
    for quantity, analytic in ref.items():
        value, se = emp[quantity]
        analytic = analytic + corrupt * se
        if math.isnan(value) or math.isnan(se):
            z = math.nan
        elif se == 0.0:
            z = 0.0 if value == analytic else math.inf
        else:
            z = (value - analytic) / se
        rows.append({
            "case": case,
            "quantity": quantity,
            "analytic": analytic,
            "empirical": value,
            "std_error": se,
            "z": z,
            "pass": bool(abs(z) <= Z_THRESHOLD),
            "reference": source,
        })
    return rows


def run_case(case: McCase) -> list[dict]:
    return validate_against_analytics(case.pre, case.post, case.meter, case.config,
                                      case=case.name, corrupt=case.corrupt)


def default_suite(trials: int = 10**6, seed: int = 20200101, workers: int = 1) -> list[McCase]:
    """Eight cases covering both readout bases and every noise kind."""
    from .quantum import plus_state, state_from_angles

    pi = math.pi
    i = plus_state()
    fig5 = state_from_angles(1.49 * pi, pi / 4)

    def cfg(k, basis, kind=NoiseKind.NONE, width=0.0):
        return McConfig(trials, seed + k, basis, NoiseConfig(kind, width), workers)

    g = MeterConfig.from_strength
    return [
        McCase("x_none_1.3pi_g0.05", i, state_from_angles(1.3 * pi), g(0.05), cfg(0, Basis.X)),
        McCase("x_none_1.49pi_g0.1", i, state_from_angles(1.49 * pi), g(0.1), cfg(1, Basis.X)),
        McCase("x_none_complex_g0.5", i, state_from_angles(1.6 * pi, pi / 3), g(0.5), cfg(2, Basis.X)),
        McCase("x_x0_1.3pi_g0.05_J2", i, state_from_angles(1.3 * pi), g(0.05),
               cfg(3, Basis.X, NoiseKind.X0, 2.0)),
        McCase("x_p0_1.3pi_g0.2", i, state_from_angles(1.3 * pi), g(0.2),
               cfg(4, Basis.X, NoiseKind.P0, 0.5)),
        McCase("p_none_fig5_sigma2", i, fig5, MeterConfig(1.0, 2.0), cfg(5, Basis.P)),
        McCase("p_x0_fig5_sigma10_J10", i, fig5, MeterConfig(1.0, 10.0),
               cfg(6, Basis.P, NoiseKind.X0, 10.0)),
        McCase("p_p0_fig6_sigma100_peak", i, fig5, MeterConfig(1.0, 100.0),
               cfg(7, Basis.P, NoiseKind.P0, 0.3177637)),
    ]
