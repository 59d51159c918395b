r"""Network simulation: geometry, Rician links, sum rate, baselines, sweeps.
"""
import enum
import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import torch
from scipy import stats
from torch import Tensor

from rispursuit import π, inf, T0dB, σ2dB, rtype0
from rispursuit import utils, slowops
from rispursuit.iaobjs import NetworkConfig, ChannelSet, PhaseVector
from rispursuit.iacore import composite_channel
from rispursuit.pursuit import (PursuitOptions, AlignmentSolution,
                                riemannian_pursuit)

__all__ = ['LosModel', 'Scheme', 'SweepVariable', 'LayoutSpec', 'FadingSpec',
           'PowerSpec', 'SweepSpec', 'ExperimentRecord', 'SignTest',
           'IllConditionedError', 'path_loss', 'sample_channels', 'sum_rate',
           'random_phase_baseline', 'no_ris_baseline', 'run_scheme',
           'run_sweep', 'paired_sign_test', 'summarize', 'properness_slack',
           'warn_if_improper']

logger = logging.getLogger(__name__)

Point = Tuple[float, float]
Region = Tuple[Tuple[float, float], Tuple[float, float]]  # (x-range, y-range)


class IllConditionedError(ArithmeticError):
    r"""Interference-plus-noise covariance is numerically singular"""


class LosModel(str, enum.Enum):
    SteeringOuterProduct = 'SteeringOuterProduct'
    AllOnes = 'AllOnes'


class Scheme(str, enum.Enum):
    Optimized = 'Optimized'
    RandomPhase = 'RandomPhase'
    NoRis = 'NoRis'


class SweepVariable(str, enum.Enum):
    RxAntennas = 'RxAntennas'
    Snr = 'Snr'
    RicianRT = 'RicianRT'
    RisElements = 'RisElements'


def _check_region(name: str, reg: Region):
    (x0, x1), (y0, y1) = reg
    if not (all(map(math.isfinite, (x0, x1, y0, y1))) and x0 < x1 and
            y0 < y1):
        raise ValueError(f'{name}: degenerate or non-finite region {reg}')


@dataclass(frozen=True)
class LayoutSpec:
    r"""Node placement, meters

    Inputs:
        - ``ris_position``: `(xy,)`.
        - ``tx_region``, ``rx_region``: ``((x0, x1), (y0, y1))``, \
          transmitters and receivers drop uniformly inside.
        - ``seed``: channel draw seed.
    """
    ris_position: Point = (25., 20.)
    tx_region: Region = ((0., 20.), (0., 20.))
    rx_region: Region = ((30., 50.), (0., 20.))
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'ris_position',
                           tuple(float(x) for x in self.ris_position))
        for k in ('tx_region', 'rx_region'):
            reg = tuple(tuple(float(x) for x in rng)
                        for rng in getattr(self, k))
            _check_region(k, reg)
            object.__setattr__(self, k, reg)
        if len(self.ris_position) != 2 or \
                not all(map(math.isfinite, self.ris_position)):
            raise ValueError(f'ris_position: expected a finite 2-d point, '
                             f'got {self.ris_position}')


@dataclass(frozen=True)
class FadingSpec:
    r"""Path loss and Rician fading of the three hop types

    Inputs:
        - ``T0_db``: path loss at 1 m.
        - ``alpha_direct``, ``alpha_tx_ris``, ``alpha_ris_rx``: exponents.
        - ``beta_RT``, ``beta_IT``, ``beta_IR``: linear Rician factors of \
          the direct, transmitter-RIS and RIS-receiver hops; ``inf`` for \
          pure LoS.
        - ``los_model``: LosModel.
    """
    T0_db: float = T0dB
    alpha_direct: float = 2.8
    alpha_tx_ris: float = 2.
    alpha_ris_rx: float = 2.
    beta_RT: float = 10.
    beta_IT: float = 10.
    beta_IR: float = 10.
    los_model: LosModel = LosModel.SteeringOuterProduct

    def __post_init__(self):
        object.__setattr__(self, 'los_model', LosModel(self.los_model))
        for k in ('alpha_direct', 'alpha_tx_ris', 'alpha_ris_rx'):
            if not getattr(self, k) > 0:
                raise ValueError(f'{k}: must be > 0, got {getattr(self, k)}')
        for k in ('beta_RT', 'beta_IT', 'beta_IR'):
            if not getattr(self, k) >= 0:
                raise ValueError(f'{k}: must be >= 0, got {getattr(self, k)}')
        if not math.isfinite(self.T0_db):
            raise ValueError(f'T0_db: must be finite, got {self.T0_db}')


@dataclass(frozen=True)
class PowerSpec:
    r"""Noise power and SNR, ``P = σ²·10^(snr_db/10)``"""
    noise_db: float = σ2dB
    snr_db: float = 120.

    def __post_init__(self):
        for k in ('noise_db', 'snr_db'):
            if not math.isfinite(getattr(self, k)):
                raise ValueError(f'{k}: must be finite')

    @property
    def noise_power(self) -> float:
        return utils.db2lin(self.noise_db)

    @property
    def tx_power(self) -> float:
        return utils.db2lin(self.noise_db + self.snr_db)


@dataclass(frozen=True)
class SweepSpec:
    r"""A Monte-Carlo sweep of one network parameter

    Inputs:
        - ``variable``: SweepVariable.
        - ``values``: strictly increasing sweep values.
        - ``trials``: channel draws per value; trial ``t`` uses seed \
          ``layout.seed + t`` for channels and ``pursuit.seed + t`` for \
          initialization, shared by all schemes.
        - ``network``, ``layout``, ``fading``, ``power``, ``pursuit``: base \
          settings the variable is applied to.
        - ``schemes``: subset of Scheme.
        - ``record_wall_time``: if ``False``, ``wall_ms`` is written as 0.
    """
    variable: SweepVariable
    values: Tuple[float, ...]
    network: NetworkConfig
    trials: int = 1
    layout: LayoutSpec = LayoutSpec()
    fading: FadingSpec = FadingSpec()
    power: PowerSpec = PowerSpec()
    pursuit: PursuitOptions = PursuitOptions()
    schemes: Tuple[Scheme, ...] = (Scheme.Optimized, Scheme.RandomPhase,
                                   Scheme.NoRis)
    record_wall_time: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'variable', SweepVariable(self.variable))
        object.__setattr__(self, 'values',
                           tuple(float(x) for x in self.values))
        object.__setattr__(self, 'schemes',
                           tuple(Scheme(s) for s in self.schemes))
        vals = self.values
        if not vals:
            raise ValueError('values: must be non-empty')
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError(f'values: must be strictly increasing, got '
                             f'{list(vals)}')
        if self.trials < 1:
            raise ValueError(f'trials: must be >= 1, got {self.trials}')
        if not self.schemes or len(set(self.schemes)) != len(self.schemes):
            raise ValueError('schemes: must be non-empty and distinct')


@dataclass
class ExperimentRecord:
    r"""One (value, scheme, trial) outcome; ``rank = -1`` marks a failure"""
    variable: str
    value: float
    scheme: str
    trial: int
    seed: int
    rank: int
    dof: Optional[float]
    residual: Optional[float]
    sum_rate_bps_hz: Optional[float]
    wall_ms: float = 0.
    error: Optional[str] = field(default=None, compare=False)


def path_loss(d: float, alpha: float, T0_db: float = T0dB) -> float:
    r"""Distance path loss ``T₀·d^(-α)``, linear gain

    Usage:
        ``gain = path_loss(d, alpha, T0_db)``
    Inputs:
        - ``d``: meters, ``> 0``.
        - ``alpha``: exponent.
        - ``T0_db``: dB, loss at 1 m.
    """
    if not d > 0:
        raise ValueError(f'd: distance must be > 0, got {d}')
    return utils.db2lin(T0_db)*d**(-alpha)


def _drop(reg: Region, K: int, g: torch.Generator) -> Tensor:
    (x0, x1), (y0, y1) = reg
    u = torch.rand((K, 2), generator=g, dtype=rtype0)
    lo = torch.tensor([x0, y0], dtype=rtype0)
    hi = torch.tensor([x1, y1], dtype=rtype0)
    return lo + u*(hi - lo)


def _steering(n: int, θ: Tensor) -> Tensor:
    k = torch.arange(n, dtype=rtype0)
    return torch.polar(torch.ones_like(k), π*k*torch.sin(θ))


def _rician(
    nr: int, nt: int, gain: float, β: float, los_model: LosModel,
    g: torch.Generator
) -> Tensor:
    # draw order is fixed regardless of β and model
    φψ = 2*π*torch.rand((2,), generator=g, dtype=rtype0)
    nlos = utils.crandn((nr, nt), g)
    if los_model is LosModel.SteeringOuterProduct:
        los = torch.outer(_steering(nr, φψ[0]), _steering(nt, φψ[1]).conj())
    else:
        los = torch.ones((nr, nt), dtype=nlos.dtype)
    if β == inf:
        return gain**0.5*los
    return gain**0.5*((β/(1 + β))**0.5*los + (1/(1 + β))**0.5*nlos)


def sample_channels(
    cfg: NetworkConfig, layout: LayoutSpec = LayoutSpec(),
    fading: FadingSpec = FadingSpec(), seed: Optional[int] = None, *,
    power: PowerSpec = PowerSpec()
) -> ChannelSet:
    r"""Draw node positions and all links of a network

    Usage:
        ``ch = sample_channels(cfg, layout, fading, seed, *, power)``
    Inputs:
        - ``seed``: defaults to ``layout.seed``.
    Outputs:
        - ``ch``: ChannelSet, bitwise reproducible from ``seed``.

    .. note::
        Each link is ``√L(d)·(√(β/(1+β))·H_LOS + √(1/(1+β))·H_NLOS)``; the
        steering LoS is ``a(φ)a(ψ)ᴴ``, ``a(θ)_k = exp(jπk·sin θ)``, with
        per-link angles uniform on ``[0, 2π)``.
    """
    seed = layout.seed if seed is None else seed
    g = torch.Generator().manual_seed(seed)
    K, L, Ns, Ms, fd = cfg.K, cfg.L, cfg.Ns, cfg.Ms, fading
    tx, rx = _drop(layout.tx_region, K, g), _drop(layout.rx_region, K, g)
    ris = torch.tensor(layout.ris_position, dtype=rtype0)

    def dist(a: Tensor, b: Tensor) -> float:
        return torch.linalg.norm(a - b).item()

    H = [[_rician(Ms[i], Ns[j],
                  path_loss(dist(rx[i], tx[j]), fd.alpha_direct, fd.T0_db),
                  fd.beta_RT, fd.los_model, g)
          for j in range(K)] for i in range(K)]
    R, T = [], []
    if L > 0:
        R = [_rician(Ms[i], L,
                     path_loss(dist(rx[i], ris), fd.alpha_ris_rx, fd.T0_db),
                     fd.beta_IR, fd.los_model, g) for i in range(K)]
        T = [_rician(L, Ns[j],
                     path_loss(dist(tx[j], ris), fd.alpha_tx_ris, fd.T0_db),
                     fd.beta_IT, fd.los_model, g) for j in range(K)]
    return ChannelSet(cfg, H, R, T, noise_power=power.noise_power,
                      tx_power=power.tx_power)


def sum_rate(
    ch: ChannelSet, sol: AlignmentSolution, snr_db: float, *,
    interference: bool = True
) -> float:
    r"""Achievable sum rate of a linear IA solution, bits/s/Hz

    Usage:
        ``rate = sum_rate(ch, sol, snr_db, *, interference)``
    Inputs:
        - ``ch``: ChannelSet, unnormalized.
        - ``sol``: AlignmentSolution, feasible.
        - ``snr_db``: ``P/σ²`` in dB.
    Optionals:
        - ``interference``: if ``False``, interference terms are dropped \
          from the covariance.
    Outputs:
        - ``rate``: ``Σ_i (1/r)·log₂ det(I + Q_i⁻¹S_i)``, per-stream power \
          ``P/d_j`` on unit-norm precoder columns.
    """
    if not sol.feasible:
        raise ValueError('sum_rate needs a feasible alignment solution')
    cfg, r, σ2 = ch.cfg, sol.r, ch.noise_power
    P = σ2*utils.db2lin(snr_db)
    Ht = composite_channel(ch, sol.v)
    V = [Vj/torch.linalg.norm(Vj, dim=0, keepdim=True) for Vj in sol.V]
    U, ds = sol.U, cfg.ds

    def cov(i: int, j: int) -> Tensor:
        W = U[i].mH @ slowops.kron_I(Ht[i, j], r) @ V[j]
        return (P/ds[j])*(W @ W.mH)

    rate = 0.
    for i in range(cfg.K):
        S = cov(i, i)
        Q = σ2*(U[i].mH @ U[i])
        if interference:
            for j in range(cfg.K):
                if j != i:
                    Q = Q + cov(i, j)
        κ = torch.linalg.cond(Q).item()
        if not κ < 1e12:
            raise IllConditionedError(
                f'pair {i}: interference-plus-noise covariance has condition '
                f'number {κ:.3e}')
        I_ = torch.eye(ds[i], dtype=Q.dtype, device=Q.device)
        _, logabsdet = torch.linalg.slogdet(I_ + torch.linalg.solve(Q, S))
        rate += logabsdet.item()/math.log(2)/r
    return rate


def random_phase_baseline(
    ch: ChannelSet, opts: PursuitOptions = PursuitOptions()
) -> AlignmentSolution:
    r"""Rank pursuit with the phases frozen at one uniform random draw

    The draw comes from a generator seeded by ``opts.seed``.

    Usage:
        ``sol = random_phase_baseline(ch, opts)``
    """
    if ch.cfg.L == 0:
        return riemannian_pursuit(ch, opts)
    g = torch.Generator().manual_seed(opts.seed)
    pv = PhaseVector(utils.randphase(ch.cfg.L, g))
    return riemannian_pursuit(ch, opts, v_fixed=pv)


def no_ris_baseline(
    ch: ChannelSet, opts: PursuitOptions = PursuitOptions()
) -> AlignmentSolution:
    r"""Rank pursuit on the direct links only

    Usage:
        ``sol = no_ris_baseline(ch, opts)``
    """
    return riemannian_pursuit(ch.without_ris(), opts)


def run_scheme(
    scheme: Scheme, ch: ChannelSet, opts: PursuitOptions
) -> Tuple[AlignmentSolution, ChannelSet]:
    r"""Run one scheme, returning its solution and the channels it used

    Usage:
        ``sol, ch_used = run_scheme(scheme, ch, opts)``
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.Optimized:
        return riemannian_pursuit(ch, opts), ch
    if scheme is Scheme.RandomPhase:
        return random_phase_baseline(ch, opts), ch
    return no_ris_baseline(ch, opts), ch.without_ris()


def _apply(spec: SweepSpec, value: float):
    cfg, fading, power = spec.network, spec.fading, spec.power
    var = spec.variable
    if var is SweepVariable.RxAntennas:
        cfg = cfg.replace(Ms=(int(value),)*cfg.K)
    elif var is SweepVariable.RisElements:
        cfg = cfg.replace(L=int(value))
    elif var is SweepVariable.RicianRT:
        fading = replace(fading, beta_RT=value)
    else:
        power = replace(power, snr_db=value)
    return cfg, fading, power


def _trial(
    spec: SweepSpec, values: Sequence[float], scheme: Scheme, trial: int
) -> List[ExperimentRecord]:
    r"""Solve one (scheme, trial) pair and rate it at every value given.

    ``values`` holds several entries only for SNR sweeps, where the
    alignment problem does not depend on the value.
    """
    t0 = time.perf_counter()
    seed = spec.layout.seed + trial
    opts = replace(spec.pursuit, seed=spec.pursuit.seed + trial)
    sol, recs = None, []
    try:
        cfg, fading, power = _apply(spec, values[0])
        ch = sample_channels(cfg, spec.layout, fading, seed, power=power)
        sol, ch_used = run_scheme(scheme, ch, opts)
        for value in values:
            snr = _apply(spec, value)[2].snr_db
            rate = sum_rate(ch_used, sol, snr) if sol.feasible else None
            recs.append(ExperimentRecord(
                spec.variable.value, value, scheme.value, trial, seed,
                sol.r if sol.feasible else 0, sol.dof, sol.residual, rate))
        err = None
    except Exception as e:  # a failed trial never aborts the sweep
        logger.warning('trial %d of %s at %s = %s failed: %r', trial,
                       scheme.value, spec.variable.value, values[0], e)
        recs, err = [], repr(e)
        for value in values:
            recs.append(ExperimentRecord(
                spec.variable.value, value, scheme.value, trial, seed, -1,
                None, None if sol is None else sol.residual, None,
                error=err))

    wall_ms = ((time.perf_counter() - t0)*1e3/len(values)
               if spec.record_wall_time else 0.)
    for rec in recs:
        rec.wall_ms = wall_ms
    if err is None:
        logger.info('%s trial %d at %s = %s: rank %s, residual %.3e',
                    scheme.value, trial, spec.variable.value, values[0],
                    recs[0].rank, recs[0].residual)
    return recs


def run_sweep(spec: SweepSpec, *, threads: int = 1) -> List[ExperimentRecord]:
    r"""Full factorial sweep over values × schemes × trials

    Usage:
        ``records = run_sweep(spec, *, threads)``
    Inputs:
        - ``spec``: SweepSpec.
    Optionals:
        - ``threads``: worker threads executing trials.
    Outputs:
        - ``records``: sorted by (value, scheme, trial). Infeasible trials \
          carry ``rank = 0`` and ``dof = None``; failed ones ``rank = -1``.
    """
    if spec.variable is SweepVariable.Snr:
        groups = [spec.values]
    else:
        groups = [(v,) for v in spec.values]
    jobs = [(vals, s, t) for vals in groups for s in spec.schemes
            for t in range(spec.trials)]

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        out = pool.map(lambda job: _trial(spec, *job), jobs)
        records = [rec for recs in out for rec in recs]

    order = {s.value: k for k, s in enumerate(spec.schemes)}
    records.sort(key=lambda rec: (rec.value, order[rec.scheme], rec.trial))
    return records


class SignTest(NamedTuple):
    win_fraction: float
    n_greater: int
    n_less: int
    pvalue: float


def paired_sign_test(a: Sequence[float], b: Sequence[float]) -> SignTest:
    r"""One-sided exact sign test of ``a ≥ b`` over paired trials

    Usage:
        ``res = paired_sign_test(a, b)``
    Outputs:
        - ``res.win_fraction``: fraction of pairs with ``a ≥ b``.
        - ``res.pvalue``: binomial p-value of ``a > b`` among untied pairs.
    """
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    assert(a.shape == b.shape and a.size > 0)
    gt, lt = int(np.sum(a > b)), int(np.sum(a < b))
    p = (stats.binomtest(gt, gt + lt, 0.5, alternative='greater').pvalue
         if gt + lt else 1.)
    return SignTest(float(np.mean(a >= b)), gt, lt, float(p))


def summarize(records: Sequence[ExperimentRecord]) -> List[dict]:
    r"""Means per (value, scheme); infeasible and failed trials count as
    zero DoF

    Usage:
        ``rows = summarize(records)``
    """
    keys = []
    for rec in records:
        if (rec.value, rec.scheme) not in keys:
            keys.append((rec.value, rec.scheme))
    rows = []
    for value, scheme in keys:
        rs = [x for x in records if x.value == value and x.scheme == scheme]
        ok = [x for x in rs if x.dof is not None]
        rates = [x.sum_rate_bps_hz for x in ok
                 if x.sum_rate_bps_hz is not None]
        rows.append({
            'value': value, 'scheme': scheme, 'trials': len(rs),
            'feasible_fraction': len(ok)/len(rs),
            'mean_dof': float(np.mean([x.dof or 0. for x in rs])),
            'mean_rank': float(np.mean([x.rank for x in ok])) if ok else None,
            'mean_sum_rate': float(np.mean(rates)) if rates else None})
    return rows


def properness_slack(cfg: NetworkConfig) -> int:
    r"""Variables minus equations of the one-channel-use IA system

    ``Σ_k dk(Nk - dk) + dk(Mk - dk) - Σ_{i≠j} di·dj``; a negative value
    marks a generically infeasible network at ``r = 1`` without RIS.

    Usage:
        ``slack = properness_slack(cfg)``
    """
    var = sum(d*(n - d) + d*(m - d)
              for n, m, d in zip(cfg.Ns, cfg.Ms, cfg.ds))
    eqs = sum(di*dj for i, di in enumerate(cfg.ds)
              for j, dj in enumerate(cfg.ds) if i != j)
    return var - eqs


def warn_if_improper(cfg: NetworkConfig):
    slack = properness_slack(cfg)
    if slack < 0:
        warnings.warn(f'network is improper at one channel use (slack '
                      f'{slack}); expect r > 1 without RIS help',
                      RuntimeWarning)
