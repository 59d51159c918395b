r"""Block-structured Riemannian pursuit: rank increase over alternating RCG.

For each candidate rank ``r`` the transceiver block ``Y = [Lf; Rf]`` and the
phase block ``v`` are minimized in turn, ``Y`` first, until
``f₀ ≤ outer_tol`` or the alternation budget runs out.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import torch
from torch import Tensor

from rispursuit import outer_tol0, Talt0
from rispursuit import utils, slowops
from rispursuit.iaobjs import (NetworkConfig, ChannelSet, PhaseVector,
                               FactorPair, TargetVector)
from rispursuit.iacore import (build_target, composite_channel,
                               f2_value_grad, assemble_phase_system,
                               f1_value_grad, objective_f0,
                               normalize_channels)
from rispursuit.manifolds import (RcgOptions, Termination, CircleManifold,
                                  FactorManifold, rcg_minimize)

__all__ = ['PursuitOptions', 'AlternationRecord', 'AlignmentSolution',
           'AlignmentReport', 'RankDeficiencyError', 'solve_fixed_rank',
           'riemannian_pursuit', 'recover_transceivers', 'verify_alignment']

logger = logging.getLogger(__name__)


class RankDeficiencyError(ValueError):
    r"""A factor lost column rank, transceivers cannot be recovered"""


@dataclass(frozen=True)
class PursuitOptions:
    r"""Rank pursuit knobs

    Inputs:
        - ``outer_tol``: ϵ, feasibility threshold on f₀.
        - ``max_alternations``: T, alternations per run.
        - ``r_start``, ``r_max``: candidate rank range.
        - ``restarts_per_rank``: independent random starts per rank.
        - ``inner``: RcgOptions of both block solvers.
        - ``warm_start_rank_increase``: seed one restart at ``r+1`` with the \
          best rank-``r`` iterate padded by a small column.
        - ``seed``: initialization seed.
        - ``stall_rtol``: end a run once an alternation lowers f₀ by less \
          than this relative amount.
    """
    outer_tol: float = outer_tol0
    max_alternations: int = Talt0
    r_start: int = 1
    r_max: int = 4
    restarts_per_rank: int = 3
    inner: RcgOptions = RcgOptions()
    warm_start_rank_increase: bool = False
    seed: int = 0
    stall_rtol: float = 1e-9

    def __post_init__(self):
        if not self.outer_tol > 0:
            raise ValueError(f'outer_tol: must be > 0, got {self.outer_tol}')
        for k in ('max_alternations', 'r_start', 'r_max',
                  'restarts_per_rank'):
            if getattr(self, k) < 1:
                raise ValueError(f'{k}: must be >= 1, got {getattr(self, k)}')
        if self.r_start > self.r_max:
            raise ValueError(f'r_start ({self.r_start}) exceeds r_max '
                             f'({self.r_max})')
        if self.stall_rtol < 0:
            raise ValueError(f'stall_rtol: must be >= 0, got '
                             f'{self.stall_rtol}')


@dataclass
class AlternationRecord:
    r"""Outcome of one alternation of :func:`solve_fixed_rank`

    ``f0_after_theta`` and the phase fields are ``None`` when the phase block
    was skipped (no RIS, frozen phases, or already feasible).
    """
    f0_after_x: float
    x_termination: Termination
    x_iterations: int
    f0_after_theta: Optional[float] = None
    theta_termination: Optional[Termination] = None
    theta_iterations: int = 0

    @property
    def f0(self) -> float:
        return (self.f0_after_x if self.f0_after_theta is None else
                self.f0_after_theta)

    @property
    def line_search_fails(self) -> int:
        return sum(t == Termination.LineSearchFail
                   for t in (self.x_termination, self.theta_termination))


@dataclass
class AlignmentSolution:
    r"""Result of :func:`riemannian_pursuit`

    Properties:
        - ``feasible``: ``residual ≤ outer_tol`` at rank ``r``.
        - ``r``: detected channel uses; when infeasible, the rank of the \
          lowest-residual run.
        - ``v``: PhaseVector ⊻ None (no RIS).
        - ``Y``: FactorPair, unnormalized channel frame.
        - ``U``: `(K,)`, ``U[i]``: `(Mi*r, di)`, decoders.
        - ``V``: `(K,)`, ``V[j]``: `(Nj*r, dj)`, precoders.
        - ``residual``: final f₀.
        - ``dof``: ``Σ di / r`` ⊻ None when infeasible.
        - ``scale``: common channel scale used while solving.
        - ``trace``: one dict per run, ``{'r', 'restart', 'f0', \
          'line_search_fails'}``, ``f0[0]`` at the initial point.
    """
    feasible: bool
    r: int
    v: Optional[PhaseVector]
    Y: FactorPair
    U: List[Tensor]
    V: List[Tensor]
    residual: float
    dof: Optional[float]
    scale: float = 1.
    trace: List[dict] = field(default_factory=list)


@dataclass
class AlignmentReport:
    r"""Dense-path check of the alignment conditions

    ``leakage[i][j]`` is ``‖U_iᴴ(H̃ᵢⱼ⊗I_r)V_j‖_F`` for ``i ≠ j`` and
    ``identity_deviation[i]`` is ``‖U_iᴴ(H̃ᵢᵢ⊗I_r)V_i - I‖_F``.
    """
    max_interference_leakage: float
    max_identity_deviation: float
    passed: bool
    leakage: List[List[float]] = field(default_factory=list)
    identity_deviation: List[float] = field(default_factory=list)


class _ValueGrad(object):
    r"""Evaluate ``fn(x) -> (value, grad)`` once per point for both RCG
    callbacks"""
    __slots__ = ('fn', '_x', '_vg')

    def __init__(self, fn):
        self.fn, self._x, self._vg = fn, None, None

    def _eval(self, x: Tensor):
        if x is not self._x:
            self._x, self._vg = x, self.fn(x)
        return self._vg

    def value(self, x: Tensor) -> float:
        return self._eval(x)[0]

    def grad(self, x: Tensor) -> Tensor:
        return self._eval(x)[1]


def solve_fixed_rank(
    ch: ChannelSet, r: int, init: Tuple[FactorPair, Optional[PhaseVector]],
    opts: PursuitOptions = PursuitOptions(), *,
    optimize_phase: bool = True, tv: Optional[TargetVector] = None
) -> Tuple[FactorPair, Optional[PhaseVector], float,
           List[AlternationRecord]]:
    r"""Alternate the transceiver and phase RCG at a fixed rank

    Usage:
        ``Xf, pv, f0, history = solve_fixed_rank(ch, r, (Xf0, pv0), opts,``
        `` *, optimize_phase, tv)``
    Inputs:
        - ``ch``: ChannelSet, ideally normalized.
        - ``r``: rank, must equal ``Xf0.r``.
        - ``init``: (FactorPair, PhaseVector ⊻ None).
    Optionals:
        - ``optimize_phase``: if ``False`` the phases stay at ``pv0``.
        - ``tv``: TargetVector, built from ``ch.cfg`` if absent.
    Outputs:
        - ``Xf``: FactorPair; ``pv``: PhaseVector ⊻ None; ``f0``: residual.
        - ``history``: one AlternationRecord per alternation.
    """
    cfg = ch.cfg
    Xf, pv = init
    assert(r >= 1 and Xf.r == r)
    Xf.check(cfg)
    tv = build_target(cfg, dtype=ch.dtype, device=ch.device) if tv is None \
        else tv
    do_phase = optimize_phase and cfg.L > 0
    M, ϵ, history = cfg.M, opts.outer_tol, []

    f0 = objective_f0(ch, Xf, pv, tv)
    if f0 <= ϵ:
        return Xf, pv, f0, history

    Y, v = Xf.Y, (None if pv is None else pv.v)
    geoY, geoV = FactorManifold(), CircleManifold()
    for t in range(opts.max_alternations):
        f0_prev = f0

        Ht = composite_channel(ch, pv)
        vg = _ValueGrad(
            lambda Y_: f2_value_grad(Ht, FactorPair.from_Y(Y_, M), tv))
        Y, trY = rcg_minimize(geoY, vg.value, vg.grad, Y, opts.inner)
        f0 = trY.objective_per_iter[-1]
        rec = AlternationRecord(f0, trY.termination, trY.iterations)

        if do_phase and f0 > ϵ:
            A, c = assemble_phase_system(ch, FactorPair.from_Y(Y, M), tv)
            vg = _ValueGrad(lambda v_: f1_value_grad(A, c, v_))
            v, trV = rcg_minimize(geoV, vg.value, vg.grad, v, opts.inner)
            pv = PhaseVector(v)
            f0 = trV.objective_per_iter[-1]
            rec.f0_after_theta = f0
            rec.theta_termination = trV.termination
            rec.theta_iterations = trV.iterations

        history.append(rec)
        if rec.line_search_fails:
            logger.debug('rank %d, alternation %d: %d line search failure(s)',
                         r, t, rec.line_search_fails)
        if f0 <= ϵ or f0_prev - f0 <= opts.stall_rtol*f0_prev:
            break

    Xf = FactorPair.from_Y(Y, M)
    return Xf, pv, objective_f0(ch, Xf, pv, tv), history


def _random_init(
    cfg: NetworkConfig, r: int, g: torch.Generator,
    v_fixed: Optional[PhaseVector]
) -> Tuple[FactorPair, Optional[PhaseVector]]:
    n = cfg.M + cfg.N
    Y0 = utils.crandn((n, r), g)/(r*n)**0.5
    if v_fixed is not None:
        pv0 = v_fixed
    else:
        pv0 = PhaseVector(utils.randphase(cfg.L, g)) if cfg.L > 0 else None
    return FactorPair.from_Y(Y0, cfg.M), pv0


def riemannian_pursuit(
    ch: ChannelSet, opts: PursuitOptions = PursuitOptions(), *,
    v_fixed: Optional[PhaseVector] = None
) -> AlignmentSolution:
    r"""Detect the minimal rank for which the alignment conditions hold

    Usage:
        ``sol = riemannian_pursuit(ch, opts, *, v_fixed)``
    Inputs:
        - ``ch``: ChannelSet, unnormalized.
        - ``opts``: PursuitOptions.
    Optionals:
        - ``v_fixed``: PhaseVector, freezes the phase block at this value.
    Outputs:
        - ``sol``: AlignmentSolution, in the unnormalized channel frame.

    .. note::
        Runs within a rank are initialized up front from one generator
        seeded by ``opts.seed`` and tried in order; the first run reaching
        ``f₀ ≤ outer_tol`` fixes the rank.
    """
    cfg = ch.cfg
    ch_n, s = normalize_channels(ch)
    tv = build_target(cfg, dtype=ch.dtype, device=ch.device)
    g = torch.Generator().manual_seed(opts.seed)
    optimize_phase = v_fixed is None

    trace, best, feasible = [], None, False
    best_prev = None  # best (Xf, pv, f0) of the previous rank
    for r in range(opts.r_start, opts.r_max + 1):
        inits = [_random_init(cfg, r, g, v_fixed)
                 for _ in range(opts.restarts_per_rank)]
        if opts.warm_start_rank_increase and best_prev is not None:
            Yp = best_prev[0].Y
            col = utils.crandn((Yp.shape[0], 1), g)
            col *= 1e-2*torch.linalg.norm(Yp)/torch.linalg.norm(col)
            inits[0] = (FactorPair.from_Y(torch.cat((Yp, col), dim=1),
                                          cfg.M), best_prev[1])

        best_r = None
        for k, init in enumerate(inits):
            Xf, pv, f0, hist = solve_fixed_rank(
                ch_n, r, init, opts, optimize_phase=optimize_phase, tv=tv)
            f0_init = objective_f0(ch_n, *init, tv)
            trace.append({'r': r, 'restart': k,
                          'f0': [f0_init] + [h.f0 for h in hist],
                          'line_search_fails': sum(h.line_search_fails
                                                   for h in hist)})
            logger.info('rank %d, restart %d: f0 = %.3e after %d '
                        'alternation(s)', r, k, f0, len(hist))
            if best_r is None or f0 < best_r[2]:
                best_r = (Xf, pv, f0)
            if f0 <= opts.outer_tol:
                feasible = True
                best_r = (Xf, pv, f0)
                break

        if best is None or best_r[2] < best[2] or feasible:
            best = best_r + (r,)
        best_prev = best_r
        if feasible:
            break

    Xf_n, pv, f0, r = best
    Xf = FactorPair(Xf_n.Lf, Xf_n.Rf/s)
    try:
        U, V = recover_transceivers(Xf, cfg)
    except RankDeficiencyError as e:
        logger.warning('transceiver recovery at rank %d: %s', r, e)
        U, V = recover_transceivers(Xf, cfg, check=False)

    dof = sum(cfg.ds)/r if feasible else None
    if feasible:
        logger.info('feasible at r = %d, dof = %g, f0 = %.3e', r, dof, f0)
    else:
        logger.info('infeasible up to r = %d, best f0 = %.3e at r = %d',
                    opts.r_max, f0, r)
    return AlignmentSolution(feasible, r, pv, Xf, U, V, f0, dof, s, trace)


def recover_transceivers(
    Y: FactorPair, cfg: NetworkConfig, *, rtol: float = 1e-10,
    check: bool = True
) -> Tuple[List[Tensor], List[Tensor]]:
    r"""Per-pair decoders and precoders from ``X = Lf·Rfᴴ = ŨᴴṼ``

    ``Ũ = Lfᴴ``, ``Ṽ = Rfᴴ``; the ``r×di`` antenna blocks ``U_i[m]`` of pair
    ``i``'s band are stacked vertically, antenna-major.

    Usage:
        ``U, V = recover_transceivers(Y, cfg, *, rtol, check)``
    Outputs:
        - ``U``: `(K,)`, ``U[i]``: `(Mi*r, di)`.
        - ``V``: `(K,)`, ``V[j]``: `(Nj*r, dj)`.
    """
    Y.check(cfg)
    r = Y.r
    if check:
        for name, F in (('Lf', Y.Lf), ('Rf', Y.Rf)):
            sv = torch.linalg.svdvals(F)
            if F.shape[0] < r or sv[-1].item() <= rtol*sv[0].item():
                raise RankDeficiencyError(f'{name} is not full column rank')

    def split(Ft: Tensor, offs: Sequence[int], ants: Sequence[int]):
        out = []
        for k, (a, d) in enumerate(zip(ants, cfg.ds)):
            band = Ft[:, offs[k]:offs[k+1]]  # (r, a*d)
            out.append(band.reshape(r, a, d).permute(1, 0, 2)
                       .reshape(a*r, d))
        return out

    return (split(Y.Lf.mH, cfg.row_offsets, cfg.Ms),
            split(Y.Rf.mH, cfg.col_offsets, cfg.Ns))


def verify_alignment(
    ch: ChannelSet, v: Optional[PhaseVector], U: Sequence[Tensor],
    V: Sequence[Tensor], tol: float
) -> AlignmentReport:
    r"""Check the alignment conditions directly by Kronecker products

    Usage:
        ``report = verify_alignment(ch, v, U, V, tol)``
    Outputs:
        - ``report``: AlignmentReport, ``passed`` when both maxima ``≤ tol``.
    """
    cfg = ch.cfg
    Z = slowops.dense_lhs(composite_channel(ch, v), U, V)
    leak = [[0. if i == j else torch.linalg.norm(Z[i][j]).item()
             for j in range(cfg.K)] for i in range(cfg.K)]
    dev = [torch.linalg.norm(
        Z[i][i] - torch.eye(cfg.ds[i], dtype=Z[i][i].dtype,
                            device=Z[i][i].device)).item()
           for i in range(cfg.K)]
    max_leak, max_dev = max(max(row) for row in leak), max(dev)
    return AlignmentReport(max_leak, max_dev,
                           max_leak <= tol and max_dev <= tol, leak, dev)
