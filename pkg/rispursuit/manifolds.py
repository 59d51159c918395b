r"""Complex circle and non-compact Stiefel geometry, Riemannian CG driver.

Points and tangent vectors are plain complex tensors of the ambient shape:
`(L,)` on the circle manifold, `(M+N, r)` on the factor manifold. A tangent
vector's base point is the point it was projected/transported to.
"""
import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import torch
from torch import Tensor

from rispursuit import grad_tol0

__all__ = ['TangentVector', 'ManifoldError', 'DegenerateRetractionError',
           'RcgOptions', 'RcgTrace', 'Termination', 'CircleManifold',
           'FactorManifold', 'circle_project', 'circle_retract',
           'circle_transport', 'rcg_minimize']

logger = logging.getLogger(__name__)

TangentVector = Tensor

_modulus_tol = 1e-6


class ManifoldError(ValueError):
    r"""A point is not on the manifold it is claimed to be on"""


class DegenerateRetractionError(ArithmeticError):
    r"""A retraction is singular for the requested step; shrink the step"""


class Termination(str, enum.Enum):
    GradTol = 'GradTol'
    MaxIters = 'MaxIters'
    LineSearchFail = 'LineSearchFail'


@dataclass(frozen=True)
class RcgOptions:
    r"""Riemannian conjugate gradient stopping and Armijo line search knobs

    Inputs:
        - ``grad_tol``: stop when the Riemannian gradient norm ``≤`` this.
        - ``max_iters``: iteration budget.
        - ``armijo_c1``: sufficient decrease constant, in ``(0, 1)``.
        - ``armijo_shrink``: backtracking factor, in ``(0, 1)``.
        - ``armijo_max_backtracks``: backtracks before giving up.
        - ``initial_step``: first trial step is ``initial_step/‖grad‖``; \
          later ones double the accepted step, capped at the minimizer of \
          the quadratic fitted to it.
    """
    grad_tol: float = grad_tol0
    max_iters: int = 200
    armijo_c1: float = 1e-4
    armijo_shrink: float = 0.5
    armijo_max_backtracks: int = 50
    initial_step: float = 1.

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ValueError(f'grad_tol: must be > 0, got {self.grad_tol}')
        if self.max_iters < 1:
            raise ValueError(f'max_iters: must be >= 1, got {self.max_iters}')
        for k in ('armijo_c1', 'armijo_shrink'):
            if not 0 < getattr(self, k) < 1:
                raise ValueError(f'{k}: must be in (0, 1), got '
                                 f'{getattr(self, k)}')
        if self.armijo_max_backtracks < 1:
            raise ValueError('armijo_max_backtracks: must be >= 1, got '
                             f'{self.armijo_max_backtracks}')
        if not self.initial_step > 0:
            raise ValueError(f'initial_step: must be > 0, got '
                             f'{self.initial_step}')


@dataclass
class RcgTrace:
    r"""Per-iteration history of one :func:`rcg_minimize` run

    ``objective_per_iter[0]`` and ``grad_norm_per_iter[0]`` belong to the
    initial point; ``step_sizes[t]`` is the step accepted at iteration ``t``.
    """
    objective_per_iter: List[float] = field(default_factory=list)
    grad_norm_per_iter: List[float] = field(default_factory=list)
    step_sizes: List[float] = field(default_factory=list)
    iterations: int = 0
    termination: Termination = Termination.MaxIters


def _check_modulus(v: Tensor):
    dev = (v.abs() - 1).abs().max().item() if v.numel() else 0.
    if dev > _modulus_tol:
        raise ManifoldError(f'point left the circle manifold, max '
                            f'||v_l|-1| = {dev:g}')


def circle_project(v: Tensor, g: Tensor) -> TangentVector:
    r"""Orthogonal projection onto the tangent space of the circle manifold

    Usage:
        ``ξ = circle_project(v, g)``
    Inputs:
        - ``v``: `(L,)`, unit-modulus base point.
        - ``g``: `(L,)`, ambient vector.
    Outputs:
        - ``ξ``: `(L,)`, ``g - Re{g⊙v*}⊙v``, ``Re{ξ⊙v*} = 0``.
    """
    _check_modulus(v)
    return g - (g*v.conj()).real*v


def circle_retract(v: Tensor, step: TangentVector) -> Tensor:
    r"""Circle retraction, ``(v + ξ)/|v + ξ|`` elementwise

    Usage:
        ``v1 = circle_retract(v, step)``
    Inputs:
        - ``v``: `(L,)`, unit-modulus base point.
        - ``step``: `(L,)`, tangent at ``v``.
    Outputs:
        - ``v1``: `(L,)`, unit modulus.
    """
    w = v + step
    a = w.abs()
    if a.numel() and a.min().item() < 1e-14:
        raise DegenerateRetractionError('|v + step| < 1e-14, step too long')
    return w/a


def circle_transport(v_next: Tensor, eta: TangentVector) -> TangentVector:
    r"""Vector transport to ``T_{v_next}``, i.e., projection onto it

    Usage:
        ``η1 = circle_transport(v_next, η)``
    """
    return circle_project(v_next, eta)


def _real_inner(a: Tensor, b: Tensor) -> float:
    return torch.vdot(a.reshape(-1), b.reshape(-1)).real.item()


class CircleManifold(object):
    r"""Product of ``L`` unit circles in ℂ, metric ``Re⟨a, b⟩``"""

    @staticmethod
    def project(v: Tensor, g: Tensor) -> TangentVector:
        return circle_project(v, g)

    @staticmethod
    def retract(v: Tensor, ξ: TangentVector) -> Tensor:
        return circle_retract(v, ξ)

    @staticmethod
    def transport(v_next: Tensor, η: TangentVector) -> TangentVector:
        return circle_transport(v_next, η)

    @staticmethod
    def inner(a: TangentVector, b: TangentVector) -> float:
        return _real_inner(a, b)


class FactorManifold(object):
    r"""Full-column-rank complex matrices, Euclidean metric

    The set is open in ℂ^{n×r}: projection and transport are identities and
    the retraction is addition, guarded against losing column rank.

    Usage:
        ``geo = FactorManifold(*, rank_rtol)``
    """

    def __init__(self, *, rank_rtol: float = 1e-12):
        self.rank_rtol = rank_rtol

    @staticmethod
    def project(Y: Tensor, g: Tensor) -> TangentVector:
        return g

    def retract(self, Y: Tensor, ξ: TangentVector) -> Tensor:
        Y1 = Y + ξ
        sv = torch.linalg.svdvals(Y1)
        if sv[-1].item() < self.rank_rtol*sv[0].item():
            raise DegenerateRetractionError(
                f'retracted factor is rank deficient, σ_min/σ_max = '
                f'{sv[-1].item()/max(sv[0].item(), 1e-300):g}')
        return Y1

    @staticmethod
    def transport(Y_next: Tensor, η: TangentVector) -> TangentVector:
        return η

    @staticmethod
    def inner(a: TangentVector, b: TangentVector) -> float:
        return _real_inner(a, b)


def rcg_minimize(
    geometry, objective: Callable[[Tensor], float],
    euclid_grad: Callable[[Tensor], Tensor], x0: Tensor,
    opts: RcgOptions = RcgOptions(), *,
    callback: Optional[Callable[[int, Tensor], None]] = None
) -> Tuple[Tensor, RcgTrace]:
    r"""Riemannian conjugate gradient with Polak–Ribière+ and Armijo steps

    Usage:
        ``x, trace = rcg_minimize(geometry, objective, euclid_grad, x0, opts,``
        `` *, callback)``
    Inputs:
        - ``geometry``: object with ``project``, ``retract``, ``transport``, \
          ``inner``, e.g. :class:`CircleManifold`, :class:`FactorManifold`.
        - ``objective``: point → float.
        - ``euclid_grad``: point → ambient gradient (∂/∂Re + i∂/∂Im).
        - ``x0``: starting point on the manifold.
        - ``opts``: :class:`RcgOptions`.
    Optionals:
        - ``callback``: called as ``callback(t, x)`` on ``x0`` (``t = 0``) \
          and every accepted iterate.
    Outputs:
        - ``x``: final point.
        - ``trace``: :class:`RcgTrace`.

    .. note::
        ``β = max(0, ⟨g₁, g₁ - 𝒯(g₀)⟩/⟨g₀, g₀⟩)``; a direction that is not a
        descent direction is reset to ``-g₁``.
    """
    inner, trace = geometry.inner, RcgTrace()

    x, f = x0, objective(x0)
    g = geometry.project(x, euclid_grad(x))
    gg = inner(g, g)
    trace.objective_per_iter.append(f)
    trace.grad_norm_per_iter.append(gg**0.5)
    if callback is not None:
        callback(0, x)

    if gg**0.5 <= opts.grad_tol:
        trace.termination = Termination.GradTol
        return x, trace

    η, α_next = -g, opts.initial_step/gg**0.5
    for t in range(opts.max_iters):
        slope = inner(g, η)  # < 0
        α = α_next

        for _ in range(opts.armijo_max_backtracks):
            try:
                x1 = geometry.retract(x, α*η)
            except DegenerateRetractionError:
                α *= opts.armijo_shrink
                continue
            f1 = objective(x1)
            if f1 <= f + opts.armijo_c1*α*slope:
                break
            α *= opts.armijo_shrink
        else:
            trace.termination = Termination.LineSearchFail
            logger.debug('rcg: line search failed at iter %d, f = %.6e', t, f)
            break

        g1 = geometry.project(x1, euclid_grad(x1))
        g1g1 = inner(g1, g1)
        β = max(0., (g1g1 - inner(g1, geometry.transport(x1, g)))/gg)
        η = -g1 + β*geometry.transport(x1, η)
        if inner(η, g1) >= 0:
            η = -g1

        # next trial: double, but not past the minimizer of the quadratic
        # through f, slope and f1
        curv = (f1 - f - α*slope)/α**2
        α_next = 2*α if curv <= 0 else min(2*α, -slope/(2*curv))

        x, f, g, gg = x1, f1, g1, g1g1
        trace.objective_per_iter.append(f)
        trace.grad_norm_per_iter.append(gg**0.5)
        trace.step_sizes.append(α)
        trace.iterations = t + 1
        if callback is not None:
            callback(t + 1, x)
        logger.debug('rcg: [%d] f = %.6e, |grad| = %.3e, α = %.3e',
                     t + 1, f, gg**0.5, α)

        if gg**0.5 <= opts.grad_tol:
            trace.termination = Termination.GradTol
            break
    else:
        trace.termination = Termination.MaxIters

    logger.debug('rcg: %s after %d iterations, f = %.6e',
                 trace.termination.value, trace.iterations, f)
    return x, trace
