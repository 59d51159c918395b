r"""IA operator assemblies with explicit adjoint (Jacobian) operations.

The fast path evaluates the stacked left-hand sides of the alignment
equations block by block,

    ``block(i, j) = vec(Σ_m Σ_n H̃ᵢⱼ[m, n]·X_{i,j}[m, n])``,

where ``X_{i,j}[m, n]`` is the ``di×dj`` sub-block of ``X`` at row band
``(i, m)`` and column band ``(j, n)``. Bands are pair-major, then antenna,
then stream; ``vec`` is column-major; blocks are ordered i-outer/j-inner.
"""

from typing import Optional, Tuple

import torch
from torch import Tensor
from torch.autograd import Function

from rispursuit import dkw0
from rispursuit import utils
from rispursuit.iaobjs import (NetworkConfig, ChannelSet, CompositeChannel,
                               PhaseVector, FactorPair, TargetVector)

__all__ = ['build_target', 'composite_channel', 'apply_A2', 'adjoint_A2',
           'f2_value_grad', 'assemble_phase_system', 'f1_value_grad',
           'objective_f0', 'normalize_channels']


def _blocks4(X: Tensor, cfg: NetworkConfig, i: int, j: int) -> Tensor:
    r"""``X_{i,j}`` viewed as `(Mi, di, Nj, dj)`, ``[m, :, n, :]`` is
    ``X_{i,j}[m, n]``"""
    ro, co = cfg.row_offsets, cfg.col_offsets
    Xij = X[ro[i]:ro[i+1], co[j]:co[j+1]]
    return Xij.reshape(cfg.Ms[i], cfg.ds[i], cfg.Ns[j], cfg.ds[j])


def build_target(
    cfg: NetworkConfig, *, dtype: torch.dtype = dkw0['dtype'],
    device: torch.device = dkw0['device']
) -> TargetVector:
    r"""Stack the IA right-hand sides

    Usage:
        ``tv = build_target(cfg)``
    Outputs:
        - ``tv``: TargetVector, ``b``: `(S,)`, ``vec(I_di)`` on blocks \
          ``(i, i)``, zeros elsewhere.
    """
    ds, parts = cfg.ds, []
    for i in range(cfg.K):
        for j in range(cfg.K):
            if i == j:
                parts.append(utils.vec(torch.eye(ds[i], dtype=dtype,
                                                 device=device)))
            else:
                parts.append(torch.zeros(ds[i]*ds[j], dtype=dtype,
                                         device=device))
    return TargetVector(cfg, torch.cat(parts))


def composite_channel(
    ch: ChannelSet, v: Optional[PhaseVector] = None
) -> CompositeChannel:
    r"""Compose direct and reflected links

    Usage:
        ``Ht = composite_channel(ch, v)``
    Inputs:
        - ``ch``: ChannelSet.
        - ``v``: PhaseVector ⊻ None, ignored (may be None) when ``L = 0``.
    Outputs:
        - ``Ht``: CompositeChannel, ``H̃[i][j] = H[i][j] + R[i]·diag(v)·T[j]``.
    """
    cfg = ch.cfg
    if cfg.L == 0:
        return CompositeChannel(cfg, ch.H)
    assert(v is not None and v.L == cfg.L)
    Rv = [R*v.v for R in ch.R]  # R[i]·diag(v)
    H = [[ch.H[i][j] + Rv[i] @ ch.T[j] for j in range(cfg.K)]
         for i in range(cfg.K)]
    return CompositeChannel(cfg, H)


def _a2_forward(Ht: CompositeChannel, X: Tensor) -> Tensor:
    cfg, out = Ht.cfg, []
    for i in range(cfg.K):
        for j in range(cfg.K):
            Z = torch.einsum('mn,manb->ab', Ht[i, j], _blocks4(X, cfg, i, j))
            out.append(utils.vec(Z))
    return torch.cat(out)


def _a2_adjoint(Ht: CompositeChannel, y: Tensor) -> Tensor:
    cfg, ds, k = Ht.cfg, Ht.cfg.ds, 0
    rows = []
    for i in range(cfg.K):
        cols = []
        for j in range(cfg.K):
            n = ds[i]*ds[j]
            Yij = utils.unvec(y[k:k+n], ds[i], ds[j])
            G4 = torch.einsum('mn,ab->manb', Ht[i, j].conj(), Yij)
            cols.append(G4.reshape(cfg.Ms[i]*ds[i], cfg.Ns[j]*ds[j]))
            k += n
        rows.append(torch.cat(cols, dim=1))
    return torch.cat(rows, dim=0)


class A2Operator(Function):
    r"""The fixed-Θ linear IA operator with explicit adjoint (backward)

    This operator is only differentiable w.r.t. ``X``.
    """

    @staticmethod
    def forward(ctx, X: Tensor, Ht: CompositeChannel) -> Tensor:
        r"""Forward: ``y = 𝒜₂(X)``

        Inputs:
            - ``X``: `(M, N)`.
            - ``Ht``: CompositeChannel.
        Outputs:
            - ``y``: `(S,)`.
        """
        ctx.Ht = Ht
        return _a2_forward(Ht, X)

    @staticmethod
    def backward(ctx, grad_y: Tensor) -> Tuple[Tensor, None]:
        r"""Backward: ``∂/∂X = 𝒜₂*(∂/∂y)``"""
        grad_X = None
        if ctx.needs_input_grad[0]:
            grad_X = _a2_adjoint(ctx.Ht, grad_y)
        return grad_X, None


def apply_A2(Ht: CompositeChannel, Xf: FactorPair) -> Tensor:
    r"""Evaluate the stacked IA left-hand sides for ``X = Lf·Rfᴴ``

    Usage:
        ``y = apply_A2(Ht, Xf)``
    Inputs:
        - ``Ht``: CompositeChannel.
        - ``Xf``: FactorPair, shapes matching ``Ht.cfg``.
    Outputs:
        - ``y``: `(S,)`.
    """
    Xf.check(Ht.cfg)
    return A2Operator.apply(Xf.X, Ht)


def adjoint_A2(Ht: CompositeChannel, y: Tensor) -> Tensor:
    r"""Adjoint of :func:`apply_A2` w.r.t. ``X``

    ``⟨𝒜₂(X), y⟩ = ⟨X, G⟩`` with ``⟨p, q⟩ = Σ p⊙q*``; sub-block
    ``(i, m)×(j, n)`` of ``G`` is ``conj(H̃ᵢⱼ[m, n])·unvec(y_ij)``.

    Usage:
        ``G = adjoint_A2(Ht, y)``
    Inputs:
        - ``y``: `(S,)`.
    Outputs:
        - ``G``: `(M, N)`.
    """
    assert(y.shape == (Ht.cfg.S,))
    return _a2_adjoint(Ht, y)


def f2_value_grad(
    Ht: CompositeChannel, Y: FactorPair, tv: TargetVector
) -> Tuple[float, Tensor]:
    r"""Transceiver-block objective and its Euclidean gradient

    Usage:
        ``f2, grad = f2_value_grad(Ht, Y, tv)``
    Outputs:
        - ``f2``: ``½‖𝒜₂(Lf·Rfᴴ) - b‖²``.
        - ``grad``: `(M+N, r)`, ``[G·Rf; Gᴴ·Lf]``, ``G = 𝒜₂*(residual)``.
    """
    ρ = _a2_forward(Ht, Y.X) - tv.b
    G = _a2_adjoint(Ht, ρ)
    grad = torch.cat((G @ Y.Rf, G.mH @ Y.Lf), dim=0)
    return 0.5*torch.vdot(ρ, ρ).real.item(), grad


def assemble_phase_system(
    ch: ChannelSet, Xf: FactorPair, tv: TargetVector
) -> Tuple[Tensor, Tensor]:
    r"""Least-squares system of the phase block for a fixed ``X``

    ``A·v - c`` equals ``𝒜(X, Θ) - b`` for every ``v``, with row block
    ``(i, j)`` of ``A`` equal to ``Σ_m Σ_n vec(X_{i,j}[m, n]) ⊗ a_ij[m, n]``,
    ``a_ij[m, n] = R_i[m]·diag(T_j[:, n])``, and ``c = b - e``,
    ``e_ij = Σ_m Σ_n vec(H_ij[m, n]·X_{i,j}[m, n])``.

    Usage:
        ``A, c = assemble_phase_system(ch, Xf, tv)``
    Outputs:
        - ``A``: `(S, L)`.
        - ``c``: `(S,)`.
    """
    cfg = ch.cfg
    if cfg.L == 0:
        raise ValueError('phase system undefined without RIS elements (L = 0)')
    Xf.check(cfg)
    X, A, e = Xf.X, [], []
    for i in range(cfg.K):
        for j in range(cfg.K):
            X4 = _blocks4(X, cfg, i, j)
            # (b, a) flattened b-major is the column-major vec index
            Aij = torch.einsum('manb,ml,ln->bal', X4, ch.R[i], ch.T[j])
            A.append(Aij.reshape(-1, cfg.L))
            e.append(torch.einsum('mn,manb->ba', ch.H[i][j], X4).reshape(-1))
    return torch.cat(A, dim=0), tv.b - torch.cat(e)


def f1_value_grad(A: Tensor, c: Tensor, v: Tensor) -> Tuple[float, Tensor]:
    r"""Phase-block objective ``½‖Av - c‖²`` and gradient ``Aᴴ(Av - c)``

    Usage:
        ``f1, grad = f1_value_grad(A, c, v)``
    Inputs:
        - ``v``: `(L,)` ⊻ PhaseVector.
    """
    v = v.v if isinstance(v, PhaseVector) else v
    ρ = A @ v - c
    return 0.5*torch.vdot(ρ, ρ).real.item(), A.mH @ ρ


def objective_f0(
    ch: ChannelSet, Xf: FactorPair, v: Optional[PhaseVector],
    tv: Optional[TargetVector] = None
) -> float:
    r"""Joint objective ``½‖𝒜(X, Θ) - b‖²``

    Usage:
        ``f0 = objective_f0(ch, Xf, v, tv)``
    """
    tv = build_target(ch.cfg, dtype=ch.dtype, device=ch.device) if tv is None \
        else tv
    ρ = _a2_forward(composite_channel(ch, v), Xf.X) - tv.b
    return 0.5*torch.vdot(ρ, ρ).real.item()


def normalize_channels(ch: ChannelSet) -> Tuple[ChannelSet, float]:
    r"""Scale all composite links by one constant, median ‖Hᵢⱼ‖_F → 1

    A common constant keeps the alignment solution set: if ``X`` solves the
    scaled problem, ``X/s`` solves the original one.

    Usage:
        ``ch_n, s = normalize_channels(ch)``
    Outputs:
        - ``ch_n``: ChannelSet, ``H̃/s``.
        - ``s``: float, the median direct-link Frobenius norm.
    """
    norms = torch.stack([torch.linalg.norm(h) for row in ch.H for h in row])
    s = torch.quantile(norms, 0.5).item()
    if not (s > 0 and s < float('inf')):
        s = 1.
    return ch.scaled(s), s
