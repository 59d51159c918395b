r"""IA left-hand sides by dense Kronecker products, autograd-differentiable.

Reference path, independent of the block bookkeeping in
:mod:`~rispursuit.iacore`.
"""

from typing import List, Sequence

import torch
from torch import Tensor

from rispursuit import utils
from rispursuit.iaobjs import CompositeChannel

__all__ = ['kron_I', 'dense_lhs', 'dense_A2']


def kron_I(H: Tensor, r: int) -> Tensor:
    r"""``H ⊗ I_r``

    Usage:
        ``Hr = kron_I(H, r)``
    Inputs:
        - ``H``: `(m, n)`.
    Outputs:
        - ``Hr``: `(m*r, n*r)`.
    """
    return torch.kron(H, torch.eye(r, dtype=H.dtype, device=H.device))


def dense_lhs(
    Ht: CompositeChannel, U: Sequence[Tensor], V: Sequence[Tensor]
) -> List[List[Tensor]]:
    r"""All products ``U_iᴴ(H̃ᵢⱼ ⊗ I_r)V_j``

    Usage:
        ``Z = dense_lhs(Ht, U, V)``
    Inputs:
        - ``U``: `(K,)`, ``U[i]``: `(Mi*r, di)`, decoders.
        - ``V``: `(K,)`, ``V[j]``: `(Nj*r, dj)`, precoders.
    Outputs:
        - ``Z``: K×K nested list, ``Z[i][j]``: `(di, dj)`.
    """
    K = Ht.cfg.K
    r = V[0].shape[0]//Ht.cfg.Ns[0]
    return [[U[i].mH @ kron_I(Ht[i, j], r) @ V[j] for j in range(K)]
            for i in range(K)]


def dense_A2(
    Ht: CompositeChannel, U: Sequence[Tensor], V: Sequence[Tensor]
) -> Tensor:
    r"""Stacked, column-major vectorized :func:`dense_lhs`, i-outer/j-inner

    Usage:
        ``y = dense_A2(Ht, U, V)``
    Outputs:
        - ``y``: `(S,)`.
    """
    return torch.cat([utils.vec(z) for row in dense_lhs(Ht, U, V)
                      for z in row])
