r"""rispursuit utilities

Utilities for unit conversions, column-major vectorization, the band layout
of ``X``, seeded sampling and complex (de)serialization.
"""

from typing import Sequence, Tuple
from numbers import Number

import numpy as np
import torch
from torch import Tensor

from rispursuit import π, ctype0, rtype0

__all__ = ['band_offsets', 'c2pairs', 'crandn', 'db2lin', 'lin2db',
           'pairs2c', 'randphase', 'unvec', 'vec']


def db2lin(x_db: Number) -> float:
    r"""Convert decibels to linear scale

    Usage:
        ``x = db2lin(x_db)``
    """
    return 10.**(x_db/10.)


def lin2db(x: Number) -> float:
    r"""Convert linear scale to decibels

    Usage:
        ``x_db = lin2db(x)``
    """
    return 10.*np.log10(x)


def vec(Z: Tensor) -> Tensor:
    r"""Column-major vectorization

    Usage:
        ``z = vec(Z)``
    Inputs:
        - ``Z``: `(m, n)`.
    Outputs:
        - ``z``: `(m*n,)`, columns of ``Z`` stacked.

    See Also:
        :func:`~rispursuit.utils.unvec`
    """
    return Z.mT.reshape(-1)


def unvec(z: Tensor, m: int, n: int) -> Tensor:
    r"""Inverse of :func:`~rispursuit.utils.vec`

    Usage:
        ``Z = unvec(z, m, n)``
    Inputs:
        - ``z``: `(m*n,)`.
    Outputs:
        - ``Z``: `(m, n)`.
    """
    assert(z.numel() == m*n)
    return z.reshape(n, m).mT


def band_offsets(ants: Sequence[int], ds: Sequence[int]) -> Tuple[int, ...]:
    r"""Start offsets of the per-pair bands of ``X``

    Pair ``k`` occupies ``ants[k]*ds[k]`` consecutive rows (or columns),
    antenna-major within the band.

    Usage:
        ``offs = band_offsets(ants, ds)``
    Inputs:
        - ``ants``: `(K,)`, antennas per pair.
        - ``ds``: `(K,)`, streams per pair.
    Outputs:
        - ``offs``: `(K+1,)`, ``offs[k]:offs[k+1]`` is the band of pair ``k``.
    """
    offs = [0]
    for a, d in zip(ants, ds):
        offs.append(offs[-1] + a*d)
    return tuple(offs)


def crandn(
    shape: Tuple[int, ...], generator: torch.Generator, *,
    dtype: torch.dtype = ctype0, device: torch.device = torch.device('cpu')
) -> Tensor:
    r"""I.i.d. standard circularly-symmetric complex Gaussian samples

    Real and imaginary parts have variance ``1/2`` each.

    Usage:
        ``z = crandn(shape, generator, *, dtype, device)``
    """
    return torch.randn(shape, generator=generator, dtype=dtype, device=device)


def randphase(
    L: int, generator: torch.Generator, *,
    dtype: torch.dtype = ctype0, device: torch.device = torch.device('cpu')
) -> Tensor:
    r"""Unit-modulus samples with i.i.d. uniform phases on ``[0, 2π)``

    Usage:
        ``v = randphase(L, generator, *, dtype, device)``
    Outputs:
        - ``v``: `(L,)`, ``|v_l| = 1``.
    """
    θ = 2*π*torch.rand((L,), generator=generator, dtype=rtype0,
                       device=device)
    return torch.polar(torch.ones_like(θ), θ).to(dtype=dtype)


def c2pairs(z: Tensor) -> list:
    r"""Complex tensor to nested lists of ``[real, imag]`` pairs

    Usage:
        ``pairs = c2pairs(z)``
    Outputs:
        - ``pairs``: nested list of shape ``z.shape+(2,)``, python floats.

    See Also:
        :func:`~rispursuit.utils.pairs2c`
    """
    z_np = z.detach().cpu().resolve_conj().numpy()
    return np.stack((z_np.real, z_np.imag), axis=-1).tolist()


def pairs2c(pairs, *, dtype: torch.dtype = ctype0) -> Tensor:
    r"""Nested lists of ``[real, imag]`` pairs to a complex tensor

    Usage:
        ``z = pairs2c(pairs, *, dtype)``
    """
    a = np.asarray(pairs, dtype=np.float64)
    if a.shape[-1:] != (2,):
        raise ValueError(f'expected trailing [real, imag] pairs, got shape '
                         f'{a.shape}')
    return torch.from_numpy(a[..., 0] + 1j*a[..., 1]).to(dtype=dtype)
