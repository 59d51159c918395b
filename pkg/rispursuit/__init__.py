r"""RIS-assisted interference alignment by block-structured Riemannian pursuit.

About rispursuit:
=================

``rispursuit`` provides the following constants and submodules:

Constants:

    - ``T0dB``: path loss at the 1 m reference distance, "-30 dB".
    - ``σ2dB``: noise power, "-120 dB".
    - ``outer_tol0``: outer (alternation) accuracy on f₀, ``1e-4``.
    - ``grad_tol0``: inner (RCG) accuracy on the Riemannian gradient norm,
      ``1e-10``.
    - ``Talt0``: maximum number of alternations per rank, ``30``.

Submodules:

    - :mod:`~rispursuit.utils`
    - :mod:`~rispursuit.iaobjs`
    - :mod:`~rispursuit.manifolds`
    - :mod:`~rispursuit.iacore`
    - :mod:`~rispursuit.slowops`
    - :mod:`~rispursuit.pursuit`
    - :mod:`~rispursuit.netsim`
    - :mod:`~rispursuit.config`
    - :mod:`~rispursuit.cli`

General Comments:
=================

Variable naming convention:
---------------------------

A trailing ``f`` on a factor name (``Lf``, ``Rf``) separates the low-rank
factors of ``X = Lf·Rfᴴ`` from the RIS links ``R``/``T``.
A ``~`` in documentation (``H̃``) marks the composite, RIS-included channel.

Special keywords used in documentations:
----------------------------------------

- ``K``:   number of transceiver pairs
- ``Nk``:  transmit antennas of pair ``k``
- ``Mk``:  receive antennas of pair ``k``
- ``dk``:  data streams of pair ``k``
- ``L``:   number of RIS elements, ``0`` for no RIS
- ``M``:   ``Σ Mi·di``, row count of ``X``
- ``N``:   ``Σ Nj·dj``, column count of ``X``
- ``S``:   ``Σ Σ di·dj``, length of the IA target ``b``
- ``r``:   channel uses, i.e., the rank of ``X``
- ``⊻``: **Either or**, e.g. ``(L,) ⊻ None`` means a length-``L`` tensor \
  or ``None``.
"""
import logging

from math import pi as π, inf  # noqa: F401
import torch

T0dB = -30.    # dB, path loss at reference distance 1 m
σ2dB = -120.   # dB, noise power
outer_tol0 = 1e-4    # outer accuracy, f₀ threshold
grad_tol0 = 1e-10    # inner accuracy, Riemannian gradient norm
Talt0 = 30     # max alternations per rank

ctype0 = torch.complex128
rtype0 = torch.float64
dkw0 = {'dtype': ctype0, 'device': torch.device('cpu')}

logging.getLogger(__name__).addHandler(logging.NullHandler())


from rispursuit import (utils, iaobjs, manifolds, iacore,  # noqa: E402
                        slowops, pursuit, netsim, config, cli)
from rispursuit.version import __version__  # noqa: E402,F401

__all__ = ['T0dB', 'σ2dB', 'outer_tol0', 'grad_tol0', 'Talt0', 'utils',
           'iaobjs', 'manifolds', 'iacore', 'slowops', 'pursuit', 'netsim',
           'config', 'cli']
