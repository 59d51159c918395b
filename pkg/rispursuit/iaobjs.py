r"""Data objects of the RIS-assisted interference alignment problem
"""
from dataclasses import dataclass, asdict as _asdict
from typing import Optional, Sequence, Tuple, Union

import torch
from torch import Tensor

from rispursuit import ctype0
from rispursuit import utils

__all__ = ['NetworkConfig', 'ChannelSet', 'CompositeChannel', 'PhaseVector',
           'FactorPair', 'TargetVector', 'Examples']

_IntSeq = Union[int, Sequence[int]]


def _as_tuple(x: _IntSeq, K: int, name: str) -> Tuple[int, ...]:
    t = (x,)*K if isinstance(x, int) else tuple(int(_) for _ in x)
    if len(t) != K:
        raise ValueError(f'{name}: expected {K} entries, got {len(t)}')
    return t


@dataclass(frozen=True)
class NetworkConfig:
    r"""Antenna, stream and RIS dimensions of a K-pair network

    Usage:
        ``cfg = NetworkConfig(K, Ns, Ms, ds, L)``
        ``cfg = NetworkConfig.symmetric(K, N1, M1, d, L)``
    Inputs:
        - ``K``: number of transceiver pairs.
        - ``Ns``: `(K,)` ⊻ int, transmit antennas per pair.
        - ``Ms``: `(K,)` ⊻ int, receive antennas per pair.
        - ``ds``: `(K,)` ⊻ int, streams per pair, ``dk ≤ min(Nk, Mk)``.
        - ``L``: RIS elements, ``0`` for no RIS.
    Properties:
        - ``M``: ``Σ Mi·di``; ``N``: ``Σ Nj·dj``; ``S``: ``Σ Σ di·dj``.
        - ``row_offsets``, ``col_offsets``: `(K+1,)`, pair bands of ``X``.
    """
    K: int
    Ns: Tuple[int, ...]
    Ms: Tuple[int, ...]
    ds: Tuple[int, ...]
    L: int = 0

    def __post_init__(self):
        K = int(self.K)
        if K < 1:
            raise ValueError(f'K: must be >= 1, got {K}')
        object.__setattr__(self, 'K', K)
        for k in ('Ns', 'Ms', 'ds'):
            t = _as_tuple(getattr(self, k), K, k)
            if min(t) < 1:
                raise ValueError(f'{k}: all entries must be >= 1, got {t}')
            object.__setattr__(self, k, t)
        if int(self.L) < 0:
            raise ValueError(f'L: must be >= 0, got {self.L}')
        object.__setattr__(self, 'L', int(self.L))
        for k, (n, m, d) in enumerate(zip(self.Ns, self.Ms, self.ds)):
            if d > min(n, m):
                raise ValueError(f'ds[{k}]: {d} streams exceed min(N, M) = '
                                 f'{min(n, m)}')

    @classmethod
    def symmetric(
        cls, K: int, N1: int, M1: int, d: int, L: int = 0
    ) -> 'NetworkConfig':
        r"""All pairs with ``N1`` transmit, ``M1`` receive antennas, ``d``
        streams."""
        return cls(K, (N1,)*K, (M1,)*K, (d,)*K, L)

    @property
    def M(self) -> int:
        return sum(m*d for m, d in zip(self.Ms, self.ds))

    @property
    def N(self) -> int:
        return sum(n*d for n, d in zip(self.Ns, self.ds))

    @property
    def S(self) -> int:
        return sum(self.ds)**2

    @property
    def row_offsets(self) -> Tuple[int, ...]:
        return utils.band_offsets(self.Ms, self.ds)

    @property
    def col_offsets(self) -> Tuple[int, ...]:
        return utils.band_offsets(self.Ns, self.ds)

    def replace(self, **kw) -> 'NetworkConfig':
        d = _asdict(self)
        d.update(kw)
        return NetworkConfig(**d)

    def asdict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v)
                for k, v in _asdict(self).items()}


class ChannelSet(object):
    r"""Direct and RIS links of a network, immutable

    Usage:
        ``ch = ChannelSet(cfg, H, R, T, *, noise_power, tx_power)``
    Inputs:
        - ``cfg``: NetworkConfig.
        - ``H``: K×K nested sequence, ``H[i][j]``: `(Mi, Nj)`, direct links.
        - ``R``: `(K,)` sequence, ``R[i]``: `(Mi, L)`, RIS-to-receiver links.
        - ``T``: `(K,)` sequence, ``T[j]``: `(L, Nj)`, transmitter-to-RIS \
          links. ``R`` and ``T`` are empty when ``cfg.L == 0``.
    Optionals:
        - ``noise_power``: σ², linear scale, ``> 0``.
        - ``tx_power``: P, linear scale, ``> 0``.
    Properties:
        - ``device``, ``dtype``.

    .. note::
        ``L = 0`` is stored as empty ``R``/``T`` rather than zero-width
        matrices; :func:`~rispursuit.iacore.composite_channel` then skips the
        reflect term.
    """

    _readonly = ('cfg', 'H', 'R', 'T', 'noise_power', 'tx_power', 'device',
                 'dtype')
    __slots__ = set(_readonly)

    def __init__(
        self, cfg: NetworkConfig,
        H: Sequence[Sequence[Tensor]],
        R: Sequence[Tensor] = (), T: Sequence[Tensor] = (), *,
        noise_power: float = 1., tx_power: float = 1.
    ):
        K, L = cfg.K, cfg.L
        H = tuple(tuple(row) for row in H)
        R, T = (tuple(R), tuple(T)) if L > 0 else ((), ())

        if len(H) != K or any(len(row) != K for row in H):
            raise ValueError(f'H: expected a {K}x{K} grid')
        for i in range(K):
            for j in range(K):
                if H[i][j].shape != (cfg.Ms[i], cfg.Ns[j]):
                    raise ValueError(
                        f'H[{i}][{j}]: expected shape {(cfg.Ms[i], cfg.Ns[j])}'
                        f', got {tuple(H[i][j].shape)}')
        if L > 0:
            if len(R) != K or len(T) != K:
                raise ValueError(f'R, T: expected {K} matrices each')
            for k in range(K):
                if R[k].shape != (cfg.Ms[k], L):
                    raise ValueError(f'R[{k}]: expected shape '
                                     f'{(cfg.Ms[k], L)}, got '
                                     f'{tuple(R[k].shape)}')
                if T[k].shape != (L, cfg.Ns[k]):
                    raise ValueError(f'T[{k}]: expected shape '
                                     f'{(L, cfg.Ns[k])}, got '
                                     f'{tuple(T[k].shape)}')
        if not (noise_power > 0 and tx_power > 0):
            raise ValueError('noise_power and tx_power must be > 0')

        h00 = H[0][0]
        for k, v in (('cfg', cfg), ('H', H), ('R', R), ('T', T),
                     ('noise_power', float(noise_power)),
                     ('tx_power', float(tx_power)),
                     ('device', h00.device), ('dtype', h00.dtype)):
            object.__setattr__(self, k, v)
        return

    def __setattr__(self, k, v):
        raise AttributeError(f"'ChannelSet' object attribute '{k}'"
                             " is read-only")

    def asdict(self, *, toNumpy: bool = True) -> dict:
        r"""Convert the object to dict

        Usage:
            ``d = ch.asdict(*, toNumpy)``
        Inputs:
            - ``toNumpy``: [T/f], convert Tensor to Numpy arrays.
        """
        fn = ((lambda x: x.detach().cpu().numpy()) if toNumpy else
              (lambda x: x.detach()))
        return {'cfg': self.cfg,
                'H': [[fn(h) for h in row] for row in self.H],
                'R': [fn(x) for x in self.R], 'T': [fn(x) for x in self.T],
                'noise_power': self.noise_power, 'tx_power': self.tx_power}

    def to(
        self, *, device: torch.device = torch.device('cpu'),
        dtype: torch.dtype = ctype0
    ) -> 'ChannelSet':
        r"""Duplicate the object to the prescribed device with dtype"""
        if self.device == device and self.dtype == dtype:
            return self
        kw = {'device': device, 'dtype': dtype}
        return ChannelSet(self.cfg,
                          [[h.to(**kw) for h in row] for row in self.H],
                          [x.to(**kw) for x in self.R],
                          [x.to(**kw) for x in self.T],
                          noise_power=self.noise_power,
                          tx_power=self.tx_power)

    def scaled(self, s: float) -> 'ChannelSet':
        r"""Channels with every composite link ``H̃ᵢⱼ`` divided by ``s``

        ``H`` and ``R`` are divided, ``T`` is kept, so ``H̃/s`` holds for any
        phase vector.
        """
        return ChannelSet(self.cfg,
                          [[h/s for h in row] for row in self.H],
                          [x/s for x in self.R], self.T,
                          noise_power=self.noise_power,
                          tx_power=self.tx_power)

    def without_ris(self) -> 'ChannelSet':
        r"""The same network with the reflect path dropped (``L = 0``)"""
        return ChannelSet(self.cfg.replace(L=0), self.H,
                          noise_power=self.noise_power,
                          tx_power=self.tx_power)


class CompositeChannel(object):
    r"""The grid ``H̃[i][j] = H[i][j] + R[i]·diag(v)·T[j]`` bound to its config

    Usage:
        ``Ht = CompositeChannel(cfg, H)``; ``Ht[i, j]``
    """
    __slots__ = ('cfg', 'H')

    def __init__(self, cfg: NetworkConfig, H: Sequence[Sequence[Tensor]]):
        self.cfg, self.H = cfg, tuple(tuple(row) for row in H)

    def __getitem__(self, ij: Tuple[int, int]) -> Tensor:
        i, j = ij
        return self.H[i][j]


class PhaseVector(object):
    r"""Unit-modulus RIS reflection coefficients, ``Θ = diag(v)``

    Usage:
        ``pv = PhaseVector(v)``; ``pv = PhaseVector.from_angles(θ)``
    Inputs:
        - ``v``: `(L,)`, complex, ``|v_l| = 1`` within ``1e-10``.
    """
    __slots__ = ('v',)

    def __init__(self, v: Tensor, *, atol: float = 1e-10):
        if v.ndim != 1:
            raise ValueError(f'v: expected a 1-d tensor, got {v.ndim}-d')
        dev = (v.abs() - 1).abs().max().item() if v.numel() else 0.
        if dev > atol:
            raise ValueError(f'v: not unit-modulus, max ||v_l|-1| = {dev:g}')
        self.v = v

    @classmethod
    def from_angles(cls, θ: Tensor, *, dtype: torch.dtype = ctype0
                    ) -> 'PhaseVector':
        return cls(torch.polar(torch.ones_like(θ), θ).to(dtype=dtype))

    @property
    def L(self) -> int:
        return self.v.numel()

    def angles(self) -> Tensor:
        return self.v.angle()


class FactorPair(object):
    r"""Rank-``r`` factorization ``X = Lf·Rfᴴ``, ``Y = [Lf; Rf]``

    Usage:
        ``Xf = FactorPair(Lf, Rf)``; ``Xf = FactorPair.from_Y(Y, M)``
    Inputs:
        - ``Lf``: `(M, r)`.
        - ``Rf``: `(N, r)`.
    Properties:
        - ``r``, ``X``: `(M, N)`, ``Y``: `(M+N, r)`.
    """
    __slots__ = ('Lf', 'Rf')

    def __init__(self, Lf: Tensor, Rf: Tensor):
        assert(Lf.ndim == Rf.ndim == 2 and Lf.shape[1] == Rf.shape[1])
        self.Lf, self.Rf = Lf, Rf

    @classmethod
    def from_Y(cls, Y: Tensor, M: int) -> 'FactorPair':
        return cls(Y[:M], Y[M:])

    @property
    def r(self) -> int:
        return self.Lf.shape[1]

    @property
    def X(self) -> Tensor:
        return self.Lf @ self.Rf.mH

    @property
    def Y(self) -> Tensor:
        return torch.cat((self.Lf, self.Rf), dim=0)

    def check(self, cfg: NetworkConfig):
        if self.Lf.shape[0] != cfg.M or self.Rf.shape[0] != cfg.N:
            raise ValueError(f'factor shapes {tuple(self.Lf.shape)}, '
                             f'{tuple(self.Rf.shape)} do not match M = '
                             f'{cfg.M}, N = {cfg.N}')


class TargetVector(object):
    r"""Stacked IA target ``b``: identity blocks on ``(i, i)``, zeros else

    Blocks are ordered i-outer/j-inner, each column-major vectorized.

    Usage:
        ``tv = TargetVector(cfg, b)``; ``tv.block(i, j)``
    """
    __slots__ = ('cfg', 'b', 'offsets')

    def __init__(self, cfg: NetworkConfig, b: Tensor):
        assert(b.shape == (cfg.S,))
        ds, offs = cfg.ds, [0]
        for i in range(cfg.K):
            for j in range(cfg.K):
                offs.append(offs[-1] + ds[i]*ds[j])
        self.cfg, self.b, self.offsets = cfg, b, tuple(offs)

    def block(self, i: int, j: int) -> Tensor:
        k = i*self.cfg.K + j
        return self.b[self.offsets[k]:self.offsets[k+1]]


class Examples(object):
    r"""Class for quickly creating exemplary instances to play around with.
    """
    @staticmethod
    def rayleigh(
        cfg: NetworkConfig, seed: int = 0, *,
        noise_power: float = 1., tx_power: float = 1.
    ) -> ChannelSet:
        r"""Unit-variance i.i.d. Rayleigh links on every hop.
        """
        g = torch.Generator().manual_seed(seed)
        K, L, Ns, Ms = cfg.K, cfg.L, cfg.Ns, cfg.Ms
        H = [[utils.crandn((Ms[i], Ns[j]), g) for j in range(K)]
             for i in range(K)]
        R = [utils.crandn((Ms[i], L), g) for i in range(K)] if L else []
        T = [utils.crandn((L, Ns[j]), g) for j in range(K)] if L else []
        return ChannelSet(cfg, H, R, T, noise_power=noise_power,
                          tx_power=tx_power)

    @staticmethod
    def siso2(L: int = 0, seed: int = 0) -> ChannelSet:
        r"""2-pair single-antenna network, Rayleigh links.
        """
        return Examples.rayleigh(NetworkConfig.symmetric(2, 1, 1, 1, L), seed)

    @staticmethod
    def mimo3(seed: int = 0) -> ChannelSet:
        r"""3-pair 2×2 network with one stream per pair and no RIS.
        """
        return Examples.rayleigh(NetworkConfig.symmetric(3, 2, 2, 1), seed)

    @staticmethod
    def planted_siso2(
        L: int = 4, seed: int = 0
    ) -> Tuple[ChannelSet, PhaseVector]:
        r"""2-pair single-antenna network whose cross links the RIS can null.

        Cross links are set to ``H[i][j] = -R[i]·diag(v⋆)·T[j]`` for a random
        unit-modulus ``v⋆``, so one channel use suffices at ``v = v⋆``.

        Outputs:
            - ``ch``: ChannelSet.
            - ``pv``: PhaseVector, the planted ``v⋆``.
        """
        cfg = NetworkConfig.symmetric(2, 1, 1, 1, L)
        ch = Examples.rayleigh(cfg, seed)
        g = torch.Generator().manual_seed(seed + 7919)
        v = utils.randphase(L, g)
        H = [list(row) for row in ch.H]
        for i, j in ((0, 1), (1, 0)):
            H[i][j] = -(ch.R[i]*v) @ ch.T[j]
        return (ChannelSet(cfg, H, ch.R, ch.T), PhaseVector(v))

    @staticmethod
    def factors(
        cfg: NetworkConfig, r: int, seed: int = 0
    ) -> FactorPair:
        r"""Random factor pair, entries ``CN(0, 1)``.
        """
        g = torch.Generator().manual_seed(seed)
        return FactorPair(utils.crandn((cfg.M, r), g),
                          utils.crandn((cfg.N, r), g))
