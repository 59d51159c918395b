import pytest
import torch

from rispursuit import π
from rispursuit import iaobjs
from rispursuit.iaobjs import (NetworkConfig, ChannelSet, PhaseVector,
                               FactorPair, Examples)


class Test_iaobjs:

    dtype, atol = torch.complex128, 1e-12
    dkw = {'dtype': dtype, 'device': torch.device('cpu')}

    def test_NetworkConfig(self):
        cfg = NetworkConfig(3, 2, (2, 3, 4), 1, L=5)
        assert(cfg.Ns == (2, 2, 2) and cfg.Ms == (2, 3, 4))
        assert((cfg.M, cfg.N, cfg.S) == (9, 6, 9))
        assert(cfg.row_offsets == (0, 2, 5, 9))

        cfg = NetworkConfig.symmetric(2, 2, 2, 2)
        assert((cfg.M, cfg.N, cfg.S, cfg.L) == (8, 8, 16, 0))
        assert(cfg.replace(L=16).L == 16 and cfg.L == 0)
        assert(cfg.asdict() == {'K': 2, 'Ns': [2, 2], 'Ms': [2, 2],
                                'ds': [2, 2], 'L': 0})

        with pytest.raises(ValueError, match='ds\\[1\\]'):
            NetworkConfig(2, (2, 2), (2, 1), 2)
        with pytest.raises(ValueError, match='K'):
            NetworkConfig(0, 1, 1, 1)
        with pytest.raises(ValueError, match='Ms'):
            NetworkConfig(2, 1, (1, 1, 1), 1)
        with pytest.raises(ValueError, match='L'):
            NetworkConfig(2, 1, 1, 1, L=-1)
        return

    def test_ChannelSet(self):
        ch = Examples.rayleigh(NetworkConfig.symmetric(2, 3, 2, 1, L=4), 1)
        assert(ch.H[0][1].shape == (2, 3))
        assert(ch.R[1].shape == (2, 4) and ch.T[0].shape == (4, 3))
        with pytest.raises(AttributeError):
            ch.H = None

        s = 4.
        chs = ch.scaled(s)
        assert(torch.allclose(chs.H[1][0]*s, ch.H[1][0], atol=self.atol))
        assert(torch.allclose(chs.R[0]*s, ch.R[0], atol=self.atol))
        assert(chs.T[0] is ch.T[0])

        ch0 = ch.without_ris()
        assert(ch0.cfg.L == 0 and ch0.R == () and ch0.T == ())
        assert(ch0.H[0][0] is ch.H[0][0])

        d = ch.asdict()
        assert(d['H'][0][0].shape == (2, 3) and len(d['R']) == 2)
        assert(ch.to(dtype=torch.complex64).dtype == torch.complex64)

        H = [list(row) for row in ch.H]
        H[0][1] = H[0][1][:, :2]
        with pytest.raises(ValueError, match='H\\[0\\]\\[1\\]'):
            ChannelSet(ch.cfg, H, ch.R, ch.T)
        with pytest.raises(ValueError, match='R'):
            ChannelSet(ch.cfg, ch.H, ch.R[:1], ch.T)
        with pytest.raises(ValueError):
            ChannelSet(ch.cfg, ch.H, ch.R, ch.T, noise_power=0.)
        return

    def test_PhaseVector(self):
        θ = torch.linspace(0, 6, 7, dtype=torch.float64)
        pv = PhaseVector.from_angles(θ)
        assert(pv.L == 7)
        assert(torch.allclose(torch.remainder(pv.angles(), 2*π),
                              torch.remainder(θ, 2*π), atol=1e-12))
        with pytest.raises(ValueError, match='unit-modulus'):
            PhaseVector(1.01*pv.v)
        with pytest.raises(ValueError):
            PhaseVector(pv.v.reshape(1, -1))
        return

    def test_FactorPair(self):
        cfg = NetworkConfig.symmetric(3, 2, 2, 1)
        Xf = Examples.factors(cfg, 2, seed=3)
        assert(Xf.r == 2 and Xf.X.shape == (6, 6) and Xf.Y.shape == (12, 2))
        Xf1 = FactorPair.from_Y(Xf.Y, cfg.M)
        assert(torch.equal(Xf1.X, Xf.X))
        Xf.check(cfg)
        with pytest.raises(ValueError):
            Xf.check(NetworkConfig.symmetric(2, 2, 2, 1))
        return

    def test_TargetVector(self):
        cfg = NetworkConfig(2, 2, 2, (1, 2))
        b = torch.arange(cfg.S, dtype=torch.float64).to(self.dtype)
        tv = iaobjs.TargetVector(cfg, b)
        assert(tv.block(0, 0).tolist() == [0])
        assert(tv.block(0, 1).real.tolist() == [1., 2.])
        assert(tv.block(1, 1).real.tolist() == [5., 6., 7., 8.])
        return

    def test_planted(self):
        ch, pv = Examples.planted_siso2(L=4, seed=2)
        for i, j in ((0, 1), (1, 0)):
            Ht = ch.H[i][j] + (ch.R[i]*pv.v) @ ch.T[j]
            assert(Ht.abs().item() < 1e-12)
        return


if __name__ == '__main__':
    tmp = Test_iaobjs()
    tmp.test_NetworkConfig()
    tmp.test_ChannelSet()
    tmp.test_PhaseVector()
    tmp.test_FactorPair()
    tmp.test_TargetVector()
    tmp.test_planted()
