import numpy as np
import torch
import pytest

from rispursuit import π
from rispursuit import utils


def to_np(x):
    return x.detach().cpu().numpy()


class Test_utils:

    dtype, atol = torch.complex128, 1e-12
    dkw = {'dtype': dtype, 'device': torch.device('cpu')}

    def test_db(self):
        assert(utils.db2lin(-30.) == 1e-3)
        assert(utils.db2lin(0.) == 1.)
        assert(utils.lin2db(utils.db2lin(-120.)) == pytest.approx(-120.))
        return

    def test_vec(self):
        Z = torch.tensor([[1, 2, 3], [4, 5, 6]], **self.dkw)
        z = utils.vec(Z)
        assert(to_np(z.real).tolist() == [1, 4, 2, 5, 3, 6])
        assert(torch.equal(utils.unvec(z, 2, 3), Z))
        return

    def test_band_offsets(self):
        assert(utils.band_offsets((2, 3, 1), (1, 2, 1)) == (0, 2, 8, 9))
        assert(utils.band_offsets((), ()) == (0,))
        return

    def test_sampling(self):
        g = torch.Generator().manual_seed(0)
        v = utils.randphase(64, g)
        assert(v.dtype == self.dtype)
        assert(to_np(v.abs()) == pytest.approx(np.ones(64), abs=self.atol))
        θ = to_np(v.angle()) % (2*π)
        assert(np.all((θ >= 0) & (θ < 2*π)))

        z0 = utils.crandn((3, 4), torch.Generator().manual_seed(5))
        z1 = utils.crandn((3, 4), torch.Generator().manual_seed(5))
        assert(z0.shape == (3, 4) and torch.equal(z0, z1))
        return

    def test_pairs(self):
        z = torch.tensor([[1+2j, -3.5j], [0.25, 1e-17+0j]], **self.dkw)
        p = utils.c2pairs(z)
        assert(p[0][0] == [1., 2.] and p[1][1] == [1e-17, 0.])
        assert(torch.equal(utils.pairs2c(p), z))
        with pytest.raises(ValueError):
            utils.pairs2c([[1., 2., 3.]])
        return


if __name__ == '__main__':
    tmp = Test_utils()
    tmp.test_db()
    tmp.test_vec()
    tmp.test_band_offsets()
    tmp.test_sampling()
    tmp.test_pairs()
