import numpy as np
import pytest
import torch

import rispursuit
from rispursuit import utils, iacore
from rispursuit.iaobjs import NetworkConfig, PhaseVector, FactorPair, Examples
from rispursuit.manifolds import RcgOptions
from rispursuit.pursuit import (PursuitOptions, RankDeficiencyError,
                                solve_fixed_rank, riemannian_pursuit,
                                recover_transceivers, verify_alignment)


def closed_form_3user(ch):
    r"""Eigenvector IA solution of the 3-pair 2×2 single-stream network"""
    H = ch.H
    inv = torch.linalg.inv
    E = (inv(H[1][0]) @ H[1][2] @ inv(H[0][2]) @ H[0][1] @ inv(H[2][1])
         @ H[2][0])
    _, W = torch.linalg.eig(E)
    v1 = W[:, :1]
    V = [v1, inv(H[2][1]) @ H[2][0] @ v1, inv(H[1][2]) @ H[1][0] @ v1]
    U = []
    for i in range(3):
        j = (i + 1) % 3
        w = H[i][j] @ V[j]  # interference direction at receiver i
        u = torch.stack((w[1].conj(), -w[0].conj()))
        U.append(u/(u.mH @ H[i][i] @ V[i]).conj())
    return U, V


class Test_pursuit:

    dtype, atol = torch.complex128, 1e-8
    dkw = {'dtype': dtype, 'device': torch.device('cpu')}

    tol = 10*(2*1e-4)**0.5

    def test_options(self):
        with pytest.raises(ValueError, match='r_start'):
            PursuitOptions(r_start=3, r_max=2)
        with pytest.raises(ValueError, match='restarts_per_rank'):
            PursuitOptions(restarts_per_rank=0)
        return

    def test_defaults(self):
        assert(PursuitOptions().outer_tol == 1e-4)
        assert(PursuitOptions().inner.grad_tol == 1e-10)
        assert(RcgOptions().grad_tol == 1e-10)
        assert(rispursuit.outer_tol0 != rispursuit.grad_tol0)

        ns = {}
        exec('from rispursuit import *', ns)
        assert(ns['outer_tol0'] == 1e-4 and ns['grad_tol0'] == 1e-10)
        assert(all(k in ns for k in rispursuit.__all__))
        return

    def test_closed_form_3user(self):
        for seed in range(3):
            ch = Examples.mimo3(seed)
            U, V = closed_form_3user(ch)
            rep = verify_alignment(ch, None, U, V, 1e-8)
            assert(rep.passed)
            assert(rep.leakage[0][0] == 0.)
        return

    def test_3user(self):
        hits = 0
        for seed in range(10):
            ch = Examples.mimo3(seed)
            sol = riemannian_pursuit(ch, PursuitOptions(seed=seed))
            if not (sol.feasible and sol.r == 1):
                continue
            hits += 1
            assert(sol.residual <= 1e-4 and sol.dof == 3.)
            assert(sol.v is None)
            rep = verify_alignment(ch, sol.v, sol.U, sol.V, self.tol)
            assert(rep.passed)
            assert(rep.max_interference_leakage <= self.tol)
        assert(hits >= 9)
        return

    def test_2user_r2(self):
        ch = Examples.siso2(L=0, seed=4)
        h11, h22 = ch.H[0][0][0, 0], ch.H[1][1][0, 0]
        e = torch.eye(2, **self.dkw)
        U = [e[:, :1]/h11.conj(), e[:, 1:]/h22.conj()]
        V = [e[:, :1], e[:, 1:]]
        assert(verify_alignment(ch, None, U, V, 1e-12).passed)

        # one channel use cannot null scalar cross links: the cross products
        # are tied to the direct ones by κ = h12·h21/(h11·h22)
        κ = abs((ch.H[0][1]*ch.H[1][0]/(ch.H[0][0]*ch.H[1][1])).item())
        f_inf = min(κ/(1 + κ), 0.5)
        g = torch.Generator().manual_seed(0)
        opts = PursuitOptions()
        for _ in range(3):
            init = (FactorPair(utils.crandn((2, 1), g),
                               utils.crandn((2, 1), g)), None)
            _, _, f0, _ = solve_fixed_rank(ch, 1, init, opts)
            assert(f0 >= f_inf - 1e-12)
        assert(f_inf > 0)
        return

    def test_siso2(self):
        r"""Two SISO pairs: DoF 1 without RIS, DoF 2 with four elements"""
        ranks = {0: [], 4: []}
        for seed in range(20):
            for L in (0, 4):
                sol = riemannian_pursuit(Examples.siso2(L, seed),
                                         PursuitOptions(seed=seed))
                ranks[L].append(sol.r if sol.feasible else 5)
                if L == 0:
                    assert(sol.feasible and sol.r == 2 and sol.dof == 1.)
        assert(sum(r == 1 for r in ranks[4][:10]) >= 8)
        assert(np.mean(ranks[4]) <= np.mean(ranks[0]))
        return

    def test_planted(self):
        ch, pv = Examples.planted_siso2(L=4, seed=1)
        cfg, g = ch.cfg, torch.Generator().manual_seed(1)
        init = (FactorPair(utils.crandn((cfg.M, 1), g),
                           utils.crandn((cfg.N, 1), g)), pv)
        Xf, pv1, f0, hist = solve_fixed_rank(
            ch, 1, init, PursuitOptions(outer_tol=1e-12),
            optimize_phase=False)
        assert(f0 <= 1e-10)
        assert(pv1 is pv)
        assert(all(h.f0_after_theta is None for h in hist))

        U, V = recover_transceivers(Xf, cfg)
        assert(verify_alignment(ch, pv, U, V, 1e-4).passed)
        return

    def test_monotone(self):
        r"""No block update increases the joint objective"""
        ch = Examples.rayleigh(NetworkConfig.symmetric(3, 2, 2, 1, L=4), 5)
        ch, _ = iacore.normalize_channels(ch)
        g = torch.Generator().manual_seed(5)
        cfg = ch.cfg
        init = (FactorPair(utils.crandn((cfg.M, 2), g)/4,
                           utils.crandn((cfg.N, 2), g)/4),
                PhaseVector(utils.randphase(cfg.L, g)))
        f_init = iacore.objective_f0(ch, *init)
        opts = PursuitOptions(max_alternations=5,
                              inner=RcgOptions(max_iters=20))
        _, _, f0, hist = solve_fixed_rank(ch, 2, init, opts)
        seq = [f_init]
        for h in hist:
            seq.append(h.f0_after_x)
            if h.f0_after_theta is not None:
                seq.append(h.f0_after_theta)
        assert(all(b <= a + 1e-10 for a, b in zip(seq, seq[1:])))
        assert(f0 == pytest.approx(seq[-1], rel=1e-8, abs=1e-14))
        return

    def test_recover(self):
        # scalar network: U = conj(l), V = conj(r)
        cfg = NetworkConfig(1, 1, 1, 1)
        l = torch.tensor([[2.-1j]], **self.dkw)
        r = torch.tensor([[0.5+3j]], **self.dkw)
        U, V = recover_transceivers(FactorPair(l, r), cfg)
        assert(U[0].item() == (2.+1j) and V[0].item() == (0.5-3j))

        cfg = NetworkConfig.symmetric(2, 2, 2, 1)
        Xf = Examples.factors(cfg, 2, 0)
        Lf = Xf.Lf.clone()
        Lf[:, 1] = 2*Lf[:, 0]
        with pytest.raises(RankDeficiencyError, match='Lf'):
            recover_transceivers(FactorPair(Lf, Xf.Rf), cfg)
        return

    def test_infeasible_budget(self):
        # three SISO pairs need more than one channel use
        ch = Examples.rayleigh(NetworkConfig.symmetric(3, 1, 1, 1), 2)
        sol = riemannian_pursuit(ch, PursuitOptions(r_max=1))
        assert(not sol.feasible and sol.dof is None)
        assert(sol.residual > 1e-4 and sol.r == 1)
        assert(len(sol.trace) == 3)
        assert(all(t['r'] == 1 for t in sol.trace))
        return

    def test_deterministic(self):
        ch = Examples.siso2(4, 3)
        s0 = riemannian_pursuit(ch, PursuitOptions(seed=9))
        s1 = riemannian_pursuit(ch, PursuitOptions(seed=9))
        assert(s0.r == s1.r and s0.residual == s1.residual)
        assert(torch.equal(s0.Y.X, s1.Y.X))
        return

    def test_warm_start(self):
        ch = Examples.siso2(0, 1)
        opts = PursuitOptions(warm_start_rank_increase=True)
        sol = riemannian_pursuit(ch, opts)
        assert(sol.feasible and sol.r == 2)
        return


if __name__ == '__main__':
    tmp = Test_pursuit()
    tmp.test_options()
    tmp.test_defaults()
    tmp.test_closed_form_3user()
    tmp.test_3user()
    tmp.test_2user_r2()
    tmp.test_siso2()
    tmp.test_planted()
    tmp.test_monotone()
    tmp.test_recover()
    tmp.test_infeasible_budget()
    tmp.test_deterministic()
    tmp.test_warm_start()
