import numpy as np
import pytest
import torch

from rispursuit import utils, manifolds
from rispursuit.manifolds import (RcgOptions, Termination, CircleManifold,
                                  FactorManifold, rcg_minimize)


class Test_manifolds:

    dtype, atol = torch.complex128, 1e-12
    dkw = {'dtype': dtype, 'device': torch.device('cpu')}

    def g(self, seed=0):
        return torch.Generator().manual_seed(seed)

    def test_circle(self):
        g = self.g()
        v, w = utils.randphase(16, g), utils.crandn((16,), g)
        ξ = manifolds.circle_project(v, w)
        assert((ξ*v.conj()).real.abs().max().item() < self.atol)
        assert(torch.allclose(manifolds.circle_project(v, ξ), ξ,
                              atol=self.atol))

        v1 = manifolds.circle_retract(v, ξ)
        assert(((v1.abs() - 1).abs().max().item()) < self.atol)
        assert(torch.equal(manifolds.circle_transport(v1, ξ),
                           manifolds.circle_project(v1, ξ)))

        with pytest.raises(manifolds.DegenerateRetractionError):
            manifolds.circle_retract(v, -v)
        with pytest.raises(manifolds.ManifoldError):
            manifolds.circle_project(2*v, w)
        return

    def test_factor(self):
        geo, g = FactorManifold(), self.g(1)
        Y = utils.crandn((6, 2), g)
        ξ = utils.crandn((6, 2), g)
        assert(torch.equal(geo.project(Y, ξ), ξ))
        assert(torch.equal(geo.retract(Y, ξ), Y + ξ))

        step = -Y.clone()
        step[:, 1] = 0  # kills the first column
        with pytest.raises(manifolds.DegenerateRetractionError):
            geo.retract(Y, step)
        return

    def test_options(self):
        with pytest.raises(ValueError, match='armijo_c1'):
            RcgOptions(armijo_c1=1.)
        with pytest.raises(ValueError, match='max_iters'):
            RcgOptions(max_iters=0)
        return

    def test_rcg_circle(self):
        r"""A full phase-block run on a random least-squares instance stays on
        the manifold with a non-increasing objective"""
        g, L = self.g(2), 16
        A, c = utils.crandn((24, L), g), utils.crandn((24,), g)
        v0 = utils.randphase(L, g)

        def fn(v):
            ρ = A @ v - c
            return 0.5*torch.vdot(ρ, ρ).real.item()

        def grad(v):
            return A.mH @ (A @ v - c)

        devs = []

        def callback(t, v):
            devs.append((v.abs() - 1).abs().max().item())

        v, trace = rcg_minimize(CircleManifold(), fn, grad, v0,
                                RcgOptions(max_iters=300),
                                callback=callback)
        assert(len(devs) == trace.iterations + 1)
        assert(max(devs) <= 1e-12)
        f = np.array(trace.objective_per_iter)
        assert(np.all(np.diff(f) <= 0))
        assert(f[-1] < f[0])
        assert(len(trace.step_sizes) == trace.iterations)
        assert(trace.termination in tuple(Termination))
        return

    def test_rcg_nearest_point(self):
        r"""Closest point on the circle to a unit-modulus target"""
        for seed in range(20):
            g = self.g(100 + seed)
            vs, v0 = utils.randphase(4, g), utils.randphase(4, g)

            def fn(v):
                return 0.5*torch.linalg.norm(v - vs).item()**2

            v, trace = rcg_minimize(CircleManifold(), fn, lambda v: v - vs,
                                    v0)
            assert(trace.termination == Termination.GradTol)
            assert(trace.iterations < 100)
            assert(trace.grad_norm_per_iter[-1] <= 1e-10)
            assert((v - vs).abs().max().item() <= 1e-9)
        return

    def test_riemannian_gradient(self):
        r"""Central differences along retraction curves match the projected
        gradient"""
        geo, h, L = CircleManifold(), 1e-6, 16
        for seed in range(10):
            g = self.g(200 + seed)
            A, c = utils.crandn((24, L), g), utils.crandn((24,), g)
            v = utils.randphase(L, g)
            ξ = geo.project(v, utils.crandn((L,), g))

            def fn(v):
                ρ = A @ v - c
                return 0.5*torch.vdot(ρ, ρ).real.item()

            rg = geo.project(v, A.mH @ (A @ v - c))
            fd = (fn(geo.retract(v, h*ξ)) - fn(geo.retract(v, -h*ξ)))/(2*h)
            assert(fd == pytest.approx(geo.inner(rg, ξ), rel=1e-5))
        return

    def test_rcg_factor(self):
        r"""A unit step on the identity Hessian lands on the minimizer"""
        g = self.g(3)
        B = utils.crandn((5, 2), g)
        Y0 = utils.crandn((5, 2), g)

        def fn(Y):
            return 0.5*torch.linalg.norm(Y - B).item()**2

        opts = RcgOptions(initial_step=torch.linalg.norm(Y0 - B).item())
        Y, trace = rcg_minimize(FactorManifold(), fn, lambda Y: Y - B, Y0,
                                opts)
        assert(trace.termination == Termination.GradTol)
        assert(trace.iterations == 1)
        assert(trace.step_sizes[0] == pytest.approx(1., rel=1e-12))
        assert(torch.allclose(Y, B, atol=1e-9))

        # already stationary
        Y, trace = rcg_minimize(FactorManifold(), fn, lambda Y: Y - B, B)
        assert(trace.iterations == 0 and Y is B)
        assert(trace.termination == Termination.GradTol)
        return


if __name__ == '__main__':
    tmp = Test_manifolds()
    tmp.test_circle()
    tmp.test_factor()
    tmp.test_options()
    tmp.test_rcg_circle()
    tmp.test_rcg_nearest_point()
    tmp.test_riemannian_gradient()
    tmp.test_rcg_factor()
