import json

import pytest

from rispursuit import inf
from rispursuit.config import (ConfigError, RunConfig, load_config,
                               parse_override)
from rispursuit.netsim import LosModel, SweepVariable


def write(tmp_path, obj, name='cfg.json'):
    p = tmp_path/name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


class Test_config:

    base = {'network': {'K': 2, 'Ns': 1, 'Ms': [1, 1], 'ds': 1, 'L': 4}}

    def test_defaults(self, tmp_path):
        rc = load_config(write(tmp_path, self.base))
        assert(rc.network.Ms == (1, 1) and rc.network.L == 4)
        assert(rc.fading.beta_RT == 10. and rc.power.snr_db == 120.)
        assert(rc.pursuit.outer_tol == 1e-4 and rc.pursuit.inner.grad_tol
               == 1e-10)
        assert(rc.sweep is None and rc.seed == 0)
        with pytest.raises(ConfigError, match='sweep'):
            rc.sweep_spec()
        return

    def test_sections(self, tmp_path):
        d = {**self.base, 'seed': 7,
             'fading': {'beta_RT': 'inf', 'los_model': 'AllOnes'},
             'layout': {'ris_position': [10, 10]},
             'pursuit': {'r_max': 3, 'inner': {'max_iters': 50}},
             'sweep': {'variable': 'Snr', 'values': [100, 110], 'trials': 2}}
        rc = load_config(write(tmp_path, d))
        assert(rc.layout.seed == 7 and rc.pursuit.seed == 7)
        assert(rc.fading.beta_RT == inf)
        assert(rc.fading.los_model is LosModel.AllOnes)
        assert(rc.layout.ris_position == (10., 10.))
        assert(rc.pursuit.inner.max_iters == 50)
        spec = rc.sweep_spec()
        assert(spec.variable is SweepVariable.Snr and spec.trials == 2)
        assert(spec.network == rc.network and spec.pursuit == rc.pursuit)

        assert(RunConfig.from_dict(rc.asdict()) == rc)
        return

    def test_overrides(self, tmp_path):
        assert(parse_override('pursuit.r_max=3') == (('pursuit', 'r_max'), 3))
        assert(parse_override('fading.los_model=AllOnes') ==
               (('fading', 'los_model'), 'AllOnes'))
        assert(parse_override('fading.beta_RT=Infinity')[1] == inf)
        with pytest.raises(ConfigError):
            parse_override('pursuit.r_max')

        p = write(tmp_path, self.base)
        rc = load_config(p, ['network.L=0', 'pursuit.inner.max_iters=9',
                             'seed=3'])
        assert(rc.network.L == 0 and rc.pursuit.inner.max_iters == 9)
        assert(rc.seed == 3 and rc.pursuit.seed == 3)
        return

    def test_errors(self, tmp_path):
        p = write(tmp_path, '{"network": {"K": 2,\n "Ns": }}')
        with pytest.raises(ConfigError, match='line 2'):
            load_config(p)

        p = write(tmp_path, self.base)
        with pytest.raises(ConfigError, match='pursuit.inner.foo'):
            load_config(p, ['pursuit.inner.foo=1'])
        with pytest.raises(ConfigError, match='bogus'):
            load_config(p, ['bogus=1'])
        with pytest.raises(ConfigError, match='network.K'):
            load_config(p, ['network.K="two"'])
        with pytest.raises(ConfigError, match='r_max'):
            load_config(p, ['pursuit.r_max=0'])
        with pytest.raises(ConfigError, match='network'):
            load_config(p, ['network.ds=2'])
        with pytest.raises(ConfigError, match='network: section missing'):
            load_config(write(tmp_path, {'seed': 1}))
        with pytest.raises(OSError):
            load_config(str(tmp_path/'missing.json'))
        return
