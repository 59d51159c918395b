r"""Run configuration: one JSON document, dataclass sections, dotted overrides.

A config file looks like::

    {"seed": 7,
     "network": {"K": 2, "Ns": 1, "Ms": 1, "ds": 1, "L": 4},
     "fading": {"beta_RT": Infinity},
     "pursuit": {"r_max": 3, "inner": {"max_iters": 100}},
     "sweep": {"variable": "RisElements", "values": [4, 8], "trials": 3}}

Absent keys take the defaults of the owning dataclass; unknown keys are
rejected with their dotted path.
"""
import dataclasses
import json
import logging
from dataclasses import dataclass, fields, is_dataclass
from typing import Any, Optional, Sequence, Tuple

from rispursuit.iaobjs import NetworkConfig
from rispursuit.manifolds import RcgOptions
from rispursuit.pursuit import PursuitOptions
from rispursuit.netsim import (LayoutSpec, FadingSpec, PowerSpec, SweepSpec,
                               SweepVariable, Scheme)

__all__ = ['ConfigError', 'SweepSection', 'RunConfig', 'load_config',
           'parse_override', 'apply_overrides']

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    r"""Malformed, unknown or out-of-range configuration entry"""


@dataclass(frozen=True)
class SweepSection:
    r"""The ``sweep`` section; the base settings come from the other
    sections"""
    variable: SweepVariable
    values: Tuple[float, ...]
    trials: int = 1
    schemes: Tuple[Scheme, ...] = (Scheme.Optimized, Scheme.RandomPhase,
                                   Scheme.NoRis)
    record_wall_time: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'variable', SweepVariable(self.variable))
        object.__setattr__(self, 'values',
                           tuple(float(x) for x in self.values))
        object.__setattr__(self, 'schemes',
                           tuple(Scheme(s) for s in self.schemes))


@dataclass(frozen=True)
class RunConfig:
    r"""Everything one ``solve``, ``sweep`` or ``verify`` run needs

    The top-level ``seed``, when given, overrides both ``layout.seed`` and
    ``pursuit.seed``.
    """
    network: NetworkConfig
    layout: LayoutSpec = LayoutSpec()
    fading: FadingSpec = FadingSpec()
    power: PowerSpec = PowerSpec()
    pursuit: PursuitOptions = PursuitOptions()
    sweep: Optional[SweepSection] = None

    @property
    def seed(self) -> int:
        return self.layout.seed

    def sweep_spec(self) -> SweepSpec:
        if self.sweep is None:
            raise ConfigError('sweep: section missing')
        sw = self.sweep
        try:
            return SweepSpec(sw.variable, sw.values, self.network,
                             trials=sw.trials, layout=self.layout,
                             fading=self.fading, power=self.power,
                             pursuit=self.pursuit, schemes=sw.schemes,
                             record_wall_time=sw.record_wall_time)
        except ValueError as e:
            raise ConfigError(f'sweep: {e}') from e

    def asdict(self) -> dict:
        r"""JSON-ready nested dict, loadable by :func:`RunConfig.from_dict`
        """
        return json.loads(json.dumps(dataclasses.asdict(self)))

    @classmethod
    def from_dict(cls, d: dict) -> 'RunConfig':
        d = dict(_expect_dict(d, '<root>'))
        seed = d.pop('seed', None)
        if seed is not None:
            seed = _coerce(int, seed, 'seed')
            for k in ('layout', 'pursuit'):
                sec = dict(_expect_dict(d.get(k, {}), k))
                sec['seed'] = seed
                d[k] = sec
        if 'network' not in d:
            raise ConfigError('network: section missing')
        return _build(cls, d, '')


def _expect_dict(d: Any, path: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(f'{path}: expected an object, got '
                          f'{type(d).__name__}')
    return d


def _coerce(typ: type, value: Any, path: str) -> Any:
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f'{path}: expected true/false, got {value!r}')
    elif typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f'{path}: expected an integer, got {value!r}')
    elif typ is float:
        if isinstance(value, bool):
            raise ConfigError(f'{path}: expected a number, got {value!r}')
        try:
            value = float(value)  # also takes "inf"
        except (TypeError, ValueError):
            raise ConfigError(f'{path}: expected a number, got {value!r}') \
                from None
    return value


def _build(cls: type, d: dict, prefix: str):
    d = _expect_dict(d, prefix.rstrip('.') or '<root>')
    known = {f.name: f for f in fields(cls)}
    for k in d:
        if k not in known:
            raise ConfigError(f'{prefix}{k}: unknown key')
    kw = {}
    for k, v in d.items():
        typ, path = known[k].type, prefix + k
        sub = _section_type(typ)
        if sub is not None and v is not None:
            kw[k] = _build(sub, v, path + '.')
        else:
            kw[k] = _coerce(typ, v, path)
    try:
        return cls(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        where = prefix.rstrip('.') or cls.__name__
        raise ConfigError(f'{where}: {e}') from e


def _section_type(typ: Any) -> Optional[type]:
    if is_dataclass(typ):
        return typ
    for a in getattr(typ, '__args__', ()):  # Optional[...]
        if is_dataclass(a):
            return a
    return None


def parse_override(item: str) -> Tuple[Tuple[str, ...], Any]:
    r"""Split ``a.b.c=VALUE``; VALUE is a JSON literal or else a bare string

    Usage:
        ``keys, value = parse_override('pursuit.inner.max_iters=50')``
    """
    key, sep, raw = item.partition('=')
    if not sep or not key.strip():
        raise ConfigError(f'override {item!r}: expected KEY=VALUE')
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return tuple(key.strip().split('.')), value


def apply_overrides(d: dict, overrides: Sequence[str]) -> dict:
    r"""Apply dotted overrides to a raw config dict, in order, in place"""
    for item in overrides:
        keys, value = parse_override(item)
        node = d
        for k in keys[:-1]:
            nxt = node.setdefault(k, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f'override {item!r}: {k} is not a section')
            node = nxt
        node[keys[-1]] = value
        logger.debug('override %s = %r', '.'.join(keys), value)
    return d


def load_config(path: str, overrides: Sequence[str] = ()) -> RunConfig:
    r"""Read, override and validate a JSON run configuration

    Usage:
        ``cfg = load_config(path, overrides)``
    Inputs:
        - ``path``: JSON file.
        - ``overrides``: ``KEY=VALUE`` strings, dotted keys.
    Outputs:
        - ``cfg``: RunConfig.

    Raises ``OSError`` if ``path`` cannot be read and ConfigError for
    anything wrong with its content.
    """
    with open(path, encoding='utf-8') as f:
        text = f.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f'{path}: line {e.lineno}, column {e.colno}: '
                          f'{e.msg}') from None
    d = apply_overrides(_expect_dict(d, '<root>'), overrides)
    return RunConfig.from_dict(d)
