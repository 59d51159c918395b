r"""Command line front end: ``rispursuit {solve,sweep,verify}``

Exit status is 0 for a feasible solution or passed verification, 2 for an
infeasible solution or failed verification, 1 for any error.
"""
import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from typing import List, Optional, Sequence

from rispursuit import utils, netsim
from rispursuit.version import __version__
from rispursuit.config import ConfigError, RunConfig, load_config
from rispursuit.iaobjs import PhaseVector
from rispursuit.netsim import ExperimentRecord
from rispursuit.pursuit import (AlignmentSolution, riemannian_pursuit,
                                verify_alignment)

__all__ = ['main', 'build_parser', 'cmd_solve', 'cmd_sweep', 'cmd_verify',
           'solution_asdict', 'records_to_csv', 'records_asdicts',
           'CSV_FIELDS', 'EXIT_OK', 'EXIT_ERROR', 'EXIT_INFEASIBLE']

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2

CSV_FIELDS = ('variable', 'value', 'scheme', 'trial', 'rank', 'dof',
              'residual', 'sum_rate_bps_hz', 'wall_ms')

# config sections that determine the channels
_CHANNEL_SECTIONS = ('network', 'layout', 'fading', 'power')


def write_atomic(path: str, text: str):
    r"""Write ``text`` to a temporary file next to ``path``, then rename"""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix='.' + os.path.basename(path))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _overrides(args: argparse.Namespace) -> List[str]:
    ovr = list(args.set or [])
    if args.seed is not None:
        ovr.append(f'seed={args.seed}')
    return ovr


def _sample(rc: RunConfig):
    return netsim.sample_channels(rc.network, rc.layout, rc.fading,
                                  power=rc.power)


def solution_asdict(rc: RunConfig, sol: AlignmentSolution) -> dict:
    r"""JSON-ready solution artifact; complex arrays as (real, imag) pairs
    """
    return {
        'version': __version__,
        'config': rc.asdict(),
        'feasible': sol.feasible,
        'rank': sol.r,
        'residual': sol.residual,
        'dof': sol.dof,
        'scale': sol.scale,
        'v': None if sol.v is None else utils.c2pairs(sol.v.v),
        'U': [utils.c2pairs(U) for U in sol.U],
        'V': [utils.c2pairs(V) for V in sol.V],
        'trace': sol.trace,
    }


def _cell(x) -> str:
    return '' if x is None else str(x)


def records_asdicts(records: Sequence[ExperimentRecord]) -> List[dict]:
    return [{k: getattr(rec, k) for k in CSV_FIELDS} for rec in records]


def records_to_csv(records: Sequence[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator='\n')
    w.writerow(CSV_FIELDS)
    for row in records_asdicts(records):
        w.writerow([_cell(row[k]) for k in CSV_FIELDS])
    return buf.getvalue()


def _outdir(args: argparse.Namespace) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_solve(args: argparse.Namespace) -> int:
    rc = load_config(args.config, _overrides(args))
    netsim.warn_if_improper(rc.network)
    ch = _sample(rc)
    sol = riemannian_pursuit(ch, rc.pursuit)

    path = os.path.join(_outdir(args), 'solution.json')
    write_atomic(path, json.dumps(solution_asdict(rc, sol), indent=1) + '\n')

    print(f'feasible: {"yes" if sol.feasible else "no"}')
    if sol.feasible:
        print(f'channel uses r = {sol.r}, dof = {sol.dof}')
    else:
        print(f'no alignment up to r = {rc.pursuit.r_max} '
              f'(best at r = {sol.r})')
    print(f'residual f0 = {sol.residual:.6e}')
    print(f'wrote {path}')
    return EXIT_OK if sol.feasible else EXIT_INFEASIBLE


def cmd_sweep(args: argparse.Namespace) -> int:
    rc = load_config(args.config, _overrides(args))
    spec = rc.sweep_spec()
    netsim.warn_if_improper(rc.network)
    records = netsim.run_sweep(spec, threads=args.threads)

    out = _outdir(args)
    write_atomic(os.path.join(out, 'sweep.csv'), records_to_csv(records))
    write_atomic(os.path.join(out, 'sweep.json'),
                 json.dumps(records_asdicts(records), indent=1) + '\n')

    for row in netsim.summarize(records):
        rate = row['mean_sum_rate']
        print(f'{spec.variable.value} = {row["value"]:g}  '
              f'{row["scheme"]:<12s} mean dof {row["mean_dof"]:.4f}  '
              f'feasible {row["feasible_fraction"]:.2f}  mean rate '
              + ('-' if rate is None else f'{rate:.4f}'))
    print(f'wrote {len(records)} records to {out}')
    return EXIT_OK


def _load_solution(path: str, rc: RunConfig):
    with open(path, encoding='utf-8') as f:
        d = json.load(f)
    mine = rc.asdict()
    for k in _CHANNEL_SECTIONS:
        if d['config'][k] != mine[k]:
            raise ConfigError(f'{path}: {k} section differs from the config')
    if d['config']['pursuit']['seed'] != mine['pursuit']['seed']:
        raise ConfigError(f'{path}: seed differs from the config')

    cfg, r = rc.network, int(d['rank'])
    U = [utils.pairs2c(x) for x in d['U']]
    V = [utils.pairs2c(x) for x in d['V']]
    if len(U) != cfg.K or len(V) != cfg.K:
        raise ValueError(f'{path}: expected {cfg.K} decoders and precoders')
    for i in range(cfg.K):
        if tuple(U[i].shape) != (cfg.Ms[i]*r, cfg.ds[i]):
            raise ValueError(f'{path}: U[{i}] has shape {tuple(U[i].shape)}')
        if tuple(V[i].shape) != (cfg.Ns[i]*r, cfg.ds[i]):
            raise ValueError(f'{path}: V[{i}] has shape {tuple(V[i].shape)}')
    if cfg.L == 0:
        v = None
    else:
        if d['v'] is None:
            raise ValueError(f'{path}: phase vector missing')
        v = PhaseVector(utils.pairs2c(d['v']))
        if v.L != cfg.L:
            raise ValueError(f'{path}: v has {v.L} elements, expected '
                             f'{cfg.L}')
    return v, U, V


def cmd_verify(args: argparse.Namespace) -> int:
    rc = load_config(args.config, _overrides(args))
    sol_path = args.solution or os.path.join(args.out, 'solution.json')
    try:
        v, U, V = _load_solution(sol_path, rc)
    except (KeyError, TypeError) as e:
        raise ValueError(f'{sol_path}: malformed solution ({e!r})') from e

    tol = 10*(2*rc.pursuit.outer_tol)**0.5
    rep = verify_alignment(_sample(rc), v, U, V, tol)
    print(f'max interference leakage: {rep.max_interference_leakage:.6e}')
    print(f'max identity deviation:   {rep.max_identity_deviation:.6e}')
    print(f'tolerance: {tol:.6e}, {"pass" if rep.passed else "FAIL"}')
    return EXIT_OK if rep.passed else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', required=True, metavar='PATH',
                        help='JSON run configuration')
    common.add_argument('--seed', type=int, default=None,
                        help='seeds both the channel draw and the pursuit')
    common.add_argument('--out', default='.', metavar='DIR',
                        help='output directory')
    common.add_argument('--set', action='append', default=[],
                        metavar='KEY=VALUE',
                        help='dotted-path override, e.g. pursuit.r_max=3')
    common.add_argument('--threads', type=int, default=1,
                        help='sweep worker threads')
    common.add_argument('-v', '--verbose', action='count', default=0)

    ap = argparse.ArgumentParser(
        prog='rispursuit',
        description='RIS-assisted interference alignment by Riemannian '
                    'pursuit')
    ap.add_argument('--version', action='version', version=__version__)
    sub = ap.add_subparsers(dest='command', required=True)
    sub.add_parser('solve', parents=[common],
                   help='detect the minimal channel uses of one network')
    sub.add_parser('sweep', parents=[common],
                   help='Monte-Carlo sweep, CSV and JSON records')
    p = sub.add_parser('verify', parents=[common],
                       help='check a solution file against its channels')
    p.add_argument('--solution', default=None, metavar='PATH',
                   help='solution file, defaults to OUT/solution.json')
    return ap


_COMMANDS = {'solve': cmd_solve, 'sweep': cmd_sweep, 'verify': cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose,
                                                      logging.DEBUG)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, OSError, ValueError) as e:
        print(f'rispursuit: error: {e}', file=sys.stderr)
        return EXIT_ERROR
