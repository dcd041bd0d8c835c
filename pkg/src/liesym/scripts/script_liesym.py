#!/usr/bin/env python3

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import matplotlib
import matplotlib.pyplot as plt

from liesym.config import (RunConfig, load_config_values, parse_assignments,
                           parse_range)
from liesym.errors import LiesymError
from liesym.experiments import (BENCHMARKS, convergence_sweep, discover,
                                get_benchmark)
from liesym.invariance import NullityPolicy
from liesym.pointcloud import (family_spec, load_csv, sample_system,
                               save_csv)
from liesym.prolong import prolongate
from liesym.systems import load_system

logger = logging.getLogger('liesym')

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_SYMMETRY = 2


class LiesymArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with EXIT_ERROR; status 2 means no symmetry."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f'{self.prog}: error: {message}\n')


def _add_common(parser):
    parser.add_argument('-c', '--config',
                        help='Read parameters from a key = value config file.',
                        type=str, default=None)
    parser.add_argument('-o', '--output',
                        help='Output file (directory for discover).',
                        type=str, default=None)
    parser.add_argument('--seed', help='Seed of all random draws.',
                        type=int, default=None)
    parser.add_argument('--threads',
                        help='Worker threads (default: $LIESYM_THREADS or '
                             'the number of cores).',
                        type=int, default=None)
    parser.add_argument('--save-config',
                        help='Write the resolved parameters to this file.',
                        type=str, default=None)
    parser.add_argument('-v', '--verbose',
                        help='Print properties and progress in the terminal.',
                        action='store_true')


def _add_sampling(parser):
    parser.add_argument('-s', '--system', help='Solution family to sample.',
                        type=str, default=None)
    parser.add_argument('--n', help='Samples per sampled axis.',
                        type=int, default=None)
    parser.add_argument('--counts', help='Samples per axis, e.g. t=160,x=160.',
                        type=str, default=None)
    parser.add_argument('--ranges', help='Axis ranges, e.g. x=-1:1,C=1:2.',
                        type=str, default=None)
    parser.add_argument('--fixed', help='Fixed constants, e.g. C1=0,C2=1.',
                        type=str, default=None)
    parser.add_argument('--fix-c', help='Fix every integration constant at '
                        'this value.', type=float, default=None)
    parser.add_argument('--mode', help='grid or iid sampling.',
                        choices=['grid', 'iid'], default=None)


def _add_gmls(parser):
    parser.add_argument('-p', '--order', help='Prolongation order.',
                        type=int, default=None)
    parser.add_argument('-k', '--k', help='Stencil size of the prolongation.',
                        type=int, default=None)
    parser.add_argument('-l', '--degree', help='GMLS chart degree.',
                        type=int, default=None)
    parser.add_argument('--stop-tol', help='GMLS stopping tolerance.',
                        type=float, default=None)
    parser.add_argument('--max-iter', help='GMLS iteration cap.',
                        type=int, default=None)
    parser.add_argument('--cond-threshold',
                        help='Condition number above which a point is dropped.',
                        type=float, default=None)
    parser.add_argument('--chart-cond',
                        help='Condition number of the scaled chart matrix '
                             'above which a stencil is dropped.',
                        type=float, default=None)
    parser.add_argument('--max-degenerate-fraction',
                        help='Fail above this fraction of dropped points.',
                        type=float, default=None)


def _add_discovery(parser):
    parser.add_argument('--normal-k', help='Stencil size of the normal stage.',
                        type=int, default=None)
    parser.add_argument('--normal-degree', help='Chart degree of the normal '
                        'stage.', type=int, default=None)
    parser.add_argument('--ansatz-degree', help='Degree of the ansatz.',
                        type=int, default=None)
    parser.add_argument('--include-constants',
                        help='Let free constants enter the ansatz.',
                        action='store_true', default=None)
    parser.add_argument('--policy', help="threshold, gap or fixed:<r>.",
                        type=str, default=None)
    parser.add_argument('--threshold', help='Relative nullity threshold.',
                        type=float, default=None)
    parser.add_argument('--method', help='Nullspace method.',
                        choices=['auto', 'gram', 'svd'], default=None)
    parser.add_argument('--normalize', help='Column-normalise point blocks.',
                        action='store_true', default=None)


def parse_args(argv=None):
    parser = LiesymArgumentParser(
        prog='liesym',
        description=('Discover Lie point symmetries of differential equations '
                     'from samples of their solutions.'))
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen', help='Sample a closed-form solution family.')
    _add_common(gen)
    _add_sampling(gen)

    prolong = sub.add_parser('prolong', help='Lift a point cloud into jet space.')
    _add_common(prolong)
    prolong.add_argument('-i', '--input', help='Point cloud CSV.',
                         type=str, default=None)
    _add_gmls(prolong)

    disc = sub.add_parser('discover', help='Find the symmetries of a cloud.')
    _add_common(disc)
    disc.add_argument('-i', '--input', help='Point cloud CSV, at level 0 or p.',
                      type=str, default=None)
    disc.add_argument('-b', '--benchmark', help='Use the benchmark parameters.',
                      choices=BENCHMARKS, default=None)
    _add_sampling(disc)
    _add_gmls(disc)
    _add_discovery(disc)
    disc.add_argument('--plot', help='Save spectrum and nullspace figures.',
                      action='store_true')

    conv = sub.add_parser('converge', help='Run a convergence study.')
    _add_common(conv)
    conv.add_argument('-b', '--benchmark', help='Benchmark to study.',
                      choices=BENCHMARKS, required=True)
    conv.add_argument('--full', help='Use the full-scale parameters.',
                      action='store_true', default=None)
    conv.add_argument('--trials', help='Trials per size.', type=int,
                      default=None)
    conv.add_argument('--sizes', help='Sizes, e.g. 56;80 or 16x12x10;24x18x15.',
                      type=str, default=None)
    conv.add_argument('--record-runtime', help='Report wall-clock runtimes.',
                      action='store_true', default=None)
    conv.add_argument('--plot', help='Save the convergence figure.',
                      action='store_true')
    args = parser.parse_args(argv)
    if args.command == 'gen' and args.system is None and args.config is None:
        parser.error('gen needs a --system (or a --config naming one).')
    return args


def build_config(args) -> RunConfig:
    """Benchmark defaults, then the config file, then the flags."""
    values = vars(args)
    loaded = load_config_values(values['config']) if values.get('config') else {}
    name = values.get('benchmark') or loaded.get('benchmark')
    full = bool(values.get('full')) or bool(loaded.get('full'))
    config = RunConfig.for_benchmark(name, full=full) if name else RunConfig()
    # every key written in the file wins, even when it equals a default
    config = replace(config, **loaded)
    counts = values.get('counts')
    fixed = values.get('fixed')
    system = values.get('system') or config.system
    if values.get('n') is not None:
        if system is None:
            raise ValueError('--n needs a --system.')
        des = load_system(system)
        fixed_axes = set(parse_assignments(fixed or config.fixed))
        if values.get('fix_c') is not None:
            fixed_axes |= set(des.constants)
        counts = ','.join(f'{a}={values["n"]}' for a in des.axes
                          if a not in fixed_axes)
    if values.get('fix_c') is not None:
        if system is None:
            raise ValueError('--fix-c needs a --system.')
        fixed = ','.join(f'{c}={values["fix_c"]!r}'
                         for c in load_system(system).constants)
    return config.update(
        system=values.get('system'), benchmark=values.get('benchmark'),
        input=values.get('input'),
        output=values.get('output'), counts=counts, fixed=fixed,
        ranges=values.get('ranges'), mode=values.get('mode'),
        seed=values.get('seed'), p=values.get('order'), k=values.get('k'),
        degree=values.get('degree'), normal_k=values.get('normal_k'),
        normal_degree=values.get('normal_degree'),
        stop_tol=values.get('stop_tol'), max_iter=values.get('max_iter'),
        cond_threshold=values.get('cond_threshold'),
        chart_cond=values.get('chart_cond'),
        max_degenerate_fraction=values.get('max_degenerate_fraction'),
        ansatz_degree=values.get('ansatz_degree'),
        include_constants=values.get('include_constants'),
        policy=values.get('policy'), threshold=values.get('threshold'),
        method=values.get('method'), normalize=values.get('normalize'),
        trials=values.get('trials'), sizes=values.get('sizes'),
        threads=values.get('threads'), full=values.get('full'),
        record_runtime=values.get('record_runtime'))


def spec_from_config(config: RunConfig):
    if not config.system:
        raise ValueError('No solution family given: use --system.')
    ranges = {a: parse_range(r) for a, r in
              parse_assignments(config.ranges, str).items()}
    return family_spec(config.system, ranges=ranges,
                       counts=parse_assignments(config.counts, int),
                       fixed=parse_assignments(config.fixed, float),
                       seed=config.seed, mode=config.mode)


def cmd_gen(config: RunConfig, verbose: bool = False) -> int:
    cloud = sample_system(spec_from_config(config))
    output = config.output or f'{load_system(config.system).name}.csv'
    save_csv(cloud, output)
    if verbose:
        cloud.print_properties()
    print(f'Wrote {cloud.n_points} rows x {cloud.dim} columns to {output}.')
    return EXIT_OK


def cmd_prolong(config: RunConfig, verbose: bool = False) -> int:
    if not config.input:
        raise ValueError('prolong needs an --input point cloud.')
    cloud = load_csv(config.input)
    lifted = prolongate(cloud, config.p, config.prolong_params(),
                        workers=config.resolved_threads(),
                        cond_threshold=config.cond_threshold,
                        max_degenerate_fraction=config.max_degenerate_fraction)
    output = Path(config.output or
                  Path(config.input).with_name(
                      f'{Path(config.input).stem}_p{config.p}.csv'))
    save_csv(lifted.cloud, output)
    sidecar = output.with_name(f'{output.stem}.diagnostics.csv')
    lifted.diagnostics.to_csv(sidecar, index=False, float_format='%.10g',
                              lineterminator='\n')
    if verbose:
        lifted.cloud.print_properties()
    print(f'Wrote level-{lifted.cloud.level} cloud ({lifted.cloud.n_points} '
          f'rows, {lifted.n_dropped} dropped) to {output}.')
    return EXIT_OK


def make_plot(report, output_dir: Path):
    fig, ax = plt.subplots(1, 1)
    fig, ax = report.plot_spectrum(figax=(fig, ax))
    fig.savefig(output_dir / 'spectrum.png')
    plt.close(fig)
    fig, ax = plt.subplots(1, 1)
    fig, ax = report.plot_nullspace(figax=(fig, ax))
    fig.savefig(output_dir / 'nullspace.png')
    plt.close(fig)


def make_output(report, generators, output_dir: Path):
    output_dir.mkdir(parents=True, exist_ok=True)
    report.to_csv(output_dir / 'spectrum.csv')
    (output_dir / 'generators.txt').write_text(
        ''.join(f'{g}\n' for g in generators))


def cmd_discover(config: RunConfig, verbose: bool = False,
                 plot: bool = False) -> int:
    if config.input:
        cloud = load_csv(config.input)
    elif config.system:
        cloud = sample_system(spec_from_config(config))
    else:
        raise ValueError('discover needs an --input point cloud or a --system.')
    if cloud.n_points == 0:
        raise ValueError('The point cloud is empty.')
    if cloud.level > config.p:
        raise ValueError(f'The cloud is at level {cloud.level}, above the '
                         f'requested order p={config.p}.')
    policy = NullityPolicy.from_string(config.policy, config.threshold)
    report, basis, _ = discover(
        cloud, config.p, config.prolong_params(), config.normal_params(),
        degree=config.ansatz_degree,
        include_constants=config.include_constants, policy=policy,
        workers=config.resolved_threads(), normalize=config.normalize,
        method=config.method, cond_threshold=config.cond_threshold,
        max_degenerate_fraction=config.max_degenerate_fraction)
    generators = report.render(basis, names=cloud.names)
    output_dir = Path(config.output or '.')
    make_output(report, generators, output_dir)
    if plot:
        make_plot(report, output_dir)
    if verbose:
        report.print_properties()
    for generator in generators:
        print(generator)
    if report.nullity == 0:
        print('No symmetry found in the ansatz.')
        return EXIT_NO_SYMMETRY
    return EXIT_OK


def _parse_sizes(text: str):
    sizes = []
    for token in filter(None, (t.strip() for t in text.split(';'))):
        parts = [int(v) for v in token.split('x')]
        sizes.append(parts[0] if len(parts) == 1 else tuple(parts))
    return sizes


def cmd_converge(config: RunConfig, verbose: bool = False,
                 plot: bool = False) -> int:
    bench = get_benchmark(config.benchmark, full=config.full)
    bench = replace(bench, prolong_params=config.prolong_params(),
                    normal_params=config.normal_params(), p=config.p,
                    degree=config.ansatz_degree,
                    include_constants=config.include_constants,
                    policy=NullityPolicy.from_string(config.policy,
                                                     config.threshold),
                    max_degenerate_fraction=config.max_degenerate_fraction)
    sizes = _parse_sizes(config.sizes) if config.sizes else None
    if verbose:
        bench.print_properties()
    sweep = convergence_sweep(bench, sizes=sizes, trials=config.trials,
                              seed=config.seed, threads=config.resolved_threads(),
                              record_runtime=config.record_runtime)
    output = Path(config.output or 'convergence.csv')
    sweep.to_csv(output)
    if plot:
        fig, ax = plt.subplots(1, 1)
        fig, ax = sweep.plot(figax=(fig, ax))
        fig.savefig(output.with_suffix('.png'))
        plt.close(fig)
    if verbose:
        print(sweep.get_dataframe().to_string(index=False))
        print(f'Fitted log-log slope: {sweep.slope:.3f}')
    print(f'Wrote {len(sweep.rows)} rows to {output}.')
    return EXIT_OK


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    if getattr(args, 'plot', False):
        matplotlib.use('Agg')
    try:
        config = build_config(args)
        if args.save_config:
            config.save(args.save_config)
        if args.command == 'gen':
            return cmd_gen(config, args.verbose)
        if args.command == 'prolong':
            return cmd_prolong(config, args.verbose)
        if args.command == 'discover':
            return cmd_discover(config, args.verbose, args.plot)
        return cmd_converge(config, args.verbose, args.plot)
    except (LiesymError, ValueError, OSError) as err:
        print(f'liesym: error: {err}', file=sys.stderr)
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
