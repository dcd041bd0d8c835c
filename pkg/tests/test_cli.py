import pandas as pd
import pytest

from liesym.config import RunConfig
from liesym.pointcloud import load_csv
from liesym.scripts.script_liesym import (EXIT_ERROR, EXIT_OK, build_config,
                                          main, parse_args)


def _gen(path, n=200):
    return main(['gen', '-s', 'linear_ode', '--fix-c', '1', '--n', str(n),
                 '--ranges', 'x=-2:1', '-o', str(path)])


def test_gen(tmp_path, capsys):
    assert _gen(tmp_path / 'cloud.csv', n=50) == 0
    cloud = load_csv(tmp_path / 'cloud.csv')
    assert cloud.n_points == 50
    assert cloud.d == 1 and cloud.level == 0
    assert 'Wrote 50 rows' in capsys.readouterr().out


def test_gen_is_reproducible(tmp_path):
    _gen(tmp_path / 'a.csv')
    _gen(tmp_path / 'b.csv')
    assert (tmp_path / 'a.csv').read_bytes() == (tmp_path / 'b.csv').read_bytes()


def test_gen_without_system(tmp_path, capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(['gen', '-o', str(tmp_path / 'x.csv')])
    assert excinfo.value.code == EXIT_ERROR
    assert 'needs a --system' in capsys.readouterr().err
    assert not (tmp_path / 'x.csv').exists()


def test_prolong(tmp_path):
    _gen(tmp_path / 'cloud.csv')
    assert main(['prolong', '-i', str(tmp_path / 'cloud.csv'), '-p', '1',
                 '-k', '10', '-l', '3', '--threads', '1']) == 0
    lifted = load_csv(tmp_path / 'cloud_p1.csv')
    assert lifted.level == 1
    assert lifted.column_names == ['x', 'u', 'u_x']
    diagnostics = pd.read_csv(tmp_path / 'cloud_p1.diagnostics.csv')
    assert len(diagnostics) == lifted.n_points

    assert main(['prolong', '-i', str(tmp_path / 'cloud.csv'), '-p', '0']) == 0
    assert load_csv(tmp_path / 'cloud_p0.csv').level == 0
    # a level-1 file cannot be lowered
    assert main(['prolong', '-i', str(tmp_path / 'cloud_p1.csv'),
                 '-p', '0']) == 1


def test_prolong_needs_input():
    assert main(['prolong', '-p', '1']) == 1


def test_discover_curve(tmp_path, capsys):
    out = tmp_path / 'run'
    code = main(['discover', '-s', 'linear_ode', '--fix-c', '1', '--n', '400',
                 '--ranges', 'x=-2:1', '-p', '1', '-k', '10', '-l', '3',
                 '--policy', 'fixed:1', '--threads', '1', '-o', str(out),
                 '--plot'])
    assert code == 0
    generators = (out / 'generators.txt').read_text().splitlines()
    assert len(generators) == 1
    assert '∂x' in generators[0] and 'u ∂u' in generators[0]
    spectrum = pd.read_csv(out / 'spectrum.csv')
    assert len(spectrum) == 6
    assert spectrum['in_nullspace'].sum() == 1
    assert (out / 'spectrum.png').exists() and (out / 'nullspace.png').exists()
    assert generators[0] in capsys.readouterr().out


def test_discover_from_file(tmp_path):
    _gen(tmp_path / 'cloud.csv', n=400)
    main(['prolong', '-i', str(tmp_path / 'cloud.csv'), '-p', '1', '-k', '10',
          '-l', '3', '--threads', '1'])
    out = tmp_path / 'run'
    assert main(['discover', '-i', str(tmp_path / 'cloud_p1.csv'), '-p', '1',
                 '-k', '10', '-l', '3', '--policy', 'fixed:1',
                 '--threads', '1', '-o', str(out)]) == 0
    assert (out / 'generators.txt').exists()
    # level above the requested order
    assert main(['discover', '-i', str(tmp_path / 'cloud_p1.csv'), '-p', '0',
                 '-o', str(out)]) == 1


def test_discover_without_symmetry(tmp_path, capsys):
    code = main(['discover', '-s', 'linear_ode', '--fix-c', '1', '--n', '200',
                 '-k', '10', '-l', '3', '--policy', 'fixed:0',
                 '--threads', '1', '-o', str(tmp_path)])
    assert code == 2
    assert 'No symmetry found' in capsys.readouterr().out
    assert (tmp_path / 'generators.txt').read_text() == ''


def test_converge(tmp_path):
    output = tmp_path / 'convergence.csv'
    assert main(['converge', '-b', 'linear_ode_fixed', '--sizes', '80;160',
                 '--trials', '2', '--threads', '1', '-o', str(output)]) == 0
    df = pd.read_csv(output)
    assert list(df['n_points']) == [80, 160]
    assert list(df['trials']) == [2, 2]
    assert df['runtime_s'].isna().all()


def test_usage_errors_exit_with_error_status(capsys):
    # status 2 is reserved for "no symmetry found"
    with pytest.raises(SystemExit) as excinfo:
        main(['converge', '-b', 'kdv'])
    assert excinfo.value.code == EXIT_ERROR
    assert 'invalid choice' in capsys.readouterr().err
    with pytest.raises(SystemExit) as excinfo:
        main(['discover', '-k', 'many'])
    assert excinfo.value.code == EXIT_ERROR
    with pytest.raises(SystemExit) as excinfo:
        main(['--help'])
    assert excinfo.value.code == EXIT_OK


def test_config_precedence(tmp_path):
    path = tmp_path / 'run.cfg'
    path.write_text('benchmark = heat\nk = 50\nseed = 7\n')
    config = build_config(parse_args(['discover', '-c', str(path), '-k', '45']))
    assert config.system == 'heat' and config.p == 2
    assert config.k == 45 and config.seed == 7
    assert config.degree == 4


def test_config_values_equal_to_defaults_are_kept(tmp_path):
    path = tmp_path / 'run.cfg'
    path.write_text(f'benchmark = heat\nk = {RunConfig().k}\np = {RunConfig().p}\n')
    config = build_config(parse_args(['discover', '-c', str(path)]))
    assert config.system == 'heat'
    assert config.k == RunConfig().k and config.p == RunConfig().p
    assert config.normal_k == RunConfig.for_benchmark('heat').normal_k


def test_gen_from_config_only(tmp_path):
    path = tmp_path / 'gen.cfg'
    path.write_text('system = transport\ncounts = t=8,x=8\n')
    assert main(['gen', '-c', str(path), '-o', str(tmp_path / 't.csv')]) == 0
    assert load_csv(tmp_path / 't.csv').n_points == 64


def test_save_config(tmp_path):
    path = tmp_path / 'saved.cfg'
    assert main(['gen', '-s', 'transport', '--n', '10', '--seed', '5',
                 '-o', str(tmp_path / 't.csv'), '--save-config', str(path)]) == 0
    saved = RunConfig.load(path)
    assert saved.system == 'transport' and saved.seed == 5
    assert saved.counts == 't=10,x=10'
    reloaded = build_config(parse_args(['gen', '-c', str(path)]))
    assert reloaded == saved
