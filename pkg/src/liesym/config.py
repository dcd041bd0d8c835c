"""Run configuration of the command line tools.

Configs are flat `key = value` text files with `#` comments:

    # liesym run
    system = heat
    counts = t=160,x=160
    p = 2
    k = 40
    degree = 4

Values are parsed according to the type of the field they set.
"""

import os
import typing
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Dict, Optional

from liesym.tangent import GmlsParams

THREADS_ENV = 'LIESYM_THREADS'


@dataclass
class RunConfig:
    """Parameters of every liesym command.

    Mapping-valued parameters (counts, fixed, ranges) are stored as text
    like `t=160,x=160` or `x=-1:1` and parsed with `parse_assignments`.
    """
    system: Optional[str] = None
    benchmark: Optional[str] = None
    full: bool = False
    input: Optional[str] = None
    output: Optional[str] = None
    counts: str = ''
    fixed: str = ''
    ranges: str = ''
    mode: str = 'grid'
    seed: int = 0
    p: int = 1
    k: int = 20
    degree: int = 4
    normal_k: Optional[int] = None
    normal_degree: Optional[int] = None
    stop_tol: float = 1e-12
    max_iter: int = 20
    chart_cond: float = 1e6
    cond_threshold: float = 1e8
    max_degenerate_fraction: float = 0.01
    ansatz_degree: int = 1
    include_constants: bool = False
    policy: str = 'threshold'
    threshold: float = 1e-5
    method: str = 'auto'
    normalize: bool = False
    trials: Optional[int] = None
    sizes: str = ''
    threads: Optional[int] = None
    record_runtime: bool = False

    def prolong_params(self) -> GmlsParams:
        return GmlsParams(k=self.k, degree=self.degree, stop_tol=self.stop_tol,
                          max_iter=self.max_iter, chart_cond=self.chart_cond)

    def normal_params(self) -> GmlsParams:
        return GmlsParams(
            k=self.k if self.normal_k is None else self.normal_k,
            degree=self.degree if self.normal_degree is None else self.normal_degree,
            stop_tol=self.stop_tol, max_iter=self.max_iter,
            chart_cond=self.chart_cond)

    def resolved_threads(self) -> int:
        """--threads, then $LIESYM_THREADS, then the number of cores."""
        if self.threads is not None:
            return max(1, int(self.threads))
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                raise ValueError(f'{THREADS_ENV} must be an integer, got {env!r}.')
        return os.cpu_count() or 1

    def update(self, **overrides) -> 'RunConfig':
        """Copy with the given values set; None values are ignored.

        Raises:
            ValueError: for unknown keys.
        """
        unknown = [k for k in overrides if k not in _field_types()]
        if unknown:
            raise ValueError(f'Unknown config keys: {sorted(unknown)}')
        values = asdict(self)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(**values)

    def to_text(self) -> str:
        lines = ['# liesym run configuration']
        for f in fields(self):
            lines.append(f'{f.name} = {_format(getattr(self, f.name))}')
        return '\n'.join(lines) + '\n'

    @classmethod
    def from_text(cls, text: str) -> 'RunConfig':
        """Parse `key = value` lines; keys not in the text keep their
        defaults.

        Raises:
            ValueError: for malformed lines, unknown keys or bad values.
        """
        return cls(**parse_config_text(text))

    @classmethod
    def load(cls, path) -> 'RunConfig':
        return cls.from_text(Path(path).read_text())

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def for_benchmark(cls, name: str, full: bool = False) -> 'RunConfig':
        """Config holding the parameters of a named benchmark."""
        from liesym.experiments import get_benchmark
        bench = get_benchmark(name, full=full)
        spec = bench.spec
        return cls(system=spec.system, benchmark=name, full=full,
                   counts=format_assignments(spec.counts),
                   fixed=format_assignments(spec.fixed),
                   ranges=format_assignments(
                       {a: f'{lo!r}:{hi!r}' for a, (lo, hi) in spec.ranges.items()}),
                   mode=spec.mode, p=bench.p,
                   k=bench.prolong_params.k, degree=bench.prolong_params.degree,
                   normal_k=bench.normal_params.k,
                   normal_degree=bench.normal_params.degree,
                   ansatz_degree=bench.degree,
                   include_constants=bench.include_constants,
                   policy=bench.policy.to_string(),
                   threshold=bench.policy.threshold, trials=bench.trials,
                   chart_cond=bench.prolong_params.chart_cond,
                   max_degenerate_fraction=bench.max_degenerate_fraction,
                   sizes=';'.join(label for label, _ in bench.sizes))


def parse_config_text(text: str) -> Dict:
    """Values set by the `key = value` lines of a config text.

    Only the keys present in the text are returned.

    Raises:
        ValueError: for malformed lines, unknown keys or bad values.
    """
    types = _field_types()
    values = {}
    unknown = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ValueError(f'Line {number} is not `key = value`: {raw!r}')
        if key not in types:
            unknown.append(key)
            continue
        values[key] = _parse(value, types[key], key)
    if unknown:
        raise ValueError(f'Unknown config keys: {sorted(unknown)}')
    return values


def load_config_values(path) -> Dict:
    """`parse_config_text` of a file."""
    return parse_config_text(Path(path).read_text())


def _field_types() -> Dict[str, type]:
    return typing.get_type_hints(RunConfig)


def _format(value) -> str:
    if value is None:
        return 'none'
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(text: str, kind, key: str):
    optional = typing.get_origin(kind) is typing.Union
    if optional:
        if text.lower() in ('none', ''):
            return None
        kind = next(a for a in typing.get_args(kind) if a is not type(None))
    try:
        if kind is bool:
            if text.lower() in ('true', 'yes', '1', 'on'):
                return True
            if text.lower() in ('false', 'no', '0', 'off'):
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
    except ValueError:
        raise ValueError(f'Invalid value {text!r} for {key} '
                         f'(expected {kind.__name__}).')
    return text


def parse_assignments(text: str, value_type=float) -> Dict:
    """'t=160,x=160' -> {'t': 160, 'x': 160} with values cast by value_type.

    Raises:
        ValueError: for entries without '='.
    """
    out = {}
    for item in filter(None, (s.strip() for s in text.split(','))):
        key, sep, value = item.partition('=')
        if not sep:
            raise ValueError(f'Expected key=value, got {item!r}.')
        out[key.strip()] = value_type(value.strip())
    return out


def parse_range(text: str):
    """'-1:1' -> (-1.0, 1.0)."""
    lo, sep, hi = text.partition(':')
    if not sep:
        raise ValueError(f'Expected a range low:high, got {text!r}.')
    return float(lo), float(hi)


def format_assignments(values: Dict) -> str:
    return ','.join(f'{k}={_format(v) if isinstance(v, float) else v}'
                    for k, v in values.items())
