import contextlib
from dataclasses import dataclass

from invoke import task
from invoke.exceptions import Exit

from netsale import (
    contract,
    graph_core,
    interventions,
    oracle,
    simulate,
    welfare,
)
from netsale.internal import _utils

_LOGGER = _utils.get_logger('netsale')
OUTPUT_FORMATS = ('json', 'text')

# Every command accepts these; commands that have no use for a flag
# validate it and otherwise ignore it
_common_help = {
    'graph': (
        'Path of the graph file; the format follows the suffix (.json,'
        ' .yml/.yaml, .dimacs/.col, anything else is an edge list)'
    ),
    'z0': 'Prior precision of the state (default 0.1)',
    'gamma': 'Marginal cost of data precision (default 1.0)',
    'format': 'Output format: json or text',
    'seed': 'Seed of the random number generator (simulate)',
    'samples': 'Number of Monte-Carlo samples (simulate)',
    'cap': (
        'Maximum number of maximum independent sets enumerated'
        ' (mis, welfare, intervene, pareto)'
    ),
    'uniform-bound': (
        'Check the size-free precondition z0 < 1/(4 sqrt(gamma))'
        ' (solve, oracle)'
    ),
    'log-level': (
        "One of Python's standard logging levels"
        " (DEBUG, INFO, WARNING, ERROR, CRITICAL)"
    ),
}


@dataclass(frozen=True)
class RunConfig:
    """
    Resolved settings of one command: flags first, then the invoke
    configuration (netsale.yaml files, NETSALE_* variables), then the
    built-in defaults
    """

    command: str
    graph_path: str
    z0: float
    gamma: float
    format: str = 'json'
    seed: int = 0
    samples: int = 100000
    cap: int = graph_core.DEFAULT_ENUMERATION_CAP
    uniform_bound: bool = False
    threads: int = 1
    budget: int = 10
    oracle_max_nodes: int = oracle.DEFAULT_MAX_NODES
    pareto_max_nodes: int = interventions.DEFAULT_PARETO_MAX_NODES

    def __post_init__(self):
        if self.format not in OUTPUT_FORMATS:
            raise _utils.DomainError(
                f'Unknown output format "{self.format}",'
                f' expected one of {list(OUTPUT_FORMATS)}'
            )
        for name in ('samples', 'cap', 'threads', 'budget'):
            if getattr(self, name) < 1:
                raise _utils.DomainError(f'{name} must be at least 1')
        if self.seed < 0:
            raise _utils.DomainError('seed must be non-negative')
        # Raises on invalid z0 or gamma before any work
        object.__setattr__(
            self, '_params', contract.ModelParams(z0=self.z0, gamma=self.gamma)
        )

    @property
    def params(self):
        return self._params


@task(help=_common_help, auto_shortflags=False)
def solve(
    ctx,
    graph,
    z0=None,
    gamma=None,
    format='json',
    seed=None,
    samples=None,
    cap=None,
    uniform_bound=False,
    log_level=None,
):
    """
    Build the seller's optimal contract for a buyer network

    :param ctx: An Invoke context object
    :param graph: Path of the graph file
    :param z0: Prior precision of the state
    :param gamma: Marginal cost of data precision
    :param format: Output format (json or text)
    :param seed: Accepted for every command, unused here
    :param samples: Accepted for every command, unused here
    :param cap: Accepted for every command, unused here
    :param uniform_bound: Check the size-free precondition
        z0 < 1/(4 sqrt(gamma)) instead of the n-dependent one
    :param log_level: One of Python's standard logging levels
        (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    :return: None
    """
    with _exit_codes():
        cfg = _run_config(ctx, 'solve', graph, **_flags(locals()))
        g = graph_core.read_network(cfg.graph_path)
        solution = contract.optimal_contract(
            g, cfg.params, uniform=cfg.uniform_bound
        )
        _emit(cfg, solution.to_dict())


@task(name='oracle', help=_common_help, auto_shortflags=False)
def oracle_(
    ctx,
    graph,
    z0=None,
    gamma=None,
    format='json',
    seed=None,
    samples=None,
    cap=None,
    uniform_bound=False,
    log_level=None,
):
    """
    Scan every target set and check that a maximum independent set wins

    :param ctx: An Invoke context object
    :param graph: Path of the graph file
    :param z0: Prior precision of the state
    :param gamma: Marginal cost of data precision
    :param format: Output format (json or text)
    :param seed: Accepted for every command, unused here
    :param samples: Accepted for every command, unused here
    :param cap: Accepted for every command, unused here
    :param uniform_bound: Report the size-free precondition
    :param log_level: One of Python's standard logging levels
        (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    :return: None
    """
    with _exit_codes():
        cfg = _run_config(ctx, 'oracle', graph, **_flags(locals()))
        g = graph_core.read_network(cfg.graph_path)
        result = oracle.brute_force_optimal(
            g,
            cfg.params,
            max_nodes=cfg.oracle_max_nodes,
            threads=cfg.threads,
            uniform=cfg.uniform_bound,
        )
        document = result.to_dict()
        document['precondition_ok'] = result.precondition_ok
        _emit(cfg, document)


@task(help=_common_help, auto_shortflags=False)
def mis(
    ctx,
    graph,
    z0=None,
    gamma=None,
    format='json',
    seed=None,
    samples=None,
    cap=None,
    uniform_bound=False,
    log_level=None,
):
    """
    Report the independence number, the maximum independent sets and the
    Caro-Wei bound

    Only --cap, --format and --log-level change the result.

    :param ctx: An Invoke context object
    :param graph: Path of the graph file
    :param z0: Accepted for every command, unused here
    :param gamma: Accepted for every command, unused here
    :param format: Output format (json or text)
    :param seed: Accepted for every command, unused here
    :param samples: Accepted for every command, unused here
    :param cap: Maximum number of maximum independent sets listed
    :param uniform_bound: Accepted for every command, unused here
    :param log_level: One of Python's standard logging levels
        (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    :return: None
    """
    with _exit_codes():
        cfg = _run_config(ctx, 'mis', graph, **_flags(locals()))
        g = graph_core.read_network(cfg.graph_path)
        enumeration = graph_core.enumerate_maximum_independent_sets(
            g, cap=cfg.cap
        )
        _emit(
            cfg,
            {
                'alpha': enumeration.alpha,
                'count': len(enumeration),
                'truncated': enumeration.truncated,
                'sets': [list(s.nodes) for s in enumeration],
                'caro_wei': graph_core.caro_wei_bound(g),
                'union_of_cliques': graph_core.is_union_of_cliques(g),
            },
        )


@task(name='welfare', help=_common_help, auto_shortflags=False)
def welfare_(
    ctx,
    graph,
    z0=None,
    gamma=None,
    format='json',
    seed=None,
    samples=None,
    cap=None,
    uniform_bound=False,
    log_level=None,
):
    """
    Pick the maximum independent set buyers prefer and report consumer
    surplus, seller profit and social welfare

    :param ctx: An Invoke context object
    :param graph: Path of the graph file
    :param z0: Prior precision of the state
    :param gamma: Marginal cost of data precision
    :param format: Output format (json or text)
    :param seed: Accepted for every command, unused here
    :param samples: Accepted for every command, unused here
    :param cap: Maximum number of maximum independent sets compared
    :param uniform_bound: Accepted for every command, unused here
    :param log_level: One of Python's standard logging levels
        (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    :return: None
    """
    with _exit_codes():
        cfg = _run_config(ctx, 'welfare', graph, **_flags(locals()))
        g = graph_core.read_network(cfg.graph_path)
        _, report = welfare.best_target_for_consumers(
            g, cfg.params, cap=cfg.cap, threads=cfg.threads
        )
        _emit(cfg, report.to_dict())


@task(help=_common_help, auto_shortflags=False)
def efficient(
    ctx,
    graph,
    z0=None,
    gamma=None,
    format='json',
    seed=None,
    samples=None,
    cap=None,
    uniform_bound=False,
    log_level=None,
):
    """
    Compare the socially efficient precision with the seller's choice

    :param ctx: An Invoke context object
    :param graph: Path of the graph file
    :param z0: Prior precision of the state
    :param gamma: Marginal cost of data precision
    :param format: Output format (json or text)
    :param seed: Accepted for every command, unused here
    :param samples: Accepted for every command, unused here
    :param cap: Accepted for every command, unused here
    :param uniform_bound: Accepted for every command, unused here
    :param log_level: One of Python's standard logging levels
        (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    :return: None
    """
    with _exit_codes():
        cfg = _run_config(ctx, 'efficient', graph, **_flags(locals()))
        g = graph_core.read_network(cfg.graph_path)
        optimum = welfare.socially_efficient_precision(g, cfg.params)
        document = {
            'z_star': optimum.z_star,
            'corner': optimum.corner,
            'social_welfare': welfare.social_welfare(
                g, optimum.z_star, cfg.params
            ),
        }
        document.update(welfare.precision_gap(g, cfg.params).to_dict())
        _emit(cfg, document)


@task(name='simulate', help=_common_help, auto_shortflags=False)
def simulate_(
    ctx,
    graph,
    z0=None,
    gamma=None,
    format='json',
    seed=None,
    samples=None,
    cap=None,
    uniform_bound=False,
    log_level=None,
):
    """
    Check buyers' posterior errors and willingness to pay under the
    optimal contract by simulation

    :param ctx: An Invoke context object
    :param graph: Path of the graph file
    :param z0: Prior precision of the state
    :param gamma: Marginal cost of data precision
    :param format: Output format (json or text)
    :param seed: Seed of the random number generator
    :param samples: Number of Monte-Carlo samples
    :param cap: Accepted for every command, unused here
    :param uniform_bound: Accepted for every command, unused here
    :param log_level: One of Python's standard logging levels
        (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    :return: None
    """
    with _exit_codes():
        cfg = _run_config(ctx, 'simulate', graph, **_flags(locals()))
        g = graph_core.read_network(cfg.graph_path)
        solution = contract.optimal_contract(g, cfg.params)
        sim = simulate.SimulationConfig(
            samples=cfg.samples,
            seed=cfg.seed,
            contract=solution.contract,
            params=cfg.params,
        )
        estimates = simulate.monte_carlo_mse(g, sim, threads=cfg.threads)
        wtp = [
            simulate.monte_carlo_wtp(g, i, sim, threads=cfg.threads)
            for i in solution.contract.target
        ]
        _emit(
            cfg,
            {
                'metadata': simulate.simulation_metadata(sim),
                'target': list(solution.contract.target.nodes),
                'z': solution.contract.z,
                'mse': [e.to_dict() for e in estimates],
                'wtp': [w.to_dict() for w in wtp],
            },
        )


@task(
    help={
        **_common_help,
        'budget': 'Number of ranked interventions reported',
    },
    auto_shortflags=False,
)
def intervene(
    ctx,
    graph,
    z0=None,
    gamma=None,
    format='json',
    seed=None,
    samples=None,
    cap=None,
    uniform_bound=False,
    log_level=None,
    budget=None,
):
    """
    Rank single link removals and node isolations by seller profit gain

    :param ctx: An Invoke context object
    :param graph: Path of the graph file
    :param z0: Prior precision of the state
    :param gamma: Marginal cost of data precision
    :param format: Output format (json or text)
    :param seed: Accepted for every command, unused here
    :param samples: Accepted for every command, unused here
    :param cap: Maximum number of maximum independent sets compared
    :param uniform_bound: Accepted for every command, unused here
    :param log_level: One of Python's standard logging levels
        (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    :param budget: Number of ranked interventions reported
    :return: None
    """
    with _exit_codes():
        cfg = _run_config(ctx, 'intervene', graph, **_flags(locals()))
        g = graph_core.read_network(cfg.graph_path)
        ranking = interventions.scan_interventions(
            g, cfg.params, cfg.budget, threads=cfg.threads, cap=cfg.cap
        )
        _emit(cfg, [outcome.to_dict() for outcome in ranking])


@task(
    help={
        **_common_help,
        'exhaustive': (
            'Also search every network on the same buyers for a Pareto'
            ' improvement (small networks only)'
        ),
    },
    auto_shortflags=False,
)
def pareto(
    ctx,
    graph,
    z0=None,
    gamma=None,
    format='json',
    seed=None,
    samples=None,
    cap=None,
    uniform_bound=False,
    log_level=None,
    exhaustive=False,
):
    """
    Check whether a network is core-periphery, hence Pareto-efficient

    :param ctx: An Invoke context object
    :param graph: Path of the graph file
    :param z0: Prior precision of the state
    :param gamma: Marginal cost of data precision
    :param format: Output format (json or text)
    :param seed: Accepted for every command, unused here
    :param samples: Accepted for every command, unused here
    :param cap: Maximum number of maximum independent sets compared
    :param uniform_bound: Accepted for every command, unused here
    :param log_level: One of Python's standard logging levels
        (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    :param exhaustive: Also enumerate every network on the same buyers
    :return: None
    """
    with _exit_codes():
        cfg = _run_config(ctx, 'pareto', graph, **_flags(locals()))
        g = graph_core.read_network(cfg.graph_path)
        check = interventions.pareto_efficient_check(
            g,
            cfg.params,
            exhaustive=exhaustive,
            max_nodes=cfg.pareto_max_nodes,
            cap=cfg.cap,
        )
        _emit(cfg, check.to_dict())


def _flags(values):
    """
    Pick the command-line values of a task from its locals

    :param values: The locals() of a task
    :return: A dictionary of flag values; None means not given
    """
    return {
        key: values.get(key)
        for key in (
            'z0',
            'gamma',
            'format',
            'seed',
            'samples',
            'cap',
            'uniform_bound',
            'log_level',
            'budget',
        )
    }


@contextlib.contextmanager
def _exit_codes():
    """
    Turn netsale errors into invoke exits: 2 for capacity errors, 1 for
    anything else

    :return: None
    """
    try:
        yield
    except _utils.CapacityError as exc:
        raise Exit(f'{type(exc).__name__}: {exc}', code=2) from exc
    except _utils.NetsaleError as exc:
        raise Exit(f'{type(exc).__name__}: {exc}', code=1) from exc


def _run_config(ctx, command, graph, log_level=None, **flags):
    """
    Resolve the settings of a command

    :param ctx: An Invoke context object
    :param command: The command name
    :param graph: Path of the graph file
    :param log_level: One of Python's standard logging levels
    :param flags: Command-line values; None means not given
    :return: A RunConfig
    """
    if log_level:
        try:
            _LOGGER.setLevel(log_level.upper())
        except ValueError as exc:
            raise _utils.DomainError(str(exc)) from None
    casts = {
        'z0': float,
        'gamma': float,
        'seed': int,
        'samples': int,
        'cap': int,
        'budget': int,
    }
    values = dict()
    for key, cast in casts.items():
        value = flags.get(key)
        if value is None:
            value = _utils.get_setting(ctx, key)
        try:
            values[key] = cast(value)
        except (TypeError, ValueError):
            raise _utils.DomainError(
                f'--{key} expects a number, got "{value}"'
            ) from None
    for key in ('threads', 'oracle_max_nodes', 'pareto_max_nodes'):
        values[key] = int(_utils.get_setting(ctx, key))
    cfg = RunConfig(
        command=command,
        graph_path=graph,
        format=flags.get('format') or 'json',
        uniform_bound=bool(flags.get('uniform_bound')),
        **values,
    )
    _LOGGER.debug(f'Running {command} with {cfg}')
    return cfg


def _emit(cfg, result):
    """
    Print the result document on standard output

    :param cfg: A RunConfig
    :param result: A JSON-like result
    :return: None
    """
    document = {
        'command': cfg.command,
        'params': {'z0': cfg.z0, 'gamma': cfg.gamma},
        'result': result,
    }
    if cfg.format == 'text':
        print(_utils.format_text(document))
    else:
        print(_utils.dump_json(document))
