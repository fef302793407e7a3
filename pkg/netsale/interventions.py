"""
Network interventions: profit effects of link removal and node
isolation, and Pareto efficiency of buyer networks
"""
import enum
import itertools
import logging
import math
from dataclasses import dataclass, field

from netsale import contract, graph_core, welfare
from netsale.internal import _utils

_LOGGER = logging.getLogger('netsale.interventions')
DEFAULT_PARETO_MAX_NODES = 6
UTILITY_TOLERANCE = 1e-12


class InterventionKind(enum.Enum):
    # Declaration order is the ranking tie-break
    REMOVE_LINK = 'remove-link'
    ISOLATE_NODE = 'isolate-node'

    @property
    def rank(self):
        return list(InterventionKind).index(self)


@dataclass(frozen=True)
class InterventionOutcome:
    kind: InterventionKind
    operands: tuple
    alpha_before: int
    alpha_after: int
    profit_delta: float
    cs_delta: float

    def __str__(self):
        return f'{self.kind.value}({",".join(map(str, self.operands))})'

    def to_dict(self):
        document = {'kind': self.kind.value}
        if self.kind is InterventionKind.REMOVE_LINK:
            document['edge'] = list(self.operands)
        else:
            document['node'] = self.operands[0]
        document.update(
            {
                'alpha_before': self.alpha_before,
                'alpha_after': self.alpha_after,
                'profit_delta': self.profit_delta,
                'cs_delta': self.cs_delta,
            }
        )
        return document


@dataclass(frozen=True)
class CorePeripheryCertificate:
    """
    Evidence that a core-periphery network cannot be Pareto-improved:
    every free rider already observes all m purchased signals
    """

    core: graph_core.NodeSet
    periphery: graph_core.NodeSet
    m: int
    free_rider_links: dict
    free_rider_utilities: dict

    def to_dict(self):
        return {
            'core': list(self.core.nodes),
            'periphery': list(self.periphery.nodes),
            'm': self.m,
            'free_riders': [
                {
                    'node': node,
                    'links': self.free_rider_links[node],
                    'utility': self.free_rider_utilities[node],
                }
                for node in self.core.nodes
            ],
        }


@dataclass(frozen=True)
class ParetoImprovement:
    """
    An alternative network, with the seller's target in it, that leaves
    the seller and every buyer at least as well off
    """

    network: graph_core.Network
    target: graph_core.NodeSet
    seller_profit: float
    utilities: dict

    def to_dict(self):
        return {
            'edges': [list(edge) for edge in self.network.edges()],
            'target': list(self.target.nodes),
            'seller_profit': self.seller_profit,
            'utilities': [
                {'node': node, 'utility': utility}
                for node, utility in self.utilities.items()
            ],
        }


@dataclass(frozen=True)
class ParetoCheck:
    core_periphery: bool
    certificate: CorePeripheryCertificate = None
    exhaustive: bool = False
    graphs_checked: int = 0
    improvement: ParetoImprovement = None
    baseline_utilities: dict = field(default_factory=dict)

    @property
    def pareto_efficient(self):
        """
        :return: True or False when settled, None when only the
            core-periphery test ran and it failed
        """
        if self.exhaustive:
            return self.improvement is None
        return True if self.core_periphery else None

    def to_dict(self):
        return {
            'core_periphery': self.core_periphery,
            'certificate': (
                self.certificate.to_dict() if self.certificate else None
            ),
            'exhaustive': self.exhaustive,
            'graphs_checked': self.graphs_checked,
            'pareto_efficient': self.pareto_efficient,
            'improvement': (
                self.improvement.to_dict() if self.improvement else None
            ),
        }


def evaluate_link_removal(
    g, u, v, params, cap=graph_core.DEFAULT_ENUMERATION_CAP
):
    """
    :param g: A Network
    :param u: A buyer
    :param v: A buyer linked to u
    :param params: ModelParams
    :param cap: Maximum number of maximum independent sets examined for
        consumer surplus
    :return: An InterventionOutcome for removing the link (u, v)
    """
    u, v = min(u, v), max(u, v)
    return _outcome(
        g,
        g.without_edge(u, v),
        InterventionKind.REMOVE_LINK,
        (u, v),
        params,
        cap,
    )


def evaluate_node_isolation(
    g, v, params, cap=graph_core.DEFAULT_ENUMERATION_CAP
):
    """
    :param g: A Network
    :param v: A buyer; it stays in the network without links
    :param params: ModelParams
    :param cap: Maximum number of maximum independent sets examined for
        consumer surplus
    :return: An InterventionOutcome for cutting every link of v
    """
    return _outcome(
        g, g.isolated(v), InterventionKind.ISOLATE_NODE, (v,), params, cap
    )


def scan_interventions(
    g, params, budget, threads=1, cap=graph_core.DEFAULT_ENUMERATION_CAP
):
    """
    Rank every single link removal and node isolation by the seller's
    profit gain

    Nodes that are already isolated are not candidates. Ties are broken
    by kind (link removals first), then by operands.

    :param g: A Network
    :param params: ModelParams
    :param budget: Number of outcomes to return (>= 1)
    :param threads: Maximum number of concurrent threads
    :param cap: Maximum number of maximum independent sets examined for
        consumer surplus
    :return: A tuple of at most budget InterventionOutcomes
    """
    if budget < 1:
        raise _utils.DomainError(f'budget must be at least 1, got {budget}')
    candidates = [(InterventionKind.REMOVE_LINK, edge) for edge in g.edges()]
    candidates.extend(
        (InterventionKind.ISOLATE_NODE, (v,))
        for v in range(1, g.n + 1)
        if g.degree(v)
    )
    _LOGGER.info(f'Evaluating {len(candidates)} interventions')
    before = _market(g, params, cap)

    def evaluate(candidate):
        kind, operands = candidate
        if kind is InterventionKind.REMOVE_LINK:
            modified = g.without_edge(*operands)
        else:
            modified = g.isolated(*operands)
        return _compare(before, _market(modified, params, cap), kind, operands)

    outcomes = _utils.map_in_threads(
        evaluate,
        candidates,
        threads=threads,
        logger=_LOGGER,
        label='Intervention',
    )
    outcomes.sort(
        key=lambda o: (-o.profit_delta, o.kind.rank, o.operands)
    )
    return tuple(outcomes[:budget])


def pareto_efficient_check(
    g,
    params,
    exhaustive=False,
    max_nodes=DEFAULT_PARETO_MAX_NODES,
    cap=graph_core.DEFAULT_ENUMERATION_CAP,
):
    """
    Certify Pareto efficiency through the core-periphery structure, and
    optionally search every network on the same buyers for a Pareto
    improvement

    :param g: A Network
    :param params: ModelParams
    :param exhaustive: Also enumerate all labelled graphs on g's nodes
    :param max_nodes: Largest n accepted by the exhaustive search
    :param cap: Maximum number of maximum independent sets examined per
        network
    :return: A ParetoCheck
    """
    split = graph_core.is_core_periphery(g)
    certificate = None
    if split is not None:
        certificate = _core_periphery_certificate(g, *split, params)
    if not exhaustive:
        return ParetoCheck(
            core_periphery=split is not None, certificate=certificate
        )
    if g.n > max_nodes:
        raise _utils.CapacityError(
            f'The exhaustive Pareto check is capped at {max_nodes} nodes,'
            f' network has {g.n}'
        )
    base_profit, base_utilities = _baseline(g, params, cap)
    improvement, checked = _search_improvement(
        g, params, base_profit, base_utilities, cap
    )
    if improvement is not None:
        _LOGGER.info(
            f'Found a Pareto improvement with edges'
            f' {improvement.network.edges()}'
        )
    return ParetoCheck(
        core_periphery=split is not None,
        certificate=certificate,
        exhaustive=True,
        graphs_checked=checked,
        improvement=improvement,
        baseline_utilities=base_utilities,
    )


@dataclass(frozen=True)
class _Market:
    alpha: int
    profit: float
    consumer_surplus: float


def _market(g, params, cap):
    alpha = graph_core.independence_number(g)
    return _Market(
        alpha=alpha,
        profit=contract.optimal_profit(alpha, params),
        consumer_surplus=welfare.market_consumer_surplus(g, params, cap=cap),
    )


def _compare(before, after, kind, operands):
    return InterventionOutcome(
        kind=kind,
        operands=operands,
        alpha_before=before.alpha,
        alpha_after=after.alpha,
        profit_delta=after.profit - before.profit,
        cs_delta=after.consumer_surplus - before.consumer_surplus,
    )


def _outcome(g, modified, kind, operands, params, cap):
    return _compare(
        _market(g, params, cap), _market(modified, params, cap), kind, operands
    )


def _precision(m, params):
    return max(math.sqrt(m / params.gamma) - params.z0, 0.0)


def _core_periphery_certificate(g, core, periphery, params):
    m = len(periphery)
    z = _precision(m, params)
    links = contract.purchase_counts(g, periphery)
    return CorePeripheryCertificate(
        core=core,
        periphery=periphery,
        m=m,
        free_rider_links={node: links[node] for node in core},
        free_rider_utilities={
            node: -1.0 / (params.z0 + links[node] * z) for node in core
        },
    )


def _selections(g, params, cap):
    """
    Yield (target, seller profit, utilities) for every maximum
    independent set the seller may serve, or the null contract
    """
    enumeration = graph_core.enumerate_maximum_independent_sets(g, cap=cap)
    profit = contract.optimal_profit(enumeration.alpha, params)
    if _precision(enumeration.alpha, params) == 0:
        yield (
            graph_core.NodeSet(),
            profit,
            {node: -1.0 / params.z0 for node in range(1, g.n + 1)},
        )
        return
    for target in enumeration:
        yield target, profit, welfare.node_utilities(g, target, params)


def _baseline(g, params, cap):
    best = None
    for target, profit, utilities in _selections(g, params, cap):
        surplus = math.fsum(utilities.values())
        if best is None or surplus > best[0]:
            best = (surplus, profit, utilities)
    return best[1], best[2]


def _search_improvement(g, params, base_profit, base_utilities, cap):
    pairs = list(itertools.combinations(range(g.n), 2))
    base_alpha = graph_core.independence_number(g)
    checked = 0
    for code in range(1 << len(pairs)):
        adjacency = [0] * g.n
        for bit, (i, j) in enumerate(pairs):
            if code >> bit & 1:
                adjacency[i] |= 1 << j
                adjacency[j] |= 1 << i
        candidate = graph_core.Network(g.n, adjacency)
        if candidate == g:
            continue
        checked += 1
        # Seller profit is increasing in alpha
        if (
            graph_core.independence_number(candidate) < base_alpha
            and base_profit > 0
        ):
            continue
        for target, profit, utilities in _selections(candidate, params, cap):
            if _improves(profit, utilities, base_profit, base_utilities):
                return (
                    ParetoImprovement(
                        network=candidate,
                        target=target,
                        seller_profit=profit,
                        utilities=utilities,
                    ),
                    checked,
                )
    return None, checked


def _improves(profit, utilities, base_profit, base_utilities):
    if profit < base_profit - UTILITY_TOLERANCE:
        return False
    strictly = profit > base_profit + UTILITY_TOLERANCE
    for node, utility in utilities.items():
        base = base_utilities[node]
        if utility < base - UTILITY_TOLERANCE:
            return False
        if utility > base + UTILITY_TOLERANCE:
            strictly = True
    return strictly
