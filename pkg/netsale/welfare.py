"""
Consumer surplus, target comparisons and socially efficient precision
"""
import enum
import itertools
import logging
import math
from dataclasses import dataclass, field

from scipy import optimize

from netsale import contract, graph_core
from netsale.internal import _utils

_LOGGER = logging.getLogger('netsale.welfare')
ROOT_TOLERANCE = 1e-12


class TargetOrdering(enum.Enum):
    FIRST = 'first-weakly-better'
    SECOND = 'second-weakly-better'
    INCOMPARABLE = 'incomparable'


@dataclass(frozen=True)
class WelfareReport:
    target: graph_core.NodeSet
    consumer_surplus: float
    seller_profit: float
    social_welfare: float
    k: tuple
    per_node_utilities: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            'target': list(self.target.nodes),
            'consumer_surplus': self.consumer_surplus,
            'seller_profit': self.seller_profit,
            'social_welfare': self.social_welfare,
            'k_vector': list(self.k),
            'per_node': [
                {'node': node, 'utility': utility}
                for node, utility in self.per_node_utilities.items()
            ],
        }


@dataclass(frozen=True)
class EfficientPrecision:
    z_star: float
    corner: bool


@dataclass(frozen=True)
class PrecisionGap:
    z_star: float
    z_seller: float
    gap: float
    clique_union: bool
    limit_z_star: float
    limit_z_seller: float

    def to_dict(self):
        return {
            'z_star': self.z_star,
            'z_seller': self.z_seller,
            'gap': self.gap,
            'clique_union': self.clique_union,
            'limits': {
                'z_star': self.limit_z_star,
                'z_seller': self.limit_z_seller,
            },
        }


def node_utilities(g, target, params):
    """
    Expected payoff of every buyer under the seller-optimal contract
    serving target

    Targeted buyers pay away everything above the prior and keep -1/z0;
    a free rider with m_i purchasing neighbors keeps -1/(z0 + m_i z).

    :param g: A Network
    :param target: An independent NodeSet served by the seller
    :param params: ModelParams
    :return: A dict node -> utility, in node order
    """
    if not graph_core.is_independent_set(g, target):
        raise _utils.DomainError(f'{target} is not an independent set')
    m = len(target)
    z = math.sqrt(m / params.gamma) - params.z0
    if m == 0 or z <= 0:
        raise _utils.TrivialMarketError(
            f'No positive precision for a target of size {m} at z0={params.z0}'
        )
    counts = contract.purchase_counts(g, target)
    return {
        node: (
            -1.0 / params.z0
            if node in target
            else -1.0 / (params.z0 + count * z)
        )
        for node, count in counts.items()
    }


def consumer_surplus(g, target, params):
    """
    :param g: A Network
    :param target: The independent NodeSet served by the seller
    :param params: ModelParams
    :return: The sum of buyers' expected payoffs
    """
    return math.fsum(node_utilities(g, target, params).values())


def k_vector(g, target):
    """
    :param g: A Network
    :param target: A NodeSet
    :return: Free riders' purchase-link counts, sorted descending
    """
    counts = contract.purchase_counts(g, target)
    return tuple(
        sorted(
            (count for node, count in counts.items() if node not in target),
            reverse=True,
        )
    )


def compare_targets(k1, k2):
    """
    Order two targets by their free riders' purchase-link counts

    k1 is weakly better when its sorted counts are at least those of k2
    one by one, or when both have the same total and k1 is majorized by
    k2 (less spread out). Other pairs are incomparable.

    :param k1: A k-vector
    :param k2: A k-vector of the same length
    :return: A TargetOrdering
    """
    if len(k1) != len(k2):
        raise _utils.DomainError(
            f'k-vectors have different lengths ({len(k1)} and {len(k2)})'
        )
    if _weakly_better(k1, k2):
        return TargetOrdering.FIRST
    if _weakly_better(k2, k1):
        return TargetOrdering.SECOND
    return TargetOrdering.INCOMPARABLE


def _weakly_better(k1, k2):
    k1 = sorted(k1, reverse=True)
    k2 = sorted(k2, reverse=True)
    if all(a >= b for a, b in zip(k1, k2)):
        return True
    if sum(k1) != sum(k2):
        return False
    return all(
        a <= b
        for a, b in zip(itertools.accumulate(k1), itertools.accumulate(k2))
    )


def welfare_report(g, target, params):
    """
    :param g: A Network
    :param target: A maximum independent set of g
    :param params: ModelParams
    :return: A WelfareReport of the optimal contract serving target
    """
    utilities = node_utilities(g, target, params)
    solution = contract.optimal_contract(g, params, target=target)
    surplus = math.fsum(utilities.values())
    return WelfareReport(
        target=target,
        consumer_surplus=surplus,
        seller_profit=solution.profit,
        social_welfare=surplus + solution.profit,
        k=k_vector(g, target),
        per_node_utilities=utilities,
    )


def best_target_for_consumers(
    g, params, cap=graph_core.DEFAULT_ENUMERATION_CAP, threads=1
):
    """
    Pick the maximum independent set that buyers like best; the seller
    is indifferent among them

    :param g: A Network
    :param params: ModelParams
    :param cap: Maximum number of maximum independent sets examined
    :param threads: Maximum number of concurrent threads
    :return: A tuple (target, WelfareReport)
    """
    candidates = graph_core.enumerate_maximum_independent_sets(g, cap=cap)
    surpluses = _utils.map_in_threads(
        lambda target: consumer_surplus(g, target, params),
        candidates.sets,
        threads=threads,
        logger=_LOGGER,
        label='Target',
    )
    best = 0
    for i, surplus in enumerate(surpluses):
        if surplus > surpluses[best]:
            best = i
    target = candidates.sets[best]
    _LOGGER.debug(
        f'Best of {len(candidates)} maximum independent sets: {target}'
    )
    return target, welfare_report(g, target, params)


def market_consumer_surplus(g, params, cap=graph_core.DEFAULT_ENUMERATION_CAP):
    """
    Consumer surplus at the buyers' preferred optimal contract, or -n/z0
    when nobody buys

    :param g: A Network
    :param params: ModelParams
    :param cap: Maximum number of maximum independent sets examined
    :return: A consumer surplus
    """
    try:
        _, report = best_target_for_consumers(g, params, cap=cap)
    except _utils.TrivialMarketError:
        return -g.n / params.z0
    return report.consumer_surplus


def contract_social_welfare(g, target, z, params):
    """
    Social welfare of a uniform contract serving target at precision z

    Prices are transfers, so only residual variances and the data cost
    remain.

    :param g: A Network
    :param target: A NodeSet
    :param z: Precision (>= 0)
    :param params: ModelParams
    :return: sum_i -1/(z0 + (1[i in target] + m_i) z) - gamma z
    """
    counts = contract.purchase_counts(g, target)
    return math.fsum(
        -1.0 / (params.z0 + ((node in target) + count) * z)
        for node, count in counts.items()
    ) - params.cost(z)


def social_welfare(g, z, params):
    """
    :param g: A Network
    :param z: Precision (>= 0) given to every buyer
    :param params: ModelParams
    :return: sum_i -1/(z0 + (n_i + 1) z) - gamma z
    """
    if z < 0:
        raise _utils.DomainError(f'Precision must be non-negative, got {z}')
    return math.fsum(
        -1.0 / (params.z0 + (d + 1) * z) for d in g.degrees
    ) - params.cost(z)


def efficiency_condition(g, z, params):
    """
    :return: sum_i (n_i + 1)/(z0 + (n_i + 1) z)^2, strictly decreasing in z
    """
    return math.fsum(
        (d + 1) / (params.z0 + (d + 1) * z) ** 2 for d in g.degrees
    )


def socially_efficient_precision(g, params):
    """
    Solve the first-order condition of social welfare by bisection

    :param g: A Network
    :param params: ModelParams
    :return: An EfficientPrecision; corner=True (z_star=0) when even the
        first unit of precision is not worth its cost
    """
    gamma = params.gamma
    if efficiency_condition(g, 0.0, params) <= gamma:
        _LOGGER.info('Socially efficient precision is at the corner z=0')
        return EfficientPrecision(z_star=0.0, corner=True)
    upper = math.sqrt(sum(d + 1 for d in g.degrees) / gamma) + params.z0
    while efficiency_condition(g, upper, params) >= gamma:
        upper *= 2
    z_star = optimize.bisect(
        lambda z: efficiency_condition(g, z, params) - gamma,
        0.0,
        upper,
        xtol=ROOT_TOLERANCE,
        maxiter=500,
    )
    return EfficientPrecision(z_star=z_star, corner=False)


def precision_gap(g, params):
    """
    Compare socially efficient and seller-optimal precision

    :param g: A Network
    :param params: ModelParams
    :return: A PrecisionGap with both precisions, their z0 -> 0 limits
        and whether g is a disjoint union of cliques
    """
    alpha = graph_core.independence_number(g)
    z_star = socially_efficient_precision(g, params).z_star
    z_seller = max(math.sqrt(alpha / params.gamma) - params.z0, 0.0)
    return PrecisionGap(
        z_star=z_star,
        z_seller=z_seller,
        gap=z_seller - z_star,
        clique_union=graph_core.is_union_of_cliques(g),
        limit_z_star=math.sqrt(graph_core.caro_wei_bound(g) / params.gamma),
        limit_z_seller=math.sqrt(alpha / params.gamma),
    )
