"""
Pricing, willingness to pay and the seller's optimal contract
"""
import logging
import math
from dataclasses import dataclass, field

from netsale import graph_core
from netsale.internal import _utils

_LOGGER = logging.getLogger('netsale.contract')


@dataclass(frozen=True)
class ModelParams:
    """
    Prior precision z0 of the state and marginal data cost gamma
    """

    z0: float
    gamma: float

    def __post_init__(self):
        for name in ('z0', 'gamma'):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise _utils.DomainError(f'{name} must be a finite number')
            if value <= 0:
                raise _utils.DomainError(
                    f'{name} must be positive, got {value}'
                )
        object.__setattr__(self, 'z0', float(self.z0))
        object.__setattr__(self, 'gamma', float(self.gamma))

    def cost(self, z):
        return self.gamma * z


@dataclass(frozen=True)
class Contract:
    """
    A uniform-quality contract: one database of precision z, priced per
    targeted buyer
    """

    target: graph_core.NodeSet
    z: float
    prices: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.z < 0:
            raise _utils.DomainError(
                f'Precision must be non-negative, got {self.z}'
            )
        if (self.z == 0) != (len(self.target) == 0):
            raise _utils.DomainError(
                'A contract has z = 0 exactly when its target is empty'
            )
        if set(self.prices) != set(self.target.nodes):
            raise _utils.DomainError(
                'Prices must be defined exactly on the target'
            )
        if any(price < 0 for price in self.prices.values()):
            raise _utils.DomainError('Prices must be non-negative')

    @classmethod
    def null(cls):
        return cls(target=graph_core.NodeSet(), z=0.0, prices={})

    def precisions(self):
        """
        :return: A mapping node -> precision for the targeted buyers
        """
        return {node: self.z for node in self.target}


@dataclass(frozen=True)
class ContractSolution:
    """
    The seller's optimal contract together with its diagnostics
    """

    contract: Contract
    m: int
    profit: float
    precondition_ok: bool
    trivial: bool

    def to_dict(self):
        return {
            'target': list(self.contract.target.nodes),
            'm': self.m,
            'z': self.contract.z,
            'prices': [
                {'node': node, 'price': self.contract.prices[node]}
                for node in self.contract.target.nodes
            ],
            'profit': self.profit,
            'precondition_ok': self.precondition_ok,
            'trivial': self.trivial,
        }

    @classmethod
    def from_dict(cls, document):
        """
        Rebuild a ContractSolution from its emitted form

        :param document: A dict as returned by to_dict
        :return: A ContractSolution
        """
        try:
            contract = Contract(
                target=graph_core.NodeSet.of(document['target']),
                z=float(document['z']),
                prices={
                    int(item['node']): float(item['price'])
                    for item in document['prices']
                },
            )
            return cls(
                contract=contract,
                m=int(document['m']),
                profit=float(document['profit']),
                precondition_ok=bool(document['precondition_ok']),
                trivial=bool(document['trivial']),
            )
        except (KeyError, TypeError) as exc:
            raise _utils.DomainError(
                f'Malformed contract document: {exc}'
            ) from exc


def purchase_counts(g, target):
    """
    Count, for every buyer, the neighbors inside the target

    :param g: A Network
    :param target: A NodeSet
    :return: A dict node -> m_i, in node order
    """
    g.check_node_set(target)
    return {
        i + 1: (row & target.mask).bit_count()
        for i, row in enumerate(g.adjacency)
    }


def marginal_price(m_i, z, params):
    """
    Full-surplus price of a buyer observing m_i purchased signals

    :param m_i: Number of targeted neighbors
    :param z: Common data precision (>= 0)
    :param params: ModelParams
    :return: 1/(z0 + m_i z) - 1/(z0 + (m_i + 1) z)
    """
    if z < 0:
        raise _utils.DomainError(f'Precision must be non-negative, got {z}')
    if z == 0:
        return 0.0
    z0 = params.z0
    return 1.0 / (z0 + m_i * z) - 1.0 / (z0 + (m_i + 1) * z)


def willingness_to_pay(g, i, precisions, params):
    """
    Residual-variance reduction buyer i gets from its own signal

    :param g: A Network
    :param i: A buyer
    :param precisions: A mapping node -> signal precision (missing
        nodes have precision 0)
    :param params: ModelParams
    :return: The highest price buyer i accepts
    """
    own = precisions.get(i, 0.0)
    if any(z < 0 for z in precisions.values()):
        raise _utils.DomainError('Precisions must be non-negative')
    if own == 0:
        return 0.0
    observed = math.fsum(precisions.get(j, 0.0) for j in g.neighbors(i))
    z0 = params.z0
    return 1.0 / (z0 + observed) - 1.0 / (z0 + own + observed)


def theorem1_precondition(params, n, uniform=False):
    """
    Check the noisy-prior condition under which the optimal target is a
    maximum independent set

    :param params: ModelParams
    :param n: Number of buyers (>= 1)
    :param uniform: Use the size-free bound z0 < 1/(4 sqrt(gamma))
    :return: True if the (strict) condition holds
    """
    if n < 1:
        raise _utils.DomainError('The network needs at least one buyer')
    return params.z0 < precondition_bound(params, n, uniform=uniform)


def precondition_bound(params, n, uniform=False):
    """
    :return: The upper bound on z0 used by theorem1_precondition
    """
    if uniform:
        return 1.0 / (4.0 * math.sqrt(params.gamma))
    return (n + 1) / (2.0 * math.sqrt(params.gamma) * (2 * n + 1))


def optimal_contract(g, params, target=None, uniform=False):
    """
    Build the seller's optimal contract: target a maximum independent
    set, collect data of precision sqrt(m/gamma) - z0 and charge every
    targeted buyer 1/z0 - sqrt(gamma/m)

    :param g: A Network
    :param params: ModelParams
    :param target: Optional maximum independent set to serve; defaults to
        the one with the smallest bitmask
    :param uniform: Report the size-free precondition instead
    :return: A ContractSolution
    """
    if target is None:
        target = graph_core.maximum_independent_set(g)
        m = len(target)
    else:
        g.check_node_set(target)
        m = graph_core.independence_number(g)
        if len(target) != m or not graph_core.is_independent_set(g, target):
            raise _utils.DomainError(
                f'{target} is not a maximum independent set'
            )
    precondition_ok = theorem1_precondition(params, g.n, uniform=uniform)
    if not precondition_ok:
        _LOGGER.warning(
            f'z0={params.z0} violates the precondition bound'
            f' {precondition_bound(params, g.n, uniform=uniform):.6f};'
            ' the contract may not be optimal'
        )
    z = math.sqrt(m / params.gamma) - params.z0
    if z <= 0:
        _LOGGER.info('Prior is accurate enough that the market is trivial')
        return ContractSolution(
            contract=Contract.null(),
            m=m,
            profit=0.0,
            precondition_ok=precondition_ok,
            trivial=True,
        )
    price = 1.0 / params.z0 - math.sqrt(params.gamma / m)
    contract = Contract(
        target=target, z=z, prices={node: price for node in target}
    )
    return ContractSolution(
        contract=contract,
        m=m,
        profit=seller_profit(g, contract, params),
        precondition_ok=precondition_ok,
        trivial=False,
    )


def seller_profit(g, c, params):
    """
    Revenue minus the cost of one database of precision z

    :param g: A Network
    :param c: A Contract
    :param params: ModelParams
    :return: sum of prices - gamma z
    """
    g.check_node_set(c.target)
    return math.fsum(c.prices.values()) - params.cost(c.z)


def profit_closed_form(m, params):
    """
    :param m: Size of the targeted maximum independent set (>= 1)
    :param params: ModelParams
    :return: m/z0 + gamma z0 - 2 sqrt(gamma m)
    """
    if m < 1:
        raise _utils.DomainError('The closed form needs m >= 1')
    return (
        m / params.z0
        + params.gamma * params.z0
        - 2.0 * math.sqrt(params.gamma * m)
    )


def optimal_profit(m, params):
    """
    Seller-optimal profit of a market with independence number m, or 0
    when the null contract is optimal

    :param m: Independence number
    :param params: ModelParams
    :return: A profit
    """
    if m < 1 or math.sqrt(m / params.gamma) <= params.z0:
        return 0.0
    return profit_closed_form(m, params)


def prop1_removal_test(g, target, z, params):
    """
    Flag contracts on non-independent targets that dropping a buyer would
    improve

    :param g: A Network
    :param target: A non-empty NodeSet
    :param z: Common data precision
    :param params: ModelParams
    :return: True if the contract is provably not optimal
    """
    if not len(target):
        raise _utils.DomainError('The removal test needs a non-empty target')
    if graph_core.is_independent_set(g, target):
        return False
    counts = purchase_counts(g, target)
    threshold = min(params.z0 / (1 + counts[i]) for i in target)
    return z > threshold
