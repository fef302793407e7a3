"""
Brute-force certification of the optimal contract

Every target set is priced at full surplus and its common precision is
optimized numerically. Two targets with the same purchase signature
(the number of targeted buyers having each count m_i of targeted
neighbors) have the same profit curve in z, so the inner optimization
runs once per distinct signature.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from netsale import contract, graph_core
from netsale.internal import _utils

_LOGGER = logging.getLogger('netsale.oracle')
DEFAULT_MAX_NODES = 20
GRID_POINTS = 10000
Z_TOLERANCE = 1e-9
PROFIT_RTOL = 1e-6
_SIGNATURE_CHUNK = 256  # Fixed, so results do not depend on threads
_INV_PHI = (math.sqrt(5) - 1) / 2
_INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2


@dataclass(frozen=True)
class OracleResult:
    best_target: graph_core.NodeSet
    best_z: float
    best_profit: float
    is_independent: bool
    matches_theorem1: bool
    scanned: int
    precondition_ok: bool = True

    def to_dict(self):
        return {
            'best_target': list(self.best_target.nodes),
            'best_z': self.best_z,
            'best_profit': self.best_profit,
            'is_independent': self.is_independent,
            'matches_theorem1': self.matches_theorem1,
            'scanned': self.scanned,
        }


def target_profit(g, target, z, params):
    """
    Seller profit of serving target at precision z with full-surplus
    prices

    :param g: A Network
    :param target: A NodeSet
    :param z: Precision (>= 0), a float or a numpy array
    :param params: ModelParams
    :return: sum of marginal prices over the target - gamma z
    """
    signature = purchase_signature(g, target)
    z_values = np.asarray(z, dtype=float)
    if np.any(z_values < 0):
        raise _utils.DomainError('Precision must be non-negative')
    profit = _signature_profit(
        signature[np.newaxis, :], z_values.reshape(1, -1), params
    )
    profit = profit.reshape(z_values.shape)
    return float(profit) if profit.ndim == 0 else profit


def purchase_signature(g, target):
    """
    :param g: A Network
    :param target: A NodeSet
    :return: An integer array c where c[k] counts the targeted buyers
        with exactly k targeted neighbors (length n)
    """
    counts = contract.purchase_counts(g, target)
    signature = np.zeros(g.n, dtype=np.int64)
    for node in target:
        signature[counts[node]] += 1
    return signature


def best_z_for_target(g, target, params):
    """
    Maximize target_profit over z in [0, sqrt(n/gamma)]

    A 10^4-point grid locates the best cell, then golden-section search
    refines inside the two cells around it.

    :param g: A Network
    :param target: A non-empty NodeSet
    :param params: ModelParams
    :return: A tuple (z, profit)
    """
    if not len(target):
        raise _utils.DomainError('The target must be non-empty')
    signature = purchase_signature(g, target)
    z, profit = _best_z_for_signatures(signature[np.newaxis, :], g.n, params)
    return float(z[0]), float(profit[0])


def brute_force_optimal(
    g, params, max_nodes=DEFAULT_MAX_NODES, threads=1, uniform=False
):
    """
    Scan all 2^n target sets and certify the maximum-independent-set
    characterization of the optimal contract

    :param g: A Network
    :param params: ModelParams
    :param max_nodes: Largest n accepted
    :param threads: Maximum number of concurrent threads
    :param uniform: Report the size-free precondition
    :return: An OracleResult
    """
    if g.n > max_nodes:
        raise _utils.CapacityError(
            f'Brute force is capped at {max_nodes} nodes, network has {g.n}'
        )
    signatures = _all_signatures(g)
    unique, inverse = np.unique(signatures, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    _LOGGER.info(
        f'Scanning {len(signatures)} target sets'
        f' ({len(unique)} distinct purchase signatures)'
    )
    chunks = [
        unique[start:start + _SIGNATURE_CHUNK]
        for start in range(0, len(unique), _SIGNATURE_CHUNK)
    ]
    results = _utils.map_in_threads(
        lambda chunk: _best_z_for_signatures(chunk, g.n, params),
        chunks,
        threads=threads,
        logger=_LOGGER,
        label='Signature chunk',
    )
    best_z = np.concatenate([z for z, _ in results])
    best_profit = np.concatenate([p for _, p in results])
    per_mask = best_profit[inverse]
    # argmax keeps the first, i.e. lowest, mask among ties
    best_mask = int(np.argmax(per_mask))
    best_target = graph_core.NodeSet(best_mask)
    profit = float(per_mask[best_mask])
    z = float(best_z[inverse[best_mask]])

    solution = contract.optimal_contract(g, params, uniform=uniform)
    is_independent = graph_core.is_independent_set(g, best_target)
    matches = (
        is_independent
        and len(best_target) == solution.m
        and math.isclose(
            profit, solution.profit, rel_tol=PROFIT_RTOL, abs_tol=1e-12
        )
    )
    if not matches:
        _LOGGER.warning(
            f'Brute force best {best_target} (profit {profit:.6f}) differs'
            f' from the maximum independent set contract'
            f' (profit {solution.profit:.6f})'
        )
    return OracleResult(
        best_target=best_target,
        best_z=z,
        best_profit=profit,
        is_independent=is_independent,
        matches_theorem1=matches,
        scanned=len(signatures),
        precondition_ok=solution.precondition_ok,
    )


def _all_signatures(g):
    n = g.n
    masks = np.arange(1 << n, dtype=np.int64)
    popcount = np.zeros(1 << n, dtype=np.int8)
    for bit in range(n):
        popcount += ((masks >> bit) & 1).astype(np.int8)
    signatures = np.zeros((1 << n, n), dtype=np.int8)
    for i, row in enumerate(g.adjacency):
        members = np.nonzero((masks >> i) & 1)[0]
        counts = popcount[masks[members] & row]
        signatures[members, counts] += 1
    return signatures


def _signature_profit(signatures, z, params):
    """
    Profit of each signature row at each precision

    :param signatures: Array (rows, K) of signature counts
    :param z: Array (rows, points) or (1, points) of precisions
    :param params: ModelParams
    :return: Array (rows, points)
    """
    z0 = params.z0
    k = np.arange(signatures.shape[1], dtype=float)
    z = z[..., np.newaxis]
    prices = 1.0 / (z0 + k * z) - 1.0 / (z0 + (k + 1.0) * z)
    revenue = (signatures[:, np.newaxis, :] * prices).sum(axis=-1)
    return revenue - params.gamma * z[..., 0]


def _best_z_for_signatures(signatures, n, params):
    rows = signatures.shape[0]
    grid = np.linspace(0.0, math.sqrt(n / params.gamma), GRID_POINTS)
    z0 = params.z0
    k = np.arange(signatures.shape[1], dtype=float)
    # prices[k, p] for grid point p
    prices = 1.0 / (z0 + np.outer(k, grid)) - 1.0 / (
        z0 + np.outer(k + 1.0, grid)
    )
    grid_profit = signatures.astype(float) @ prices - params.gamma * grid
    best = np.argmax(grid_profit, axis=1)
    grid_z = grid[best]
    grid_best = grid_profit[np.arange(rows), best]

    lower = grid[np.maximum(best - 1, 0)]
    upper = grid[np.minimum(best + 1, GRID_POINTS - 1)]

    def profit_at(z):
        return _signature_profit(signatures, z[:, np.newaxis], params)[:, 0]

    golden_z = _golden_section_max(profit_at, lower, upper)
    golden_profit = profit_at(golden_z)
    refined = golden_profit >= grid_best
    z = np.where(refined, golden_z, grid_z)
    profit = np.where(refined, golden_profit, grid_best)
    return z, profit


def _golden_section_max(f, a, b, tol=Z_TOLERANCE):
    """
    Vectorized golden-section search for the maximum of f on [a, b]

    :param f: Maps an array of points (one per row) to an array of values
    :param a: Array of lower bracket ends
    :param b: Array of upper bracket ends
    :param tol: Absolute tolerance on the maximizer
    :return: Array of maximizers
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    h = b - a
    widest = float(h.max(initial=0.0))
    if widest <= tol:
        return (a + b) / 2
    steps = int(math.ceil(math.log(tol / widest) / math.log(_INV_PHI)))
    c = a + _INV_PHI_SQUARE * h
    d = a + _INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(steps):
        left = yc > yd
        # Keep [a, d] where the left point is higher, else [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        h = b - a
        new_c = np.where(left, a + _INV_PHI_SQUARE * h, d)
        new_d = np.where(left, c, a + _INV_PHI * h)
        y_new = f(np.where(left, new_c, new_d))
        yc, yd = np.where(left, y_new, yd), np.where(left, yc, y_new)
        c, d = new_c, new_d
    return (a + b) / 2
