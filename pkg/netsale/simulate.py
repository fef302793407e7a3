"""
Monte-Carlo check of buyers' Gaussian beliefs

Every sample draws the state theta ~ N(0, 1/z0) and one noisy signal per
targeted buyer; each buyer acts on the posterior mean of the signals it
observes. Samples are drawn in fixed-size chunks, each from its own
counter-based Philox stream keyed by (seed, chunk index), and chunk
moments are reduced in chunk order, so estimates do not depend on the
number of threads.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from netsale import contract
from netsale.internal import _utils

_LOGGER = logging.getLogger('netsale.simulate')
CHUNK_SIZE = 65536
BIT_GENERATOR = 'Philox'
NORMAL_METHOD = 'ziggurat'


@dataclass(frozen=True)
class SimulationConfig:
    samples: int
    seed: int
    contract: contract.Contract
    params: contract.ModelParams

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 1:
            raise _utils.DomainError(
                f'samples must be a positive integer, got {self.samples}'
            )
        if int(self.seed) != self.seed or self.seed < 0:
            raise _utils.DomainError(
                f'seed must be a non-negative integer, got {self.seed}'
            )


@dataclass(frozen=True)
class MseEstimate:
    """
    Empirical squared error of one buyer's action against the state
    """

    node: int
    mse: float
    se: float
    theory: float
    z_score: float

    def to_dict(self):
        return {
            'node': self.node,
            'mse': self.mse,
            'se': self.se,
            'theory': self.theory,
            'z_score': self.z_score,
        }


@dataclass(frozen=True)
class WtpEstimate:
    """
    Empirical reduction in squared error a buyer gets from its own signal
    """

    node: int
    estimate: float
    se: float
    theory: float
    z_score: float

    def to_dict(self):
        return {
            'node': self.node,
            'estimate': self.estimate,
            'se': self.se,
            'theory': self.theory,
            'z_score': self.z_score,
        }


def posterior_weights(g, i, precisions, z0, include_own=True):
    """
    Weights of the posterior mean of the state given the signals buyer i
    observes

    :param g: A Network
    :param i: A buyer
    :param precisions: A mapping node -> signal precision (missing nodes
        have precision 0)
    :param z0: Prior precision of the state
    :param include_own: Whether buyer i observes its own signal
    :return: A dict node -> weight over the observed signals with
        positive precision, in node order
    """
    if any(z < 0 for z in precisions.values()):
        raise _utils.DomainError('Precisions must be non-negative')
    observed = g.neighbors(i).nodes + ((i,) if include_own else ())
    observed = sorted(j for j in observed if precisions.get(j, 0.0) > 0)
    total = z0 + math.fsum(precisions[j] for j in observed)
    return {j: precisions[j] / total for j in observed}


def simulation_metadata(cfg):
    """
    :param cfg: A SimulationConfig
    :return: The settings that reproduce a simulation
    """
    return {
        'seed': cfg.seed,
        'samples': cfg.samples,
        'bit_generator': BIT_GENERATOR,
        'normal_method': NORMAL_METHOD,
        'chunk_size': CHUNK_SIZE,
    }


def monte_carlo_mse(g, cfg, threads=1):
    """
    Estimate every buyer's expected squared error

    :param g: A Network
    :param cfg: A SimulationConfig
    :param threads: Maximum number of concurrent threads
    :return: A tuple with one MseEstimate per node, in node order
    """
    precisions = cfg.contract.precisions()
    sources = sorted(precisions)
    weights = np.zeros((g.n, len(sources)))
    theory = list()
    for i in range(1, g.n + 1):
        row = posterior_weights(g, i, precisions, cfg.params.z0)
        for k, j in enumerate(sources):
            weights[i - 1, k] = row.get(j, 0.0)
        observed = math.fsum(precisions[j] for j in row)
        theory.append(1.0 / (cfg.params.z0 + observed))

    def squared_errors(theta, signals):
        return (signals @ weights.T - theta[:, np.newaxis]) ** 2

    mean, se = _moments(g.n, cfg, sources, squared_errors, threads)
    return tuple(
        MseEstimate(
            node=i + 1,
            mse=mean[i],
            se=se[i],
            theory=theory[i],
            z_score=_z_score(mean[i], theory[i], se[i]),
        )
        for i in range(g.n)
    )


def monte_carlo_wtp(g, i, cfg, threads=1):
    """
    Estimate how much buyer i's expected squared error falls when it
    adds its own signal, using the same draws for both arms

    :param g: A Network
    :param i: A targeted buyer
    :param cfg: A SimulationConfig
    :param threads: Maximum number of concurrent threads
    :return: A WtpEstimate
    """
    c = cfg.contract
    if c.z > 0 and i not in c.target:
        raise _utils.DomainError(f'Buyer {i} is not in the target {c.target}')
    precisions = c.precisions()
    theory = contract.willingness_to_pay(g, i, precisions, cfg.params)
    if precisions.get(i, 0.0) == 0:
        return WtpEstimate(
            node=i, estimate=0.0, se=0.0, theory=theory, z_score=0.0
        )
    sources = sorted(precisions)
    with_own = posterior_weights(g, i, precisions, cfg.params.z0)
    without_own = posterior_weights(
        g, i, precisions, cfg.params.z0, include_own=False
    )
    weights = np.array(
        [
            [without_own.get(j, 0.0) for j in sources],
            [with_own.get(j, 0.0) for j in sources],
        ]
    )

    def improvement(theta, signals):
        errors = (signals @ weights.T - theta[:, np.newaxis]) ** 2
        return (errors[:, 0] - errors[:, 1])[:, np.newaxis]

    mean, se = _moments(1, cfg, sources, improvement, threads)
    return WtpEstimate(
        node=i,
        estimate=mean[0],
        se=se[0],
        theory=theory,
        z_score=_z_score(mean[0], theory, se[0]),
    )


def _moments(width, cfg, sources, quantity, threads):
    """
    Sample mean and standard error of a per-sample quantity

    :param width: Number of columns returned by quantity
    :param cfg: A SimulationConfig
    :param sources: Sorted buyers whose signals are drawn
    :param quantity: Maps (theta, signals) arrays to an array of shape
        (chunk samples, width)
    :param threads: Maximum number of concurrent threads
    :return: Two lists of length width (means, standard errors)
    """
    noise_scale = np.array(
        [1.0 / math.sqrt(cfg.contract.precisions()[j]) for j in sources]
    )
    prior_scale = 1.0 / math.sqrt(cfg.params.z0)
    chunks = [
        (index, min(CHUNK_SIZE, cfg.samples - start))
        for index, start in enumerate(range(0, cfg.samples, CHUNK_SIZE))
    ]
    _LOGGER.debug(
        f'Drawing {cfg.samples} samples of {len(sources)} signals'
        f' in {len(chunks)} chunks'
    )

    def chunk_moments(chunk):
        index, size = chunk
        rng = np.random.Generator(
            np.random.Philox(
                np.random.SeedSequence(cfg.seed, spawn_key=(index,))
            )
        )
        theta = rng.standard_normal(size) * prior_scale
        noise = rng.standard_normal((size, len(sources))) * noise_scale
        values = quantity(theta, theta[:, np.newaxis] + noise)
        return values.sum(axis=0), (values ** 2).sum(axis=0)

    results = _utils.map_in_threads(
        chunk_moments, chunks, threads=threads, logger=_LOGGER, label='Chunk'
    )
    n = cfg.samples
    means = list()
    errors = list()
    for column in range(width):
        total = math.fsum(float(s[column]) for s, _ in results)
        total_square = math.fsum(float(q[column]) for _, q in results)
        mean = total / n
        if n < 2:
            errors.append(0.0)
        else:
            variance = max(total_square / n - mean * mean, 0.0) * n / (n - 1)
            errors.append(math.sqrt(variance / n))
        means.append(mean)
    return means, errors


def _z_score(estimate, theory, se):
    if se == 0:
        return 0.0
    return (estimate - theory) / se
