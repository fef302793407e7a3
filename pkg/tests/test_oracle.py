import itertools
import math
import time
import unittest

import networkx as nx
import numpy as np

from netsale import contract, graph_core, oracle
from netsale.internal import _utils
from test import TestNetsale

NodeSet = graph_core.NodeSet


class TestOracle(TestNetsale):
    def test_target_profit(self):
        """
        Test the full-surplus profit of arbitrary targets

        :return: None
        """
        params = self.params
        self.assertAlmostEqual(
            oracle.target_profit(self.network('p4'), NodeSet(), 0.5, params),
            -0.5,
            places=15,
        )
        self.assertAlmostEqual(
            oracle.target_profit(
                self.network('k2'), NodeSet.of([1, 2]), 0.1, params
            ),
            2 * (1 / 0.2 - 1 / 0.3) - 0.1,
            places=12,
        )
        self.assertAlmostEqual(
            oracle.target_profit(
                self.network('p4'),
                NodeSet.of([1, 3]),
                math.sqrt(2) - 0.1,
                params,
            ),
            self.expected['profit'][2],
            places=9,
        )
        curve = oracle.target_profit(
            self.network('p4'),
            NodeSet.of([1, 3]),
            np.array([0.5, 1.0]),
            params,
        )
        self.assertEqual(curve.shape, (2,))
        with self.assertRaises(_utils.DomainError):
            oracle.target_profit(
                self.network('p4'), NodeSet.of([1]), -1.0, params
            )

    def test_purchase_signature(self):
        """
        Test the signature shared by targets with equal profit curves

        :return: None
        """
        signature = oracle.purchase_signature(
            self.network('p4'), NodeSet.of([1, 2, 3])
        )
        self.assertEqual(list(signature), [0, 2, 1, 0])

    def test_best_z_for_target(self):
        """
        Test the numerical precision optimization

        :return: None
        """
        params = self.params
        z, profit = oracle.best_z_for_target(
            self.network('p4'), NodeSet.of([1, 3]), params
        )
        self.assertAlmostEqual(z, self.expected['p4']['z'], places=6)
        self.assertAlmostEqual(profit, self.expected['profit'][2], places=6)

        z, profit = oracle.best_z_for_target(
            self.network('k2'), NodeSet.of([1, 2]), params
        )
        self.assertAlmostEqual(z, 0.07, delta=0.005)
        self.assertAlmostEqual(profit, 3.36, delta=0.01)
        self.assertLess(profit, 8.1)

        z, profit = oracle.best_z_for_target(
            self.network('single'), NodeSet.of([1]), params
        )
        self.assertAlmostEqual(z, 0.9, places=6)
        self.assertAlmostEqual(profit, 8.1, places=6)
        with self.assertRaises(_utils.DomainError):
            oracle.best_z_for_target(self.network('single'), NodeSet(), params)

    def test_brute_force_optimal(self):
        """
        Test the exhaustive scan on the reference networks

        :return: None
        """
        params = self.params
        result = oracle.brute_force_optimal(self.network('p4'), params)
        self.assertEqual(result.best_target, NodeSet.of([1, 3]))
        self.assertTrue(result.is_independent)
        self.assertTrue(result.matches_theorem1)
        self.assertEqual(result.scanned, 16)
        self.assertAlmostEqual(
            result.best_profit, self.expected['profit'][2], places=6
        )

        result = oracle.brute_force_optimal(self.network('k3'), params)
        self.assertEqual(result.best_target, NodeSet.of([1]))
        self.assertAlmostEqual(result.best_profit, 8.1, places=6)
        self.assertTrue(result.matches_theorem1)

        single = oracle.brute_force_optimal(self.network('single'), params)
        self.assertTrue(single.matches_theorem1)
        self.assertAlmostEqual(single.best_z, 0.9, places=6)

        outside = oracle.brute_force_optimal(
            self.network('k2'), contract.ModelParams(z0=0.35, gamma=1.0)
        )
        self.assertFalse(outside.precondition_ok)
        self.assertEqual(outside.scanned, 4)

    def test_capacity(self):
        """
        Test the node cap of the exhaustive scan

        :return: None
        """
        with self.assertRaises(_utils.CapacityError):
            oracle.brute_force_optimal(
                graph_core.Network.from_edges(21, []), self.params
            )
        with self.assertRaises(_utils.CapacityError):
            oracle.brute_force_optimal(
                self.network('p4'), self.params, max_nodes=3
            )

    def test_threads(self):
        """
        Test that the scan does not depend on the number of threads

        :return: None
        """
        g = graph_core.Network.from_networkx(
            nx.gnp_random_graph(12, 0.3, seed=5)
        )
        sequential = oracle.brute_force_optimal(g, self.params)
        threaded = oracle.brute_force_optimal(g, self.params, threads=4)
        self.assertEqual(sequential, threaded)

    def test_atlas_certification(self):
        """
        Test that a maximum independent set wins on every connected
        network with at most 7 nodes, for every combination of prior
        precision 0.05 or 0.1 and data cost 1 or 4

        :return: None
        """
        networks = self.atlas(max_nodes=7)
        self.assertEqual(len(networks), 996)
        start = time.perf_counter()
        for z0, gamma in itertools.product((0.05, 0.1), (1.0, 4.0)):
            params = contract.ModelParams(z0=z0, gamma=gamma)
            for g in networks:
                self.assertTrue(contract.theorem1_precondition(params, g.n))
                result = oracle.brute_force_optimal(g, params)
                self.assertTrue(result.matches_theorem1, (z0, gamma, g))
                self.assertTrue(result.precondition_ok)
                self.assertTrue(
                    math.isclose(
                        result.best_profit,
                        contract.profit_closed_form(
                            graph_core.independence_number(g), params
                        ),
                        rel_tol=1e-6,
                    )
                )
        self.logger.info(
            f'Certified {len(networks)} networks for 4 parameter pairs in'
            f' {time.perf_counter() - start:.1f}s'
        )

    def test_performance(self):
        """
        Test the exhaustive scan on a random 18-node network

        :return: None
        """
        g = graph_core.Network.from_networkx(
            nx.gnp_random_graph(18, 0.3, seed=11)
        )
        start = time.perf_counter()
        result = oracle.brute_force_optimal(g, self.params)
        elapsed = time.perf_counter() - start
        self.logger.info(f'Scanned 2^18 targets in {elapsed:.1f}s')
        self.assertEqual(result.scanned, 1 << 18)
        self.assertTrue(result.is_independent)
        self.assertLess(elapsed, 60)


if __name__ == '__main__':
    unittest.main()
