import unittest

from netsale import contract, graph_core, interventions
from netsale.internal import _utils
from test import TestNetsale

NodeSet = graph_core.NodeSet
Kind = interventions.InterventionKind


class TestInterventions(TestNetsale):
    def test_evaluate_link_removal(self):
        """
        Test the profit effect of removing one link

        :return: None
        """
        params = self.params
        outcome = interventions.evaluate_link_removal(
            self.network('k3'), 1, 2, params
        )
        self.assertEqual((outcome.alpha_before, outcome.alpha_after), (1, 2))
        self.assertAlmostEqual(
            outcome.profit_delta, self.expected['k3_removal_delta'], places=9
        )
        self.assertAlmostEqual(
            outcome.cs_delta,
            -20 - 1 / (0.1 + 2 * (2 ** 0.5 - 0.1)) + 12,
            places=9,
        )

        outcome = interventions.evaluate_link_removal(
            self.network('p4'), 3, 2, params
        )
        self.assertEqual(outcome.operands, (2, 3))
        self.assertEqual((outcome.alpha_before, outcome.alpha_after), (2, 2))
        self.assertEqual(outcome.profit_delta, 0.0)

        outcome = interventions.evaluate_link_removal(
            self.network('k2'), 1, 2, params
        )
        self.assertAlmostEqual(
            outcome.profit_delta, self.expected['k3_removal_delta'], places=9
        )
        with self.assertRaises(_utils.DomainError):
            interventions.evaluate_link_removal(
                self.network('p4'), 1, 3, params
            )

    def test_evaluate_node_isolation(self):
        """
        Test the profit effect of cutting every link of one buyer

        :return: None
        """
        params = self.params
        outcome = interventions.evaluate_node_isolation(
            self.network('star4'), 1, params
        )
        self.assertEqual((outcome.alpha_before, outcome.alpha_after), (3, 4))
        self.assertAlmostEqual(
            outcome.profit_delta,
            self.expected['star4_isolation_delta'],
            places=9,
        )
        outcome = interventions.evaluate_node_isolation(
            self.network('k3'), 3, params
        )
        self.assertAlmostEqual(
            outcome.profit_delta, self.expected['k3_removal_delta'], places=9
        )
        outcome = interventions.evaluate_node_isolation(
            self.network('edgeless3'), 2, params
        )
        self.assertEqual(outcome.profit_delta, 0.0)
        self.assertEqual(outcome.cs_delta, 0.0)
        self.assertEqual(outcome.to_dict()['node'], 2)

    def test_profit_delta_identity(self):
        """
        Test that removing links never shrinks independent sets and that
        profit changes follow the closed form, on every network with at
        most 7 nodes

        :return: None
        """
        params = self.params
        for g in self.atlas(max_nodes=7):
            alpha = graph_core.independence_number(g)
            for u, v in g.edges():
                after = graph_core.independence_number(g.without_edge(u, v))
                self.assertGreaterEqual(after, alpha)
                self.assertEqual(
                    contract.optimal_profit(after, params)
                    - contract.optimal_profit(alpha, params),
                    contract.profit_closed_form(after, params)
                    - contract.profit_closed_form(alpha, params),
                )

    def test_scan_interventions(self):
        """
        Test the ranking of single interventions

        :return: None
        """
        params = self.params
        ranking = interventions.scan_interventions(
            self.network('k3'), params, budget=10
        )
        self.assertEqual(len(ranking), 6)
        self.assertEqual(ranking[0].kind, Kind.REMOVE_LINK)
        self.assertEqual(ranking[0].operands, (1, 2))
        self.assertEqual(
            [str(o) for o in ranking],
            [
                'remove-link(1,2)',
                'remove-link(1,3)',
                'remove-link(2,3)',
                'isolate-node(1)',
                'isolate-node(2)',
                'isolate-node(3)',
            ],
        )
        for outcome in ranking:
            self.assertAlmostEqual(
                outcome.profit_delta,
                self.expected['k3_removal_delta'],
                places=9,
            )

        self.assertEqual(
            interventions.scan_interventions(
                self.network('edgeless3'), params, budget=5
            ),
            (),
        )

        ranking = interventions.scan_interventions(
            self.network('p4'), params, budget=10
        )
        top = ranking[0].profit_delta
        self.assertAlmostEqual(
            top, self.expected['p4_isolation_delta'], places=9
        )
        leaders = [str(o) for o in ranking if o.profit_delta == top]
        self.assertIn('isolate-node(2)', leaders)
        self.assertIn('isolate-node(3)', leaders)
        self.assertEqual(str(ranking[-1]), 'remove-link(2,3)')
        deltas = [o.profit_delta for o in ranking]
        self.assertEqual(deltas, sorted(deltas, reverse=True))

        shortlist = interventions.scan_interventions(
            self.network('p4'), params, budget=2
        )
        self.assertEqual(shortlist, ranking[:2])
        threaded = interventions.scan_interventions(
            self.network('c6'), params, budget=20, threads=3
        )
        self.assertEqual(
            threaded,
            interventions.scan_interventions(
                self.network('c6'), params, budget=20
            ),
        )
        with self.assertRaises(_utils.DomainError):
            interventions.scan_interventions(
                self.network('p4'), params, budget=0
            )

    def test_pareto_efficient_check(self):
        """
        Test the core-periphery certificate

        :return: None
        """
        params = self.params
        check = interventions.pareto_efficient_check(
            self.network('star4'), params
        )
        self.assertTrue(check.core_periphery)
        self.assertTrue(check.pareto_efficient)
        self.assertEqual(check.certificate.core, NodeSet.of([1]))
        self.assertEqual(check.certificate.periphery, NodeSet.of([2, 3, 4]))
        self.assertEqual(check.certificate.free_rider_links, {1: 3})
        self.assertAlmostEqual(
            check.certificate.free_rider_utilities[1],
            -1 / (0.1 + 3 * (3 ** 0.5 - 0.1)),
            places=12,
        )

        check = interventions.pareto_efficient_check(
            self.network('core_periphery'), params
        )
        self.assertTrue(check.core_periphery)
        self.assertEqual(check.certificate.core, NodeSet.of([1, 2]))

        check = interventions.pareto_efficient_check(
            self.network('p4'), params
        )
        self.assertFalse(check.core_periphery)
        self.assertIsNone(check.certificate)
        self.assertIsNone(check.pareto_efficient)
        self.assertIsNone(check.to_dict()['certificate'])

    def test_core_periphery_family(self):
        """
        Test every core-periphery network with 1 to 5 periphery buyers
        and 1 to 4 core buyers

        :return: None
        """
        for m in range(1, 6):
            for core_size in range(1, 5):
                n = m + core_size
                edges = [
                    (u, v)
                    for u in range(m + 1, n + 1)
                    for v in range(1, u)
                ]
                g = graph_core.Network.from_edges(n, edges)
                check = interventions.pareto_efficient_check(g, self.params)
                self.assertTrue(check.core_periphery)
                certificate = check.certificate
                if m > 1:
                    self.assertEqual(
                        certificate.periphery, NodeSet.of(range(1, m + 1))
                    )
                for links in certificate.free_rider_links.values():
                    self.assertEqual(links, certificate.m)

    def test_exhaustive_pareto_check(self):
        """
        Test the search over every network on the same buyers

        :return: None
        """
        params = self.params
        for name in ('star4', 'k3'):
            check = interventions.pareto_efficient_check(
                self.network(name), params, exhaustive=True
            )
            self.assertTrue(check.exhaustive)
            self.assertIsNone(check.improvement)
            self.assertTrue(check.pareto_efficient)

        p4 = self.network('p4')
        check = interventions.pareto_efficient_check(
            p4, params, exhaustive=True
        )
        self.assertFalse(check.pareto_efficient)
        self.assertGreater(check.graphs_checked, 0)
        self.assertLessEqual(check.graphs_checked, 63)
        improvement = check.improvement
        self.assertNotEqual(improvement.network, p4)
        self.assertGreaterEqual(
            improvement.seller_profit,
            contract.optimal_profit(2, params) - 1e-12,
        )
        for node, utility in improvement.utilities.items():
            self.assertGreaterEqual(
                utility, check.baseline_utilities[node] - 1e-12
            )

        with self.assertRaises(_utils.CapacityError):
            interventions.pareto_efficient_check(
                graph_core.Network.from_edges(7, []), params, exhaustive=True
            )


if __name__ == '__main__':
    unittest.main()
