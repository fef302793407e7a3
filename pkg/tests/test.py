import sys
import unittest
from pathlib import Path

import invoke
import networkx as nx

from netsale import contract, graph_core
from netsale.internal import _utils

PARENT_DIR = Path(__file__).parent


class TestNetsale(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        """
        Overrides unittest.TestCase.setUpClass

        :return: None
        """
        cls.logger = _utils.get_logger('netsale', level='DEBUG')
        cls.config_path = Path(PARENT_DIR, 'test_config.yml')
        cls.config = _utils.parse_yaml(cls.config_path)
        cls.graphs_dir = Path(PARENT_DIR, cls.config['graphs_dir'])
        cls.expected = cls.config['expected']
        cls.params = contract.ModelParams(**cls.config['params'])
        cls.ctx = invoke.Context(config=_utils.NetsaleConfig())
        cls.networks = {
            name: graph_core.Network.from_edges(doc['nodes'], doc['edges'])
            for name, doc in cls.config['networks'].items()
        }

    def network(self, name):
        return self.networks[name]

    def graph_path(self, name):
        return Path(self.graphs_dir, name)

    @staticmethod
    def atlas(max_nodes=7, connected=True):
        """
        Every graph on 1..max_nodes nodes, up to isomorphism

        :param max_nodes: Largest number of nodes (at most 7)
        :param connected: Keep only connected graphs
        :return: A list of Networks
        """
        networks = list()
        for graph in nx.graph_atlas_g():
            n = graph.number_of_nodes()
            if n == 0 or n > max_nodes:
                continue
            if connected and not nx.is_connected(graph):
                continue
            networks.append(graph_core.Network.from_networkx(graph))
        return networks

    @staticmethod
    def random_networks(n, count=10, p=0.3, seed=0):
        """
        :param n: Number of nodes
        :param count: Number of networks
        :param p: Edge probability
        :param seed: Seed of the first network; the others follow it
        :return: A list of random Networks
        """
        return [
            graph_core.Network.from_networkx(
                nx.gnp_random_graph(n, p, seed=seed + k)
            )
            for k in range(count)
        ]

    def small_networks(self):
        """
        :return: Every network on at most 7 nodes and random ones on 8
        """
        return self.atlas(max_nodes=7, connected=False) + [
            g
            for p in (0.2, 0.4, 0.6)
            for g in self.random_networks(8, count=10, p=p)
        ]

    @staticmethod
    def complete(n):
        return graph_core.Network.from_networkx(nx.complete_graph(n))

    @staticmethod
    def star(n):
        """
        :return: A star with center 1 and leaves 2..n
        """
        edges = [(1, v) for v in range(2, n + 1)]
        return graph_core.Network.from_edges(n, edges)

    @staticmethod
    def cycle(n):
        return graph_core.Network.from_networkx(nx.cycle_graph(n))


if __name__ == '__main__':
    loader = unittest.TestLoader()
    suite = loader.discover(PARENT_DIR)
    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)
    sys.exit(not result.wasSuccessful())
