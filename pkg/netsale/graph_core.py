"""
Buyer networks, graph file formats and independent-set machinery

Nodes are 1-based in every public function. Internally node i is bit
i - 1 of a Python integer, so node sets of any size are exact bitmasks
(for n > 64 the integers simply grow past a machine word).
"""
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import networkx as nx
import numpy as np
from ruamel.yaml import YAMLError

from netsale.internal import _utils

_LOGGER = logging.getLogger('netsale.graph_core')
DEFAULT_ENUMERATION_CAP = 100000
FORMATS = ('edge-list', 'json', 'yaml', 'dimacs')
_SUFFIX_FORMATS = {
    '.json': 'json',
    '.yml': 'yaml',
    '.yaml': 'yaml',
    '.dimacs': 'dimacs',
    '.col': 'dimacs',
}


@dataclass(frozen=True, order=True)
class NodeSet:
    """
    A set of buyers stored as a bitmask (node i is bit i - 1)

    Ordering follows the integer value of the mask, which is the
    tie-break order used throughout netsale.
    """

    mask: int = 0

    @classmethod
    def of(cls, nodes):
        """
        Build a NodeSet from 1-based node identifiers

        :param nodes: An iterable of node identifiers (>= 1)
        :return: A NodeSet
        """
        mask = 0
        for node in nodes:
            node = int(node)
            if node < 1:
                raise _utils.DomainError(f'Node {node} is not a valid node id')
            mask |= 1 << (node - 1)
        return cls(mask)

    @property
    def nodes(self):
        return tuple(i + 1 for i in _bits(self.mask))

    def __iter__(self):
        return iter(self.nodes)

    def __len__(self):
        return self.mask.bit_count()

    def __contains__(self, node):
        return node >= 1 and bool(self.mask >> (node - 1) & 1)

    def __str__(self):
        return '{' + ','.join(str(node) for node in self.nodes) + '}'


@dataclass(frozen=True)
class MisEnumeration:
    """
    Maximum independent sets in ascending bitmask order
    """

    sets: tuple
    alpha: int
    truncated: bool

    def __iter__(self):
        return iter(self.sets)

    def __len__(self):
        return len(self.sets)


class Network:
    """
    A simple undirected graph of buyers 1..n
    """

    __slots__ = ('_n', '_adjacency')

    def __init__(self, n, adjacency):
        """
        Initialize a Network object

        :param n: Number of buyers (>= 1)
        :param adjacency: A sequence of n integer bitmasks, where bit j
            of adjacency[i] is set when buyers i + 1 and j + 1 are linked
        """
        if n < 1:
            raise _utils.DomainError('A network needs at least one node')
        adjacency = tuple(int(a) for a in adjacency)
        if len(adjacency) != n:
            raise _utils.DomainError(
                f'Expected {n} adjacency rows, got {len(adjacency)}'
            )
        full = (1 << n) - 1
        for i, row in enumerate(adjacency):
            if row & ~full:
                raise _utils.DomainError(f'Node {i + 1} links outside 1..{n}')
            if row >> i & 1:
                raise _utils.DomainError(f'Self-loop on node {i + 1}')
            for j in _bits(row):
                if not adjacency[j] >> i & 1:
                    raise _utils.DomainError(
                        f'Asymmetric link between {i + 1} and {j + 1}'
                    )
        self._n = n
        self._adjacency = adjacency

    @classmethod
    def from_edges(cls, n, edges):
        """
        Build a Network from a list of 1-based edges

        Duplicate edges are merged.

        :param n: Number of buyers
        :param edges: An iterable of (u, v) pairs
        :return: A Network
        """
        adjacency = [0] * n
        for u, v in edges:
            for node in (u, v):
                if not 1 <= node <= n:
                    raise _utils.DomainError(
                        f'Node {node} is out of range 1..{n}'
                    )
            if u == v:
                raise _utils.DomainError(f'Self-loop on node {u}')
            adjacency[u - 1] |= 1 << (v - 1)
            adjacency[v - 1] |= 1 << (u - 1)
        return cls(n, adjacency)

    @classmethod
    def from_networkx(cls, graph):
        """
        Convert a networkx graph, relabelling its nodes 1..n in sorted
        order

        :param graph: A networkx.Graph
        :return: A Network
        """
        labels = {node: i + 1 for i, node in enumerate(sorted(graph.nodes))}
        return cls.from_edges(
            len(labels), [(labels[u], labels[v]) for u, v in graph.edges]
        )

    def to_networkx(self):
        graph = nx.Graph()
        graph.add_nodes_from(range(1, self._n + 1))
        graph.add_edges_from(self.edges())
        return graph

    @property
    def n(self):
        return self._n

    @property
    def adjacency(self):
        return self._adjacency

    @property
    def full_mask(self):
        return (1 << self._n) - 1

    def neighbors(self, node):
        return NodeSet(self._adjacency[self._index(node)])

    def degree(self, node):
        return self._adjacency[self._index(node)].bit_count()

    @property
    def degrees(self):
        return tuple(row.bit_count() for row in self._adjacency)

    def has_edge(self, u, v):
        return bool(self._adjacency[self._index(u)] >> self._index(v) & 1)

    def edges(self):
        """
        :return: A list of (u, v) edges with u < v, sorted
        """
        return [
            (i + 1, j + 1)
            for i, row in enumerate(self._adjacency)
            for j in _bits(row)
            if j > i
        ]

    def edge_count(self):
        return sum(self.degrees) // 2

    def without_edge(self, u, v):
        """
        :return: A copy of the network without the link (u, v)
        """
        if not self.has_edge(u, v):
            raise _utils.DomainError(f'({u}, {v}) is not an edge')
        adjacency = list(self._adjacency)
        adjacency[u - 1] &= ~(1 << (v - 1))
        adjacency[v - 1] &= ~(1 << (u - 1))
        return Network(self._n, adjacency)

    def isolated(self, node):
        """
        :return: A copy of the network where node keeps no link
        """
        index = self._index(node)
        adjacency = [row & ~(1 << index) for row in self._adjacency]
        adjacency[index] = 0
        return Network(self._n, adjacency)

    def check_node_set(self, node_set):
        if node_set.mask & ~self.full_mask:
            raise _utils.DomainError(
                f'Node set {node_set} is not within 1..{self._n}'
            )
        return node_set

    def _index(self, node):
        if not 1 <= node <= self._n:
            raise _utils.DomainError(
                f'Node {node} is out of range 1..{self._n}'
            )
        return node - 1

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self._n == other._n and self._adjacency == other._adjacency

    def __hash__(self):
        return hash((self._n, self._adjacency))

    def __repr__(self):
        return f'Network(n={self._n}, edges={self.edges()})'


def degree_profile(g):
    """
    :param g: A Network
    :return: The degree n_i of every node, in node order
    """
    return g.degrees


def read_network(path, format=None):
    """
    Read a graph file

    :param path: Location of the graph file
    :param format: One of FORMATS; inferred from the file suffix if None
    :return: A Network
    """
    path = Path(path)
    if format is None:
        format = _SUFFIX_FORMATS.get(path.suffix.lower(), 'edge-list')
    try:
        source = path.read_bytes()
    except OSError as exc:
        raise _utils.GraphParseError(f'Cannot read {path}: {exc}') from exc
    g = parse_network(source, format=format)
    _LOGGER.debug(f'Read {g} from {path} ({format})')
    return g


def parse_network(source, format='edge-list'):
    """
    Parse a graph from bytes, text or a stream

    :param source: bytes, str, or a binary/text stream
    :param format: One of FORMATS
    :return: A Network
    """
    if hasattr(source, 'read'):
        source = source.read()
    if isinstance(source, bytes):
        try:
            source = source.decode('utf-8')
        except UnicodeDecodeError as exc:
            raise _utils.GraphParseError(
                f'offset {exc.start}: source is not valid UTF-8'
            ) from exc
    if format == 'edge-list':
        return _parse_edge_list(source)
    elif format == 'dimacs':
        return _parse_dimacs(source)
    elif format == 'json':
        try:
            document = json.loads(source)
        except json.JSONDecodeError as exc:
            raise _utils.GraphParseError(
                f'line {exc.lineno}, column {exc.colno}: {exc.msg}'
            ) from exc
        return _network_from_document(document)
    elif format == 'yaml':
        try:
            document = _utils.parse_yaml(source)
        except YAMLError as exc:
            raise _utils.GraphParseError(str(exc)) from exc
        return _network_from_document(document)
    raise _utils.DomainError(
        f'Unknown graph format "{format}", expected one of {list(FORMATS)}'
    )


def emit_network(g, format='json'):
    """
    Serialize a network in one of the ingestion formats

    :param g: A Network
    :param format: One of FORMATS
    :return: A string that parse_network reads back to g
    """
    edges = g.edges()
    if format == 'json':
        return json.dumps({'nodes': g.n, 'edges': [list(e) for e in edges]})
    elif format == 'yaml':
        return _utils.dump_yaml(
            {'nodes': g.n, 'edges': [list(e) for e in edges]}
        )
    elif format == 'edge-list':
        return '\n'.join([f'n {g.n}'] + [f'{u} {v}' for u, v in edges]) + '\n'
    elif format == 'dimacs':
        lines = [f'p edge {g.n} {len(edges)}']
        lines.extend(f'e {u} {v}' for u, v in edges)
        return '\n'.join(lines) + '\n'
    raise _utils.DomainError(
        f'Unknown graph format "{format}", expected one of {list(FORMATS)}'
    )


def _parse_edge_list(text):
    n = None
    edges = list()
    seen = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split('#', 1)[0].strip()
        if not content:
            continue
        tokens = content.split()
        if tokens[0] == 'n':
            if n is not None or edges:
                raise _utils.GraphParseError(
                    f'line {lineno}: the "n <count>" header must come first'
                )
            n = _parse_int(tokens[1:], 1, lineno)[0]
            if n < 1:
                raise _utils.GraphParseError(
                    f'line {lineno}: node count must be at least 1'
                )
            continue
        u, v = _parse_int(tokens, 2, lineno)
        _check_edge(u, v, n, f'line {lineno}')
        edges.append((u, v))
        seen.update((u, v))
    if n is None:
        if not edges:
            raise _utils.GraphParseError('line 1: no header and no edges')
        n = max(seen)
        missing = sorted(set(range(1, n + 1)) - seen)
        if missing:
            raise _utils.GraphParseError(
                f'line 1: node ids are not contiguous (missing {missing});'
                f' add an "n <count>" header for isolated nodes'
            )
    return Network.from_edges(n, edges)


def _parse_dimacs(text):
    n = None
    edges = list()
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens or tokens[0] == 'c':
            continue
        if tokens[0] == 'p':
            if n is not None or len(tokens) != 4 or tokens[1] != 'edge':
                raise _utils.GraphParseError(
                    f'line {lineno}: expected a single "p edge <n> <m>" line'
                )
            n = _parse_int(tokens[2:3], 1, lineno)[0]
        elif tokens[0] == 'e':
            if n is None:
                raise _utils.GraphParseError(
                    f'line {lineno}: edge before the "p edge" line'
                )
            u, v = _parse_int(tokens[1:], 2, lineno)
            _check_edge(u, v, n, f'line {lineno}')
            edges.append((u, v))
        else:
            raise _utils.GraphParseError(
                f'line {lineno}: unknown line type "{tokens[0]}"'
            )
    if n is None or n < 1:
        raise _utils.GraphParseError('line 1: missing "p edge <n> <m>" line')
    return Network.from_edges(n, edges)


def _network_from_document(document):
    if not isinstance(document, dict):
        raise _utils.GraphParseError(
            'offset 0: expected an object with "nodes" and "edges"'
        )
    n = document.get('nodes')
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise _utils.GraphParseError('"nodes" must be a positive integer')
    raw_edges = document.get('edges', [])
    if not isinstance(raw_edges, list):
        raise _utils.GraphParseError('"edges" must be an array')
    edges = list()
    for offset, edge in enumerate(raw_edges):
        where = f'edges[{offset}]'
        if (
            not isinstance(edge, list)
            or len(edge) != 2
            or not all(
                isinstance(x, int) and not isinstance(x, bool) for x in edge
            )
        ):
            raise _utils.GraphParseError(
                f'{where}: expected a pair of integer node ids'
            )
        _check_edge(edge[0], edge[1], n, where)
        edges.append((edge[0], edge[1]))
    return Network.from_edges(n, edges)


def _parse_int(tokens, count, lineno):
    if len(tokens) != count:
        raise _utils.GraphParseError(
            f'line {lineno}: expected {count} integer(s), got {tokens}'
        )
    try:
        return [int(token) for token in tokens]
    except ValueError:
        raise _utils.GraphParseError(
            f'line {lineno}: expected integers, got {tokens}'
        ) from None


def _check_edge(u, v, n, where):
    if u == v:
        raise _utils.GraphParseError(f'{where}: self-loop on node {u}')
    for node in (u, v):
        if node < 1 or (n is not None and node > n):
            raise _utils.GraphParseError(
                f'{where}: node {node} is out of range'
                + (f' 1..{n}' if n is not None else '')
            )


def is_independent_set(g, s):
    """
    Check that no two members of s are linked

    :param g: A Network
    :param s: A NodeSet within the nodes of g
    :return: True if s is an independent set of g
    """
    g.check_node_set(s)
    return all(not g.adjacency[i] & s.mask for i in _bits(s.mask))


def maximum_independent_set(g):
    """
    Find the maximum independent set of g with the smallest bitmask

    Nodes are decided from the highest id down: a node is left out
    whenever the remaining nodes still hold an independent set of the
    required size.

    :param g: A Network
    :return: A NodeSet of cardinality alpha(g)
    """
    solver = _IndependenceSolver(g.adjacency)
    remaining = g.full_mask
    need = solver.alpha(remaining)
    chosen = 0
    for v in reversed(range(g.n)):
        if need == 0:
            break
        if not remaining >> v & 1:
            continue
        without = remaining & ~(1 << v)
        if solver.alpha(without) >= need:
            remaining = without
        else:
            chosen |= 1 << v
            remaining &= ~solver.closed[v]
            need -= 1
    _LOGGER.debug(
        f'alpha={chosen.bit_count()}, {len(solver.cache)} cached states'
    )
    return NodeSet(chosen)


def independence_number(g):
    """
    :param g: A Network
    :return: alpha(g), the size of a maximum independent set
    """
    return _IndependenceSolver(g.adjacency).alpha(g.full_mask)


def enumerate_maximum_independent_sets(g, cap=DEFAULT_ENUMERATION_CAP):
    """
    List every maximum independent set in ascending bitmask order

    :param g: A Network
    :param cap: Maximum number of sets to return (>= 1)
    :return: A MisEnumeration, truncated=True when more than cap sets
        exist
    """
    if cap < 1:
        raise _utils.DomainError('The enumeration cap must be at least 1')
    solver = _IndependenceSolver(g.adjacency)
    alpha = solver.alpha(g.full_mask)
    found = list()

    def visit(remaining, chosen, need):
        if need == 0:
            if len(found) == cap:
                raise _Truncated
            found.append(NodeSet(chosen))
            return
        top = remaining.bit_length() - 1
        # Leaving the highest node out first yields smaller masks first
        without = remaining & ~(1 << top)
        if solver.alpha(without) >= need:
            visit(without, chosen, need)
        within = remaining & ~solver.closed[top]
        if solver.alpha(within) >= need - 1:
            visit(within, chosen | 1 << top, need - 1)

    truncated = False
    try:
        visit(g.full_mask, 0, alpha)
    except _Truncated:
        truncated = True
        _LOGGER.warning(
            f'More than {cap} maximum independent sets; list truncated'
        )
    return MisEnumeration(sets=tuple(found), alpha=alpha, truncated=truncated)


def caro_wei_bound(g):
    """
    :param g: A Network
    :return: The Caro-Wei lower bound sum(1 / (n_i + 1)) on alpha(g)
    """
    return math.fsum(1.0 / (d + 1) for d in g.degrees)


def permutation_independent_set(g, tau):
    """
    Collect the nodes ranked before all of their neighbors

    :param g: A Network
    :param tau: A permutation of 1..n, either a sequence where tau[i - 1]
        is the rank of node i or a mapping node -> rank
    :return: The NodeSet {i : tau(i) < tau(j) for every neighbor j}
    """
    ranks = _permutation_ranks(g, tau)
    mask = 0
    for i, row in enumerate(g.adjacency):
        if all(ranks[i] < ranks[j] for j in _bits(row)):
            mask |= 1 << i
    return NodeSet(mask)


def caro_wei_monte_carlo(g, draws, seed=0):
    """
    Estimate the mean size of permutation_independent_set over uniformly
    random permutations

    :param g: A Network
    :param draws: Number of random permutations
    :param seed: Seed of the numpy generator
    :return: A tuple (mean, standard error)
    """
    if draws < 2:
        raise _utils.DomainError('At least two draws are needed')
    rng = np.random.default_rng(seed)
    ranks = rng.permuted(np.tile(np.arange(g.n), (draws, 1)), axis=1)
    sizes = local_minimum_counts(g, ranks)
    mean = float(sizes.mean())
    se = float(sizes.std(ddof=1) / math.sqrt(draws))
    return mean, se


def local_minimum_counts(g, ranks):
    """
    Vectorized size of permutation_independent_set for many permutations

    :param g: A Network
    :param ranks: An integer array of shape (draws, n) where
        ranks[k, i - 1] is the rank of node i in draw k
    :return: An integer array of shape (draws,)
    """
    ranks = np.asarray(ranks)
    selected = np.ones(ranks.shape, dtype=bool)
    for i, row in enumerate(g.adjacency):
        neighbors = list(_bits(row))
        if neighbors:
            selected[:, i] = ranks[:, i] < ranks[:, neighbors].min(axis=1)
    return selected.sum(axis=1)


def is_union_of_cliques(g):
    """
    :param g: A Network
    :return: True if every connected component of g is complete
    """
    closed = [row | 1 << i for i, row in enumerate(g.adjacency)]
    # Within a complete component all closed neighborhoods coincide
    return all(
        closed[j] == closed[i]
        for i, row in enumerate(g.adjacency)
        for j in _bits(row)
    )


def is_core_periphery(g):
    """
    Split g into a core of nodes linked to everybody and an independent
    periphery

    Every node of degree n - 1 is a core candidate. When all nodes are
    candidates (complete graphs) the periphery keeps only the highest
    node, so the core is the smallest mask of minimum size.

    :param g: A Network
    :return: A tuple (core, periphery) of NodeSets, or None
    """
    full = g.full_mask
    universal = 0
    for i, row in enumerate(g.adjacency):
        if row == full & ~(1 << i):
            universal |= 1 << i
    if universal == full:
        periphery = NodeSet(1 << (g.n - 1))
        return NodeSet(full & ~periphery.mask), periphery
    periphery = NodeSet(full & ~universal)
    if not is_independent_set(g, periphery):
        return None
    return NodeSet(universal), periphery


def _permutation_ranks(g, tau):
    if isinstance(tau, dict):
        try:
            ranks = [tau[node] for node in range(1, g.n + 1)]
        except KeyError as exc:
            raise _utils.DomainError(
                f'tau has no rank for node {exc}'
            ) from None
    else:
        ranks = list(tau)
    if sorted(ranks) != list(range(1, g.n + 1)):
        raise _utils.DomainError(f'tau is not a bijection on 1..{g.n}')
    return ranks


class _Truncated(Exception):
    pass


class _IndependenceSolver:
    """
    Exact independence number of induced subgraphs, by branch and bound
    with memoization on the remaining-node bitmask
    """

    def __init__(self, adjacency):
        self.adjacency = adjacency
        self.closed = [row | 1 << i for i, row in enumerate(adjacency)]
        self.cache = {0: 0}

    def alpha(self, mask):
        """
        :param mask: Bitmask of the nodes inducing the subgraph
        :return: The independence number of the induced subgraph
        """
        result = self.cache.get(mask)
        if result is None:
            result = self._solve(mask)
            self.cache[mask] = result
        return result

    def _solve(self, mask):
        adjacency = self.adjacency
        count = 0
        # Nodes of degree 0 or 1 belong to some maximum independent set
        reduced = True
        while reduced:
            reduced = False
            for v in _bits(mask):
                if mask >> v & 1 and (adjacency[v] & mask).bit_count() <= 1:
                    mask &= ~self.closed[v]
                    count += 1
                    reduced = True
        if not mask:
            return count
        components = _components(mask, adjacency)
        if len(components) > 1:
            return count + sum(self.alpha(c) for c in components)
        lower = self._greedy(mask)
        if lower == self._upper_bound(mask):
            return count + lower
        # Branch on a highest-degree node: take it or drop it
        v = max(_bits(mask), key=lambda u: (adjacency[u] & mask).bit_count())
        best = max(lower, 1 + self.alpha(mask & ~self.closed[v]))
        without = mask & ~(1 << v)
        if self._upper_bound(without) > best:
            best = max(best, self.alpha(without))
        return count + best

    def _greedy(self, mask):
        adjacency = self.adjacency
        size = 0
        while mask:
            v = min(
                _bits(mask), key=lambda u: (adjacency[u] & mask).bit_count()
            )
            mask &= ~self.closed[v]
            size += 1
        return size

    def _upper_bound(self, mask):
        adjacency = self.adjacency
        size = mask.bit_count()
        degrees = [(adjacency[v] & mask).bit_count() for v in _bits(mask)]
        max_degree = max(degrees, default=0)
        if max_degree == 0:
            return size
        # A vertex cover needs at least edges / max_degree nodes
        bound = size - math.ceil(sum(degrees) / 2 / max_degree)
        # Greedy clique cover
        cliques = 0
        remaining = mask
        while remaining:
            low = remaining & -remaining
            remaining ^= low
            candidates = adjacency[low.bit_length() - 1] & remaining
            while candidates:
                pick = candidates & -candidates
                remaining ^= pick
                candidates &= adjacency[pick.bit_length() - 1]
            cliques += 1
        return min(bound, cliques)


def _components(mask, adjacency):
    components = list()
    while mask:
        component = frontier = mask & -mask
        while frontier:
            reached = 0
            for v in _bits(frontier):
                reached |= adjacency[v]
            frontier = reached & mask & ~component
            component |= frontier
        components.append(component)
        mask &= ~component
    return components


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low
