import io
import logging
import threading
import unittest

import invoke

from netsale.internal import _utils
from test import TestNetsale


class TestUtils(TestNetsale):
    def test_get_logger(self):
        """
        Test that loggers write to standard error with a single handler

        :return: None
        """
        logger = _utils.get_logger('netsale.test_utils', level='warning')
        logger = _utils.get_logger('netsale.test_utils', level='warning')
        self.assertEqual(len(logger.handlers), 1)
        self.assertEqual(logger.level, logging.WARNING)
        self.assertFalse(logger.propagate)

    def test_get_setting(self):
        """
        Test configured values and the fallback to built-in defaults

        :return: None
        """
        self.assertEqual(_utils.get_setting(self.ctx, 'threads'), 1)
        self.assertEqual(_utils.get_setting(self.ctx, 'z0'), 0.1)
        config = _utils.NetsaleConfig(overrides={'samples': 7})
        ctx = invoke.Context(config=config)
        self.assertEqual(_utils.get_setting(ctx, 'samples'), 7)
        # A context built without the netsale configuration
        self.assertEqual(_utils.get_setting(invoke.Context(), 'budget'), 10)

    def test_yaml(self):
        """
        Test parsing and dumping yaml content

        :return: None
        """
        self.assertEqual(self.config['params'], {'z0': 0.1, 'gamma': 1.0})
        document = {'nodes': 3, 'edges': [[1, 2], [2, 3]]}
        self.assertEqual(
            _utils.parse_yaml(_utils.dump_yaml(document)), document
        )
        self.assertEqual(
            _utils.parse_yaml(io.StringIO('nodes: 1\nedges: []\n')),
            {'nodes': 1, 'edges': []},
        )

    def test_round_floats(self):
        """
        Test rounding to significant digits inside nested documents

        :return: None
        """
        rounded = _utils.round_floats(
            {'a': [1 / 3, 2], 'b': {'c': 123456789.987654321}, 'd': True}
        )
        self.assertEqual(
            rounded,
            {'a': [0.333333333, 2], 'b': {'c': 123456790.0}, 'd': True},
        )
        self.assertEqual(_utils.round_floats(float('inf')), float('inf'))
        self.assertEqual(_utils.round_floats((0.5, None)), [0.5, None])

    def test_dump_json(self):
        """
        Test that documents serialize deterministically

        :return: None
        """
        document = {'z': 2 ** 0.5, 'target': (1, 3), 'ok': False}
        text = _utils.dump_json(document)
        self.assertEqual(text, _utils.dump_json(dict(document)))
        self.assertIn('"z": 1.41421356', text)
        self.assertLess(text.index('"z"'), text.index('"target"'))

    def test_format_text(self):
        """
        Test rendering of scalars, nested keys and tables

        :return: None
        """
        text = _utils.format_text(
            {
                'command': 'mis',
                'params': {'z0': 0.1},
                'result': {
                    'sets': [[1, 3], [2, 4]],
                    'truncated': False,
                    'rows': [{'node': 1, 'price': 0.5}, {'node': 12}],
                    'certificate': None,
                },
            }
        )
        self.assertEqual(
            text.splitlines(),
            [
                'command             mis',
                'params.z0           0.1',
                'result.sets         [[1, 3], [2, 4]]',
                'result.truncated    false',
                'result.certificate  -',
                '',
                'result.rows',
                'node  price',
                '1     0.5',
                '12',
            ],
        )

    def test_map_in_threads(self):
        """
        Test ordering and failure reporting of threaded work

        :return: None
        """
        items = list(range(20))
        self.assertEqual(
            _utils.map_in_threads(lambda x: x * x, items, threads=4),
            [x * x for x in items],
        )
        self.assertEqual(_utils.map_in_threads(str, [], threads=4), [])

        used = set()

        def record(x):
            used.add(threading.get_ident())
            return x

        self.assertEqual(
            _utils.map_in_threads(record, items, threads=1), items
        )
        self.assertEqual(used, {threading.get_ident()})

        def fail_on_odd(x):
            if x % 2:
                raise _utils.DomainError(f'odd item {x}')
            return x

        with self.assertLogs('netsale.test_utils', level='ERROR'):
            with self.assertRaises(_utils.DomainError) as raised:
                _utils.map_in_threads(
                    fail_on_odd,
                    items,
                    threads=4,
                    logger=logging.getLogger('netsale.test_utils'),
                )
        self.assertEqual(str(raised.exception), 'odd item 1')


if __name__ == '__main__':
    unittest.main()
