import io
import json
import logging
import math
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor, as_completed

from invoke import Config
from ruamel.yaml import YAML

DEFAULT_SETTINGS = {
    'z0': 0.1,
    'gamma': 1.0,
    'threads': 1,
    'cap': 100000,
    'seed': 0,
    'samples': 100000,
    'budget': 10,
    'oracle_max_nodes': 20,
    'pareto_max_nodes': 6,
}
FLOAT_DIGITS = 9  # Significant digits of every emitted float
_PROGRESS_PADDING = 9  # Character padding to align progress logs


class NetsaleError(Exception):
    """
    Base class of every error raised by netsale
    """


class GraphParseError(NetsaleError, ValueError):
    """
    A graph source does not follow its declared format
    """


class DomainError(NetsaleError, ValueError):
    """
    An argument lies outside the domain of an operation
    """


class TrivialMarketError(DomainError):
    """
    The seller's optimal data precision is not positive
    """


class CapacityError(NetsaleError):
    """
    A problem exceeds a configured size cap
    """


class NetsaleConfig(Config):
    """
    invoke configuration for netsale

    Files are looked up as netsale.yaml (system, user, project) and
    environment variables use the NETSALE_ prefix, e.g. NETSALE_THREADS.
    """

    prefix = 'netsale'

    @staticmethod
    def global_defaults():
        defaults = Config.global_defaults()
        defaults.update(DEFAULT_SETTINGS)
        return defaults


def get_logger(name, level='INFO'):
    """
    Create a logger

    :param name: The name of the logger to create
    :param level: One of Python's standard logging levels
        (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    :return: A logging.Logger object
    """
    logger = logging.getLogger(name)
    if logger.hasHandlers():
        logger.handlers.clear()
    # stdout carries the result document
    handler = logging.StreamHandler(stream=sys.stderr)
    formatter = logging.Formatter(
        '{name} | {levelname:^8} | {message}', style='{'
    )
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.setLevel(level.upper())
    logger.propagate = False
    return logger


def get_setting(ctx, key):
    """
    Read a netsale setting from an invoke context, falling back to the
    built-in default when the context was not created by the netsale
    program

    :param ctx: An Invoke context object
    :param key: One of the keys of DEFAULT_SETTINGS
    :return: The configured value
    """
    value = ctx.config.get(key)
    if value is None:
        return DEFAULT_SETTINGS[key]
    return value


def parse_yaml(source):
    """
    Parse yaml content

    :param source: A path-like location, a text stream, or a string of
        yaml content
    :return: The contents of the yaml document
    """
    yaml = YAML(typ='safe')
    if hasattr(source, 'read') or isinstance(source, str):
        return yaml.load(source)
    with open(source, 'r', encoding='utf-8') as stream:
        return yaml.load(stream)


def dump_yaml(data):
    """
    Serialize an object to a yaml string

    :param data: The object to serialize
    :return: A yaml string
    """
    yaml = YAML(typ='safe')
    yaml.default_flow_style = None
    stream = io.StringIO()
    yaml.dump(data, stream)
    return stream.getvalue()


def map_in_threads(func, items, threads=1, logger=None, label='Chunk'):
    """
    Apply func to every item, using up to `threads` concurrent threads,
    and return the results in submission order

    :param func: A callable taking one item
    :param items: A sequence of items
    :param threads: Maximum number of concurrent threads
    :param logger: A logging.Logger object
    :param label: A word used in progress logs
    :return: A list with func(item) for every item, in order
    """
    if not logger:
        logger = get_logger('netsale')
    items = list(items)
    total = len(items)
    if threads <= 1 or total <= 1:
        return [func(item) for item in items]
    logger.debug(
        f'{"[START]":>{_PROGRESS_PADDING}}'
        f' {total} work items on {threads} threads'
    )
    with ThreadPoolExecutor(max_workers=threads) as executor:
        futures = {
            executor.submit(func, item): i for i, item in enumerate(items)
        }
        failures = 0
        for future in as_completed(futures):
            progress = f'{label} {futures[future] + 1} of {total}'
            if future.exception() is not None:
                logger.error(f'{"[FAILURE]":>{_PROGRESS_PADDING}} {progress}')
                failures += 1
            else:
                logger.debug(f'{"[SUCCESS]":>{_PROGRESS_PADDING}} {progress}')
    # Report failures in order of submission, rather than completion
    if failures:
        exception_messages = list()
        for future, index in futures.items():
            e = future.exception()
            if e is not None:
                exception_lines = traceback.format_exception(
                    type(e), e, e.__traceback__
                )
                exception_messages.append(
                    f'{label} {index + 1} of {total}\n'
                    f'{"".join(exception_lines)}'
                )
        logger.error(
            'Tracebacks for all failures:\n\n' + '\n'.join(exception_messages)
        )
    logger.debug(
        f'{"[DONE]":>{_PROGRESS_PADDING}}'
        f' Total: {total},'
        f' Successes: {total - failures},'
        f' Failures: {failures}'
    )
    ordered = sorted(futures.items(), key=lambda pair: pair[1])
    # Re-raises the first failure, if any
    return [future.result() for future, _ in ordered]


def round_floats(obj, digits=FLOAT_DIGITS):
    """
    Round every float inside a JSON-like object to a number of
    significant digits

    :param obj: A JSON-like object (dict, list, tuple, scalar)
    :param digits: Number of significant digits
    :return: A copy of obj with rounded floats
    """
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return obj
        return float(f'{obj:.{digits}g}')
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    return obj


def dump_json(document):
    """
    Serialize a result document deterministically

    :param document: A JSON-like object
    :return: A JSON string
    """
    return json.dumps(round_floats(document), indent=2, sort_keys=False)


def format_text(document):
    """
    Render a result document as aligned text

    Scalars become "key  value" lines, nested objects use dotted keys
    and lists of objects become tables.

    :param document: A JSON-like dict
    :return: A string
    """
    document = round_floats(document)
    scalars = list()
    tables = list()
    _flatten(document, '', scalars, tables)
    lines = list()
    if scalars:
        width = max(len(key) for key, _ in scalars)
        lines.extend(
            f'{key:<{width}}  {_cell(value)}' for key, value in scalars
        )
    for key, rows in tables:
        columns = list()
        for row in rows:
            for column in row:
                if column not in columns:
                    columns.append(column)
        cells = [
            [_cell(row.get(column, '')) for column in columns] for row in rows
        ]
        widths = [
            max([len(column)] + [len(line[i]) for line in cells])
            for i, column in enumerate(columns)
        ]
        lines.append('')
        lines.append(key)
        lines.append('  '.join(c.ljust(w) for c, w in zip(columns, widths)))
        for line in cells:
            lines.append('  '.join(c.ljust(w) for c, w in zip(line, widths)))
    return '\n'.join(line.rstrip() for line in lines)


def _flatten(obj, prefix, scalars, tables):
    for key, value in obj.items():
        name = f'{prefix}{key}'
        if isinstance(value, dict):
            _flatten(value, f'{name}.', scalars, tables)
        elif (
            isinstance(value, list)
            and value
            and all(isinstance(v, dict) for v in value)
        ):
            tables.append((name, value))
        else:
            scalars.append((name, value))


def _cell(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, list):
        return '[' + ', '.join(_cell(v) for v in value) + ']'
    if value is None:
        return '-'
    return str(value)
