from invoke import Collection, Program

from netsale import cli
from netsale.internal import _utils, _version

ns = Collection.from_module(cli)
program = Program(
    namespace=ns,
    name='netsale',
    version=_version.__version__,
    config_class=_utils.NetsaleConfig,
)
