from pathlib import Path

from setuptools import setup, find_packages

from netsale.internal import _version

PARENT_DIR = Path(__file__).parent
README = Path(PARENT_DIR, 'README.md').read_text()

setup(
    name='netsale',
    version=_version.__version__,
    license='Apache License 2.0',
    description=(
        'netsale is a library and CLI for pricing information sold to'
        ' buyers who share signals over a network.'
    ),
    long_description=README,
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['tests']),
    install_requires=[
        'invoke>=1.4.1',
        'ruamel.yaml>=0.17.12',
        'numpy>=1.26',
        'scipy>=1.11',
        'networkx>=3.1',
    ],
    python_requires='>=3.10.0',
    entry_points={'console_scripts': ["netsale = netsale.main:program.run"]},
)
