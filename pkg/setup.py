#!/usr/bin/env python

# Put this as the first statement in the file so it's easy to parse
# out without executing the file.
requires = [
    "funcparserlib ~= 1.0",
    "numpy >= 1.22",
    "scipy >= 1.8",
]

import os

from get_version import __version__
from setuptools import find_packages, setup

os.chdir(os.path.split(os.path.abspath(__file__))[0])

PKG = "otcells"

long_description = """otcells partitions a network area among base
stations. It computes optimal cells for congestion-aware transport costs
(round-robin power, rate-fair, penalized and alpha-fair association), the
Wardrop equilibria reached by selfish users, and the price of anarchy
between the two, and drives them from declarative scenario files."""

setup(
    name=PKG,
    version=(
        None
        if __version__ == "unknown"
        else __version__
    ),
    install_requires=requires,
    python_requires=">= 3.8, < 3.13",
    entry_points={
        "console_scripts": [
            "otcells = otcells.cmdline:otcells_main",
        ]
    },
    packages=find_packages(exclude=["tests*"]),
    package_data={
        "otcells.scenario": ["presets/*.scn"],
    },
    data_files=[("get_version", ["get_version.py"])],
    long_description=long_description,
    description="Optimal-transport cell partitions and Wardrop equilibria for base-station association",
    license="Expat",
    platforms=["any"],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Topic :: System :: Networking",
    ],
)
