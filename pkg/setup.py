#!/usr/bin/env python

from setuptools import find_packages, setup

setup(
    name="penalty_ns",
    version="0.1.0",
    description=(
        "Penalty-projection schemes for the stochastic Navier-Stokes "
        "equations on the torus"
    ),
    packages=find_packages(exclude=["tests", "tests.*"]),
    python_requires=">=3.8",
    install_requires=[
        "joblib>=1.3.0",
        "numpy>=1.23.4",
        "pandas>=1.5.0",
        "PyYAML>=6.0",
        "scipy>=1.8.0",
        "tomli>=2.0.1",
        "tqdm>=4.64.0",
    ],
    entry_points={"console_scripts": ["penalty-ns=penalty_ns.cli:main"]},
)
