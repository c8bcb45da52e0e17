#!/usr/bin/env python

from setuptools import setup, find_packages

with open("README.md", "rt") as fh:
    long_description = fh.read()

dependencies = [
    "click>=7.1",
    "lark>=1.1",
    "tomli>=1.1; python_version < '3.11'",
    "pytest",
    "pytest-asyncio",
    "pytimeparse",
]

dev_dependencies = [
    "hypothesis>=6",
]

setup(
    name="vtkit",
    version="0.1.0",
    packages=find_packages(),
    entry_points={
        "console_scripts": [
            "vt = vtkit.cmds.cli:main"
        ],
    },
    package_data={
        "": ["*.vt", "*.lark", "*.json"],
    },
    python_requires=">=3.8",
    install_requires=dependencies,
    license="https://mit-license.org/",
    description="Testing and verification toolkit for annotated .vt programs",
    long_description=long_description,
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "License :: OSI Approved :: MIT License",
        "Topic :: Software Development :: Testing",
    ],
    extras_require=dict(dev=dev_dependencies,),
)
