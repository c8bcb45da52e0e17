import pathlib
from typing import Union

import pkg_resources

from vtkit.syntax.ast import Program
from vtkit.syntax.parser import parse


def load_program_text(vt_filename: str, package_or_requirement: str = __name__) -> str:
    """
    Read a .vt source shipped as package data.

    vt_filename: file name relative to the package
    package_or_requirement: usually `__name__` of the module next to the file
    """
    return pkg_resources.resource_string(package_or_requirement, vt_filename).decode("utf8")


def load_program(vt_filename: str, package_or_requirement: str = __name__) -> Program:
    """Parse and type-check a packaged .vt file; diagnostics name the file."""
    return parse(load_program_text(vt_filename, package_or_requirement), source_name=vt_filename)


def read_program(path: Union[str, pathlib.Path]) -> Program:
    path = pathlib.Path(path)
    return parse(path.read_text(encoding="utf8"), source_name=str(path))
