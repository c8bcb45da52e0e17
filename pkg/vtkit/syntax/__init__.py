from vtkit.syntax.parser import parse, parse_type, parse_untyped  # noqa: F401
from vtkit.syntax.printer import print_expr, print_program, print_type  # noqa: F401
from vtkit.syntax.transform import free_vars, subst  # noqa: F401
