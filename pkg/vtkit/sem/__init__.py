from vtkit.sem.evaluator import EvalOutcome, eval_formula, eval_pure, infer_bound  # noqa: F401
from vtkit.sem.interp import Env, Monitor, run_method  # noqa: F401
from vtkit.sem.values import Value  # noqa: F401
