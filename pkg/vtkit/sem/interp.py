import logging
from typing import Any, Dict, List, Optional, Sequence, Set

from vtkit.errors import ArityMismatch, FuelExhausted, RuntimeFault, VtTypeError
from vtkit.sem.evaluator import DEFAULT_FUEL, Evaluator, Fuel
from vtkit.sem.values import Value, payload_fits
from vtkit.syntax.ast import Assign, If, Let, Method, Program, Return, Stmt, While

log = logging.getLogger(__name__)


class Env:
    """Program state of one method activation."""

    def __init__(self, values: Optional[Dict[str, Any]] = None):
        self.values: Dict[str, Any] = dict(values or {})
        self.mutable: Set[str] = set()

    def bind(self, name: str, payload: Any, mutable: bool = False) -> None:
        self.values[name] = payload
        if mutable:
            self.mutable.add(name)

    def assign(self, name: str, payload: Any) -> None:
        if name not in self.mutable:
            raise RuntimeFault(f"assignment to immutable name '{name}'")
        self.values[name] = payload

    def __getitem__(self, name: str) -> Any:
        return self.values[name]

    def __contains__(self, name: str) -> bool:
        return name in self.values

    def snapshot(self) -> Dict[str, Any]:
        return dict(self.values)


class Monitor:
    """Instrumentation points of an execution. The default does nothing."""

    def loop_entry(self, loop: While, env: Env) -> None:
        pass

    def iteration_head(self, loop: While, env: Env, iteration: int) -> None:
        """Guard holds; the body is about to run for the `iteration`-th time."""

    def after_iteration(self, loop: While, env: Env, iteration: int) -> None:
        pass

    def on_return(self, ret: Return, values: List[Any], env: Env) -> None:
        pass


class _Returned(Exception):
    def __init__(self, values: List[Any]):
        self.values = values


class Interpreter:
    def __init__(self, program: Program, fuel: Fuel, monitor: Optional[Monitor] = None):
        self.program = program
        self.fuel = fuel
        self.monitor = monitor or Monitor()
        self.evaluator = Evaluator(program, fuel)

    def run(self, method: Method, args: Sequence[Any]) -> List[Any]:
        env = Env({p.name: a for p, a in zip(method.params, args)})
        try:
            self.block(method.body, env)
        except _Returned as r:
            return r.values
        except RecursionError:
            raise FuelExhausted(self.fuel.budget) from None
        raise RuntimeFault(f"method {method.name} finished without returning")

    def block(self, stmts: Sequence[Stmt], env: Env) -> None:
        for s in stmts:
            self.stmt(s, env)

    def stmt(self, s: Stmt, env: Env) -> None:
        ev = self.evaluator
        if isinstance(s, Let):
            env.bind(s.name, ev.eval(s.value, env.values), s.mutable)
        elif isinstance(s, Assign):
            env.assign(s.name, ev.eval(s.value, env.values))
        elif isinstance(s, If):
            self.block(s.then if ev.eval(s.cond, env.values) else s.orelse, env)
        elif isinstance(s, While):
            self.loop(s, env)
        elif isinstance(s, Return):
            values = [ev.eval(v, env.values) for v in s.values]
            self.monitor.on_return(s, values, env)
            raise _Returned(values)
        else:
            raise TypeError(f"unknown statement {s!r}")

    def loop(self, s: While, env: Env) -> None:
        self.monitor.loop_entry(s, env)
        iteration = 0
        while self.evaluator.eval(s.guard, env.values):
            self.fuel.spend()
            iteration += 1
            self.monitor.iteration_head(s, env, iteration)
            self.block(s.body, env)
            self.monitor.after_iteration(s, env, iteration)


def check_args(method: Method, args: Sequence[Value]) -> List[Any]:
    if len(args) != len(method.params):
        raise ArityMismatch(f"{method.name} expects {len(method.params)} arguments, got {len(args)}")
    payloads = []
    for a, p in zip(args, method.params):
        payload = a.payload if isinstance(a, Value) else a
        if not payload_fits(p.type, payload):
            raise VtTypeError(p.loc, str(p.type), str(getattr(a, "type", type(a).__name__)),
                              f"argument '{p.name}' expects {p.type}")
        payloads.append(payload)
    return payloads


def run_method(program: Program, name: str, args: Sequence[Value], fuel: int = DEFAULT_FUEL,
               monitor: Optional[Monitor] = None) -> List[Value]:
    """Execute a method on concrete arguments; deterministic in its inputs."""
    method = program.find_method(name)
    if method is None:
        raise KeyError(f"no method named {name}")
    payloads = check_args(method, args)
    results = Interpreter(program, Fuel(fuel), monitor).run(method, payloads)
    return [Value(r.type, v) for r, v in zip(method.returns, results)]
