"""Runtime values.

Inside the evaluator values are plain Python payloads: bool, int, a one
character str for Char, str for String and tuples for pairs, arrays and lists.
`Value` pairs a payload with its SemType at API boundaries.
"""
import json
from typing import Any, List

from vtkit.errors import ValueDecodeError
from vtkit.syntax.ast import SemType

DEFAULT_CHAR = "A"


class Value:
    __slots__ = ("type", "payload")

    def __init__(self, type: SemType, payload: Any):
        self.type = type
        self.payload = payload

    def __eq__(self, other):
        if not isinstance(other, Value):
            return NotImplemented
        return _family(self.type) == _family(other.type) and self.payload == other.payload

    def __hash__(self):
        return hash(_freeze(self.payload))

    def __repr__(self):
        return f"Value({self.type}, {render_payload(self.type, self.payload)})"

    def __str__(self):
        return render_payload(self.type, self.payload)


def _family(t: SemType) -> SemType:
    """Nat and Int values compare equal when their payloads do."""
    if t.kind == "Nat":
        return SemType("Int")
    if t.args:
        return SemType(t.kind, tuple(_family(a) for a in t.args))
    return t


def _freeze(p):
    if isinstance(p, tuple):
        return tuple(_freeze(x) for x in p)
    # keep True distinct from 1
    if isinstance(p, bool):
        return ("b", p)
    return p


def default_payload(t: SemType) -> Any:
    kind = t.kind
    if kind == "Bool":
        return False
    if kind in ("Nat", "Int"):
        return 0
    if kind == "Char":
        return DEFAULT_CHAR
    if kind == "String":
        return ""
    if kind == "Pair":
        return (default_payload(t.args[0]), default_payload(t.args[1]))
    if kind in ("Array", "List"):
        return ()
    raise ValueError(f"no default value for {t}")


def payload_fits(t: SemType, p: Any) -> bool:
    kind = t.kind
    if kind == "Bool":
        return isinstance(p, bool)
    if kind in ("Nat", "Int"):
        if isinstance(p, bool) or not isinstance(p, int):
            return False
        return kind == "Int" or p >= 0
    if kind == "Char":
        return isinstance(p, str) and len(p) == 1
    if kind == "String":
        return isinstance(p, str)
    if kind == "Pair":
        return (isinstance(p, tuple) and len(p) == 2
                and payload_fits(t.args[0], p[0]) and payload_fits(t.args[1], p[1]))
    if kind in ("Array", "List"):
        return isinstance(p, tuple) and all(payload_fits(t.args[0], x) for x in p)
    return False


def render_payload(t: SemType, p: Any) -> str:
    """Source-syntax rendering, used in reports and obligations."""
    kind = t.kind
    if kind == "Bool":
        return "true" if p else "false"
    if kind in ("Nat", "Int"):
        return str(p)
    if kind == "Char":
        return repr(p) if p != "'" else "'\\''"
    if kind == "String":
        return json.dumps(p, ensure_ascii=False)
    if kind == "Pair":
        return f"({render_payload(t.args[0], p[0])}, {render_payload(t.args[1], p[1])})"
    inner = ", ".join(render_payload(t.args[0], x) for x in p)
    return f"#[{inner}]" if kind == "Array" else f"[{inner}]"


# JSON


def to_json(t: SemType, p: Any) -> Any:
    kind = t.kind
    if kind == "Pair":
        return [to_json(t.args[0], p[0]), to_json(t.args[1], p[1])]
    if kind in ("Array", "List"):
        return [to_json(t.args[0], x) for x in p]
    return p


def to_tagged_json(v: Value) -> dict:
    return {"t": str(v.type), "v": to_json(v.type, v.payload)}


def from_json(t: SemType, data: Any) -> Any:
    """Decode a plain or tagged JSON value against the expected type."""
    if isinstance(data, dict):
        if set(data) != {"t", "v"}:
            raise ValueDecodeError(f"expected a tagged value {{\"t\", \"v\"}}, got keys {sorted(data)}")
        from vtkit.syntax.parser import parse_type
        from vtkit.syntax.typecheck import assignable

        tagged = parse_type(data["t"])
        if not assignable(tagged, t):
            raise ValueDecodeError(f"tagged type {tagged} does not fit {t}")
        return from_json(tagged, data["v"])
    kind = t.kind
    if kind == "Pair":
        if not isinstance(data, list) or len(data) != 2:
            raise ValueDecodeError(f"expected a 2-element array for {t}, got {data!r}")
        return (from_json(t.args[0], data[0]), from_json(t.args[1], data[1]))
    if kind in ("Array", "List"):
        if not isinstance(data, list):
            raise ValueDecodeError(f"expected an array for {t}, got {data!r}")
        return tuple(from_json(t.args[0], x) for x in data)
    if not payload_fits(t, data):
        raise ValueDecodeError(f"{data!r} is not a {t}")
    return data


def decode_value(t: SemType, data: Any) -> Value:
    return Value(t, from_json(t, data))


def decode_args(types: List[SemType], data: Any) -> List[Value]:
    if not isinstance(data, list):
        raise ValueDecodeError(f"expected a JSON array of arguments, got {data!r}")
    if len(data) != len(types):
        raise ValueDecodeError(f"expected {len(types)} arguments, got {len(data)}")
    return [decode_value(t, d) for t, d in zip(types, data)]
