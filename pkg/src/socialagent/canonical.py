"""Canonical text serialization: sorted-key JSON wrapped in a
self-describing type envelope, byte-stable across runs."""

from __future__ import annotations

import importlib
import json
import types
import typing
from dataclasses import MISSING, fields, is_dataclass
from enum import Enum

from .errors import MalformedInputError

_REGISTRY: dict[str, type] = {}

# Modules whose import registers every serializable type.
_TYPE_MODULES = (
    "core",
    "providers",
    "divergence",
    "optimizer",
    "critic",
    "actor",
    "engine",
    "evaluation",
)


def register(*types: type) -> None:
    for tp in types:
        _REGISTRY[tp.__name__] = tp


def registered(name: str) -> type | None:
    return _REGISTRY.get(name)


def _ensure_types_loaded() -> None:
    for module in _TYPE_MODULES:
        importlib.import_module(f".{module}", __package__)


def to_jsonable(value: object) -> object:
    """Lower a domain value to plain JSON-compatible data."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, Enum):
        return value.value
    if hasattr(value, "to_jsonable"):
        return value.to_jsonable()
    if is_dataclass(value):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, (set, frozenset)):
        return sorted(to_jsonable(item) for item in value)
    if isinstance(value, dict):
        out = {}
        for key, item in value.items():
            key_repr = key.value if isinstance(key, Enum) else key
            if not isinstance(key_repr, str):
                raise MalformedInputError(f"unsupported dict key type {type(key).__name__}")
            out[key_repr] = to_jsonable(item)
        return out
    raise MalformedInputError(f"cannot serialize value of type {type(value).__name__}")


def _hints_for(tp: type) -> dict[str, object]:
    try:
        return typing.get_type_hints(tp, localns=_REGISTRY)
    except NameError:
        _ensure_types_loaded()
        return typing.get_type_hints(tp, localns=_REGISTRY)


def from_jsonable(data: object, tp: object, path: str = "$") -> object:
    """Rebuild a domain value of declared type ``tp`` from plain data."""
    # Forward references inside builtin generics survive get_type_hints as
    # bare strings; resolve them against the registry.
    if isinstance(tp, str):
        resolved = _REGISTRY.get(tp)
        if resolved is None:
            _ensure_types_loaded()
            resolved = _REGISTRY.get(tp)
        if resolved is None:
            raise MalformedInputError(f"{path}: unresolved type reference {tp!r}")
        tp = resolved
    if tp is type(None):
        if data is not None:
            raise MalformedInputError(f"{path}: expected null")
        return None
    origin = typing.get_origin(tp)
    if origin is typing.Union or origin is types.UnionType:
        args = typing.get_args(tp)
        if data is None and type(None) in args:
            return None
        last_error: Exception | None = None
        for arm in args:
            if arm is type(None):
                continue
            try:
                return from_jsonable(data, arm, path)
            except (MalformedInputError, ValueError, TypeError) as exc:
                last_error = exc
        raise MalformedInputError(f"{path}: no union arm matched ({last_error})")
    if origin in (tuple,):
        args = typing.get_args(tp)
        if not isinstance(data, list):
            raise MalformedInputError(f"{path}: expected array")
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(
                from_jsonable(item, args[0], f"{path}[{i}]") for i, item in enumerate(data)
            )
        if len(args) != len(data):
            raise MalformedInputError(f"{path}: expected {len(args)} items")
        return tuple(
            from_jsonable(item, arm, f"{path}[{i}]")
            for i, (item, arm) in enumerate(zip(data, args))
        )
    if origin in (list,):
        (arm,) = typing.get_args(tp)
        if not isinstance(data, list):
            raise MalformedInputError(f"{path}: expected array")
        return [from_jsonable(item, arm, f"{path}[{i}]") for i, item in enumerate(data)]
    if origin in (set, frozenset):
        (arm,) = typing.get_args(tp)
        if not isinstance(data, list):
            raise MalformedInputError(f"{path}: expected array")
        return origin(from_jsonable(item, arm, path) for item in data)
    if origin is dict:
        key_tp, val_tp = typing.get_args(tp)
        if not isinstance(data, dict):
            raise MalformedInputError(f"{path}: expected object")
        out = {}
        for key, item in data.items():
            parsed_key = key_tp(key) if isinstance(key_tp, type) and issubclass(key_tp, Enum) else key
            out[parsed_key] = from_jsonable(item, val_tp, f"{path}.{key}")
        return out
    if isinstance(tp, type) and issubclass(tp, Enum):
        try:
            return tp(data)
        except ValueError as exc:
            raise MalformedInputError(f"{path}: {exc}") from exc
    if isinstance(tp, type) and hasattr(tp, "from_jsonable"):
        return tp.from_jsonable(data)
    if is_dataclass(tp):
        if not isinstance(data, dict):
            raise MalformedInputError(f"{path}: expected object for {tp.__name__}")
        hints = _hints_for(tp)
        known = {f.name: f for f in fields(tp)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise MalformedInputError(f"{path}: unknown fields {unknown} for {tp.__name__}")
        kwargs = {}
        for name, f in known.items():
            if name in data:
                kwargs[name] = from_jsonable(data[name], hints[name], f"{path}.{name}")
            elif f.default is MISSING and f.default_factory is MISSING:
                raise MalformedInputError(f"{path}: missing field {name!r} for {tp.__name__}")
        return tp(**kwargs)
    if tp is float:
        if isinstance(data, bool) or not isinstance(data, (int, float)):
            raise MalformedInputError(f"{path}: expected number")
        return float(data)
    if tp is int:
        if isinstance(data, bool) or not isinstance(data, int):
            raise MalformedInputError(f"{path}: expected integer")
        return data
    if tp is bool:
        if not isinstance(data, bool):
            raise MalformedInputError(f"{path}: expected boolean")
        return data
    if tp is str:
        if not isinstance(data, str):
            raise MalformedInputError(f"{path}: expected string")
        return data
    if tp in (object, typing.Any):
        return data
    raise MalformedInputError(f"{path}: unsupported declared type {tp!r}")


def dumps(data: object) -> str:
    """Canonical rendering of plain data: sorted keys, stable floats."""
    return (
        json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)
        + "\n"
    )


def serialize(value: object) -> str:
    """Render any registered domain value as canonical text."""
    name = type(value).__name__
    if name not in _REGISTRY:
        raise MalformedInputError(f"type {name} is not registered for serialization")
    return dumps({"kind": name, "value": to_jsonable(value)})


def parse_text(text: str) -> object:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(
            f"malformed canonical text at line {exc.lineno} column {exc.colno}: {exc.msg}",
            position=exc.pos,
        ) from exc


def deserialize(text: str) -> object:
    """Rebuild a domain value from canonical text produced by serialize()."""
    _ensure_types_loaded()
    data = parse_text(text)
    if not isinstance(data, dict) or set(data) != {"kind", "value"}:
        raise MalformedInputError("expected an object with 'kind' and 'value'")
    kind = data["kind"]
    cls = _REGISTRY.get(kind) if isinstance(kind, str) else None
    if cls is None:
        raise MalformedInputError(f"unknown kind {kind!r}")
    return from_jsonable(data["value"], cls, path=str(kind))
