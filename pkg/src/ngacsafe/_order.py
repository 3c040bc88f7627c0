"""Canonical, hash-seed independent ordering for mixed node identifiers."""

from __future__ import annotations

from typing import Any, Iterable


def sort_key(item: Any) -> tuple:
    key = getattr(item, "sort_key", None)
    if callable(key):
        return (2, key())
    if isinstance(item, bool):
        return (0, int(item))
    if isinstance(item, (int, float)):
        return (0, item)
    if isinstance(item, str):
        return (1, item)
    if isinstance(item, (tuple, list)):
        return (3, tuple(sort_key(x) for x in item))
    if isinstance(item, frozenset):
        return (4, tuple(sorted(sort_key(x) for x in item)))
    return (9, repr(item))


def canonical(items: Iterable[Any]) -> list:
    return sorted(items, key=sort_key)
