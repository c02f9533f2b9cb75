"""Scenario files (JSON) and the bundled examples.

Schema::

    {
      "traders": [{"id": "A", "s": 90, "t": 30}, ...],
      "n": 6,
      "r": 0.2,
      "tax_mode": "purchase",            # or "sales"; optional
      "fiscal": {"poll_tax": 12, "spend_good": 1}   # or null; optional
    }

``s`` and ``t`` are the trader's units of good 1 and good 2, ``n`` the
crowns granted to every trader, ``r`` the tax rate. ``spend_good`` is 1 or 2.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .model import DomainError, FiscalPolicy, MonetaryPolicy, Scenario, Trader

BUNDLED = ("example1", "example2", "fiscal", "edgeworth", "no-eq")


class ScenarioError(ValueError):
    """Malformed scenario; ``where`` names the offending field or line."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def _number(obj: dict, key: str, where: str, default=None) -> float:
    if key not in obj:
        if default is None:
            raise ScenarioError(f"{where}.{key}", "missing field")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ScenarioError(f"{where}.{key}", f"expected a number, got {val!r}")
    return float(val)


def parse_scenario(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("$", "top level must be an object")
    unknown = set(data) - {"traders", "n", "r", "tax_mode", "fiscal"}
    if unknown:
        raise ScenarioError("$", f"unknown fields {sorted(unknown)}")
    raw = data.get("traders")
    if not isinstance(raw, list):
        raise ScenarioError("$.traders", "expected a list")
    traders = []
    for i, item in enumerate(raw):
        where = f"$.traders[{i}]"
        if not isinstance(item, dict):
            raise ScenarioError(where, "expected an object")
        tid = item.get("id", chr(ord("A") + i) if i < 26 else f"T{i}")
        try:
            traders.append(Trader(str(tid), _number(item, "s", where), _number(item, "t", where)))
        except DomainError as exc:
            raise ScenarioError(where, str(exc)) from None
    mode = data.get("tax_mode", "purchase")
    try:
        policy = MonetaryPolicy(_number(data, "n", "$", 0.0), _number(data, "r", "$", 0.0), mode)
    except DomainError as exc:
        raise ScenarioError("$", str(exc)) from None
    fiscal = None
    if data.get("fiscal") is not None:
        block = data["fiscal"]
        if not isinstance(block, dict):
            raise ScenarioError("$.fiscal", "expected an object or null")
        good = block.get("spend_good", 1)
        if good not in (1, 2) or isinstance(good, bool):
            raise ScenarioError("$.fiscal.spend_good", "must be 1 or 2")
        try:
            fiscal = FiscalPolicy(_number(block, "poll_tax", "$.fiscal"), good)
        except DomainError as exc:
            raise ScenarioError("$.fiscal", str(exc)) from None
    try:
        return Scenario(tuple(traders), policy, fiscal)
    except DomainError as exc:
        raise ScenarioError("$", str(exc)) from None


def loads(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return parse_scenario(data)


def load_scenario(path) -> Scenario:
    return loads(Path(path).read_text())


def to_dict(scenario: Scenario) -> dict:
    fiscal = None
    if scenario.fiscal is not None:
        fiscal = {"poll_tax": scenario.fiscal.poll_tax, "spend_good": scenario.fiscal.spend_good}
    return {
        "traders": [{"id": tr.id, "s": tr.s, "t": tr.t} for tr in scenario.traders],
        "n": scenario.policy.n,
        "r": scenario.policy.r,
        "tax_mode": scenario.policy.mode,
        "fiscal": fiscal,
    }


def dumps(scenario: Scenario) -> str:
    return json.dumps(to_dict(scenario), indent=2)


def bundled_path(name: str):
    if name not in BUNDLED:
        raise KeyError(f"no bundled scenario {name!r}; choose from {BUNDLED}")
    return resources.files("tokenmarket") / "data" / f"{name}.json"


def bundled(name: str) -> Scenario:
    return loads(bundled_path(name).read_text())
