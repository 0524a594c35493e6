"""Questionnaire scoring: pair closeness and five-factor personality traits.

The pair questionnaire is 12 items on a 7-point agreement scale, normalized
linearly to a [0,1] closeness label. The individual questionnaire is the
10-item five-factor short form: two items per trait, reverse-keyed items
mapped v -> 6 - v, trait score = mean of its two items. Trait scores are
stored alongside pairs but never feed compatibility prediction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .errors import KeyingError, OutOfRangeError

URCS_ITEMS = 12
URCS_MIN, URCS_MAX = 1, 7
BFI_ITEMS = 10
BFI_MIN, BFI_MAX = 1, 5
ITEMS_PER_TRAIT = 2


def _check_items(items, count, lo, hi, label):
    items = tuple(int(v) for v in items)
    if len(items) != count:
        raise OutOfRangeError(f"{label} needs exactly {count} items, got {len(items)}")
    for i, v in enumerate(items, start=1):
        if not lo <= v <= hi:
            raise OutOfRangeError(f"{label} item {i} is {v}, allowed range [{lo}, {hi}]")
    return items


@dataclass(frozen=True)
class URCSResponse:
    items: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "items", _check_items(self.items, URCS_ITEMS, URCS_MIN, URCS_MAX, "pair questionnaire")
        )


@dataclass(frozen=True)
class BFIResponse:
    items: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "items", _check_items(self.items, BFI_ITEMS, BFI_MIN, BFI_MAX, "individual questionnaire")
        )


def score_urcs(resp: URCSResponse) -> float:
    """Closeness in [0,1]: (mean item - 1) / 6."""
    return (sum(resp.items) / URCS_ITEMS - URCS_MIN) / (URCS_MAX - URCS_MIN)


def pair_closeness(resp_a: URCSResponse, resp_b: URCSResponse) -> float:
    """One label per pair: the mean of both partners' closeness scores."""
    return (score_urcs(resp_a) + score_urcs(resp_b)) / 2.0


@dataclass(frozen=True)
class KeyedItem:
    item: int         # 1-based questionnaire position
    trait: str
    reverse: bool


def load_default_keying() -> list[KeyedItem]:
    raw = json.loads(
        resources.files("tug.data").joinpath("bfi_keying.json").read_text("utf-8")
    )
    return [KeyedItem(k["item"], k["trait"], k["reverse"]) for k in raw["items"]]


def _validate_keying(keying, n_items: int) -> None:
    per_trait: dict[str, int] = {}
    positions = set()
    for k in keying:
        per_trait[k.trait] = per_trait.get(k.trait, 0) + 1
        positions.add(k.item)
    for trait, n in per_trait.items():
        if n != ITEMS_PER_TRAIT:
            raise KeyingError(f"trait {trait!r} keyed by {n} items, expected {ITEMS_PER_TRAIT}")
    if positions != set(range(1, n_items + 1)):
        raise KeyingError(f"keying must cover items 1..{n_items} exactly once")


def score_bfi(resp: BFIResponse, keying) -> dict[str, float]:
    """Per-trait scores in [1,5], reverse-keyed items mirrored around 3."""
    keying = list(keying)
    _validate_keying(keying, BFI_ITEMS)
    sums: dict[str, float] = {}
    for k in keying:
        value = resp.items[k.item - 1]
        if k.reverse:
            value = (BFI_MIN + BFI_MAX) - value
        sums[k.trait] = sums.get(k.trait, 0) + value
    return {trait: total / ITEMS_PER_TRAIT for trait, total in sorted(sums.items())}
