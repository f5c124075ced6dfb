"""1-rounding of path-shaped graphs by differences of floored prefix sums."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence


def floor_fraction(x: Fraction) -> int:
    return x.numerator // x.denominator


def round_path(weights: Iterable, offset: Fraction = Fraction(1, 2)) -> list[int]:
    """Round consecutive path edge weights so every subpath moves by less than 1.

    With ``d_0 = offset`` and ``d_i = offset + w_1 + ... + w_i`` the i-th
    output is ``floor(d_i) - floor(d_{i-1})``.
    """
    prefix = Fraction(offset)
    prev = floor_fraction(prefix)
    out = []
    for w in weights:
        w = Fraction(w)
        if w < 0:
            raise ValueError(f"negative weight {w}")
        prefix += w
        cur = floor_fraction(prefix)
        out.append(cur - prev)
        prev = cur
    return out


def path_subpath_errors(weights: Sequence[Fraction], rounded: Sequence[int]) -> tuple[Fraction, Fraction]:
    """Min and max signed error over all non-empty contiguous subpaths.

    A subpath error is a difference of two prefix errors, so one pass that
    tracks the smallest and largest earlier prefix suffices.  Work happens on
    integers scaled by the common denominator.
    """
    if not weights:
        return Fraction(0), Fraction(0)
    scale = math.lcm(*(Fraction(w).denominator for w in weights))
    prefix = 0
    low = high = 0          # extreme prefixes seen so far
    lo = hi = None
    for w, x in zip(weights, rounded):
        w = Fraction(w)
        prefix += x * scale - w.numerator * (scale // w.denominator)
        lo = prefix - high if lo is None else min(lo, prefix - high)
        hi = prefix - low if hi is None else max(hi, prefix - low)
        low, high = min(low, prefix), max(high, prefix)
    return Fraction(lo, scale), Fraction(hi, scale)


def parse_path(text: str) -> list[Fraction]:
    from .graph import parse_weight

    return [parse_weight(tok) for tok in text.split()]
