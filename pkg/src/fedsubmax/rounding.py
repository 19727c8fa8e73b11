"""Swap rounding of a convex combination of matroid bases."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, InvariantViolation
from .matroid import Matroid
from .objectives import as_mask


@dataclass
class BaseDecomposition:
    """Convex-combination weights over bases, in order of first appearance.

    Repeated bases are merged into one term; this keeps the reconstruction
    sum(lambda_j * B_j) unchanged.
    """

    terms: dict[tuple[int, ...], float] = field(default_factory=dict)

    def add(self, weight: float, base) -> None:
        """Add weight to the base given by its element ids."""
        key = tuple(sorted(int(e) for e in base))
        self.terms[key] = self.terms.get(key, 0.0) + float(weight)

    def add_indicator(self, weight: float, v: np.ndarray) -> None:
        self.add(weight, np.flatnonzero(v))

    @property
    def total(self) -> float:
        return float(sum(self.terms.values()))

    def __len__(self):
        return len(self.terms)

    def items(self) -> list[tuple[float, tuple[int, ...]]]:
        return [(w, b) for b, w in self.terms.items()]

    def point(self, n: int) -> np.ndarray:
        x = np.zeros(n)
        for b, w in self.terms.items():
            x[list(b)] += w
        return x


def normalize(dec: BaseDecomposition) -> BaseDecomposition:
    """Rescale weights to sum to one, keeping their ratios."""
    if not dec.terms:
        raise InputError("cannot normalize an empty decomposition")
    total = dec.total
    if total <= 0:
        raise InputError("decomposition weights must have a positive total")
    return BaseDecomposition({b: w / total for b, w in dec.terms.items()})


def _merge(M: Matroid, b1: set, l1: float, b2: set, l2: float, rng: np.random.Generator) -> set:
    b1 = set(b1)
    b2 = set(b2)
    while b1 != b2:
        e = min(b1 - b2)
        partner = None
        for cand in sorted(b2 - b1):
            if M._independent(as_mask((b2 - {cand}) | {e}, M.n)) and M._independent(as_mask((b1 - {e}) | {cand}, M.n)):
                partner = cand
                break
        if partner is None:
            raise InvariantViolation(f"no exchange partner for element {e}; is the oracle a matroid?")
        if rng.random() < l1 / (l1 + l2):
            b2.discard(partner)
            b2.add(e)
        else:
            b1.discard(e)
            b1.add(partner)
    return b1


def swap_round(dec: BaseDecomposition, M: Matroid, rng: np.random.Generator) -> list[int]:
    """Merge terms left to right by random base exchanges; return the final base.

    Each merge of (l1, B1) with (l2, B2) repeatedly takes the smallest
    e in B1 - B2 and the smallest e' in B2 - B1 admitting the symmetric
    exchange, then moves B2 towards B1 with probability l1 / (l1 + l2)
    and B1 towards B2 otherwise.
    """
    items = dec.items()
    if not items:
        raise InputError("cannot round an empty decomposition")
    for _, b in items:
        if len(b) != M.rank or not M._independent(as_mask(b, M.n)):
            raise InputError(f"{b} is not a base of the matroid")
    weight, current = items[0]
    current = set(current)
    for w, b in items[1:]:
        current = _merge(M, current, weight, set(b), w, rng)
        weight += w
    return sorted(current)
