"""Train/test splits along the six generalization dimensions.

The test set is materialized first. Train theorems are produced on demand
and any whose (goal, premises) key appears in the test set is skipped.

Dimensions:

* ``iid``: train and test share one distribution.
* ``degree``: train initial entities have degree 0, test ones degree 1 or 2.
* ``orders``: train orders come from a fixed pool; every test order is outside it.
* ``combinations``: same with axiom combinations.
* ``k-shift``: test theorems use a different K at the same L.
* ``l-shift``: test theorems use a different L at the same K.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

from .axioms import AXIOM_SETS, AxiomId
from .errors import GenerationFailed, InfeasibleOrder, PoolExhausted
from .generator import (
    GeneratorConfig,
    _combo_feasible,
    _surjection,
    degree0_conditions,
    derive_seed,
    generate,
    generate_theorem,
    order_feasible,
    sample_axiom_order,
)
from .proof import Theorem

# Consecutive test-set collisions before an order slot gets a fresh order.
REPLACE_AFTER = 50

DIMENSIONS = ("iid", "degree", "orders", "combinations", "k-shift", "l-shift")


@dataclass(frozen=True)
class SplitSpec:
    dimension: str = "iid"
    n_orders: int = 100
    n_combinations: int = 25
    test_size: int = 1000
    test_degrees: tuple[int, ...] = (1, 2)
    # Size of the unseen combination pool behind the test set.
    n_test_combinations: int = 300
    test_k: Optional[int] = None
    test_l: Optional[int] = None

    def __post_init__(self):
        if self.dimension not in DIMENSIONS:
            raise ValueError(f"unknown dimension {self.dimension!r}; expected one of {DIMENSIONS}")
        if self.test_size < 0:
            raise ValueError("test_size must be non-negative")


@dataclass
class Split:
    spec: SplitSpec
    base: GeneratorConfig
    test: list[Theorem]
    test_keys: set[str]
    train_orders: Optional[list[tuple[AxiomId, ...]]] = None
    test_orders: Optional[list[tuple[AxiomId, ...]]] = None
    train_combinations: Optional[list[tuple[AxiomId, ...]]] = None
    test_combinations: Optional[list[tuple[AxiomId, ...]]] = None
    max_skips: int = 1000
    _order_source: Optional[object] = field(default=None, repr=False)

    def train(self, n: int, start: int = 0) -> Iterator[Theorem]:
        """``n`` train theorems, skipping any that collide with the test set."""
        index, made, skips = start, 0, 0
        while made < n:
            thm = generate(self.base, index, self._order_source, stream="train")
            index += 1
            if thm.key() in self.test_keys:
                skips += 1
                if skips > self.max_skips:
                    raise PoolExhausted("train theorems keep colliding with the test set")
                continue
            made += 1
            yield thm


def _generable(order, cfg: GeneratorConfig, rng: random.Random) -> bool:
    try:
        generate_theorem(degree0_conditions(cfg.variables), order, rng, cfg.order_retries, cfg.variables)
    except GenerationFailed:
        return False
    return True


def _order_pool(n: int, cfg: GeneratorConfig, rng: random.Random, exclude=frozenset()) -> list[tuple]:
    """``n`` distinct generable orders outside ``exclude``."""
    pool: dict[tuple, None] = {}
    misses = 0
    while len(pool) < n:
        order = tuple(sample_axiom_order(cfg.k, cfg.l, cfg.axiom_set, rng, degree=cfg.degree))
        if order in pool or order in exclude or not _generable(order, cfg, rng):
            misses += 1
            if misses > 50 * n + 1000:
                raise PoolExhausted(f"only {len(pool)} of {n} distinct orders found")
            continue
        pool[order] = None
    return list(pool)


def _order_from(combo, cfg: GeneratorConfig, rng: random.Random) -> list[AxiomId]:
    for _ in range(100_000):
        order = _surjection(combo, cfg.l, rng)
        if order_feasible(order, cfg.axiom_set, cfg.degree):
            return order
    raise InfeasibleOrder(f"combination {combo} yields no feasible order")


def _combination_pool(n: int, cfg: GeneratorConfig, rng: random.Random, exclude=frozenset()) -> list[tuple]:
    axioms = AXIOM_SETS[cfg.axiom_set]
    pool: dict[tuple, None] = {}
    misses = 0
    while len(pool) < n:
        combo = tuple(sorted(rng.sample(axioms, cfg.k), key=lambda a: a.index))
        ok = combo not in pool and combo not in exclude and _combo_feasible(combo, cfg.axiom_set)
        if ok:
            try:
                ok = _generable(_order_from(combo, cfg, rng), cfg, rng)
            except InfeasibleOrder:
                ok = False
        if not ok:
            misses += 1
            if misses > 50 * n + 1000:
                raise PoolExhausted(f"only {len(pool)} of {n} distinct combinations found")
            continue
        pool[combo] = None
    return list(pool)


def generate_split(spec: SplitSpec, base: GeneratorConfig) -> Split:
    rng = random.Random(derive_seed(base.seed, 0, f"pools:{spec.dimension}"))
    test_cfg = base
    test_sources: list = [None]
    train_source = None
    extra: dict = {}
    if spec.dimension == "degree":
        base = replace(base, degree=0)
    elif spec.dimension == "orders":
        train_pool = _order_pool(spec.n_orders, base, rng)
        test_pool = _order_pool(spec.test_size, base, rng, exclude=frozenset(train_pool))
        train_source = lambda r: train_pool[r.randrange(len(train_pool))]  # noqa: E731
        test_sources = [(lambda r, o=o: o) for o in test_pool]
        extra = {"train_orders": train_pool, "test_orders": test_pool}
    elif spec.dimension == "combinations":
        train_pool = _combination_pool(spec.n_combinations, base, rng)
        test_pool = _combination_pool(spec.n_test_combinations, base, rng, exclude=frozenset(train_pool))
        train_source = lambda r: _order_from(train_pool[r.randrange(len(train_pool))], base, r)  # noqa: E731
        test_sources = [(lambda r, c=c: _order_from(c, base, r)) for c in test_pool]
        extra = {"train_combinations": train_pool, "test_combinations": test_pool}
    elif spec.dimension == "k-shift":
        k = spec.test_k if spec.test_k is not None else base.k + 1
        if k == base.k:
            raise ValueError("k-shift needs test_k different from the train K")
        test_cfg = replace(base, k=k, l=max(base.l, k))
    elif spec.dimension == "l-shift":
        l = spec.test_l if spec.test_l is not None else base.l + 2
        if l == base.l:
            raise ValueError("l-shift needs test_l different from the train L")
        test_cfg = replace(base, l=l)

    test: list[Theorem] = []
    keys: set[str] = set()
    index = streak = 0
    while len(test) < spec.test_size:
        cfg = test_cfg
        if spec.dimension == "degree":
            cfg = replace(base, degree=spec.test_degrees[len(test) % len(spec.test_degrees)])
        slot = len(test) % len(test_sources)
        thm = generate(cfg, index, test_sources[slot], stream="test")
        index += 1
        if thm.key() in keys:
            if index > 20 * spec.test_size + 100:
                raise PoolExhausted("not enough distinct test theorems")
            streak += 1
            if streak >= REPLACE_AFTER and spec.dimension == "orders":
                # Some orders yield only a handful of theorems, all already taken.
                test_pool = extra["test_orders"]
                (fresh,) = _order_pool(1, base, rng, exclude=frozenset(train_pool) | frozenset(test_pool))
                test_pool[slot] = fresh
                test_sources[slot] = lambda r, o=fresh: o
                streak = 0
            continue
        streak = 0
        keys.add(thm.key())
        test.append(thm)
    return Split(spec, base, test, keys, _order_source=train_source, **extra)
