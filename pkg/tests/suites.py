"""Deterministic POVM suites shared by the acceptance and module tests."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from extreme_povm import constructions as con
from extreme_povm.operator_core import Povm, validate_povm
from extreme_povm.packing import solve_symmetric
from extreme_povm.rank_catalog import RankVector, enumerate_candidates
from extreme_povm.search import random_povm
from extreme_povm.synthesis import synthesize_vector

OPS = ("add_rank1", "delete_outcome", "refine", "multiply_ranks", "increase_rank", "lift_dimension")


def compositions(n: int):
    """All ordered tuples of positive integers summing to ``n``."""
    for cuts in itertools.product((0, 1), repeat=n - 1):
        parts, run = [], 1
        for c in cuts:
            if c:
                parts.append(run)
                run = 1
            else:
                run += 1
        parts.append(run)
        yield tuple(parts)


def pvm_suite(max_dim: int = 6) -> list[Povm]:
    return [con.pvm(p) for d in range(1, max_dim + 1) for p in compositions(d)]


def symmetric_vectors(max_dim: int = 6) -> list[RankVector]:
    return [
        v
        for d in range(1, max_dim + 1)
        for v in enumerate_candidates(d)
        if solve_symmetric(v, pad=0) is not None
    ]


def synthesis_suite(max_dim: int = 6) -> list[tuple[RankVector, Povm]]:
    return [(v, synthesize_vector(v, seed=0)) for v in symmetric_vectors(max_dim)]


def extreme_input(seed: int, max_dim: int = 4) -> Povm:
    """A certified-extreme POVM of one of several kinds, chosen by ``seed``."""
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, max_dim + 1))
    kind = seed % 3
    if kind == 0:
        comps = list(compositions(d))
        return con.pvm(comps[int(rng.integers(len(comps)))])
    if kind == 1:
        return con.rank1_chain(d, int(rng.integers(d, d * d + 1)), seed=rng)
    vecs = [v for v in symmetric_vectors(d) if v.dim == d]
    return synthesize_vector(vecs[int(rng.integers(len(vecs)))], seed=rng)


@dataclass
class ConstructionRun:
    op: str
    seed: int
    source: Povm
    result: Povm
    expected_ranks: tuple[int, ...] | None
    # delete_outcome may append rank-1 pads; they are checked separately
    allow_rank1_tail: bool = False


def _random_parts(r: int, rng) -> list[int]:
    comps = list(compositions(r)) if r else [()]
    return list(comps[int(rng.integers(len(comps)))])


def construction_run(op: str, seed: int) -> ConstructionRun:
    rng = np.random.default_rng(10_000 + seed)
    k = seed
    src = extreme_input(k)
    if op == "add_rank1":
        while sum(r * r for r in src.ranks) >= src.dim**2:
            k += 1000
            src = extreme_input(k)
        out = con.add_rank1(src, seed=rng)
        return ConstructionRun(op, seed, src, out, src.ranks + (1,))
    if op == "delete_outcome":
        while src.n_outcomes < 2:
            k += 1000
            src = extreme_input(k)
        h = int(rng.integers(src.n_outcomes))
        out = con.delete_outcome(src, h, seed=rng)
        kept = src.ranks[:h] + src.ranks[h + 1 :]
        return ConstructionRun(op, seed, src, out, kept, allow_rank1_tail=True)
    if op == "refine":
        partition = [_random_parts(r, rng) for r in src.ranks]
        out = con.refine(src, partition)
        return ConstructionRun(op, seed, src, out, tuple(p for parts in partition for p in parts))
    if op == "multiply_ranks":
        factor = int(rng.integers(1, 3)) if src.dim > 2 else int(rng.integers(1, 4))
        out = con.multiply_ranks(src, factor)
        return ConstructionRun(op, seed, src, out, tuple(factor * r for r in src.ranks))
    if op == "increase_rank":
        h = int(rng.integers(src.n_outcomes))
        out = con.increase_rank(src, h)
        ranks = list(src.ranks)
        ranks[h] += 1
        return ConstructionRun(op, seed, src, out, tuple(ranks))
    if op == "lift_dimension":
        h = int(rng.integers(src.n_outcomes))
        p = int(rng.integers(1, 3))
        out = con.lift_dimension(src, p, h)
        orig = src.ranks[h]
        middle = ((orig,) if orig else ()) + (1,) * p
        return ConstructionRun(op, seed, src, out, src.ranks[:h] + middle + src.ranks[h + 1 :])
    raise ValueError(op)


def ranks_match(run: ConstructionRun) -> bool:
    got = run.result.ranks
    want = run.expected_ranks
    if run.allow_rank1_tail:
        tail = got[len(want) :]
        return got[: len(want)] == want and all(r == 1 for r in tail) and len(tail) <= run.source.dim
    return got == want


def construction_suite(runs_per_op: int = 50) -> list[ConstructionRun]:
    return [construction_run(op, s) for op in OPS for s in range(runs_per_op)]


def mixture(a: Povm, b: Povm, weight: float = 0.5) -> Povm:
    return validate_povm(
        [weight * x + (1 - weight) * y for x, y in zip(a.effects, b.effects)], a.dim
    )


def random_suite(count: int, seed: int = 0) -> list[Povm]:
    """Random POVMs from random isometries; many are extreme, many are not."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        d = int(rng.integers(1, 5))
        n_big = int(rng.integers(0, 3))
        ranks = tuple(sorted((int(rng.integers(2, d + 1)) for _ in range(n_big) if d >= 2), reverse=True))
        pad = int(rng.integers(0, d * d + 3))
        if sum(ranks) + pad < d:
            pad = d - sum(ranks)
        out.append(random_povm(RankVector(d, ranks), pad, seed=rng))
    return out
