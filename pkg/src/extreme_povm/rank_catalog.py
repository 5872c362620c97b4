"""Rank vectors of extreme POVMs: canonical form, necessary conditions, catalog.

A rank vector is written ``(3,2_3)_5``: descending ranks of at least 2 with
repeat counts as subscripts, and the dimension last.  Rank-1 outcomes are
dropped in canonical form because they can be added freely while the squared
ranks still fit in ``d^2``.

:func:`derive_feasible` closes the PVM rank vectors under the rank arithmetic
of the constructions module (add a rank-1 outcome, delete, refine, multiply,
increase a rank, lift the dimension).  Every vector it reaches carries a
derivation trace that :func:`replay` executes on concrete POVMs.
"""
from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import CannotComplete, PreconditionError

__all__ = [
    "RankVector",
    "ConditionReport",
    "Status",
    "Step",
    "FeasibilityRecord",
    "canonicalize",
    "parse_vector",
    "necessary_conditions",
    "enumerate_candidates",
    "derive_feasible",
    "replay",
    "catalog_to_dict",
    "format_catalog",
]


@dataclass(frozen=True, order=True)
class RankVector:
    dim: int
    ranks: tuple[int, ...]
    rank1_pad: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")
        if any(r < 2 for r in self.ranks):
            raise ValueError("canonical ranks must all be >= 2")
        if list(self.ranks) != sorted(self.ranks, reverse=True):
            raise ValueError("ranks must be in descending order")
        if self.rank1_pad < 0:
            raise ValueError("rank1_pad must be non-negative")

    def groups(self) -> list[tuple[int, int]]:
        """``(rank, multiplicity)`` pairs in descending rank order."""
        return [(m, len(list(g))) for m, g in itertools.groupby(self.ranks)]

    @property
    def area(self) -> int:
        return sum(r * r for r in self.ranks)

    @property
    def capacity(self) -> int:
        """Rank-1 outcomes that still fit under the squared-rank bound."""
        return self.dim * self.dim - self.area

    def canonical(self) -> "RankVector":
        return RankVector(self.dim, self.ranks)

    def materialized(self) -> tuple[int, ...]:
        return self.ranks + (1,) * self.rank1_pad

    @property
    def is_trivial(self) -> bool:
        return self.ranks == (self.dim,)

    def __str__(self) -> str:
        parts = [str(m) if s == 1 else f"{m}_{s}" for m, s in self.groups()]
        return f"({','.join(parts)})_{self.dim}"


def canonicalize(raw: Iterable[int], dim: int) -> RankVector:
    """Sort descending, count the 1s into ``rank1_pad`` and drop zeros."""
    raw = [int(r) for r in raw]
    if any(r < 0 for r in raw):
        raise ValueError("ranks must be non-negative")
    big = tuple(sorted((r for r in raw if r >= 2), reverse=True))
    return RankVector(dim, big, rank1_pad=raw.count(1))


def parse_vector(text: str, dim: int) -> RankVector:
    """Parse ``"3,2,2,2"`` (or ``"3,2_3"``) into a :class:`RankVector`."""
    raw: list[int] = []
    for token in text.replace(" ", "").split(","):
        if not token:
            continue
        if "_" in token:
            value, count = token.split("_", 1)
            raw.extend([int(value)] * int(count))
        else:
            raw.append(int(token))
    return canonicalize(raw, dim)


@dataclass(frozen=True)
class ConditionReport:
    rank_sum: int
    square_sum: int
    top_pair: int
    dim: int

    @property
    def sum_ok(self) -> bool:
        return self.rank_sum >= self.dim

    @property
    def squares_ok(self) -> bool:
        return self.square_sum <= self.dim * self.dim

    @property
    def pairs_ok(self) -> bool:
        return self.top_pair <= self.dim

    @property
    def ok(self) -> bool:
        return self.sum_ok and self.squares_ok and self.pairs_ok

    def violated(self) -> list[str]:
        names = [("i", self.sum_ok), ("ii", self.squares_ok), ("iii", self.pairs_ok)]
        return [n for n, good in names if not good]


def necessary_conditions(vec: RankVector, pad: int | None = None) -> ConditionReport:
    """Conditions every extreme POVM's ranks satisfy, with ``pad`` rank-1 outcomes.

    (i) the ranks sum to at least ``d``; (ii) the squared ranks sum to at
    most ``d^2``; (iii) no two ranks sum to more than ``d``.
    """
    pad = vec.rank1_pad if pad is None else pad
    full = sorted(vec.ranks + (1,) * pad, reverse=True)
    top = full[0] + full[1] if len(full) >= 2 else 0
    return ConditionReport(
        rank_sum=sum(full),
        square_sum=sum(r * r for r in full),
        top_pair=top,
        dim=vec.dim,
    )


def _admissible(vec: RankVector) -> bool:
    return any(necessary_conditions(vec, p).ok for p in range(vec.capacity + 1)) if vec.capacity >= 0 else False


def _vectors_up_to_area(dim: int) -> list[RankVector]:
    out = []

    def rec(prefix: list[int], top: int, area: int):
        out.append(RankVector(dim, tuple(prefix)))
        for r in range(min(top, dim), 1, -1):
            if area + r * r <= dim * dim:
                rec(prefix + [r], r, area + r * r)

    rec([], dim, 0)
    return out


def enumerate_candidates(dim: int) -> list[RankVector]:
    """Canonical vectors passing the necessary conditions for some pad."""
    if not 1 <= dim <= 8:
        raise PreconditionError(f"candidate enumeration supports 1 <= d <= 8, got {dim}")
    return sorted((v for v in _vectors_up_to_area(dim) if _admissible(v)), reverse=True)


# --- closure --------------------------------------------------------------


class Status(str, enum.Enum):
    FEASIBLE_CONSTRUCTIVE = "FEASIBLE_CONSTRUCTIVE"
    FEASIBLE_NUMERICAL = "FEASIBLE_NUMERICAL"
    INFEASIBLE = "INFEASIBLE"
    OPEN = "OPEN"


@dataclass(frozen=True)
class Step:
    """One move of a derivation: ``op`` with keyword ``params``."""

    op: str
    params: tuple[tuple[str, object], ...] = ()

    def get(self, key, default=None):
        return dict(self.params).get(key, default)

    def to_dict(self) -> dict:
        out = {"op": self.op}
        for k, v in self.params:
            out[k] = list(v) if isinstance(v, tuple) else v
        return out

    def __str__(self) -> str:
        args = ", ".join(f"{k}={list(v) if isinstance(v, tuple) else v}" for k, v in self.params)
        return f"{self.op}({args})"


def _step(op: str, **params) -> Step:
    return Step(op, tuple(params.items()))


@dataclass(frozen=True)
class FeasibilityRecord:
    vector: RankVector
    status: Status
    trace: tuple[Step, ...] | None = None
    violated: tuple[str, ...] = ()
    witness: object = field(default=None, compare=False)

    def to_dict(self) -> dict:
        out = {"vector": str(self.vector), "ranks": list(self.vector.ranks), "status": self.status.value}
        if self.trace is not None:
            out["trace"] = [s.to_dict() for s in self.trace]
        if self.violated:
            out["violated"] = list(self.violated)
        return out


def _partitions(n: int, largest: int | None = None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def _canon(ranks: Iterable[int], dim: int) -> RankVector:
    return RankVector(dim, tuple(sorted((r for r in ranks if r >= 2), reverse=True)))


def _moves(vec: RankVector, top_dim: int):
    """Rank-level images of the constructions applied to ``vec``."""
    d = vec.dim
    ranks = vec.ranks
    cap = vec.capacity
    for m in dict.fromkeys(ranks):
        i = ranks.index(m)
        rest = ranks[:i] + ranks[i + 1 :]
        yield _step("delete", rank=m), _canon(rest, d)
        for parts in _partitions(m):
            if len(parts) > 1:
                yield _step("refine", rank=m, parts=parts), _canon(rest + parts, d)
        if d + 1 <= top_dim:
            yield _step("increase", rank=m), _canon(rest + (m + 1,), d + 1)
    if cap >= 1 and d + 1 <= top_dim:
        yield _step("increase", rank=1), _canon(ranks + (2,), d + 1)
    for p in range(1, top_dim - d + 1):
        yield _step("lift", p=p), RankVector(d + p, ranks)
    for factor in range(2, top_dim // d + 1):
        for pad in range(cap + 1):
            grown = tuple(factor * r for r in ranks) + (factor,) * pad
            yield _step("multiply", factor=factor, pad=pad), _canon(grown, factor * d)


@lru_cache(maxsize=None)
def _closure(top_dim: int, use_packing: bool) -> dict[RankVector, tuple[Step, ...]]:
    traces: dict[RankVector, tuple[Step, ...]] = {}
    queue: deque[RankVector] = deque()
    for d in range(1, top_dim + 1):
        for part in _partitions(d):
            vec = _canon(part, d)
            if vec not in traces:
                traces[vec] = (_step("pvm", partition=part),)
                queue.append(vec)
    if use_packing:
        from .packing import solve_symmetric

        for d in range(1, top_dim + 1):
            for vec in enumerate_candidates(d):
                if vec not in traces and solve_symmetric(vec) is not None:
                    traces[vec] = (_step("synthesize", ranks=vec.ranks, dim=d),)
                    queue.append(vec)
    while queue:
        vec = queue.popleft()
        for step, nxt in _moves(vec, top_dim):
            if nxt in traces or not _admissible(nxt):
                continue
            traces[nxt] = traces[vec] + (step,)
            queue.append(nxt)
    return traces


def derive_feasible(
    dim: int,
    use_packing: bool = False,
    numerical_budget: int = 0,
    seed: int = 0,
) -> list[FeasibilityRecord]:
    """Catalog of rank vectors in dimension ``dim`` (the trivial ``(d)_d`` omitted).

    Vectors with entries in ``[2, d]`` and squared sum at most ``d^2`` are
    classified as INFEASIBLE (violating a necessary condition),
    FEASIBLE_CONSTRUCTIVE (reached by the closure, with trace) or OPEN.
    ``use_packing`` also seeds the closure with every vector whose symmetric
    packing problem is solvable.  With ``numerical_budget > 0`` each OPEN
    vector is handed to the randomized search and upgraded to
    FEASIBLE_NUMERICAL when a certified witness turns up.
    """
    if not 1 <= dim <= 7:
        raise PreconditionError(f"catalog derivation supports 1 <= d <= 7, got {dim}")
    traces = _closure(dim, use_packing)
    records = []
    for vec in sorted(_vectors_up_to_area(dim), reverse=True):
        if vec.is_trivial:
            continue
        if not _admissible(vec):
            worst = necessary_conditions(vec, 0)
            records.append(FeasibilityRecord(vec, Status.INFEASIBLE, violated=tuple(worst.violated())))
        elif vec in traces:
            records.append(FeasibilityRecord(vec, Status.FEASIBLE_CONSTRUCTIVE, trace=traces[vec]))
        else:
            records.append(FeasibilityRecord(vec, Status.OPEN))
    if numerical_budget > 0:
        from .search import search_extreme

        upgraded = []
        for rec in records:
            if rec.status is Status.OPEN:
                report = search_extreme(rec.vector, numerical_budget, seed)
                if report.found is not None:
                    rec = FeasibilityRecord(rec.vector, Status.FEASIBLE_NUMERICAL, witness=report.found)
            upgraded.append(rec)
        records = upgraded
    return records


def catalog_to_dict(dim: int, records: Sequence[FeasibilityRecord]) -> dict:
    return {"dim": dim, "records": [r.to_dict() for r in records]}


def format_catalog(records: Sequence[FeasibilityRecord], traces: bool = True) -> str:
    width = max((len(str(r.vector)) for r in records), default=8)
    lines = []
    for r in records:
        line = f"{str(r.vector):<{width}}  {r.status.value}"
        if r.violated:
            line += "  violates (" + ", ".join(r.violated) + ")"
        if traces and r.trace:
            line += "  <- " + " ; ".join(str(s) for s in r.trace)
        lines.append(line)
    return "\n".join(lines) + "\n"


# --- concrete replay ------------------------------------------------------


def _index_of_rank(povm, rank: int) -> int:
    for j, r in enumerate(povm.ranks):
        if r == rank:
            return j
    raise PreconditionError(f"no outcome of rank {rank} in POVM with ranks {povm.ranks}")


def _set_rank1_count(povm, target: int, rng):
    from .constructions import add_rank1, delete_outcome

    for _ in range(4 * povm.dim * povm.dim + 4):
        ones = [j for j, r in enumerate(povm.ranks) if r == 1]
        if len(ones) == target:
            return povm
        if len(ones) < target:
            povm = add_rank1(povm, rng)
            continue
        norms = [float(np.linalg.eigvalsh(povm.effects[j]).max()) for j in ones]
        j = int(np.argmin(norms))
        if norms[j] < 1 - 1e-6:
            povm = delete_outcome(povm, ones[j], rng)
        elif sum(r * r for r in povm.ranks) < povm.dim ** 2:
            povm = add_rank1(povm, rng)
        else:
            break
    raise CannotComplete(f"could not adjust the POVM to exactly {target} rank-1 outcomes")


def replay(trace: Sequence[Step], seed: int = 0, tol=None):
    """Execute a derivation trace on concrete POVMs and return the result."""
    from . import constructions as con
    from .operator_core import DEFAULT

    tol = tol or DEFAULT
    rng = np.random.default_rng(seed)
    povm = None
    for step in trace:
        if step.op == "pvm":
            povm = con.pvm(list(step.get("partition")), tol=tol)
        elif step.op == "synthesize":
            from .synthesis import synthesize_vector

            vec = RankVector(step.get("dim"), tuple(step.get("ranks")))
            povm = synthesize_vector(vec, seed=rng, tol=tol)
        elif step.op == "delete":
            povm = con.delete_outcome(povm, _index_of_rank(povm, step.get("rank")), rng)
        elif step.op == "refine":
            h = _index_of_rank(povm, step.get("rank"))
            partition = [[r] if r else [] for r in povm.ranks]
            partition[h] = list(step.get("parts"))
            povm = con.refine(povm, partition)
        elif step.op == "increase":
            rank = step.get("rank")
            if rank == 1 and 1 not in povm.ranks:
                povm = con.add_rank1(povm, rng)
            povm = con.increase_rank(povm, _index_of_rank(povm, rank))
        elif step.op == "lift":
            povm = con.lift_dimension(povm, step.get("p"))
        elif step.op == "multiply":
            povm = _set_rank1_count(povm, step.get("pad"), rng)
            povm = con.multiply_ranks(povm, step.get("factor"))
        else:
            raise ValueError(f"unknown derivation step {step.op!r}")
    return povm
