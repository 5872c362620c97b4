"""Randomised search for extreme POVMs with a prescribed rank vector.

Each trial draws a random isometry ``J: C^d -> C^D`` and sets
``M_j = J^dagger P_j J`` for consecutive coordinate blocks ``P_j``.  Trials use
numpy's PCG64 seeded through ``SeedSequence(seed, spawn_key=(trial,))`` so a
report depends only on ``(vector, budget, seed)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import io
from .errors import ConditionViolated, PreconditionError, RankMiss
from .extremality import check_extreme_c
from .operator_core import DEFAULT, Povm, Tolerances, validate_povm
from .rank_catalog import RankVector, canonicalize, necessary_conditions

__all__ = ["PRNG_ID", "SearchReport", "random_povm", "candidate_pads", "search_extreme"]

PRNG_ID = "numpy-PCG64/SeedSequence(seed, spawn_key=(trial,))"
_MAX_RESAMPLES = 32


def _generator(seed, trial: int | None = None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    key = () if trial is None else (int(trial),)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def random_povm(vec: RankVector, pad: int = 0, seed=0, tol: Tolerances = DEFAULT) -> Povm:
    """Random POVM with effect ranks ``vec.ranks + (1,) * pad``."""
    ranks = list(vec.ranks) + [1] * int(pad)
    d = vec.dim
    big = sum(ranks)
    if big < d:
        raise PreconditionError(f"total rank {big} is below the dimension {d}")
    rng = _generator(seed)
    for _ in range(_MAX_RESAMPLES):
        g = rng.normal(size=(big, d)) + 1j * rng.normal(size=(big, d))
        j, _ = np.linalg.qr(g)
        effects, start = [], 0
        for r in ranks:
            rows = j[start : start + r]
            effects.append(rows.conj().T @ rows)
            start += r
        povm = validate_povm(effects, d, tol=tol)
        if list(povm.ranks) == ranks:
            return povm
    raise RankMiss(f"sampled ranks missed {tuple(ranks)} in {_MAX_RESAMPLES} draws")


def candidate_pads(vec: RankVector) -> list[int]:
    """Pad counts tried by the search, ascending, all passing the necessary conditions."""
    d = vec.dim
    start = max(0, d - sum(vec.ranks))
    pads = []
    pad = start
    while sum(r * r for r in vec.ranks) + pad <= d * d:
        if necessary_conditions(vec, pad).ok:
            pads.append(pad)
        pad += 1
    return pads


@dataclass
class SearchReport:
    target: RankVector
    trials: int
    found: Povm | None
    best_sv_gap: float
    seed: int
    budget: int
    pad: int | None = None
    found_trial: int | None = None
    prng: str = PRNG_ID
    pads_tried: list[int] = field(default_factory=list)

    def to_dict(self, include_povm: bool = False) -> dict:
        out = {
            "target": str(self.target),
            "dim": self.target.dim,
            "ranks": list(self.target.ranks),
            "budget": self.budget,
            "trials": self.trials,
            "seed": self.seed,
            "prng": self.prng,
            "pads_tried": list(self.pads_tried),
            "found": self.found is not None,
            "found_trial": self.found_trial,
            "pad": self.pad,
            "best_sv_gap": self.best_sv_gap if np.isfinite(self.best_sv_gap) else None,
        }
        if include_povm and self.found is not None:
            out["povm"] = io.povm_to_dict(self.found)
        return out

    def to_json(self, include_povm: bool = False) -> str:
        return io.dumps(self.to_dict(include_povm))


def search_extreme(vec: RankVector, budget: int = 1000, seed: int = 0, tol: Tolerances = DEFAULT) -> SearchReport:
    """Sample random POVMs until one is certified extreme with a reliable gap.

    The budget is split equally over the admissible pad counts (remainder to
    the smallest pads).  ``best_sv_gap`` is the largest gap ratio among trials
    judged extreme, or 0 if none were.
    """
    pads = candidate_pads(vec)
    if not pads:
        bad = necessary_conditions(vec, max(0, vec.dim - sum(vec.ranks))).violated()
        raise ConditionViolated(f"{vec} fails the necessary conditions for every pad: {', '.join(bad)}")
    budget = int(budget)
    share, extra = divmod(budget, len(pads))
    target = vec.canonical()
    best = 0.0
    trial = 0
    for i, pad in enumerate(pads):
        for _ in range(share + (1 if i < extra else 0)):
            rng = _generator(seed, trial)
            trial += 1
            try:
                povm = random_povm(vec, pad, rng, tol)
            except RankMiss:
                continue
            verdict = check_extreme_c(povm, tol, witness=False)
            if not verdict.is_extreme:
                continue
            best = max(best, float(verdict.sv_gap))
            got = canonicalize(povm.ranks, povm.dim)
            if verdict.reliable and got.canonical() == target:
                return SearchReport(target, trial, povm, best, int(seed), budget, pad, trial - 1, pads_tried=pads[: i + 1])
    return SearchReport(target, trial, None, best, int(seed), budget, pads_tried=pads)
