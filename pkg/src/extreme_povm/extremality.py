"""Extremality as a numerical rank decision.

A POVM is extreme iff the operators ``|f_jk><f_jl|`` built from the spectral
vectors of each effect are linearly independent.  :func:`check_extreme_c`
tests that directly; :func:`check_extreme_a` reaches the same matrix through
the minimal dilation, as the image of the block-diagonal operators under
``D -> J^dagger D J``.  Both report the singular values on either side of the
rank cutoff so that near-degenerate verdicts can be flagged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dilation import minimal_dilation
from .errors import DegenerateKernel, InvalidPovm, NoFeasibleScale, PreconditionError
from .operator_core import (
    Povm,
    SpectralDecomposition,
    Tolerances,
    spectral_decompose,
    validate_povm,
)

__all__ = [
    "RELIABLE_GAP",
    "ExtremalityVerdict",
    "NonExtremeWitness",
    "operator_system_matrix",
    "check_extreme_c",
    "check_extreme_a",
    "extract_witness",
    "is_extreme",
]

#: verdicts whose singular-value gap ratio falls below this are unreliable
RELIABLE_GAP = 1e3


@dataclass(frozen=True)
class NonExtremeWitness:
    """Two distinct POVMs whose midpoint is the tested POVM."""

    a: Povm
    b: Povm
    scale: float

    def midpoint_defect(self, povm: Povm) -> float:
        return max(
            float(np.max(np.abs((x + y) / 2 - m)))
            for x, y, m in zip(self.a.effects, self.b.effects, povm.effects)
        )

    def separation(self) -> float:
        return max(
            float(np.max(np.abs(x - y))) for x, y in zip(self.a.effects, self.b.effects)
        )


@dataclass(frozen=True)
class ExtremalityVerdict:
    is_extreme: bool
    gram_dim: int
    numerical_rank: int
    smallest_kept_sv: float
    largest_discarded_sv: float
    sv_gap: float
    criterion: str
    ranks: tuple[int, ...]
    witness: NonExtremeWitness | None = None
    kernel: np.ndarray | None = None

    @property
    def reliable(self) -> bool:
        return bool(self.sv_gap >= RELIABLE_GAP)

    @property
    def kernel_dim(self) -> int:
        return self.gram_dim - self.numerical_rank

    def as_dict(self) -> dict:
        gap = self.sv_gap if np.isfinite(self.sv_gap) else None
        return {
            "extreme": self.is_extreme,
            "rank": self.numerical_rank,
            "expected": self.gram_dim,
            "sv_gap": gap,
            "reliable": self.reliable,
            "smallest_kept_sv": self.smallest_kept_sv,
            "largest_discarded_sv": self.largest_discarded_sv,
            "ranks": list(self.ranks),
            "criterion": self.criterion,
        }


def operator_system_matrix(spec: SpectralDecomposition) -> np.ndarray:
    """Columns are ``vec(|f_jk><f_jl|)`` ordered by ``(j, k, l)``; shape ``d^2 x sum r_j^2``."""
    d = spec.dim
    cols = []
    for f in spec.vectors:
        r = f.shape[1]
        for k in range(r):
            for l in range(r):
                cols.append(np.outer(f[:, k], f[:, l].conj()).ravel())
    if not cols:
        return np.zeros((d * d, 0), dtype=np.complex128)
    return np.array(cols).T


def _rank_decision(mat: np.ndarray, tol: Tolerances):
    """Numerical column rank with the singular values bracketing the cutoff.

    With full column rank nothing is discarded; the gap is then measured
    against the cutoff itself, the nearest value that would flip the verdict.
    """
    n = mat.shape[1]
    s = np.linalg.svd(mat, compute_uv=False)
    if not s.size or s[0] == 0:
        return 0, 0.0, 0.0, 0.0
    cutoff = tol.rank * s[0]
    rank = int(np.count_nonzero(s > cutoff))
    kept = float(s[rank - 1])
    if rank == n:
        return rank, kept, 0.0, float(kept / cutoff)
    discarded = float(s[rank]) if rank < s.size else 0.0
    gap = kept / discarded if discarded > 0 else np.inf
    return rank, kept, discarded, gap


def _kernel_basis(mat: np.ndarray, rank: int) -> np.ndarray:
    _, _, vh = np.linalg.svd(mat, full_matrices=True)
    return vh[rank:].conj().T


def _verdict(mat, povm, spec, tol, criterion, witness) -> ExtremalityVerdict:
    gram = mat.shape[1]
    rank, kept, discarded, gap = _rank_decision(mat, tol)
    extreme = rank == gram
    kernel = None
    wit = None
    if not extreme:
        kernel = _kernel_basis(mat, rank)[:, 0]
        if witness:
            try:
                wit = extract_witness(povm, kernel, tol=tol, _spec=spec)
            except (DegenerateKernel, NoFeasibleScale):
                wit = None
    return ExtremalityVerdict(
        is_extreme=extreme,
        gram_dim=gram,
        numerical_rank=rank,
        smallest_kept_sv=kept,
        largest_discarded_sv=discarded,
        sv_gap=gap,
        criterion=criterion,
        ranks=spec.ranks,
        witness=wit,
        kernel=kernel,
    )


def check_extreme_c(povm: Povm, tol: Tolerances | None = None, witness: bool = True) -> ExtremalityVerdict:
    """Linear independence of the spectral outer products.

    When the POVM is not extreme and ``witness`` is set, a mixing witness is
    attached (``None`` if extraction fails numerically).
    """
    tol = tol or povm.tol
    spec = spectral_decompose(povm, tol)
    return _verdict(operator_system_matrix(spec), povm, spec, tol, "C", witness)


def check_extreme_a(povm: Povm, tol: Tolerances | None = None, witness: bool = False) -> ExtremalityVerdict:
    """Injectivity of ``D -> J^dagger D J`` on block-diagonal ``D``."""
    tol = tol or povm.tol
    dil = minimal_dilation(povm, tol)
    j = np.asarray(dil.isometry)
    big = dil.dilation_dim
    cols = []
    for s in dil.block_slices():
        for a in range(s.start, s.stop):
            for b in range(s.start, s.stop):
                unit = np.zeros((big, big), dtype=np.complex128)
                unit[a, b] = 1.0
                cols.append((j.conj().T @ unit @ j).ravel())
    d = povm.dim
    mat = np.array(cols).T if cols else np.zeros((d * d, 0), dtype=np.complex128)
    spec = spectral_decompose(povm, tol) if witness else _ranks_only(dil)
    return _verdict(mat, povm, spec, tol, "A", witness)


def _ranks_only(dil) -> SpectralDecomposition:
    # carries the block sizes for reporting; vectors rebuilt from J rows
    j = np.asarray(dil.isometry)
    vecs = tuple(j[s].conj().T for s in dil.block_slices())
    vals = tuple(np.sum(np.abs(v) ** 2, axis=0) for v in vecs)
    return SpectralDecomposition(dim=dil.dim, vectors=vecs, eigenvalues=vals)


def is_extreme(povm: Povm, tol: Tolerances | None = None) -> bool:
    return check_extreme_c(povm, tol, witness=False).is_extreme


def extract_witness(
    povm: Povm,
    kernel_vector,
    tol: Tolerances | None = None,
    _spec: SpectralDecomposition | None = None,
) -> NonExtremeWitness:
    """Turn a kernel element of the criterion-(C) matrix into a mixing pair.

    The kernel coefficients are read as per-outcome ``r_j x r_j`` blocks
    ``C_j`` with ``sum_j F_j C_j F_j^dagger = 0``.  Their Hermitian part (or,
    if that vanishes, the anti-Hermitian part times ``-i``) gives Hermitian
    perturbations ``Delta_j = F_j H_j F_j^dagger`` summing to zero.  The
    largest ``eps = 2^-k`` keeping both ``M +- eps Delta`` valid is used.
    """
    tol = tol or povm.tol
    spec = _spec or spectral_decompose(povm, tol)
    c = np.asarray(kernel_vector, dtype=np.complex128).ravel()
    gram = sum(r * r for r in spec.ranks)
    if c.size != gram:
        raise PreconditionError(f"kernel vector has length {c.size}, expected {gram}")
    norm = float(np.linalg.norm(c))
    if norm == 0:
        raise PreconditionError("kernel vector must be nonzero")
    mat = operator_system_matrix(spec)
    if float(np.linalg.norm(mat @ c)) > 1e3 * tol.rank * max(1.0, norm):
        raise PreconditionError("vector is not in the kernel; the POVM may be extreme")
    blocks, pos = [], 0
    for r in spec.ranks:
        blocks.append(c[pos : pos + r * r].reshape(r, r))
        pos += r * r

    hs = [(b + b.conj().T) / 2 for b in blocks]
    size = max((float(np.max(np.abs(h))) for h in hs if h.size), default=0.0)
    if size <= 1e-10 * norm:
        hs = [(b - b.conj().T) / 2j for b in blocks]
        size = max((float(np.max(np.abs(h))) for h in hs if h.size), default=0.0)
        if size <= 1e-10 * norm:
            raise DegenerateKernel("symmetrised perturbation vanishes")
    spread = max(float(np.linalg.norm(h, 2)) for h in hs if h.size)
    deltas = [f @ (h / spread) @ f.conj().T for f, h in zip(spec.vectors, hs)]
    for k in range(1, 41):
        eps = 2.0**-k
        try:
            a = validate_povm([m + eps * dl for m, dl in zip(povm.effects, deltas)], povm.dim, tol)
            b = validate_povm([m - eps * dl for m, dl in zip(povm.effects, deltas)], povm.dim, tol)
        except InvalidPovm:
            continue
        if eps <= 100 * tol.sum:
            break
        wit = NonExtremeWitness(a=a, b=b, scale=eps)
        if wit.separation() <= 10 * tol.sum:
            raise DegenerateKernel("perturbation too small to separate the pair")
        return wit
    raise NoFeasibleScale("no scale above 100*eps_sum keeps both perturbations valid")
