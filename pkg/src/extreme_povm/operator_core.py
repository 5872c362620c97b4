"""Dense complex operators, POVM validation and spectral bookkeeping.

Effects are plain ``numpy`` complex arrays of shape ``(d, d)``.  A
:class:`Povm` is only ever produced by :func:`validate_povm` (directly or
through one of the constructions), so holding one means the effects are
Hermitian, positive semidefinite and sum to the identity within the active
:class:`Tolerances`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DecompositionFailure,
    NotHermitian,
    NotNormalized,
    NotPositive,
    SingularSum,
)

__all__ = [
    "Tolerances",
    "DEFAULT",
    "STRICT",
    "tolerance_profile",
    "Povm",
    "SpectralDecomposition",
    "validate_povm",
    "spectral_decompose",
    "conjugate_renormalize",
    "numerical_rank",
    "sorted_eigh",
    "inverse_sqrt",
    "projector",
    "embed",
]


@dataclass(frozen=True)
class Tolerances:
    """Absolute and relative thresholds used by every numerical decision.

    ``rank`` is relative: an eigenvalue (or singular value) counts iff it
    exceeds ``rank`` times the largest one.  All others are absolute.
    """

    herm: float = 1e-9
    psd: float = 1e-9
    sum: float = 1e-9
    rank: float = 1e-8
    recon: float = 1e-7
    inv: float = 1e-10
    iso: float = 1e-9
    name: str = "default"

    def scaled(self, factor: float, name: str | None = None) -> "Tolerances":
        return Tolerances(
            herm=self.herm * factor,
            psd=self.psd * factor,
            sum=self.sum * factor,
            rank=self.rank * factor,
            recon=self.recon * factor,
            inv=self.inv * factor,
            iso=self.iso * factor,
            name=name or f"{self.name}*{factor:g}",
        )


DEFAULT = Tolerances()
STRICT = DEFAULT.scaled(0.01, name="strict")

_PROFILES = {"default": DEFAULT, "strict": STRICT}


def tolerance_profile(name: str) -> Tolerances:
    try:
        return _PROFILES[name]
    except KeyError:
        raise ValueError(
            f"unknown tolerance profile {name!r}; expected one of {sorted(_PROFILES)}"
        ) from None


def _as_matrix(a) -> np.ndarray:
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=np.complex128, copy=True)
    m.setflags(write=False)
    return m


def projector(v) -> np.ndarray:
    """Return ``|v><v|`` (no normalisation)."""
    v = np.asarray(v, dtype=np.complex128).ravel()
    return np.outer(v, v.conj())


def _phase_normalize(vecs: np.ndarray) -> np.ndarray:
    # make the first non-negligible component of every column real positive
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-10)
        if idx.size:
            c = col[idx[0]]
            out[:, k] = col * (np.conj(c) / abs(c))
    return out


def sorted_eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a Hermitian matrix with a deterministic ordering.

    Eigenvalues come out descending.  Each eigenvector is phase-normalised so
    its first non-negligible entry is real positive, and (numerically) equal
    eigenvalues are ordered lexicographically by their eigenvectors.
    """
    h = (m + m.conj().T) / 2
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise DecompositionFailure(str(exc)) from exc
    v = _phase_normalize(v)
    order = list(np.argsort(-w, kind="stable"))
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    groups: list[list[int]] = []
    for i in order:
        if groups and abs(w[groups[-1][0]] - w[i]) <= 1e-12 * scale:
            groups[-1].append(i)
        else:
            groups.append([i])

    def lex(i):
        col = np.round(v[:, i], 10)
        return tuple(x for z in col for x in (z.real, z.imag))

    final = [i for g in groups for i in sorted(g, key=lex, reverse=True)]
    return w[final], v[:, final]


def _rank_cutoff(w: np.ndarray, tol: Tolerances) -> float:
    top = float(np.max(w)) if w.size else 0.0
    if top <= tol.psd:
        return np.inf  # numerically zero operator
    return tol.rank * top


def numerical_rank(m, tol: Tolerances = DEFAULT) -> int:
    """Number of eigenvalues above ``tol.rank`` times the largest one."""
    w = np.linalg.eigvalsh((np.asarray(m) + np.asarray(m).conj().T) / 2)
    return int(np.count_nonzero(w > _rank_cutoff(w, tol)))


def inverse_sqrt(t: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """``T^{-1/2}`` for a positive definite ``T``; raises :class:`SingularSum`."""
    w, v = np.linalg.eigh((t + t.conj().T) / 2)
    if w.min() <= tol.inv:
        raise SingularSum(
            f"sum of effects is not invertible (min eigenvalue {w.min():.3e})"
        )
    return (v / np.sqrt(w)) @ v.conj().T


@dataclass(frozen=True)
class Povm:
    """A validated finite-outcome POVM on ``C^dim``."""

    dim: int
    effects: tuple[np.ndarray, ...]
    ranks: tuple[int, ...]
    tol: Tolerances = field(default=DEFAULT, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.effects)

    def __iter__(self):
        return iter(self.effects)

    def __getitem__(self, j) -> np.ndarray:
        return self.effects[j]

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    def total(self) -> np.ndarray:
        return np.sum(self.effects, axis=0)

    def with_tolerances(self, tol: Tolerances) -> "Povm":
        """Re-validate under another tolerance profile."""
        return validate_povm(self.effects, self.dim, tol=tol)


def _check_effect(m: np.ndarray, j: int, tol: Tolerances) -> np.ndarray:
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > tol.herm:
        raise NotHermitian(
            f"effect {j} is not Hermitian (max |A - A^dag| = {dev:.3e})",
            outcome=j,
            magnitude=dev,
        )
    h = (m + m.conj().T) / 2
    low = float(np.linalg.eigvalsh(h).min())
    if low < -tol.psd:
        raise NotPositive(
            f"effect {j} is not positive semidefinite (min eigenvalue {low:.3e})",
            outcome=j,
            magnitude=-low,
        )
    return h


def validate_povm(effects: Iterable, dim: int | None = None, tol: Tolerances = DEFAULT) -> Povm:
    """Check that ``effects`` form a POVM and return it as a :class:`Povm`.

    Parameters
    ----------
    effects : iterable of array_like
        Square complex matrices, all ``dim x dim``.
    dim : int, optional
        Hilbert-space dimension; inferred from the first effect if omitted.
    tol : Tolerances
        Thresholds for the Hermitian, positivity and normalisation checks.

    Raises
    ------
    NotHermitian, NotPositive, NotNormalized
        With ``outcome`` and ``magnitude`` attributes describing the violation.
    """
    mats = [_as_matrix(e) for e in effects]
    if not mats:
        raise NotNormalized("a POVM needs at least one effect", magnitude=1.0)
    if dim is None:
        dim = mats[0].shape[0]
    for j, m in enumerate(mats):
        if m.shape != (dim, dim):
            raise ValueError(f"effect {j} has shape {m.shape}, expected {(dim, dim)}")
    herm = [_check_effect(m, j, tol) for j, m in enumerate(mats)]
    dev = float(np.max(np.abs(np.sum(herm, axis=0) - np.eye(dim))))
    if dev > tol.sum:
        raise NotNormalized(
            f"effects do not sum to the identity (max deviation {dev:.3e})",
            magnitude=dev,
        )
    ranks = tuple(numerical_rank(m, tol) for m in herm)
    return Povm(dim=dim, effects=tuple(_frozen(m) for m in herm), ranks=ranks, tol=tol)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Unnormalised spectral vectors of every effect.

    ``vectors[j]`` is a ``d x r_j`` matrix whose columns are the ``f_jk`` with
    ``|f_jk|^2`` equal to the k-th largest eigenvalue of effect ``j``.
    """

    dim: int
    vectors: tuple[np.ndarray, ...]
    eigenvalues: tuple[np.ndarray, ...]

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(f.shape[1] for f in self.vectors)

    def reconstruct(self) -> list[np.ndarray]:
        return [f @ f.conj().T for f in self.vectors]


def spectral_decompose(povm: Povm, tol: Tolerances | None = None) -> SpectralDecomposition:
    tol = tol or povm.tol
    vecs, vals = [], []
    for m in povm.effects:
        w, v = sorted_eigh(m)
        keep = w > _rank_cutoff(w, tol)
        w, v = w[keep], v[:, keep]
        f = v * np.sqrt(w)
        vecs.append(_frozen(f))
        vals.append(_frozen(w).real)
    return SpectralDecomposition(dim=povm.dim, vectors=tuple(vecs), eigenvalues=tuple(vals))


def conjugate_renormalize(
    sub_effects: Sequence, dim: int | None = None, tol: Tolerances = DEFAULT
) -> Povm:
    """Map positive operators with invertible sum ``T`` to ``T^{-1/2} M_j T^{-1/2}``.

    Raises :class:`SingularSum` when the smallest eigenvalue of ``T`` is at
    most ``tol.inv``.
    """
    mats = [_check_effect(_as_matrix(m), j, tol) for j, m in enumerate(sub_effects)]
    if dim is None:
        dim = mats[0].shape[0]
    s = inverse_sqrt(np.sum(mats, axis=0), tol)
    out = []
    for m in mats:
        c = s @ m @ s
        out.append((c + c.conj().T) / 2)
    return validate_povm(out, dim, tol=tol)


def embed(m: np.ndarray, dim: int) -> np.ndarray:
    """Zero-extend a square matrix to ``dim x dim`` (top-left block)."""
    out = np.zeros((dim, dim), dtype=np.complex128)
    k = m.shape[0]
    out[:k, :k] = m
    return out

