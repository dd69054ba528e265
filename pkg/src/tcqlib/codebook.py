"""Reproduction codebooks: unbounded lattice cosets and finite alphabets.

Both codebook kinds expose the same two methods used by the Viterbi search:

``branch_costs(x)``
    ``x`` has shape ``(..., L, N)``.  Returns the squared error of the nearest
    point of every coset at every step, shape ``(..., L, 4)``, together with
    integer selectors of shape ``(..., L, 4, N)`` identifying that point.
``reconstruct(cosets, selectors)``
    Inverse of the selection: coset indices ``(..., L)`` and selectors
    ``(..., L, N)`` back to points ``(..., L, N)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .labeling import Partition

__all__ = [
    "LatticeCodebook",
    "FiniteAlphabet",
    "nearest_in_coset_lattice",
    "nearest_in_subset_finite",
    "init_alphabet",
    "optimize_alphabet",
    "save_alphabet",
    "load_alphabet",
]


@dataclass(frozen=True)
class LatticeCodebook:
    partition: Partition
    offset: float = 0.0

    @property
    def dim(self) -> int:
        return self.partition.dim

    def branch_costs(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=np.float64)
        step = float(self.partition.step)
        reps = self.partition.reps_array + self.offset  # (4, N)
        shifted = x[..., None, :] - reps  # (..., L, 4, N)
        sel = np.floor(shifted / step + 0.5)
        err = shifted - step * sel
        costs = (err * err).sum(axis=-1)
        return costs, sel.astype(np.int64)

    def reconstruct(self, cosets: np.ndarray, selectors: np.ndarray) -> np.ndarray:
        reps = self.partition.reps_array + self.offset
        return self.partition.step * np.asarray(selectors, dtype=np.float64) + reps[cosets]


def nearest_in_coset_lattice(x, coset: int, cb: LatticeCodebook) -> tuple[np.ndarray, float]:
    """Nearest point of coset ``coset`` to ``x``, and its squared error."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.shape != (cb.dim,):
        raise ValueError(f"expected a point of dimension {cb.dim}, got shape {x.shape}")
    step = float(cb.partition.step)
    point = np.empty_like(x)
    sq = 0.0
    for i, (xi, ri) in enumerate(zip(x, cb.partition.coset_reps[coset])):
        base = ri + cb.offset
        m = math.floor((xi - base) / step + 0.5)
        point[i] = step * m + base
        err = (xi - base) - step * m
        sq += err * err
    return point, sq


@dataclass(frozen=True, eq=False)
class FiniteAlphabet:
    """Finite scalar reproduction alphabet split into four subsets.

    ``levels`` are sorted; ``subset_of[k]`` is the coset (subset) index of
    level ``k``.  Selectors index a level within its subset, in level order.
    """

    levels: np.ndarray
    subset_of: np.ndarray
    rate: int

    def __post_init__(self):
        levels = np.array(self.levels, dtype=np.float64)
        subset_of = np.array(self.subset_of, dtype=np.int64)
        if self.rate < 1:
            raise ValueError("rate must be >= 1")
        n = 1 << (self.rate + 1)
        if levels.shape != (n,) or subset_of.shape != (n,):
            raise ValueError(f"rate {self.rate} needs exactly {n} levels")
        if np.any(np.diff(levels) < 0):
            raise ValueError("levels must be sorted")
        counts = np.bincount(subset_of, minlength=4)
        if counts.shape != (4,) or np.any(counts != n // 4):
            raise ValueError(f"each subset needs {n // 4} levels, got {counts.tolist()}")
        levels.setflags(write=False)
        subset_of.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "subset_of", subset_of)
        members = np.stack([np.flatnonzero(subset_of == c) for c in range(4)])
        members.setflags(write=False)
        object.__setattr__(self, "members", members)

    dim = 1

    def __eq__(self, other):
        if not isinstance(other, FiniteAlphabet):
            return NotImplemented
        return (
            self.rate == other.rate
            and np.array_equal(self.levels, other.levels)
            and np.array_equal(self.subset_of, other.subset_of)
        )

    def branch_costs(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=np.float64)[..., 0]
        sub = self.levels[self.members]  # (4, M)
        d = x[..., None, None] - sub
        d = d * d  # (..., L, 4, M)
        sel = d.argmin(axis=-1)
        costs = np.take_along_axis(d, sel[..., None], axis=-1)[..., 0]
        return costs, sel[..., None]

    def level_index(self, cosets: np.ndarray, selectors: np.ndarray) -> np.ndarray:
        selectors = np.asarray(selectors)[..., 0]
        if np.any(selectors < 0) or np.any(selectors >= self.members.shape[1]):
            raise ValueError("selector out of range for this alphabet")
        return self.members[cosets, selectors]

    def reconstruct(self, cosets: np.ndarray, selectors: np.ndarray) -> np.ndarray:
        return self.levels[self.level_index(cosets, selectors)][..., None]


def nearest_in_subset_finite(x: float, coset: int, ab: FiniteAlphabet) -> tuple[int, float]:
    """Index of the closest level of subset ``coset``; ties go to the lower index."""
    best, best_err = -1, math.inf
    for k in ab.members[coset]:
        d = x - ab.levels[k]
        err = d * d
        if err < best_err:
            best, best_err = int(k), err
    return best, float(best_err)


def init_alphabet(R: int, source_scale: float = 1.0) -> FiniteAlphabet:
    """Uniform midrise alphabet of ``2**(R+1)`` levels spaced ``source_scale`` apart."""
    if R < 1:
        raise ValueError(f"rate must be >= 1, got {R}")
    n = 1 << (R + 1)
    levels = source_scale * (np.arange(n) - (n - 1) / 2.0)
    return FiniteAlphabet(levels, np.arange(n) % 4, R)


def optimize_alphabet(
    training,
    trellis,
    labeling,
    ab0: FiniteAlphabet,
    tol: float = 1e-6,
    max_iter: int = 100,
    *,
    start_state: int = 0,
    workers: int = 1,
    return_history: bool = False,
):
    """Centroid iteration for a finite TCQ alphabet.

    Each pass encodes ``training`` (sequences of shape ``(B, L)``) with the
    current alphabet and moves every level to the mean of the samples it
    reproduced.  ``start_state`` follows :func:`tcqlib.tcq.encode_batch`.
    Levels that reproduced nothing stay put.  Stops once the
    relative drop in training distortion is below ``tol``, when a pass leaves
    the alphabet unchanged, or after ``max_iter`` passes.  The returned
    alphabet is the last one whose distortion was measured.
    """
    from .tcq import encode_batch

    x = np.asarray(training, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty training set")
    if x.ndim == 1:
        x = x[None, :]
    n_levels = ab0.levels.size
    flat = x.reshape(-1)

    ab = ab0
    history: list[float] = []
    for _ in range(max_iter):
        res = encode_batch(
            x, trellis, labeling, ab, want_path=True, start_state=start_state, workers=workers
        )
        dist = float(res.totals.sum() / flat.size)
        if history and history[-1] - dist <= tol * history[-1]:
            history.append(dist)
            break
        history.append(dist)
        idx = ab.level_index(res.cosets, res.selectors).reshape(-1)
        counts = np.bincount(idx, minlength=n_levels)
        sums = np.bincount(idx, weights=flat, minlength=n_levels)
        new = ab.levels.copy()
        hit = counts > 0
        new[hit] = sums[hit] / counts[hit]
        if np.array_equal(new, ab.levels):
            break
        order = np.argsort(new, kind="stable")
        ab = FiniteAlphabet(new[order], ab.subset_of[order], ab.rate)
    return (ab, history) if return_history else ab


def save_alphabet(ab: FiniteAlphabet, path) -> None:
    """Write one ``level subset`` pair per line (17 significant digits)."""
    lines = [f"# rate {ab.rate}"]
    lines += [f"{lvl:.17g} {int(s)}" for lvl, s in zip(ab.levels, ab.subset_of)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_alphabet(path) -> FiniteAlphabet:
    levels, subsets = [], []
    rate = None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "rate":
                rate = int(parts[1])
            continue
        try:
            lvl, sub = line.split()
            levels.append(float(lvl))
            subsets.append(int(sub))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: expected '<level> <subset>', got {line!r}") from None
    if rate is None:
        rate = int(round(math.log2(len(levels)))) - 1
    return FiniteAlphabet(np.array(levels), np.array(subsets), rate)
