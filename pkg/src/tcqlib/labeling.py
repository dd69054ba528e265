"""Four-coset lattice partitions and their 2-bit labelings.

Two partitions are supported: the integers split into the cosets of 4Z, and
the square lattice Z^2 split into the cosets of 2Z^2.  A labeling assigns a
2-bit label to every coset; the Viterbi encoder uses the inverse map to find
the coset carried by a trellis branch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Partition",
    "Labeling",
    "Z4",
    "Z2Z2",
    "ungerboeck_labeling_z4",
    "distance_preserving_labeling_z4",
    "distance_preserving_labeling_z2z2",
    "ungerboeck_labeling_z2z2",
    "is_distance_preserving",
    "coset_distance_sq",
    "get_labeling",
    "LABELINGS",
]


@dataclass(frozen=True)
class Partition:
    name: str
    dim: int
    coset_reps: tuple[tuple[int, ...], ...]
    step: int

    def __post_init__(self):
        if len(self.coset_reps) != 4:
            raise ValueError("a partition must have exactly 4 cosets")
        if any(len(r) != self.dim for r in self.coset_reps):
            raise ValueError("coset representatives must have the partition dimension")
        residues = {tuple(c % self.step for c in r) for r in self.coset_reps}
        if len(residues) != 4:
            raise ValueError("coset representatives are not distinct modulo the sublattice")

    @property
    def reps_array(self) -> np.ndarray:
        return np.array(self.coset_reps, dtype=np.float64)

    @property
    def cell_edge(self) -> float:
        """Per-dimension edge of the cell owned by one trellis-reachable point.

        Each trellis step can reach two of the four cosets, so the reachable
        set has twice the density of the sublattice.
        """
        return (self.step**self.dim / 2.0) ** (1.0 / self.dim)

    def coset_of_point(self, point) -> int:
        """Index of the coset containing the integer point ``point``."""
        key = tuple(int(round(c)) % self.step for c in np.atleast_1d(point))
        for k, r in enumerate(self.coset_reps):
            if tuple(c % self.step for c in r) == key:
                return k
        raise ValueError(f"{point!r} is not a lattice point")


Z4 = Partition("z4", 1, ((0,), (1,), (2,), (3,)), 4)
Z2Z2 = Partition("z2z2", 2, ((0, 0), (1, 0), (0, 1), (1, 1)), 2)


@dataclass(frozen=True)
class Labeling:
    name: str
    partition: Partition
    label_of: tuple[int, int, int, int]

    def __post_init__(self):
        if sorted(self.label_of) != [0, 1, 2, 3]:
            raise ValueError(f"labeling {self.label_of} is not a bijection onto 0..3")

    @property
    def coset_of_label(self) -> np.ndarray:
        inv = np.empty(4, dtype=np.int64)
        for coset, label in enumerate(self.label_of):
            inv[label] = coset
        return inv

    def xor(self, mask: int) -> "Labeling":
        """Same labeling with every label XOR-ed by ``mask``."""
        return Labeling(
            f"{self.name}^{mask}", self.partition, tuple(l ^ mask for l in self.label_of)
        )


def ungerboeck_labeling_z4() -> Labeling:
    """Natural binary labels: coset k carries label k."""
    return Labeling("ungerboeck-z4", Z4, (0, 1, 2, 3))


def distance_preserving_labeling_z4() -> Labeling:
    """Gray labels around the cycle of cosets: k -> k ^ (k >> 1)."""
    return Labeling("gray-z4", Z4, tuple(k ^ (k >> 1) for k in range(4)))


def distance_preserving_labeling_z2z2() -> Labeling:
    """Coset (a, b) of Z^2/2Z^2 carries label bits (a, b)."""
    return Labeling(
        "dp-z2z2", Z2Z2, tuple((a << 1) | b for a, b in Z2Z2.coset_reps)
    )


def ungerboeck_labeling_z2z2() -> Labeling:
    """Set-partitioning labels for Z^2/2Z^2.

    The high label bit splits each checkerboard half into its two cosets and
    the low bit selects the half, so labels 0/2 are (0,0)/(1,1) and 1/3 are
    (1,0)/(0,1).
    """
    order = {0: (0, 0), 1: (1, 0), 2: (1, 1), 3: (0, 1)}
    label_of = [0] * 4
    for label, rep in order.items():
        label_of[Z2Z2.coset_reps.index(rep)] = label
    return Labeling("ungerboeck-z2z2", Z2Z2, tuple(label_of))


def coset_distance_sq(partition: Partition, i: int, j: int) -> int:
    """Minimum squared Euclidean distance between cosets ``i`` and ``j``."""
    total = 0
    for a, b in zip(partition.coset_reps[i], partition.coset_reps[j]):
        d = (a - b) % partition.step
        d = min(d, partition.step - d)
        total += d * d
    return total


def is_distance_preserving(lab: Labeling) -> bool:
    """True if closer coset pairs never get labels further apart in Hamming distance.

    Pairs at equal Euclidean distance must also get equal Hamming distance.
    """
    pairs = []
    for i, j in itertools.combinations(range(4), 2):
        d2 = coset_distance_sq(lab.partition, i, j)
        dh = bin(lab.label_of[i] ^ lab.label_of[j]).count("1")
        pairs.append((d2, dh))
    for (d2a, dha), (d2b, dhb) in itertools.product(pairs, repeat=2):
        if d2a == d2b and dha != dhb:
            return False
        if d2a < d2b and dha > dhb:
            return False
    return True


LABELINGS = {
    "ungerboeck-z4": ungerboeck_labeling_z4,
    "gray-z4": distance_preserving_labeling_z4,
    "dp-z2z2": distance_preserving_labeling_z2z2,
    "natural-z2z2": distance_preserving_labeling_z2z2,
    "ungerboeck-z2z2": ungerboeck_labeling_z2z2,
}

# labeling paired with each code family when the experiment does not say otherwise
DEFAULT_LABELING = {
    ("ungerboeck", "z4"): "ungerboeck-z4",
    ("distance_optimal", "z4"): "gray-z4",
    ("ungerboeck", "z2z2"): "ungerboeck-z2z2",
    ("distance_optimal", "z2z2"): "dp-z2z2",
}


def get_labeling(name: str) -> Labeling:
    try:
        return LABELINGS[name]()
    except KeyError:
        raise ValueError(f"unknown labeling {name!r}; choose from {sorted(LABELINGS)}") from None
