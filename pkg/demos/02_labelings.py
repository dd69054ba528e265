"""
Coset labelings
===============

A labeling attaches a 2-bit label to each of the four cosets.  It is
*distance preserving* when nearby cosets get labels that differ in fewer bits.
"""

import itertools

from tcqlib.labeling import LABELINGS, coset_distance_sq, get_labeling, is_distance_preserving

for name in ("ungerboeck-z4", "gray-z4", "ungerboeck-z2z2", "dp-z2z2"):
    lab = get_labeling(name)
    print(f"{name:>16}: labels {[f'{l:02b}' for l in lab.label_of]}  distance preserving: {is_distance_preserving(lab)}")
    for i, j in itertools.combinations(range(4), 2):
        d2 = coset_distance_sq(lab.partition, i, j)
        dh = bin(lab.label_of[i] ^ lab.label_of[j]).count("1")
        print(f"{'':>18}cosets {lab.partition.coset_reps[i]} {lab.partition.coset_reps[j]}: d^2={d2} hamming={dh}")
