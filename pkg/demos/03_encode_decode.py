"""
Encoding a sequence
===================

The Viterbi search picks, for every sample, a point of the coset carried by
the chosen trellis branch.  The encoder output (path bits plus a point
selector per step) is enough to rebuild the reproduction exactly.
"""

import numpy as np

from tcqlib import TCQ, build_trellis, code_table
from tcqlib.codebook import LatticeCodebook
from tcqlib.labeling import distance_preserving_labeling_z4

lab = distance_preserving_labeling_z4()
q = TCQ(build_trellis(code_table("distance_optimal", 64)), lab, LatticeCodebook(lab.partition))

x = np.random.default_rng(0).uniform(0, 64, 12)
res = q.encode(x)
print("source        ", np.round(x, 2))
print("reproduction  ", res.reconstruction)
print("path bits     ", res.path_bits)
print("selectors     ", res.point_selectors.ravel())
print("squared error ", res.total_sq_error)

# decoding replays the path
assert np.array_equal(q.decode(res.path_bits, res.point_selectors), res.reconstruction)

# letting the path start in any state lowers the error a little; the
# starting state is then part of the encoder output
free = q.encode(x, start_state=-1)
print("free start    ", free.total_sq_error, "from state", free.initial_state)
