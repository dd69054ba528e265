"""
Convolutional codes and their trellises
=======================================

Both code families used for trellis-coded quantization are rate-1/2
feedforward codes written as an octal generator pair.  This script parses a
few of them, prints the first rows of a trellis and compares free distances.
"""

from tcqlib import build_trellis, code_table, free_distance, parse_code

# the most significant octal bit acts on the current input
code = parse_code("5 7")
print(code, "memory", code.nu, "->", code.n_states, "states")

# each (state, input bit) pair has one successor and a 2-bit branch label
tr = build_trellis(code)
for s in range(tr.n_states):
    print(f"state {s:02b}:", [(b, f"{tr.next_state[s, b]:02b}", f"{tr.out_label[s, b]:02b}") for b in (0, 1)])

# free distance: the classic baseline codes against the distance-optimal ones
print(f"\n{'states':>6} {'ungerboeck':>12} {'dfree':>5} {'dist-opt':>12} {'dfree':>5}")
for n in (4, 8, 16, 32, 64, 256):
    u, d = code_table("ungerboeck", n), code_table("distance_optimal", n)
    print(f"{n:>6} {str(u):>12} {free_distance(u):>5} {str(d):>12} {free_distance(d):>5}")
