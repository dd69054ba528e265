"""Brute-force reference computations, independent of the trellis and Viterbi code."""

import itertools

import numpy as np

from tcqlib.codebook import nearest_in_coset_lattice, nearest_in_subset_finite


def taps(g, nu):
    """Tap d (delay) of generator g, most significant bit = delay 0."""
    return [(g >> (nu - d)) & 1 for d in range(nu + 1)]


def convolve_labels(code, inputs, initial=None):
    """Label sequence of a feedforward encoder, computed by direct convolution.

    ``initial`` lists the ``nu`` inputs preceding time 0, most recent first.
    """
    nu = code.nu
    t0, t1 = taps(code.g0, nu), taps(code.g1, nu)
    hist = list(initial or [0] * nu)
    labels = []
    for u in inputs:
        reg = [u] + hist
        y0 = sum(a & b for a, b in zip(t0, reg)) & 1
        y1 = sum(a & b for a, b in zip(t1, reg)) & 1
        labels.append((y0 << 1) | y1)
        hist = reg[:nu]
    return labels


def brute_free_distance(code, n_inputs=None):
    """Minimum output weight over all inputs starting with 1 (zero-flushed)."""
    nu = code.nu
    k = n_inputs or 2 * nu + 8
    n = 1 << (k - 1)
    u = np.zeros((n, k + nu), dtype=np.uint8)
    u[:, 0] = 1
    idx = np.arange(n)
    for j in range(1, k):
        u[:, j] = (idx >> (j - 1)) & 1
    weight = np.zeros(n, dtype=np.int64)
    for g in (code.g0, code.g1):
        tp = taps(g, nu)
        for t in range(k + nu):
            bit = np.zeros(n, dtype=np.uint8)
            for d, on in enumerate(tp):
                if on and t - d >= 0:
                    bit ^= u[:, t - d]
            weight += bit
    return int(weight.min())


def gf2_gcd(a, b):
    while b:
        while a and a.bit_length() >= b.bit_length():
            a ^= b << (a.bit_length() - b.bit_length())
        a, b = b, a
    return a


def step_costs(x, labeling, codebook):
    """Per-step, per-coset squared error via the scalar nearest-point functions."""
    dim = labeling.partition.dim
    steps = np.asarray(x, dtype=np.float64).reshape(-1, dim)
    costs = np.empty((len(steps), 4))
    for t, xt in enumerate(steps):
        for c in range(4):
            if dim == 1 and hasattr(codebook, "levels"):
                costs[t, c] = nearest_in_subset_finite(float(xt[0]), c, codebook)[1]
            else:
                costs[t, c] = nearest_in_coset_lattice(xt, c, codebook)[1]
    return costs


def brute_force_min_error(x, code, labeling, codebook, any_start=False):
    """Exhaustive minimum total squared error over every input sequence."""
    costs = step_costs(x, labeling, codebook)
    L = len(costs)
    coset_of_label = {lab: c for c, lab in enumerate(labeling.label_of)}
    starts = itertools.product((0, 1), repeat=code.nu) if any_start else [(0,) * code.nu]
    best = np.inf
    for hist in starts:
        paths = np.array(list(itertools.product((0, 1), repeat=L)))
        cosets = np.array(
            [[coset_of_label[l] for l in convolve_labels(code, p, list(hist))] for p in paths]
        )
        total = np.zeros(len(paths))
        for t in range(L):
            total = total + costs[t, cosets[:, t]]
        best = min(best, total.min())
    return best


def greedy_error(x, trellis, labeling, codebook):
    """Follow the cheaper branch at every step from state 0."""
    costs = step_costs(x, labeling, codebook)
    inv = labeling.coset_of_label
    s, total = 0, 0.0
    for c in costs:
        b = int(np.argmin([c[inv[trellis.out_label[s, b]]] for b in (0, 1)]))
        total += c[inv[trellis.out_label[s, b]]]
        s = trellis.next_state[s, b]
    return total
