"""Viterbi search for the minimum squared-error path through a coset-labeled trellis."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from .convcode import Trellis
from .labeling import Labeling

__all__ = ["EncodeResult", "BatchResult", "encode", "encode_batch", "decode", "TCQ"]


@numba.njit(nogil=True, cache=True)
def _viterbi(costs, prev_state, prev_coset, start_state, want_path, totals, cosets, bits, starts):
    n_seq, n_steps, _ = costs.shape
    n_states = prev_state.shape[0]
    shift = 0
    while (2 << shift) < n_states:
        shift += 1
    metric = np.empty(n_states)
    new = np.empty(n_states)
    decision = np.zeros((n_steps if want_path else 1, n_states), dtype=np.uint8)
    for i in range(n_seq):
        if start_state < 0:
            metric[:] = 0.0
        else:
            metric[:] = np.inf
            metric[start_state] = 0.0
        for t in range(n_steps):
            c = costs[i, t]
            row = t if want_path else 0
            for s in range(n_states):
                m0 = metric[prev_state[s, 0]] + c[prev_coset[s, 0]]
                m1 = metric[prev_state[s, 1]] + c[prev_coset[s, 1]]
                # ties keep the lower-indexed predecessor
                if m1 < m0:
                    new[s] = m1
                    decision[row, s] = 1
                else:
                    new[s] = m0
                    decision[row, s] = 0
            metric, new = new, metric
        best = 0
        for s in range(1, n_states):
            if metric[s] < metric[best]:
                best = s
        totals[i] = metric[best]
        if want_path:
            s = best
            for t in range(n_steps - 1, -1, -1):
                x = decision[t, s]
                bits[i, t] = s >> shift
                cosets[i, t] = prev_coset[s, x]
                s = prev_state[s, x]
            starts[i] = s


@dataclass
class BatchResult:
    """Per-sequence minimum errors; paths only when requested."""

    totals: np.ndarray
    bits: np.ndarray | None = None
    cosets: np.ndarray | None = None
    selectors: np.ndarray | None = None
    starts: np.ndarray | None = None


@dataclass
class EncodeResult:
    path_bits: np.ndarray
    point_selectors: np.ndarray
    reconstruction: np.ndarray
    total_sq_error: float
    initial_state: int = 0


def _as_steps(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] == 0:
        raise ValueError("empty source")
    if x.shape[-1] % dim:
        raise ValueError(f"source length {x.shape[-1]} is not a multiple of dimension {dim}")
    return x.reshape(*x.shape[:-1], x.shape[-1] // dim, dim)


def _encode_chunk(steps, trellis, labeling, codebook, want_path, start_state) -> BatchResult:
    costs, sel = codebook.branch_costs(steps)
    costs = np.ascontiguousarray(costs)
    n_seq, n_steps = costs.shape[:2]
    prev_coset = np.ascontiguousarray(labeling.coset_of_label[trellis.prev_label])
    prev_state = np.ascontiguousarray(trellis.prev_state)
    totals = np.empty(n_seq)
    shape = (n_seq, n_steps) if want_path else (1, 1)
    cosets = np.zeros(shape, dtype=np.int64)
    bits = np.zeros(shape, dtype=np.uint8)
    starts = np.zeros(n_seq if want_path else 1, dtype=np.int64)
    _viterbi(costs, prev_state, prev_coset, start_state, want_path, totals, cosets, bits, starts)
    if not want_path:
        return BatchResult(totals)
    chosen = np.take_along_axis(sel, cosets[..., None, None], axis=2)[:, :, 0, :]
    return BatchResult(totals, bits, cosets, chosen, starts)


def encode_batch(
    sources,
    trellis: Trellis,
    labeling: Labeling,
    codebook,
    *,
    want_path: bool = False,
    start_state: int = 0,
    chunk_size: int = 256,
    workers: int = 1,
) -> BatchResult:
    """Encode every row of ``sources`` (shape ``(B, L*N)``) independently.

    ``start_state=-1`` lets the path begin in any state.  Rows are processed
    in chunks of ``chunk_size``, spread over ``workers`` threads; the result
    does not depend on either.
    """
    if labeling.partition.dim != codebook.dim:
        raise ValueError("labeling and codebook disagree on dimension")
    if not -1 <= start_state < trellis.n_states:
        raise ValueError(f"start_state {start_state} outside 0..{trellis.n_states - 1}")
    steps = _as_steps(np.atleast_2d(sources), codebook.dim)
    if steps.ndim != 3:
        raise ValueError("sources must be a 1-D sequence or a 2-D batch of sequences")
    bounds = range(0, steps.shape[0], max(1, chunk_size))
    job = lambda a: _encode_chunk(
        steps[a : a + chunk_size], trellis, labeling, codebook, want_path, start_state
    )
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, bounds))
    else:
        parts = [job(a) for a in bounds]
    if len(parts) == 1:
        return parts[0]
    totals = np.concatenate([p.totals for p in parts])
    if not want_path:
        return BatchResult(totals)
    return BatchResult(
        totals,
        np.concatenate([p.bits for p in parts]),
        np.concatenate([p.cosets for p in parts]),
        np.concatenate([p.selectors for p in parts]),
        np.concatenate([p.starts for p in parts]),
    )


def encode(source, trellis: Trellis, labeling: Labeling, codebook, *, start_state: int = 0) -> EncodeResult:
    """Minimum squared-error trellis path for a single sequence of length ``L*N``.

    The path starts in ``start_state`` and may end anywhere.  Equal-metric
    survivors resolve to the lower-indexed predecessor, final ties to the
    lowest state.
    """
    x = np.asarray(source, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("encode takes a single 1-D sequence; use encode_batch for batches")
    res = encode_batch(x[None, :], trellis, labeling, codebook, want_path=True, start_state=start_state)
    recon = codebook.reconstruct(res.cosets[0], res.selectors[0]).reshape(-1)
    return EncodeResult(
        path_bits=res.bits[0],
        point_selectors=res.selectors[0],
        reconstruction=recon,
        total_sq_error=float(res.totals[0]),
        initial_state=int(res.starts[0]),
    )


def decode(path_bits, point_selectors, trellis: Trellis, labeling: Labeling, codebook, initial_state: int = 0) -> np.ndarray:
    """Replay ``path_bits`` through the trellis and resolve each step's point."""
    bits = np.asarray(path_bits, dtype=np.int64)
    sel = np.asarray(point_selectors, dtype=np.int64).reshape(len(bits), -1)
    if sel.shape[1] != codebook.dim:
        raise ValueError("selector width does not match codebook dimension")
    coset_of_label = labeling.coset_of_label
    cosets = np.empty(len(bits), dtype=np.int64)
    s = initial_state
    for t, b in enumerate(bits):
        cosets[t] = coset_of_label[trellis.out_label[s, b]]
        s = trellis.next_state[s, b]
    return codebook.reconstruct(cosets, sel).reshape(-1)


@dataclass(frozen=True)
class TCQ:
    """A trellis, a labeling and a codebook bundled into one quantizer."""

    trellis: Trellis
    labeling: Labeling
    codebook: object

    def encode(self, source, **kw) -> EncodeResult:
        return encode(source, self.trellis, self.labeling, self.codebook, **kw)

    def decode(self, path_bits, point_selectors, initial_state: int = 0) -> np.ndarray:
        return decode(path_bits, point_selectors, self.trellis, self.labeling, self.codebook, initial_state)

    def encode_batch(self, sources, **kw) -> BatchResult:
        return encode_batch(sources, self.trellis, self.labeling, self.codebook, **kw)
