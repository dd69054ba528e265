"""Monte-Carlo estimation of granular gain and SQNR for trellis-coded quantizers.

Randomness: sequence ``i`` of stream ``k`` under master seed ``s`` is drawn from
a Philox4x64 generator keyed by ``(s, i)`` whose counter starts at
``(0, 0, 0, k)``.  Stream 0 holds evaluation data and stream 1 training data.
Because every sequence owns its generator, batches can be produced in any
order or split across workers without changing a single sample.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .codebook import LatticeCodebook, init_alphabet, optimize_alphabet
from .convcode import build_trellis, code_table, normalize_family, CODE_TABLE, CodeTableError
from .labeling import DEFAULT_LABELING, Z2Z2, Z4, get_labeling
from .tcq import TCQ, encode_batch

__all__ = [
    "ExperimentConfig",
    "GainEstimate",
    "PARTITIONS",
    "SOURCE_KINDS",
    "sequence_rng",
    "draw_sources",
    "gen_hypercube_source",
    "gain_db",
    "estimate_from_errors",
    "second_moment",
    "estimate_second_moment",
    "run_granular_gain",
    "run_granular_gain_table",
    "run_gain_vs_length",
    "run_sqnr_experiment",
]

PARTITIONS = {"z4": Z4, "z2z2": Z2Z2}
SOURCE_KINDS = ("hypercube-uniform", "iid-uniform", "iid-gaussian")
EVAL_STREAM = 0
TRAIN_STREAM = 1
DB = 10.0 / math.log(10.0)


@dataclass(frozen=True)
class ExperimentConfig:
    partition: str = "z4"
    family: str = "distance_optimal"
    n_states: int = 4
    labeling: str | None = None
    R: int = 8
    length: int = 1000
    n_v: int = 5000
    seed: int = 0
    source: str = "hypercube-uniform"
    initial_state: str = "any"

    def __post_init__(self):
        if self.partition not in PARTITIONS:
            raise ValueError(f"unknown partition {self.partition!r}")
        if self.source not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.source!r}")
        if self.initial_state not in ("any", "zero"):
            raise ValueError("initial_state must be 'any' or 'zero'")
        if self.length < 1 or self.length % PARTITIONS[self.partition].dim:
            raise ValueError(
                f"length {self.length} must be a positive multiple of the partition dimension"
            )
        if self.n_v < 2:
            raise ValueError("need at least two sequences for a confidence interval")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        object.__setattr__(self, "family", normalize_family(self.family))

    @property
    def start_state(self) -> int:
        return -1 if self.initial_state == "any" else 0

    @property
    def labeling_name(self) -> str:
        return self.labeling or DEFAULT_LABELING[(self.family, self.partition)]

    @property
    def hypercube_side(self) -> float:
        return 2**self.R * PARTITIONS[self.partition].cell_edge

    def as_dict(self) -> dict:
        d = asdict(self)
        d["labeling"] = self.labeling_name
        return d


def sequence_rng(seed: int, index: int, stream: int = EVAL_STREAM) -> np.random.Generator:
    key = np.array([seed, index], dtype=np.uint64)
    counter = np.array([0, 0, 0, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def draw_sources(
    kind: str,
    n_v: int,
    length: int,
    seed: int,
    *,
    side: float = 1.0,
    stream: int = EVAL_STREAM,
) -> np.ndarray:
    """``n_v`` sequences of ``length`` samples.

    ``hypercube-uniform`` fills ``[0, side)``; ``iid-uniform`` and
    ``iid-gaussian`` have zero mean and unit variance.
    """
    out = np.empty((n_v, length))
    a = math.sqrt(3.0)
    for i in range(n_v):
        rng = sequence_rng(seed, i, stream)
        if kind == "hypercube-uniform":
            out[i] = rng.uniform(0.0, side, length)
        elif kind == "iid-uniform":
            out[i] = rng.uniform(-a, a, length)
        elif kind == "iid-gaussian":
            out[i] = rng.standard_normal(length)
        else:
            raise ValueError(f"unknown source kind {kind!r}")
    return out


def gen_hypercube_source(cfg: ExperimentConfig) -> np.ndarray:
    return draw_sources("hypercube-uniform", cfg.n_v, cfg.length, cfg.seed, side=cfg.hypercube_side)


def gain_db(p_tilde: float, cell_edge: float = 1.0) -> float:
    """Granular gain over a cubic cell of edge ``cell_edge`` per dimension."""
    if not p_tilde > 0:
        raise ValueError("gain is undefined for zero distortion")
    return 10.0 * math.log10(cell_edge**2 / 12.0 / p_tilde)


@dataclass(frozen=True)
class GainEstimate:
    p_tilde: float
    sigma_bar: float
    n_v: int
    delta_p: float
    gain_db: float
    gain_delta_db: float


def estimate_from_errors(errors, cell_edge: float = 1.0) -> GainEstimate:
    """Estimate from per-sequence mean squared errors per dimension."""
    e = np.asarray(errors, dtype=np.float64)
    if e.ndim != 1 or e.size < 2:
        raise ValueError("need at least two per-sequence errors")
    p = float(e.mean())
    sigma = float(e.std(ddof=1))
    dp = 2.0 * sigma / math.sqrt(e.size)
    g = gain_db(p, cell_edge)
    return GainEstimate(p, sigma, int(e.size), dp, g, DB * dp / p)


def second_moment(x, x_hat, cell_edge: float = 1.0) -> GainEstimate:
    """Estimate from source sequences ``x`` and reproductions ``x_hat`` (shape ``(N_v, L*N)``)."""
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape or x.ndim != 2:
        raise ValueError("x and x_hat must be equal-shaped 2-D batches")
    return estimate_from_errors(((x - x_hat) ** 2).mean(axis=1), cell_edge)


def estimate_second_moment(
    batch, quantizer: TCQ, *, start_state: int = -1, workers: int = 1
) -> GainEstimate:
    """Encode ``batch`` with ``quantizer`` and estimate its second moment and gain.

    The reference cell edge comes from the lattice partition, so the result
    is only meaningful for a :class:`LatticeCodebook`.
    """
    batch = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    res = quantizer.encode_batch(batch, start_state=start_state, workers=workers)
    return estimate_from_errors(res.totals / batch.shape[1], quantizer.labeling.partition.cell_edge)


def _quantizer(cfg: ExperimentConfig, codebook=None) -> TCQ:
    code = code_table(cfg.family, cfg.n_states)
    lab = get_labeling(cfg.labeling_name)
    if lab.partition is not PARTITIONS[cfg.partition]:
        raise ValueError(f"labeling {lab.name} does not belong to partition {cfg.partition}")
    return TCQ(build_trellis(code), lab, codebook or LatticeCodebook(lab.partition))


def run_granular_gain(cfg: ExperimentConfig, *, workers: int = 1, batch=None) -> dict:
    q = _quantizer(cfg)
    if batch is None:
        batch = gen_hypercube_source(cfg)
    est = estimate_second_moment(batch, q, start_state=cfg.start_state, workers=workers)
    return {
        "partition": cfg.partition,
        "states": cfg.n_states,
        "family": cfg.family,
        "code": q.trellis.code.octal(),
        "labeling": cfg.labeling_name,
        "length": cfg.length,
        "n_v": cfg.n_v,
        "metric": est.gain_db,
        "ci": est.gain_delta_db,
        "p_tilde": est.p_tilde,
        "delta_p": est.delta_p,
    }


def _pairs(families, states, skip_missing):
    for n in states:
        for fam in families:
            fam = normalize_family(fam)
            if n not in CODE_TABLE[fam]:
                if skip_missing:
                    continue
                raise CodeTableError(f"no {fam} code with {n} states: absent in the published table")
            yield fam, n


def run_granular_gain_table(
    families=("ungerboeck", "distance_optimal"),
    states=(4, 8, 16, 32, 64, 128, 256, 1024),
    partition: str = "z4",
    base: ExperimentConfig | None = None,
    *,
    skip_missing: bool = False,
    workers: int = 1,
) -> list[dict]:
    """One gain row per (states, family).  All rows share the same source batch."""
    base = replace(base or ExperimentConfig(), partition=partition, labeling=None)
    pairs = list(_pairs(families, states, skip_missing))
    batch = gen_hypercube_source(base)
    return [
        run_granular_gain(replace(base, family=f, n_states=n), workers=workers, batch=batch)
        for f, n in pairs
    ]


def run_gain_vs_length(
    families=("ungerboeck", "distance_optimal"),
    states=(16, 32, 64, 256),
    partition: str = "z2z2",
    lengths=(100, 200, 400, 600, 800, 1000),
    base: ExperimentConfig | None = None,
    *,
    workers: int = 1,
) -> list[dict]:
    """Gain against sequence length.  Shorter sequences are prefixes of the longest."""
    base = replace(base or ExperimentConfig(), partition=partition, labeling=None)
    lengths = sorted(int(n) for n in lengths)
    pairs = list(_pairs(families, states, False))
    full = gen_hypercube_source(replace(base, length=lengths[-1]))
    rows = []
    for f, n in pairs:
        for length in lengths:
            cfg = replace(base, family=f, n_states=n, length=length)
            rows.append(run_granular_gain(cfg, workers=workers, batch=full[:, :length]))
    return rows


def initial_scale(source: str, R: int) -> float:
    """Level spacing of the starting alphabet for a unit-variance source."""
    n = 2 ** (R + 1)
    if source == "iid-uniform":
        return 2.0 * math.sqrt(3.0) / n
    if source == "iid-gaussian":
        return 8.0 / n
    raise ValueError(f"no finite-alphabet preset for source {source!r}")


def run_sqnr_experiment(
    rate: int,
    n_states: int,
    family: str,
    source: str = "iid-uniform",
    base: ExperimentConfig | None = None,
    *,
    tol: float = 1e-6,
    max_iter: int = 100,
    workers: int = 1,
) -> dict:
    """Train a finite alphabet on stream-1 data, then measure SQNR on stream-0 data.

    Returns a row dict; the optimized alphabet is under ``"alphabet"``.
    """
    if source == "uniform":
        source = "iid-uniform"
    elif source == "gaussian":
        source = "iid-gaussian"
    base = base or ExperimentConfig()
    cfg = replace(base, partition="z4", family=family, n_states=n_states, source=source, labeling=None)
    q = _quantizer(cfg)
    train = draw_sources(source, cfg.n_v, cfg.length, cfg.seed, stream=TRAIN_STREAM)
    ab, history = optimize_alphabet(
        train,
        q.trellis,
        q.labeling,
        init_alphabet(rate, initial_scale(source, rate)),
        tol,
        max_iter,
        start_state=cfg.start_state,
        workers=workers,
        return_history=True,
    )
    del train
    x = draw_sources(source, cfg.n_v, cfg.length, cfg.seed, stream=EVAL_STREAM)
    res = encode_batch(x, q.trellis, q.labeling, ab, start_state=cfg.start_state, workers=workers)
    errors = res.totals / cfg.length
    p = float(errors.mean())
    dp = 2.0 * float(errors.std(ddof=1)) / math.sqrt(errors.size)
    power = float(np.mean(x * x))
    return {
        "source": source,
        "rate": rate,
        "states": n_states,
        "family": cfg.family,
        "code": q.trellis.code.octal(),
        "labeling": cfg.labeling_name,
        "length": cfg.length,
        "n_v": cfg.n_v,
        "metric": 10.0 * math.log10(power / p),
        "ci": DB * dp / p,
        "mse": p,
        "train_mse": history[-1],
        "iterations": len(history),
        "alphabet": ab,
    }
