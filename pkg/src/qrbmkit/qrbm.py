"""Annealer-in-the-loop RBM training and synthetic sample generation.

Each update runs the classic positive phase (hidden probabilities from
the current batch), maps the current parameters onto the embedded spin
problem, draws one anneal job of reads for the negative phase, decodes
chains by majority vote and applies

    W += lr * (V^T H / m  -  V'^T H' / m1)
    b += lr * (sum(V) / m -  sum(V') / m1)
    c += lr * (sum(H) / m -  sum(H') / m1)

with m the batch size and m1 the read count.

Seed fan-out (documented so runs are reproducible end to end): every
stochastic step derives its own integer seed via
numpy.random.SeedSequence([seed, STREAM, epoch, update]) with STREAM ids
1 = batch shuffling, 2 = negative-phase sampling, 3 = decode tie-breaks,
4 = generation jobs, 5 = generation tie-breaks.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .embedding import RbmEmbedding, validate_embedding
from .exceptions import ConfigError, DimensionMismatchError, ValidationError
from .ising import decode_samples, rbm_to_ising
from .pegasus import PegasusGraph
from .rbm import (
    EXACT_LIMIT,
    RbmParams,
    check_binary,
    empirical_visible_distribution,
    kl_to_data,
    prob_h_given_v,
    prob_v_given_h,
)
from .samplers import SamplerConfig, get_backend


@dataclass(frozen=True)
class QrbmTrainerConfig:
    """Knobs of the annealing trainer; see module docstring for seeds."""

    learning_rate: float = 0.05
    batch_size: int = 64
    num_reads: int = 100  # reads per anneal job (the negative-phase m1)
    epochs: int = 200
    chain_strength: float = 1.0
    beta_eff: float = 1.0
    sampler: str | Callable = "sa"
    seed: int = 0
    kl_plateau: float | None = None  # optional early stop on KL improvement
    sweeps: int = 1000
    beta_min: float = 0.1
    beta_max: float = 3.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if self.batch_size < 1 or self.num_reads < 1 or self.epochs < 1:
            raise ConfigError("batch_size, num_reads and epochs must be >= 1")
        if self.chain_strength <= 0 or self.beta_eff <= 0:
            raise ConfigError("chain_strength and beta_eff must be > 0")

    def resolve_sampler(self) -> Callable:
        if callable(self.sampler):
            return self.sampler
        return get_backend(self.sampler)

    def job_config(self, seed: int) -> SamplerConfig:
        return SamplerConfig(
            num_reads=self.num_reads,
            seed=seed,
            sweeps=self.sweeps,
            beta_min=self.beta_min,
            beta_max=self.beta_max,
        )


def _derive_seed(*path: int) -> int:
    return int(np.random.SeedSequence(list(path)).generate_state(1)[0])


@dataclass
class TrainingLog:
    objective_kind: str
    entries: list[dict] = field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "objective", "chain_break_rate", "wall_ms"])
            for e in self.entries:
                writer.writerow(
                    [
                        e["epoch"],
                        repr(e["objective"]),
                        repr(e["chain_break_rate"]),
                        repr(e["wall_ms"]),
                    ]
                )

    @property
    def final_objective(self) -> float:
        return self.entries[-1]["objective"] if self.entries else math.nan


def reconstruction_error(params: RbmParams, data: np.ndarray) -> float:
    """Mean squared one-step reconstruction error (probability flow)."""
    v = check_binary(data, "data")
    h = prob_h_given_v(params, v)
    v1 = prob_v_given_h(params, h)
    return float(((v - v1) ** 2).mean())


def train_qrbm(
    data: np.ndarray,
    cfg: QrbmTrainerConfig,
    emb: RbmEmbedding,
    graph: PegasusGraph | None = None,
) -> tuple[RbmParams, TrainingLog]:
    """Train on binary rows using annealer reads for the negative phase.

    When ``graph`` is given the embedding is validated against it first.
    The per-epoch objective is exact KL(data || model) when the model is
    small enough to enumerate, otherwise the reconstruction error.
    """
    data = np.atleast_2d(check_binary(data, "data"))
    n_v = len(emb.visible_nodes)
    n_h = len(emb.hidden_nodes)
    if data.shape[1] != n_v:
        raise DimensionMismatchError(
            f"data width {data.shape[1]} != embedding n_visible {n_v}"
        )
    if graph is not None:
        report = validate_embedding(graph, emb)
        if not report.valid:
            raise ValidationError(
                f"embedding invalid on P{graph.m}: "
                f"{len(report.bad_couplers)} bad couplers, "
                f"{len(report.chain_overlaps)} overlapping qubits"
            )

    sampler = cfg.resolve_sampler()
    track_kl = n_v + n_h <= EXACT_LIMIT
    data_dist = empirical_visible_distribution(data, n_v) if track_kl else None

    rng_init = np.random.default_rng(_derive_seed(cfg.seed, 0))
    params = RbmParams(
        W=rng_init.uniform(-0.1, 0.1, size=(n_v, n_h)),
        b=np.zeros(n_v),
        c=np.zeros(n_h),
    )

    log = TrainingLog(objective_kind="kl" if track_kl else "reconstruction")
    n_rows = data.shape[0]
    m = min(cfg.batch_size, n_rows)
    updates_per_epoch = max(1, n_rows // m)
    prev_obj = math.inf

    for epoch in range(cfg.epochs):
        t0 = time.perf_counter()
        order = np.random.default_rng(_derive_seed(cfg.seed, 1, epoch)).permutation(n_rows)
        break_rates = []
        for u in range(updates_per_epoch):
            batch = data[order[u * m : (u + 1) * m]]
            bsz = batch.shape[0]
            H = prob_h_given_v(params, batch)
            problem = rbm_to_ising(params, emb, cfg.chain_strength, cfg.beta_eff)
            ss = sampler(problem, cfg.job_config(_derive_seed(cfg.seed, 2, epoch, u)))
            Vp, Hp, rate = decode_samples(ss, emb, _derive_seed(cfg.seed, 3, epoch, u))
            Vp = Vp.astype(np.float64)
            Hp = Hp.astype(np.float64)
            m1 = Vp.shape[0]
            lr = cfg.learning_rate
            params = RbmParams(
                W=params.W + lr * (batch.T @ H / bsz - Vp.T @ Hp / m1),
                b=params.b + lr * (batch.sum(axis=0) / bsz - Vp.sum(axis=0) / m1),
                c=params.c + lr * (H.sum(axis=0) / bsz - Hp.sum(axis=0) / m1),
            )
            break_rates.append(rate)

        obj = (
            kl_to_data(params, data_dist)
            if track_kl
            else reconstruction_error(params, data)
        )
        log.entries.append(
            {
                "epoch": epoch,
                "objective": obj,
                "chain_break_rate": float(np.mean(break_rates)),
                "wall_ms": (time.perf_counter() - t0) * 1000.0,
            }
        )
        if cfg.kl_plateau is not None and abs(prev_obj - obj) < cfg.kl_plateau:
            break
        prev_obj = obj

    return params, log


def generate_synthetic(
    params: RbmParams,
    emb: RbmEmbedding,
    cfg: QrbmTrainerConfig,
    n_samples: int,
    graph: PegasusGraph | None = None,
    sample_sink: list | None = None,
) -> np.ndarray:
    """Draw n_samples visible rows from the embedded model.

    Runs ceil(n_samples / num_reads) anneal jobs and truncates to exactly
    n_samples rows. Pass ``sample_sink`` (a list) to capture every raw
    SampleSet for provenance.
    """
    if n_samples < 1:
        raise ConfigError("n_samples must be >= 1")
    if graph is not None:
        report = validate_embedding(graph, emb)
        if not report.valid:
            raise ValidationError("embedding invalid on target graph")
    sampler = cfg.resolve_sampler()
    problem = rbm_to_ising(params, emb, cfg.chain_strength, cfg.beta_eff)
    jobs = math.ceil(n_samples / cfg.num_reads)
    rows = []
    for job in range(jobs):
        ss = sampler(problem, cfg.job_config(_derive_seed(cfg.seed, 4, job)))
        if sample_sink is not None:
            sample_sink.append(ss)
        V, _, _ = decode_samples(ss, emb, _derive_seed(cfg.seed, 5, job))
        rows.append(V)
    return np.vstack(rows)[:n_samples]
