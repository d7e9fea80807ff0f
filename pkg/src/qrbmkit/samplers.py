"""Sampling backends producing SampleSets from IsingProblems.

Two local backends: an exact enumerator (the verification oracle, capped
at 22 spins) and single-spin Metropolis simulated annealing (the QPU
stand-in). Both are deterministic per (problem, config); SA derives one
independent random stream per read from ``seed xor read_index`` so serial
and parallel execution agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .exceptions import CapacityError, ConfigError
from .ising import IsingProblem, SampleSet, energies_for

EXACT_SPIN_LIMIT = 22


@dataclass(frozen=True)
class SamplerConfig:
    num_reads: int = 100
    seed: int = 0
    sweeps: int = 1000
    beta_min: float = 0.1
    beta_max: float = 3.0
    geometric: bool = True

    def __post_init__(self):
        if self.num_reads < 1:
            raise ConfigError("num_reads must be >= 1")
        if self.sweeps < 1:
            raise ConfigError("sweeps must be >= 1")
        if not (0 < self.beta_min < self.beta_max):
            raise ConfigError("need 0 < beta_min < beta_max")


def _dense_arrays(p: IsingProblem):
    """Problem in index space: bias vector plus CSR neighbor lists."""
    variables = p.variables
    col = {q: i for i, q in enumerate(variables)}
    n = len(variables)
    h = np.zeros(n, dtype=np.float64)
    for q, v in p.h.items():
        h[col[q]] = v
    deg = np.zeros(n, dtype=np.int64)
    for a, b in p.J:
        deg[col[a]] += 1
        deg[col[b]] += 1
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=ptr[1:])
    idx = np.zeros(ptr[-1], dtype=np.int64)
    val = np.zeros(ptr[-1], dtype=np.float64)
    fill = ptr[:-1].copy()
    for (a, b), jv in p.J.items():
        ia, ib = col[a], col[b]
        idx[fill[ia]], val[fill[ia]] = ib, jv
        fill[ia] += 1
        idx[fill[ib]], val[fill[ib]] = ia, jv
        fill[ib] += 1
    return variables, h, ptr, idx, val


def boltzmann_table(p: IsingProblem) -> tuple[tuple[int, ...], np.ndarray, np.ndarray]:
    """Exact distribution at unit temperature.

    Returns (variables, states, probs): states is the (2^n x n) matrix of
    spin assignments, row r holding the binary digits of r mapped to
    {-1,+1} MSB first.
    """
    variables = p.variables
    n = len(variables)
    if n > EXACT_SPIN_LIMIT:
        raise CapacityError(f"exact enumeration limited to {EXACT_SPIN_LIMIT} spins, got {n}")
    r = np.arange(2**n, dtype=np.int64)
    bits = (r[:, None] >> np.arange(n - 1, -1, -1)) & 1
    states = (2 * bits - 1).astype(np.int8)
    e = energies_for(p, variables, states)
    g = -(e - e.min())
    w = np.exp(g)
    return variables, states, w / w.sum()


def exact_sample(p: IsingProblem, cfg: SamplerConfig) -> SampleSet:
    """Reads drawn i.i.d. from the exact Boltzmann distribution."""
    variables, states, probs = boltzmann_table(p)
    rng = np.random.default_rng(cfg.seed)
    draws = rng.choice(states.shape[0], size=cfg.num_reads, p=probs)
    spins = states[draws]
    return SampleSet(
        variables,
        spins,
        energies_for(p, variables, spins),
        np.ones(cfg.num_reads, dtype=np.int64),
        metadata={"backend": "exact", "seed": cfg.seed, "num_reads": cfg.num_reads},
    )


@njit(cache=True, inline="always")
def _mix(state):
    state = (state + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = state
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(
        0xFFFFFFFFFFFFFFFF
    )
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & np.uint64(
        0xFFFFFFFFFFFFFFFF
    )
    return z ^ (z >> np.uint64(31)), state


@njit(cache=True, parallel=True)
def _sa_kernel(h, ptr, idx, val, betas, num_reads, seed, out):
    n = h.shape[0]
    sweeps = betas.shape[0]
    for r in prange(num_reads):
        state = np.uint64(seed) ^ np.uint64(r)
        spins = np.empty(n, dtype=np.int8)
        for i in range(n):
            z, state = _mix(state)
            spins[i] = 1 if (z >> np.uint64(63)) else -1
        # local fields maintained incrementally across flips
        fields = h.copy()
        for i in range(n):
            for e in range(ptr[i], ptr[i + 1]):
                fields[i] += val[e] * spins[idx[e]]
        for t in range(sweeps):
            beta = betas[t]
            for i in range(n):
                delta = -2.0 * spins[i] * fields[i]
                if delta <= 0.0:
                    accept = True
                else:
                    z, state = _mix(state)
                    u = (z >> np.uint64(11)) * (1.0 / 9007199254740992.0)
                    accept = u < np.exp(-beta * delta)
                if accept:
                    shift = -2.0 * spins[i]
                    spins[i] = -spins[i]
                    for e in range(ptr[i], ptr[i + 1]):
                        fields[idx[e]] += val[e] * shift
        for i in range(n):
            out[r, i] = spins[i]


def _beta_schedule(cfg: SamplerConfig) -> np.ndarray:
    if cfg.geometric:
        return np.geomspace(cfg.beta_min, cfg.beta_max, cfg.sweeps)
    return np.linspace(cfg.beta_min, cfg.beta_max, cfg.sweeps)


def sa_sample(p: IsingProblem, cfg: SamplerConfig) -> SampleSet:
    """num_reads independent annealing restarts under the beta schedule."""
    variables, h, ptr, idx, val = _dense_arrays(p)
    n = len(variables)
    if n == 0:
        raise ConfigError("cannot sample an empty problem")
    betas = _beta_schedule(cfg)
    spins = np.empty((cfg.num_reads, n), dtype=np.int8)
    _sa_kernel(h, ptr, idx, val, betas, cfg.num_reads, np.uint64(cfg.seed & (2**64 - 1)), spins)
    return SampleSet(
        variables,
        spins,
        energies_for(p, variables, spins),
        np.ones(cfg.num_reads, dtype=np.int64),
        metadata={
            "backend": "sa",
            "seed": cfg.seed,
            "num_reads": cfg.num_reads,
            "sweeps": cfg.sweeps,
            "beta_min": cfg.beta_min,
            "beta_max": cfg.beta_max,
            "geometric": cfg.geometric,
        },
    )


def get_backend(name: str):
    """Resolve a backend selector to a sampling callable."""
    backends = {"exact": exact_sample, "sa": sa_sample}
    if name not in backends:
        raise ConfigError(f"unknown sampler backend {name!r}; choose from {sorted(backends)}")
    return backends[name]
