"""Spin Hamiltonians, RBM-to-Ising mapping, and annealer read decoding.

Energy convention used throughout the toolkit:

    E(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j + offset,   s_i in {-1, +1}

so a negative J is ferromagnetic, consistent with the -1 chain couplers
the embedding generator emits.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

import numpy as np

from .exceptions import (
    ConfigError,
    DimensionMismatchError,
    DomainError,
    IncompleteAssignmentError,
)
from .embedding import RbmEmbedding


def _norm_pair(a: int, b: int) -> tuple[int, int]:
    if a == b:
        raise ConfigError(f"self-coupling ({a}, {a}) not allowed")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class IsingProblem:
    """Sparse spin Hamiltonian: local biases h, couplings J, constant offset."""

    h: dict[int, float]
    J: dict[tuple[int, int], float]
    offset: float = 0.0

    def __post_init__(self):
        normalized: dict[tuple[int, int], float] = {}
        for (a, b), val in self.J.items():
            key = _norm_pair(a, b)
            if key in normalized:
                raise ConfigError(f"duplicate coupling key {key}")
            normalized[key] = float(val)
        object.__setattr__(self, "J", normalized)
        object.__setattr__(self, "h", {int(q): float(v) for q, v in self.h.items()})

    @property
    def variables(self) -> tuple[int, ...]:
        vs = set(self.h)
        for a, b in self.J:
            vs.add(a)
            vs.add(b)
        return tuple(sorted(vs))

    @property
    def num_spins(self) -> int:
        return len(self.variables)


def ising_energy(p: IsingProblem, s: Mapping[int, int]) -> float:
    """E(s) for a complete spin assignment."""
    for q in p.variables:
        if q not in s:
            raise IncompleteAssignmentError(f"no spin given for qubit {q}")
    for q, v in s.items():
        if v not in (-1, 1):
            raise DomainError(f"spin for qubit {q} must be -1 or +1, got {v!r}")
    e = p.offset
    for q, hv in p.h.items():
        e += hv * s[q]
    for (a, b), jv in p.J.items():
        e += jv * s[a] * s[b]
    return e


def energies_for(p: IsingProblem, variables: tuple[int, ...], spins: np.ndarray) -> np.ndarray:
    """Vectorized E for a (reads x variables) spin matrix in column order."""
    col = {q: c for c, q in enumerate(variables)}
    missing = [q for q in p.variables if q not in col]
    if missing:
        raise IncompleteAssignmentError(f"sample matrix missing qubits {missing[:5]}")
    s = spins.astype(np.float64)
    e = np.full(s.shape[0], p.offset)
    for q, hv in p.h.items():
        e += hv * s[:, col[q]]
    for (a, b), jv in p.J.items():
        e += jv * s[:, col[a]] * s[:, col[b]]
    return e


def spin_to_binary(s):
    """Map spins {-1,+1} to bits {0,1}; elementwise on arrays."""
    arr = np.asarray(s)
    if not np.isin(arr, (-1, 1)).all():
        raise DomainError("spins must be -1 or +1")
    out = ((arr + 1) // 2).astype(np.int8)
    return int(out) if np.isscalar(s) or out.ndim == 0 else out


def binary_to_spin(v):
    """Map bits {0,1} to spins {-1,+1}; elementwise on arrays."""
    arr = np.asarray(v)
    if not np.isin(arr, (0, 1)).all():
        raise DomainError("bits must be 0 or 1")
    out = (2 * arr - 1).astype(np.int8)
    return int(out) if np.isscalar(v) or out.ndim == 0 else out


class SpinSample(NamedTuple):
    spins: dict[int, int]
    energy: float
    occurrences: int


class SampleSet:
    """Reads returned by one sampling job.

    ``spins`` is a (reads x variables) matrix of -1/+1 in the column order
    of ``variables``. Energies are stored exactly as computed by the
    backend; ``validate_against`` recomputes them against a problem.
    """

    def __init__(
        self,
        variables: tuple[int, ...],
        spins: np.ndarray,
        energies: np.ndarray,
        occurrences: np.ndarray,
        metadata: dict | None = None,
    ):
        self.variables = tuple(int(v) for v in variables)
        self.spins = np.asarray(spins, dtype=np.int8)
        self.energies = np.asarray(energies, dtype=np.float64)
        self.occurrences = np.asarray(occurrences, dtype=np.int64)
        self.metadata = dict(metadata or {})
        if self.spins.ndim != 2 or self.spins.shape[1] != len(self.variables):
            raise DimensionMismatchError("spins matrix shape inconsistent with variables")
        if not (len(self.energies) == len(self.occurrences) == self.spins.shape[0]):
            raise DimensionMismatchError("per-read arrays must have equal length")
        if (self.occurrences < 1).any():
            raise DomainError("occurrences must be >= 1")
        if not np.isin(self.spins, (-1, 1)).all():
            raise DomainError("spins must be -1 or +1")

    @property
    def num_rows(self) -> int:
        return self.spins.shape[0]

    @property
    def total_reads(self) -> int:
        return int(self.occurrences.sum())

    def read(self, i: int) -> SpinSample:
        return SpinSample(
            spins={q: int(s) for q, s in zip(self.variables, self.spins[i])},
            energy=float(self.energies[i]),
            occurrences=int(self.occurrences[i]),
        )

    def validate_against(self, p: IsingProblem, tol: float = 1e-9) -> None:
        expected = energies_for(p, self.variables, self.spins)
        err = np.abs(expected - self.energies)
        if err.size and err.max() > tol:
            raise DomainError(
                f"stored energies deviate from recomputation by up to {err.max():.3g}"
            )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SampleSet)
            and self.variables == other.variables
            and self.spins.shape == other.spins.shape
            and (self.spins == other.spins).all()
            and (self.energies == other.energies).all()
            and (self.occurrences == other.occurrences).all()
        )


def save_sampleset(ss: SampleSet, path) -> None:
    """CSV of reads plus a JSON metadata sidecar at <path>.meta.json."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"q{v}" for v in ss.variables] + ["energy", "occurrences"])
        for i in range(ss.num_rows):
            writer.writerow(
                [int(s) for s in ss.spins[i]]
                + [repr(float(ss.energies[i])), int(ss.occurrences[i])]
            )
    with open(f"{path}.meta.json", "w", encoding="ascii") as fh:
        json.dump(ss.metadata, fh, indent=1, sort_keys=True)


def load_sampleset(path) -> SampleSet:
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        variables = tuple(int(name[1:]) for name in header[:-2])
        spins, energies, occurrences = [], [], []
        for row in reader:
            spins.append([int(x) for x in row[:-2]])
            energies.append(float(row[-2]))
            occurrences.append(int(row[-1]))
    try:
        with open(f"{path}.meta.json", encoding="ascii") as fh:
            metadata = json.load(fh)
    except FileNotFoundError:
        metadata = {}
    n = len(variables)
    return SampleSet(
        variables,
        np.array(spins, dtype=np.int8).reshape(len(spins), n),
        np.array(energies, dtype=np.float64),
        np.array(occurrences, dtype=np.int64),
        metadata,
    )


def rbm_to_ising(
    params,
    emb: RbmEmbedding,
    chain_strength: float = 1.0,
    beta_eff: float = 1.0,
) -> IsingProblem:
    """Map trained RBM parameters onto the embedded spin problem.

    Under v = (s+1)/2 the RBM Boltzmann weights become those of an Ising
    problem with logical terms

        h_i(visible) = -(b_i/2 + sum_j W_ij/4)
        h_j(hidden)  = -(c_j/2 + sum_i W_ij/4)
        J_ij         = -W_ij/4

    plus a constant offset. Each logical bias is split equally across its
    chain's qubits, each logical coupling sits on its inter-layer coupler,
    chain couplers get -chain_strength, and everything is scaled by
    beta_eff.
    """
    if chain_strength <= 0:
        raise ConfigError("chain_strength must be > 0")
    if beta_eff <= 0:
        raise ConfigError("beta_eff must be > 0")
    W = np.asarray(params.W, dtype=np.float64)
    b = np.asarray(params.b, dtype=np.float64)
    c = np.asarray(params.c, dtype=np.float64)
    n_v, n_h = W.shape
    if len(emb.visible_nodes) != n_v or len(emb.hidden_nodes) != n_h:
        raise DimensionMismatchError(
            f"embedding is {len(emb.visible_nodes)}x{len(emb.hidden_nodes)}, "
            f"params are {n_v}x{n_h}"
        )

    h_vis = -(b / 2.0 + W.sum(axis=1) / 4.0)
    h_hid = -(c / 2.0 + W.sum(axis=0) / 4.0)
    offset = -(b.sum() / 2.0 + c.sum() / 2.0 + W.sum() / 4.0)

    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}

    lv = emb.visible_chain_length
    lh = emb.hidden_chain_length
    for i in range(n_v):
        share = beta_eff * h_vis[i] / lv
        for q in emb.visible_chain(i):
            h[q] = h.get(q, 0.0) + share
    for j in range(n_h):
        share = beta_eff * h_hid[j] / lh
        for q in emb.hidden_chain(j):
            h[q] = h.get(q, 0.0) + share

    for a, b_ in emb.chain_couplings:
        J[_norm_pair(a, b_)] = -chain_strength * beta_eff
    for i in range(n_v):
        for j in range(n_h):
            key = _norm_pair(*emb.coupler_for(i, j))
            J[key] = J.get(key, 0.0) + beta_eff * (-W[i, j] / 4.0)

    return IsingProblem(h=h, J=J, offset=beta_eff * offset)


def decode_samples(
    ss: SampleSet, emb: RbmEmbedding, seed: int
) -> tuple[np.ndarray, np.ndarray, float]:
    """Majority-vote chains back to logical bits.

    Returns (V, H, chain_break_rate) where V and H have one row per read
    in read order, expanded by occurrences. Tied chains are resolved by a
    coin flip from a per-read stream seeded with ``seed + read_index``, so
    unanimous reads decode identically for every seed.
    """
    col = {q: c for c, q in enumerate(ss.variables)}
    n_v = len(emb.visible_nodes)
    n_h = len(emb.hidden_nodes)

    def chain_cols(chain: tuple[int, ...]) -> list[int]:
        try:
            return [col[q] for q in chain]
        except KeyError as exc:
            raise IncompleteAssignmentError(
                f"sample set missing chain qubit {exc.args[0]}"
            ) from None

    v_cols = [chain_cols(emb.visible_chain(i)) for i in range(n_v)]
    h_cols = [chain_cols(emb.hidden_chain(j)) for j in range(n_h)]

    spins = ss.spins.astype(np.int32)
    sums = np.empty((ss.num_rows, n_v + n_h), dtype=np.int32)
    lengths = np.empty(n_v + n_h, dtype=np.int32)
    for idx, cols in enumerate(v_cols + h_cols):
        sums[:, idx] = spins[:, cols].sum(axis=1)
        lengths[idx] = len(cols)

    logical = np.sign(sums).astype(np.int8)
    ties = logical == 0
    for r in np.nonzero(ties.any(axis=1))[0]:
        rng = np.random.default_rng(seed + int(r))
        tie_idx = np.nonzero(ties[r])[0]
        flips = rng.integers(0, 2, size=tie_idx.size)
        logical[r, tie_idx] = np.where(flips == 1, 1, -1)

    broken = (np.abs(sums) != lengths[None, :]).astype(np.int64)
    weighted_breaks = (broken * ss.occurrences[:, None]).sum()
    denom = ss.total_reads * (n_v + n_h)
    rate = float(weighted_breaks / denom) if denom else 0.0

    bits = ((logical + 1) // 2).astype(np.int8)
    expanded = np.repeat(bits, ss.occurrences, axis=0)
    return expanded[:, :n_v], expanded[:, n_v:], rate
