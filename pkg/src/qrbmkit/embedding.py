"""Place a bipartite RBM onto Pegasus as chains of physical qubits.

The generator lays out each visible unit as a chain of ``n_hidden /
n_periodicity`` consecutive qubit indices and each hidden unit as a chain
of ``n_visible / n_periodicity`` consecutive indices, wiring exactly one
physical coupler per logical (visible, hidden) pair. Generation is purely
arithmetic and never consults the hardware graph; soundness against a
:class:`~qrbmkit.pegasus.PegasusGraph` is exclusively the job of
:func:`validate_embedding`, which keeps the layout rules auditable.

Because consecutive linear indices are adjacent only along z within one
(u, w, k) block, every valid chain is a straight z-run. That single fact
decides which shapes can calibrate successfully (see
:func:`calibrate_params`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .exceptions import (
    ConfigError,
    EmbeddingOverflowError,
    NoValidEmbeddingError,
    QubitRangeError,
)
from .pegasus import PegasusGraph


@dataclass(frozen=True)
class EmbeddingParams:
    """Inputs of the chain-layout generator.

    ``n_periodicity`` is the number of units per segment; it must divide
    both layer sizes. ``periodicity_v`` / ``periodicity_h`` are the linear
    index strides between segments, ``startv`` / ``starto`` the first
    visible / hidden qubit indices.
    """

    n_visible: int
    n_hidden: int
    periodicity_v: int
    periodicity_h: int
    n_periodicity: int
    startv: int
    starto: int

    def __post_init__(self):
        if self.n_visible < 0 or self.n_hidden < 0:
            raise ConfigError("layer sizes must be non-negative")
        if self.n_periodicity < 1:
            raise ConfigError("n_periodicity must be >= 1")
        if self.n_visible % self.n_periodicity or self.n_hidden % self.n_periodicity:
            raise ConfigError(
                f"n_periodicity={self.n_periodicity} must divide both "
                f"n_visible={self.n_visible} and n_hidden={self.n_hidden}"
            )
        for name in ("periodicity_v", "periodicity_h", "startv", "starto"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")

    @property
    def visible_segments(self) -> int:
        return self.n_visible // self.n_periodicity

    @property
    def hidden_segments(self) -> int:
        return self.n_hidden // self.n_periodicity

    def to_dict(self) -> dict:
        return {
            "n_visible": self.n_visible,
            "n_hidden": self.n_hidden,
            "periodicity_v": self.periodicity_v,
            "periodicity_h": self.periodicity_h,
            "n_periodicity": self.n_periodicity,
            "startv": self.startv,
            "starto": self.starto,
        }


@dataclass(frozen=True)
class RbmEmbedding:
    """Logical-to-physical map produced by :func:`generate_embedding`.

    ``visible_nodes[i]`` / ``hidden_nodes[j]`` are chain-start qubit
    indices in logical order (segment index * n_periodicity + offset).
    Chains occupy the consecutive index runs [start, start + length).
    """

    params: EmbeddingParams
    visible_nodes: tuple[int, ...]
    hidden_nodes: tuple[int, ...]
    chain_couplings: tuple[tuple[int, int], ...]
    interlayer_couplings: tuple[tuple[int, int], ...]

    @property
    def visible_chain_length(self) -> int:
        return self.params.hidden_segments

    @property
    def hidden_chain_length(self) -> int:
        return self.params.visible_segments

    def visible_chain(self, i: int) -> tuple[int, ...]:
        s = self.visible_nodes[i]
        return tuple(range(s, s + self.visible_chain_length))

    def hidden_chain(self, j: int) -> tuple[int, ...]:
        s = self.hidden_nodes[j]
        return tuple(range(s, s + self.hidden_chain_length))

    def all_qubits(self) -> set[int]:
        qubits: set[int] = set()
        for i in range(len(self.visible_nodes)):
            qubits.update(self.visible_chain(i))
        for j in range(len(self.hidden_nodes)):
            qubits.update(self.hidden_chain(j))
        return qubits

    def coupler_for(self, i: int, j: int) -> tuple[int, int]:
        """Physical coupler carrying logical pair (visible i, hidden j)."""
        np_ = self.params.n_periodicity
        return (
            self.visible_nodes[i] + j // np_,
            self.hidden_nodes[j] + i // np_,
        )

    @property
    def J(self) -> dict[tuple[int, int], float]:
        """Sparse coupling matrix seeded with -1 on every chain coupler."""
        return {pair: -1.0 for pair in self.chain_couplings}


def generate_embedding(
    params: EmbeddingParams, num_qubits: int | None = None
) -> RbmEmbedding:
    """Run the layout generator for ``params``.

    With ``num_qubits`` given, any produced index at or beyond it raises
    :class:`EmbeddingOverflowError` naming the offending index. Output is
    deterministic; invalid pairs are never dropped here.
    """
    p = params
    h_v = p.visible_segments
    h_h = p.hidden_segments

    visible_nodes: list[int] = []
    hidden_nodes: list[int] = []
    chain_couplings: list[tuple[int, int]] = []
    interlayer: list[tuple[int, int]] = []

    def check(q: int, role: str) -> int:
        if num_qubits is not None and q >= num_qubits:
            raise EmbeddingOverflowError(q, num_qubits, role)
        return q

    for z in range(h_v):
        for x in range(p.n_periodicity):
            n = p.startv + p.n_periodicity * x + z * p.periodicity_v
            visible_nodes.append(check(n, "visible chain start"))
            for j in range(h_h - 1):
                chain_couplings.append(
                    (check(n + j, "visible chain"), check(n + j + 1, "visible chain"))
                )
            if h_h > 0:
                check(n + h_h - 1, "visible chain end")

    for z in range(h_h):
        for x in range(p.n_periodicity):
            q = p.starto + p.n_periodicity * x + z * p.periodicity_h
            hidden_nodes.append(check(q, "hidden chain start"))
            for j in range(h_v - 1):
                chain_couplings.append(
                    (check(q + j, "hidden chain"), check(q + j + 1, "hidden chain"))
                )
            if h_v > 0:
                check(q + h_v - 1, "hidden chain end")

    for x in range(h_h):
        for y in range(h_v):
            for t in range(p.n_periodicity):
                n = p.startv + p.n_periodicity * t + y * p.periodicity_v + x
                for k in range(p.n_periodicity):
                    q = p.starto + p.n_periodicity * k + x * p.periodicity_h + y
                    interlayer.append(
                        (check(n, "inter-layer"), check(q, "inter-layer"))
                    )

    return RbmEmbedding(
        params=p,
        visible_nodes=tuple(visible_nodes),
        hidden_nodes=tuple(hidden_nodes),
        chain_couplings=tuple(chain_couplings),
        interlayer_couplings=tuple(interlayer),
    )


@dataclass(frozen=True)
class ValidationReport:
    bad_couplers: tuple[tuple[int, int], ...]
    chain_overlaps: tuple[int, ...]  # qubits claimed by more than one chain
    visible_length_histogram: dict[int, int]
    hidden_length_histogram: dict[int, int]
    valid: bool


def validate_embedding(g: PegasusGraph, emb: RbmEmbedding) -> ValidationReport:
    """Check an embedding against the hardware graph.

    Reports every coupler that is not a Pegasus edge and every qubit
    claimed by more than one chain. Indices outside the graph raise
    :class:`QubitRangeError` (a hard error, not a soundness finding).
    """
    n = g.num_qubits
    all_pairs = list(emb.chain_couplings) + list(emb.interlayer_couplings)
    for a, b in all_pairs:
        if not (0 <= a < n and 0 <= b < n):
            raise QubitRangeError(
                f"embedding references qubit outside graph: pair ({a}, {b})"
            )

    bad = tuple((a, b) for a, b in all_pairs if not g.is_edge(a, b))

    seen: dict[int, int] = {}
    overlaps: set[int] = set()
    chains: Iterable[tuple[int, ...]] = (
        [emb.visible_chain(i) for i in range(len(emb.visible_nodes))]
        + [emb.hidden_chain(j) for j in range(len(emb.hidden_nodes))]
    )
    for chain in chains:
        for q in chain:
            if not 0 <= q < n:
                raise QubitRangeError(f"chain qubit {q} outside graph")
            if q in seen:
                overlaps.add(q)
            seen[q] = seen.get(q, 0) + 1

    vl = emb.visible_chain_length
    hl = emb.hidden_chain_length
    return ValidationReport(
        bad_couplers=bad,
        chain_overlaps=tuple(sorted(overlaps)),
        visible_length_histogram={vl: len(emb.visible_nodes)} if emb.visible_nodes else {},
        hidden_length_histogram={hl: len(emb.hidden_nodes)} if emb.hidden_nodes else {},
        valid=not bad and not overlaps,
    )


@dataclass(frozen=True)
class EmbeddingStats:
    qubits_used: int
    max_chain_length: int
    visible_chains: int
    hidden_chains: int

    _lengths: tuple[int, ...] = ()

    def chains_longer_than(self, t: int) -> int:
        return sum(1 for L in self._lengths if L > t)


def embedding_stats(emb: RbmEmbedding) -> EmbeddingStats:
    """Pure counts over an embedding; all zeros for an empty one."""
    lengths = [emb.visible_chain_length] * len(emb.visible_nodes)
    lengths += [emb.hidden_chain_length] * len(emb.hidden_nodes)
    return EmbeddingStats(
        qubits_used=len(emb.all_qubits()),
        max_chain_length=max(lengths, default=0),
        visible_chains=len(emb.visible_nodes),
        hidden_chains=len(emb.hidden_nodes),
        _lengths=tuple(lengths),
    )


# --- calibration -----------------------------------------------------------

def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def default_periodicity_candidates(n_visible: int, n_hidden: int) -> list[int]:
    """Ascending common divisors of the two layer sizes."""
    g = math.gcd(n_visible, n_hidden)
    return _divisors(g) if g else [1]


def _candidate_valid(
    g: PegasusGraph, p: EmbeddingParams, defects: frozenset[int]
) -> bool:
    """Early-exit equivalent of generate + validate for the search loop."""
    n = g.num_qubits
    h_v = p.visible_segments
    h_h = p.hidden_segments
    claimed: set[int] = set()

    def chain_ok(start: int, length: int) -> bool:
        if start < 0 or start + length > n:
            return False
        for q in range(start, start + length):
            if q in claimed or q in defects:
                return False
        for q in range(start, start + length - 1):
            if not g.is_edge(q, q + 1):
                return False
        claimed.update(range(start, start + length))
        return True

    for z in range(h_v):
        for x in range(p.n_periodicity):
            if not chain_ok(p.startv + p.n_periodicity * x + z * p.periodicity_v, h_h):
                return False
    for z in range(h_h):
        for x in range(p.n_periodicity):
            if not chain_ok(p.starto + p.n_periodicity * x + z * p.periodicity_h, h_v):
                return False

    for x in range(h_h):
        for y in range(h_v):
            for t in range(p.n_periodicity):
                a = p.startv + p.n_periodicity * t + y * p.periodicity_v + x
                for k in range(p.n_periodicity):
                    b = p.starto + p.n_periodicity * k + x * p.periodicity_h + y
                    if not g.is_edge(a, b):
                        return False
    return True


@dataclass(frozen=True)
class CalibrationResult:
    params: EmbeddingParams
    report: dict


def calibrate_params(
    g: PegasusGraph,
    n_visible: int,
    n_hidden: int,
    n_periodicity_candidates: Sequence[int] | None = None,
    defects: Iterable[int] = (),
) -> CalibrationResult:
    """Deterministic search for generator parameters valid on ``g``.

    Search order (first fully valid tuple wins):

      1. ``n_periodicity`` over the given candidates (default: ascending
         common divisors of the layer sizes). Candidates whose chain
         length would exceed the column height m-1 are recorded as pruned,
         since a chain of consecutive indices can only realize adjacent
         qubits inside one (u, w, k) block.
      2. stride pair (periodicity_v, periodicity_h) over the fixed menu
         [(12*(m-1), 12*(m-1)), (m-1, m-1)] - tile stride, then offset
         stride.
      3. diagonal anchor a ascending in [0, m-1).
      4. offsets k0, k2 ascending in [0, 12) x [0, 12), defining
         startv = a*12*(m-1) + k0*(m-1) + a and
         starto = half + a*12*(m-1) + k2*(m-1) + a (half = first index of
         the horizontal block).

    Raises :class:`NoValidEmbeddingError` with search statistics when the
    space is exhausted.
    """
    defect_set = frozenset(defects)
    m = g.m
    col = m - 1
    half = g.num_qubits // 2
    if n_periodicity_candidates is None:
        n_periodicity_candidates = default_periodicity_candidates(n_visible, n_hidden)

    stride_menu = [(12 * col, 12 * col), (col, col)]
    stats = {
        "graph_m": m,
        "n_visible": n_visible,
        "n_hidden": n_hidden,
        "candidates_examined": 0,
        "pruned_nondivisor": 0,
        "pruned_chain_too_long": 0,
        "stride_menu": stride_menu,
        "anchor_range": col,
        "offset_range": 12,
        "search_order": "n_periodicity, stride pair, anchor, k0, k2",
    }

    for np_ in n_periodicity_candidates:
        if np_ < 1 or n_visible % np_ or n_hidden % np_:
            stats["pruned_nondivisor"] += 1
            continue
        if max(n_visible, n_hidden) // np_ > col:
            stats["pruned_chain_too_long"] += 1
            continue
        for pv, ph in stride_menu:
            for a in range(col):
                for k0 in range(12):
                    for k2 in range(12):
                        params = EmbeddingParams(
                            n_visible=n_visible,
                            n_hidden=n_hidden,
                            periodicity_v=pv,
                            periodicity_h=ph,
                            n_periodicity=np_,
                            startv=a * 12 * col + k0 * col + a,
                            starto=half + a * 12 * col + k2 * col + a,
                        )
                        stats["candidates_examined"] += 1
                        if _candidate_valid(g, params, defect_set):
                            stats["found"] = True
                            return CalibrationResult(params=params, report=dict(stats))
    stats["found"] = False
    raise NoValidEmbeddingError(
        f"no valid {n_visible}x{n_hidden} embedding found on P{m} "
        f"({stats['candidates_examined']} candidates examined)",
        stats,
    )


# --- interchange file ------------------------------------------------------

def embedding_to_json(emb: RbmEmbedding) -> str:
    """Serialize with a stable key order so files diff cleanly."""
    doc = {
        "params": emb.params.to_dict(),
        "visible_nodes": list(emb.visible_nodes),
        "hidden_nodes": list(emb.hidden_nodes),
        "chain_couplings": [list(p) for p in emb.chain_couplings],
        "interlayer_couplings": [list(p) for p in emb.interlayer_couplings],
    }
    return json.dumps(doc, indent=1)


def embedding_from_json(text: str) -> RbmEmbedding:
    doc = json.loads(text)
    emb = RbmEmbedding(
        params=EmbeddingParams(**doc["params"]),
        visible_nodes=tuple(doc["visible_nodes"]),
        hidden_nodes=tuple(doc["hidden_nodes"]),
        chain_couplings=tuple(tuple(p) for p in doc["chain_couplings"]),
        interlayer_couplings=tuple(tuple(p) for p in doc["interlayer_couplings"]),
    )
    regenerated = generate_embedding(emb.params)
    if regenerated != emb:
        raise ConfigError("embedding file inconsistent with its own parameters")
    return emb


def save_embedding(emb: RbmEmbedding, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(embedding_to_json(emb))


def load_embedding(path) -> RbmEmbedding:
    with open(path, encoding="ascii") as fh:
        return embedding_from_json(fh.read())
