"""Exception types shared across the toolkit.

Every error a caller is expected to catch has a dedicated class here so the
CLI can map failures onto distinct exit codes.
"""


class QrbmKitError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(QrbmKitError):
    """Invalid run configuration or parameter set."""


class CapacityError(QrbmKitError):
    """Problem too large for an exact/enumeration code path."""


class ValidationError(QrbmKitError):
    """An artifact failed a soundness check (distinct from bad input)."""


class DimensionMismatchError(QrbmKitError):
    """Array shapes inconsistent with the model dimensions."""


class DomainError(QrbmKitError):
    """A value outside its documented domain (e.g. a spin not in {-1,+1})."""


class IncompleteAssignmentError(QrbmKitError):
    """A spin/sample assignment missing one or more required variables."""


class QubitRangeError(QrbmKitError, IndexError):
    """A qubit index or coordinate outside the graph."""


class EmbeddingOverflowError(QrbmKitError):
    """Generated embedding references a qubit index beyond the target graph."""

    def __init__(self, index: int, num_qubits: int, role: str):
        self.index = index
        self.num_qubits = num_qubits
        self.role = role
        super().__init__(
            f"{role} qubit index {index} exceeds graph size {num_qubits}"
        )


class NoValidEmbeddingError(QrbmKitError):
    """Calibration exhausted its search space without a valid embedding."""

    def __init__(self, message: str, stats: dict):
        self.stats = stats
        super().__init__(message)


class SamplerError(QrbmKitError):
    """A sampling backend failed."""


class TransportError(SamplerError):
    """Remote sampler endpoint unreachable or HTTP-level failure."""


class RejectedResponseError(SamplerError):
    """Remote sampler response violated the wire contract."""


class ParseError(QrbmKitError):
    """CSV cell-level parse failure, with row/column context."""

    def __init__(self, failures):
        # failures: list of (row_index, column_name, raw_value)
        self.failures = list(failures)
        preview = "; ".join(
            f"row {r}, column {c!r}: {v!r}" for r, c, v in self.failures[:5]
        )
        more = "" if len(self.failures) <= 5 else f" (+{len(self.failures) - 5} more)"
        super().__init__(f"unparseable cells: {preview}{more}")


class InsufficientDataError(QrbmKitError):
    """Too few rows for the requested statistic."""


class AllocationError(QrbmKitError):
    """Bit-budget allocation failure, listing per-feature demands."""


class MissingArtifactError(QrbmKitError):
    """A prerequisite artifact file is absent; names the producing command."""

    def __init__(self, path, producer: str):
        self.path = path
        self.producer = producer
        super().__init__(
            f"missing artifact {path}; run `{producer}` first to produce it"
        )
