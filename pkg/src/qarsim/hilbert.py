"""Truncated composite Hilbert spaces and the elementary operators built on them.

Subsystems are either truncated bosonic modes (lowest ``d`` Fock states) or
two-level atoms.  Operators are stored as sparse matrices on the full tensor
product space; single-factor operators are lifted by identity padding.

Conventions fixed here and shared by every other module:

* The first factor in a :class:`CompositeSpace` is the slowest-varying index
  (row-major composite index).
* Two-level basis ordering is ``|down> = 0``, ``|up> = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm


class SpaceMismatchError(ValueError):
    """Arithmetic attempted between operators living on different spaces."""


BOSON = "boson"
TWO_LEVEL = "two_level"


@dataclass(frozen=True)
class SubsystemSpec:
    """A single tensor factor: a truncated bosonic mode or a two-level atom."""

    label: str
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in (BOSON, TWO_LEVEL):
            raise ValueError(f"unknown subsystem kind {self.kind!r}")
        if self.kind == BOSON and self.dim < 2:
            raise ValueError(f"bosonic truncation must be >= 2, got {self.dim}")
        if self.kind == TWO_LEVEL and self.dim != 2:
            raise ValueError("two-level factor must have dim 2")
        if not self.label:
            raise ValueError("subsystem label must be non-empty")


def boson(label: str, truncation: int) -> SubsystemSpec:
    """Bosonic mode truncated to its lowest `truncation` Fock states."""
    return SubsystemSpec(label=label, kind=BOSON, dim=truncation)


def two_level(label: str) -> SubsystemSpec:
    """Two-level atom with basis |down> = 0, |up> = 1."""
    return SubsystemSpec(label=label, kind=TWO_LEVEL, dim=2)


class CompositeSpace:
    """Ordered tensor product of subsystem factors.

    The factor order defines the index convention: the first factor is the
    slowest-varying index of the composite basis.
    """

    def __init__(self, factors):
        factors = tuple(factors)
        if not factors:
            raise ValueError("CompositeSpace needs at least one factor")
        labels = [f.label for f in factors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate subsystem labels in {labels}")
        self._factors = factors
        self._dim = int(np.prod([f.dim for f in factors]))
        self._index = {f.label: i for i, f in enumerate(factors)}

    @property
    def factors(self) -> tuple:
        return self._factors

    @property
    def dim(self) -> int:
        return self._dim

    def factor(self, label: str) -> SubsystemSpec:
        try:
            return self._factors[self._index[label]]
        except KeyError:
            raise KeyError(f"no subsystem labelled {label!r} in this space") from None

    def factor_index(self, label: str) -> int:
        if label not in self._index:
            raise KeyError(f"no subsystem labelled {label!r} in this space")
        return self._index[label]

    def lift(self, label: str, block: np.ndarray) -> "Operator":
        """Embed a single-factor matrix into the full space by identity padding."""
        idx = self.factor_index(label)
        d = self._factors[idx].dim
        block = np.asarray(block, dtype=complex)
        if block.shape != (d, d):
            raise ValueError(f"block shape {block.shape} does not match factor dim {d}")
        mat = sp.csc_matrix(block)
        left = int(np.prod([f.dim for f in self._factors[:idx]], dtype=int))
        right = int(np.prod([f.dim for f in self._factors[idx + 1:]], dtype=int))
        if left > 1:
            mat = sp.kron(sp.identity(left, format="csc"), mat, format="csc")
        if right > 1:
            mat = sp.kron(mat, sp.identity(right, format="csc"), format="csc")
        return Operator(self, mat)

    def __eq__(self, other):
        return isinstance(other, CompositeSpace) and self._factors == other._factors

    def __hash__(self):
        return hash(self._factors)

    def __repr__(self):
        inner = ", ".join(f"{f.label}:{f.dim}" for f in self._factors)
        return f"CompositeSpace({inner})"


class Operator:
    """A sparse complex matrix tagged with the space it acts on.

    Immutable after construction; all arithmetic returns new operators and
    requires identical spaces.
    """

    __slots__ = ("space", "matrix")

    def __init__(self, space: CompositeSpace, matrix):
        matrix = sp.csc_matrix(matrix, dtype=complex)
        if matrix.shape != (space.dim, space.dim):
            raise ValueError(
                f"matrix shape {matrix.shape} does not match space dim {space.dim}"
            )
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    def _check(self, other: "Operator"):
        if self.space != other.space:
            raise SpaceMismatchError("operators live on different spaces")

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.space, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.matrix)

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, (self.matrix @ other.matrix).tocsc())

    def adjoint(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T.tocsc())

    @property
    def dag(self) -> "Operator":
        return self.adjoint()

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def norm(self) -> float:
        """Frobenius norm."""
        return float(sp.linalg.norm(self.matrix))

    def __repr__(self):
        return f"Operator(dim={self.space.dim}, nnz={self.matrix.nnz})"


def identity(space: CompositeSpace) -> Operator:
    return Operator(space, sp.identity(space.dim, format="csc"))


def zero(space: CompositeSpace) -> Operator:
    return Operator(space, sp.csc_matrix((space.dim, space.dim)))


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a


def _require_boson(space: CompositeSpace, label: str) -> int:
    f = space.factor(label)
    if f.kind != BOSON:
        raise ValueError(f"subsystem {label!r} is not a bosonic mode")
    return f.dim


def _require_two_level(space: CompositeSpace, label: str):
    f = space.factor(label)
    if f.kind != TWO_LEVEL:
        raise ValueError(f"subsystem {label!r} is not a two-level atom")


def annihilation(space: CompositeSpace, label: str) -> Operator:
    """Truncated ladder operator: <n-1|a|n> = sqrt(n), lifted to the full space."""
    d = _require_boson(space, label)
    block = np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)
    return space.lift(label, block)


def creation(space: CompositeSpace, label: str) -> Operator:
    return annihilation(space, label).adjoint()


def number_operator(space: CompositeSpace, label: str) -> Operator:
    """diag(0, 1, ..., d-1) on the named mode.

    Built from the exact spectrum rather than adjoint(a) @ a, which on the
    truncated ladder would miss the top-level contribution.
    """
    d = _require_boson(space, label)
    return space.lift(label, np.diag(np.arange(d, dtype=float)))


def sigma_minus(space: CompositeSpace, label: str) -> Operator:
    """|down><up| on the named two-level factor."""
    _require_two_level(space, label)
    block = np.zeros((2, 2), dtype=complex)
    block[0, 1] = 1.0
    return space.lift(label, block)


def sigma_plus(space: CompositeSpace, label: str) -> Operator:
    return sigma_minus(space, label).adjoint()


def excited_projector(space: CompositeSpace, label: str) -> Operator:
    """|up><up| on the named two-level factor."""
    _require_two_level(space, label)
    return space.lift(label, np.diag([0.0, 1.0]))


def position_exponential(space: CompositeSpace, label: str, scale: float) -> Operator:
    """exp(i * scale * (a + a^dag)) on the named mode.

    Computed by dense matrix exponential on the single-factor block, then
    lifted.  Unitary only up to truncation error; use
    :func:`unitarity_defect` for the diagnostic.
    """
    if not np.isfinite(scale):
        raise ValueError("scale must be finite")
    d = _require_boson(space, label)
    ladder = np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)
    x = ladder + ladder.T
    block = expm(1j * float(scale) * x)
    return space.lift(label, block)


def unitarity_defect(op: Operator) -> float:
    """Frobenius norm of U^dag U - 1, the truncation-induced unitarity defect."""
    residual = (op.adjoint() @ op).matrix - sp.identity(op.space.dim, format="csc")
    return float(sp.linalg.norm(residual))
