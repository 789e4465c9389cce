"""Sparse superoperators acting on vectorized density matrices.

Vectorization is column-stacking: ``v[i + dim*j] = rho[i, j]``, i.e. a
Fortran-order flatten.  Under this convention ``vec(A X B) = (B^T kron A) vec(X)``
with the standard Kronecker product, which fixes the matrix forms of the
Hamiltonian commutator and the Lindblad dissipator below.

Storage is compressed-column (CSC) throughout: the steady-state solvers
favour column access.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .hilbert import CompositeSpace, Operator, SpaceMismatchError


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Column-stack a square matrix into a vector."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    return rho.flatten(order="F")


def devectorize(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v)
    dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise ValueError(f"vector length {v.size} is not a perfect square")
    return v.reshape((dim, dim), order="F")


class Superoperator:
    """Sparse matrix of shape dim^2 x dim^2 acting on vectorized density matrices."""

    __slots__ = ("space", "matrix")

    def __init__(self, space: CompositeSpace, matrix):
        matrix = sp.csc_matrix(matrix, dtype=complex)
        n = space.dim * space.dim
        if matrix.shape != (n, n):
            raise ValueError(
                f"superoperator shape {matrix.shape} does not match dim^2 = {n}"
            )
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, name, value):
        raise AttributeError("Superoperator is immutable")

    def __add__(self, other: "Superoperator") -> "Superoperator":
        if self.space != other.space:
            raise SpaceMismatchError("superoperators live on different spaces")
        return Superoperator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Superoperator") -> "Superoperator":
        if self.space != other.space:
            raise SpaceMismatchError("superoperators live on different spaces")
        return Superoperator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar) -> "Superoperator":
        return Superoperator(self.space, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Action on a density matrix, returned as a matrix."""
        return devectorize(self.matrix @ vectorize(rho))

    def norm(self) -> float:
        """Max-absolute-entry norm, used for relative tolerances."""
        if self.matrix.nnz == 0:
            return 0.0
        return float(np.max(np.abs(self.matrix.data)))

    def __repr__(self):
        return f"Superoperator(dim={self.space.dim}, nnz={self.matrix.nnz})"


@dataclass(frozen=True)
class DissipatorTerm:
    """A Lindblad jump channel: rate * D[jump].

    The rate is carried outside the jump operator so that rate sweeps can
    reuse the assembled sparsity structure.
    """

    rate: float
    jump: Operator

    def __post_init__(self):
        if not np.isfinite(self.rate) or self.rate < 0:
            raise ValueError(f"dissipator rate must be nonnegative, got {self.rate}")


def hamiltonian_superoperator(h: Operator, *, hermiticity_rtol: float = 1e-10) -> Superoperator:
    """The commutator part -i[H, .] as a sparse superoperator.

    H must be Hermitian within `hermiticity_rtol` relative to its norm.
    """
    m = h.matrix
    defect = sp.linalg.norm(m - m.conj().T)
    scale = sp.linalg.norm(m)
    if scale > 0 and defect > hermiticity_rtol * scale:
        raise ValueError(
            f"Hamiltonian is not Hermitian: defect {defect:.3e} vs norm {scale:.3e}"
        )
    dim = h.space.dim
    eye = sp.identity(dim, format="csc")
    mat = -1j * (sp.kron(eye, m, format="csc") - sp.kron(m.T, eye, format="csc"))
    return Superoperator(h.space, mat)


def dissipator_superoperator(term: DissipatorTerm) -> Superoperator:
    """rate * (L rho L^dag - 1/2 {L^dag L, rho}) as a sparse superoperator."""
    ell = term.jump.matrix
    dim = term.jump.space.dim
    eye = sp.identity(dim, format="csc")
    ldl = (ell.conj().T @ ell).tocsc()
    mat = (
        sp.kron(ell.conj(), ell, format="csc")
        - 0.5 * sp.kron(eye, ldl, format="csc")
        - 0.5 * sp.kron(ldl.T, eye, format="csc")
    )
    return Superoperator(term.jump.space, term.rate * mat)


def zero_superoperator(space: CompositeSpace) -> Superoperator:
    n = space.dim * space.dim
    return Superoperator(space, sp.csc_matrix((n, n)))


def compose(terms, space: CompositeSpace | None = None) -> Superoperator:
    """Sparse sum of superoperators; an empty iterable gives the zero superoperator.

    Terms are consumed lazily so that large intermediate superoperators (e.g.
    one per quadrature node) never need to be alive at the same time.
    """
    total = None
    for t in terms:
        total = t if total is None else total + t
    if total is None:
        if space is None:
            raise ValueError("compose of an empty iterable needs an explicit space")
        return zero_superoperator(space)
    if space is not None and total.space != space:
        raise SpaceMismatchError("composed terms do not live on the requested space")
    return total


def trace_functional(dim: int) -> sp.csr_matrix:
    """Row vector implementing rho -> trace(rho) on vectorized matrices."""
    cols = np.arange(dim) * (dim + 1)
    data = np.ones(dim, dtype=complex)
    rows = np.zeros(dim, dtype=int)
    return sp.csr_matrix((data, (rows, cols)), shape=(1, dim * dim))


def trace_preservation_defect(gen: Superoperator) -> float:
    """Max entry of the identity row-functional applied to the generator.

    A valid Lindblad generator annihilates the vectorized-identity left
    functional; the defect is reported in max norm for comparison against
    the generator's own max-entry norm.
    """
    row = trace_functional(gen.space.dim) @ gen.matrix
    if row.nnz == 0:
        return 0.0
    return float(np.max(np.abs(row.toarray())))
