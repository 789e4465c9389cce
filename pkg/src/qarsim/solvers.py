"""Steady states, time evolution and stationary transport quantities.

The steady state is found by replacing one row of the (singular) generator
with the trace functional and solving the resulting nonsingular linear
system.  Three backends are available:

* ``dense`` — LAPACK solve of the full matrix, cheap for small spaces;
* ``direct`` — sparse LU factorization;
* ``iterative`` — incomplete-LU preconditioned LGMRES, for systems whose
  exact LU fill would not fit in memory.

``auto`` picks dense below a small cutoff, then direct, falling back to
iterative if the factorization runs out of memory.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from . import lindblad
from .hilbert import Operator
from .lindblad import Superoperator, devectorize, vectorize

DENSE_CUTOFF = 40  # Hilbert-space dim below which dense solve is the default
DIRECT_DENSITY_CUTOFF = 60  # mean nonzeros per row above which auto avoids exact LU
NEGATIVE_EIGENVALUE_TOL = 1e-8


class SteadyStateError(RuntimeError):
    """Steady-state solve failed or produced an unphysical state."""


@dataclass
class SteadyStateResult:
    rho: np.ndarray
    method: str
    residual: float  # ||L rho||_2 of the returned (normalized) state
    trace_defect: float  # |tr rho - 1| before renormalization
    hermiticity_defect: float  # max |rho - rho^dag| before hermitization
    min_eigenvalue: float  # most negative eigenvalue before clipping
    clipped_weight: float  # total negative weight removed
    iterations: int = 0

    def expectation(self, op: Operator) -> float:
        return expectation(self.rho, op)


def _trace_replaced_system(gen: Superoperator):
    """Generator with its last row swapped for the trace functional."""
    dim = gen.space.dim
    n = dim * dim
    mat = gen.matrix.tolil(copy=True)
    mat[n - 1, :] = lindblad.trace_functional(dim).tolil()
    rhs = np.zeros(n, dtype=complex)
    rhs[n - 1] = 1.0
    return mat.tocsc(), rhs


def _sanitize(gen: Superoperator, v: np.ndarray, method: str,
              iterations: int = 0) -> SteadyStateResult:
    """Hermitize, clip tiny negative eigenvalues, renormalize, and report."""
    rho = devectorize(v)
    herm_defect = float(np.max(np.abs(rho - rho.conj().T)))
    rho = 0.5 * (rho + rho.conj().T)
    trace_defect = abs(float(np.real(np.trace(rho))) - 1.0)

    evals, evecs = np.linalg.eigh(rho)
    min_eig = float(evals[0])
    if min_eig < -NEGATIVE_EIGENVALUE_TOL:
        raise SteadyStateError(
            f"steady state has negative eigenvalue {min_eig:.3e}; "
            "increase truncation or tighten the solve"
        )
    clipped = float(-np.sum(evals[evals < 0]))
    if clipped > 0:
        evals = np.clip(evals, 0.0, None)
        rho = (evecs * evals) @ evecs.conj().T
    tr = float(np.real(np.trace(rho)))
    if tr <= 0:
        raise SteadyStateError("steady state has nonpositive trace")
    rho = rho / tr

    residual = float(np.linalg.norm(gen.matrix @ vectorize(rho)))
    return SteadyStateResult(
        rho=rho,
        method=method,
        residual=residual,
        trace_defect=trace_defect,
        hermiticity_defect=herm_defect,
        min_eigenvalue=min_eig,
        clipped_weight=clipped,
        iterations=iterations,
    )


def _solve_dense(mat, rhs):
    return np.linalg.solve(mat.toarray(), rhs)


def _solve_direct(mat, rhs):
    lu = spla.splu(mat)
    return lu.solve(rhs)


def _solve_iterative(mat, rhs, rtol, maxiter):
    try:
        prec = spla.spilu(mat, drop_tol=1e-4, fill_factor=8.0)
        m_op = spla.LinearOperator(mat.shape, prec.solve)
    except (RuntimeError, MemoryError) as exc:
        warnings.warn(f"ILU preconditioner failed ({exc}); running unpreconditioned",
                      stacklevel=2)
        m_op = None
    counter = {"n": 0}

    def cb(_):
        counter["n"] += 1

    v, info = spla.lgmres(mat, rhs, M=m_op, rtol=rtol, atol=0.0,
                          maxiter=maxiter, callback=cb)
    if info != 0:
        raise SteadyStateError(f"iterative solve did not converge (info={info})")
    return v, counter["n"]


def steady_state(gen: Superoperator, *, method: str = "auto", rtol: float = 1e-10,
                 maxiter: int = 2000) -> SteadyStateResult:
    """Unique stationary density matrix of a Lindblad generator.

    Raises :class:`SteadyStateError` if the generator does not preserve the
    trace, the solve fails, or the solution is unphysical.  Uniqueness is
    not certified; a degenerate generator typically surfaces as a singular
    factorization or non-convergence.
    """
    defect = lindblad.trace_preservation_defect(gen)
    scale = max(gen.norm(), 1.0)
    if defect > 1e-8 * scale:
        raise SteadyStateError(
            f"generator does not preserve trace (defect {defect:.3e})"
        )

    mat, rhs = _trace_replaced_system(gen)
    if method == "auto":
        n = gen.space.dim ** 2
        if gen.space.dim <= DENSE_CUTOFF:
            method = "dense"
        elif gen.matrix.nnz > DIRECT_DENSITY_CUTOFF * n:
            # dense rows (e.g. recoil-kick channels) make exact LU fill
            # explode; the dropped-ILU preconditioner handles them cheaply
            method = "iterative"
        else:
            try:
                v = _solve_direct(mat, rhs)
                return _sanitize(gen, v, "direct")
            except (MemoryError, RuntimeError) as exc:
                warnings.warn(f"direct solve failed ({exc}); trying iterative",
                              stacklevel=2)
                method = "iterative"

    if method == "dense":
        v = _solve_dense(mat, rhs)
        return _sanitize(gen, v, "dense")
    if method == "direct":
        try:
            v = _solve_direct(mat, rhs)
        except RuntimeError as exc:
            raise SteadyStateError(f"sparse LU failed: {exc}") from exc
        return _sanitize(gen, v, "direct")
    if method == "iterative":
        v, iters = _solve_iterative(mat, rhs, rtol, maxiter)
        return _sanitize(gen, v, "iterative", iterations=iters)
    raise ValueError(f"unknown steady-state method {method!r}")


@dataclass
class Trajectory:
    times: np.ndarray
    expectations: dict[str, np.ndarray]
    trace_drift: float  # max |tr rho(t) - 1| over the stored samples
    states: list[np.ndarray] = field(default_factory=list)

    def final_state(self) -> np.ndarray:
        if not self.states:
            raise ValueError("trajectory was run without keep_states")
        return self.states[-1]


def evolve(gen: Superoperator, rho0: np.ndarray, times,
           observables: dict[str, Operator] | None = None, *,
           rtol: float = 1e-8, atol: float = 1e-10,
           keep_states: bool = False) -> Trajectory:
    """Integrate d rho/dt = L rho with an adaptive Runge-Kutta scheme.

    `times` are the sample points (the first entry is the initial time);
    expectation values of `observables` are recorded at each of them.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise ValueError("need at least two sample times")
    if np.any(np.diff(times) <= 0):
        raise ValueError("sample times must be strictly increasing")
    rho0 = np.asarray(rho0, dtype=complex)
    dim = gen.space.dim
    if rho0.shape != (dim, dim):
        raise ValueError(f"initial state shape {rho0.shape} != ({dim}, {dim})")
    tr0 = np.trace(rho0)
    if abs(tr0 - 1.0) > 1e-8:
        raise ValueError(f"initial state has trace {tr0}")

    mat = gen.matrix

    def rhs(_, v):
        return mat @ v

    sol = solve_ivp(rhs, (times[0], times[-1]), vectorize(rho0), t_eval=times,
                    method="RK45", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"time integration failed: {sol.message}")

    observables = observables or {}
    tracks: dict[str, list[float]] = {k: [] for k in observables}
    states: list[np.ndarray] = []
    drift = 0.0
    for j in range(sol.t.size):
        rho = devectorize(sol.y[:, j])
        drift = max(drift, abs(float(np.real(np.trace(rho))) - 1.0))
        for k, op in observables.items():
            tracks[k].append(expectation(rho, op))
        if keep_states:
            states.append(rho)
    return Trajectory(
        times=sol.t.copy(),
        expectations={k: np.asarray(v) for k, v in tracks.items()},
        trace_drift=drift,
        states=states,
    )


def expectation(rho: np.ndarray, op: Operator, *, imag_tol: float = 1e-8) -> float:
    """Tr[op rho] for a Hermitian observable, returned as a real number."""
    val = complex((op.matrix.multiply(rho.T)).sum())
    if abs(val.imag) > imag_tol * max(1.0, abs(val.real)):
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}; "
                         "observable not Hermitian?")
    return float(val.real)


def dissipation_rate(rho: np.ndarray, weight: Operator,
                     terms) -> float:
    """Tr[W * sum_j rate_j D[L_j](rho)] for a Hermitian weight operator W."""
    total = 0.0
    for term in terms:
        if term.rate == 0:
            continue
        ell = term.jump.matrix
        ldl = (ell.conj().T @ ell).tocsc()
        sandwich = (ell.conj().T @ weight.matrix @ ell).tocsc()
        w_eff = sandwich - 0.5 * (weight.matrix @ ldl + ldl @ weight.matrix)
        val = complex(w_eff.multiply(np.asarray(rho).T).sum())
        total += term.rate * val.real
    return total


def heat_current(rho: np.ndarray, h_weight: Operator, terms) -> float:
    """Stationary heat current of one reservoir: Tr[H L_reservoir(rho)].

    `h_weight` sets the energy bookkeeping (e.g. omega * number operator in
    lab-frame units); `terms` are that reservoir's dissipator terms.
    Positive means energy flowing into the system.
    """
    return dissipation_rate(rho, h_weight, terms)


def quanta_current(rho: np.ndarray, number_op: Operator, terms) -> float:
    """Stationary quanta flow of one reservoir: Tr[N L_reservoir(rho)]."""
    return dissipation_rate(rho, number_op, terms)


def stationary_currents(build, rho: np.ndarray, *,
                        lab_energies: bool = True) -> dict[str, float]:
    """Heat current per reservoir, in energy quanta per second times rad/s.

    With `lab_energies` each reservoir's quanta flow is weighted by the
    lab-frame frequency of the quanta it exchanges; multiply by hbar for
    watts in SI mode.
    """
    out = {}
    for label, terms in build.channels.items():
        n_op = build.number_ops.get(label)
        if n_op is None:
            # reservoir without a dedicated counter (e.g. collective channel):
            # weight with the lab-frame energy operator instead
            weight = build.lab_hamiltonian
            if weight is None or not lab_energies:
                weight = build.hamiltonian
            out[label] = dissipation_rate(rho, weight, terms)
            continue
        flow = quanta_current(rho, n_op, terms)
        energy = build.quantum_energies[label] if lab_energies else 1.0
        out[label] = energy * flow
    return out


def first_law_defect(build, rho: np.ndarray) -> float:
    """Residual of sum_j Tr[H L_j rho] over reservoirs, H the generator Hamiltonian.

    Exactly zero in the stationary state of a trace-preserving generator,
    up to the steady-state solve residual; useful as an internal consistency
    check that is independent of any energy-bookkeeping convention.
    """
    total = 0.0
    scale = 0.0
    for terms in build.channels.values():
        cur = dissipation_rate(rho, build.hamiltonian, terms)
        total += cur
        scale = max(scale, abs(cur))
    return abs(total) if scale == 0 else abs(total)
