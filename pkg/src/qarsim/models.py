"""Physical generators for the atom-cavity refrigerator models.

Three builders are provided:

* :func:`build_single_cavity` — trapped atom in one cavity, with three
  interaction tiers (full sine, linearised + rotating-wave, three-body).
* :func:`build_crossed_full` — crossed-cavity model retaining the electronic
  degree of freedom.
* :func:`build_crossed_effective` — crossed-cavity model with the excited
  electronic state adiabatically eliminated, either with the exact
  Lorentzian coefficients or in the large-detuning limit.

All generators are assembled in a rotating frame that removes the optical
carrier frequencies; the dissipators are invariant under these frames and
the reported observables (mode occupations, quanta currents) are
frame-independent.  Frames used:

* single cavity: photon and atom rotate at the cavity frequency, leaving
  H = nu (a^dag a + sigma^+ sigma^-);
* crossed full: both photons and the atom rotate at omega_c, leaving
  H = nu a^dag a - nu b^dag b - Delta sigma^+ sigma^-;
* crossed effective: each mode rotates at its own frequency, leaving no
  free Hamiltonian (every retained interaction term commutes with the
  removed part, so the generator stays time-independent).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from . import analytics, hilbert, lindblad
from .hilbert import CompositeSpace, Operator
from .lindblad import DissipatorTerm, Superoperator

# CODATA 2018
HBAR = 1.054571817e-34  # J s
K_BOLTZMANN = 1.380649e-23  # J / K
C0 = 299792458.0  # m / s

SI = "si"
NATURAL = "natural"


class SingleCavityTier(str, Enum):
    FULL_SINE = "full_sine"
    LDA_RWA = "lda_rwa"
    THREE_BODY = "three_body"


class CrossedTier(str, Enum):
    FULL_WITH_ATOM = "full_with_atom"
    EFFECTIVE_FULL = "effective_full"
    EFFECTIVE_LARGE_DELTA = "effective_large_delta"


def _constants(units: str) -> tuple[float, float]:
    if units == SI:
        return HBAR, K_BOLTZMANN
    if units == NATURAL:
        return 1.0, 1.0
    raise ValueError(f"unknown units mode {units!r}")


def bose_occupation(omega: float, temperature: float, *, hbar: float = HBAR,
                    kb: float = K_BOLTZMANN) -> float:
    """Equilibrium occupation (exp(hbar omega / kb T) - 1)^-1.

    Uses expm1 for small exponents and the exp(-x) asymptote for large ones,
    so neither regime overflows.
    """
    if omega <= 0:
        raise ValueError("frequency must be positive")
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    x = hbar * omega / (kb * temperature)
    if x > 40.0:
        return math.exp(-x)
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class VirtualTemperature:
    kelvin: float
    mode: str  # refrigerator | heat_pump | inversion


def virtual_temperature(e_a: float, e_b: float, e_c: float, t_r: float,
                        t_h: float) -> VirtualTemperature:
    """Temperature of the virtual qubit: T_v = E_A / (E_C/T_r - E_B/T_h).

    Energies are angular frequencies sharing one unit system; t_h may be
    math.inf for the hot-bath limit.  Negative results (population
    inversion) are returned as-is with the mode flag set.
    """
    if abs(e_a + e_b - e_c) > 1e-9 * abs(e_c):
        raise ValueError("resonance E_A + E_B = E_C violated")
    if t_r <= 0:
        raise ValueError("reservoir temperature must be positive")
    denom = e_c / t_r - (0.0 if math.isinf(t_h) else e_b / t_h)
    if denom == 0:
        raise ZeroDivisionError("virtual temperature diverges: vanishing denominator")
    tv = e_a / denom
    if tv < 0:
        mode = "inversion"
    elif tv > t_r:
        mode = "heat_pump"
    else:
        mode = "refrigerator"
    return VirtualTemperature(kelvin=tv, mode=mode)


def coefficient_of_performance(e_a: float, e_b: float) -> float:
    """Weak-coupling coefficient of performance E_A / E_B."""
    if e_b <= 0:
        raise ValueError("input transition energy must be positive")
    return e_a / e_b


@dataclass(frozen=True)
class SingleCavityParams:
    """Single-cavity model inputs, angular frequencies in rad/s.

    The cavity frequency is derived from the resonance omega = epsilon - nu
    and is not an independent input.
    """

    nu: float
    epsilon: float
    g: float
    eta: float
    lam: float  # intrinsic heating rate, quanta/s
    kappa: float
    nbar_b: float
    gamma_sp: float
    d_phonon: int
    d_photon: int
    tier: SingleCavityTier = SingleCavityTier.LDA_RWA
    nbar_a_inv: float = 0.0
    nbar_sigma: float = 0.0
    quadrature_points: int = 100
    units: str = SI

    def __post_init__(self):
        if self.nu <= 0 or self.epsilon <= 0:
            raise ValueError("nu and epsilon must be positive")
        if self.omega <= 0:
            raise ValueError("derived cavity frequency epsilon - nu must be positive")
        for name in ("g", "lam", "kappa", "nbar_b", "gamma_sp", "nbar_a_inv",
                     "nbar_sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.eta > 0.3:
            warnings.warn(f"eta = {self.eta} is outside the Lamb-Dicke regime",
                          stacklevel=2)
        if self.d_phonon < 2 or self.d_photon < 2:
            raise ValueError("truncations must be >= 2")
        if self.quadrature_points < 2:
            raise ValueError("need at least 2 quadrature nodes")
        _constants(self.units)

    @property
    def omega(self) -> float:
        return self.epsilon - self.nu


@dataclass(frozen=True)
class CrossedCavityParams:
    """Crossed-cavity model inputs, angular frequencies in rad/s.

    omega_b is derived from two-photon resonance omega_c - omega_b = nu and
    the detuning is Delta = omega_c - epsilon by definition.
    """

    nu: float
    epsilon: float
    omega_c: float
    g_b: float
    g_c: float
    eta: float
    delta_b: float
    delta_c: float
    kappa_b: float
    kappa_c: float
    lam: float
    gamma_sp: float
    t_h: float
    t_r: float
    d_phonon: int
    d_photon_b: int
    d_photon_c: int
    tier: CrossedTier = CrossedTier.EFFECTIVE_LARGE_DELTA
    nbar_a_inv: float | None = None  # None: computed from (nu, t_r)
    quadrature_points: int = 100
    units: str = SI

    def __post_init__(self):
        if self.nu <= 0 or self.epsilon <= 0 or self.omega_c <= 0:
            raise ValueError("frequencies must be positive")
        if self.omega_b <= 0:
            raise ValueError("derived omega_b = omega_c - nu must be positive")
        if self.t_h <= 0 or self.t_r <= 0:
            raise ValueError("temperatures must be positive")
        for name in ("g_b", "g_c", "kappa_b", "kappa_c", "lam", "gamma_sp"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.eta > 0.3:
            warnings.warn(f"eta = {self.eta} is outside the Lamb-Dicke regime",
                          stacklevel=2)
        if min(self.d_phonon, self.d_photon_b, self.d_photon_c) < 2:
            raise ValueError("truncations must be >= 2")
        _constants(self.units)

    @property
    def omega_b(self) -> float:
        return self.omega_c - self.nu

    @property
    def Delta(self) -> float:
        return self.omega_c - self.epsilon

    @property
    def gtilde_b(self) -> float:
        return self.g_b * math.cos(self.delta_b)

    @property
    def gtilde_c(self) -> float:
        return self.g_c * math.cos(self.delta_c)

    @property
    def h_b(self) -> float:
        return self.g_b * math.sin(self.delta_b)

    @property
    def nbar_b(self) -> float:
        hbar, kb = _constants(self.units)
        return bose_occupation(self.omega_b, self.t_h, hbar=hbar, kb=kb)

    @property
    def nbar_c(self) -> float:
        hbar, kb = _constants(self.units)
        return bose_occupation(self.omega_c, self.t_r, hbar=hbar, kb=kb)

    @property
    def nbar_b_cavity(self) -> float:
        """Stationary occupation of cavity b: one hot port, one vacuum port."""
        return 0.5 * self.nbar_b

    @property
    def phonon_nbar_inv(self) -> float:
        if self.nbar_a_inv is not None:
            return self.nbar_a_inv
        hbar, kb = _constants(self.units)
        return 1.0 / bose_occupation(self.nu, self.t_r, hbar=hbar, kb=kb)


@dataclass(frozen=True)
class IonSite:
    """Per-ion couplings for the collective refrigerator."""

    g_b: float
    g_c: float
    eta: float  # signed: normal-mode displacement amplitude
    delta_b: float
    delta_c: float
    Delta: float

    def __post_init__(self):
        if self.Delta == 0:
            raise ValueError("per-ion detuning must be nonzero")


@dataclass(frozen=True)
class IonArrayParams:
    ions: tuple[IonSite, ...]

    def __post_init__(self):
        if not self.ions:
            raise ValueError("ion list must be nonempty")


def collective_coupling(array: IonArrayParams) -> float:
    """Collective three-body coupling: sum_j gb~(r_j) gc~(r_j) eta_j / Delta_j."""
    total = 0.0
    for ion in array.ions:
        gb = ion.g_b * math.cos(ion.delta_b)
        gc = ion.g_c * math.cos(ion.delta_c)
        total += gb * gc * ion.eta / ion.Delta
    return total


@dataclass
class ModelBuild:
    """Assembled generator plus the pieces needed for diagnostics.

    `hamiltonian` is the full rotating-frame Hamiltonian (free part, shifts
    and interaction); `channels` groups the dissipator terms by reservoir;
    `quantum_energies` gives the lab-frame angular frequency of the quanta
    each reservoir exchanges, for converting quanta/s to watts.
    """

    space: CompositeSpace
    params: object
    hamiltonian: Operator
    channels: dict[str, list[DissipatorTerm]]
    generator: Superoperator
    observables: dict[str, Operator]
    number_ops: dict[str, Operator]
    quantum_energies: dict[str, float]
    lab_hamiltonian: Operator | None = None

    def channel_superoperator(self, label: str) -> Superoperator:
        return lindblad.compose(
            (lindblad.dissipator_superoperator(t) for t in self.channels[label]),
            space=self.space,
        )


def _assemble(space, params, hamiltonian, channels, observables, number_ops,
              quantum_energies, fused=None) -> ModelBuild:
    fused = fused or {}
    lab_h = None
    if all(label in quantum_energies for label in number_ops):
        terms = [quantum_energies[label] * op for label, op in number_ops.items()]
        lab_h = terms[0]
        for t in terms[1:]:
            lab_h = lab_h + t

    def parts():
        yield lindblad.hamiltonian_superoperator(hamiltonian)
        for label, terms in channels.items():
            if label in fused:
                yield fused[label]
                continue
            for term in terms:
                if term.rate > 0:
                    yield lindblad.dissipator_superoperator(term)

    return ModelBuild(
        space=space,
        params=params,
        hamiltonian=hamiltonian,
        channels=channels,
        generator=lindblad.compose(parts()),
        observables=observables,
        number_ops=number_ops,
        quantum_energies=quantum_energies,
        lab_hamiltonian=lab_h,
    )


def _recoil_nodes(nodes: int):
    """Trapezoid nodes and weights for the dipole pattern Pi(u) = 3(1+u^2)/8."""
    u = np.linspace(-1.0, 1.0, nodes)
    h = u[1] - u[0]
    w = np.full(nodes, h)
    w[0] *= 0.5
    w[-1] *= 0.5
    return u, w * (3.0 * (1.0 + u * u) / 8.0)


def _recoil_channel(space, label_phonon, label_atom, eta, gamma_sp, nbar_sigma,
                    nodes) -> list[DissipatorTerm]:
    """Spontaneous emission with photon-recoil kicks on the trapped motion.

    Trapezoidal quadrature of the dipole emission pattern
    Pi(u) = 3(1 + u^2)/8 over u in [-1, 1]; each node contributes a jump
    exp(i eta u (a + a^dag)) sigma^-, plus the absorption line when the
    electronic mode is thermally occupied.
    """
    sm = hilbert.sigma_minus(space, label_atom)
    u, pw = _recoil_nodes(nodes)
    terms = []
    for ui, wi in zip(u, pw):
        kick = hilbert.position_exponential(space, label_phonon, eta * ui)
        terms.append(DissipatorTerm(rate=wi * gamma_sp * (1.0 + nbar_sigma),
                                    jump=kick @ sm))
        if nbar_sigma > 0:
            anti = hilbert.position_exponential(space, label_phonon, -eta * ui)
            terms.append(DissipatorTerm(rate=wi * gamma_sp * nbar_sigma,
                                        jump=anti @ sm.adjoint()))
    return terms


def _recoil_superoperator(space, label_phonon, label_atom, eta, gamma_sp,
                          nbar_sigma, nodes) -> Superoperator:
    """Node-fused superoperator for the recoil channel.

    Equal (up to roundoff) to summing one dissipator per quadrature node,
    but far cheaper: each jump factorizes as K_u on the phonon times a fixed
    operator on the rest, so the node sum only couples the two phonon
    indices of the superoperator.  It is contracted once in a dense
    phonon-pair block and embedded by an index permutation; the
    anticommutator halves are node-independent because the kicks are
    unitary.
    """
    ip = space.factor_index(label_phonon)
    d = space.factor(label_phonon).dim
    if space.factor(label_phonon).kind != hilbert.BOSON:
        raise ValueError(f"subsystem {label_phonon!r} is not a bosonic mode")
    u, pw = _recoil_nodes(nodes)

    # kicks in one batch via the position eigenbasis
    ladder = np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)
    xi, v = np.linalg.eigh(ladder + ladder.T)
    phases = np.exp(1j * eta * np.outer(u, xi))  # (nodes, d)
    kicks = np.einsum("ab,ub,cb->uac", v, phases, v)

    # permutation between [all factors conj-copy, all factors system-copy]
    # and the phonon-pair-first ordering used for the fused block
    m = len(space.factors)
    dims = [f.dim for f in space.factors]
    n = space.dim * space.dim
    axes = [ip, m + ip] + [q for q in range(m) if q != ip] \
        + [m + q for q in range(m) if q != ip]
    to_old = np.arange(n).reshape(dims + dims).transpose(axes).ravel()
    perm = sp.csr_matrix(
        (np.ones(n), (to_old, np.arange(n))), shape=(n, n), dtype=complex
    )

    def rest_block(block2):
        mats = []
        for q, f in enumerate(space.factors):
            if q == ip:
                continue
            mats.append(block2 if q == space.factor_index(label_atom)
                        else np.eye(f.dim))
        out = sp.csc_matrix(np.array([[1.0]]))
        for mat in mats:
            out = sp.kron(out, sp.csc_matrix(mat), format="csc")
        return out

    sm2 = np.array([[0.0, 1.0], [0.0, 0.0]])  # |down><up| block
    total = sp.csc_matrix((n, n), dtype=complex)
    lines = [(gamma_sp * (1.0 + nbar_sigma), kicks, sm2)]
    if nbar_sigma > 0:
        lines.append((gamma_sp * nbar_sigma, kicks.conj(), sm2.T))
    for rate, kick_set, atom2 in lines:
        rates = rate * pw
        s_aa = np.einsum("u,uij,ukl->ikjl", rates, kick_set.conj(), kick_set)
        s_aa = s_aa.reshape(d * d, d * d)
        # drop pure-roundoff entries from the eigenbasis round trip, which
        # would otherwise densify the eta -> 0 limit
        s_aa[np.abs(s_aa) < 1e-15 * np.abs(s_aa).max()] = 0.0
        s_aa = sp.csc_matrix(s_aa)
        rest = rest_block(atom2)
        sandwich_perm = sp.kron(s_aa, sp.kron(rest.conj(), rest, format="csc"),
                                format="csc")
        sandwich = (perm @ sandwich_perm @ perm.T).tocsc()
        # unitary kicks: L^dag L is node-independent, so the anticommutator
        # carries the total quadrature weight only
        atom_l = space.lift(label_atom, atom2).matrix
        ldl = float(np.sum(rates)) * (atom_l.conj().T @ atom_l).tocsc()
        eye = sp.identity(space.dim, format="csc")
        total = total + sandwich \
            - 0.5 * sp.kron(eye, ldl, format="csc") \
            - 0.5 * sp.kron(ldl.T, eye, format="csc")
    return Superoperator(space, total)


def _phonon_channel(space, label, lam, nbar_inv) -> list[DissipatorTerm]:
    """Intrinsic trap heating: lambda(1 + 1/nbar) D[a] + lambda D[a^dag]."""
    a = hilbert.annihilation(space, label)
    return [
        DissipatorTerm(rate=lam * (1.0 + nbar_inv), jump=a),
        DissipatorTerm(rate=lam, jump=a.adjoint()),
    ]


def build_single_cavity(params: SingleCavityParams) -> ModelBuild:
    """Single-cavity refrigerator generator on [phonon, photon, atom]."""
    space = CompositeSpace([
        hilbert.boson("a", params.d_phonon),
        hilbert.boson("b", params.d_photon),
        hilbert.two_level("s"),
    ])
    a = hilbert.annihilation(space, "a")
    b = hilbert.annihilation(space, "b")
    sm = hilbert.sigma_minus(space, "s")
    n_a = hilbert.number_operator(space, "a")
    n_b = hilbert.number_operator(space, "b")
    p_up = hilbert.excited_projector(space, "s")

    h_free = params.nu * n_a + params.nu * p_up

    carrier = b @ sm.adjoint() + b.adjoint() @ sm  # b sigma+ + b^dag sigma-
    if params.tier == SingleCavityTier.LDA_RWA:
        v = (params.g * params.eta) * ((a + a.adjoint()) @ carrier)
    elif params.tier == SingleCavityTier.THREE_BODY:
        v = (params.g * params.eta) * (
            a @ b @ sm.adjoint() + a.adjoint() @ b.adjoint() @ sm
        )
    elif params.tier == SingleCavityTier.FULL_SINE:
        if params.eta == 0:
            warnings.warn("full-sine tier with eta = 0: interaction vanishes",
                          stacklevel=2)
        plus = hilbert.position_exponential(space, "a", params.eta)
        minus = hilbert.position_exponential(space, "a", -params.eta)
        sine = (-0.5j) * (plus - minus)
        v = params.g * (sine @ carrier)
    else:
        raise ValueError(f"unknown tier {params.tier}")

    channels = {
        "a": _phonon_channel(space, "a", params.lam, params.nbar_a_inv),
        "b": [
            DissipatorTerm(rate=2.0 * params.kappa * (1.0 + params.nbar_b), jump=b),
            DissipatorTerm(rate=2.0 * params.kappa * params.nbar_b, jump=b.adjoint()),
        ],
        "sigma": _recoil_channel(space, "a", "s", params.eta, params.gamma_sp,
                                 params.nbar_sigma, params.quadrature_points),
    }
    fused = {"sigma": _recoil_superoperator(space, "a", "s", params.eta,
                                            params.gamma_sp, params.nbar_sigma,
                                            params.quadrature_points)}
    observables = {"n_a": n_a, "n_b": n_b, "p_up": p_up}
    number_ops = {"a": n_a, "b": n_b, "sigma": p_up}
    quantum_energies = {"a": params.nu, "b": params.omega, "sigma": params.epsilon}
    return _assemble(space, params, h_free + v, channels, observables, number_ops,
                     quantum_energies, fused=fused)


def _crossed_channels(space, params: CrossedCavityParams) -> dict:
    b = hilbert.annihilation(space, "b")
    c = hilbert.annihilation(space, "c")
    return {
        "a": _phonon_channel(space, "a", params.lam, params.phonon_nbar_inv),
        "b": [
            # one-sided thermal driving: hot port plus vacuum port
            DissipatorTerm(rate=params.kappa_b * (2.0 + params.nbar_b), jump=b),
            DissipatorTerm(rate=params.kappa_b * params.nbar_b, jump=b.adjoint()),
        ],
        "c": [
            DissipatorTerm(rate=2.0 * params.kappa_c * (1.0 + params.nbar_c), jump=c),
            DissipatorTerm(rate=2.0 * params.kappa_c * params.nbar_c,
                           jump=c.adjoint()),
        ],
    }


def build_crossed_full(params: CrossedCavityParams) -> ModelBuild:
    """Crossed-cavity generator retaining the electronic state.

    Space is [phonon x, photon b, photon c, atom]; the y motion decouples at
    this order and is omitted.
    """
    if params.tier != CrossedTier.FULL_WITH_ATOM:
        raise ValueError("build_crossed_full requires the full_with_atom tier")
    space = CompositeSpace([
        hilbert.boson("a", params.d_phonon),
        hilbert.boson("b", params.d_photon_b),
        hilbert.boson("c", params.d_photon_c),
        hilbert.two_level("s"),
    ])
    a = hilbert.annihilation(space, "a")
    b = hilbert.annihilation(space, "b")
    c = hilbert.annihilation(space, "c")
    sm = hilbert.sigma_minus(space, "s")
    n_a = hilbert.number_operator(space, "a")
    n_b = hilbert.number_operator(space, "b")
    n_c = hilbert.number_operator(space, "c")
    p_up = hilbert.excited_projector(space, "s")

    h_free = params.nu * n_a - params.nu * n_b - params.Delta * p_up

    b_flip = b @ sm.adjoint() + b.adjoint() @ sm
    c_flip = c @ sm.adjoint() + c.adjoint() @ sm
    v = (
        (params.gtilde_b * params.eta) * ((a + a.adjoint()) @ b_flip)
        + params.h_b * b_flip
        + params.gtilde_c * c_flip
    )

    channels = _crossed_channels(space, params)
    channels["sigma"] = _recoil_channel(space, "a", "s", params.eta,
                                        params.gamma_sp, 0.0,
                                        params.quadrature_points)
    fused = {"sigma": _recoil_superoperator(space, "a", "s", params.eta,
                                            params.gamma_sp, 0.0,
                                            params.quadrature_points)}
    observables = {"n_a": n_a, "n_b": n_b, "n_c": n_c, "p_up": p_up}
    number_ops = {"a": n_a, "b": n_b, "c": n_c, "sigma": p_up}
    quantum_energies = {"a": params.nu, "b": params.omega_b, "c": params.omega_c,
                        "sigma": params.epsilon}
    return _assemble(space, params, h_free + v, channels, observables, number_ops,
                     quantum_energies, fused=fused)


def build_crossed_effective(params: CrossedCavityParams) -> ModelBuild:
    """Crossed-cavity generator with the excited electronic state eliminated.

    The three jump channels and every Lamb-shift coefficient follow from the
    electronic correlation spectrum evaluated at the channel's lab-frame
    frequency: the collective channel at detuning Delta, the
    phonon-raising channel at Delta - 2 nu and the misalignment channel at
    Delta - nu.
    """
    if params.tier not in (CrossedTier.EFFECTIVE_FULL,
                           CrossedTier.EFFECTIVE_LARGE_DELTA):
        raise ValueError("build_crossed_effective requires an effective tier")
    space = CompositeSpace([
        hilbert.boson("a", params.d_phonon),
        hilbert.boson("b", params.d_photon_b),
        hilbert.boson("c", params.d_photon_c),
    ])
    a = hilbert.annihilation(space, "a")
    b = hilbert.annihilation(space, "b")
    c = hilbert.annihilation(space, "c")
    n_a = hilbert.number_operator(space, "a")
    n_b = hilbert.number_operator(space, "b")
    n_c = hilbert.number_operator(space, "c")

    gbe = params.gtilde_b * params.eta
    channels = _crossed_channels(space, params)

    if params.tier == CrossedTier.EFFECTIVE_FULL:
        jumps = [
            (gbe * (a @ b) + params.gtilde_c * c, params.Delta),
            (gbe * (a.adjoint() @ b), params.Delta - 2.0 * params.nu),
            (params.h_b * b, params.Delta - params.nu),
        ]
        h_shift = hilbert.zero(space)
        se_terms = []
        for jump, detuning in jumps:
            if jump.norm() == 0:
                continue
            shift = analytics.lorentzian_shift(detuning, params.gamma_sp)
            rate = analytics.lorentzian_rate(detuning, params.gamma_sp)
            h_shift = h_shift + shift * (jump.adjoint() @ jump)
            se_terms.append(DissipatorTerm(rate=rate, jump=jump))
        hamiltonian = h_shift
        channels["se"] = se_terms
    else:
        if params.Delta == 0:
            raise ValueError("large-detuning tier undefined at Delta = 0")
        _, k = analytics.effective_coupling(params)
        delta_h = (params.gtilde_c**2 / params.Delta) * n_c
        v_eff = k * (a @ b @ c.adjoint() + a.adjoint() @ b.adjoint() @ c)
        hamiltonian = delta_h + v_eff
        collective = gbe * (a @ b) + params.gtilde_c * c
        channels["se"] = [
            DissipatorTerm(rate=params.gamma_sp / params.Delta**2, jump=collective)
        ]

    observables = {"n_a": n_a, "n_b": n_b, "n_c": n_c}
    number_ops = {"a": n_a, "b": n_b, "c": n_c}
    quantum_energies = {"a": params.nu, "b": params.omega_b, "c": params.omega_c,
                        "se": params.omega_c}
    return _assemble(space, params, hamiltonian, channels, observables, number_ops,
                     quantum_energies)


@dataclass(frozen=True)
class RegimeCondition:
    name: str
    ratio: float
    passed: bool


@dataclass(frozen=True)
class RegimeReport:
    conditions: tuple[RegimeCondition, ...]
    threshold: float

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.conditions)

    def ratios(self) -> dict[str, float]:
        return {c.name: c.ratio for c in self.conditions}


def regime_diagnostics(params: CrossedCavityParams,
                       threshold: float = 0.1) -> RegimeReport:
    """Validity ratios for the adiabatic elimination and sideband resolution.

    Each condition reports its worst dimensionless ratio; it passes when the
    ratio does not exceed `threshold`.  Zero couplings are skipped in the
    recoil condition (a channel that is absent imposes no constraint).
    """
    gbe = params.gtilde_b * params.eta
    couplings = [gbe, params.h_b, params.gtilde_c]
    delta = abs(params.Delta)

    # largest Lamb-shift coefficient of the exact effective Hamiltonian
    sh = analytics.lorentzian_shift
    coeff_ab = gbe**2 * (sh(params.Delta, params.gamma_sp)
                         + sh(params.Delta - 2 * params.nu, params.gamma_sp))
    coeff_b = (gbe**2 * sh(params.Delta - 2 * params.nu, params.gamma_sp)
               + params.h_b**2 * sh(params.Delta - params.nu, params.gamma_sp))
    coeff_c = params.gtilde_c**2 * sh(params.Delta, params.gamma_sp)
    delta_e = max(abs(coeff_ab), abs(coeff_b), abs(coeff_c))

    _, k = analytics.effective_coupling(params)
    slow = [abs(k), params.kappa_b, params.kappa_c, delta_e]

    r1 = max(couplings) / delta if delta > 0 else math.inf
    nonzero = [cc for cc in couplings if cc > 0]
    recoil = params.eta**2 * params.gamma_sp
    r2 = (recoil / min(nonzero)) if nonzero else (math.inf if recoil > 0 else 0.0)
    r3 = max(slow) / params.gamma_sp if params.gamma_sp > 0 else math.inf
    r4 = max(slow) / params.nu

    conds = (
        RegimeCondition("excited_state_population", r1, r1 <= threshold),
        RegimeCondition("recoil_negligible", r2, r2 <= threshold),
        RegimeCondition("born_markov", r3, r3 <= threshold),
        RegimeCondition("sideband_resolved", r4, r4 <= threshold),
    )
    return RegimeReport(conditions=conds, threshold=threshold)
