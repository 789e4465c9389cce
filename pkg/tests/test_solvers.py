import math

import numpy as np
import pytest

from qarsim import hilbert, lindblad, models, solvers


def damped_mode(dim=12, kappa=0.5, nbar=0.4, nu=1.0):
    """Single thermal cavity: nu a^dag a, 2k(1+n)D[a] + 2k n D[a^dag]."""
    space = hilbert.CompositeSpace([hilbert.boson("a", dim)])
    a = hilbert.annihilation(space, "a")
    h = nu * hilbert.number_operator(space, "a")
    gen = lindblad.compose([
        lindblad.hamiltonian_superoperator(h),
        lindblad.dissipator_superoperator(
            lindblad.DissipatorTerm(rate=2 * kappa * (1 + nbar), jump=a)),
        lindblad.dissipator_superoperator(
            lindblad.DissipatorTerm(rate=2 * kappa * nbar, jump=a.adjoint())),
    ])
    return space, gen


def mid_size_model():
    """A coupled model big enough to exercise all three backends."""
    p = models.SingleCavityParams(
        nu=1.0, epsilon=2.0, g=0.6, eta=0.05, lam=0.02, kappa=0.4,
        nbar_b=0.3, gamma_sp=1.0, d_phonon=6, d_photon=4,
        tier=models.SingleCavityTier.LDA_RWA, quadrature_points=21,
        units=models.NATURAL)
    return models.build_single_cavity(p)


class TestSteadyState:
    def test_damped_atom_reaches_ground(self):
        space = hilbert.CompositeSpace([hilbert.two_level("s")])
        gen = lindblad.compose([
            lindblad.hamiltonian_superoperator(
                hilbert.excited_projector(space, "s")),
            lindblad.dissipator_superoperator(lindblad.DissipatorTerm(
                rate=1.0, jump=hilbert.sigma_minus(space, "s"))),
        ])
        r = solvers.steady_state(gen)
        assert r.method == "dense"
        assert np.allclose(r.rho, np.diag([1.0, 0.0]), atol=1e-12)

    def test_thermal_detailed_balance(self):
        nbar = 0.4
        space, gen = damped_mode(dim=18, nbar=nbar)
        r = solvers.steady_state(gen)
        pops = np.real(np.diag(r.rho))
        ratio = nbar / (1.0 + nbar)
        for n in range(6):
            assert pops[n + 1] / pops[n] == pytest.approx(ratio, rel=1e-8)
        n_op = hilbert.number_operator(space, "a")
        assert r.expectation(n_op) == pytest.approx(nbar, rel=1e-8)

    def test_backends_agree(self):
        build = mid_size_model()
        n_op = build.observables["n_a"]
        results = {m: solvers.steady_state(build.generator, method=m)
                   for m in ("dense", "direct", "iterative")}
        values = {m: r.expectation(n_op) for m, r in results.items()}
        assert values["direct"] == pytest.approx(values["dense"], rel=1e-9)
        assert values["iterative"] == pytest.approx(values["dense"], rel=1e-7)
        assert results["iterative"].iterations > 0

    def test_auto_picks_dense_for_small_spaces(self):
        _, gen = damped_mode(dim=12)
        assert solvers.steady_state(gen).method == "dense"

    def test_residual_and_diagnostics_reported(self):
        build = mid_size_model()
        r = solvers.steady_state(build.generator)
        assert r.residual < 1e-10 * max(build.generator.norm(), 1.0)
        assert r.trace_defect < 1e-12
        assert r.min_eigenvalue > -solvers.NEGATIVE_EIGENVALUE_TOL
        assert r.hermiticity_defect < 1e-10

    def test_rejects_non_trace_preserving_generator(self):
        space = hilbert.CompositeSpace([hilbert.boson("a", 4)])
        a = hilbert.annihilation(space, "a")
        # decay term without its anticommutator half: not a Lindblad generator
        broken = lindblad.Superoperator(
            space, np.kron(a.toarray().conj(), a.toarray()))
        with pytest.raises(solvers.SteadyStateError, match="preserve trace"):
            solvers.steady_state(broken)

    def test_unknown_method_rejected(self):
        _, gen = damped_mode()
        with pytest.raises(ValueError):
            solvers.steady_state(gen, method="magic")


class TestEvolve:
    def test_unitary_oscillation(self):
        nu = 1.0
        space = hilbert.CompositeSpace([hilbert.boson("a", 6)])
        h = nu * hilbert.number_operator(space, "a")
        gen = lindblad.compose([lindblad.hamiltonian_superoperator(h)])
        psi = np.zeros(6, dtype=complex)
        psi[0] = psi[1] = 1.0 / math.sqrt(2.0)
        rho0 = np.outer(psi, psi.conj())
        x_op = hilbert.annihilation(space, "a") \
            + hilbert.annihilation(space, "a").adjoint()
        times = np.linspace(0.0, 4 * math.pi, 80)
        traj = solvers.evolve(gen, rho0, times, {"x": x_op})
        assert np.allclose(traj.expectations["x"], np.cos(nu * times), atol=1e-6)
        assert traj.trace_drift < 1e-8

    def test_intrinsic_heating_grows_linearly(self):
        # the balanced heating pair lam D[a] + lam D[a^dag] is a random walk
        # in Fock space: <n>(t) = lam * t exactly
        lam = 0.3
        space = hilbert.CompositeSpace([hilbert.boson("a", 30)])
        gen = lindblad.compose(
            lindblad.dissipator_superoperator(t)
            for t in models._phonon_channel(space, "a", lam, 0.0))
        rho0 = np.zeros((30, 30), dtype=complex)
        rho0[0, 0] = 1.0
        times = np.linspace(0.0, 2.0, 21)
        traj = solvers.evolve(gen, rho0, times,
                              {"n": hilbert.number_operator(space, "a")})
        assert np.allclose(traj.expectations["n"], lam * times, rtol=1e-5,
                           atol=1e-6)

    def test_relaxes_to_steady_state(self):
        space, gen = damped_mode(dim=10, kappa=0.5, nbar=0.2)
        steady = solvers.steady_state(gen)
        rho0 = np.zeros((10, 10), dtype=complex)
        rho0[3, 3] = 1.0
        times = np.linspace(0.0, 40.0, 9)
        traj = solvers.evolve(gen, rho0, times, keep_states=True)
        final = traj.final_state()
        assert np.max(np.abs(final - steady.rho)) < 1e-6

    def test_input_validation(self):
        space, gen = damped_mode(dim=4)
        rho0 = np.diag([1.0, 0, 0, 0]).astype(complex)
        with pytest.raises(ValueError, match="two sample times"):
            solvers.evolve(gen, rho0, [0.0])
        with pytest.raises(ValueError, match="increasing"):
            solvers.evolve(gen, rho0, [0.0, 2.0, 1.0])
        with pytest.raises(ValueError, match="trace"):
            solvers.evolve(gen, 0.5 * rho0, [0.0, 1.0])
        with pytest.raises(ValueError, match="shape"):
            solvers.evolve(gen, np.eye(3) / 3.0, [0.0, 1.0])

    def test_states_not_kept_by_default(self):
        space, gen = damped_mode(dim=4)
        rho0 = np.diag([1.0, 0, 0, 0]).astype(complex)
        traj = solvers.evolve(gen, rho0, [0.0, 1.0])
        with pytest.raises(ValueError):
            traj.final_state()


class TestExpectation:
    def test_matches_trace_formula(self):
        rng = np.random.default_rng(11)
        m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        rho = m @ m.conj().T
        rho /= np.trace(rho)
        space = hilbert.CompositeSpace([hilbert.boson("a", 5)])
        n_op = hilbert.number_operator(space, "a")
        assert solvers.expectation(rho, n_op) == pytest.approx(
            np.trace(n_op.toarray() @ rho).real)

    def test_linearity(self):
        space = hilbert.CompositeSpace([hilbert.boson("a", 4)])
        n_op = hilbert.number_operator(space, "a")
        rho1 = np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex)
        rho2 = np.diag([0.0, 0.0, 1.0, 0.0]).astype(complex)
        lhs = solvers.expectation(0.3 * rho1 + 0.7 * rho2, n_op)
        rhs = 0.3 * solvers.expectation(rho1, n_op) \
            + 0.7 * solvers.expectation(rho2, n_op)
        assert lhs == pytest.approx(rhs)

    def test_flags_nonhermitian_observable(self):
        space = hilbert.CompositeSpace([hilbert.boson("a", 4)])
        a = hilbert.annihilation(space, "a")
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = rho[1, 1] = 0.5
        rho[0, 1] = -0.5j
        rho[1, 0] = 0.5j
        with pytest.raises(ValueError, match="imaginary"):
            solvers.expectation(rho, a)


class TestCurrents:
    def test_dissipation_rate_matches_superoperator(self):
        build = models.build_crossed_effective(_crossed_params())
        r = solvers.steady_state(build.generator)
        w = build.observables["n_b"]
        for label, terms in build.channels.items():
            direct = solvers.dissipation_rate(r.rho, w, terms)
            sop = build.channel_superoperator(label)
            via_sop = np.trace(w.toarray() @ sop.apply(r.rho)).real
            assert direct == pytest.approx(via_sop, abs=1e-12 + 1e-9 * abs(via_sop))

    def test_first_law_closure(self):
        build = models.build_crossed_effective(_crossed_params())
        r = solvers.steady_state(build.generator)
        per_channel = [solvers.dissipation_rate(r.rho, build.hamiltonian, terms)
                       for terms in build.channels.values()]
        scale = max(abs(v) for v in per_channel)
        assert solvers.first_law_defect(build, r.rho) < 1e-8 * scale

    def test_quanta_currents_balance_per_mode(self):
        # stationarity: d<n_x>/dt = 0, so each mode's channel flows cancel
        # against the coherent (Hamiltonian) transfer; for the phonon the
        # only channels are its own bath and the collective jump
        build = models.build_crossed_effective(_crossed_params())
        r = solvers.steady_state(build.generator)
        n_a = build.number_ops["a"]
        total = sum(solvers.quanta_current(r.rho, n_a, terms)
                    for terms in build.channels.values())
        h_sop = lindblad.hamiltonian_superoperator(build.hamiltonian)
        coherent = np.trace(n_a.toarray() @ h_sop.apply(r.rho)).real
        assert total + coherent == pytest.approx(0.0, abs=1e-10)

    def test_stationary_currents_labels(self):
        build = models.build_crossed_effective(_crossed_params())
        r = solvers.steady_state(build.generator)
        currents = solvers.stationary_currents(build, r.rho)
        assert set(currents) == {"a", "b", "c", "se"}


def _crossed_params():
    return models.CrossedCavityParams(
        nu=1.0, epsilon=950.0, omega_c=1000.0, g_b=2.5, g_c=0.5, eta=0.04,
        delta_b=0.01, delta_c=0.0, kappa_b=0.01, kappa_c=0.01, lam=1e-4,
        gamma_sp=1.0, t_h=681.3, t_r=50.0, d_phonon=5, d_photon_b=3,
        d_photon_c=3, tier=models.CrossedTier.EFFECTIVE_LARGE_DELTA,
        units=models.NATURAL)
