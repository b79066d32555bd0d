"""Cross-module checks against the dense few-qubit simulator."""

import numpy as np
import pytest

from qpcool import (
    ModelParams,
    NoiseParams,
    build_k_matrix,
    bulk_rates,
    bulk_step,
    edge_rates,
    make_mcp,
    make_scp,
    noisy_rates,
    steady_state,
)
from qpcool import gaussian as G
from qpcool.errors import NonPositive, TooLarge
from qpcool.oracle import (
    DenseChannel,
    DenseModes,
    apply_noise_channel,
    build_floquet_unitary,
    chain_majoranas,
    ptrace,
)


class TestFloquetUnitary:
    def test_single_site_phase(self):
        par = ModelParams(0.0, 0.2, 1)
        u = build_floquet_unitary(par)
        expect = np.diag([np.exp(1j * np.pi * 0.1), np.exp(-1j * np.pi * 0.1)])
        assert np.allclose(u, expect, atol=1e-14)

    def test_two_site_xx_rotation(self):
        par = ModelParams(0.2, 0.0, 2)
        u = build_floquet_unitary(par)
        xx = np.zeros((4, 4))
        xx[0, 3] = xx[3, 0] = xx[1, 2] = xx[2, 1] = 1.0
        expect = np.cos(np.pi * 0.1) * np.eye(4) - 1j * np.sin(np.pi * 0.1) * xx
        assert np.allclose(u, expect, atol=1e-14)

    def test_size_cap(self):
        with pytest.raises(TooLarge):
            build_floquet_unitary(ModelParams(0.1, 0.2, 11))

    def test_heisenberg_map_equals_k_matrix(self):
        par = ModelParams(0.17, 0.23, 3)
        u = build_floquet_unitary(par)
        a = chain_majoranas(3)
        k = build_k_matrix(par)
        for i in range(6):
            lhs = u.conj().T @ a[i] @ u
            rhs = sum(k[i, j] * a[j] for j in range(6))
            assert np.max(np.abs(lhs - rhs)) < 1e-13

    def test_eigenphase_differences(self, spectra):
        # dense eigenphases of U_S differ by sums of single-mode quasienergies
        par = ModelParams(0.2, 0.1, 6)
        spec = spectra(0.2, 0.1, 6)
        dm = DenseModes(spec)
        u = build_floquet_unitary(par)
        vac_phase = np.angle(np.vdot(dm.vacuum, u @ dm.vacuum))
        for k in range(6):
            st = dm.state([k])
            ph = np.angle(np.vdot(st, u @ st))
            diff = (vac_phase - ph - spec.quasienergies[k] + np.pi) % (2 * np.pi) - np.pi
            assert abs(diff) < 1e-10


class TestDenseModes:
    def test_vacuum_annihilated(self, spectra):
        for (J, g) in ((0.1, 0.2), (0.2, 0.1)):
            dm = DenseModes(spectra(J, g, 6))
            assert max(np.linalg.norm(op @ dm.vacuum) for op in dm.eta) < 1e-12

    def test_eigenmode_relation(self, spectra):
        spec = spectra(0.2, 0.1, 5)
        u = build_floquet_unitary(spec.params)
        dm = DenseModes(spec)
        for k in range(5):
            lhs = u.conj().T @ dm.eta[k] @ u
            rhs = np.exp(-1j * spec.quasienergies[k]) * dm.eta[k]
            assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_gge_density_occupations(self, spectra, rng):
        spec = spectra(0.1, 0.2, 5)
        dm = DenseModes(spec)
        n = rng.uniform(0, 1, size=5)
        rho = dm.gge_density(n)
        assert abs(np.trace(rho) - 1.0) < 1e-12
        assert np.allclose(dm.occupations(rho), n, atol=1e-12)


class TestChannelBasics:
    def test_trace_preserved(self, spectra):
        par = ModelParams(0.2, 0.1, 3)
        ch = DenseChannel(par, make_mcp(6, 3.0), 0.1, layout="bulk")
        rho = np.eye(8, dtype=complex) / 8
        for _ in range(3):
            rho = ch.apply_cycle(rho)
            assert abs(np.trace(rho) - 1.0) < 1e-12

    def test_zero_coupling_is_unitary_conjugation(self, spectra):
        par = ModelParams(0.2, 0.1, 3)
        ch = DenseChannel(par, make_scp(4, 0.3), 0.0, layout="edge", edges="both")
        u = build_floquet_unitary(par)
        rng = np.random.default_rng(7)
        m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        rho = m @ m.conj().T
        rho /= np.trace(rho)
        out = ch.apply_cycle(rho)
        expect = np.linalg.matrix_power(u, 4) @ rho @ np.linalg.matrix_power(u, 4).conj().T
        assert np.max(np.abs(out - expect)) < 1e-12


class TestNoiseChannel:
    def test_identity_at_zero(self, rng):
        m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        rho = m @ m.conj().T
        rho /= np.trace(rho)
        out = apply_noise_channel(rho, NoiseParams(0.0, 0.0), [0, 1, 2], 3)
        assert np.array_equal(out, rho)

    def test_amplitude_damping_fixed_point(self):
        # repeated decay drives a single qubit to its ground state |0>
        rho = np.array([[0.2, 0.1], [0.1, 0.8]], dtype=complex)
        noise = NoiseParams(gamma_d=0.05, gamma_phi=0.0)
        for _ in range(600):
            rho = apply_noise_channel(rho, noise, [0], 1)
        assert abs(rho[0, 0] - 1.0) < 1e-3

    def test_positivity_guard(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        with pytest.raises(NonPositive):
            rho2 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
            # gamma far beyond the first-order regime
            apply_noise_channel(rho2 @ np.diag([1, 1]), NoiseParams(3.0, 0.0), [0], 1)


class TestGaussianEquivalence:
    @pytest.mark.parametrize("n,edges", [(2, "left"), (4, "both"), (5, "both")])
    def test_covariance_matches_dense_100_cycles(self, n, edges):
        par = ModelParams(0.2, 0.1, n) if n > 2 else ModelParams(0.1, 0.3, n)
        pulse = make_mcp(6, 3.0)
        theta = 0.1
        ch = DenseChannel(par, pulse, theta, layout="edge", edges=edges)
        lay = G.EdgeLayout(n, edges)
        kc = G.cycle_matrix(par, pulse, theta, edges)
        gamma = G.init_covariance(n, edges)
        rho = np.eye(2**n, dtype=complex) / 2**n
        worst = 0.0
        for _ in range(100):
            rho = ptrace(ch.cycle_rho_full(rho), ch.system_sites, ch.n_qubits)
            gamma = G.reset(kc @ gamma @ kc.T, lay)
            dense = ch.covariance(ch.embed_system(rho))
            worst = max(worst, float(np.max(np.abs(gamma - dense))))
        assert worst <= 1e-10

    def test_reset_equals_ptrace_retension(self):
        par = ModelParams(0.2, 0.1, 4)
        pulse = make_scp(4, 0.3)
        ch = DenseChannel(par, pulse, 0.2, layout="edge", edges="both")
        rho = np.eye(16, dtype=complex) / 16
        rho_full = ch.cycle_rho_full(rho)
        gamma_pre = ch.covariance(rho_full)
        lay = G.EdgeLayout(4, "both")
        gamma_reset = G.reset(gamma_pre, lay)
        rho_after = ptrace(rho_full, ch.system_sites, ch.n_qubits)
        dense_reset = ch.covariance(ch.embed_system(rho_after))
        s = lay.system_slice
        assert np.max(np.abs(gamma_reset[s, s] - dense_reset[s, s])) <= 1e-12


class TestWeakCouplingRates:
    def test_edge_rate_normalization(self, spectra):
        # one dense cycle from the maximally mixed state reproduces the
        # single-particle rates, Richardson-extrapolated in theta
        for (J, g) in ((0.1, 0.2), (0.2, 0.1)):
            par = ModelParams(J, g, 3)
            spec = spectra(J, g, 3)
            pulse = make_mcp(8, 4.0)
            dm = DenseModes(spec)
            rho = np.eye(8, dtype=complex) / 8
            n0 = dm.occupations(rho)
            scaled = {}
            for theta in (1e-3, 5e-4):
                ch = DenseChannel(par, pulse, theta, layout="edge", edges="both")
                dn = dm.occupations(ch.apply_cycle(rho)) - n0
                scaled[theta] = dn / theta**2
            extrap = (4 * scaled[5e-4] - scaled[1e-3]) / 3
            rates = edge_rates(spec, pulse, 1.0, edges=2)
            predict = -n0 * rates.w_minus + (1 - n0) * rates.w_plus
            assert np.max(np.abs(extrap - predict) / np.abs(predict)) < 0.01

    def test_bulk_pair_ordering_via_dephasing(self, spectra, tables):
        # the dephasing jump is quadratic, so one noisy cycle from the vacuum
        # pins the pair-sum convention with no truncation error
        gphi = 1e-6
        for (J, g) in ((0.1, 0.2), (0.2, 0.1)):
            par = ModelParams(J, g, 3)
            spec = spectra(J, g, 3)
            pulse = make_scp(4, 0.3)
            noise = NoiseParams(gamma_d=0.0, gamma_phi=gphi)
            ch = DenseChannel(par, pulse, 0.0, layout="bulk")
            dm = DenseModes(spec)
            vac = np.outer(dm.vacuum, dm.vacuum.conj())
            dn_dense = dm.occupations(ch.apply_cycle(vac, noise=noise)) \
                - dm.occupations(vac)
            table = tables(J, g, 3)
            rates = noisy_rates(bulk_rates(spec, pulse, 0.0, table), table,
                                noise, pulse.T)
            dn_kin = bulk_step(np.zeros(3), rates)
            free = [k for k in range(3) if k != spec.majorana_index]
            rel = np.max(np.abs(dn_dense[free] - dn_kin[free])
                         / np.abs(dn_dense[free]))
            assert rel < 1e-4

    def test_bulk_coupling_gain_from_vacuum(self, spectra, tables):
        # sigma-channel gain from the vacuum: matches up to the documented
        # >2-quasiparticle truncation of the kinetic equation
        par = ModelParams(0.1, 0.2, 3)
        spec = spectra(0.1, 0.2, 3)
        pulse = make_scp(4, 0.3)
        theta = 1e-3
        ch = DenseChannel(par, pulse, theta, layout="bulk")
        dm = DenseModes(spec)
        vac = np.outer(dm.vacuum, dm.vacuum.conj())
        dn_dense = dm.occupations(ch.apply_cycle(vac)) - dm.occupations(vac)
        rates = bulk_rates(spec, pulse, theta, tables(0.1, 0.2, 3))
        dn_kin = bulk_step(np.zeros(3), rates)
        # mode-summed gain within 10%; the remainder is 3-particle creation
        assert np.sum(dn_kin) == pytest.approx(np.sum(dn_dense), rel=0.10)

    def test_noisy_bulk_steady_state_few_percent(self, spectra, tables):
        # dense channel iterated to convergence vs noisy kinetics, N = 3
        par = ModelParams(0.1, 0.2, 3)
        spec = spectra(0.1, 0.2, 3)
        pulse = make_mcp(8, 4.0)
        theta = 0.05
        gamma = 0.1 * theta**2
        noise = NoiseParams(gamma_d=gamma, gamma_phi=gamma)
        ch = DenseChannel(par, pulse, theta, layout="bulk")
        dm = DenseModes(spec)
        rho = np.outer(dm.vacuum, dm.vacuum.conj())
        prev = dm.occupations(rho)
        for _ in range(6000):
            rho = ch.apply_cycle(rho, noise=noise)
            cur = dm.occupations(rho)
            if np.max(np.abs(cur - prev)) < 1e-12:
                break
            prev = cur
        table = tables(0.1, 0.2, 3)
        rates = noisy_rates(bulk_rates(spec, pulse, theta, table), table,
                            noise, pulse.T)
        n_kin = steady_state(rates).n
        assert np.max(np.abs(n_kin - cur) / cur) < 0.10
