"""Closed-form JC propagator, global evolution, and the Hamiltonian oracle."""

import math

import numpy as np
import pytest

from trijc.dynamics import (
    TruncationError,
    evolve,
    global_unitary,
    jc_unitary,
    oracle_evolve,
    pair_excitation_expectations,
    reduce,
    unitarity_defect,
)
from trijc.states import INV_SQRT2, JCConfig, assemble_initial, qubit_superposition, werner_pair
from trijc.tensor import (
    DensityMatrix,
    MultipartiteShape,
    dag,
    ket,
    kron,
    partial_trace,
    projector,
    shape_of,
)

RNG = np.random.default_rng(77)

FULL_SHAPE = MultipartiteShape(
    (("A", 2), ("B", 2), ("C", 2), ("X", 3), ("Y", 3), ("Z", 3))
)


def basis_state(occupations, fock_dim=3):
    """Product basis state of the full six-party system."""
    dims = (2, 2, 2, fock_dim, fock_dim, fock_dim)
    vec = None
    for occ, d in zip(occupations, dims):
        v = ket(occ, d)
        vec = v if vec is None else np.kron(vec, v)
    return DensityMatrix(projector(vec), FULL_SHAPE)


class TestJcUnitary:
    def test_identity_at_zero(self):
        u = jc_unitary(0.0, 3)
        np.testing.assert_allclose(u.matrix, np.eye(6), atol=0)

    def test_unitary_everywhere(self):
        for gt in (0.3, 1.1, 2.9, 10.0):
            assert unitarity_defect(jc_unitary(gt, 4)) <= 1e-12

    def test_full_swap_phase(self):
        # |1,0> -> -i |0,1> at gt = pi/2
        u = jc_unitary(math.pi / 2, 3).matrix
        col = u[:, 3]  # index 3 = atom 1, photon 0
        expected = np.zeros(6, dtype=complex)
        expected[1] = -1j  # atom 0, photon 1
        np.testing.assert_allclose(col, expected, atol=1e-15)

    def test_excited_population_rabi(self):
        for gt in np.linspace(0.0, 2 * math.pi, 25):
            u = jc_unitary(gt, 3).matrix
            assert abs(u[3, 3]) ** 2 == pytest.approx(math.cos(gt) ** 2, abs=1e-14)

    def test_two_photon_sector_frequency(self):
        # |0,2> population returns as cos^2(gt sqrt(2))
        for gt in (0.4, math.pi / math.sqrt(2.0), 2.2):
            u = jc_unitary(gt, 3).matrix
            assert abs(u[2, 2]) ** 2 == pytest.approx(
                math.cos(gt * math.sqrt(2.0)) ** 2, abs=1e-14
            )

    def test_block_diagonal_in_excitation_number(self):
        u = jc_unitary(0.9, 4).matrix
        f = 4
        for row in range(2 * f):
            for col in range(2 * f):
                n_row = row // f + row % f
                n_col = col // f + col % f
                if n_row != n_col:
                    assert u[row, col] == 0.0

    def test_one_parameter_group(self):
        u1 = jc_unitary(0.7, 3).matrix
        u2 = jc_unitary(1.9, 3).matrix
        u12 = jc_unitary(2.6, 3).matrix
        np.testing.assert_allclose(u1 @ u2, u12, atol=1e-10)

    def test_top_state_identity_and_flagged(self):
        u = jc_unitary(1.3, 3)
        top = u.top_state_index
        assert top == 5
        col = u.matrix[:, top]
        expected = np.zeros(6)
        expected[top] = 1.0
        np.testing.assert_allclose(col, expected, atol=0)

    def test_small_fock_dim_rejected(self):
        with pytest.raises(ValueError, match="fock_dim"):
            jc_unitary(1.0, 1)


class TestGlobalUnitary:
    def test_identity_at_zero(self):
        u = global_unitary(0.0, 3)
        np.testing.assert_allclose(u, np.eye(216), atol=0)

    def test_pairing_orientation(self):
        # an excitation placed on atom A must oscillate into cavity X only
        rho0 = basis_state((1, 0, 0, 0, 0, 0))
        rt = evolve(rho0, 0.8)
        n_x = np.real(
            np.trace(partial_trace(rt, ("X",)).matrix @ np.diag([0.0, 1.0, 2.0]))
        )
        n_y = np.real(
            np.trace(partial_trace(rt, ("Y",)).matrix @ np.diag([0.0, 1.0, 2.0]))
        )
        assert n_x == pytest.approx(math.sin(0.8) ** 2, abs=1e-12)
        assert n_y == pytest.approx(0.0, abs=1e-15)

    def test_product_factorization(self):
        # a product of single-pair states stays a product across pairs
        gt = 1.21
        rho0 = assemble_initial(JCConfig(alpha=0.0, gamma=0.0, beta=0.4, kappa=0.8))
        rt = evolve(rho0, gt)
        ax = partial_trace(rt, ("A", "X")).matrix
        by = partial_trace(rt, ("B", "Y")).matrix
        cz = partial_trace(rt, ("C", "Z")).matrix
        rebuilt = kron(kron(ax, by), cz)
        pair_order = MultipartiteShape(
            (("A", 2), ("X", 3), ("B", 2), ("Y", 3), ("C", 2), ("Z", 3))
        )
        from trijc.tensor import permute_subsystems

        rebuilt = permute_subsystems(rebuilt, pair_order, ("A", "B", "C", "X", "Y", "Z"))
        np.testing.assert_allclose(rebuilt, rt.matrix, atol=1e-13)


class TestEvolve:
    def test_zero_time_is_identity(self):
        rho0 = assemble_initial(JCConfig())
        rt = evolve(rho0, 0.0)
        np.testing.assert_allclose(rt.matrix, rho0.matrix, atol=0)

    def test_spectrum_preserved(self):
        rho0 = assemble_initial(JCConfig())
        rt = evolve(rho0, 1.7)
        w0 = np.linalg.eigvalsh(rho0.matrix)
        wt = np.linalg.eigvalsh(rt.matrix)
        np.testing.assert_allclose(wt, w0, atol=1e-10)

    def test_excitation_conserved(self):
        rho0 = assemble_initial(JCConfig(alpha=1.0, gamma=1.0, beta=1.0, kappa=1.0))
        n0 = pair_excitation_expectations(rho0)
        for gt in np.linspace(0.0, 2 * math.pi, 9):
            nt = pair_excitation_expectations(evolve(rho0, gt))
            for pair in n0:
                assert abs(nt[pair] - n0[pair]) <= 1e-10

    def test_truncation_guard(self):
        # atom A excited with two photons in X occupies the unreachable sector
        rho0 = basis_state((1, 0, 0, 2, 0, 0))
        with pytest.raises(TruncationError, match="unreachable"):
            evolve(rho0, 0.5)
        with pytest.raises(TruncationError):
            oracle_evolve(rho0, 0.5)

    def test_requires_full_shape(self):
        with pytest.raises(ValueError, match="six-party"):
            evolve(werner_pair(0.5, 2), 1.0)


class TestOracleAgreement:
    def test_matches_closed_form_on_seeded_configs(self):
        rng = np.random.default_rng(123)
        for _ in range(10):
            cfg = JCConfig(
                alpha=rng.uniform(0, 1),
                gamma=rng.uniform(0, 1),
                beta=rng.uniform(0, 1),
                kappa=rng.uniform(0, 1),
            )
            gt = rng.uniform(0.0, 2 * math.pi)
            rho0 = assemble_initial(cfg)
            a = evolve(rho0, gt)
            b = oracle_evolve(rho0, gt)
            assert np.linalg.norm(a.matrix - b.matrix) <= 1e-10

    def test_single_pair_rabi_population(self):
        # atom C excited, everything else empty: P(excited) = cos^2(gt)
        rho0 = basis_state((0, 0, 1, 0, 0, 0))
        for gt in np.linspace(0.0, 2 * math.pi, 100):
            rt = oracle_evolve(rho0, gt)
            pop = np.real(partial_trace(rt, ("C",)).matrix[1, 1])
            assert pop == pytest.approx(math.cos(gt) ** 2, abs=1e-12)


class TestReduce:
    def test_initial_reduction_is_product(self):
        cfg = JCConfig(alpha=0.9, beta=0.6)
        rho0 = assemble_initial(cfg)
        abc = reduce(rho0, ("A", "B", "C"))
        expected = kron(werner_pair(0.9, 2).matrix, qubit_superposition(0.6).matrix)
        np.testing.assert_allclose(abc.matrix, expected, atol=1e-14)

    def test_pair_reduction_unit_trace(self):
        rho0 = assemble_initial(JCConfig())
        bc = reduce(evolve(rho0, 1.0), ("B", "C"))
        assert bc.shape.labels == ("B", "C")
        assert abs(np.trace(bc.matrix) - 1.0) < 1e-12

    def test_classical_case_ac_coherences_analytic(self):
        """alpha = gamma = 0 single-atom coherences against closed forms.

        With uncorrelated Werner mixtures the pairs evolve independently;
        diagonalising the few excitation sectors by hand gives
            |<0|rho_A|1>| = sin(gt) (1 - cos(sqrt(2) gt)) / 4
            |<0|rho_C|1>| = cos(gt) (1 + cos(sqrt(2) gt)) / 4
        at beta = kappa = 1/sqrt(2).
        """
        rho0 = assemble_initial(JCConfig(alpha=0.0, gamma=0.0))
        for gt in (0.3, 0.7, 1.9, 2.6):
            rt = evolve(rho0, gt)
            a01 = abs(partial_trace(rt, ("A",)).matrix[0, 1])
            c01 = abs(partial_trace(rt, ("C",)).matrix[0, 1])
            root2 = math.sqrt(2.0)
            assert a01 == pytest.approx(
                abs(math.sin(gt)) * (1 - math.cos(root2 * gt)) / 4, abs=1e-12
            )
            assert c01 == pytest.approx(
                abs(math.cos(gt)) * (1 + math.cos(root2 * gt)) / 4, abs=1e-12
            )

    def test_classical_case_ac_off_diagonals_nonzero(self):
        rho0 = assemble_initial(JCConfig(alpha=0.0, gamma=0.0))
        ac = reduce(evolve(rho0, 0.7), ("A", "C"))
        m = ac.matrix
        for i in range(4):
            for j in range(i + 1, 4):
                assert abs(m[i, j]) > 1e-6
