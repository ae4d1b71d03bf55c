"""This is the test module for the solver module."""

import math
import unittest

import numpy as np

from fracschrod.analysis import ring_analytic_energy
from fracschrod.errors import DegenerateError, NoConvergenceError, NormalizationError, SchemeError, SolverError
from fracschrod.grid import WaveField, make_grid
from fracschrod.potentials import double_well, harmonic, ring
from fracschrod.solver import (
    Parity,
    SolveConfig,
    deflate,
    energy_decay_rate,
    imaginary_time_solve,
    initial_state,
    project_parity,
    rayleigh_energy,
    real_time_propagate,
    solve_spectrum,
)
from fracschrod.splitting import scheme_lie, scheme_sixth, scheme_strang


class TestProjections(unittest.TestCase):
    """
    Test case for initial states, parity projection and deflation.
    """

    def setUp(self):
        self.grid = make_grid(128, -4.0, 4.0)

    def test_initial_state_is_deterministic(self):
        """Equal seeds give equal states, different seeds different ones."""
        first = initial_state(self.grid, Parity.NONE, 7)
        second = initial_state(self.grid, Parity.NONE, 7)
        other = initial_state(self.grid, Parity.NONE, 8)
        np.testing.assert_array_equal(first.values, second.values)
        self.assertGreater(np.max(np.abs(first.values - other.values)), 1e-3)
        self.assertAlmostEqual(first.norm(), 1.0, places=12)

    def test_initial_state_parity(self):
        """An odd start is odd."""
        psi = initial_state(self.grid, Parity.ODD, 3)
        np.testing.assert_allclose(psi.reflect().values, -psi.values, atol=1e-14)

    def test_projection_is_idempotent(self):
        """Projecting twice changes nothing."""
        psi = initial_state(self.grid, Parity.NONE, 1)
        once = project_parity(psi, Parity.EVEN)
        twice = project_parity(once, Parity.EVEN)
        self.assertLess(np.max(np.abs(once.values - twice.values)), 1e-14)

    def test_projection_of_opposite_parity(self):
        """An even function has no odd part."""
        psi = WaveField(self.grid, np.exp(-self.grid.x**2))
        with self.assertRaises(DegenerateError):
            project_parity(psi, Parity.ODD)

    def test_deflation(self):
        """The deflated state is normalized and orthogonal to the basis."""
        gaussian = WaveField(self.grid, np.exp(-self.grid.x**2)).normalized()
        shifted = WaveField(self.grid, np.exp(-((self.grid.x - 0.5) ** 2)))
        result = deflate(shifted, [gaussian])
        self.assertLess(abs(gaussian.inner(result)), 1e-12)
        self.assertAlmostEqual(result.norm(), 1.0, places=12)

    def test_deflation_of_basis_member(self):
        """A state inside the basis span cannot be deflated."""
        gaussian = WaveField(self.grid, np.exp(-self.grid.x**2)).normalized()
        with self.assertRaises(DegenerateError):
            deflate(gaussian, [gaussian])


class TestEstimators(unittest.TestCase):
    """
    Test case for the energy estimators.
    """

    def test_decay_rate(self):
        """-ln(ratio) / dt."""
        self.assertAlmostEqual(energy_decay_rate(math.exp(-0.005), 0.01), 0.5, places=12)
        self.assertEqual(energy_decay_rate(1.0, 0.01), 0.0)
        with self.assertRaises(SolverError):
            energy_decay_rate(0.0, 0.01)
        with self.assertRaises(SolverError):
            energy_decay_rate(0.5, 0.0)

    def test_rayleigh_of_exact_ground_state(self):
        """The harmonic Gaussian has energy 1/2."""
        grid = make_grid(256, -10.0, 10.0)
        psi = WaveField(grid, np.exp(-0.5 * grid.x**2)).normalized()
        self.assertAlmostEqual(rayleigh_energy(psi, harmonic(), 2.0), 0.5, places=10)

    def test_rayleigh_needs_normalized_state(self):
        """An unnormalized state is rejected."""
        grid = make_grid(64, -1.0, 1.0)
        with self.assertRaises(NormalizationError):
            rayleigh_energy(WaveField(grid, np.ones(64)), ring(), 2.0)


class TestSolveConfig(unittest.TestCase):
    """
    Test case for SolveConfig validation.
    """

    def test_invalid_values(self):
        """alpha, dt and the refinement step are validated."""
        with self.assertRaises(SolverError):
            SolveConfig(alpha=0.0)
        with self.assertRaises(SolverError):
            SolveConfig(alpha=2.0, dt=-0.01)

    def test_basis_must_be_orthonormal(self):
        """A non-orthonormal deflation basis is rejected."""
        grid = make_grid(64, -1.0, 1.0)
        state = WaveField(grid, np.ones(64))
        with self.assertRaises(SolverError):
            SolveConfig(alpha=2.0, deflation_basis=(state,))


class TestRing(unittest.TestCase):
    """
    Test case for the particle on a ring, where every energy is known.
    """

    def setUp(self):
        self.grid = make_grid(480, -1.0, 1.0)

    def test_ring_energies(self):
        """States 0..10 match (pi ceil(n/2))^alpha / 2 for every tested order."""
        for alpha in (1.5, 1.8, 2.0, 2.2):
            solutions = solve_spectrum(SolveConfig(alpha), ring(), self.grid, scheme_sixth(), 11)
            for solution in solutions:
                expected = ring_analytic_energy(solution.index, alpha)
                error = abs(solution.energy - expected)
                self.assertLess(error, 1e-8 * max(expected, 1e-2), msg=f"alpha {alpha} n {solution.index}")

    def test_degenerate_pairs(self):
        """Members of a degenerate pair agree within 1e-9 and come even first."""
        solutions = solve_spectrum(SolveConfig(1.8), ring(), self.grid, scheme_sixth(), 5)
        for first, second in ((solutions[1], solutions[2]), (solutions[3], solutions[4])):
            self.assertLess(abs(first.energy - second.energy), 1e-9)
            self.assertIs(first.parity, Parity.EVEN)
            self.assertIs(second.parity, Parity.ODD)
        self.assertEqual([solution.index for solution in solutions], [0, 1, 2, 3, 4])


class TestHarmonic(unittest.TestCase):
    """
    Test case for the harmonic oscillator.
    """

    def setUp(self):
        self.grid = make_grid(2000, -10.0, 10.0)

    def test_integer_order_spectrum(self):
        """alpha = 2 gives 0.5, 1.5, ..., 4.5."""
        solutions = solve_spectrum(SolveConfig(2.0), harmonic(), self.grid, scheme_sixth(), 5)
        for n, solution in enumerate(solutions):
            self.assertLess(abs(solution.energy - (n + 0.5)), 1e-7, msg=f"n {n}")
            self.assertTrue(solution.accepted, msg=f"n {n}")

    def test_fractional_ground_energies(self):
        """Ground energies at alpha = 1.8 and 2.2."""
        for alpha, expected in ((1.8, 0.4994984133), (2.2, 0.5012687387)):
            config = SolveConfig(alpha, parity=Parity.EVEN)
            solution = imaginary_time_solve(config, harmonic(), self.grid, scheme_sixth())
            self.assertLess(abs(solution.energy - expected), 1e-3, msg=f"alpha {alpha}")

    def test_structural_invariants(self):
        """Orthonormality, residual, estimator agreement and symmetry of the spectrum."""
        solutions = solve_spectrum(SolveConfig(1.8), harmonic(), self.grid, scheme_sixth(), 4)
        basis = np.array([solution.psi.values for solution in solutions])
        gram = self.grid.dx * basis.conj() @ basis.T
        self.assertLess(np.max(np.abs(gram - np.eye(4))), 1e-8)
        for solution in solutions:
            self.assertLess(solution.residual, 1e-6)
            self.assertLess(solution.estimator_gap, 1e-6)
            self.assertTrue(np.all(solution.psi.values.imag == 0.0))
        energies = [solution.energy for solution in solutions]
        self.assertEqual(energies, sorted(energies))

    def test_variational_monotonicity(self):
        """The Rayleigh energy never increases along the imaginary-time path."""
        grid = make_grid(256, -8.0, 8.0)
        solution = imaginary_time_solve(SolveConfig(2.0, track_energy=True), harmonic(), grid, scheme_sixth())
        history = np.array(solution.energy_history)
        self.assertEqual(history.size, solution.iterations)
        self.assertTrue(np.all(np.diff(history) <= 1e-10))

    def test_error_carries_state_index(self):
        """A failing state reports its index."""
        with self.assertRaises(NoConvergenceError) as context:
            solve_spectrum(SolveConfig(2.0, max_iters=3), harmonic(), self.grid, scheme_sixth(), 2)
        self.assertEqual(context.exception.index, 0)
        self.assertIn("state 0", str(context.exception))

    def test_first_order_scheme_is_not_accepted(self):
        """Lie steps converge to a state whose residual misses the 1e-6 budget, which is an error."""
        config = SolveConfig(2.0, parity=Parity.EVEN)
        with self.assertRaises(NoConvergenceError) as context:
            imaginary_time_solve(config, harmonic(), make_grid(256, -8.0, 8.0), scheme_lie())
        self.assertEqual(context.exception.index, 0)
        self.assertIn("residual", str(context.exception))

    def test_boundary_flag(self):
        """The edge check passes on [-8, 8) and fails, with a warning, on [-5.5, 5.5)."""
        config = SolveConfig(2.0, parity=Parity.EVEN)
        wide = imaginary_time_solve(config, harmonic(), make_grid(256, -8.0, 8.0), scheme_sixth())
        self.assertTrue(wide.boundary_ok)
        with self.assertLogs("fracschrod.solver", level="WARNING") as logs:
            narrow = imaginary_time_solve(config, harmonic(), make_grid(256, -5.5, 5.5), scheme_sixth())
        self.assertFalse(narrow.boundary_ok)
        self.assertFalse(narrow.summary()["boundary_ok"])
        self.assertTrue(any("domain edge" in line for line in logs.output))
        self.assertLess(abs(narrow.energy - 0.5), 1e-5)


class TestRealTime(unittest.TestCase):
    """
    Test case for real-time propagation.
    """

    def setUp(self):
        self.grid = make_grid(256, -8.0, 8.0)
        self.psi = WaveField(self.grid, np.exp(-((self.grid.x - 2.0) ** 2))).normalized()

    def test_norm_is_preserved(self):
        """Strang steps in real time keep the norm."""
        final = real_time_propagate(self.psi, double_well(), 2.0, 1e-3, 200)
        self.assertAlmostEqual(final.norm(), 1.0, places=10)

    def test_complex_scheme_rejected(self):
        """The complex sixth-order scheme is not unitary."""
        with self.assertRaises(SchemeError):
            real_time_propagate(self.psi, double_well(), 2.0, 1e-3, 1, scheme=scheme_sixth())

    def test_explicit_strang(self):
        """The default scheme is Strang."""
        default = real_time_propagate(self.psi, harmonic(), 2.0, 1e-2, 10)
        explicit = real_time_propagate(self.psi, harmonic(), 2.0, 1e-2, 10, scheme=scheme_strang())
        np.testing.assert_array_equal(default.values, explicit.values)


if __name__ == "__main__":
    unittest.main()
