import unittest

import numpy as np
import numpy.testing as npt

from src.optics.beams import BeamSuperposition, FieldGrid, LGBeam, TransverseGrid, lg_amplitude, sample_grid
from src.optics.propagation import asymptotic_array, propagate_grid
from src.optics.scheme import balanced_scheme
from src.optics.vortices import (
    VortexReport,
    boundary_winding,
    count_petals,
    detect_vortices,
    loop_winding,
    plaquette_windings,
    radial_profile,
    report_from_dict,
    report_to_dict,
    vortex_report,
)

LAMBDA = balanced_scheme(2, 20.0)


def single_beam_grid(l, resolution=256, epsilon=1.0):
    grid = TransverseGrid(extent=3.0, resolution=resolution)
    return sample_grid(LAMBDA, [BeamSuperposition.single(LGBeam(epsilon, l=l)), None], grid, threads=1)


def composite_output(l1, l2, z=0.5, resolution=256):
    """Omega_1 after z in a balanced Lambda medium fed by two equal LG beams."""
    grid = TransverseGrid(extent=3.0, resolution=resolution)
    beams = [BeamSuperposition.single(LGBeam(0.05, l=l1)), BeamSuperposition.single(LGBeam(0.05, l=l2))]
    return propagate_grid(LAMBDA, sample_grid(LAMBDA, beams, grid, threads=1), z, threads=1)


class TestLoopWinding(unittest.TestCase):
    def test_simple_loops(self):
        phi = np.linspace(0, 2 * np.pi, 100, endpoint=False)
        self.assertEqual(loop_winding(np.exp(3j * phi)), 3)
        self.assertEqual(loop_winding(np.full(10, 2.0 + 1j)), 0)

    def test_invariant_under_global_factor(self):
        phi = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        values = np.exp(-2j * phi) * (1.5 + 0.2 * np.cos(phi))
        for factor in (1.0, -3.0, 0.2j, 1e-5 * np.exp(0.7j)):
            with self.subTest(factor=factor):
                self.assertEqual(loop_winding(factor * values), -2)

    def test_composite_asymptote_on_circles(self):
        """Central +1 inside, l2 = -3 dominates far out."""
        phi = np.linspace(0, 2 * np.pi, 720, endpoint=False)
        for radius, expected in ((0.1, 1), (3.0, -3)):
            with self.subTest(radius=radius):
                r = np.full_like(phi, radius)
                entrance = np.stack([lg_amplitude(LGBeam(1.0, l=1), r, phi),
                                     lg_amplitude(LGBeam(1.0, l=-3), r, phi)], axis=-1)
                output = asymptotic_array(LAMBDA, entrance)[:, 0]
                self.assertEqual(loop_winding(output), expected)

    def test_zero_sample_raises(self):
        with self.assertRaises(ValueError):
            loop_winding([1.0, 0.0, 1j])
        with self.assertRaises(ValueError):
            loop_winding([])


class TestPlaquettes(unittest.TestCase):
    def test_charge_bookkeeping(self):
        rng = np.random.default_rng(3)
        for draw in range(10):
            with self.subTest(draw=draw):
                field = rng.normal(size=(24, 24)) + 1j * rng.normal(size=(24, 24))
                self.assertEqual(int(plaquette_windings(field).sum()), boundary_winding(field))

    def test_single_vortex_plaquette(self):
        x = np.array([-1.0, 1.0])
        X, Y = np.meshgrid(x, x)
        q = plaquette_windings(X + 1j * Y)
        npt.assert_array_equal(q, [[1]])
        npt.assert_array_equal(plaquette_windings(X - 1j * Y), [[-1]])


class TestDetectVortices(unittest.TestCase):
    def test_pure_lg_is_one_cluster(self):
        for l in range(-8, 9):
            with self.subTest(l=l):
                report = detect_vortices(single_beam_grid(l), 0)
                self.assertEqual(report.total_winding, l)
                if l == 0:
                    self.assertEqual(report.vortices, ())
                    continue
                self.assertEqual(len(report.vortices), 1)
                vortex = report.vortices[0]
                self.assertEqual(vortex.charge, l)
                self.assertLess(vortex.radius, 0.05)

    def test_vortex_transfer(self):
        """Field 2 picks up the winding of the incident beam."""
        for l in range(-3, 4):
            entrance = single_beam_grid(l, epsilon=0.05)
            for z in (1e-6, 0.05, 0.5, 1.0):
                with self.subTest(l=l, z=z):
                    report = detect_vortices(propagate_grid(LAMBDA, entrance, z, threads=1), 1)
                    self.assertEqual(report.total_winding, l)
                    self.assertEqual(report.charge_sum, l)
                    self.assertEqual(len(report.vortices), 0 if l == 0 else 1)

    def test_composite_one_minus_three(self):
        report = detect_vortices(composite_output(1, -3), 0)
        charges = [v.charge for v in report.vortices]
        self.assertEqual(charges, [1, -1, -1, -1, -1])
        self.assertLess(report.vortices[0].radius, 0.05)
        peripheral = report.vortices[1:]
        npt.assert_allclose([v.radius for v in peripheral], 1.0, atol=0.03)
        directions = np.exp(1j * np.array([v.azimuth for v in peripheral]))
        for expected in (1, 1j, -1, -1j):
            with self.subTest(direction=expected):
                self.assertLess(np.min(np.abs(directions - expected)), 0.05)
        self.assertEqual(report.total_winding, -3)

    def test_composite_minus_one_four(self):
        report = detect_vortices(composite_output(-1, 4), 0)
        self.assertEqual(report.vortices[0].charge, -1)
        self.assertEqual(sorted(v.charge for v in report.vortices[1:]), [1] * 5)
        self.assertEqual(report.total_winding, 4)

    def test_composite_three_minus_five(self):
        report = detect_vortices(composite_output(3, -5), 0)
        self.assertEqual(report.vortices[0].charge, 3)
        self.assertLess(report.vortices[0].radius, 0.1)
        self.assertEqual(sorted(v.charge for v in report.vortices[1:]), [-1] * 8)
        self.assertEqual(report.total_winding, -5)
        self.assertEqual(report.charge_sum, report.total_winding)

    def test_both_outputs_agree(self):
        out = composite_output(1, -3, resolution=128)
        first, second = detect_vortices(out, 0), detect_vortices(out, 1)
        self.assertEqual([v.charge for v in first.vortices], [v.charge for v in second.vortices])
        self.assertEqual(first.total_winding, second.total_winding)

    def test_resolution_guard(self):
        with self.assertRaises(ValueError):
            detect_vortices(single_beam_grid(1, resolution=32), 0)

    def test_zero_field(self):
        grid = TransverseGrid(resolution=64)
        report = detect_vortices(FieldGrid(grid=grid, values=np.zeros((64, 64, 1))), 0)
        self.assertEqual(report.vortices, ())
        self.assertEqual(report.total_winding, 0)


class TestPetals(unittest.TestCase):
    def test_opposite_windings(self):
        for l in (1, 2, 3, 4):
            with self.subTest(l=l):
                self.assertEqual(count_petals(composite_output(l, -l), 0), 2 * l)

    def test_invariant_under_scaling(self):
        out = composite_output(2, -2)
        scaled = FieldGrid(grid=out.grid, values=out.values * (3e-4 * np.exp(1.3j)))
        self.assertEqual(count_petals(scaled, 0), count_petals(out, 0))

    def test_uniform_ring_has_no_petals(self):
        for l in (1, 3):
            with self.subTest(l=l):
                self.assertEqual(count_petals(single_beam_grid(l), 0), 0)

    def test_ring_errors(self):
        fields = single_beam_grid(1, resolution=64)
        with self.assertRaises(ValueError):
            count_petals(fields, 0, ring_radius=3.5)
        with self.assertRaises(ValueError):
            count_petals(FieldGrid(grid=fields.grid, values=np.zeros((64, 64, 1))), 0, ring_radius=1.0)


class TestRadialProfile(unittest.TestCase):
    def test_peak_radius(self):
        spacing = TransverseGrid().spacing
        for l in (0, 1, 2, 5, 8):
            with self.subTest(l=l):
                profile = radial_profile(single_beam_grid(l), 0)
                self.assertEqual(list(profile.table.columns), ["r", "mean_intensity"])
                self.assertAlmostEqual(profile.peak_radius, np.sqrt(abs(l) / 2), delta=2 * spacing)

    def test_width_grows_with_winding(self):
        peaks = [radial_profile(single_beam_grid(l), 0).peak_radius for l in (1, 5, 8)]
        self.assertEqual(peaks, sorted(peaks))


class TestReport(unittest.TestCase):
    def test_report_round_trip(self):
        report = vortex_report(composite_output(1, -1, resolution=128), 0)
        self.assertIsInstance(report, VortexReport)
        self.assertEqual(report.petal_count, 2)
        data = report_to_dict(report)
        self.assertEqual(set(data), {"vortices", "total_winding", "petal_count", "ring_radius"})
        self.assertEqual(report_from_dict(data), report)


if __name__ == '__main__':
    unittest.main()
