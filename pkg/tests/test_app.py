import json
import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np
import numpy.testing as npt
import pandas as pd

from src.app import EXIT_INVALID, EXIT_IO, EXIT_OK, EXIT_VALIDITY, main

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


class TestCommandLine(unittest.TestCase):
    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def write_scenario(self, data, name="scenario.json"):
        path = self.tmp / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    def final_intensities(self, out):
        table = pd.read_csv(out / "zscan.csv")
        final = table[table["z_over_Labs"] == table["z_over_Labs"].max()]
        return final.sort_values("field_index")["intensity_normalized"].to_numpy()

    def test_run_lambda_zscan(self):
        out = self.tmp / "fig2"
        self.assertEqual(main(["run", str(SCENARIOS / "fig2.json"), "--out", str(out)]), EXIT_OK)
        npt.assert_allclose(self.final_intensities(out), [0.25, 0.25], atol=1e-6)
        validity = json.loads((out / "validity.json").read_text())
        self.assertTrue(validity["valid"])
        resolved = json.loads((out / "scenario.resolved.json").read_text())
        self.assertEqual(resolved["config"]["gamma"], [1.0, 1.0])
        self.assertEqual(resolved["config"]["n"], 2)
        self.assertEqual(resolved["zscan"]["points"], 401)

    def test_run_tripod_zscan(self):
        out = self.tmp / "fig4"
        self.assertEqual(main(["run", str(SCENARIOS / "fig4.json"), "--out", str(out)]), EXIT_OK)
        npt.assert_allclose(self.final_intensities(out), [0.25, 0.1666667, 0.0833333], atol=1e-6)

    def test_run_composite(self):
        out = self.tmp / "fig7a"
        self.assertEqual(main(["run", str(SCENARIOS / "fig7a.json"), "--out", str(out), "--strict"]), EXIT_OK)
        report = json.loads((out / "vortices_z0_f1.json").read_text())
        charges = [v["charge"] for v in report["vortices"]]
        self.assertEqual(charges[0], 1)
        self.assertEqual(sorted(charges[1:]), [-1] * 4)
        self.assertEqual(report["total_winding"], sum(charges))
        for name in ("fields_z0.csv", "fields_z0.json", "maps_z0_f1.csv", "maps_z0_f2.csv",
                     "vortices_z0_f2.json", "zscan.csv", "validity.json", "scenario.resolved.json"):
            with self.subTest(artifact=name):
                self.assertTrue((out / name).exists())
        fields = pd.read_csv(out / "fields_z0.csv")
        self.assertEqual(list(fields.columns), ["x", "y", "field_index", "re", "im"])
        self.assertEqual(len(fields), 256 * 256 * 2)
        validity = json.loads((out / "validity.json").read_text())
        self.assertAlmostEqual(validity["diffraction"]["value"], 0.25)

    def test_outputs_are_deterministic(self):
        first, second = self.tmp / "one", self.tmp / "two"
        for out in (first, second):
            self.assertEqual(main(["run", str(SCENARIOS / "fig7a.json"), "--out", str(out)]), EXIT_OK)
        for path in sorted(first.iterdir()):
            with self.subTest(artifact=path.name):
                self.assertEqual(path.read_bytes(), (second / path.name).read_bytes())

    def test_strict_validity_failure(self):
        path = self.write_scenario({
            "kind": "zscan",
            "config": {"c": [[0.7071067811865476, 0], [0.7071067811865476, 0]], "alpha": 20},
            "entrance": [[1.0, 0.0], [0.0, 0.0]],
            "zscan": {"z_max_over_labs": 10, "points": 11},
        })
        out = self.tmp / "strong"
        self.assertEqual(main(["run", str(path), "--out", str(out), "--strict"]), EXIT_VALIDITY)
        validity = json.loads((out / "validity.json").read_text())
        self.assertFalse(validity["first_order"]["valid"])
        self.assertAlmostEqual(validity["first_order"]["max_coherence"], 0.5)
        self.assertTrue((out / "zscan.csv").exists())
        self.assertEqual(main(["run", str(path), "--out", str(self.tmp / "lenient")]), EXIT_OK)

    def test_invalid_inputs(self):
        cases = {
            "unknown kind": json.dumps({"kind": "bogus", "config": {"c": [[1, 0], [0, 0]], "alpha": 1}}),
            "missing config": json.dumps({"kind": "zscan"}),
            "unnormalized": json.dumps({"kind": "zscan", "config": {"c": [[1, 0], [1, 0]], "alpha": 1}}),
            "malformed json": "{not json",
            "scalar amplitudes": json.dumps({"kind": "zscan", "config": {"c": 1.0, "alpha": 20}}),
            "count mismatch": json.dumps({"kind": "zscan", "config": {"n": 3, "c": [[1, 0], [0, 0]], "alpha": 20}}),
            "beam entry not a list": json.dumps({
                "kind": "lambda-transfer",
                "config": {"c": [[0.7071067811865476, 0], [0.7071067811865476, 0]], "alpha": 20},
                "beams": [5, []],
            }),
        }
        for name, text in cases.items():
            with self.subTest(case=name):
                path = self.tmp / "bad.json"
                path.write_text(text, encoding="utf-8")
                self.assertEqual(main(["run", str(path), "--out", str(self.tmp / "bad")]), EXIT_INVALID)

    def test_missing_file(self):
        self.assertEqual(main(["run", str(self.tmp / "absent.json"), "--out", str(self.tmp / "x")]), EXIT_IO)

    def test_reproduce_composite_figures_strictly(self):
        out = self.tmp / "repro"
        for figure in ("fig6", "fig7", "fig8"):
            with self.subTest(figure=figure):
                self.assertEqual(main(["reproduce", figure, "--out", str(out), "--strict"]), EXIT_OK)
                for case in sorted((out / figure).iterdir()):
                    validity = json.loads((case / "validity.json").read_text())
                    self.assertLessEqual(validity["first_order"]["max_coherence"], 0.05 + 1e-12)
        for label, l in zip("abcd", (1, 2, 3, 4)):
            with self.subTest(case=label):
                report = json.loads((out / "fig8" / label / "vortices_z0_f1.json").read_text())
                self.assertEqual(report["petal_count"], 2 * l)
        report = json.loads((out / "fig7" / "a" / "vortices_z0_f1.json").read_text())
        self.assertEqual([v["charge"] for v in report["vortices"]][0], 1)
        self.assertEqual(report["total_winding"], -3)

    def test_unknown_figure(self):
        with self.assertRaises(SystemExit):
            main(["reproduce", "fig3", "--out", str(self.tmp)])

    def test_convergence_command(self):
        out = self.tmp / "conv"
        self.assertEqual(main(["convergence", str(SCENARIOS / "convergence.json"), "--out", str(out)]), EXIT_OK)
        table = pd.read_csv(out / "convergence.csv")
        self.assertEqual(list(table.columns), ["steps", "max_rel_error"])
        self.assertEqual(table["steps"].tolist(), [100, 200, 400, 800])
        self.assertTrue(np.all(np.diff(table["max_rel_error"]) < 0))


if __name__ == '__main__':
    unittest.main()
