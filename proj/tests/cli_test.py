#!/usr/bin/env python3
"""End-to-end tests of the aniso_spectra command-line tool.

Runs every subcommand on the shipped fixtures, validates each JSON output
against the schemas in schemas/, and checks exit codes, CSV outputs,
thread-count independence and manifest replay.

usage: cli_test.py <aniso_spectra binary> <repository root>
"""

import json
import math
import pathlib
import subprocess
import sys
import tempfile
import unittest

import jsonschema
import referencing

BINARY = None
ROOT = None


def load_schemas():
    schemas = {}
    for path in (ROOT / "schemas").glob("*.schema.json"):
        schemas[path.name] = json.loads(path.read_text())
    registry = referencing.Registry().with_resources(
        (name, referencing.Resource.from_contents(s)) for name, s in schemas.items())
    return schemas, registry


def run(*args, env=None):
    return subprocess.run([str(BINARY), *map(str, args)], capture_output=True, text=True, env=env, timeout=600)


def domain(name):
    return ROOT / "data" / "domains" / f"{name}.json"


def anisotropy(name):
    return ROOT / "data" / "anisotropies" / f"{name}.json"


def read_csv(path):
    lines = pathlib.Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = [[float(x) if x else None for x in line.split(",")] for line in lines[1:]]
    return header, rows


class CliTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.schemas, cls.registry = load_schemas()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.dir = pathlib.Path(cls.tmp.name)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def validate(self, document, schema_name):
        validator = jsonschema.Draft202012Validator(self.schemas[schema_name], registry=self.registry)
        errors = sorted(validator.iter_errors(document), key=lambda e: list(e.path))
        self.assertEqual([], [f"{list(e.path)}: {e.message}" for e in errors])

    def ok(self, *args, schema=None):
        r = run(*args)
        self.assertEqual(0, r.returncode, msg=r.stderr)
        doc = json.loads(r.stdout)
        if schema:
            self.validate(doc, schema)
        return doc

    def fails(self, code, *args, message=None):
        r = run(*args)
        self.assertEqual(code, r.returncode, msg=r.stdout + r.stderr)
        if message:
            self.assertIn(message, r.stderr)
        return r

    # -- inputs --------------------------------------------------------------

    def test_shipped_inputs_match_schemas(self):
        for path in (ROOT / "data" / "domains").glob("*.json"):
            if path.stem in ("malformed", "bad_field"):
                continue
            self.validate(json.loads(path.read_text()), "polygon.schema.json")
        for path in (ROOT / "data" / "anisotropies").glob("*.json"):
            if path.stem == "unknown_kind":
                continue
            self.validate(json.loads(path.read_text()), "anisotropy.schema.json")
        for path in (ROOT / "data" / "configs").glob("*.json"):
            self.validate(json.loads(path.read_text()), "solver_config.schema.json")

    # -- freq1d --------------------------------------------------------------

    def test_freq1d_closed_form(self):
        doc = self.ok("freq1d", "--p", 2, "--interval", -1, 1, "--a", 3, "--b", 1, schema="freq1d.schema.json")
        self.assertAlmostEqual(math.pi ** 2, doc["lambda"], delta=1e-12)
        self.assertAlmostEqual(0.5, doc["t0"], delta=1e-15)
        self.assertLess(doc["residual"], 1e-4)
        doc = self.ok("freq1d", "--p", 2, "--interval", -1, 1, "--a", 1, "--b", 1, schema="freq1d.schema.json")
        self.assertAlmostEqual(math.pi ** 2 / 4, doc["lambda"], delta=1e-12)

    def test_freq1d_oracle_and_profile(self):
        csv = self.dir / "profile.csv"
        doc = self.ok("freq1d", "--p", 2, "--a", 1, "--b", 1, "--oracle", 400, "--profile-csv", csv,
                      schema="freq1d.schema.json")
        self.assertTrue(doc["oracle"]["converged"])
        self.assertGreaterEqual(doc["oracle"]["lambda"], doc["lambda"] * (1 - 1e-9))
        self.assertLess(doc["oracle"]["relative_gap"], 5e-3)
        header, rows = read_csv(csv)
        self.assertEqual(["t", "u"], header)
        self.assertEqual(400, len(rows))
        self.assertEqual(0.0, rows[0][1])
        self.assertEqual(0.0, rows[-1][1])

    def test_freq1d_errors(self):
        self.fails(2, "freq1d", "--p", 2, "--interval", -1, 1, "--a", 0, "--b", 0, message="ZeroAnisotropy")
        self.fails(2, "freq1d", "--p", 1, message="BadExponent")
        self.fails(2, "freq1d", "--interval", 1, -1, message="EmptyInterval")
        self.fails(2, "freq1d", "--p", "abc")
        self.fails(2, "freq1d", "--a", -1)

    # -- freq2d --------------------------------------------------------------

    def test_freq2d_closed_form_path(self):
        doc = self.ok("freq2d", "--domain", domain("unit_square"), "--anisotropy", anisotropy("y_plus"),
                      "--closed-form", schema="spectral_report.schema.json")
        self.assertEqual("closed_form", doc["method"])
        self.assertAlmostEqual(math.pi ** 2 / 4, doc["lambda"], delta=1e-12)
        self.assertFalse(doc["attained"])
        self.fails(2, "freq2d", "--domain", domain("unit_square"), "--anisotropy", anisotropy("euclidean"),
                   "--closed-form", message="NotDegenerateLine")

    def test_freq2d_solver_and_field(self):
        csv = self.dir / "field.csv"
        doc = self.ok("freq2d", "--domain", domain("unit_square"), "--anisotropy", anisotropy("euclidean"),
                      "--resolution", 128, "--field-csv", csv, schema="spectral_report.schema.json")
        self.assertEqual("solver", doc["method"])
        self.assertLess(abs(doc["lambda"] / (2 * math.pi ** 2) - 1), 0.02)
        self.assertGreaterEqual(doc["lambda"], 2 * math.pi ** 2 * (1 - 1e-9))
        header, rows = read_csv(csv)
        self.assertEqual(["x", "y", "u"], header)
        self.assertEqual(doc["nodes"], len(rows))

    def test_freq2d_config_and_overrides(self):
        doc = self.ok("freq2d", "--domain", domain("unit_square"), "--anisotropy", anisotropy("asym_3_1"),
                      "--config", ROOT / "data" / "configs" / "default.json", "--resolution", 32, "--seed", 7,
                      schema="spectral_report.schema.json")
        self.assertEqual(32, doc["resolution"])
        self.assertEqual(7, doc["seed"])
        self.assertLess(abs(doc["lambda"] / (4 * math.pi ** 2) - 1), 0.02)

    def test_freq2d_input_errors(self):
        r = self.fails(2, "freq2d", "--domain", domain("malformed"), "--anisotropy", anisotropy("y_plus"))
        self.assertRegex(r.stderr, r"malformed\.json:3:\d+: malformed JSON")
        self.fails(2, "freq2d", "--domain", domain("bad_field"), "--anisotropy", anisotropy("y_plus"),
                   message="domain.outer[2][0]")
        self.fails(2, "freq2d", "--domain", domain("unit_square"), "--anisotropy", anisotropy("unknown_kind"),
                   message="anisotropy.kind")
        self.fails(2, "freq2d", "--domain", domain("does_not_exist"), "--anisotropy", anisotropy("y_plus"))
        self.fails(2, "freq2d", "--anisotropy", anisotropy("y_plus"))

    def test_freq2d_nonconvergence_writes_partial_report(self):
        out = self.dir / "partial.json"
        r = run("freq2d", "--domain", domain("unit_square"), "--anisotropy", anisotropy("euclidean"),
                "--config", ROOT / "data" / "configs" / "tiny_budget.json", "--out", out)
        self.assertEqual(3, r.returncode, msg=r.stderr)
        doc = json.loads(out.read_text())
        self.validate(doc, "spectral_report.schema.json")
        self.assertFalse(doc["converged"])
        self.assertEqual(json.loads(r.stdout), doc)

    # -- width ---------------------------------------------------------------

    def test_width_square(self):
        csv = self.dir / "width.csv"
        doc = self.ok("width", "--domain", domain("unit_square"), "--csv", csv, schema="width.schema.json")
        self.assertAlmostEqual(math.pi / 4, doc["argmax"], delta=1e-9)
        self.assertAlmostEqual(math.sqrt(2), doc["sup"], delta=1e-12)
        self.assertTrue(doc["attained"])
        header, rows = read_csv(csv)
        self.assertEqual(["theta", "L_theta"], header)
        self.assertEqual(doc["samples"], len(rows))
        self.assertEqual(0.0, rows[0][0])

    def test_width_disk_is_flat(self):
        csv = self.dir / "disk.csv"
        doc = self.ok("width", "--domain", domain("disk_64"), "--csv", csv, "--samples", 360,
                      schema="width.schema.json")
        values = [row[1] for row in read_csv(csv)[1]]
        # central chords of a regular 64-gon of radius 1/2 range over [cos(pi/64), 1]
        self.assertLessEqual(max(values) - min(values), 1 - math.cos(math.pi / 64) + 1e-12)
        self.assertGreaterEqual(min(values), math.cos(math.pi / 64) - 1e-12)
        self.assertAlmostEqual(1.0, doc["sup"], delta=1e-12)

    def test_width_long_rectangle(self):
        doc = self.ok("width", "--domain", domain("rectangle_4x1"), schema="width.schema.json")
        self.assertAlmostEqual(math.atan(0.25), doc["argmax"], delta=1e-3)
        self.assertAlmostEqual(math.sqrt(17), doc["sup"], delta=1e-12)

    def test_width_reports_jumps_of_nonconvex_domains(self):
        doc = self.ok("width", "--domain", domain("dumbbell"), schema="width.schema.json")
        self.assertGreater(len(doc["discontinuities"]), 0)
        doc = self.ok("width", "--domain", domain("u_shape"), schema="width.schema.json")
        self.assertGreaterEqual(doc["sup"], 3.0)

    def test_width_errors(self):
        self.fails(2, "width", "--domain", domain("degenerate"))
        self.fails(2, "width", "--domain", domain("unit_square"), "--samples", 3)

    # -- bounds --------------------------------------------------------------

    def test_bounds_square(self):
        doc = self.ok("bounds", "--domain", domain("unit_square"), schema="bounds.schema.json")
        self.assertAlmostEqual(math.pi ** 2 / 8, doc["lambda_min"], delta=1e-9)
        self.assertLess(abs(doc["lambda_max"] / (2 * math.pi ** 2) - 1), 0.02)
        self.assertAlmostEqual(math.pi / 4, doc["argmin_theta"], delta=1e-3)
        self.assertTrue(doc["design_attained"])
        self.assertEqual("unit_square", doc["domain"])

    def test_bounds_rectangle(self):
        doc = self.ok("bounds", "--domain", domain("rectangle_2x1"), schema="bounds.schema.json")
        self.assertLess(abs(doc["lambda_max"] / (1.25 * math.pi ** 2) - 1), 0.02)
        self.assertLess(doc["lambda_min"], doc["lambda_max"])

    def test_bounds_errors(self):
        self.fails(2, "bounds", "--domain", domain("degenerate"))
        self.fails(2, "bounds", "--domain", domain("unit_square"), "--p", 0.5)

    # -- classify ------------------------------------------------------------

    def test_classify_examples(self):
        doc = self.ok("classify", "--anisotropy", anisotropy("y_plus"), schema="classify.schema.json")
        self.assertEqual("half_plane", doc["kernel"])
        self.assertAlmostEqual(1.0, doc["norm"], delta=1e-12)
        doc = self.ok("classify", "--anisotropy", anisotropy("asym_3_1"), schema="classify.schema.json")
        self.assertEqual("line", doc["kernel"])
        self.assertAlmostEqual(3.0, doc["a"], delta=1e-12)
        self.assertAlmostEqual(1.0, doc["b"], delta=1e-12)
        doc = self.ok("classify", "--anisotropy", anisotropy("diamond"), schema="classify.schema.json")
        self.assertEqual("zero_only", doc["kernel"])
        self.assertEqual(4, len(doc["non_c1_directions"]))
        doc = self.ok("classify", "--anisotropy", anisotropy("euclidean"), schema="classify.schema.json")
        self.assertEqual([], doc["non_c1_directions"])
        for name in ("segment", "split_e1", "regularized_y_plus", "hexagon", "y_abs"):
            self.ok("classify", "--anisotropy", anisotropy(name), schema="classify.schema.json")

    def test_classify_errors(self):
        self.fails(2, "classify", "--anisotropy", anisotropy("unknown_kind"))

    # -- verify --------------------------------------------------------------

    def test_verify_divergence(self):
        r = run("verify", "divergence")
        self.assertEqual(0, r.returncode, msg=r.stdout + r.stderr)
        self.assertRegex(r.stdout, r"PASS\s+criterion 9")
        self.assertIn("ratio 4", r.stdout)

    def test_verify_unknown_suite(self):
        self.fails(2, "verify", "nosuch")

    # -- global behaviour ----------------------------------------------------

    def test_exit_codes_for_usage_errors(self):
        self.fails(2)
        self.fails(2, "nosuch")
        self.fails(2, "width")
        self.assertEqual(0, run("--help").returncode)
        self.assertEqual(0, run("--version").returncode)

    def test_thread_count_does_not_change_output(self):
        args = ("freq2d", "--domain", domain("pentagon"), "--anisotropy", anisotropy("hexagon"), "--resolution", 32)
        outputs = {run("--threads", n, *args).stdout for n in (1, 2, 4)}
        self.assertEqual(1, len(outputs))
        import os
        env = dict(os.environ, ANISO_SPECTRA_THREADS="3")
        self.assertEqual(outputs, {run(*args, env=env).stdout})

    def test_manifest_replay_reproduces_outputs(self):
        manifest = self.dir / "manifest.json"
        out = self.dir / "replay.json"
        field = self.dir / "replay_field.csv"
        r = run("--manifest", manifest, "freq2d", "--domain", domain("l_shape"), "--anisotropy",
                anisotropy("hexagon"), "--resolution", 24, "--seed", 3, "--out", out, "--field-csv", field)
        self.assertEqual(0, r.returncode, msg=r.stderr)
        doc = json.loads(manifest.read_text())
        self.validate(doc, "manifest.schema.json")
        self.assertEqual("freq2d", doc["command"])
        self.assertEqual(3, doc["seed"])
        self.assertEqual(sorted([str(out), str(field)]), sorted(doc["outputs"]))
        first = (out.read_bytes(), field.read_bytes())
        out.unlink()
        field.unlink()
        r = run("replay", manifest)
        self.assertEqual(0, r.returncode, msg=r.stderr)
        self.assertEqual(first, (out.read_bytes(), field.read_bytes()))

    def test_replay_rejects_changed_inputs(self):
        dom = self.dir / "square.json"
        dom.write_text(domain("unit_square").read_text())
        manifest = self.dir / "manifest_width.json"
        self.assertEqual(0, run("--manifest", manifest, "width", "--domain", dom).returncode)
        self.validate(json.loads(manifest.read_text()), "manifest.schema.json")
        self.assertEqual(0, run("replay", manifest).returncode)
        dom.write_text(domain("rectangle_2x1").read_text())
        self.fails(2, "replay", manifest, message="changed since the manifest was written")


if __name__ == "__main__":
    BINARY = pathlib.Path(sys.argv[1]).resolve()
    ROOT = pathlib.Path(sys.argv[2]).resolve()
    unittest.main(argv=[sys.argv[0], "-v"])
