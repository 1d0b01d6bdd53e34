import io
import json
import tempfile
from pathlib import Path

import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from termshapes.cli import SUBCOMMANDS, dispatch

TESTS_DIR = Path(__file__).resolve().parent
GOLDEN = TESTS_DIR / "golden"
FIXTURES = TESTS_DIR / "fixtures"

SCALAR_TYPES = {
    "str": lambda v: isinstance(v, str),
    "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "bool": lambda v: isinstance(v, bool),
    "null": lambda v: v is None,
}

# Una invocación fija por subcomando; golden/<nombre>.json describe su salida.
GOLDEN_RUNS = {
    "classify": ("classify", "--curve", "forward", "--beta=0,0,1,0", "--tau1", "1", "--tau2", "0.5"),
    "segment": ("segment", "--tau1", "1", "--tau2", "0.5", "--grid=-1,1,-1,1,3,2", "--n", "512"),
    "envelope": ("envelope", "--curve", "forward", "--tau1", "1", "--tau2", "0.5", "--n", "300"),
    "attainable": ("attainable", "--r", "2"),
    "horizons": ("horizons", "--beta2", "1", "--beta3", "1", "--tau1", "1"),
    "probabilities": ("probabilities", "--beta=0,0,0.01,1", "--tau1", "1", "--t", "1"),
    "simulate": (
        "simulate", "--beta=0,0,-0.1,1", "--tau1", "1", "--t", "1",
        "--n", "2000", "--points", "500", "--seed", "3",
    ),
    "ingest": ("ingest", str(FIXTURES / "forward_shapes.csv")),
}


def run(*args):
    out = io.StringIO()
    call_command(*args, stdout=out)
    return out.getvalue()


def run_json(*args):
    return json.loads(run(*args))


def run_csv(*args):
    return pd.read_csv(io.StringIO(run(*args, "--format", "csv")))


def load_golden(name):
    return json.loads((GOLDEN / f"{name}.json").read_text(encoding="utf-8"))


class GoldenSchemaMixin:
    """
    Esquemas golden: "str" | "int" | "number" | "bool" | "null" (sufijo "?" =
    admite null), [esquema] = lista no vacía de elementos, {"*": esquema} =
    mapa de claves libres, cualquier otro dict = claves exactas y en orden.
    """

    def assertMatchesSchema(self, value, schema, path="$"):
        if isinstance(schema, str):
            if schema.endswith("?") and value is None:
                return
            kind = schema.rstrip("?")
            self.assertTrue(SCALAR_TYPES[kind](value), f"{path}: expected {schema}, got {value!r}")
        elif isinstance(schema, list):
            self.assertIsInstance(value, list, path)
            self.assertTrue(value, f"{path}: empty list")
            for i, item in enumerate(value):
                self.assertMatchesSchema(item, schema[0], f"{path}[{i}]")
        elif list(schema) == ["*"]:
            self.assertIsInstance(value, dict, path)
            self.assertTrue(value, f"{path}: empty map")
            for key, item in value.items():
                self.assertMatchesSchema(item, schema["*"], f"{path}.{key}")
        else:
            self.assertIsInstance(value, dict, path)
            self.assertEqual(list(value), list(schema), f"{path}: keys or their order changed")
            for key, sub in schema.items():
                self.assertMatchesSchema(value[key], sub, f"{path}.{key}")

    def assertGoldenSchema(self, name, doc):
        self.assertMatchesSchema(doc, load_golden(name)["json"])


class GoldenOutputTests(GoldenSchemaMixin, SimpleTestCase):
    def test_every_subcommand_has_a_golden(self):
        self.assertEqual(set(GOLDEN_RUNS), set(SUBCOMMANDS))
        self.assertEqual({p.stem for p in GOLDEN.glob("*.json")}, set(SUBCOMMANDS))

    def test_json_documents(self):
        for name, args in GOLDEN_RUNS.items():
            with self.subTest(command=name):
                self.assertGoldenSchema(name, run_json(*args))

    def test_csv_headers(self):
        for name, args in GOLDEN_RUNS.items():
            with self.subTest(command=name):
                header = run(*args, "--format", "csv").splitlines()[0]
                self.assertEqual(header.split(","), load_golden(name)["csv"])

    def test_schema_checker_rejects_drift(self):
        with self.assertRaises(AssertionError):
            self.assertMatchesSchema({"b": 1, "a": 2}, {"a": "int", "b": "int"})
        with self.assertRaises(AssertionError):
            self.assertMatchesSchema({"a": True}, {"a": "number"})
        with self.assertRaises(AssertionError):
            self.assertMatchesSchema({"a": 1.5}, {"a": "int"})
        with self.assertRaises(AssertionError):
            self.assertMatchesSchema({"a": []}, {"a": ["int"]})
        self.assertMatchesSchema({"a": None, "m": {"k": 1}}, {"a": "number?", "m": {"*": "int"}})


class ClassifyCommandTests(GoldenSchemaMixin, SimpleTestCase):
    def test_nelson_siegel_hump(self):
        doc = run_json("classify", "--curve", "forward", "--beta=0,0,1,0", "--tau1", "1", "--tau2", "0.5")
        self.assertGoldenSchema("classify", doc)
        self.assertEqual(doc["shape"], "h")
        self.assertEqual(doc["family"], "NelsonSiegel")
        self.assertEqual(len(doc["extrema"]), 1)
        self.assertAlmostEqual(doc["extrema"][0]["x"], 1.0)
        self.assertEqual(doc["extrema"][0]["kind"], "hump")

    def test_svensson_direct_and_envelope_agree(self):
        args = ("classify", "--beta=0,-0.85,0.15,1", "--tau1", "1", "--tau2", "0.5")
        direct = run_json(*args)
        envelope = run_json(*args, "--method", "envelope")
        self.assertEqual(direct["shape"], "hdh")
        self.assertEqual(envelope["shape"], "hdh")
        self.assertEqual(envelope["winding"] ** 2, 1)

    def test_quadrant(self):
        doc = run_json("classify", "--beta=0,5,1,1", "--tau1", "1", "--tau2", "0.5", "--quadrant")
        self.assertEqual(doc["shape"], "i")
        self.assertEqual(doc["quadrant"], "Qi")

    def test_csv(self):
        text = run("classify", "--beta=0,0,1,0", "--tau1", "1", "--format", "csv")
        lines = text.strip().splitlines()
        self.assertEqual(lines[0], "curve,family,shape,extrema,boundary")
        self.assertTrue(lines[1].startswith("forward,NelsonSiegel,h,hump@1.0"))

    def test_degenerate_family(self):
        with self.assertRaises(CommandError) as ctx:
            run("classify", "--tau1", "1", "--tau2", "1", "--beta=0,0,1,1")
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("DegenerateFamilyError", str(ctx.exception))


class GeometryCommandTests(GoldenSchemaMixin, SimpleTestCase):
    def test_segment(self):
        doc = run_json("segment", "--tau1", "1", "--tau2", "0.5", "--grid=-1,1,-1,1,3,2", "--n", "512")
        self.assertGoldenSchema("segment", doc)
        self.assertEqual(len(doc["records"]), 6)
        self.assertEqual(doc["beta3_sign"], "positive")

    def test_segment_csv(self):
        text = run("segment", "--tau1", "1", "--tau2", "0.5", "--grid=-1,1,-1,1,2,2", "--n", "512", "--format", "csv")
        lines = text.strip().splitlines()
        self.assertEqual(lines[0], "gamma1,gamma2,shape,winding,in_D,boundary_flag")
        self.assertEqual(len(lines), 5)

    def test_segment_bad_grid(self):
        with self.assertRaises(CommandError):
            run("segment", "--tau1", "1", "--tau2", "0.5", "--grid", "0,1,0,1,1,1")

    def test_envelope(self):
        doc = run_json("envelope", "--curve", "forward", "--tau1", "1", "--tau2", "0.5", "--n", "300")
        self.assertGoldenSchema("envelope", doc)
        self.assertEqual(doc["contact0"], [-6.0, -4.0])
        self.assertAlmostEqual(doc["cusp"]["x"], 2.5)
        self.assertIsNone(doc["horizon"])

    def test_envelope_to_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            target = Path(tmp) / "env.json"
            out = run("envelope", "--curve", "yield", "--tau1", "1", "--tau2", "0.5", "--n", "300", "--out", str(target))
            self.assertEqual(out, "")
            doc = json.loads(target.read_text(encoding="utf-8"))
        self.assertEqual(doc["contact_inf"], [0.0, -0.5])

    def test_envelope_csv_tags_every_row(self):
        frame = run_csv("envelope", "--curve", "forward", "--tau1", "1", "--tau2", "0.5", "--n", "300")
        self.assertEqual(list(frame.columns), load_golden("envelope")["csv"])
        self.assertEqual(
            set(frame["segment"]),
            {"envelope_0", "envelope_1", "cusp", "line0", "line_inf", "M"},
        )
        samples = frame[frame["segment"].str.startswith("envelope_")]
        # el tramo cambia una sola vez, en la cúspide x = 2.5
        self.assertTrue((samples.loc[samples["x"] <= 2.5, "segment"] == "envelope_0").all())
        self.assertTrue((samples.loc[samples["x"] > 2.5, "segment"] == "envelope_1").all())
        self.assertTrue(samples[["a", "b", "c"]].isna().all().all())

        line0 = frame[frame["segment"] == "line0"].iloc[0]
        self.assertEqual(line0["x"], 0.0)
        self.assertEqual((line0["gamma1"], line0["gamma2"]), (-6.0, -4.0))
        self.assertEqual((line0["a"], line0["b"], line0["c"]), (1.0, 0.5, -0.5))
        line_inf = frame[frame["segment"] == "line_inf"].iloc[0]
        self.assertTrue(pd.isna(line_inf["x"]))
        self.assertEqual((line_inf["a"], line_inf["b"], line_inf["c"]), (0.0, -1.0, 0.0))
        m = frame[frame["segment"] == "M"].iloc[0]
        self.assertAlmostEqual(m["gamma1"], 0.0, delta=1e-12)
        self.assertAlmostEqual(m["gamma2"], 2.0, delta=1e-12)
        cusp = frame[frame["segment"] == "cusp"].iloc[0]
        self.assertAlmostEqual(cusp["x"], 2.5)

    def test_envelope_csv_inverted_closes_with_horizon_line(self):
        frame = run_csv("envelope", "--curve", "forward", "--tau1", "1", "--tau2", "2", "--horizon", "30", "--n", "300")
        tags = set(frame["segment"])
        self.assertIn("line_T", tags)
        self.assertIn("line0", tags)
        self.assertFalse(tags & {"line_inf", "M", "cusp", "envelope_1"})
        line_t = frame[frame["segment"] == "line_T"].iloc[0]
        self.assertEqual(line_t["x"], 30.0)
        residual = line_t["a"] + line_t["b"] * line_t["gamma1"] + line_t["c"] * line_t["gamma2"]
        scale = max(1.0, abs(line_t["gamma1"]), abs(line_t["gamma2"]))
        self.assertAlmostEqual(residual / scale, 0.0, delta=1e-9)

    def test_envelope_json_inverted_horizon_line(self):
        doc = run_json("envelope", "--curve", "yield", "--tau1", "1", "--tau2", "3.6", "--horizon", "40", "--n", "300")
        self.assertEqual(doc["horizon"], 40.0)
        self.assertIsNone(doc["line_inf"])
        self.assertEqual(set(doc["line_T"]), {"a", "b", "c"})
        self.assertEqual(len(doc["contact_T"]), 2)
        self.assertLessEqual({p["segment"] for p in doc["points"]}, {"envelope_0", "envelope_1"})
        self.assertLessEqual(max(p["x"] for p in doc["points"]), 40.0)

    def test_attainable(self):
        doc = run_json("attainable", "--r", "2")
        self.assertGoldenSchema("attainable", doc)
        self.assertEqual(doc["shapes"], ["d", "h", "hd", "hdh", "i", "n"])

    def test_attainable_over_time(self):
        doc = run_json("attainable", "--beta=0,0,0.01,1", "--tau1", "1", "--t", "1")
        self.assertEqual(doc["shapes"], ["h", "hdh", "i"])

    def test_attainable_needs_ratio(self):
        with self.assertRaises(CommandError):
            run("attainable", "--family", "Bliss")


class DynamicsCommandTests(GoldenSchemaMixin, SimpleTestCase):
    def test_horizons(self):
        doc = run_json("horizons", "--beta2", "1", "--beta3", "1", "--tau1", "1")
        self.assertGoldenSchema("horizons", doc)
        self.assertEqual(doc["t_dagger_f"], 0.0)
        self.assertEqual(doc["long_run_shape"], "i")

    def test_horizons_inconsistent_tau2(self):
        with self.assertRaises(CommandError):
            run("horizons", "--beta2", "1", "--beta3", "1", "--tau1", "1", "--tau2", "0.7")

    def test_probabilities(self):
        doc = run_json("probabilities", "--beta=0,0,0.01,1", "--tau1", "1", "--t", "1")
        self.assertGoldenSchema("probabilities", doc)
        self.assertAlmostEqual(sum(doc["probs"].values()), 1.0, delta=1e-9)

    def test_simulate_is_reproducible(self):
        args = ("simulate", "--beta=0,0,-0.1,1", "--tau1", "1", "--t", "1", "--n", "2000", "--points", "500", "--seed", "3")
        first = run(*args)
        self.assertEqual(first, run(*args))
        doc = json.loads(first)
        self.assertGoldenSchema("simulate", doc)
        self.assertEqual(sum(doc["counts"].values()), 2000)
        self.assertEqual(doc["seed"], 3)


class IngestCommandTests(GoldenSchemaMixin, SimpleTestCase):
    def test_report(self):
        doc = run_json("ingest", str(FIXTURES / "forward_shapes.csv"))
        self.assertGoldenSchema("ingest", doc)
        self.assertEqual(doc["rows"], 5)
        self.assertEqual(doc["quarantine"], [{"line": 7, "reason": "tau1 must be positive"}])

    def test_missing_file(self):
        with self.assertRaises(CommandError):
            run("ingest", str(FIXTURES / "missing.csv"))


class DispatchTests(SimpleTestCase):
    def _dispatch(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        code = dispatch(list(argv), stdout=out, stderr=err)
        return code, out.getvalue(), err.getvalue()

    def test_success(self):
        code, out, _ = self._dispatch("classify", "--beta=0,0,1,0", "--tau1", "1")
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)["shape"], "h")

    def test_domain_error_exits_one(self):
        code, out, err = self._dispatch("classify", "--tau1", "1", "--tau2", "1", "--beta=0,0,1,1")
        self.assertEqual(code, 1)
        self.assertEqual(out, "")
        self.assertIn("DegenerateFamilyError", err)

    def test_usage_error_exits_two(self):
        code, out, _ = self._dispatch("classify", "--curve", "sideways", "--beta=0,0,1,0", "--tau1", "1")
        self.assertEqual(code, 2)
        self.assertEqual(out, "")

    def test_unknown_subcommand(self):
        code, _, err = self._dispatch("bogus")
        self.assertEqual(code, 2)
        self.assertIn("unknown subcommand", err)
        self.assertEqual(self._dispatch()[0], 2)
