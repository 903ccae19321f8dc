import io
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given

from crystalflex.cli import run_command
from crystalflex.flexes import pg_flex_space
from crystalflex.framework import GALLERY_NAMES, InvalidFrameworkError, gallery
from crystalflex.io import (
    FrameworkParseError,
    SchemaError,
    analysis_report,
    format_complex,
    format_window_field,
    parse_complex,
    parse_framework,
    parse_omega,
    pgflex_from_dict,
    pgflex_to_dict,
    serialize_framework,
)

from conftest import frameworks

GRID_DOC = {
    "dimension": 2,
    "periods": [[1, 0], [0, 1]],
    "joints": [{"id": "v", "coords": [0, 0]}],
    "edges": [{"v": "v", "k": [0, 0], "w": "v", "l": [1, 0]}, {"v": "v", "k": [0, 0], "w": "v", "l": [0, 1]}],
}


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name in GALLERY_NAMES:
        p = tmp_path / f"{name}.json"
        p.write_text(serialize_framework(gallery(name)))
        paths[name] = str(p)
    return paths


class TestParse:
    def test_grid_document(self):
        fw = parse_framework(json.dumps(GRID_DOC))
        assert (fw.d, fw.n, fw.m) == (2, 1, 2)

    def test_offset_length_names_edge(self):
        doc = json.loads(json.dumps(GRID_DOC))
        doc["edges"][1]["l"] = [0, 1, 0]
        with pytest.raises(SchemaError) as exc:
            parse_framework(json.dumps(doc))
        assert exc.value.path == "edges[1].l"

    def test_string_rational(self):
        doc = json.loads(json.dumps(GRID_DOC))
        doc["joints"][0]["coords"] = ["1/3", "-2/7"]
        fw = parse_framework(json.dumps(doc))
        assert fw.joints[0].coords == (Fraction(1, 3), Fraction(-2, 7))

    def test_decimals_exact(self):
        text = json.dumps(GRID_DOC).replace('"coords": [0, 0]', '"coords": [0.5, 0.1]')
        fw = parse_framework(text)
        assert fw.joints[0].coords == (Fraction(1, 2), Fraction(1, 10))

    def test_bytes_accepted(self):
        assert parse_framework(json.dumps(GRID_DOC).encode()).n == 1

    @pytest.mark.parametrize("text", ["{", "[1, 2", "", "nope"])
    def test_malformed(self, text):
        with pytest.raises(FrameworkParseError):
            parse_framework(text)

    @pytest.mark.parametrize(
        "mutate, path",
        [
            (lambda d: d.pop("periods"), "periods"),
            (lambda d: d["joints"][0].update(coords=[0]), "joints[0].coords"),
            (lambda d: d["joints"][0].update(coords=["x", 0]), "joints[0].coords[0]"),
            (lambda d: d["edges"][0].update(k=[0.5, 0]), "edges[0].k[0]"),
            (lambda d: d["edges"][0].update(v=3), "edges[0].v"),
            (lambda d: d.update(dimension=True), "dimension"),
        ],
    )
    def test_schema_paths(self, mutate, path):
        doc = json.loads(json.dumps(GRID_DOC))
        mutate(doc)
        with pytest.raises(SchemaError) as exc:
            parse_framework(json.dumps(doc))
        assert exc.value.path == path

    def test_validation_failure_embeds_report(self):
        doc = json.loads(json.dumps(GRID_DOC))
        doc["edges"][0]["l"] = [0, 0]
        with pytest.raises(InvalidFrameworkError) as exc:
            parse_framework(json.dumps(doc))
        assert "zero-length bar" in exc.value.report.codes()
        assert parse_framework(json.dumps(doc), check=False).m == 2

    @pytest.mark.parametrize("name", GALLERY_NAMES)
    def test_gallery_round_trip(self, name):
        fw = gallery(name)
        assert parse_framework(serialize_framework(fw)) == fw

    @given(frameworks())
    def test_random_round_trip(self, fw):
        assert parse_framework(serialize_framework(fw)) == fw


class TestComplex:
    @pytest.mark.parametrize("text, value", [("1", 1), ("-1", -1), ("0+1i", 1j), ("2-3i", 2 - 3j), (" 1.5j ", 1.5j)])
    def test_parse(self, text, value):
        assert parse_complex(text) == value

    def test_omega(self):
        assert parse_omega("-1,1", 2) == (-1, 1)
        with pytest.raises(ValueError):
            parse_omega("1,1,1", 2)
        with pytest.raises(ValueError):
            parse_omega("0,1")

    def test_format(self):
        assert format_complex(-1 + 1e-17j) == "-1"
        assert format_complex(0.5 - 2j) == "0.5-2i"
        assert format_complex(1j) == "1i"

    def test_pgflex_round_trip(self, diag_grid):
        (f,) = pg_flex_space(diag_grid, (-1, 1), 0)
        g = pgflex_from_dict(json.loads(json.dumps(pgflex_to_dict(f))))
        assert g.omega == f.omega and np.array_equal(g.coeffs, f.coeffs)

    def test_window_listing(self, grid):
        from crystalflex.flexes import PGFlex

        f = PGFlex.constant((1, 1), np.array([1, 0]))
        lines = format_window_field(grid, f.window((0, 0), (1, 0))).splitlines()
        assert lines == ["# joint_id, cell k, velocity", "v, 0 0, 1 0", "v, 1 0, 1 0"]


class TestReport:
    def test_fields(self, diag_grid):
        rep = analysis_report(diag_grid, 1e-9).to_dict()
        assert list(rep) == ["framework", "spectrum", "verdict", "dimension", "tool_version", "tolerances"]
        assert rep["framework"] == {"name": diag_grid.name, "d": 2, "n": 2, "m": 5}
        assert rep["verdict"]["first_order_rigid"] == "flexible"
        assert rep["dimension"]["dim"] == 4
        assert rep["tolerances"]["rank"] == 1e-9
        assert rep["spectrum"]["tol"] == 1e-9


class TestCli:
    def test_rigidity_diag_grid(self, files):
        code, out, _ = run("rigidity", files["diag_grid"])
        assert code == 10
        (line,) = [ln for ln in out.splitlines() if "Gamma:" in ln]
        assert set(line.split("{")[1].rstrip("}").replace("), (", ");(").split(";")) == {"(1, 1)", "(-1, 1)"}

    def test_rigidity_json(self, files):
        code, out, _ = run("rigidity", files["diag_grid"], "--json")
        doc = json.loads(out)
        assert code == 10
        assert doc["first_order_rigid"] == "flexible"
        assert sorted(p["omega"] for p in doc["spectrum"]["points"]) == [["-1", "1"], ["1", "1"]]
        for key in ("gamma_trivial", "periodic_kernel_is_translations", "fper_rank_extremal", "psi_rank_extremal",
                    "certification"):
            assert key in doc

    def test_dimension_diag_grid(self, files):
        code, out, _ = run("dimension", files["diag_grid"])
        assert code == 0 and out.strip() == "4"

    def test_dimension_grid(self, files):
        assert run("dimension", files["grid"])[1].strip() == "infinite"

    def test_gallery_then_validate(self, tmp_path):
        p = str(tmp_path / "g.json")
        assert run("gallery", "grid", "--out", p)[0] == 0
        code, out, _ = run("validate", p)
        assert code == 0 and "valid" in out

    def test_gallery_stdout(self):
        code, out, _ = run("gallery", "kagome_rational")
        assert code == 0 and parse_framework(out) == gallery("kagome_rational")

    def test_rum_csv_byte_identical(self, files, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            assert run("rum", files["kagome_rational"], "--grid", "16", "--rational-order", "3", "--csv", str(p))[0] == 0
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text().startswith("omega_1_re,")

    def test_spectrum(self, files):
        code, out, _ = run("spectrum", files["grid"], "--json")
        assert code == 0 and json.loads(out)["finite"] == "infinite"

    def test_transfer(self, files):
        code, out, _ = run("transfer", files["grid"], "--json")
        assert code == 0 and json.loads(out)["shape"] == [2, 2]

    def test_flexes_negative_omega(self, files):
        code, out, _ = run("flexes", files["diag_grid"], "--omega", "-1,1", "--window", "2")
        assert code == 0
        assert out.startswith("1 pg-flexes at omega=(-1, 1)")
        # 2x2 cells, 2 joints
        assert len([ln for ln in out.splitlines() if ln[:1] in "ab"]) == 8

    def test_flexes_json(self, files):
        code, out, _ = run("flexes", files["grid"], "--omega=1,1", "--deg", "1", "--json")
        assert code == 0 and json.loads(out)["dimension"] >= 3

    def test_deterministic_output(self, files):
        assert run("spectrum", files["doubled3d"], "--seed", "3") == run("spectrum", files["doubled3d"], "--seed", "3")

    @pytest.mark.parametrize(
        "argv",
        [["bogus"], [], ["rum", "x.json"], ["dimension", "x.json", "--cap", "-1"], ["validate", "x", "--nope"],
         ["gallery", "honeycomb"]],
    )
    def test_usage_errors(self, argv):
        assert run(*argv)[0] == 2

    def test_bad_omega_is_usage(self, files):
        assert run("flexes", files["grid"], "--omega", "1,2,3")[0] == 2

    def test_missing_file(self, tmp_path):
        code, _, err = run("validate", str(tmp_path / "none.json"))
        assert code == 3 and "cannot read" in err

    def test_malformed_file(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert run("rigidity", str(p))[0] == 3

    def test_invalid_framework(self, tmp_path):
        doc = json.loads(json.dumps(GRID_DOC))
        doc["edges"][0]["l"] = [0, 0]
        p = tmp_path / "zero.json"
        p.write_text(json.dumps(doc))
        assert run("validate", str(p))[0] == 1
        assert run("rigidity", str(p))[0] == 1

    def test_help(self):
        assert run("--help")[0] == 0

    def test_internal_error_code(self, files, monkeypatch):
        import crystalflex.flexes as fl

        def boom(*a, **k):
            raise RuntimeError("invariant breach")

        monkeypatch.setattr(fl, "flex_space_dimension", boom)
        code, _, err = run("dimension", files["grid"])
        assert code == 70 and "invariant breach" in err
