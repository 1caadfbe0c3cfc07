import json

import numpy as np
import pytest

from conftest import octagon_measure
from logmink import DiscreteSphericalMeasure, generate_group
from logmink import serialize
from logmink.cli import main
from logmink.errors import SerializationError


class TestRoundTrips:
    def test_body(self, unit_square):
        text = serialize.canonical_dumps(serialize.body_to_dict(unit_square))
        back = serialize.body_from_dict(json.loads(text))
        assert np.max(np.abs(back.normals - unit_square.normals)) < 1e-12
        assert np.max(np.abs(back.supports - unit_square.supports)) < 1e-12
        assert serialize.canonical_dumps(serialize.body_to_dict(back)) == text

    def test_measure(self):
        mu = octagon_measure(0.15, 0.10)
        text = serialize.canonical_dumps(serialize.measure_to_dict(mu))
        back = serialize.measure_from_dict(json.loads(text))
        assert np.max(np.abs(back.dirs - mu.dirs)) < 1e-12
        assert np.max(np.abs(back.weights - mu.weights)) < 1e-12

    def test_group(self, dihedral_8):
        text = serialize.canonical_dumps(serialize.group_to_dict(dihedral_8))
        back = serialize.group_from_dict(json.loads(text))
        assert back.order == 8

    def test_body_from_vertices(self):
        data = {"vertices": [[0.5, 0.5], [0.5, -0.5], [-0.5, 0.5], [-0.5, -0.5]]}
        body = serialize.body_from_dict(data)
        assert body.n_facets == 4
        assert np.allclose(sorted(body.supports), 0.5)

    def test_vertices_must_enclose_origin(self):
        data = {"vertices": [[1.0, 1.0], [2.0, 1.0], [1.0, 2.0]]}
        with pytest.raises(SerializationError):
            serialize.body_from_dict(data)

    def test_missing_field(self):
        with pytest.raises(SerializationError):
            serialize.measure_from_dict({"dim": 2})

    def test_bad_json_text(self):
        with pytest.raises(SerializationError):
            serialize.loads("{nope")


@pytest.fixture
def workdir(tmp_path, unit_square, coord_group_2):
    mu = DiscreteSphericalMeasure.from_atoms(
        2, [[1, 0], [-1, 0], [0, 1], [0, -1]], [0.25] * 4
    )
    paths = {
        "measure": tmp_path / "mu.json",
        "group": tmp_path / "group.json",
        "body": tmp_path / "body.json",
        "dir": tmp_path,
    }
    paths["measure"].write_text(
        serialize.canonical_dumps(serialize.measure_to_dict(mu))
    )
    paths["group"].write_text(
        serialize.canonical_dumps(serialize.group_to_dict(coord_group_2))
    )
    paths["body"].write_text(serialize.canonical_dumps(serialize.body_to_dict(unit_square)))
    return paths


class TestCli:
    def test_solve_writes_report(self, workdir):
        out = workdir["dir"] / "report.json"
        rc = main(
            ["solve", str(workdir["measure"]), str(workdir["group"]), "--out", str(out)]
        )
        assert rc == 0
        report = json.loads(out.read_text())
        assert np.allclose(report["body"]["supports"], 0.5)
        assert report["degenerate"] is True

    def test_solve_condition_violated_exit_code(self, workdir):
        bad = DiscreteSphericalMeasure.from_atoms(
            2, [[1, 0], [-1, 0], [0, 1], [0, -1]], [0.3, 0.3, 0.2, 0.2]
        )
        bad_path = workdir["dir"] / "bad.json"
        bad_path.write_text(serialize.canonical_dumps(serialize.measure_to_dict(bad)))
        assert main(["solve", str(bad_path), str(workdir["group"])]) == 3

    def test_parse_error_exit_code(self, workdir):
        junk = workdir["dir"] / "junk.json"
        junk.write_text("{not json")
        assert main(["solve", str(junk), str(workdir["group"])]) == 2

    def test_missing_file_exit_code(self, workdir):
        assert main(["solve", "/nonexistent.json", str(workdir["group"])]) == 2

    def test_distance_identical_is_zero(self, workdir, capsys):
        rc = main(["distance", "wasserstein", str(workdir["measure"]), str(workdir["measure"])])
        assert rc == 0
        assert float(capsys.readouterr().out.strip()) == 0.0

    def test_distance_axis_pairs(self, workdir, capsys):
        mu = DiscreteSphericalMeasure.from_atoms(2, [[1, 0], [-1, 0]], [0.5, 0.5])
        nu = DiscreteSphericalMeasure.from_atoms(2, [[0, 1], [0, -1]], [0.5, 0.5])
        pa = workdir["dir"] / "a.json"
        pb = workdir["dir"] / "b.json"
        pa.write_text(serialize.canonical_dumps(serialize.measure_to_dict(mu)))
        pb.write_text(serialize.canonical_dumps(serialize.measure_to_dict(nu)))
        assert main(["distance", "wasserstein", str(pa), str(pb)]) == 0
        value = float(capsys.readouterr().out.strip())
        assert value == pytest.approx(np.sqrt(2), abs=1e-9)

    def test_distance_mass_mismatch_mentions_bl(self, workdir, capsys):
        nu = DiscreteSphericalMeasure.from_atoms(2, [[1, 0], [-1, 0]], [0.5, 0.6])
        pb = workdir["dir"] / "heavier.json"
        pb.write_text(serialize.canonical_dumps(serialize.measure_to_dict(nu)))
        rc = main(["distance", "wasserstein", str(workdir["measure"]), str(pb)])
        assert rc == 1
        assert "bounded-Lipschitz" in capsys.readouterr().err

    def test_hausdorff_between_bodies(self, workdir, capsys):
        big = workdir["dir"] / "big.json"
        body = serialize.body_from_dict(json.loads(workdir["body"].read_text()))
        big.write_text(serialize.canonical_dumps(serialize.body_to_dict(body.scale(2.0))))
        assert main(["distance", "hausdorff", str(workdir["body"]), str(big)]) == 0
        value = float(capsys.readouterr().out.strip())
        assert value == pytest.approx(np.sqrt(2) / 2, abs=1e-9)

    def test_check_scc_verdict(self, workdir):
        out = workdir["dir"] / "scc.json"
        rc = main(
            ["check-scc", str(workdir["measure"]), str(workdir["group"]), "--out", str(out)]
        )
        assert rc == 0
        assert json.loads(out.read_text())["verdict"] == "equality"

    def test_construct_chopped_cube(self, workdir):
        out = workdir["dir"] / "chopped.json"
        assert main(["construct", "chopped-cube", "--n", "2", "--eps", "0.01", "--out", str(out)]) == 0
        body = serialize.body_from_dict(json.loads(out.read_text()))
        assert body.n_facets == 8

    def test_construct_mu0(self, workdir):
        out = workdir["dir"] / "mu0.json"
        assert main(["construct", "mu0", "--n", "3", "--axis", "2", "--out", str(out)]) == 0
        mu = serialize.measure_from_dict(json.loads(out.read_text()))
        assert mu.n_atoms == 2
        assert mu.total_mass() == pytest.approx(1.0)

    def test_conevol_csv(self, workdir, capsys):
        assert main(["conevol", str(workdir["body"]), "--format", "csv"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "u,w"
        assert len(lines) == 5

    def test_group_order_cap_env(self, workdir, monkeypatch):
        theta = 1.0
        normals = [[1.0, 0.0], [-np.sin(theta), np.cos(theta)]]
        gpath = workdir["dir"] / "wild.json"
        gpath.write_text(
            serialize.canonical_dumps({"dim": 2, "generator_normals": normals})
        )
        monkeypatch.setenv("LOGMINK_MAX_GROUP_ORDER", "32")
        assert main(["check-scc", str(workdir["measure"]), str(gpath)]) == 6

    def test_experiment_deterministic_output(self, workdir):
        out_a = workdir["dir"] / "qt_a.csv"
        out_b = workdir["dir"] / "qt_b.csv"
        assert main(["experiment", "qt", "--out", str(out_a), "--seed", "3"]) == 0
        assert main(["experiment", "qt", "--out", str(out_b), "--seed", "3"]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()
        with open(str(out_a) + ".inputs.json") as fh:
            inputs = json.load(fh)
        assert len(inputs) == 5

    def test_max_iter_exit_code(self, workdir):
        oct_path = workdir["dir"] / "oct.json"
        oct_path.write_text(
            serialize.canonical_dumps(
                serialize.measure_to_dict(octagon_measure(0.15, 0.10))
            )
        )
        g8 = generate_group([[1.0, 0.0], [-np.sin(np.pi / 4), np.cos(np.pi / 4)]])
        g8_path = workdir["dir"] / "dihedral.json"
        g8_path.write_text(serialize.canonical_dumps(serialize.group_to_dict(g8)))
        rc = main(
            [
                "solve", str(oct_path), str(g8_path),
                "--tol", "1e-13", "--max-iter", "2",
            ]
        )
        assert rc == 5

    def test_constants_command(self, workdir, capsys):
        rc = main(["constants", "--n", "2", "--delta", "0.1", "--tau", "0.25"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["R0"] == pytest.approx(1.6777216e11, rel=1e-6)
