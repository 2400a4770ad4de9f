import json

import pytest
from click.testing import CliRunner

from zdcubes.cli import detect_kind, main
from zdcubes.errors import InputError

runner = CliRunner()


def _invoke(args):
    res = runner.invoke(main, args)
    try:
        payload = json.loads(res.output)
    except json.JSONDecodeError:
        payload = None
    return res.exit_code, payload, res.output


def _path(fixture_dir, name):
    return str(fixture_dir / name)


# ---------------------------------------------------------------------------
# kind sniffing


def test_detect_kind():
    assert detect_kind("finite-system\npoints = 1\n") == "finite-system"
    assert detect_kind("# comment\nperiodic-set k=1 moduli=2\n") == "periodic-set"
    assert detect_kind("cube-set d=1 dirs=1\n") == "cube-set"
    with pytest.raises(InputError):
        detect_kind("mystery-format\n")
    with pytest.raises(InputError):
        detect_kind("   \n# only comments\n")


# ---------------------------------------------------------------------------
# validate


def test_validate_fixture(fixture_dir):
    code, rep, _ = _invoke(["validate", _path(fixture_dir, "rot6.fsys")])
    assert code == 0
    assert rep["valid"] and rep["minimal"]
    assert rep["orders"] == [6, 3]


def test_validate_affine(fixture_dir):
    code, rep, _ = _invoke(["validate", _path(fixture_dir, "example83.affine")])
    assert code == 0
    assert rep["valid"]
    assert rep["kind"] == "affine-system"


def test_validate_all_artifact_kinds(fixture_dir, tmp_path, systems):
    # one file of each serialized kind must validate cleanly
    from zdcubes.cube_engine import enumerate_Q
    from zdcubes.finite_system import PairRelation

    cs = enumerate_Q(systems["rot6"], (1, 2))
    cube_file = tmp_path / "q.cubes"
    cube_file.write_text(cs.to_text())
    rel_file = tmp_path / "diag.rel"
    rel_file.write_text(PairRelation.diagonal(4).to_text())
    for p in (_path(fixture_dir, "rot6.fsys"),
              _path(fixture_dir, "example83.affine"),
              _path(fixture_dir, "parityB1.pset"),
              str(cube_file), str(rel_file)):
        code, rep, _ = _invoke(["validate", p])
        assert code == 0, p
        assert rep["valid"], p


def test_validate_non_commuting_exits_1(tmp_path):
    bad = tmp_path / "bad.fsys"
    bad.write_text("finite-system\npoints = 3\nd = 2\n"
                   "T1 = [1, 2, 0]\nT2 = [1, 0, 2]\n")
    code, rep, _ = _invoke(["validate", str(bad)])
    assert code == 1
    assert not rep["valid"]
    assert rep["witness"] is not None


def test_validate_missing_file_exits_3(tmp_path):
    code, rep, _ = _invoke(["validate", str(tmp_path / "nope.fsys")])
    assert code == 3
    assert rep["status"] == "input-error"


def test_validate_malformed_exits_3(tmp_path):
    bad = tmp_path / "bad.fsys"
    bad.write_text("finite-system\npoints = 2\nd = 1\nT1 = [1, zap]\n")
    code, rep, _ = _invoke(["validate", str(bad)])
    assert code == 3
    assert rep["status"] == "input-error"


# ---------------------------------------------------------------------------
# analysis subcommands


def test_cubes_census(fixture_dir, oracle):
    code, rep, _ = _invoke(["cubes", _path(fixture_dir, "rot6.fsys"),
                            "--basepoint", "0"])
    assert code == 0
    want = oracle["fixtures"]["rot6"]
    assert rep["Q_size"] == want["Q_size"]
    assert rep["Q_sha256"] == want["Q_sha256"]
    assert rep["K_size"] == want["K0_size"]
    assert rep["K_sha256"] == want["K0_sha256"]


def test_cubes_dump_round_trips(fixture_dir, tmp_path, oracle):
    code, rep, _ = _invoke(["cubes", _path(fixture_dir, "rot6.fsys"),
                            "--basepoint", "0", "--dump"])
    assert code == 0
    assert rep["Q_text"] == oracle["rot6_Q_text"]
    from zdcubes.cube_engine import CubeSet

    q = CubeSet.from_text(rep["Q_text"])
    k = CubeSet.from_text(rep["K_text"])
    assert len(q) == rep["Q_size"]
    assert len(k) == rep["K_size"]
    assert k.based


def test_ucpp_on_system_and_cube_file(fixture_dir, tmp_path, systems):
    code, rep, _ = _invoke(["ucpp", _path(fixture_dir, "rot6.fsys")])
    assert code == 0 and rep["ucpp"]
    # the same verdict from a dumped cube-set file
    from zdcubes.cube_engine import enumerate_Q

    f = tmp_path / "q.cubes"
    f.write_text(enumerate_Q(systems["rot6"], (1, 2)).to_text())
    code, rep, _ = _invoke(["ucpp", str(f)])
    assert code == 0 and rep["ucpp"]


def test_ucpp_failure_carries_witness(tmp_path):
    f = tmp_path / "bad.cubes"
    f.write_text("cube-set d=2 dirs=1,2\n0,0,0,0\n0,0,0,1\n")
    code, rep, _ = _invoke(["ucpp", str(f)])
    assert code == 1
    assert not rep["ucpp"]
    assert rep["witness"]["vertex"] == 3
    assert rep["witness"]["pair"] == [[0, 0, 0, 0], [0, 0, 0, 1]]


def test_rpp_pass(fixture_dir):
    code, rep, _ = _invoke(["rpp", _path(fixture_dir, "rot6.fsys")])
    assert code == 0
    assert rep["is_diagonal"]
    assert rep["five_way_agreement"]
    assert rep["equivalence"]


def test_rpp_nonminimal_exits_2(fixture_dir):
    code, rep, _ = _invoke(["rpp", _path(fixture_dir, "nonmin_z4z2.fsys")])
    assert code == 2
    assert rep["status"] == "hypotheses-unmet"


def test_quotient_rpp(fixture_dir):
    code, rep, _ = _invoke(["quotient", _path(fixture_dir, "rot6.fsys")])
    assert code == 0
    assert rep["classes"] == 6  # diagonal relation, trivial quotient
    assert rep["factor_map_ok"]


def test_quotient_qh(fixture_dir, oracle):
    code, rep, _ = _invoke(["quotient", _path(fixture_dir, "rot6.fsys"),
                            "--relation", "qh", "--gens", "2"])
    assert code == 0
    assert rep["classes"] == len(oracle["rot6_quotient_by_QT2_classes"])
    assert rep["mapping"] == [0, 1, 0, 1, 0, 1]


def test_quotient_qh_needs_gens(fixture_dir):
    code, rep, _ = _invoke(["quotient", _path(fixture_dir, "rot6.fsys"),
                            "--relation", "qh"])
    assert code == 3
    assert rep["status"] == "input-error"


def test_structure_report(fixture_dir, oracle):
    code, rep, _ = _invoke(["structure", _path(fixture_dir, "rot6.fsys")])
    assert code == 0
    want = oracle["rot6_decomposition"]
    assert rep["K_size"] == want["Y"]
    assert sorted(rep["side_sizes"]) == sorted([want["Y_1"], want["Y_2"]])
    assert rep["injective"]
    assert rep["relative_independence"] == "pass"


def test_structure_nonminimal_exits_2(fixture_dir):
    code, rep, _ = _invoke(["structure",
                            _path(fixture_dir, "nonmin_z4z2.fsys")])
    assert code == 2
    assert rep["status"] == "hypotheses-unmet"


def test_affine_check(fixture_dir):
    code, rep, _ = _invoke(["affine-check",
                            _path(fixture_dir, "example83.affine")])
    assert code == 0
    assert rep["conditions_ok"]
    # jordan3 is valid but fails the matrix conditions: still exit 0
    code, rep, _ = _invoke(["affine-check",
                            _path(fixture_dir, "jordan3.affine")])
    assert code == 0
    assert rep["valid"]
    assert not rep["conditions_ok"]


def test_formula_test_pass_and_witness(fixture_dir):
    code, rep, _ = _invoke(["formula-test",
                            _path(fixture_dir, "example83.affine")])
    assert code == 0
    assert rep["result"] == "pass"
    code, rep, _ = _invoke(["formula-test",
                            _path(fixture_dir, "jordan3.affine")])
    assert code == 1
    assert rep["result"] == "witness"
    assert rep["witness"]["iterated"] != rep["witness"]["closed_form"]


def test_discretize_writes_valid_system(fixture_dir, tmp_path):
    out = tmp_path / "disc.fsys"
    code, rep, _ = _invoke(["discretize",
                            _path(fixture_dir, "example83.affine"),
                            "-o", str(out)])
    assert code == 0
    assert rep["points"] == 25
    code2, rep2, _ = _invoke(["validate", str(out)])
    assert code2 == 0 and rep2["valid"]


def test_return_times_oracle(fixture_dir, oracle):
    code, rep, _ = _invoke(["return-times", _path(fixture_dir, "rot6.fsys"),
                            "--point", "0"])
    assert code == 0
    want = oracle["rot6_return_set_x0_U0"]
    assert rep["moduli"] == want["moduli"]
    assert rep["residues"] == want["residues"]


def test_return_times_with_target(fixture_dir):
    code, rep, _ = _invoke(["return-times", _path(fixture_dir, "rot6.fsys"),
                            "--point", "0", "--target", "0,1"])
    assert code == 0
    assert [1, 0] in rep["residues"]


def test_joining_command(tmp_path):
    a = tmp_path / "a.pset"
    a.write_text("periodic-set k=1 moduli=3\n0\n1\n")
    b = tmp_path / "b.pset"
    b.write_text("periodic-set k=1 moduli=2\n1\n")
    code, rep, _ = _invoke(["joining", str(a), str(b)])
    assert code == 0
    assert rep["d"] == 2
    # first coordinate constrained by the second input, and vice versa
    from zdcubes.return_times import PeriodicSet, d_joining

    b1 = PeriodicSet.from_text(a.read_text())
    b2 = PeriodicSet.from_text(b.read_text())
    assert rep["set_text"] == d_joining([b1, b2]).to_text()


def test_joining_parity_files_is_empty(fixture_dir, tmp_path, oracle):
    b3 = tmp_path / "b3.pset"
    b3.write_text("periodic-set k=2 moduli=2,2\n0,0\n1,1\n")
    code, rep, _ = _invoke(["joining", _path(fixture_dir, "parityB1.pset"),
                            _path(fixture_dir, "parityB2.pset"), str(b3)])
    assert code == 0
    assert rep["d"] == 3
    assert rep["empty"] == oracle["parity3_joining_empty"]


def test_joining_rejects_wrong_kind(fixture_dir):
    code, rep, _ = _invoke(["joining", _path(fixture_dir, "rot6.fsys"),
                            _path(fixture_dir, "parityB1.pset")])
    assert code == 3


# ---------------------------------------------------------------------------
# verify


def test_verify_system(fixture_dir):
    code, rep, _ = _invoke(["verify", _path(fixture_dir, "rot6.fsys")])
    assert code == 0
    assert rep["counts"]["fail"] == 0
    names = [c["check"] for c in rep["checks"]]
    for expected in ("roundtrip", "census", "ucpp", "glue_closure",
                     "five_way_agreement", "joining_containment",
                     "product_realization"):
        assert expected in names, expected


def test_verify_skips_hypothesis_gated_checks_on_nonminimal(fixture_dir):
    code, rep, _ = _invoke(["verify", _path(fixture_dir, "nonmin_z4z2.fsys")])
    assert code == 0
    assert rep["counts"]["fail"] == 0
    assert rep["counts"]["skipped"] > 0
    by_name = {c["check"]: c for c in rep["checks"]}
    assert by_name["five_way_agreement"]["status"] == "skipped"


def test_verify_affine_and_pset(fixture_dir):
    for name in ("example83.affine", "jordan3.affine", "parityB1.pset"):
        code, rep, _ = _invoke(["verify", _path(fixture_dir, name)])
        assert code == 0, name
        assert rep["counts"]["fail"] == 0, name


def test_verify_thread_count_never_changes_bytes(fixture_dir):
    for name in ("rot6.fsys", "rot8_d3.fsys", "example83.affine"):
        outs = []
        for t in ("1", "8"):
            res = runner.invoke(main, ["verify", _path(fixture_dir, name),
                                       "--threads", t])
            assert res.exit_code == 0
            outs.append(res.output)
        assert outs[0] == outs[1], name


# ---------------------------------------------------------------------------
# output contract


def test_json_is_sorted_and_deterministic(fixture_dir):
    res1 = runner.invoke(main, ["cubes", _path(fixture_dir, "rot6.fsys")])
    res2 = runner.invoke(main, ["cubes", _path(fixture_dir, "rot6.fsys")])
    assert res1.output == res2.output
    rep = json.loads(res1.output)
    assert list(rep) == sorted(rep)


def test_timings_only_under_flag(fixture_dir):
    code, rep, _ = _invoke(["ucpp", _path(fixture_dir, "rot6.fsys")])
    assert "timings" not in rep
    code, rep, _ = _invoke(["ucpp", _path(fixture_dir, "rot6.fsys"),
                            "--timings"])
    assert "timings" in rep
    assert rep["timings"]["seconds"] >= 0
    # thread count is never echoed into the report
    code, rep, _ = _invoke(["ucpp", _path(fixture_dir, "rot6.fsys"),
                            "--threads", "4"])
    assert "threads" not in json.dumps(rep)


def test_human_output(fixture_dir):
    res = runner.invoke(main, ["verify", _path(fixture_dir, "rot6.fsys"),
                               "--human"])
    assert res.exit_code == 0
    assert "PASS" in res.output
    assert "census" in res.output
    with pytest.raises(json.JSONDecodeError):
        json.loads(res.output)
