import csv
import json
from fractions import Fraction

import pytest

from haloslopes.charpoly import CharSeries
from haloslopes.cli import CHECKS, ExperimentConfig, load_config, main
from haloslopes.padic_core import BadArgument
from haloslopes.up_operator import Ingested, Synthetic

BASE = {
    "p": "3",
    "t": "1",
    "N": "40",
    "M_T": "20",
    "r": "5",
    "D": "6",
    "omega_exponent": "0",
    "vT": ["1/3", "1/4"],
    "source": {"seed": "1"},
    "scale": "smoke",
}

CHEAP = "lambda-closed-form,vertical-gap,non-compactness,checker-fault-detection"


def write_config(tmp_path, name="cfg.json", **overrides):
    obj = dict(BASE, **overrides)
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- config parsing -----------------------------------------------------------


def test_load_config_decimal_strings(tmp_path):
    cfg = load_config(write_config(tmp_path))
    assert (cfg.p, cfg.t, cfg.N, cfg.M_T, cfg.r, cfg.D) == (3, 1, 40, 20, 5, 6)
    assert cfg.q == 3
    assert cfg.vT == (Fraction(1, 3), Fraction(1, 4))
    assert cfg.source == Synthetic(1)


def test_load_config_overrides(tmp_path):
    cfg = load_config(write_config(tmp_path), seed=9, out="elsewhere")
    assert cfg.source == Synthetic(9)
    assert cfg.out_dir == "elsewhere"


def test_load_config_file_source(tmp_path):
    cfg = load_config(write_config(tmp_path, source={"file": "op.json"}))
    assert cfg.source == Ingested("op.json")


def test_load_config_rejects_bare_numbers(tmp_path):
    with pytest.raises(BadArgument):
        load_config(write_config(tmp_path, p=3))


def test_load_config_missing_field(tmp_path):
    obj = dict(BASE)
    del obj["t"]
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(obj))
    with pytest.raises(BadArgument):
        load_config(str(path))


def test_config_rejects_vt_outside_unit_interval():
    with pytest.raises(BadArgument):
        ExperimentConfig(
            3, 1, 40, 20, 5, 6, 0, (Fraction(3, 2),), Synthetic(1), "o", (), "smoke"
        )


def test_q_derivation():
    cfg = ExperimentConfig(
        2, 1, 40, 20, 5, 6, 0, (Fraction(1, 2),), Synthetic(1), "o", (), "smoke"
    )
    assert cfg.q == 4


# -- exit codes ---------------------------------------------------------------


def test_unparseable_config_exits_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("not json")
    assert main(["matrix", "--config", str(path)]) == 2


def test_missing_config_exits_2(tmp_path):
    assert main(["matrix", "--config", str(tmp_path / "absent.json")]) == 2


def test_invalid_operator_file_exits_2(tmp_path):
    op = tmp_path / "op.json"
    op.write_text("{}")
    cfg = write_config(tmp_path, source={"file": str(op)})
    assert main(["charpoly", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_starved_precision_exits_3(tmp_path):
    cfg = write_config(tmp_path, N="6")
    assert main(["charpoly", "--config", cfg, "--out", str(tmp_path / "o")]) == 3


def test_unknown_check_exits_2(tmp_path):
    cfg = write_config(tmp_path)
    args = ["verify", "--config", cfg, "--out", str(tmp_path / "o")]
    assert main(args + ["--only", "no-such-check"]) == 2


def test_injected_fault_exits_1(tmp_path, capsys):
    cfg = write_config(tmp_path)
    args = ["verify", "--config", cfg, "--out", str(tmp_path / "o")]
    code = main(args + ["--only", "vertical-gap", "--inject-fault", "vertical-gap"])
    assert code == 1
    assert "FAIL vertical-gap" in capsys.readouterr().out


# -- matrix -------------------------------------------------------------------


def test_matrix_writes_certified_bounds(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "m"
    assert main(["matrix", "--config", cfg, "--out", str(out)]) == 0
    rows = read_rows(out / "bounds.csv")
    assert rows and all(r["ok"] == "1" for r in rows)
    blob = json.loads((out / "matrix.json").read_text())
    assert blob["rescaled"] is False
    assert int(blob["size"]) ** 2 == len(rows)


def test_matrix_rescale_flag(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "m"
    assert main(["matrix", "--config", cfg, "--out", str(out), "--rescale"]) == 0
    blob = json.loads((out / "matrix.json").read_text())
    assert blob["rescaled"] is True
    for r in read_rows(out / "bounds.csv"):
        col = int(r["col"])
        assert int(r["required"]) == col // 1 - col // 3
        assert r["ok"] == "1"


# -- charpoly -----------------------------------------------------------------


def test_charpoly_roundtrips_and_margins(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "c"
    assert main(["charpoly", "--config", cfg, "--out", str(out)]) == 0
    blob = json.loads((out / "charpoly.json").read_text())
    cs = CharSeries.from_json(blob["series"])
    assert cs.degree == 6 and cs.r == 5
    rows = read_rows(out / "charbound.csv")
    assert len(rows) == 7
    assert all(int(r["margin"]) >= 0 for r in rows)


def test_charpoly_degree_zero_is_unit_series(tmp_path):
    cfg = write_config(tmp_path, D="0")
    out = tmp_path / "c"
    assert main(["charpoly", "--config", cfg, "--out", str(out)]) == 0
    rows = read_rows(out / "charbound.csv")
    assert len(rows) == 1 and rows[0]["halo_order"] == "0"


def test_seed_flag_changes_series(tmp_path):
    cfg = write_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["charpoly", "--config", cfg, "--out", str(a)]) == 0
    assert main(["charpoly", "--config", cfg, "--out", str(b), "--seed", "3"]) == 0
    assert (a / "charpoly.json").read_text() != (b / "charpoly.json").read_text()


# -- polygon ------------------------------------------------------------------


def test_polygon_outputs_parse_back(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "p"
    assert main(["polygon", "--config", cfg, "--out", str(out)]) == 0
    for slug in ("1_3", "1_4"):
        verts = read_rows(out / f"polygon_{slug}.csv")
        assert Fraction(verts[0]["ordinate"]) == 0
        slopes = read_rows(out / f"slopes_{slug}.csv")
        # every row parses back into the originating rational values
        for r in slopes:
            Fraction(r["slope"]), Fraction(r["ratio"])
            assert r["interval"][0] in "([" and r["interval"][-1] in ")]"
        overlay = read_rows(out / f"overlay_{slug}.csv")
        for r in overlay:
            assert Fraction(r["lower"]) <= Fraction(r["polygon"])
    gap = read_rows(out / "gap.csv")
    assert [Fraction(r["max_gap"]) for r in gap] == [Fraction(1, 3), Fraction(1, 4)]


def test_polygon_rigidity_table_all_equal(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "p"
    assert main(["polygon", "--config", cfg, "--out", str(out)]) == 0
    rows = read_rows(out / "rigidity.csv")
    assert rows and all(r["equal"] == "1" for r in rows)
    assert rows[0]["ratio_1_3"] == rows[0]["ratio_1_4"]


def test_polygon_single_radius_skips_rigidity(tmp_path):
    cfg = write_config(tmp_path, vT=["1/2"])
    out = tmp_path / "p"
    assert main(["polygon", "--config", cfg, "--out", str(out)]) == 0
    assert not (out / "rigidity.csv").exists()
    assert (out / "polygon_1_2.csv").exists()


# -- verify -------------------------------------------------------------------


def test_verify_only_filters_ledger(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "v"
    code = main(["verify", "--config", cfg, "--out", str(out), "--only", CHEAP])
    assert code == 0
    text = (out / "verify.txt").read_text()
    assert text == capsys.readouterr().out
    lines = text.strip().splitlines()
    assert len(lines) == 5
    assert lines[-1] == "result: 4/4 checks passed"
    assert all(line.startswith("PASS ") for line in lines[:-1])


def test_verify_checks_from_config(tmp_path, capsys):
    cfg = write_config(tmp_path, checks=["non-compactness"])
    out = tmp_path / "v"
    assert main(["verify", "--config", cfg, "--out", str(out)]) == 0
    assert "result: 1/1" in capsys.readouterr().out


def test_verify_ledger_is_deterministic(tmp_path, capsys):
    cfg = write_config(tmp_path)
    outs = []
    for name in ("v1", "v2"):
        out = tmp_path / name
        assert main(["verify", "--config", cfg, "--out", str(out), "--only", CHEAP]) == 0
        outs.append((out / "verify.txt").read_bytes())
    assert outs[0] == outs[1]


def test_polygon_outputs_are_byte_identical(tmp_path):
    cfg = write_config(tmp_path)
    trees = []
    for name in ("p1", "p2"):
        out = tmp_path / name
        assert main(["polygon", "--config", cfg, "--out", str(out)]) == 0
        trees.append({f.name: f.read_bytes() for f in sorted(out.iterdir())})
    assert trees[0] == trees[1]


def test_every_check_has_a_detectable_fault(tmp_path, capsys):
    """The fault hook flips each cheap check to FAIL, never to an exception."""
    cfg = write_config(tmp_path)
    for name in CHEAP.split(","):
        out = tmp_path / f"f_{name}"
        args = ["verify", "--config", cfg, "--out", str(out)]
        assert main(args + ["--only", name, "--inject-fault", name]) == 1
        assert f"FAIL {name}" in capsys.readouterr().out


def test_check_registry_names_are_unique():
    names = [name for name, _fn in CHECKS]
    assert len(names) == len(set(names)) == 14
