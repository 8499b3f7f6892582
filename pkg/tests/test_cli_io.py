import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from reptile_array.cli import main
from reptile_array.geometry import Clustering, GridSpec
from reptile_array.io import ConfigError, config_from_dict, parse_config, read_clustering, write_clustering

FIG3 = [1, 1, 2, 2, 1, 3, 4, 2, 3, 3, 4, 4]

BASE = {
    "grid": {"rows": 8, "cols": 12},
    "order": 2,
    "q_max": 14,
    "mask": "reference",
    "reference": {"generator": "taper"},
    "resolution": 121,
    "scan": {"theta_max_deg": 10, "n_theta": 2, "n_phi": 4, "resolution": 81},
}


def write_config(tmp_path, **changes):
    d = json.loads(json.dumps(BASE))
    d.update(changes)
    path = tmp_path / "run.json"
    path.write_text(json.dumps(d))
    return path


def test_defaults(tmp_path):
    mask = {"bw_u": 0.5, "bw_v": 0.76, "default_level_db": -25}
    cfg = config_from_dict({"grid": {"rows": 8, "cols": 12}, "mask": mask, "reference": {}}, tmp_path)
    assert cfg.resolution == 301 and cfg.seed == 0
    assert cfg.grid == GridSpec(8, 12, 0.5, 0.5)
    assert cfg.mask.bw_v == 0.76


@pytest.mark.parametrize("change,needle", [
    ({"q_max": 33}, "q_max"),
    ({"bogus": 1}, "bogus"),
    ({"mask": "missing.json"}, "mask"),
    ({"resolution": 32}, "resolution"),
    ({"grid": {"rows": 8}}, "cols"),
    ({"reference": {"csv": "nope.csv"}}, "reference.csv"),
    ({"reference": {"generator": "taper", "steer_u": 0.9, "steer_v": 0.9}}, "steer"),
])
def test_config_errors(tmp_path, change, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config(write_config(tmp_path, **change))


def test_missing_mask_key(tmp_path):
    d = dict(BASE)
    del d["mask"]
    (tmp_path / "c.json").write_text(json.dumps(d))
    with pytest.raises(ConfigError, match="mask"):
        parse_config(tmp_path / "c.json")


def test_nested_key_path_reported(tmp_path):
    with pytest.raises(ConfigError, match=r"grid\.dx"):
        parse_config(write_config(tmp_path, grid={"rows": 8, "cols": 12, "dx": -1}))


def test_mask_file_and_relative_paths(tmp_path):
    (tmp_path / "m.json").write_text(json.dumps({"bw_u": 0.3, "bw_v": 0.3}))
    cfg = parse_config(write_config(tmp_path, mask="m.json", output="res"))
    assert cfg.mask.bw_u == 0.3 and cfg.output == tmp_path / "res"


def test_clustering_csv_round_trip(tmp_path):
    g = GridSpec(3, 4)
    c = Clustering.from_labels(g, FIG3)
    write_clustering(tmp_path / "c.csv", c)
    text = (tmp_path / "c.csv").read_text().splitlines()
    assert text[0] == "m,n,q" and text[1] == "1,1,1" and text[6] == "2,2,3"
    back = read_clustering(tmp_path / "c.csv", g)
    assert back == c and back.vector() == FIG3


def test_clustering_csv_rejects_non_partition(tmp_path):
    (tmp_path / "c.csv").write_text("m,n,q\n" + "\n".join(
        f"{i // 4 + 1},{i % 4 + 1},{1 if i < 3 else 2}" for i in range(12)))
    with pytest.raises(ValueError):
        read_clustering(tmp_path / "c.csv", GridSpec(3, 4))


def test_count_and_tileability():
    r = CliRunner()
    res = r.invoke(main, ["count", "4", "6"])
    assert res.exit_code == 0 and res.stdout.strip() == "18"
    res = r.invoke(main, ["count", "9", "9"])
    assert res.stdout.strip() == "1193600" and "1.19x10^6" in res.stderr
    res = r.invoke(main, ["tileability", "12", "20", "3"])
    assert res.exit_code == 3 and "ThreeByOdd" in res.stdout
    res = r.invoke(main, ["tileability", "12", "16", "3"])
    assert res.exit_code == 0 and res.stdout.startswith("tileable")
    res = r.invoke(main, ["count", "0", "3"])
    assert res.exit_code == 2 and json.loads(res.stderr)["error"] == "parameter"


def test_enumerate_command(tmp_path):
    r = CliRunner()
    res = r.invoke(main, ["enumerate", "8", "12", "--orders", "1,2", "--composition", "2:6,1:8"])
    assert res.exit_code == 0 and res.stdout.strip() == "6248"
    res = r.invoke(main, ["enumerate", "6", "6", "--max-solutions", "3"])
    assert res.exit_code == 4 and json.loads(res.stderr)["error"] == "truncated"
    res = r.invoke(main, ["enumerate", "4", "6", "--dump", str(tmp_path / "d.txt")])
    assert res.stdout.strip() == "18" and len((tmp_path / "d.txt").read_text().splitlines()) == 18
    res = r.invoke(main, ["enumerate", "6", "9", "--workers", "2"])
    assert res.stdout.strip() == "4312"


def _run(args):
    res = CliRunner().invoke(main, args)
    assert res.exit_code == 0, res.stderr
    return res


def test_synthesize_evaluate_scan(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "a"
    res = _run(["synthesize", str(cfg), "--out", str(out)])
    summary = json.loads(res.stdout)
    assert summary["H"] == 2 and summary["Q"] == 14 and summary["q_sequence"] == [8, 11, 14]
    trace = json.loads((out / "trace.json").read_text())
    assert [it["Q"] for it in trace["iterations"]] == [8, 11, 14]
    for name in ["pareto.csv", "pareto.png", "clustering_final.csv", "clustering_h000.png",
                 "final_cuts.png", "final_pattern.png", "final_cut_u.csv", "final_cut_v.csv",
                 "final_pattern.csv", "final_metrics.json", "excitations_final.csv"]:
        assert (out / name).exists(), name
    assert (out / "pareto.csv").read_text().splitlines()[0] == "Q,gamma"

    res = _run(["evaluate", str(cfg), "--clustering", str(out / "clustering_final.csv"),
                "--excitations", str(out / "excitations_final.csv"), "--out", str(tmp_path / "e")])
    metrics = json.loads(res.stdout)
    for key in ("sll_db", "directivity_db", "hpbw_az_deg", "hpbw_el_deg", "gamma"):
        assert metrics[key] is not None
    assert metrics["gamma"] == pytest.approx(summary["gamma"])

    res = _run(["scan", str(cfg), "--clustering", str(out / "clustering_final.csv"), "--out", str(tmp_path / "s")])
    stats = json.loads(res.stdout)
    assert stats["samples"] == 8
    rows = (tmp_path / "s" / "scan_sll.csv").read_text().splitlines()
    assert rows[0] == "theta_deg,phi_deg,sll_db" and len(rows) == 9
    assert (tmp_path / "s" / "scan_sll.png").exists()


def test_outputs_are_byte_identical(tmp_path):
    cfg = write_config(tmp_path)
    _run(["synthesize", str(cfg), "--out", str(tmp_path / "x")])
    _run(["synthesize", str(cfg), "--out", str(tmp_path / "y")])
    names = sorted(p.name for p in (tmp_path / "x").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "y").iterdir())
    for n in names:
        assert (tmp_path / "x" / n).read_bytes() == (tmp_path / "y" / n).read_bytes(), n


def test_config_error_exit(tmp_path):
    res = CliRunner().invoke(main, ["synthesize", str(write_config(tmp_path, q_max=99))])
    assert res.exit_code == 2
    err = json.loads(res.stderr)
    assert err["error"] == "config" and "q_max" in err["message"]


def test_synthesize_untileable(tmp_path):
    res = CliRunner().invoke(main, ["synthesize", str(write_config(tmp_path, grid={"rows": 12, "cols": 20},
                                                                   order=3, q_max=20))])
    assert res.exit_code == 3


def test_shipped_configs_parse():
    root = Path(__file__).resolve().parents[1] / "configs"
    for p in root.glob("*_r*.json"):
        assert parse_config(p).grid.size > 0
