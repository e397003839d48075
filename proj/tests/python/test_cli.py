import csv
import hashlib
import json
import math
import os
import subprocess
from pathlib import Path

import jsonschema
import pytest

CLI = os.environ.get("TGQM_CLI", "tgqm")
ROOT = Path(os.environ.get("TGQM_ROOT", Path(__file__).resolve().parents[2]))
SCHEMAS = ROOT / "schemas"


def run(*args, env=None):
    full_env = dict(os.environ)
    full_env.pop("TGQM_THREADS", None)
    if env:
        full_env.update(env)
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, env=full_env)


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def validate(name, text):
    doc = json.loads(text)
    jsonschema.validate(doc, schema(name))
    return doc


def sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_icosphere(path, radius, level=3):
    t = (1 + 5 ** 0.5) / 2
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
             (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    verts = [tuple(c / math.sqrt(sum(x * x for x in v)) for c in v) for v in verts]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    for _ in range(level):
        cache = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = [(verts[a][k] + verts[b][k]) / 2 for k in range(3)]
                n = math.sqrt(sum(x * x for x in m))
                verts.append(tuple(x / n for x in m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    with open(path, "w") as f:
        f.write(f"OFF\n{len(verts)} {len(faces)} 0\n")
        for v in verts:
            f.write(" ".join(repr(radius * c) for c in v) + "\n")
        for a, b, c in faces:
            f.write(f"3 {a} {b} {c}\n")


@pytest.fixture(scope="module")
def sphere(tmp_path_factory):
    p = tmp_path_factory.mktemp("mesh") / "sphere.off"
    write_icosphere(p, 0.04)
    return p


@pytest.fixture(scope="module")
def knife_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("knife") / "knife.csv"
    r = run("sample", "--object", "knife", "--out", out, "--count", 600, "--seed", 3, "--quiet")
    assert r.returncode == 0, r.stderr
    return out


# ------------------------------------------------------------------ evaluate

def test_evaluate_sphere_centered_is_force_closure(sphere):
    r = run("evaluate", "--mesh", sphere, "--pregrasp", 0, 0, 0, 0, 0, 0.5, "--use-dir", 0, 0, "--json")
    assert r.returncode == 0, r.stderr
    doc = validate("evaluate", r.stdout)
    assert doc["reached"]
    assert doc["phi"]["eps"] > 0
    assert doc["phi"]["force_closure"]
    assert doc["n_contacts"] == len(doc["contacts"]) >= 4


def test_evaluate_text_output(sphere):
    r = run("evaluate", "--mesh", sphere, "--pregrasp", 0, 0, 0, 0, 0, 0.5, "--use-dir", 0, 0)
    assert r.returncode == 0
    assert "eps" in r.stdout and "score pick" in r.stdout


def test_evaluate_malformed_pregrasp_exits_1(sphere):
    r = run("evaluate", "--mesh", sphere, "--pregrasp", 0, 0, 0, 0, 0, "--use-dir", 0, 0)
    assert r.returncode == 1


def test_evaluate_out_of_range_pregrasp_exits_1(sphere):
    r = run("evaluate", "--mesh", sphere, "--pregrasp", 0, 0, 0, 0, 0, 1.5, "--use-dir", 0, 0)
    assert r.returncode == 1


def test_evaluate_bad_mesh_exits_1(tmp_path):
    bad = tmp_path / "bad.off"
    bad.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n")
    assert run("evaluate", "--mesh", bad, "--pregrasp", *[0] * 6, "--use-dir", 0, 0).returncode == 1
    assert run("evaluate", "--mesh", tmp_path / "none.off", "--pregrasp", *[0] * 6,
               "--use-dir", 0, 0).returncode == 1


def test_evaluate_miss_exits_2_with_no_contact_vector(tmp_path):
    big = tmp_path / "big.off"
    write_icosphere(big, 0.5)
    r = run("evaluate", "--mesh", big, "--pregrasp", 0, 0, 0, 1, 1, 0, "--use-dir", 0, 0, "--json")
    assert r.returncode == 2
    doc = validate("evaluate", r.stdout)
    assert not doc["reached"] and doc["contacts"] == []
    assert doc["phi"]["eps"] == 0
    assert doc["phi"]["effort_hold"] == ["inf"] * 6


def test_evaluate_scene_export(sphere, tmp_path):
    scene = tmp_path / "s.obj"
    r = run("evaluate", "--mesh", sphere, "--pregrasp", 0, 0, 0, 0, 0, 0.5, "--use-dir", 0, 0,
            "--scene", scene)
    assert r.returncode == 0
    groups = [l.split()[1] for l in scene.read_text().splitlines() if l.startswith("g ")]
    assert groups[0] == "object" and groups[-1] == "use_point"
    assert "palm" in groups and sum(g.startswith("finger") for g in groups) == 6


def test_evaluate_uses_config(sphere, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"friction": {"mu": 0.0}}))
    r = run("evaluate", "--mesh", sphere, "--pregrasp", 0, 0, 0, 0, 0, 0.5, "--use-dir", 0, 0,
            "--json", "--config", cfg)
    assert r.returncode == 0
    # Frictionless contacts on a sphere all pass through its center: no torque.
    assert json.loads(r.stdout)["phi"]["eps"] == 0
    cfg.write_text(json.dumps({"friction": {"mu": 0.4, "bogus": 1}}))
    assert run("evaluate", "--mesh", sphere, "--pregrasp", *[0] * 6, "--use-dir", 0, 0,
               "--config", cfg).returncode == 1


# -------------------------------------------------------------------- sample

def test_sample_deterministic_checksum(tmp_path):
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    for out in (a, b):
        r = run("sample", "--object", "hammer", "--object", "glass", "--out", out,
                "--count", 1000, "--seed", 7, "--quiet")
        assert r.returncode == 0, r.stderr
    assert sha256(a) == sha256(b)


def test_sample_workers_do_not_change_output(tmp_path):
    outs = []
    for w in (1, 8):
        out = tmp_path / f"w{w}.csv"
        r = run("sample", "--object", "axe", "--out", out, "--count", 300, "--seed", 11,
                "--workers", w, "--json")
        assert r.returncode == 0, r.stderr
        doc = validate("sample", r.stdout)
        assert doc["workers"] == w and doc["total"] == 300
        outs.append(sha256(out))
    assert outs[0] == outs[1]


def test_sample_thread_env_override(tmp_path):
    r = run("sample", "--object", "glass", "--out", tmp_path / "t.csv", "--count", 20, "--json",
            env={"TGQM_THREADS": "3"})
    assert r.returncode == 0
    assert json.loads(r.stdout)["workers"] == 3
    r = run("sample", "--object", "glass", "--out", tmp_path / "t.csv", "--count", 20,
            env={"TGQM_THREADS": "lots"})
    assert r.returncode == 1


def test_sample_missing_mesh_in_config_exits_1(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"objects": ["missing.off"], "samples": 10}))
    r = run("sample", "--config", cfg, "--out", tmp_path / "x.csv")
    assert r.returncode == 1
    assert "missing" in r.stderr


def test_sample_creates_output_directory(tmp_path):
    out = tmp_path / "runs" / "nested" / "k.csv"
    assert run("sample", "--object", "knife", "--out", out, "--count", 5, "--quiet").returncode == 0
    assert out.exists() and (out.parent / "k.csv.run.json").exists()


def test_sample_without_objects_exits_1(tmp_path):
    assert run("sample", "--out", tmp_path / "x.csv", "--count", 5).returncode == 1


def test_bundled_config_is_valid_and_runs(tmp_path):
    cfg = json.loads((ROOT / "configs" / "bundled.json").read_text())
    jsonschema.validate(cfg, schema("run_config"))
    r = run("sample", "--config", ROOT / "configs" / "bundled.json", "--out", tmp_path / "b.csv",
            "--count", 14, "--json")
    assert r.returncode == 0, r.stderr
    side = json.loads((tmp_path / "b.csv.run.json").read_text())
    jsonschema.validate(side["config"], schema("run_config"))
    ids = {row["object_id"] for row in csv.DictReader(open(tmp_path / "b.csv"))}
    assert ids == {"hammer", "knife", "bottle", "sword", "screwdriver", "axe", "glass"}


# ------------------------------------------------------------------ optimize

CSV_COLUMNS = (["object_id"] + [f"p0_{i}" for i in range(6)] + ["d_0", "d_1", "u_x", "u_y", "u_z",
               "un_x", "un_y", "un_z", "n_contacts", "eps", "inertia", "e_i"] +
               [f"e_h_{i}" for i in range(6)] + ["delta", "u_tau", "u_g", "reached", "viable"])


def synthetic_dataset(path, rows):
    """rows: (eps, u_g, u_tau) triples with everything else benign."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for i, (eps, ug, ut) in enumerate(rows):
            p0 = [round(0.1 * (i % 10) - 0.5, 3)] * 5 + [0.5]
            w.writerow(["knife", *p0, 0, 0, 0.1, 0, 0, -1, 0, 0, 3, eps, 1e-5, 1e-4,
                        *[1.0] * 6, 0.5, ut, ug, 1, 0])


def test_optimize_pick_top_record_has_finite_efforts(knife_dataset):
    r = run("optimize", "--dataset", knife_dataset, "--task", "pick", "--top-k", 5, "--json")
    assert r.returncode == 0, r.stderr
    doc = validate("optimize", r.stdout)
    top = doc["results"][0]
    assert all(isinstance(e, float) for e in top["phi"]["effort_hold"])
    scores = [res["score"] for res in doc["results"]]
    assert scores == sorted(scores, reverse=True)
    assert math.isclose(top["score"], -top["phi"]["effort_hold_sum"], rel_tol=1e-12)


def test_optimize_extra_robustness_filters_eps(tmp_path):
    ds = tmp_path / "syn.csv"
    synthetic_dataset(ds, [(0.6, 20, 1.0), (0.4, 20, 5.0), (0.55, 50, 2.0), (0.2, 30, 9.0)])
    r = run("optimize", "--dataset", ds, "--task", "cut", "--preset", "Extra robustness required",
            "--top-k", 10, "--json")
    assert r.returncode == 0, r.stderr
    doc = validate("optimize", r.stdout)
    assert all(res["phi"]["eps"] >= 0.5 for res in doc["results"])
    assert [res["phi"]["use_force"] for res in doc["results"]] == [2.0, 1.0]


def test_optimize_top_k_larger_than_passing(tmp_path):
    ds = tmp_path / "syn.csv"
    synthetic_dataset(ds, [(0.6, 20, 1.0), (0.4, 20, 5.0), (0.1, 20, 3.0)])
    r = run("optimize", "--dataset", ds, "--task", "cut", "--top-k", 50, "--json")
    assert r.returncode == 0
    assert len(json.loads(r.stdout)["results"]) == 2


def test_optimize_empty_result_exits_3(tmp_path):
    ds = tmp_path / "syn.csv"
    synthetic_dataset(ds, [(0.1, 20, 1.0), (0.2, 5, 1.0)])
    r = run("optimize", "--dataset", ds, "--task", "cut")
    assert r.returncode == 3


def test_optimize_bad_task_and_missing_dataset_exit_1(knife_dataset, tmp_path):
    assert run("optimize", "--dataset", knife_dataset, "--task", "stab").returncode == 1
    assert run("optimize", "--dataset", tmp_path / "no.csv", "--task", "pick").returncode == 1


def test_optimize_scene_export(knife_dataset, tmp_path):
    scene = tmp_path / "best.obj"
    r = run("optimize", "--dataset", knife_dataset, "--task", "pick", "--scene", scene)
    assert r.returncode == 0, r.stderr
    text = scene.read_text()
    assert text.startswith("g object")
    assert "g use_point" in text and "g finger2_link1" in text


def test_optimize_binary_matches_csv(tmp_path):
    csv_out, bin_out = tmp_path / "k.csv", tmp_path / "k.bin"
    for out in (csv_out, bin_out):
        assert run("sample", "--object", "knife", "--out", out, "--count", 300, "--seed", 5,
                   "--quiet").returncode == 0
    a = json.loads(run("optimize", "--dataset", csv_out, "--task", "pick", "--json").stdout)
    b = json.loads(run("optimize", "--dataset", bin_out, "--task", "pick", "--json").stdout)
    assert a["results"][0]["hash"] == b["results"][0]["hash"]
    assert b["results"][0]["object_id"] == "knife"


# -------------------------------------------------------------------- render

def test_render_writes_raster_deterministically(tmp_path):
    a, b, pgm = tmp_path / "a.grim", tmp_path / "b.grim", tmp_path / "a.pgm"
    r = run("render", "--mesh", "bottle", "--pregrasp", 0.1, 0.2, 0.3, 0, 0, 0, "--out", a,
            "--pgm", pgm, "--json")
    assert r.returncode == 0, r.stderr
    doc = validate("render", r.stdout)
    assert doc["finite_pixels"] > 0
    assert a.read_bytes()[:4] == b"GRIM"
    assert pgm.read_bytes()[:2] == b"P5"
    assert run("render", "--mesh", "bottle", "--pregrasp", 0.1, 0.2, 0.3, 0, 0, 0, "--out",
               b).returncode == 0
    assert sha256(a) == sha256(b)


def test_render_size_options(tmp_path):
    r = run("render", "--mesh", "glass", "--pregrasp", *[0] * 6, "--out", tmp_path / "g.grim",
            "--width", 32, "--height", 24, "--json")
    doc = json.loads(r.stdout)
    assert (doc["width"], doc["height"]) == (32, 24)
    assert len((tmp_path / "g.grim").read_bytes()) == 12 + 32 * 24 * 4


def test_render_bad_path_exits_1(tmp_path):
    assert run("render", "--mesh", tmp_path / "nope.obj", "--pregrasp", *[0] * 6, "--out",
               tmp_path / "x.grim").returncode == 1


# -------------------------------------------------------------------- verify

def test_verify_fresh_dataset(knife_dataset):
    r = run("verify", "--dataset", knife_dataset, "--fraction", 0.05, "--json")
    assert r.returncode == 0, r.stderr
    doc = validate("verify", r.stdout)
    assert doc["ok"] and doc["max_deviation"] == 0 and doc["checked"] == 30


def test_verify_binary_dataset(tmp_path):
    out = tmp_path / "v.bin"
    assert run("sample", "--object", "screwdriver", "--out", out, "--count", 200, "--seed", 2,
               "--quiet").returncode == 0
    r = run("verify", "--dataset", out, "--fraction", 0.25, "--json")
    assert r.returncode == 0, r.stdout + r.stderr
    assert json.loads(r.stdout)["max_deviation"] == 0


def test_verify_detects_corrupted_float(knife_dataset, tmp_path):
    rows = list(csv.reader(open(knife_dataset)))
    target = next(i for i, row in enumerate(rows[1:], 1) if float(row[CSV_COLUMNS.index("inertia")]) > 0)
    col = CSV_COLUMNS.index("inertia")
    rows[target][col] = repr(float(rows[target][col]) * 1.001)
    bad = tmp_path / "bad.csv"
    with open(bad, "w", newline="") as f:
        csv.writer(f, lineterminator="\n").writerows(rows)
    (tmp_path / "bad.csv.run.json").write_text(Path(str(knife_dataset) + ".run.json").read_text())
    r = run("verify", "--dataset", bad, "--fraction", 1.0, "--json")
    assert r.returncode == 4
    doc = validate("verify", r.stdout)
    assert doc["mismatched"] == 1 and doc["worst_index"] == target - 1


def test_verify_fraction_zero_is_noop(knife_dataset):
    r = run("verify", "--dataset", knife_dataset, "--fraction", 0)
    assert r.returncode == 0
    assert "checked 0" in r.stdout


def test_verify_needs_sidecar(tmp_path, knife_dataset):
    lone = tmp_path / "lone.csv"
    lone.write_bytes(Path(knife_dataset).read_bytes())
    assert run("verify", "--dataset", lone).returncode == 1


def test_help_and_no_subcommand():
    assert run("--help").returncode == 0
    assert run().returncode == 1
