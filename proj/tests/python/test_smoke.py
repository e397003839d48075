import math
import os
from pathlib import Path

import numpy as np
import pytest

import tgqm

ROOT = Path(os.environ.get("TGQM_ROOT", Path(__file__).resolve().parents[2]))


def unit_cube():
    v = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
    t = np.array([[0, 2, 1], [1, 2, 3], [4, 5, 6], [5, 7, 6], [0, 1, 4], [1, 5, 4],
                  [2, 6, 3], [3, 6, 7], [0, 4, 2], [2, 4, 6], [1, 3, 5], [3, 7, 5]])
    return tgqm.Mesh.from_arrays(v, t)


def test_mesh_mass_properties():
    m = unit_cube()
    assert m.volume == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(m.center_of_mass, [0.5, 0.5, 0.5])
    assert np.allclose(np.diag(m.inertia_tensor), [1 / 6] * 3, atol=1e-9)
    assert m.triangles.shape == (12, 3)


def test_open_mesh_rejected():
    v = np.eye(3)
    with pytest.raises(tgqm.GeometryError):
        tgqm.Mesh.from_arrays(v, np.array([[0, 1, 2]]))


def test_builtins_match_shipped_meshes():
    assert set(tgqm.builtin_names()) == {"hammer", "knife", "bottle", "sword", "screwdriver", "axe", "glass"}
    for name in tgqm.builtin_names():
        a = tgqm.builtin_mesh(name)
        b = tgqm.load_mesh(ROOT / "data" / "meshes" / f"{name}.off")
        assert a.volume == b.volume
        assert a.center_of_mass == b.center_of_mass


def test_evaluate_returns_metrics_and_scores():
    m = tgqm.builtin_mesh("bottle")
    out = tgqm.evaluate(m, [0.0, 0.3, 0.1, 0.0, 0.0, 0.5], [0.2, -0.4])
    assert out["reached"]
    phi = out["phi"]
    assert 0.0 <= phi["discharge"] <= 1.0
    assert phi["use_geometry"] >= 0.0
    assert set(out["scores"]) == {"beat", "cut", "pick"}
    assert out["n_contacts"] == len(out["contacts"])
    expected_pick = -sum(phi["effort_hold"]) if all(map(math.isfinite, phi["effort_hold"])) else -math.inf
    assert tgqm.score("pick", phi) == pytest.approx(expected_pick)
    # Same inputs, same answer.
    assert tgqm.evaluate(m, [0.0, 0.3, 0.1, 0.0, 0.0, 0.5], [0.2, -0.4]) == out


def test_evaluate_rejects_bad_pregrasp():
    with pytest.raises(ValueError):
        tgqm.evaluate(tgqm.builtin_mesh("glass"), [0, 0, 0, 0, 0, 2.0], [0, 0])


def test_config_dict_is_honored():
    m = tgqm.builtin_mesh("glass")
    p0, d = tgqm.draw_sample(5, 0)
    base = tgqm.evaluate(m, p0, d)
    roomy = tgqm.evaluate(m, p0, d, {"hand": {"palm_radius": 0.08}})
    assert base["wrist"] != roomy["wrist"] or base["contacts"] != roomy["contacts"]
    with pytest.raises(tgqm.ConfigError):
        tgqm.evaluate(m, p0, d, {"hand": {"palm_width": 1}})


def test_dataset_roundtrip_csv_and_binary(tmp_path):
    cfg = {"objects": ["knife", "glass"], "seed": 9}
    csv_path, bin_path = tmp_path / "d.csv", tmp_path / "d.bin"
    s1 = tgqm.generate_dataset(cfg, csv_path, samples=60, workers=2)
    s2 = tgqm.generate_dataset(cfg, bin_path, samples=60, workers=1)
    assert s1["total"] == s2["total"] == 60
    assert s1["viable"] == s2["viable"]

    a = tgqm.read_arrays(csv_path)
    b = tgqm.read_arrays(bin_path, ["knife", "glass"])
    assert a["phi"].shape == (60, 12) and b["p0"].shape == (60, 6)
    assert a["object_id"] == b["object_id"]
    assert a["hash"] == b["hash"]
    assert np.array_equal(a["viable"], b["viable"])
    finite = np.isfinite(a["phi"])
    assert np.array_equal(finite, np.isfinite(b["phi"]))
    # Binary rows store float32.
    assert np.array_equal(a["phi"][finite].astype(np.float32), b["phi"][finite].astype(np.float32))

    recs = tgqm.read_records(csv_path)
    assert recs[3]["p0"] == list(tgqm.draw_sample(9, 3)[0])
    assert tgqm.load_sidecar(csv_path)["seed"] == 9

    assert tgqm.verify_dataset(csv_path, fraction=0.5)["max_deviation"] == 0
    assert tgqm.verify_dataset(bin_path, fraction=0.5)["max_deviation"] == 0


def test_argmax_search(tmp_path):
    path = tmp_path / "k.csv"
    tgqm.generate_dataset({"objects": ["knife"], "seed": 1}, path, samples=150)
    best = tgqm.argmax_search(path, "pick", top_k=3)
    assert 1 <= len(best) <= 3
    assert best[0]["score"] == pytest.approx(-best[0]["phi"]["effort_hold_sum"])
    with pytest.raises(tgqm.EmptyResult):
        tgqm.argmax_search(path, "cut", preset="extra robustness")


def test_render_and_cloud(tmp_path):
    m = tgqm.builtin_mesh("bottle")
    depth = tgqm.render_depth(m, [0.1, 0.2, 0.0, 0.0, 0.0, 0.3], width=64, height=48)
    assert depth.shape == (48, 64)
    assert np.isfinite(depth).sum() > 0
    assert np.all(depth[np.isfinite(depth)] > 0)

    path = tmp_path / "v.grim"
    tgqm.write_grim(path, depth)
    back = tgqm.read_grim(path)
    assert np.array_equal(np.isfinite(back), np.isfinite(depth))
    assert np.allclose(back[np.isfinite(back)], depth[np.isfinite(depth)].astype(np.float32))

    cloud = tgqm.depth_to_cloud(depth, n=256, seed=4)
    assert cloud.shape == (256, 3)
    assert np.array_equal(cloud, tgqm.depth_to_cloud(depth, n=256, seed=4))


def test_export_scene(tmp_path):
    out = tmp_path / "s.obj"
    tgqm.export_scene(out, tgqm.builtin_mesh("hammer"), [0.2, 0.1, 0, 0, 0, 0.4], [0, 0])
    groups = [l.split()[1] for l in out.read_text().splitlines() if l.startswith("g ")]
    assert groups[:2] == ["object", "palm"]
