"""Command-line front end, exercised through main(argv) with tiny configs."""
import csv
import json

import numpy as np
import pytest

from lumifit.cli import main
from lumifit.image_ops import decode_image, encode_image

FAST = ["--working-size", "32", "--epochs", "3"]


def write_png(path, img):
    path.write_bytes(encode_image(img))


def dark_photo(seed=0, shape=(40, 40, 3)):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 0.25, size=shape)


# ---------------------------------------------------------------- config plumbing

def test_print_config_emits_json(capsys):
    rc = main(["enhance", "--print-config", "--L", "0.7", "--epochs", "12"])
    assert rc == 0
    cfg = json.loads(capsys.readouterr().out)
    assert cfg["exposure"]["target_L"] == 0.7
    assert cfg["epochs"] == 12
    assert cfg["weights"]["beta"] == 20.0  # untouched default


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"epochs": 9, "seed": 4}))
    rc = main(["enhance", "--print-config", "--config", str(cfg_file), "--seed", "5"])
    assert rc == 0
    cfg = json.loads(capsys.readouterr().out)
    assert cfg["epochs"] == 9  # from file
    assert cfg["seed"] == 5  # flag wins over file


def test_weights_flag_parses_four_floats(capsys):
    rc = main(["enhance", "--print-config", "--weights", "2,0,8,1"])
    assert rc == 0
    cfg = json.loads(capsys.readouterr().out)
    assert [cfg["weights"][k] for k in ("alpha", "beta", "gamma", "delta")] == [2.0, 0.0, 8.0, 1.0]


def test_weights_flag_rejects_malformed():
    with pytest.raises(SystemExit) as exc:
        main(["enhance", "--print-config", "--weights", "1,2"])
    assert exc.value.code == 2


# ---------------------------------------------------------------- enhance

def test_enhance_single_file(tmp_path):
    src = tmp_path / "in.png"
    write_png(src, dark_photo())
    out_dir = tmp_path / "out"
    rc = main(["enhance", "--input", str(src), "--output", str(out_dir), *FAST, "--trace"])
    assert rc == 0

    enhanced = decode_image((out_dir / "in_enhanced.png").read_bytes())
    assert enhanced.shape == (40, 40, 3)

    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["config"]["epochs"] == 3
    (entry,) = manifest["results"]
    assert entry["input"].endswith("in.png")
    assert entry["error"] is None
    assert entry["wall_time"] > 0
    assert (out_dir / "in_trace.jsonl").exists()


def test_enhance_directory_with_metrics(tmp_path):
    src_dir = tmp_path / "src"
    ref_dir = tmp_path / "ref"
    src_dir.mkdir()
    ref_dir.mkdir()
    for name in ("a.png", "b.png"):
        ref = dark_photo(seed=hash(name) % 100) * 4.0
        write_png(ref_dir / name, ref)
        write_png(src_dir / name, ref * 0.2)
    out_dir = tmp_path / "out"
    rc = main(
        [
            "enhance",
            "--input", str(src_dir),
            "--output", str(out_dir),
            "--reference", str(ref_dir),
            *FAST,
        ]
    )
    assert rc == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert len(manifest["results"]) == 2
    for entry in manifest["results"]:
        assert "psnr_db" in entry["metrics"]
        assert "ssim" in entry["metrics"]


def test_enhance_continues_past_corrupt_file(tmp_path):
    src_dir = tmp_path / "src"
    src_dir.mkdir()
    write_png(src_dir / "good.png", dark_photo(seed=1))
    (src_dir / "bad.png").write_bytes(b"not a png at all")
    out_dir = tmp_path / "out"
    rc = main(["enhance", "--input", str(src_dir), "--output", str(out_dir), *FAST])
    assert rc == 1  # at least one failure

    assert (out_dir / "good_enhanced.png").exists()
    manifest = json.loads((out_dir / "manifest.json").read_text())
    by_name = {e["input"].rsplit("/", 1)[-1]: e for e in manifest["results"]}
    assert by_name["good.png"]["error"] is None
    assert by_name["bad.png"]["error"]


def test_enhance_parallel_jobs(tmp_path):
    src_dir = tmp_path / "src"
    src_dir.mkdir()
    for k in range(2):
        write_png(src_dir / f"img{k}.png", dark_photo(seed=k))
    out_dir = tmp_path / "out"
    rc = main(
        ["enhance", "--input", str(src_dir), "--output", str(out_dir), "--jobs", "2", *FAST]
    )
    assert rc == 0
    assert (out_dir / "img0_enhanced.png").exists()
    assert (out_dir / "img1_enhanced.png").exists()


def test_enhance_deterministic_across_processes(tmp_path):
    src = tmp_path / "in.png"
    write_png(src, dark_photo(seed=2))
    outs = []
    for run in range(2):
        out_dir = tmp_path / f"out{run}"
        assert main(["enhance", "--input", str(src), "--output", str(out_dir), *FAST]) == 0
        outs.append((out_dir / "in_enhanced.png").read_bytes())
    assert outs[0] == outs[1]


def test_target_level_changes_output(tmp_path):
    src = tmp_path / "in.png"
    write_png(src, dark_photo(seed=3))
    payloads = []
    for L in ("0.3", "0.9"):
        out_dir = tmp_path / f"out{L}"
        rc = main(
            ["enhance", "--input", str(src), "--output", str(out_dir),
             "--working-size", "32", "--epochs", "40", "--L", L]
        )
        assert rc == 0
        payloads.append((out_dir / "in_enhanced.png").read_bytes())
    assert payloads[0] != payloads[1]


# ---------------------------------------------------------------- evaluate

def test_evaluate_identical_directories(tmp_path, capsys):
    a_dir = tmp_path / "a"
    a_dir.mkdir()
    img = dark_photo(seed=4, shape=(24, 24, 3))
    write_png(a_dir / "x.png", img)
    out_dir = tmp_path / "metrics"
    rc = main(
        ["evaluate", "--input", str(a_dir), "--reference", str(a_dir), "--output", str(out_dir)]
    )
    assert rc == 0
    with open(out_dir / "metrics.csv") as fh:
        rows = list(csv.DictReader(fh))
    named = {r["name"]: r for r in rows}
    assert named["x.png"]["psnr_db"] == "inf"
    assert float(named["x.png"]["ssim"]) == 1.0
    assert "mean" in named


def test_evaluate_empty_intersection_fails(tmp_path):
    a_dir = tmp_path / "a"
    b_dir = tmp_path / "b"
    a_dir.mkdir()
    b_dir.mkdir()
    write_png(a_dir / "only_here.png", dark_photo(seed=5))
    write_png(b_dir / "only_there.png", dark_photo(seed=6))
    with pytest.raises(SystemExit) as exc:
        main(["evaluate", "--input", str(a_dir), "--reference", str(b_dir)])
    assert exc.value.code == 2


# ---------------------------------------------------------------- ablate

def test_ablate_loss_mask_sweep(tmp_path):
    src = tmp_path / "in.png"
    write_png(src, dark_photo(seed=7))
    out_dir = tmp_path / "out"
    rc = main(
        ["ablate", "--input", str(src), "--output", str(out_dir), "--sweep", "loss-mask", *FAST]
    )
    assert rc == 0
    with open(out_dir / "ablation.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["setting"] for r in rows] == ["full", "no_smoothness", "no_exposure", "no_sparsity"]
    for r in rows:
        assert (out_dir / f"loss-mask_{r['setting']}" / "in_enhanced.png").exists()


def test_ablate_explicit_value_sweep(tmp_path):
    src = tmp_path / "in.png"
    write_png(src, dark_photo(seed=8))
    out_dir = tmp_path / "out"
    rc = main(
        ["ablate", "--input", str(src), "--output", str(out_dir),
         "--sweep", "L", "0.4,0.8", *FAST]
    )
    assert rc == 0
    with open(out_dir / "ablation.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["setting"] for r in rows] == ["0.4", "0.8"]


def test_ablate_rejects_unknown_kind(tmp_path):
    src = tmp_path / "in.png"
    write_png(src, dark_photo(seed=9))
    with pytest.raises(SystemExit) as exc:
        main(["ablate", "--input", str(src), "--sweep", "nonsense", *FAST])
    assert exc.value.code == 2
