import json
import subprocess
import sys

import cv2
import numpy as np
import pytest

from sam_adapter import PROFILES, run_inference
from sam_adapter.infer import AdapterConfigError


def write_two_region_image(path, h=24, w=32):
    image = np.zeros((h, w, 3), dtype=np.uint8)
    image[:, : w // 2] = (200, 40, 40)
    image[:, w // 2 :] = (40, 40, 200)
    cv2.imwrite(str(path), cv2.cvtColor(image, cv2.COLOR_RGB2BGR))
    return image


def write_labels(path, h=24, w=32):
    labels = np.zeros((h, w), dtype=np.uint16)
    labels[:, : w // 2] = 1
    labels[:, w // 2 :] = 2
    cv2.imwrite(str(path), labels)
    return labels


def test_stub_inference_writes_wire_format(tmp_path):
    images = tmp_path / "images"
    images.mkdir()
    write_two_region_image(images / "a.png")
    out = tmp_path / "preds"
    written = run_inference(images, out, PROFILES["modified"], stub=True)
    assert written == [str(out / "a.json")]
    doc = json.loads((out / "a.json").read_text())
    assert doc["extent"] == [32, 24]
    assert doc["generator_params"]["points_per_side"] == 64
    assert doc["generator_params"]["stability_score_thresh"] == 0.2
    assert doc["generator_params"]["backend"] == "stub"
    assert len(doc["masks"]) == 2
    for mask in doc["masks"]:
        assert mask["rle"]["size"] == [24, 32]
        assert sum(mask["rle"]["runs"]) == 24 * 32
        assert 0.0 <= mask["score"] <= 1.0


def test_default_profile_params_embedded(tmp_path):
    images = tmp_path / "images"
    images.mkdir()
    write_two_region_image(images / "a.png")
    written = run_inference(images, tmp_path / "preds", PROFILES["default"], stub=True)
    doc = json.loads(open(written[0]).read())
    assert doc["generator_params"]["points_per_side"] == 32
    assert doc["generator_params"]["stability_score_thresh"] == 0.95


def test_missing_checkpoint_without_stub(tmp_path):
    images = tmp_path / "images"
    images.mkdir()
    with pytest.raises(AdapterConfigError):
        run_inference(images, tmp_path / "preds", PROFILES["default"])


def test_missing_images_dir(tmp_path):
    with pytest.raises(AdapterConfigError):
        run_inference(tmp_path / "nope", tmp_path / "preds", PROFILES["default"], stub=True)


def test_unreadable_image_skipped(tmp_path):
    images = tmp_path / "images"
    images.mkdir()
    write_two_region_image(images / "ok.png")
    (images / "bad.png").write_bytes(b"not a png")
    written = run_inference(images, tmp_path / "preds", PROFILES["default"], stub=True)
    assert [p.rsplit("/", 1)[-1] for p in written] == ["ok.json"]


def test_exports_evaluate_through_primary_pipeline(tmp_path):
    """Stub outputs must be consumable by the evaluation toolkit unmodified."""
    images = tmp_path / "images"
    gt = tmp_path / "gt"
    images.mkdir()
    gt.mkdir()
    for name in ("a", "b"):
        write_two_region_image(images / f"{name}.png")
        write_labels(gt / f"{name}.png")
    preds = tmp_path / "preds"
    run_inference(images, preds, PROFILES["modified"], stub=True)
    pairs = [{"pred": f"{n}.json", "gt": f"{n}.png"} for n in ("a", "b")]
    pairs_path = tmp_path / "pairs.json"
    pairs_path.write_text(json.dumps(pairs))
    report = tmp_path / "report.json"
    proc = subprocess.run(
        [sys.executable, "-m", "texbench.cli", "eval",
         "--preds", str(preds), "--gt", str(gt),
         "--pairs", str(pairs_path), "--report", str(report)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    result = json.loads(report.read_text())
    assert result["n_images"] == 2
    assert result["means"]["miou_agg"] == 1.0
    assert result["means"]["ari"] == 1.0
