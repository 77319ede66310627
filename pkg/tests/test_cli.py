import json
import os

import numpy as np
import pytest

from texbench import InstanceLabelMap, save_label_map, save_predictions
from texbench.cli import main
from texbench import imgio

from conftest import make_prediction_set, write_texture_bank, write_toy_dataset


def _augment_args(tmp_path, out="aug_out", **overrides):
    manifest = write_toy_dataset(tmp_path)
    bank_dir = write_texture_bank(tmp_path)
    args = [
        "augment",
        "--manifest", manifest,
        "--textures", bank_dir,
        "--out", str(tmp_path / out),
        "--eta-max", "0.3",
        "--seed", "42",
    ]
    for key, value in overrides.items():
        args += [f"--{key.replace('_', '-')}", str(value)]
    return args


class TestExitCodes:
    def test_missing_required_flag_is_usage_error(self, capsys):
        assert main(["eval"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag_is_usage_error(self, capsys):
        assert main(["augment", "--nope"]) == 2

    def test_unknown_subcommand(self):
        assert main(["frobnicate"]) == 2

    def test_bad_config_value(self, tmp_path):
        assert main(_augment_args(tmp_path, eta_max=3.0)) == 2

    def test_missing_manifest_file(self, tmp_path):
        args = _augment_args(tmp_path)
        args[args.index("--manifest") + 1] = str(tmp_path / "absent.json")
        assert main(args) == 2

    def test_bad_log_level(self, monkeypatch):
        monkeypatch.setenv("TEXBENCH_LOG", "chatty")
        assert main(["--version"]) == 2

    def test_version_flag(self, capsys):
        assert main(["--version"]) == 0
        assert "texbench" in capsys.readouterr().out


class TestAugmentCommand:
    def test_success_writes_manifest(self, tmp_path):
        assert main(_augment_args(tmp_path)) == 0
        manifest = json.loads((tmp_path / "aug_out" / "run_manifest.json").read_text())
        assert manifest["subcommand"] == "augment"
        assert manifest["tool_version"]
        assert len(manifest["images"]) == 2
        assert manifest["errors"] == []
        assert manifest["input_hashes"]["manifest"]
        for record in manifest["images"]:
            assert os.path.exists(record["output_image"])
            assert os.path.exists(record["output_labels"])

    def test_partial_failure_exit_one(self, tmp_path):
        args = _augment_args(tmp_path)
        manifest_path = args[args.index("--manifest") + 1]
        entries = json.loads(open(manifest_path).read())
        entries.append({"image": "img0.png", "labels": "absent.png"})
        with open(manifest_path, "w") as fh:
            json.dump(entries, fh)
        assert main(args) == 1
        manifest = json.loads((tmp_path / "aug_out" / "run_manifest.json").read_text())
        assert len(manifest["errors"]) == 1
        assert len(manifest["images"]) == 2

    def test_rerun_is_byte_identical_modulo_timestamps(self, tmp_path):
        assert main(_augment_args(tmp_path, out="r1")) == 0
        assert main(_augment_args(tmp_path, out="r2")) == 0
        m1 = json.loads((tmp_path / "r1" / "run_manifest.json").read_text())
        m2 = json.loads((tmp_path / "r2" / "run_manifest.json").read_text())
        img1 = open(m1["images"][0]["output_image"], "rb").read()
        img2 = open(m2["images"][0]["output_image"], "rb").read()
        assert img1 == img2
        for m in (m1, m2):
            m.pop("started_at"), m.pop("finished_at")
            for rec in m["images"]:
                rec["output_image"] = os.path.basename(rec["output_image"])
                rec["output_labels"] = os.path.basename(rec["output_labels"])
        assert m1 == m2


def _write_eval_inputs(tmp_path, corrupt_one=False):
    preds_dir = tmp_path / "preds"
    gt_dir = tmp_path / "gt"
    preds_dir.mkdir(exist_ok=True)
    gt_dir.mkdir(exist_ok=True)
    pairs = []
    for i in range(3):
        labels = np.zeros((6, 6), dtype=np.uint16)
        labels[:3] = 1
        labels[3:] = 2
        gt = InstanceLabelMap(labels)
        preds = make_prediction_set([labels == 1, labels == 2])
        save_predictions(preds_dir / f"p{i}.json", preds)
        save_label_map(gt_dir / f"g{i}.png", gt)
        pairs.append({"pred": f"p{i}.json", "gt": f"g{i}.png"})
    if corrupt_one:
        (preds_dir / "p1.json").write_text("{broken")
    pairs_path = tmp_path / "pairs.json"
    pairs_path.write_text(json.dumps(pairs))
    return preds_dir, gt_dir, pairs_path


class TestEvalCommand:
    def test_perfect_eval(self, tmp_path):
        preds_dir, gt_dir, pairs = _write_eval_inputs(tmp_path)
        report_path = tmp_path / "report.json"
        rc = main(["eval", "--preds", str(preds_dir), "--gt", str(gt_dir),
                   "--pairs", str(pairs), "--report", str(report_path)])
        assert rc == 0
        report = json.loads(report_path.read_text())
        assert report["means"]["miou_agg"] == 1.0
        assert report["means"]["ari"] == 1.0
        assert (tmp_path / "report.csv").exists()
        assert (tmp_path / "run_manifest.json").exists()

    def test_corrupt_pair_exit_one(self, tmp_path):
        preds_dir, gt_dir, pairs = _write_eval_inputs(tmp_path, corrupt_one=True)
        report_path = tmp_path / "report.json"
        rc = main(["eval", "--preds", str(preds_dir), "--gt", str(gt_dir),
                   "--pairs", str(pairs), "--report", str(report_path)])
        assert rc == 1
        report = json.loads(report_path.read_text())
        assert report["n_images"] == 2
        assert len(report["errors"]) == 1

    def test_flag_plumbing(self, tmp_path):
        preds_dir, gt_dir, pairs = _write_eval_inputs(tmp_path)
        report_path = tmp_path / "report.json"
        rc = main(["eval", "--preds", str(preds_dir), "--gt", str(gt_dir),
                   "--pairs", str(pairs), "--report", str(report_path),
                   "--aggregate", "agg", "--min-overlap-frac", "0.25",
                   "--include-background-miou", "--exclude-background-ari"])
        assert rc == 0
        report = json.loads(report_path.read_text())
        assert report["config"]["aggregate"] == "agg"
        assert report["config"]["min_overlap_frac"] == 0.25
        assert report["config"]["include_background_miou"] is True
        assert report["config"]["include_background_ari"] is False


class TestFragCommand:
    def test_frag_csv(self, tmp_path):
        preds_dir, gt_dir, pairs = _write_eval_inputs(tmp_path)
        out = tmp_path / "frag.csv"
        rc = main(["frag", "--preds", str(preds_dir), "--gt", str(gt_dir),
                   "--pairs", str(pairs), "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[1] == "group,min,q1,median,q3,max,n_images"
        assert lines[2].startswith("2,2.0")


class TestCodecRoundtripCommand:
    def test_stats_json(self, tmp_path, capsys):
        img = np.random.default_rng(0).integers(0, 256, size=(32, 32, 3)).astype(np.uint8)
        path = tmp_path / "img.png"
        imgio.write_rgb(path, img)
        recon = tmp_path / "recon.png"
        rc = main(["codec-roundtrip", str(path), "--out", str(recon)])
        assert rc == 0
        stats = json.loads(capsys.readouterr().out)
        assert stats["extent"] == [32, 32]
        assert 0 <= stats["mean_abs_error"] <= stats["max_abs_error"] <= 1
        assert recon.exists()

    def test_image_smaller_than_patch_is_config_error(self, tmp_path):
        img = np.zeros((8, 8, 3), dtype=np.uint8)
        path = tmp_path / "small.png"
        imgio.write_rgb(path, img)
        assert main(["codec-roundtrip", str(path)]) == 2
