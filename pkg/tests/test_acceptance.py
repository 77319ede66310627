"""Acceptance suite: one test per release criterion, each printing a
[PASS]/[FAIL] line (visible with pytest -s or in captured output).
"""
import json
import subprocess
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest

from texbench import (
    AugmentationConfig,
    CorruptFormatError,
    InstanceLabelMap,
    TextureBank,
    ari,
    build_dataset,
    coverage,
    decode,
    encode_image,
    interpolate_feature,
    load_label_map,
    load_predictions,
    miou,
    plan_patches,
    rle_decode,
    rle_encode,
    save_label_map,
    save_predictions,
    texturize_instance,
)
from texbench import imgio
from texbench.maskio import PredictionMask, PredictionSet
from texbench.seeds import make_stream

from conftest import make_prediction_set, random_label_map, random_predictions, write_texture_bank
from oracles import oracle_ari, oracle_flatten, oracle_miou


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


def test_metric_oracle_equivalence():
    with criterion("metric-oracle equivalence (1000 random cases, tol 1e-12, < 30 s)"):
        rng = np.random.default_rng(20240901)
        start = time.monotonic()
        for _ in range(1000):
            gt = random_label_map(rng, max_side=16, max_regions=5)
            preds = random_predictions(rng, gt, max_masks=8)
            masks = [preds.decode_mask(i) for i in range(len(preds))]
            for aggregate in (True, False):
                expected = oracle_miou(masks, gt.labels, aggregate)
                assert abs(miou(preds, gt, aggregate) - expected) <= 1e-12
            scores = [m.score for m in preds.masks]
            flat = oracle_flatten(masks, scores, gt.labels.shape)
            assert abs(ari(preds, gt) - oracle_ari(gt.labels, flat)) <= 1e-12
        elapsed = time.monotonic() - start
        assert elapsed < 30.0, f"took {elapsed:.1f}s"


def test_fragmentation_penalty_fixture(frag_fixture):
    with criterion("fragmentation penalty fixture (agg 1.0, non-agg 0.75 exactly)"):
        preds, gt = frag_fixture
        assert miou(preds, gt, aggregate=True) == 1.0
        assert miou(preds, gt, aggregate=False) == 0.75


def test_interpolation_linearity():
    with criterion("feature interpolation linearity (10000 cases, tol 1e-12)"):
        rng = np.random.default_rng(7)
        for _ in range(10_000):
            d = int(rng.integers(1, 9))
            f_c = rng.random(d)
            f_t = rng.random(d)
            eta = float(rng.random())
            blended = interpolate_feature(f_c, f_t, eta)
            lhs = np.linalg.norm(blended - f_t)
            rhs = (1.0 - eta) * np.linalg.norm(f_c - f_t)
            assert abs(lhs - rhs) <= 1e-12
        f_c = rng.random(6)
        f_t = rng.random(6)
        assert np.array_equal(interpolate_feature(f_c, f_t, 0.0), f_c)
        assert np.array_equal(interpolate_feature(f_c, f_t, 1.0), f_t)


def test_mask_locality():
    with criterion("mask locality (outside splats bit-identical)"):
        rng = np.random.default_rng(11)
        for trial in range(5):
            side = int(rng.choice([32, 48]))
            image = rng.random((side, side, 3))
            comp = encode_image(image, patch_size=16, grid_k=4)
            masks = []
            for _ in range(int(rng.integers(1, 4))):
                m = np.zeros((side, side), dtype=bool)
                y0, x0 = rng.integers(0, side - 8, size=2)
                m[y0 : y0 + 8, x0 : x0 + 8] = True
                masks.append(m)
            textured = comp
            for i, m in enumerate(masks):
                texture = encode_image(rng.random((16, 16, 3)), 16, 4)
                textured = texturize_instance(
                    textured, m, texture, eta=float(rng.uniform(0.1, 1.0)),
                    rng_stream=make_stream(trial, i),
                )
            union = np.zeros((side, side), dtype=bool)
            for m in masks:
                union |= m
            ix = np.clip(np.rint(comp.mu[:, 0]), 0, side - 1).astype(int)
            iy = np.clip(np.rint(comp.mu[:, 1]), 0, side - 1).astype(int)
            outside = ~union[iy, ix]
            assert np.array_equal(textured.feature[outside], comp.feature[outside])
            assert np.array_equal(textured.mu, comp.mu)
            assert np.array_equal(textured.sigma, comp.sigma)
            assert np.array_equal(textured.amplitude, comp.amplitude)


def test_codec_coverage_and_determinism(tmp_path):
    with criterion("codec coverage, determinism, constant fixed point"):
        # positive decode weight across extents and patch sizes
        rng = np.random.default_rng(13)
        for patch in (4, 5, 8, 16):
            for extent in (patch, patch + 3, 2 * patch, 37):
                if extent < patch:
                    continue
                img = rng.random((extent, extent, 3))
                comp = encode_image(img, patch_size=patch, grid_k=4)
                assert coverage(comp).min() > 1e-12, (extent, patch)

        # decode byte-stability across repeated runs
        img = rng.random((48, 48, 3))
        comp = encode_image(img, 16, 4)
        a = imgio.float01_to_uint8(decode(comp, noise_seed=5))
        b = imgio.float01_to_uint8(decode(comp, noise_seed=5))
        assert np.array_equal(a, b)

        # byte-stability across worker counts, through the dataset builder
        from conftest import write_toy_dataset

        manifest = write_toy_dataset(tmp_path, n_images=2)
        bank = TextureBank.from_dir(write_texture_bank(tmp_path))
        cfg = AugmentationConfig(eta_max=1.0, master_seed=3)
        m1 = build_dataset(manifest, bank, cfg, tmp_path / "w1", workers=1)
        m2 = build_dataset(manifest, bank, cfg, tmp_path / "w2", workers=2)
        for r1, r2 in zip(m1["images"], m2["images"]):
            assert open(r1["output_image"], "rb").read() == open(r2["output_image"], "rb").read()

        # constant image round-trips exactly (uint8), noise term vanishes
        const = np.full((32, 32, 3), 77, dtype=np.uint8)
        comp = encode_image(const.astype(np.float64) / 255.0, 16, 4)
        out = imgio.float01_to_uint8(decode(comp, noise_seed=99))
        assert np.array_equal(out, const)
        # and the mid-gray float path is exact
        comp05 = encode_image(np.full((32, 32, 3), 0.5), 16, 4)
        assert (decode(comp05, noise_seed=1) == 0.5).all()


def test_patch_grid_conformance():
    with criterion("patch grid conformance (128/16 -> 11 positions incl. 112)"):
        grid = plan_patches(128, 16)
        assert grid.positions_x == (0, 12, 24, 36, 48, 60, 72, 84, 96, 108, 112)
        assert len(grid.positions_x) == len(grid.positions_y) == 11
        assert 112 in grid.positions_x


def test_format_roundtrips(tmp_path):
    with criterion("format round-trips and typed corrupt-file errors"):
        rng = np.random.default_rng(17)
        for i in range(100):
            h, w = int(rng.integers(1, 20)), int(rng.integers(1, 20))
            mask = rng.random((h, w)) < rng.uniform(0, 1)
            assert np.array_equal(rle_decode(rle_encode(mask)), mask)
        for i in range(20):
            h, w = int(rng.integers(1, 16)), int(rng.integers(1, 16))
            labels = rng.integers(0, 500, size=(h, w)).astype(np.uint16)
            path = tmp_path / f"lab{i}.png"
            save_label_map(path, InstanceLabelMap(labels))
            assert np.array_equal(load_label_map(path).labels, labels)
            masks = [rng.random((h, w)) < 0.5 for _ in range(int(rng.integers(0, 4)))]
            ppath = tmp_path / f"pred{i}.json"
            preds = make_prediction_set(masks, rng.random(len(masks)))
            save_predictions(ppath, preds)
            loaded = load_predictions(ppath)
            assert [m.rle for m in loaded.masks] == [m.rle for m in preds.masks]

        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(
            {"extent": [3, 3], "masks": [{"rle": {"size": [2, 2], "runs": [4]}, "score": 0.1}]}
        ))
        with pytest.raises(CorruptFormatError):
            load_predictions(bad)
        garbage = tmp_path / "garbage.png"
        garbage.write_bytes(b"png? no.")
        with pytest.raises(CorruptFormatError):
            load_label_map(garbage)


def _cli(*args) -> int:
    return subprocess.run(
        [sys.executable, "-m", "texbench.cli", *map(str, args)], check=False
    ).returncode


def test_end_to_end_toy_run(tmp_path):
    with criterion("end-to-end toy run (augment x2, eval, frag; exit 0; < 60 s)"):
        start = time.monotonic()
        rng = np.random.default_rng(23)
        data = tmp_path / "data"
        data.mkdir()
        entries = []
        for i in range(5):
            image = np.zeros((48, 64, 3), dtype=np.uint8)
            image[:] = rng.integers(20, 230, size=3)
            image[:, :: 2 + i % 3] = rng.integers(20, 230, size=3)
            labels = np.zeros((48, 64), dtype=np.uint16)
            labels[4:24, 4:30] = 1
            labels[28:44, 34:60] = 2
            imgio.write_rgb(data / f"img{i}.png", image)
            imgio.write_label_png(data / f"lab{i}.png", labels)
            entries.append({"image": f"img{i}.png", "labels": f"lab{i}.png"})
        manifest = data / "manifest.json"
        manifest.write_text(json.dumps(entries))
        bank_dir = write_texture_bank(tmp_path)

        out_mild = tmp_path / "aug_mild"
        out_strong = tmp_path / "aug_strong"
        assert _cli("augment", "--manifest", manifest, "--textures", bank_dir,
                    "--out", out_mild, "--eta-max", "0.3", "--eta-mode", "uniform",
                    "--patch-size", "16", "--grid-k", "4", "--seed", "42") == 0
        assert _cli("augment", "--manifest", manifest, "--textures", bank_dir,
                    "--out", out_strong, "--eta-max", "1.0", "--eta-mode", "fixed",
                    "--seed", "42", "--workers", "2") == 0
        aug_manifest = json.loads((out_strong / "run_manifest.json").read_text())
        assert len(aug_manifest["images"]) == 5

        # stub predictions: region 1 predicted exactly, region 2 split in two
        preds_dir = tmp_path / "preds"
        preds_dir.mkdir()
        pairs = []
        for record in aug_manifest["images"]:
            labels = load_label_map(record["output_labels"]).labels
            r1 = labels == 1
            r2 = labels == 2
            ys, xs = np.nonzero(r2)
            split = (ys.min() + ys.max()) // 2
            top = r2.copy()
            top[split:] = False
            bottom = r2 & ~top
            preds = PredictionSet(
                extent=(labels.shape[1], labels.shape[0]),
                masks=[
                    PredictionMask(rle_encode(r1), 0.9),
                    PredictionMask(rle_encode(top), 0.8),
                    PredictionMask(rle_encode(bottom), 0.7),
                ],
                generator_params={"backend": "fixture-stub"},
            )
            name = record["image_id"]
            save_predictions(preds_dir / f"{name}.json", preds)
            pairs.append({"pred": f"{name}.json", "gt": record["output_labels"]})
        pairs_path = tmp_path / "pairs.json"
        pairs_path.write_text(json.dumps(pairs))

        report = tmp_path / "report.json"
        assert _cli("eval", "--preds", preds_dir, "--gt", out_strong,
                    "--pairs", pairs_path, "--aggregate", "both",
                    "--report", report) == 0
        result = json.loads(report.read_text())
        assert result["n_images"] == 5
        assert result["means"]["miou_agg"] == 1.0
        assert 0.0 < result["means"]["miou_nonagg"] < 1.0

        frag_csv = tmp_path / "frag.csv"
        assert _cli("frag", "--preds", preds_dir, "--gt", out_strong,
                    "--pairs", pairs_path, "--out", frag_csv) == 0
        assert frag_csv.exists()

        assert (out_mild / "run_manifest.json").exists()
        assert (tmp_path / "run_manifest.json").exists()  # eval manifest next to report
        elapsed = time.monotonic() - start
        assert elapsed < 60.0, f"took {elapsed:.1f}s"
