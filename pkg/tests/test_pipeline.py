"""Dataset generation, training runs, evaluation reports, rendering, CLI."""

import dataclasses
import json

import numpy as np
import pytest

from tiephase import cli
from tiephase.ann import TrainConfig
from tiephase.fields import ComplexField, ScalarField
from tiephase.io import load_field, load_network, save_field
from tiephase.optics import OpticsConfig
from tiephase.pipeline import (
    ExperimentConfig,
    generate_dataset,
    load_manifest,
    render,
    run_evaluation,
    run_training,
)
from tiephase.specimen import derive_seed


# ---------------------------------------------------------------- config


def test_config_json_round_trip():
    config = ExperimentConfig.desk(
        optics=OpticsConfig(defocus=80000.0, noise_level=0.0),
        master_seed=9,
        offset_correct=True,
    )
    again = ExperimentConfig.from_json(config.to_json())
    assert again == config
    assert again.optics.potential == config.optics.potential


def test_config_rejects_unknown_keys():
    raw = ExperimentConfig().to_dict()
    raw["momentum"] = 0.9
    with pytest.raises(ValueError, match="momentum"):
        ExperimentConfig.from_dict(raw)


def test_desk_scale():
    desk = ExperimentConfig.desk()
    assert desk.resolution == 32
    assert desk.train_pairs == 500
    assert desk.test_pairs == 100
    small = ExperimentConfig.desk(resolution=16, epochs=3)
    assert small.resolution == 16
    assert small.epochs == 3
    assert small.train_pairs == 500


def test_train_config_seeds_shuffle_stream():
    config = ExperimentConfig(master_seed=77, learning_rate=0.2, epochs=4, batch_size=10)
    tc = config.train_config()
    assert tc == TrainConfig(
        learning_rate=0.2, epochs=4, batch_size=10,
        shuffle_seed=derive_seed(77, 3),
    )


def test_tie_config_derives_stock_regularisers():
    config = ExperimentConfig(resolution=16, side=150.0,
                              optics=OpticsConfig(incident_intensity=2.0))
    tc = config.tie_config()
    assert tc.delta_int == pytest.approx(0.2)
    assert tc.delta_tie == pytest.approx(0.1 / (150.0 * 16))
    pinned = ExperimentConfig(delta_int=0.3, delta_tie=1e-4)
    assert pinned.tie_config().delta_int == 0.3
    assert pinned.tie_config().delta_tie == 1e-4


# ---------------------------------------------------------------- datasets

# Small enough to regenerate in well under a second, micrographs included
# so the retrieve subcommand can be checked against the stored retrieval.
TINY = ExperimentConfig(
    resolution=16, train_pairs=3, test_pairs=2, master_seed=7, zslices=16,
    hidden=8, learning_rate=0.05, epochs=2, batch_size=3,
    save_micrographs=True,
)


@pytest.fixture(scope="module")
def tiny_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("tiny")
    manifest = generate_dataset(TINY, out)
    return out, manifest


@pytest.fixture(scope="module")
def tiny_checkpoint(tiny_dataset, tmp_path_factory):
    dataset_dir, _ = tiny_dataset
    path = tmp_path_factory.mktemp("model") / "tiny.ann"
    net, history = run_training(dataset_dir, path)
    return path, history


def test_manifest_layout(tiny_dataset):
    dataset_dir, manifest = tiny_dataset
    assert ExperimentConfig.from_dict(manifest["config"]) == TINY
    entries = manifest["entries"]
    assert [e["id"] for e in entries] == [
        "train-00000", "train-00001", "train-00002", "test-00000", "test-00001",
    ]
    for entry in entries:
        stream = 0 if entry["role"] == "train" else 1
        assert entry["seed"] == derive_seed(7, stream, entry["index"])
        assert entry["spec"]["seed"] == entry["seed"]
        assert entry["spec"]["potential"] == [-17.0, 1.0]
        assert entry["exact"].startswith("fields/")
        assert len(entry["micrographs"]) == 3
    loaded, base = load_manifest(dataset_dir)
    assert loaded == manifest
    assert base == dataset_dir


def test_fields_on_disk(tiny_dataset):
    dataset_dir, manifest = tiny_dataset
    entry = manifest["entries"][0]
    exact = load_field(dataset_dir / entry["exact"])
    retrieved = load_field(dataset_dir / entry["retrieved"])
    for field in (exact, retrieved):
        assert isinstance(field, ScalarField)
        assert field.m == 16
        assert field.a == 150.0
    assert exact.data.min() < 0.0
    assert exact.data.max() <= 0.0
    # The solver annihilates the DC term, so retrievals come out zero mean.
    assert abs(retrieved.data.mean()) < 1e-12
    for rel in entry["micrographs"]:
        plane = load_field(dataset_dir / rel)
        assert isinstance(plane, ScalarField)
        assert plane.data.min() > 0.0


def test_regeneration_is_byte_identical(tiny_dataset, tmp_path):
    dataset_dir, _ = tiny_dataset
    again = tmp_path / "again"
    generate_dataset(TINY, again)
    originals = sorted(p for p in dataset_dir.rglob("*") if p.is_file())
    copies = sorted(p for p in again.rglob("*") if p.is_file())
    assert [p.relative_to(dataset_dir) for p in originals] == \
        [p.relative_to(again) for p in copies]
    for a, b in zip(originals, copies):
        assert a.read_bytes() == b.read_bytes(), a.name


# ---------------------------------------------------------------- training


def test_training_writes_checkpoint_and_history(tiny_dataset, tiny_checkpoint):
    _, manifest = tiny_dataset
    path, history = tiny_checkpoint
    assert len(history) == TINY.epochs
    assert all(np.isfinite(history))
    net = load_network(path)
    assert net.inputs == 16 * 16
    assert net.hidden == 8
    sidecar = json.loads(path.with_suffix(".history.json").read_text())
    assert sidecar["loss"] == history
    assert ExperimentConfig.from_dict(sidecar["config"]) == TINY


def test_training_overrides_are_echoed(tiny_dataset, tmp_path):
    dataset_dir, _ = tiny_dataset
    path = tmp_path / "short.ann"
    _, history = run_training(dataset_dir, path, epochs=1, batch_size=1)
    assert len(history) == 1
    sidecar = json.loads(path.with_suffix(".history.json").read_text())
    assert sidecar["config"]["epochs"] == 1
    assert sidecar["config"]["batch_size"] == 1


def test_training_rejects_indivisible_batches(tiny_dataset, tmp_path):
    dataset_dir, _ = tiny_dataset
    with pytest.raises(ValueError):
        run_training(dataset_dir, tmp_path / "bad.ann", batch_size=2)


# ---------------------------------------------------------------- evaluation


def test_evaluation_report(tiny_dataset, tiny_checkpoint, tmp_path):
    dataset_dir, _ = tiny_dataset
    model_path, _ = tiny_checkpoint
    report_path = tmp_path / "report.json"
    report = run_evaluation(dataset_dir, model_path, report_path=report_path)
    assert report["offset_corrected"] is False
    assert [p["id"] for p in report["pairs"]] == ["test-00000", "test-00001"]
    for pair in report["pairs"]:
        assert pair["retrieved_error"] >= 0.0
        assert pair["adjusted_error"] >= 0.0
    assert report["mean_retrieved_error"] == pytest.approx(
        np.mean([p["retrieved_error"] for p in report["pairs"]]))
    assert report["mean_adjusted_error"] == pytest.approx(
        np.mean([p["adjusted_error"] for p in report["pairs"]]))
    assert json.loads(report_path.read_text()) == report


def test_evaluation_offset_flag_lowers_retrieved_mean(tiny_dataset, tiny_checkpoint):
    dataset_dir, _ = tiny_dataset
    model_path, _ = tiny_checkpoint
    raw = run_evaluation(dataset_dir, model_path)
    shifted = run_evaluation(dataset_dir, model_path, offset_correct=True)
    assert shifted["offset_corrected"] is True
    assert shifted["mean_retrieved_error"] < raw["mean_retrieved_error"]


def test_evaluation_requires_test_entries(tiny_checkpoint, tmp_path):
    model_path, _ = tiny_checkpoint
    config = dataclasses.replace(TINY, train_pairs=1, test_pairs=0,
                                 save_micrographs=False)
    generate_dataset(config, tmp_path / "trainonly")
    with pytest.raises(ValueError, match="no test entries"):
        run_evaluation(tmp_path / "trainonly", model_path)


# ---------------------------------------------------------------- rendering


def test_render_grey_mapping(tmp_path):
    data = np.zeros((8, 8))
    data[0] = [-10.0, -3.0, -1.5, 0.0, 1.5, 3.0, 10.0, -3.0]
    field_path = tmp_path / "map.phf"
    save_field(field_path, ScalarField(8, 8.0, data))
    image_path = tmp_path / "map.pgm"
    render(field_path, image_path)
    blob = image_path.read_bytes()
    assert blob.startswith(b"P5\n8 8\n255\n")
    pixels = blob[len(b"P5\n8 8\n255\n"):]
    assert len(pixels) == 64
    assert list(pixels[:8]) == [0, 0, 64, 128, 191, 255, 255, 0]
    # Zero sits exactly between grey levels; ties round to the even side.
    assert pixels[8] == 128


def test_render_rejects_bad_inputs(tmp_path):
    field_path = tmp_path / "map.phf"
    save_field(field_path, ScalarField(8, 8.0, np.zeros((8, 8))))
    with pytest.raises(ValueError):
        render(field_path, tmp_path / "x.pgm", lo=1.0, hi=1.0)
    wave_path = tmp_path / "wave.phf"
    save_field(wave_path, ComplexField(8, 8.0, np.ones((8, 8), dtype=complex)))
    with pytest.raises(ValueError, match="real"):
        render(wave_path, tmp_path / "y.pgm")


# ---------------------------------------------------------------- CLI


@pytest.fixture(scope="module")
def cli_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config = dataclasses.replace(TINY, train_pairs=2, test_pairs=1, master_seed=3)
    config_path = root / "config.json"
    config_path.write_text(config.to_json())
    out = root / "dataset"
    assert cli.main(["generate", "--config", str(config_path), "--out", str(out)]) == 0
    return out, config


def test_cli_generate_with_config(cli_dataset):
    out, config = cli_dataset
    manifest, _ = load_manifest(out)
    assert ExperimentConfig.from_dict(manifest["config"]) == config
    assert len(manifest["entries"]) == 3


def test_cli_generate_flag_overrides(tmp_path):
    out = tmp_path / "flagged"
    rc = cli.main([
        "generate", "--out", str(out), "--count", "1", "--resolution", "16",
        "--seed", "3", "--noise", "0", "--defocus-um", "1",
    ])
    assert rc == 0
    manifest, _ = load_manifest(out)
    echo = manifest["config"]
    assert echo["train_pairs"] == 1
    assert echo["master_seed"] == 3
    assert echo["resolution"] == 16
    assert echo["optics"]["noise_level"] == 0.0
    assert echo["optics"]["defocus"] == 1000.0


def test_cli_retrieve_matches_stored_retrieval(tiny_dataset, tmp_path):
    dataset_dir, manifest = tiny_dataset
    entry = manifest["entries"][0]
    under, infocus, over = (dataset_dir / rel for rel in entry["micrographs"])
    out = tmp_path / "phase.phf"
    rc = cli.main([
        "retrieve", "--under", str(under), "--infocus", str(infocus),
        "--over", str(over), "--defocus-um", "8", "--out", str(out),
    ])
    assert rc == 0
    # Same micrographs, same optics, same regularisers: identical bytes.
    assert out.read_bytes() == (dataset_dir / entry["retrieved"]).read_bytes()


def test_cli_train_evaluate_render(cli_dataset, tmp_path):
    dataset_dir, _ = cli_dataset
    ckpt = tmp_path / "model.ann"
    rc = cli.main(["train", "--dataset", str(dataset_dir), "--out", str(ckpt),
                   "--epochs", "1", "--batch-size", "2"])
    assert rc == 0
    assert load_network(ckpt).hidden == 8

    report_path = tmp_path / "report.json"
    rc = cli.main(["evaluate", "--dataset", str(dataset_dir), "--model", str(ckpt),
                   "--report", str(report_path), "--offset-correct"])
    assert rc == 0
    report = json.loads(report_path.read_text())
    assert report["offset_corrected"] is True
    assert len(report["pairs"]) == 1

    manifest, _ = load_manifest(dataset_dir)
    field_rel = manifest["entries"][-1]["exact"]
    image_path = tmp_path / "exact.pgm"
    rc = cli.main(["render", "--in", str(dataset_dir / field_rel),
                   "--out", str(image_path)])
    assert rc == 0
    assert image_path.read_bytes().startswith(b"P5\n16 16\n255\n")


def test_cli_failure_prints_json_line(tmp_path, capsys):
    rc = cli.main(["render", "--in", str(tmp_path / "missing.phf"),
                   "--out", str(tmp_path / "x.pgm")])
    assert rc == 1
    err = capsys.readouterr().err
    assert err.count("\n") == 1
    payload = json.loads(err)
    assert set(payload) == {"error", "message"}
