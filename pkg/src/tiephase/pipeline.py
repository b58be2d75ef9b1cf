"""End-to-end experiment plumbing: datasets, training runs, evaluation, rendering.

A dataset directory holds a manifest.json plus PHF1 fields for every entry;
each entry is a pure function of the experiment config and the master seed,
so regenerating a dataset reproduces it byte for byte. Training consumes the
train entries (retrieved phase in, exact phase out), evaluation scores the
test entries, and render turns any real field into an 8-bit PGM image.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ann, metrics, tie
from .fields import ScalarField, disk_mask
from .io import load_field, load_network, save_field, save_network, write_pgm
from .optics import OpticsConfig, add_shot_noise, defocus_series
from .specimen import derive_seed, exact_phase, exit_wave, sample_spec, thickness_map
from .specimen import Ripple, Taper, Twist

# Seed streams: train and test entries never share seeds, noise draws are
# separated per micrograph, and the shuffle stream feeds training.
_STREAM_TRAIN = 0
_STREAM_TEST = 1
_STREAM_NOISE = 2
_STREAM_SHUFFLE = 3


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to regenerate an experiment from its master seed.

    Defaults describe the full-size setup: 128 x 128 maps over a 150 nm
    field, 5000 training and 100 test pairs, 15 percent shot noise at 8 um
    defocus. delta_int and delta_tie of None derive the stock regularisers
    from the incident intensity and the grid. hidden of None sizes the
    network's hidden layer to the pixel count.
    """

    resolution: int = 128
    side: float = 150.0
    train_pairs: int = 5000
    test_pairs: int = 100
    master_seed: int = 1
    zslices: int = 128
    optics: OpticsConfig = OpticsConfig()
    delta_int: float | None = None
    delta_tie: float | None = None
    apodize: bool = True
    window_micrographs: bool = False
    smooth_window: bool = False
    hidden: int | None = None
    learning_rate: float = 0.5
    epochs: int = 50
    batch_size: int = 50
    offset_correct: bool = False
    mask_inputs: bool = False
    save_micrographs: bool = False

    @classmethod
    def desk(cls, resolution: int = 32, **overrides) -> "ExperimentConfig":
        """Small-scale setup that runs end to end in minutes on one core."""
        base = dict(resolution=resolution, train_pairs=500, test_pairs=100)
        base.update(overrides)
        return cls(**base)

    def tie_config(self) -> tie.TieConfig:
        delta_int = self.delta_int
        if delta_int is None:
            delta_int = 0.1 * self.optics.incident_intensity
        delta_tie = self.delta_tie
        if delta_tie is None:
            delta_tie = 0.1 / (self.side * self.resolution)
        return tie.TieConfig(
            delta_int=delta_int,
            delta_tie=delta_tie,
            apodize=self.apodize,
            window_micrographs=self.window_micrographs,
            smooth_window=self.smooth_window,
        )

    def train_config(self) -> ann.TrainConfig:
        return ann.TrainConfig(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            batch_size=self.batch_size,
            shuffle_seed=derive_seed(self.master_seed, _STREAM_SHUFFLE),
        )

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        potential = self.optics.potential
        out["optics"]["potential"] = [potential.real, potential.imag]
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        data = dict(raw)
        optics_raw = dict(data.pop("optics", {}))
        if "potential" in optics_raw:
            re, im = optics_raw["potential"]
            optics_raw["potential"] = complex(re, im)
        known = {f.name for f in dataclasses.fields(cls) if f.name != "optics"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(optics=OpticsConfig(**optics_raw), **data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))


def _spec_to_dict(spec) -> dict:
    deformations = []
    for d in spec.deformations:
        if isinstance(d, Twist):
            deformations.append({"kind": "twist", "angle": d.angle})
        elif isinstance(d, Taper):
            deformations.append({"kind": "taper", "factor": d.factor})
        elif isinstance(d, Ripple):
            deformations.append({"kind": "ripple", "amplitude": d.amplitude, "cycles": d.cycles})
    return {
        "seed": spec.seed,
        "half_extents": list(spec.half_extents),
        "center": list(spec.center),
        "rotation": list(spec.rotation),
        "deformations": deformations,
        "potential": [spec.potential.real, spec.potential.imag],
    }


def _dump_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="ascii")


def _generate_entry(config: ExperimentConfig, role: str, index: int, out_dir: Path) -> dict:
    stream = _STREAM_TRAIN if role == "train" else _STREAM_TEST
    entry_seed = derive_seed(config.master_seed, stream, index)
    optics = config.optics
    spec = sample_spec(entry_seed, a=config.side, potential=optics.potential)
    thickness = thickness_map(spec, config.resolution, config.side, zslices=config.zslices)
    exact = exact_phase(thickness, optics)
    wave = exit_wave(thickness, optics)
    planes = defocus_series(wave, optics.defocus, optics.wavelength)
    if optics.noise_level > 0:
        planes = tuple(
            add_shot_noise(plane, optics.noise_level, optics.incident_intensity,
                           derive_seed(entry_seed, _STREAM_NOISE, k))
            for k, plane in enumerate(planes)
        )
    retrieved = tie.retrieve_phase(*planes, optics, config.tie_config())

    entry_id = f"{role}-{index:05d}"
    paths = {
        "exact": f"fields/{entry_id}_exact.phf",
        "retrieved": f"fields/{entry_id}_retrieved.phf",
    }
    save_field(out_dir / paths["exact"], exact)
    save_field(out_dir / paths["retrieved"], retrieved)
    entry = {
        "id": entry_id,
        "role": role,
        "index": index,
        "seed": entry_seed,
        "spec": _spec_to_dict(spec),
        **paths,
    }
    if config.save_micrographs:
        names = ("under", "infocus", "over")
        entry["micrographs"] = []
        for name, plane in zip(names, planes):
            rel = f"fields/{entry_id}_{name}.phf"
            save_field(out_dir / rel, plane)
            entry["micrographs"].append(rel)
    return entry


def generate_dataset(config: ExperimentConfig, out_dir) -> dict:
    """Simulate specimens, micrographs and retrievals into a dataset directory.

    Writes fields/<id>_exact.phf and fields/<id>_retrieved.phf per entry
    (micrograph triplets too when configured), plus manifest.json carrying
    the config echo and per-entry records with paths relative to the
    directory. Identical configs produce identical bytes.
    """
    out = Path(out_dir)
    (out / "fields").mkdir(parents=True, exist_ok=True)
    entries = []
    for role, count in (("train", config.train_pairs), ("test", config.test_pairs)):
        for index in range(count):
            entries.append(_generate_entry(config, role, index, out))
    manifest = {"config": config.to_dict(), "entries": entries}
    _dump_json(out / "manifest.json", manifest)
    return manifest


def load_manifest(dataset):
    """Read a dataset's manifest; accepts the directory or the json path."""
    path = Path(dataset)
    if path.is_dir():
        path = path / "manifest.json"
    manifest = json.loads(path.read_text(encoding="ascii"))
    return manifest, path.parent


def _input_phase(retrieved: ScalarField, exact: ScalarField, config: ExperimentConfig,
                 mask) -> ScalarField:
    """Network input: the retrieved map, optionally offset-corrected and masked."""
    phase = retrieved
    if config.offset_correct:
        phase = metrics.offset_correct(phase, exact, mask)
    if config.mask_inputs:
        phase = ScalarField(phase.m, phase.a, phase.data * mask.data)
    return phase


def _load_pairs(manifest: dict, base: Path, role: str, config: ExperimentConfig):
    mask = disk_mask(config.resolution)
    rows, targets, ids = [], [], []
    for entry in manifest["entries"]:
        if entry["role"] != role:
            continue
        exact = load_field(base / entry["exact"])
        retrieved = load_field(base / entry["retrieved"])
        phase = _input_phase(retrieved, exact, config, mask)
        rows.append(phase.data.ravel())
        targets.append(exact.data.ravel())
        ids.append(entry["id"])
    if not rows:
        raise ValueError(f"dataset has no {role} entries")
    return np.array(rows), np.array(targets), ids


def run_training(dataset, out_path, learning_rate: float | None = None,
                 epochs: int | None = None, batch_size: int | None = None,
                 hidden: int | None = None):
    """Train the adjustment network on a dataset's train entries.

    Writes the checkpoint to out_path and the per-epoch loss history (with
    a config echo) to the sibling <stem>.history.json. Explicit arguments
    override the values echoed in the manifest.

    Returns
    -------
    (Network, list of float)
        The trained network and the loss history.
    """
    manifest, base = load_manifest(dataset)
    config = ExperimentConfig.from_dict(manifest["config"])
    replacements = {}
    if learning_rate is not None:
        replacements["learning_rate"] = learning_rate
    if epochs is not None:
        replacements["epochs"] = epochs
    if batch_size is not None:
        replacements["batch_size"] = batch_size
    if hidden is not None:
        replacements["hidden"] = hidden
    if replacements:
        config = dataclasses.replace(config, **replacements)

    inputs, targets, _ = _load_pairs(manifest, base, "train", config)
    size = config.resolution**2
    net = ann.init_network(size, config.hidden)
    trained, history = ann.train(net, inputs, targets, config.train_config())

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_network(out_path, trained)
    _dump_json(out_path.with_suffix(".history.json"), {
        "config": config.to_dict(),
        "loss": history,
    })
    return trained, history


def run_evaluation(dataset, model_path, offset_correct: bool | None = None,
                   report_path=None) -> dict:
    """Score retrieved and network-adjusted phases on the test entries.

    offset_correct of None follows the dataset config; True additionally
    offset-corrects the retrieved maps before they are scored and fed to
    the network, matching a network trained the same way. The report keeps
    one record per pair plus the two means and a config echo.
    """
    manifest, base = load_manifest(dataset)
    config = ExperimentConfig.from_dict(manifest["config"])
    if offset_correct is not None:
        config = dataclasses.replace(config, offset_correct=offset_correct)
    net = load_network(model_path)
    mask = disk_mask(config.resolution)

    pairs = []
    retrieved_errors, adjusted_errors = [], []
    for entry in manifest["entries"]:
        if entry["role"] != "test":
            continue
        exact = load_field(base / entry["exact"])
        retrieved = load_field(base / entry["retrieved"])
        candidate = _input_phase(retrieved, exact, config, mask)
        adjusted = ann.adjust(net, candidate)
        e_ret = metrics.rms_error(exact, candidate, mask)
        e_adj = metrics.rms_error(exact, adjusted, mask)
        retrieved_errors.append(e_ret)
        adjusted_errors.append(e_adj)
        pairs.append({"id": entry["id"], "retrieved_error": e_ret, "adjusted_error": e_adj})
    if not pairs:
        raise ValueError("dataset has no test entries")

    report = {
        "config": config.to_dict(),
        "offset_corrected": config.offset_correct,
        "pairs": pairs,
        "mean_retrieved_error": float(np.mean(retrieved_errors)),
        "mean_adjusted_error": float(np.mean(adjusted_errors)),
    }
    if report_path is not None:
        _dump_json(Path(report_path), report)
    return report


def render(field_path, out_path, lo: float = -3.0, hi: float = 3.0) -> None:
    """Render a real PHF1 field to an 8-bit PGM image.

    Values map linearly from [lo, hi] to [0, 255] and clamp outside;
    rounding is to nearest with ties to even, so the midpoint lands on 128.
    """
    if not hi > lo:
        raise ValueError("range maximum must exceed the minimum")
    field = load_field(field_path)
    if not isinstance(field, ScalarField):
        raise ValueError("rendering expects a real field")
    unit = np.clip((field.data - lo) / (hi - lo), 0.0, 1.0)
    image = np.rint(unit * 255.0).astype(np.uint8)
    write_pgm(out_path, image)
