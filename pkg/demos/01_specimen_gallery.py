"""Gallery of randomly drawn specimens.

Samples a handful of seeded specimens, projects each one to a thickness
map, converts thickness to phase, and writes the maps as PGM images (plus
a PNG panel when matplotlib is around). Every draw is a pure function of
its seed, so rerunning the script reproduces the same gallery.
"""

from pathlib import Path

import numpy as np

from tiephase.io import write_pgm
from tiephase.optics import OpticsConfig
from tiephase.specimen import derive_seed, exact_phase, sample_spec, thickness_map

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

M = 64          # pixels per side
SIDE = 150.0    # field of view in nm
COUNT = 6

optics = OpticsConfig()


def to_pgm(path, data, lo, hi):
    unit = np.clip((data - lo) / (hi - lo), 0.0, 1.0)
    write_pgm(path, np.rint(unit * 255.0).astype(np.uint8))


phases = []
for i in range(COUNT):
    seed = derive_seed(7, 0, i)
    spec = sample_spec(seed, a=SIDE)
    thickness = thickness_map(spec, M, SIDE)
    phase = exact_phase(thickness, optics)
    phases.append(phase.data)

    kinds = [type(d).__name__ for d in spec.deformations] or ["none"]
    print(f"specimen {i}: half extents "
          f"({spec.half_extents[0]:5.1f}, {spec.half_extents[1]:5.1f}, "
          f"{spec.half_extents[2]:5.1f}) nm, deformations {'+'.join(kinds)}, "
          f"max thickness {thickness.data.max():5.1f} nm, "
          f"phase range [{phase.data.min():6.3f}, {phase.data.max():6.3f}] rad")

    to_pgm(OUT / f"specimen_{i}_phase.pgm", phase.data, phase.data.min(), 0.0)

if plt is not None:
    fig, axes = plt.subplots(2, 3, figsize=(9, 6))
    for ax, data, i in zip(axes.ravel(), phases, range(COUNT)):
        im = ax.imshow(data, cmap="viridis")
        ax.set_title(f"specimen {i}")
        ax.axis("off")
        fig.colorbar(im, ax=ax, shrink=0.8)
    fig.suptitle("projected phase (rad)")
    fig.tight_layout()
    fig.savefig(OUT / "specimen_gallery.png", dpi=110)
    print(f"panel written to {OUT / 'specimen_gallery.png'}")

print(f"PGM maps written to {OUT}")
