"""Rebuild the CLI fixtures. The golden results document is frozen after review;
rerun only when the results format changes on purpose."""
from pathlib import Path

import numpy as np

from shotfit import Dataset, rabi_model, sample_dataset, simulation_rng, sine_model
from shotfit.cli import main
from shotfit.fileio import write_dataset

HERE = Path(__file__).parent
TRUTH = [0.48, 1.0, 1.0, 0.5]


def build():
    sine = sine_model()
    x = np.linspace(0.0, 4.0, 23)
    shots = 10**9
    f = sine.evaluate(x, np.array(TRUTH))
    write_dataset(HERE / "sine_noiseless.csv", Dataset(x, np.round(f * shots), shots), model="sine", truth=TRUTH)
    write_dataset(HERE / "sine_two_points.csv", Dataset([0.0, 1.0], [30, 41], 60), model="sine")
    noisy = sample_dataset(sine, TRUTH, x, 60, simulation_rng(20240611, 0))
    write_dataset(HERE / "sine_noisy.csv", noisy, model="sine", seed=20240611)
    rabi_x = np.linspace(-5.0, 5.0, 41)
    wide = rabi_model(free_angle=True)
    rabi = sample_dataset(wide, [0.05, 0.9, 1.0, 0.0, 1.05 * np.pi], rabi_x, 1000, simulation_rng(20240612, 0))
    write_dataset(HERE / "rabi_overrotated.csv", rabi, model="rabi", seed=20240612)
    main([
        "fit", str(HERE / "sine_noisy.csv"), "--method", "mle", "--penalty", "soft",
        "-o", str(HERE / "sine_noisy.mle.json"),
    ])
    main(["fit", str(HERE / "sine_noisy.csv"), "-o", str(HERE / "sine_noisy.ols.json")])


if __name__ == "__main__":
    build()
