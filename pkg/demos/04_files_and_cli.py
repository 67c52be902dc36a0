"""Round trip through files: CSV data, JSON models and the command line.

Run with ``python demos/04_files_and_cli.py``. Writes into a temporary
directory and removes it afterwards.
"""

# %% [markdown]
# The library and the ``rase`` command share one file format: CSV with a
# header row and a ``y`` column for data, versioned JSON for fitted models.
# Floats are written in shortest round-trip form, so reloading is exact.

# %%
import tempfile
from pathlib import Path

import numpy as np

from rase import EnsembleConfig, fit
from rase.cli import main
from rase.io import load_csv, load_model, save_csv, save_model
from rase.simulation import SimModelSpec, generate

work = Path(tempfile.mkdtemp(prefix="rase-demo-"))
train, test, _ = generate(SimModelSpec("1", n=150, n_test=300, seed=4))
save_csv(train, work / "train.csv")
save_csv(test, work / "test.csv")
assert load_csv(work / "train.csv").X.tobytes() == train.X.tobytes()

model = fit(train, EnsembleConfig(B1=50, B2=100, T=1, seed=2))
save_model(model, work / "model.json")
again = load_model(work / "model.json")
assert np.array_equal(again.predict_score(test.X), model.predict_score(test.X))
print(f"model file: {(work / 'model.json').stat().st_size / 1024:.0f} KiB, "
      f"{len(again.learners)} learners")

# %% [markdown]
# The same steps from the command line. ``main`` takes the argument list and
# returns the exit code (0 ok, 1 usage, 2 data, 3 fit failure).

# %%
main(["fit", "--train", str(work / "train.csv"), "--b1", "50", "--b2", "100",
      "--iterations", "1", "--seed", "2", "--model-out", str(work / "cli.json")])
main(["predict", "--model", str(work / "cli.json"), "--data", str(work / "test.csv"),
      "--out", str(work / "pred.csv")])
main(["rank", "--model", str(work / "cli.json"), "--top", "5"])
print((work / "pred.csv").read_text().splitlines()[:3])

# %%
for f in work.iterdir():
    f.unlink()
work.rmdir()
