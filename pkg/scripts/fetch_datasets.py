"""Rebuild ``data/ucr`` from UCR files that ship inside public PyPI distributions.

The UCR archive website is not always reachable, but several packages bundle a
handful of the archive's datasets. This script downloads those distributions
with ``pip download`` and rewrites the series as comma-separated UCR text files
(``label,v1,...,vT``), one directory per dataset.

Usage::

    python scripts/fetch_datasets.py [--out data/ucr]
"""

import argparse
import io
import subprocess
import sys
import tarfile
import tempfile
import zipfile
from pathlib import Path

import numpy as np

SOURCES = {
    "pyts==0.13.0": "pyts",
    "aeon==1.3.0": "aeon",
    "tslearn==0.9.0": "tslearn",
    "dtaidistance==2.5.1": "dtaidistance",
    "Pforests-dtw==1.3": "pforests",
}


def _download(spec, dest):
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", str(dest), spec],
        check=True,
    )
    (archive,) = list(Path(dest).iterdir())
    return archive


def _members(archive):
    if archive.suffix == ".whl":
        z = zipfile.ZipFile(archive)
        return {n: (lambda n=n: z.read(n)) for n in z.namelist()}
    t = tarfile.open(archive)
    return {n: (lambda n=n: t.extractfile(n).read()) for n in t.getnames() if t.getmember(n).isfile()}


def _whitespace_rows(text):
    rows = []
    for line in text.splitlines():
        tokens = line.split()
        if tokens:
            rows.append((int(float(tokens[0])), tokens[1:]))
    return rows


def _ts_rows(text):
    """Parse an equal-length univariate sktime/aeon ``.ts`` file."""
    rows = []
    in_data = False
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.lower() == "@data":
            in_data = True
            continue
        if not in_data:
            continue
        values, label = line.rsplit(":", 1)
        rows.append((int(float(label)), values.split(",")))
    return rows


def _array_rows(X, y):
    return [(int(lab), [repr(float(v)) for v in row]) for row, lab in zip(X, y)]


def _write(out, name, split, rows):
    path = out / name / f"{name}_{split}"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for label, values in rows:
            fh.write(",".join([str(label), *values]) + "\n")
    print(f"wrote {path} ({len(rows)} series, T={len(rows[0][1])})")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "data" / "ucr")
    args = parser.parse_args(argv)

    with tempfile.TemporaryDirectory() as tmp:
        files = {}
        for spec, key in SOURCES.items():
            files[key] = _members(_download(spec, Path(tmp) / key))

        pyts = "pyts/datasets/cached_datasets/UCR/GunPoint/GunPoint_{}.txt"
        for split in ("TRAIN", "TEST"):
            text = files["pyts"][pyts.format(split)]().decode()
            _write(args.out, "Gun-Point", split, _whitespace_rows(text))

        for name in ("ArrowHead", "OSULeaf"):
            for split in ("TRAIN", "TEST"):
                text = files["aeon"][f"aeon/datasets/data/{name}/{name}_{split}.ts"]().decode()
                _write(args.out, name, split, _ts_rows(text))

        pf = "Pforests-dtw-1.3/datasets/FacesUCR/FacesUCR_{}.txt"
        for split in ("TRAIN", "TEST"):
            text = files["pforests"][pf.format(split)]().decode()
            _write(args.out, "FacesUCR", split, _whitespace_rows(text))

        # Full-precision TRAIN split; the TEST split only exists in tslearn's
        # cache, rounded to 5 significant digits.
        text = files["dtaidistance"]["dtaidistance-2.5.1/tests/rsrc/Trace_TRAIN.txt"]().decode()
        train = _whitespace_rows(text)
        npz = np.load(io.BytesIO(files["tslearn"]["tslearn/.cached_datasets/Trace.npz"]()))
        X_train = npz["X_train"][:, :, 0]
        full = np.array([[float(v) for v in vals] for _, vals in train])
        if not np.allclose(full, X_train, rtol=1e-4, atol=1e-9):
            raise SystemExit("Trace TRAIN from dtaidistance and tslearn disagree")
        _write(args.out, "Trace", "TRAIN", train)
        _write(args.out, "Trace", "TEST", _array_rows(npz["X_test"][:, :, 0], npz["y_test"]))


if __name__ == "__main__":
    main()
