#!/usr/bin/env python3
"""Materialize the UCI regression CSVs used by the benchmark suite.

Concrete and Boston Housing are taken from the `rdatasets` wheel (which bundles
R's modeldata::concrete and MASS::Boston). Yacht Hydrodynamics is not bundled
by any PyPI package; download it from the UCI repository and pass its path with
--yacht to convert it.

    python3 scripts/fetch_uci.py --out data [--yacht yacht_hydrodynamics.data]
"""
import argparse
import csv
import glob
import lzma
import os
import pickle
import subprocess
import sys
import tempfile
import zipfile

YACHT_COLUMNS = [
    "longitudinal_position",
    "prismatic_coefficient",
    "length_displacement_ratio",
    "beam_draught_ratio",
    "length_beam_ratio",
    "froude_number",
    "residuary_resistance",
]


def rdatasets_frames():
    tmp = tempfile.mkdtemp()
    subprocess.check_call(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", tmp, "rdatasets==0.2.10"]
    )
    wheel = zipfile.ZipFile(glob.glob(os.path.join(tmp, "rdatasets-*.whl"))[0])

    def load(name):
        return pickle.loads(lzma.decompress(wheel.read(f"rdatasets/_data/{name}.pkl.compress")))

    return load("modeldata/concrete"), load("MASS/Boston")


def write_frame(df, path):
    df = df.drop(columns=[c for c in df.columns if c == "rownames"])
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(list(df.columns))
        for row in df.itertuples(index=False):
            w.writerow([repr(float(v)) if isinstance(v, float) else str(v) for v in row])


def convert_yacht(src, path):
    with open(src) as f, open(path, "w", newline="") as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(YACHT_COLUMNS)
        for line in f:
            parts = line.split()
            if len(parts) == len(YACHT_COLUMNS):
                w.writerow(parts)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data")
    ap.add_argument("--yacht", help="path to the raw yacht_hydrodynamics.data file")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    concrete, boston = rdatasets_frames()
    write_frame(concrete, os.path.join(args.out, "concrete.csv"))
    write_frame(boston, os.path.join(args.out, "boston.csv"))
    if args.yacht:
        convert_yacht(args.yacht, os.path.join(args.out, "yacht.csv"))
    print("wrote", sorted(os.listdir(args.out)))


if __name__ == "__main__":
    main()
