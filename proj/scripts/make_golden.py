"""Regenerate the double-gyre golden files.

    PYTHONPATH=build/python python3 scripts/make_golden.py [--threads N]

Writes golden/double_gyre/ftle_reference.csv: the FTLE of the fine run sampled
at the production grid nodes (every 4th fine node on both axes), one row per
production node in flat order (x, y, ftle). Also refreshes fixed_hashes.txt
from an `lcs` run of fixed.ini when the CLI binary is given.
"""

import argparse
import pathlib
import subprocess
import tempfile

import numpy as np

import flcs

ROOT = pathlib.Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "golden" / "double_gyre"


def fnv1a64(data):
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def reference_field(threads):
    fine = flcs.load_config(GOLDEN / "fine.ini")
    prod = flcs.load_config(GOLDEN / "production.ini")
    stride = [(f - 1) // (p - 1) for f, p in zip(fine.resolution, prod.resolution)]
    assert all((p - 1) * s == f - 1 for f, p, s in zip(fine.resolution, prod.resolution, stride))
    field = flcs.compute_field(fine, threads)
    sub = field.ftle[:: stride[0], :: stride[1]]
    lines = []
    for i in range(prod.resolution[0]):
        for j in range(prod.resolution[1]):
            x = field.node(i * stride[0] * fine.resolution[1] + j * stride[1])
            lines.append(f"{x[0]:.17g},{x[1]:.17g},{sub[i, j]:.17g}\n")
    (GOLDEN / "ftle_reference.csv").write_text("".join(lines))
    print(f"reference: {sub.size} nodes, ftle range [{np.nanmin(sub):.4f}, {np.nanmax(sub):.4f}]")


def fixed_hashes(cli):
    with tempfile.TemporaryDirectory() as out:
        subprocess.run([cli, "--threads", "1", "--out", out, "lcs", str(GOLDEN / "fixed.ini")], check=True)
        rows = []
        for path in sorted(pathlib.Path(out).iterdir()):
            rows.append(f"{path.name} {fnv1a64(path.read_bytes()):016x}\n")
    (GOLDEN / "fixed_hashes.txt").write_text("".join(rows))
    print("".join(rows), end="")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--threads", type=int, default=0)
    parser.add_argument("--cli", help="path to the flcs binary; refreshes fixed_hashes.txt")
    parser.add_argument("--skip-reference", action="store_true")
    args = parser.parse_args()
    if not args.skip_reference:
        reference_field(args.threads)
    if args.cli:
        fixed_hashes(args.cli)


if __name__ == "__main__":
    main()
