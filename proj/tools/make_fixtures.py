"""Regenerate the grayscale PGM test images under tests/data.

Sources are images bundled inside published Python packages, so no network
access beyond the package index is needed:

  cameraman  scikit-image  skimage/data/camera.png         512x512
  ascent     PyWavelets    pywt/data/ascent.npz            512x512
  aero       PyWavelets    pywt/data/aero.npz              512x512
  barbara    sporco        sporco/data/barbara.png         702x574 RGB -> 512x512 crop
  monarch    sporco        sporco/data/monarch.png         768x512 RGB -> 512x512 crop

The barbara and monarch crops are close to, but not pixel-identical with,
the classic 512x512 grayscale benchmark versions.

Usage: python tools/make_fixtures.py [--wheel-dir DIR] [--out tests/data]
"""

import argparse
import glob
import io
import os
import subprocess
import sys
import tempfile
import zipfile

import numpy as np
from PIL import Image


def write_pgm(path, array):
    array = np.asarray(array, dtype=np.uint8)
    height, width = array.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (width, height))
        f.write(array.tobytes())


def find_wheel(wheel_dir, package):
    hits = glob.glob(os.path.join(wheel_dir, f"{package}-*.whl"))
    if not hits:
        subprocess.check_call(
            [sys.executable, "-m", "pip", "download", package, "--no-deps", "-d", wheel_dir]
        )
        hits = glob.glob(os.path.join(wheel_dir, f"{package}-*.whl"))
    return zipfile.ZipFile(sorted(hits)[-1])


def gray(png_bytes):
    return np.asarray(Image.open(io.BytesIO(png_bytes)).convert("L"))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--wheel-dir", default=None)
    parser.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "tests", "data"))
    args = parser.parse_args()

    wheel_dir = args.wheel_dir or tempfile.mkdtemp(prefix="lrd-wheels-")
    os.makedirs(args.out, exist_ok=True)

    from skimage import data as skdata

    write_pgm(os.path.join(args.out, "cameraman.pgm"), skdata.camera())

    pywt_whl = find_wheel(wheel_dir, "pywavelets")
    for name in ("ascent", "aero"):
        arr = np.load(io.BytesIO(pywt_whl.read(f"pywt/data/{name}.npz")))["data"]
        write_pgm(os.path.join(args.out, f"{name}.pgm"), arr)

    sporco_whl = find_wheel(wheel_dir, "sporco")
    barbara = gray(sporco_whl.read("sporco/data/barbara.png"))
    write_pgm(os.path.join(args.out, "barbara.pgm"), barbara[31:543, 95:607])
    monarch = gray(sporco_whl.read("sporco/data/monarch.png"))
    write_pgm(os.path.join(args.out, "monarch.pgm"), monarch[:, 128:640])


if __name__ == "__main__":
    main()
