#!/usr/bin/env python3
"""Convert the digits shipped in the npm `mnist` package into gzipped IDX files.

The package stores 10,000 MNIST digits as one JSON array per class, with
pixels already divided by 255 and rounded to three decimals. Rounding
`v * 255` recovers the original bytes. Samples are interleaved with a fixed
shuffle so that any prefix of the output is roughly class-balanced.

usage: mnist_npm_to_idx.py <package-dir> <out-dir>
"""

import gzip
import json
import random
import struct
import sys
from pathlib import Path

SIZE = 28 * 28


def main() -> None:
    pkg, out = Path(sys.argv[1]), Path(sys.argv[2])
    samples = []
    for digit in range(10):
        raw = json.loads((pkg / "src" / "digits" / f"{digit}.json").read_text())["data"]
        for k in range(len(raw) // SIZE):
            pixels = bytes(round(v * 255) for v in raw[k * SIZE:(k + 1) * SIZE])
            samples.append((pixels, digit))
    random.Random(0).shuffle(samples)

    out.mkdir(parents=True, exist_ok=True)
    header = struct.pack(">IIII", 0x803, len(samples), 28, 28)
    with gzip.GzipFile(out / "images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(header + b"".join(p for p, _ in samples))
    with gzip.GzipFile(out / "labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, len(samples)) + bytes(d for _, d in samples))
    print(f"wrote {len(samples)} samples to {out}")


if __name__ == "__main__":
    main()
