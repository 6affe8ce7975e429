#!/usr/bin/env python3
"""Builds the desk-scale fixtures under tests/data from two npm packages.

  mnist         (npm)  10,000 MNIST digits stored as JSON, pixel values in [0,1]
  corpus-brown  (npm)  the tagged Brown corpus, one file per text sample

Usage:
  npm pack mnist corpus-brown && tar xzf ... (one directory per package)
  python3 tools/make_datasets.py --mnist <mnist/package> --brown <corpus-brown/package> --out tests/data

Output is byte-reproducible: fixed shuffling seed, gzip mtime pinned to 0.
"""

import argparse
import gzip
import json
import os
import random
import re
import struct

IMAGE_SIDE = 28
MNIST_TRAIN = 6000
MNIST_TEST = 1000

# Brown genre letter -> class name. Fiction sub-genres are pooled into one class.
BROWN_GENRES = {
    "a": "news",
    "e": "hobbies",
    "j": "learned",
    "k": "fiction", "l": "fiction", "n": "fiction", "p": "fiction",
}
WORDS_PER_DOC = 160
DOCS_PER_CLASS_TRAIN = 400
DOCS_PER_CLASS_TEST = 100


def write_gz(path, payload):
    with open(path, "wb") as raw:
        with gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0) as gz:
            gz.write(payload)


def idx_images(images):
    head = struct.pack(">IIII", 0x00000803, len(images), IMAGE_SIDE, IMAGE_SIDE)
    return head + b"".join(bytes(img) for img in images)


def idx_labels(labels):
    return struct.pack(">II", 0x00000801, len(labels)) + bytes(labels)


def build_mnist(src, out):
    pixels = IMAGE_SIDE * IMAGE_SIDE
    items = []
    for digit in range(10):
        with open(os.path.join(src, "src", "digits", f"{digit}.json")) as fh:
            data = json.load(fh)["data"]
        for start in range(0, len(data) - pixels + 1, pixels):
            img = [min(255, max(0, round(v * 255))) for v in data[start:start + pixels]]
            items.append((img, digit))
    random.Random(20180301).shuffle(items)
    train = items[:MNIST_TRAIN]
    test = items[MNIST_TRAIN:MNIST_TRAIN + MNIST_TEST]
    os.makedirs(out, exist_ok=True)
    for name, part in (("train", train), ("t10k", test)):
        write_gz(os.path.join(out, f"{name}-images-idx3-ubyte.gz"), idx_images([i for i, _ in part]))
        write_gz(os.path.join(out, f"{name}-labels-idx1-ubyte.gz"), idx_labels([l for _, l in part]))
    print(f"mnist: {len(train)} train, {len(test)} test (from {len(items)})")


def brown_words(path):
    with open(path, encoding="latin-1") as fh:
        for token in fh.read().split():
            word = token.rsplit("/", 1)[0]
            if re.search(r"[A-Za-z0-9]", word):
                yield word


def build_brown(src, out):
    files = sorted(f for f in os.listdir(src) if re.fullmatch(r"c[a-r]\d\d", f))
    rng = random.Random(20180302)
    train, test = [], []
    for label in sorted(set(BROWN_GENRES.values())):
        letters = [k for k, v in BROWN_GENRES.items() if v == label]
        group = [f for f in files if f[1] in letters]
        # Whole source files are held out, so test passages never share a text with training.
        held_out = set(group[::5])
        pools = {True: [], False: []}
        for f in group:
            words = list(brown_words(os.path.join(src, f)))
            for start in range(0, len(words) - WORDS_PER_DOC + 1, WORDS_PER_DOC):
                pools[f in held_out].append(" ".join(words[start:start + WORDS_PER_DOC]))
        for docs in pools.values():
            rng.shuffle(docs)
        train += [(label, d) for d in pools[False][:DOCS_PER_CLASS_TRAIN]]
        test += [(label, d) for d in pools[True][:DOCS_PER_CLASS_TEST]]
    rng.shuffle(train)
    rng.shuffle(test)
    os.makedirs(out, exist_ok=True)
    for name, part in (("train", train), ("test", test)):
        with open(os.path.join(out, f"{name}.tsv"), "w", encoding="utf-8", newline="\n") as fh:
            for label, doc in part:
                fh.write(f"{label}\t{doc}\n")
    print(f"brown: {len(train)} train, {len(test)} test")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mnist", required=True)
    ap.add_argument("--brown", required=True)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    build_mnist(args.mnist, os.path.join(args.out, "mnist"))
    build_brown(args.brown, os.path.join(args.out, "brown4"))


if __name__ == "__main__":
    main()
