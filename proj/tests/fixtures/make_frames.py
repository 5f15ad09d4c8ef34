#!/usr/bin/env python3
"""Writes the synthetic PGM frames of the end-to-end fixture corpus.

Each scene is a fixed noise texture panned one pixel per frame; a new scene
is a hard cut. Frames listed as black are all zeros. Output is deterministic.

usage: make_frames.py [corpus_dir]
"""
import os
import sys

SIZE = 64

# video id -> (frame count, scene start frames, black frames)
VIDEOS = {
    "ad_cola": (30, [0, 8, 15, 23], [22]),
    "ad_shoe": (20, [0, 10], []),
    "ad_bank": (15, [0], []),
    "ad_game": (12, [0], list(range(12))),
    "long_doc": (60, [0, 10, 20, 30, 40, 50], []),
}


def texture(seed, width, height):
    state = (seed * 2654435761 + 12345) & 0xFFFFFFFF
    rows = []
    for _ in range(height):
        row = bytearray(width)
        for x in range(width):
            state = (state * 1664525 + 1013904223) & 0xFFFFFFFF
            row[x] = 16 + (state >> 24) % 224
        rows.append(row)
    return rows


def write_pgm(path, rows):
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (SIZE, SIZE))
        for row in rows:
            f.write(bytes(row))


def main():
    root = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "e2e", "corpus")
    for vid, (count, scenes, black) in VIDEOS.items():
        out = os.path.join(root, "videos", vid, "frames")
        os.makedirs(out, exist_ok=True)
        canvases = {s: texture(hash_seed(vid, s), SIZE + count, SIZE) for s in scenes}
        for i in range(count):
            start = max(s for s in scenes if s <= i)
            if i in black:
                rows = [bytearray(SIZE) for _ in range(SIZE)]
            else:
                shift = i - start
                rows = [row[shift:shift + SIZE] for row in canvases[start]]
            write_pgm(os.path.join(out, "frame_%04d.pgm" % i), rows)


def hash_seed(vid, scene):
    h = 0
    for ch in vid:
        h = (h * 31 + ord(ch)) & 0xFFFF
    return h * 1000 + scene


if __name__ == "__main__":
    main()
