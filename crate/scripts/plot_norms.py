"""Plot ||x_t|| from one or more trajectory CSVs written by `mjls simulate`.

    python scripts/plot_norms.py dr.csv stochastic.csv -o norms.png
"""
import argparse
import csv
import pathlib

import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return [int(r["t"]) for r in rows], [float(r["x_norm"]) for r in rows]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv", nargs="+")
    ap.add_argument("-o", "--out", default="norms.png")
    args = ap.parse_args()
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for p in args.csv:
        t, n = load(p)
        ax.semilogy(t, n, label=pathlib.Path(p).stem)
    ax.set_xlabel("t")
    ax.set_ylabel("||x_t||")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
