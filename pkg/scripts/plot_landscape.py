"""Heat maps of a landscape CSV written by ``attrgof landscape``.

    attrgof landscape --model er:n=1600,p=0.5 --out land.csv
    python3 scripts/plot_landscape.py land.csv land.png

Needs matplotlib, which the package itself does not depend on.
"""

import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def read_grid(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    m11 = np.unique([int(r["m11"]) for r in rows])
    m01 = np.unique([int(r["m01"]) for r in rows])
    phi = np.full((m11.size, m01.size), np.nan)
    prob = np.full_like(phi, np.nan)
    for r in rows:
        i = np.searchsorted(m11, int(r["m11"]))
        j = np.searchsorted(m01, int(r["m01"]))
        phi[i, j] = float(r["phi"])
        prob[i, j] = float(r["sampling_probability"])
    return m11, m01, phi, prob


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("png")
    ap.add_argument("--threshold", type=float, default=0.95)
    args = ap.parse_args()

    m11, m01, phi, prob = read_grid(args.csv)
    extent = [m01[0], m01[-1], m11[0], m11[-1]]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, data, title in ((axes[0], phi, "phi"), (axes[1], prob, "sampling probability")):
        im = ax.imshow(data, origin="lower", aspect="auto", extent=extent)
        ax.set_xlabel("+- edges")
        ax.set_title(title)
        fig.colorbar(im, ax=ax)
    axes[0].set_ylabel("++ edges")
    axes[0].contour(m01, m11, prob, levels=[args.threshold], colors="w", linewidths=1)
    fig.tight_layout()
    fig.savefig(args.png, dpi=120)


if __name__ == "__main__":
    main()
