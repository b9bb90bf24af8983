"""Sample uniform Gelfand-Tsetlin patterns with a top row discretising a
density and compare the binned occupation with rho = arg(Omega)/pi."""

import argparse
import time

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from gtliquid.density import builtin
from gtliquid.finite import compare_density, gt_sample_batch, toprow_from_density


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--builtin", default="uniform-half")
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--bins", type=int, default=10)
    ap.add_argument("--out", default="density_comparison.png")
    args = ap.parse_args()

    spec = builtin(args.builtin)
    a, b = spec.hull
    start = time.perf_counter()
    top = toprow_from_density(spec, args.n)
    samples = gt_sample_batch(top, seed=args.seed, count=args.count)
    t_sample = time.perf_counter() - start
    chi = np.linspace(a, b, args.bins + 1)
    eta = np.linspace(0, 1, args.bins + 1)
    cmp = compare_density(spec, samples, args.n, chi, eta)
    err = np.abs(cmp.empirical - cmp.predicted)
    print(f"sampling {t_sample:.1f} s, total {time.perf_counter() - start:.1f} s")
    print(f"interior bins {int(np.isfinite(err).sum())}, sup |empirical - rho| = {np.nanmax(err):.4f}")

    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6), sharey=True)
    ext = (a, b, 0, 1)
    for ax, data, title in zip(axes, (cmp.empirical, cmp.predicted, err), ("empirical", "rho", "|difference|")):
        im = ax.imshow(data.T, origin="lower", extent=ext, aspect="auto", vmin=0, vmax=1 if title != "|difference|" else 0.1)
        ax.set_title(title)
        ax.set_xlabel("chi")
        fig.colorbar(im, ax=ax)
    axes[0].set_ylabel("eta")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
