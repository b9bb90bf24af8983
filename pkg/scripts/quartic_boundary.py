"""Draw the frozen boundary of the quartic profile 15/16 (t^2 - 1)^2.

Prints the singular-segment endpoints and the infinity point, and writes a
PNG with the edge curves (blue) and singular segments (red).
"""

import argparse
import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from gtliquid.boundary import assemble
from gtliquid.density import builtin


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--builtin", default="quartic")
    ap.add_argument("--out", default="quartic_boundary.png")
    args = ap.parse_args()

    spec = builtin(args.builtin)
    ba = assemble(spec)
    fig, ax = plt.subplots(figsize=(6, 4))
    a, b = spec.hull
    # polytope: 0 <= eta <= 1, a <= chi + eta - 1, chi <= b
    ax.plot([a + 1, b, b, a, a + 1], [0, 0, 1, 1, 0], color="0.7", lw=0.8)
    for pl in ba.edge:
        xs, ys = zip(*pl.points)
        ax.plot(xs, ys, color="tab:blue", lw=1.2)
    for seg in ba.singular:
        (x0, y0), (x1, y1) = seg.endpoint_nt, (seg.x, 1.0)
        ax.plot([x0, x1], [y0, y1], color="tab:red", lw=1.2)
    ax.plot(*ba.infinity, "ko", ms=3)
    ax.set_xlabel("chi")
    ax.set_ylabel("eta")
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    summary = {
        "infinity": ba.infinity,
        "segments": [{"x": s.x, "class": s.cls, "endpoint": s.endpoint_nt, "omega": s.omega_limit} for s in ba.singular],
        "worst_continuity_gap": max((c["error"] for c in ba.continuity), default=0.0),
        "figure": args.out,
    }
    print(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
