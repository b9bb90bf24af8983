"""Central-difference Burgers residual at interior points of the liquid
region: observed order on h, h/2, h/4 and the value at a fixed step."""

import argparse
import math

import numpy as np

from gtliquid.boundary import assemble
from gtliquid.density import builtin
from gtliquid.liquid import burgers_residual, inverse_map
from gtliquid.transforms import HalfPlanePoint


def boundary_cloud(spec):
    ba = assemble(spec)
    lines = [np.asarray(pl.points) for pl in ba.edge]
    lines += [np.asarray(s.points + (s.endpoint_nt, (s.x, 1.0))) for s in ba.singular]
    out = []
    for A in lines:
        A = A[np.all(np.isfinite(A), axis=1)]
        for k in np.linspace(0, 1, 20)[:-1]:
            out.append(A[:-1] * (1 - k) + A[1:] * k)
    return np.concatenate(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--builtin", nargs="+", default=["uniform-half", "quartic", "sing1-ramp"])
    ap.add_argument("--points", type=int, default=10)
    ap.add_argument("--margin", type=float, default=0.1, help="minimum distance of the image to the boundary")
    ap.add_argument("--h", type=float, nargs=3, default=[1e-2, 5e-3, 2.5e-3])
    ap.add_argument("--h-fine", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    print("spec            u        v      chi     eta    |Omega|  order1 order2  residual(h_fine)")
    for name in args.builtin:
        spec = builtin(name)
        a, b = spec.hull
        span = b - a
        B = boundary_cloud(spec)
        rng = np.random.default_rng(args.seed)
        done = 0
        while done < args.points:
            p = HalfPlanePoint(rng.uniform(a, b), span * 10.0 ** rng.uniform(-2, 0))
            s = inverse_map(spec, p)
            if min(np.min(np.hypot(B[:, 0] - s.chi, B[:, 1] - s.eta)), 1 - s.eta) < args.margin:
                continue
            done += 1
            r = [burgers_residual(spec, p, h) for h in args.h]
            o1, o2 = math.log2(r[0] / r[1]), math.log2(r[1] / r[2])
            fine = burgers_residual(spec, p, args.h_fine)
            print(f"{name:14s} {p.u:7.3f} {p.v:7.3f} {s.chi:7.3f} {s.eta:7.3f} {abs(s.omega):7.3f}  {o1:6.3f} {o2:6.3f}  {fine:.2e}")


if __name__ == "__main__":
    main()
