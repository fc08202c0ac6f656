"""How much threshold margin does an ideal, unquantized projection set leave on a ring?

For a rotationally symmetric target every angle can carry the same profile p(s)
and the dose becomes a function of radius. We solve the linear program

    maximize m  s.t.  D(r) >= 1 + m inside the ring, D(r) <= 1 - m outside,
                      0 <= D <= 2, p >= 0

with dose normalized so the threshold sits at 1 (i.e. half of a peak of 2).
A small m means hard-threshold development only barely separates the part from
its surroundings, which is what makes round targets slow for the optimizer.

    python3 scripts/ring_feasibility.py 40:48 20:44 0:30
"""
import argparse

import numpy as np
from scipy.optimize import linprog


def radial_kernel(radii, s_grid, n_phi=2000):
    """K[i, j]: angular average of the linear-interpolation weight of s = r cos(phi) on s_grid[j]."""
    ds = s_grid[1] - s_grid[0]
    phi = (np.arange(n_phi) + 0.5) * np.pi / n_phi
    k = np.zeros((len(radii), len(s_grid)))
    for i, r in enumerate(radii):
        pos = np.clip((r * np.cos(phi) - s_grid[0]) / ds, 0, len(s_grid) - 1.000001)
        j0 = pos.astype(int)
        frac = pos - j0
        np.add.at(k[i], j0, (1 - frac) / n_phi)
        np.add.at(k[i], j0 + 1, frac / n_phi)
    return k


def margin(r_in, r_out, n=128, anchor_stride=3):
    c = (n - 1) / 2.0
    yy, xx = np.mgrid[0:n, 0:n]
    rr = np.hypot(xx - c, yy - c)
    radii = np.unique(np.round(rr[rr <= c + 0.5], 6))
    inside = (radii >= r_in) & (radii <= r_out)
    s_grid = np.linspace(-c - 1, c + 1, 2 * n + 1)
    k = radial_kernel(radii, s_grid)
    nv = len(s_grid)
    a_ub, b_ub = [], []
    for i in range(len(radii)):
        if inside[i]:
            a_ub.append(np.append(-k[i], 1.0))
            b_ub.append(-1.0)
        else:
            a_ub.append(np.append(k[i], 1.0))
            b_ub.append(1.0)
        a_ub.append(np.append(k[i], 0.0))
        b_ub.append(2.0)
    best = None
    # the dose maximum has to sit somewhere in the ring; try a subset of radii for it
    for idx in np.where(inside)[0][::anchor_stride]:
        res = linprog(np.append(np.zeros(nv), -1.0), A_ub=np.array(a_ub), b_ub=b_ub,
                      A_eq=[np.append(k[idx], 0.0)], b_eq=[2.0],
                      bounds=[(0, None)] * nv + [(None, 1)], method="highs")
        if res.status == 0 and (best is None or -res.fun > best[0]):
            best = (-res.fun, radii[idx])
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("rings", nargs="*", default=["40:48", "20:44", "30:44", "0:30"])
    ap.add_argument("--n", type=int, default=128)
    args = ap.parse_args()
    for spec in args.rings:
        r_in, r_out = (float(v) for v in spec.split(":"))
        best = margin(r_in, r_out, args.n)
        if best is None:
            print(f"{spec:>8s}  infeasible")
        else:
            print(f"{spec:>8s}  margin {best[0]:.4f}  (peak at r = {best[1]:.2f})")


if __name__ == "__main__":
    main()
