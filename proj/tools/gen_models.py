#!/usr/bin/env python3
"""Writes the shipped model documents into models/.

Usage: python3 tools/gen_models.py [outdir]
"""
import json
import math
import sys
from pathlib import Path

import numpy as np


def region(M, r, k, A, y, L_row):
    return {
        "M": np.asarray(M, float).tolist(),
        "r": np.asarray(r, float).tolist(),
        "k": float(k),
        "A": np.asarray(A, float).reshape(len(r), -1).tolist(),
        "y": np.atleast_1d(np.asarray(y, float)).tolist(),
        "L_row": [int(c) for c in L_row],
    }


def document(n, d, regions, F, g, init=None, mean=True):
    doc = {
        "n": n,
        "d": d,
        "J": len(regions),
        "m": len(g),
        "mean": mean,
        "regions": regions,
        "hyperplanes": {"F": np.asarray(F, float).tolist(), "g": np.asarray(g, float).tolist()},
    }
    if init is not None:
        doc["init"] = {"region": init[0], "x": list(map(float, init[1]))}
    return doc


def onenorm():
    # Octant j (1-based) = 1 + bits, bit i set when coordinate i is negative.
    regions = []
    for bits in range(8):
        s = np.array([-1.0 if bits >> i & 1 else 1.0 for i in range(3)])
        L = [int(s[i]) * (1 + (bits ^ (1 << i))) for i in range(3)]
        regions.append(region(np.eye(3), np.zeros(3), 0.0, s, -1.0, L))
    return document(3, 1, regions, np.eye(3), np.zeros(3), (1, [0.2, 0.3, 0.5]))


def ntop(cov):
    # Unit ball is the hexagonal bipyramid with apexes (0, 0, +-1); one region
    # per triangular face. Hyperplanes: three vertical planes through the
    # z-axis at angles 0, pi/3, 2pi/3, and z = 0.
    M = np.linalg.inv(np.diag(cov))
    angles = [k * math.pi / 3 for k in range(3)]
    F = [[-math.sin(t), math.cos(t), 0.0] for t in angles] + [[0.0, 0.0, 1.0]]
    F = np.array(F)
    g = np.zeros(4)

    def index(sector, up):
        return 1 + sector + (0 if up else 6)

    regions = []
    for up in (True, False):
        for k in range(6):
            v0 = np.array([math.cos(k * math.pi / 3), math.sin(k * math.pi / 3), 0.0])
            v1 = np.array([math.cos((k + 1) * math.pi / 3), math.sin((k + 1) * math.pi / 3), 0.0])
            apex = np.array([0.0, 0.0, 1.0 if up else -1.0])
            a = np.linalg.solve(np.vstack([v0, v1, apex]), np.ones(3))
            centroid = (v0 + v1 + apex) / 3
            L = [0] * 4
            for plane in (k % 3, (k + 1) % 3):
                side = F[plane] @ centroid
                # The plane through v0 leads back to sector k-1, through v1 to k+1.
                across = (k - 1) % 6 if plane == k % 3 else (k + 1) % 6
                L[plane] = int(np.sign(side)) * index(across, up)
            L[3] = (1 if up else -1) * index(k, not up)
            regions.append(region(M, np.zeros(3), 0.0, a, -1.0, L))
    return document(3, 1, regions, F, g, (1, [0.5, 0.2, 1.0 - 0.5 - 0.2 / math.sqrt(3)]))


def ntop_init_check(doc):
    reg = doc["regions"][0]
    x = np.array(doc["init"]["x"])
    return float(np.array(reg["A"]).ravel() @ x + reg["y"][0])


def pospart():
    # ell(dx) = sum_i (r - s_i)^+ with s_i the partial sums, r = 3, level 1.5.
    mu = np.ones(3)
    F = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0], [1, 1, 1]]
    g = [0, 0, 0, -3, -3]
    regions = [
        region(np.eye(3), mu, 0.0, [-1, 0, 0], 1.5, [0, 1, 1, 2, 0]),
        region(np.eye(3), mu, 0.0, [-2, -1, 0], 4.5, [2, 2, 2, -1, 3]),
        region(np.eye(3), mu, 0.0, [-3, -2, -1], 7.5, [3, 3, 3, 0, -2]),
    ]
    return document(3, 1, regions, F, g, (1, [1.5, 2.0, 1.0]))


def gauss_plane():
    return document(3, 1, [region(np.eye(3), np.zeros(3), 0.0, np.ones(3), -1.0, [0])],
                    [[1, 0, 0]], [0], (1, [1 / 3, 1 / 3, 1 / 3]))


def step_line():
    regions = [
        region(np.eye(2), np.zeros(2), 0.0, [0, 1], 0.0, [2]),
        region(np.eye(2), np.zeros(2), math.log(2.0), [0, 1], 0.0, [-1]),
    ]
    return document(2, 1, regions, [[1, 0]], [0], (1, [0.5, 0.0]))


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "models")
    out.mkdir(parents=True, exist_ok=True)
    top = ntop([1.0, 1.0, 1.0])
    assert abs(ntop_init_check(top)) < 1e-12
    docs = {
        "onenorm.model": onenorm(),
        "ntop.model": top,
        "ntop_aniso.model": ntop([10.0, 0.1, 0.1]),
        "pospart.model": pospart(),
        "gauss_plane.model": gauss_plane(),
        "step_line.model": step_line(),
    }
    for name, doc in docs.items():
        (out / name).write_text(json.dumps(doc, indent=1) + "\n")
        print(f"wrote {out / name}")


if __name__ == "__main__":
    main()
