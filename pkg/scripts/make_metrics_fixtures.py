#!/usr/bin/env python3
"""Regenerate the shared metric fixtures in fixtures/metrics_golden.json.

Expected values are computed here with naive, loop-based reference formulas
(independent of the package implementation) and frozen into the JSON file;
both the Python package tests and the trainer's test suite check their own
implementations against the same file.
"""

import json
import math
from pathlib import Path

import numpy as np

C1 = 0.01**2
C2 = 0.03**2
PSNR_CAP = 100.0


def ref_mse(a, b):
    total = 0.0
    count = 0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            for c in range(a.shape[2]):
                d = a[i, j, c] - b[i, j, c]
                total += d * d
                count += 1
    return total / count


def ref_psnr(a, b):
    m = ref_mse(a, b)
    if m == 0.0:
        return PSNR_CAP
    return 10.0 * math.log10(1.0 / m)


def ref_ssim_global(a, b):
    values = []
    for c in range(a.shape[2]):
        xa = a[:, :, c].ravel()
        xb = b[:, :, c].ravel()
        mu_a = sum(xa) / xa.size
        mu_b = sum(xb) / xb.size
        var_a = sum((v - mu_a) ** 2 for v in xa) / xa.size
        var_b = sum((v - mu_b) ** 2 for v in xb) / xb.size
        cov = sum((u - mu_a) * (v - mu_b) for u, v in zip(xa, xb)) / xa.size
        values.append(
            (2 * mu_a * mu_b + C1)
            * (2 * cov + C2)
            / ((mu_a**2 + mu_b**2 + C1) * (var_a + var_b + C2))
        )
    return sum(values) / len(values)


def gaussian_taps(size=11, sigma=1.5):
    taps = [math.exp(-((i - (size - 1) / 2) ** 2) / (2 * sigma**2)) for i in range(size)]
    s = sum(taps)
    return [t / s for t in taps]


def ref_ssim_gaussian(a, b):
    size = 11
    taps = gaussian_taps(size)
    h, w, channels = a.shape
    values = []
    for c in range(channels):
        xa = a[:, :, c]
        xb = b[:, :, c]
        local = []
        for i in range(h - size + 1):
            for j in range(w - size + 1):
                mu_a = mu_b = 0.0
                for u in range(size):
                    for v in range(size):
                        weight = taps[u] * taps[v]
                        mu_a += weight * xa[i + u, j + v]
                        mu_b += weight * xb[i + u, j + v]
                var_a = var_b = cov = 0.0
                for u in range(size):
                    for v in range(size):
                        weight = taps[u] * taps[v]
                        var_a += weight * xa[i + u, j + v] ** 2
                        var_b += weight * xb[i + u, j + v] ** 2
                        cov += weight * xa[i + u, j + v] * xb[i + u, j + v]
                var_a -= mu_a**2
                var_b -= mu_b**2
                cov -= mu_a * mu_b
                local.append(
                    (2 * mu_a * mu_b + C1)
                    * (2 * cov + C2)
                    / ((mu_a**2 + mu_b**2 + C1) * (var_a + var_b + C2))
                )
        values.append(sum(local) / len(local))
    return sum(values) / len(values)


def pattern(height, width, channels, phase=0.0):
    img = np.zeros((height, width, channels))
    for i in range(height):
        for j in range(width):
            for c in range(channels):
                img[i, j, c] = 0.45 + 0.45 * math.sin(
                    0.7 * i + 1.3 * j + 2.1 * c + phase
                )
    return img


def pseudo_noise(shape, seed, amplitude):
    rng = np.random.default_rng(seed)
    return amplitude * (2.0 * rng.random(shape) - 1.0)


def build_fixtures():
    fixtures = []

    base = pattern(16, 16, 1)
    fixtures.append(("identical_pattern_16x16x1", base, base.copy()))

    fixtures.append(
        (
            "constant_0.2_vs_0.6_16x16x1",
            np.full((16, 16, 1), 0.2),
            np.full((16, 16, 1), 0.6),
        )
    )

    fixtures.append(
        ("zeros_vs_ones_2x2x1", np.zeros((2, 2, 1)), np.ones((2, 2, 1)))
    )

    a = np.clip(pattern(12, 12, 1), 0.0, 0.9)
    fixtures.append(("uniform_diff_0.1_12x12x1", a, a + 0.1))

    a = pattern(24, 24, 3)
    b = np.clip(a + pseudo_noise(a.shape, seed=1234, amplitude=0.12), 0.0, 1.0)
    fixtures.append(("textured_vs_noisy_24x24x3", a, b))

    a = pattern(24, 24, 1, phase=0.4)
    b = np.clip(a + pseudo_noise(a.shape, seed=99, amplitude=1e-6), 0.0, 1.0)
    fixtures.append(("tiny_perturbation_24x24x1", a, b))

    return fixtures


def main():
    out = []
    for name, a, b in build_fixtures():
        h, w, c = a.shape
        entry = {
            "name": name,
            "height": h,
            "width": w,
            "channels": c,
            "a": a.ravel().tolist(),
            "b": b.ravel().tolist(),
            "mse": ref_mse(a, b),
            "psnr": ref_psnr(a, b),
            "ssim_global": ref_ssim_global(a, b),
            "ssim_gaussian": ref_ssim_gaussian(a, b)
            if min(h, w) >= 11
            else None,
        }
        out.append(entry)
    path = Path(__file__).resolve().parent.parent / "fixtures" / "metrics_golden.json"
    path.write_text(json.dumps({"c1": C1, "c2": C2, "fixtures": out}, indent=1) + "\n")
    print(f"wrote {path} ({len(out)} fixtures)")


if __name__ == "__main__":
    main()
