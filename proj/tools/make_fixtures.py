#!/usr/bin/env python3
"""Generate the synthetic CDS fixtures under data/.

Each fixture is a daily (business-day) CDS spread series in basis points,
built from a handful of contiguous regime episodes. Within an episode the
series follows the same discrete dynamics the engine calibrates to: the daily
log-return r follows

    r_{t+1} = r_t + (k0 - k1 r_t - k2 C_t) + sigma eps_t,   C_{t+1} = C_t + r_{t+1}

with C the running sum of returns and S_{t+1} = S_t exp(r_{t+1}). Episode
parameters are derived from (level mean, level stdev, daily return stdev)
exactly as the engine's calibrator does; on entering a new episode the drift
is rebased so the level is pulled from wherever it stands toward the new
episode's mean, which gives realistic ramp-ups instead of jumps.

The script prints the first date of every episode after the first; those are
the breakpoint dates the configs under configs/ use to split each series.
Regenerating with the default seed reproduces the committed files bit for bit.
"""

import argparse
import datetime as dt
import math
import random
from pathlib import Path

# (name, total business days, [(weight, level_mean, level_stdev, return_stdev)])
PROFILES = [
    (
        "cds_high_risk",
        2000,
        [
            (0.5612, 146.09, 103.90, 0.0445),
            (0.2888, 980.27, 363.36, 0.0520),
            (0.1500, 5770.43, 2917.45, 0.0805),
        ],
    ),
    (
        "cds_mid_risk",
        2500,
        [
            (0.278, 79.71, 45.48, 0.035),
            (0.154, 137.69, 28.54, 0.030),
            (0.150, 361.94, 68.99, 0.032),
            (0.149, 203.73, 26.66, 0.028),
            (0.269, 97.31, 15.82, 0.030),
        ],
    ),
    (
        "cds_low_risk",
        2500,
        [
            (0.25, 22.22, 23.54, 0.050),
            (0.20, 31.69, 8.85, 0.040),
            (0.15, 45.60, 13.98, 0.045),
            (0.20, 14.64, 3.73, 0.040),
            (0.20, 8.25, 1.93, 0.045),
        ],
    ),
]

K1 = 0.3  # per-day return damping used for generation
START = dt.date(2015, 1, 2)


def business_days(start, count):
    days = []
    d = start
    while len(days) < count:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return days


def episode_params(level_mean, level_stdev, return_stdev, entry_level):
    """Derive (k0, k1, k2, sigma) pulling entry_level toward level_mean."""
    vr = return_stdev * return_stdev
    cv2 = (level_stdev / level_mean) ** 2
    k2 = vr / math.log1p(cv2)
    sigma = math.sqrt(2.0 * K1 * vr)
    # Stationary mean of S is entry * exp(k0/k2 + sigma^2/(4 k1 k2)); solve
    # for k0 so that mean equals the episode target.
    k0 = k2 * math.log(level_mean / entry_level) - 0.5 * vr
    return k0, K1, k2, sigma


def simulate(profile, rng):
    name, total, episodes = profile
    weights = [e[0] for e in episodes]
    scale = total / sum(weights)
    lengths = [max(30, round(w * scale)) for w in weights]
    lengths[-1] += total - sum(lengths)

    values = []
    boundaries = []  # index of the first observation of each later episode
    level = episodes[0][1]
    ret = 0.0
    for (w, mean, stdev, rstdev), n in zip(episodes, lengths):
        if values:
            boundaries.append(len(values))
        k0, k1, k2, sigma = episode_params(mean, stdev, rstdev, level)
        integral = 0.0
        for _ in range(n):
            values.append(level)
            ret += k0 - k1 * ret - k2 * integral + sigma * rng.gauss(0.0, 1.0)
            integral += ret
            level *= math.exp(ret)
    return name, values, boundaries


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data", help="output directory")
    parser.add_argument("--seed", type=int, default=20150102)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)

    for profile in PROFILES:
        name, values, boundaries = simulate(profile, rng)
        days = business_days(START, len(values))
        path = out / f"{name}.csv"
        with open(path, "w") as f:
            f.write("date,value\n")
            for d, v in zip(days, values):
                f.write(f"{d.isoformat()},{v:.4f}\n")
        breakpoints = [days[b].isoformat() for b in boundaries]
        print(f"{path}: {len(values)} obs, breakpoints {breakpoints}")


if __name__ == "__main__":
    main()
