"""How often is the receiver-optimal implementable allocation randomized?

Samples random instances, keeps those where the first-best allocation fails the
incentive check, and counts non-deterministic optima by instance size.
"""
import argparse
import json
from dataclasses import asdict, dataclass

import numpy as np

from grimtrigger.ic import check_implementable
from grimtrigger.optimizer import constrained_optimum
from grimtrigger.random_instances import random_model


@dataclass
class SweepConfig:
    seed: int = 0
    instances: int = 200
    max_senders: int = 2
    max_types: int = 3
    max_outcomes: int = 4


def run(cfg: SweepConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    rows = {}
    found = 0
    while found < cfg.instances:
        n = int(rng.integers(1, cfg.max_senders + 1))
        counts = rng.integers(2, cfg.max_types + 1, size=n)
        R = int(rng.integers(2, cfg.max_outcomes + 1))
        m = random_model(rng, n, counts, R)
        opt = constrained_optimum(m)
        if check_implementable(m, opt.unconstrained.allocation).implementable:
            continue
        found += 1
        key = f"n={n} T={'x'.join(map(str, counts))} R={R}"
        hit = rows.setdefault(key, [0, 0])
        hit[0] += 1
        hit[1] += not opt.deterministic
    total = sum(r[1] for r in rows.values())
    return {"config": asdict(cfg), "randomized": total, "instances": found, "by_size": rows}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in asdict(SweepConfig()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=type(default), default=default)
    out = run(SweepConfig(**vars(ap.parse_args())))
    for key, (k, r) in sorted(out["by_size"].items()):
        print(f"{key:22s} {r:4d}/{k:<4d} randomized")
    print(f"total: {out['randomized']}/{out['instances']}")


if __name__ == "__main__":
    main()
