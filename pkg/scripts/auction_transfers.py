"""Count auction instances where a non-winner is charged a positive transfer."""
import argparse
from dataclasses import asdict, dataclass

import numpy as np

from grimtrigger.apps import AuctionParams, gen_auction_model


@dataclass
class AuctionConfig:
    seed: int = 0
    draws: int = 200
    max_types: int = 3


def run(cfg: AuctionConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    fails = {}
    for _ in range(cfg.draws):
        n = int(rng.integers(2, 5))
        T = rng.integers(1, cfg.max_types + 1, size=n)
        res = gen_auction_model(
            AuctionParams(tuple(rng.uniform(0.1, 10, size=k) for k in T), tuple(rng.uniform(0, 5, size=(n, k)) for k in T))
        )
        hit = fails.setdefault(n, [0, 0])
        hit[0] += 1
        hit[1] += not res.positive_iff_winner
    return fails


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in asdict(AuctionConfig()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=type(default), default=default)
    for n, (k, f) in sorted(run(AuctionConfig(**vars(ap.parse_args()))).items()):
        print(f"{n} bidders: {f}/{k} instances charge a non-winner or spare a winner")


if __name__ == "__main__":
    main()
