"""Compare the closed-form audit policy with the general optimizer on random draws."""
import argparse
from dataclasses import asdict, dataclass

import numpy as np

from grimtrigger.apps import AuditParams, FirmParams, audit_closed_form, gen_audit_model
from grimtrigger.model import Allocation, receiver_value
from grimtrigger.optimizer import constrained_optimum


@dataclass
class AuditSweepConfig:
    seed: int = 0
    draws: int = 200
    max_firms: int = 3
    margin: float = 1e-6  # skip draws this close to the fining threshold


def run(cfg: AuditSweepConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    agree = done = 0
    worst = 0.0
    while done < cfg.draws:
        firms = tuple(
            FirmParams(rng.uniform(0.1, 5.0), rng.uniform(0.01, 1.0), rng.uniform(0.05, 0.95))
            for _ in range(int(rng.integers(1, cfg.max_firms + 1)))
        )
        if any(abs(f.c / 2 - f.prior_pollute / (1 - f.prior_pollute)) < cfg.margin for f in firms):
            continue
        params = AuditParams(firms)
        m = gen_audit_model(params)
        sol = audit_closed_form(params)
        opt = constrained_optimum(m)
        closed = receiver_value(m, Allocation.constant(m, sol.outcome))
        worst = max(worst, abs(opt.value - closed))
        agree += abs(opt.value - closed) <= 1e-6
        done += 1
    return {"draws": done, "agree": agree, "max_value_diff": worst}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in asdict(AuditSweepConfig()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=type(default), default=default)
    out = run(AuditSweepConfig(**vars(ap.parse_args())))
    print(f"agree on {out['agree']}/{out['draws']} draws, max value difference {out['max_value_diff']:.3g}")


if __name__ == "__main__":
    main()
