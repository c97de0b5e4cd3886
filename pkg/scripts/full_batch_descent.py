"""Full-batch GOLS-I on BCWD logistic regression: where does the loss go up?

Lists every iteration whose full training loss exceeds the previous one,
with the termination branch that produced the step.
"""

import argparse

import numpy as np

from golsi import problems
from golsi.cli import repeat_seeds
from golsi.sampler import Mode, SamplerMode
from golsi.train import RunConfig, run_lssgd


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--budget", type=int, default=3000)
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args()

    problem = problems.bcwd("LogR")
    for r, (init_seed, sampler_seed) in enumerate(repeat_seeds(0, args.repeats)):
        cfg = RunConfig(SamplerMode(Mode.FULL), max_func_evals=args.budget,
                        init_seed=init_seed, sampler_seed=sampler_seed)
        recs = run_lssgd(cfg, problem)
        loss = np.array([x.loss for x in recs])
        up = np.flatnonzero(np.diff(loss) > 0)
        print(f"run {r}: {len(recs)} iterations, final loss {loss[-1]:.3e}, {up.size} increases")
        for i in up:
            nxt = recs[i + 1]
            print(f"    n={nxt.n:<5} {loss[i]:.6e} -> {loss[i + 1]:.6e}  "
                  f"(+{(loss[i + 1] - loss[i]) / loss[i]:.1e} rel)  {nxt.term}  alpha={nxt.alpha:.4g}")


if __name__ == "__main__":
    main()
