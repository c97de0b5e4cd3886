"""BCWD logistic regression: GOLS-I against fixed steps {1, 10, 100}.

One CSV per (optimizer, seed) goes to --out; the final full training loss of
each run is printed as a table.
"""

import argparse
from pathlib import Path

import numpy as np

from golsi import problems
from golsi.cli import repeat_seeds
from golsi.sampler import Mode, SamplerMode
from golsi.train import RunConfig, eval_stats, run, write_records


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--batch", type=int, default=100)
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--cadence", type=int, default=1000)
    p.add_argument("--out", default="runs/bcwd")
    args = p.parse_args()

    problem = problems.bcwd("LogR")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    variants = [("gols-i", 1.0)] + [("fixed", a) for a in (1.0, 10.0, 100.0)]
    table = {}
    for opt, alpha in variants:
        label = opt if opt == "gols-i" else f"fixed-{alpha:g}"
        finals = []
        for r, (init_seed, sampler_seed) in enumerate(repeat_seeds(0, args.repeats)):
            cfg = RunConfig(SamplerMode(Mode.DYNAMIC, args.batch), opt, fixed_alpha=alpha,
                            max_func_evals=args.budget, metric_cadence=args.cadence,
                            init_seed=init_seed, sampler_seed=sampler_seed, run_id=f"{label}-{r:03d}")
            recs = run(cfg, problem)
            write_records(out / f"{label}_{r:03d}.csv", recs)
            st = eval_stats(recs)
            finals.append(np.inf if st.diverged else st.final_loss)
        table[label] = np.array(finals)
        print(f"{label:>12}: median {np.median(finals):.3e}  min {np.min(finals):.3e}  "
              f"max {np.max(finals):.3e}")
    wins = int(np.sum(table["gols-i"] < table["fixed-1"]))
    print(f"GOLS-I below fixed alpha=1 in {wins}/{args.repeats} paired seeds")


if __name__ == "__main__":
    main()
