"""Function evaluations per iteration for sigmoid nets of growing depth on BCWD."""

import argparse

from golsi import problems
from golsi.cli import repeat_seeds
from golsi.sampler import Mode, SamplerMode
from golsi.train import RunConfig, eval_stats, run_lssgd


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--depths", default="1,2,4,6,8,10")
    p.add_argument("--batch", type=int, default=100)
    p.add_argument("--budget", type=int, default=3000)
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args()

    print(f"{'hidden':>6} {'min':>4} {'mean':>6} {'max':>4} {'first':>6} {'later max':>10}")
    for depth in (int(d) for d in args.depths.split(",")):
        problem = problems.netpi_deep(depth)
        stats = []
        for init_seed, sampler_seed in repeat_seeds(depth, args.repeats):
            cfg = RunConfig(SamplerMode(Mode.DYNAMIC, args.batch), max_func_evals=args.budget,
                            metric_cadence=args.budget, init_seed=init_seed, sampler_seed=sampler_seed)
            stats.append(eval_stats(run_lssgd(cfg, problem)))
        iters = sum(s.iterations for s in stats)
        mean = sum(s.mean_fe * s.iterations for s in stats) / iters
        print(f"{depth:>6} {min(s.min_fe for s in stats):>4} {mean:>6.2f} "
              f"{max(s.max_fe for s in stats):>4} {max(s.first_fe for s in stats):>6} "
              f"{max(s.max_fe_after_first for s in stats):>10}")


if __name__ == "__main__":
    main()
