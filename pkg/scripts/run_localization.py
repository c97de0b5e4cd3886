"""Minima vs SNN-GPP localization on Iris; writes histogram and summary CSVs."""

import argparse
from pathlib import Path

from golsi import analyze, problems


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--repeats", type=int, default=100)
    p.add_argument("--batch-sizes", default="10,25,50,75,100,150")
    p.add_argument("--warmup", type=int, default=0)
    p.add_argument("--out", default="runs/localization")
    args = p.parse_args()

    spec = analyze.ScanSpec(repeats=args.repeats, warmup_iters=args.warmup,
                            batch_sizes=tuple(int(b) for b in args.batch_sizes.split(",")))
    result = analyze.localization_study(problems.iris(), spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    analyze.write_histograms(out / "histograms.csv", result)
    analyze.write_summary(out / "summary.csv", result)

    print(f"full-batch optimum cell {result.optimum_cell}, full-batch minima {result.full_minima}")
    print(f"{'|B|':>5} {'minima/run':>11} {'snngpp/run':>11} {'minima std':>11} {'snngpp std':>11} {'ratio':>7}")
    for r in result.summary_rows():
        print(f"{r['batch_size']:>5} {r['minima_mean']:>11.2f} {r['snngpp_mean']:>11.2f} "
              f"{r['minima_std']:>11.2f} {r['snngpp_std']:>11.2f} {r['std_ratio']:>7.3f}")


if __name__ == "__main__":
    main()
