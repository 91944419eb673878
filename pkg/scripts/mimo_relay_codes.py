"""BLER of the two-antenna relay codes (p = 7) with the sphere decoder at 4-QAM."""
import argparse
from pathlib import Path

from fdstc import chansim as cs
from fdstc.presets import build


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results/mimo")
    args = ap.parse_args()

    scn = cs.RelayScenario(N=3, n_s=2, n_r=2, n_d=2)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("example3-code1", "example3-code2", "mimo_p7"):
        rows = cs.run_bler(build(name), scn, "sphere", [5, 10, 15, 20, 25], args.trials, args.seed,
                           threads=args.threads)
        (out / f"{name}.csv").write_text(cs.to_csv(rows))
        print(name)
        print(cs.to_csv(rows), end="")


if __name__ == "__main__":
    main()
