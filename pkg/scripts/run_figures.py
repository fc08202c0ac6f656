"""Run the benchmark presets (angle sweep, double threshold, sigmoid, annulus) and print a table.

    python3 scripts/run_figures.py --out results [--quick] [fig5 fig6 ...]
"""
import argparse
import time

from calitho import presets


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", default=sorted(presets.PRESETS))
    ap.add_argument("--out", default="results")
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    for name in args.names:
        t0 = time.perf_counter()
        rows = presets.run(name, args.out, quick=args.quick)
        print(f"== {name} ({time.perf_counter() - t0:.1f} s)")
        for label, err in rows:
            print(f"  {label:28s} {err:.6f}")


if __name__ == "__main__":
    main()
