"""Write the synthetic year-long Hanoi fixture (network, sensor map, measurements)."""
import argparse

from semrl.synthetic import FixtureSpec, write_fixture


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("out", help="output directory")
    p.add_argument("--days", type=int, default=365)
    p.add_argument("--samples-per-day", type=int, default=24)
    p.add_argument("--seed", type=int, default=7)
    args = p.parse_args()
    spec = FixtureSpec(days=args.days, samples_per_day=args.samples_per_day, seed=args.seed)
    for name, path in write_fixture(args.out, spec).items():
        print(f"{name:>12}: {path}")


if __name__ == "__main__":
    main()
