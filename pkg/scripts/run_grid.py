"""Run the bundled experiment grid on a fresh simulated dataset.

Thin wrapper over the command line: generates data, writes a split manifest,
then walks every grid combo. Pass --epoch-scale 0.01 for a quick smoke pass.
"""

import argparse
import sys
from pathlib import Path

from pournet.cli import main as cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=300, help="simulated pours")
    ap.add_argument("--noise", type=float, default=0.01)
    ap.add_argument("--epoch-scale", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="grid_out")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = out / "data.jsonl"
    manifest = out / "manifest.json"

    steps = [
        ["generate", "--n", str(args.n), "--noise", str(args.noise),
         "--seed", str(args.seed), "--out", str(data)],
        ["split", "--data", str(data), "--seed", str(args.seed), "--out", str(manifest)],
        ["grid", "--data", str(data), "--manifest", str(manifest),
         "--epoch-scale", str(args.epoch_scale), "--lr", "0.001",
         "--seed", str(args.seed), "--out-dir", str(out)],
    ]
    for step in steps:
        code = cli(step)
        if code != 0:
            print(f"step {step[0]} failed with exit code {code}", file=sys.stderr)
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
