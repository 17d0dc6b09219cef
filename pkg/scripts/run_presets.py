"""Run every experiment preset through the CLI and collect the outputs.

    python3 scripts/run_presets.py            # full-scale presets
    python3 scripts/run_presets.py --scale    # desk-scale variants
"""

import argparse
import sys
import time

from nlkdv.cli import PRESETS, main


def run_all(out_dir: str, scale: bool, only=None) -> int:
    status = 0
    for name in only or PRESETS:
        preset = PRESETS[name]["desk" if scale else "full"]
        args = [preset["command"], "--preset", name, "--output", f"{out_dir}/{name}", "--workers", "2"]
        if scale:
            args.append("--scale")
        t0 = time.perf_counter()
        code = main(args)
        print(f"# {name}: exit {code} in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
        status = status or code
    return status


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results")
    p.add_argument("--scale", action="store_true")
    p.add_argument("presets", nargs="*", help=f"subset of: {', '.join(PRESETS)}")
    a = p.parse_args()
    unknown = set(a.presets) - set(PRESETS)
    if unknown:
        p.error(f"unknown presets: {', '.join(sorted(unknown))}")
    sys.exit(run_all(a.out, a.scale, a.presets or None))
