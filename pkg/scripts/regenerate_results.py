"""Run every config in configs/ and write the outputs into results/.

Each config in configs/ names its subcommand by its section. Sweeps of a
per-cavity observable are rerun for cavities n = 1, 2, 3.

    python scripts/regenerate_results.py [--workers 4] [--out results]
"""

import argparse
import configparser
import re
import time
from pathlib import Path

from srcurrent.cli import main as cli

ROOT = Path(__file__).resolve().parents[1]


def command_of(cfg_path: Path) -> str:
    cp = configparser.ConfigParser()
    cp.read(cfg_path)
    (cmd,) = [s for s in cp.sections() if s != "params"]
    return cmd, cp


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(ROOT / "results"))
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for cfg in sorted((ROOT / "configs").glob("*.ini")):
        cmd, cp = command_of(cfg)
        runs = [(cfg.stem, [])]
        obs = cp["sweep"].get("observable", "") if cmd == "sweep" else ""
        if re.search(r"\(\d\)", obs):
            runs = [(f"{cfg.stem}_n{n}", ["--observable", re.sub(r"\(\d\)", f"({n})", obs)])
                    for n in (1, 2, 3)]
        for name, extra in runs:
            argv = [cmd, "--config", str(cfg), "-o", str(out / f"{name}.csv"), *extra]
            if cmd == "sweep":
                argv += ["--workers", str(args.workers)]
            t0 = time.perf_counter()
            code = cli(argv)
            print(f"{name:28s} exit={code} {time.perf_counter() - t0:6.2f}s")

    # steady state and critical values at the reference detuned ladder
    point = ["--omega-c", "0.1", "--delta", "0.5", "--j", "0.2", "--kappa", "0.3", "--g", "0.35"]
    cli(["steady", *point, "-o", str(out / "steady_ladder.json")])
    cli(["critical", *point, "-o", str(out / "critical_ladder.json")])


if __name__ == "__main__":
    main()
