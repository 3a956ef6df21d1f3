"""Run the three scenarios over several seeds, analyze each run against its baseline and tabulate.

    python3 scripts/run_scenarios.py --seeds 0 1 2 3 4 --duration 10 --out runs/
"""
import argparse
import json
import logging
from pathlib import Path

import numpy as np

from husl.harness import analyze_run, compare_runs, config_from_dict, run_scenario

SCENARIOS = ("baseline", "static_payload", "dynamic_balancing")
log = logging.getLogger("run_scenarios")


def run_seed(seed: int, duration: float, out: Path | None, overrides: dict) -> dict:
    logs = {}
    for name in SCENARIOS:
        doc = json.loads(json.dumps(overrides))
        doc.setdefault("scenario", {}).update({"scenario": name, "seed": seed, "duration": duration})
        cfg = config_from_dict(doc)
        path = None if out is None else out / f"{name}_seed{seed}.csv"
        result = run_scenario(cfg, path)
        logs[name] = result.log
        log.info("seed %d %s: %d rows, %s", seed, name, len(result.rows), result.status)
    reports = {name: analyze_run(logs[name], logs["baseline"]) for name in SCENARIOS}
    if out is not None:
        for name, rep in reports.items():
            (out / f"{name}_seed{seed}.json").write_text(rep.to_json())
    return reports


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    p.add_argument("--duration", type=float, default=10.0)
    p.add_argument("--config", help="JSON config whose sections override the defaults")
    p.add_argument("--out", help="directory for logs, reports and the summary table")
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    overrides = json.loads(Path(args.config).read_text()) if args.config else {}
    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    wins_dtw = wins_gcsm = wins_orient = 0
    lines = []
    for seed in args.seeds:
        reps = run_seed(seed, args.duration, out, overrides)
        s, d = reps["static_payload"], reps["dynamic_balancing"]
        wins_dtw += d.dtw_to_baseline is not None and s.dtw_to_baseline is not None \
            and d.dtw_to_baseline < s.dtw_to_baseline
        wins_gcsm += d.gcsm_median is not None and s.gcsm_median is not None and d.gcsm_median < s.gcsm_median
        wins_orient += d.orientation_error is not None and s.orientation_error is not None \
            and d.orientation_error < s.orientation_error
        table = compare_runs([(n, reps[n]) for n in SCENARIOS])
        lines.append(f"## seed {seed}\n\n{table.render()}")
    n = len(args.seeds)
    summary = (f"dynamic < static over {n} seeds: DTW {wins_dtw}/{n}, GCSM median {wins_gcsm}/{n}, "
               f"orientation error {wins_orient}/{n}")
    print(summary)
    if out is not None:
        (out / "summary.md").write_text("\n".join(lines) + "\n" + summary + "\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
