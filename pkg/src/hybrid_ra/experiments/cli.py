"""``simulate`` command line entry point.

Exit codes: 0 on success, 2 for configuration errors, 3 for I/O errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from ..exceptions import HybridRAError
from ..predictor import save_model, write_history_csv
from .fig2 import run_fig2
from .io import FIG2_HEADER, write_metadata, write_results_csv, write_results_json, write_rows_csv
from .runner import run_experiment
from .spec import PRESETS, SCHEMES, load_spec

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3

log = logging.getLogger("hybrid_ra")


def build_parser():
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Hybrid random-access Monte-Carlo experiments and forecaster comparison.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESETS), help="reproduce a figure preset")
    src.add_argument("--spec", metavar="FILE", help="flat JSON experiment description")
    p.add_argument("--seed", type=int, help="base seed (fig2: first training seed)")
    p.add_argument("--trials", type=int, help="trials per grid point (fig2: number of training seeds)")
    p.add_argument("--out", default="results", metavar="DIR", help="output directory (default: results)")
    p.add_argument("--scheme", choices=SCHEMES, help="run only this scheme")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="result table format")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _run_fig2(spec, args, out):
    if args.scheme:
        raise HybridRAError("--scheme does not apply to the fig2 forecaster comparison")
    if args.trials is not None or args.seed is not None:
        first = args.seed if args.seed is not None else spec.seeds[0]
        count = args.trials if args.trials is not None else len(spec.seeds)
        if count < 1 or first < 0:
            raise HybridRAError("--trials must be >= 1 and --seed >= 0")
        spec = dataclasses.replace(spec, seeds=tuple(range(first, first + count)))
    run = run_fig2(spec)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        with open(out / "fig2.json", "w") as fh:
            json.dump([dataclasses.asdict(r) for r in run.rows], fh, indent=1)
            fh.write("\n")
    else:
        write_rows_csv(run.rows, out / "fig2.csv", FIG2_HEADER)
    for (seed, name), est in run.estimators.items():
        stem = f"fig2_seed{seed}_{name}"
        write_history_csv(est.history_, out / f"{stem}_history.csv")
        save_model(est.model_, out / f"{stem}.json", est.get_params())
    first = spec.seeds[0]
    pred = run.predictions[first]
    with open(out / "fig2_predictions.csv", "w") as fh:
        fh.write("slot,actual,peak,attention,lstm\n")
        for k in range(len(pred["actual"])):
            fh.write(f"{k},{pred['actual'][k]},{pred['peak'][k]},"
                     f"{float(pred['attention'][k])!r},{float(pred['lstm'][k])!r}\n")
    write_metadata(out / "fig2.run.json", spec.to_dict(), {"seeds": list(spec.seeds)})
    for r in run.rows:
        print(f"seed={r.seed} {r.model:9s} rmse={r.test_rmse:.4f} coverage={r.coverage:.3f}")


def _run_sweep(spec, args, out):
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.scheme:
        changes["scheme"] = (args.scheme,)
    if changes:
        spec = dataclasses.replace(spec, **changes)
    rows = run_experiment(spec)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        write_results_json(rows, out / f"{spec.name}.json")
    else:
        write_results_csv(rows, out / f"{spec.name}.csv")
    write_metadata(out / f"{spec.name}.run.json", spec.to_dict(),
                   {"seed_derivation": "philox(key=seedsequence(seed, (R_mm, quantum_mm, num_preambles, Na, L)),"
                                       " counter=[0, 0, 0, trial])"})
    for r in rows:
        print(f"{r.scheme:11s} R={r.R:g} tp={r.num_preambles} Na={r.Na} "
              f"success={r.mean_success:.3f} +- {r.ci95:.3f}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    try:
        if args.preset:
            spec = PRESETS[args.preset]()
        else:
            spec = load_spec(args.spec)
        if args.preset == "fig2":
            _run_fig2(spec, args, out)
        else:
            _run_sweep(spec, args, out)
    except HybridRAError as exc:
        print(f"simulate: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"simulate: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
