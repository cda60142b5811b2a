"""Command-line entry point: ``mubtomo <experiment> [options]``.

Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 numerical check failed.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import KINDS, ExperimentConfig, InvariantViolation, run_experiment

KIND_DEFAULTS = {
    "verify": {},
    "fig1": {"trials": 20_000},
    "fig2": {"trials": 20_000, "catalogs": ["090", "306"], "families": ["GHZ", "W"]},
    "fig3": {"shadow_samples": 500_000, "catalogs": ["090", "306"], "families": ["GHZ", "W"]},
    "shadow": {"shadow_samples": 10_000, "catalogs": ["090", "306"], "families": ["GHZ", "W"]},
    "crosscheck": {"trials": 10_000, "shots": 10_000},
}

CONFIG_KEYS = {"trials", "shadow_samples", "shots", "seed", "catalogs", "families", "out", "output_dir", "workers"}


def _int(text: str) -> int:
    return int(text, 0)


def _list(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mubtomo",
        description="Fisher-information error analysis of three-qubit MUB tomography.",
    )
    p.add_argument("kind", choices=KINDS, help="experiment to run")
    p.add_argument("--trials", type=_int, help="random states per family (fig1/fig2) or Monte Carlo trials")
    p.add_argument("--shadow-samples", type=_int, dest="shadow_samples", help="shadow samples per family")
    p.add_argument("--shots", type=_int, help="copies per basis in simulated experiments")
    p.add_argument("--seed", type=_int, help="master seed (decimal or 0x-prefixed)")
    p.add_argument("--catalogs", type=_list, help="comma-separated subset of 234,090,162,306")
    p.add_argument("--families", type=_list, help="comma-separated subset of GHZ,W,BIPARTITE,SEPARABLE")
    p.add_argument("--out", dest="output_dir", help="output directory (default: results)")
    p.add_argument("--workers", type=_int, help="worker processes (output does not depend on it)")
    p.add_argument("--config", help="flat JSON file with the same keys as the flags")
    return p


def parse_config(argv: list[str] | None = None) -> ExperimentConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    values: dict = dict(KIND_DEFAULTS[args.kind])
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config file: {exc}")
        if not isinstance(loaded, dict):
            parser.error("config file must hold a JSON object")
        unknown = set(loaded) - CONFIG_KEYS - {"kind"}
        if unknown:
            parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
        loaded.pop("kind", None)
        if "out" in loaded:
            loaded["output_dir"] = loaded.pop("out")
        for key in ("catalogs", "families"):
            if isinstance(loaded.get(key), str):
                loaded[key] = _list(loaded[key])
        values.update(loaded)
    for key in ("trials", "shadow_samples", "shots", "seed", "catalogs", "families", "output_dir", "workers"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    try:
        return ExperimentConfig(kind=args.kind, **values)
    except (TypeError, ValueError) as exc:
        parser.error(str(exc))


def main(argv: list[str] | None = None) -> int:
    config = parse_config(argv)
    try:
        report = run_experiment(config)
    except InvariantViolation as exc:
        print(f"mubtomo: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"mubtomo: I/O error: {exc}", file=sys.stderr)
        return 1
    for path in report.data + [report.meta] + report.plots:
        print(path)
    if config.kind == "verify":
        for name, sig in report.summary.items():
            print(f"catalog {name}: signature {sig}")
    if not report.passed:
        failed = report.summary.get("failed")
        print("mubtomo: checks failed" + (f": {', '.join(failed)}" if failed else ""), file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
