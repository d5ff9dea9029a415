# lab.py
"""
Command Line Entry - Routing Layer Only

Parses the command line and delegates all work to services.cli.commands.

Commands:
- gen-data  → cmd_gen_data   (synthetic or WAV dataset, train/test split)
- train     → cmd_train      (SGD training, checkpoint)
- eval      → cmd_eval       (per-class test accuracy)
- attack    → cmd_attack     (--kind uap | target | deepfool)
- dominance → cmd_dominance  (dominant-class analysis of stored perturbations)
- svd       → cmd_svd        (singular-value decay, subspace sweep, vector eval, volume probe)

Every command prints its JSON summary on stdout. Expected failures print
one `error code=... message=...` line on stderr and exit with status 2.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

from config import LAB_LOG_LEVEL, LAB_THREADS
from services.cli.commands import cmd_attack, cmd_dominance, cmd_eval, cmd_gen_data, cmd_svd, cmd_train
from services.cli.experiment_config import load_experiment
from services.core.errors import LabError
from services.core.runtime import configure_runtime

logger = logging.getLogger("lab")

COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "eval": cmd_eval,
    "dominance": cmd_dominance,
    "svd": cmd_svd,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lab", description="Universal perturbation laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ["gen-data", "train", "eval", "attack", "dominance", "svd"]:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", default=None, help="experiment JSON (preset + overrides)")
        cmd.add_argument("--seed", type=int, default=None, help="master seed override")
        cmd.add_argument("--out", default=None, help="artifact directory override")
        cmd.add_argument("--threads", type=int, default=LAB_THREADS, help="worker cap")
        if name == "attack":
            cmd.add_argument("--kind", choices=["uap", "target", "deepfool"], required=True)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        workers = configure_runtime(args.threads)
        cfg = load_experiment(args.config, seed=args.seed, out=args.out)
        logger.info(f"🚀 lab {args.command}: preset={cfg.preset}, seed={cfg.seed}, out={cfg.output_dir}")
        if args.command == "attack":
            summary = cmd_attack(cfg, args.kind, workers=workers)
        else:
            summary = COMMANDS[args.command](cfg, workers=workers)
    except LabError as e:
        logger.error(f"❌ {e.code}: {e.message}")
        print(e.to_line(), file=sys.stderr)
        return 2
    except Exception as e:
        logger.exception(f"❌ Unexpected failure in lab {args.command}")
        print(f"error code=INTERNAL message={json.dumps(str(e))}", file=sys.stderr)
        return 1
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return 0


def main() -> None:
    logging.basicConfig(
        level=getattr(logging, LAB_LOG_LEVEL, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    sys.exit(run())


if __name__ == "__main__":
    main()
