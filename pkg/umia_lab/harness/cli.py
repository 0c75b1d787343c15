"""Command line entry point: ``run``, ``suite``, ``game``, ``ulira`` and ``report``."""

from __future__ import annotations

import argparse
from dataclasses import replace
import json
import logging
from pathlib import Path
import sys
from typing import Sequence

from umia_lab.core.config import APP_NAME, OUTPUT
from umia_lab.core.errors import LabError

from .config_loader import ExperimentConfig, load_config, load_suite
from .experiment import resolve_output_root, run_experiment
from .game import play_game
from .report_io import render_aggregate
from .suite import run_suite
from .ulira_run import run_ulira


logger = logging.getLogger(__name__)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="reemplaza la lista de semillas del archivo")
    parser.add_argument(
        "--output",
        type=Path,
        default=None,
        help=f"raíz de salida (por defecto ${OUTPUT.env_var}, luego el archivo, luego ./{OUTPUT.root})",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=APP_NAME, description="Laboratorio de inferencia de pertenencia tras desaprendizaje"
    )
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="ejecuta un experimento")
    run.add_argument("config", type=Path)
    _common(run)

    suite = sub.add_parser("suite", help="ejecuta una rejilla de experimentos")
    suite.add_argument("grid", type=Path)
    suite.add_argument("--workers", type=int, default=1)
    _common(suite)

    game = sub.add_parser("game", help="juega el juego de pertenencia con el ataque entrenado")
    game.add_argument("config", type=Path)
    game.add_argument("--trials", type=int, default=1000)
    _common(game)

    ulira = sub.add_parser("ulira", help="ajusta y evalúa TC-ULiRA")
    ulira.add_argument("config", type=Path)
    _common(ulira)

    report = sub.add_parser("report", help="regenera aggregate.json a partir de los reportes por semilla")
    report.add_argument("run_dir", type=Path)
    return parser


def _config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seeds=(args.seed,))
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            outcome = run_experiment(_config(args), args.output)
            print(json.dumps({"directory": str(outcome.directory), "median": outcome.aggregate["median"]}, indent=2))
        elif args.command == "suite":
            name, entries = load_suite(args.grid)
            seeds = (args.seed,) if args.seed is not None else None
            root = args.output if args.output is not None else resolve_output_root(ExperimentConfig())
            frame = run_suite(entries, name=name, output_root=root, workers=args.workers, seeds=seeds)
            print(frame.to_string(index=False))
        elif args.command == "game":
            cfg = _config(args)
            result = play_game(cfg, args.trials, cfg.seeds[0], args.output)
            print(json.dumps(result.to_dict(), indent=2))
        elif args.command == "ulira":
            cfg = _config(args)
            for seed in cfg.seeds:
                outcome = run_ulira(cfg, seed, args.output)
                print(json.dumps({"seed": seed, "micro_f1": outcome.micro_f1, **outcome.fit.to_dict()}, indent=2))
        else:
            print(render_aggregate(args.run_dir))
    except LabError as exc:
        logger.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
