"""3D Pendulum Optimal Control - Command line entry point

    python -m src.main simulate|solve|phase [--config PATH] [--out DIR] [--seed N] [--case i|ii|iii|iv|all ...]

Repeating --case (or --case all) runs the cases concurrently, one output
folder per case.
"""
import argparse
import asyncio
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .cases import case_ids
from .config import settings
from .errors import ConfigParseError, ConfigValidationError
from .models import RunMode, RunStatus, RunSummary
from .artifacts import write_summary_json
from .runner import ExitCode, batch_exit_code, build_config, case_configs, load_config, run, run_batch

logger = logging.getLogger(__name__)


def setup_logging(level: Optional[str] = None):
    """Configure application logging."""
    settings.ensure_directories()

    log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    log_file = os.path.join(settings.log_dir, 'pendulum.log')

    logging.basicConfig(
        level=getattr(logging, (level or settings.log_level).upper()),
        format=log_format,
        handlers=[
            logging.FileHandler(log_file, encoding='utf-8'),
            logging.StreamHandler()
        ],
        force=True,
    )

    # Reduce noise from external libraries
    logging.getLogger('asyncio').setLevel(logging.WARNING)


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="python -m src.main",
        description="Optimal reorientation of the controlled 3D pendulum",
    )
    parser.add_argument("mode", choices=[m.value for m in RunMode], help="What to compute")
    parser.add_argument("--config", type=str, default=None, help="Run config JSON")
    parser.add_argument("--out", type=str, default=None, help="Output directory (default: PENDULUM_OUTPUT_DIR)")
    parser.add_argument("--seed", type=int, default=None, help="Seed for multiplier guesses and random controls")
    parser.add_argument(
        "--case",
        action="append",
        choices=case_ids() + ["all"],
        default=None,
        help="Built-in case; repeat or use 'all' for a concurrent batch",
    )
    parser.add_argument("--log-level", type=str, default=None, help="Override PENDULUM_LOG_LEVEL")
    return parser.parse_args(argv)


def _selected_cases(requested: Optional[list[str]]) -> list[str]:
    if not requested:
        return []
    if "all" in requested:
        return case_ids()
    return list(dict.fromkeys(requested))


def _invalid_config_summary(mode: str, out: Path, error: Exception) -> None:
    out.mkdir(parents=True, exist_ok=True)
    summary = RunSummary(
        mode=RunMode(mode), status=RunStatus.INVALID_CONFIG, exit_code=int(ExitCode.INVALID_CONFIG), error=str(error)
    )
    write_summary_json(out / "summary.json", summary)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    setup_logging(args.log_level)

    cases = _selected_cases(args.case)
    overrides = {"mode": args.mode, "out": args.out, "seed": args.seed}
    if cases:
        overrides["case"] = cases[0]

    logger.info("=" * 60)
    logger.info(f"3D pendulum optimal control: {args.mode}")
    logger.info(f"Cases: {', '.join(cases) if cases else '(from config)'}")
    logger.info(f"Output directory: {os.path.abspath(args.out or settings.output_dir)}")
    logger.info("=" * 60)

    try:
        if args.config:
            config = load_config(args.config, overrides)
        else:
            config = build_config({k: v for k, v in overrides.items() if v is not None})
    except (ConfigParseError, ConfigValidationError) as e:
        logger.error(f"❌ {e}")
        _invalid_config_summary(args.mode, Path(args.out or settings.output_dir), e)
        return int(ExitCode.INVALID_CONFIG)

    if len(cases) > 1:
        base_out = config.out or settings.output_dir
        summaries = asyncio.run(run_batch(case_configs(config, cases, base_out)))
        for s in summaries:
            logger.info(f"Case {s.case_id}: {s.status.value} (exit {s.exit_code})")
        return batch_exit_code(summaries)

    summary = run(config)
    if summary.success:
        logger.info(f"✓ Run complete: {summary.status.value}")
    else:
        logger.error(f"Run ended with status {summary.status.value}: {summary.error}")
    return summary.exit_code


if __name__ == "__main__":
    sys.exit(main())
