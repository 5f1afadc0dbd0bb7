"""`halu-forge` command line."""

import argparse
import asyncio
import sys
from typing import List, Optional

from loguru import logger

from ..core.errors import HaluForgeError
from ..core.logging import configure_logging
from ..prompts.engine import PromptKind
from .config import flag_overrides, load_run_config
from .orchestrator import COMMANDS, Orchestrator


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="halu-forge",
        description="Build hallucinated-report datasets from CVE patches and score classifiers.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="run configuration YAML")
    parser.add_argument("--mock", action="store_true", help="offline mock backends and fixtures")
    parser.add_argument("--seed", type=int, help="base seed")
    parser.add_argument("--prompt", choices=[k.value for k in PromptKind], help="prompt family")
    parser.add_argument("--rounds", type=int, help="selection rounds")
    parser.add_argument("--p", type=float, help="fraction selected for fine-tuning")
    parser.add_argument("--pair-lock", action="store_true",
                        help="select vulnerable/fixed pairs together")
    parser.add_argument("--report-filter", help="'all' or one backend name")
    parser.add_argument("--log-level", default="INFO")
    parser.add_argument("--json-logs", action="store_true")
    return parser


async def _run(args: argparse.Namespace) -> None:
    overrides = flag_overrides(mock=args.mock, seed=args.seed, prompt=args.prompt,
                               rounds=args.rounds, p=args.p, pair_lock=args.pair_lock,
                               report_filter=args.report_filter)
    config = await load_run_config(args.config, overrides)
    orchestrator = Orchestrator(config)
    for context in await orchestrator.run(args.command):
        if context.stage == "census":
            print(context.metadata["table"])


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level, args.json_logs)
    try:
        asyncio.run(_run(args))
    except HaluForgeError as e:
        logger.error("{} ({})", e.message, e.code)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
