import argparse
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from commands import baseline, curves, evaluate, hybrid, train
from config import settings
from models.manifest import RunManifest
from utils.errors import BrakingLabError, ConfigError
from utils.files import ensure_dir, write_manifest

# Load environment variables
load_dotenv()

logging.basicConfig(
    level=logging.DEBUG if settings.DEBUG else settings.LOG_LEVEL,
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="braking-lab",
        description="Three-vehicle emergency braking: simulator, baseline, learners and hybrid shield",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (train, evaluate, baseline, hybrid, curves):
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    started_at = datetime.now(timezone.utc).isoformat()
    clock = time.perf_counter()

    try:
        out_dir = ensure_dir(args.out or str(Path(settings.OUTPUT_DIR) / args.command))
        result = args.handler(args, out_dir)
    except ConfigError as exc:
        logger.error(f"Invalid configuration for '{args.command}'")
        for issue in exc.issues:
            print(f"error: {issue}", file=sys.stderr)
        return EXIT_USAGE
    except BrakingLabError as exc:
        logger.error(f"'{args.command}' failed: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    manifest = RunManifest(
        command=args.command,
        argv=argv,
        config_paths=result.config_paths or {},
        resolved_config=result.resolved_config,
        seed=settings.DEFAULT_SEED if args.seed is None else args.seed,
        tool_version=settings.TOOL_VERSION,
        output_dir=str(out_dir),
        started_at=started_at,
        wall_clock_seconds=time.perf_counter() - clock,
        outputs=[str(path) for path in result.outputs],
    )
    write_manifest(manifest, out_dir)
    logger.info(f"'{args.command}' finished in {manifest.wall_clock_seconds:.1f}s, outputs in {out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
