import argparse
import logging
import sys

from core.config import settings
from core.errors import CMAError
from core.report import Report
from services.job_parser import COMMANDS, load_job
from services.orchestrator import run
from utils.report_writer import emit_report

# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------
logging.basicConfig(
    level=settings.log_level,
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
)
logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Arguments
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cma",
        description=f"{settings.app_title} {settings.app_version}: MCM approximations, FID hulls and representing complexes",
    )
    parser.add_argument("command", choices=COMMANDS + ("run",), help="Computation to perform; 'run' executes the job's [run] list")
    parser.add_argument("jobfile", help="TOML job file")
    parser.add_argument("--module", default=None, help="Module name from the job file (default: all modules)")
    parser.add_argument("--window", type=int, default=None, help=f"Degree window (default: dim A + {settings.window_extra})")
    parser.add_argument("--json", action="store_true", help="Emit the JSON report instead of text")
    parser.add_argument("--char", type=int, default=None, help="Override the field characteristic")
    parser.add_argument("--length", type=int, default=None, help="Resolution length for 'betti' (default: dim A + 1)")
    parser.add_argument("--nmax", type=int, default=None, help=f"Largest n tried by 'index' (default: {settings.ding_index_nmax})")
    return parser


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------
def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fmt = "json" if args.json else "text"
    report = Report(command=args.command)
    try:
        job = load_job(args.jobfile, args.char)
        run(
            job,
            args.command,
            module=args.module,
            window=args.window,
            length=args.length,
            nmax=args.nmax,
            report=report,
        )
    except CMAError as e:
        logger.error(f"{type(e).__name__}: {e}")
        report.error = report.error or {"message": str(e), "type": type(e).__name__}
        emit_report(report, fmt)
        return e.exit_code
    except Exception as e:
        logger.exception(f"Internal error: {e}")
        report.error = report.error or {"message": str(e), "type": type(e).__name__}
        emit_report(report, fmt)
        return 3
    emit_report(report, fmt)
    return 0


if __name__ == "__main__":
    sys.exit(main())
