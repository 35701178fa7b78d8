import logging
from collections.abc import Callable
from dataclasses import dataclass

from core.errors import CMAError, JobReferenceError, PreconditionError
from core.report import CommandResult, Report, RunStep
from services.algebra import GradedRing
from services.approximation import ding_index, mcm_approximation
from services.canonical import canonical_module, codepth, depth, is_cohen_macaulay, is_mcm, omega_rank
from services.complexes import betti_table, ext_total_dim
from services.fundamental import fundamental_module
from services.job_parser import JobDescription, build_module, build_ring
from services.modules import GradedModule
from services.representing import invariants, mcm_approximation_dual_route, representing_complex

logger = logging.getLogger(__name__)

RING_COMMANDS = ("canonical", "index", "fundamental")


@dataclass
class RunOptions:
    window: int | None = None
    length: int | None = None
    nmax: int | None = None


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------
def _approx(ring: GradedRing, name: str | None, N: GradedModule, opts: RunOptions) -> CommandResult:
    result = mcm_approximation(N)
    certs = result.certify()
    rc = representing_complex(N, opts.window, result)
    table = invariants(N, opts.window, rc)
    certs["invariants_crosscheck"] = table.crosscheck
    return CommandResult(
        command="approx",
        module=name,
        results={
            **result.summary(),
            "gamma": table.gamma,
            "invariants": table.to_dict(),
            "approximation": result.approximation.to_dict(),
        },
        certificates=certs,
    )


def _hull(ring: GradedRing, name: str | None, N: GradedModule, opts: RunOptions) -> CommandResult:
    result = mcm_approximation(N)
    certs = result.certify()
    return CommandResult(
        command="hull",
        module=name,
        results={**result.summary(), "hull": result.hull.to_dict()},
        certificates=certs,
    )


def _rescomplex(ring: GradedRing, name: str | None, N: GradedModule, opts: RunOptions) -> CommandResult:
    rc = representing_complex(N, opts.window)
    certs = rc.verify()
    _, dual = mcm_approximation_dual_route(N, opts.window)
    certs["routes_agree"] = dual.multiplicities() == rc.multiplicities()
    return CommandResult(command="rescomplex", module=name, results=rc.to_dict(), certificates=certs)


def _invariants(ring: GradedRing, name: str | None, N: GradedModule, opts: RunOptions) -> CommandResult:
    table = invariants(N, opts.window)
    return CommandResult(
        command="invariants",
        module=name,
        results={**table.to_dict(), "table": table.rows()},
        certificates={"crosscheck": table.crosscheck},
    )


def _betti(ring: GradedRing, name: str | None, N: GradedModule, opts: RunOptions) -> CommandResult:
    length = ring.dim + 1 if opts.length is None else opts.length
    table = betti_table(N, length)
    return CommandResult(command="betti", module=name, results={**table.to_dict(), "table": table.rows()})


def _is_mcm(ring: GradedRing, name: str | None, N: GradedModule, opts: RunOptions) -> CommandResult:
    return CommandResult(
        command="is-mcm",
        module=name,
        results={"is_mcm": is_mcm(N), "depth": depth(N), "codepth": codepth(N), "dim": ring.dim},
    )


def _canonical(ring: GradedRing, name: str | None, N: GradedModule | None, opts: RunOptions) -> CommandResult:
    canon = canonical_module(ring)
    return CommandResult(
        command="canonical",
        results={**canon.to_dict(), "hilbert": ring.hilbert.to_dict()},
        certificates={"cohen_macaulay": is_cohen_macaulay(ring), **canon.certificate},
    )


def _index(ring: GradedRing, name: str | None, N: GradedModule | None, opts: RunOptions) -> CommandResult:
    n, values = ding_index(ring, opts.nmax)
    return CommandResult(
        command="index",
        results={"index": n, "gamma": {str(k): v for k, v in values.items()}},
    )


def _fundamental(ring: GradedRing, name: str | None, N: GradedModule | None, opts: RunOptions) -> CommandResult:
    fm = fundamental_module(ring)
    E = fm.module
    results = fm.to_dict()
    results["omega_rank"] = omega_rank(E)
    try:
        results["ext1_self"] = ext_total_dim(E, E, 1)
    except PreconditionError as e:
        logger.warning(f"[fundamental] Ext^1(E, E) not computed: {e}")
        results["ext1_self"] = None
    certs = results.pop("certificates")
    return CommandResult(command="fundamental", results=results, certificates=certs)


HANDLERS: dict[str, Callable[..., CommandResult]] = {
    "approx": _approx,
    "hull": _hull,
    "rescomplex": _rescomplex,
    "invariants": _invariants,
    "fundamental": _fundamental,
    "betti": _betti,
    "is-mcm": _is_mcm,
    "canonical": _canonical,
    "index": _index,
}


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------
def _targets(job: JobDescription, module: str | None) -> list[str]:
    if module is not None:
        job.spec(module)
        return [module]
    if job.run.module is not None:
        return [job.run.module]
    if not job.module:
        raise JobReferenceError("*")
    return job.module_names()


def _dispatch(report: Report, ring: GradedRing, job: JobDescription, command: str, module: str | None, opts: RunOptions) -> None:
    handler = HANDLERS[command]
    if command in RING_COMMANDS:
        logger.info(f"[{command}] Started on {ring}")
        report.add(handler(ring, None, None, opts))
        return
    for name in _targets(job, module):
        N = build_module(job, name, ring)
        logger.info(f"[{command}:{name}] Started, mu = {N.mu}")
        report.add(handler(ring, name, N, opts))
        logger.info(f"[{command}:{name}] Done")


def run(
    job: JobDescription,
    command: str = "run",
    module: str | None = None,
    window: int | None = None,
    length: int | None = None,
    nmax: int | None = None,
    report: Report | None = None,
) -> Report:
    """Execute one command, or every command of the [run] section for ``run``.

    Pass ``report`` to keep the partial report when a command raises.
    """
    report = Report(command=command) if report is None else report
    report.command = command
    opts = RunOptions(window, length, nmax)
    try:
        # --- Step 1: Ring ---
        report.update(RunStep.PARSING, "Building ring")
        ring = build_ring(job)
        report.ring = ring.to_dict()

        # --- Step 2: Compute ---
        commands = list(job.run.commands) if command == "run" else [command]
        for cmd in commands:
            report.update(RunStep.COMPUTING, f"Running {cmd}")
            _dispatch(report, ring, job, cmd, module, opts)

        # --- Step 3: Verify ---
        report.update(RunStep.VERIFYING, "Collecting certificates")
        failed = _failed_flags(report.certificates)
        if failed:
            logger.warning(f"[{command}] Certificates reported false: {failed}")

        report.update(RunStep.COMPLETED, f"{len(report.results)} result(s)")
        logger.info(f"[{command}] Completed: {len(report.results)} result(s)")
        return report

    except CMAError as e:
        logger.exception(f"[{command}] Run failed: {e}")
        report.error = {"message": str(e), "type": type(e).__name__}
        report.update(RunStep.ERROR, str(e))
        raise
    except Exception as e:
        logger.exception(f"[{command}] Unexpected failure: {e}")
        report.error = {"message": str(e), "type": type(e).__name__}
        report.update(RunStep.ERROR, str(e))
        raise


def _failed_flags(certs: dict, prefix: str = "") -> list[str]:
    out = []
    for key, value in certs.items():
        label = f"{prefix}{key}"
        if value is False:
            out.append(label)
        elif isinstance(value, dict):
            out.extend(_failed_flags(value, f"{label}."))
    return out
