"""Command-line entry point: ``anneal certify | run | verify``.

JSON goes to stdout, the human report and logs to stderr. Exit codes: 0 on
success, 1 on bad input or a failed check, 2 when a certificate needs more
final-stage steps than the budget allows.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from .config import AnnealConfig, build_config
from .convergence import certify, format_report
from .domain import BoundedDomain, estimate_expected_value
from .errors import AnnealError, InfeasibleCertificateError
from .guarantees import Certificate, GuaranteeSpec
from .logs import console, get_logger, setup_logging
from .registry import available, get_function
from .rng import REPORT_STREAM, chain_rng
from .sampler import Proposal, Schedule, TraceWriter, best_replica, default_schedule, run_replicas, run_schedule
from .target import TargetSpec
from .verify import SUITES, SuiteSettings, run_suite

logger = get_logger("anneal")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INFEASIBLE = 2


def _certificate_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, help="Value imprecision in [0, 1]")
    p.add_argument("--alpha", type=float, help="Residual domain fraction in (0, 1]")
    p.add_argument("--sigma", type=float, help="Target confidence of the equilibrium bound (default: 0.95)")
    p.add_argument("--tv", type=float, help="Total-variation target for the final stage (default: 0.05)")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--delta", type=float, help="Fixed density offset delta > 0")
    group.add_argument("--optimize-delta", action="store_true", default=None, help="Pick delta for the smallest J")
    group.add_argument("--min-steps", action="store_true", default=None, help="Pick delta for the smallest step count k")
    p.add_argument("--budget", type=int, help="Final-stage step budget (default: 1e9, env ANNEAL_CERT_BUDGET)")


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file (default: etc/anneal.json when present)")
    p.add_argument("--out", help="Directory for output files")
    p.add_argument("--log-file", help="Optional log file path")
    p.add_argument("--verbose", action="store_true", default=None, help="Debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anneal", description="Simulated annealing with finite-time certificates")
    sub = parser.add_subparsers(dest="command", required=True)

    p_cert = sub.add_parser("certify", help="Compute a certificate (J, delta, k, confidence)")
    _certificate_flags(p_cert)
    p_cert.add_argument("--proposal", help="uniform | walk:<scale> | mix:<w>,<scale> (default: uniform)")
    _common_flags(p_cert)

    p_run = sub.add_parser("run", help="Run an annealing chain on a registry function")
    p_run.add_argument("--function", help=f"Registry name ({', '.join(available())}, optional -noisy suffix)")
    p_run.add_argument("--dim", type=int, help="Dimension for family names")
    p_run.add_argument("--J", type=float, help="Final inverse temperature (skips certification)")
    p_run.add_argument("--steps", type=int, help="Final-stage steps when --J is given")
    p_run.add_argument("--seed", type=int, help="Random seed (default: 0)")
    p_run.add_argument("--proposal", help="uniform | walk:<scale> | mix:<w>,<scale> (default: uniform)")
    p_run.add_argument("--replicas", type=int, help="Independent replica chains (default: 1)")
    p_run.add_argument("--decimate", type=int, help="Keep every n-th step in the trace (default: 1)")
    _certificate_flags(p_run)
    _common_flags(p_run)

    p_ver = sub.add_parser("verify", help="Run the verification battery")
    p_ver.add_argument("--suite", choices=SUITES, help="Check suite (default: all)")
    p_ver.add_argument("--seed", type=int, help="Random seed (default: 0)")
    p_ver.add_argument("--samples", type=int, help="Exact samples per sigma check (default: 20000)")
    p_ver.add_argument("--mc", type=int, help="Monte Carlo points per exceedance estimate (default: 10000)")
    p_ver.add_argument("--chain-steps", type=int, help="Chain length for sampling checks (default: 100000)")
    p_ver.add_argument("--tv-steps", type=int, help="Steps of exact TV powering (default: 100000)")
    p_ver.add_argument("--battery", type=int, help="Random sigma-bound configs (default: 20)")
    _common_flags(p_ver)
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def _write_json(out_dir: Optional[str], name: str, payload: dict) -> None:
    text = json.dumps(payload, indent=2)
    print(text)
    if out_dir:
        path = Path(out_dir) / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n", encoding="utf-8")
        logger.info(f"wrote {path}")


def _uniform_weight(proposal: str, domain: Optional[BoundedDomain] = None) -> float:
    return Proposal.parse(proposal, domain or BoundedDomain([0.0], [1.0])).uniform_weight


def _certificate(config: AnnealConfig, uniform_weight: float) -> Certificate:
    if config.epsilon is None or config.alpha is None:
        raise AnnealError("a certificate needs both --epsilon and --alpha")
    spec = GuaranteeSpec(epsilon=config.epsilon, alpha=config.alpha, sigma_target=config.sigma)
    return certify(
        spec,
        config.tv,
        uniform_weight=uniform_weight,
        mode=config.delta_mode,
        delta=config.delta,
        budget=config.budget,
    )


def _report_infeasible(config: AnnealConfig, exc: InfeasibleCertificateError, name: str) -> int:
    console.print(format_report(exc.certificate), end="", markup=False, highlight=False)
    _write_json(config.out, name, exc.certificate.to_json_dict())
    logger.error(str(exc))
    return EXIT_INFEASIBLE


def cmd_certify(config: AnnealConfig) -> int:
    try:
        cert = _certificate(config, _uniform_weight(config.proposal))
    except InfeasibleCertificateError as exc:
        return _report_infeasible(config, exc, "certificate.json")
    console.print(format_report(cert), end="", markup=False, highlight=False)
    _write_json(config.out, "certificate.json", cert.to_json_dict())
    return EXIT_OK


def _schedule_and_target(config: AnnealConfig, cert: Optional[Certificate], mueller: bool) -> tuple[Schedule, TargetSpec]:
    if cert is not None:
        target = cert.target
        steps = cert.k
    else:
        if config.J is None or config.delta is None:
            raise AnnealError("run needs --J and --delta, or --epsilon/--alpha for a certified run")
        target = TargetSpec(J=config.J, delta=config.delta)
        steps = config.steps
    if mueller:
        target = target.for_mueller()
    if config.schedule:
        schedule = Schedule.of(*config.schedule)
        if schedule.final.J != target.J:
            raise AnnealError(f"configured schedule ends at J = {schedule.final.J}, target J is {target.J}")
        return schedule, target
    if steps is None:
        raise AnnealError("run needs --steps (or a schedule in the config file)")
    return default_schedule(target.J, steps), target


def cmd_run(config: AnnealConfig) -> int:
    if not config.function:
        raise AnnealError("run needs --function")
    try:
        entry = get_function(config.function, config.dim)
    except KeyError as exc:
        raise AnnealError(exc.args[0]) from exc
    criterion = entry.noisy if entry.is_noisy else entry.criterion
    proposal = Proposal.parse(config.proposal, entry.domain)

    cert = None
    if config.wants_certificate:
        try:
            cert = _certificate(config, proposal.uniform_weight)
        except InfeasibleCertificateError as exc:
            return _report_infeasible(config, exc, "certificate.json")
        console.print(format_report(cert), end="", markup=False, highlight=False)
    schedule, target = _schedule_and_target(config, cert, entry.is_noisy)
    logger.info(f"{entry.name}: schedule {schedule.as_pairs()} with {proposal.describe()}")

    trace_path = Path(config.out) / "trace.csv" if config.out else None
    if config.replicas > 1:
        runs = run_replicas(
            config.replicas, config.seed, schedule, target, proposal, criterion,
            decimate=config.decimate, keep_trace=trace_path is not None,
        )
        chosen = best_replica(runs)
        run = runs[chosen]
        if trace_path is not None:
            with TraceWriter(trace_path, entry.dim) as writer:
                for row in run.trace:
                    writer.write(*row)
    else:
        chosen = 0
        rng = chain_rng(config.seed, 0)
        start = entry.domain.sample_uniform(rng)
        if trace_path is not None:
            with TraceWriter(trace_path, entry.dim) as writer:
                run = run_schedule(
                    start, schedule, target, proposal, criterion, rng,
                    decimate=config.decimate, sink=writer, keep_trace=False,
                )
        else:
            run = run_schedule(start, schedule, target, proposal, criterion, rng, decimate=config.decimate, keep_trace=False)

    result: dict[str, Any] = {
        "function": entry.name,
        "dim": entry.dim,
        "seed": config.seed,
        "config": config.model_dump(mode="json", exclude={"out", "log_file", "verbose"}),
        "proposal": proposal.describe(),
        "schedule": [[J, k] for J, k in schedule.as_pairs()],
        "target": {"J": target.J, "delta": target.delta},
        "replica": chosen,
        "replicas": config.replicas,
        "total_steps": run.total_steps,
        "acceptance_rate": run.acceptance_rate,
        "best_point": run.best_point.tolist(),
        "best_value": run.best_value,
        "final_point": run.final_state.theta.tolist(),
        "final_value": run.final_state.value,
        "known_max_value": entry.max_value,
        "certificate": cert.to_json_dict() if cert is not None else None,
    }
    if entry.is_noisy:
        result["best_value_estimate"] = estimate_expected_value(
            entry.noisy, run.best_point, config.report_draws, chain_rng(config.seed, REPORT_STREAM)
        )
        result["best_value_exact"] = entry.criterion(run.best_point)
    _write_json(config.out, "result.json", result)
    return EXIT_OK


def cmd_verify(config: AnnealConfig) -> int:
    settings = SuiteSettings(
        seed=config.seed,
        samples=config.samples,
        mc=config.mc,
        chain_steps=config.chain_steps,
        tv_steps=config.tv_steps,
        battery=config.battery,
    )
    report = run_suite(config.suite, settings)
    _write_json(config.out, "verify.json", report.to_json_dict())
    return EXIT_OK if report.passed else EXIT_FAILED


_COMMANDS = {"certify": cmd_certify, "run": cmd_run, "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        config = build_config(flags, args.config)
        setup_logging("DEBUG" if config.verbose else None, config.log_file)
        return _COMMANDS[args.command](config)
    except (AnnealError, ValueError) as exc:
        print(f"[anneal] Failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
