"""Command-line front end.

stdout carries only the report (JSON or CSV); logs and error bodies go to
stderr. Exit codes: 0 success or accepted, 1 statistical disagreement or
channel rejection, 2 usage or validation error.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from typing import Optional, Sequence

from pydantic import BaseModel, ValidationError

from .attacks import entangle_measure_attack, fake_bm_attack, unitary_attack
from .channel import (
    decoy_detection_probability,
    intercept_resend_detection_probability,
    share_channel,
    sharing_statistics,
)
from .constants import EXIT_OK, RENORMALISE_WARN
from .exception_handlers import handle
from .logger_setup import setup_logging
from .ot import ENCODINGS, NAMED_STATES, repeated_learn_count, repeated_ot_probability, run_bit_batch
from .qot_exceptions import ChannelRejected, ConfigError, QotError, StatisticalDisagreement
from .rng import derive_seed
from .schemas import (
    AttackReport,
    BranchFrequency,
    ChannelParams,
    ChannelSummary,
    CurvePoint,
    Eavesdropper,
    FakeBmConfig,
    InputQubit,
    OtReport,
    OutputFormat,
    PauliAttackConfig,
    RunSpec,
    SharingConfig,
    SharingReport,
    SweepRow,
    TeleportReport,
    TranscriptOut,
    SWEEP_COLUMNS,
)
from .settings import get_settings
from .teleport import BELL_OUTCOMES, binomial_stderr, run_analytic, run_batch, run_sampled

logger = logging.getLogger(__name__)

AGREEMENT_SIGMA = 4.0
HONEST_FIDELITY = 1.0 - 1e-9
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
SWEEP_TRIALS = 1000

Outcome = tuple[str, Optional[QotError]]


def b2_value(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"b2 must be a number, got {text!r}") from None
    if not value > 0.0:
        raise argparse.ArgumentTypeError(f"b2={value} violates |b| > 0")
    if not value < 0.5:
        raise argparse.ArgumentTypeError(f"b2={value} violates |a| > |b|")
    return value


def parse_amplitudes(text: str, count: Optional[int] = None) -> list[complex]:
    try:
        values = [complex(token.strip().replace(" ", "")) for token in text.split(",")]
    except ValueError:
        raise ConfigError("amplitudes", text, "expected comma-separated numbers") from None
    if count is not None and len(values) != count:
        raise ConfigError("amplitudes", text, f"expected {count} values")
    return values


def parse_state(text: str) -> InputQubit:
    """Named state (0, 1, plus, minus) or 'alpha,beta' or 'alpha_re,alpha_im,beta_re,beta_im'."""
    if text in NAMED_STATES:
        return NAMED_STATES[text]
    values = parse_amplitudes(text)
    if len(values) == 2:
        alpha, beta = values
    elif len(values) == 4 and all(v.imag == 0 for v in values):
        alpha = complex(values[0].real, values[1].real)
        beta = complex(values[2].real, values[3].real)
    else:
        raise ConfigError("state", text, "expected a named state, two amplitudes or four reals")
    state, deviation = InputQubit.normalise(alpha, beta)
    if deviation > RENORMALISE_WARN:
        logger.warning("state %s renormalised (norm off by %.3e)", text, deviation)
    return state


def to_csv(rows: list[dict], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue().rstrip("\n")


def render(report: BaseModel, rows: list[dict], columns: Sequence[str], fmt: OutputFormat) -> str:
    if fmt is OutputFormat.CSV:
        return to_csv(rows, columns)
    return report.model_dump_json(indent=2)


def run_spec(
    args: argparse.Namespace, default_format: OutputFormat = OutputFormat.JSON, default_trials: int = 1
) -> RunSpec:
    return RunSpec(
        subcommand=args.command,
        b2=args.b2,
        state=parse_state(args.state),
        trials=default_trials if args.trials is None else args.trials,
        seed=args.seed,
        output_format=args.format or default_format,
        out=args.out,
        workers=args.workers,
    )


def _disagreement(field: str, expected: float, observed: float, stderr: float) -> Optional[StatisticalDisagreement]:
    sigma = abs(observed - expected) / stderr if stderr > 0 else (0.0 if observed == expected else math.inf)
    if sigma > AGREEMENT_SIGMA:
        return StatisticalDisagreement(field, expected, observed, sigma)
    return None


TRANSCRIPT_COLUMNS = (
    "seed", "b2", "alpha_re", "alpha_im", "beta_re", "beta_im", "bm_outcome", "m_outcome", "success", "fidelity",
)
BRANCH_COLUMNS = ("bm_outcome", "m_outcome", "analytic", "empirical", "stderr", "sigma")


def cmd_teleport(args: argparse.Namespace) -> Outcome:
    opts = run_spec(args)
    p, q = opts.channel, opts.state
    logger.info("teleport b2=%s trials=%d seed=%d", opts.b2, opts.trials, opts.seed)

    if opts.trials == 1:
        out = TranscriptOut.from_transcript(run_sampled(p, q, opts.seed))
        row = {
            "seed": out.seed, "b2": out.b2,
            "alpha_re": out.input.alpha.real, "alpha_im": out.input.alpha.imag,
            "beta_re": out.input.beta.real, "beta_im": out.input.beta.imag,
            "bm_outcome": out.bm_outcome, "m_outcome": out.m_outcome, "success": out.success, "fidelity": out.fidelity,
        }
        return render(out, [row], TRANSCRIPT_COLUMNS, opts.output_format), None

    tree = run_analytic(p, q)
    batch = run_batch(p, q, opts.trials, opts.seed, opts.workers)
    frequencies, failure = [], None
    for count in batch.counts:
        analytic = tree.branch(count.bm_outcome, count.m_outcome).probability
        empirical = count.count / opts.trials
        stderr = binomial_stderr(analytic, opts.trials)
        sigma = abs(empirical - analytic) / stderr if stderr > 0 else (0.0 if count.count == 0 else math.inf)
        frequencies.append(
            BranchFrequency(
                bm_outcome=int(count.bm_outcome),
                m_outcome=count.m_outcome,
                analytic=analytic,
                empirical=empirical,
                stderr=stderr,
                sigma=sigma,
            )
        )
        if sigma > AGREEMENT_SIGMA and failure is None:
            failure = StatisticalDisagreement(
                f"branch ({int(count.bm_outcome)}, {count.m_outcome})", analytic, empirical, sigma
            )
    report = TeleportReport(
        b2=opts.b2,
        input=q,
        seed=opts.seed,
        trials=opts.trials,
        analytic_success=tree.success_probability,
        branches=tree.branches,
        empirical=frequencies,
        empirical_success=batch.success_rate,
        stderr=batch.stderr,
        agreement=failure is None,
    )
    rows = [f.model_dump() for f in frequencies]
    return render(report, rows, BRANCH_COLUMNS, opts.output_format), failure


def cmd_ot(args: argparse.Namespace) -> Outcome:
    opts = run_spec(args)
    p = opts.channel
    logger.info("ot mode=%s b2=%s trials=%d seed=%d", args.mode, opts.b2, opts.trials, opts.seed)
    if args.repetitions < 1:
        raise ConfigError("repetitions", args.repetitions, "must be at least 1")

    flags: list[str] = []
    encoding = bit = decode_accuracy = None
    if args.mode == "bit":
        enc = ENCODINGS[args.encoding]
        encoding, bit = enc.name, args.bit
        learned, correct = run_bit_batch(p, bit, enc, opts.trials, opts.seed, opts.workers)
        decode_accuracy = correct / learned if learned else None
        analytic = 1.0 if enc.is_computational else p.success_probability
        if enc.is_computational:
            flags.append("non-oblivious encoding")
    else:
        learned = run_batch(p, opts.state, opts.trials, opts.seed, opts.workers).successes
        analytic = p.success_probability
    learn_rate = learned / opts.trials
    stderr = binomial_stderr(analytic, opts.trials)

    curve = []
    if args.mode == "qubit":
        for n in range(1, args.repetitions + 1):
            hits = repeated_learn_count(p, opts.state, n, opts.trials, derive_seed(opts.seed, n), opts.workers)
            curve.append(CurvePoint(n=n, closed_form=repeated_ot_probability(p, n), empirical=hits / opts.trials))

    report = OtReport(
        mode=args.mode,
        b2=opts.b2,
        seed=opts.seed,
        trials=opts.trials,
        encoding=encoding,
        bit=bit,
        learn_rate=learn_rate,
        learn_rate_stderr=stderr,
        analytic_learn_rate=analytic,
        decode_accuracy=decode_accuracy,
        flags=flags,
        curve=curve,
    )
    failure = _disagreement("learn_rate", analytic, learn_rate, stderr)
    if failure is None and decode_accuracy is not None and decode_accuracy < 1.0:
        failure = StatisticalDisagreement("decode_accuracy", 1.0, decode_accuracy, math.inf)
    if args.mode == "qubit":
        rows = [point.model_dump() for point in curve]
        columns = ("n", "closed_form", "empirical")
    else:
        rows = [{"learn_rate": learn_rate, "analytic_learn_rate": analytic, "decode_accuracy": decode_accuracy}]
        columns = ("learn_rate", "analytic_learn_rate", "decode_accuracy")
    return render(report, rows, columns, opts.output_format), failure


ATTACK_COLUMNS = (
    "bm_outcome", "reported_outcome", "branch_probability", "success_probability",
    "honest_success_probability", "fidelity_to_intended",
)


def cmd_attack(args: argparse.Namespace) -> Outcome:
    opts = run_spec(args)
    p, q = opts.channel, opts.state
    logger.info("attack %s b2=%s", args.attack, opts.b2)
    notes: list[str] = []
    if args.attack == "fake-bm":
        outcomes = [fake_bm_attack(p, q, FakeBmConfig(true_outcome=args.true_outcome, reported_outcome=args.reported))]
        notes.append("Bob's m statistics are unchanged by the announcement")
    elif args.attack == "pauli":
        k1, k2, k3, k4 = parse_amplitudes(args.k, 4)
        outcomes = unitary_attack(p, q, PauliAttackConfig(k1=k1, k2=k2, k3=k3, k4=k4))
        honest = all(
            o.branch_probability == 0.0
            or (
                o.fidelity_to_intended >= HONEST_FIDELITY
                and abs(o.success_probability - o.honest_success_probability) < 1e-9
            )
            for o in outcomes
        )
        if honest:
            notes.append("equivalent to honest protocol")
    else:
        outcomes = [entangle_measure_attack(p, q, i) for i in BELL_OUTCOMES]
        info = outcomes[0].alice_information.mutual_information
        notes.append(f"mutual information between E and m: {info:.6f} bits")
        notes.append(f"mutual information within outcome 1: {outcomes[0].branch_mutual_information:.6f} bits")
    report = AttackReport(attack=args.attack, b2=opts.b2, input=q, outcomes=outcomes, notes=notes)
    rows = [
        {
            "bm_outcome": int(o.bm_outcome),
            "reported_outcome": int(o.reported_outcome) if o.reported_outcome is not None else "",
            "branch_probability": o.branch_probability,
            "success_probability": o.success_probability,
            "honest_success_probability": o.honest_success_probability,
            "fidelity_to_intended": o.fidelity_to_intended,
        }
        for o in outcomes
    ]
    return render(report, rows, ATTACK_COLUMNS, opts.output_format), None


CHANNEL_COLUMNS = ("seed", "decoy_tests", "decoy_error_count", "eta_deviation_count", "kept_pairs", "accepted")


def cmd_channel(args: argparse.Namespace) -> Outcome:
    opts = run_spec(args)
    p = opts.channel
    cfg = SharingConfig(n=args.n, m=args.m, k=args.k, eavesdropper=args.eavesdropper, seed=opts.seed)
    logger.info("channel n=%d m=%d k=%d eavesdropper=%s runs=%d", cfg.n, cfg.m, cfg.k, cfg.eavesdropper.value, args.runs)
    if args.runs < 1:
        raise ConfigError("runs", args.runs, "must be at least 1")

    if args.runs == 1:
        report: SharingReport | ChannelSummary = share_channel(p, cfg)
        rows = [{column: getattr(report, column) for column in CHANNEL_COLUMNS}]
        failure = None if report.accepted else ChannelRejected(report.decoy_error_count, report.eta_deviation_count)
        return render(report, rows, CHANNEL_COLUMNS, opts.output_format), failure

    accepted, flagged = sharing_statistics(p, cfg, args.runs, opts.workers)
    eavesdropping = cfg.eavesdropper is Eavesdropper.INTERCEPT_RESEND
    report = ChannelSummary(
        runs=args.runs,
        accepted_runs=accepted,
        rejection_rate=1.0 - accepted / args.runs,
        decoy_detection_rate=flagged / args.runs,
        closed_form_rejection=intercept_resend_detection_probability(p, cfg.k, cfg.m) if eavesdropping else 0.0,
        closed_form_decoy_detection=decoy_detection_probability(cfg.k) if eavesdropping else 0.0,
        first_report=share_channel(p, cfg.model_copy(update={"seed": derive_seed(cfg.seed, 0)})),
    )
    columns = ("runs", "accepted_runs", "rejection_rate", "decoy_detection_rate", "closed_form_rejection")
    rows = [{column: getattr(report, column) for column in columns}]
    failure = None if accepted == args.runs else ChannelRejected(flagged, args.runs - accepted)
    return render(report, rows, columns, opts.output_format), failure


def parse_grid(text: str) -> list[float]:
    tokens = [token for token in text.split(",") if token.strip()]
    if not tokens:
        raise ConfigError("grid", text, "must hold at least one b2 value")
    grid = []
    for token in tokens:
        try:
            grid.append(b2_value(token.strip()))
        except argparse.ArgumentTypeError as exc:
            raise ConfigError("grid", token, str(exc)) from None
    return grid


class SweepReport(BaseModel):
    rows: list[SweepRow]


def cmd_sweep(args: argparse.Namespace) -> Outcome:
    grid = parse_grid(args.grid)
    opts = run_spec(args, default_format=OutputFormat.CSV, default_trials=SWEEP_TRIALS)
    logger.info("sweep over %d points, %d trials each", len(grid), opts.trials)
    rows, failure = [], None
    for index, b2 in enumerate(grid):
        p = ChannelParams.from_b2(b2)
        batch = run_batch(p, opts.state, opts.trials, derive_seed(opts.seed, index), opts.workers)
        rows.append(
            SweepRow(
                b2=b2,
                analytic_p=p.success_probability,
                empirical_p=batch.success_rate,
                stderr=batch.stderr,
                trials=opts.trials,
            )
        )
        failure = failure or _disagreement(
            f"empirical_p at b2={b2}",
            p.success_probability,
            batch.success_rate,
            binomial_stderr(p.success_probability, opts.trials),
        )
    report = SweepReport(rows=rows)
    return render(report, [row.model_dump() for row in rows], SWEEP_COLUMNS, opts.output_format), failure


SCHEMA_MODELS: dict[str, type[BaseModel]] = {
    "transcript": TranscriptOut,
    "teleport": TeleportReport,
    "ot": OtReport,
    "attack": AttackReport,
    "channel": SharingReport,
    "channel-summary": ChannelSummary,
    "sweep": SweepReport,
}


def cmd_schema(args: argparse.Namespace) -> Outcome:
    schemas = {name: model.model_json_schema() for name, model in SCHEMA_MODELS.items()}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for name, schema in schemas.items():
            with open(os.path.join(args.out, f"{name}.schema.json"), "w") as handle_:
                handle_.write(json.dumps(schema, indent=2, sort_keys=True) + "\n")
        logger.info("wrote %d schemas to %s", len(schemas), args.out)
        return "", None
    return json.dumps(schemas, indent=2, sort_keys=True), None


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--b2", type=b2_value, default=0.2, help="|b|^2 of the channel, 0 < b2 < 0.5")
    common.add_argument("--state", default="plus", help="0, 1, plus, minus, 'alpha,beta' or four reals")
    common.add_argument("--trials", type=int, default=None, help="runs per command (sweep: 1000, others: 1)")
    common.add_argument("--seed", type=int, default=settings.seed)
    common.add_argument("--format", type=OutputFormat, choices=list(OutputFormat), default=None)
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, default=settings.log_level)
    common.add_argument("--workers", type=int, default=settings.workers)

    parser = argparse.ArgumentParser(prog="rabin-qot", description="p-Rabin qubit oblivious transfer simulator")
    commands = parser.add_subparsers(dest="command", required=True)

    teleport = commands.add_parser("teleport", parents=[common], help="run the teleportation protocol")
    teleport.set_defaults(handler=cmd_teleport)

    ot = commands.add_parser("ot", parents=[common], help="qubit or bit oblivious transfer")
    ot.add_argument("--mode", choices=["qubit", "bit"], default="qubit")
    ot.add_argument("--encoding", choices=sorted(ENCODINGS), default="pm")
    ot.add_argument("--bit", type=int, choices=[0, 1], default=0)
    ot.add_argument("--repetitions", type=int, default=1, help="largest n of the repeated-transfer curve")
    ot.set_defaults(handler=cmd_ot)

    attack = commands.add_parser("attack", help="cheating-Alice strategies")
    attacks = attack.add_subparsers(dest="attack", required=True)
    fake = attacks.add_parser("fake-bm", parents=[common], help="announce a fake Bell outcome")
    fake.add_argument("--true", dest="true_outcome", type=int, choices=[1, 2, 3, 4], required=True)
    fake.add_argument("--reported", type=int, choices=[1, 2, 3, 4], required=True)
    pauli = attacks.add_parser("pauli", parents=[common], help="apply k1 I + k2 X + k3 Z + k4 iY to A")
    pauli.add_argument("--k", required=True, help="four comma-separated complex coefficients")
    attacks.add_parser("entangle", parents=[common], help="CNOT A onto an ancilla E")
    attack.set_defaults(handler=cmd_attack)

    channel = commands.add_parser("channel", parents=[common], help="decoy-protected channel sharing")
    channel.add_argument("--n", type=int, default=10)
    channel.add_argument("--m", type=int, default=5)
    channel.add_argument("--k", type=int, default=20)
    channel.add_argument("--eavesdropper", type=Eavesdropper, choices=list(Eavesdropper), default=Eavesdropper.NONE)
    channel.add_argument("--runs", type=int, default=1)
    channel.set_defaults(handler=cmd_channel)

    sweep = commands.add_parser("sweep", parents=[common], help="success probability across b2")
    sweep.add_argument("--grid", default="0.1,0.2,0.3,0.4")
    sweep.set_defaults(handler=cmd_sweep)

    schema = commands.add_parser("schema", help="JSON schema of every report")
    schema.add_argument("--out", default=None, help="directory for one file per report")
    schema.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, default=settings.log_level)
    schema.set_defaults(handler=cmd_schema)

    return parser


def emit(text: str, out: Optional[str]) -> None:
    if not text:
        return
    if out:
        with open(out, "w") as handle_:
            handle_.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        parser = build_parser()
    except (QotError, ValidationError) as exc:
        return handle(exc)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    setup_logging(args.log_level, get_settings().log_dir)
    try:
        text, failure = args.handler(args)
    except (QotError, ValidationError) as exc:
        return handle(exc)
    emit(text, None if args.command == "schema" else args.out)
    if failure is not None:
        return handle(failure)
    return EXIT_OK


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
