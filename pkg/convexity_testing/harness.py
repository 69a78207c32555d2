# Experiment orchestration, instance descriptors, certificates and the command-line interface
import argparse
import logging
import math
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator
from scipy import stats

from .config import config
from .core import (
    DiscreteDistribution, FormatError, FunctionSource, GridDomain, GridFunction, LazyGridFunction, Rng,
    make_oracle, read_distribution, read_function, write_function,
)
from .geometry import ConvexityVerdict, distance_to_convex_line, is_convex_grid, is_convex_line
from .hard_instances import (
    GeneralEpsAssignment, HiddenDirectionInstance, LbAssignment, appendix_counterexample,
    dn_bound, lb1d_general, lb1d_g, lb1d_value, lb1d_witness_points, random_convex_line,
    random_convex_stripe, sample_dn, sample_dn_stripe, sample_dy, sample_dy_stripe, verify_dn_far,
)
from .line_tester import TestReport, convexity_test_1d, convexity_test_1d_distribution_free
from .stripe_tester import convexity_test_stripe
from .trial_queue import TrialQueue

logger = logging.getLogger(__name__)

FAMILIES = (
    "dy", "dn", "dy_stripe", "dn_stripe", "lb1d_f", "lb1d_g", "lb1d_gen",
    "appendixA", "convex_line", "convex_stripe",
)
TESTERS = ("test-line", "test-line-df", "test-stripe")
CSV_COLUMNS = ["trial", "verdict", "rounds_used", "query_total", "query_distinct", "samples", "witness"]

REQUIRED_KEYS = {
    "dy": ("d", "n"), "dn": ("d", "n"), "dy_stripe": ("n",), "dn_stripe": ("n",),
    "lb1d_f": ("k",), "lb1d_g": ("k", "j"), "lb1d_gen": ("l", "k"),
    "appendixA": (), "convex_line": ("n",), "convex_stripe": ("n",),
}


def _to_fraction(value: Any) -> Fraction:
    try:
        return Fraction(str(value).strip()) if not isinstance(value, Fraction) else value
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a rational number: {value!r}")


def output_location(path: Union[str, Path]) -> Path:
    """Bare file names land in the configured output directory"""
    path = Path(path)
    if path.parent == Path(".") and not path.is_absolute():
        path = Path(config.experiment.output_dir) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


class InstanceDescriptor(BaseModel):
    """family=...; key=value parameters identifying a reproducible instance"""
    model_config = ConfigDict(extra="forbid")

    family: Literal[FAMILIES]
    d: Optional[int] = None
    n: Optional[int] = None
    k: Optional[int] = None
    l: Optional[int] = None  # noqa: E741
    j: Optional[int] = None
    t: Optional[int] = None
    seed: int = 0

    @model_validator(mode="after")
    def check_required(self) -> "InstanceDescriptor":
        missing = [key for key in REQUIRED_KEYS[self.family] if getattr(self, key) is None]
        if missing:
            raise ValueError(f"family {self.family} needs {', '.join(missing)}")
        if (self.t is None) != (self.j is None) and self.family == "lb1d_gen":
            raise ValueError("lb1d_gen needs both t and j, or neither")
        return self

    @classmethod
    def parse(cls, text: str) -> "InstanceDescriptor":
        fields: Dict[str, str] = {}
        for part in re.split(r"[;,\s]+", text.strip()):
            if not part:
                continue
            if "=" not in part:
                raise FormatError(f"Descriptor entry {part!r} is not key=value")
            key, value = part.split("=", 1)
            fields[key.strip()] = value.strip()
        if "family" not in fields:
            raise FormatError(f"Descriptor {text!r} has no family")
        return cls(**fields)

    def describe(self) -> str:
        parts = [f"family={self.family}"]
        for key in ("d", "n", "k", "l", "j", "t"):
            if getattr(self, key) is not None:
                parts.append(f"{key}={getattr(self, key)}")
        parts.append(f"seed={self.seed}")
        return "; ".join(parts)


@dataclass
class Instance:
    """A built instance with the objects its certificates need"""
    descriptor: Optional[InstanceDescriptor]
    source: FunctionSource
    hidden: Optional[HiddenDirectionInstance] = None
    assignment: Optional[LbAssignment] = None
    general: Optional[GeneralEpsAssignment] = None


def build_instance(descriptor: Union[str, InstanceDescriptor]) -> Instance:
    if isinstance(descriptor, str):
        descriptor = InstanceDescriptor.parse(descriptor)
    rng = Rng(descriptor.seed).split(descriptor.family)
    family = descriptor.family
    logger.info(f"Building instance {descriptor.describe()}")

    if family in ("dy", "dn"):
        sampler = sample_dy if family == "dy" else sample_dn
        hidden = sampler(descriptor.d, descriptor.n, rng)
        return Instance(descriptor, hidden.function(), hidden=hidden)
    if family in ("dy_stripe", "dn_stripe"):
        sampler = sample_dy_stripe if family == "dy_stripe" else sample_dn_stripe
        hidden = sampler(descriptor.n, rng)
        return Instance(descriptor, hidden.function(), hidden=hidden)
    if family in ("lb1d_f", "lb1d_g"):
        a = LbAssignment.random(descriptor.k, rng.split("assignment"))
        if family == "lb1d_f":
            evaluator = lambda p: lb1d_value(a, p[0])  # noqa: E731
        else:
            if not 0 <= descriptor.j < descriptor.k:
                raise ValueError(f"Level j={descriptor.j} is outside [0, {descriptor.k})")
            evaluator = lambda p: lb1d_g(a, descriptor.j, p[0])  # noqa: E731
        source = LazyGridFunction(GridDomain((a.n,)), evaluator, descriptor.describe())
        return Instance(descriptor, source, assignment=a)
    if family == "lb1d_gen":
        general = GeneralEpsAssignment(
            [LbAssignment.random(descriptor.k, rng.split(f"block-{t}")) for t in range(descriptor.l)]
        )
        mode = (descriptor.t, descriptor.j) if descriptor.t is not None else None
        if mode is not None and not (0 <= mode[0] < general.l and 0 <= mode[1] < general.k):
            raise ValueError(f"Perturbation (t={mode[0]}, j={mode[1]}) is out of range")
        source = LazyGridFunction(
            GridDomain((general.n,)),
            lambda p: lb1d_general(general, mode, p[0]),
            descriptor.describe(),
        )
        return Instance(descriptor, source, general=general)
    if family == "appendixA":
        return Instance(descriptor, appendix_counterexample())
    if family == "convex_line":
        return Instance(descriptor, random_convex_line(descriptor.n, rng))
    return Instance(descriptor, random_convex_stripe(descriptor.n, rng))


class ExperimentSpec(BaseModel):
    """One experiment: a tester, an instance and the trial plan"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    tester: Literal[TESTERS]
    instance: Optional[str] = None
    input_path: Optional[str] = None
    distribution: str = "uniform"
    eps: Fraction
    n: Optional[int] = None
    rounds: Optional[int] = None
    trials: int = config.experiment.trials
    seed: int = 0
    const_c: Optional[int] = None
    workers: int = config.experiment.workers
    output_path: Optional[str] = None

    @field_validator("eps", mode="before")
    @classmethod
    def parse_eps(cls, value: Any) -> Fraction:
        eps = _to_fraction(value)
        if not 0 < eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {eps}")
        return eps

    @field_validator("trials", "workers")
    @classmethod
    def at_least_one(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be >= 1, got {value}")
        return value

    @field_validator("rounds", "const_c")
    @classmethod
    def positive_if_set(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 1:
            raise ValueError(f"must be >= 1, got {value}")
        return value

    @model_validator(mode="after")
    def check_source(self) -> "ExperimentSpec":
        if (self.instance is None) == (self.input_path is None):
            raise ValueError("exactly one of instance and input_path must be given")
        if self.instance is not None:
            InstanceDescriptor.parse(self.instance)
        return self


@dataclass
class TrialRecord:
    trial: int
    verdict: str
    rounds_used: int = 0
    query_total: int = 0
    query_distinct: int = 0
    samples: int = 0
    witness: Optional[Any] = None

    @property
    def witness_text(self) -> str:
        return self.witness.describe() if self.witness is not None else ""


@dataclass
class ExperimentResult:
    """Per-trial verdicts with aggregate statistics"""
    spec: ExperimentSpec
    trials: List[TrialRecord]
    wall_seconds: float = 0.0
    instance: Optional[Instance] = field(default=None, repr=False)
    queue_statistics: Dict[str, float] = field(default_factory=dict)

    @property
    def rejects(self) -> int:
        return sum(1 for r in self.trials if r.verdict == "reject")

    @property
    def rejection_frequency(self) -> Fraction:
        return Fraction(self.rejects, len(self.trials))

    def rejection_interval(self) -> Tuple[float, float]:
        """95% Wilson interval for the rejection probability"""
        ci = stats.binomtest(self.rejects, len(self.trials)).proportion_ci(confidence_level=0.95, method="wilson")
        return float(ci.low), float(ci.high)

    def frame(self) -> pd.DataFrame:
        rows = [
            [r.trial, r.verdict, r.rounds_used, r.query_total, r.query_distinct, r.samples, r.witness_text]
            for r in self.trials
        ]
        return pd.DataFrame(rows, columns=CSV_COLUMNS)

    def query_statistics(self) -> Dict[str, Dict[str, float]]:
        frame = self.frame()
        return {
            column: {name: float(getattr(frame[column], name)()) for name in ("min", "median", "max")}
            for column in ("query_total", "query_distinct")
        }

    @property
    def samples_total(self) -> int:
        return sum(r.samples for r in self.trials)

    def summary_row(self) -> str:
        low, high = self.rejection_interval()
        query_stats = self.query_statistics()
        fields = [
            f"trials={len(self.trials)}",
            f"rejects={self.rejects}",
            f"rejection_frequency={self.rejection_frequency}",
            f"ci_low={low:.6f}",
            f"ci_high={high:.6f}",
        ]
        for column, values in query_stats.items():
            fields += [f"{column}_{name}={value:g}" for name, value in values.items()]
        fields.append(f"samples={self.samples_total}")
        return "#summary," + ",".join(fields)

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = output_location(path)
        self.frame().to_csv(path, index=False, lineterminator="\n")
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(self.summary_row() + "\n")
        logger.info(f"Wrote {len(self.trials)} trial rows to {path}")
        return path


def _load_source(spec: ExperimentSpec) -> Instance:
    if spec.instance is not None:
        return build_instance(spec.instance)
    return Instance(None, read_function(spec.input_path))


def resolve_distribution(spec_distribution: str, instance: Instance) -> Optional[DiscreteDistribution]:
    """None stands for the uniform distribution over the grid"""
    if spec_distribution == "uniform":
        return None
    if spec_distribution == "adversarial":
        descriptor = instance.descriptor
        if descriptor is None or descriptor.family != "lb1d_g":
            raise ValueError("The adversarial distribution needs an lb1d_g instance")
        support = lb1d_witness_points(instance.assignment, descriptor.j)
        return DiscreteDistribution(tuple((x,) for x in support), tuple(Fraction(1, len(support)) for _ in support))
    return read_distribution(spec_distribution, instance.source.domain)


def _run_tester(spec: ExperimentSpec, instance: Instance, distribution: Optional[DiscreteDistribution],
                rng: Rng) -> TestReport:
    oracle = make_oracle(instance.source, distribution)
    if spec.tester == "test-line":
        if instance.source.domain.d != 1:
            raise ValueError(f"test-line needs a 1D instance, got dims {instance.source.domain.dims}")
        n = instance.source.domain.dims[0]
        return convexity_test_1d(oracle, n, spec.eps, rng, spec.rounds, spec.const_c)
    if spec.tester == "test-line-df":
        return convexity_test_1d_distribution_free(oracle, spec.eps, rng, spec.rounds, spec.const_c)
    return convexity_test_stripe(oracle, spec.eps, rng, spec.rounds, spec.const_c)


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run spec.trials seeded trials in parallel and aggregate them in trial order"""
    started = time.perf_counter()
    instance = _load_source(spec)
    if spec.n is not None and instance.source.domain.dims[-1] != spec.n:
        raise ValueError(f"--n {spec.n} does not match the instance extent {instance.source.domain.dims[-1]}")
    distribution = resolve_distribution(spec.distribution, instance)
    root = Rng(spec.seed)
    logger.info(f"Running {spec.trials} trials of {spec.tester} with eps={spec.eps} seed={spec.seed}")

    queue = TrialQueue()
    for trial in range(spec.trials):
        queue.add_trial(trial)

    def worker() -> None:
        while True:
            task = queue.get_next_trial()
            if task is None:
                return
            try:
                report = _run_tester(spec, instance, distribution, root.split(task.rng_label))
                queue.mark_completed(task.trial, report)
            except Exception as e:
                logger.warning(f"Trial {task.trial} raised {type(e).__name__}: {e}")
                queue.mark_completed(task.trial, success=False, error_message=str(e))

    with ThreadPoolExecutor(max_workers=min(spec.workers, spec.trials)) as pool:
        for future in [pool.submit(worker) for _ in range(min(spec.workers, spec.trials))]:
            future.result()

    records = []
    for task in queue.finished_in_order():
        report: Optional[TestReport] = task.result
        if report is None:
            records.append(TrialRecord(task.trial, "error"))
            continue
        records.append(TrialRecord(
            task.trial, report.verdict.value, report.rounds_used, report.query_total,
            report.query_distinct, report.samples_used, report.witness,
        ))

    queue_stats = queue.get_queue_status()["statistics"]
    result = ExperimentResult(spec, records, time.perf_counter() - started, instance, queue_stats)
    if spec.output_path:
        result.write_csv(spec.output_path)
    logger.info(
        f"{spec.tester}: {result.rejects}/{len(records)} rejected in {result.wall_seconds:.2f}s "
        f"({queue_stats['total_failed']} failed, {queue_stats['avg_trial_seconds']:.3f}s per trial)"
    )
    return result


def check_convex(path: Union[str, Path]) -> ConvexityVerdict:
    f = read_function(path)
    return is_convex_line(f) if f.domain.d == 1 else is_convex_grid(f)


def distance(path: Union[str, Path]) -> Fraction:
    f = read_function(path)
    if f.domain.d != 1:
        raise ValueError(f"distance is only defined for 1D functions, got dims {f.domain.dims}")
    return distance_to_convex_line(f)


def gen_instance(descriptor: Union[str, InstanceDescriptor], out: Optional[Union[str, Path]] = None) -> str:
    """Write a dense dump of the instance, or describe the lazy oracle when out is None"""
    instance = build_instance(descriptor)
    source = instance.source
    limit = config.instances.max_dense_points
    if out is None:
        return f"lazy oracle over {source.domain.dims} ({source.domain.size} points)"
    if source.domain.size > limit:
        logger.warning(f"Refusing dense dump of {source.domain.size} points")
        raise ValueError(f"Instance has {source.domain.size} points; dense dumps are limited to {limit}")
    dense = source if isinstance(source, GridFunction) else source.materialize(limit)
    write_function(dense, out)
    logger.info(f"Wrote instance to {out}")
    return str(out)


@dataclass
class CertificateReport:
    """What was certified about an instance and whether it meets the family's bound"""
    descriptor: str
    property: str
    value: Any
    bound: Optional[Fraction]
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)


def verify_lb(descriptor: Union[str, InstanceDescriptor]) -> CertificateReport:
    instance = build_instance(descriptor)
    desc = instance.descriptor
    family = desc.family
    limit = config.instances.max_dense_points

    if family in ("dn", "dn_stripe"):
        certificate = verify_dn_far(instance.hidden, instance.hidden.basis)
        bound = dn_bound(desc.d) if family == "dn" else Fraction(1, 10)
        valid = all(
            not is_convex_line(GridFunction.line([instance.hidden.value(x) for x in w]))
            for w in certificate.witnesses
        )
        return CertificateReport(
            desc.describe(), "distance_lower_bound", certificate.bound, bound,
            valid and certificate.bound >= bound, {"witnesses": certificate.count},
        )
    if family in ("lb1d_g", "lb1d_gen"):
        value = distance_to_convex_line(instance.source.materialize(limit))
        if family == "lb1d_g":
            bound = Fraction(1, 9)
        elif desc.t is not None:
            bound = Fraction(1, 9 * desc.l)
        else:
            bound = Fraction(0)
        passed = value >= bound if family == "lb1d_g" or desc.t is not None else value == 0
        return CertificateReport(desc.describe(), "distance", value, bound, passed)

    dense = instance.source if isinstance(instance.source, GridFunction) else instance.source.materialize(limit)
    verdict = is_convex_line(dense) if dense.domain.d == 1 else is_convex_grid(dense)
    expect_convex = family != "appendixA"
    details = {"centre": verdict.centre} if not verdict.is_convex else {}
    return CertificateReport(
        desc.describe(), "convex", verdict.is_convex, None, verdict.is_convex == expect_convex, details,
    )


@dataclass
class ScalingReport:
    frame: pd.DataFrame
    coefficients: Tuple[float, float]
    relative_residual: float
    predictor: str


SCALING_INSTANCES = {"test-line": "convex_line", "test-line-df": "convex_line", "test-stripe": "convex_stripe"}


def _predictor(tester: str, n: int, eps: Fraction) -> float:
    if tester == "test-line":
        return math.log2(float(eps * n))
    if tester == "test-line-df":
        return math.log2(n)
    return math.log2(n) ** 2


def query_scaling_report(tester: str, n_list: Sequence[int], eps, trials: int, seed: int = 0,
                         const_c: Optional[int] = None, workers: int = 1,
                         output_path: Optional[Union[str, Path]] = None) -> ScalingReport:
    """Median query totals on convex instances against the expected growth in n"""
    if tester not in TESTERS:
        raise ValueError(f"Unknown tester {tester!r}")
    eps = _to_fraction(eps)
    rows = []
    for n in n_list:
        spec = ExperimentSpec(
            tester=tester, instance=f"family={SCALING_INSTANCES[tester]}; n={n}; seed={seed}",
            eps=eps, trials=trials, seed=seed, const_c=const_c, workers=workers,
        )
        result = run_experiment(spec)
        frame = result.frame()
        rows.append({
            "n": n,
            "eps": str(eps),
            "predictor": _predictor(tester, n, eps),
            "median_query_total": float(frame["query_total"].median()),
            "median_rounds": float(frame["rounds_used"].median()),
            "rejects": result.rejects,
        })

    table = pd.DataFrame(rows)
    design = np.column_stack([table["predictor"].to_numpy(), np.ones(len(table))])
    target = table["median_query_total"].to_numpy()
    coefficients, *_ = np.linalg.lstsq(design, target, rcond=None)
    fitted = design @ coefficients
    table["fitted"] = fitted
    relative = float(np.max(np.abs(fitted - target) / target)) if len(table) else 0.0
    predictor = {"test-line": "log2(eps*n)", "test-line-df": "log2(n)", "test-stripe": "log2(n)^2"}[tester]
    logger.info(f"Scaling fit for {tester}: {coefficients[0]:.3f}*{predictor} + {coefficients[1]:.3f}, "
                f"max relative residual {relative:.3%}")

    if output_path:
        table.to_csv(output_location(output_path), index=False, lineterminator="\n")
    return ScalingReport(table, (float(coefficients[0]), float(coefficients[1])), relative, predictor)


# ---------------------------------------------------------------------------
# Command line

def _common_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=int, default=0, help="experiment seed")
    parent.add_argument("--out", default=None, help="output file (CSV or function dump)")
    parent.add_argument("--const-c", type=int, default=None, help="round constant C")
    parent.add_argument("--log-level", default=None, help="logging level")
    parent.add_argument("--expect-accept", action="store_true", help="exit 2 if any trial rejects")
    return parent


def _tester_flags(parser: argparse.ArgumentParser, with_dist: bool) -> None:
    parser.add_argument("--n", type=int, default=None, help="expected grid extent")
    parser.add_argument("--eps", required=True, help="distance parameter, e.g. 1/9")
    parser.add_argument("--rounds", type=int, default=None, help="override the default round count")
    parser.add_argument("--trials", type=int, default=config.experiment.trials)
    parser.add_argument("--workers", type=int, default=config.experiment.workers)
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", help="function file")
    source.add_argument("--instance", help="instance descriptor, e.g. 'family=lb1d_g; k=5; j=2; seed=1'")
    if with_dist:
        parser.add_argument("--dist", default="uniform", help="uniform, adversarial or a distribution file")


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="convexity-lab", description="Convexity testers over discrete grids")
    commands = parser.add_subparsers(dest="command", required=True)

    _tester_flags(commands.add_parser("test-line", parents=[common], help="uniform line tester"), False)
    _tester_flags(commands.add_parser("test-line-df", parents=[common], help="distribution-free line tester"), True)
    _tester_flags(commands.add_parser("test-stripe", parents=[common], help="stripe tester"), True)

    check = commands.add_parser("check-convex", parents=[common], help="exact convexity decision")
    check.add_argument("file")
    dist = commands.add_parser("distance", parents=[common], help="exact distance to convexity (1D)")
    dist.add_argument("file")
    gen = commands.add_parser("gen-instance", parents=[common], help="dump an instance to a function file")
    gen.add_argument("descriptor")
    verify = commands.add_parser("verify-lb", parents=[common], help="certify a lower-bound instance")
    verify.add_argument("descriptor")

    scaling = commands.add_parser("scaling", parents=[common], help="query counts against n")
    scaling.add_argument("--tester", choices=TESTERS, required=True)
    scaling.add_argument("--n-list", required=True, help="comma separated extents")
    scaling.add_argument("--eps", required=True)
    scaling.add_argument("--trials", type=int, default=10)
    scaling.add_argument("--workers", type=int, default=config.experiment.workers)
    return parser


def _run_command(args: argparse.Namespace) -> int:
    if args.command in TESTERS:
        spec = ExperimentSpec(
            tester=args.command, instance=args.instance, input_path=args.input,
            distribution=getattr(args, "dist", "uniform"), eps=args.eps, n=args.n, rounds=args.rounds,
            trials=args.trials, seed=args.seed, const_c=args.const_c, workers=args.workers,
            output_path=args.out,
        )
        result = run_experiment(spec)
        low, high = result.rejection_interval()
        print(f"{spec.tester}: rejected {result.rejects}/{len(result.trials)} "
              f"(95% CI {low:.3f}-{high:.3f}), median queries {result.query_statistics()['query_total']['median']:g}")
        errors = sum(1 for r in result.trials if r.verdict == "error")
        if errors:
            return 1
        if args.expect_accept and result.rejects:
            return 2
        return 0

    if args.command == "check-convex":
        verdict = check_convex(args.file)
        if verdict.is_convex:
            print("convex")
        else:
            print(f"not convex at {verdict.centre} (value {verdict.centre_value})")
            if verdict.envelope is not None:
                print(f"envelope {verdict.envelope.value} from {[p for p, _ in verdict.envelope.support]}")
            if verdict.triple is not None:
                print(f"violating triple {verdict.triple}")
        return 2 if args.expect_accept and not verdict.is_convex else 0

    if args.command == "distance":
        print(distance(args.file))
        return 0

    if args.command == "gen-instance":
        print(gen_instance(args.descriptor, args.out))
        return 0

    if args.command == "verify-lb":
        report = verify_lb(args.descriptor)
        print(f"{report.descriptor}: {report.property}={report.value} bound={report.bound} "
              f"{'ok' if report.passed else 'FAILED'} {report.details or ''}".rstrip())
        return 0 if report.passed else 1

    n_list = [int(x) for x in args.n_list.split(",") if x.strip()]
    report = query_scaling_report(args.tester, n_list, args.eps, args.trials, args.seed, args.const_c,
                                  args.workers, args.out)
    print(report.frame.to_string(index=False))
    print(f"fit: {report.coefficients[0]:.4f}*{report.predictor} + {report.coefficients[1]:.4f}; "
          f"max relative residual {report.relative_residual:.2%}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=(args.log_level or config.logging.level).upper(), format=config.logging.format)
    if not config.validate():
        return 1
    try:
        return _run_command(args)
    except (ValueError, FileNotFoundError, ValidationError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
