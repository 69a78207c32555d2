# Adaptive distribution-free convexity tester for the stripe [3] x [n]
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .core import FunctionSource, GridPoint, QueryOracle, Rng, format_point, to_exact
from .geometry import bisection_min, triple_is_convex
from .line_tester import TestReport, TripleTestOutcome, TripleWitness, Verdict, default_rounds_sampled, run_triple_tests

logger = logging.getLogger(__name__)

STRIPE_COLUMNS = 3


@dataclass(frozen=True, order=True)
class HalfInteger:
    """The value twice_value / 2"""
    twice_value: int

    @classmethod
    def of(cls, x: int) -> "HalfInteger":
        return cls(2 * x)

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice_value, 2)

    def is_integer(self) -> bool:
        return self.twice_value % 2 == 0

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class StripeWitness:
    """Queried points and values behind a rejection; kind names the failed check"""
    kind: str
    points: Tuple[GridPoint, ...]
    values: Tuple[Fraction, ...]

    def holds(self, values: Optional[Tuple[Fraction, ...]] = None) -> bool:
        """Recompute the violated condition from the recorded (or supplied) values"""
        v = self.values if values is None else values
        p = self.points
        if self.kind == "triple":
            return not triple_is_convex(p[0][1], p[1][1], p[2][1], v[0], v[1], v[2])
        if self.kind == "envelope":
            # f(1,x) above the average of f(0,a) and f(2,c) with a + c = 2x
            return 2 * v[0] > v[1] + v[2]
        if self.kind == "evaluate_audit":
            # the chosen pair does not minimize (f0 + f2) against its neighbour pair
            return v[0] + v[1] > v[2] + v[3]
        if self.kind == "beta":
            # line through (1,p),(1,q) lies above h at z = (a + c)/2
            (_, bp), (_, bq) = p[0], p[1]
            z = Fraction(p[2][1] + p[3][1], 2)
            beta = v[1] + (z - bq) * (v[1] - v[0]) / (bq - bp)
            return (v[2] + v[3]) / 2 < beta
        raise ValueError(f"Unknown witness kind {self.kind!r}")

    def replay(self, f: Union[QueryOracle, FunctionSource]) -> bool:
        lookup = f.query if isinstance(f, QueryOracle) else f.value
        return self.holds(tuple(lookup(point) for point in self.points))

    def describe(self) -> str:
        body = "|".join(f"{format_point(p)}={v}" for p, v in zip(self.points, self.values))
        return f"{self.kind}:{body}"


@dataclass
class CheckRecord:
    name: str
    passed: bool


@dataclass
class StripeRoundTrace:
    """Sub-check outcomes of one round at a sampled point"""
    point: GridPoint
    checks: List[CheckRecord] = field(default_factory=list)
    queries: int = 0
    witness: Optional[StripeWitness] = None

    @property
    def rejected(self) -> bool:
        return self.witness is not None


@dataclass
class HValue:
    """h at a half-integer together with the pair attaining it"""
    value: Fraction
    left: int
    right: int


@dataclass
class EvaluateOutcome:
    value: Optional[Fraction] = None
    witness: Optional[StripeWitness] = None

    @property
    def rejected(self) -> bool:
        return self.witness is not None


class StripeRejection(Exception):
    """Unwinds a round as soon as any sub-check fails"""

    def __init__(self, witness: StripeWitness):
        super().__init__(witness.describe())
        self.witness = witness


def _check_stripe(oracle: QueryOracle) -> int:
    dims = oracle.domain.dims
    if len(dims) != 2 or dims[0] != STRIPE_COLUMNS:
        raise ValueError(f"Stripe tester needs a [3] x [n] domain, got {dims}")
    return dims[1]


def _triple_witness(outcome: TripleTestOutcome) -> StripeWitness:
    w: TripleWitness = outcome.witness
    return StripeWitness("triple", tuple(w.grid_points()), w.values)


class _StripeRound:
    """State of a single round: h memo and trace"""

    def __init__(self, oracle: QueryOracle, trace: StripeRoundTrace):
        self.oracle = oracle
        self.n = _check_stripe(oracle)
        self.trace = trace
        self._h_memo: Dict[int, HValue] = {}

    def record(self, name: str, passed: bool) -> None:
        self.trace.checks.append(CheckRecord(name, passed))

    def one_d_test(self, i: int, x: int) -> None:
        if not 0 <= x < self.n:
            return
        outcome = run_triple_tests(self.oracle, x, column=i)
        self.record(f"1d({i},{x})", outcome.passed)
        if not outcome.passed:
            raise StripeRejection(_triple_witness(outcome))

    def pair(self, t: int, d: int) -> Tuple[int, int]:
        return (t - d) // 2, (t + d) // 2

    def evaluate_h(self, z: HalfInteger) -> HValue:
        """h(z) by bisection over delta, audited so that it equals the convex-replacement minimum"""
        t = z.twice_value
        if t in self._h_memo:
            return self._h_memo[t]
        top = 2 * (self.n - 1)
        if not 0 <= t <= top:
            raise ValueError(f"Half-integer {z} is outside [0, {self.n - 1}]")

        # d = 2*delta ranges over values of t's parity keeping both endpoints in [0, n-1]
        d_low = max(-t, t - top)
        d_high = min(t, top - t)
        count = (d_high - d_low) // 2 + 1

        def pair_sum(j: int) -> Fraction:
            left, right = self.pair(t, d_low + 2 * j)
            return self.oracle.query((0, left)) + self.oracle.query((2, right))

        best = bisection_min(lambda j: pair_sum(j) / 2, count)
        left, right = self.pair(t, d_low + 2 * best.index)
        for shift in (-1, 0, 1):
            self.one_d_test(0, left + shift)
            self.one_d_test(2, right + shift)

        centre_points = ((0, left), (2, right))
        centre_values = (self.oracle.query(centre_points[0]), self.oracle.query(centre_points[1]))
        for j in (best.index - 1, best.index + 1):
            if not 0 <= j < count:
                continue
            n_left, n_right = self.pair(t, d_low + 2 * j)
            neighbour_points = ((0, n_left), (2, n_right))
            neighbour_values = (self.oracle.query(neighbour_points[0]), self.oracle.query(neighbour_points[1]))
            passed = sum(centre_values) <= sum(neighbour_values)
            self.record(f"audit({z},{j - best.index:+d})", passed)
            if not passed:
                raise StripeRejection(StripeWitness(
                    "evaluate_audit", centre_points + neighbour_points, centre_values + neighbour_values,
                ))

        result = HValue(sum(centre_values) / 2, left, right)
        self._h_memo[t] = result
        return result

    def minimize_against_line(self, p: int, q: int, first: int, last: int, name: str) -> None:
        """Reject if h - beta is negative somewhere on the half-integers [first/2, last/2]"""
        fp, fq = self.oracle.query((1, p)), self.oracle.query((1, q))
        slope = (fq - fp) / (q - p)

        def gap(j: int) -> Fraction:
            z = HalfInteger(first + j)
            return self.evaluate_h(z).value - (fq + (z.value - q) * slope)

        best = bisection_min(gap, last - first + 1)
        passed = best.value >= 0
        self.record(name, passed)
        if not passed:
            h = self.evaluate_h(HalfInteger(first + best.index))
            points = ((1, p), (1, q), (0, h.left), (2, h.right))
            values = (fp, fq, self.oracle.query((0, h.left)), self.oracle.query((2, h.right)))
            raise StripeRejection(StripeWitness("beta", points, values))

    def run(self, i: int, x: int) -> None:
        self.one_d_test(i, x)
        if i != 1:
            return

        h = self.evaluate_h(HalfInteger.of(x))
        f1 = self.oracle.query((1, x))
        passed = f1 <= h.value
        self.record(f"envelope({x})", passed)
        if not passed:
            points = ((1, x), (0, h.left), (2, h.right))
            values = (f1, self.oracle.query((0, h.left)), self.oracle.query((2, h.right)))
            raise StripeRejection(StripeWitness("envelope", points, values))

        self.one_d_test(1, x - 1)
        self.one_d_test(1, x + 1)

        top = 2 * (self.n - 1)
        # the ranges start at x +- 1/2, not x +- 1: an envelope point at x +- 1/2 lying below the
        # line through f(1, x-1), f(1, x) (or f(1, x), f(1, x+1)) is a violation the narrower ranges
        # never compare; convex f still has gap >= 0 there, so no convex input is rejected
        if x - 1 >= 0 and 2 * x + 1 <= top:
            self.minimize_against_line(x - 1, x, 2 * x + 1, top, f"beta-({x})")
        if x + 1 <= self.n - 1 and 2 * x - 1 >= 0:
            self.minimize_against_line(x + 1, x, 0, 2 * x - 1, f"beta+({x})")


def one_d_test(oracle: QueryOracle, i: int, x: int) -> TripleTestOutcome:
    """All triple tests rooted at x on column i"""
    _check_stripe(oracle)
    if not 0 <= i < STRIPE_COLUMNS:
        raise ValueError(f"Column {i} is outside [3]")
    return run_triple_tests(oracle, x, column=i)


def evaluate_h(oracle: QueryOracle, x: HalfInteger) -> EvaluateOutcome:
    stripe_round = _StripeRound(oracle, StripeRoundTrace((1, x.twice_value // 2)))
    try:
        return EvaluateOutcome(value=stripe_round.evaluate_h(x).value)
    except StripeRejection as rejection:
        return EvaluateOutcome(witness=rejection.witness)


def check_point(oracle: QueryOracle, point: GridPoint) -> StripeRoundTrace:
    """One full round of the stripe tester at a fixed point"""
    i, x = point
    trace = StripeRoundTrace((i, x))
    start = oracle.query_total
    try:
        _StripeRound(oracle, trace).run(i, x)
    except StripeRejection as rejection:
        trace.witness = rejection.witness
    trace.queries = oracle.query_total - start
    return trace


def convexity_test_stripe(oracle: QueryOracle, eps, rng: Rng, rounds: Optional[int] = None,
                          const_c: Optional[int] = None, keep_traces: bool = False) -> TestReport:
    """Sample points from the oracle's distribution and run a full round check at each"""
    _check_stripe(oracle)
    eps = to_exact(eps)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    rounds = rounds if rounds is not None else default_rounds_sampled(eps, const_c)
    start_total, start_distinct, start_samples = oracle.query_total, oracle.query_distinct, oracle.samples_used
    traces: List[StripeRoundTrace] = []

    for round_no in range(1, rounds + 1):
        trace = check_point(oracle, oracle.sample(rng))
        if keep_traces:
            traces.append(trace)
        if trace.rejected:
            logger.debug(f"Stripe round {round_no} at {trace.point} rejected: {trace.witness.describe()}")
            return TestReport(
                Verdict.REJECT, trace.witness, round_no,
                oracle.query_total - start_total, oracle.query_distinct - start_distinct,
                oracle.samples_used - start_samples, traces,
            )

    return TestReport(
        Verdict.ACCEPT, None, rounds,
        oracle.query_total - start_total, oracle.query_distinct - start_distinct,
        oracle.samples_used - start_samples, traces,
    )
