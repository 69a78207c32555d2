# Triple tests and the uniform and distribution-free convexity testers over a line
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple, Union

from .config import config
from .core import FunctionSource, QueryOracle, Rng, format_point, to_exact, uniform_point
from .geometry import is_convex_on_sorted, triple_is_convex

logger = logging.getLogger(__name__)


class Verdict(Enum):
    """Tester decision"""
    ACCEPT = "accept"
    REJECT = "reject"


@dataclass(frozen=True)
class TripleTest:
    """Triple test rooted at a with hub b of the given height and third point c"""
    root: int
    hub: int
    third: int
    height: int

    def points(self) -> Tuple[int, int, int]:
        return tuple(sorted((self.root, self.hub, self.third)))


@dataclass(frozen=True)
class TripleWitness:
    """Sorted triple whose values violate the triple inequality"""
    points: Tuple[int, int, int]
    values: Tuple[Fraction, Fraction, Fraction]
    column: Optional[int] = None

    def violates(self) -> bool:
        x, y, z = self.points
        return not triple_is_convex(x, y, z, *self.values)

    def grid_points(self) -> List[Tuple[int, ...]]:
        if self.column is None:
            return [(x,) for x in self.points]
        return [(self.column, x) for x in self.points]

    def replay(self, f: Union[QueryOracle, FunctionSource]) -> bool:
        """True when f (or a fresh oracle over it) still violates the triple inequality"""
        lookup = f.query if isinstance(f, QueryOracle) else f.value
        values = [lookup(p) for p in self.grid_points()]
        x, y, z = self.points
        return not triple_is_convex(x, y, z, *values)

    def describe(self) -> str:
        return "|".join(f"{format_point(p)}={v}" for p, v in zip(self.grid_points(), self.values))


@dataclass
class TripleTestOutcome:
    passed: bool
    witness: Optional[TripleWitness] = None
    failed_test: Optional[TripleTest] = None
    tests_run: int = 0


@dataclass
class TestReport:
    """Result of one tester run"""
    __test__ = False

    verdict: Verdict
    witness: Optional[object] = None
    rounds_used: int = 0
    query_total: int = 0
    query_distinct: int = 0
    samples_used: int = 0
    round_traces: List[object] = field(default_factory=list)

    @property
    def rejected(self) -> bool:
        return self.verdict is Verdict.REJECT


def _hubs(a: int, height: int) -> Tuple[int, int]:
    below = height * ((a - 1) // height)
    above = height * -(-(a + 1) // height)
    return below, above


def enumerate_triple_tests(a: int, n: int, max_height: Optional[int] = None) -> List[TripleTest]:
    """All in-range triple tests rooted at a with height below n (and at most max_height)"""
    if not 0 <= a < n:
        raise ValueError(f"Root {a} is outside [0, {n})")
    tests: List[TripleTest] = []
    seen = set()
    height = 1
    while height < n and (max_height is None or height <= max_height):
        for b in _hubs(a, height):
            for c in (a + 1, b + 1):
                if not (0 <= b < n and 0 <= c < n) or len({a, b, c}) < 3:
                    continue
                test = TripleTest(a, b, c, height)
                if test not in seen:
                    seen.add(test)
                    tests.append(test)
        height *= 2
    return tests


def _line_lookup(source: Union[QueryOracle, FunctionSource], column: Optional[int]) -> Tuple[Callable[[int], Fraction], int]:
    query = source.query if isinstance(source, QueryOracle) else source.value
    n = source.domain.dims[-1]
    if column is None:
        return (lambda x: query((x,))), n
    return (lambda x: query((column, x))), n


def run_triple_tests(oracle: Union[QueryOracle, FunctionSource], a: int, max_height: Optional[int] = None,
                     column: Optional[int] = None) -> TripleTestOutcome:
    """Run every triple test rooted at a; stops at the first failing one"""
    lookup, n = _line_lookup(oracle, column)
    cache: Dict[int, Fraction] = {}

    def value(x: int) -> Fraction:
        if x not in cache:
            cache[x] = lookup(x)
        return cache[x]

    tests = enumerate_triple_tests(a, n, max_height)
    for count, test in enumerate(tests, start=1):
        x, y, z = test.points()
        fx, fy, fz = value(x), value(y), value(z)
        if not triple_is_convex(x, y, z, fx, fy, fz):
            witness = TripleWitness((x, y, z), (fx, fy, fz), column)
            return TripleTestOutcome(False, witness, test, count)
    return TripleTestOutcome(True, tests_run=len(tests))


def common_hub(x: int, y: int) -> Tuple[int, int]:
    """A hub of both x and y strictly between them, with height at most 2(y - x)"""
    if x >= y - 1:
        raise ValueError(f"common_hub needs x < y - 1, got x={x}, y={y}")
    k = (y - x).bit_length() - 1  # (y-x)/2 < 2^k <= y-x
    while True:
        height = 1 << k
        first = height * (x // height + 1)
        multiples = list(range(first, y, height))
        if len(multiples) == 1:
            return multiples[0], height
        if len(multiples) >= 2:
            k += 1
        else:
            k -= 1


def _values_of(f: Union[QueryOracle, FunctionSource]) -> Callable[[int], Fraction]:
    lookup, _ = _line_lookup(f, None)
    return lookup


def locate_failing_root(f: Union[QueryOracle, FunctionSource], x: int, y: int, z: int) -> Tuple[int, TripleTest]:
    """Follow the case analysis from a non-convex triple to a root failing a short triple test"""
    value = _values_of(f)
    if triple_is_convex(x, y, z, value(x), value(y), value(z)):
        raise ValueError(f"Triple ({x}, {y}, {z}) is convex")

    if y == x + 1 and z == y + 1:
        return x, TripleTest(x, y, z, 1)

    # h: common hub of x and y (x itself when adjacent); h2 the same for y and z
    h, h_height = common_hub(x, y) if y - x >= 2 else (x, 1)
    h2, h2_height = common_hub(y, z) if z - y >= 2 else (z, 1)

    chain = [x] + ([h] if h != x else []) + [y] + ([h2] if h2 != z else []) + [z]
    for i in range(len(chain) - 2):
        p, q, r = chain[i], chain[i + 1], chain[i + 2]
        if triple_is_convex(p, q, r, value(p), value(q), value(r)):
            continue
        if q == h:
            # violation on (x, h, y)
            if h + 1 < y and not triple_is_convex(h, h + 1, y, value(h), value(h + 1), value(y)):
                return y, TripleTest(y, h, h + 1, h_height)
            return x, TripleTest(x, h, h + 1, h_height)
        if q == y:
            # violation on (h, y, h2)
            if y + 1 < h2 and not triple_is_convex(y, y + 1, h2, value(y), value(y + 1), value(h2)):
                return y, TripleTest(y, h2, y + 1, h2_height)
            return y, TripleTest(y, h, y + 1, h_height)
        # violation on (y, h2, z)
        if h2 + 1 < z and not triple_is_convex(h2, h2 + 1, z, value(h2), value(h2 + 1), value(z)):
            return z, TripleTest(z, h2, h2 + 1, h2_height)
        return y, TripleTest(y, h2, h2 + 1, h2_height)

    raise AssertionError(f"No consecutive violation found along {chain}")


def passing_set(f: FunctionSource) -> List[int]:
    """Roots passing all their triple tests"""
    n = f.domain.dims[0]
    return [a for a in range(n) if run_triple_tests(f, a).passed]


def greedy_failing_roots(f: FunctionSource, eps) -> List[Tuple[int, TripleTest]]:
    """Shrink S = [n] by failing roots of consecutive violations until eps*n are removed"""
    eps = to_exact(eps)
    value = _values_of(f)
    n = f.domain.dims[0]
    remaining = list(range(n))
    removed: List[Tuple[int, TripleTest]] = []
    while n - len(remaining) < eps * n:
        verdict = is_convex_on_sorted(remaining, [value(x) for x in remaining])
        if verdict.is_convex:
            logger.info(f"Greedy construction stopped after {len(removed)} roots: remaining set is convex")
            break
        root, test = locate_failing_root(f, *verdict.triple)
        remaining.remove(root)
        removed.append((root, test))
    return removed


def _validate_eps(eps, n: int) -> Fraction:
    eps = to_exact(eps)
    if not Fraction(1, n) <= eps < 1:
        raise ValueError(f"eps must satisfy 1/n <= eps < 1, got eps={eps} with n={n}")
    return eps


def _max_level(eps: Fraction, n: int) -> int:
    """Smallest K with 2^K >= 2*eps*n"""
    target = 2 * eps * n
    level = 0
    while (1 << level) < target:
        level += 1
    return level


def default_rounds_1d(n: int, eps, const_c: Optional[int] = None) -> int:
    const_c = const_c if const_c is not None else config.tester.const_c
    eps = to_exact(eps)
    return math.ceil(const_c * (math.log2(float(2 * eps * n)) + 1) / float(eps))


def default_rounds_sampled(eps, const_c: Optional[int] = None) -> int:
    const_c = const_c if const_c is not None else config.tester.const_c
    return math.ceil(const_c / to_exact(eps))


def convexity_test_1d(oracle: QueryOracle, n: int, eps, rng: Rng, rounds: Optional[int] = None,
                      const_c: Optional[int] = None) -> TestReport:
    """Non-adaptive uniform tester: one random short triple per round"""
    if oracle.domain.dims != (n,):
        raise ValueError(f"Oracle domain {oracle.domain.dims} is not the line [{n}]")
    eps = _validate_eps(eps, n)
    rounds = rounds if rounds is not None else default_rounds_1d(n, eps, const_c)
    max_level = _max_level(eps, n)
    start_total, start_distinct = oracle.query_total, oracle.query_distinct

    for round_no in range(1, rounds + 1):
        a = uniform_point(n, rng)
        height = 1 << rng.uniform_int(max_level + 1)
        below, above = _hubs(a, height)
        b = above if rng.coin() else below
        c = b + 1 if rng.coin() else a + 1
        if not (0 <= b < n and 0 <= c < n) or len({a, b, c}) < 3:
            continue
        x, y, z = sorted((a, b, c))
        fx, fy, fz = oracle.query((x,)), oracle.query((y,)), oracle.query((z,))
        if not triple_is_convex(x, y, z, fx, fy, fz):
            witness = TripleWitness((x, y, z), (fx, fy, fz))
            logger.debug(f"Round {round_no} rejected on {witness.describe()}")
            return TestReport(
                Verdict.REJECT, witness, round_no,
                oracle.query_total - start_total, oracle.query_distinct - start_distinct,
            )

    return TestReport(
        Verdict.ACCEPT, None, rounds,
        oracle.query_total - start_total, oracle.query_distinct - start_distinct,
    )


def convexity_test_1d_distribution_free(oracle: QueryOracle, eps, rng: Rng, rounds: Optional[int] = None,
                                        const_c: Optional[int] = None) -> TestReport:
    """Sample a root from the oracle's distribution and run all its triple tests"""
    if oracle.domain.d != 1:
        raise ValueError(f"Oracle domain {oracle.domain.dims} is not a line")
    eps = to_exact(eps)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    rounds = rounds if rounds is not None else default_rounds_sampled(eps, const_c)
    start_total, start_distinct, start_samples = oracle.query_total, oracle.query_distinct, oracle.samples_used

    for round_no in range(1, rounds + 1):
        (a,) = oracle.sample(rng)
        outcome = run_triple_tests(oracle, a)
        if not outcome.passed:
            logger.debug(f"Round {round_no} rejected at root {a} on {outcome.witness.describe()}")
            return TestReport(
                Verdict.REJECT, outcome.witness, round_no,
                oracle.query_total - start_total, oracle.query_distinct - start_distinct,
                oracle.samples_used - start_samples,
            )

    return TestReport(
        Verdict.ACCEPT, None, rounds,
        oracle.query_total - start_total, oracle.query_distinct - start_distinct,
        oracle.samples_used - start_samples,
    )
