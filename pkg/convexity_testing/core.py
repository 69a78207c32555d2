# Exact values, grid domains, query oracles, distributions and seeded randomness
import bisect
import hashlib
import itertools
import logging
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

# All function values, weights and barycentric coordinates are exact rationals
ExactScalar = Fraction
GridPoint = Tuple[int, ...]
PointLike = Union[int, Sequence[int]]

SEED_MASK = (1 << 64) - 1


class DomainError(ValueError):
    """Raised when a point lies outside the grid being queried or sampled"""


class FormatError(ValueError):
    """Raised on malformed function files, distribution files or descriptors"""


def to_exact(value) -> Fraction:
    """Convert int, str, Decimal, float or Fraction to an exact rational"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, Decimal, str)):
        # binary floats are dyadic rationals, so this conversion is exact
        return Fraction(value)
    raise TypeError(f"Cannot convert {type(value).__name__} to an exact scalar")


def format_point(point: GridPoint) -> str:
    """Comma-free text form used in CSV witness columns"""
    return ";".join(str(c) for c in point)


def as_point(point: PointLike) -> GridPoint:
    """Normalize an int or coordinate sequence to a GridPoint tuple"""
    if isinstance(point, (int, np.integer)):
        return (int(point),)
    return tuple(int(c) for c in point)


@dataclass(frozen=True)
class GridDomain:
    """Finite hypergrid [n_1] x ... x [n_d] with coordinates starting at 0"""
    dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if not dims:
            raise ValueError("A grid domain needs at least one dimension")
        if any(n < 1 for n in dims):
            raise ValueError(f"Grid extents must be positive, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def contains(self, point: GridPoint) -> bool:
        return len(point) == len(self.dims) and all(0 <= c < n for c, n in zip(point, self.dims))

    def index_of(self, point: PointLike) -> int:
        """Row-major index, last coordinate fastest"""
        point = as_point(point)
        if not self.contains(point):
            raise DomainError(f"Point {point} is outside the grid {self.dims}")
        index = 0
        for c, n in zip(point, self.dims):
            index = index * n + c
        return index

    def point_at(self, index: int) -> GridPoint:
        if not 0 <= index < self.size:
            raise DomainError(f"Index {index} is outside the grid {self.dims}")
        coords = []
        for n in reversed(self.dims):
            index, c = divmod(index, n)
            coords.append(c)
        return tuple(reversed(coords))

    def points(self) -> Iterator[GridPoint]:
        return itertools.product(*(range(n) for n in self.dims))


@dataclass(frozen=True)
class GridFunction:
    """Dense assignment of exact values to every point of a grid"""
    domain: GridDomain
    values: Tuple[Fraction, ...]

    def __post_init__(self):
        values = tuple(to_exact(v) for v in self.values)
        if len(values) != self.domain.size:
            raise ValueError(
                f"Expected {self.domain.size} values for grid {self.domain.dims}, got {len(values)}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def line(cls, values: Sequence) -> "GridFunction":
        """Function over [n] from a list of n values"""
        return cls(GridDomain((len(values),)), tuple(values))

    @classmethod
    def from_callable(cls, domain: GridDomain, fn: Callable[[GridPoint], object]) -> "GridFunction":
        return cls(domain, tuple(to_exact(fn(p)) for p in domain.points()))

    def value(self, point: PointLike) -> Fraction:
        return self.values[self.domain.index_of(point)]

    def items(self) -> Iterator[Tuple[GridPoint, Fraction]]:
        return zip(self.domain.points(), self.values)


@dataclass
class LazyGridFunction:
    """Function evaluated on demand, used for instances too large to store densely"""
    domain: GridDomain
    evaluator: Callable[[GridPoint], object]
    description: str = ""

    def value(self, point: PointLike) -> Fraction:
        point = as_point(point)
        if not self.domain.contains(point):
            raise DomainError(f"Point {point} is outside the grid {self.domain.dims}")
        return to_exact(self.evaluator(point))

    def materialize(self, limit: Optional[int] = None) -> GridFunction:
        """Evaluate every point; refuses when the grid exceeds limit points"""
        if limit is not None and self.domain.size > limit:
            raise ValueError(
                f"Refusing to materialize {self.domain.size} points (limit {limit}) for {self.description or 'lazy function'}"
            )
        return GridFunction(self.domain, tuple(self.value(p) for p in self.domain.points()))


FunctionSource = Union[GridFunction, LazyGridFunction]


def restrict_to_box(source: FunctionSource, dims: Sequence[int]) -> GridFunction:
    """Dense copy of source on the sub-box [w_1] x ... x [w_d]"""
    window = GridDomain(tuple(dims))
    if window.d != source.domain.d or any(w > n for w, n in zip(window.dims, source.domain.dims)):
        raise ValueError(f"Window {window.dims} does not fit inside {source.domain.dims}")
    return GridFunction(window, tuple(source.value(p) for p in window.points()))


class Rng:
    """Seeded randomness, splittable by string label"""

    def __init__(self, seed: int, label: str = ""):
        self.seed = int(seed) & SEED_MASK
        self.label = label
        digest = hashlib.blake2b(f"{self.seed}:{label}".encode("utf-8"), digest_size=8).digest()
        self._bits = np.random.PCG64(int.from_bytes(digest, "little"))

    def split(self, label: str) -> "Rng":
        """Independent child stream; depends only on seed and the label path"""
        return Rng(self.seed, f"{self.label}/{label}")

    def uniform_int(self, m: int) -> int:
        """Unbiased draw from [0, m) by rejection over raw 64-bit words"""
        if m < 1:
            raise ValueError(f"Cannot draw from an empty range [0, {m})")
        if m == 1:
            return 0
        bits = (m - 1).bit_length()
        words = (bits + 63) // 64
        while True:
            value = 0
            for _ in range(words):
                value = (value << 64) | int(self._bits.random_raw())
            value >>= words * 64 - bits
            if value < m:
                return value

    def coin(self) -> bool:
        return self.uniform_int(2) == 1

    def choice(self, items: Sequence):
        return items[self.uniform_int(len(items))]


def uniform_point(n: int, rng: Rng) -> int:
    """Uniform integer in [n]"""
    return rng.uniform_int(n)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite distribution with exact rational weights"""
    support: Tuple[GridPoint, ...]
    weights: Tuple[Fraction, ...]
    _cumulative: Tuple[int, ...] = field(init=False, repr=False, compare=False)
    _scale: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        support = tuple(as_point(p) for p in self.support)
        weights = tuple(to_exact(w) for w in self.weights)
        if len(support) != len(weights):
            raise ValueError("Support and weights must have the same length")
        if len(set(support)) != len(support):
            raise ValueError("Support points must be pairwise distinct")
        if any(w < 0 for w in weights):
            raise ValueError("Weights must be nonnegative")
        if support and sum(weights) != 1:
            raise ValueError(f"Weights must sum to exactly 1, got {sum(weights)}")

        scale = math.lcm(*(w.denominator for w in weights)) if weights else 1
        running = 0
        cumulative = []
        for w in weights:
            running += w.numerator * (scale // w.denominator)
            cumulative.append(running)

        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_cumulative", tuple(cumulative))
        object.__setattr__(self, "_scale", scale)

    def weight(self, point: PointLike) -> Fraction:
        point = as_point(point)
        for p, w in zip(self.support, self.weights):
            if p == point:
                return w
        return Fraction(0)

    def check_domain(self, domain: GridDomain) -> None:
        for p in self.support:
            if not domain.contains(p):
                raise DomainError(f"Distribution point {p} is outside the grid {domain.dims}")


def sample(dist: DiscreteDistribution, rng: Rng) -> GridPoint:
    """Draw a support point with probability exactly its weight"""
    if not dist.support:
        raise ValueError("Cannot sample from a distribution with empty support")
    u = rng.uniform_int(dist._scale)
    return dist.support[bisect.bisect_right(dist._cumulative, u)]


def uniform_distribution(domain: GridDomain) -> DiscreteDistribution:
    points = tuple(domain.points())
    return DiscreteDistribution(points, tuple(Fraction(1, len(points)) for _ in points))


def point_mass(domain: GridDomain, point: PointLike) -> DiscreteDistribution:
    point = as_point(point)
    if not domain.contains(point):
        raise DomainError(f"Point {point} is outside the grid {domain.dims}")
    return DiscreteDistribution((point,), (Fraction(1),))


class QueryOracle:
    """Counting query access to a function and sample access to a distribution"""

    def __init__(self, source: FunctionSource, distribution: Optional[DiscreteDistribution] = None,
                 record_trace: bool = False):
        if distribution is not None:
            distribution.check_domain(source.domain)
        self.source = source
        self.distribution = distribution
        self.query_total = 0
        self.samples_used = 0
        self._queried: Set[GridPoint] = set()
        self.trace: Optional[List[Tuple[GridPoint, Fraction]]] = [] if record_trace else None

    @property
    def domain(self) -> GridDomain:
        return self.source.domain

    @property
    def query_distinct(self) -> int:
        return len(self._queried)

    def query(self, point: PointLike) -> Fraction:
        point = as_point(point)
        if not self.domain.contains(point):
            raise DomainError(f"Query {point} is outside the grid {self.domain.dims}")
        value = self.source.value(point)
        self.query_total += 1
        self._queried.add(point)
        if self.trace is not None:
            self.trace.append((point, value))
        return value

    def sample(self, rng: Rng) -> GridPoint:
        """Draw from the attached distribution, uniform over the grid when none is set"""
        if self.distribution is None:
            point = self.domain.point_at(rng.uniform_int(self.domain.size))
        else:
            point = sample(self.distribution, rng)
        self.samples_used += 1
        return point

    def queried_points(self) -> Set[GridPoint]:
        return set(self._queried)


def make_oracle(f: FunctionSource, distribution: Optional[DiscreteDistribution] = None,
                record_trace: bool = False) -> QueryOracle:
    return QueryOracle(f, distribution=distribution, record_trace=record_trace)


def _parse_scalar(text: str, path: Path, line_no: int) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise FormatError(f"{path}:{line_no}: bad value {text.strip()!r} ({e})")


def _content_lines(path: Path) -> List[Tuple[int, str]]:
    if not path.exists():
        raise FileNotFoundError(f"No such file: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    return [(i + 1, line.strip()) for i, line in enumerate(lines) if line.strip()]


def write_function(f: GridFunction, path: Union[str, Path]) -> None:
    """Write the `grid d n1 .. nd` header followed by row-major values"""
    path = Path(path)
    header = "grid " + " ".join(str(x) for x in (f.domain.d,) + f.domain.dims)
    body = "\n".join(str(v) for v in f.values)
    path.write_text(f"{header}\n{body}\n", encoding="utf-8")
    logger.debug(f"Wrote {f.domain.size} values to {path}")


def read_function(path: Union[str, Path]) -> GridFunction:
    path = Path(path)
    lines = _content_lines(path)
    if not lines:
        raise FormatError(f"{path}: empty function file")
    header = lines[0][1].split()
    if header[0] != "grid" or len(header) < 3:
        raise FormatError(f"{path}:1: expected 'grid d n1 ... nd', got {lines[0][1]!r}")
    try:
        d = int(header[1])
        dims = tuple(int(x) for x in header[2:])
    except ValueError:
        raise FormatError(f"{path}:1: non-integer grid header {lines[0][1]!r}")
    if len(dims) != d:
        raise FormatError(f"{path}:1: header declares d={d} but lists {len(dims)} extents")
    domain = GridDomain(dims)
    values = [_parse_scalar(text, path, no) for no, text in lines[1:]]
    if len(values) != domain.size:
        raise FormatError(f"{path}: expected {domain.size} values, found {len(values)}")
    return GridFunction(domain, tuple(values))


def write_distribution(dist: DiscreteDistribution, path: Union[str, Path]) -> None:
    path = Path(path)
    rows = [f"dist {len(dist.support)}"]
    rows += [" ".join(str(c) for c in p) + f" {w}" for p, w in zip(dist.support, dist.weights)]
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def read_distribution(path: Union[str, Path], domain: Optional[GridDomain] = None) -> DiscreteDistribution:
    path = Path(path)
    lines = _content_lines(path)
    if not lines or not lines[0][1].startswith("dist"):
        raise FormatError(f"{path}:1: expected 'dist m'")
    try:
        m = int(lines[0][1].split()[1])
    except (IndexError, ValueError):
        raise FormatError(f"{path}:1: bad distribution header {lines[0][1]!r}")
    if len(lines) - 1 != m:
        raise FormatError(f"{path}: header declares {m} points, found {len(lines) - 1}")

    support: List[GridPoint] = []
    weights: List[Fraction] = []
    for no, text in lines[1:]:
        parts = text.split()
        if len(parts) < 2:
            raise FormatError(f"{path}:{no}: expected coordinates followed by a weight")
        try:
            support.append(tuple(int(c) for c in parts[:-1]))
        except ValueError:
            raise FormatError(f"{path}:{no}: non-integer coordinate in {text!r}")
        weights.append(_parse_scalar(parts[-1], path, no))

    try:
        dist = DiscreteDistribution(tuple(support), tuple(weights))
    except ValueError as e:
        raise FormatError(f"{path}: {e}")
    if domain is not None:
        dist.check_domain(domain)
    return dist

