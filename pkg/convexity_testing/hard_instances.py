# Lower-bound instance families: hidden-direction quadratics and ternary-digit line functions
import hashlib
import itertools
import logging
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .core import GridDomain, GridFunction, GridPoint, LazyGridFunction, Rng
from .geometry import invert_exact, triple_is_convex

logger = logging.getLogger(__name__)

TernaryString = Tuple[int, ...]


# ---------------------------------------------------------------------------
# Hidden-direction family over [n]^d and [3] x [n]

def sample_direction(d: int, n: int, rng: Rng) -> Tuple[int, ...]:
    """Direction with coordinates in [0, n/(4d)] and coprime first two coordinates"""
    if d < 2:
        raise ValueError(f"Directions need d >= 2, got d={d}")
    if n < 4 * d:
        raise ValueError(f"Need n >= 4d for a nonempty direction range, got n={n}, d={d}")
    bound = n // (4 * d)
    attempts = 0
    while True:
        attempts += 1
        a = tuple(rng.uniform_int(bound + 1) for _ in range(d))
        if math.gcd(a[0], a[1]) == 1:
            logger.debug(f"Sampled direction {a} after {attempts} attempts")
            return a


def sample_stripe_direction(n: int, rng: Rng) -> Tuple[int, int]:
    """(1, a2) with a2 uniform in [0, n/100]"""
    return 1, rng.uniform_int(n // 100 + 1)


def _extended_gcd(a: int, b: int) -> Tuple[int, int, int]:
    """(g, u, v) with a*u + b*v = g"""
    old_r, r = a, b
    old_u, u = 1, 0
    old_v, v = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_u, u = u, old_u - q * u
        old_v, v = v, old_v - q * v
    if old_r < 0:
        old_r, old_u, old_v = -old_r, -old_u, -old_v
    return old_r, old_u, old_v


@dataclass(frozen=True)
class BasisCompletion:
    """Unimodular basis whose first column is the hidden direction a"""
    a: Tuple[int, ...]
    c1: int
    c2: int
    B: Tuple[Tuple[int, ...], ...]
    B_inv: Tuple[Tuple[int, ...], ...]

    @property
    def d(self) -> int:
        return len(self.a)

    def coordinates(self, x: Sequence[int]) -> Tuple[int, ...]:
        """x in the basis, x^B = B_inv x"""
        return tuple(sum(row[j] * x[j] for j in range(len(x))) for row in self.B_inv)

    def point(self, coords: Sequence[int]) -> Tuple[int, ...]:
        """B coords"""
        return tuple(sum(row[j] * coords[j] for j in range(len(coords))) for row in self.B)

    def determinant(self) -> int:
        rows = [list(map(Fraction, row)) for row in self.B]
        det = Fraction(1)
        size = len(rows)
        for col in range(size):
            pivot = next((r for r in range(col, size) if rows[r][col] != 0), None)
            if pivot is None:
                return 0
            if pivot != col:
                rows[col], rows[pivot] = rows[pivot], rows[col]
                det = -det
            det *= rows[col][col]
            for r in range(col + 1, size):
                factor = rows[r][col] / rows[col][col]
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[col])]
        return int(det)


def basis_completion(a: Sequence[int]) -> BasisCompletion:
    """Complete a (with gcd(a1, a2) = 1) to a unimodular integer basis"""
    a = tuple(int(v) for v in a)
    if len(a) < 2:
        raise ValueError(f"Direction must have at least two coordinates, got {a}")
    g, u, v = _extended_gcd(a[0], a[1])
    if g != 1:
        raise ValueError(f"First two coordinates of {a} are not coprime")
    # a1*c1 - a2*c2 = 1; shift along (a2, a1) so that c1 lands in [0, |a2|)
    c1, c2 = u, -v
    if a[1] != 0:
        q = c1 // abs(a[1])
        k = -q if a[1] > 0 else q
        c1, c2 = c1 + k * a[1], c2 + k * a[0]

    d = len(a)
    columns = [list(a), [c2, c1] + [0] * (d - 2)]
    columns += [[int(r == i) for r in range(d)] for i in range(2, d)]
    B = tuple(tuple(columns[j][i] for j in range(d)) for i in range(d))
    inverse = invert_exact(B)
    if any(x.denominator != 1 for row in inverse for x in row):
        raise ValueError(f"Basis for {a} is not unimodular")
    B_inv = tuple(tuple(int(x) for x in row) for row in inverse)
    return BasisCompletion(a, c1, c2, B, B_inv)


def canonical_g(basis: BasisCompletion, x: Sequence[int]) -> int:
    """Flat along the hidden direction, steep elsewhere"""
    coords = basis.coordinates(x)
    return coords[0] ** 2 + 2 * sum(c * c for c in coords[1:])


class SignField:
    """Lazily drawn fair signs keyed by integer tuples"""

    def __init__(self, seed: int, constant: Optional[int] = None):
        self.seed = int(seed) & ((1 << 64) - 1)
        self.constant = constant
        self._memo: Dict[Tuple[int, ...], int] = {}
        self._lock = threading.Lock()

    def sign(self, key: Sequence[int]) -> int:
        if self.constant is not None:
            return self.constant
        key = tuple(int(k) for k in key)
        with self._lock:
            cached = self._memo.get(key)
            if cached is None:
                digest = hashlib.blake2b(
                    repr(key).encode("utf-8"), digest_size=8, key=self.seed.to_bytes(8, "little")
                ).digest()
                cached = 1 if digest[0] & 1 else -1
                self._memo[key] = cached
            return cached


@dataclass
class HiddenDirectionInstance:
    """g_B plus sign perturbations constant (yes) or alternating (no) along the hidden direction"""
    domain: GridDomain
    basis: BasisCompletion
    signs: SignField
    alternating: bool

    def value(self, x: Sequence[int]) -> int:
        coords = self.basis.coordinates(x)
        base = canonical_g(self.basis, x)
        sigma = self.signs.sign(coords[1:])
        if self.alternating and coords[0] % 2:
            sigma = -sigma
        return base + sigma

    def function(self) -> LazyGridFunction:
        kind = "dn" if self.alternating else "dy"
        return LazyGridFunction(self.domain, self.value, f"{kind} a={self.basis.a} dims={self.domain.dims}")


def _hidden_direction(domain: GridDomain, a: Sequence[int], rng: Rng, alternating: bool,
                      signs: Optional[SignField] = None) -> HiddenDirectionInstance:
    basis = basis_completion(a)
    if signs is None:
        signs = SignField(rng.uniform_int(1 << 64))
    return HiddenDirectionInstance(domain, basis, signs, alternating)


def sample_dy(d: int, n: int, rng: Rng, signs: Optional[SignField] = None) -> HiddenDirectionInstance:
    """Convex instance g_B(x) + sigma(x^B_2..d)"""
    a = sample_direction(d, n, rng.split("direction"))
    return _hidden_direction(GridDomain((n,) * d), a, rng.split("signs"), False, signs)


def sample_dn(d: int, n: int, rng: Rng, signs: Optional[SignField] = None) -> HiddenDirectionInstance:
    """Far instance g_B(x) + sigma(x^B_2..d) * (-1)^(x^B_1)"""
    a = sample_direction(d, n, rng.split("direction"))
    return _hidden_direction(GridDomain((n,) * d), a, rng.split("signs"), True, signs)


def sample_dy_stripe(n: int, rng: Rng) -> HiddenDirectionInstance:
    a = sample_stripe_direction(n, rng.split("direction"))
    return _hidden_direction(GridDomain((3, n)), a, rng.split("signs"), False)


def sample_dn_stripe(n: int, rng: Rng) -> HiddenDirectionInstance:
    a = sample_stripe_direction(n, rng.split("direction"))
    return _hidden_direction(GridDomain((3, n)), a, rng.split("signs"), True)


@dataclass
class FarnessCertificate:
    """Disjoint violating triples along hidden-direction lines"""
    witnesses: List[Tuple[GridPoint, GridPoint, GridPoint]]
    domain_size: int

    @property
    def count(self) -> int:
        return len(self.witnesses)

    @property
    def bound(self) -> Fraction:
        return Fraction(self.count, self.domain_size)


def verify_dn_far(h, basis: BasisCompletion) -> FarnessCertificate:
    """Greedy left-to-right packing of disjoint non-convex triples on every line in direction a"""
    lines: Dict[Tuple[int, ...], List[Tuple[int, GridPoint]]] = {}
    for x in h.domain.points():
        coords = basis.coordinates(x)
        lines.setdefault(coords[1:], []).append((coords[0], x))

    witnesses = []
    for key in sorted(lines):
        line = sorted(lines[key])
        t = 0
        while t + 2 < len(line):
            (p0, x0), (p1, x1), (p2, x2) = line[t], line[t + 1], line[t + 2]
            # lattice points on a line are consecutive multiples of a
            if p1 == p0 + 1 and p2 == p1 + 1 and not triple_is_convex(
                    p0, p1, p2, h.value(x0), h.value(x1), h.value(x2)):
                witnesses.append((x0, x1, x2))
                t += 3
            else:
                t += 1
    certificate = FarnessCertificate(witnesses, h.domain.size)
    logger.info(f"Packed {certificate.count} disjoint witnesses, distance >= {certificate.bound}")
    return certificate


def dn_bound(d: int) -> Fraction:
    """(1 - 1/d)^d / 7"""
    return Fraction(d - 1, d) ** d / 7


# ---------------------------------------------------------------------------
# Ternary-digit family over [3^k]

def ternary_digits(x: int, k: int) -> TernaryString:
    """Digits of x, index 0 most significant"""
    digits = []
    for _ in range(k):
        x, r = divmod(x, 3)
        digits.append(r)
    return tuple(reversed(digits))


def from_digits(digits: Sequence[int]) -> int:
    value = 0
    for digit in digits:
        value = value * 3 + digit
    return value


@dataclass
class LbAssignment:
    """Values a_s for every ternary string s shorter than k"""
    k: int
    values: Dict[TernaryString, int]
    _prefix_sums: Optional[List[int]] = field(default=None, init=False, repr=False, compare=False)
    _perturbed: Dict[Tuple[int, int], "LbAssignment"] = field(
        default_factory=dict, init=False, repr=False, compare=False
    )
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False, compare=False)

    @property
    def m(self) -> int:
        return 3 * self.k ** 3

    @property
    def n(self) -> int:
        return 3 ** self.k

    @classmethod
    def strings(cls, k: int) -> List[TernaryString]:
        return [s for length in range(k) for s in itertools.product(range(3), repeat=length)]

    @classmethod
    def random(cls, k: int, rng: Rng) -> "LbAssignment":
        if k < 2:
            raise ValueError(f"Need k >= 2 for a nonempty value range, got {k}")
        upper = k ** 3 - 1
        return cls(k, {s: rng.uniform_int(upper) for s in cls.strings(k)})

    @classmethod
    def constant(cls, k: int, value: int) -> "LbAssignment":
        return cls(k, {s: value for s in cls.strings(k)})

    def perturbed(self, j: int, delta: int) -> "LbAssignment":
        """a[j, delta]: every string of length j shifted by delta"""
        if not 0 <= j < self.k:
            raise ValueError(f"Level {j} is outside [0, {self.k})")
        key = (j, delta)
        with self._lock:
            if key not in self._perturbed:
                values = {s: v + delta if len(s) == j else v for s, v in self.values.items()}
                self._perturbed[key] = LbAssignment(self.k, values)
            return self._perturbed[key]

    def with_value(self, s: TernaryString, value: int) -> "LbAssignment":
        values = dict(self.values)
        values[s] = value
        return LbAssignment(self.k, values)

    def prefix_sums(self) -> List[int]:
        with self._lock:
            if self._prefix_sums is None:
                sums = [0]
                for x in range(self.n):
                    sums.append(sums[-1] + lb1d_derivative(self, x))
                self._prefix_sums = sums
            return self._prefix_sums


def _phi(a: LbAssignment, digits: TernaryString, i: int) -> int:
    a_s = a.values[digits[:i]]
    digit = digits[i]
    if digit == 0:
        return a_s
    if digit == 1:
        return a_s + 1
    return a.m - 2 * a_s - 1


def lb1d_derivative(a: LbAssignment, x: int) -> int:
    """sum_i m^(k-1-i) phi(x, i)"""
    digits = ternary_digits(x, a.k)
    return sum(a.m ** (a.k - 1 - i) * _phi(a, digits, i) for i in range(a.k))


def lb1d_value(a: LbAssignment, x: int) -> int:
    """f_a(x) as the sum of the derivative below x"""
    if not 0 <= x < a.n:
        raise ValueError(f"x={x} is outside [0, {a.n})")
    return a.prefix_sums()[x]


def lb1d_value_closed(a: LbAssignment, x: int) -> int:
    if not 0 <= x < a.n:
        raise ValueError(f"x={x} is outside [0, {a.n})")
    k, m = a.k, a.m
    digits = ternary_digits(x, k)
    total = 0
    for i in range(k):
        prefix = from_digits(digits[:i])
        suffix = from_digits(digits[i + 1:])
        total += (3 * m) ** (k - 1 - i) * m * prefix
        a_s = a.values[digits[:i]]
        span = 3 ** (k - 1 - i)
        if digits[i] == 0:
            term = suffix * a_s
        elif digits[i] == 1:
            term = span * a_s + suffix * (a_s + 1)
        else:
            term = span * (2 * a_s + 1) + suffix * (m - 2 * a_s - 1)
        total += m ** (k - i - 1) * term
    return total


def lb1d_g(a: LbAssignment, j: int, x: int) -> int:
    """f over a[j,+1], a[j,-1] or a depending on digit j of x"""
    if not 0 <= j < a.k:
        raise ValueError(f"Level {j} is outside [0, {a.k})")
    digit = ternary_digits(x, a.k)[j]
    if digit == 0:
        return lb1d_value(a.perturbed(j, 1), x)
    if digit == 1:
        return lb1d_value(a.perturbed(j, -1), x)
    return lb1d_value(a, x)


def lb1d_f_function(a: LbAssignment) -> GridFunction:
    return GridFunction.line([lb1d_value(a, x) for x in range(a.n)])


def lb1d_g_function(a: LbAssignment, j: int) -> GridFunction:
    return GridFunction.line([lb1d_g(a, j, x) for x in range(a.n)])


def lb1d_witness_pairs(a: LbAssignment, j: int) -> List[Tuple[int, int]]:
    """(x, y) with x_j = 0, y_j = 1, equal other digits and last digit 0; g's slope drops from x to y"""
    k = a.k
    if not 0 <= j < k - 1:
        raise ValueError(f"Witness pairs exist for levels 0..{k - 2}, got {j}")
    pairs = []
    for prefix in itertools.product(range(3), repeat=j):
        for middle in itertools.product(range(3), repeat=k - j - 2):
            x = from_digits(prefix + (0,) + middle + (0,))
            y = from_digits(prefix + (1,) + middle + (0,))
            pairs.append((x, y))
    return pairs


def lb1d_witness_points(a: LbAssignment, j: int) -> List[int]:
    """Support of the violation groups {x, x+1, y, y+1}"""
    return sorted({p for x, y in lb1d_witness_pairs(a, j) for p in (x, x + 1, y, y + 1)})


def sample_lb1d_level(k: int, rng: Rng) -> int:
    """Level j in [0, k-2]; at j = k-1 the perturbation keeps the function convex"""
    if k < 2:
        raise ValueError(f"Far instances need k >= 2, got {k}")
    return rng.uniform_int(k - 1)


@dataclass
class GeneralEpsAssignment:
    """l independent blocks of the ternary family, one per segment of length 3^k"""
    blocks: List[LbAssignment]
    _cache: Dict[Optional[Tuple[int, int, int]], List[int]] = field(
        default_factory=dict, init=False, repr=False, compare=False
    )
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False, compare=False)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.blocks)

    @property
    def k(self) -> int:
        return self.blocks[0].k

    @property
    def block_size(self) -> int:
        return 3 ** self.k

    @property
    def n(self) -> int:
        return self.l * self.block_size

    @staticmethod
    def parameters(n: int, eps) -> Tuple[int, int]:
        """(l, k) with l = ceil(1/(9 eps)) and k the largest with l * 3^k <= n"""
        eps = Fraction(eps)
        blocks = math.ceil(1 / (9 * eps))
        k = 0
        while blocks * 3 ** (k + 1) <= n:
            k += 1
        return blocks, k

    @classmethod
    def from_eps(cls, n: int, eps, rng: Rng) -> "GeneralEpsAssignment":
        blocks, k = cls.parameters(n, eps)
        if k < 1:
            raise ValueError(f"n={n} is too small for eps={eps}")
        return cls([LbAssignment.random(k, rng.split(f"block-{t}")) for t in range(blocks)])

    @staticmethod
    def perturbation(mode: Optional[Tuple[int, int]], t: int, digit: int) -> Optional[Tuple[int, int, int]]:
        """(block, level, delta) applied to the prefix ending in block t, or None for f~"""
        if mode is None or mode[0] != t or digit == 2:
            return None
        return t, mode[1], 1 if digit == 0 else -1

    def prefix(self, perturbation: Optional[Tuple[int, int, int]]) -> List[int]:
        """Prefix sums of the block-shifted derivative with at most one block perturbed"""
        with self._lock:
            if perturbation not in self._cache:
                assignments = list(self.blocks)
                if perturbation is not None:
                    t, j, delta = perturbation
                    assignments[t] = self.blocks[t].perturbed(j, delta)
                m_k = self.blocks[0].m ** self.k
                sums = [0]
                for t, assignment in enumerate(assignments):
                    for x in range(self.block_size):
                        sums.append(sums[-1] + t * m_k + lb1d_derivative(assignment, x))
                self._cache[perturbation] = sums
            return self._cache[perturbation]


def lb1d_general(assign: GeneralEpsAssignment, mode: Optional[Tuple[int, int]], x: int) -> int:
    """f~ (mode None) or g~ for mode (t, j), by prefix sums of the block-shifted derivative"""
    if not 0 <= x < assign.n:
        raise ValueError(f"x={x} is outside [0, {assign.n})")
    t, offset = divmod(x, assign.block_size)
    digit = ternary_digits(offset, assign.k)[mode[1]] if mode is not None and mode[0] == t else 2
    return assign.prefix(assign.perturbation(mode, t, digit))[x]


def lb1d_general_function(assign: GeneralEpsAssignment, mode: Optional[Tuple[int, int]] = None) -> GridFunction:
    return GridFunction.line([lb1d_general(assign, mode, x) for x in range(assign.n)])


def appendix_counterexample() -> GridFunction:
    """Linearly convex but not convex function on [3] x [3]"""
    table = {
        (0, 0): 5, (1, 0): 3, (2, 0): 1,
        (0, 1): 1, (1, 1): 2, (2, 1): 3,
        (0, 2): 3, (1, 2): 1, (2, 2): 5,
    }
    return GridFunction.from_callable(GridDomain((3, 3)), lambda p: table[p])


# ---------------------------------------------------------------------------
# Random convex instances for completeness runs

def random_convex_line(n: int, rng: Rng, max_step: int = 16) -> GridFunction:
    """Cumulative sums of sorted random increments"""
    increments = sorted(rng.uniform_int(2 * max_step + 1) - max_step for _ in range(max(n - 1, 0)))
    values = [rng.uniform_int(2 * max_step + 1) - max_step]
    for step in increments:
        values.append(values[-1] + step)
    return GridFunction.line(values)


def random_convex_stripe(n: int, rng: Rng, max_coeff: int = 3) -> LazyGridFunction:
    """PSD quadratic plus affine restricted to [3] x [n]"""
    alpha = rng.uniform_int(max_coeff + 1)
    gamma = rng.uniform_int(max_coeff + 1)
    limit = math.isqrt(alpha * gamma)
    beta = rng.uniform_int(2 * limit + 1) - limit
    lin_i = rng.uniform_int(2 * n + 1) - n
    lin_x = rng.uniform_int(4 * n + 1) - 2 * n
    const = rng.uniform_int(101) - 50

    def value(p: GridPoint) -> int:
        i, x = p
        return alpha * i * i + 2 * beta * i * x + gamma * x * x + lin_i * i + lin_x * x + const

    description = f"convex_stripe alpha={alpha} beta={beta} gamma={gamma}"
    return LazyGridFunction(GridDomain((3, n)), value, description)
