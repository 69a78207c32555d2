# Exact convexity checks, convex envelopes via rational LP, minimal simplices and bisection
import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .config import config
from .core import GridDomain, GridFunction, GridPoint, as_point, to_exact

logger = logging.getLogger(__name__)

PointValue = Tuple[GridPoint, Fraction]


def triple_is_convex(x: int, y: int, z: int, fx, fy, fz) -> bool:
    """(z - y) f(x) + (y - x) f(z) >= (z - x) f(y) for x < y < z; equality counts as convex"""
    if not x < y < z:
        raise ValueError(f"Triple must be strictly increasing, got ({x}, {y}, {z})")
    return (to_exact(fy) - to_exact(fx)) * (z - y) <= (to_exact(fz) - to_exact(fy)) * (y - x)


@dataclass
class EnvelopeCombination:
    """Optimal convex combination attaining the envelope value at a point"""
    value: Fraction
    support: Tuple[PointValue, ...]
    weights: Tuple[Fraction, ...]


@dataclass
class ConvexityVerdict:
    """Outcome of a convexity decision with its violation, if any"""
    is_convex: bool
    centre: Optional[GridPoint] = None
    centre_value: Optional[Fraction] = None
    envelope: Optional[EnvelopeCombination] = None
    triple: Optional[Tuple[int, int, int]] = None

    def __bool__(self) -> bool:
        return self.is_convex


def is_convex_on_sorted(xs: Sequence[int], values: Sequence) -> ConvexityVerdict:
    """Consecutive-triple check on a sorted 1D point set"""
    for i in range(len(xs) - 2):
        x, y, z = xs[i], xs[i + 1], xs[i + 2]
        if not triple_is_convex(x, y, z, values[i], values[i + 1], values[i + 2]):
            return ConvexityVerdict(False, centre=(y,), centre_value=to_exact(values[i + 1]), triple=(x, y, z))
    return ConvexityVerdict(True)


def is_convex_line(f: GridFunction) -> ConvexityVerdict:
    if f.domain.d != 1:
        raise ValueError(f"is_convex_line needs a 1D function, got dims {f.domain.dims}")
    return is_convex_on_sorted(range(f.domain.dims[0]), f.values)


# ---------------------------------------------------------------------------
# Exact linear algebra

def _eliminate(rows: List[List[Fraction]], ncols: int) -> List[int]:
    """Reduced row echelon form in place over the first ncols columns; returns pivot columns"""
    pivots = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        lead = rows[r][col]
        rows[r] = [v / lead for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return pivots


def solve_exact(matrix: Sequence[Sequence], rhs: Sequence) -> Optional[List[Fraction]]:
    """Unique exact solution of matrix * x = rhs, None when inconsistent or not unique"""
    ncols = len(matrix[0]) if matrix else 0
    rows = [[to_exact(v) for v in row] + [to_exact(b)] for row, b in zip(matrix, rhs)]
    pivots = _eliminate(rows, ncols)
    if len(pivots) < ncols:
        return None
    if any(row[-1] != 0 for row in rows[len(pivots):]):
        return None
    return [rows[i][-1] for i in range(ncols)]


def invert_exact(matrix: Sequence[Sequence]) -> List[List[Fraction]]:
    size = len(matrix)
    rows = [[to_exact(v) for v in row] + [Fraction(int(i == j)) for j in range(size)]
            for i, row in enumerate(matrix)]
    if len(_eliminate(rows, size)) < size:
        raise ValueError("Matrix is singular")
    return [row[size:] for row in rows]


# ---------------------------------------------------------------------------
# Rational simplex method

class LpStatus(Enum):
    """Linear program outcome"""
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LpProblem:
    """minimize c.x subject to A x = b, x >= 0"""
    objective: Sequence
    constraints: Sequence[Sequence]
    rhs: Sequence


@dataclass
class LpResult:
    status: LpStatus
    value: Optional[Fraction] = None
    solution: Optional[List[Fraction]] = None


def _pivot(tableau: List[List[Fraction]], basis: List[int], r: int, col: int) -> None:
    lead = tableau[r][col]
    tableau[r] = [v / lead for v in tableau[r]]
    pivot_row = tableau[r]
    for i, row in enumerate(tableau):
        if i != r and row[col] != 0:
            factor = row[col]
            tableau[i] = [a - factor * b for a, b in zip(row, pivot_row)]
    basis[r] = col


def _run_simplex(tableau: List[List[Fraction]], basis: List[int], cost: List[Fraction], ncols: int) -> LpStatus:
    """Minimize with Bland's rule: smallest improving column, smallest leaving basis index"""
    while True:
        basic = set(basis)
        basic_cost = [cost[b] for b in basis]
        entering = None
        for j in range(ncols):
            if j in basic:
                continue
            reduced = cost[j] - sum(cb * row[j] for cb, row in zip(basic_cost, tableau) if row[j] != 0)
            if reduced < 0:
                entering = j
                break
        if entering is None:
            return LpStatus.OPTIMAL

        leave = None
        best_ratio = None
        for i, row in enumerate(tableau):
            if row[entering] > 0:
                ratio = row[-1] / row[entering]
                if best_ratio is None or ratio < best_ratio or (ratio == best_ratio and basis[i] < basis[leave]):
                    leave, best_ratio = i, ratio
        if leave is None:
            return LpStatus.UNBOUNDED
        _pivot(tableau, basis, leave, entering)


def solve_lp(problem: LpProblem) -> LpResult:
    """Two-phase exact simplex for min c.x, A x = b, x >= 0"""
    cost = [to_exact(v) for v in problem.objective]
    nvars = len(cost)
    if len(problem.constraints) != len(problem.rhs):
        raise ValueError("Constraint matrix and right-hand side disagree in length")
    if any(len(row) != nvars for row in problem.constraints):
        raise ValueError(f"Every constraint row must have {nvars} coefficients")

    m = len(problem.constraints)
    tableau: List[List[Fraction]] = []
    for i, (row, b) in enumerate(zip(problem.constraints, problem.rhs)):
        row = [to_exact(v) for v in row]
        b = to_exact(b)
        if b < 0:
            row, b = [-v for v in row], -b
        tableau.append(row + [Fraction(int(i == j)) for j in range(m)] + [b])
    basis = [nvars + i for i in range(m)]

    # Phase 1: drive the artificial variables to zero
    phase_one_cost = [Fraction(0)] * nvars + [Fraction(1)] * m
    _run_simplex(tableau, basis, phase_one_cost, nvars + m)
    infeasibility = sum(row[-1] for row, b in zip(tableau, basis) if b >= nvars)
    if infeasibility > 0:
        logger.debug(f"LP infeasible (phase one residual {infeasibility})")
        return LpResult(LpStatus.INFEASIBLE)

    redundant = []
    for r, b in enumerate(basis):
        if b >= nvars:
            col = next((j for j in range(nvars) if tableau[r][j] != 0), None)
            if col is None:
                redundant.append(r)
            else:
                _pivot(tableau, basis, r, col)
    keep = [r for r in range(m) if r not in redundant]
    tableau = [tableau[r][:nvars] + [tableau[r][-1]] for r in keep]
    basis = [basis[r] for r in keep]

    status = _run_simplex(tableau, basis, cost, nvars)
    if status is LpStatus.UNBOUNDED:
        return LpResult(LpStatus.UNBOUNDED)

    solution = [Fraction(0)] * nvars
    for row, b in zip(tableau, basis):
        solution[b] = row[-1]
    value = sum((c * x for c, x in zip(cost, solution)), Fraction(0))
    return LpResult(LpStatus.OPTIMAL, value=value, solution=solution)


# ---------------------------------------------------------------------------
# Convex envelope and convexity decisions

def _inside_bounding_box(points: Sequence[GridPoint], z: GridPoint) -> bool:
    return all(min(p[c] for p in points) <= z[c] <= max(p[c] for p in points) for c in range(len(z)))


def convex_envelope(points: Sequence[Tuple[Sequence[int], object]], z: Sequence[int]) -> Optional[EnvelopeCombination]:
    """Minimum of sum(l_i f(x_i)) over convex combinations hitting z; None when z is outside the hull"""
    if not points:
        raise ValueError("Envelope needs at least one point")
    pts = [(as_point(p), to_exact(v)) for p, v in points]
    z = as_point(z)
    if len({p for p, _ in pts}) != len(pts):
        raise ValueError("Envelope points must be pairwise distinct")
    if not _inside_bounding_box([p for p, _ in pts], z):
        return None

    d = len(z)
    constraints = [[p[c] for p, _ in pts] for c in range(d)] + [[1] * len(pts)]
    rhs = list(z) + [1]
    result = solve_lp(LpProblem([v for _, v in pts], constraints, rhs))
    if result.status is not LpStatus.OPTIMAL:
        return None

    used = [(pv, w) for pv, w in zip(pts, result.solution) if w != 0]
    return EnvelopeCombination(
        value=result.value,
        support=tuple(pv for pv, _ in used),
        weights=tuple(w for _, w in used),
    )


def envelope_value(points: Sequence[Tuple[Sequence[int], object]], z: Sequence[int]) -> Optional[Fraction]:
    """Lower convex envelope at z, or None when z is outside the convex hull"""
    combination = convex_envelope(points, z)
    return None if combination is None else combination.value


def is_convex_points(points: Sequence[Sequence[int]], values: Sequence) -> ConvexityVerdict:
    """Convexity of a function on an arbitrary finite point set via one LP per centre"""
    pts = [as_point(p) for p in points]
    vals = [to_exact(v) for v in values]
    for k, (z, fz) in enumerate(zip(pts, vals)):
        others = [(p, v) for i, (p, v) in enumerate(zip(pts, vals)) if i != k]
        if not others:
            continue
        combination = convex_envelope(others, z)
        if combination is not None and combination.value < fz:
            logger.debug(f"Convexity violated at {z}: f={fz} > envelope {combination.value}")
            return ConvexityVerdict(False, centre=z, centre_value=fz, envelope=combination)
    return ConvexityVerdict(True)


def is_convex_grid(f: GridFunction) -> ConvexityVerdict:
    return is_convex_points(list(f.domain.points()), f.values)


def is_line_convex_grid(f: GridFunction) -> ConvexityVerdict:
    """Convexity along every lattice segment between two domain points"""
    items = list(f.items())
    for (p, fp), (r, fr) in itertools.combinations(items, 2):
        diff = [b - a for a, b in zip(p, r)]
        steps = math.gcd(*diff) if len(diff) > 1 else abs(diff[0])
        if steps <= 1:
            continue
        step = [c // steps for c in diff]
        for t in range(1, steps):
            q = tuple(a + t * s for a, s in zip(p, step))
            fq = f.value(q)
            if steps * fq > (steps - t) * fp + t * fr:
                return ConvexityVerdict(False, centre=q, centre_value=fq)
    return ConvexityVerdict(True)


# ---------------------------------------------------------------------------
# Minimal centred simplices

@dataclass(frozen=True)
class CentredSimplex:
    """Affinely independent vertices with a centre of strictly positive barycentric weights"""
    vertices: Tuple[GridPoint, ...]
    centre: GridPoint
    barycentric: Tuple[Fraction, ...]


def _barycentric(vertices: Sequence[GridPoint], z: GridPoint) -> Optional[List[Fraction]]:
    matrix = [[v[c] for v in vertices] for c in range(len(z))] + [[1] * len(vertices)]
    return solve_exact(matrix, list(z) + [1])


def _in_hull(vertices: Sequence[GridPoint], w: GridPoint) -> bool:
    if not _inside_bounding_box(vertices, w):
        return False
    return convex_envelope([(v, 0) for v in vertices], w) is not None


def minimal_centred_simplices(points: Sequence[Sequence[int]], z: Sequence[int]) -> List[CentredSimplex]:
    """All minimal centred simplices of the point set centred at z, by exhaustive enumeration"""
    pts = [as_point(p) for p in points]
    z = as_point(z)
    limit = config.instances.max_enumeration_points
    if len(pts) > limit:
        raise ValueError(f"Enumeration over {len(pts)} points exceeds the limit of {limit}")

    others = [p for p in pts if p != z]
    found = []
    for size in range(2, len(z) + 2):
        for vertices in itertools.combinations(others, size):
            weights = _barycentric(vertices, z)
            if weights is None or any(w <= 0 for w in weights):
                continue
            rest = [w for w in others if w not in vertices]
            if any(_in_hull(vertices, w) for w in rest):
                continue
            found.append(CentredSimplex(tuple(vertices), z, tuple(weights)))
    return found


@lru_cache(maxsize=32)
def _simplices_by_centre(dims: Tuple[int, ...]) -> Dict[GridPoint, Tuple[CentredSimplex, ...]]:
    points = list(GridDomain(dims).points())
    logger.info(f"Enumerating minimal centred simplices of grid {dims}")
    return {z: tuple(minimal_centred_simplices(points, z)) for z in points}


def is_convex_via_minimal_simplices(f: GridFunction) -> ConvexityVerdict:
    """Convexity decided simplex by simplex; small domains only"""
    simplices = _simplices_by_centre(f.domain.dims)
    for z, candidates in simplices.items():
        fz = f.value(z)
        for simplex in candidates:
            combined = sum((w * f.value(v) for w, v in zip(simplex.barycentric, simplex.vertices)), Fraction(0))
            if fz > combined:
                support = tuple((v, f.value(v)) for v in simplex.vertices)
                return ConvexityVerdict(
                    False, centre=z, centre_value=fz,
                    envelope=EnvelopeCombination(combined, support, simplex.barycentric),
                )
    return ConvexityVerdict(True)


# ---------------------------------------------------------------------------
# Bisection and the 1D distance oracle

@dataclass
class BisectionResult:
    index: int
    value: Fraction
    evaluations: int


def bisection_min(accessor: Callable[[int], Fraction], n: int) -> BisectionResult:
    """Minimum of a convex sequence of length n in O(log n) evaluations"""
    if n < 1:
        raise ValueError(f"Cannot minimize over an empty range (n={n})")
    cache: Dict[int, Fraction] = {}

    def evaluate(i: int) -> Fraction:
        if i not in cache:
            cache[i] = accessor(i)
        return cache[i]

    lo, size = 0, n
    while size >= 6:
        half = size // 2
        if evaluate(lo + half - 1) < evaluate(lo + half):
            size = half
        else:
            lo, size = lo + half, size - half
    best = min(range(lo, lo + size), key=lambda i: (evaluate(i), i))
    return BisectionResult(best, cache[best], len(cache))


def longest_convex_subsequence(values: Sequence) -> List[int]:
    """Indices of a longest subsequence with nondecreasing chordal slopes"""
    vals = [to_exact(v) for v in values]
    n = len(vals)
    if n <= 2:
        return list(range(n))

    def slope(i: int, j: int) -> Fraction:
        return (vals[j] - vals[i]) / (j - i)

    # length[i][j]: longest convex subsequence whose last two indices are i < j
    length = [[0] * n for _ in range(n)]
    parent = [[-1] * n for _ in range(n)]
    for j in range(n):
        incoming = sorted((slope(i, j), i) for i in range(j))
        outgoing = sorted((slope(j, k), k) for k in range(j + 1, n))
        pointer, best_len, best_i = 0, 1, -1
        for s_out, k in outgoing:
            while pointer < len(incoming) and incoming[pointer][0] <= s_out:
                i = incoming[pointer][1]
                if length[i][j] > best_len:
                    best_len, best_i = length[i][j], i
                pointer += 1
            if best_i >= 0:
                length[j][k], parent[j][k] = best_len + 1, best_i
            else:
                length[j][k] = 2

    best = max(((length[i][j], i, j) for i in range(n) for j in range(i + 1, n)))
    _, i, j = best
    chain = [j, i]
    while parent[i][j] >= 0:
        i, j = parent[i][j], i
        chain.append(i)
    return list(reversed(chain))


def distance_to_convex_line(f: GridFunction) -> Fraction:
    """Fraction of points that must change to make a 1D function convex"""
    if f.domain.d != 1:
        raise ValueError(f"distance_to_convex_line needs a 1D function, got dims {f.domain.dims}")
    n = f.domain.dims[0]
    return Fraction(n - len(longest_convex_subsequence(f.values)), n)
