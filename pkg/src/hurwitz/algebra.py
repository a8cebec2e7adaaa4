"""Exact arithmetic and symmetric-Laurent-polynomial machinery.

Everything here is computed over ``fractions.Fraction`` (arbitrary precision,
never rounded).  Partitions are weakly decreasing tuples of positive ints,
compositions are arbitrary tuples of positive ints.

Laurent polynomials in m variables are stored sparsely as

    LaurentPoly = Dict[Tuple[int, ...], Fraction]

mapping an exponent vector (one possibly negative int per variable) to its
coefficient; zero coefficients are never stored.

A *monomial symmetric Laurent polynomial* ``m_{lam;lam'}`` is the sum of all
distinct monomials ``x_{i_1}^{lam_1} ... / x_{j_1}^{lam'_1} ...`` where the
chosen indices are pairwise distinct across both the numerator and the
denominator.  ``m_{();()} = 1``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, Iterator, List, Sequence, Tuple

Partition = Tuple[int, ...]
Composition = Tuple[int, ...]
MonomialShape = Tuple[Partition, Partition]
Exponent = Tuple[int, ...]
LaurentPoly = Dict[Exponent, Fraction]

EMPTY: Partition = ()


# ============================================================
# Rationals
# ============================================================


def rat(p: int | Fraction, q: int = 1) -> Fraction:
    """Exact rational p/q."""
    return Fraction(p, q)


def format_rational(x: Fraction | int) -> str:
    """Serialize as "p/q", omitting "/q" when the denominator is 1."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str) -> Fraction:
    """Inverse of :func:`format_rational`."""
    return Fraction(s)


def falling_factorial(x: Fraction | int, k: int) -> Fraction:
    """Descending factorial (x)_k = x(x-1)...(x-k+1); equals 1 when k = 0."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    out = Fraction(1)
    x = Fraction(x)
    for i in range(k):
        out *= x - i
    return out


def binomial(n: int | Fraction, k: int) -> Fraction:
    """Binomial coefficient C(n, k) = (n)_k / k!, zero for k < 0."""
    if k < 0:
        return Fraction(0)
    return falling_factorial(n, k) / math.factorial(k)


# ============================================================
# Partitions and compositions
# ============================================================


def check_partition(mu: Sequence[int]) -> Partition:
    """Validate and normalize a partition (weakly decreasing positive parts)."""
    parts = tuple(int(p) for p in mu)
    if any(p <= 0 for p in parts):
        raise ValueError(f"partition parts must be positive: {parts}")
    if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
        raise ValueError(f"partition parts must be weakly decreasing: {parts}")
    return parts


def check_composition(x: Sequence[int]) -> Composition:
    """Validate a composition (positive parts, order significant)."""
    parts = tuple(int(p) for p in x)
    if any(p <= 0 for p in parts):
        raise ValueError(f"composition parts must be positive: {parts}")
    return parts


def partition_of_composition(x: Sequence[int]) -> Partition:
    """Sort the parts of a composition into the underlying partition."""
    return tuple(sorted((int(p) for p in x), reverse=True))


def multiplicities(mu: Sequence[int]) -> Dict[int, int]:
    """Multiplicity m_i of each part value i."""
    out: Dict[int, int] = {}
    for p in mu:
        out[p] = out.get(p, 0) + 1
    return out


def aut_partition(mu: Sequence[int]) -> int:
    """|Aut(mu)| = product of m_i! over the part multiplicities m_i."""
    out = 1
    for m in multiplicities(mu).values():
        out *= math.factorial(m)
    return out


def partitions_of(d: int, max_part: int | None = None) -> Iterator[Partition]:
    """All partitions of d with parts <= max_part, in reverse lex order."""
    if d < 0:
        return
    if d == 0:
        yield ()
        return
    if max_part is None or max_part > d:
        max_part = d
    for first in range(max_part, 0, -1):
        for rest in partitions_of(d - first, first):
            yield (first,) + rest


def complete_composition(x: Sequence[int], d: int) -> Composition:
    """Completion x^d: pad x with d - |x| parts equal to one."""
    x = check_composition(x)
    if sum(x) > d:
        raise ValueError(f"|x| = {sum(x)} exceeds d = {d}")
    return x + (1,) * (d - sum(x))


# ============================================================
# Monomial symmetric Laurent polynomials
# ============================================================


def check_shape(shape: MonomialShape) -> MonomialShape:
    lam, lamp = shape
    return (check_partition(lam), check_partition(lamp))


@lru_cache(maxsize=None)
def expand_monomial_sym(shape: MonomialShape, m: int) -> Tuple[Tuple[Exponent, int], ...]:
    """Exponent vectors of m_{lam;lam'} in m variables (all coefficients 1).

    Returns a sorted tuple of (exponent vector, 1) pairs; empty when the shape
    needs more than m distinct variables.
    """
    lam, lamp = shape
    exps = tuple(lam) + tuple(-a for a in lamp)
    k = len(exps)
    if k > m:
        return ()
    seen = set()
    for idx in itertools.permutations(range(m), k):
        vec = [0] * m
        for i, e in zip(idx, exps):
            vec[i] = e
        seen.add(tuple(vec))
    return tuple(sorted((v, 1) for v in seen))


def eval_monomial_sym(shape: MonomialShape, xs: Sequence[Fraction | int]) -> Fraction:
    """Evaluate m_{lam;lam'} at the point xs (all entries nonzero)."""
    shape = check_shape(shape)
    vals = [Fraction(x) for x in xs]
    if any(v == 0 for v in vals):
        raise ValueError("monomial symmetric Laurent polynomials need nonzero variables")
    total = Fraction(0)
    for vec, _ in expand_monomial_sym(shape, len(vals)):
        term = Fraction(1)
        for v, e in zip(vals, vec):
            if e:
                term *= v ** e
        total += term
    return total


def shape_of_exponent(vec: Exponent) -> MonomialShape:
    """The monomial shape (lam; lam') of a single exponent vector."""
    lam = tuple(sorted((e for e in vec if e > 0), reverse=True))
    lamp = tuple(sorted((-e for e in vec if e < 0), reverse=True))
    return (lam, lamp)


# ---- Laurent polynomial dictionaries ----


def poly_add_inplace(a: LaurentPoly, b: LaurentPoly, scale: Fraction = Fraction(1)) -> None:
    for vec, c in b.items():
        nc = a.get(vec, Fraction(0)) + scale * c
        if nc:
            a[vec] = nc
        else:
            a.pop(vec, None)


def poly_mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    out: LaurentPoly = {}
    for va, ca in a.items():
        for vb, cb in b.items():
            vec = tuple(x + y for x, y in zip(va, vb))
            nc = out.get(vec, Fraction(0)) + ca * cb
            if nc:
                out[vec] = nc
            else:
                out.pop(vec, None)
    return out


def poly_eval(a: LaurentPoly, xs: Sequence[Fraction]) -> Fraction:
    total = Fraction(0)
    for vec, c in a.items():
        term = c
        for v, e in zip(xs, vec):
            if e:
                term *= Fraction(v) ** e
        total += term
    return total


# ============================================================
# Symmetric Laurent expansions in the monomial basis
# ============================================================


@dataclass(frozen=True)
class SymmetricLaurentExpansion:
    """A symmetric Laurent polynomial stored in the m_{lam;lam'} basis.

    ``coeffs`` never stores zero coefficients.  ``nvars`` is the number of
    variables the expansion is read in.
    """

    nvars: int
    coeffs: Dict[MonomialShape, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {check_shape(s): Fraction(c) for s, c in self.coeffs.items() if c != 0}
        object.__setattr__(self, "coeffs", clean)

    def coefficient(self, shape: MonomialShape) -> Fraction:
        return self.coeffs.get(check_shape(shape), Fraction(0))

    def evaluate(self, xs: Sequence[Fraction | int]) -> Fraction:
        if len(xs) != self.nvars:
            raise ValueError(f"expected {self.nvars} variables, got {len(xs)}")
        return sum((c * eval_monomial_sym(s, xs) for s, c in self.coeffs.items()),
                   Fraction(0))

    def to_laurent(self) -> LaurentPoly:
        out: LaurentPoly = {}
        for shape, c in self.coeffs.items():
            for vec, _ in expand_monomial_sym(shape, self.nvars):
                poly_add_inplace(out, {vec: Fraction(1)}, c)
        return out

    def __add__(self, other: "SymmetricLaurentExpansion") -> "SymmetricLaurentExpansion":
        if other.nvars != self.nvars:
            raise ValueError("variable counts differ")
        coeffs = dict(self.coeffs)
        for s, c in other.coeffs.items():
            coeffs[s] = coeffs.get(s, Fraction(0)) + c
        return SymmetricLaurentExpansion(self.nvars, coeffs)

    def scale(self, c: Fraction | int) -> "SymmetricLaurentExpansion":
        c = Fraction(c)
        return SymmetricLaurentExpansion(self.nvars, {s: c * v for s, v in self.coeffs.items()})

    def sorted_items(self) -> List[Tuple[MonomialShape, Fraction]]:
        return sorted(self.coeffs.items(),
                      key=lambda it: (sum(it[0][0]) + sum(it[0][1]), it[0]))

    def to_json(self) -> str:
        items = [{"lambda": list(s[0]), "lambda_prime": list(s[1]),
                  "coeff": format_rational(c)} for s, c in self.sorted_items()]
        return json.dumps(items)

    @staticmethod
    def from_json(nvars: int, text: str) -> "SymmetricLaurentExpansion":
        coeffs = {}
        for it in json.loads(text):
            shape = (tuple(it["lambda"]), tuple(it["lambda_prime"]))
            coeffs[shape] = parse_rational(it["coeff"])
        return SymmetricLaurentExpansion(nvars, coeffs)


def decompose_laurent(poly: LaurentPoly, nvars: int) -> SymmetricLaurentExpansion:
    """Decompose a symmetric Laurent polynomial dict in the monomial basis.

    Distinct shapes have disjoint monomial supports, so the coefficient of
    m_{lam;lam'} is just the common coefficient of its monomials; a mismatch
    between monomials of equal shape means the input was not symmetric.
    """
    by_shape: Dict[MonomialShape, Dict[Exponent, Fraction]] = {}
    for vec, c in poly.items():
        by_shape.setdefault(shape_of_exponent(vec), {})[vec] = c
    coeffs: Dict[MonomialShape, Fraction] = {}
    for shape, monos in by_shape.items():
        vals = set(monos.values())
        expected = len(expand_monomial_sym(shape, nvars))
        if len(vals) != 1 or len(monos) != expected:
            raise ValueError(f"input not symmetric at shape {shape}")
        coeffs[shape] = next(iter(vals))
    return SymmetricLaurentExpansion(nvars, coeffs)


_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61)


def _shapes_up_to(bound: int, max_len: int) -> List[MonomialShape]:
    shapes = []
    for tot in range(bound + 1):
        for a in range(tot + 1):
            for lam in partitions_of(a):
                for lamp in partitions_of(tot - a):
                    if len(lam) + len(lamp) <= max_len:
                        shapes.append((lam, lamp))
    return shapes


def decompose_to_monomial_basis(f: Callable[[Sequence[Fraction]], Fraction],
                                k: int, bound: int,
                                n_checks: int = 20) -> SymmetricLaurentExpansion:
    """Recover the monomial-basis expansion of a symmetric Laurent function.

    ``f`` must be symmetric in its k variables and supported on shapes with
    |lam| + |lam'| <= bound.  The coefficients are solved exactly from values
    at vectors of distinct primes and the result is verified by a zero
    residual at ``n_checks`` fresh points; a nonzero residual (non-symmetric
    input, or wrong bound) raises ValueError.
    """
    shapes = _shapes_up_to(bound, k)
    npts_needed = len(shapes)
    rows: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    points: List[Tuple[Fraction, ...]] = []

    def sample_points() -> Iterator[Tuple[Fraction, ...]]:
        for start in itertools.count():
            base = [Fraction(p) for p in _PRIMES[:k]]
            # vary the points: shift by start through prime powers
            yield tuple(b ** (1 + (start + i) % 3) + start for i, b in enumerate(base))

    gen = sample_points()
    while len(rows) < npts_needed:
        pt = next(gen)
        if pt in points or any(v == 0 for v in pt):
            continue
        row = [eval_monomial_sym(s, pt) for s in shapes]
        # keep only rows that increase the rank (exact Gaussian elimination
        # happens below; cheap heuristic: just collect and solve once)
        points.append(pt)
        rows.append(row)
        rhs.append(Fraction(f(pt)))

    coeffs = _solve_exact(rows, rhs)
    if coeffs is None:
        # singular sample system: retry with a fresh batch of points
        rows, rhs, points = [], [], []
        while len(rows) < npts_needed:
            pt = next(gen)
            if pt in points:
                continue
            points.append(pt)
            rows.append([eval_monomial_sym(s, pt) for s in shapes])
            rhs.append(Fraction(f(pt)))
        coeffs = _solve_exact(rows, rhs)
        if coeffs is None:
            raise ValueError("sample system singular twice; aborting")

    expansion = SymmetricLaurentExpansion(k, dict(zip(shapes, coeffs)))
    for _ in range(n_checks):
        pt = next(gen)
        if expansion.evaluate(pt) != f(pt):
            raise ValueError("nonzero residual: input not symmetric or bound too small")
    return expansion


def _solve_exact(rows: List[List[Fraction]], rhs: List[Fraction]) -> List[Fraction] | None:
    """Solve a square linear system by exact Gaussian elimination."""
    n = len(rows)
    a = [list(r) + [v] for r, v in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def resum_over_subsets(expansion: SymmetricLaurentExpansion, m: int) -> SymmetricLaurentExpansion:
    """Sum f(x_{i_1},...,x_{i_k}) over all k-subsets of m >= k variables.

    In the monomial basis the coefficient of m_{lam;lam'} just picks up the
    factor C(m - l - l', k - l - l'), which vanishes when the shape does not
    fit (binomial convention, not an error).
    """
    k = expansion.nvars
    if m < k:
        raise ValueError(f"m = {m} must be >= k = {k}")
    coeffs = {}
    for (lam, lamp), c in expansion.coeffs.items():
        ll = len(lam) + len(lamp)
        coeffs[(lam, lamp)] = c * binomial(m - ll, k - ll)
    return SymmetricLaurentExpansion(m, coeffs)


# ============================================================
# Exact univariate polynomials and interpolation
# ============================================================


@dataclass(frozen=True)
class UnivariatePolynomial:
    """Dense polynomial over Fraction; trailing zero coefficients stripped."""

    coeffs: Tuple[Fraction, ...]
    variable: str = "z"

    def __post_init__(self):
        cs = [Fraction(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def __call__(self, z: Fraction | int) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * Fraction(z) + c
        return acc

    def __eq__(self, other) -> bool:
        return isinstance(other, UnivariatePolynomial) and self.coeffs == other.coeffs

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        bits = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                bits.append(format_rational(c))
            else:
                pow_s = self.variable if i == 1 else f"{self.variable}^{i}"
                coef_s = "" if c == 1 else ("-" if c == -1 else format_rational(c) + "*")
                bits.append(f"{coef_s}{pow_s}")
        return " + ".join(bits).replace("+ -", "- ")


def interpolate(points: Sequence[Tuple[Fraction | int, Fraction | int]],
                variable: str = "z") -> UnivariatePolynomial:
    """The unique polynomial of degree < len(points) through the given points."""
    xs = [Fraction(x) for x, _ in points]
    if len(set(xs)) != len(xs):
        raise ValueError("duplicate abscissas")
    ys = [Fraction(y) for _, y in points]
    # Newton's divided differences, then expand to the monomial basis.
    n = len(points)
    dd = list(ys)
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level])
    coeffs = [Fraction(0)] * n
    acc = [Fraction(1)] + [Fraction(0)] * (n - 1)  # product (z - x_0)...(z - x_{i-1})
    for i in range(n):
        for j in range(n):
            coeffs[j] += dd[i] * acc[j]
        if i < n - 1:
            nxt = [Fraction(0)] * n
            for j in range(n - 1):
                nxt[j + 1] += acc[j]
                nxt[j] -= xs[i] * acc[j]
            acc = nxt
    return UnivariatePolynomial(tuple(coeffs), variable)
