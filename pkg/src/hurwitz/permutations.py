"""Symmetric-group brute-force oracle for Hurwitz numbers.

Permutations act on points 0..d-1 and are stored as image tuples.  The
composition convention is left-to-right throughout the package:

    (p * q)(x) = q(p(x))        # apply p first, then q

A transitive factorization of the identity is a tuple
(tau_1, ..., tau_r, sigma, rho) with tau_1 * ... * tau_r * sigma * rho = id,
the tau_i transpositions, and the group generated by all factors transitive
on the d points.  Counting them with sigma of cycle type mu and rho of type
nu gives the labeled Hurwitz number h^l_g(mu, nu) = (d-1)! h_bullet, from
which all other normalizations follow.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Sequence, Tuple

from .algebra import Partition, aut_partition, check_partition

Perm = Tuple[int, ...]

DEFAULT_BUDGET = 10 ** 9


class BudgetExceeded(Exception):
    """Raised when an enumeration would exceed the configured step budget."""


def current_budget(budget: int | None = None) -> int:
    """Budget in elementary steps; HURWITZ_BUDGET overrides the default."""
    if budget is not None:
        return budget
    env = os.environ.get("HURWITZ_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


# ============================================================
# Permutation primitives
# ============================================================


def identity(d: int) -> Perm:
    return tuple(range(d))


def compose(p: Perm, q: Perm) -> Perm:
    """Left-to-right product p * q: apply p first, then q."""
    return tuple(q[p[x]] for x in range(len(p)))


def inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def transposition(d: int, a: int, b: int) -> Perm:
    img = list(range(d))
    img[a], img[b] = b, a
    return tuple(img)


def all_transpositions(d: int) -> List[Perm]:
    return [transposition(d, a, b) for a in range(d) for b in range(a + 1, d)]


def cycles(p: Perm) -> List[List[int]]:
    """Cycle decomposition; cycles start at their minimum and are sorted."""
    seen = [False] * len(p)
    out: List[List[int]] = []
    for i in range(len(p)):
        if not seen[i]:
            cur = []
            j = i
            while not seen[j]:
                seen[j] = True
                cur.append(j)
                j = p[j]
            out.append(cur)
    return out


def cycle_type(p: Perm) -> Partition:
    """Cycle type as a partition of d."""
    return tuple(sorted((len(c) for c in cycles(p)), reverse=True))


def perm_of_type(mu: Partition, d: int) -> Perm:
    """A canonical representative of the conjugacy class of type mu in S_d."""
    if sum(mu) != d:
        raise ValueError(f"|mu| = {sum(mu)} != d = {d}")
    img = list(range(d))
    start = 0
    for part in mu:
        for i in range(part):
            img[start + i] = start + (i + 1) % part
        start += part
    return tuple(img)


def conjugacy_class(mu: Partition, d: int) -> List[Perm]:
    """All permutations of S_d with cycle type mu (d is small here)."""
    mu = check_partition(mu)
    return [p for p in map(tuple, itertools.permutations(range(d))) if cycle_type(p) == mu]


def conjugacy_class_size(mu: Partition) -> int:
    """d! / z_mu with z_mu = prod i^{m_i} m_i!."""
    d = sum(mu)
    z = aut_partition(mu)
    for part in mu:
        z *= part
    return math.factorial(d) // z


def is_transitive(perms: Sequence[Perm], d: int) -> bool:
    """True iff the generated group has a single orbit on 0..d-1.

    Orbits of the generated group are the joins of the generators' cycle
    partitions, so a union-find over all cycles decides transitivity.
    """
    parent = list(range(d))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in perms:
        for x in range(d):
            a, b = find(x), find(p[x])
            if a != b:
                parent[a] = b
    return sum(1 for x in range(d) if find(x) == x) == 1


# ============================================================
# Transitive factorizations
# ============================================================


@dataclass(frozen=True)
class Factorization:
    """A transitive factorization tau_1 * ... * tau_r * sigma * rho = id."""

    d: int
    taus: Tuple[Perm, ...]
    sigma: Perm
    rho: Perm

    def check(self) -> None:
        prod = identity(self.d)
        for t in self.taus:
            prod = compose(prod, t)
        prod = compose(compose(prod, self.sigma), self.rho)
        if prod != identity(self.d):
            raise ValueError("factorization does not multiply to the identity")
        for t in self.taus:
            if cycle_type(t) != ((2,) + (1,) * (self.d - 2) if self.d >= 2 else (2,)):
                raise ValueError("factor is not a transposition")
        if not is_transitive(self.taus + (self.sigma, self.rho), self.d):
            raise ValueError("factorization is not transitive")

    def one_line_cycles(self) -> List[str]:
        from_p = lambda p: "".join(f"({' '.join(str(x + 1) for x in c)})" for c in cycles(p))
        return [from_p(t) for t in self.taus] + [from_p(self.sigma), from_p(self.rho)]


def genus_r(mu: Sequence[int], nu: Sequence[int], g: int) -> int:
    """Number of simple branch points r = l(mu) + l(nu) - 2 + 2g."""
    r = len(mu) + len(nu) - 2 + 2 * g
    if r < 0:
        raise ValueError(f"invalid genus/type combination: r = {r} < 0")
    return r


def estimate_steps(mu: Partition, r: int) -> int:
    """Cost estimate for one class-representative sweep (tuples of taus)."""
    d = sum(mu)
    return max(1, (d * (d - 1) // 2)) ** r * max(1, d)


def _sweep_rep(d: int, sigma: Perm, r: int) -> Dict[Partition, int]:
    """Count tau-tuples by the forced rho's cycle type, transitive only.

    sigma is fixed; the caller scales by the conjugacy class size.  The
    product tau_1 * ... * tau_r * sigma is built prefix by prefix; rho is its
    inverse, and transitivity only depends on (taus, sigma).
    """
    taus = all_transpositions(d)
    counts: Dict[Partition, int] = {}

    def rec(depth: int, prefix: Perm) -> None:
        if depth == r:
            full = compose(prefix, sigma)
            rho = inverse(full)
            if is_transitive(stack + [sigma], d):
                t = cycle_type(rho)
                counts[t] = counts.get(t, 0) + 1
            return
        for t in taus:
            stack.append(t)
            rec(depth + 1, compose(prefix, t))
            stack.pop()

    stack: List[Perm] = []
    rec(0, identity(d))
    return counts


@lru_cache(maxsize=None)
def _count_by_nu_cached(mu: Partition, r: int) -> Tuple[Tuple[Partition, int], ...]:
    d = sum(mu)
    class_size = conjugacy_class_size(mu)
    rep = perm_of_type(mu, d)
    return tuple(sorted((nu, class_size * c) for nu, c in _sweep_rep(d, rep, r).items()))


def count_by_nu(mu: Sequence[int], r: int, budget: int | None = None) -> Dict[Partition, int]:
    """Labeled counts h^l for all nu at once, for fixed mu and r tau-factors.

    One sweep over tau-tuples serves every nu (and is cached), since rho is
    forced and transitivity does not depend on it.
    """
    mu = check_partition(mu)
    if estimate_steps(mu, r) > current_budget(budget):
        raise BudgetExceeded(
            f"estimated {estimate_steps(mu, r)} steps exceed budget {current_budget(budget)}")
    return dict(_count_by_nu_cached(mu, r))


def count_labeled_factorizations(mu: Sequence[int], nu: Sequence[int], g: int,
                                 budget: int | None = None) -> int:
    """Exact labeled Hurwitz number h^l_g(mu, nu) by brute force."""
    mu, nu = check_partition(mu), check_partition(nu)
    if sum(mu) != sum(nu):
        raise ValueError(f"|mu| = {sum(mu)} != |nu| = {sum(nu)}")
    r = genus_r(mu, nu, g)
    return count_by_nu(mu, r, budget).get(nu, 0)


def stream_factorizations(mu: Sequence[int], nu: Sequence[int], g: int,
                          budget: int | None = None) -> Iterator[Factorization]:
    """All transitive factorizations with sigma of type mu, rho of type nu.

    Unlike the counting path this enumerates sigma over its whole conjugacy
    class, since downstream marked-galaxy constructions are not conjugation
    invariant.
    """
    mu, nu = check_partition(mu), check_partition(nu)
    d = sum(mu)
    if sum(nu) != d:
        raise ValueError(f"|mu| = {sum(mu)} != |nu| = {sum(nu)}")
    r = genus_r(mu, nu, g)
    est = estimate_steps(mu, r) * conjugacy_class_size(mu)
    if est > current_budget(budget):
        raise BudgetExceeded(f"estimated {est} steps exceed budget {current_budget(budget)}")
    taus = all_transpositions(d)

    def rec(depth: int, prefix: Perm, sigma: Perm) -> Iterator[Factorization]:
        if depth == r:
            rho = inverse(compose(prefix, sigma))
            if cycle_type(rho) == nu and is_transitive(tuple(stack) + (sigma,), d):
                yield Factorization(d, tuple(stack), sigma, rho)
            return
        for t in taus:
            stack.append(t)
            yield from rec(depth + 1, compose(prefix, t), sigma)
            stack.pop()

    for sigma in conjugacy_class(mu, d):
        stack: List[Perm] = []
        yield from rec(0, identity(d), sigma)


# ============================================================
# Hurwitz number normalizations
# ============================================================


@dataclass(frozen=True)
class HurwitzValueSet:
    """The four standard normalizations of one Hurwitz number."""

    mu: Partition
    nu: Partition
    g: int
    d: int
    r: int
    h_labeled: int
    h_bullet: Fraction
    h: Fraction
    h_bar: Fraction

    def check(self) -> None:
        assert self.h_labeled == math.factorial(self.d - 1) * self.h_bullet
        assert self.h == self.h_bullet / self.d
        assert self.h_bar == Fraction(aut_partition(self.mu) * aut_partition(self.nu),
                                      math.factorial(self.r)) * self.h_bullet
        assert self.r == len(self.mu) + len(self.nu) - 2 + 2 * self.g >= 0


def values_from_labeled(mu: Sequence[int], nu: Sequence[int], g: int,
                        h_labeled: int) -> HurwitzValueSet:
    """Fill in all four normalizations from the labeled count."""
    mu, nu = check_partition(mu), check_partition(nu)
    d = sum(mu)
    r = genus_r(mu, nu, g)
    h_bullet = Fraction(h_labeled, math.factorial(d - 1))
    vals = HurwitzValueSet(
        mu=mu, nu=nu, g=g, d=d, r=r,
        h_labeled=h_labeled,
        h_bullet=h_bullet,
        h=h_bullet / d,
        h_bar=Fraction(aut_partition(mu) * aut_partition(nu), math.factorial(r)) * h_bullet,
    )
    vals.check()
    return vals


def hurwitz_values(mu: Sequence[int], nu: Sequence[int], g: int,
                   budget: int | None = None) -> HurwitzValueSet:
    """Brute-force oracle values for h^l, h_bullet, h and h_bar."""
    return values_from_labeled(mu, nu, g,
                               count_labeled_factorizations(mu, nu, g, budget))
