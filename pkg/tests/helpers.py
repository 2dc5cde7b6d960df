"""Random generators shared by the test modules."""

import random

from domprob.domain import FinitePoset
from domprob.dyadic import Dyadic
from domprob.errors import DomainConstructionError
from domprob.valuation import SimpleValuation


def random_poset(rng: random.Random, max_size: int = 6) -> FinitePoset:
    """A random bounded-complete poset with bottom ``p0``."""
    while True:
        n = rng.randint(1, max_size)
        names = [f"p{i}" for i in range(n)]
        edges = [("p0", names[j]) for j in range(1, n) if rng.random() < 0.4]
        for i in range(1, n):
            for j in range(i + 1, n):
                if rng.random() < 0.35:
                    edges.append((names[i], names[j]))
        # every element without a lower cover hangs off the bottom
        has_lower = {b for _, b in edges}
        edges += [("p0", x) for x in names[1:] if x not in has_lower]
        try:
            return FinitePoset(names, edges, "p0")
        except DomainConstructionError:
            continue


def random_weights(rng: random.Random, k: int, denom_exp: int = 6) -> list:
    """``k`` positive dyadic weights with denominator ``2**denom_exp`` summing to 1."""
    total = 1 << denom_exp
    cuts = sorted(rng.sample(range(1, total), k - 1)) if k > 1 else []
    parts = [b - a for a, b in zip([0] + cuts, cuts + [total])]
    return [Dyadic(p, denom_exp) for p in parts]


def random_valuation(rng: random.Random, D, max_atoms: int = 5, denom_exp: int = 6) -> SimpleValuation:
    pool = D.basis(2)
    k = rng.randint(1, min(max_atoms, len(pool)))
    elems = rng.sample(pool, k)
    return SimpleValuation(D, list(zip(random_weights(rng, k, denom_exp), elems)))


def brute_force_leq(alpha: SimpleValuation, beta: SimpleValuation, edge) -> bool:
    """Exhaustive rational flow search on the common grid of both valuations.

    Enumerates every way of cutting each source weight into grid units and
    assigning them to admissible targets; feasibility is exact.  Branches are
    cut when some set of the remaining sources needs more than the capacity
    it can reach, which no completion could fix.
    """
    e = max(alpha.denominator_exponent(), beta.denominator_exponent())
    src = [int(w.to_fraction() * (1 << e)) for w, _ in alpha.atoms]
    dst = [int(w.to_fraction() * (1 << e)) for w, _ in beta.atoms]
    allowed = [[j for j, (_, d) in enumerate(beta.atoms) if edge(c, d)] for _, c in alpha.atoms]

    def hopeless(i, remaining):
        rest = range(i, len(src))
        for mask in range(1, 1 << len(rest)):
            S = [k for b, k in enumerate(rest) if mask >> b & 1]
            reach = {j for k in S for j in allowed[k]}
            if sum(src[k] for k in S) > sum(remaining[j] for j in reach):
                return True
        return False

    def place(i, remaining):
        if i == len(src):
            return all(r == 0 for r in remaining)
        if hopeless(i, remaining):
            return False
        return spread(i, 0, src[i], remaining)

    def spread(i, k, left, remaining):
        if left == 0:
            return place(i + 1, remaining)
        if k == len(allowed[i]):
            return False
        j = allowed[i][k]
        for amount in range(min(left, remaining[j]), -1, -1):
            remaining[j] -= amount
            ok = spread(i, k + 1, left - amount, remaining)
            remaining[j] += amount
            if ok:
                return True
        return False

    return place(0, list(dst))


def refine(rng: random.Random, alpha: SimpleValuation, denom_exp: int = 4) -> SimpleValuation:
    """A valuation above ``alpha``: each atom's mass is pushed to elements above it."""
    D = alpha.domain
    atoms = []
    for w, c in alpha.atoms:
        above = [x for x in D.basis(2) if D.below(c, x)]
        k = rng.randint(1, 2)
        for piece in random_weights(rng, k, denom_exp):
            atoms.append((w * piece, rng.choice(above)))
    return SimpleValuation(D, atoms)


def with_bottom(rng: random.Random, D, max_atoms: int = 4, denom_exp: int = 4) -> SimpleValuation:
    """A random valuation that has an atom at bottom."""
    pool = [x for x in D.basis(2) if not D.is_bottom(x)]
    k = rng.randint(0, min(max_atoms - 1, len(pool)))
    elems = [D.bottom] + rng.sample(pool, k)
    return SimpleValuation(D, list(zip(random_weights(rng, len(elems), denom_exp), elems)))
