"""Integration-by-parts reduction of derivative-monomial integrands.

Two monomials can denote the same integral: whenever the highest
derivative order in a term appears with exponent one, the term is a total
derivative in disguise and integrates by parts (boundary terms vanish for
heat-flow densities).  A monomial is *canonical* when that is impossible,
i.e. its highest-order derivative has exponent at least two, or it is a
pure power of f1.

``reduce`` rewrites any combination into canonical form while preserving
its integral over y, term weight, and exact rational coefficients.  One
rewrite step takes the maximal order m* (exponent one), absorbs all
f_{m*-1} factors into the antiderivative

    f_{m*-1}^e f_{m*} = (f_{m*-1}^{e+1})' / (e+1),

and differentiates the cofactor, so every produced term has maximal order
m* - 1.  Iterating therefore terminates; a step bound guards against rule
gaps regardless.

``entropy_derivative(n)`` chains the heat-flow time derivative with this
reduction to produce the canonical integrand C_n with
``integral(C_n) = 2 * d^n h(X + sqrt(t) Z) / dt^n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .terms import Combination, DerivMonomial, d_dt, make_monomial, monomial, parse_monomial


class ReductionDepthError(RuntimeError):
    """Rewriting failed to reach canonical form within the step bound.

    This signals a gap in the rewrite rules (an internal error), not a
    problem with the caller's input.
    """


def is_canonical(mono: DerivMonomial) -> bool:
    """True iff no IBP rewrite applies.

    Holds when the maximal derivative order has exponent >= 2, or the
    monomial is f1^K / f^(K-1) with K >= 2.  Total-derivative terms of
    degree one (f1, f2/1, ...) are not canonical; they integrate to zero.
    """
    if mono.is_empty():
        raise ValueError("the bare density has no canonical classification")
    top = mono.exps[-1]
    if top[1] >= 2:
        return True
    return mono.max_order == 1 and mono.degree >= 2


@dataclass(frozen=True)
class ReductionStep:
    """One rewrite: every occurrence of ``target`` replaced by ``replacement``."""

    target: DerivMonomial
    rule: str
    replacement: Combination


@dataclass
class ReductionTrace:
    """Audit trail for a reduction; replaying the steps reproduces ``final``."""

    steps: List[ReductionStep] = field(default_factory=list)
    final: Combination = field(default_factory=Combination.zero)

    def replay(self, start: Combination) -> Combination:
        current = start
        for step in self.steps:
            coeff = current.coefficient(step.target)
            current = current - Combination.term(step.target, coeff) + step.replacement.scaled(coeff)
        return current


def rewrite_once(mono: DerivMonomial) -> Combination:
    """Apply a single IBP rewrite to a non-canonical monomial."""
    if mono.is_empty() or is_canonical(mono):
        raise ValueError(f"{mono} is already canonical")
    if mono.degree == 1:
        # d/dy of f_{m-1}; the integral of a total derivative is zero
        return Combination.zero()

    exps = mono.as_dict()
    mstar = mono.max_order
    K = mono.degree
    e = exps.get(mstar - 1, 0)
    cofactor = dict(exps)
    del cofactor[mstar]
    cofactor.pop(mstar - 1, None)

    scale = Fraction(-1, e + 1)
    terms: Dict[DerivMonomial, Fraction] = {}

    def put(counts: Dict[int, int], coeff: Fraction) -> None:
        key = monomial(counts)
        terms[key] = terms.get(key, Fraction(0)) + coeff
        if not terms[key]:
            del terms[key]

    # differentiate each cofactor numerator factor
    for m, k in cofactor.items():
        counts = dict(cofactor)
        counts[m] -= 1
        if not counts[m]:
            del counts[m]
        counts[m + 1] = counts.get(m + 1, 0) + 1
        counts[mstar - 1] = counts.get(mstar - 1, 0) + e + 1
        put(counts, scale * k)
    # differentiate the implied denominator f^(K-1)
    counts = dict(cofactor)
    counts[1] = counts.get(1, 0) + 1
    counts[mstar - 1] = counts.get(mstar - 1, 0) + e + 1
    put(counts, scale * (-(K - 1)))
    return Combination(terms)


def _select_target(c: Combination) -> Optional[DerivMonomial]:
    """Deterministic choice of the next monomial to rewrite.

    Largest maximal order first, then larger total degree, then the
    exponent map itself.
    """
    candidates = [m for m, _ in c.items() if not m.is_empty() and not is_canonical(m)]
    if not candidates:
        return None
    return max(candidates, key=lambda m: (m.max_order, m.degree, m.exps))


def reduce(
    c: Combination,
    *,
    trace: bool = False,
    max_steps_per_term: int = 10_000,
) -> Combination | Tuple[Combination, ReductionTrace]:
    """Rewrite ``c`` so every monomial is canonical.

    The result denotes the same integral over y; weights and exact
    coefficients are preserved term by term.  With ``trace=True`` also
    returns the step-by-step audit trail.
    """
    budget = max_steps_per_term * max(1, len(c))
    log = ReductionTrace() if trace else None
    current = c
    steps = 0
    while True:
        target = _select_target(current)
        if target is None:
            break
        steps += 1
        if steps > budget:
            raise ReductionDepthError(
                f"no canonical form after {budget} rewrites; stuck near {target}"
            )
        replacement = rewrite_once(target)
        coeff = current.coefficient(target)
        current = current - Combination.term(target, coeff) + replacement.scaled(coeff)
        if log is not None:
            rule = "total-derivative" if target.degree == 1 else f"ibp(top=f{target.max_order})"
            log.steps.append(ReductionStep(target, rule, replacement))
    if log is not None:
        log.final = current
        return current, log
    return current


_ENTROPY_CACHE: Dict[int, Combination] = {1: Combination.term(make_monomial([1, 1]))}


def entropy_derivative(n: int) -> Combination:
    """Canonical integrand C_n with ``integral(C_n) dy = 2 d^n/dt^n h(Y_t)``.

    C_1 = f1^2/f (so its integral is the Fisher information); each further
    order applies the heat-flow time derivative and reduces to canonical
    form.  Every term of C_n has weight 2n.
    """
    if n < 1:
        raise ValueError("derivative order must be >= 1")
    top = max(_ENTROPY_CACHE)
    while top < n:
        nxt = reduce(d_dt(_ENTROPY_CACHE[top]))
        top += 1
        _ENTROPY_CACHE[top] = nxt
    return _ENTROPY_CACHE[n]


def _identity(lhs: str, rhs: Dict[str, str]) -> Tuple[Combination, Combination]:
    left = Combination.term(parse_monomial(lhs))
    right = Combination({parse_monomial(m): Fraction(c) for m, c in rhs.items()})
    return left, right


# The thirteen IBP identities used to assemble the weight-6 and weight-8
# canonical forms, keyed by their left-hand monomial.
IBP_IDENTITIES: Dict[str, Tuple[Combination, Combination]] = {
    # weight 6
    "f1^4 f2/f^4": _identity("f1^4 f2/f^4", {"f1^6/f^5": "4/5"}),
    "f1^3 f3/f^3": _identity("f1^3 f3/f^3", {"f1^2 f2^2/f^3": "-3", "f1^6/f^5": "12/5"}),
    "f1 f2 f3/f^2": _identity("f1 f2 f3/f^2", {"f2^3/f^2": "-1/2", "f1^2 f2^2/f^3": "1"}),
    "f2 f4/f^1": _identity(
        "f2 f4/f^1", {"f3^2/f^1": "-1", "f2^3/f^2": "-1/2", "f1^2 f2^2/f^3": "1"}
    ),
    # weight 8
    "f1^6 f2/f^6": _identity("f1^6 f2/f^6", {"f1^8/f^7": "6/7"}),
    "f1^5 f3/f^5": _identity("f1^5 f3/f^5", {"f1^4 f2^2/f^5": "-5", "f1^8/f^7": "30/7"}),
    "f1^3 f2 f3/f^4": _identity(
        "f1^3 f2 f3/f^4", {"f1^2 f2^3/f^4": "-3/2", "f1^4 f2^2/f^5": "2"}
    ),
    "f1 f2^2 f3/f^3": _identity(
        "f1 f2^2 f3/f^3", {"f2^4/f^3": "-1/3", "f1^2 f2^3/f^4": "1"}
    ),
    "f1^4 f4/f^4": _identity(
        "f1^4 f4/f^4",
        {"f1^2 f2^3/f^4": "6", "f1^4 f2^2/f^5": "-28", "f1^8/f^7": "120/7"},
    ),
    "f1^2 f2 f4/f^3": _identity(
        "f1^2 f2 f4/f^3",
        {
            "f2^4/f^3": "2/3",
            "f1^2 f2^3/f^4": "-13/2",
            "f1^2 f3^2/f^3": "-1",
            "f1^4 f2^2/f^5": "6",
        },
    ),
    "f2^2 f4/f^2": _identity(
        "f2^2 f4/f^2",
        {"f2 f3^2/f^2": "-2", "f2^4/f^3": "-2/3", "f1^2 f2^3/f^4": "2"},
    ),
    "f1 f3 f4/f^2": _identity(
        "f1 f3 f4/f^2", {"f2 f3^2/f^2": "-1/2", "f1^2 f3^2/f^3": "1"}
    ),
    "f3 f5/f^1": _identity(
        "f3 f5/f^1",
        {"f4^2/f^1": "-1", "f2 f3^2/f^2": "-1/2", "f1^2 f3^2/f^3": "1"},
    ),
}


@dataclass(frozen=True)
class IdentityCheck:
    label: str
    passed: bool
    residual: Combination


def verify_ibp_identities() -> List[IdentityCheck]:
    """Reduce each identity's left side and compare with its right side exactly."""
    report = []
    for label, (lhs, rhs) in IBP_IDENTITIES.items():
        residual = reduce(lhs) - rhs
        report.append(IdentityCheck(label, residual.is_zero(), residual))
    return report
