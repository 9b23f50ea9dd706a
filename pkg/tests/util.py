"""Shared test helpers: independent oracles and random generators.

The oracles here deliberately avoid the library's polyhedral code paths:
formula values come from direct recursion on the AST over exact rationals,
and hull membership checks go through their own certificate verification.
"""

from __future__ import annotations

import itertools
import random

from coh.exact import Rat, dot
from coh.formula import evaluate_formula, parse_event

EVENT_OPS = ["+", "*", "|", "&", "->", "<->"]


def eval_at(text_or_formula, point, names=("x", "y", "z")):
    """Pointwise oracle: direct recursive evaluation, no complexes involved."""
    f = parse_event(text_or_formula) if isinstance(text_or_formula, str) else text_or_formula
    env = {n: Rat(v) for n, v in zip(names, point)}
    return evaluate_formula(f, env)


def farey(max_denominator: int):
    """All fractions p/q in [0,1] with q <= max_denominator, ascending."""
    vals = {Rat(p, q) for q in range(1, max_denominator + 1) for p in range(0, q + 1)}
    return sorted(vals)


def grid_points(dim: int, max_denominator: int):
    return itertools.product(farey(max_denominator), repeat=dim)


def random_event(rng: random.Random, variables, depth: int) -> str:
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.12:
            return rng.choice(["0", "1"])
        return rng.choice(variables)
    op = rng.choice(EVENT_OPS + ["~", "^", "."])
    if op == "~":
        return "~(" + random_event(rng, variables, depth - 1) + ")"
    if op == "^":
        return "(" + random_event(rng, variables, depth - 1) + ")^" + str(rng.randint(2, 3))
    if op == ".":
        return str(rng.randint(2, 3)) + ".(" + random_event(rng, variables, depth - 1) + ")"
    left = random_event(rng, variables, depth - 1)
    right = random_event(rng, variables, depth - 1)
    return f"({left} {op} {right})"


def random_modal(rng: random.Random, atoms, depth: int) -> str:
    if depth == 0 or rng.random() < 0.35:
        if rng.random() < 0.08:
            return rng.choice(["0", "1"])
        return rng.choice(atoms)
    op = rng.choice(EVENT_OPS + ["~", "^"])
    if op == "~":
        return "~(" + random_modal(rng, atoms, depth - 1) + ")"
    if op == "^":
        return "(" + random_modal(rng, atoms, depth - 1) + ")^" + str(rng.randint(2, 3))
    left = random_modal(rng, atoms, depth - 1)
    right = random_modal(rng, atoms, depth - 1)
    return f"({left} {op} {right})"


def random_event_list(rng: random.Random, max_events=3, max_vars=3, max_depth=4):
    variables = ["x", "y", "z"][: rng.randint(1, max_vars)]
    count = rng.randint(1, max_events)
    return [random_event(rng, variables, rng.randint(1, max_depth)) for _ in range(count)]


def in_hull_bruteforce(point, vertices) -> bool:
    """Membership oracle via Carathéodory: some affinely independent vertex
    subset of size <= dim+1 carries the point with nonnegative weights.
    Exact elimination only; no LP involved."""
    from coh.exact import rref

    point = tuple(Rat(x) for x in point)
    dim = len(point)
    verts = [tuple(Rat(x) for x in v) for v in vertices]
    if point in verts:
        return True
    for size in range(2, dim + 2):
        for subset in itertools.combinations(verts, size):
            augmented = [[v[i] for v in subset] + [point[i]] for i in range(dim)]
            augmented.append([Rat(1)] * size + [Rat(1)])
            reduced, pivots = rref(augmented)
            if size in pivots:  # inconsistent: pivot in the rhs column
                continue
            if len(pivots) < size:  # affinely dependent subset; skip
                continue
            weights = [reduced[r][size] for r in range(size)]
            if all(w >= 0 for w in weights):
                return True
    return False
