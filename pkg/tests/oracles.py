"""Deliberately naive reference implementations used as test oracles.

Nothing here shares code with the package: hole filling works on plain
dicts over an explicit coordinate range.
"""

HOLE = "?"


def periodic_dict(pattern, a, b):
    return {i: pattern[i % len(pattern)] for i in range(a, b)}


def naive_fill(x: dict, y: dict):
    """F_x(y) on the coordinates of x whose hole rank is covered by y."""
    holes = sorted(i for i, c in x.items() if c == HOLE)
    right = [h for h in holes if h >= 0]
    left = [h for h in holes if h < 0]
    rank = {}
    for r, h in enumerate(right):
        rank[h] = r
    for r, h in enumerate(reversed(left), start=1):
        rank[h] = -r
    out = {}
    for i, c in x.items():
        if c != HOLE:
            out[i] = c
        elif rank[i] in y:
            out[i] = y[rank[i]]
    return out


def naive_T(w: str, n: int, a: int, b: int) -> dict:
    """T_n(w) on [a, b), computed by unrolling the recursion on dicts."""
    p, q = len(w), w.count(HOLE)
    if n == 1:
        return periodic_dict(w, a, b)
    # holes of w^oo in [a,b) have ranks within about (b-a) q/p of 0
    span = max(abs(a), abs(b)) * q // p + 2 * q + 2
    inner = naive_T(w, n - 1, -span, span)
    return naive_fill(periodic_dict(w, a, b), inner)


def naive_x(w: str, a: int, b: int, max_level: int = 12) -> str:
    """x on [a, b): the first level at which every coordinate is filled."""
    for n in range(1, max_level + 1):
        t = naive_T(w, n, a, b)
        if len(t) == b - a and all(t[i] != HOLE for i in range(a, b)):
            return "".join(t[i] for i in range(a, b))
    raise RuntimeError("did not converge")


def brute_factors(s: str, n: int) -> set:
    return {s[i:i + n] for i in range(len(s) - n + 1)}
