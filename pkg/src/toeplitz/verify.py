"""Invariant suite for a (p,q)-Toeplitz word, shared by the CLI and the tests.

Every check returns plain data; nothing here reads the clock, so two runs
with the same arguments produce identical reports.
"""

from __future__ import annotations

import random
from .holewords import (
    HOLE,
    ConstantWordSystem,
    HoleWord,
    InsufficientWindow,
    SequenceWindow,
    fill,
    per_set,
)
from .language import factors, structural_factors, supports_structural
from .pq_toeplitz import (
    _skeleton,
    bezout_root_coefficients,
    certify_phi,
    consistent_phases,
    extensional_check,
    phase,
    phi_odometer_image,
    power,
    root_of_shift,
    shift_map,
)


def _word(w) -> HoleWord:
    return w if isinstance(w, HoleWord) else HoleWord.parse(w)


def random_window(alphabet, a: int, b: int, rng: random.Random) -> SequenceWindow:
    return SequenceWindow(a, "".join(rng.choice(alphabet) for _ in range(a, b)))


def _agree(u: SequenceWindow, v: SequenceWindow) -> bool:
    lo, hi = max(u.start, v.start), min(u.stop, v.stop)
    if hi <= lo:
        return False
    return u.restrict(lo, hi).symbols == v.restrict(lo, hi).symbols


def fixed_point_check(w, n: int) -> dict:
    """``F_{T_n}(x) = x`` on a window of length ``4 p^n``."""
    w = _word(w)
    sys = ConstantWordSystem(w)
    P = w.p**n
    T = _skeleton(w.symbols, n).window(-2 * P, 2 * P)
    x = sys.window(-2 * P, 2 * P)
    out = fill(T, x)
    return {"length": len(out), "ok": len(out) >= 4 * P and _agree(out, x)}


def commutation_check(w, n: int, trials: int = 100, seed: int = 0) -> dict:
    """``F_{T_n}(sigma^{q^n} y) = sigma^{p^n} F_{T_n}(y)`` on random windows ``y``."""
    w = _word(w)
    P, Q = w.p**n, w.q**n
    T = _skeleton(w.symbols, n)
    rng = random.Random(seed)
    alpha = w.letters()
    bad = 0
    for _ in range(trials):
        y = random_window(alpha, -4 * Q - 8, 4 * Q + 8, rng)
        lhs = fill(T, y.shift(Q))
        rhs = fill(T, y).shift(P)
        if not _agree(lhs, rhs) or len(lhs) < 2 * P:
            bad += 1
    return {"trials": trials, "failures": bad, "ok": bad == 0}


def minimal_shift_check(w, n: int, seed: int = 0) -> dict:
    """No ``0 < j < q^n`` makes ``F_{T_n} o sigma^j`` a shift of ``F_{T_n}``."""
    w = _word(w)
    P, Q = w.p**n, w.q**n
    T = _skeleton(w.symbols, n)
    rng = random.Random(seed)
    y = random_window(w.letters(), -8 * Q - 16, 8 * Q + 16, rng)
    base = fill(T, y)
    offenders = []
    for j in range(1, Q):
        moved = fill(T, y.shift(j))
        for k in range(-2 * P, 2 * P + 1):
            if _agree(moved, base.shift(k)):
                offenders.append((j, k))
                break
    return {"offenders": offenders, "ok": not offenders}


def skeleton_check(w, n: int, horizon: int | None = None) -> dict:
    """The ``p^n``-periodic coordinates of ``x`` are exactly the non-holes of ``T_n``."""
    w = _word(w)
    sys = ConstantWordSystem(w)
    P = w.p**n
    horizon = horizon or max(8, w.p**2)
    ps = per_set(sys, P, -2 * P, 2 * P, horizon)
    T = _skeleton(w.symbols, n)
    want = {i for i in range(-2 * P, 2 * P) if T.at(i) != HOLE}
    return {"certification": ps.certification, "ok": set(ps.coordinates) == want}


def invariance_check(w, n: int, length: int | None = None, seed: int = 0) -> dict:
    """``F_{T_n}`` maps points of X to points of X (checked on factors)."""
    w = _word(w)
    sys = ConstantWordSystem(w)
    P = w.p**n
    length = length or min(2 * P, 60)
    if supports_structural(sys):
        lang = structural_factors(sys, length)
    else:
        lang = factors(sys, length).words
    rng = random.Random(seed)
    bad = 0
    for _ in range(5):
        s = rng.randrange(-10**6, 10**6)
        y = sys.window(s - 4 * P, s + 4 * P).shift(s)
        out = fill(_skeleton(w.symbols, n), y).symbols
        for i in range(len(out) - length + 1):
            if out[i:i + length] not in lang:
                bad += 1
                break
    return {"factor_length": length, "failures": bad, "ok": bad == 0}


def _least_period(pattern: str) -> int:
    P = len(pattern)
    return next(d for d in range(1, P + 1) if P % d == 0 and pattern == pattern[d:] + pattern[:d])


def phase_check(w, n: int, shifts=(0, 1, 2, 7, -3, 11)) -> dict:
    """The phase of ``sigma^k x`` is ``k mod p^n``.

    When gcd(p,q) > 1 the skeleton can have a smaller least period ``L``; the
    phase is then only defined modulo ``L`` and every candidate must be
    congruent to ``k`` modulo ``L``.
    """
    w = _word(w)
    sys = ConstantWordSystem(w)
    P = w.p**n
    T = _skeleton(w.symbols, n)
    least = _least_period(T.pattern)
    K = max(abs(k) for k in shifts)
    x = sys.window(-4 * P - K, 4 * P + K)
    bad = []
    for k in shifts:
        z = x.shift(k).restrict(-4 * P, 4 * P)
        if least == P:
            good = phase(z, n, w).phase == k % P
        else:
            ms = consistent_phases(z, T)
            good = len(ms) == P // least and all((m - k) % least == 0 for m in ms)
        if not good:
            bad.append(k)
    return {"least_period": least, "failures": bad, "ok": not bad}


def phi_checks(w, n: int, minimality: bool = True) -> dict:
    w = _word(w)
    sys = ConstantWordSystem(w)
    cert = certify_phi(n, w, minimality)
    out = cert.to_json()
    a, b = bezout_root_coefficients(w.p, w.q, n)
    psi, _, _ = root_of_shift(n, w)
    res = extensional_check(power(psi, w.q**n), shift_map(1), sys)
    out["root"] = {"a": a, "b": b, "radius": psi.radius, "power": w.q**n,
                   "equals_shift": res.equal, "factors_tested": res.factors_tested}
    img = phi_odometer_image(n, w, n + 2)
    out["odometer_image"] = {"residues": list(img.residues),
                             "times_q^n_is_p^n": (img * w.q**n).residues
                             == tuple(w.p**n % m for m in img.scale.periods)}
    ok = (cert.identity_holds and cert.commutes_with_shift is not False
          and (not minimality or cert.minimal_power == w.q**n)
          and res.equal and out["odometer_image"]["times_q^n_is_p^n"])
    out["ok"] = bool(ok)
    return out


def verify_all(w, levels: int, seed: int = 0, trials: int = 100, phi_levels: int | None = None) -> dict:
    """Run every check for ``n = 1..levels``; the phi certificates stop at ``phi_levels``."""
    w = _word(w)
    phi_levels = levels if phi_levels is None else phi_levels
    report = {"word": w.symbols, "p": w.p, "q": w.q, "levels": {}}
    if not w.coprime:
        # phi_n needs gcd(p,q) = 1
        phi_levels = 0
        report["phi"] = f"skipped: gcd(p,q) = {w.gcd}"
    ok = True
    for n in range(1, levels + 1):
        entry = {
            "fixed_point": fixed_point_check(w, n),
            "commutation": commutation_check(w, n, trials, seed),
            "minimal_shift": minimal_shift_check(w, n, seed),
            "skeleton": skeleton_check(w, n),
            "invariance": invariance_check(w, n, seed=seed),
            "phase": phase_check(w, n),
        }
        if not w.coprime:
            # minimality of sigma^{q^n} and invariance of X rest on gcd(p,q) = 1
            for key in ("minimal_shift", "invariance"):
                seen = entry[key]
                entry[key] = {"applicable": False, "observed": seen, "ok": True}
        if n <= phi_levels:
            try:
                entry["phi"] = phi_checks(w, n)
            except InsufficientWindow as e:
                entry["phi"] = {"ok": False, "error": str(e)}
        ok = ok and all(v["ok"] for v in entry.values())
        report["levels"][str(n)] = entry
    report["ok"] = ok
    return report
