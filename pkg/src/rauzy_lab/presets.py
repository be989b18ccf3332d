"""Reference maps and paths used by the experiments and the test-suite.

Golden maps are two-interval maps whose image split is tuned so the
induction types alternate 0, 1, 0, 1, ... to the requested depth.
"""

import math

import mpmath
import numpy as np
from scipy import optimize

from .combinatorics import CombinatorialPair, genus, validate_pair
from .induction import ConnectionDetected, initial_state, rv_step
from .maps import (DD_DPS, AffineProfile, Giem, MoebiusProfile, PowerKinkProfile, break_amplitude,
                   make_standard_iem)

PHI = (1 + math.sqrt(5)) / 2
GOLDEN_PAIR = CombinatorialPair(("A", "B"), (1, 2), (2, 1))
D3_PAIR = CombinatorialPair.from_monodromy((3, 2, 1))
# two primitive loops at D3_PAIR, mixed in Fibonacci-word order
D3_LOOPS = ((0, 1, 0), (1, 0, 1))


def golden_types(n):
    return [k % 2 for k in range(n)]


def golden_standard(precision="std"):
    if precision == "dd":
        with mpmath.workdps(DD_DPS):
            phi = (1 + mpmath.sqrt(5)) / 2
            return make_standard_iem(GOLDEN_PAIR, [2 - phi, phi - 1], precision=precision)
    return make_standard_iem(GOLDEN_PAIR, [2 - PHI, PHI - 1], precision=precision)


def _first_mismatch(f, target):
    state = initial_state(f)
    for k, want in enumerate(target):
        try:
            state = rv_step(state, f)
        except ConnectionDetected:
            return k, 0
        got = state.history[-1].eps
        if got != want:
            return k, got
    return None, None


def tune_golden(lam_a, profiles, depth=24, precision="std"):
    """Image length of B making the first ``depth`` types alternate from 0.

    A too large image split shows up as a type 0 where 1 was due, and a
    too small one as a type 1 where 0 was due, at any level.
    """
    target = golden_types(depth)
    lam = [lam_a, 1 - lam_a]
    lo, hi = 1e-6, 1 - 1e-6
    best = None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        f = Giem(GOLDEN_PAIR, lam, [1 - mid, mid], profiles, precision=precision)
        k, got = _first_mismatch(f, target)
        if k is None:
            best = mid
            break
        if got == 0:
            hi = mid
        else:
            lo = mid
    if best is None:
        raise RuntimeError("golden tuning stalled before depth %d" % depth)
    return best


def zero_mean_kink_amplitude(m, center, exponent):
    """Kink amplitude whose nonlinearity cancels that of a Moebius branch m."""
    r = m * m
    # (1 + A (1-c)^b) / (1 - A c^b) = m^2
    return (r - 1) / ((1 - center) ** exponent + r * center ** exponent)


def zero_mean_profiles(m, center=0.5, exponent=0.6):
    amp = zero_mean_kink_amplitude(m, center, exponent)
    return [MoebiusProfile(m), PowerKinkProfile(center, exponent, amp)]


def golden_map(lam_a, profiles, mu_b=None, depth=24):
    mu_b = tune_golden(lam_a, profiles, depth) if mu_b is None else mu_b
    return Giem(GOLDEN_PAIR, [lam_a, 1 - lam_a], [1 - mu_b, mu_b], profiles)


# Frozen tuning results: (lambda_A, image length of B). ``tune_golden``
# reproduces them; see the presets tests.
FROZEN = {
    "moebius_kink": {"m": 1.2, "center": 0.5, "exponent": 0.6,
                     "lam_a": 2 - PHI, "mu_b": float("0.6359589572912168")},
    "moebius_pair": {"m_a": 1.3, "m_b": 1.1, "lam_a": 2 - PHI, "mu_b": float("0.5930958577224686")},
    "partner": {"m": 1.4, "center": 0.4, "exponent": 0.6,
                "lam_a": float("0.3832942560464224"), "mu_b": float("0.6494850686123756")},
}


def moebius_kink_map():
    """Golden zero-mean map: Moebius branch on A, power kink on B."""
    p = FROZEN["moebius_kink"]
    profiles = zero_mean_profiles(p["m"], p["center"], p["exponent"])
    return golden_map(p["lam_a"], profiles, p["mu_b"])


def moebius_pair_map():
    """Golden map whose branches are both Moebius (not zero mean)."""
    p = FROZEN["moebius_pair"]
    return golden_map(p["lam_a"], [MoebiusProfile(p["m_a"]), MoebiusProfile(p["m_b"])], p["mu_b"])


def split_break(f):
    """Break amplitude at the interior partition point of a two-interval map."""
    return break_amplitude(f, f.left_endpoint(f.pair.letter_at(0, 2))).amplitude


def match_break(target, profiles, bracket=(0.3, 0.4), depth=24):
    """(lambda_A, mu_B) of a golden map with these profiles and the target break."""
    def gap(lam_a):
        return split_break(golden_map(lam_a, profiles, depth=depth)) - target

    lam_a = optimize.brentq(gap, *bracket, xtol=1e-15, rtol=1e-15)
    return lam_a, tune_golden(lam_a, profiles, depth)


def partner_map():
    """Zero-mean golden map break-equivalent to ``moebius_kink_map``."""
    p = FROZEN["partner"]
    profiles = zero_mean_profiles(p["m"], p["center"], p["exponent"])
    if p["lam_a"] is None:
        lam_a, mu_b = match_break(split_break(moebius_kink_map()), profiles)
    else:
        lam_a, mu_b = p["lam_a"], p["mu_b"]
    return golden_map(lam_a, profiles, mu_b)


# --- random genus-one maps --------------------------------------------------


def random_genus_one_pair(rng, d):
    letters = tuple("ABCDEFGH"[:d])
    while True:
        p = tuple(int(x) + 1 for x in rng.permutation(d))
        pair = CombinatorialPair.from_monodromy(p, letters)
        if validate_pair(pair) and genus(pair) == 1:
            return pair


def random_profile(rng):
    kind = rng.choice(["affine", "moebius", "power_kink"])
    if kind == "affine":
        return AffineProfile()
    if kind == "moebius":
        return MoebiusProfile(float(rng.uniform(0.7, 1.5)))
    c = float(rng.uniform(0.2, 0.8))
    beta = float(rng.uniform(0.3, 0.9))
    amp = float(rng.uniform(-0.5, 0.5))
    return PowerKinkProfile(c, beta, amp)


def random_genus_one_map(rng, d=None, mixed=True):
    d = int(rng.integers(2, 5)) if d is None else d
    pair = random_genus_one_pair(rng, d)
    lam = rng.dirichlet(np.full(d, 2.0))
    mu = rng.dirichlet(np.full(d, 2.0))
    profiles = [random_profile(rng) for _ in range(d)] if mixed else None
    return Giem(pair, list(lam), list(mu), profiles)


def random_standard_map(rng, pair):
    return make_standard_iem(pair, list(rng.dirichlet(np.full(pair.d, 2.0))))


# --- paths ------------------------------------------------------------------


def fibonacci_word(n):
    a, b = "a", "ab"
    while len(b) < n:
        a, b = b, b + a
    return b[:n]


def d3_fibonacci_types(n_words):
    """Types of a d=3 loop path and the loop boundaries (step counts)."""
    types, bounds = [], [0]
    for ch in fibonacci_word(n_words):
        types += D3_LOOPS[0] if ch == "a" else D3_LOOPS[1]
        bounds.append(len(types))
    return types, bounds


# closures at Fibonacci-length prefixes sharing the same recent past
D3_LADDER_WORDS = (5, 13, 34, 89)
