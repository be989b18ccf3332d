"""Self-checks: exact cocycle identities, return times, oracle comparison, smoothing bounds."""

import numpy as np

from . import exact
from .analysis import l2_smoothing_sequences
from .cocycle import CocyclePath, check_theta_omega, theta_matrix
from .combinatorics import CombinatorialPair, rauzy_class
from .induction import ConnectionDetected, brute_force_first_return, eval_return_map, renormalize

IDENTITY_CLASSES = ((2, 1), (3, 2, 1), (4, 3, 2, 1))
SMOOTHING_LAMBDAS = (0.3, 0.5, 0.9)


def class_identities(monodromy):
    """(pair, eps, det is 1, Theta Omega Theta^T == Omega') for every edge of a Rauzy class."""
    rc = rauzy_class(CombinatorialPair.from_monodromy(monodromy))
    out = []
    for p, eps, _ in rc.edges:
        det_ok = exact.det(theta_matrix(p, eps).rows()) == 1
        out.append((p, eps, det_ok, check_theta_omega(p, eps)))
    return out


def q_identity(f, n):
    """Levels where return times from the induction differ from Theta_{0,n-1} 1."""
    states = renormalize(f, n)
    cpath = CocyclePath(states[n].history)
    bad = [k for k, s in enumerate(states) if list(s.q) != cpath.q_vector(k)]
    return states, cpath, bad


def oracle_equivalence(f, n, n_points, rng, tol=1e-9):
    """Compare eval_return_map at level n with brute-force iteration at random points.

    Returns (max value error, number of return-time mismatches, points used);
    the level is lowered if a connection cuts the induction short.
    """
    try:
        state = renormalize(f, n)[-1]
    except ConnectionDetected as exc:
        state = exc.states[-1]
    total = float(state.domain_length)
    xs = np.sort(rng.uniform(0.0, total, n_points))
    worst, mismatched = 0.0, 0
    for x in xs:
        letter = next(a for a in state.alphabet
                      if float(state.interval(a)[0]) <= x < float(state.interval(a)[1]))
        y = float(eval_return_map(state, f, letter, x))
        z, time = brute_force_first_return(f, (0.0, total), x)
        worst = max(worst, abs(y - z))
        mismatched += time != state.q[state.pair.index(letter)]
    return worst, mismatched, state.level


def smoothing_battery(rng, n_prefixes=1000, lams=SMOOTHING_LAMBDAS, max_len=60):
    """Count violations of the l2 smoothing bounds over random positive prefixes."""
    violations, rows = 0, []
    for k in range(n_prefixes):
        r = rng.exponential(1.0, int(rng.integers(1, max_len + 1))) + 1e-3
        for lam in lams:
            s = l2_smoothing_sequences(r, lam)
            violations += not s.ok
            rows.append((k, lam, s.sum_x2 / s.bound, s.sum_z2 / s.bound))
    return violations, rows
