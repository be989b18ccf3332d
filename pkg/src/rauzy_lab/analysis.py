"""Convergence diagnostics for renormalized maps.

Zoomed return branches, fractional-linear comparison maps, mean log-slope
vectors along the cocycle, slope vectors and affine models, distances
between renormalized maps, and trend statistics used to judge decay.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import exact
from .cocycle import CocyclePath, SubspaceBasis, stable_subspace_approx, unstable_seed
from .combinatorics import omega_matrix
from .induction import (ConnectionDetected, orbit_elements, renormalize, return_map_jet,
                        return_map_log_derivative)
from .maps import Giem, MapError, MoebiusProfile, QuadratureError
from .quadrature import graded_integral

DEFAULT_GRID = 4097
GRID_SIZES = (1025, 4097, 8193)
ENDPOINT_TOL = 1e-10
L_TOL = 1e-10


class AnalysisError(RuntimeError):
    pass


class ModelRejected(AnalysisError):
    def __init__(self, matched, N):
        super().__init__("model rejected at level %d of %d" % (matched, N))
        self.matched = matched
        self.N = N


# --- zoomed maps ------------------------------------------------------------


@dataclass
class ZoomedMap:
    t: np.ndarray
    values: np.ndarray
    d1: np.ndarray
    evaluator: Callable  # (t, order) -> (value, d1, d2)
    kinks: tuple = ()
    provenance: dict = field(default_factory=dict)

    @property
    def grid_size(self):
        return len(self.t)

    def jet(self, t, order=2):
        return self.evaluator(np.asarray(t, dtype=float), order)

    def second_derivative(self, t=None):
        return self.jet(self.t if t is None else t, 2)[2]


def _zoom_jet(jet, domain, image, kinks, grid, provenance, check=True):
    a, b = float(domain[0]), float(domain[1])
    c, e = float(image[0]), float(image[1])
    L, M = b - a, e - c
    if not (L > 0 and M > 0):
        raise MapError("zoom needs non-degenerate domain and image")

    def evaluator(t, order=2):
        v, d1, d2 = jet(a + L * t, order)
        v = (v - c) / M
        d1 = None if d1 is None else d1 * (L / M)
        d2 = None if d2 is None else d2 * (L * L / M)
        return v, d1, d2

    t = np.linspace(0.0, 1.0, grid)
    v, d1, _ = evaluator(t, 1)
    if check:
        if abs(v[0]) > ENDPOINT_TOL or abs(v[-1] - 1) > ENDPOINT_TOL:
            raise MapError("zoomed map does not fix 0 and 1 (%.3g, %.3g)" % (v[0], v[-1] - 1))
        if np.any(np.diff(v) <= 0):
            raise MapError("zoomed samples are not increasing")
    tk = tuple(sorted((k - a) / L for k in kinks if a < k < b))
    return ZoomedMap(t, v, d1, evaluator, tk, dict(provenance))


def _branch_jet(br):
    def jet(x, order):
        return br.value(x), br.d1(x) if order >= 1 else None, br.d2(x) if order >= 2 else None
    return jet


def zoom(branch, interval=None, grid=DEFAULT_GRID):
    """Affine conjugation of a branch restricted to ``interval`` onto [0, 1]."""
    a, b = branch.domain if interval is None else interval
    lo, hi = float(branch.domain[0]), float(branch.domain[1])
    if float(a) < lo - 1e-15 or float(b) > hi + 1e-15:
        raise MapError("interval is not inside the branch domain")
    image = (branch.value(float(a)), branch.value(float(b)))
    return _zoom_jet(_branch_jet(branch), (a, b), image, branch.kinks, grid,
                     {"source": "branch", "interval": (float(a), float(b))})


def kink_preimages(state, f, letter):
    """Points of I_letter whose orbit meets a branch kink before returning."""
    a, b = state.interval(letter)
    v = np.array([float(a), float(b)])
    word = state.word(letter).to_list()
    out = []
    for i, c in enumerate(word):
        br = f.branches[c]
        for k in br.kinks:
            if v[0] < k < v[1]:
                x = k
                for prev in reversed(word[:i]):
                    x = f.branches[prev].inverse(x)
                out.append(float(x))
        v = br.value(v)
    return tuple(sorted(out))


def zoom_return_branch(state, f, letter, grid=DEFAULT_GRID):
    domain = state.interval(letter)
    c = state.image_left(letter)
    image = (c, c + state.image_lengths[state.pair.index(letter)])

    def jet(x, order):
        return return_map_jet(state, f, letter, x, order)

    return _zoom_jet(jet, domain, image, kink_preimages(state, f, letter), grid,
                     {"source": "return map", "level": state.level, "letter": letter})


def moebius_F(m, grid=DEFAULT_GRID):
    """x -> x m / (1 + x (m - 1)) on [0, 1]."""
    if not m > 0:
        raise MapError("parameter must be positive")
    prof = MoebiusProfile(float(m))

    def evaluator(t, order=2):
        return prof.h(t), prof.dh(t) if order >= 1 else None, prof.d2h(t) if order >= 2 else None

    t = np.linspace(0.0, 1.0, grid)
    return ZoomedMap(t, prof.h(t), prof.dh(t), evaluator, (), {"source": "moebius", "m": float(m)})


def m_n_coefficient(f, state, letter, method="closed"):
    """exp of minus half the nonlinearity integrated over the return orbit of I_letter."""
    total = 0.0
    for el in orbit_elements(state, f, letter):
        br = f.branches[f.letter_at(0.5 * (el.lo + el.hi))]
        if method == "closed":
            total += float(br.nonlinearity(el.lo, el.hi))
        else:
            total += br.nonlinearity_quad(el.lo, el.hi)
    return math.exp(-0.5 * total)


# --- distances --------------------------------------------------------------


def _refine_max(fun, t, vals, rounds=3):
    """Grid maximum of |fun| polished by repeated 3-point refinement."""
    i = int(np.argmax(vals))
    best, tb = float(vals[i]), float(t[i])
    h = float(t[1] - t[0]) if len(t) > 1 else 0.0
    for _ in range(rounds):
        h *= 0.5
        cand = np.clip(np.array([tb - h, tb, tb + h]), 0.0, 1.0)
        cv = np.abs(fun(cand))
        j = int(np.argmax(cv))
        if cv[j] > best:
            best, tb = float(cv[j]), float(cand[j])
    return best


def c1_distance(a, b, refine=True):
    """sup |a - b| + sup |Da - Db| on the shared grid."""
    if a.grid_size != b.grid_size or not np.array_equal(a.t, b.t):
        raise ValueError("grid mismatch")
    dv = np.abs(a.values - b.values)
    dd = np.abs(a.d1 - b.d1)
    if not refine:
        return float(dv.max() + dd.max())

    def vdiff(t):
        return a.jet(t, 0)[0] - b.jet(t, 0)[0]

    def ddiff(t):
        return a.jet(t, 1)[1] - b.jet(t, 1)[1]

    return _refine_max(vdiff, a.t, dv) + _refine_max(ddiff, a.t, dd)


def grid_convergence(distance, build, grids=(4097, 8193), rel_tol=0.02):
    """Evaluate ``distance(*build(grid))`` on two grids and compare."""
    vals = [distance(*build(g)) for g in grids]
    rel = abs(vals[1] - vals[0]) / max(abs(vals[1]), 1e-300)
    return {"grids": list(grids), "values": vals, "relative_change": rel, "ok": rel <= rel_tol}


def _sign_changes(fun, t, max_roots=64):
    """Roots of ``fun`` bracketed by sign changes on the grid ``t``.

    Roots are placed by linear interpolation; an O(h^2) offset of an |.|
    corner changes the integral only at O(h^4).
    """
    with np.errstate(invalid="ignore"):
        v = fun(t)
    idx = np.nonzero(np.isfinite(v[:-1]) & np.isfinite(v[1:]) & (np.sign(v[:-1]) * np.sign(v[1:]) < 0))[0]
    if len(idx) > max_roots:
        return []  # round-off chatter, not genuine crossings
    w = v[idx] / (v[idx] - v[idx + 1])
    return list(t[idx] + w * (t[idx + 1] - t[idx]))


def l1_second_derivative_distance(a, b, tol=1e-6):
    """Integral over [0, 1] of |D2 a - D2 b|, split at kinks and at sign changes."""
    kinks = sorted(set(a.kinks) | set(b.kinks))

    def diff(t):
        return a.jet(t, 2)[2] - b.jet(t, 2)[2]

    def integrand(t):
        return np.abs(diff(t))

    val, err = graded_integral(integrand, 0.0, 1.0, kinks, breaks=_sign_changes(diff, a.t),
                               drop_nonfinite=True)
    if err > tol * max(1.0, val):
        raise QuadratureError("second-derivative distance did not converge (err %.3g)" % err)
    return val


@dataclass
class RenormalizedMap:
    """R^n f with its domain rescaled to [0, 1), sampled branchwise.

    Branch ``letter`` is parametrized by t in [0, 1] over its fundamental
    interval; values are divided by |I^n| and derivatives are unchanged by
    the common dilation.
    """

    state: object
    f: object
    grid: int = DEFAULT_GRID

    def __post_init__(self):
        self.t = np.linspace(0.0, 1.0, self.grid)
        self.total = float(self.state.domain_length)
        self.samples = {a: self.sample(a, self.t) for a in self.state.alphabet}

    def sample(self, letter, t):
        a, b = self.state.interval(letter)
        x = float(a) + (float(b) - float(a)) * np.asarray(t, dtype=float)
        v, d1, _ = return_map_jet(self.state, self.f, letter, x, 1)
        return v / self.total, d1

    @property
    def zeta(self):
        return self.state.normalized_lengths


def return_map_distance(A, B, refine=True):
    """C1 distance of two renormalized maps with the same combinatorics."""
    if list(A.state.alphabet) != list(B.state.alphabet) or A.grid != B.grid:
        raise ValueError("renormalized maps are not comparable")
    if A.state.pair != B.state.pair:
        raise ValueError("combinatorics differ at this level")
    vmax = dmax = 0.0
    for letter in A.state.alphabet:
        (va, da), (vb, db) = A.samples[letter], B.samples[letter]
        dv, dd = np.abs(va - vb), np.abs(da - db)
        if refine:
            dv_best = _refine_max(lambda t: A.sample(letter, t)[0] - B.sample(letter, t)[0], A.t, dv)
            dd_best = _refine_max(lambda t: A.sample(letter, t)[1] - B.sample(letter, t)[1], A.t, dd)
        else:
            dv_best, dd_best = float(dv.max()), float(dd.max())
        vmax, dmax = max(vmax, dv_best), max(dmax, dd_best)
    return vmax + dmax


# --- L vectors and the cocycle pseudo-orbit ---------------------------------


@dataclass
class LVector:
    level: int
    alphabet: tuple
    values: np.ndarray
    errors: np.ndarray


def L_vector(state, f, tol=L_TOL):
    """Per-letter mean of ln D(R^n f) over the fundamental intervals."""
    vals, errs = [], []
    for letter in state.alphabet:
        a, b = (float(x) for x in state.interval(letter))
        sing = kink_preimages(state, f, letter)

        def integrand(x, letter=letter):
            return return_map_log_derivative(state, f, letter, x)

        val, err = graded_integral(integrand, a, b, sing)
        width = b - a
        if err / width > tol:
            raise QuadratureError("L vector quadrature error %.3g for %r" % (err / width, letter))
        vals.append(val / width)
        errs.append(err / width)
    return LVector(state.level, tuple(state.alphabet), np.array(vals), np.array(errs))


def _as_matrix(theta):
    if hasattr(theta, "as_array"):
        return theta.as_array()
    return np.array([[float(x) for x in row] for row in theta])


def pseudo_orbit_residual(L_n, L_next, theta_n):
    ln = L_n.values if isinstance(L_n, LVector) else np.asarray(L_n, dtype=float)
    lnext = L_next.values if isinstance(L_next, LVector) else np.asarray(L_next, dtype=float)
    eps = lnext - _as_matrix(theta_n) @ ln
    return eps, float(np.linalg.norm(eps))


@dataclass
class Decomposition:
    stable: np.ndarray
    central: np.ndarray
    unstable: np.ndarray
    residual: float


def _basis_rows(b, d):
    if b is None:
        return np.zeros((0, d))
    rows = b.vectors if isinstance(b, SubspaceBasis) else np.atleast_2d(np.asarray(b, dtype=float))
    return rows.reshape(-1, d)


def decompose_L(L, Es, Ec, Eu):
    """Split L along E^s + E^c + E^u by a linear solve."""
    L = L.values if isinstance(L, LVector) else np.asarray(L, dtype=float)
    d = len(L)
    parts = [_basis_rows(b, d) for b in (Es, Ec, Eu)]
    B = np.vstack(parts)
    if B.shape[0] != d:
        raise AnalysisError("bases have %d vectors in dimension %d" % (B.shape[0], d))
    U = B / np.linalg.norm(B, axis=1)[:, None]
    if np.linalg.det(U @ U.T) <= 1e-10:
        raise AnalysisError("degenerate basis")
    coef = np.linalg.solve(B.T, L)
    comps, k = [], 0
    for p in parts:
        comps.append(coef[k:k + len(p)] @ p if len(p) else np.zeros(d))
        k += len(p)
    residual = float(np.linalg.norm(sum(comps) - L))
    if residual > 1e-10 * max(1.0, np.linalg.norm(L)):
        raise AnalysisError("decomposition residual %.3g" % residual)
    return Decomposition(comps[0], comps[1], comps[2], residual)


def level_bases(cpath, n, stable_depth=20, central=None, seed=None):
    """E^s, E^c and E^u at level n of a cocycle path (E^c pushed forward from level 0)."""
    steps = cpath.path.steps
    depth = min(stable_depth, len(steps) - n)
    if depth < 1:
        raise AnalysisError("path too short for a stable basis at level %d" % n)
    es = stable_subspace_approx(CocyclePath(steps[n:n + depth]), depth)
    u0 = unstable_seed(cpath.start) if seed is None else seed
    eu = SubspaceBasis(cpath.propagate(u0, n), "unstable")
    d = cpath.d
    ec = None
    rows = _basis_rows(central, d)
    if len(rows):
        ec = SubspaceBasis(np.array([cpath.propagate(r, n) for r in rows]), "central")
    return es, ec, eu


# --- slope vectors and affine models ----------------------------------------


@dataclass
class SlopeVector:
    values: np.ndarray
    level: int
    increments: list
    accepted: bool
    warning: str = ""
    history: list = field(default_factory=list)


def slope_vector(f, N, states=None, cpath=None, central=None, stable_depth=20, tol=1e-6):
    """Central component of the pulled-back L vectors, with a Cauchy diagnostic."""
    if states is None:
        states = renormalize(f, N)
    if cpath is None:
        cpath = CocyclePath(states[N].history)
    d = f.d
    kernel_dim = d - exact.rank(omega_matrix(f.pair))
    if kernel_dim == 0:
        zero = np.zeros(d)
        return SlopeVector(zero, N, [0.0] * N, True, "", [zero] * (N + 1))
    if central is None:
        raise AnalysisError("a central basis is needed when Ker Omega is nontrivial")
    es = stable_subspace_approx(cpath, min(stable_depth, len(cpath)))
    eu = SubspaceBasis(unstable_seed(cpath.start), "unstable")
    history = []
    for n in range(N + 1):
        L = L_vector(states[n], f).values
        w = _as_matrix(cpath.inverse_product(n)) @ L
        history.append(decompose_L(w, es, central, eu).central)
    incs = [float(np.linalg.norm(b - a)) for a, b in zip(history, history[1:])]
    accepted = bool(incs) and incs[-1] < tol
    warning = "" if accepted else "tail increments above %.1g; slope vector not accepted" % tol
    return SlopeVector(history[-1], N, incs, accepted, warning, history)


@dataclass
class AffineModel:
    giem: Giem
    lengths: np.ndarray
    slopes: np.ndarray
    matched: int
    N: int
    image_mismatch: float


def affine_lengths(cpath, omega, N):
    """Projective pullback of a positive vector through the affine induction steps."""
    omega = np.asarray(omega, dtype=float)
    lam = np.ones(cpath.d)
    for i in range(N - 1, -1, -1):
        step = cpath.path.steps[i]
        pair = step.pair
        w_i = cpath.propagate(omega, i)
        a0, a1 = pair.index(pair.last(0)), pair.index(pair.last(1))
        new = lam.copy()
        if step.eps == 0:
            new[a0] = lam[a0] + math.exp(w_i[a1]) * lam[a1]
        else:
            new[a1] = lam[a1] + lam[a0]
            new[a0] = math.exp(w_i[a1]) * lam[a0]
        lam = new / new.sum()
    return lam


def matched_levels(g, types):
    try:
        states = renormalize(g, len(types))
        got = [s.eps for s in states[-1].history]
    except ConnectionDetected as exc:
        got = [s.eps for s in exc.states[-1].history] if exc.states else []
    k = 0
    while k < min(len(got), len(types)) and got[k] == types[k]:
        k += 1
    return k


def affine_model(f, omega, N, cpath=None):
    """Affine i.e.m. with slopes exp(omega) following the combinatorics of f."""
    if cpath is None:
        cpath = CocyclePath(renormalize(f, N)[N].history)
    lam = affine_lengths(cpath, omega, N)
    image = np.exp(np.asarray(omega, dtype=float)) * lam
    mismatch = abs(image.sum() - 1.0)
    image = image / image.sum()
    g = Giem(cpath.start, list(lam), list(image))
    k = matched_levels(g, cpath.path.types[:N])
    if k < N // 2:
        raise ModelRejected(k, N)
    return AffineModel(g, lam, np.asarray(omega, dtype=float), k, N, mismatch)


# --- trends and l2 smoothing bounds ------------------------------------------


def log_slope(values, ns=None):
    values = np.asarray(values, dtype=float)
    ns = np.arange(len(values)) if ns is None else np.asarray(ns, dtype=float)
    return float(np.polyfit(ns, np.log(values), 1)[0])


def bounded_partial_sums(terms):
    """Finite-prefix proxy for summability of nonnegative terms.

    Passes when the terms decay on the second half (negative fitted
    log-slope) and the full sum is at most twice the half-way sum.
    """
    terms = np.asarray(terms, dtype=float)
    N = len(terms)
    sums = np.cumsum(terms)
    half = N // 2
    tail = terms[half:]
    slope = log_slope(tail) if np.all(tail > 0) and len(tail) > 1 else -np.inf
    ratio = float(sums[-1] / sums[half - 1]) if half >= 1 and sums[half - 1] > 0 else float("inf")
    return {"partial_sums": sums, "tail_log_slope": slope, "growth_ratio": ratio,
            "ok": bool(slope < 0 and ratio <= 2.0)}


@dataclass
class SmoothingSequences:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    bound: float
    sum_x2: float
    sum_z2: float

    @property
    def ok(self):
        return self.sum_x2 <= self.bound * (1 + 1e-12) and self.sum_z2 <= self.bound * (1 + 1e-12)


def l2_smoothing_sequences(r, lam, N=None):
    """x_n, y_n, z_n for n = 1..N built from r_1.., tail of r taken as zero."""
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be nonnegative")
    N = len(r) if N is None else N
    M = len(r)
    rr = np.concatenate([r, np.zeros(max(0, 2 * N - M))])
    x = np.empty(N)
    y = np.empty(N)
    z = np.empty(N)
    # index k (0-based) stands for n = k + 1
    acc = 0.0
    for k in range(len(rr) - 1, -1, -1):
        acc = rr[k] + lam * acc
        if k < N:
            x[k] = acc
    acc = 0.0
    for k in range(N):
        acc = rr[k] + lam * acc
        z[k] = acc
    powers = lam ** np.arange(N)
    for k in range(N):
        n = k + 1
        y[k] = powers[:n] @ rr[k:k + n]
    bound = float(np.sum(r ** 2) / (1 - lam) ** 2)
    return SmoothingSequences(x, y, z, bound, float(np.sum(x ** 2)), float(np.sum(z ** 2)))
