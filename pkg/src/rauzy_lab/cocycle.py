"""Exact Rauzy-Veech cocycle, invariant cones and subspace approximations.

Matrices are indexed by ``pair.alphabet`` and kept as lists of Python int
rows so products never overflow. Floating point only appears in cone
membership, growth fits and subspace normalization.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog, nnls

from . import exact
from .combinatorics import RauzyPath, find_path, genus, omega_matrix, rauzy_move, replay

CONE_TOL = 1e-10
GRAM_TOL = 1e-10


class CocycleError(RuntimeError):
    pass


class ConePrecondition(CocycleError):
    pass


class NoContraction(CocycleError):
    pass


class UnexpectedSpectrum(CocycleError):
    pass


class NotAGraph(CocycleError):
    pass


@dataclass(frozen=True)
class ThetaMatrix:
    matrix: tuple
    pair: object
    eps: int
    winner: object
    loser: object

    def rows(self):
        return [list(r) for r in self.matrix]

    def inverse_rows(self):
        d = self.pair.d
        inv = exact.identity(d)
        inv[self.pair.index(self.loser)][self.pair.index(self.winner)] = -1
        return inv

    def as_array(self):
        return np.array(self.matrix, dtype=float)


def theta_matrix(pair, eps):
    """Identity plus a single 1 at (loser, winner)."""
    winner, loser = pair.winner_loser(eps)
    m = exact.identity(pair.d)
    m[pair.index(loser)][pair.index(winner)] = 1
    return ThetaMatrix(tuple(tuple(r) for r in m), pair, eps, winner, loser)


def check_theta_omega(pair, eps):
    """Exact check of Theta Omega Theta^T == Omega' across one Rauzy move."""
    th = theta_matrix(pair, eps).rows()
    lhs = exact.matmul(exact.matmul(th, omega_matrix(pair)), exact.transpose(th))
    return lhs == omega_matrix(rauzy_move(pair, eps))


def _to_float(m):
    return np.array([[float(x) for x in row] for row in m])


class CocyclePath:
    """Theta matrices along a Rauzy path with cached exact prefix products."""

    def __init__(self, path):
        if not isinstance(path, RauzyPath):
            path = RauzyPath(tuple(path))
        self.path = path
        self.thetas = [theta_matrix(s.pair, s.eps) for s in path.steps]
        self._products = [exact.identity(self.d)] if self.thetas else None
        self._inverses = [exact.identity(self.d)] if self.thetas else None

    @classmethod
    def from_types(cls, start, types):
        return cls(RauzyPath.from_types(start, types))

    def __len__(self):
        return len(self.thetas)

    @property
    def d(self):
        return self.path.steps[0].pair.d

    @property
    def start(self):
        return self.path.steps[0].pair

    def pair_at(self, n):
        """pi^n, for 0 <= n <= len(self)."""
        return self.path.pairs()[n] if n == len(self) else self.path.steps[n].pair

    def omega_at(self, n):
        return omega_matrix(self.pair_at(n))

    def product(self, n):
        """Theta_{n-1} ... Theta_0 (the identity for n = 0)."""
        while len(self._products) <= n:
            k = len(self._products) - 1
            self._products.append(exact.matmul(self.thetas[k].rows(), self._products[k]))
        return self._products[n]

    def inverse_product(self, n):
        """Theta_0^{-1} ... Theta_{n-1}^{-1}, exact."""
        while len(self._inverses) <= n:
            k = len(self._inverses) - 1
            self._inverses.append(exact.matmul(self._inverses[k], self.thetas[k].inverse_rows()))
        return self._inverses[n]

    def segment(self, j, n):
        """Theta_{n-1} ... Theta_j."""
        m = exact.identity(self.d)
        for th in self.thetas[j:n]:
            m = exact.matmul(th.rows(), m)
        return m

    def q_vector(self, n):
        return exact.matvec(self.product(n), [1] * self.d)

    def propagate(self, v, n):
        """Theta_{0,n-1} v in floating point, v real."""
        return _to_float(self.product(n)) @ np.asarray(v, dtype=float)

    def to_json(self, levels=None):
        levels = range(len(self) + 1) if levels is None else levels
        return {
            "alphabet": list(self.start.alphabet),
            "types": self.path.types,
            "products": {str(n): [[str(x) for x in row] for row in self.product(n)] for n in levels},
        }


# --- cones -------------------------------------------------------------------


@dataclass
class ConeReport:
    member: bool
    reason: str  # "ok", "zero", "outside image", "outside cone"
    certificate: object = None

    def __bool__(self):
        return self.member


def _partial_sum_rows(pair, side):
    ranks = pair.pi0 if side == 0 else pair.pi1
    d = pair.d
    return np.array([[1.0 if ranks[i] <= k else 0.0 for i in range(d)] for k in range(1, d)])


def in_tplus(tau, pair, tol=0.0):
    tau = np.asarray(tau, dtype=float)
    return bool(np.all(_partial_sum_rows(pair, 0) @ tau > tol) and np.all(_partial_sum_rows(pair, 1) @ tau < -tol))


def cone_membership(v, pair, which, tol=CONE_TOL):
    v = np.asarray(v, dtype=float)
    if which == "Tplus":
        if not np.any(v):
            return ConeReport(False, "zero")
        ok = in_tplus(v, pair)
        return ConeReport(ok, "ok" if ok else "outside cone", v if ok else None)
    om = np.array(omega_matrix(pair), dtype=float)
    if np.linalg.norm(v) <= tol:
        return ConeReport(False, "zero")
    # v has to lie in Im Omega = (Ker Omega)^perp first
    sol, *_ = np.linalg.lstsq(om, v, rcond=None)
    if np.linalg.norm(om @ sol - v) > tol * max(1.0, np.linalg.norm(v)):
        return ConeReport(False, "outside image")
    if which == "Cs":
        x, res = nnls(om, v)
        if res <= tol * max(1.0, np.linalg.norm(v)) and np.all(x >= -tol):
            return ConeReport(True, "ok", x)
        return ConeReport(False, "outside cone")
    if which == "Cu":
        return _cu_membership(v, pair, om, tol)
    raise ValueError("unknown cone %r" % which)


def _cu_membership(v, pair, om, tol):
    # maximize t subject to Omega tau = -v, S0 tau >= t, -S1 tau >= t, t <= 1
    d = pair.d
    s0, s1 = _partial_sum_rows(pair, 0), _partial_sum_rows(pair, 1)
    rows = np.vstack([-s0, s1])
    a_ub = np.hstack([rows, np.ones((rows.shape[0], 1))])
    b_ub = np.zeros(rows.shape[0])
    a_eq = np.hstack([om, np.zeros((d, 1))])
    c = np.zeros(d + 1)
    c[-1] = -1.0
    bounds = [(None, None)] * d + [(None, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=-v, bounds=bounds, method="highs")
    if res.status != 0 or -res.fun <= tol:
        return ConeReport(False, "outside cone")
    return ConeReport(True, "ok", res.x[:d])


def tplus_barycenter(pair):
    """Interior point of T+ maximizing the smallest partial-sum margin inside the unit box."""
    d = pair.d
    s0, s1 = _partial_sum_rows(pair, 0), _partial_sum_rows(pair, 1)
    rows = np.vstack([-s0, s1])
    a_ub = np.hstack([rows, np.ones((rows.shape[0], 1))])
    c = np.zeros(d + 1)
    c[-1] = -1.0
    bounds = [(-1.0, 1.0)] * d + [(None, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(rows.shape[0]), bounds=bounds, method="highs")
    if res.status != 0 or -res.fun <= 0:
        raise CocycleError("T+ has empty interior for %s" % pair)
    return res.x[:d]


def unstable_seed(pair):
    """Unit vector -Omega tau with tau the canonical interior point of T+."""
    u = -np.array(omega_matrix(pair), dtype=float) @ tplus_barycenter(pair)
    return u / np.linalg.norm(u)


# --- growth ------------------------------------------------------------------


def fit_log_rate(values, start=None):
    """exp of the least-squares slope of log(values) against index, over values[start:]."""
    values = np.asarray(values, dtype=float)
    start = len(values) // 2 if start is None else start
    y = np.log(values[start:])
    x = np.arange(start, len(values))
    slope = np.polyfit(x, y, 1)[0]
    return float(np.exp(slope))


@dataclass
class GrowthReport:
    norms: np.ndarray
    factors: np.ndarray
    rate: float
    direction: str


def growth_estimate(cpath, v, direction="forward"):
    """Norm growth of v under the cocycle; forward on C^u, backward on C^s."""
    v = np.asarray(v, dtype=float)
    N = len(cpath)
    if direction == "forward":
        if not cone_membership(v, cpath.start, "Cu"):
            raise ConePrecondition("vector is not in the unstable cone of the first vertex")
        norms = [np.linalg.norm(cpath.propagate(v, n)) for n in range(N + 1)]
    elif direction == "backward":
        if not cone_membership(v, cpath.pair_at(N), "Cs"):
            raise ConePrecondition("vector is not in the stable cone of the last vertex")
        norms = [np.linalg.norm(v)]
        w = [Fraction(x) for x in v]
        for n in range(N - 1, -1, -1):
            w = exact.matvec(cpath.thetas[n].inverse_rows(), w)
            norms.append(float(np.linalg.norm([float(x) for x in w])))
    else:
        raise ValueError("direction must be 'forward' or 'backward'")
    norms = np.array(norms)
    return GrowthReport(norms, norms[1:] / norms[:-1], fit_log_rate(norms), direction)


# --- subspaces ---------------------------------------------------------------


@dataclass
class SubspaceBasis:
    vectors: np.ndarray  # rows
    kind: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.vectors.ndim == 1:
            self.vectors = self.vectors[None, :]
        if len(self.vectors):
            norms = np.linalg.norm(self.vectors, axis=1)
            if np.any(norms == 0):
                raise CocycleError("zero basis vector")
            self.vectors = self.vectors / norms[:, None]
            gram = np.linalg.det(self.vectors @ self.vectors.T)
            if gram <= GRAM_TOL:
                raise CocycleError("basis is degenerate (Gram determinant %.3g)" % gram)

    @property
    def dim(self):
        return len(self.vectors)

    def to_json(self):
        return {"kind": self.kind, "vectors": [[repr(float(x)) for x in v] for v in self.vectors],
                "diagnostics": {k: v for k, v in self.diagnostics.items() if isinstance(v, (int, float, str, bool))}}


def _angular_diameter(vectors):
    u = np.array([v / np.linalg.norm(v) for v in vectors])
    c = np.clip(u @ u.T, -1.0, 1.0)
    return float(np.max(np.arccos(c)))


def _stable_generators(pair):
    om = omega_matrix(pair)
    cols = [[om[i][j] for i in range(pair.d)] for j in range(pair.d)]
    return [c for c in cols if any(c)]


def stable_cone_pullback(cpath, m):
    """Generators of C^s at level m pulled back to level 0, exact."""
    inv = cpath.inverse_product(m)
    return [exact.matvec(inv, g) for g in _stable_generators(cpath.pair_at(m))]


def stable_subspace_approx(cpath, m):
    if len(cpath) < m:
        raise ValueError("path shorter than requested depth")
    diameters = []
    for k in range(1, m + 1):
        gens = [np.array([float(x) for x in g]) for g in stable_cone_pullback(cpath, k)]
        diameters.append(_angular_diameter(gens))
    if m > 1 and not diameters[-1] < diameters[0]:
        raise NoContraction("stable cone does not contract; path likely not k-bounded")
    gens = np.array([g / np.linalg.norm(g) for g in gens])
    ray = np.linalg.svd(gens)[2][0]
    if ray @ gens.sum(axis=0) < 0:
        ray = -ray
    return SubspaceBasis(ray[None, :], "stable", {"angular_diameter": diameters[-1], "diameters": diameters})


def unstable_ray(cpath, n, seed=None):
    u0 = unstable_seed(cpath.start) if seed is None else np.asarray(seed, dtype=float)
    u = cpath.propagate(u0, n)
    return SubspaceBasis(u[None, :], "unstable")


def _omega_kernel(pair):
    return np.array(exact.nullspace(omega_matrix(pair)), dtype=float).reshape(-1, pair.d)


@dataclass
class CentralSpace:
    basis: SubspaceBasis
    fixed_vectors: list  # exact integer vectors
    psi: np.ndarray  # d x d graph map, zero on Im Omega
    period_matrix: list


def periodic_central_space(cpath):
    """Fixed space of the period matrix of a closed path, as a graph over Ker Omega."""
    start = cpath.start
    if cpath.pair_at(len(cpath)) != start:
        raise ValueError("path does not close up")
    d = cpath.d
    P = cpath.product(len(cpath))
    fixed = exact.nullspace(exact.subtract(P, exact.identity(d))) if d else []
    expected = d - 2 * genus(start)
    if len(fixed) != expected:
        raise UnexpectedSpectrum("fixed space has dimension %d, expected %d" % (len(fixed), expected))
    for v in fixed:
        if exact.matvec(P, v) != v:
            raise UnexpectedSpectrum("period matrix does not fix a kernel vector")
    if not fixed:
        return CentralSpace(SubspaceBasis(np.zeros((0, d)), "central"), [], np.zeros((d, d)), P)
    kern = _omega_kernel(start)
    proj = kern.T @ np.linalg.pinv(kern.T)  # orthogonal projector onto Ker Omega
    V = np.array(fixed, dtype=float).T
    K = proj @ V
    if np.linalg.matrix_rank(K, tol=1e-9) != len(fixed):
        raise NotAGraph("fixed space is not transverse to Im Omega")
    psi = (V - K) @ np.linalg.pinv(K)
    return CentralSpace(SubspaceBasis(V.T, "central"), fixed, psi, P)


def periodic_closure(cpath, n):
    """Prefix of length n followed by a shortest path back to the first vertex."""
    start = cpath.start
    types = cpath.path.types[:n]
    back = find_path(replay(start, types), start)
    if not types and not back:
        raise ValueError("empty closure")
    return CocyclePath.from_types(start, types + back)


@dataclass
class CentralLimit:
    basis: SubspaceBasis
    psis: list
    increments: list
    ladder: list
    accepted: bool
    decreasing: bool

    def to_json(self):
        return {"ladder": self.ladder, "increments": [float(x) for x in self.increments],
                "accepted": self.accepted, "decreasing": self.decreasing, "basis": self.basis.to_json()}


def central_space_limit(cpath, ladder, tol=1e-8):
    psis, spaces = [], []
    for n in ladder:
        cs = periodic_central_space(periodic_closure(cpath, n))
        psis.append(cs.psi)
        spaces.append(cs)
    incs = [float(np.linalg.norm(b - a)) for a, b in zip(psis, psis[1:])]
    decreasing = all(b <= a for a, b in zip(incs, incs[1:]))
    accepted = bool(incs) and incs[-1] < tol or (not incs and len(psis) == 1)
    d = cpath.d
    kern = _omega_kernel(cpath.start)
    if len(kern) == 0:
        basis = SubspaceBasis(np.zeros((0, d)), "central")
        accepted = True
    else:
        graph = kern + kern @ psis[-1].T
        basis = SubspaceBasis(graph, "central", {"last_increment": incs[-1] if incs else 0.0})
    return CentralLimit(basis, psis, incs, list(ladder), accepted, decreasing)


def quasi_isometry_ratio(cpath, v, n_max):
    norms = [np.linalg.norm(cpath.propagate(v, n)) for n in range(n_max + 1)]
    return float(max(norms) / min(norms))
