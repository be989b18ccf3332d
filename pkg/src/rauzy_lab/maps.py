"""Generalized interval exchange maps built from explicit branch families.

Every branch is an affine frame around a normalized profile ``h`` with
``h(0) = 0``, ``h(1) = 1``:

    f(x) = c + (e - c) * h((x - a) / (b - a)),   x in [a, b)

so derivatives are exact and nonlinearity integrals have closed forms.
Scalars may be ``mpmath.mpf`` for extended-precision induction; arrays are
evaluated in binary64.
"""

import contextlib
import math
from dataclasses import dataclass, field
from decimal import Decimal

import mpmath
import numpy as np
from scipy import integrate, optimize

from .combinatorics import CombinatorialPair, require_valid

SUM_TOL = 1e-12
TILING_TOL = 1e-9
KEANE_TOL = 1e-12
# decimal digits for the extended ("dd") precision mode, at least 106 bits
DD_DPS = 34


class MapError(ValueError):
    pass


class QuadratureError(ArithmeticError):
    pass


def _is_mp(x):
    return isinstance(x, mpmath.mpf)


def _log(x):
    return mpmath.log(x) if _is_mp(x) else np.log(x)


def _sign(x):
    return mpmath.sign(x) if _is_mp(x) else np.sign(x)


def _clip01(t):
    if _is_mp(t):
        return min(max(t, mpmath.mpf(0)), mpmath.mpf(1))
    return np.clip(t, 0.0, 1.0)


# --- normalized profiles ---------------------------------------------------


class Profile:
    kind = "abstract"
    kinks = ()

    def h(self, t):
        raise NotImplementedError

    def dh(self, t):
        raise NotImplementedError

    def d2h(self, t):
        raise NotImplementedError

    def log_dh(self, t):
        return _log(self.dh(t))

    def inverse(self, s):
        if _is_mp(s):
            guess = self.inverse(float(s))
            return mpmath.findroot(lambda t: self.h(t) - s, mpmath.mpf(guess))
        s_arr = np.asarray(s, dtype=float)
        out = np.array([optimize.brentq(lambda t, v=v: self.h(t) - v, 0.0, 1.0, xtol=1e-16, rtol=1e-15)
                        if 0.0 < v < 1.0 else float(v) for v in s_arr.ravel()])
        out = out.reshape(s_arr.shape)
        return float(out) if out.ndim == 0 else out

    def total_nonlinearity(self):
        """Integral of h''/h' over [0, 1]."""
        return float(self.log_dh(1.0) - self.log_dh(0.0))

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class AffineProfile(Profile):
    kind = "affine"

    def h(self, t):
        return t

    def dh(self, t):
        return t * 0 + 1

    def d2h(self, t):
        return t * 0

    def inverse(self, s):
        return s

    def to_json(self):
        return {"kind": "affine"}


@dataclass(frozen=True)
class MoebiusProfile(Profile):
    """x -> m x / (1 + x (m - 1)); derivative m at 0 and 1/m at 1."""

    m: float
    kind = "moebius"

    def __post_init__(self):
        if not self.m > 0:
            raise MapError("Moebius parameter must be positive")

    def h(self, t):
        return self.m * t / (1 + t * (self.m - 1))

    def dh(self, t):
        return self.m / (1 + t * (self.m - 1)) ** 2

    def d2h(self, t):
        return -2 * self.m * (self.m - 1) / (1 + t * (self.m - 1)) ** 3

    def log_dh(self, t):
        return _log(self.m) - 2 * _log(1 + t * (self.m - 1))

    def inverse(self, s):
        return s / (self.m - s * (self.m - 1))

    def to_json(self):
        return {"kind": "moebius", "m": repr(float(self.m))}


@dataclass(frozen=True)
class PowerKinkProfile(Profile):
    """Derivative proportional to 1 + A sign(t - c) |t - c|^beta.

    The derivative is continuous with a cusp at ``c``; the second derivative
    blows up like |t - c|^(beta - 1), so it lies in L_p only for
    p < 1 / (1 - beta).
    """

    center: float
    exponent: float
    amplitude: float
    kind = "power_kink"

    def __post_init__(self):
        c, beta, amp = self.center, self.exponent, self.amplitude
        if not 0.0 < c < 1.0:
            raise MapError("kink center must lie inside (0, 1)")
        if not 0.0 < beta < 1.0:
            raise MapError("kink exponent must lie in (0, 1)")
        if abs(amp) * max(c, 1 - c) ** beta >= 0.95:
            raise MapError("kink amplitude too large: derivative would not stay positive")

    @property
    def kinks(self):
        return (self.center,)

    def _primitive(self, t):
        c, beta = self.center, self.exponent
        return (abs(t - c) ** (1 + beta) - c ** (1 + beta)) / (1 + beta)

    @property
    def _norm(self):
        return 1 + self.amplitude * self._primitive(1.0)

    def h(self, t):
        return (t + self.amplitude * self._primitive(t)) / self._norm

    def dh(self, t):
        u = t - self.center
        return (1 + self.amplitude * _sign(u) * abs(u) ** self.exponent) / self._norm

    def d2h(self, t):
        u = t - self.center
        if _is_mp(u):
            if u == 0:
                return mpmath.inf
            return self.amplitude * self.exponent * abs(u) ** (self.exponent - 1) / self._norm
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            out = self.amplitude * self.exponent * np.abs(u) ** (self.exponent - 1) / self._norm
        return float(out) if out.ndim == 0 else out

    def to_json(self):
        return {"kind": "power_kink", "center": repr(float(self.center)),
                "exponent": repr(float(self.exponent)), "amplitude": repr(float(self.amplitude))}


def profile_from_json(obj):
    kind = obj.get("kind", "affine")
    if kind == "affine":
        return AffineProfile()
    if kind == "moebius":
        return MoebiusProfile(float(obj["m"]))
    if kind == "power_kink":
        return PowerKinkProfile(float(obj["center"]), float(obj["exponent"]), float(obj["amplitude"]))
    raise MapError("unknown branch kind %r" % kind)


# --- branches --------------------------------------------------------------


@dataclass(frozen=True)
class Branch:
    """Increasing map of [a, b) onto [c, e) through a normalized profile."""

    domain: tuple
    image: tuple
    profile: Profile = field(default_factory=AffineProfile)

    def __post_init__(self):
        a, b = self.domain
        c, e = self.image
        if not (b > a and e > c):
            raise MapError("branch domain and image must be non-degenerate")

    @property
    def kind(self):
        return self.profile.kind

    def _frame(self, x):
        a, b = self.domain
        c, e = self.image
        if _is_mp(x):
            return a, b, c, e
        return float(a), float(b), float(c), float(e)

    def _t(self, x):
        a, b, _, _ = self._frame(x)
        return _clip01((x - a) / (b - a))

    def value(self, x):
        a, b, c, e = self._frame(x)
        return c + (e - c) * self.profile.h(self._t(x))

    def d1(self, x):
        a, b, c, e = self._frame(x)
        return (e - c) / (b - a) * self.profile.dh(self._t(x))

    def d2(self, x):
        a, b, c, e = self._frame(x)
        return (e - c) / (b - a) ** 2 * self.profile.d2h(self._t(x))

    def log_d1(self, x):
        a, b, c, e = self._frame(x)
        return _log((e - c) / (b - a)) + self.profile.log_dh(self._t(x))

    def inverse(self, y):
        a, b, c, e = self._frame(y)
        s = _clip01((y - c) / (e - c))
        return a + (b - a) * self.profile.inverse(s)

    @property
    def kinks(self):
        a, b = float(self.domain[0]), float(self.domain[1])
        return tuple(a + (b - a) * k for k in self.profile.kinks)

    def nonlinearity(self, x1=None, x2=None):
        """Closed-form integral of f''/f' over [x1, x2] (whole domain by default)."""
        x1 = self.domain[0] if x1 is None else x1
        x2 = self.domain[1] if x2 is None else x2
        return self.log_d1(x2) - self.log_d1(x1)

    def nonlinearity_quad(self, x1=None, x2=None, tol=1e-10):
        """Same integral by adaptive Gauss-Kronrod quadrature, split at kinks."""
        x1 = float(self.domain[0] if x1 is None else x1)
        x2 = float(self.domain[1] if x2 is None else x2)
        pts = sorted(k for k in self.kinks if x1 < k < x2)
        cuts = [x1] + pts + [x2]
        total = 0.0
        for lo, hi in zip(cuts, cuts[1:]):
            val, err = integrate.quad(lambda s: float(self.d2(s) / self.d1(s)), lo, hi,
                                      epsabs=tol, epsrel=0.0, limit=200)
            if err > tol:
                raise QuadratureError("nonlinearity quadrature did not reach %g (err %g)" % (tol, err))
            total += val
        return total


# --- generalized interval exchange maps ------------------------------------


def dd_context(precision):
    """Working precision for extended ("dd") arithmetic; a no-op for binary64."""
    return mpmath.workdps(DD_DPS) if precision == "dd" else contextlib.nullcontext()


def _to_number(x, precision):
    if precision == "dd":
        return mpmath.mpf(str(x)) if isinstance(x, (str, Decimal)) else mpmath.mpf(x)
    return float(x)


class Giem:
    """A generalized interval exchange map of [0, 1).

    ``lengths`` and ``image_lengths`` are indexed by ``pair.alphabet``;
    ``profiles`` likewise (a single profile is broadcast).
    """

    def __init__(self, pair, lengths, image_lengths=None, profiles=None, precision="std"):
        with dd_context(precision):
            self._build(pair, lengths, image_lengths, profiles, precision)

    def _build(self, pair, lengths, image_lengths, profiles, precision):
        require_valid(pair)
        self.pair = pair
        self.precision = precision
        d = pair.d
        lengths = [_to_number(x, precision) for x in lengths]
        image_lengths = lengths if image_lengths is None else [_to_number(x, precision) for x in image_lengths]
        if len(lengths) != d or len(image_lengths) != d:
            raise MapError("need one length per letter")
        if any(x <= 0 for x in lengths) or any(x <= 0 for x in image_lengths):
            raise MapError("lengths must be positive")
        if abs(sum(lengths) - 1) > SUM_TOL:
            raise MapError("normalization: lengths sum to %r, not 1" % float(sum(lengths)))
        if abs(sum(image_lengths) - 1) > SUM_TOL:
            raise MapError("normalization: image lengths sum to %r, not 1" % float(sum(image_lengths)))
        if profiles is None:
            profiles = [AffineProfile()] * d
        elif isinstance(profiles, Profile):
            profiles = [profiles] * d
        if len(profiles) != d:
            raise MapError("need one profile per letter")
        self.lengths = tuple(lengths)
        self.image_lengths = tuple(image_lengths)
        self.profiles = tuple(profiles)

        one = _to_number(1, precision)
        zero = _to_number(0, precision)
        left = {}
        acc = zero
        for letter in pair.order(0):
            left[letter] = acc
            acc = acc + self.lengths[pair.index(letter)]
        ileft = {}
        acc = zero
        for letter in pair.order(1):
            ileft[letter] = acc
            acc = acc + self.image_lengths[pair.index(letter)]
        branches = {}
        for letter in pair.alphabet:
            i = pair.index(letter)
            b = one if pair.rank(letter, 0) == d else left[letter] + self.lengths[i]
            e = one if pair.rank(letter, 1) == d else ileft[letter] + self.image_lengths[i]
            branches[letter] = Branch((left[letter], b), (ileft[letter], e), self.profiles[i])
        self.branches = branches
        order0 = pair.order(0)
        self._order0 = order0
        self._cuts = np.array([float(branches[a].domain[0]) for a in order0])

    @property
    def alphabet(self):
        return self.pair.alphabet

    @property
    def d(self):
        return self.pair.d

    def left_endpoint(self, letter):
        return self.branches[letter].domain[0]

    def letter_at(self, x):
        """Letter whose domain contains x (scalar)."""
        i = int(np.searchsorted(self._cuts, float(x), side="right")) - 1
        if 0 < i + 1 < len(self._order0) and _is_mp(x):
            # resolve ties near a cut in full precision
            nxt = self._order0[i + 1]
            if x >= self.branches[nxt].domain[0]:
                i += 1
        return self._order0[max(i, 0)]

    def __call__(self, x):
        if _is_mp(x) or np.ndim(x) == 0:
            return self.branches[self.letter_at(x)].value(x)
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self._cuts, x, side="right") - 1, 0, self.d - 1)
        out = np.empty_like(x)
        for i, letter in enumerate(self._order0):
            mask = idx == i
            if np.any(mask):
                out[mask] = self.branches[letter].value(x[mask])
        return out

    def derivative(self, x):
        return self.branches[self.letter_at(x)].d1(x)

    def log_derivative(self, x, side="right"):
        """One-sided ln Df at a point; left limits at 0 wrap around to 1."""
        if side == "right":
            return float(self.branches[self.letter_at(x)].log_d1(x))
        for letter in self._order0:
            br = self.branches[letter]
            b = float(br.domain[1])
            a = float(br.domain[0])
            if a < float(x) <= b or (float(x) == 0.0 and self.pair.rank(letter, 0) == self.d):
                return float(br.log_d1(br.domain[1] if float(x) == 0.0 else x))
        raise MapError("no branch to the left of %r" % x)

    def with_precision(self, precision):
        if precision == self.precision:
            return self
        return Giem(self.pair, [_to_number(x, precision) for x in self.lengths],
                    [_to_number(x, precision) for x in self.image_lengths],
                    self.profiles, precision=precision)

    @property
    def is_affine(self):
        return all(p.kind == "affine" for p in self.profiles)

    def slopes(self):
        """ln of the mean slope of each branch, |f(I_a)| / |I_a|."""
        return np.array([math.log(float(m) / float(l)) for l, m in zip(self.lengths, self.image_lengths)])

    def to_json(self):
        return {
            "pair": self.pair.to_json(),
            "lengths": [_decimal_string(x) for x in self.lengths],
            "image_lengths": [_decimal_string(x) for x in self.image_lengths],
            "branches": [p.to_json() for p in self.profiles],
        }

    def __repr__(self):
        kinds = ",".join(p.kind for p in self.profiles)
        return "Giem(%s, lengths=%s, kinds=%s)" % (self.pair, [float(x) for x in self.lengths], kinds)


def _decimal_string(x):
    if _is_mp(x):
        return mpmath.nstr(x, 34, min_fixed=-mpmath.inf, max_fixed=mpmath.inf)
    return repr(float(x))


def giem_from_json(obj, precision="std"):
    with dd_context(precision):
        return _giem_from_json(obj, precision)


def _giem_from_json(obj, precision):
    pair = CombinatorialPair.from_json(obj["pair"])
    lengths = obj["lengths"]
    if "slopes" in obj:
        return make_affine_iem(pair, lengths, [float(s) for s in obj["slopes"]], precision=precision)
    image = obj.get("image_lengths")
    branches = obj.get("branches")
    profiles = None if branches is None else [profile_from_json(b) for b in branches]
    return Giem(pair, lengths, image, profiles, precision=precision)


# --- constructors and invariants ------------------------------------------


def translation_vector(pair, lengths):
    require_valid(pair)
    lam = list(lengths)
    out = []
    for i, a in enumerate(pair.alphabet):
        after = sum(lam[j] for j in range(pair.d) if pair.pi1[j] < pair.pi1[i])
        before = sum(lam[j] for j in range(pair.d) if pair.pi0[j] < pair.pi0[i])
        out.append(after - before)
    return np.array([float(x) for x in out])


def make_standard_iem(pair, lengths, precision="std"):
    return Giem(pair, lengths, None, None, precision=precision)


def make_affine_iem(pair, lengths, slopes, precision="std"):
    """Affine i.e.m. with branch slopes exp(slopes[a]); images tile [0, 1) in pi1 order."""
    with dd_context(precision):
        return _affine_iem(pair, lengths, slopes, precision)


def _affine_iem(pair, lengths, slopes, precision):
    lengths = [_to_number(x, precision) for x in lengths]
    exps = [mpmath.exp(s) if precision == "dd" else math.exp(s) for s in slopes]
    image = [e * l for e, l in zip(exps, lengths)]
    total = sum(image)
    if abs(total - 1) > TILING_TOL:
        raise MapError("incompatible slopes: image lengths sum to %r" % float(total))
    image = [x / total for x in image]
    image[-1] = 1 - sum(image[:-1])
    return Giem(pair, lengths, image, None, precision=precision)


def mean_nonlinearity(f, method="closed"):
    """Sum over branches of the integral of f''/f'."""
    total = 0.0
    for letter in f.alphabet:
        br = f.branches[letter]
        if method == "closed":
            total += float(br.nonlinearity())
        else:
            total += br.nonlinearity_quad()
    return total


@dataclass(frozen=True)
class BreakData:
    point: float
    amplitude: float


def break_amplitude(f, point):
    """ln Df(x-) - ln Df(x+) at a partition endpoint (0 wraps around to 1)."""
    x = float(point)
    ends = [float(f.left_endpoint(a)) for a in f.alphabet]
    if min(abs(x - e) for e in ends) > 1e-15:
        raise MapError("%r is not a break point of the partition" % point)
    letter = min(f.alphabet, key=lambda a: abs(float(f.left_endpoint(a)) - x))
    right = float(f.branches[letter].log_d1(f.branches[letter].domain[0]))
    rank = f.pair.rank(letter, 0)
    left_letter = f.pair.letter_at(0, f.d if rank == 1 else rank - 1)
    lb = f.branches[left_letter]
    left = float(lb.log_d1(lb.domain[1]))
    return BreakData(float(f.left_endpoint(letter)), left - right)


def break_points(f):
    return [break_amplitude(f, f.left_endpoint(a)) for a in f.pair.order(0)]


@dataclass(frozen=True)
class KeaneReport:
    ok: bool
    collision: tuple = None  # (m, alpha, beta)
    depth: int = 0

    def __bool__(self):
        return self.ok


def keane_check(f, depth):
    """Look for f^m(left end of I_alpha) == left end of I_beta, pi0(beta) != 1."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    letters = list(f.alphabet)
    pts = np.array([float(f.left_endpoint(a)) for a in letters])
    targets = [(b, float(f.left_endpoint(b))) for b in letters if f.pair.rank(b, 0) != 1]
    tvals = np.array([t for _, t in targets])
    for m in range(1, depth + 1):
        pts = f(pts)
        gaps = np.abs(pts[:, None] - tvals[None, :])
        hit = np.argwhere(gaps < KEANE_TOL)
        if len(hit):
            i, j = hit[0]
            return KeaneReport(False, (m, letters[i], targets[j][0]), m)
    return KeaneReport(True, None, depth)
