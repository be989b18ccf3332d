"""Rauzy-Veech induction of generalized interval exchange maps.

A level-n state keeps, per letter, the fundamental interval length, the
length of its image under the return map, and the return word over the
original alphabet. The return map on a fundamental interval is the
composition of original branches along that word. Intervals are in the
coordinates of the original map; nothing is rescaled here.
"""

from dataclasses import dataclass, field
from typing import Optional

import mpmath
import numpy as np

from .combinatorics import RauzyPath, RauzyStep, rauzy_move
from .maps import dd_context

CONNECTION_TOL = {"std": 1e-13, "dd": 1e-28}
DRIFT_TOL = 1e-10


class InductionError(RuntimeError):
    pass


class ConnectionDetected(InductionError):
    def __init__(self, level, states=None, gap=None):
        super().__init__("connection at level %d" % level)
        self.level = level
        self.states = states or []
        self.gap = gap


class ItineraryDrift(InductionError):
    pass


class DomainError(ValueError):
    pass


class NoReturn(RuntimeError):
    pass


class Word:
    """Persistent concatenation tree of letters with a cached length."""

    __slots__ = ("left", "right", "letter", "length")

    def __init__(self, letter=None, left=None, right=None):
        self.letter = letter
        self.left = left
        self.right = right
        self.length = 1 if letter is not None else left.length + right.length

    @classmethod
    def concat(cls, first, then):
        return cls(left=first, right=then)

    def __len__(self):
        return self.length

    def __iter__(self):
        stack = [self]
        while stack:
            node = stack.pop()
            if node.letter is not None:
                yield node.letter
            else:
                stack.append(node.right)
                stack.append(node.left)

    def reversed(self):
        stack = [self]
        while stack:
            node = stack.pop()
            if node.letter is not None:
                yield node.letter
            else:
                stack.append(node.left)
                stack.append(node.right)

    def to_list(self):
        return list(self)


@dataclass(frozen=True)
class InductionState:
    level: int
    pair: object
    lengths: tuple
    image_lengths: tuple
    words: tuple
    history: tuple = ()
    precision: str = "std"
    affine: Optional[tuple] = field(default=None, compare=False)  # per letter (slope, offset)

    @property
    def alphabet(self):
        return self.pair.alphabet

    @property
    def q(self):
        return tuple(len(w) for w in self.words)

    @property
    def domain_length(self):
        return sum(self.lengths)

    def length(self, letter):
        return self.lengths[self.pair.index(letter)]

    def word(self, letter):
        return self.words[self.pair.index(letter)]

    def left_endpoint(self, letter):
        r = self.pair.rank(letter, 0)
        return sum((self.lengths[i] for i in range(self.pair.d) if self.pair.pi0[i] < r), self._zero())

    def image_left(self, letter):
        r = self.pair.rank(letter, 1)
        return sum((self.image_lengths[i] for i in range(self.pair.d) if self.pair.pi1[i] < r), self._zero())

    def interval(self, letter):
        a = self.left_endpoint(letter)
        return a, a + self.length(letter)

    def _zero(self):
        return mpmath.mpf(0) if self.precision == "dd" else 0.0

    @property
    def path(self):
        return RauzyPath(self.history)

    @property
    def normalized_lengths(self):
        total = float(self.domain_length)
        return np.array([float(x) / total for x in self.lengths])

    def to_json(self, include_words=True):
        from .maps import _decimal_string

        out = {
            "level": self.level,
            "pair": self.pair.to_json(),
            "lengths": [_decimal_string(x) for x in self.lengths],
            "image_lengths": [_decimal_string(x) for x in self.image_lengths],
            "q": [str(x) for x in self.q],
            "history": [{"type": s.eps, "winner": s.winner, "loser": s.loser} for s in self.history],
        }
        if include_words:
            out["words"] = [w.to_list() for w in self.words]
        return out


def initial_state(f, precision=None):
    precision = precision or f.precision
    with dd_context(precision):
        return _initial_state(f.with_precision(precision), precision)


def _initial_state(f, precision):
    affine = None
    if f.is_affine:
        affine = []
        for a in f.alphabet:
            br = f.branches[a]
            slope = (br.image[1] - br.image[0]) / (br.domain[1] - br.domain[0])
            affine.append((slope, br.image[0] - slope * br.domain[0]))
        affine = tuple(affine)
    return InductionState(0, f.pair, tuple(f.lengths), tuple(f.image_lengths),
                          tuple(Word(a) for a in f.alphabet), (), precision, affine)


def rv_type(state, f):
    """(type, winner, loser) of the next induction step."""
    pair = state.pair
    a0, a1 = pair.last(0), pair.last(1)
    gap = state.length(a0) - state.image_lengths[pair.index(a1)]
    if abs(gap) <= CONNECTION_TOL[state.precision] * abs(state.domain_length):
        raise ConnectionDetected(state.level, gap=float(gap))
    eps = 0 if gap > 0 else 1
    winner, loser = pair.winner_loser(eps)
    return eps, winner, loser


def _apply_word(state, f, letter, x):
    if state.affine is not None:
        s, o = state.affine[state.pair.index(letter)]
        return s * x + o
    v = x
    for b in state.word(letter):
        v = f.branches[b].value(v)
    return v


def _invert_word(state, f, letter, y):
    if state.affine is not None:
        s, o = state.affine[state.pair.index(letter)]
        return (y - o) / s
    v = y
    for b in state.word(letter).reversed():
        v = f.branches[b].inverse(v)
    return v


def rv_step(state, f):
    with dd_context(state.precision):
        if state.precision == "dd":
            f = f.with_precision("dd")
        eps, winner, loser = rv_type(state, f)
        pair = state.pair
        iw, il = pair.index(winner), pair.index(loser)
        lengths = list(state.lengths)
        image = list(state.image_lengths)
        words = list(state.words)
        affine = list(state.affine) if state.affine is not None else None
        if eps == 0:
            total = state.domain_length
            cut = total - image[il]
            cw = state.image_left(winner)
            y = _apply_word(state, f, winner, cut)
            lengths[iw] = lengths[iw] - image[il]
            image[il] = cw + image[iw] - y
            image[iw] = y - cw
            words[il] = Word.concat(state.words[il], state.words[iw])
            if affine is not None:
                (sw, ow), (sl, ol) = affine[iw], affine[il]
                affine[il] = (sw * sl, sw * ol + ow)
        else:
            y = state.left_endpoint(loser)
            aw = state.left_endpoint(winner)
            bw = aw + lengths[iw]
            x_star = _invert_word(state, f, winner, y)
            lengths[il] = bw - x_star
            lengths[iw] = x_star - aw
            image[iw] = y - state.image_left(winner)
            words[il] = Word.concat(state.words[iw], state.words[il])
            if affine is not None:
                (sw, ow), (sl, ol) = affine[iw], affine[il]
                affine[il] = (sl * sw, sl * ow + ol)
        if min(lengths) <= 0 or min(image) <= 0:
            raise ConnectionDetected(state.level)
        step = RauzyStep(pair, eps, winner, loser)
        return InductionState(state.level + 1, rauzy_move(pair, eps), tuple(lengths), tuple(image),
                              tuple(words), state.history + (step,), state.precision,
                              tuple(affine) if affine is not None else None)


def renormalize(f, n, precision=None):
    """States for levels 0..n; on a connection the partial list rides on the exception."""
    state = initial_state(f, precision)
    states = [state]
    for _ in range(n):
        try:
            state = rv_step(state, f)
        except ConnectionDetected as exc:
            raise ConnectionDetected(exc.level, states, exc.gap) from None
        states.append(state)
    return states


def return_map_jet(state, f, letter, x, order=2, drift_tol=DRIFT_TOL):
    """Value and derivatives of R^n f on the fundamental interval of ``letter``.

    Works on scalars or numpy arrays. Returns (value, first, second), with
    unrequested orders set to None.
    """
    a, b = state.interval(letter)
    a, b = float(a), float(b)
    x = np.asarray(x, dtype=float)
    if np.any(x < a - drift_tol) or np.any(x > b + drift_tol):
        raise DomainError("point outside the fundamental interval of %r" % (letter,))
    v = x
    d1 = np.ones_like(x) if order >= 1 else None
    d2 = np.zeros_like(x) if order >= 2 else None
    for c in state.word(letter):
        br = f.branches[c]
        lo, hi = float(br.domain[0]), float(br.domain[1])
        if np.any(v < lo - drift_tol) or np.any(v > hi + drift_tol):
            raise ItineraryDrift("orbit left the domain of branch %r" % (c,))
        if order >= 1:
            g1 = br.d1(v)
            if order >= 2:
                d2 = br.d2(v) * d1 * d1 + g1 * d2
            d1 = g1 * d1
        v = br.value(v)
    if x.ndim == 0:
        v = float(v)
        d1 = None if d1 is None else float(d1)
        d2 = None if d2 is None else float(d2)
    return v, d1, d2


def return_map_log_derivative(state, f, letter, x, drift_tol=DRIFT_TOL):
    """ln D(R^n f) as a sum of logs along the word (no product under/overflow)."""
    x = np.asarray(x, dtype=float)
    v = x
    out = np.zeros_like(x)
    for c in state.word(letter):
        br = f.branches[c]
        if np.any(v < float(br.domain[0]) - drift_tol) or np.any(v > float(br.domain[1]) + drift_tol):
            raise ItineraryDrift("orbit left the domain of branch %r" % (c,))
        out = out + br.log_d1(v)
        v = br.value(v)
    return out


def eval_return_map(state, f, letter, x, order=0):
    return return_map_jet(state, f, letter, x, order)[order]


def brute_force_first_return(f, interval, x, cap=10**6):
    """Iterate f from x until the orbit re-enters ``interval``; (point, time)."""
    lo, hi = float(interval[0]), float(interval[1])
    x = float(x)
    if not lo <= x < hi:
        raise DomainError("start point is not in the interval")
    y = x
    for k in range(1, cap + 1):
        y = float(f(y))
        if lo <= y < hi:
            return y, k
    raise NoReturn("no return observed within %d iterates" % cap)


@dataclass(frozen=True)
class PartitionElement:
    letter: object
    index: int
    lo: float
    hi: float

    @property
    def length(self):
        return self.hi - self.lo


@dataclass
class DynamicalPartition:
    level: int
    elements: list
    preserved: list
    new: list

    def __len__(self):
        return len(self.elements)

    @property
    def total_length(self):
        return sum(e.length for e in self.elements)


PARTITION_TOL = 1e-12


def orbit_elements(state, f, letter):
    """The intervals f^i(I_letter), 0 <= i < q, tagged by (letter, i)."""
    a, b = state.interval(letter)
    v = np.array([float(a), float(b)])
    out = []
    for i, c in enumerate(state.word(letter)):
        out.append(PartitionElement(letter, i, float(v[0]), float(v[1])))
        v = f.branches[c].value(v)
    return out


def dynamical_partition(state, f, previous=None, tol=PARTITION_TOL):
    """The n-th dynamical partition with its preserved/new split.

    ``previous`` (the level n-1 state) enables the refinement check.
    """
    elements = []
    for letter in state.alphabet:
        elements.extend(orbit_elements(state, f, letter))
    ordered = sorted(elements, key=lambda e: e.lo)
    if abs(ordered[0].lo) > tol or abs(ordered[-1].hi - 1.0) > tol:
        raise InductionError("partition defect: elements do not cover [0, 1)")
    for e1, e2 in zip(ordered, ordered[1:]):
        if abs(e2.lo - e1.hi) > tol:
            raise InductionError("partition defect: gap or overlap of %g near %g" % (e2.lo - e1.hi, e1.hi))
    if state.level == 0:
        return DynamicalPartition(0, ordered, list(ordered), [])
    step = state.history[-1]
    qw = len(state.word(step.winner))
    ql = len(state.word(step.loser)) - qw
    preserved, new = [], []
    for e in ordered:
        if e.letter == step.winner:
            new.append(e)
        elif e.letter == step.loser and ((step.eps == 0 and e.index >= ql) or (step.eps == 1 and e.index < qw)):
            new.append(e)
        else:
            preserved.append(e)
    part = DynamicalPartition(state.level, ordered, preserved, new)
    if previous is not None:
        coarse = dynamical_partition(previous, f, tol=tol)
        check_refinement(part, coarse, tol)
    return part


def check_refinement(fine, coarse, tol=PARTITION_TOL):
    """Every fine element sits inside exactly one coarse element."""
    los = np.array([e.lo for e in coarse.elements])
    for e in fine.elements:
        i = int(np.searchsorted(los, e.lo + tol, side="right")) - 1
        host = coarse.elements[i]
        if e.lo < host.lo - tol or e.hi > host.hi + tol:
            raise InductionError("partition defect: element (%r, %d) is not nested" % (e.letter, e.index))
    return True
