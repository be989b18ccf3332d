"""Combinatorial data of interval exchange maps and Rauzy moves.

Ranks are 1-based everywhere in the public interface. A pair stores its
alphabet in a fixed order; ``pi0[i]`` and ``pi1[i]`` are the ranks of
``alphabet[i]`` in the domain and image orderings respectively.
"""

from collections import deque
from dataclasses import dataclass
from typing import Optional

from . import exact

DEFAULT_CLASS_CAP = 10_000


class InvalidPair(ValueError):
    pass


class ClassTooLarge(RuntimeError):
    pass


class NoPath(LookupError):
    pass


@dataclass(frozen=True)
class CombinatorialPair:
    alphabet: tuple
    pi0: tuple
    pi1: tuple

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "pi0", tuple(int(r) for r in self.pi0))
        object.__setattr__(self, "pi1", tuple(int(r) for r in self.pi1))
        if not (len(self.alphabet) == len(self.pi0) == len(self.pi1)):
            raise InvalidPair("alphabet and rank maps differ in size")

    @property
    def d(self):
        return len(self.alphabet)

    def index(self, letter):
        return self.alphabet.index(letter)

    def rank(self, letter, side):
        ranks = self.pi0 if side == 0 else self.pi1
        return ranks[self.alphabet.index(letter)]

    def letter_at(self, side, rank):
        """Inverse rank map: the letter of rank ``rank`` on ``side`` (0 or 1)."""
        ranks = self.pi0 if side == 0 else self.pi1
        return self.alphabet[ranks.index(rank)]

    def order(self, side):
        """Letters listed left to right in the domain (0) or image (1)."""
        return [self.letter_at(side, r) for r in range(1, self.d + 1)]

    def last(self, side):
        """The letter alpha(eps) = pi_eps^{-1}(d)."""
        return self.letter_at(side, self.d)

    def winner_loser(self, eps):
        return self.last(eps), self.last(1 - eps)

    def monodromy(self):
        """Image-order listing of domain ranks, p(j) = pi0(pi1^{-1}(j))."""
        return tuple(self.rank(self.letter_at(1, j), 0) for j in range(1, self.d + 1))

    @classmethod
    def from_monodromy(cls, p, alphabet=None):
        d = len(p)
        if alphabet is None:
            alphabet = tuple("ABCDEFGHIJKLMNOPQRSTUVWXYZ"[:d])
        pi0 = tuple(range(1, d + 1))
        pi1 = [0] * d
        for j, r in enumerate(p, start=1):
            pi1[r - 1] = j
        return cls(tuple(alphabet), pi0, tuple(pi1))

    def to_json(self):
        return {"alphabet": list(self.alphabet), "pi0": list(self.pi0), "pi1": list(self.pi1)}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(obj["alphabet"]), tuple(int(x) for x in obj["pi0"]),
                   tuple(int(x) for x in obj["pi1"]))

    def __str__(self):
        return "%s / %s" % (" ".join(map(str, self.order(0))), " ".join(map(str, self.order(1))))


@dataclass(frozen=True)
class Validity:
    valid: bool
    reason: Optional[str] = None
    reducible_at: Optional[int] = None

    def __bool__(self):
        return self.valid


def validate_pair(pair):
    d = pair.d
    if d < 2:
        return Validity(False, "alphabet needs at least two letters")
    if len(set(pair.alphabet)) != d:
        return Validity(False, "alphabet symbols are not unique")
    expected = set(range(1, d + 1))
    for name, ranks in (("pi0", pair.pi0), ("pi1", pair.pi1)):
        if set(ranks) != expected:
            return Validity(False, "%s is not a bijection onto 1..%d" % (name, d))
    for j in range(1, d):
        head0 = {a for a, r in zip(pair.alphabet, pair.pi0) if r <= j}
        head1 = {a for a, r in zip(pair.alphabet, pair.pi1) if r <= j}
        if head0 == head1:
            return Validity(False, "reducible at j=%d" % j, reducible_at=j)
    return Validity(True)


def require_valid(pair):
    v = validate_pair(pair)
    if not v:
        raise InvalidPair(v.reason)
    return pair


def omega_matrix(pair):
    """Antisymmetric sign matrix with translation vector = Omega @ lengths."""
    require_valid(pair)
    d = pair.d
    om = [[0] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            if pair.pi1[i] > pair.pi1[j] and pair.pi0[i] < pair.pi0[j]:
                om[i][j] = 1
            elif pair.pi1[i] < pair.pi1[j] and pair.pi0[i] > pair.pi0[j]:
                om[i][j] = -1
    return om


def genus(pair):
    return exact.rank(omega_matrix(pair)) // 2


def rauzy_move(pair, eps):
    """Combinatorics of the Rauzy-Veech induction of type ``eps``."""
    require_valid(pair)
    if eps not in (0, 1):
        raise ValueError("type must be 0 or 1")
    d = pair.d
    winner = pair.last(eps)
    keep = pair.pi0 if eps == 0 else pair.pi1
    other = pair.pi1 if eps == 0 else pair.pi0
    pivot = other[pair.index(winner)]
    moved = []
    for r in other:
        if r <= pivot:
            moved.append(r)
        elif r < d:
            moved.append(r + 1)
        else:
            moved.append(pivot + 1)
    if eps == 0:
        return CombinatorialPair(pair.alphabet, keep, tuple(moved))
    return CombinatorialPair(pair.alphabet, tuple(moved), keep)


@dataclass(frozen=True)
class RauzyStep:
    pair: CombinatorialPair
    eps: int
    winner: object
    loser: object


@dataclass(frozen=True)
class RauzyPath:
    steps: tuple

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        for a, b in zip(self.steps, self.steps[1:]):
            if rauzy_move(a.pair, a.eps) != b.pair:
                raise InvalidPair("consecutive steps are not joined by a Rauzy move")
        for s in self.steps:
            if (s.winner, s.loser) != s.pair.winner_loser(s.eps):
                raise InvalidPair("winner/loser inconsistent with type")

    def __len__(self):
        return len(self.steps)

    @classmethod
    def from_types(cls, start, types):
        steps = []
        pair = start
        for eps in types:
            w, l = pair.winner_loser(eps)
            steps.append(RauzyStep(pair, eps, w, l))
            pair = rauzy_move(pair, eps)
        return cls(tuple(steps))

    @property
    def types(self):
        return [s.eps for s in self.steps]

    @property
    def end(self):
        """The pair reached after the last step."""
        last = self.steps[-1]
        return rauzy_move(last.pair, last.eps)

    def pairs(self):
        """pi^0, ..., pi^N (one more than the number of steps)."""
        return [s.pair for s in self.steps] + [self.end]


@dataclass
class RauzyClass:
    vertices: list
    edges: list  # (source, eps, target)

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, pair):
        return pair in set(self.vertices)


def rauzy_class(pair, cap=DEFAULT_CLASS_CAP):
    require_valid(pair)
    seen = {pair}
    order = [pair]
    edges = []
    queue = deque([pair])
    while queue:
        p = queue.popleft()
        for eps in (0, 1):
            q = rauzy_move(p, eps)
            edges.append((p, eps, q))
            if q not in seen:
                if len(seen) >= cap:
                    raise ClassTooLarge("Rauzy class exceeds %d vertices" % cap)
                seen.add(q)
                order.append(q)
                queue.append(q)
    return RauzyClass(order, edges)


def find_path(start, target, cap=DEFAULT_CLASS_CAP):
    """Shortest list of types whose moves carry ``start`` to ``target``."""
    require_valid(start)
    require_valid(target)
    if start == target:
        return []
    parent = {start: None}
    queue = deque([start])
    while queue:
        p = queue.popleft()
        for eps in (0, 1):
            q = rauzy_move(p, eps)
            if q in parent:
                continue
            parent[q] = (p, eps)
            if q == target:
                path = []
                while parent[q] is not None:
                    q, e = parent[q]
                    path.append(e)
                return path[::-1]
            if len(parent) > cap:
                raise ClassTooLarge("search exceeded %d vertices" % cap)
            queue.append(q)
    raise NoPath("%s is not reachable from %s" % (target, start))


def replay(start, types):
    pair = start
    for eps in types:
        pair = rauzy_move(pair, eps)
    return pair


@dataclass(frozen=True)
class KBoundedVerdict:
    verdict: Optional[bool]  # None: undetermined on this prefix
    witness: Optional[tuple] = None  # first failing (n, beta, gamma)
    checked_levels: int = 0


def k_bounded_check(path, k):
    """Check bounded combinatorics on a finite prefix of a Rauzy path.

    Levels are counted from 1 (level 0 may only serve as a witness index
    n1), and only levels whose whole window ``n + k - 1`` lies inside the
    prefix are checked. Prefixes shorter than ``2k + d`` are undetermined.
    """
    if k < 1:
        raise ValueError("k must be positive")
    steps = path.steps
    N = len(steps)
    if N == 0:
        return KBoundedVerdict(None)
    d = steps[0].pair.d
    if N < 2 * k + d:
        return KBoundedVerdict(None)
    winners = [s.winner for s in steps]
    losers = [s.loser for s in steps]
    alphabet = steps[0].pair.alphabet
    last_n = N - k
    for n in range(1, last_n + 1):
        lo, hi = max(0, n - k + 1), n + k - 1
        for beta in alphabet:
            for gamma in alphabet:
                if not _window_ok(winners, losers, lo, hi, beta, gamma):
                    return KBoundedVerdict(False, (n, beta, gamma), n)
    return KBoundedVerdict(True, None, last_n)


def _window_ok(winners, losers, lo, hi, beta, gamma):
    for n1 in range(lo, hi + 1):
        if winners[n1] != beta:
            continue
        # chain: loser at n1+i is the winner at n1+i+1
        end = n1
        while True:
            if losers[end] == gamma:
                return True
            if end + 1 > hi or losers[end] != winners[end + 1]:
                break
            end += 1
    return False
