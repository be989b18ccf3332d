"""Convergence experiments: level-by-level distances between renormalized maps."""

from dataclasses import dataclass, field

import numpy as np

from .analysis import (DEFAULT_GRID, L_vector, RenormalizedMap, affine_model, bounded_partial_sums,
                       c1_distance, l1_second_derivative_distance, log_slope, m_n_coefficient,
                       moebius_F, pseudo_orbit_residual, return_map_distance, slope_vector,
                       zoom_return_branch)
from .cocycle import CocyclePath
from .induction import renormalize

TREND_WINDOW = (5, 15)


@dataclass
class Series:
    """Per-level scalar series plus long-form rows (n, alpha, quantity, value)."""

    name: str
    levels: list = field(default_factory=list)
    values: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    def add(self, n, quantity, value, alpha=""):
        self.rows.append((n, alpha, quantity, value))
        if alpha == "":
            self.values.setdefault(quantity, []).append(value)
            if n not in self.levels:
                self.levels.append(n)

    def array(self, quantity):
        return np.asarray(self.values[quantity], dtype=float)


def trend(values, levels, window=TREND_WINDOW):
    """Fitted log-slope over the window of levels, on positive values only."""
    v, n = np.asarray(values, dtype=float), np.asarray(levels, dtype=float)
    keep = (n >= window[0]) & (n <= window[1]) & (v > 0)
    if keep.sum() < 2:
        return float("nan")
    return log_slope(v[keep], n[keep])


def summarize(series, quantity, window=TREND_WINDOW):
    v = series.array(quantity)
    slope = trend(v, series.levels, window)
    sums = bounded_partial_sums(v ** 2)
    return {"log_slope": slope, "negative_slope": bool(slope < 0),
            "sum_of_squares": float(np.sum(v ** 2)), "partial_sums_bounded": sums["ok"],
            "growth_ratio": sums["growth_ratio"]}


def moebius_comparison(f, N, grid=DEFAULT_GRID, states=None):
    """Distance of each zoomed return branch of R^n f to the Moebius map F_n."""
    states = renormalize(f, N) if states is None else states
    out = Series("moebius")
    for n in range(1, N + 1):
        st = states[n]
        c1s, l1s = [], []
        for a in st.alphabet:
            m = m_n_coefficient(f, st, a)
            Z = zoom_return_branch(st, f, a, grid)
            F = moebius_F(m, grid)
            c1, l1 = c1_distance(Z, F), l1_second_derivative_distance(Z, F)
            out.add(n, "m_n", m, a)
            out.add(n, "c1", c1, a)
            out.add(n, "l1_d2", l1, a)
            c1s.append(c1)
            l1s.append(l1)
        out.add(n, "c1", max(c1s))
        out.add(n, "l1_d2", max(l1s))
    return out


def affine_comparison(f, N, grid=DEFAULT_GRID, central=None, model_depth=None):
    """R^n f against R^n of an affine model built from the slope vector of f.

    The model's lengths come from a pullback along ``model_depth`` (default
    2N) steps, so that they follow the combinatorics of f well past N.
    """
    depth = 2 * N if model_depth is None else model_depth
    states = renormalize(f, depth)
    cpath = CocyclePath(states[depth].history)
    omega = slope_vector(f, N, states[:N + 1], CocyclePath(states[N].history), central).values
    model = affine_model(f, omega, depth, cpath)
    g_states = renormalize(model.giem, min(N, model.matched))
    out = Series("affine_model")
    for n in range(1, len(g_states)):
        A = RenormalizedMap(states[n], f, grid)
        B = RenormalizedMap(g_states[n], model.giem, grid)
        out.add(n, "c1", return_map_distance(A, B))
        gap = np.abs(np.asarray(A.zeta, dtype=float) - np.asarray(B.zeta, dtype=float))
        for a, v in zip(states[n].alphabet, gap):
            out.add(n, "zeta_gap", float(v), a)
        out.add(n, "zeta_gap", float(gap.max()))
    return out, model


def pair_comparison(f, g, N, grid=DEFAULT_GRID):
    """Distances between R^n f and R^n g for two maps with the same combinatorics."""
    sf, sg = renormalize(f, N), renormalize(g, N)
    out = Series("pair")
    for n in range(1, N + 1):
        out.add(n, "c1", return_map_distance(RenormalizedMap(sf[n], f, grid),
                                             RenormalizedMap(sg[n], g, grid)))
    return out


def residual_series(f, N, states=None):
    """Norms of L_{n+1} - Theta_n L_n for n < N."""
    states = renormalize(f, N) if states is None else states
    cpath = CocyclePath(states[N].history)
    Ls = [L_vector(s, f) for s in states]
    out = Series("residual")
    for n in range(N):
        eps, norm = pseudo_orbit_residual(Ls[n], Ls[n + 1], cpath.thetas[n])
        for a, v in zip(states[n + 1].alphabet, eps):
            out.add(n, "eps", float(v), a)
        out.add(n, "eps_norm", norm)
    return out
