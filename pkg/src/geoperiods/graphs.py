"""Bipartite multigraphs over finite probability spaces and the measure
transfer through them.

The transfer splits each left vertex's mass equally over its incident edges
(multiplicity counted) and collects it on the right side.  The sandwich
inequality bounds the transferred mass of a set B between the mass of
e^{-1}(B) and the mass of e(B).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MASS_TOL = 1e-12


class GraphError(Exception):
    pass


@dataclass
class FiniteMeasureSpace:
    points: list
    weights: np.ndarray
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.points) != len(self.weights):
            raise GraphError("points and weights length mismatch")
        if np.any(self.weights < 0):
            raise GraphError("negative weight")
        if self.weights.size and abs(self.weights.sum() - 1.0) > MASS_TOL:
            raise GraphError(f"weights sum to {self.weights.sum()}, not 1")
        self.index = {p: i for i, p in enumerate(self.points)}

    @staticmethod
    def uniform(points) -> "FiniteMeasureSpace":
        points = list(points)
        n = len(points)
        return FiniteMeasureSpace(points, np.full(n, 1.0 / n))

    def mass(self, subset) -> float:
        return float(sum(self.weights[self.index[p]] for p in subset))


@dataclass
class BipartiteGraph:
    """Multigraph between index ranges [0, nx) and [0, ny).

    edges is an integer array of shape (E, 2): (x index, y index); repeated
    rows are parallel edges and count toward degrees and the transfer.
    """

    nx: int
    ny: int
    edges: np.ndarray

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if self.edges.size:
            if self.edges[:, 0].min() < 0 or self.edges[:, 0].max() >= self.nx:
                raise GraphError("x index out of range")
            if self.edges[:, 1].min() < 0 or self.edges[:, 1].max() >= self.ny:
                raise GraphError("y index out of range")
        self.deg_x = np.bincount(self.edges[:, 0], minlength=self.nx)
        self.deg_y = np.bincount(self.edges[:, 1], minlength=self.ny)

    def neighbors_of_x(self, xi: int) -> set:
        if not 0 <= xi < self.nx:
            raise GraphError(f"unknown x vertex {xi}")
        return set(self.edges[self.edges[:, 0] == xi, 1].tolist())

    def neighbors_of_y(self, yi: int) -> set:
        if not 0 <= yi < self.ny:
            raise GraphError(f"unknown y vertex {yi}")
        return set(self.edges[self.edges[:, 1] == yi, 0].tolist())


def neighbors(G: BipartiteGraph, side: str, i: int) -> set:
    if side == "x":
        return G.neighbors_of_x(i)
    if side == "y":
        return G.neighbors_of_y(i)
    raise GraphError(f"side must be 'x' or 'y', got {side!r}")


def e_of_set(G: BipartiteGraph, side: str, subset) -> set:
    out = set()
    for i in subset:
        out |= neighbors(G, side, i)
    return out


def e_inverse(G: BipartiteGraph, B) -> set:
    """x vertices all of whose neighbors lie in B (isolated x excluded)."""
    B = set(B)
    out = set()
    for xi in range(G.nx):
        if G.deg_x[xi] == 0:
            continue
        if G.neighbors_of_x(xi) <= B:
            out.add(xi)
    return out


def g_transform(G: BipartiteGraph, mu: np.ndarray) -> np.ndarray:
    """Push mu on X through the graph: each x spreads mu(x)/deg(x) per edge."""
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (G.nx,):
        raise GraphError("measure dimension mismatch")
    positive_isolated = (mu > 0) & (G.deg_x == 0)
    if positive_isolated.any():
        raise GraphError("isolated x vertex carries positive mass")
    with np.errstate(divide="ignore", invalid="ignore"):
        share = np.where(G.deg_x > 0, mu / np.maximum(G.deg_x, 1), 0.0)
    out = np.zeros(G.ny)
    np.add.at(out, G.edges[:, 1], share[G.edges[:, 0]])
    return out


def sandwich_check(G: BipartiteGraph, mu: np.ndarray, B) -> tuple[float, float, float]:
    """(mu(e^{-1}(B)), G(mu)(B), mu(e(B))); the middle is always sandwiched."""
    B = set(B)
    gm = g_transform(G, mu)
    value = float(sum(gm[yi] for yi in B))
    lower = float(sum(mu[xi] for xi in e_inverse(G, B)))
    upper = float(sum(mu[xi] for xi in e_of_set(G, "y", B)))
    return lower, value, upper
