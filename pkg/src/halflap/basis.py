"""Discrete domains, interior grids, quadrature, and the Dirichlet sine eigenbasis.

Domains are intervals (0, L) or axis-aligned rectangles (0, L1) x (0, L2) with a
uniform grid of interior nodes i*h, i = 1..N-1, h = L/N per axis. Endpoints are
excluded and every node carries the flat quadrature weight h (or h1*h2). On such
grids the sampled sine eigenfunctions are exactly discretely orthonormal, which
keeps every downstream operator identity exactly testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MIN_GRID_COUNT = 8


class DomainError(ValueError):
    """Invalid domain construction parameters."""


class DomainMismatchError(ValueError):
    """Operands live on different domains or bases."""


class AliasingError(ValueError):
    """Requested mode count exceeds what the grid can represent."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class DiscreteDomain:
    """Interval or rectangle with a uniform interior grid.

    kind is "interval" or "rectangle"; lengths and grid_counts hold one entry
    per axis. Axis a has grid_counts[a] subdivisions, so its interior nodes sit
    at i * lengths[a] / grid_counts[a] for i = 1..grid_counts[a]-1.
    """

    kind: str
    lengths: tuple[float, ...]
    grid_counts: tuple[int, ...]

    def __post_init__(self):
        expected = {"interval": 1, "rectangle": 2}.get(self.kind)
        if expected is None:
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if len(self.lengths) != expected or len(self.grid_counts) != expected:
            raise DomainError(f"{self.kind} needs {expected} length(s) and grid count(s)")
        if not all(math.isfinite(L) and L > 0 for L in self.lengths):
            raise DomainError("all side lengths must be positive and finite")
        if not all(isinstance(N, int) and N >= MIN_GRID_COUNT for N in self.grid_counts):
            raise DomainError(f"all grid counts must be integers >= {MIN_GRID_COUNT}")

    @property
    def n(self) -> int:
        """Space dimension (1 or 2)."""
        return len(self.lengths)

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple(L / N for L, N in zip(self.lengths, self.grid_counts))

    @property
    def weight(self) -> float:
        """Quadrature weight per interior node: the product of grid spacings."""
        return math.prod(self.spacings)

    @property
    def shape(self) -> tuple[int, ...]:
        """Interior node count per axis."""
        return tuple(N - 1 for N in self.grid_counts)

    @property
    def num_nodes(self) -> int:
        return math.prod(self.shape)

    def axis_nodes(self, axis: int) -> np.ndarray:
        """Interior node coordinates along one axis."""
        L, N = self.lengths[axis], self.grid_counts[axis]
        return np.arange(1, N) * (L / N)

    def node_coords(self) -> np.ndarray:
        """Coordinates of all interior nodes, shape (num_nodes, n), C order."""
        axes = [self.axis_nodes(a) for a in range(self.n)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)


def make_interval(L: float, N: int) -> DiscreteDomain:
    """Interval (0, L) with N subdivisions, hence N-1 interior nodes."""
    return DiscreteDomain("interval", (float(L),), (int(N),))


def make_rectangle(L1: float, L2: float, N1: int, N2: int) -> DiscreteDomain:
    """Rectangle (0, L1) x (0, L2) with (N1-1)(N2-1) interior nodes."""
    return DiscreteDomain("rectangle", (float(L1), float(L2)), (int(N1), int(N2)))


@dataclass(frozen=True)
class GridFn:
    """Function values sampled at the interior nodes of a domain.

    values is stored flat in C order over the node grid; a 2D array shaped like
    domain.shape is accepted and flattened.
    """

    domain: DiscreteDomain
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape == self.domain.shape or vals.shape == (self.domain.num_nodes,):
            vals = vals.reshape(-1)
        else:
            raise DomainMismatchError(
                f"value count {vals.size} does not match the {self.domain.num_nodes} interior nodes"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite")
        object.__setattr__(self, "values", _freeze(vals))

    def reshaped(self) -> np.ndarray:
        """Values as an array shaped like the node grid."""
        return self.values.reshape(self.domain.shape)


@dataclass(frozen=True)
class EigenBasis:
    """Ordered Dirichlet eigenpairs sampled on the grid, discretely orthonormal.

    lambdas are nondecreasing; mode_indices holds the per-axis sine indices of
    each eigenfunction; matrix stacks the sampled eigenfunctions row by row for
    fast projection and synthesis.
    """

    domain: DiscreteDomain
    K: int
    lambdas: np.ndarray
    sqrt_lambdas: np.ndarray
    mode_indices: tuple[tuple[int, ...], ...]
    matrix: np.ndarray

    @property
    def modes(self) -> tuple[GridFn, ...]:
        """The eigenfunctions as GridFns."""
        return tuple(GridFn(self.domain, row) for row in self.matrix)


def _axis_modes(domain: DiscreteDomain, axis: int, count: int) -> np.ndarray:
    """Rows j = 1..count of sqrt(2/L) * sin(j pi x / L) on the interior nodes."""
    L = domain.lengths[axis]
    x = domain.axis_nodes(axis)
    j = np.arange(1, count + 1)
    return np.sqrt(2.0 / L) * np.sin(np.outer(j, x) * (np.pi / L))


def eigenpairs(domain: DiscreteDomain, K: int) -> EigenBasis:
    """First K Dirichlet eigenpairs of the domain.

    Interval (0, L): lambda_k = (k pi / L)^2 with mode sqrt(2/L) sin(k pi x / L).
    Rectangle: tensor products, eigenvalues summed per axis, sorted ascending
    with lexicographic (j, k) tie-break. Requires K <= min(grid_counts) - 1;
    higher sine indices alias on the grid (mode N vanishes identically).
    """
    K = int(K)
    if K < 1:
        raise DomainError("mode count K must be at least 1")
    if K >= min(domain.grid_counts):
        raise AliasingError(
            f"K = {K} aliases on a grid with min(grid_counts) = {min(domain.grid_counts)}; "
            f"need K <= {min(domain.grid_counts) - 1}"
        )
    if domain.n == 1:
        L = domain.lengths[0]
        ks = np.arange(1, K + 1)
        lambdas = (ks * np.pi / L) ** 2
        matrix = _axis_modes(domain, 0, K)
        indices = tuple((int(k),) for k in ks)
    else:
        (L1, L2), (N1, N2) = domain.lengths, domain.grid_counts
        j = np.arange(1, N1)
        k = np.arange(1, N2)
        lam = (j[:, None] * np.pi / L1) ** 2 + (k[None, :] * np.pi / L2) ** 2
        order = sorted(
            ((lam[a, b], a + 1, b + 1) for a in range(N1 - 1) for b in range(N2 - 1))
        )[:K]
        lambdas = np.array([t[0] for t in order])
        indices = tuple((t[1], t[2]) for t in order)
        rows1 = _axis_modes(domain, 0, max(t[1] for t in order))
        rows2 = _axis_modes(domain, 1, max(t[2] for t in order))
        matrix = np.array([np.outer(rows1[a - 1], rows2[b - 1]).ravel() for _, a, b in order])
    return EigenBasis(
        domain=domain,
        K=K,
        lambdas=_freeze(lambdas),
        sqrt_lambdas=_freeze(np.sqrt(lambdas)),
        mode_indices=indices,
        matrix=_freeze(matrix),
    )


def boundary_distance(domain: DiscreteDomain) -> GridFn:
    """Distance from each interior node to the domain boundary."""
    coords = domain.node_coords()
    per_axis = np.minimum(coords, np.asarray(domain.lengths) - coords)
    return GridFn(domain, per_axis.min(axis=1))


def inner_product(u: GridFn, w: GridFn) -> float:
    """Discrete L2 pairing: sum of products times the quadrature weight."""
    if u.domain != w.domain:
        raise DomainMismatchError("inner_product operands must share a domain")
    return float(u.values @ w.values * u.domain.weight)
