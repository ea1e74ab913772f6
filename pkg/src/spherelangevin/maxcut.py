"""Max-Cut instances: parsing, cut evaluation, rounding, and small oracles.

Sign conventions live here and nowhere else.  The graph's adjacency matrix
is A_G; the solver's cost matrix is A = -A_G, so that maximizing <x, A x>
over spherical factors relaxes the cut problem and the Langevin chain can
minimize F(x) = -<x, A x>.  A cut's weight is the total weight of edges
whose endpoints get different signs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GraphFormatError, ShapeMismatchError
from .geometry import PointOnM
from .objective import SymmetricCostMatrix

__all__ = [
    "CutAssignment",
    "GraphInstance",
    "parse_graph",
    "load_graph",
    "serialize_graph",
    "cut_value",
    "gw_round",
    "brute_force_maxcut",
    "CutReport",
    "bm_cut_report",
]

_BRUTE_LIMIT = 24


class CutAssignment:
    """Vertex signs in {-1, +1}, one per vertex."""

    __slots__ = ("signs",)

    def __init__(self, signs):
        arr = np.asarray(signs, dtype=np.int64).copy()
        if arr.ndim != 1 or arr.shape[0] < 1:
            raise ValueError("signs must be a non-empty 1-d sequence")
        if not np.all(np.abs(arr) == 1):
            raise ValueError("signs must all be -1 or +1")
        arr.setflags(write=False)
        self.signs = arr

    def __len__(self):
        return self.signs.shape[0]

    def __neg__(self):
        return CutAssignment(-self.signs)

    def __eq__(self, other):
        return (isinstance(other, CutAssignment)
                and np.array_equal(self.signs, other.signs))

    def as_tuple(self):
        return tuple(int(s) for s in self.signs)

    def __repr__(self):
        return "CutAssignment(%r)" % (self.as_tuple(),)


class GraphInstance:
    """A weighted undirected graph with 1-based edges i < j."""

    __slots__ = ("n", "m", "edges", "_ei", "_ej", "_w")

    def __init__(self, n, edges):
        n = int(n)
        if n < 1:
            raise ValueError("graph needs at least one vertex")
        seen = set()
        clean = []
        for i, j, w in edges:
            i = int(i)
            j = int(j)
            w = float(w)
            if not (1 <= i < j <= n):
                raise ValueError(
                    "edge (%d, %d) out of range: need 1 <= i < j <= %d"
                    % (i, j, n))
            if not math.isfinite(w):
                raise ValueError("edge (%d, %d) has non-finite weight" % (i, j))
            if (i, j) in seen:
                raise ValueError("duplicate edge (%d, %d)" % (i, j))
            seen.add((i, j))
            clean.append((i, j, w))
        clean.sort()
        self.n = n
        self.m = len(clean)
        self.edges = tuple(clean)
        self._ei = np.asarray([e[0] - 1 for e in clean], dtype=np.int64)
        self._ej = np.asarray([e[1] - 1 for e in clean], dtype=np.int64)
        self._w = np.asarray([e[2] for e in clean], dtype=np.float64)

    def total_weight(self) -> float:
        return float(self._w.sum())

    def adjacency_matrix(self) -> SymmetricCostMatrix:
        """A_G as a symmetric cost matrix."""
        return SymmetricCostMatrix(self.n, self.edges)

    def cost_matrix(self) -> SymmetricCostMatrix:
        """The solver's A = -A_G."""
        return SymmetricCostMatrix(
            self.n, [(i, j, -w) for i, j, w in self.edges])

    def __repr__(self):
        return "GraphInstance(n=%d, m=%d)" % (self.n, self.m)


def _parse_fields(line, lineno, count, what):
    parts = line.split()
    if len(parts) != count:
        raise GraphFormatError(
            "expected %s (%d fields), got %d" % (what, count, len(parts)),
            line=lineno)
    return parts


def parse_graph(source) -> GraphInstance:
    """Read the "n m" / "i j w" edge-list format.

    source may be a string or any iterable of lines.  Indices are 1-based
    with i < j; the declared edge count must match; duplicate edges are an
    error.  Whitespace-only lines are ignored.
    """
    if isinstance(source, str):
        lines = source.splitlines()
    elif hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = [str(ln).rstrip("\r\n") for ln in source]

    numbered = [(k + 1, ln) for k, ln in enumerate(lines) if ln.strip()]
    if not numbered:
        raise GraphFormatError("empty input: missing the 'n m' header line")

    lineno, header = numbered[0]
    parts = _parse_fields(header, lineno, 2, "header 'n m'")
    try:
        n = int(parts[0])
        m = int(parts[1])
    except ValueError:
        raise GraphFormatError(
            "header fields must be integers, got %r" % header,
            line=lineno) from None
    if n < 1:
        raise GraphFormatError("vertex count must be >= 1", line=lineno)
    if m < 0:
        raise GraphFormatError("edge count must be >= 0", line=lineno)

    edges = []
    seen = set()
    for lineno, ln in numbered[1:]:
        parts = _parse_fields(ln, lineno, 3, "edge 'i j w'")
        try:
            i = int(parts[0])
            j = int(parts[1])
        except ValueError:
            raise GraphFormatError(
                "edge endpoints must be integers, got %r" % ln,
                line=lineno) from None
        try:
            w = float(parts[2])
        except ValueError:
            raise GraphFormatError(
                "edge weight must be a real number, got %r" % parts[2],
                line=lineno) from None
        if not math.isfinite(w):
            raise GraphFormatError(
                "edge weight must be finite, got %r" % parts[2], line=lineno)
        if not (1 <= i < j <= n):
            raise GraphFormatError(
                "edge (%d, %d) out of range: need 1 <= i < j <= %d"
                % (i, j, n), line=lineno)
        if (i, j) in seen:
            raise GraphFormatError(
                "duplicate edge (%d, %d)" % (i, j), line=lineno)
        seen.add((i, j))
        edges.append((i, j, w))

    if len(edges) != m:
        raise GraphFormatError(
            "declared %d edges, found %d" % (m, len(edges)))
    return GraphInstance(n, edges)


def load_graph(path) -> GraphInstance:
    with open(path, "r", encoding="ascii") as fh:
        return parse_graph(fh)


def _format_weight(w):
    if w == int(w) and abs(w) < 1e15:
        return str(int(w))
    return repr(w)


def serialize_graph(g: GraphInstance) -> str:
    """Canonical text form; parse_graph(serialize_graph(g)) == g."""
    out = ["%d %d" % (g.n, g.m)]
    for i, j, w in g.edges:
        out.append("%d %d %s" % (i, j, _format_weight(w)))
    return "\n".join(out) + "\n"


def cut_value(g: GraphInstance, cut: CutAssignment) -> float:
    """Total weight of edges whose endpoints differ in sign."""
    if len(cut) != g.n:
        raise ShapeMismatchError(
            "cut has %d signs but the graph has %d vertices"
            % (len(cut), g.n))
    s = cut.signs
    differ = s[g._ei] != s[g._ej]
    return float(g._w[differ].sum())


def gw_round(x: PointOnM, g: GraphInstance, samples: int,
             rng: np.random.Generator = None):
    """Hyperplane rounding: best of `samples` random-direction sign reads.

    Each sample draws r uniformly on the sphere and signs vertex i by
    sign<x_i, r>, with ties (a measure-zero event) sent to +1.  Returns
    (assignment, value) for the best cut, first occurrence winning ties.
    """
    if rng is None:
        raise ValueError("an explicit numpy Generator is required")
    samples = int(samples)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if x.shape.n != g.n:
        raise ShapeMismatchError(
            "embedding has %d factors but the graph has %d vertices"
            % (x.shape.n, g.n))

    r = rng.standard_normal((samples, x.shape.d + 1))
    proj = x.factors @ r.T                       # (n, samples)
    signs = np.where(proj >= 0.0, 1, -1).astype(np.int64)
    prods = signs[g._ei] * signs[g._ej]          # (m, samples)
    if g.m:
        cuts = ((1 - prods) * (0.5 * g._w[:, None])).sum(axis=0)
    else:
        cuts = np.zeros(samples)
    best = int(np.argmax(cuts))
    return CutAssignment(signs[:, best]), float(cuts[best])


def brute_force_maxcut(g: GraphInstance):
    """Exact optimum by enumerating sign patterns with vertex 1 fixed.

    Guarded at n <= 24; beyond that the 2^(n-1) sweep stops being a
    test-time oracle and starts being a mistake.
    """
    if g.n > _BRUTE_LIMIT:
        raise ValueError(
            "brute force is limited to n <= %d (got n = %d)"
            % (_BRUTE_LIMIT, g.n))
    total = 1 << (g.n - 1)
    # bit k-1 of a code is the sign of vertex k+1 (vertex 1 is bit "none")
    shifts_i = g._ei - 1
    shifts_j = g._ej - 1
    best_val = -math.inf
    best_code = 0
    chunk = 1 << 20
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        acc = np.zeros(codes.shape[0])
        for k in range(g.m):
            bi = (codes >> np.uint64(shifts_i[k])) if shifts_i[k] >= 0 \
                else np.zeros_like(codes)
            bj = (codes >> np.uint64(shifts_j[k])) if shifts_j[k] >= 0 \
                else np.zeros_like(codes)
            differ = ((bi ^ bj) & np.uint64(1)).astype(np.float64)
            acc += g._w[k] * differ
        idx = int(np.argmax(acc))
        if acc[idx] > best_val:
            best_val = float(acc[idx])
            best_code = int(codes[idx])
    signs = np.empty(g.n, dtype=np.int64)
    signs[0] = 1
    for v in range(1, g.n):
        signs[v] = -1 if (best_code >> (v - 1)) & 1 else 1
    return CutAssignment(signs), best_val


@dataclass(frozen=True)
class CutReport:
    """Quadratic relaxation value, rounded cut, and the oracle gap."""

    quadratic_value: float
    cut: CutAssignment
    cut_weight: float
    gw_samples: int
    brute_force_value: float = None
    ratio_to_optimum: float = None

    def as_dict(self) -> dict:
        out = {
            "quadratic_value": self.quadratic_value,
            "cut_signs": list(self.cut.as_tuple()),
            "cut_weight": self.cut_weight,
            "gw_samples": self.gw_samples,
        }
        if self.brute_force_value is not None:
            out["brute_force_value"] = self.brute_force_value
            out["ratio_to_optimum"] = self.ratio_to_optimum
        return out


def bm_cut_report(g: GraphInstance, x: PointOnM, samples: int,
                  rng: np.random.Generator = None,
                  oracle: bool = None) -> CutReport:
    """Round an embedding and relate it to the exact optimum when cheap.

    oracle=None runs the brute-force sweep automatically for n <= 16;
    True forces it (subject to the n <= 24 guard), False skips it.
    """
    cost = g.cost_matrix()
    ax = cost.matmat(x.factors)
    quad = float(np.einsum("ij,ij->", x.factors, ax))
    cut, weight = gw_round(x, g, samples, rng)
    if oracle is None:
        oracle = g.n <= 16
    brute_val = None
    ratio = None
    if oracle:
        _, brute_val = brute_force_maxcut(g)
        if brute_val > 0:
            ratio = weight / brute_val
    return CutReport(
        quadratic_value=quad,
        cut=cut,
        cut_weight=weight,
        gw_samples=samples,
        brute_force_value=brute_val,
        ratio_to_optimum=ratio,
    )
