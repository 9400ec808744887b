# -*- coding: utf-8 -*-
"""
Preference transfer from T-edges to B-edges.

Every region edge is described by the centroid distance of its regions and
the Cartesian product of their top-k road types. Similar edges (reSim above
the amr threshold) are joined in a sparse similarity graph, and the learned
T-edge preferences are spread over it by solving, for each feature column x,

    (S + mu1 * L + mu2 * I) Y_hat[:, x] = S Y[:, x]

with L = D - M the unnormalized Laplacian of the similarity matrix M and S
the diagonal selector of T-edge rows. The system is symmetric positive
definite for mu2 > 0 and is solved with Jacobi-preconditioned conjugate
gradient.
"""

import time
from collections import Counter
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import cg

from .monitoring import pipeline_stats, solver_monitor
from .netmodel import RoadType
from .parallel import SEQUENTIAL
from .preference import FeatureSpace, PreferenceVector
from .utils import equirectangular_distance, is_debug_enabled, is_debug_solver_enabled

DEFAULT_AMR = 0.7
DEFAULT_MU1 = 1.0
DEFAULT_MU2 = 0.01
DEFAULT_TOP_K = 2
SOLVER_TOL = 1e-10
ACCEPT_RESIDUAL = 1e-6
SOLVER_MAXITER = 1000
NULL_EPSILON = 1e-9

_PAIR_COUNT = len(RoadType) * len(RoadType)
_ROW_BLOCK = 1024


class TransferSolverError(RuntimeError):
    """Conjugate gradient did not reach the acceptance residual."""

    def __init__(self, message, residual=None, column=None):
        self.residual = residual
        self.column = column
        super().__init__(message)


class SingularSystemError(TransferSolverError):
    """The transfer system has no unique solution with the given parameters."""


@dataclass(frozen=True)
class RegionEdgeFeatures:
    dis: float
    pairs: frozenset

    def to_dict(self):
        return {"dis": self.dis, "F": sorted([int(a), int(b)] for a, b in self.pairs)}

    @classmethod
    def from_dict(cls, data):
        return cls(float(data["dis"]), frozenset((RoadType(a), RoadType(b)) for a, b in data["F"]))


def region_top_types(net, region, k):
    """
    Top-k road types of all road edges incident to a region's members.

    Ties go to the lower road type ordinal.
    """
    incident = set()
    for v in region.members:
        incident.update(net.out_edges(v))
        incident.update(net.in_edges(v))
    counts = Counter(net.edges[e].road_type for e in incident)
    ranked = sorted(counts, key=lambda rt: (-counts[rt], int(rt)))
    return tuple(ranked[:k])


def region_edge_features(model, re, k, net):
    """
    Features of one region edge.

    Args:
        model (RegionGraphModel): Region graph
        re (RegionEdge): Region edge
        k (int): Road types kept per region
        net (RoadNetwork): Road network

    Returns:
        RegionEdgeFeatures: Centroid distance in meters and ordered road-type pairs
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    a = model.region(re.from_region)
    b = model.region(re.to_region)
    dis = equirectangular_distance(a.centroid[0], a.centroid[1], b.centroid[0], b.centroid[1])
    pairs = frozenset(product(region_top_types(net, a, k), region_top_types(net, b, k)))
    return RegionEdgeFeatures(float(dis), pairs)


def re_sim(f_i, f_j):
    """
    Similarity of two region edges in [0, 2].

    Distance ratio min/max (1 when both distances are 0) plus the Jaccard
    similarity of the road-type pair sets (0 when both are empty).
    """
    lo, hi = sorted((f_i.dis, f_j.dis))
    ratio = 1.0 if hi == 0 else lo / hi
    union = f_i.pairs | f_j.pairs
    jaccard = len(f_i.pairs & f_j.pairs) / len(union) if union else 0.0
    return ratio + jaccard


def _pair_matrix(features):
    encoded = np.zeros((len(features), _PAIR_COUNT), dtype=np.float64)
    for row, f in enumerate(features):
        for a, b in f.pairs:
            encoded[row, (int(a) - 1) * len(RoadType) + (int(b) - 1)] = 1.0
    return encoded


def build_adjacency(features, amr):
    """
    Sparse similarity matrix keeping reSim values strictly above amr.

    Rows are computed in blocks with dense numpy arithmetic.

    Returns:
        scipy.sparse.csr_matrix: Symmetric n x n matrix with zero diagonal
    """
    n = len(features)
    dis = np.array([f.dis for f in features], dtype=np.float64)
    encoded = _pair_matrix(features)
    sizes = encoded.sum(axis=1)

    rows, cols, vals = [], [], []
    for start in range(0, n, _ROW_BLOCK):
        stop = min(start + _ROW_BLOCK, n)
        lo = np.minimum(dis[start:stop, None], dis[None, :])
        hi = np.maximum(dis[start:stop, None], dis[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(hi == 0, 1.0, lo / hi)
            inter = encoded[start:stop] @ encoded.T
            union = sizes[start:stop, None] + sizes[None, :] - inter
            jaccard = np.where(union > 0, inter / union, 0.0)
        sim = ratio + jaccard
        local = np.arange(stop - start)
        sim[local, local + start] = 0.0
        r, c = np.nonzero(sim > amr)
        rows.append(r + start)
        cols.append(c)
        vals.append(sim[r, c])

    if n == 0:
        return sparse.csr_matrix((0, 0))
    return sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def build_seed_matrix(edges, feature_space):
    """
    Seed matrix Y: one row per region edge.

    T-edge rows have 1 at the master column and at the slave column (if
    any); B-edge rows are zero.

    Raises:
        ValueError: If a T-edge has no learned preference, or one outside the feature space
    """
    y = np.zeros((len(edges), feature_space.p), dtype=np.float64)
    for row, edge in enumerate(edges):
        if not edge.is_t_edge:
            continue
        vector = edge.preference
        if vector is None:
            raise ValueError(f"T-edge {edge.edge_id} has no learned preference")
        if not feature_space.contains(vector):
            raise ValueError(f"T-edge {edge.edge_id} preference {vector} is outside the feature space")
        y[row, feature_space.cost_column(vector.master)] = 1.0
        if vector.slave is not None:
            y[row, feature_space.condition_column(vector.slave)] = 1.0
    return y


@dataclass
class TransferSystem:
    """Similarity matrix, seeds and parameters of one transfer problem."""
    M: object
    Y: np.ndarray
    s: np.ndarray
    mu1: float = DEFAULT_MU1
    mu2: float = DEFAULT_MU2
    amr: float = DEFAULT_AMR
    edges: list = field(default_factory=list)

    @property
    def n(self):
        return self.M.shape[0]

    @property
    def p(self):
        return self.Y.shape[1]

    @property
    def degrees(self):
        return np.asarray(self.M.sum(axis=1)).ravel()

    @property
    def laplacian(self):
        return (sparse.diags(self.degrees) - self.M).tocsr()

    @property
    def operator(self):
        n = self.n
        return (sparse.diags(self.s) + self.mu1 * self.laplacian + self.mu2 * sparse.identity(n)).tocsr()


def build_transfer_system(net, model, feature_space=None, amr=DEFAULT_AMR, mu1=DEFAULT_MU1,
                          mu2=DEFAULT_MU2, k=DEFAULT_TOP_K):
    """
    Assemble the transfer system for a region graph.

    Edges are ordered T-edges first, then B-edges, each by edge id. Features
    are stored on the edges.
    """
    feature_space = feature_space or FeatureSpace()
    edges = sorted(model.edges, key=lambda e: (not e.is_t_edge, e.edge_id))
    for edge in edges:
        edge.features = region_edge_features(model, edge, k, net)
    M = build_adjacency([e.features for e in edges], amr)
    Y = build_seed_matrix(edges, feature_space)
    s = np.array([1.0 if e.is_t_edge else 0.0 for e in edges])
    return TransferSystem(M=M, Y=Y, s=s, mu1=mu1, mu2=mu2, amr=amr, edges=edges)


def check_solvable(system):
    """
    Raise SingularSystemError when the operator is singular.

    With mu2 = 0, every connected component of the similarity graph needs a
    T-edge (and mu1 must be positive if any B-edge exists).
    """
    if system.mu2 > 0 or system.n == 0:
        return
    unlabeled = system.s == 0
    if system.mu1 == 0 and unlabeled.any():
        raise SingularSystemError("mu1 = mu2 = 0 leaves B-edge rows undetermined; set mu2 > 0")
    count, labels = connected_components(system.M, directed=False)
    for component in range(count):
        members = labels == component
        if not (system.s[members] > 0).any():
            raise SingularSystemError(
                f"similarity component with {int(members.sum())} B-edge(s) and no T-edge "
                f"makes the system singular with mu2 = 0; set mu2 > 0"
            )


def _solve_column(A, jacobi, b, column, tol, maxiter, accept):
    norm_b = np.linalg.norm(b)
    if norm_b == 0:
        solver_monitor.record_column(column, 0, 0.0)
        return np.zeros_like(b)

    iterations = [0]

    def count(_xk):
        iterations[0] += 1

    x, _info = cg(A, b, rtol=tol, atol=0.0, maxiter=maxiter, M=jacobi, callback=count)
    residual = float(np.linalg.norm(b - A @ x) / norm_b)
    converged = residual <= accept
    solver_monitor.record_column(column, iterations[0], residual, converged)
    if not converged:
        raise TransferSolverError(
            f"conjugate gradient did not converge on column {column}: "
            f"relative residual {residual:.3e} after {iterations[0]} iterations",
            residual=residual, column=column,
        )
    return x


def solve_transfer(system, tol=SOLVER_TOL, maxiter=SOLVER_MAXITER, accept=ACCEPT_RESIDUAL,
                   runner=SEQUENTIAL):
    """
    Solve all p column systems.

    Args:
        system (TransferSystem): Assembled system
        tol (float): CG relative tolerance
        maxiter (int): CG iteration cap per column
        accept (float): Largest acceptable relative residual
        runner (ParallelRunner): Executor for the column solves

    Returns:
        np.ndarray: Y_hat, n x p

    Raises:
        SingularSystemError: If the operator is singular
        TransferSolverError: If a column misses the acceptance residual
    """
    check_solvable(system)
    if system.n == 0:
        return np.zeros((0, system.p))
    A = system.operator
    diagonal = A.diagonal()
    jacobi = sparse.diags(1.0 / diagonal).tocsr()
    rhs = system.s[:, None] * system.Y

    columns = runner.map(
        lambda x: _solve_column(A, jacobi, rhs[:, x], x, tol, maxiter, accept),
        range(system.p), label="Solve")
    if is_debug_solver_enabled():
        print(f"[DEBUG] Solved {system.p} columns, n={system.n}, nnz={system.M.nnz}")
    return np.column_stack(columns) if columns else np.zeros((system.n, 0))


def objective(system, y_hat):
    """Value of the transfer objective (seed fit + mu1 smoothness + mu2 norm) at y_hat."""
    diff = system.Y - y_hat
    L = system.laplacian
    fit = float(np.sum(system.s[:, None] * diff * diff))
    smooth = float(np.sum(y_hat * (L @ y_hat)))
    norm = float(np.sum(y_hat * y_hat))
    return fit + system.mu1 * smooth + system.mu2 * norm


def extract_preferences(y_hat, feature_space, epsilon=NULL_EPSILON):
    """
    Turn rows of Y_hat into preference vectors.

    A row entirely below epsilon is null (None). Otherwise the master is the
    argmax of the cost columns and the slave the argmax of the road-condition
    columns, or none if those are all below epsilon; ties go to list order.

    Returns:
        list[PreferenceVector or None]: One entry per row
    """
    n_cost = len(feature_space.cost_features)
    out = []
    for row in np.asarray(y_hat):
        if not (row >= epsilon).any():
            out.append(None)
            continue
        master = feature_space.cost_features[int(np.argmax(row[:n_cost]))]
        conditions = row[n_cost:]
        slave = None
        if (conditions >= epsilon).any():
            slave = feature_space.road_conditions[int(np.argmax(conditions))]
        out.append(PreferenceVector(master, slave))
    return out


def jaccard_accuracy(predicted, truth):
    """Jaccard similarity of the feature sets of two vectors (0 if predicted is None)."""
    if predicted is None:
        return 0.0
    a, b = predicted.features(), truth.features()
    return len(a & b) / len(a | b)


def transfer_preferences(net, model, feature_space=None, amr=DEFAULT_AMR, mu1=DEFAULT_MU1,
                         mu2=DEFAULT_MU2, k=DEFAULT_TOP_K, tol=SOLVER_TOL,
                         maxiter=SOLVER_MAXITER, epsilon=NULL_EPSILON, runner=SEQUENTIAL):
    """
    Transfer learned T-edge preferences to every B-edge of a model.

    T-edges keep their learned preferences; B-edges get the extracted
    preference (source "transferred") or None (source "null-fallback").

    Returns:
        dict: Transfer report (amr, mu1, mu2, n, nnz, p, iterations_per_column,
              residuals, null_rate, wall_time_ms)
    """
    feature_space = feature_space or FeatureSpace()
    started = time.perf_counter()
    solver_monitor.reset()

    system = build_transfer_system(net, model, feature_space, amr, mu1, mu2, k)
    y_hat = solve_transfer(system, tol=tol, maxiter=maxiter, runner=runner)
    vectors = extract_preferences(y_hat, feature_space, epsilon)

    b_count = 0
    nulls = 0
    for edge, vector in zip(system.edges, vectors):
        if edge.is_t_edge:
            continue
        b_count += 1
        edge.preference = vector
        edge.preference_source = "transferred" if vector is not None else "null-fallback"
        nulls += vector is None

    pipeline_stats.safe.increment('preferences_transferred', b_count - nulls)
    pipeline_stats.safe.increment('null_preferences', nulls)
    if is_debug_enabled():
        print(f"[DEBUG] Transfer: n={system.n}, nnz={system.M.nnz}, nulls={nulls}/{b_count}")

    return {
        "amr": amr,
        "mu1": mu1,
        "mu2": mu2,
        "n": system.n,
        "nnz": int(system.M.nnz),
        "p": system.p,
        "iterations_per_column": [solver_monitor.iterations_per_column.get(x, 0) for x in range(system.p)],
        "residuals": [solver_monitor.residuals.get(x, 0.0) for x in range(system.p)],
        "null_rate": (nulls / b_count) if b_count else 0.0,
        "wall_time_ms": (time.perf_counter() - started) * 1000.0,
    }


@dataclass
class HoldoutResult:
    accuracy: float
    null_rate: float
    nnz: int
    seeds: int
    reserved: int

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "null_rate": self.null_rate,
            "nnz": self.nnz,
            "seeds": self.seeds,
            "reserved": self.reserved,
        }


@dataclass
class _HoldoutEdge:
    is_t_edge: bool
    preference: object
    edge_id: int = 0


def transfer_holdout(features, preferences, feature_space=None, train_partitions=4, seed=0,
                     amr=DEFAULT_AMR, mu1=DEFAULT_MU1, mu2=DEFAULT_MU2, epsilon=NULL_EPSILON):
    """
    Hold-out accuracy of the transfer on T-edges with known preferences.

    T-edges are shuffled into 5 partitions; the last is reserved as ground
    truth and treated as unlabeled, the first train_partitions are seeds.
    Accuracy is the mean Jaccard similarity of predicted and true feature
    sets over the reserved edges (null predictions score 0).

    Args:
        features (list[RegionEdgeFeatures]): T-edge features
        preferences (list[PreferenceVector]): Learned T-edge preferences
        feature_space (FeatureSpace): Feature columns
        train_partitions (int): 1..4 seed partitions
        seed (int): Shuffle seed

    Returns:
        HoldoutResult: Accuracy, null rate, matrix nonzeros, edge counts

    Raises:
        ValueError: With fewer than 5 T-edges or train_partitions outside 1..4
    """
    feature_space = feature_space or FeatureSpace()
    if len(features) != len(preferences):
        raise ValueError("features and preferences must have the same length")
    if len(features) < 5:
        raise ValueError("hold-out needs at least 5 T-edges")
    if not 1 <= train_partitions <= 4:
        raise ValueError("train_partitions must be between 1 and 4")

    rng = np.random.default_rng(seed)
    partitions = np.array_split(rng.permutation(len(features)), 5)
    train = np.concatenate(partitions[:train_partitions])
    reserved = partitions[4]

    order = [int(i) for i in train] + [int(i) for i in reserved]
    edges = [_HoldoutEdge(True, preferences[i], i) for i in train] + \
            [_HoldoutEdge(False, None, int(i)) for i in reserved]
    M = build_adjacency([features[i] for i in order], amr)
    Y = build_seed_matrix(edges, feature_space)
    s = np.array([1.0 if e.is_t_edge else 0.0 for e in edges])
    system = TransferSystem(M=M, Y=Y, s=s, mu1=mu1, mu2=mu2, amr=amr, edges=edges)

    y_hat = solve_transfer(system)
    predicted = extract_preferences(y_hat[len(train):], feature_space, epsilon)
    truth = [preferences[int(i)] for i in reserved]
    scores = [jaccard_accuracy(p, t) for p, t in zip(predicted, truth)]
    nulls = sum(1 for p in predicted if p is None)
    return HoldoutResult(
        accuracy=float(np.mean(scores)) if scores else 0.0,
        null_rate=nulls / len(reserved) if len(reserved) else 0.0,
        nnz=int(M.nnz),
        seeds=len(train),
        reserved=len(reserved),
    )
