"""Directed-dyad panels: agents, ordered-pair outcomes, coordinate bookkeeping.

A panel stores each observed ordered pair ``(i, j)``, ``i != j``, exactly
once. Diagonal entries are never stored. Dyads are kept in a canonical
order determined by covariate and outcome *values*, never by agent labels,
so every downstream sum is unchanged by relabeling agents.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import BadRange, DataError, DuplicateDyad, SelfLoop, UnknownAgent

__all__ = [
    "AgentTable",
    "DyadPanel",
    "SubvectorSpec",
    "Partition",
    "build_panel",
    "subvector_values",
    "make_grid",
    "read_agents_csv",
    "read_dyads_csv",
    "read_panel",
    "write_panel",
]


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class AgentTable:
    """Agent identifiers and their ``N x K`` covariate matrix."""

    ids: tuple
    covariates: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.covariates, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise DataError("covariates must be an N x K matrix")
        ids = tuple(self.ids)
        if len(ids) != X.shape[0]:
            raise DataError(f"{len(ids)} agent ids for {X.shape[0]} covariate rows")
        if X.shape[0] < 2:
            raise DataError("a panel needs at least two agents")
        if X.shape[1] < 1:
            raise DataError("covariate dimension K must be at least 1")
        if not np.all(np.isfinite(X)):
            raise DataError("covariates must be finite")
        if len(set(ids)) != len(ids):
            raise DataError("agent identifiers must be unique")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "covariates", _frozen(X))

    @classmethod
    def from_array(cls, X, ids=None):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if ids is None:
            ids = range(1, X.shape[0] + 1)
        return cls(tuple(ids), X)

    @property
    def N(self) -> int:
        return self.covariates.shape[0]

    @property
    def K(self) -> int:
        return self.covariates.shape[1]

    def index_of(self, agent_id) -> int:
        try:
            return self._lookup[agent_id]
        except KeyError:
            raise UnknownAgent(f"unknown agent id {agent_id!r}") from None

    @property
    def _lookup(self):
        # cached lazily; the dataclass is frozen so go through __dict__
        d = self.__dict__.get("_lookup_cache")
        if d is None:
            d = {a: k for k, a in enumerate(self.ids)}
            self.__dict__["_lookup_cache"] = d
        return d


@dataclass(frozen=True, eq=False)
class DyadPanel:
    """Outcomes ``Y_ij`` over observed ordered pairs of an :class:`AgentTable`.

    ``i`` and ``j`` hold agent *positions* (rows of ``agents.covariates``),
    ``y`` the outcomes, all in canonical order. Use :func:`build_panel`
    rather than constructing this directly.
    """

    agents: AgentTable
    i: np.ndarray
    j: np.ndarray
    y: np.ndarray

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def N(self) -> int:
        return self.agents.N

    @property
    def K(self) -> int:
        return self.agents.K

    @property
    def X(self) -> np.ndarray:
        return self.agents.covariates

    @property
    def y_order(self) -> np.ndarray:
        """Stable argsort of ``y`` (cached)."""
        order = self.__dict__.get("_y_order")
        if order is None:
            order = np.argsort(self.y, kind="stable")
            order.setflags(write=False)
            self.__dict__["_y_order"] = order
        return order

    @property
    def complete(self) -> bool:
        return self.n == self.N * (self.N - 1)

    def pairs(self) -> Iterator[tuple]:
        """Yield ``(id_i, id_j, y_ij)`` for every stored dyad."""
        ids = self.agents.ids
        for a, b, v in zip(self.i.tolist(), self.j.tolist(), self.y.tolist()):
            yield ids[a], ids[b], v

    def records(self) -> list:
        return list(self.pairs())


@dataclass(frozen=True)
class SubvectorSpec:
    """Ordered coordinate indices selecting ``W`` within ``X``."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(int(k) for k in self.indices)
        if not idx:
            raise ValueError("a subvector needs at least one coordinate")
        if len(set(idx)) != len(idx):
            raise ValueError(f"repeated coordinate in subvector {idx}")
        if min(idx) < 0:
            raise ValueError(f"negative coordinate in subvector {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def dim(self) -> int:
        return len(self.indices)

    def check(self, K: int) -> None:
        if max(self.indices) >= K:
            raise ValueError(f"subvector {self.indices} out of range for K={K}")

    @classmethod
    def full(cls, K: int) -> "SubvectorSpec":
        return cls(tuple(range(K)))


@dataclass(frozen=True)
class Partition:
    """Split of the covariate coordinates into an ``X0`` and an ``X1`` block."""

    x0: tuple = field(default=())
    x1: tuple = field(default=())

    def __post_init__(self):
        x0 = tuple(sorted(int(k) for k in self.x0))
        x1 = tuple(sorted(int(k) for k in self.x1))
        if not x1:
            raise ValueError("the X1 block must be nonempty")
        if set(x0) & set(x1):
            raise ValueError(f"X0 {x0} and X1 {x1} overlap")
        if len(set(x0)) != len(x0) or len(set(x1)) != len(x1):
            raise ValueError("repeated coordinate in partition")
        if sorted(x0 + x1) != list(range(len(x0) + len(x1))):
            raise ValueError(f"X0 {x0} and X1 {x1} do not cover 0..K-1")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "x1", x1)

    @property
    def K(self) -> int:
        return len(self.x0) + len(self.x1)

    @classmethod
    def all_x1(cls, K: int) -> "Partition":
        return cls((), tuple(range(K)))

    @classmethod
    def from_x0(cls, x0: Sequence[int], K: int) -> "Partition":
        x0 = tuple(int(k) for k in x0)
        return cls(x0, tuple(k for k in range(K) if k not in x0))


def build_panel(agents: AgentTable, outcome_records: Iterable) -> DyadPanel:
    """Assemble a panel from ``(i, j, y)`` records keyed by agent id.

    Raises
    ------
    SelfLoop, UnknownAgent, DuplicateDyad, DataError
        ``record`` on the exception holds the zero-based record position.
    """
    ii, jj, yy = [], [], []
    seen = set()
    for r, (a, b, v) in enumerate(outcome_records):
        if a == b:
            raise SelfLoop(f"self-loop dyad ({a!r}, {b!r})", record=r)
        try:
            p, q = agents.index_of(a), agents.index_of(b)
        except UnknownAgent as err:
            err.record = r
            raise
        if (p, q) in seen:
            raise DuplicateDyad(f"dyad ({a!r}, {b!r}) appears twice", record=r)
        v = float(v)
        if not np.isfinite(v):
            raise DataError(f"non-finite outcome for dyad ({a!r}, {b!r})", record=r)
        seen.add((p, q))
        ii.append(p)
        jj.append(q)
        yy.append(v)
    if not yy:
        raise DataError("a panel needs at least one dyad")
    return _assemble(agents, np.array(ii, dtype=np.intp), np.array(jj, dtype=np.intp),
                     np.array(yy, dtype=float))


def _assemble(agents, i, j, y) -> DyadPanel:
    X = agents.covariates
    # np.lexsort: last key is primary -> sort by X_i, then X_j, then y
    keys = [y] + [X[j, k] for k in reversed(range(agents.K))] \
        + [X[i, k] for k in reversed(range(agents.K))]
    order = np.lexsort(keys)
    return DyadPanel(agents, _frozen(i[order], np.intp), _frozen(j[order], np.intp),
                     _frozen(y[order]))


def complete_panel(agents: AgentTable, Y: np.ndarray) -> DyadPanel:
    """Panel from an ``N x N`` outcome matrix; the diagonal is ignored."""
    Y = np.asarray(Y, dtype=float)
    N = agents.N
    if Y.shape != (N, N):
        raise DataError(f"outcome matrix must be {N}x{N}, got {Y.shape}")
    i, j = np.nonzero(~np.eye(N, dtype=bool))
    y = Y[i, j]
    if not np.all(np.isfinite(y)):
        raise DataError("outcomes must be finite")
    return _assemble(agents, i.astype(np.intp), j.astype(np.intp), y)


def subvector_values(panel: DyadPanel, spec: SubvectorSpec, agent: int) -> np.ndarray:
    """W-coordinates of agent ``agent`` (a row position), in ``spec`` order."""
    spec.check(panel.K)
    if not 0 <= int(agent) < panel.N:
        raise UnknownAgent(f"agent index {agent} out of range for N={panel.N}")
    return panel.X[int(agent), list(spec.indices)].copy()


def make_grid(lo: float, hi: float, count: int, mode: str = "equispaced",
              seed=None) -> np.ndarray:
    """Sorted evaluation grid on ``[lo, hi]``.

    ``mode="equispaced"`` includes both endpoints; ``mode="uniform-random"``
    draws ``count`` uniform points from a generator seeded with ``seed``.
    """
    if not lo < hi:
        raise BadRange(f"grid needs lo < hi, got [{lo}, {hi}]")
    if count < 1:
        raise BadRange(f"grid needs at least one point, got {count}")
    if mode == "equispaced":
        if count == 1:
            return np.array([0.5 * (lo + hi)])
        return np.linspace(lo, hi, count)
    if mode == "uniform-random":
        rng = np.random.default_rng(seed)
        return np.sort(rng.uniform(lo, hi, count))
    raise ValueError(f"unknown grid mode {mode!r}")


# -- CSV ---------------------------------------------------------------------

def _parse_ids(raw):
    try:
        return [int(s) for s in raw]
    except ValueError:
        return list(raw)


def read_agents_csv(path) -> AgentTable:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or rows[0][0].strip() != "agent_id":
        raise DataError(f"{path}: header must start with 'agent_id'")
    K = len(rows[0]) - 1
    raw_ids, X = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != K + 1:
            raise DataError(f"{path}:{lineno}: expected {K + 1} fields, got {len(row)}")
        raw_ids.append(row[0].strip())
        try:
            X.append([float(s) for s in row[1:]])
        except ValueError as err:
            raise DataError(f"{path}:{lineno}: {err}") from None
    try:
        return AgentTable(tuple(_parse_ids(raw_ids)), np.array(X, dtype=float).reshape(-1, K))
    except DataError as err:
        raise DataError(f"{path}: {err}") from None


def read_dyads_csv(path, agents: AgentTable | None = None) -> list:
    """Records ``(i, j, y)`` from a dyads CSV. Ids are coerced to the
    agent table's id type when ``agents`` is given."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [s.strip() for s in rows[0]] != ["i", "j", "y"]:
        raise DataError(f"{path}: header must be 'i,j,y'")
    as_int = agents is not None and all(isinstance(a, int) for a in agents.ids)
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise DataError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
        a, b = row[0].strip(), row[1].strip()
        try:
            if as_int:
                a, b = int(a), int(b)
            out.append((a, b, float(row[2])))
        except ValueError as err:
            raise DataError(f"{path}:{lineno}: {err}") from None
    return out


def read_panel(agents_path, dyads_path) -> DyadPanel:
    agents = read_agents_csv(agents_path)
    records = read_dyads_csv(dyads_path, agents)
    # data rows may skip blank lines; map record positions back to file lines
    lines = _record_lines(dyads_path)
    try:
        return build_panel(agents, records)
    except DataError as err:
        where = f":{lines[err.record]}" if err.record is not None else ""
        raise type(err)(f"{dyads_path}{where}: {err}", record=err.record) from None


def _record_lines(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return [k for k, row in enumerate(csv.reader(fh), start=1) if row and k > 1]


def write_panel(panel: DyadPanel, agents_path, dyads_path) -> None:
    K = panel.K
    with open(agents_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["agent_id"] + [f"x_{k + 1}" for k in range(K)])
        for a, row in zip(panel.agents.ids, panel.X.tolist()):
            w.writerow([a] + [repr(v) for v in row])
    with open(dyads_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "y"])
        for a, b, v in panel.pairs():
            w.writerow([a, b, repr(v)])
