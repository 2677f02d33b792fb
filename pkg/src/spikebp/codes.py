"""LDPC parity-check matrices as Tanner graphs.

Edges are stored in check-node-major order: all edges of check 0 (sorted by
variable index), then check 1, and so on. Every per-edge array used by the
decoders follows this order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "AlistError",
    "AlistParseError",
    "AlistInconsistencyError",
    "CodeConstructionError",
    "CodeSpec",
    "TannerGraph",
    "construct_regular_code",
    "has_four_cycle",
    "load_alist",
    "save_alist",
    "read_alist",
    "write_alist",
    "syndrome",
]


class CodeConstructionError(RuntimeError):
    """Random construction gave up after exhausting its restart budget."""


class AlistError(ValueError):
    pass


class AlistParseError(AlistError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AlistInconsistencyError(AlistError):
    pass


class TannerGraph:
    """Bipartite graph of ``n_cns`` check nodes and ``n_vns`` variable nodes.

    Parameters
    ----------
    n_vns, n_cns : int
        Number of variable nodes (columns of H) and check nodes (rows of H).
    rows : sequence of sequences of int
        ``rows[j]`` lists the variable nodes attached to check ``j``.

    Instances are treated as immutable; the index arrays are read-only.
    """

    def __init__(self, n_vns: int, n_cns: int, rows: Sequence[Iterable[int]]):
        if len(rows) != n_cns:
            raise ValueError(f"expected {n_cns} rows, got {len(rows)}")
        cn_list, vn_list = [], []
        for j, row in enumerate(rows):
            members = sorted(int(i) for i in row)
            if len(set(members)) != len(members):
                raise ValueError(f"check {j} lists a variable node twice")
            if members and (members[0] < 0 or members[-1] >= n_vns):
                raise ValueError(f"check {j} references a variable node outside [0, {n_vns})")
            cn_list.extend([j] * len(members))
            vn_list.extend(members)
        self.n_vns = int(n_vns)
        self.n_cns = int(n_cns)
        self.edge_cn = _frozen(np.asarray(cn_list, dtype=np.int64))
        self.edge_vn = _frozen(np.asarray(vn_list, dtype=np.int64))

    @classmethod
    def from_pcm(cls, H) -> "TannerGraph":
        """Build from a dense or scipy-sparse 0/1 parity-check matrix."""
        H = sp.csr_matrix(H)
        H.eliminate_zeros()
        H.sort_indices()
        rows = [H.indices[H.indptr[j]:H.indptr[j + 1]] for j in range(H.shape[0])]
        return cls(H.shape[1], H.shape[0], rows)

    @property
    def n_edges(self) -> int:
        return self.edge_cn.size

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.edge_cn.tolist(), self.edge_vn.tolist()))

    @cached_property
    def cn_degrees(self) -> np.ndarray:
        return _frozen(np.bincount(self.edge_cn, minlength=self.n_cns))

    @cached_property
    def vn_degrees(self) -> np.ndarray:
        return _frozen(np.bincount(self.edge_vn, minlength=self.n_vns))

    @cached_property
    def cn_ptr(self) -> np.ndarray:
        """Offsets so that edges of check ``j`` are ``cn_ptr[j]:cn_ptr[j+1]``."""
        return _frozen(np.concatenate([[0], np.cumsum(self.cn_degrees)]))

    @cached_property
    def vn_edge_order(self) -> np.ndarray:
        """Edge indices sorted by (variable node, check node)."""
        return _frozen(np.lexsort((self.edge_cn, self.edge_vn)))

    @cached_property
    def vn_ptr(self) -> np.ndarray:
        return _frozen(np.concatenate([[0], np.cumsum(self.vn_degrees)]))

    def cn_neighbors(self, j: int) -> np.ndarray:
        """M(j): sorted variable nodes of check ``j``."""
        return self.edge_vn[self.cn_ptr[j]:self.cn_ptr[j + 1]]

    def vn_neighbors(self, i: int) -> np.ndarray:
        """N(i): sorted check nodes of variable ``i``."""
        edges = self.vn_edge_order[self.vn_ptr[i]:self.vn_ptr[i + 1]]
        return self.edge_cn[edges]

    def cn_edges(self, j: int) -> np.ndarray:
        return np.arange(self.cn_ptr[j], self.cn_ptr[j + 1])

    def vn_edges(self, i: int) -> np.ndarray:
        return self.vn_edge_order[self.vn_ptr[i]:self.vn_ptr[i + 1]]

    @cached_property
    def _edge_lookup(self) -> dict[tuple[int, int], int]:
        return {e: k for k, e in enumerate(self.edges)}

    def edge_index(self, cn: int, vn: int) -> int:
        try:
            return self._edge_lookup[(int(cn), int(vn))]
        except KeyError:
            raise KeyError(f"no edge between check {cn} and variable {vn}") from None

    @cached_property
    def cn_table(self) -> np.ndarray:
        """(n_cns, max_cn_degree) edge indices, padded with ``n_edges``."""
        return _padded_table(np.arange(self.n_edges), self.cn_ptr, self.n_edges)

    @cached_property
    def vn_table(self) -> np.ndarray:
        """(n_vns, max_vn_degree) edge indices, padded with ``n_edges``."""
        return _padded_table(self.vn_edge_order, self.vn_ptr, self.n_edges)

    @cached_property
    def pcm(self) -> sp.csr_matrix:
        data = np.ones(self.n_edges, dtype=np.int8)
        return sp.csr_matrix((data, (self.edge_cn, self.edge_vn)), shape=(self.n_cns, self.n_vns))

    def to_dense(self) -> np.ndarray:
        return self.pcm.toarray().astype(np.uint8)

    def is_regular(self) -> bool:
        return bool(np.all(self.cn_degrees == self.cn_degrees[0]) and np.all(self.vn_degrees == self.vn_degrees[0]))

    def __eq__(self, other):
        if not isinstance(other, TannerGraph):
            return NotImplemented
        return (
            self.n_vns == other.n_vns
            and self.n_cns == other.n_cns
            and np.array_equal(self.edge_cn, other.edge_cn)
            and np.array_equal(self.edge_vn, other.edge_vn)
        )

    __hash__ = None

    def __repr__(self):
        return f"TannerGraph(n_vns={self.n_vns}, n_cns={self.n_cns}, n_edges={self.n_edges})"


@dataclass(frozen=True)
class CodeSpec:
    """Declared code parameters. ``rate`` uses the declared ``k``, never the PCM rank."""

    n: int
    k: int
    dv: int | None = None
    dc: int | None = None

    @property
    def rate(self) -> float:
        return self.k / self.n

    @classmethod
    def for_graph(cls, g: TannerGraph, k: int | None = None) -> "CodeSpec":
        dv = int(g.vn_degrees[0]) if g.is_regular() else None
        dc = int(g.cn_degrees[0]) if g.is_regular() else None
        return cls(n=g.n_vns, k=g.n_vns - g.n_cns if k is None else k, dv=dv, dc=dc)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _padded_table(order: np.ndarray, ptr: np.ndarray, pad: int) -> np.ndarray:
    degrees = np.diff(ptr)
    width = int(degrees.max()) if degrees.size else 0
    table = np.full((degrees.size, width), pad, dtype=np.int64)
    mask = np.arange(width) < degrees[:, None]
    table[mask] = order
    return _frozen(table)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def construct_regular_code(
    n: int,
    dv: int,
    dc: int,
    seed=None,
    max_restarts: int = 1000,
    column_retries: int = 100,
    backtrack_window: int | None = None,
) -> TannerGraph:
    """Random (dv, dc)-regular code without 4-cycles, built column by column.

    Each column draws ``dv`` distinct rows uniformly among rows whose weight is
    still below ``dc``. A draw is rejected if any two of its rows already share
    a column. After ``column_retries`` rejected draws the construction jumps
    back to a uniformly chosen earlier column and discards everything from
    there on; ``backtrack_window`` limits how far back that jump may go
    (``None`` allows any earlier column).

    Raises
    ------
    ValueError
        If the parameters are invalid or ``n*dv`` is not divisible by ``dc``.
    CodeConstructionError
        After ``max_restarts`` backtracks.
    """
    if min(n, dv, dc) < 1:
        raise ValueError("n, dv and dc must all be >= 1")
    if (n * dv) % dc:
        raise ValueError(f"n*dv = {n * dv} is not divisible by dc = {dc}")
    m = n * dv // dc
    if dv > m:
        raise CodeConstructionError(f"dv = {dv} exceeds the number of rows {m}")

    rng = np.random.default_rng(seed)
    row_weight = np.zeros(m, dtype=np.int64)
    columns: list[tuple[int, ...]] = []
    used_pairs: set[tuple[int, int]] = set()
    restarts = 0

    while len(columns) < n:
        available = np.flatnonzero(row_weight < dc)
        chosen = None
        if available.size >= dv:
            for _ in range(column_retries):
                rows = tuple(sorted(rng.choice(available, size=dv, replace=False).tolist()))
                if not any(p in used_pairs for p in combinations(rows, 2)):
                    chosen = rows
                    break
        if chosen is not None:
            columns.append(chosen)
            row_weight[list(chosen)] += 1
            used_pairs.update(combinations(chosen, 2))
            continue

        restarts += 1
        if restarts > max_restarts or not columns:
            raise CodeConstructionError(
                f"no valid column for ({n}, {dv}, {dc}) after {restarts - 1} restarts"
            )
        lo = 0 if backtrack_window is None else max(0, len(columns) - backtrack_window)
        keep = int(rng.integers(lo, len(columns)))
        for rows in columns[keep:]:
            row_weight[list(rows)] -= 1
            used_pairs.difference_update(combinations(rows, 2))
        del columns[keep:]

    rows_of: list[list[int]] = [[] for _ in range(m)]
    for col, rows in enumerate(columns):
        for r in rows:
            rows_of[r].append(col)
    return TannerGraph(n, m, rows_of)


def has_four_cycle(g: TannerGraph) -> bool:
    """True iff two checks share at least two variable nodes."""
    H = g.pcm.astype(np.int32)
    overlap = (H @ H.T).tocoo()
    off_diag = overlap.row != overlap.col
    return bool(np.any(overlap.data[off_diag] >= 2))


def syndrome(g: TannerGraph, bits) -> np.ndarray:
    """Parity of ``bits`` over every check; accepts shape (N,) or (B, N)."""
    bits = np.asarray(bits)
    if bits.shape[-1] != g.n_vns:
        raise ValueError(f"expected {g.n_vns} bits, got {bits.shape[-1]}")
    b = (bits.reshape(-1, g.n_vns) & 1).astype(np.int32)
    s = (g.pcm.astype(np.int32) @ b.T).T % 2
    return s.astype(np.uint8).reshape(bits.shape[:-1] + (g.n_cns,))


# ---------------------------------------------------------------------------
# alist I/O
# ---------------------------------------------------------------------------

def load_alist(text: str) -> TannerGraph:
    """Parse alist text (1-based indices, zero padding ignored)."""
    lines = [(no, ln.split()) for no, ln in enumerate(text.splitlines(), start=1)]
    lines = [(no, toks) for no, toks in lines if toks]
    pos = 0

    def take(expected: int | None, what: str) -> tuple[int, list[int]]:
        nonlocal pos
        if pos >= len(lines):
            last = lines[-1][0] + 1 if lines else 1
            raise AlistParseError(f"unexpected end of file while reading {what}", last)
        no, toks = lines[pos]
        pos += 1
        try:
            vals = [int(t) for t in toks]
        except ValueError:
            raise AlistParseError(f"non-integer token in {what}", no) from None
        if expected is not None and len(vals) != expected:
            raise AlistParseError(f"{what}: expected {expected} values, got {len(vals)}", no)
        return no, vals

    _, (n, m) = take(2, "header 'N M'")
    no, (max_col, max_row) = take(2, "maximum degrees")
    if n < 1 or m < 1:
        raise AlistParseError("N and M must be positive", lines[0][0])
    no_cd, col_deg = take(n, "column degrees")
    no_rd, row_deg = take(m, "row degrees")
    if max(col_deg) > max_col:
        raise AlistInconsistencyError(f"column degree exceeds declared maximum {max_col}")
    if max(row_deg) > max_row:
        raise AlistInconsistencyError(f"row degree exceeds declared maximum {max_row}")

    def adjacency(count: int, degrees: list[int], limit: int, what: str) -> list[list[int]]:
        out = []
        for k in range(count):
            no, vals = take(None, f"{what} {k + 1}")
            nz = [v for v in vals if v != 0]
            if any(v < 0 or v > limit for v in nz):
                raise AlistParseError(f"{what} {k + 1}: index out of range 1..{limit}", no)
            if len(nz) != degrees[k]:
                raise AlistInconsistencyError(
                    f"{what} {k + 1} (line {no}) lists {len(nz)} entries, degree says {degrees[k]}"
                )
            out.append([v - 1 for v in nz])
        return out

    cols = adjacency(n, col_deg, m, "column")
    rows = adjacency(m, row_deg, n, "row")

    from_rows = sorted((j, i) for j, r in enumerate(rows) for i in r)
    from_cols = sorted((j, i) for i, c in enumerate(cols) for j in c)
    if from_rows != from_cols:
        raise AlistInconsistencyError("row and column adjacency lists are not duals")
    try:
        return TannerGraph(n, m, rows)
    except ValueError as exc:
        raise AlistInconsistencyError(str(exc)) from None


def save_alist(g: TannerGraph) -> str:
    """Serialise ``g``; lists are zero-padded to the maximum degree."""
    col_deg = g.vn_degrees.tolist()
    row_deg = g.cn_degrees.tolist()
    max_col, max_row = max(col_deg), max(row_deg)
    out = [
        f"{g.n_vns} {g.n_cns}",
        f"{max_col} {max_row}",
        " ".join(map(str, col_deg)),
        " ".join(map(str, row_deg)),
    ]
    for i in range(g.n_vns):
        nb = (g.vn_neighbors(i) + 1).tolist()
        out.append(" ".join(map(str, nb + [0] * (max_col - len(nb)))))
    for j in range(g.n_cns):
        nb = (g.cn_neighbors(j) + 1).tolist()
        out.append(" ".join(map(str, nb + [0] * (max_row - len(nb)))))
    return "\n".join(out) + "\n"


def read_alist(path) -> TannerGraph:
    with open(path) as fh:
        return load_alist(fh.read())


def write_alist(g: TannerGraph, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(save_alist(g))
