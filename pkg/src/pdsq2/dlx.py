"""Exact cover by dancing links on flat integer arrays.

The classic doubly linked node web is stored as numpy int32 arrays (left,
right, up, down, column-of-node, row-of-node), which makes the whole search
a tight integer loop.  The loop is compiled with numba when available; the
identical function runs as plain Python otherwise, so results never depend
on which path executed.

Selection is deterministic: the column with the fewest candidate rows wins,
ties broken by lowest column id, and rows are tried in insertion order.

Set ``PDSQ2_NUMBA=0`` in the environment to force the pure-Python path.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "PDSQ2_NUMBA"


def numba_requested() -> bool:
    return os.environ.get(_ENV_FLAG, "1").strip().lower() not in ("0", "false", "no", "off")


def build_links(n_cols: int, rows: list[list[int]]):
    """Build the linked-node arrays for a 0/1 matrix given as rows of column ids.

    Node 0 is the root, nodes 1..n_cols are column headers, and data nodes
    follow in row-major order.  Returns (L, R, U, D, COL, ROW, SIZE).
    """
    n_nodes = 1 + n_cols + sum(len(r) for r in rows)
    L = np.zeros(n_nodes, dtype=np.int32)
    R = np.zeros(n_nodes, dtype=np.int32)
    U = np.zeros(n_nodes, dtype=np.int32)
    D = np.zeros(n_nodes, dtype=np.int32)
    COL = np.zeros(n_nodes, dtype=np.int32)
    ROW = np.full(n_nodes, -1, dtype=np.int32)
    SIZE = np.zeros(n_cols + 1, dtype=np.int32)

    # Root and header ring.
    for c in range(n_cols + 1):
        L[c] = c - 1 if c > 0 else n_cols
        R[c] = c + 1 if c < n_cols else 0
        U[c] = c
        D[c] = c
        COL[c] = c
    nxt = n_cols + 1
    for row_id, row in enumerate(rows):
        first = nxt
        for k, col in enumerate(sorted(row)):
            c = col + 1  # headers are 1-based
            node = nxt
            nxt += 1
            COL[node] = c
            ROW[node] = row_id
            # vertical insert above the header (keeps insertion order going down)
            U[node] = U[c]
            D[node] = c
            D[U[c]] = node
            U[c] = node
            SIZE[c] += 1
            # horizontal ring within the row
            if k == 0:
                L[node] = node
                R[node] = node
            else:
                L[node] = nxt - 2
                R[node] = first
                R[nxt - 2] = node
                L[first] = node
    return L, R, U, D, COL, ROW, SIZE


def _search(L, R, U, D, COL, ROW, SIZE, max_depth, cap, out):
    """Enumerate exact covers; returns (count, truncated, nodes_visited).

    ``out`` is a preallocated int64 buffer of shape (cap, max_depth); row ids
    of each solution are written left-padded with -1 for unused depth slots.
    Written to be numba-compatible: flat loops, integer state machine.
    """
    col_stack = np.empty(max_depth + 1, dtype=np.int64)
    node_stack = np.empty(max_depth + 1, dtype=np.int64)
    depth = 0
    count = 0
    truncated = False
    nodes_visited = 0
    # mode 0: descend (pick a column), 1: try next row here, 2: backtrack
    mode = 0
    while True:
        if mode == 0:
            if R[0] == 0:
                # every column covered: record the row choices
                for i in range(max_depth):
                    out[count, i] = -1
                for i in range(depth):
                    out[count, i] = ROW[node_stack[i]]
                count += 1
                if count >= cap:
                    truncated = True
                    break
                mode = 2
                continue
            # min-size column, lowest id on ties (headers sit in id order)
            c = R[0]
            best = c
            best_size = SIZE[c]
            while c != 0:
                if SIZE[c] < best_size:
                    best = c
                    best_size = SIZE[c]
                c = R[c]
            c = best
            # cover c
            L[R[c]] = L[c]
            R[L[c]] = R[c]
            i = D[c]
            while i != c:
                j = R[i]
                while j != i:
                    U[D[j]] = U[j]
                    D[U[j]] = D[j]
                    SIZE[COL[j]] -= 1
                    j = R[j]
                i = D[i]
            col_stack[depth] = c
            node_stack[depth] = D[c]
            mode = 1
            continue
        if mode == 1:
            r = node_stack[depth]
            c = col_stack[depth]
            if r == c:
                # column exhausted: uncover and go up
                i = U[c]
                while i != c:
                    j = L[i]
                    while j != i:
                        SIZE[COL[j]] += 1
                        U[D[j]] = j
                        D[U[j]] = j
                        j = L[j]
                    i = U[i]
                L[R[c]] = c
                R[L[c]] = c
                mode = 2
                continue
            nodes_visited += 1
            # cover the other columns of row r
            j = R[r]
            while j != r:
                cc = COL[j]
                L[R[cc]] = L[cc]
                R[L[cc]] = R[cc]
                i = D[cc]
                while i != cc:
                    k = R[i]
                    while k != i:
                        U[D[k]] = U[k]
                        D[U[k]] = D[k]
                        SIZE[COL[k]] -= 1
                        k = R[k]
                    i = D[i]
                j = R[j]
            depth += 1
            mode = 0
            continue
        # mode == 2: backtrack one level
        depth -= 1
        if depth < 0:
            break
        r = node_stack[depth]
        # uncover the other columns of row r, in reverse
        j = L[r]
        while j != r:
            cc = COL[j]
            i = U[cc]
            while i != cc:
                k = L[i]
                while k != i:
                    SIZE[COL[k]] += 1
                    U[D[k]] = k
                    D[U[k]] = k
                    k = L[k]
                i = U[i]
            L[R[cc]] = cc
            R[L[cc]] = cc
            j = L[j]
        node_stack[depth] = D[r]
        mode = 1
    return count, truncated, nodes_visited


_search_py = _search
_search_jit = None
if numba_requested():
    try:
        from numba import njit

        _search_jit = njit(cache=True)(_search)
    except ImportError:  # pragma: no cover - numba is a normal dependency
        _search_jit = None


def kernel_in_use() -> str:
    return "numba" if (_search_jit is not None and numba_requested()) else "python"


def cover_row(L, R, U, D, COL, SIZE, ROW, row_id: int) -> None:
    """Pre-select one row (covers all of its columns), for symmetry fixing."""
    # find one node of the row
    nodes = np.nonzero(ROW == row_id)[0]
    if len(nodes) == 0:
        raise ValueError(f"row {row_id} has no nodes")
    for node in nodes:
        c = COL[node]
        # skip if this column is already covered through an earlier node
        L[R[c]] = L[c]
        R[L[c]] = R[c]
        i = D[c]
        while i != c:
            j = R[i]
            while j != i:
                U[D[j]] = U[j]
                D[U[j]] = D[j]
                SIZE[COL[j]] -= 1
                j = R[j]
            i = D[i]


def solve_exact_cover(
    n_cols: int,
    rows: list[list[int]],
    cap: int = 10000,
    forced_rows: tuple[int, ...] = (),
    use_numba: bool | None = None,
):
    """All exact covers of the columns by the given rows, up to ``cap``.

    ``forced_rows`` are committed before the search starts (their columns are
    covered up front); they are prepended to every reported solution.
    Returns (solutions, truncated, nodes_visited) where solutions is a list
    of sorted row-id tuples.
    """
    L, R, U, D, COL, ROW, SIZE = build_links(n_cols, rows)
    for rid in forced_rows:
        cover_row(L, R, U, D, COL, SIZE, ROW, rid)
    covered = sum(len(rows[rid]) for rid in forced_rows)
    remaining = n_cols - covered
    row_len = min((len(r) for r in rows), default=1)
    max_depth = remaining // max(row_len, 1) + 1
    out = np.full((max(cap, 1), max_depth), -1, dtype=np.int64)
    if use_numba is None:
        use_numba = _search_jit is not None and numba_requested()
    fn = _search_jit if (use_numba and _search_jit is not None) else _search_py
    count, truncated, nodes = fn(L, R, U, D, COL, ROW, SIZE, max_depth, max(cap, 1), out)
    solutions = []
    for i in range(count):
        picked = [int(r) for r in out[i] if r >= 0]
        solutions.append(tuple(sorted(list(forced_rows) + picked)))
    return solutions, bool(truncated), int(nodes)
