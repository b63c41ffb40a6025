"""Graver bases of integer matrices.

Two completion routes are provided and cross-checked in the tests:

* ``"pottier"``: start from a lattice basis of ``ker(A)``, close the set under
  sums and reduce every candidate to normal form by conformal subtraction.
* ``"lift"``: add the rows of ``A`` one at a time to the trivial lattice
  ``Z^N`` and lift the current basis by one auxiliary coordinate per row
  (project-and-lift).  Critical pairs are formed only between vectors that are
  sign-compatible on the already processed coordinates, which makes a
  coordinate-wise truncation bound sound: vectors outside the bound are never
  needed to reach a vector inside it.

All arithmetic is integral.  ``numpy`` arrays fall back to ``dtype=object``
(Python integers) whenever the int64 range could be exceeded.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Sequence

import numpy as np

Vector = tuple[int, ...]
Matrix = tuple[tuple[int, ...], ...]

_INT64_SAFE = 2**40
_BITS = np.left_shift(np.uint64(1), np.arange(64, dtype=np.uint64))


class GraverBasisTooLarge(RuntimeError):
    """Raised when a completion exceeds its configured size or iteration cap."""


@dataclass(frozen=True)
class GraverConfig:
    max_size: int = 200_000
    max_iterations: int = 5_000_000


@dataclass(frozen=True)
class GraverBasis:
    """Graver basis of ``matrix``; ``vectors`` is sorted lexicographically."""

    matrix: Matrix
    vectors: tuple[Vector, ...]
    bounds: Vector | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def as_set(self) -> set[Vector]:
        return set(self.vectors)

    def array(self) -> np.ndarray:
        ncols = len(self.matrix[0]) if self.matrix else 0
        return _as_array(self.vectors, ncols)

    def to_text(self) -> str:
        return "".join(" ".join(str(v) for v in vec) + "\n" for vec in self.vectors)

    @staticmethod
    def parse_text(text: str) -> list[Vector]:
        return [tuple(int(tok) for tok in line.split()) for line in text.splitlines() if line.strip()]


def _as_matrix(A: Sequence[Sequence[int]] | np.ndarray) -> Matrix:
    rows = tuple(tuple(int(a) for a in row) for row in A)
    if not rows or not rows[0]:
        raise ValueError("matrix needs at least one row and one column")
    if any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("ragged matrix")
    return rows


def _as_array(vectors: Iterable[Sequence[int]], ncols: int) -> np.ndarray:
    vectors = list(vectors)
    if not vectors:
        return np.zeros((0, ncols), dtype=np.int64)
    big = max((abs(int(a)) for v in vectors for a in v), default=0)
    dtype = np.int64 if big < _INT64_SAFE else object
    return np.array([[int(a) for a in v] for v in vectors], dtype=dtype).reshape(len(vectors), ncols)


def conformal_le(u: Sequence[int], v: Sequence[int]) -> bool:
    """``u`` ⊑ ``v``: same orthant componentwise and ``|u_k| <= |v_k|``."""
    return all(a * b >= 0 and abs(a) <= abs(b) for a, b in zip(u, v))


def is_conformally_minimal(v: Sequence[int], basis_so_far: Iterable[Sequence[int]]) -> bool:
    v = tuple(v)
    for u in basis_so_far:
        u = tuple(u)
        if u != v and any(u) and conformal_le(u, v):
            return False
    return True


def _primitive(v: Sequence[int]) -> Vector:
    g = 0
    for a in v:
        g = gcd(g, int(a))
    return tuple(int(a) // g for a in v) if g > 1 else tuple(int(a) for a in v)


def kernel_lattice_basis(A: Sequence[Sequence[int]]) -> list[Vector]:
    """Lattice basis of ``{x in Z^N : A x = 0}`` by unimodular column operations.

    ``A`` is brought to column echelon form ``A U``; the columns of ``U`` that
    end up opposite zero columns of ``A U`` span the integer kernel.
    """
    A = _as_matrix(A)
    nrows, ncols = len(A), len(A[0])
    cols = [[A[r][c] for r in range(nrows)] for c in range(ncols)]
    unimod = [[int(r == c) for r in range(ncols)] for c in range(ncols)]

    def axpy(dst: int, src: int, q: int) -> None:
        # column dst -= q * column src
        if q:
            cd, cs = cols[dst], cols[src]
            for r in range(nrows):
                cd[r] -= q * cs[r]
            ud, us = unimod[dst], unimod[src]
            for r in range(ncols):
                ud[r] -= q * us[r]

    pivot = 0
    for r in range(nrows):
        if pivot == ncols:
            break
        while True:
            live = [c for c in range(pivot, ncols) if cols[c][r] != 0]
            if not live:
                break
            best = min(live, key=lambda c: abs(cols[c][r]))
            cols[pivot], cols[best] = cols[best], cols[pivot]
            unimod[pivot], unimod[best] = unimod[best], unimod[pivot]
            done = True
            for c in range(pivot + 1, ncols):
                if cols[c][r]:
                    axpy(c, pivot, cols[c][r] // cols[pivot][r])
                    if cols[c][r]:
                        done = False
            if done:
                pivot += 1
                break
    return [_primitive(unimod[c]) for c in range(pivot, ncols)]


def graver_oracle(A: Sequence[Sequence[int]], box: int) -> set[Vector]:
    """All conformally minimal nonzero kernel vectors with ``|v|_inf <= box``.

    Exhaustive; only meant for a handful of columns.
    """
    A = np.array(_as_matrix(A), dtype=np.int64)
    ncols = A.shape[1]
    axis = np.arange(-box, box + 1, dtype=np.int64)
    kernel = []
    # chunk over the leading coordinate to keep memory flat
    tail = np.array(list(itertools.product(axis, repeat=ncols - 1)), dtype=np.int64).reshape(-1, ncols - 1)
    for lead in axis:
        block = np.hstack([np.full((tail.shape[0], 1), lead, dtype=np.int64), tail])
        hit = ~(block @ A.T).any(axis=1) & block.any(axis=1)
        kernel.append(block[hit])
    K = np.vstack(kernel) if kernel else np.zeros((0, ncols), dtype=np.int64)
    return {tuple(int(a) for a in v) for v in _minimal_rows(K)}


def _row_masks(K: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    words = (K.shape[1] + 63) // 64
    pos = np.zeros((len(K), words), dtype=np.uint64)
    neg = np.zeros((len(K), words), dtype=np.uint64)
    for w in range(words):
        chunk = K[:, 64 * w : 64 * (w + 1)]
        bits = _BITS[: chunk.shape[1]]
        pos[:, w] = np.bitwise_or.reduce(np.where(chunk > 0, bits, np.uint64(0)), axis=1)
        neg[:, w] = np.bitwise_or.reduce(np.where(chunk < 0, bits, np.uint64(0)), axis=1)
    return pos, neg


def _minimal_rows(K: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Distinct rows of ``K`` that conformally dominate no other row of ``K``."""
    if len(K) == 0:
        return K
    if K.dtype == object:
        K = np.array(sorted(set(map(tuple, K.tolist()))), dtype=object).reshape(-1, K.shape[1])
    else:
        K = np.unique(K, axis=0)
    absK = np.abs(K)
    pos, neg = _row_masks(K)
    keep = np.ones(len(K), dtype=bool)
    for lo in range(0, len(K), chunk):
        hi = min(lo + chunk, len(K))
        # j inside i: supp+(j) ⊆ supp+(i) and supp-(j) ⊆ supp-(i)
        outside = (pos[None, :, :] & ~pos[lo:hi, None, :]) | (neg[None, :, :] & ~neg[lo:hi, None, :])
        inside = ~outside.any(axis=2)
        inside[np.arange(hi - lo), np.arange(lo, hi)] = False
        for r in np.flatnonzero(inside.any(axis=1)):
            i = lo + r
            js = np.flatnonzero(inside[r])
            if (absK[js] <= absK[i]).all(axis=1).any():
                keep[i] = False
    return K[keep]


def _sign_masks(v: np.ndarray, words: int) -> tuple[np.ndarray, np.ndarray]:
    pos = np.zeros(words, dtype=np.uint64)
    neg = np.zeros(words, dtype=np.uint64)
    for w in range(words):
        chunk = v[64 * w : 64 * (w + 1)]
        bits = _BITS[: len(chunk)]
        pos[w] = np.bitwise_or.reduce(np.where(chunk > 0, bits, np.uint64(0)))
        neg[w] = np.bitwise_or.reduce(np.where(chunk < 0, bits, np.uint64(0)))
    return pos, neg


class _Store:
    """Growable matrix of basis vectors.

    Alongside the vectors it keeps absolute values and positive/negative
    support bitmasks, so that the search for a conformal reducer first filters
    by orthant with a few word operations per stored vector.
    """

    def __init__(self, width: int, dtype, cap: int):
        self.width = width
        self.words = (width + 63) // 64
        self.dtype = dtype
        self.cap = cap
        self.data = np.zeros((64, width), dtype=dtype)
        self.absd = np.zeros((64, width), dtype=dtype)
        self.pos = np.zeros((64, self.words), dtype=np.uint64)
        self.neg = np.zeros((64, self.words), dtype=np.uint64)
        self.n = 0
        self.keys: set[bytes] = set()

    def _key(self, v: np.ndarray) -> bytes:
        return v.tobytes() if self.dtype is not object else repr(v.tolist()).encode()

    def add(self, v: np.ndarray) -> bool:
        k = self._key(v)
        if k in self.keys:
            return False
        if self.n >= self.cap:
            raise GraverBasisTooLarge(f"basis exceeds max_size={self.cap}")
        if self.n == len(self.data):
            grow = len(self.data) * 2
            for name in ("data", "absd", "pos", "neg"):
                old = getattr(self, name)
                new = np.zeros((grow, old.shape[1]), dtype=old.dtype)
                new[: self.n] = old[: self.n]
                setattr(self, name, new)
        self.data[self.n] = v
        self.absd[self.n] = np.abs(v)
        self.pos[self.n], self.neg[self.n] = _sign_masks(v, self.words)
        self.n += 1
        self.keys.add(k)
        return True

    def view(self) -> np.ndarray:
        return self.data[: self.n]

    def compatible(self, v: np.ndarray, ignore_last: bool = False) -> np.ndarray:
        """Indices of stored vectors sign-compatible with ``v``."""
        pos, neg = _sign_masks(v, self.words)
        if ignore_last:
            w, b = divmod(self.width - 1, 64)
            pos[w] &= ~_BITS[b]
            neg[w] &= ~_BITS[b]
        clash = (self.pos[: self.n] & neg) | (self.neg[: self.n] & pos)
        return np.flatnonzero(~clash.any(axis=1))

    def normal_form(self, s: np.ndarray) -> np.ndarray:
        while s.any():
            pos, neg = _sign_masks(s, self.words)
            # reducer support must sit inside the support of s, signs agreeing
            outside = (self.pos[: self.n] & ~pos) | (self.neg[: self.n] & ~neg)
            cand = np.flatnonzero(~outside.any(axis=1))
            if cand.size == 0:
                break
            fits = (self.absd[cand] <= np.abs(s)).all(axis=1)
            hits = cand[fits]
            if hits.size == 0:
                break
            s = s - self.data[hits[0]]
        return s


def _pick_dtype(*mags: int):
    return np.int64 if max(mags, default=0) < _INT64_SAFE else object


def _pottier(A: Matrix, config: GraverConfig) -> list[Vector]:
    ncols = len(A[0])
    gens = kernel_lattice_basis(A)
    if not gens:
        return []
    mag = sum(abs(a) for g in gens for a in g)
    store = _Store(ncols, _pick_dtype(mag * 64), config.max_size)
    queue: deque[np.ndarray] = deque()

    def push(v: np.ndarray) -> None:
        # store both signs, pair only the representative against everything
        if store.add(v):
            store.add(-v)
            D = store.view()
            queue.extend(D[((D * v) < 0).any(axis=1)] + v)

    for g in gens:
        push(np.array(g, dtype=store.dtype))
    iterations = 0
    while queue:
        iterations += 1
        if iterations > config.max_iterations:
            raise GraverBasisTooLarge(f"completion exceeded max_iterations={config.max_iterations}")
        s = store.normal_form(queue.popleft())
        if s.any():
            push(s)
    return [tuple(int(a) for a in v) for v in _minimal_rows(store.view())]


def _pivot_columns(A: Matrix) -> dict[int, int]:
    """Map row -> column for columns that occur in exactly one row, as ±1."""
    nrows, ncols = len(A), len(A[0])
    pivots: dict[int, int] = {}
    for c in range(ncols):
        nz = [r for r in range(nrows) if A[r][c]]
        if len(nz) == 1 and abs(A[nz[0]][c]) == 1 and nz[0] not in pivots:
            pivots[nz[0]] = c
    return pivots


def _complete(
    lifted: np.ndarray,
    bnd: np.ndarray | None,
    config: GraverConfig,
    budget: list[int],
) -> np.ndarray:
    """Complete ``lifted`` w.r.t. its last coordinate; pairs must agree in sign
    on all earlier coordinates and disagree on the last one."""
    store = _Store(lifted.shape[1], lifted.dtype, config.max_size)
    queue: deque[np.ndarray] = deque()

    def push(v: np.ndarray) -> None:
        if not store.add(v):
            return
        store.add(-v)
        if v[-1] == 0:
            return
        D = store.view()
        idx = store.compatible(v, ignore_last=True)
        idx = idx[(D[idx, -1] * v[-1]) < 0]
        sums = D[idx] + v
        if bnd is not None and len(sums):
            sums = sums[(np.abs(sums[:, :-1]) <= bnd).all(axis=1)]
        queue.extend(sums)

    for v in lifted:
        push(v)
    while queue:
        budget[0] += 1
        if budget[0] > config.max_iterations:
            raise GraverBasisTooLarge(f"completion exceeded max_iterations={config.max_iterations}")
        s = store.normal_form(queue.popleft())
        if s.any():
            push(s)
    return store.view()


def _lift(A: Matrix, bounds: Vector | None, config: GraverConfig) -> list[Vector]:
    nrows, ncols = len(A), len(A[0])
    if bounds is None:
        mag = sum(abs(a) for row in A for a in row) * 64
    else:
        mag = (max(bounds) + 1) * (1 + sum(abs(a) for row in A for a in row))
    dtype = _pick_dtype(mag)
    full_bnd = None if bounds is None else np.array(bounds, dtype=object).astype(dtype)

    # Columns that appear in a single row with coefficient ±1 are determined by
    # the other columns; they enter as lifted coordinates instead of free units.
    pivots = _pivot_columns(A)
    coords = [c for c in range(ncols) if c not in pivots.values()]
    eye = np.eye(len(coords), dtype=np.int64).astype(dtype)
    current = np.vstack([eye, -eye])
    if full_bnd is not None:
        current = current[(np.abs(current) <= full_bnd[coords]).all(axis=1)]
    budget = [0]

    constraint_rows = sorted((r for r in range(nrows) if r not in pivots), key=lambda r: (sum(1 for a in A[r] if a), r))
    for r in constraint_rows:
        a = np.array([A[r][c] for c in coords], dtype=dtype)
        last = current @ a if len(current) else np.zeros(0, dtype=dtype)
        if not last.any():
            continue
        bnd = None if full_bnd is None else full_bnd[coords]
        D = _complete(np.hstack([current, last.reshape(-1, 1)]), bnd, config, budget)
        current = _minimal_rows(D[D[:, -1] == 0][:, :-1])

    for r, c in sorted(pivots.items()):
        # A[r][c] * x_c + sum_{k != c} A[r][k] x_k = 0
        a = np.array([A[r][k] for k in coords], dtype=dtype)
        new = -(current @ a) * A[r][c] if len(current) else np.zeros(0, dtype=dtype)
        bnd = None if full_bnd is None else full_bnd[coords]
        D = _complete(np.hstack([current, new.reshape(-1, 1)]), bnd, config, budget)
        if full_bnd is not None:
            D = D[np.abs(D[:, -1]) <= full_bnd[c]]
        current = _minimal_rows(D)
        coords.append(c)

    order = np.argsort(coords)
    return [tuple(int(a) for a in v) for v in current[:, order]] if len(current) else []


def graver_basis(
    A: Sequence[Sequence[int]] | np.ndarray,
    bounds: Sequence[int] | None = None,
    method: str = "lift",
    config: GraverConfig | None = None,
) -> GraverBasis:
    """Graver basis of ``A``, optionally truncated to ``|v_k| <= bounds[k]``.

    With ``bounds`` the result is exactly the set of Graver elements inside the
    box (conformal minimality is inherited by everything below a boxed vector,
    so truncation never changes which boxed vectors are minimal).  Truncation
    needs ``method="lift"``.
    """
    A = _as_matrix(A)
    config = config or GraverConfig()
    if bounds is not None:
        bounds = tuple(int(b) for b in bounds)
        if len(bounds) != len(A[0]) or min(bounds) < 0:
            raise ValueError("bounds must be nonnegative, one per column")
    if method == "pottier":
        if bounds is not None:
            raise ValueError("truncation bounds need method='lift'")
        vecs = _pottier(A, config)
    elif method == "lift":
        vecs = _lift(A, bounds, config)
    else:
        raise ValueError(f"unknown method {method!r}")
    return GraverBasis(matrix=A, vectors=tuple(sorted(set(vecs))), bounds=bounds)
