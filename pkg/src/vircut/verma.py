"""Lowest-weight Virasoro modules at a finite energy cutoff.

Conventions
-----------
Generators L_n, n in Z, with commutation relations

    [L_n, L_m] = (n - m) L_{n+m} + (c/12) (n^3 - n) delta_{n+m,0}

acting on the span of monomials L_{-a1} L_{-a2} ... L_{-aj} Phi where
(a1 >= a2 >= ... >= aj >= 1) runs over integer partitions and Phi is the
lowest-weight vector (L_n Phi = 0 for n > 0, L_0 Phi = h Phi).  A monomial
over a partition of k sits at energy level k (L_0 eigenvalue h + k).

Within one level the monomial basis is listed in reverse-lexicographic
order, e.g. level 4 is (4), (3,1), (2,2), (2,1,1), (1,1,1,1).  All basis
ordering, serialization and caching relies on that order.

The inner product is the one induced by L_n* = L_{-n} and <Phi, Phi> = 1
(Gram/Shapovalov matrices per level).  In the unitary range the Gram
matrix is positive semidefinite; its kernel (null vectors) is quotiented
away when building a truncated representation.

Arithmetic is dual mode.  Structure constants are always computed with
exact rationals; "exact" representations keep exact matrices in a basis
that is orthogonal with known rational norms squared (the D-basis), and
"float" representations use float64 matrices in an orthonormal basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Union

import numpy as np

from .rational import (
    IndefiniteMatrixError,
    as_fraction,
    exact_rank_nullspace,
    object_zeros,
    psd_congruence,
    to_float,
)

__all__ = [
    "CENTRAL_DENOMINATOR",
    "CentralCharge",
    "LowestWeight",
    "Partition",
    "VermaVector",
    "GramMatrix",
    "LevelRank",
    "NonUnitaryError",
    "TruncatedRep",
    "SafeWindow",
    "enumerate_partitions",
    "partition_count",
    "act",
    "monomial_block",
    "gram_matrix",
    "gram_entry_direct",
    "level_rank",
    "truncated_rep",
    "safe_levels",
    "relation_residual",
    "relation_residual_summary",
    "measure_central_charge",
    "tensor_rep",
    "clear_caches",
]

# Central-term denominator of the commutation relations.  The physical
# value is 12; the CLI exposes a fault-injection hook that sets it to 13
# so that the independent relation checker (which hard-codes 12) must
# report a failure.  Keyed into every memo cache.
CENTRAL_DENOMINATOR = 12

Scalar = Union[Fraction, float]


def _param_value(x) -> Fraction:
    if isinstance(x, (CentralCharge, LowestWeight)):
        return x.value
    return as_fraction(x)


@dataclass(frozen=True)
class CentralCharge:
    """Central charge c > 0, exact rational."""

    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_fraction(self.value))
        if self.value <= 0:
            raise ValueError(f"central charge must be positive, got {self.value}")

    def is_admissible(self) -> bool:
        """True when c >= 1 or c = 1 - 6/((m+2)(m+3)) for integer m >= 1."""
        if self.value >= 1:
            return True
        m = 1
        while True:
            cm = 1 - Fraction(6, (m + 2) * (m + 3))
            if cm == self.value:
                return True
            if cm > self.value:
                return False
            m += 1


@dataclass(frozen=True)
class LowestWeight:
    """Lowest weight h >= 0, exact rational."""

    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_fraction(self.value))
        if self.value < 0:
            raise ValueError(f"lowest weight must be nonnegative, got {self.value}")


@dataclass(frozen=True)
class Partition:
    """Weakly decreasing tuple of positive integers."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        if any(p <= 0 for p in parts):
            raise ValueError(f"partition parts must be positive: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"partition parts must be weakly decreasing: {parts}")

    @property
    def weight(self) -> int:
        return sum(self.parts)

    def __len__(self):
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)


@lru_cache(maxsize=None)
def _partition_tuples(k: int, max_part: Optional[int] = None) -> tuple[tuple[int, ...], ...]:
    if k < 0:
        return ()
    if k == 0:
        return ((),)
    top = k if max_part is None else min(k, max_part)
    out = []
    for first in range(top, 0, -1):
        for rest in _partition_tuples(k - first, first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def _partition_index(k: int) -> dict:
    return {w: i for i, w in enumerate(_partition_tuples(k))}


def enumerate_partitions(k: int) -> list[Partition]:
    """All partitions of k, reverse-lexicographic (largest first)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return [Partition(w) for w in _partition_tuples(k)]


def partition_count(k: int) -> int:
    return len(_partition_tuples(k)) if k >= 0 else 0


@dataclass(frozen=True)
class VermaVector:
    """Finite linear combination of monomials of one fixed level."""

    coefficients: Mapping[Partition, Scalar]
    level: int

    def __post_init__(self):
        coeffs = {p if isinstance(p, Partition) else Partition(tuple(p)): v
                  for p, v in self.coefficients.items() if v != 0}
        object.__setattr__(self, "coefficients", coeffs)
        for p in coeffs:
            if p.weight != self.level:
                raise ValueError(f"monomial {p.parts} has weight {p.weight}, expected level {self.level}")

    @staticmethod
    def monomial(parts: Iterable[int]) -> "VermaVector":
        p = Partition(tuple(parts))
        return VermaVector({p: Fraction(1)}, p.weight)

    @staticmethod
    def zero(level: int = 0) -> "VermaVector":
        return VermaVector({}, level)

    def is_zero(self) -> bool:
        return not self.coefficients

    def __add__(self, other: "VermaVector") -> "VermaVector":
        if not isinstance(other, VermaVector):
            return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.level != other.level:
            raise ValueError("cannot add vectors of different levels")
        out = dict(self.coefficients)
        for p, v in other.coefficients.items():
            out[p] = out.get(p, Fraction(0)) + v
        return VermaVector(out, self.level)

    def __sub__(self, other: "VermaVector") -> "VermaVector":
        return self + (-1) * other

    def __rmul__(self, scalar) -> "VermaVector":
        return VermaVector({p: scalar * v for p, v in self.coefficients.items()}, self.level)

    def coefficient(self, parts) -> Scalar:
        key = parts if isinstance(parts, Partition) else Partition(tuple(parts))
        return self.coefficients.get(key, Fraction(0))


# ---------------------------------------------------------------------------
# symbolic action of L_n on monomial words (PBW straightening)

_ACT_CACHE: dict = {}
_GRAM_CACHE: dict = {}


def clear_caches() -> None:
    _ACT_CACHE.clear()
    _GRAM_CACHE.clear()


def _bump(out: dict, word: tuple, value) -> None:
    cur = out.get(word)
    out[word] = value if cur is None else cur + value


def _act_word(n: int, word: tuple, c: Fraction, h: Fraction, denom: int):
    """L_n applied to the monomial `word`, as a tuple of (word, coeff).

    Recursion on the leading generator: commute L_n through L_{-word[0]}
    and straighten the leftovers.  Terminates because every same-length
    prepend candidate produced by the inner call already has first part
    bounded by the part being prepended (see the sortedness of words).
    """
    key = (n, word, c, h, denom)
    hit = _ACT_CACHE.get(key)
    if hit is not None:
        return hit
    if not word:
        if n > 0:
            res: tuple = ()
        elif n == 0:
            res = (((), h),) if h != 0 else ()
        else:
            res = (((-n,), Fraction(1)),)
    elif n < 0 and -n >= word[0]:
        res = (((-n,) + word, Fraction(1)),)
    else:
        head, rest = word[0], word[1:]
        out: dict = {}
        # L_{-head} (L_n rest), straightening where the prepend is unsorted
        for w, a in _act_word(n, rest, c, h, denom):
            if not w or head >= w[0]:
                _bump(out, (head,) + w, a)
            else:
                for w2, b in _act_word(-head, w, c, h, denom):
                    _bump(out, w2, a * b)
        # [L_n, L_{-head}] = (n + head) L_{n-head} + central delta_{n,head}
        coef = n + head
        if coef != 0:
            for w, a in _act_word(n - head, rest, c, h, denom):
                _bump(out, w, coef * a)
        if n == head:
            cc = c * (n ** 3 - n) / denom
            if cc != 0:
                _bump(out, rest, cc)
        res = tuple((w, a) for w, a in out.items() if a != 0)
    _ACT_CACHE[key] = res
    return res


def act(n: int, v: VermaVector, c, h) -> VermaVector:
    """L_n . v computed symbolically; result sits at level v.level - n.

    Words pushed below level 0 annihilate (zero vector, never an error).
    """
    cv, hv = _param_value(c), _param_value(h)
    denom = CENTRAL_DENOMINATOR
    out: dict = {}
    for p, a in v.coefficients.items():
        for w, b in _act_word(n, p.parts, cv, hv, denom):
            _bump(out, w, a * b)
    level = v.level - n
    if level < 0:
        return VermaVector.zero(0)
    return VermaVector({Partition(w): x for w, x in out.items() if x != 0}, level)


def monomial_block(n: int, k: int, c, h) -> Optional[np.ndarray]:
    """Matrix of L_n from level k to level k - n in the monomial basis.

    Exact object array of Fractions, shape (p(k-n), p(k)).  None when the
    target level is negative.
    """
    if k < 0 or k - n < 0:
        return None
    cv, hv = _param_value(c), _param_value(h)
    denom = CENTRAL_DENOMINATOR
    src = _partition_tuples(k)
    dst_index = _partition_index(k - n)
    out = object_zeros((len(dst_index), len(src)))
    for j, word in enumerate(src):
        for w, a in _act_word(n, word, cv, hv, denom):
            out[dst_index[w], j] = out[dst_index[w], j] + a
    return out


# ---------------------------------------------------------------------------
# Gram (Shapovalov) matrices

@dataclass(frozen=True)
class GramMatrix:
    """Exact inner-product matrix of level-k monomials for parameters (c, h)."""

    c: Fraction
    h: Fraction
    level: int
    entries: np.ndarray  # object array of Fractions, symmetric

    @property
    def partitions(self) -> list[Partition]:
        return enumerate_partitions(self.level)

    def entry(self, lam, mu) -> Fraction:
        idx = _partition_index(self.level)
        li = idx[tuple(lam.parts if isinstance(lam, Partition) else lam)]
        mi = idx[tuple(mu.parts if isinstance(mu, Partition) else mu)]
        return self.entries[li, mi]


def _gram_levels(c: Fraction, h: Fraction, kmax: int, denom: int) -> list[np.ndarray]:
    """Exact G_0..G_kmax by level recursion.

    Row lambda = (a, rest) of G_k is row `rest` of G_{k-a} @ L_a(k): pairing
    <L_{-a} m_rest, m_mu> = <m_rest, L_a m_mu>.
    """
    key = (c, h, denom)
    levels = _GRAM_CACHE.setdefault(key, [np.array([[Fraction(1)]], dtype=object)])
    while len(levels) <= kmax:
        k = len(levels)
        parts_k = _partition_tuples(k)
        g = object_zeros((len(parts_k), len(parts_k)))
        products: dict[int, np.ndarray] = {}
        for i, lam in enumerate(parts_k):
            a, rest = lam[0], lam[1:]
            if a not in products:
                block = monomial_block(a, k, c, h)
                products[a] = np.dot(levels[k - a], block)
            g[i, :] = products[a][_partition_index(k - a)[rest], :]
        levels.append(g)
    return levels


def gram_matrix(c, h, k: int) -> GramMatrix:
    """Exact level-k Gram matrix in the reverse-lexicographic monomial basis."""
    if k < 0:
        raise ValueError("level must be nonnegative")
    cv, hv = _param_value(c), _param_value(h)
    levels = _gram_levels(cv, hv, k, CENTRAL_DENOMINATOR)
    return GramMatrix(cv, hv, k, levels[k].copy())


def gram_entry_direct(c, h, lam, mu) -> Fraction:
    """Independent route to one Gram entry: adjoint word applied step by step.

    <L_{-l1}...L_{-lj} Phi, m_mu> = coefficient of Phi in L_{l1}(...(L_{lj-...}))
    applied largest part first.  Used as an oracle against gram_matrix.
    """
    lam_parts = tuple(lam.parts if isinstance(lam, Partition) else lam)
    v = VermaVector.monomial(tuple(mu.parts if isinstance(mu, Partition) else mu))
    for part in lam_parts:
        v = act(part, v, c, h)
    return v.coefficient(())


@dataclass(frozen=True)
class LevelRank:
    rank: int
    null_basis: list[VermaVector]
    mode: str
    tolerance: Optional[float] = None


def level_rank(c, h, k: int, mode: str = "exact", tol: float = 1e-10) -> LevelRank:
    """Rank of the level-k Gram matrix plus a kernel basis.

    Exact mode does fraction Gaussian elimination (works for indefinite
    matrices too).  Float mode thresholds eigenvalues at tol relative to
    the largest one and reports the tolerance used.
    """
    gram = gram_matrix(c, h, k)
    parts = enumerate_partitions(k)
    if mode == "exact":
        rank, null_rows = exact_rank_nullspace(gram.entries)
        basis = [VermaVector({p: x for p, x in zip(parts, row) if x != 0}, k)
                 for row in null_rows]
        return LevelRank(rank, basis, "exact")
    gf = to_float(gram.entries)
    if gf.shape[0] == 0:
        return LevelRank(0, [], "float", tol)
    w, u = np.linalg.eigh(gf)
    cutoff = tol * max(abs(w).max(), 1.0)
    null = [i for i in range(len(w)) if abs(w[i]) <= cutoff]
    basis = [VermaVector({p: float(x) for p, x in zip(parts, u[:, i]) if abs(x) > 0}, k)
             for i in null]
    return LevelRank(len(w) - len(null), basis, "float", tol)


# ---------------------------------------------------------------------------
# truncated representations

class NonUnitaryError(ValueError):
    """The Gram matrix is indefinite: (c, h) is outside the unitary range."""


@dataclass(frozen=True)
class TruncatedRep:
    """Unitary lowest-weight representation cut at energy level N.

    blocks[(n, k)] is the matrix of L_n from level k to level k - n, for
    |n| <= N and both levels in [0, N].  In float mode blocks are float64
    in per-level orthonormal bases.  In exact mode blocks are Fraction
    object arrays in per-level orthogonal bases whose norms squared are
    basis_norms[k] (the D-basis); orthonormal_block derives the float
    orthonormal matrix.  basis_transforms[k] has the basis vectors of
    level k as rows, in monomial coordinates (None for tensor products,
    whose basis is the pairing of factor bases).
    """

    c: Scalar
    h: Scalar
    N: int
    mode: str
    level_dims: tuple[int, ...]
    blocks: dict
    basis_norms: Optional[tuple]
    basis_transforms: Optional[tuple]
    basis: str = "quotient"

    def dim(self, k: int) -> int:
        return self.level_dims[k] if 0 <= k <= self.N else 0

    def block(self, n: int, k: int) -> Optional[np.ndarray]:
        return self.blocks.get((n, k))

    def norms(self, k: int):
        if self.basis_norms is None:
            raise ValueError("monomial-basis action carries no inner product data")
        return self.basis_norms[k]

    def orthonormal_block(self, n: int, k: int) -> Optional[np.ndarray]:
        if self.basis_norms is None:
            raise ValueError("monomial-basis action has no orthonormal structure")
        blk = self.block(n, k)
        if blk is None:
            return None
        if self.mode == "float":
            return blk
        num = to_float(blk)
        s_dst = np.sqrt([float(x) for x in self.basis_norms[k - n]])
        s_src = np.sqrt([float(x) for x in self.basis_norms[k]])
        if num.size == 0:
            return num
        return (s_dst[:, None] * num) / s_src[None, :]

    def total_dim(self) -> int:
        return sum(self.level_dims)


def _exact_level_data(c, h, N):
    """Per-level (dims, norms D, basis rows B, extraction rows W) for exact mode."""
    grams = _gram_levels(c, h, N, CENTRAL_DENOMINATOR)
    dims, normsq, basis_rows, extract = [], [], [], []
    for k in range(N + 1):
        g = grams[k]
        try:
            d, basis, rank = psd_congruence(g)
        except IndefiniteMatrixError as exc:
            raise NonUnitaryError(
                f"Gram matrix at level {k} is indefinite for c={c}, h={h}: {exc}") from exc
        b = basis[:rank]
        w = np.dot(b, g)
        for i in range(rank):
            w[i, :] = w[i, :] / d[i]
        dims.append(rank)
        normsq.append(tuple(d[:rank]))
        basis_rows.append(b)
        extract.append(w)
    return dims, normsq, basis_rows, extract


def _float_level_data(c, h, N, tol=1e-10):
    """Float-mode per-level data: orthonormal rows from the scaled Gram.

    Rank decisions come from a float64 eigendecomposition of the
    diagonally scaled Gram.  The basis itself is then lifted to extended
    precision and re-orthonormalized with one Newton-Schulz step: near
    the unitarity boundary the smallest scaled eigenvalue can reach 1e-6
    and the 1/sqrt(w) scaling would otherwise leave relation residuals
    around 1e-10, two orders above what downstream checks budget for.
    """
    grams = _gram_levels(as_fraction(c), as_fraction(h), N, CENTRAL_DENOMINATOR)
    dims, normsq, basis_rows, extract = [], [], [], []
    for k in range(N + 1):
        g = to_float(grams[k])
        p = g.shape[0]
        if p == 0:
            dims.append(0)
            normsq.append(np.zeros(0))
            basis_rows.append(np.zeros((0, 0), dtype=np.longdouble))
            extract.append(np.zeros((0, 0), dtype=np.longdouble))
            continue
        diag = np.diag(g).copy()
        maxd = max(diag.max(initial=0.0), 0.0)
        if (diag < -tol * max(maxd, 1.0)).any():
            raise NonUnitaryError(f"negative squared norm at level {k} for c={c}, h={h}")
        keep0 = diag > tol * max(maxd, 1.0)
        gs = g[np.ix_(keep0, keep0)]
        s = 1.0 / np.sqrt(diag[keep0])
        gs = gs * s[:, None] * s[None, :]
        if gs.shape[0]:
            w, u = np.linalg.eigh(gs)
            wmax = max(abs(w).max(), 1.0)
            if w.min() < -tol * wmax:
                raise NonUnitaryError(
                    f"Gram matrix at level {k} is indefinite for c={c}, h={h} "
                    f"(eigenvalue {w.min():.3e}, tolerance {tol:g} relative)")
            kept = w > tol * wmax
            cols = u[:, kept] / np.sqrt(w[kept])[None, :]
            rows = (cols * s[:, None]).T          # rows @ gs-original @ rows.T = I
            b = np.zeros((rows.shape[0], p))
            b[:, keep0] = rows
        else:
            b = np.zeros((0, p))
        bl = b.astype(np.longdouble)
        gl = g.astype(np.longdouble)
        if bl.shape[0]:
            m = bl @ gl @ bl.T
            eye = np.eye(m.shape[0], dtype=np.longdouble)
            if float(abs(m - eye).max()) < 0.1:
                bl = ((eye * 3 - m) / 2) @ bl
        dims.append(bl.shape[0])
        normsq.append(np.ones(bl.shape[0]))
        basis_rows.append(bl)
        extract.append(bl @ gl)
    return dims, normsq, basis_rows, extract


def truncated_rep(c, h, N: int, mode: str = "exact", tol: float = 1e-10,
                  basis: str = "quotient") -> TruncatedRep:
    """Build the truncated representation for (c, h) at cutoff N.

    basis="quotient" (the default) quotients each level by the Gram kernel
    and carries inner-product data; it raises NonUnitaryError when the
    Gram matrix is indefinite (the orthonormalization is refused rather
    than faked).  basis="monomial" keeps the raw module action on the full
    monomial basis; it exists for algebra checks at points outside the
    unitary range and carries no inner product.
    """
    if N < 2:
        raise ValueError("truncation level N must be at least 2")
    cv, hv = _param_value(c), _param_value(h)
    if basis == "monomial":
        blocks = {}
        for n in range(-N, N + 1):
            for k in range(max(0, n), N + 1):
                if not (0 <= k - n <= N):
                    continue
                mono = monomial_block(n, k, cv, hv)
                blocks[(n, k)] = to_float(mono) if mode == "float" else mono
        return TruncatedRep(
            c=cv if mode == "exact" else float(cv),
            h=hv if mode == "exact" else float(hv),
            N=N,
            mode=mode,
            level_dims=tuple(partition_count(k) for k in range(N + 1)),
            blocks=blocks,
            basis_norms=None,
            basis_transforms=None,
            basis="monomial",
        )
    if basis != "quotient":
        raise ValueError(f"unknown basis {basis!r}")
    if mode == "exact":
        dims, normsq, basis_rows, extract = _exact_level_data(cv, hv, N)
    elif mode == "float":
        dims, normsq, basis_rows, extract = _float_level_data(cv, hv, N, tol)
    else:
        raise ValueError(f"unknown arithmetic mode {mode!r}")
    blocks = {}
    for n in range(-N, N + 1):
        for k in range(max(0, n), N + 1):
            if not (0 <= k - n <= N):
                continue
            mono = monomial_block(n, k, cv, hv)
            if mode == "float":
                mono = to_float(mono)
            blk = np.dot(np.dot(extract[k - n], mono), basis_rows[k].T)
            if mode == "float":
                blk = np.asarray(blk, dtype=np.float64)
            blocks[(n, k)] = blk
    if mode == "float":
        basis_rows = [np.asarray(b, dtype=np.float64) for b in basis_rows]
    return TruncatedRep(
        c=cv if mode == "exact" else float(cv),
        h=hv if mode == "exact" else float(hv),
        N=N,
        mode=mode,
        level_dims=tuple(dims),
        blocks=blocks,
        basis_norms=tuple(normsq),
        basis_transforms=tuple(basis_rows),
    )


# ---------------------------------------------------------------------------
# safe windows and algebra checks

def safe_levels(N: int, word: Iterable[int]) -> list[int]:
    """Source levels from which the operator word never leaves [0, N].

    word = (n1, ..., nj) means L_{n1} ... L_{nj} applied to a level-k
    vector, rightmost factor first; every partial level must stay in
    range (conservative, no truncation artifacts).
    """
    word = tuple(word)
    out = []
    for k in range(N + 1):
        level = k
        ok = True
        for n in reversed(word):
            level -= n
            if not 0 <= level <= N:
                ok = False
                break
        if ok:
            out.append(k)
    return out


@dataclass(frozen=True)
class SafeWindow:
    """Admissible source levels of an operator word on a truncated rep."""

    rep: TruncatedRep
    word: tuple[int, ...]
    levels: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(self.word))
        object.__setattr__(self, "levels", tuple(safe_levels(self.rep.N, self.word)))


def relation_residual(rep: TruncatedRep, m: int, n: int, k: int) -> Optional[np.ndarray]:
    """Matrix of [L_m, L_n] - (m-n) L_{m+n} - central on level k, or None.

    None when level k is not in the joint safe window of both orders.
    The central constant uses the physical denominator 12 independently
    of the builder (that independence is what the fault hook tests).
    """
    N = rep.N
    if k not in safe_levels(N, (m, n)) or k not in safe_levels(N, (n, m)):
        return None
    a = np.dot(rep.block(m, k - n), rep.block(n, k))
    b = np.dot(rep.block(n, k - m), rep.block(m, k))
    res = a - b
    if m != n:
        if abs(m + n) > N:
            return None  # the L_{m+n} block is outside the truncation
        res = res - (m - n) * rep.block(m + n, k)
    if m + n == 0:
        central = rep.c * (m ** 3 - m) / 12
        if central != 0:
            if rep.mode == "exact":
                eye = object_zeros((rep.dim(k), rep.dim(k)))
                for i in range(rep.dim(k)):
                    eye[i, i] = Fraction(1)
            else:
                eye = np.eye(rep.dim(k))
            res = res - central * eye
    return res


def relation_residual_summary(rep: TruncatedRep, max_mode: int = 3) -> dict:
    """Sweep all |m|,|n| <= max_mode over their safe windows.

    Returns {"max_abs": float, "exact_zero": bool, "cells": [...]}.
    """
    worst = 0.0
    exact_zero = True
    cells = []
    for m in range(-max_mode, max_mode + 1):
        for n in range(-max_mode, max_mode + 1):
            for k in range(rep.N + 1):
                res = relation_residual(rep, m, n, k)
                if res is None or res.size == 0:
                    continue
                if rep.mode == "exact":
                    nz = bool((res != 0).any())
                    exact_zero = exact_zero and not nz
                    cell_max = float(max((abs(float(x)) for x in res.ravel()), default=0.0))
                else:
                    cell_max = float(abs(res).max())
                    exact_zero = False
                worst = max(worst, cell_max)
                cells.append({"m": m, "n": n, "k": k, "max_abs": cell_max})
    return {"max_abs": worst, "exact_zero": exact_zero, "cells": cells}


def measure_central_charge(rep: TruncatedRep) -> Scalar:
    """2 (<Omega, [L_2, L_{-2}] Omega> - 4h) read off the rep's matrices."""
    if rep.N < 2 or rep.dim(0) != 1:
        raise ValueError("need N >= 2 and a one-dimensional level 0")
    lower = rep.block(-2, 0)
    raise_back = rep.block(2, 2)
    val = np.dot(raise_back, lower)[0, 0]
    # L_{-2} L_2 Omega vanishes: L_2 maps level 0 below the module
    return 2 * (val - 4 * rep.h)


def tensor_rep(a: TruncatedRep, b: TruncatedRep, N: int, dim_cap: int = 20000) -> TruncatedRep:
    """Graded tensor product with L_n = L_n (x) 1 + 1 (x) L_n, cut at total level N.

    Basis at level K: pairs (level ka block of a) x (level K - ka of b),
    ka ascending; norms squared multiply.  Central charge adds.
    """
    if a.mode != b.mode:
        raise ValueError("tensor factors must share the arithmetic mode")
    if N > a.N or N > b.N:
        raise ValueError("factors must be truncated at least at N")
    if a.basis_norms is None or b.basis_norms is None:
        raise ValueError("tensor factors need inner-product data (quotient basis)")
    mode = a.mode
    dims = []
    for K in range(N + 1):
        dims.append(sum(a.dim(ka) * b.dim(K - ka) for ka in range(K + 1)))
    if sum(dims) > dim_cap:
        raise ValueError(f"tensor product dimension {sum(dims)} exceeds cap {dim_cap}")

    def offsets(K):
        off, pos = {}, 0
        for ka in range(K + 1):
            off[ka] = pos
            pos += a.dim(ka) * b.dim(K - ka)
        return off

    def eye(d):
        if mode == "exact":
            m = object_zeros((d, d))
            for i in range(d):
                m[i, i] = Fraction(1)
            return m
        return np.eye(d)

    def zeros(r, s):
        return object_zeros((r, s)) if mode == "exact" else np.zeros((r, s))

    all_offsets = {K: offsets(K) for K in range(N + 1)}
    blocks = {}
    for n in range(-N, N + 1):
        for K in range(max(0, n), N + 1):
            Kd = K - n
            if not 0 <= Kd <= N:
                continue
            out = zeros(dims[Kd], dims[K])
            for ka in range(K + 1):
                kb = K - ka
                da, db = a.dim(ka), b.dim(kb)
                if da == 0 or db == 0:
                    continue
                src = all_offsets[K][ka]
                # a-factor action: (ka, kb) -> (ka - n, kb)
                if 0 <= ka - n <= a.N and a.dim(ka - n) and 0 <= Kd - (ka - n) == kb:
                    blk = a.block(n, ka)
                    if blk is not None and blk.size:
                        dst = all_offsets[Kd][ka - n]
                        sub = np.kron(blk, eye(db))
                        out[dst:dst + a.dim(ka - n) * db, src:src + da * db] += sub
                # b-factor action: (ka, kb) -> (ka, kb - n)
                if 0 <= kb - n <= b.N and b.dim(kb - n) and ka <= Kd and Kd - ka == kb - n:
                    blk = b.block(n, kb)
                    if blk is not None and blk.size:
                        dst = all_offsets[Kd][ka]
                        sub = np.kron(eye(da), blk)
                        out[dst:dst + da * b.dim(kb - n), src:src + da * db] += sub
            blocks[(n, K)] = out
    norms = []
    for K in range(N + 1):
        row = []
        for ka in range(K + 1):
            for i in range(a.dim(ka)):
                for j in range(b.dim(K - ka)):
                    row.append(a.norms(ka)[i] * b.norms(K - ka)[j])
        norms.append(tuple(row) if mode == "exact" else np.asarray(row, dtype=float))
    return TruncatedRep(
        c=a.c + b.c,
        h=a.h + b.h,
        N=N,
        mode=mode,
        level_dims=tuple(dims),
        blocks=blocks,
        basis_norms=tuple(norms),
        basis_transforms=None,
    )
