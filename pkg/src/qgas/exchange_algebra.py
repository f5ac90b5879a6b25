"""Finite-dimensional realization of the exchange-operator algebra.

The exchange operator q acts on a two-dimensional internal space with
eigenvalues +1 (bosonic sector) and -1 (fermionic sector).  A particle's
internal state is fixed by its fermionic weight ``delta``, so every
expectation value below is a (1 - delta, delta) mixture of the two sectors.

Conventions
-----------
* Mode labels passed by callers are 1-based; arrays are 0-based internally.
* Mode order is the order in which levels are given.  The ladder-operator
  phase ``s ** sum(n_l for l < i)`` depends on it.
* Sector-(-1) configurations with any n_i >= 2 have zero norm and are left
  out of :class:`FockBasis`.
* The unit operator 1^q is evaluated on the *target* configuration of each
  ladder operator.  Evaluating on the source would change nothing on the
  basis kept here, since zero-norm states are already excluded.
* Operators are returned as real ``scipy.sparse`` CSR matrices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import NamedTuple, Sequence

import numpy as np
import scipy.sparse as sps

from .errors import DomainError, EnumerationLimitError

SECTORS = (1, -1)

# Size guards; the algebra checks are meant for desk-scale bases.
MAX_SYMMETRIZER_DIM = 1 << 15
MAX_SYMMETRIZER_WORK = 4_000_000  # bound d^N * min(N!, d^N) on stored entries
MAX_FOCK_STATES = 200_000
MAX_TRACE_CONFIGS = 5_000_000


@dataclass(frozen=True)
class InternalState:
    """Internal quantum state reduced to its fermionic weight.

    Parameters
    ----------
    delta : float
        Total squared amplitude on the q = -1 eigenspace, in [0, 1].
    """

    delta: float

    def __post_init__(self):
        d = float(self.delta)
        if not (0.0 <= d <= 1.0):
            raise DomainError(f"delta must lie in [0, 1], got {self.delta!r}")
        object.__setattr__(self, "delta", d)

    @classmethod
    def from_amplitudes(cls, amp_plus, amp_minus, atol=1e-12):
        norm = amp_plus**2 + amp_minus**2
        if abs(norm - 1.0) > atol:
            raise DomainError(f"internal state not normalized: |c+|^2 + |c-|^2 = {norm}")
        return cls(min(1.0, max(0.0, amp_minus**2)))

    @property
    def amp_plus(self) -> float:
        return math.sqrt(1.0 - self.delta)

    @property
    def amp_minus(self) -> float:
        return math.sqrt(self.delta)

    def sector_weight(self, sector: int) -> float:
        return 1.0 - self.delta if sector == 1 else self.delta


def q_expectation(state: InternalState) -> float:
    """Expectation of the exchange operator, ``1 - 2 delta``."""
    return state.amp_plus**2 - state.amp_minus**2


@dataclass(frozen=True, order=True)
class OccupationConfig:
    """Per-mode occupation numbers n_i."""

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(n) for n in self.counts)
        if any(n < 0 for n in counts):
            raise ValueError(f"occupation numbers must be non-negative: {counts}")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def multi_count(self) -> int:
        """Number of modes holding two or more particles."""
        return sum(1 for n in self.counts if n >= 2)

    @classmethod
    def from_assignment(cls, assignment: Sequence[int], d: int) -> "OccupationConfig":
        counts = [0] * d
        for label in assignment:
            if not 1 <= label <= d:
                raise ValueError(f"mode label {label} outside [1, {d}]")
            counts[label - 1] += 1
        return cls(tuple(counts))


def sector_unit(counts: Sequence[int], sector: int) -> float:
    """Sector-resolved action of 1^q on a configuration.

    On the +1 sector the unit operator is the identity; on the -1 sector it
    is the projector (1 + q)/2 whenever some mode is multiply occupied,
    which annihilates the state.
    """
    if sector == 1:
        return 1.0
    return 0.0 if any(n >= 2 for n in counts) else 1.0


def unit_weight(config: OccupationConfig, state: InternalState) -> float:
    """Expectation of the unit operator 1^q for a configuration."""
    if config.multi_count == 0:
        return 1.0
    return 1.0 - state.delta


# ---------------------------------------------------------------------------
# N-particle symmetrizer
# ---------------------------------------------------------------------------


def permutation_parity(perm: Sequence[int]) -> int:
    """Return +1 for even, -1 for odd permutations (cycle decomposition)."""
    seen = [False] * len(perm)
    parity = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            parity = -parity
    return parity


def _check_symmetrizer_size(N, d):
    if N < 1 or d < 1:
        raise ValueError(f"need N >= 1 and d >= 1, got N={N}, d={d}")
    dim = 2 * d**N
    if dim > MAX_SYMMETRIZER_DIM:
        raise EnumerationLimitError(
            f"symmetrizer basis 2*{d}^{N} = {dim} exceeds limit {MAX_SYMMETRIZER_DIM}",
            size=dim, limit=MAX_SYMMETRIZER_DIM)
    work = d**N * min(math.factorial(N), d**N)
    if work > MAX_SYMMETRIZER_WORK:
        raise EnumerationLimitError(
            f"symmetrizer entry bound {d}^{N} * min({N}!, {d}^{N}) = {work} exceeds limit "
            f"{MAX_SYMMETRIZER_WORK}",
            size=work, limit=MAX_SYMMETRIZER_WORK)


def _tensor_digits(N, d):
    """Rows of mode labels (0-based) for every tensor-product index."""
    idx = np.arange(d**N)
    digits = np.empty((d**N, N), dtype=np.int64)
    for k in range(N - 1, -1, -1):
        digits[:, k] = idx % d
        idx = idx // d
    return digits


@lru_cache(maxsize=64)
def _sector_blocks(N, d):
    """Symmetrizer restricted to each internal sector, as CSR matrices.

    ``(1/N!) sum_P P`` maps a product state to the uniform average over
    its orbit of distinct arrangements, so on sector +1 each orbit of
    size k is a dense block of 1/k.  On sector -1 orbits with a repeated
    label vanish; the others (k = N!) carry ``sign(r) sign(c) / N!``,
    where sign is the parity of the permutation that sorts the labels.
    """
    digits = _tensor_digits(N, d)
    dim = d**N
    keys = np.sort(digits, axis=1) @ (d ** np.arange(N - 1, -1, -1))
    _, orbit = np.unique(keys, return_inverse=True)
    inversions = np.zeros(dim, dtype=np.int64)
    for a in range(N):
        for b in range(a + 1, N):
            inversions += digits[:, a] > digits[:, b]
    sign = np.where(inversions % 2 == 0, 1.0, -1.0)
    distinct = np.all(np.diff(np.sort(digits, axis=1), axis=1) != 0, axis=1) if N > 1 \
        else np.ones(dim, dtype=bool)

    order = np.argsort(orbit, kind="stable")
    bounds = np.flatnonzero(np.diff(orbit[order])) + 1
    p_rows, p_cols, p_vals = [], [], []
    m_rows, m_cols, m_vals = [], [], []
    inv_fact = 1.0 / math.factorial(N)
    for members in np.split(order, bounds):
        k = members.size
        r, c = np.meshgrid(members, members, indexing="ij")
        p_rows.append(r.ravel())
        p_cols.append(c.ravel())
        p_vals.append(np.full(k * k, 1.0 / k))
        if distinct[members[0]]:
            m_rows.append(r.ravel())
            m_cols.append(c.ravel())
            m_vals.append(np.outer(sign[members], sign[members]).ravel() * inv_fact)

    def assemble(rows, cols, vals):
        if not rows:
            return sps.csr_matrix((dim, dim))
        return sps.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                              shape=(dim, dim))

    return assemble(p_rows, p_cols, p_vals), assemble(m_rows, m_cols, m_vals)


def symmetrizer_matrix(N: int, d: int) -> sps.csr_matrix:
    """Projector ``(1/N!) sum_P q^[P] P`` on (C^d)^N tensor the internal sector.

    The basis index is ``sector_index * d**N + t`` where sector +1 comes
    first and ``t`` is the base-``d`` number formed by the mode labels
    of particles 1..N (most significant first).
    """
    _check_symmetrizer_size(N, d)
    plus, minus = _sector_blocks(N, d)
    return sps.block_diag([plus, minus], format="csr")


def product_index(assignment: Sequence[int], d: int) -> int:
    index = 0
    for label in assignment:
        if not 1 <= label <= d:
            raise ValueError(f"mode label {label} outside [1, {d}]")
        index = index * d + (label - 1)
    return index


def normalization_constant(config: OccupationConfig) -> float:
    """C_N = sqrt(N! / prod n_i!)."""
    denom = math.prod(math.factorial(n) for n in config.counts)
    return math.sqrt(math.factorial(config.total) / denom)


@dataclass(frozen=True)
class SymmetrizedState:
    """A q-symmetrized N-particle state, one tensor-product vector per sector."""

    config: OccupationConfig
    d: int
    plus: np.ndarray = field(repr=False)
    minus: np.ndarray = field(repr=False)

    def sector(self, s: int) -> np.ndarray:
        return self.plus if s == 1 else self.minus

    def weighted_norm2(self, state: InternalState) -> float:
        return sum(state.sector_weight(s) * float(self.sector(s) @ self.sector(s))
                   for s in SECTORS)


def symmetrized_state(assignment: Sequence[int], d: int) -> SymmetrizedState:
    """Apply ``C_N * Q`` to the product state with the given mode labels."""
    N = len(assignment)
    _check_symmetrizer_size(N, d)
    config = OccupationConfig.from_assignment(assignment, d)
    col = product_index(assignment, d)
    c = normalization_constant(config)
    plus, minus = _sector_blocks(N, d)
    return SymmetrizedState(
        config=config,
        d=d,
        plus=c * plus[:, col].toarray().ravel(),
        minus=c * minus[:, col].toarray().ravel(),
    )


def overlap(a: SymmetrizedState, b: SymmetrizedState) -> dict[int, float]:
    """Sector-resolved inner products of two symmetrized states."""
    if a.d != b.d or a.config.total != b.config.total:
        raise ValueError("states must share particle number and mode count")
    return {s: float(a.sector(s) @ b.sector(s)) for s in SECTORS}


def weighted_overlap(a: SymmetrizedState, b: SymmetrizedState, state: InternalState) -> float:
    """Inner product averaged over the internal state, weights (1 - delta, delta)."""
    ov = overlap(a, b)
    return sum(state.sector_weight(s) * ov[s] for s in SECTORS)


def configs_with_total(N: int, d: int):
    """All occupation configurations of N particles over d modes, lex order."""
    for counts in itertools.product(range(N + 1), repeat=d):
        if sum(counts) == N:
            yield OccupationConfig(counts)


def canonical_assignment(config: OccupationConfig) -> tuple[int, ...]:
    """Sorted 1-based mode labels realizing ``config``."""
    return tuple(i + 1 for i, n in enumerate(config.counts) for _ in range(n))


# ---------------------------------------------------------------------------
# Fock-like space and ladder operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FockBasis:
    """Truncated occupation-number basis crossed with the internal sector.

    ``states`` is ordered lexicographically on the counts, then by sector
    with +1 before -1.
    """

    mode_count: int
    max_per_mode: int
    max_total: int
    states: tuple[tuple[OccupationConfig, int], ...]

    def __len__(self):
        return len(self.states)

    @cached_property
    def index(self) -> dict[tuple[tuple[int, ...], int], int]:
        return {(cfg.counts, s): k for k, (cfg, s) in enumerate(self.states)}

    @cached_property
    def sectors(self) -> np.ndarray:
        return np.array([s for _, s in self.states], dtype=float)

    def within_caps(self, counts: Sequence[int]) -> bool:
        return max(counts, default=0) <= self.max_per_mode and sum(counts) <= self.max_total

    def representable(self, counts: Sequence[int], sector: int) -> bool:
        """True when the truncation does not cut off ``(counts, sector)``.

        Zero-norm sector -1 states count as representable: they vanish
        whatever the caps are.
        """
        if sector == -1 and any(n >= 2 for n in counts):
            return True
        return all(n >= 0 for n in counts) and self.within_caps(counts)


def fock_basis(M: int, n_max: int, N_cap: int | None = None,
               limit: int = MAX_FOCK_STATES) -> FockBasis:
    """Enumerate the truncated Fock-like basis.

    Parameters
    ----------
    M : int
        Number of modes.
    n_max : int
        Maximum occupation of a single mode.
    N_cap : int, optional
        Maximum total particle number; defaults to ``M * n_max``.
    """
    if M < 1 or n_max < 0:
        raise ValueError(f"need M >= 1 and n_max >= 0, got M={M}, n_max={n_max}")
    if N_cap is None:
        N_cap = M * n_max
    if N_cap < 0:
        raise ValueError(f"N_cap must be non-negative, got {N_cap}")
    raw = (n_max + 1) ** M
    if raw > limit:
        raise EnumerationLimitError(
            f"Fock enumeration (n_max+1)^M = {raw} exceeds limit {limit}", size=raw, limit=limit)
    states = []
    for counts in itertools.product(range(n_max + 1), repeat=M):
        if sum(counts) > N_cap:
            continue
        cfg = OccupationConfig(counts)
        states.append((cfg, 1))
        if cfg.multi_count == 0:
            states.append((cfg, -1))
    return FockBasis(M, n_max, N_cap, tuple(states))


def _check_mode(i, basis):
    if not 1 <= i <= basis.mode_count:
        raise ValueError(f"mode index {i} outside [1, {basis.mode_count}]")


def _shift(counts, i0, step):
    out = list(counts)
    out[i0] += step
    return tuple(out)


def creation_matrix(i: int, basis: FockBasis) -> sps.csr_matrix:
    """Matrix of the creation operator for mode ``i`` (1-based).

    Element from (n, s) to (n + e_i, s) is
    ``s ** sum(n_l, l < i) * sqrt(n_i + 1) * u(n + e_i, s)``.
    """
    _check_mode(i, basis)
    i0 = i - 1
    rows, cols, vals = [], [], []
    for col, (cfg, s) in enumerate(basis.states):
        n = cfg.counts
        target = _shift(n, i0, +1)
        row = basis.index.get((target, s))
        if row is None:
            continue
        coef = s ** sum(n[:i0]) * math.sqrt(n[i0] + 1) * sector_unit(target, s)
        if coef != 0.0:
            rows.append(row)
            cols.append(col)
            vals.append(coef)
    dim = len(basis)
    return sps.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


def annihilation_matrix(i: int, basis: FockBasis, convention: str = "adjoint") -> sps.csr_matrix:
    """Matrix of the annihilation operator for mode ``i`` (1-based).

    ``convention="adjoint"`` (canonical) is the transpose of
    :func:`creation_matrix`.  ``convention="literal"`` applies the
    defining action with its extra factor of q:
    ``s ** sum(n_l, l < i) * sqrt(n_i) * s * u(n - e_i, s)``, which is not
    the adjoint on the -1 sector.
    """
    if convention == "adjoint":
        return creation_matrix(i, basis).T.tocsr()
    if convention != "literal":
        raise ValueError(f"unknown convention {convention!r}")
    _check_mode(i, basis)
    i0 = i - 1
    rows, cols, vals = [], [], []
    for col, (cfg, s) in enumerate(basis.states):
        n = cfg.counts
        if n[i0] == 0:
            continue
        target = _shift(n, i0, -1)
        row = basis.index.get((target, s))
        if row is None:
            continue
        coef = s ** sum(n[:i0]) * math.sqrt(n[i0]) * s * sector_unit(target, s)
        if coef != 0.0:
            rows.append(row)
            cols.append(col)
            vals.append(coef)
    dim = len(basis)
    return sps.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


def annihilation_convention_gap(i: int, basis: FockBasis) -> sps.csr_matrix:
    """Elementwise ``literal - adjoint`` difference of the annihilation matrices."""
    gap = annihilation_matrix(i, basis, "literal") - annihilation_matrix(i, basis, "adjoint")
    gap = gap.tocsr()
    gap.eliminate_zeros()
    return gap


def unit_operator_matrix(basis: FockBasis) -> sps.csr_matrix:
    return sps.diags([sector_unit(cfg.counts, s) for cfg, s in basis.states], format="csr")


def number_operator_check(i: int, basis: FockBasis) -> float:
    """Max deviation of ``a_i^dag a_i`` from ``n_i * 1^q`` over all matrix elements."""
    _check_mode(i, basis)
    a_dag = creation_matrix(i, basis)
    number = (a_dag @ a_dag.T).toarray()
    expected = np.diag([cfg.counts[i - 1] * sector_unit(cfg.counts, s)
                        for cfg, s in basis.states])
    return float(np.max(np.abs(number - expected), initial=0.0))


@dataclass(frozen=True)
class CommutatorDefect:
    """Deviations of the q-deformed brackets from their closed forms.

    ``defect_mixed`` and ``defect_aa`` are measured on interior states only.
    The ``boundary_*`` fields report the same quantities on states whose
    images were cut off by the truncation; they are diagnostics.
    """

    defect_mixed: float
    defect_aa: float
    interior_mixed: int
    interior_aa: int
    boundary_mixed: float
    boundary_aa: float


def _column_max(mat, mask):
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(mat[:, mask]), initial=0.0))


def commutator_defect(i: int, j: int, basis: FockBasis, sector: int | None = None) -> CommutatorDefect:
    """Check ``[a_i, a_j^dag]_q = 1^q delta_ij`` and ``[a_i, a_j]_q = [a_i^dag, a_j^dag]_q = 0``.

    The bracket is ``[A, B]_q = A B - q B A`` with q acting as the sector
    sign.  A state is interior for a bracket when every intermediate and
    final configuration reached by either ordering is representable in
    ``basis``.  ``sector`` restricts the measurement to one sector.
    """
    _check_mode(i, basis)
    _check_mode(j, basis)
    ai = creation_matrix(i, basis).T.tocsr()
    aj = creation_matrix(j, basis).T.tocsr()
    ai_dag = ai.T.tocsr()
    aj_dag = aj.T.tocsr()
    S = sps.diags(basis.sectors, format="csr")

    mixed = (ai @ aj_dag - S @ aj_dag @ ai).toarray()
    if i == j:
        mixed -= unit_operator_matrix(basis).toarray()
    ann = (ai @ aj - S @ aj @ ai).toarray()
    cre = (ai_dag @ aj_dag - S @ aj_dag @ ai_dag).toarray()

    i0, j0 = i - 1, j - 1
    mixed_ok = np.zeros(len(basis), dtype=bool)
    cre_ok = np.zeros(len(basis), dtype=bool)
    selected = np.ones(len(basis), dtype=bool)
    for k, (cfg, s) in enumerate(basis.states):
        n = cfg.counts
        if sector is not None and s != sector:
            selected[k] = False
            continue
        up_j = _shift(n, j0, +1)
        mixed_ok[k] = basis.representable(up_j, s)
        up_i = _shift(n, i0, +1)
        up_ij = _shift(up_i, j0, +1)
        cre_ok[k] = all(basis.representable(c, s) for c in (up_i, up_j, up_ij))

    ann_mask = selected
    return CommutatorDefect(
        defect_mixed=_column_max(mixed, mixed_ok & selected),
        defect_aa=max(_column_max(ann, ann_mask), _column_max(cre, cre_ok & selected)),
        interior_mixed=int((mixed_ok & selected).sum()),
        interior_aa=int((cre_ok & selected).sum()),
        boundary_mixed=_column_max(mixed, ~mixed_ok & selected),
        boundary_aa=_column_max(cre, ~cre_ok & selected),
    )


def to_triplets(matrix) -> str:
    """Plain-text ``row col value`` lines for the nonzero entries (debug export)."""
    coo = sps.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    return "".join(f"{coo.row[k]} {coo.col[k]} {float(coo.data[k])!r}\n" for k in order)


# ---------------------------------------------------------------------------
# Brute-force grand trace
# ---------------------------------------------------------------------------


class TraceTerms(NamedTuple):
    totals: np.ndarray
    terms: np.ndarray


def _trace_terms(levels, beta, mu, state, n_max, weighting, limit):
    levels = np.asarray(levels, dtype=float).ravel()
    L = levels.size
    if L == 0:
        raise ValueError("need at least one level")
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    size = (n_max + 1) ** L
    if size > limit:
        raise EnumerationLimitError(
            f"grand-trace enumeration (n_max+1)^L = {size} exceeds limit {limit}",
            size=size, limit=limit)
    occ = np.indices((n_max + 1,) * L).reshape(L, -1)
    totals = occ.sum(axis=0)
    exponent = -beta * ((levels - mu)[:, None] * occ).sum(axis=0)
    multi = (occ >= 2).sum(axis=0)
    if weighting == "operator_exact":
        weight = np.where(multi >= 1, 1.0 - state.delta, 1.0)
    elif weighting == "factorized":
        weight = (1.0 - state.delta) ** multi
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    return TraceTerms(totals, weight * np.exp(exponent))


def grand_trace_exact(levels: Sequence[float], beta: float, mu: float, state: InternalState,
                      n_max: int, weighting: str = "operator_exact",
                      limit: int = MAX_TRACE_CONFIGS) -> float:
    """Grand trace by explicit enumeration of all configurations with n_i <= n_max.

    Every configuration is weighted by ``exp(-beta sum n_i (eps_i - mu))``
    times ``W``: the unit-operator expectation (1 if all n_i <= 1, else
    1 - delta) for ``"operator_exact"``, or ``(1 - delta) ** T`` for
    ``"factorized"``, T being the number of multiply occupied levels.
    One mode per level.
    """
    return float(np.sum(_trace_terms(levels, beta, mu, state, n_max, weighting, limit).terms))


def grand_trace_orders(levels: Sequence[float], beta: float, mu: float, state: InternalState,
                       n_max: int, weighting: str = "operator_exact",
                       limit: int = MAX_TRACE_CONFIGS) -> np.ndarray:
    """Contributions to the grand trace grouped by total particle number.

    Entry k is the fugacity-order-k part of the trace.  Entries with
    k <= n_max are free of truncation error.
    """
    t = _trace_terms(levels, beta, mu, state, n_max, weighting, limit)
    return np.bincount(t.totals, weights=t.terms)
