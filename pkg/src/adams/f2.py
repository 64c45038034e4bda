"""Linear algebra over the field with two elements.

Vectors are packed into Python integers: bit ``j`` holds coordinate ``j``.
Python's arbitrary-precision ints give word-parallel xor for free, so the
hot loops below work on raw ints and the typed wrappers (``BitVector``,
``BitMatrix``, ``AffineSubspace``) are thin immutable shells around them.

Pivots are always the lowest set bit of a row.  Callers that enumerate a
basis in a meaningful order (lexicographic monomials, chart names) therefore
get pivots on the earliest basis elements, and nothing here ever reorders
columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


def low_bit(v: int) -> int:
    return (v & -v).bit_length() - 1


def high_bit(v: int) -> int:
    return v.bit_length() - 1


def iter_bits(v: int) -> Iterator[int]:
    while v:
        low = v & -v
        yield low.bit_length() - 1
        v ^= low


def parity(v: int) -> int:
    return v.bit_count() & 1


def mask(n: int) -> int:
    return (1 << n) - 1


@dataclass(frozen=True)
class BitVector:
    length: int
    bits: int = 0

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("negative length")
        if self.bits < 0 or self.bits >> self.length:
            raise ValueError(f"bits outside length {self.length}")

    @classmethod
    def from_indices(cls, length: int, indices: Iterable[int]) -> BitVector:
        bits = 0
        for i in indices:
            bits ^= 1 << i
        return cls(length, bits)

    @classmethod
    def from_list(cls, values: Sequence[int]) -> BitVector:
        return cls.from_indices(len(values), (i for i, x in enumerate(values) if x & 1))

    @classmethod
    def unit(cls, length: int, i: int) -> BitVector:
        return cls(length, 1 << i)

    def __xor__(self, other: BitVector) -> BitVector:
        self._check(other)
        return BitVector(self.length, self.bits ^ other.bits)

    __add__ = __xor__

    def __and__(self, other: BitVector) -> BitVector:
        self._check(other)
        return BitVector(self.length, self.bits & other.bits)

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return self.bits >> i & 1

    def __len__(self) -> int:
        return self.length

    def __bool__(self) -> bool:
        return self.bits != 0

    def __iter__(self) -> Iterator[int]:
        return (self.bits >> i & 1 for i in range(self.length))

    def dot(self, other: BitVector) -> int:
        self._check(other)
        return parity(self.bits & other.bits)

    def weight(self) -> int:
        return self.bits.bit_count()

    def indices(self) -> list[int]:
        return list(iter_bits(self.bits))

    def to_list(self) -> list[int]:
        return list(self)

    def _check(self, other):
        if other.length != self.length:
            raise ValueError(f"length mismatch {self.length} != {other.length}")

    def __repr__(self):
        return f"BitVector({''.join(map(str, self)) or '-'})"


@dataclass(frozen=True)
class BitMatrix:
    """Row-major matrix; ``rows[i]`` is row ``i`` packed as an int."""

    nrows: int
    ncols: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.nrows:
            raise ValueError("row count mismatch")
        top = mask(self.ncols)
        for r in self.rows:
            if r < 0 or r & ~top:
                raise ValueError("row wider than ncols")

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> BitMatrix:
        return cls(nrows, ncols, (0,) * nrows)

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int] | BitVector | str], ncols: int | None = None) -> BitMatrix:
        packed = []
        width = ncols
        for r in rows:
            if isinstance(r, BitVector):
                v, n = r.bits, r.length
            elif isinstance(r, str):
                v, n = BitVector.from_list([int(c) for c in r]).bits, len(r)
            else:
                v, n = BitVector.from_list(r).bits, len(r)
            if width is None:
                width = n
            packed.append(v)
        return cls(len(packed), width or 0, tuple(packed))

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[int]) -> BitMatrix:
        """Build from packed columns (bit ``i`` of ``columns[j]`` is entry (i, j))."""
        rows = [0] * nrows
        for j, col in enumerate(columns):
            for i in iter_bits(col):
                rows[i] |= 1 << j
        return cls(nrows, len(columns), tuple(rows))

    def row(self, i: int) -> BitVector:
        return BitVector(self.ncols, self.rows[i])

    def columns(self) -> list[int]:
        cols = [0] * self.ncols
        for i, r in enumerate(self.rows):
            for j in iter_bits(r):
                cols[j] |= 1 << i
        return cols

    def transpose(self) -> BitMatrix:
        return BitMatrix(self.ncols, self.nrows, tuple(self.columns()))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i] >> j & 1

    def __matmul__(self, other):
        if isinstance(other, BitVector):
            if other.length != self.ncols:
                raise ValueError("dimension mismatch")
            return BitVector(self.nrows, apply_rows(self.rows, other.bits))
        if isinstance(other, BitMatrix):
            if other.nrows != self.ncols:
                raise ValueError("dimension mismatch")
            out = []
            for r in self.rows:
                acc = 0
                for k in iter_bits(r):
                    acc ^= other.rows[k]
                out.append(acc)
            return BitMatrix(self.nrows, other.ncols, tuple(out))
        return NotImplemented

    def is_zero(self) -> bool:
        return not any(self.rows)

    def to_lists(self) -> list[list[int]]:
        return [self.row(i).to_list() for i in range(self.nrows)]


def apply_rows(rows: Sequence[int], x: int) -> int:
    """Matrix-vector product for a row-packed matrix."""
    out = 0
    for i, r in enumerate(rows):
        if parity(r & x):
            out |= 1 << i
    return out


def apply_columns(columns: Sequence[int], x: int) -> int:
    """Matrix-vector product for a column-packed matrix (images of unit vectors)."""
    out = 0
    for j in iter_bits(x):
        out ^= columns[j]
    return out


class Echelon:
    """Incrementally built echelon basis of a subspace, keyed by low pivot.

    With ``track=True`` every stored row remembers which inserted vectors it
    is a combination of, which is what ``solve`` and kernel extraction need.
    """

    __slots__ = ("pivots", "track", "count")

    def __init__(self, vectors: Iterable[int] = (), track: bool = False):
        self.pivots: dict[int, tuple[int, int]] = {}
        self.track = track
        self.count = 0
        for v in vectors:
            self.add(v)

    def reduce(self, v: int) -> int:
        """Remainder of ``v`` with every pivot bit cleared (0 iff ``v`` is in the span)."""
        pivots = self.pivots
        kept = 0
        while v:
            p = low_bit(v)
            hit = pivots.get(p)
            if hit is None:
                kept |= 1 << p
                v ^= 1 << p
            else:
                v ^= hit[0]
        return kept

    def reduce_tracked(self, v: int) -> tuple[int, int]:
        """Fully reduce ``v``; also return the combination of inserted vectors used."""
        pivots = self.pivots
        kept = 0
        combo = 0
        while v:
            p = low_bit(v)
            hit = pivots.get(p)
            if hit is None:
                kept |= 1 << p
                v ^= 1 << p
            else:
                v ^= hit[0]
                combo ^= hit[1]
        return kept, combo

    def add(self, v: int) -> int:
        """Insert ``v``; returns its reduced remainder (0 if already in the span)."""
        index = self.count
        self.count += 1
        pivots = self.pivots
        combo = 1 << index if self.track else 0
        while v:
            p = low_bit(v)
            hit = pivots.get(p)
            if hit is None:
                pivots[p] = (v, combo)
                return v
            v ^= hit[0]
            combo ^= hit[1]
        return 0

    def add_with_dependency(self, v: int) -> tuple[int, int]:
        """Like ``add`` but also returns the dependency combo when ``v`` reduces to 0."""
        index = self.count
        self.count += 1
        pivots = self.pivots
        combo = 1 << index
        while v:
            p = low_bit(v)
            hit = pivots.get(p)
            if hit is None:
                pivots[p] = (v, combo)
                return v, 0
            v ^= hit[0]
            combo ^= hit[1]
        return 0, combo

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def basis(self) -> list[int]:
        return [self.pivots[p][0] for p in sorted(self.pivots)]

    def rref_rows(self) -> list[int]:
        """Fully reduced rows sorted by pivot."""
        order = sorted(self.pivots)
        rows = {p: self.pivots[p][0] for p in order}
        for p in reversed(order):
            r = rows[p]
            above = r & ~((1 << (p + 1)) - 1)
            for q in iter_bits(above):
                if q in rows:
                    r ^= rows[q]
            rows[p] = r
        return [rows[p] for p in order]


def rref_ints(rows: Iterable[int]) -> tuple[list[int], list[int]]:
    """Reduced row echelon form of packed rows: (rows sorted by pivot, pivots)."""
    ech = Echelon(rows)
    reduced = ech.rref_rows()
    return reduced, [low_bit(r) for r in reduced]


def rref(m: BitMatrix) -> tuple[BitMatrix, list[int], int]:
    rows, pivots = rref_ints(m.rows)
    rows = rows + [0] * (m.nrows - len(rows))
    return BitMatrix(m.nrows, m.ncols, tuple(rows)), pivots, len(pivots)


def rank(m: BitMatrix) -> int:
    return Echelon(m.rows).rank


def kernel_ints(rows: Sequence[int], ncols: int) -> list[int]:
    """Basis of {x : rows . x = 0}, one vector per free column."""
    reduced, pivots = rref_ints(rows)
    pivot_set = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        v = 1 << f
        for r, p in zip(reduced, pivots):
            if r >> f & 1:
                v |= 1 << p
        basis.append(v)
    return basis


def kernel_basis(m: BitMatrix) -> list[BitVector]:
    return [BitVector(m.ncols, v) for v in kernel_ints(m.rows, m.ncols)]


def column_kernel(columns: Sequence[int]) -> list[int]:
    """Kernel of a column-packed map, as combinations of the columns."""
    ech = Echelon()
    out = []
    for col in columns:
        rem, combo = ech.add_with_dependency(col)
        if not rem:
            out.append(combo)
    return out


def solve_columns(columns: Sequence[int], target: int) -> int | None:
    """Find x with sum_{j in x} columns[j] = target, or None."""
    ech = Echelon(columns, track=True)
    rem, combo = ech.reduce_tracked(target)
    if rem:
        return None
    return combo


def solve(m: BitMatrix, target: BitVector) -> BitVector | None:
    if target.length != m.nrows:
        raise ValueError("target length must equal row count")
    x = solve_columns(m.columns(), target.bits)
    return None if x is None else BitVector(m.ncols, x)


class NotASubspace(ValueError):
    pass


def quotient_ints(sub: Iterable[int], space: Iterable[int]) -> list[int]:
    """Representatives in ``space`` of a basis of span(space)/span(sub)."""
    ech = Echelon(sub)
    span = Echelon(space)
    sub_rank = ech.rank
    for v in list(ech.basis()):
        if not span.contains(v):
            raise NotASubspace("sub is not contained in span(space)")
    reps = []
    for v in span.basis():
        if ech.add(v):
            reps.append(v)
    assert ech.rank == sub_rank + len(reps)
    return reps


def quotient_representatives(sub: Sequence[BitVector], space: Sequence[BitVector]) -> list[BitVector]:
    length = (space[0].length if space else sub[0].length if sub else 0)
    return [BitVector(length, v) for v in quotient_ints((v.bits for v in sub), (v.bits for v in space))]


class AffineSubspace:
    """``basepoint + span(direction)`` inside F2^ambient_dim, or EMPTY.

    The direction basis is kept in reduced row echelon form and the basepoint
    is reduced against it, so two equal subspaces compare equal structurally.
    """

    __slots__ = ("ambient_dim", "basepoint", "direction")

    def __init__(self, ambient_dim: int, basepoint: int | None, direction: Iterable[int] = ()):
        self.ambient_dim = ambient_dim
        if basepoint is None:
            self.basepoint = None
            self.direction: tuple[int, ...] = ()
            return
        ech = Echelon(direction)
        rows = ech.rref_rows()
        self.direction = tuple(rows)
        self.basepoint = _reduce_rref(basepoint, rows)

    @classmethod
    def full(cls, n: int) -> AffineSubspace:
        return cls(n, 0, (1 << i for i in range(n)))

    @classmethod
    def point(cls, n: int, v: int) -> AffineSubspace:
        return cls(n, v)

    @classmethod
    def empty(cls, n: int) -> AffineSubspace:
        return cls(n, None)

    @classmethod
    def linear(cls, n: int, basis: Iterable[int]) -> AffineSubspace:
        return cls(n, 0, basis)

    @property
    def is_empty(self) -> bool:
        return self.basepoint is None

    @property
    def dim(self) -> int:
        return -1 if self.is_empty else len(self.direction)

    @property
    def is_point(self) -> bool:
        return self.dim == 0

    def contains(self, v: int) -> bool:
        if self.is_empty:
            return False
        return _reduce_rref(v, self.direction) == self.basepoint

    def __contains__(self, v) -> bool:
        if isinstance(v, BitVector):
            v = v.bits
        return self.contains(v)

    def points(self) -> Iterator[int]:
        if self.is_empty:
            return
        d = self.direction
        for k in range(1 << len(d)):
            v = self.basepoint
            for i in iter_bits(k):
                v ^= d[i]
            yield v

    def meet(self, other: AffineSubspace) -> AffineSubspace:
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        if self.is_empty or other.is_empty:
            return AffineSubspace.empty(self.ambient_dim)
        # points a + Du = b + Ew  <=>  Du + Ew = a + b
        cols = list(self.direction) + list(other.direction)
        k = len(self.direction)
        ech = Echelon(cols, track=True)
        rem, combo = ech.reduce_tracked(self.basepoint ^ other.basepoint)
        if rem:
            return AffineSubspace.empty(self.ambient_dim)
        base = self.basepoint
        for i in iter_bits(combo & mask(k)):
            base ^= self.direction[i]
        # direction of the intersection: span(D) ∩ span(E)
        inter = []
        for dep in column_kernel(cols):
            v = 0
            for i in iter_bits(dep & mask(k)):
                v ^= self.direction[i]
            if v:
                inter.append(v)
        return AffineSubspace(self.ambient_dim, base, inter)

    def __and__(self, other: AffineSubspace) -> AffineSubspace:
        return self.meet(other)

    def __add__(self, other: AffineSubspace) -> AffineSubspace:
        """Minkowski sum."""
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        if self.is_empty or other.is_empty:
            return AffineSubspace.empty(self.ambient_dim)
        return AffineSubspace(self.ambient_dim, self.basepoint ^ other.basepoint,
                              self.direction + other.direction)

    def translate(self, v: int) -> AffineSubspace:
        if self.is_empty:
            return self
        return AffineSubspace(self.ambient_dim, self.basepoint ^ v, self.direction)

    def image(self, columns: Sequence[int], target_dim: int) -> AffineSubspace:
        """Image under the linear map whose j-th column is ``columns[j]``."""
        if self.is_empty:
            return AffineSubspace.empty(target_dim)
        return AffineSubspace(target_dim, apply_columns(columns, self.basepoint),
                              (apply_columns(columns, d) for d in self.direction))

    def preimage(self, columns: Sequence[int]) -> AffineSubspace:
        """{x : M x in self} for the map with columns ``columns`` (domain dim = len(columns))."""
        n = len(columns)
        if self.is_empty:
            return AffineSubspace.empty(n)
        # M x = b + Dy  <=>  [M | D] (x, y) = b
        cols = list(columns) + list(self.direction)
        ech = Echelon(cols, track=True)
        rem, combo = ech.reduce_tracked(self.basepoint)
        if rem:
            return AffineSubspace.empty(n)
        base = combo & mask(n)
        kern = [dep & mask(n) for dep in column_kernel(cols)]
        return AffineSubspace(n, base, (v for v in kern if v))

    def is_subset(self, other: AffineSubspace) -> bool:
        if self.is_empty:
            return True
        if not other.contains(self.basepoint):
            return False
        return all(_reduce_rref(d, other.direction) == 0 for d in self.direction)

    def _key(self):
        return (self.ambient_dim, self.basepoint, self.direction)

    def __eq__(self, other):
        return isinstance(other, AffineSubspace) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.is_empty:
            return f"AffineSubspace(EMPTY in F2^{self.ambient_dim})"
        return (f"AffineSubspace({self.basepoint:#b} + span{[bin(d) for d in self.direction]}"
                f" in F2^{self.ambient_dim})")


def _reduce_rref(v: int, rows: Sequence[int]) -> int:
    for r in rows:
        if v >> low_bit(r) & 1:
            v ^= r
    return v


def affine_meet(a: AffineSubspace, b: AffineSubspace) -> AffineSubspace:
    return a.meet(b)
