"""Adams E2 page as the homology of the Lambda algebra.

Everything is computed one internal degree ``t`` at a time: the column
``(*, t)`` of the Lambda complex is closed under the differential, so slices
for different ``t`` are independent and can be cached on disk or farmed out
to worker processes.

Representatives are pinned down by linear algebra alone.  Boundaries are put
in reduced echelon form, every cycle is reduced against them, and the reduced
cycles are echelonised again.  Pivots sit on the leading monomial under the
chosen tag convention, so each class gets a distinct, reproducible tag.
"""

from __future__ import annotations

import json
import logging
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from . import f2
from .f2 import BitMatrix, Echelon
from .lambda_algebra import (
    Bidegree,
    LambdaElement,
    Monomial,
    admissible_basis,
    format_monomial,
    monomial_differential,
    parse_monomial,
    product,
)

log = logging.getLogger(__name__)

CONVENTIONS = ("lex-least", "lex-greatest")
DEFAULT_MEMORY_LIMIT_MB = 2048

MAGIC = b"LEXT"
FORMAT_VERSION = 1


class ResourceBudgetExceeded(RuntimeError):
    pass


class CatalogMismatch(LookupError):
    pass


class NotACycle(ValueError):
    pass


@dataclass(frozen=True)
class HomologyClass:
    bidegree: Bidegree
    representative: LambdaElement
    tag: Monomial
    name: str | None = None
    index: int = 0

    @property
    def s(self) -> int:
        return self.bidegree.s

    @property
    def t(self) -> int:
        return self.bidegree.t

    @property
    def stem(self) -> int:
        return self.bidegree.stem

    def label(self) -> str:
        return self.name or f"[{format_monomial(self.tag)}]"

    def with_name(self, name: str | None) -> HomologyClass:
        return HomologyClass(self.bidegree, self.representative, self.tag, name, self.index)

    def __str__(self):
        return self.label()


@dataclass(frozen=True)
class ChainSlice:
    bidegree: Bidegree
    basis: tuple[Monomial, ...]
    d_in: BitMatrix
    d_out: BitMatrix


def _packed_len(n: int) -> int:
    return (n + 7) // 8


class Homology:
    """E2 at one bidegree: cycle representatives plus reduction machinery."""

    def __init__(self, bidegree: Bidegree, basis: Sequence[Monomial], order: Sequence[int],
                 boundary_rows: list[int], reps: list[int]):
        self.bidegree = Bidegree(*bidegree)
        self.basis = basis
        # order[k] is the basis index stored at bit k
        self.order = order
        self.boundary_rows = boundary_rows
        self.boundary_pivots = {f2.low_bit(r): r for r in boundary_rows}
        self.reps = reps
        self.rep_pivots = [f2.low_bit(r) for r in reps]
        self.classes = [
            HomologyClass(self.bidegree, self.element(r), basis[order[p]], None, i)
            for i, (r, p) in enumerate(zip(reps, self.rep_pivots))
        ]

    @property
    def dim(self) -> int:
        return len(self.reps)

    def element(self, bits: int) -> LambdaElement:
        order = self.order
        return LambdaElement(self.bidegree, (self.basis[order[k]] for k in f2.iter_bits(bits)))

    def vector(self, x: LambdaElement) -> int:
        if x.is_zero():
            return 0
        if x.bidegree != self.bidegree:
            raise ValueError(f"element in {tuple(x.bidegree)}, slice is {tuple(self.bidegree)}")
        index = self._position()
        v = 0
        for m in x.terms:
            v ^= 1 << index[m]
        return v

    def _position(self):
        if not hasattr(self, "_pos"):
            self._pos = {self.basis[j]: k for k, j in enumerate(self.order)}
        return self._pos

    def reduce(self, v: int) -> int:
        """Project onto the complement of the boundaries spanned by non-pivot columns."""
        pivots = self.boundary_pivots
        kept = 0
        while v:
            p = f2.low_bit(v)
            row = pivots.get(p)
            if row is None:
                kept |= 1 << p
                v ^= 1 << p
            else:
                v ^= row
        return kept

    def coordinates_of_vector(self, v: int) -> int:
        """Coordinates (bit i <-> class i) of a cycle vector; raises if not a cycle."""
        w = self.reduce(v)
        coords = 0
        for i, (r, p) in enumerate(zip(self.reps, self.rep_pivots)):
            if w >> p & 1:
                w ^= r
                coords |= 1 << i
        if w:
            raise NotACycle(f"element is not a cycle in {tuple(self.bidegree)}")
        return coords

    def coordinates(self, x: LambdaElement) -> int:
        return self.coordinates_of_vector(self.vector(x))

    def is_boundary(self, x: LambdaElement) -> bool:
        return self.reduce(self.vector(x)) == 0

    def representative(self, coords: int) -> LambdaElement:
        v = 0
        for i in f2.iter_bits(coords):
            v ^= self.reps[i]
        return self.element(v)

    def describe(self, coords: int) -> str:
        if not coords:
            return "0"
        return " + ".join(self.classes[i].label() for i in f2.iter_bits(coords))


@dataclass
class SliceData:
    """Everything computed for one internal degree, as stored on disk."""

    t: int
    convention: str
    # per s: (basis size, target size, d_out columns, cycle reps)
    entries: dict[int, tuple[int, int, list[int], list[int]]] = field(default_factory=dict)


class LambdaExt:
    """Lambda-algebra Ext engine with in-memory and optional on-disk caches.

    ``convention`` picks which term of a representative is its tag:
    ``"lex-least"`` (the default) or ``"lex-greatest"``.
    """

    def __init__(self, convention: str = "lex-least", cache_dir: str | os.PathLike | None = None,
                 memory_limit_mb: float = DEFAULT_MEMORY_LIMIT_MB, threads: int = 1):
        if convention not in CONVENTIONS:
            raise ValueError(f"unknown tag convention {convention!r}")
        self.convention = convention
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.memory_limit_mb = memory_limit_mb
        self.threads = max(1, int(threads))
        self._columns: dict[tuple[int, int], list[int]] = {}
        self._homology: dict[tuple[int, int], Homology] = {}
        self._bound: dict[tuple[int, int], Echelon] = {}
        self._orders: dict[tuple[int, int], list[int]] = {}

    # -- bases and matrices -------------------------------------------------

    def basis(self, s: int, t: int) -> tuple[Monomial, ...]:
        return admissible_basis(s, t)

    def order(self, s: int, t: int) -> list[int]:
        """Bit position k holds basis element order[k]; leading terms sit at low bits."""
        key = (s, t)
        hit = self._orders.get(key)
        if hit is None:
            n = len(self.basis(s, t))
            hit = list(range(n)) if self.convention == "lex-least" else list(range(n - 1, -1, -1))
            self._orders[key] = hit
        return hit

    def _index(self, s: int, t: int) -> dict[Monomial, int]:
        basis = self.basis(s, t)
        return {basis[j]: k for k, j in enumerate(self.order(s, t))}

    def _check_budget(self, s: int, t: int) -> None:
        n = len(self.basis(s, t))
        m = len(self.basis(s + 1, t))
        mb = n * max(m, 1) / 8 / 2**20
        if mb > self.memory_limit_mb:
            raise ResourceBudgetExceeded(
                f"slice ({s},{t}) needs ~{mb:.0f} MB of matrix storage, limit {self.memory_limit_mb} MB")

    def differential_columns(self, s: int, t: int) -> list[int]:
        """Images of the basis of (s, t) in (s+1, t), packed, in bit order."""
        key = (s, t)
        hit = self._columns.get(key)
        if hit is not None:
            return hit
        self._check_budget(s, t)
        basis = self.basis(s, t)
        target = self._index(s + 1, t)
        cols = []
        for j in self.order(s, t):
            v = 0
            for m in monomial_differential(basis[j]):
                v ^= 1 << target[m]
            cols.append(v)
        self._columns[key] = cols
        return cols

    def differential_matrix(self, s: int, t: int) -> BitMatrix:
        """Matrix of d: (s,t) -> (s+1,t) in the lexicographic admissible bases."""
        cols = self.differential_columns(s, t)
        rows_n = len(self.basis(s + 1, t))
        if self.convention == "lex-least":
            return BitMatrix.from_columns(rows_n, cols)
        # undo the reversed bit order so the matrix is in lexicographic bases
        n = len(cols)
        lex_cols = [_reverse_bits(c, rows_n) for c in reversed(cols)]
        assert len(lex_cols) == n
        return BitMatrix.from_columns(rows_n, lex_cols)

    def chain_slice(self, s: int, t: int) -> ChainSlice:
        d_in = self.differential_matrix(s - 1, t) if s > 0 else BitMatrix.zeros(len(self.basis(s, t)), 0)
        return ChainSlice(Bidegree(s, t), self.basis(s, t), d_in, self.differential_matrix(s, t))

    # -- homology ------------------------------------------------------------

    def homology(self, s: int, t: int) -> Homology:
        key = (s, t)
        hit = self._homology.get(key)
        if hit is not None:
            return hit
        if self.cache_dir is not None:
            self._load_slice(t)
            hit = self._homology.get(key)
            if hit is not None:
                return hit
        basis = self.basis(s, t)
        if not basis:
            h = Homology(Bidegree(s, t), basis, [], [], [])
            self._homology[key] = h
            return h
        cycles = f2.column_kernel(self.differential_columns(s, t)) if self.basis(s + 1, t) else \
            [1 << k for k in range(len(basis))]
        boundaries = self.differential_columns(s - 1, t) if s > 0 else []
        h = self._make_homology(s, t, cycles, boundaries)
        self._homology[key] = h
        return h

    def _make_homology(self, s, t, cycles, boundaries) -> Homology:
        b_rows, _ = f2.rref_ints(boundaries)
        pivots = {f2.low_bit(r): r for r in b_rows}
        reduced = []
        for z in cycles:
            kept = 0
            while z:
                p = f2.low_bit(z)
                row = pivots.get(p)
                if row is None:
                    kept |= 1 << p
                    z ^= 1 << p
                else:
                    z ^= row
            if kept:
                reduced.append(kept)
        reps, _ = f2.rref_ints(reduced)
        return Homology(Bidegree(s, t), self.basis(s, t), self.order(s, t), b_rows, reps)

    def homology_basis(self, s: int, t: int) -> list[HomologyClass]:
        return list(self.homology(s, t).classes)

    def dimension(self, s: int, t: int) -> int:
        return self.homology(s, t).dim

    def ext_dimensions(self, max_t: int, max_s: int | None = None) -> dict[tuple[int, int], int]:
        """Nonzero dimensions of E2^{s,t} for t <= max_t (and s <= max_s if given)."""
        out = {}
        for t in range(max_t + 1):
            top = t if max_s is None else min(t, max_s)
            ranks = {}
            for s in range(top + 1):
                cols = self.differential_columns(s, t) if (s < t or s == 0) else []
                ranks[s] = Echelon(cols).rank if cols else 0
            for s in range(top + 1):
                n = len(self.basis(s, t))
                d = n - ranks[s] - (ranks[s - 1] if s > 0 else 0)
                if d:
                    out[(s, t)] = d
        return out

    def bound_by(self, e: LambdaElement) -> LambdaElement | None:
        """Some u with d(u) = e, or None if e is not a boundary."""
        s, t = e.bidegree
        if e.is_zero():
            return LambdaElement.zero(s - 1, t)
        if s == 0:
            return None
        key = (s - 1, t)
        ech = self._bound.get(key)
        if ech is None:
            ech = Echelon(self.differential_columns(s - 1, t), track=True)
            self._bound[key] = ech
        index = self._index(s, t)
        v = 0
        for m in e.terms:
            v ^= 1 << index[m]
        rem, combo = ech.reduce_tracked(v)
        if rem:
            return None
        basis = self.basis(s - 1, t)
        order = self.order(s - 1, t)
        return LambdaElement(Bidegree(s - 1, t), (basis[order[k]] for k in f2.iter_bits(combo)))

    def class_of(self, x: LambdaElement) -> int:
        """Coordinates of a cycle in the homology basis of its bidegree."""
        return self.homology(*x.bidegree).coordinates(x)

    def product_class(self, *classes: HomologyClass) -> LambdaElement:
        out = LambdaElement.one()
        for c in classes:
            out = product(out, c.representative)
        return out

    # -- tables ----------------------------------------------------------------

    def table(self, max_t: int, max_s: int | None = None, min_t: int = 0) -> ExtTable:
        if self.threads > 1:
            self.compute_slices(range(min_t, max_t + 1), max_s)
        classes = {}
        for t in range(min_t, max_t + 1):
            top = t if max_s is None else min(t, max_s)
            for s in range(top + 1):
                cl = self.homology_basis(s, t)
                if cl:
                    classes[(s, t)] = cl
        meta = {"max_t": max_t, "max_s": max_s, "convention": self.convention,
                "leading_term": "lexicographically least term" if self.convention == "lex-least"
                else "lexicographically greatest term"}
        return ExtTable(classes, meta)

    # -- persistence -------------------------------------------------------

    def slice_path(self, t: int) -> Path:
        assert self.cache_dir is not None
        return self.cache_dir / f"t{t}.slice"

    def compute_slice(self, t: int, max_s: int | None = None) -> SliceData:
        data = SliceData(t, self.convention)
        top = t if max_s is None else min(t, max_s)
        for s in range(top + 1):
            n = len(self.basis(s, t))
            m = len(self.basis(s + 1, t))
            cols = self.differential_columns(s, t) if m else [0] * n
            h = self.homology(s, t)
            data.entries[s] = (n, m, cols, list(h.reps))
        return data

    def save_slice(self, data: SliceData) -> Path:
        if self.cache_dir is None:
            raise ValueError("no cache directory configured")
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        path = self.slice_path(data.t)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(encode_slice(data))
        os.replace(tmp, path)
        return path

    def _load_slice(self, t: int) -> bool:
        if self.cache_dir is None:
            return False
        path = self.slice_path(t)
        if not path.exists():
            return False
        data = decode_slice(path.read_bytes())
        if data.convention != self.convention:
            log.warning("ignoring %s: tag convention %s != %s", path, data.convention, self.convention)
            return False
        self.install_slice(data)
        return True

    def install_slice(self, data: SliceData) -> None:
        t = data.t
        for s, (n, m, cols, reps) in data.entries.items():
            if n != len(self.basis(s, t)):
                raise ValueError(f"cached slice ({s},{t}) has basis size {n}, expected {len(self.basis(s, t))}")
            self._columns.setdefault((s, t), cols)
        for s, (n, m, cols, reps) in data.entries.items():
            if (s, t) in self._homology:
                continue
            boundaries = data.entries[s - 1][2] if s > 0 and (s - 1) in data.entries else []
            b_rows, _ = f2.rref_ints(boundaries)
            self._homology[(s, t)] = Homology(Bidegree(s, t), self.basis(s, t), self.order(s, t), b_rows, reps)

    def compute_slices(self, ts: Iterable[int], max_s: int | None = None) -> list[int]:
        """Fill the on-disk cache for each t, in increasing order; returns computed t's."""
        todo = [t for t in sorted(set(ts)) if not (self.cache_dir and self.slice_path(t).exists())]
        done = []
        if self.threads > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=self.threads) as pool:
                futures = [pool.submit(_slice_worker, t, max_s, self.convention, self.memory_limit_mb)
                           for t in todo]
                # collect in t order so the store sees a deterministic sequence
                for t, fut in zip(todo, futures):
                    payload = fut.result()
                    data = decode_slice(payload)
                    if self.cache_dir is not None:
                        self.save_slice(data)
                    self.install_slice(data)
                    done.append(t)
        else:
            for t in todo:
                data = self.compute_slice(t, max_s)
                if self.cache_dir is not None:
                    self.save_slice(data)
                done.append(t)
        return done


def _slice_worker(t, max_s, convention, memory_limit_mb) -> bytes:
    engine = LambdaExt(convention=convention, memory_limit_mb=memory_limit_mb)
    return encode_slice(engine.compute_slice(t, max_s))


def _reverse_bits(v: int, n: int) -> int:
    out = 0
    for i in f2.iter_bits(v):
        out |= 1 << (n - 1 - i)
    return out


def encode_slice(data: SliceData) -> bytes:
    conv = CONVENTIONS.index(data.convention)
    out = [MAGIC, struct.pack("<HBII", FORMAT_VERSION, conv, data.t, len(data.entries))]
    for s in sorted(data.entries):
        n, m, cols, reps = data.entries[s]
        out.append(struct.pack("<IIII", s, n, m, len(reps)))
        width = _packed_len(m)
        for c in cols:
            out.append(c.to_bytes(width, "little"))
        width = _packed_len(n)
        for r in reps:
            out.append(r.to_bytes(width, "little"))
    return b"".join(out)


def decode_slice(raw: bytes) -> SliceData:
    if raw[:4] != MAGIC:
        raise ValueError("not a slice file (bad magic)")
    version, conv, t, count = struct.unpack_from("<HBII", raw, 4)
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported slice format version {version}")
    data = SliceData(t, CONVENTIONS[conv])
    pos = 4 + struct.calcsize("<HBII")
    for _ in range(count):
        s, n, m, nreps = struct.unpack_from("<IIII", raw, pos)
        pos += 16
        width = _packed_len(m)
        cols = []
        for _ in range(n):
            cols.append(int.from_bytes(raw[pos:pos + width], "little"))
            pos += width
        width = _packed_len(n)
        reps = []
        for _ in range(nreps):
            reps.append(int.from_bytes(raw[pos:pos + width], "little"))
            pos += width
        data.entries[s] = (n, m, cols, reps)
    return data


# ---------------------------------------------------------------------------
# tables, names, export

@dataclass
class ExtTable:
    classes: dict[tuple[int, int], list[HomologyClass]]
    metadata: dict = field(default_factory=dict)
    report: list[str] = field(default_factory=list)

    def dimensions(self) -> dict[tuple[int, int], int]:
        return {k: len(v) for k, v in self.classes.items() if v}

    def at(self, s: int, t: int) -> list[HomologyClass]:
        return self.classes.get((s, t), [])

    def by_name(self, name: str) -> HomologyClass:
        for cl in self.classes.values():
            for c in cl:
                if c.name == name:
                    return c
        raise KeyError(name)

    def __iter__(self):
        for key in sorted(self.classes, key=lambda k: (k[1] - k[0], k[0])):
            yield from self.classes[key]

    def total(self) -> int:
        return sum(len(v) for v in self.classes.values())

    def to_json(self) -> dict:
        rows = []
        for c in self:
            rows.append({"stem": c.stem, "s": c.s, "t": c.t, "tag": format_monomial(c.tag), "name": c.name})
        return {"classes": rows, "convention": self.metadata.get("convention"), "metadata": self.metadata}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True, ensure_ascii=False)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    stem: int
    s: int
    tag: Monomial | None = None
    # Tabulated tags follow the Curtis-table habit of naming a class by its
    # lexicographically greatest surviving term.
    convention: str = "lex-greatest"


class NameCatalog:
    def __init__(self, entries: Iterable[CatalogEntry] = ()):
        self.entries: dict[str, CatalogEntry] = {}
        for e in entries:
            self.add(e)

    def add(self, entry: CatalogEntry) -> None:
        if entry.name in self.entries:
            raise ValueError(f"duplicate catalog name {entry.name!r}")
        self.entries[entry.name] = entry

    def __iter__(self):
        return iter(self.entries.values())

    def __contains__(self, name) -> bool:
        return name in self.entries

    def __getitem__(self, name) -> CatalogEntry:
        return self.entries[name]

    @classmethod
    def from_json(cls, raw: dict) -> NameCatalog:
        out = cls()
        for row in raw["entries"]:
            tag = parse_monomial(row["tag"]) if row.get("tag") else None
            out.add(CatalogEntry(row["name"], int(row["stem"]), int(row["s"]), tag,
                                 row.get("convention", "lex-greatest")))
        return out


def default_catalog() -> NameCatalog:
    """Standard names for indecomposables and the classes in the 51-54 stems."""
    rows = [
        ("h0", 0, 1), ("h1", 1, 1), ("h2", 3, 1), ("h3", 7, 1), ("h4", 15, 1), ("h5", 31, 1),
        ("c0", 8, 3), ("Ph1", 9, 5), ("Ph2", 11, 5), ("d0", 14, 4), ("e0", 17, 4),
        ("f0", 18, 4), ("c1", 19, 3), ("g", 20, 4),
        ("D1", 52, 5, (4, 7, 11, 15, 15)),
        ("G", 54, 6, (2, 4, 7, 11, 15, 15)),
    ]
    return NameCatalog(CatalogEntry(r[0], r[1], r[2], r[3] if len(r) > 3 else None) for r in rows)


def identify(catalog: NameCatalog, table: ExtTable, strict: bool = True) -> ExtTable:
    """Attach catalog names to classes; unresolved cases go to ``table.report``.

    Entries outside the table's computed range are skipped.  An entry whose
    bidegree is inside the range but holds no class is a hard error.  Tags are
    compared only when the entry and the table use the same tag convention;
    otherwise the entry is matched by bidegree alone.
    """
    convention = table.metadata.get("convention")
    max_t = table.metadata.get("max_t")
    max_s = table.metadata.get("max_s")
    classes = {k: list(v) for k, v in table.classes.items()}
    report = list(table.report)
    for e in catalog:
        t = e.stem + e.s
        if max_t is not None and t > max_t:
            continue
        if max_s is not None and e.s > max_s:
            continue
        found = classes.get((e.s, t), [])
        if not found:
            if strict:
                raise CatalogMismatch(f"{e.name}: no class at stem {e.stem}, s {e.s}")
            report.append(f"{e.name}: no class at stem {e.stem}, s {e.s}")
            continue
        if e.tag is not None and e.convention == convention:
            hits = [i for i, c in enumerate(found) if c.tag == e.tag]
            if not hits:
                report.append(f"{e.name}: no class at stem {e.stem}, s {e.s} has tag {format_monomial(e.tag)}")
                continue
        elif len(found) == 1:
            hits = [0]
        else:
            report.append(f"{e.name}: {len(found)} classes at stem {e.stem}, s {e.s}; not guessing")
            continue
        i = hits[0]
        found[i] = found[i].with_name(e.name)
        classes[(e.s, t)] = found
    return ExtTable(classes, dict(table.metadata), report)


_default_engine: LambdaExt | None = None


def default_engine() -> LambdaExt:
    global _default_engine
    if _default_engine is None:
        _default_engine = LambdaExt()
    return _default_engine


def differential_matrix(s: int, t: int) -> BitMatrix:
    return default_engine().differential_matrix(s, t)


def homology_basis(s: int, t: int) -> list[HomologyClass]:
    return default_engine().homology_basis(s, t)


def ext_dimensions(max_t: int, max_s: int | None = None) -> dict[tuple[int, int], int]:
    return default_engine().ext_dimensions(max_t, max_s)


def bound_by(e: LambdaElement) -> LambdaElement | None:
    return default_engine().bound_by(e)
