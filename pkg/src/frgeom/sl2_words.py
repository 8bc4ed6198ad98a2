"""SL(2,R) matrix oracle for pants groups: traces, word enumeration, local types.

Words are tuples over the letters 0 = A, 1 = A^-1, 2 = B, 3 = B^-1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .pants_geom import BoundaryLengths, DomainError, ELL0

A, A_INV, B, B_INV = 0, 1, 2, 3
LETTERS = ("A", "a", "B", "b")
INVERSE = (1, 0, 3, 2)
DEFAULT_WORD_CAP = 16
CAPACITY = 10_000_000


class CapacityError(RuntimeError):
    pass


@dataclass(frozen=True)
class Mat2:
    a: float
    b: float
    c: float
    d: float

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __matmul__(self, o: "Mat2") -> "Mat2":
        return Mat2(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                    self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d).renormalized()

    def __neg__(self) -> "Mat2":
        return Mat2(-self.a, -self.b, -self.c, -self.d)

    def inv(self) -> "Mat2":
        return Mat2(self.d, -self.b, -self.c, self.a)

    def renormalized(self, drift: float = 1e-12) -> "Mat2":
        det = self.det
        # for large entries a*d - b*c is itself only known to ~eps*|a*d|; rescaling by it adds noise
        noise = 64 * np.finfo(float).eps * (abs(self.a * self.d) + abs(self.b * self.c))
        if abs(det - 1.0) <= max(drift, noise) or det <= 0:
            return self
        s = 1.0 / math.sqrt(det)
        return Mat2(self.a * s, self.b * s, self.c * s, self.d * s)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])


IDENTITY = Mat2(1.0, 0.0, 0.0, 1.0)


def trace_length(tr: float) -> float:
    """Translation length of a hyperbolic element from its trace."""
    t = abs(tr) / 2
    if t < 1.0:
        raise DomainError(f"|trace| = {abs(tr)} < 2: element is not hyperbolic")
    return 2.0 * math.acosh(t)


@dataclass(frozen=True)
class PantsRep:
    A: Mat2
    B: Mat2
    traces: tuple[float, float, float]
    boundary: BoundaryLengths

    def generators(self) -> tuple[Mat2, Mat2, Mat2, Mat2]:
        return (self.A, self.A.inv(), self.B, self.B.inv())

    def word_matrix(self, word: Sequence[int]) -> Mat2:
        gens = self.generators()
        m = IDENTITY
        for x in word:
            m = m @ gens[x]
        return m

    def word_length(self, word: Sequence[int]) -> float:
        return trace_length(self.word_matrix(word).trace)


def build_pants_rep(b: BoundaryLengths) -> PantsRep:
    """A diagonal, B with b12 = 1, tr B = t2 and tr AB = -t3."""
    t1, t2, t3 = (2.0 * math.cosh(x / 2) for x in b.as_tuple())
    lam = math.exp(b.l1 / 2)
    if lam - 1.0 / lam == 0.0:
        raise DomainError("degenerate construction: l1 = 0")
    b11 = (-t3 - t2 / lam) / (lam - 1.0 / lam)
    b22 = t2 - b11
    b21 = b11 * b22 - 1.0
    return PantsRep(Mat2(lam, 0.0, 0.0, 1.0 / lam), Mat2(b11, 1.0, b21, b22), (t1, t2, t3), b)


def _a(t: float) -> Mat2:
    return Mat2(math.exp(t / 2), 0.0, 0.0, math.exp(-t / 2))


def _w(p: float) -> Mat2:
    return Mat2(math.cosh(p / 2), math.sinh(p / 2), math.sinh(p / 2), math.cosh(p / 2))


ROT = Mat2(0.0, 1.0, -1.0, 0.0)


@dataclass(frozen=True)
class EightRep:
    A1: Mat2
    A2: Mat2
    t1: float
    t2: float
    p: float

    @property
    def trace_A1(self) -> float:
        """|tr A1| = 2 sinh(p/2) sinh(t1/2); the literal SL2 trace carries a minus sign."""
        return abs(self.A1.trace)

    @property
    def trace_A2(self) -> float:
        return abs(self.A2.trace)


def build_eight_rep(t1: float, t2: float, p: float) -> EightRep:
    if not (t1 > 0 and t2 > 0 and p > 0):
        raise DomainError("t1, t2, p must be positive")
    for t in (t1, t2):
        if not 2.0 * math.sinh(p / 2) * math.sinh(t / 2) > 2.0:
            raise DomainError("hyperbolicity violated: 2 sinh(p/2) sinh(t/2) <= 2")
    A1 = _a(t1) @ _w(p) @ ROT
    A2 = ROT.inv() @ _a(t2) @ _w(-p)
    return EightRep(A1, A2, t1, t2, p)


def trace_product_identity_residual(X: Mat2, Y: Mat2) -> float:
    """|tr(XY) - tr X tr Y - tr(-X Y^-1)|."""
    return abs((X @ Y).trace - X.trace * Y.trace - (-(X @ Y.inv())).trace)


# ---------------------------------------------------------------- words

def word_str(word: Sequence[int]) -> str:
    return "".join(LETTERS[x] for x in word) or "1"


def parse_word(s: str) -> tuple[int, ...]:
    out = []
    for ch in s.strip():
        if ch not in LETTERS:
            raise ValueError(f"unknown letter {ch!r}; use A, a (=A^-1), B, b (=B^-1)")
        out.append(LETTERS.index(ch))
    return tuple(out)


def free_reduce(word: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in word:
        if out and out[-1] == INVERSE[x]:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(word: Iterable[int]) -> tuple[int, ...]:
    w = list(free_reduce(word))
    while len(w) >= 2 and w[0] == INVERSE[w[-1]]:
        w = w[1:-1]
    return tuple(w)


def inverse_word(word: Sequence[int]) -> tuple[int, ...]:
    return tuple(INVERSE[x] for x in reversed(word))


def canonical_rotation(word: Sequence[int]) -> tuple[int, ...]:
    """Lexicographically minimal rotation (letter order A < a < B < b)."""
    w = tuple(word)
    if not w:
        return w
    return min(w[i:] + w[:i] for i in range(len(w)))


def canonical_class(word: Iterable[int]) -> tuple[int, ...]:
    return canonical_rotation(cyclic_reduce(word))


def primitive_root(word: Sequence[int]) -> tuple[tuple[int, ...], int]:
    w = tuple(word)
    n = len(w)
    for p in range(1, n + 1):
        if n % p == 0 and w[:p] * (n // p) == w:
            return w[:p], n // p
    return w, 1


def is_primitive(word: Sequence[int]) -> bool:
    return primitive_root(word)[1] == 1


def _power(w: tuple[int, ...], k: int) -> tuple[int, ...]:
    if k >= 0:
        return w * k
    return inverse_word(w) * (-k)


BOUNDARY_WORDS = {"a": (A,), "b": (B,), "c": (B_INV, A_INV)}
"""Peripheral classes with a b c = 1."""


def _local_type_table(max_len: int) -> dict[tuple[int, ...], tuple[str, int, str]]:
    table: dict[tuple[int, ...], tuple[str, int, str]] = {}
    for name, w in BOUNDARY_WORDS.items():
        for s in (1, -1):
            table[canonical_class(_power(w, s))] = ("boundary", 0, name)
    for x, wx in BOUNDARY_WORDS.items():
        for y, wy in BOUNDARY_WORDS.items():
            if x == y:
                continue
            j = 1
            while True:
                w = cyclic_reduce(wx + _power(wy, -j))
                if len(w) > max_len:
                    break
                kind = "figure_eight" if j == 1 else "iterated_eight"
                for v in (w, inverse_word(w)):
                    key = canonical_class(v)
                    table.setdefault(key, (kind, j, x + y))
                j += 1
    return table


_TYPE_CACHE: dict[int, dict] = {}


def local_type(word: Sequence[int], max_len: int = DEFAULT_WORD_CAP) -> tuple[str, int, str]:
    """(type, j, cuff pair) for the class of word, decided on its primitive root."""
    root, _ = primitive_root(canonical_class(word))
    root = canonical_rotation(root)
    n = max(max_len, len(root))
    if n not in _TYPE_CACHE:
        _TYPE_CACHE[n] = _local_type_table(n)
    return _TYPE_CACHE[n].get(root, ("other_filling", 0, ""))


@dataclass(frozen=True)
class GeodesicClass:
    word: tuple[int, ...]
    length: float
    local_type: str
    j: int
    primitive: bool
    cuffs: str = ""

    @property
    def word_str(self) -> str:
        return word_str(self.word)

    @property
    def tag(self) -> str:
        return f"iterated_eight({self.j})" if self.local_type == "iterated_eight" else self.local_type


# seam model: s12 = 0, s13 = 1, s23 = 2. A letter crosses into the second hexagon
# through its first seam and comes back through the second.
_SEAMS = {A: (1, 0), A_INV: (0, 1), B: (0, 2), B_INV: (2, 0)}


def _seam_dist(ls: tuple[float, float, float]) -> np.ndarray:
    l1, l2, l3 = ls
    D = np.zeros((3, 3))
    D[0, 1] = D[1, 0] = l1 / 2
    D[0, 2] = D[2, 0] = l2 / 2
    D[1, 2] = D[2, 1] = l3 / 2
    return D


def crossing_sequence(word: Sequence[int]) -> list[int]:
    seq: list[int] = []
    for x in word:
        s, e = _SEAMS[x]
        if seq and seq[-1] == s:
            seq.pop()
        else:
            seq.append(s)
        seq.append(e)
    if len(seq) >= 2 and seq[0] == seq[-1]:
        seq = seq[1:-1]
    return seq


def seam_lower_bound(word: Sequence[int], b: BoundaryLengths) -> float:
    """Length lower bound: each hexagon passage between seams costs half a cuff."""
    seq = crossing_sequence(cyclic_reduce(word))
    if not seq:
        return 0.0
    D = _seam_dist(b.as_tuple())
    return float(sum(D[seq[i], seq[(i + 1) % len(seq)]] for i in range(len(seq))))


def enumerate_geodesics(rep: PantsRep, max_word_length: int = DEFAULT_WORD_CAP,
                        length_cutoff: float = 6.0, *, primitive_only: bool = False,
                        cap: int = DEFAULT_WORD_CAP) -> list[GeodesicClass]:
    """One representative per oriented conjugacy class with length <= cutoff.

    Depth-first over freely reduced words; a prefix is abandoned once its seam
    lower bound exceeds the cutoff, so the search is exact within the word cap.
    """
    if max_word_length > cap:
        raise ValueError(f"max_word_length {max_word_length} exceeds cap {cap}")
    D = _seam_dist(rep.boundary.as_tuple())
    gens = rep.generators()
    out: list[GeodesicClass] = []
    eps = 1e-9 * max(1.0, length_cutoff)

    # state: word, matrix, seam sequence, accumulated interior cost
    def rec(word: list[int], m: Mat2, seq: list[int], cost: float):
        n = len(word)
        if n:
            first_open = word[0] in (B, A_INV)       # first crossing s12 may cancel cyclically
            last_open = word[-1] in (A, B_INV)       # last crossing s12 may cancel
            lb = cost
            if first_open and len(seq) >= 2:
                lb -= D[seq[0], seq[1]]
            if last_open and len(seq) >= 2:
                lb -= D[seq[-2], seq[-1]]
            if lb > length_cutoff + eps:
                return
            if word[0] != INVERSE[word[-1]] and tuple(word) == canonical_rotation(word):
                tr = abs(m.trace)
                if tr > 2.0:
                    ell = 2.0 * math.acosh(tr / 2)
                    if ell <= length_cutoff:
                        prim = is_primitive(word)
                        if prim or not primitive_only:
                            kind, j, cuffs = local_type(word, max(cap, max_word_length))
                            out.append(GeodesicClass(tuple(word), ell, kind, j, prim, cuffs))
                            if len(out) > CAPACITY:
                                raise CapacityError("more than 1e7 classes")
        if n == max_word_length:
            return
        for x in range(4):
            if n and x == INVERSE[word[-1]]:
                continue
            s, e = _SEAMS[x]
            nseq = list(seq)
            ncost = cost
            if nseq and nseq[-1] == s:
                ncost -= D[nseq[-2], nseq[-1]] if len(nseq) >= 2 else 0.0
                nseq.pop()
            else:
                if nseq:
                    ncost += D[nseq[-1], s]
                nseq.append(s)
            ncost += D[nseq[-1], e]
            nseq.append(e)
            word.append(x)
            rec(word, m @ gens[x], nseq, ncost)
            word.pop()

    rec([], IDENTITY, [], 0.0)
    out.sort(key=lambda g: (g.length, len(g.word), g.word))
    return out


def reduced_words(n: int) -> np.ndarray:
    """All freely reduced words of length n as an (N, n) integer array."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int8)
    words = np.arange(4, dtype=np.int8).reshape(4, 1)
    inv = np.array(INVERSE, dtype=np.int8)
    for _ in range(n - 1):
        last = words[:, -1]
        rows, cols = [], []
        for x in range(4):
            keep = inv[last] != x
            rows.append(words[keep])
            cols.append(np.full(int(keep.sum()), x, dtype=np.int8))
        words = np.concatenate([np.hstack([r, c[:, None]]) for r, c in zip(rows, cols)])
    return words


def word_traces(rep: PantsRep, words: np.ndarray) -> np.ndarray:
    """Vectorised traces of many words of equal length."""
    G = np.stack([g.as_array() for g in rep.generators()])
    M = np.broadcast_to(np.eye(2), (len(words), 2, 2)).copy()
    for k in range(words.shape[1]):
        M = M @ G[words[:, k]]
    return M[:, 0, 0] + M[:, 1, 1]


def bruteforce_classes(rep: PantsRep, max_word_length: int, length_cutoff: float,
                       primitive_only: bool = True) -> dict[tuple[int, ...], float]:
    """Classes of length <= cutoff from an exhaustive scan of all reduced words."""
    found: dict[tuple[int, ...], float] = {}
    inv = np.array(INVERSE)
    for n in range(1, max_word_length + 1):
        W = reduced_words(n)
        W = W[inv[W[:, 0]] != W[:, -1]] if n > 1 else W
        tr = np.abs(word_traces(rep, W))
        with np.errstate(invalid="ignore"):
            ell = 2.0 * np.arccosh(np.maximum(tr / 2, 1.0))
        for row, e in zip(W[(ell <= length_cutoff) & (tr > 2)], ell[(ell <= length_cutoff) & (tr > 2)]):
            w = tuple(int(x) for x in row)
            if primitive_only and not is_primitive(w):
                continue
            key = canonical_rotation(w)
            found.setdefault(key, float(e))
    return found


def counting_bound(L: float, euler_abs: int = 1) -> float:
    return 205.0 * euler_abs * math.exp(L)


@dataclass
class CountRow:
    boundary: tuple[float, float, float]
    boundary_total: float
    count: int
    envelope: float


@dataclass
class FillingDecay:
    rows: list[CountRow]
    L: float
    eta: float
    C: float
    verified: bool
    word_cap: int = field(default=DEFAULT_WORD_CAP)


def filling_count_decay(reps: Sequence[PantsRep], L: float, eta: float = 0.1,
                        max_word_length: int = 10) -> FillingDecay:
    """Count primitive filling classes of length <= L for a family of pants.

    Fits one C with count <= C exp(L - (1-eta)/2 * boundary total) across the
    family. Below the figure-eight floor every count is zero.
    """
    if len(reps) < 3:
        raise ValueError("need at least three pants")
    rows = []
    for rep in reps:
        if L < ELL0:
            n = 0
        else:
            cls = enumerate_geodesics(rep, max_word_length, L, primitive_only=True,
                                      cap=max(DEFAULT_WORD_CAP, max_word_length))
            n = sum(1 for g in cls if g.local_type != "boundary")
        tot = rep.boundary.total
        rows.append(CountRow(rep.boundary.as_tuple(), tot, n, math.exp(L - (1 - eta) / 2 * tot)))
    C = max((r.count / r.envelope for r in rows), default=0.0)
    verified = all(r.count <= C * r.envelope * (1 + 1e-12) for r in rows) and math.isfinite(C)
    return FillingDecay(rows, L, eta, C, verified, max_word_length)
