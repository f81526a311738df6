"""Integer matrix algebra and finite abelian quotients of Z^n.

Smith normal form over the integers, quotient groups Z^n / rowspan(M),
quotient maps determined by generator images, and the exhaustive enumeration
of maps that restrict to a bijection on a given vertex set.  All arithmetic
is exact (Python integers inside the elimination, numpy at the interface).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InfiniteQuotientError
from .geometry import Shape

Element = tuple[int, ...]


def _to_int_rows(matrix) -> list[list[int]]:
    arr = np.asarray(matrix)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("expected a square matrix")
    return [[int(x) for x in row] for row in arr]


def _identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _pivot(a: list[list[int]], s: int) -> tuple[int, int] | None:
    """Nonzero entry of least absolute value in a[s:, s:], row-major ties."""
    best = None
    for i in range(s, len(a)):
        for j in range(s, len(a)):
            v = a[i][j]
            if v != 0 and (best is None or abs(v) < abs(a[best[0]][best[1]])):
                best = (i, j)
    return best


def smith_normal_form(matrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decompose an integer matrix M as U @ M @ V == D.

    U and V are unimodular, D is diagonal with nonnegative entries and each
    diagonal entry divides the next.  Works for singular input (trailing
    zeros on the diagonal).  Pivots are chosen by least absolute value with
    row-major tie-breaks, which keeps the output deterministic.
    """
    a = _to_int_rows(matrix)
    n = len(a)
    u = _identity(n)
    v = _identity(n)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, k):
        # row dst += k * row src
        a[dst] = [x + k * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + k * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, k):
        for row in a:
            row[dst] += k * row[src]
        for row in v:
            row[dst] += k * row[src]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    s = 0
    while s < n:
        loc = _pivot(a, s)
        if loc is None:
            break
        swap_rows(s, loc[0])
        swap_cols(s, loc[1])
        # Clear the pivot cross; a failed exact division reintroduces a
        # smaller remainder, so re-pivot and repeat until the cross is clean.
        dirty = True
        while dirty:
            dirty = False
            for i in range(s + 1, n):
                if a[i][s] != 0:
                    add_row(i, s, -(a[i][s] // a[s][s]))
                    if a[i][s] != 0:
                        swap_rows(s, i)
                        dirty = True
            for j in range(s + 1, n):
                if a[s][j] != 0:
                    add_col(j, s, -(a[s][j] // a[s][s]))
                    if a[s][j] != 0:
                        swap_cols(s, j)
                        dirty = True
        # Enforce the divisor chain: pull a column holding an entry the pivot
        # does not divide into column s and redo elimination at this index.
        offender_col = None
        for i in range(s + 1, n):
            for j in range(s + 1, n):
                if a[i][j] % a[s][s] != 0:
                    offender_col = j
                    break
            if offender_col is not None:
                break
        if offender_col is not None:
            add_col(s, offender_col, 1)
            continue
        if a[s][s] < 0:
            negate_row(s)
        s += 1

    return (
        np.array(u, dtype=np.int64),
        np.array(a, dtype=np.int64),
        np.array(v, dtype=np.int64),
    )


def invariant_factors(matrix) -> tuple[int, ...]:
    """Diagonal of the Smith form, including 1s and trailing 0s."""
    _, d, _ = smith_normal_form(matrix)
    return tuple(int(d[i, i]) for i in range(d.shape[0]))


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """A finite abelian group as a divisor chain of invariant factors.

    Elements are mixed-radix tuples (x_1, ..., x_k) with x_i in Z_{d_i}.
    The trivial group has an empty factor tuple and the single element ().
    """

    factors: tuple[int, ...]

    def __post_init__(self):
        for d in self.factors:
            if d < 2:
                raise ValueError("invariant factors must be >= 2")
        for a, b in zip(self.factors, self.factors[1:]):
            if b % a != 0:
                raise ValueError("factors must form a divisor chain")

    @property
    def order(self) -> int:
        return math.prod(self.factors)

    def elements(self) -> list[Element]:
        return list(itertools.product(*(range(d) for d in self.factors)))

    def zero(self) -> Element:
        return (0,) * len(self.factors)

    def reduce(self, coords) -> Element:
        return tuple(int(c) % d for c, d in zip(coords, self.factors))

    def element_add(self, a: Element, b: Element) -> Element:
        return tuple((x + y) % d for x, y, d in zip(a, b, self.factors))

    def element_scale(self, a: Element, k: int) -> Element:
        return tuple((k * x) % d for x, d in zip(a, self.factors))

    def element_order(self, a: Element) -> int:
        """Least k >= 1 with k * a = 0."""
        order = 1
        for x, d in zip(a, self.factors):
            order = math.lcm(order, d // math.gcd(d, x))
        return order

    def encode(self, a: Element) -> int:
        """Mixed-radix rank of an element, used for fast bijectivity checks."""
        idx = 0
        for x, d in zip(a, self.factors):
            idx = idx * d + x
        return idx

    def describe(self) -> str:
        if not self.factors:
            return "trivial"
        return " x ".join(f"Z{d}" for d in self.factors)

    @staticmethod
    def parse(text: str) -> "FiniteAbelianGroup":
        """Parse specs like "Z20" or "Z2xZ2xZ5" into invariant-factor form.

        The listed cyclic orders are combined into a proper divisor chain, so
        "Z2xZ10" and "Z2xZ2xZ5" name the same group.
        """
        text = text.strip()
        if text.lower() in ("trivial", "1", "z1"):
            return FiniteAbelianGroup(())
        orders = []
        for part in text.replace("*", "x").split("x"):
            part = part.strip()
            if not part.lower().startswith("z"):
                raise ValueError(f"cannot parse group spec {text!r}")
            orders.append(int(part[1:]))
        return FiniteAbelianGroup(_divisor_chain(orders))


def _divisor_chain(orders) -> tuple[int, ...]:
    """Invariant factors of a direct sum of cyclic groups of given orders."""
    primes: dict[int, list[int]] = {}
    for m in orders:
        if m == 1:
            continue
        if m < 1:
            raise ValueError("cyclic orders must be positive")
        for p, e in _factorint(m).items():
            primes.setdefault(p, []).append(e)
    chains = [sorted(es, reverse=True) for es in primes.values()]
    width = max((len(c) for c in chains), default=0)
    out = []
    for i in range(width):
        d = 1
        for p, es in zip(primes.keys(), chains):
            if i < len(es):
                d *= p ** es[i]
        out.append(d)
    return tuple(sorted(out))


def _factorint(m: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= m:
        while m % p == 0:
            out[p] = out.get(p, 0) + 1
            m //= p
        p += 1
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


@dataclass(frozen=True)
class Homomorphism:
    """A map Z^n -> G fixed by the images of the standard basis vectors."""

    target: FiniteAbelianGroup
    images: tuple[Element, ...]

    @property
    def n(self) -> int:
        return len(self.images)

    def apply(self, cell) -> Element:
        coords = [0] * len(self.target.factors)
        for x, img in zip(cell, self.images):
            for i, g in enumerate(img):
                coords[i] += int(x) * g
        return self.target.reduce(coords)

    def is_surjective(self) -> bool:
        """Whether the images generate the whole target group."""
        if not self.target.factors:
            return True
        reached = {self.target.zero()}
        frontier = [self.target.zero()]
        while frontier:
            g = frontier.pop()
            for img in self.images:
                for delta in (img, self.target.element_scale(img, -1)):
                    h = self.target.element_add(g, delta)
                    if h not in reached:
                        reached.add(h)
                        frontier.append(h)
        return len(reached) == self.target.order

    def image_orders(self) -> tuple[int, ...]:
        return tuple(self.target.element_order(img) for img in self.images)

    def kernel_contains(self, cell) -> bool:
        return self.apply(cell) == self.target.zero()

    def to_json(self) -> dict:
        return {
            "target_factors": list(self.target.factors),
            "images": [list(img) for img in self.images],
        }

    @staticmethod
    def from_json(data) -> "Homomorphism":
        group = FiniteAbelianGroup(tuple(data["target_factors"]))
        return Homomorphism(group, tuple(tuple(img) for img in data["images"]))


def quotient_group(matrix) -> FiniteAbelianGroup:
    """Z^n modulo the row span of the matrix, as invariant factors >= 2."""
    facs = invariant_factors(matrix)
    if any(d == 0 for d in facs):
        raise InfiniteQuotientError("matrix is singular, quotient is infinite")
    return FiniteAbelianGroup(tuple(d for d in facs if d >= 2))


def hom_from_generator_matrix(matrix) -> Homomorphism:
    """The quotient map Z^n -> Z^n / rowspan(M), canonical from the Smith form.

    With U @ M @ V == D, the column map x -> x @ V carries rowspan(M) onto the
    diagonal lattice of D, so reducing coordinate j modulo D[j, j] and dropping
    the trivial factors yields a map whose kernel is exactly rowspan(M).  Any
    other map with that kernel differs by an automorphism of the target.
    """
    _, d, v = smith_normal_form(matrix)
    n = d.shape[0]
    facs = [int(d[i, i]) for i in range(n)]
    if any(f == 0 for f in facs):
        raise InfiniteQuotientError("matrix is singular, quotient is infinite")
    keep = [j for j, f in enumerate(facs) if f >= 2]
    group = FiniteAbelianGroup(tuple(facs[j] for j in keep))
    images = tuple(tuple(int(v[i, j]) % facs[j] for j in keep) for i in range(n))
    return Homomorphism(group, images)


def restriction_bijective(phi: Homomorphism, vstar: Shape) -> bool:
    """Whether the map sends the shape's vertex set bijectively onto the group."""
    if len(vstar) != phi.target.order:
        return False
    seen = {phi.apply(v) for v in vstar.vertices}
    return len(seen) == phi.target.order


def enumerate_bijective_epimorphisms(group: FiniteAbelianGroup, vstar: Shape, n: int = 3) -> list[Homomorphism]:
    """All image assignments (g_1, ..., g_n) bijective on the vertex set.

    Scans the full |G|^n candidate space in lexicographic element order; a
    candidate survives when it maps the vertex set injectively onto all of G
    (which already forces surjectivity).  The scan doubles as an independent
    count oracle, so no algebraic shortcuts are taken.
    """
    if len(vstar) != group.order:
        return []
    cells = vstar.sorted_vertices()
    if any(len(c) != n for c in cells):
        raise ValueError("shape dimension does not match the number of generators")
    elements = group.elements()
    order = group.order
    out = []
    for combo in itertools.product(range(order), repeat=n):
        imgs = [elements[i] for i in combo]
        codes = set()
        ok = True
        for cell in cells:
            code = 0
            for k, d in enumerate(group.factors):
                c = sum(x * img[k] for x, img in zip(cell, imgs)) % d
                code = code * d + c
            if code in codes:
                ok = False
                break
            codes.add(code)
        if ok and len(codes) == order:
            out.append(Homomorphism(group, tuple(imgs)))
    return out


def kernel_equal(a: Homomorphism, b: Homomorphism, basis_matrix) -> bool:
    """Whether two maps out of Z^n share the kernel generated by the given rows.

    Checks that both annihilate every row and that both targets have the same
    order as the row lattice index, which pins the kernels exactly.
    """
    rows = _to_int_rows(basis_matrix)
    index = abs(_int_det(rows))
    for phi in (a, b):
        if phi.target.order != index or not phi.is_surjective():
            return False
        for row in rows:
            if not phi.kernel_contains(tuple(row)):
                return False
    return True


def minor_gcd_invariants(matrix) -> tuple[int, ...]:
    """Independent Smith-form oracle: d_1 ... d_k = gcd of all k x k minors."""
    arr = _to_int_rows(matrix)
    n = len(arr)
    prev = 1
    out = []
    for k in range(1, n + 1):
        g = 0
        for rows in itertools.combinations(range(n), k):
            for cols in itertools.combinations(range(n), k):
                g = math.gcd(g, _int_det([[arr[i][j] for j in cols] for i in rows]))
        if g == 0:
            out.extend([0] * (n - len(out)))
            break
        out.append(g // prev)
        prev = g
    return tuple(out)


def _int_det(a: list[list[int]]) -> int:
    """Exact integer determinant by cofactor expansion (tiny matrices only)."""
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    det = 0
    for j in range(n):
        if a[0][j] == 0:
            continue
        minor = [[a[i][k] for k in range(n) if k != j] for i in range(1, n)]
        det += (-1) ** j * a[0][j] * _int_det(minor)
    return det
