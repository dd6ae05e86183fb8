"""Rational functions with prescribed pole locations and their expansions.

The central type is ``PoleRational``: an exact multivariate rational
function

    numerator / ( prod_{i<j} (z_i - z_j)^{p_ij} * prod_i z_i^{q_i} )

held in canonical form: the numerator is a sparse polynomial over
``Fraction`` and no denominator factor divides it.  The pairwise orders
``p_ij`` live in ``pair_orders``; the orders at the origin ``q_i`` live in
``zero_orders`` (a pole at z_i = 0 is a pole at "z_i equals an extra
variable frozen at 0", so keeping those orders in their own slot
preserves the difference-of-variables denominator shape).

Expansions are iterated Laurent series.  A *region* is a total order on
the variables, outermost first; the series lives in
Q((z_{r1}))((z_{r2}))... and 1/(z_a - z_b) expands in whichever of the
two variables comes later in the order.  ``TruncatedLaurent`` stores a
finite piece of such a series together with a completeness certificate:

  * ``window``: for every monomial whose suffix exponent sums (in region
    order, including the full sum) are all <= window, the stored
    coefficient is exact and absent means zero;
  * ``neg``: every monomial of the *full* series has all suffix sums
    >= -neg (a consequence of the denominator orders), which is what
    makes the window bookkeeping closed under multiplication.

``reconstruct`` inverts the expansion: clearing denominators turns the
window into exact linear conditions on the numerator, and window size
>= numerator degree guarantees uniqueness.  ``reconstruct_affine`` does
the same when the series coordinates are related to the function's
variables by +/-1 sums (e.g. z = zeta + x), which is how insertion-style
compositions are recovered.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Mapping, Sequence

from .scalars import Matrix, solve

Mono = tuple[int, ...]
Poly = dict[Mono, Fraction]

INF = 10**9


class UnderdeterminedError(Exception):
    """The truncated data cannot pin the function down; carries the window
    that would have sufficed."""

    def __init__(self, needed: int, available: int, detail: str = ""):
        self.needed = needed
        self.available = available
        super().__init__(
            f"window {available} too small, need {needed}"
            + (f" ({detail})" if detail else "")
        )


class InconsistentError(Exception):
    """No rational function within the pole bounds matches the series."""

    def __init__(self, witness, detail: str = ""):
        self.witness = witness
        super().__init__(f"series is not rational within the bounds: {detail or witness}")


# ---------------------------------------------------------------------------
# sparse polynomial helpers


def p_zero() -> Poly:
    return {}

def p_const(nvars: int, c) -> Poly:
    c = Fraction(c)
    return {} if c == 0 else {(0,) * nvars: c}

def p_var(nvars: int, i: int) -> Poly:
    e = [0] * nvars
    e[i] = 1
    return {tuple(e): Fraction(1)}

def p_linear(nvars: int, form: Mapping[int, int]) -> Poly:
    """The polynomial sum_v form[v] * z_v."""
    out: Poly = {}
    for v, c in form.items():
        if c:
            e = [0] * nvars
            e[v] = 1
            out[tuple(e)] = Fraction(c)
    return out

def p_add(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for e, c in b.items():
        s = out.get(e, 0) + c
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return out

def p_neg(a: Poly) -> Poly:
    return {e: -c for e, c in a.items()}

def p_sub(a: Poly, b: Poly) -> Poly:
    return p_add(a, p_neg(b))

def p_scale(a: Poly, c) -> Poly:
    c = Fraction(c)
    if c == 0:
        return {}
    return {e: c * x for e, x in a.items()}

def p_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            s = out.get(e, 0) + ca * cb
            if s:
                out[e] = s
            else:
                out.pop(e, None)
    return out

def p_derivative(a: Poly, i: int) -> Poly:
    out: Poly = {}
    for e, c in a.items():
        if e[i] == 0:
            continue
        ne = list(e)
        ne[i] -= 1
        out[tuple(ne)] = c * e[i]
    return out

def p_total_degrees(a: Poly) -> tuple[int, int] | None:
    """(min, max) total degree over the support, None for the zero poly."""
    if not a:
        return None
    degs = [sum(e) for e in a]
    return min(degs), max(degs)

def p_substitute(a: Poly, images: Sequence[Poly], nvars_new: int) -> Poly:
    """Substitute variable i -> images[i]; images are polys in the new vars."""
    out: Poly = {}
    cache: dict[tuple[int, int], Poly] = {}

    def power(i: int, k: int) -> Poly:
        key = (i, k)
        if key not in cache:
            prev = power(i, k - 1) if k > 1 else p_const(nvars_new, 1)
            cache[key] = p_mul(prev, images[i])
        return cache[key]

    for e, c in a.items():
        term = p_const(nvars_new, c)
        for i, k in enumerate(e):
            if k:
                term = p_mul(term, power(i, k))
        out = p_add(out, term)
    return out

def p_embed(a: Poly, nvars_new: int, var_map: Sequence[int]) -> Poly:
    """Re-index variables: old variable i becomes new variable var_map[i]."""
    out: Poly = {}
    for e, c in a.items():
        ne = [0] * nvars_new
        for i, k in enumerate(e):
            if k:
                ne[var_map[i]] += k
        key = tuple(ne)
        s = out.get(key, 0) + c
        if s:
            out[key] = s
        else:
            out.pop(key, None)
    return out


def divide_by_difference(a: Poly, i: int, j: int) -> Poly | None:
    """Exact quotient a / (z_i - z_j), or None if not divisible."""
    if not a:
        return {}
    quotient: Poly = {}
    rest = dict(a)
    while True:
        top_deg = max((e[i] for e in rest), default=0)
        if top_deg == 0:
            break
        layer = [(e, c) for e, c in rest.items() if e[i] == top_deg]
        for e, c in layer:
            ne = list(e)
            ne[i] -= 1
            q = tuple(ne)
            quotient[q] = quotient.get(q, Fraction(0)) + c
            rest.pop(e)
            ne[j] += 1
            key = tuple(ne)
            s = rest.get(key, 0) + c
            if s:
                rest[key] = s
            else:
                rest.pop(key, None)
    return quotient if not rest else None

def divide_by_var(a: Poly, i: int) -> Poly | None:
    if not a:
        return {}
    if any(e[i] == 0 for e in a):
        return None
    out: Poly = {}
    for e, c in a.items():
        ne = list(e)
        ne[i] -= 1
        out[tuple(ne)] = c
    return out


# ---------------------------------------------------------------------------
# PoleRational


def _norm_pairs(nvars: int, pairs: Mapping[tuple[int, int], int] | None) -> dict:
    out: dict[tuple[int, int], int] = {}
    for (i, j), p in (pairs or {}).items():
        if p < 0:
            raise ValueError("negative pole order")
        if p == 0:
            continue
        if i == j or not (0 <= i < nvars and 0 <= j < nvars):
            raise ValueError("bad pole pair")
        key = (i, j) if i < j else (j, i)
        out[key] = out.get(key, 0) + p
    return out


class PoleRational:
    """Exact rational function with poles only on diagonals and the origin."""

    __slots__ = ("nvars", "num", "pair_orders", "zero_orders")

    def __init__(
        self,
        nvars: int,
        num: Poly,
        pair_orders: Mapping[tuple[int, int], int] | None = None,
        zero_orders: Sequence[int] | None = None,
    ):
        self.nvars = nvars
        num = {tuple(e): Fraction(c) for e, c in num.items() if c}
        pairs = _norm_pairs(nvars, pair_orders)
        zeros = list(zero_orders) if zero_orders is not None else [0] * nvars
        if len(zeros) != nvars or any(q < 0 for q in zeros):
            raise ValueError("bad zero_orders")
        # canonical form: no denominator factor divides the numerator
        changed = True
        while changed and num:
            changed = False
            for (i, j), p in list(pairs.items()):
                while p > 0:
                    q = divide_by_difference(num, i, j)
                    if q is None:
                        break
                    num, p, changed = q, p - 1, True
                if p:
                    pairs[(i, j)] = p
                else:
                    del pairs[(i, j)]
            for i in range(nvars):
                while zeros[i] > 0:
                    q = divide_by_var(num, i)
                    if q is None:
                        break
                    num, zeros[i], changed = q, zeros[i] - 1, True
        if not num:
            pairs, zeros = {}, [0] * nvars
        self.num = num
        self.pair_orders = pairs
        self.zero_orders = tuple(zeros)

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "PoleRational":
        return cls(nvars, {})

    @classmethod
    def const(cls, nvars: int, c) -> "PoleRational":
        return cls(nvars, p_const(nvars, c))

    @classmethod
    def monomial(cls, nvars: int, mono: Mono, c=Fraction(1)) -> "PoleRational":
        return cls(nvars, {tuple(mono): Fraction(c)})

    # -- structure -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def denominator_factors(self) -> list[tuple[dict[int, int], int]]:
        """Denominator as a list of (+/-1 linear form, order)."""
        fs: list[tuple[dict[int, int], int]] = [
            ({i: 1, j: -1}, p) for (i, j), p in sorted(self.pair_orders.items())
        ]
        fs += [({i: 1}, q) for i, q in enumerate(self.zero_orders) if q]
        return fs

    def total_pole_order(self) -> int:
        return sum(self.pair_orders.values()) + sum(self.zero_orders)

    def numerator_degree(self) -> int:
        """Max total degree of the numerator (-1 for the zero function)."""
        span = p_total_degrees(self.num)
        return -1 if span is None else span[1]

    def homogeneous_degree(self) -> int | None:
        """Total degree if the function is homogeneous, else None."""
        span = p_total_degrees(self.num)
        if span is None or span[0] != span[1]:
            return None
        return span[0] - self.total_pole_order()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PoleRational)
            and self.nvars == other.nvars
            and self.num == other.num
            and self.pair_orders == other.pair_orders
            and self.zero_orders == other.zero_orders
        )

    def __hash__(self):
        return hash(
            (
                self.nvars,
                frozenset(self.num.items()),
                frozenset(self.pair_orders.items()),
                self.zero_orders,
            )
        )

    # -- arithmetic ------------------------------------------------------------

    def _raised_numerator(self, pairs: Mapping, zeros: Sequence[int]) -> Poly:
        """Numerator after raising the denominator to (pairs, zeros)."""
        num = self.num
        for (i, j), p in pairs.items():
            extra = p - self.pair_orders.get((i, j), 0)
            form = p_sub(p_var(self.nvars, i), p_var(self.nvars, j))
            for _ in range(extra):
                num = p_mul(num, form)
        for i in range(self.nvars):
            for _ in range(zeros[i] - self.zero_orders[i]):
                num = p_mul(num, p_var(self.nvars, i))
        return num

    def add(self, other: "PoleRational") -> "PoleRational":
        if self.nvars != other.nvars:
            raise ValueError("variable count mismatch")
        pairs: dict[tuple[int, int], int] = {}
        for key in set(self.pair_orders) | set(other.pair_orders):
            pairs[key] = max(self.pair_orders.get(key, 0), other.pair_orders.get(key, 0))
        zeros = [max(a, b) for a, b in zip(self.zero_orders, other.zero_orders)]
        num = p_add(self._raised_numerator(pairs, zeros), other._raised_numerator(pairs, zeros))
        return PoleRational(self.nvars, num, pairs, zeros)

    def sub(self, other: "PoleRational") -> "PoleRational":
        return self.add(other.neg())

    def mul(self, other: "PoleRational") -> "PoleRational":
        if self.nvars != other.nvars:
            raise ValueError("variable count mismatch")
        pairs: dict[tuple[int, int], int] = {}
        for key in set(self.pair_orders) | set(other.pair_orders):
            pairs[key] = self.pair_orders.get(key, 0) + other.pair_orders.get(key, 0)
        zeros = [a + b for a, b in zip(self.zero_orders, other.zero_orders)]
        return PoleRational(self.nvars, p_mul(self.num, other.num), pairs, zeros)

    def scale(self, c) -> "PoleRational":
        return PoleRational(self.nvars, p_scale(self.num, c), self.pair_orders, self.zero_orders)

    def neg(self) -> "PoleRational":
        return self.scale(-1)

    def mul_poly(self, poly: Poly) -> "PoleRational":
        return PoleRational(self.nvars, p_mul(self.num, poly), self.pair_orders, self.zero_orders)

    # -- variable operations ---------------------------------------------------

    def partial_derivative(self, i: int) -> "PoleRational":
        """d/dz_i, as an exact rational function."""
        touching = [(f, p) for f, p in self.denominator_factors() if i in f]
        forms = [p_linear(self.nvars, f) for f, _ in touching]
        num = p_derivative(self.num, i)
        for form in forms:
            num = p_mul(num, form)
        for idx, (f, p) in enumerate(touching):
            piece = p_scale(self.num, Fraction(-p * f[i]))
            for jdx, form in enumerate(forms):
                if jdx != idx:
                    piece = p_mul(piece, form)
            num = p_add(num, piece)
        pairs = {key: p + (1 if i in key else 0) for key, p in self.pair_orders.items()}
        zeros = [
            q + (1 if (v == i and q > 0) else 0) for v, q in enumerate(self.zero_orders)
        ]
        return PoleRational(self.nvars, num, pairs, zeros)

    def shift_var(self, i: int) -> "PoleRational":
        """Substitute z_i -> z_i - z_new, with z_new appended as the last
        variable; a pole of the input at z_i = 0 becomes a pole on the new
        pair (i, nvars).

        Only allowed when variable i carries no pairwise poles: those would
        leave the difference-of-variables denominator class.
        """
        n = self.nvars
        if any(i in key for key in self.pair_orders):
            raise ValueError("variable has pairwise poles; substitute at series level")
        images = [
            p_sub(p_var(n + 1, i), p_var(n + 1, n)) if v == i else p_var(n + 1, v)
            for v in range(n)
        ]
        num = p_substitute(self.num, images, n + 1)
        pairs = dict(self.pair_orders)
        zeros = list(self.zero_orders) + [0]
        if zeros[i]:
            pairs[(i, n)] = zeros[i]
            zeros[i] = 0
        return PoleRational(n + 1, num, pairs, zeros)

    def scale_vars(self) -> "PoleRational":
        """Substitute z_i -> lambda * z_i, lambda appended as the last variable.

        For a homogeneous function of degree d the result equals
        lambda^d times the original (embedded in the larger variable set).
        """
        n = self.nvars
        num: Poly = {tuple(list(e) + [sum(e)]): c for e, c in self.num.items()}
        zeros = list(self.zero_orders) + [self.total_pole_order()]
        return PoleRational(n + 1, num, dict(self.pair_orders), zeros)

    def embed(self, nvars_new: int, var_map: Sequence[int]) -> "PoleRational":
        """View the function in a larger variable set via an injective map."""
        if len(set(var_map)) != self.nvars:
            raise ValueError("variable map must be injective")
        num = p_embed(self.num, nvars_new, var_map)
        pairs: dict[tuple[int, int], int] = {}
        flips = 0
        for (i, j), p in self.pair_orders.items():
            a, b = var_map[i], var_map[j]
            if a > b:
                # (z_i - z_j)^-p becomes (z_b - z_a)^-p up to (-1)^p
                a, b = b, a
                flips += p
            pairs[(a, b)] = pairs.get((a, b), 0) + p
        if flips % 2:
            num = p_scale(num, Fraction(-1))
        zeros = [0] * nvars_new
        for i, q in enumerate(self.zero_orders):
            zeros[var_map[i]] = q
        return PoleRational(nvars_new, num, pairs, zeros)

    # -- display -------------------------------------------------------------

    def pretty(self, names: Sequence[str] | None = None) -> str:
        names = list(names) if names else [f"z{i+1}" for i in range(self.nvars)]

        def mono_str(e: Mono) -> str:
            parts = [names[i] + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k]
            return "*".join(parts) if parts else "1"

        if not self.num:
            return "0"
        terms = []
        for e in sorted(self.num, reverse=True):
            c = self.num[e]
            ms = mono_str(e)
            if ms == "1":
                terms.append(str(c))
            elif c == 1:
                terms.append(ms)
            elif c == -1:
                terms.append("-" + ms)
            else:
                terms.append(f"{c}*{ms}")
        num_s = " + ".join(terms).replace("+ -", "- ")
        dens = []
        for (i, j), p in sorted(self.pair_orders.items()):
            dens.append(f"({names[i]}-{names[j]})" + (f"^{p}" if p > 1 else ""))
        for i, q in enumerate(self.zero_orders):
            if q:
                dens.append(names[i] + (f"^{q}" if q > 1 else ""))
        if not dens:
            return num_s
        return f"({num_s}) / ({' '.join(dens)})"

    def __repr__(self) -> str:
        return self.pretty()


# ---------------------------------------------------------------------------
# truncated iterated-Laurent series


def wdeg(mono: Mono, region: Sequence[int]) -> int:
    """Largest suffix sum of the exponents in region order (incl. the full sum)."""
    s = 0
    best = 0
    first = True
    for v in reversed(region):
        s += mono[v]
        if first or s > best:
            best = s
            first = False
    return best


class TruncatedLaurent:
    """Window of an iterated Laurent expansion; see the module docstring."""

    __slots__ = ("nvars", "region", "coeffs", "window", "neg")

    def __init__(
        self,
        nvars: int,
        region: Sequence[int],
        coeffs: Mapping[Mono, Fraction],
        window: int,
        neg: int,
    ):
        region = tuple(region)
        if sorted(region) != list(range(nvars)):
            raise ValueError("region must be a total order on the variables")
        self.nvars = nvars
        self.region = region
        self.window = window
        self.neg = neg
        self.coeffs = {
            tuple(e): Fraction(c)
            for e, c in coeffs.items()
            if c and wdeg(e, region) <= window
        }

    # spec-facing aliases
    @property
    def coefficients(self) -> dict[Mono, Fraction]:
        return self.coeffs

    @property
    def order_cutoff(self) -> int:
        return self.window

    @classmethod
    def from_poly(cls, nvars: int, region: Sequence[int], poly: Poly) -> "TruncatedLaurent":
        return cls(nvars, region, poly, INF, 0)

    @classmethod
    def zero(cls, nvars: int, region: Sequence[int], window: int = INF) -> "TruncatedLaurent":
        return cls(nvars, region, {}, window, 0)

    def get(self, mono: Mono) -> Fraction:
        mono = tuple(mono)
        if wdeg(mono, self.region) > self.window:
            raise KeyError(f"monomial {mono} outside certified window {self.window}")
        return self.coeffs.get(mono, Fraction(0))

    def restrict(self, window: int) -> "TruncatedLaurent":
        if window >= self.window:
            return self
        return TruncatedLaurent(self.nvars, self.region, self.coeffs, window, self.neg)

    def add(self, other: "TruncatedLaurent") -> "TruncatedLaurent":
        if self.region != other.region:
            raise ValueError("region mismatch")
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return TruncatedLaurent(
            self.nvars, self.region, out,
            min(self.window, other.window), max(self.neg, other.neg),
        )

    def sub(self, other: "TruncatedLaurent") -> "TruncatedLaurent":
        return self.add(other.scale(-1))

    def scale(self, c) -> "TruncatedLaurent":
        c = Fraction(c)
        coeffs = {} if c == 0 else {e: c * x for e, x in self.coeffs.items()}
        return TruncatedLaurent(self.nvars, self.region, coeffs, self.window, self.neg)

    def mul(self, other: "TruncatedLaurent") -> "TruncatedLaurent":
        if self.region != other.region:
            raise ValueError("region mismatch")
        window = min(self.window - other.neg, other.window - self.neg)
        out: dict[Mono, Fraction] = {}
        for ea, ca in self.coeffs.items():
            for eb, cb in other.coeffs.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                if wdeg(e, self.region) > window:
                    continue
                s = out.get(e, 0) + ca * cb
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return TruncatedLaurent(self.nvars, self.region, out, window, self.neg + other.neg)

    def mul_poly(self, poly: Poly) -> "TruncatedLaurent":
        return self.mul(TruncatedLaurent.from_poly(self.nvars, self.region, poly))

    def shift(self, mono: Mono) -> "TruncatedLaurent":
        """Multiply by the (possibly negative) monomial z^mono."""
        drop = sum(-x for x in mono if x < 0)
        window = self.window - drop
        out = {}
        for e, c in self.coeffs.items():
            ne = tuple(x + y for x, y in zip(e, mono))
            if wdeg(ne, self.region) <= window:
                out[ne] = c
        return TruncatedLaurent(self.nvars, self.region, out, window, self.neg + drop)

    def is_zero_on_window(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        """Equality of the certified parts on the common window."""
        if not isinstance(other, TruncatedLaurent):
            return NotImplemented
        if self.region != other.region:
            raise ValueError("region mismatch")
        w = min(self.window, other.window)
        a = {e: c for e, c in self.coeffs.items() if wdeg(e, self.region) <= w}
        b = {e: c for e, c in other.coeffs.items() if wdeg(e, other.region) <= w}
        return a == b

    def __repr__(self) -> str:
        items = ", ".join(f"{e}: {c}" for e, c in sorted(self.coeffs.items())[:8])
        more = ", ..." if len(self.coeffs) > 8 else ""
        return (
            f"TruncatedLaurent(region={self.region}, window={self.window}, "
            f"neg={self.neg}, {{{items}{more}}})"
        )


def expand_linear_power(
    nvars: int,
    region: Sequence[int],
    form: Mapping[int, int],
    power: int,
    depth: int,
) -> TruncatedLaurent:
    """Expansion of (sum_v form[v] * z_v)^(-power) in the region.

    The region-earliest variable of the form dominates the rest; its
    coefficient must be +/-1.  Complete on the window ``depth``.
    """
    region = tuple(region)
    if power < 0:
        raise ValueError("power must be >= 0")
    if power == 0:
        return TruncatedLaurent.from_poly(nvars, region, p_const(nvars, 1))
    lead = next((v for v in region if form.get(v)), None)
    if lead is None:
        raise ValueError("form is identically zero")
    c = Fraction(form[lead])
    rest = p_linear(nvars, {v: cv for v, cv in form.items() if v != lead})
    coeffs: dict[Mono, Fraction] = {}
    rk: Poly = p_const(nvars, 1)
    for k in range(depth + 1):
        factor = Fraction((-1) ** k * comb(power - 1 + k, k)) / c ** (power + k)
        for e, x in rk.items():
            ne = list(e)
            ne[lead] -= power + k
            coeffs[tuple(ne)] = factor * x
        if not rest:
            # single-variable form: that one term is the whole series
            return TruncatedLaurent(nvars, region, coeffs, INF, power)
        if k < depth:
            rk = p_mul(rk, rest)
    return TruncatedLaurent(nvars, region, coeffs, depth, power)


def iota_expand(f: PoleRational, region: Sequence[int], window: int) -> TruncatedLaurent:
    """Expand f as an iterated Laurent series, complete on the given window."""
    region = tuple(region)
    depth = window + f.total_pole_order()
    remaining = f.total_pole_order()
    out = TruncatedLaurent.from_poly(f.nvars, region, f.num).restrict(depth)
    for (i, j), p in sorted(f.pair_orders.items()):
        remaining -= p
        out = out.mul(expand_linear_power(f.nvars, region, {i: 1, j: -1}, p, depth))
        out = out.restrict(window + remaining)
    if any(f.zero_orders):
        out = out.shift(tuple(-q for q in f.zero_orders))
    return out.restrict(window)


def expand_in_coords(
    f: PoleRational,
    images: Sequence[Mapping[int, int]],
    nvars_coords: int,
    region: Sequence[int],
    window: int,
) -> TruncatedLaurent:
    """Expand f(L_0, ..., L_{n-1}) where L_i = images[i] is an integer
    linear form in auxiliary coordinates (e.g. z1 = z2 + x).

    This is how a function of the z's is compared against a series
    produced in substituted coordinates; ``iota_expand`` is the special
    case where the images are the coordinates themselves.  Each
    denominator factor must stay a nonzero linear form after
    substitution.
    """
    region = tuple(region)
    depth = window + f.total_pole_order()
    remaining = f.total_pole_order()
    image_polys = [p_linear(nvars_coords, dict(im)) for im in images]
    out = TruncatedLaurent.from_poly(
        nvars_coords, region, p_substitute(f.num, image_polys, nvars_coords)
    ).restrict(depth)
    for form, p in f.denominator_factors():
        combined: dict[int, int] = {}
        for v, c in form.items():
            for w, cw in images[v].items():
                combined[w] = combined.get(w, 0) + c * cw
        combined = {w: c for w, c in combined.items() if c}
        if not combined:
            raise ValueError("denominator factor collapses under the substitution")
        remaining -= p
        out = out.mul(expand_linear_power(nvars_coords, region, combined, p, depth))
        out = out.restrict(window + remaining)
    return out.restrict(window)


def reconstruct(
    s: TruncatedLaurent,
    pair_bounds: Mapping[tuple[int, int], int],
    zero_bounds: Sequence[int] | None,
    degree_bound: int,
    homogeneous_degree: int | None = None,
) -> PoleRational:
    """Recover the rational function a truncated expansion came from.

    The candidate numerator has total degree <= degree_bound over the
    denominator prescribed by the bounds.  Raises UnderdeterminedError if
    the window cannot pin the numerator down, InconsistentError if no
    candidate matches (the series is not rational within the bounds).
    """
    n = s.nvars
    pairs = _norm_pairs(n, pair_bounds)
    zeros = list(zero_bounds) if zero_bounds is not None else [0] * n
    t = s
    for (i, j), p in sorted(pairs.items()):
        form = p_sub(p_var(n, i), p_var(n, j))
        for _ in range(p):
            t = t.mul_poly(form)
    if any(zeros):
        t = t.shift(tuple(zeros))
    if t.window < degree_bound:
        raise UnderdeterminedError(degree_bound, t.window, "raise the expansion window")
    num: Poly = {}
    for e, c in t.coeffs.items():
        if min(e, default=0) >= 0 and sum(e) <= degree_bound:
            if homogeneous_degree is not None and sum(e) != homogeneous_degree:
                raise InconsistentError((e, c), "inhomogeneous term")
            num[e] = c
        else:
            raise InconsistentError((e, c), "pole bounds or degree bound violated")
    return PoleRational(n, num, pairs, zeros)


def monomials_of_degree(nvars: int, degree: int) -> list[Mono]:
    """All exponent tuples with total degree exactly ``degree``."""
    if degree < 0:
        return []
    if nvars == 0:
        return [()] if degree == 0 else []
    out: list[Mono] = []

    def rec(prefix: Mono, rest: int, left: int):
        if rest == 1:
            out.append(prefix + (left,))
            return
        for k in range(left + 1):
            rec(prefix + (k,), rest - 1, left - k)

    rec((), nvars, degree)
    return out


def reconstruct_affine(
    s: TruncatedLaurent,
    physical: Sequence[Mapping[int, int]],
    pair_bounds: Mapping[tuple[int, int], int],
    zero_bounds: Sequence[int] | None,
    numerator_degree: int,
) -> PoleRational:
    """Recover a rational function of *physical* variables from a series in
    auxiliary coordinates.

    physical[j] maps coordinate index -> coefficient; each physical
    variable is a +/-1 combination of the series coordinates (e.g.
    z = zeta + x).  The numerator is assumed homogeneous of the given
    degree, which the grading guarantees for every component this package
    reconstructs, and the physical forms must be linearly independent.
    """
    m = len(physical)
    n = s.nvars
    pairs = _norm_pairs(m, pair_bounds)
    zeros = list(zero_bounds) if zero_bounds is not None else [0] * m
    images = [p_linear(n, dict(physical[j])) for j in range(m)]

    t = s
    for (i, j), p in sorted(pairs.items()):
        form = p_sub(images[i], images[j])
        for _ in range(p):
            t = t.mul_poly(form)
    for i, q in enumerate(zeros):
        for _ in range(q):
            t = t.mul_poly(images[i])

    if numerator_degree < 0:
        if t.coeffs:
            e = next(iter(t.coeffs))
            raise InconsistentError((e, t.coeffs[e]), "nonzero series, empty candidate space")
        return PoleRational.zero(m)
    if t.window < numerator_degree:
        raise UnderdeterminedError(numerator_degree, t.window, "raise the expansion window")

    candidates = monomials_of_degree(m, numerator_degree)
    expansions: list[Poly] = []
    for E in candidates:
        poly = p_const(n, 1)
        for j, k in enumerate(E):
            for _ in range(k):
                poly = p_mul(poly, images[j])
        expansions.append(poly)
    row_monos = sorted(set(t.coeffs) | {e for poly in expansions for e in poly})
    row_index = {e: r for r, e in enumerate(row_monos)}
    mat = Matrix.zeros(len(row_monos), len(candidates))
    for cidx, poly in enumerate(expansions):
        for e, c in poly.items():
            mat.rows[row_index[e]][cidx] = c
    rhs = [t.coeffs.get(e, Fraction(0)) for e in row_monos]
    sol, kernel = solve(mat, rhs)
    if sol is None:
        raise InconsistentError(None, "no rational function matches the series")
    if kernel:
        raise UnderdeterminedError(
            numerator_degree, t.window, "physical forms must be independent"
        )
    num: Poly = {E: c for E, c in zip(candidates, sol) if c}
    return PoleRational(m, num, pairs, zeros)
