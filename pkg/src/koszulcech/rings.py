"""Coefficient rings: Q, F_p, Z, Z/N and finite commutative Z/N-algebras.

Elements are stored as canonical payloads (Fraction, int, or a tuple of
residues for algebras) wrapped in RingElem.  Matrix storage for each ring
kind lives here too, so that linalg can stay agnostic of the encoding.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np


class RingError(ValueError):
    pass


class NonPrime(RingError):
    pass


class InvalidModulus(RingError):
    pass


class NonAssociative(RingError):
    pass


class NonCommutative(RingError):
    pass


class NoUnit(RingError):
    pass


class ParseError(RingError):
    pass


class NotInvertibleDenominator(RingError):
    pass


class NotInvertible(RingError):
    pass


class WrongRingKind(RingError):
    pass


def is_prime(p: int) -> bool:
    """Deterministic Miller-Rabin, exact for all 64-bit inputs."""
    if p < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if p % q == 0:
            return p == q
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


# numpy int64 is safe while N * N * (a few thousand) stays below 2**63
_INT64_LIMIT = 1 << 20


@dataclass(frozen=True)
class RingElem:
    ring: "Ring"
    payload: object

    def _lift(self, other) -> "RingElem":
        if isinstance(other, RingElem):
            if other.ring != self.ring:
                raise WrongRingKind("elements of different rings")
            return other
        return self.ring(other)

    def __add__(self, other):
        o = self._lift(other)
        return RingElem(self.ring, self.ring.add(self.payload, o.payload))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return RingElem(self.ring, self.ring.sub(self.payload, o.payload))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        return RingElem(self.ring, self.ring.mul(self.payload, o.payload))

    __rmul__ = __mul__

    def __neg__(self):
        return RingElem(self.ring, self.ring.neg(self.payload))

    def __pow__(self, k: int):
        return RingElem(self.ring, self.ring.power(self.payload, k))

    def __eq__(self, other):
        if isinstance(other, RingElem):
            return self.ring == other.ring and self.payload == other.payload
        try:
            return self.payload == self.ring.coerce(other)
        except RingError:
            return False

    def __hash__(self):
        return hash((self.ring, self.payload))

    def is_zero(self) -> bool:
        return self.ring.is_zero(self.payload)

    def is_unit(self) -> bool:
        return self.ring.is_unit(self.payload)

    def inverse(self) -> "RingElem":
        return RingElem(self.ring, self.ring.inverse(self.payload))

    def __str__(self):
        return self.ring.render(self.payload)

    def __repr__(self):
        return f"RingElem({self.ring.name}, {self.ring.render(self.payload)})"


class Ring:
    """Base class.  Subclasses fix the payload encoding and matrix storage."""

    kind = "abstract"
    # rank of the ring as a module over its base (k for algebras, else 1)
    rank = 1
    # modulus of the base ring for finite rings, None for Z and Q
    modulus: int | None = None

    def __call__(self, value) -> RingElem:
        if isinstance(value, RingElem):
            if value.ring != self:
                raise WrongRingKind(f"element of {value.ring.name} given to {self.name}")
            return value
        return RingElem(self, self.coerce(value))

    @property
    def name(self) -> str:
        raise NotImplementedError

    @property
    def is_finite(self) -> bool:
        return self.modulus is not None

    @property
    def is_field(self) -> bool:
        return False

    def order(self) -> int | None:
        if self.modulus is None:
            return None
        return self.modulus ** self.rank

    def zero(self) -> RingElem:
        return RingElem(self, self.coerce(0))

    def one(self) -> RingElem:
        return RingElem(self, self.coerce(1))

    def power(self, a, k: int):
        if k < 0:
            return self.power(self.inverse(a), -k)
        result = self.coerce(1)
        base = a
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def parse(self, literal: str) -> RingElem:
        return RingElem(self, self.parse_payload(literal))

    def elements(self) -> Iterator[RingElem]:
        raise WrongRingKind(f"{self.name} is infinite")

    # matrix storage hooks, overridden per kind
    def mat_zeros(self, rows: int, cols: int) -> np.ndarray:
        out = np.empty((rows, cols), dtype=object)
        out.fill(self.coerce(0))
        return out

    def mat_identity(self, n: int) -> np.ndarray:
        out = self.mat_zeros(n, n)
        for i in range(n):
            out[i, i] = self.coerce(1)
        return out

    def mat_from_payloads(self, rows: Sequence[Sequence], cols: int | None = None) -> np.ndarray:
        rows = [list(r) for r in rows]
        ncols = cols if cols is not None else (len(rows[0]) if rows else 0)
        out = self.mat_zeros(len(rows), ncols)
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise ValueError("ragged matrix")
            for j, v in enumerate(row):
                out[i, j] = v
        return out

    def mat_entry(self, data: np.ndarray, i: int, j: int):
        return data[i, j]

    def mat_set(self, data: np.ndarray, i: int, j: int, payload) -> None:
        data[i, j] = payload

    def mat_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.shape[1] == 0:
            return self.mat_zeros(a.shape[0], b.shape[1])
        return self.mat_reduce(a.dot(b))

    def mat_add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.mat_reduce(a + b)

    def mat_neg(self, a: np.ndarray) -> np.ndarray:
        return self.mat_reduce(-a)

    def mat_scale(self, payload, a: np.ndarray) -> np.ndarray:
        return self.mat_reduce(a * payload)

    def mat_reduce(self, a: np.ndarray) -> np.ndarray:
        return a

    def mat_is_zero(self, a: np.ndarray) -> bool:
        return all(self.is_zero(v) for v in a.flat)

    def mat_shape(self, a: np.ndarray) -> tuple[int, int]:
        return a.shape[0], a.shape[1]

    def mat_kron(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        ra, ca = a.shape[:2]
        rb, cb = b.shape[:2]
        out = self.mat_zeros(ra * rb, ca * cb)
        for i in range(ra):
            for j in range(ca):
                s = self.mat_entry(a, i, j)
                if self.is_zero(s):
                    continue
                block = self.mat_scale(s, b)
                out[i * rb:(i + 1) * rb, j * cb:(j + 1) * cb] = block
        return out

    def mat_transpose(self, a: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(np.swapaxes(a, 0, 1))

    def mat_equal(self, a: np.ndarray, b: np.ndarray) -> bool:
        return a.shape == b.shape and bool(np.all(a == b))

    def flatten_matrix(self, a: np.ndarray) -> np.ndarray:
        """Row-convention matrix over the base ring (identity for rank-1 rings)."""
        return a

    def base_ring(self) -> "Ring":
        return self

    def __repr__(self):
        return f"<Ring {self.name}>"


class Rationals(Ring):
    kind = "Rationals"

    @property
    def name(self):
        return "Q"

    @property
    def is_field(self):
        return True

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("Q")

    def coerce(self, value):
        if isinstance(value, bool):
            value = int(value)
        if isinstance(value, (int, Fraction)):
            return Fraction(value)
        if isinstance(value, np.integer):
            return Fraction(int(value))
        if isinstance(value, str):
            return self.parse_payload(value)
        raise ParseError(f"cannot coerce {value!r} into Q")

    def parse_payload(self, literal: str):
        text = literal.strip()
        m = re.fullmatch(r"([+-]?\d+)(?:\s*/\s*([+-]?\d+))?", text)
        if not m:
            raise ParseError(f"bad rational literal {literal!r}")
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise NotInvertibleDenominator("zero denominator")
        return Fraction(num, den)

    def render(self, a) -> str:
        return str(a)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        return a != 0

    def inverse(self, a):
        if a == 0:
            raise NotInvertible("0 has no inverse")
        return 1 / a


class Integers(Ring):
    kind = "Integers"

    @property
    def name(self):
        return "Z"

    def __eq__(self, other):
        return isinstance(other, Integers)

    def __hash__(self):
        return hash("Z")

    def coerce(self, value):
        if isinstance(value, bool):
            return int(value)
        if isinstance(value, (int, np.integer)):
            return int(value)
        if isinstance(value, Fraction) and value.denominator == 1:
            return int(value)
        if isinstance(value, str):
            return self.parse_payload(value)
        raise ParseError(f"cannot coerce {value!r} into Z")

    def parse_payload(self, literal: str):
        text = literal.strip()
        m = re.fullmatch(r"([+-]?\d+)(?:\s*/\s*([+-]?\d+))?", text)
        if not m:
            raise ParseError(f"bad integer literal {literal!r}")
        num = int(m.group(1))
        if m.group(2):
            den = int(m.group(2))
            if den == 0 or num % den:
                raise NotInvertibleDenominator(f"{literal} is not an integer")
            num //= den
        return num

    def render(self, a) -> str:
        return str(a)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        return a in (1, -1)

    def inverse(self, a):
        if a not in (1, -1):
            raise NotInvertible(f"{a} is not a unit in Z")
        return a


class _ResidueRing(Ring):
    """Shared code for Z/N and F_p with int64 (or object) numpy storage."""

    def __init__(self, modulus: int):
        self.modulus = int(modulus)
        self._dtype = np.int64 if self.modulus <= _INT64_LIMIT else object

    def __eq__(self, other):
        return type(other) is type(self) and other.modulus == self.modulus

    def __hash__(self):
        return hash((self.kind, self.modulus))

    def coerce(self, value):
        if isinstance(value, bool):
            value = int(value)
        if isinstance(value, (int, np.integer)):
            return int(value) % self.modulus
        if isinstance(value, Fraction):
            return self._fraction(value.numerator, value.denominator)
        if isinstance(value, str):
            return self.parse_payload(value)
        raise ParseError(f"cannot coerce {value!r} into {self.name}")

    def _fraction(self, num: int, den: int) -> int:
        if math.gcd(den, self.modulus) != 1:
            raise NotInvertibleDenominator(f"{den} is not invertible mod {self.modulus}")
        return num * pow(den, -1, self.modulus) % self.modulus

    def parse_payload(self, literal: str):
        text = literal.strip()
        m = re.fullmatch(r"([+-]?\d+)(?:\s*/\s*([+-]?\d+))?", text)
        if not m:
            raise ParseError(f"bad residue literal {literal!r}")
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) else 1
        return self._fraction(num, den)

    def render(self, a) -> str:
        return str(a)

    def add(self, a, b):
        return (a + b) % self.modulus

    def sub(self, a, b):
        return (a - b) % self.modulus

    def mul(self, a, b):
        return a * b % self.modulus

    def neg(self, a):
        return -a % self.modulus

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        return math.gcd(a, self.modulus) == 1

    def inverse(self, a):
        if math.gcd(a, self.modulus) != 1:
            raise NotInvertible(f"{a} is not a unit mod {self.modulus}")
        return pow(a, -1, self.modulus)

    def elements(self):
        for a in range(self.modulus):
            yield RingElem(self, a)

    def mat_zeros(self, rows, cols):
        return np.zeros((rows, cols), dtype=self._dtype)

    def mat_identity(self, n):
        return np.eye(n, dtype=self._dtype) if self._dtype is not object else np.array(
            [[int(i == j) for j in range(n)] for i in range(n)], dtype=object).reshape(n, n)

    def mat_from_payloads(self, rows, cols=None):
        rows = [list(r) for r in rows]
        ncols = cols if cols is not None else (len(rows[0]) if rows else 0)
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged matrix")
        out = self.mat_zeros(len(rows), ncols)
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                out[i, j] = int(v) % self.modulus
        return out

    def mat_entry(self, data, i, j):
        return int(data[i, j])

    def mat_reduce(self, a):
        return a % self.modulus

    def mat_scale(self, payload, a):
        return (a * int(payload)) % self.modulus

    def mat_is_zero(self, a):
        return not np.any(a % self.modulus)

    def mat_kron(self, a, b):
        if a.size == 0 or b.size == 0:
            return self.mat_zeros(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1])
        return np.kron(a, b) % self.modulus


class IntegersModN(_ResidueRing):
    kind = "IntegersModN"

    def __init__(self, modulus: int):
        if int(modulus) < 2:
            raise InvalidModulus(f"modulus must be at least 2, got {modulus}")
        super().__init__(modulus)

    @property
    def name(self):
        return f"Z/{self.modulus}"


class PrimeField(_ResidueRing):
    kind = "PrimeField"

    def __init__(self, p: int):
        if not is_prime(int(p)):
            raise NonPrime(f"{p} is not prime")
        super().__init__(p)

    @property
    def name(self):
        return f"F_{self.modulus}"

    @property
    def is_field(self):
        return True


class FiniteAlgebra(Ring):
    """Commutative unital Z/N-algebra, free of rank k with structure constants.

    mul_table[a][b] is the coefficient tuple of e_a * e_b.  Elements are
    tuples of residues; matrices are int64 arrays of shape (rows, cols, k).
    """

    kind = "FiniteAlgebra"

    def __init__(self, base_n: int, mul_table, unit_index: int = 0,
                 basis_names: Sequence[str] | None = None):
        base_n = int(base_n)
        if base_n < 2:
            raise InvalidModulus(f"base modulus must be at least 2, got {base_n}")
        table = np.array(mul_table, dtype=np.int64)
        if table.ndim != 3 or table.shape[0] != table.shape[1] or table.shape[1] != table.shape[2]:
            raise RingError("multiplication table must have shape k x k x k")
        k = table.shape[0]
        if not 0 <= unit_index < k:
            raise NoUnit(f"unit index {unit_index} out of range")
        self.modulus = base_n
        self.rank = k
        self.base = IntegersModN(base_n)
        self.table = table % base_n
        self.table.setflags(write=False)
        self.unit_index = int(unit_index)
        self.basis_names = tuple(basis_names) if basis_names else tuple(
            "1" if i == unit_index else f"e{i}" for i in range(k))
        self._check_axioms()
        self._key = (base_n, k, self.unit_index, self.table.tobytes())

    def _check_axioms(self):
        T, N, k = self.table, self.modulus, self.rank
        unit = np.zeros(k, dtype=np.int64)
        unit[self.unit_index] = 1
        for a in range(k):
            ea = np.zeros(k, dtype=np.int64)
            ea[a] = 1
            if not np.array_equal(self._mul_vec(unit, ea), ea):
                raise NoUnit(f"basis element {self.unit_index} is not a unit for e{a}")
        for a, b in itertools.product(range(k), repeat=2):
            if not np.array_equal(T[a, b], T[b, a]):
                raise NonCommutative(f"e{a}*e{b} != e{b}*e{a}")
        # (e_a e_b) e_c = e_a (e_b e_c)
        left = np.einsum("abm,mcn->abcn", T, T) % N
        right = np.einsum("bcm,amn->abcn", T, T) % N
        if not np.array_equal(left, right):
            a, b, c = np.argwhere(np.any(left != right, axis=3))[0]
            raise NonAssociative(f"(e{a} e{b}) e{c} != e{a} (e{b} e{c})")

    def _mul_vec(self, u, v):
        return np.einsum("a,b,abm->m", u, v, self.table) % self.modulus

    def __eq__(self, other):
        return isinstance(other, FiniteAlgebra) and other._key == self._key

    def __hash__(self):
        return hash(self._key)

    @property
    def name(self):
        return f"Z/{self.modulus}-algebra[{','.join(self.basis_names)}]"

    def base_ring(self):
        return self.base

    def coerce(self, value):
        if isinstance(value, bool):
            value = int(value)
        if isinstance(value, (int, np.integer)):
            out = [0] * self.rank
            out[self.unit_index] = int(value) % self.modulus
            return tuple(out)
        if isinstance(value, (tuple, list, np.ndarray)):
            vals = [int(v) % self.modulus for v in value]
            if len(vals) != self.rank:
                raise ParseError(f"expected {self.rank} coefficients, got {len(vals)}")
            return tuple(vals)
        if isinstance(value, str):
            return self.parse_payload(value)
        raise ParseError(f"cannot coerce {value!r} into {self.name}")

    def parse_payload(self, literal: str):
        text = literal.strip()
        if re.fullmatch(r"[+-]?\d+", text):
            return self.coerce(int(text))
        m = re.fullmatch(r"\[\s*([^\]]*)\]", text)
        if not m:
            raise ParseError(f"bad algebra literal {literal!r}")
        parts = [p.strip() for p in m.group(1).split(",")] if m.group(1).strip() else []
        if len(parts) != self.rank or not all(re.fullmatch(r"[+-]?\d+", p) for p in parts):
            raise ParseError(f"expected {self.rank} integer coefficients in {literal!r}")
        return tuple(int(p) % self.modulus for p in parts)

    def render(self, a) -> str:
        return "[" + ",".join(str(c) for c in a) + "]"

    def add(self, a, b):
        return tuple((x + y) % self.modulus for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple((x - y) % self.modulus for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x % self.modulus for x in a)

    def mul(self, a, b):
        return tuple(int(c) for c in self._mul_vec(np.array(a, dtype=np.int64),
                                                   np.array(b, dtype=np.int64)))

    def is_zero(self, a):
        return not any(a)

    def action_matrix(self, a) -> np.ndarray:
        """Column j holds the coordinates of a * e_j."""
        return np.einsum("b,jbm->mj", np.array(a, dtype=np.int64), self.table) % self.modulus

    def is_unit(self, a):
        from . import linalg
        return linalg.modn_is_invertible(self.action_matrix(a), self.modulus)

    def inverse(self, a):
        from . import linalg
        one = np.zeros(self.rank, dtype=np.int64)
        one[self.unit_index] = 1
        # row convention: x * A^T = one, where A^T has rows a * e_j
        sol = linalg.modn_solve(self.action_matrix(a).T.copy(), one[None, :], self.modulus)[0]
        if sol is None or not self.is_unit(a):
            raise NotInvertible(f"{self.render(a)} is not a unit")
        return tuple(int(c) for c in sol)

    def elements(self):
        for coeffs in itertools.product(range(self.modulus), repeat=self.rank):
            yield RingElem(self, tuple(coeffs))

    # matrices are (rows, cols, k) coefficient arrays
    def mat_zeros(self, rows, cols):
        return np.zeros((rows, cols, self.rank), dtype=np.int64)

    def mat_identity(self, n):
        out = self.mat_zeros(n, n)
        out[np.arange(n), np.arange(n), self.unit_index] = 1
        return out

    def mat_from_payloads(self, rows, cols=None):
        rows = [list(r) for r in rows]
        ncols = cols if cols is not None else (len(rows[0]) if rows else 0)
        out = self.mat_zeros(len(rows), ncols)
        for i, r in enumerate(rows):
            if len(r) != ncols:
                raise ValueError("ragged matrix")
            for j, v in enumerate(r):
                out[i, j] = self.coerce(v)
        return out

    def mat_entry(self, data, i, j):
        return tuple(int(c) for c in data[i, j])

    def mat_set(self, data, i, j, payload):
        data[i, j] = payload

    def mat_reduce(self, a):
        return a % self.modulus

    def _right_blocks(self, b):
        # FB[(l, a), (j, m)] = coefficient m of e_a * b[l, j]
        rows, cols, k = b.shape
        return np.einsum("ljb,abm->lajm", b, self.table).reshape(rows * k, cols * k) % self.modulus

    def mat_mul(self, a, b):
        rows, inner, k = a.shape
        cols = b.shape[1]
        if rows == 0 or cols == 0 or inner == 0:
            return self.mat_zeros(rows, cols)
        flat = a.reshape(rows, inner * k) @ self._right_blocks(b)
        return (flat % self.modulus).reshape(rows, cols, k)

    def mat_scale(self, payload, a):
        return self.mat_mul(self._scalar(payload, a.shape[0]), a)

    def _scalar(self, payload, n):
        out = self.mat_zeros(n, n)
        out[np.arange(n), np.arange(n)] = payload
        return out

    def mat_is_zero(self, a):
        return not np.any(a % self.modulus)

    def mat_kron(self, a, b):
        ra, ca, k = a.shape
        rb, cb, _ = b.shape
        out = self.mat_zeros(ra * rb, ca * cb)
        for i in range(ra):
            for j in range(ca):
                if np.any(a[i, j]):
                    out[i * rb:(i + 1) * rb, j * cb:(j + 1) * cb] = self.mat_scale(
                        tuple(a[i, j]), b)
        return out

    def mat_transpose(self, a):
        return np.ascontiguousarray(np.swapaxes(a, 0, 1))

    def flatten_matrix(self, a):
        """Row convention: row (i, alpha) is e_alpha times row i, in base coordinates."""
        rows, cols, k = a.shape
        return np.einsum("ijb,abm->iajm", a, self.table).reshape(rows * k, cols * k) % self.modulus


RING_KINDS = ("Rationals", "PrimeField", "Integers", "IntegersModN", "FiniteAlgebra")


def make_ring(spec) -> Ring:
    """Build a ring from a spec dict, a short literal like "Z/12", or a Ring."""
    if isinstance(spec, Ring):
        return spec
    if isinstance(spec, str):
        return _ring_from_literal(spec)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise RingError(f"bad ring spec {spec!r}")
    kind = spec["kind"]
    if kind == "Rationals":
        return Rationals()
    if kind == "Integers":
        return Integers()
    if kind == "PrimeField":
        return PrimeField(int(spec["p"]))
    if kind == "IntegersModN":
        return IntegersModN(int(spec["N"]))
    if kind == "FiniteAlgebra":
        return FiniteAlgebra(int(spec["baseN"]), spec["mulTable"], int(spec.get("unitIndex", 0)),
                             spec.get("basisNames"))
    raise RingError(f"unknown ring kind {kind!r}")


def _ring_from_literal(text: str) -> Ring:
    t = text.replace(" ", "").replace("ℤ", "Z").replace("ℚ", "Q").replace("²", "^2")
    if t in ("Z", "ZZ"):
        return Integers()
    if t in ("Q", "QQ"):
        return Rationals()
    m = re.fullmatch(r"(?:F|GF|F_)(\d+)", t)
    if m:
        return PrimeField(int(m.group(1)))
    m = re.fullmatch(r"Z/(\d+)(?:Z)?", t)
    if m:
        return IntegersModN(int(m.group(1)))
    m = re.fullmatch(r"Z/(\d+)\[t\]/\(t\^(\d+)\)", t)
    if m:
        return truncated_polynomial_ring(int(m.group(1)), int(m.group(2)))
    raise RingError(f"unrecognised ring literal {text!r}")


def truncated_polynomial_ring(base_n: int, degree: int) -> FiniteAlgebra:
    """Z/N[t]/(t^degree) on the basis 1, t, ..., t^(degree-1)."""
    table = np.zeros((degree, degree, degree), dtype=np.int64)
    for a in range(degree):
        for b in range(degree):
            if a + b < degree:
                table[a, b, a + b] = 1
    names = ["1", "t"] + [f"t^{i}" for i in range(2, degree)]
    return FiniteAlgebra(base_n, table, 0, names[:degree])


def ring_spec(ring: Ring) -> dict:
    """Inverse of make_ring for dict specs."""
    if isinstance(ring, FiniteAlgebra):
        return {"kind": "FiniteAlgebra", "baseN": ring.modulus, "rank": ring.rank,
                "mulTable": ring.table.tolist(), "unitIndex": ring.unit_index,
                "basisNames": list(ring.basis_names)}
    if isinstance(ring, IntegersModN):
        return {"kind": "IntegersModN", "N": ring.modulus}
    if isinstance(ring, PrimeField):
        return {"kind": "PrimeField", "p": ring.modulus}
    return {"kind": ring.kind}


def parse_element(ring: Ring, literal: str) -> RingElem:
    return ring.parse(literal)


def is_unit(a: RingElem) -> bool:
    return a.is_unit()


def flatten_action(a: RingElem) -> np.ndarray:
    """Matrix of multiplication by a on the algebra basis (column j = a * e_j)."""
    if not isinstance(a.ring, FiniteAlgebra):
        raise WrongRingKind("flatten_action needs a FiniteAlgebra element")
    return a.ring.action_matrix(a.payload)
