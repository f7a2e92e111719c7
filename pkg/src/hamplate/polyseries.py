"""Dense univariate polynomials in ``y`` over a selectable coefficient field.

Three arithmetic backends share one :class:`Polynomial` type:

``rational``
    exact :class:`fractions.Fraction` coefficients, used for the equivalence
    proofs and any identity that must hold bit-for-bit;
``f64``
    IEEE double coefficients held in a ``float64`` numpy array (fast mode);
``bigfloat:<bits>``
    radix-2 floats of configurable precision backed by :mod:`gmpy2`.

Coefficients live in a numpy array (``object`` dtype for the two
arbitrary-precision backends) so products reduce to :func:`numpy.convolve`.
Polynomials are immutable; every operation returns a new value.

>>> p = Polynomial([Fraction(-1, 2), Fraction(1, 2)]).shift_up(1)
>>> (p * p).coeffs
(Fraction(0, 1), Fraction(0, 1), Fraction(1, 4), Fraction(-1, 2), Fraction(1, 4))
"""
from __future__ import annotations

import contextlib
import math
import re
from fractions import Fraction
from numbers import Integral, Rational

import gmpy2
import numpy as np

from .errors import BackendMismatch, MinDegreeViolation

__all__ = [
    "Backend",
    "RationalBackend",
    "Float64Backend",
    "BigFloatBackend",
    "RATIONAL",
    "F64",
    "parse_backend",
    "Polynomial",
    "add",
    "mul",
    "scale",
    "integrate_twice_from_zero",
    "shift_down_by_y2",
    "integral_over_y_on_01",
    "definite_integral_01",
    "differentiate",
    "truncate",
    "evaluate",
]

# Float-mode tolerance for the min-degree preconditions, relative to the
# largest coefficient magnitude.
MIN_DEGREE_RTOL = 1e-3


class Backend:
    """Coefficient field descriptor.

    Subclasses provide conversion of Python numbers into field elements and
    the numpy dtype used for coefficient storage.
    """

    name = "abstract"
    dtype = object
    exact = False

    def coerce(self, x):
        raise NotImplementedError

    def context(self):
        return contextlib.nullcontext()

    def is_finite(self, x) -> bool:
        return True

    def to_float(self, x) -> float:
        return float(x)

    def array(self, values) -> np.ndarray:
        out = np.empty(len(values), dtype=self.dtype)
        for i, v in enumerate(values):
            out[i] = self.coerce(v)
        return out

    def zeros(self, n: int) -> np.ndarray:
        return self.array([0] * n)

    def indices(self, start: int, stop: int) -> np.ndarray:
        """Integer ramp ``start..stop-1`` in a dtype safe to mix with coefficients."""
        r = np.arange(start, stop)
        return r if self.dtype is not object else r.astype(object)

    def __eq__(self, other):
        return isinstance(other, Backend) and self.name == other.name

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return f"<backend {self.name}>"

    def __str__(self):
        return self.name


class RationalBackend(Backend):
    name = "rational"
    exact = True

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, (Integral, Rational)):
            return Fraction(int(x.numerator), int(x.denominator))
        if isinstance(x, float):
            if not math.isfinite(x):
                raise ValueError(f"cannot represent {x!r} as a rational")
            # decimal intent: 0.3 means 3/10, not the nearest binary double
            return Fraction(repr(float(x)))
        if isinstance(x, str):
            return Fraction(x)
        if isinstance(x, (type(gmpy2.mpq()), type(gmpy2.mpz()))):
            return Fraction(int(x.numerator), int(x.denominator))
        if isinstance(x, type(gmpy2.mpfr())):
            if not gmpy2.is_finite(x):
                raise ValueError(f"cannot represent {x!r} as a rational")
            num, den = x.as_integer_ratio()
            return Fraction(int(num), int(den))
        return Fraction(x)


class Float64Backend(Backend):
    name = "f64"
    dtype = np.float64

    def coerce(self, x):
        return float(x)

    def is_finite(self, x) -> bool:
        return math.isfinite(x)

    def array(self, values) -> np.ndarray:
        return np.array([float(v) for v in values], dtype=np.float64)

    def zeros(self, n: int) -> np.ndarray:
        return np.zeros(n)


class BigFloatBackend(Backend):
    """gmpy2 ``mpfr`` coefficients at a fixed binary precision."""

    def __init__(self, bits: int = 256):
        if bits < 24:
            raise ValueError("bigfloat precision must be at least 24 bits")
        self.bits = int(bits)
        self.name = f"bigfloat:{self.bits}"

    def context(self):
        return gmpy2.context(gmpy2.get_context(), precision=self.bits)

    def coerce(self, x):
        with self.context():
            if isinstance(x, Fraction):
                return gmpy2.mpfr(gmpy2.mpq(x.numerator, x.denominator))
            if isinstance(x, float):
                return gmpy2.mpfr(repr(float(x)))
            return gmpy2.mpfr(x)

    def is_finite(self, x) -> bool:
        return gmpy2.is_finite(x)


RATIONAL = RationalBackend()
F64 = Float64Backend()


def parse_backend(spec) -> Backend:
    """Resolve ``'rational'``, ``'f64'`` or ``'bigfloat:<bits>'`` to a backend."""
    if isinstance(spec, Backend):
        return spec
    text = str(spec).strip().lower()
    if text == "rational":
        return RATIONAL
    if text in ("f64", "float64", "double"):
        return F64
    m = re.fullmatch(r"bigfloat(?::(\d+))?", text)
    if m:
        return BigFloatBackend(int(m.group(1) or 256))
    raise ValueError(f"unknown backend {spec!r}; expected rational, f64 or bigfloat:<bits>")


def _is_zero(x) -> bool:
    return x == 0


class Polynomial:
    """Immutable dense polynomial ``c[0] + c[1] y + ... + c[d] y^d``.

    Trailing zero coefficients are stripped on construction, so the zero
    polynomial has no coefficients and degree -1.
    """

    __slots__ = ("_c", "backend")

    def __init__(self, coeffs=(), backend: Backend = RATIONAL):
        backend = parse_backend(backend)
        if isinstance(coeffs, np.ndarray) and coeffs.dtype == np.dtype(backend.dtype):
            arr = coeffs.copy()
        else:
            arr = backend.array(list(coeffs))
        self._c = _strip(arr)
        self._c.flags.writeable = False
        self.backend = backend

    @classmethod
    def _wrap(cls, arr: np.ndarray, backend: Backend) -> "Polynomial":
        p = object.__new__(cls)
        arr = _strip(arr)
        arr.flags.writeable = False
        p._c = arr
        p.backend = backend
        return p

    @classmethod
    def zero(cls, backend: Backend = RATIONAL) -> "Polynomial":
        backend = parse_backend(backend)
        return cls._wrap(backend.zeros(0), backend)

    @classmethod
    def constant(cls, value, backend: Backend = RATIONAL) -> "Polynomial":
        return cls([value], backend)

    @classmethod
    def monomial(cls, k: int, value=1, backend: Backend = RATIONAL) -> "Polynomial":
        return cls([0] * k + [value], backend)

    # -- accessors ---------------------------------------------------------
    @property
    def array(self) -> np.ndarray:
        """Read-only view of the coefficient array."""
        return self._c

    @property
    def coeffs(self) -> tuple:
        return tuple(self._c.tolist())

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    def coeff(self, k: int):
        if 0 <= k < len(self._c):
            return self._c[k]
        return self.backend.coerce(0)

    def is_zero(self) -> bool:
        return len(self._c) == 0

    def __len__(self):
        return len(self._c)

    def __iter__(self):
        return iter(self._c.tolist())

    # -- arithmetic --------------------------------------------------------
    def _check(self, other: "Polynomial"):
        if not isinstance(other, Polynomial):
            return NotImplemented
        if other.backend != self.backend:
            raise BackendMismatch(f"cannot combine {self.backend} with {other.backend}")
        return None

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            if isinstance(other, (int, float, Fraction)) or _is_scalar(other):
                other = Polynomial.constant(other, self.backend)
            else:
                return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        with self.backend.context():
            return Polynomial._wrap(-self._c, self.backend)

    def __sub__(self, other):
        if not isinstance(other, Polynomial):
            if isinstance(other, (int, float, Fraction)) or _is_scalar(other):
                other = Polynomial.constant(other, self.backend)
            else:
                return NotImplemented
        return add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __call__(self, y):
        return evaluate(self, y)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (
            self.backend == other.backend
            and len(self._c) == len(other._c)
            and bool(np.all(self._c == other._c))
        )

    def __hash__(self):
        return hash((self.backend.name, self.coeffs))

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)!r}, backend={self.backend.name!r})"

    def __str__(self):
        if self.is_zero():
            return "0"
        terms = []
        for k, c in enumerate(self._c.tolist()):
            if c == 0:
                continue
            terms.append(f"({c})" + ("" if k == 0 else "*y" if k == 1 else f"*y^{k}"))
        return " + ".join(terms)

    # -- convenience wrappers around the module functions ------------------
    def derivative(self) -> "Polynomial":
        return differentiate(self)

    def truncate(self, n: int) -> "Polynomial":
        return truncate(self, n)

    def shift_up(self, k: int) -> "Polynomial":
        """Multiply by ``y**k``."""
        if self.is_zero() or k == 0:
            return self
        return Polynomial._wrap(np.concatenate([self.backend.zeros(k), self._c]), self.backend)

    def to_backend(self, backend) -> "Polynomial":
        backend = parse_backend(backend)
        if backend == self.backend:
            return self
        return Polynomial(list(self.coeffs), backend)

    def to_numpy(self) -> np.ndarray:
        return np.array([self.backend.to_float(c) for c in self._c.tolist()], dtype=float)

    def max_abs(self):
        if self.is_zero():
            return 0
        return max(abs(c) for c in self._c.tolist())

    def all_finite(self) -> bool:
        if self.backend is F64 or self.backend.dtype is np.float64:
            return bool(np.all(np.isfinite(self._c)))
        return all(self.backend.is_finite(c) for c in self._c.tolist())


def _is_scalar(x) -> bool:
    return isinstance(x, (Integral, Rational, float)) or type(x).__module__ == "gmpy2"


def _strip(arr: np.ndarray) -> np.ndarray:
    n = len(arr)
    while n and _is_zero(arr[n - 1]):
        n -= 1
    return arr[:n].copy() if n != len(arr) else arr


def _same_backend(p: Polynomial, q: Polynomial) -> Backend:
    if p.backend != q.backend:
        raise BackendMismatch(f"cannot combine {p.backend} with {q.backend}")
    return p.backend


def add(p: Polynomial, q: Polynomial) -> Polynomial:
    backend = _same_backend(p, q)
    a, b = p.array, q.array
    if len(a) < len(b):
        a, b = b, a
    if len(b) == 0:
        return Polynomial._wrap(a.copy(), backend)
    with backend.context():
        out = a.copy()
        out[: len(b)] = out[: len(b)] + b
    return Polynomial._wrap(out, backend)


def mul(p: Polynomial, q: Polynomial) -> Polynomial:
    backend = _same_backend(p, q)
    if p.is_zero() or q.is_zero():
        return Polynomial.zero(backend)
    with backend.context():
        out = np.convolve(p.array, q.array)
    return Polynomial._wrap(out, backend)


def scale(p: Polynomial, s) -> Polynomial:
    s = p.backend.coerce(s)
    if p.is_zero():
        return p
    with p.backend.context():
        return Polynomial._wrap(p.array * s, p.backend)


def evaluate(p: Polynomial, y):
    """Horner evaluation at ``y`` (coerced into the polynomial's field)."""
    backend = p.backend
    y = backend.coerce(y)
    with backend.context():
        acc = backend.coerce(0)
        for c in reversed(p.array.tolist()):
            acc = acc * y + c
    return acc


def differentiate(p: Polynomial) -> Polynomial:
    if p.degree < 1:
        return Polynomial.zero(p.backend)
    backend = p.backend
    with backend.context():
        out = p.array[1:] * backend.indices(1, len(p))
    return Polynomial._wrap(out, backend)


def truncate(p: Polynomial, n: int) -> Polynomial:
    """Drop every term of degree greater than ``n``."""
    if n < 0:
        raise ValueError("truncation order must be non-negative")
    if p.degree <= n:
        return p
    return Polynomial._wrap(p.array[: n + 1].copy(), p.backend)


def integrate_twice_from_zero(p: Polynomial) -> Polynomial:
    """Return ``r`` with ``r'' = p`` and ``r(0) = r'(0) = 0``."""
    backend = p.backend
    if p.is_zero():
        return p
    n = len(p)
    k = backend.indices(0, n)
    with backend.context():
        body = p.array / ((k + 1) * (k + 2))
    return Polynomial._wrap(np.concatenate([backend.zeros(2), body]), backend)


def _clear_low(p: Polynomial, count: int, what: str) -> Polynomial:
    """Check (and in float modes zero) the ``count`` lowest coefficients."""
    low = [p.coeff(k) for k in range(min(count, len(p)))]
    if all(_is_zero(c) for c in low):
        return p
    if p.backend.exact:
        raise MinDegreeViolation(f"{what}: nonzero low-order coefficients {low}")
    limit = MIN_DEGREE_RTOL * float(p.max_abs())
    if any(float(abs(c)) > limit for c in low):
        raise MinDegreeViolation(f"{what}: low-order coefficients {low} exceed tolerance {limit:g}")
    arr = p.array.copy()
    arr[: len(low)] = p.backend.coerce(0)
    return Polynomial._wrap(arr, p.backend)


def shift_down_by_y2(p: Polynomial) -> Polynomial:
    """Divide by ``y**2``; the constant and linear coefficients must vanish."""
    p = _clear_low(p, 2, "shift_down_by_y2")
    if p.degree < 2:
        return Polynomial.zero(p.backend)
    return Polynomial._wrap(p.array[2:].copy(), p.backend)


def shift_down_by_y(p: Polynomial) -> Polynomial:
    p = _clear_low(p, 1, "shift_down_by_y")
    if p.degree < 1:
        return Polynomial.zero(p.backend)
    return Polynomial._wrap(p.array[1:].copy(), p.backend)


def integral_over_y_on_01(p: Polynomial):
    """``∫_0^1 p(e)/e de`` for a polynomial with zero constant term."""
    p = _clear_low(p, 1, "integral_over_y_on_01")
    backend = p.backend
    if p.degree < 1:
        return backend.coerce(0)
    with backend.context():
        return _sum(p.array[1:] / backend.indices(1, len(p)), backend)


def definite_integral_01(p: Polynomial):
    backend = p.backend
    if p.is_zero():
        return backend.coerce(0)
    with backend.context():
        return _sum(p.array / backend.indices(1, len(p) + 1), backend)


def _sum(arr: np.ndarray, backend: Backend):
    if backend.dtype is object:
        total = backend.coerce(0)
        for v in arr.tolist():
            total = total + v
        return total
    if not np.all(np.isfinite(arr)):
        return float(np.sum(arr))  # inf or nan, as fsum would refuse
    return float(math.fsum(arr))
