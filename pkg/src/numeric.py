"""Numeric backends: 64-bit floats with a comparison tolerance, or exact rationals."""

import re
from fractions import Fraction
from typing import List, Sequence, Union

import numpy as np

from src.errors import GameFormatError

Number = Union[float, Fraction]

# Entries smaller than this are rounding noise in float mode
CLEAN_EPS = 1e-12

# Rational mode refuses decimal literals longer than this
MAX_SIGNIFICANT_DIGITS = 18

_DECIMAL = re.compile(r"^[+-]?(\d+)?(?:\.(\d*))?(?:[eE][+-]?\d+)?$")


class NumericBackend:
    """
    Common comparison logic shared by both backends.

    All strict-improvement tests go through `gt`, so in float mode
    "a > b" means "a > b + tau_eq". In rational mode tau_eq is zero.
    """

    name = "abstract"
    exact = False
    dtype = object

    def __init__(self, tau_eq: Number = 0, pi_min: Number = 0):
        if tau_eq < 0:
            raise ValueError(f"tau_eq must be nonnegative, got {tau_eq}")
        self.tau_eq = tau_eq
        self.pi_min = pi_min

    @property
    def zero(self) -> Number:
        return self.convert(0)

    @property
    def one(self) -> Number:
        return self.convert(1)

    def convert(self, x) -> Number:
        raise NotImplementedError

    def eq(self, a: Number, b: Number) -> bool:
        return abs(a - b) <= self.tau_eq

    def gt(self, a: Number, b: Number) -> bool:
        return a > b + self.tau_eq

    def ge(self, a: Number, b: Number) -> bool:
        return a >= b - self.tau_eq

    def lt(self, a: Number, b: Number) -> bool:
        return self.gt(b, a)

    def le(self, a: Number, b: Number) -> bool:
        return self.ge(b, a)

    def is_positive(self, x: Number) -> bool:
        """Strict positivity of an LP variable (support floor)."""
        return x > 0

    def clean(self, x: Number) -> Number:
        return x

    def sums_to_one(self, total: Number) -> bool:
        return total == 1

    def format(self, x: Number) -> str:
        raise NotImplementedError

    def array(self, values) -> np.ndarray:
        return np.array(values, dtype=self.dtype)

    def solve_linear(self, matrix: Sequence[Sequence[Number]], rhs: Sequence[Number]) -> List[Number]:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}(tau_eq={self.tau_eq})"


class FloatBackend(NumericBackend):
    """IEEE doubles; equality within tau_eq."""

    name = "float"
    exact = False
    dtype = float

    def __init__(self, tau_eq: float = 1e-9, pi_min: float = 1e-9):
        super().__init__(float(tau_eq), float(pi_min))

    def convert(self, x) -> float:
        if isinstance(x, str):
            return float(Fraction(x))
        return float(x)

    def is_positive(self, x: float) -> bool:
        return x >= max(self.pi_min, self.tau_eq) and x > 0

    def clean(self, x: float) -> float:
        return 0.0 if abs(x) < CLEAN_EPS else float(x)

    def sums_to_one(self, total: float) -> bool:
        return abs(total - 1.0) <= CLEAN_EPS

    def format(self, x: Number) -> str:
        text = f"{float(x):.15g}"
        return "0" if text == "-0" else text

    def solve_linear(self, matrix, rhs) -> List[float]:
        if len(rhs) == 0:
            return []
        solution = np.linalg.solve(np.asarray(matrix, dtype=float), np.asarray(rhs, dtype=float))
        return [float(x) for x in solution]


class RationalBackend(NumericBackend):
    """Exact arithmetic with fractions.Fraction."""

    name = "rational"
    exact = True
    dtype = object

    def __init__(self):
        super().__init__(Fraction(0), Fraction(0))

    def convert(self, x) -> Fraction:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, float):
            return Fraction(repr(x))
        return Fraction(x)

    def format(self, x: Number) -> str:
        x = self.convert(x)
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"

    def solve_linear(self, matrix, rhs) -> List[Fraction]:
        """Gauss-Jordan elimination over the rationals."""
        n = len(rhs)
        rows = [[self.convert(x) for x in matrix[i]] + [self.convert(rhs[i])] for i in range(n)]
        for col in range(n):
            pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
            if pivot is None:
                raise np.linalg.LinAlgError("singular matrix")
            rows[col], rows[pivot] = rows[pivot], rows[col]
            p = rows[col][col]
            rows[col] = [x / p for x in rows[col]]
            for r in range(n):
                factor = rows[r][col]
                if r != col and factor != 0:
                    rows[r] = [x - factor * y for x, y in zip(rows[r], rows[col])]
        return [rows[r][n] for r in range(n)]


def get_backend(name: str, tau_eq: float = 1e-9, pi_min: float = 1e-9) -> NumericBackend:
    """
    Build a backend from its name.

    Args:
        name: 'float' (alias 'floating') or 'rational'
        tau_eq: comparison tolerance for float mode
        pi_min: support floor for float mode

    Returns:
        NumericBackend instance
    """
    if name in ("float", "floating"):
        return FloatBackend(tau_eq, pi_min)
    if name == "rational":
        return RationalBackend()
    raise ValueError(f"Unknown numeric backend: {name}")


def _significant_digits(text: str) -> int:
    match = _DECIMAL.match(text.strip())
    if match is None:
        return 0
    digits = (match.group(1) or "") + (match.group(2) or "")
    return len(digits.lstrip("0")) or 1


def parse_probability(value, backend: NumericBackend) -> Number:
    """
    Parse a probability literal from a game file.

    Args:
        value: decimal string, "p/q" string, or JSON number
        backend: backend the value is converted into

    Returns:
        Probability in [0, 1] in the backend's number type
    """
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise GameFormatError(f"probability must be a string or number, got {value!r}")
    text = value if isinstance(value, str) else repr(value)
    text = text.strip()
    try:
        exact = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise GameFormatError(f"malformed probability {value!r}")
    if backend.exact and "/" not in text and _significant_digits(text) > MAX_SIGNIFICANT_DIGITS:
        raise GameFormatError(
            f"probability {text} has more than {MAX_SIGNIFICANT_DIGITS} significant digits"
        )
    if exact < 0 or exact > 1:
        raise GameFormatError(f"probability {text} outside [0, 1]")
    return backend.convert(exact)
