"""Exact multivariate polynomials with rational coefficients.

Coefficients are ``fractions.Fraction`` and monomials are exponent tuples
aligned with a fixed tuple of variable names. This is all the symbolic algebra
the series generators need; nothing here attempts general simplification.
"""
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

Number = Union[int, Fraction]
Monomial = Tuple[int, ...]


class Poly:
    """Polynomial over a fixed ordered set of variables"""

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Iterable[str], terms: Optional[Mapping[Monomial, Number]] = None):
        self.variables: Tuple[str, ...] = tuple(variables)
        clean: Dict[Monomial, Fraction] = {}
        for exps, coef in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != len(self.variables):
                raise ValueError(f"Monomial {exps} does not match variables {self.variables}")
            coef = Fraction(coef)
            if coef != 0:
                clean[exps] = coef
        self.terms: Dict[Monomial, Fraction] = clean

    # Constructors

    @classmethod
    def constant(cls, variables: Iterable[str], value: Number) -> "Poly":
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): value})

    @classmethod
    def variable(cls, variables: Iterable[str], name: str) -> "Poly":
        variables = tuple(variables)
        exps = tuple(1 if v == name else 0 for v in variables)
        if sum(exps) != 1:
            raise ValueError(f"Unknown variable {name!r} for {variables}")
        return cls(variables, {exps: 1})

    @classmethod
    def zero(cls, variables: Iterable[str]) -> "Poly":
        return cls(variables)

    # Arithmetic

    def _coerce(self, other: Any) -> "Poly":
        if isinstance(other, Poly):
            if other.variables != self.variables:
                raise ValueError(f"Variable mismatch: {self.variables} vs {other.variables}")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.constant(self.variables, other)
        raise TypeError(f"Cannot combine Poly with {type(other).__name__}")

    def __add__(self, other: Any) -> "Poly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        terms = dict(self.terms)
        for exps, coef in other.terms.items():
            terms[exps] = terms.get(exps, 0) + coef
        return Poly(self.variables, terms)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.variables, {exps: -coef for exps, coef in self.terms.items()})

    def __sub__(self, other: Any) -> "Poly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> "Poly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other: Any) -> "Poly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        terms: Dict[Monomial, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                terms[exps] = terms.get(exps, 0) + c1 * c2
        return Poly(self.variables, terms)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "Poly":
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        if other == 0:
            raise ZeroDivisionError("Poly division by zero")
        inv = 1 / Fraction(other)
        return Poly(self.variables, {exps: coef * inv for exps, coef in self.terms.items()})

    def __pow__(self, power: int) -> "Poly":
        if not isinstance(power, int) or power < 0:
            raise ValueError("Poly powers must be non-negative integers")
        result = Poly.constant(self.variables, 1)
        base = self
        while power:
            if power & 1:
                result = result * base
            base = base * base
            power >>= 1
        return result

    def __eq__(self, other: Any) -> bool:
        try:
            other = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.variables, frozenset(self.terms.items())))

    # Inspection

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(exps) for exps in self.terms)

    def constant_value(self) -> Fraction:
        """Return the value of a constant polynomial"""
        if not self.is_constant():
            raise ValueError(f"Poly {self} is not constant")
        return self.terms.get((0,) * len(self.variables), Fraction(0))

    def degree(self, name: str) -> int:
        idx = self.variables.index(name)
        return max((exps[idx] for exps in self.terms), default=0)

    def coefficient(self, name: str, power: int) -> "Poly":
        """Coefficient of name**power as a polynomial in the remaining variables"""
        idx = self.variables.index(name)
        terms = {}
        for exps, coef in self.terms.items():
            if exps[idx] == power:
                reduced = exps[:idx] + (0,) + exps[idx + 1:]
                terms[reduced] = coef
        return Poly(self.variables, terms)

    # Evaluation and substitution

    def evaluate(self, **values: Any) -> Any:
        """Evaluate at the given variable values.

        Exact when every value used is an int or Fraction, floating otherwise.
        Variables that do not occur may be omitted.
        """
        used = [v for i, v in enumerate(self.variables) if any(exps[i] for exps in self.terms)]
        missing = [v for v in used if v not in values]
        if missing:
            raise KeyError(f"Missing values for {missing}")
        exact = all(isinstance(values[v], (int, Fraction)) for v in used)
        total: Any = Fraction(0) if exact else 0.0
        for exps, coef in self.terms.items():
            term: Any = coef if exact else float(coef)
            for name, e in zip(self.variables, exps):
                if e:
                    term = term * values[name] ** e
            total = total + term
        return total

    def compose(self, variables: Iterable[str], mapping: Mapping[str, "Poly"]) -> "Poly":
        """Replace every variable by a polynomial over a new variable set"""
        variables = tuple(variables)
        result = Poly.zero(variables)
        powers: Dict[Tuple[str, int], Poly] = {}
        for exps, coef in self.terms.items():
            term = Poly.constant(variables, coef)
            for name, e in zip(self.variables, exps):
                if e:
                    key = (name, e)
                    if key not in powers:
                        powers[key] = mapping[name] ** e
                    term = term * powers[key]
            result = result + term
        return result

    def substitute(self, name: str, value: Union["Poly", Number]) -> "Poly":
        """Replace one variable by a polynomial (same variable set) or a number"""
        if not isinstance(value, Poly):
            value = Poly.constant(self.variables, value)
        mapping = {v: Poly.variable(self.variables, v) for v in self.variables}
        mapping[name] = value
        return self.compose(self.variables, mapping)

    # Serialization

    def sorted_terms(self) -> List[Tuple[Monomial, Fraction]]:
        return sorted(self.terms.items(), reverse=True)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variables": list(self.variables),
            "terms": [[list(exps), coef.numerator, coef.denominator] for exps, coef in self.sorted_terms()],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Poly":
        terms = {tuple(exps): Fraction(num, den) for exps, num, den in data["terms"]}
        return cls(data["variables"], terms)

    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps, coef in self.sorted_terms():
            factors = [f"{v}^{e}" if e > 1 else v for v, e in zip(self.variables, exps) if e]
            if factors:
                prefix = "" if coef == 1 else "-" if coef == -1 else f"{coef}*"
                parts.append(prefix + "*".join(factors))
            else:
                parts.append(str(coef))
        return " + ".join(parts).replace("+ -", "- ")
