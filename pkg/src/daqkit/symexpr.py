"""Symbolic parameter expressions.

Expressions are small immutable trees built from parameter leaves, constants,
arithmetic nodes and a handful of unary functions. They evaluate with numpy,
so a value may be a float or a 1-D array holding a batch of valuations.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from numbers import Real
from typing import Mapping, Union

import numpy as np

from daqkit.errors import DomainError, MissingParameter, ParameterConflict

Value = Union[float, np.ndarray]


class Kind(str, Enum):
    FIXED = "fixed"
    VARIATIONAL = "variational"
    FEATURE = "feature"


@dataclass(frozen=True)
class Parameter:
    name: str
    kind: Kind
    value: float | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("parameter names must be non-empty")
        if (self.kind is Kind.FIXED) != (self.value is not None):
            raise ValueError("only fixed parameters carry a value")

    @property
    def trainable(self) -> bool:
        return self.kind is Kind.VARIATIONAL


class Expression:
    """Base class for expression nodes; provides the arithmetic operators."""

    __slots__ = ()

    def __add__(self, other: object) -> Expression:
        return Add(self, as_expression(other))

    def __radd__(self, other: object) -> Expression:
        return Add(as_expression(other), self)

    def __sub__(self, other: object) -> Expression:
        return Add(self, Neg(as_expression(other)))

    def __rsub__(self, other: object) -> Expression:
        return Add(as_expression(other), Neg(self))

    def __mul__(self, other: object) -> Expression:
        return Mul(self, as_expression(other))

    def __rmul__(self, other: object) -> Expression:
        return Mul(as_expression(other), self)

    def __truediv__(self, other: object) -> Expression:
        return Mul(self, Pow(as_expression(other), Const(-1.0)))

    def __rtruediv__(self, other: object) -> Expression:
        return Mul(as_expression(other), Pow(self, Const(-1.0)))

    def __pow__(self, other: object) -> Expression:
        return Pow(self, as_expression(other))

    def __rpow__(self, other: object) -> Expression:
        return Pow(as_expression(other), self)

    def __neg__(self) -> Expression:
        return Neg(self)

    def __str__(self) -> str:
        return _infix(self)

    # convenience forwards
    def evaluate(self, values: Mapping[str, Value] | None = None) -> Value:
        return evaluate(self, values or {})

    def parameters(self) -> frozenset[Parameter]:
        return collect_parameters(self)

    @property
    def is_constant(self) -> bool:
        return not any(p.kind is not Kind.FIXED for p in collect_parameters(self))


@dataclass(frozen=True, eq=True)
class Const(Expression):
    value: float


@dataclass(frozen=True, eq=True)
class Param(Expression):
    param: Parameter

    @property
    def name(self) -> str:
        return self.param.name


@dataclass(frozen=True, eq=True)
class Add(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, eq=True)
class Mul(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, eq=True)
class Pow(Expression):
    base: Expression
    exponent: Expression


@dataclass(frozen=True, eq=True)
class Neg(Expression):
    operand: Expression


FUNCTIONS = ("sin", "cos", "acos", "exp", "sqrt", "log")


@dataclass(frozen=True, eq=True)
class Func(Expression):
    name: str
    arg: Expression

    def __post_init__(self) -> None:
        if self.name not in FUNCTIONS:
            raise ValueError(f"unsupported function {self.name!r}")


PI = Const(float(np.pi))


def VariationalParameter(name: str) -> Param:
    return Param(Parameter(name, Kind.VARIATIONAL))


def FeatureParameter(name: str) -> Param:
    return Param(Parameter(name, Kind.FEATURE))


def FixedParameter(name: str, value: float) -> Param:
    return Param(Parameter(name, Kind.FIXED, float(value)))


def as_expression(x: object) -> Expression:
    """Promote numbers to constants and strings to variational parameters."""
    if isinstance(x, Expression):
        return x
    if isinstance(x, str):
        return VariationalParameter(x)
    if isinstance(x, (Real, np.floating, np.integer)) and not isinstance(x, bool):
        return Const(float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to an expression")


def sin(x: object) -> Expression:
    return Func("sin", as_expression(x))


def cos(x: object) -> Expression:
    return Func("cos", as_expression(x))


def acos(x: object) -> Expression:
    return Func("acos", as_expression(x))


def exp(x: object) -> Expression:
    return Func("exp", as_expression(x))


def sqrt(x: object) -> Expression:
    return Func("sqrt", as_expression(x))


def log(x: object) -> Expression:
    return Func("log", as_expression(x))


# --------------------------------------------------------------------------
# evaluation


def _check_domain(name: str, x: Value) -> None:
    a = np.asarray(x)
    if name == "acos" and np.any(np.abs(a) > 1.0):
        raise DomainError(f"acos argument outside [-1, 1]: {x}")
    if name == "sqrt" and np.any(a < 0.0):
        raise DomainError(f"sqrt of a negative number: {x}")
    if name == "log" and np.any(a <= 0.0):
        raise DomainError(f"log of a non-positive number: {x}")


_NUMPY = {
    "sin": np.sin,
    "cos": np.cos,
    "acos": np.arccos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "log": np.log,
}


def evaluate(expr: Expression, values: Mapping[str, Value]) -> Value:
    """Numeric value of ``expr``; arrays in ``values`` broadcast as a batch."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Param):
        p = expr.param
        if p.kind is Kind.FIXED:
            return p.value
        try:
            return values[p.name]
        except KeyError:
            raise MissingParameter(p.name) from None
    if isinstance(expr, Add):
        return evaluate(expr.left, values) + evaluate(expr.right, values)
    if isinstance(expr, Mul):
        return evaluate(expr.left, values) * evaluate(expr.right, values)
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, values)
    if isinstance(expr, Pow):
        b = evaluate(expr.base, values)
        e = evaluate(expr.exponent, values)
        ba, ea = np.asarray(b, dtype=float), np.asarray(e, dtype=float)
        if np.any((ba == 0.0) & (ea < 0.0)):
            raise DomainError("zero raised to a negative power")
        if np.any((ba < 0.0) & (ea != np.round(ea))):
            raise DomainError("negative base with non-integer exponent")
        out = np.power(ba, ea)
        return float(out) if out.ndim == 0 else out
    if isinstance(expr, Func):
        x = evaluate(expr.arg, values)
        _check_domain(expr.name, x)
        out = _NUMPY[expr.name](x)
        return float(out) if np.ndim(out) == 0 else out
    raise TypeError(f"unknown expression node {type(expr).__name__}")


# --------------------------------------------------------------------------
# differentiation

ZERO = Const(0.0)
ONE = Const(1.0)


def _is(e: Expression, v: float) -> bool:
    return isinstance(e, Const) and e.value == v


def _add(a: Expression, b: Expression) -> Expression:
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return Add(a, b)


def _mul(a: Expression, b: Expression) -> Expression:
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    return Mul(a, b)


def _neg(a: Expression) -> Expression:
    return ZERO if _is(a, 0.0) else Neg(a)


def differentiate(expr: Expression, wrt: Parameter | Param | str) -> Expression:
    """Analytic partial derivative of ``expr`` with respect to one leaf."""
    if isinstance(wrt, Param):
        wrt = wrt.param
    if isinstance(wrt, Parameter):
        if wrt.kind is Kind.FIXED:
            raise ValueError("cannot differentiate with respect to a fixed parameter")
        name = wrt.name
    else:
        name = wrt
    return _diff(expr, name)


def _diff(e: Expression, name: str) -> Expression:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Param):
        if e.param.kind is not Kind.FIXED and e.param.name == name:
            return ONE
        return ZERO
    if isinstance(e, Add):
        return _add(_diff(e.left, name), _diff(e.right, name))
    if isinstance(e, Neg):
        return _neg(_diff(e.operand, name))
    if isinstance(e, Mul):
        return _add(
            _mul(_diff(e.left, name), e.right),
            _mul(e.left, _diff(e.right, name)),
        )
    if isinstance(e, Pow):
        db = _diff(e.base, name)
        de = _diff(e.exponent, name)
        # d(b^c) = c * b^(c-1) * db  when c is free of ``name``
        power_term = _mul(_mul(e.exponent, Pow(e.base, _add(e.exponent, Const(-1.0)))), db)
        if _is(de, 0.0):
            return power_term
        return _add(power_term, _mul(_mul(e, Func("log", e.base)), de))
    if isinstance(e, Func):
        da = _diff(e.arg, name)
        if _is(da, 0.0):
            return ZERO
        x = e.arg
        if e.name == "sin":
            outer: Expression = Func("cos", x)
        elif e.name == "cos":
            outer = Neg(Func("sin", x))
        elif e.name == "acos":
            outer = Neg(Pow(Add(ONE, Neg(Mul(x, x))), Const(-0.5)))
        elif e.name == "exp":
            outer = e
        elif e.name == "sqrt":
            outer = Mul(Const(0.5), Pow(x, Const(-0.5)))
        elif e.name == "log":
            outer = Pow(x, Const(-1.0))
        else:  # pragma: no cover - guarded by Func.__post_init__
            raise TypeError(e.name)
        return _mul(outer, da)
    raise TypeError(f"unknown expression node {type(e).__name__}")


# --------------------------------------------------------------------------
# inspection


def collect_parameters(expr: Expression) -> frozenset[Parameter]:
    """Every distinct leaf parameter in ``expr``.

    Raises ParameterConflict if one name is used with two different kinds.
    """
    found: dict[str, Parameter] = {}
    stack = [expr]
    while stack:
        e = stack.pop()
        if isinstance(e, Param):
            prev = found.setdefault(e.param.name, e.param)
            if prev != e.param:
                raise ParameterConflict(
                    f"parameter '{e.param.name}' used as both {prev.kind.value} "
                    f"and {e.param.kind.value}"
                )
        elif isinstance(e, (Add, Mul)):
            stack += [e.left, e.right]
        elif isinstance(e, Pow):
            stack += [e.base, e.exponent]
        elif isinstance(e, Neg):
            stack.append(e.operand)
        elif isinstance(e, Func):
            stack.append(e.arg)
    return frozenset(found.values())


def free_names(expr: Expression) -> frozenset[str]:
    """Names of the non-fixed leaves, i.e. what ``evaluate`` needs."""
    return frozenset(p.name for p in collect_parameters(expr) if p.kind is not Kind.FIXED)


def to_sexpr(expr: Expression) -> str:
    """Canonical prefix text form, e.g. ``(mul (acos (var theta)) (const 2.0))``."""
    if isinstance(expr, Const):
        return f"(const {expr.value!r})"
    if isinstance(expr, Param):
        p = expr.param
        if p.kind is Kind.FIXED:
            return f"(fixed {p.name} {p.value!r})"
        tag = "var" if p.kind is Kind.VARIATIONAL else "feat"
        return f"({tag} {p.name})"
    if isinstance(expr, Add):
        return f"(add {to_sexpr(expr.left)} {to_sexpr(expr.right)})"
    if isinstance(expr, Mul):
        return f"(mul {to_sexpr(expr.left)} {to_sexpr(expr.right)})"
    if isinstance(expr, Pow):
        return f"(pow {to_sexpr(expr.base)} {to_sexpr(expr.exponent)})"
    if isinstance(expr, Neg):
        return f"(neg {to_sexpr(expr.operand)})"
    if isinstance(expr, Func):
        return f"({expr.name} {to_sexpr(expr.arg)})"
    raise TypeError(type(expr).__name__)


def _infix(e: Expression) -> str:
    if isinstance(e, Const):
        return f"{e.value:.6g}"
    if isinstance(e, Param):
        return e.param.name
    if isinstance(e, Add):
        if isinstance(e.right, Neg):
            return f"({_infix(e.left)} - {_infix(e.right.operand)})"
        return f"({_infix(e.left)} + {_infix(e.right)})"
    if isinstance(e, Mul):
        return f"{_infix(e.left)}*{_infix(e.right)}"
    if isinstance(e, Pow):
        return f"{_infix(e.base)}**{_infix(e.exponent)}"
    if isinstance(e, Neg):
        return f"-{_infix(e.operand)}"
    if isinstance(e, Func):
        inner = _infix(e.arg)
        if inner.startswith("(") and inner.endswith(")"):
            return f"{e.name}{inner}"
        return f"{e.name}({inner})"
    return repr(e)
