"""Arithmetic expressions over state variables, time, and named parameters.

This is the representation of every nonlinear right-hand side: a small tree
language with variables ``x1 .. xn``, time ``t`` (``k`` in discrete contexts),
numeric literals, the arithmetic operators ``+ - * / ^``, and the function
table ``sin cos tan exp log sqrt abs pow``.

Grammar (EBNF, also published in ``docs/expression-grammar.md``)::

    expr    = term   { ("+" | "-") term }
    term    = factor { ("*" | "/") factor }
    factor  = "-" factor | power
    power   = atom [ "^" factor ]          (right associative)
    atom    = NUMBER | IDENT | IDENT "(" expr { "," expr } ")" | "(" expr ")"

Unary minus binds tighter than ``*``/``/`` but looser than ``^``, so
``-2^2 == -(2^2) == -4``.  There is no implicit multiplication: ``2x1`` is a
syntax error.  Non-finite evaluation results are reported as
:class:`~stabkit.errors.DomainError`, never returned as values.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .errors import (
    ArityMismatchError,
    DomainError,
    ParseError,
    UnboundVariableError,
    UnknownIdentifierError,
)

__all__ = [
    "Number", "Var", "Unary", "Binary", "Call", "Expr",
    "EvalContext", "parse", "evaluate", "to_string", "free_vars",
    "substitute", "compile_expr", "FUNCTIONS",
]

# function name -> arity
FUNCTIONS: dict[str, int] = {
    "sin": 1, "cos": 1, "tan": 1, "exp": 1,
    "log": 1, "sqrt": 1, "abs": 1, "pow": 2,
}

_VAR_RE = re.compile(r"^x([1-9][0-9]*)$")


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    child: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]


Expr = Number | Var | Unary | Binary | Call


@dataclass
class EvalContext:
    """Bindings for one evaluation: state vector, time, and parameters.

    ``state[k-1]`` backs ``xk``; ``time`` backs both ``t`` and the discrete
    index ``k``; everything else is looked up in ``params``.
    """

    state: Sequence[float] = ()
    time: float | None = None
    params: Mapping[str, float] | None = None


# --- tokenizer ----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            # skip over whitespace-only tail
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}", pos)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


# binding powers; '^' handled right-associatively in the loop
_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_BP = 25  # between mul/div and power


class _Parser:
    def __init__(self, text: str, param_names: Iterable[str] | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.param_names = None if param_names is None else set(param_names)

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, value, pos = self.peek()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}", pos)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expression(0)
        kind, value, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {value!r}", pos)
        return e

    def expression(self, rbp: int) -> Expr:
        left = self.prefix()
        while True:
            kind, value, _pos = self.peek()
            if kind != "op" or value not in _BP or _BP[value] <= rbp:
                break
            self.advance()
            if value == "^":
                # right associative: bind the rest at bp-1
                right = self.expression(_BP[value] - 1)
            else:
                right = self.expression(_BP[value])
            left = Binary(value, left, right)
        return left

    def prefix(self) -> Expr:
        kind, value, pos = self.advance()
        if kind == "num":
            return Number(float(value))
        if kind == "op" and value == "-":
            return Unary("-", self.expression(_UNARY_BP))
        if kind == "op" and value == "+":
            return self.expression(_UNARY_BP)
        if kind == "op" and value == "(":
            e = self.expression(0)
            self.expect_op(")")
            return e
        if kind == "ident":
            nxt_kind, nxt_value, _ = self.peek()
            if nxt_kind == "op" and nxt_value == "(":
                return self.call(value, pos)
            if value in FUNCTIONS:
                raise UnknownIdentifierError(value, pos)
            self.check_var(value, pos)
            return Var(value)
        raise ParseError(f"unexpected token {value!r}" if value else "unexpected end of input", pos)

    def call(self, name: str, pos: int) -> Expr:
        if name not in FUNCTIONS:
            raise UnknownIdentifierError(name, pos)
        self.expect_op("(")
        args = [self.expression(0)]
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value == ",":
                self.advance()
                args.append(self.expression(0))
            else:
                break
        self.expect_op(")")
        if len(args) != FUNCTIONS[name]:
            raise ArityMismatchError(name, FUNCTIONS[name], len(args))
        return Call(name, tuple(args))

    def check_var(self, name: str, pos: int):
        # "t" and "xK" are always state/time; "k" doubles as the discrete
        # index unless declared as a parameter (pendulum-style constants).
        if name in ("t", "k") or _VAR_RE.match(name):
            return
        if self.param_names is not None and name not in self.param_names:
            raise UnknownIdentifierError(name, pos)


def parse(text: str, params: Iterable[str] | None = None) -> Expr:
    """Parse ``text`` into an expression tree.

    Parameters
    ----------
    text : str
        Source, e.g. ``"-3*x1 + x2"`` or ``"cos(t)*x1 - x2 - sin(t)*x3"``.
    params : iterable of str, optional
        Declared parameter names.  When given, any bare identifier that is
        not ``t``, ``k``, ``xK``, or one of these names raises
        :class:`UnknownIdentifierError`; when omitted, arbitrary identifiers
        are accepted and validated later against the owning system.
    """
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text, params).parse()


# --- evaluation ---------------------------------------------------------------

def _check_finite(value: float, node: Expr) -> float:
    if not math.isfinite(value):
        raise DomainError(f"non-finite value from {to_string(node)!r}", node)
    return value


def _apply_call(name: str, args: list[float], node: Expr) -> float:
    try:
        if name == "sin":
            return math.sin(args[0])
        if name == "cos":
            return math.cos(args[0])
        if name == "tan":
            return math.tan(args[0])
        if name == "exp":
            return math.exp(args[0])
        if name == "log":
            if args[0] <= 0.0:
                raise DomainError(f"log of non-positive value {args[0]!r}", node)
            return math.log(args[0])
        if name == "sqrt":
            if args[0] < 0.0:
                raise DomainError(f"sqrt of negative value {args[0]!r}", node)
            return math.sqrt(args[0])
        if name == "abs":
            return abs(args[0])
        if name == "pow":
            return math.pow(args[0], args[1])
    except (ValueError, OverflowError) as exc:
        raise DomainError(f"{name}() failed: {exc}", node) from None
    raise UnknownIdentifierError(name)


def evaluate(e: Expr, ctx: EvalContext) -> float:
    """Evaluate the tree at the given context.

    Raises :class:`DomainError` on division by zero, invalid function
    operands, or any non-finite intermediate, and
    :class:`UnboundVariableError` when a variable has no binding.
    """
    if isinstance(e, Number):
        return e.value
    if isinstance(e, Var):
        return _lookup(e.name, ctx)
    if isinstance(e, Unary):
        return -evaluate(e.child, ctx)
    if isinstance(e, Binary):
        a = evaluate(e.left, ctx)
        b = evaluate(e.right, ctx)
        if e.op == "+":
            return _check_finite(a + b, e)
        if e.op == "-":
            return _check_finite(a - b, e)
        if e.op == "*":
            return _check_finite(a * b, e)
        if e.op == "/":
            if b == 0.0:
                raise DomainError("division by zero", e)
            return _check_finite(a / b, e)
        if e.op == "^":
            try:
                return _check_finite(math.pow(a, b), e)
            except (ValueError, OverflowError) as exc:
                raise DomainError(f"power failed: {exc}", e) from None
    if isinstance(e, Call):
        args = [evaluate(a, ctx) for a in e.args]
        return _check_finite(_apply_call(e.func, args, e), e)
    raise TypeError(f"not an expression node: {e!r}")


def _lookup(name: str, ctx: EvalContext) -> float:
    if name == "t":
        if ctx.time is None:
            raise UnboundVariableError(name)
        return float(ctx.time)
    m = _VAR_RE.match(name)
    if m:
        idx = int(m.group(1))
        if idx > len(ctx.state):
            raise UnboundVariableError(name)
        return float(ctx.state[idx - 1])
    if ctx.params is not None and name in ctx.params:
        return float(ctx.params[name])
    if name == "k":  # discrete orbit index, unless declared as a parameter
        if ctx.time is None:
            raise UnboundVariableError(name)
        return float(ctx.time)
    raise UnboundVariableError(name)


# --- structure helpers ----------------------------------------------------------

def free_vars(e: Expr) -> set[str]:
    """Names of all variables appearing in ``e`` (including parameters)."""
    out: set[str] = set()
    _collect_vars(e, out)
    return out


def _collect_vars(e: Expr, out: set[str]) -> None:
    if isinstance(e, Var):
        out.add(e.name)
    elif isinstance(e, Unary):
        _collect_vars(e.child, out)
    elif isinstance(e, Binary):
        _collect_vars(e.left, out)
        _collect_vars(e.right, out)
    elif isinstance(e, Call):
        for a in e.args:
            _collect_vars(a, out)


def max_state_index(e: Expr) -> int:
    """Largest K such that xK appears in ``e`` (0 when no state variable does)."""
    best = 0
    for name in free_vars(e):
        m = _VAR_RE.match(name)
        if m:
            best = max(best, int(m.group(1)))
    return best


def substitute(e: Expr, name: str, replacement: Expr) -> Expr:
    """Return a copy of ``e`` with every ``Var(name)`` replaced."""
    if isinstance(e, Number):
        return e
    if isinstance(e, Var):
        return replacement if e.name == name else e
    if isinstance(e, Unary):
        return Unary(e.op, substitute(e.child, name, replacement))
    if isinstance(e, Binary):
        return Binary(e.op, substitute(e.left, name, replacement),
                      substitute(e.right, name, replacement))
    if isinstance(e, Call):
        return Call(e.func, tuple(substitute(a, name, replacement) for a in e.args))
    raise TypeError(f"not an expression node: {e!r}")


# --- printing -------------------------------------------------------------------

def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _BP[e.op]
    if isinstance(e, Unary):
        return _UNARY_BP
    if isinstance(e, Number) and math.copysign(1.0, e.value) < 0:
        return _UNARY_BP  # prints with a leading minus
    return 100


def to_string(e: Expr) -> str:
    """Render with minimal parentheses; ``parse(to_string(e))`` equals ``e``."""
    if isinstance(e, Number):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        child = to_string(e.child)
        # operand at lower-or-equal precedence needs parens (e.g. -(x + 1));
        # equal matters for -(x^2) which must not print as -x^2's... it does:
        # unary bp 25 < '^' 30 so x^2 prints bare, and -(-x) needs parens.
        if _prec(e.child) <= _UNARY_BP:
            child = f"({child})"
        return f"-{child}"
    if isinstance(e, Binary):
        lp, rp = _prec(e.left), _prec(e.right)
        left, right = to_string(e.left), to_string(e.right)
        if lp < _BP[e.op] or (e.op == "^" and lp == _BP[e.op]):
            left = f"({left})"
        # right operand: left-assoc ops need parens at equal precedence
        if rp < _BP[e.op] or (e.op != "^" and rp == _BP[e.op]):
            right = f"({right})"
        return f"{left} {e.op} {right}" if e.op in "+-" else f"{left}{e.op}{right}"
    if isinstance(e, Call):
        return f"{e.func}({', '.join(to_string(a) for a in e.args)})"
    raise TypeError(f"not an expression node: {e!r}")


# --- compilation ----------------------------------------------------------------

def _codegen(e: Expr, params: Mapping[str, float]) -> str:
    if isinstance(e, Number):
        return repr(e.value)
    if isinstance(e, Var):
        if e.name == "t":
            return "t"
        m = _VAR_RE.match(e.name)
        if m:
            return f"x[{int(m.group(1)) - 1}]"
        if e.name in params:
            return repr(float(params[e.name]))
        if e.name == "k":  # discrete orbit index rides the time slot
            return "t"
        raise UnboundVariableError(e.name)
    if isinstance(e, Unary):
        return f"(-({_codegen(e.child, params)}))"
    if isinstance(e, Binary):
        a, b = _codegen(e.left, params), _codegen(e.right, params)
        if e.op == "^":
            return f"_pow({a}, {b})"
        if e.op == "/":
            return f"_div({a}, {b})"
        return f"({a} {e.op} {b})"
    if isinstance(e, Call):
        args = ", ".join(_codegen(a, params) for a in e.args)
        return f"_{e.func}({args})"
    raise TypeError(f"not an expression node: {e!r}")


def _checked_div(a: float, b: float) -> float:
    if b == 0.0:
        raise DomainError("division by zero")
    return a / b


def _checked_log(a: float) -> float:
    if a <= 0.0:
        raise DomainError(f"log of non-positive value {a!r}")
    return math.log(a)


def _checked_sqrt(a: float) -> float:
    if a < 0.0:
        raise DomainError(f"sqrt of negative value {a!r}")
    return math.sqrt(a)


_COMPILE_NS = {
    "_sin": math.sin, "_cos": math.cos, "_tan": math.tan, "_exp": math.exp,
    "_log": _checked_log, "_sqrt": _checked_sqrt, "_abs": abs,
    "_pow": math.pow, "_div": _checked_div,
}


def compile_expr(e: Expr, params: Mapping[str, float] | None = None,
                 ) -> Callable[[Sequence[float], float], float]:
    """Compile the tree to a fast ``f(state, t) -> float``.

    Parameter values are frozen in at compile time.  The compiled function
    applies the same IEEE operations as :func:`evaluate` (results are
    bit-identical); non-finite results and invalid operands raise
    :class:`DomainError` like the tree walker, with the finiteness check
    applied to the final value rather than per node.
    """
    params = dict(params or {})
    src = _codegen(e, params)
    fn = eval(compile(f"lambda x, t: {src}", "<stabkit-expr>", "eval"),
              {"__builtins__": {}, **_COMPILE_NS})

    def wrapped(x: Sequence[float], t: float) -> float:
        try:
            value = fn(x, t)
        except DomainError:
            raise
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise DomainError(str(exc), e) from None
        if not math.isfinite(value):
            raise DomainError("non-finite evaluation result", e)
        return value

    return wrapped


def compile_expr_vec(e: Expr, params: Mapping[str, float] | None = None):
    """Compile to a batch evaluator ``f(X, t) -> ndarray``.

    ``X`` has one sample per row; ``t`` is a scalar or a per-row array.
    Backed by numpy ufuncs, so invalid operands surface as non-finite
    outputs, which raise a single :class:`DomainError` for the batch.
    Intended for dense scans of well-behaved (polynomial/trigonometric)
    expressions; use :func:`compile_expr` when per-point error attribution
    matters.
    """
    import numpy as _np

    params = dict(params or {})
    src = _codegen(e, params)
    ns = {
        "_sin": _np.sin, "_cos": _np.cos, "_tan": _np.tan, "_exp": _np.exp,
        "_log": _np.log, "_sqrt": _np.sqrt, "_abs": _np.abs,
        "_pow": _np.power, "_div": _np.divide,
    }
    fn = eval(compile(f"lambda x, t: {src}", "<stabkit-expr-vec>", "eval"),
              {"__builtins__": {}, **ns})

    def wrapped(X, t):
        cols = _np.asarray(X, dtype=float).T
        with _np.errstate(all="ignore"):
            value = fn(cols, t)
        value = _np.asarray(value, dtype=float)
        if value.ndim == 0:
            value = _np.full(cols.shape[1] if cols.ndim > 1 else 1, float(value))
        if not _np.all(_np.isfinite(value)):
            raise DomainError("non-finite value in batch evaluation", e)
        return value

    return wrapped


def as_expr(entry: "Expr | float | int | str",
            params: Iterable[str] | None = None) -> Expr:
    """Coerce a number, source string, or tree into an :class:`Expr`."""
    if isinstance(entry, (Number, Var, Unary, Binary, Call)):
        return entry
    if isinstance(entry, str):
        return parse(entry, params)
    if isinstance(entry, (int, float)):
        return Number(float(entry))
    raise TypeError(f"cannot interpret {entry!r} as an expression")
