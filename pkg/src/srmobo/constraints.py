"""Known-constraint indicator and the hidden-constraint feasibility classifier."""

from __future__ import annotations

import ast
import math
import operator
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import gp

Constraint = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class LinearConstraint:
    """``coef @ x - rhs <= 0``."""

    coef: np.ndarray
    rhs: float

    def __post_init__(self):
        object.__setattr__(self, "coef", np.asarray(self.coef, dtype=float))
        object.__setattr__(self, "rhs", float(self.rhs))

    def __call__(self, x) -> float:
        return float(self.coef @ np.asarray(x, dtype=float) - self.rhs)

    def batch(self, x: np.ndarray) -> np.ndarray:
        return x @ self.coef - self.rhs


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "min": np.minimum,
    "max": np.maximum,
}
_CONSTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class ExpressionConstraint:
    """Arithmetic expression in ``x[i]`` that must evaluate to ``<= 0``.

    Only numbers, ``x[<int>]``, ``+ - * / **``, ``pi``, ``e`` and the
    functions in ``_FUNCS`` are accepted.
    """

    source: str
    _tree: ast.Expression = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        try:
            tree = ast.parse(self.source, mode="eval")
        except SyntaxError as exc:
            raise ValueError(f"invalid constraint expression {self.source!r}: {exc.msg}") from None
        self._check(tree.body)
        object.__setattr__(self, "_tree", tree)

    def _check(self, node: ast.AST) -> None:
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return
        if isinstance(node, ast.Name) and node.id in _CONSTS:
            return
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            self._check(node.left)
            self._check(node.right)
            return
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            self._check(node.operand)
            return
        if (
            isinstance(node, ast.Subscript)
            and isinstance(node.value, ast.Name)
            and node.value.id == "x"
            and isinstance(node.slice, ast.Constant)
            and isinstance(node.slice.value, int)
        ):
            return
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and not node.keywords
        ):
            for arg in node.args:
                self._check(arg)
            return
        raise ValueError(f"unsupported element in constraint expression {self.source!r}: {ast.dump(node)}")

    def _eval(self, node: ast.AST, x: np.ndarray):
        if isinstance(node, ast.Constant):
            return node.value
        if isinstance(node, ast.Name):
            return _CONSTS[node.id]
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, x), self._eval(node.right, x))
        if isinstance(node, ast.UnaryOp):
            return _UNARY[type(node.op)](self._eval(node.operand, x))
        if isinstance(node, ast.Subscript):
            return x[..., node.slice.value]
        return _FUNCS[node.func.id](*(self._eval(a, x) for a in node.args))

    def __call__(self, x) -> float:
        # domain errors yield NaN, which the indicator treats as a violation
        with np.errstate(all="ignore"):
            return float(self._eval(self._tree.body, np.asarray(x, dtype=float)))

    def batch(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            return np.broadcast_to(self._eval(self._tree.body, x), x.shape[:1]).astype(float)


@dataclass(frozen=True)
class KnownConstraintSet:
    """Cheap constraints ``g_k(x) <= 0`` checked before any expensive evaluation."""

    evaluators: Sequence[Constraint] = ()

    @property
    def count(self) -> int:
        return len(self.evaluators)

    def values(self, x) -> np.ndarray:
        """Constraint values at the rows of ``x``, shape ``(n, count)``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        cols = []
        for g in self.evaluators:
            if hasattr(g, "batch"):
                cols.append(np.asarray(g.batch(x), dtype=float))
            else:
                cols.append(np.array([float(g(row)) for row in x]))
        return np.stack(cols, axis=1) if cols else np.zeros((x.shape[0], 0))

    def indicator(self, x) -> np.ndarray:
        """1.0 where every constraint holds, 0.0 elsewhere (batched)."""
        vals = self.values(x)
        # NaN compares False and therefore masks the point
        return np.all(vals <= 0.0, axis=1).astype(float)


def known_indicator(cset: KnownConstraintSet, x) -> int:
    return int(cset.indicator(np.asarray(x, dtype=float)[None, :])[0])


@dataclass(frozen=True)
class FeasibilityClassifier:
    """GP regression on fixed {0, 1} feasibility labels.

    When every label is identical there is no evidence for a boundary and
    the classifier returns that label everywhere (``model`` is None).
    """

    labels: np.ndarray
    model: gp.GpModel | None = None
    constant: float | None = None

    def probability(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.model is None:
            return np.full(x.shape[0], self.constant)
        mean, _ = gp.predict_batch(self.model, x)
        return np.clip(mean, 0.0, 1.0)

    def infeasibility(self, x) -> np.ndarray:
        return 1.0 - self.probability(x)


def fit_feasibility(
    inputs,
    c_labels,
    kernel_kind=gp.KernelKind.MATERN52,
    config: gp.FitConfig | None = None,
) -> FeasibilityClassifier:
    labels = np.asarray(c_labels, dtype=float).reshape(-1)
    if labels.size == 0:
        raise ValueError("feasibility classifier needs at least one labeled point")
    if np.any((labels != 0.0) & (labels != 1.0)):
        raise ValueError("feasibility labels must be 0 or 1")
    labels = labels.copy()
    labels.setflags(write=False)
    if np.all(labels == labels[0]):
        return FeasibilityClassifier(labels, None, float(labels[0]))
    return FeasibilityClassifier(labels, gp.fit(inputs, labels, kernel_kind, config))


def feasibility_probability(clf: FeasibilityClassifier, x) -> float:
    return float(clf.probability(np.asarray(x, dtype=float)[None, :])[0])
