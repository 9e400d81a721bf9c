"""Structure-equation systems as vector fields on their invariant state

Each system lists, for every coframe direction w_a, the derivative of the
state along the dual frame vector: d(state) = sum_a F_a(state) w_a. Fields
are written as sympy expressions and compiled with lambdify, so the same
definition drives the integrator and the symbolic bracket checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import sympy as sp

from ..errors import DomainError, ValidationError

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class ConservedQuantity:
    """A first integral of a system, by its sympy expression"""

    label: str
    expr: sp.Expr


@dataclass(frozen=True)
class Guard:
    """The system leaves its admissible region when `expr` <= BOUNDARY_TOL"""

    expr: sp.Expr
    reason: str


@dataclass(frozen=True, eq=False)
class FlowSystem:
    """Direction fields, first integrals and frame brackets of one system.

    `structure[(a, b)][c]` is dw_c(E_a, E_b) for the dual frame, a < b, given
    only where every dw_c is known in terms of the state.
    """

    label: str
    state: tuple[sp.Symbol, ...]
    params: tuple[sp.Symbol, ...]
    fields: sp.Matrix
    conserved: tuple[ConservedQuantity, ...] = ()
    guards: tuple[Guard, ...] = ()
    structure: dict[tuple[int, int], dict[int, sp.Expr]] = field(default_factory=dict)
    closed: bool = False

    @property
    def directions(self) -> int:
        return self.fields.rows

    @property
    def dim(self) -> int:
        return len(self.state)

    @property
    def state_names(self) -> list[str]:
        return [str(s) for s in self.state]

    @property
    def param_names(self) -> list[str]:
        return [str(p) for p in self.params]

    @cached_property
    def _symbols(self) -> list[sp.Symbol]:
        return [*self.state, *self.params]

    @cached_property
    def _fields_fn(self):
        return sp.lambdify(self._symbols, self.fields, "numpy")

    @cached_property
    def _conserved_fns(self):
        return [(q.label, sp.lambdify(self._symbols, q.expr, "numpy")) for q in self.conserved]

    @cached_property
    def _guard_fns(self):
        return [(g.reason, sp.lambdify(self._symbols, g.expr, "numpy")) for g in self.guards]

    @cached_property
    def _structure_fns(self):
        return {
            pair: {c: sp.lambdify(self._symbols, expr, "numpy") for c, expr in consts.items()}
            for pair, consts in self.structure.items()
        }

    def field_matrix(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        """(directions, dim) array: row a is F_a at state x."""
        return np.array(self._fields_fn(*x, *p), dtype=float).reshape(self.directions, self.dim)

    def direction_field(self, x: np.ndarray, p: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
        return coeffs @ self.field_matrix(x, p)

    def conserved_values(self, x: np.ndarray, p: np.ndarray) -> dict[str, float]:
        return {label: float(fn(*x, *p)) for label, fn in self._conserved_fns}

    def boundary(self, x: np.ndarray, p: np.ndarray) -> str | None:
        """Reason the state is not admissible, or None."""
        if not np.all(np.isfinite(x)):
            return "state is not finite"
        for reason, fn in self._guard_fns:
            with np.errstate(invalid="ignore"):
                value = float(fn(*x, *p))
            if not value > BOUNDARY_TOL:
                return reason
        return None

    def bracket_term(self, a: int, b: int, x: np.ndarray, p: np.ndarray) -> np.ndarray | None:
        """-sum_c dw_c(E_a, E_b) F_c at x (1-based a < b), or None if unknown."""
        consts = self._structure_fns.get((a, b))
        if consts is None:
            return None
        fields_at = self.field_matrix(x, p)
        out = np.zeros(self.dim)
        for c, fn in consts.items():
            out -= float(fn(*x, *p)) * fields_at[c - 1]
        return out

    def lie_bracket(self, a: int, b: int) -> sp.Matrix:
        """[F_a, F_b] = DF_b F_a - DF_a F_b as a sympy column."""
        x = sp.Matrix(self.state)
        fa = self.fields.row(a - 1).T
        fb = self.fields.row(b - 1).T
        return fb.jacobian(x) * fa - fa.jacobian(x) * fb

    def bracket_residual(self, a: int, b: int) -> sp.Matrix:
        """[F_a, F_b] + sum_c dw_c(E_a, E_b) F_c, expanded; zero for a closed system."""
        consts = self.structure.get((a, b), {})
        total = self.lie_bracket(a, b)
        for c, expr in consts.items():
            total += expr * self.fields.row(c - 1).T
        return total.applyfunc(sp.expand)

    def pack(self, values: dict) -> tuple[np.ndarray, np.ndarray]:
        """State and parameter vectors from a name -> value mapping.

        Missing parameters default to 0.

        Raises:
            ValidationError: On a missing state variable or an unknown key
        """
        names = set(self.state_names) | set(self.param_names)
        unknown = sorted(set(values) - names)
        if unknown:
            raise ValidationError(
                f"{self.label}: unknown variable(s) {', '.join(unknown)}; "
                f"state is ({', '.join(self.state_names)}), parameters ({', '.join(self.param_names)})"
            )
        missing = [n for n in self.state_names if n not in values]
        if missing:
            raise ValidationError(f"{self.label}: missing initial value(s) for {', '.join(missing)}")
        try:
            x = np.array([float(values[n]) for n in self.state_names])
            p = np.array([float(values.get(n, 0.0)) for n in self.param_names])
        except (TypeError, ValueError) as e:
            raise ValidationError(f"{self.label}: non-numeric initial value ({e})") from e
        return x, p

    def unpack(self, x: np.ndarray) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.state_names, x)}

    def check_admissible(self, x: np.ndarray, p: np.ndarray) -> None:
        """Raises DomainError if x lies outside the admissible region."""
        reason = self.boundary(x, p)
        if reason is not None:
            raise DomainError(f"{self.label}: initial state {self.unpack(x)} is not admissible ({reason})")

    def describe(self) -> dict:
        return {
            "label": self.label,
            "state": self.state_names,
            "params": self.param_names,
            "directions": self.directions,
            "fields": [[str(e) for e in self.fields.row(a)] for a in range(self.directions)],
            "conserved": {q.label: str(q.expr) for q in self.conserved},
            "guards": [g.reason for g in self.guards],
            "closed": self.closed,
        }


def _build(
    label: str,
    state: str,
    fields: dict[int, dict[str, str]],
    directions: int,
    params: str = "",
    conserved: dict[str, str] | None = None,
    guards: dict[str, str] | None = None,
    structure: dict[tuple[int, int], dict[int, str]] | None = None,
    closed: bool = False,
) -> FlowSystem:
    state_syms = tuple(sp.symbols(state, real=True, seq=True))
    param_syms = tuple(sp.symbols(params, real=True, seq=True)) if params else ()
    names = {str(s): s for s in (*state_syms, *param_syms)}

    def parse(text: str) -> sp.Expr:
        return sp.sympify(text, locals=names)

    rows = []
    for a in range(1, directions + 1):
        entries = fields.get(a, {})
        rows.append([parse(entries.get(str(s), "0")) for s in state_syms])
    return FlowSystem(
        label=label,
        state=state_syms,
        params=param_syms,
        fields=sp.Matrix(rows),
        conserved=tuple(ConservedQuantity(k, parse(v)) for k, v in (conserved or {}).items()),
        guards=tuple(Guard(parse(expr), reason) for reason, expr in (guards or {}).items()),
        structure={
            pair: {c: parse(v) for c, v in consts.items()} for pair, consts in (structure or {}).items()
        },
        closed=closed,
    )


def _so3() -> FlowSystem:
    return _build(
        "so3-case",
        "r t",
        {1: {"r": "-5*r*t", "t": "4*r**2 - t**2"}},
        directions=1,
        conserved={"r^(8/5)+t^2*r^(-2/5)": "r**(8/5) + t**2*r**(-2/5)"},
        guards={"r must stay positive": "r"},
        closed=True,
    )


def _o2() -> FlowSystem:
    return _build(
        "o2-case",
        "r v t1 t2",
        {
            1: {
                "r": "-t1*(3*r**2 - r*v + 6*v**2)",
                "v": "-t1*v*(7*v + r)",
                "t1": "r*(t1**2 + t2**2 + 1) + v*(5*t1**2 - 3*t2**2 + 5)",
                "t2": "8*v*t1*t2",
            },
            2: {
                "r": "t2*(r - 3*v)*(3*r - 2*v)",
                "v": "t2*v*(r - 3*v)",
                "t2": "(v - r)*(t1**2 + t2**2 + 1)",
            },
        },
        directions=2,
        conserved={
            "Q1": "(t1**2 + t2**2 + 1)*v**(4/5)*(r - 3*v)/(r - v)**(3/5)",
            "Q2": "(t2**2*(r - 3*v) + (r - v)*(t1**2 + 1))*v**(7/5)/(r - v)**(4/5)",
        },
        guards={"v must stay positive": "v", "r must exceed v": "r - v"},
        structure={(1, 2): {1: "(r - 3*v)*t2", 2: "(r - v)*t1"}},
        closed=True,
    )


def _tetra() -> FlowSystem:
    return _build(
        "tetra-case",
        "r s",
        {1: {"r": "-5*r*sqrt(s**2 - r**2)", "s": "-s*sqrt(s**2 - r**2)"}},
        directions=1,
        conserved={"r/s^5": "r/s**5"},
        guards={"s^2 - r^2 must stay positive": "s**2 - r**2", "s must stay positive": "s"},
        closed=True,
    )


def _octa() -> FlowSystem:
    return _build(
        "octa-case",
        "s",
        {1: {"s": "-s**2"}},
        directions=1,
        guards={"s must stay positive": "s"},
        closed=True,
    )


def _d3_conical() -> FlowSystem:
    return _build(
        "d3-conical",
        "r s t1 t2 t3 t4 t5",
        {
            1: {
                "r": "-3*r*t4",
                "t2": "m1",
                "t3": "m3",
                "t4": "m4",
                "t5": "m2/3",
            },
            2: {
                "r": "3*r*t3",
                "t2": "m2",
                "t3": "m4 - 2*r**2 + t1**2 + t2**2 + t3**2 + t4**2 + 15*t5**2 + s**2",
                "t4": "-(m3 + 2*t2*t5)",
                "t5": "-m1/3",
            },
            3: {
                "r": "-r*t1",
                "s": "-5*s*t1",
                "t1": "4*s**2 - t1**2",
                "t2": "-t1*t2",
                "t3": "-t1*t3",
                "t4": "-t1*t4",
                "t5": "-t1*t5",
            },
            4: {
                "r": "r*t2",
                "t2": "t1**2 + t2**2 + s**2 - 9*t5**2",
                "t3": "t2*t3 - 2*t4*t5 + m2/3",
                "t4": "2*t3*t5 + t2*t4 - m1/3",
                "t5": "2*t2*t5",
            },
        },
        directions=4,
        params="m1 m2 m3 m4",
        conserved={"s^(8/5)+t1^2*s^(-2/5)": "s**(8/5) + t1**2*s**(-2/5)"},
        guards={"r must stay positive": "r", "s must stay positive": "s"},
        structure={
            (1, 2): {1: "t3", 2: "t4", 4: "6*t5"},
            (1, 3): {1: "-t1"},
            (1, 4): {1: "t2", 2: "-2*t5"},
            (2, 3): {2: "-t1"},
            (2, 4): {1: "2*t5", 2: "t2"},
            (3, 4): {4: "t1"},
        },
    )


def _product() -> FlowSystem:
    return _build(
        "product-case",
        "r v t1 t2 t3 t4",
        {
            1: {"r": "-3*r*t4", "t3": "u3", "t4": "u4"},
            2: {"r": "3*r*t3", "t3": "t3**2 + t4**2 - 2*r**2 + u4", "t4": "-u3"},
            3: {"v": "-3*v*t2", "t1": "u1", "t2": "u2"},
            4: {"v": "3*v*t1", "t1": "t1**2 + t2**2 - 2*v**2 + u2", "t2": "-u1"},
        },
        directions=4,
        params="u1 u2 u3 u4",
        guards={"r must stay positive": "r", "v must stay positive": "v"},
        structure={
            (1, 2): {1: "t3", 2: "t4"},
            (1, 3): {},
            (1, 4): {},
            (2, 3): {},
            (2, 4): {},
            (3, 4): {3: "t1", 4: "t2"},
        },
    )


def _so2s3() -> FlowSystem:
    return _build(
        "so2s3-case",
        "r t1 t2",
        {
            1: {"r": "-3*r*t2", "t1": "-u2", "t2": "u1"},
            2: {"r": "3*r*t1", "t1": "t1**2 + t2**2 - 2*r**2 + u1", "t2": "u2"},
        },
        directions=2,
        params="u1 u2",
        guards={"r must stay positive": "r"},
        structure={(1, 2): {1: "t1", 2: "t2"}},
    )


_BUILDERS = {
    "so3-case": _so3,
    "o2-case": _o2,
    "tetra-case": _tetra,
    "octa-case": _octa,
    "d3-conical": _d3_conical,
    "product-case": _product,
    "so2s3-case": _so2s3,
}
SYSTEMS = tuple(_BUILDERS)
_CACHE: dict[str, FlowSystem] = {}


def get_system(label: str) -> FlowSystem:
    """The named system (compiled once per process).

    Raises:
        ValidationError: On an unknown label
    """
    if label not in _BUILDERS:
        raise ValidationError(f"Unknown system '{label}' (expected one of {', '.join(SYSTEMS)})")
    if label not in _CACHE:
        _CACHE[label] = _BUILDERS[label]()
    return _CACHE[label]


def octa_exact(s0: float, tau: np.ndarray | float) -> np.ndarray:
    """Closed-form octa-case solution s(tau) = s0 / (1 + s0 tau)."""
    return s0 / (1.0 + s0 * np.asarray(tau, dtype=float))
