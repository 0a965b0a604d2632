"""Double Butcher tableaux for additive IMEX Runge-Kutta schemes."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

DIRK_GAMMA = 1.0 + 1.0 / np.sqrt(2.0)


class TableauKind(enum.Enum):
    TYPE_A = "TypeA"
    TYPE_CK = "TypeCK"
    OTHER = "other"


def _invertible_lower(a: np.ndarray) -> bool:
    return a.shape[0] > 0 and bool(np.all(np.diag(a) != 0.0))


def classify(a_imp: np.ndarray) -> TableauKind:
    """Type-A if the implicit matrix is invertible, type-CK if its first row
    vanishes and the trailing block is invertible."""
    a_imp = np.asarray(a_imp, dtype=float)
    if _invertible_lower(a_imp):
        return TableauKind.TYPE_A
    if a_imp.shape[0] >= 2 and np.all(a_imp[0] == 0.0) and _invertible_lower(a_imp[1:, 1:]):
        return TableauKind.TYPE_CK
    return TableauKind.OTHER


@dataclass(frozen=True)
class DoubleTableau:
    name: str
    a_exp: np.ndarray
    a_imp: np.ndarray
    c_exp: np.ndarray
    c_imp: np.ndarray
    w_exp: np.ndarray
    w_imp: np.ndarray
    order: int = 2
    kind: TableauKind = field(init=False)

    def __post_init__(self):
        for attr in ("a_exp", "a_imp", "c_exp", "c_imp", "w_exp", "w_imp"):
            arr = np.array(getattr(self, attr), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)
        s = self.a_imp.shape[0]
        if self.a_exp.shape != (s, s) or self.a_imp.shape != (s, s):
            raise ValueError("tableau matrices must both be s x s")
        for attr in ("c_exp", "c_imp", "w_exp", "w_imp"):
            if getattr(self, attr).shape != (s,):
                raise ValueError(f"{attr} must have length {s}")
        object.__setattr__(self, "kind", classify(self.a_imp))

    @property
    def s(self) -> int:
        return self.a_imp.shape[0]


def dp1_a(fix_second_row: bool = False) -> DoubleTableau:
    """DP1-A(2,4,2). The printed explicit matrix has a zero second row while
    its abscissa is 1/3; ``fix_second_row`` puts 1/3 in that row instead."""
    a21 = 1.0 / 3.0 if fix_second_row else 0.0
    return DoubleTableau(
        name="DP1-A(2,4,2)",
        a_exp=[[0, 0, 0, 0],
               [a21, 0, 0, 0],
               [1, 0, 0, 0],
               [1 / 2, 0, 1 / 2, 0]],
        c_exp=[0, 1 / 3, 1, 1],
        w_exp=[1 / 2, 0, 1 / 2, 0],
        a_imp=[[1 / 2, 0, 0, 0],
               [1 / 6, 1 / 2, 0, 0],
               [-1 / 2, 1 / 2, 1 / 2, 0],
               [3 / 2, -3 / 2, 1 / 2, 1 / 2]],
        c_imp=[1 / 2, 2 / 3, 1 / 2, 1],
        w_imp=[3 / 2, -3 / 2, 1 / 2, 1 / 2],
    )


def dp2_a(dirk_gamma: float = DIRK_GAMMA) -> DoubleTableau:
    g = float(dirk_gamma)
    return DoubleTableau(
        name="DP2-A(2,4,2)",
        a_exp=[[0, 0, 0, 0],
               [0, 0, 0, 0],
               [0, 1, 0, 0],
               [0, 1 / 2, 1 / 2, 0]],
        c_exp=[0, 0, 1, 1],
        w_exp=[0, 1 / 2, 1 / 2, 0],
        a_imp=[[g, 0, 0, 0],
               [-g, g, 0, 0],
               [0, 1 - g, g, 0],
               [0, 1 / 2, 1 / 2 - g, g]],
        c_imp=[g, 0, 1, 1],
        w_imp=[0, 1 / 2, 1 / 2 - g, g],
    )


def ars111() -> DoubleTableau:
    """Forward/backward Euler pair written as a stiffly accurate 2-stage
    type-CK tableau; one step reproduces the first-order scheme exactly."""
    return DoubleTableau(
        name="ARS(1,1,1)",
        a_exp=[[0, 0], [1, 0]],
        c_exp=[0, 1],
        w_exp=[1, 0],
        a_imp=[[0, 0], [0, 1]],
        c_imp=[0, 1],
        w_imp=[0, 1],
        order=1,
    )


_REGISTRY = {
    "DP1-A(2,4,2)": dp1_a,
    "DP2-A(2,4,2)": dp2_a,
    "ARS(1,1,1)": ars111,
}
_ALIASES = {"DP2-A1(2,4,2)": "DP2-A(2,4,2)"}


def available() -> list[str]:
    return sorted(_REGISTRY)


def get_tableau(name: str, **options) -> DoubleTableau:
    """Look up a tableau by name. Whitespace in the name is ignored, so
    ``"DP2-A(2, 4, 2)"`` works. Extra keyword options go to the builder
    (``fix_second_row`` for DP1-A, ``dirk_gamma`` for DP2-A)."""
    key = "".join(str(name).split())
    key = _ALIASES.get(key, key)
    try:
        builder = _REGISTRY[key]
    except KeyError:
        raise KeyError(f"unknown tableau {name!r}; available: {', '.join(available())}") from None
    return builder(**options)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float
    fatal: bool = True


def validate_tableau(t: DoubleTableau, tol: float = 1e-14) -> list[Check]:
    """Structural checks plus the order conditions up to ``t.order``.
    Non-fatal entries are informational."""
    checks = []

    def add(name, residual, fatal=True, exact=False):
        residual = float(residual)
        ok = residual == 0.0 if exact else residual <= tol
        checks.append(Check(name, ok, residual, fatal))

    add("explicit strictly lower triangular", np.abs(np.triu(t.a_exp)).max(), exact=True)
    add("implicit lower triangular", np.abs(np.triu(t.a_imp, 1)).max(initial=0.0), exact=True)
    add("explicit stiffly accurate", np.abs(t.a_exp[-1] - t.w_exp).max(), exact=True)
    add("implicit stiffly accurate", np.abs(t.a_imp[-1] - t.w_imp).max(), exact=True)
    add("explicit order 1: sum(w) = 1", abs(t.w_exp.sum() - 1.0))
    add("implicit order 1: sum(w) = 1", abs(t.w_imp.sum() - 1.0))
    if t.order >= 2:
        add("explicit order 2: w.c = 1/2", abs(t.w_exp @ t.c_exp - 0.5))
        add("implicit order 2: w.c = 1/2", abs(t.w_imp @ t.c_imp - 0.5))
        add("coupling: w_exp.c_imp = 1/2", abs(t.w_exp @ t.c_imp - 0.5), fatal=False)
        add("coupling: w_imp.c_exp = 1/2", abs(t.w_imp @ t.c_exp - 0.5), fatal=False)
    add("explicit row sums = c", np.abs(t.a_exp.sum(axis=1) - t.c_exp).max(), fatal=False)
    add("implicit row sums = c", np.abs(t.a_imp.sum(axis=1) - t.c_imp).max(), fatal=False)
    checks.append(Check(f"classification: {t.kind.value}", t.kind is not TableauKind.OTHER, 0.0))
    return checks


def report_ok(checks: list[Check]) -> bool:
    return all(c.passed for c in checks if c.fatal)


def format_report(t: DoubleTableau, checks: list[Check]) -> str:
    lines = [f"tableau {t.name} (s={t.s}, {t.kind.value})"]
    for c in checks:
        status = "PASS" if c.passed else ("FAIL" if c.fatal else "info")
        lines.append(f"  [{status}] {c.name:<40s} residual={c.residual:.3e}")
    return "\n".join(lines)
