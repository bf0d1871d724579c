"""Parameterized generalized equations ``0 ∈ f(x,y) + N_D(g(x,y))``.

Only first-order data at the reference point enter the condition checks;
the affine constants ``f0``, ``g0`` make ``f``, ``g`` globally affine for the
solution-graph oracle.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path

from .polyhedra import PolyhedralCone, PolyhedralSet, critical_cone, in_normal_graph
from .rational import (
    ZERO,
    fmt_mat,
    fmt_vec,
    identity,
    matvec,
    q,
    rank,
    vadd,
)

SCHEMA_VERSION = 1


class ProblemError(ValueError):
    """Malformed problem data; ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class NotASolution(ProblemError):
    pass


def _vec(data, name: str, n: int) -> tuple:
    if not isinstance(data, list):
        raise ProblemError(f"expected a list of {n} numbers", name)
    if len(data) != n:
        raise ProblemError(f"expected length {n}, got {len(data)}", name)
    try:
        return tuple(q(x) for x in data)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ProblemError(f"bad number ({exc})", name) from None


def _mat(data, name: str, rows: int, cols: int) -> tuple:
    if not isinstance(data, list) or len(data) != rows:
        raise ProblemError(f"expected {rows} rows", name)
    return tuple(_vec(r, f"{name}[{i}]", cols) for i, r in enumerate(data))


@dataclass(frozen=True)
class GEProblem:
    l: int
    k: int
    xbar: tuple
    ybar: tuple
    Jf: tuple  # k x (l+k), blocks (grad_x f, grad_y f)
    Jg: tuple
    D: PolyhedralSet
    f0: tuple | None = None
    g0: tuple | None = None
    f_ref: tuple | None = None  # f(xbar, ybar) when f0 is not supplied
    g_ref: tuple | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        n = self.l + self.k
        if self.l < 0 or self.k < 1:
            raise ProblemError("need l >= 0 and k >= 1")
        object.__setattr__(self, "xbar", _vec(list(self.xbar), "xbar", self.l))
        object.__setattr__(self, "ybar", _vec(list(self.ybar), "ybar", self.k))
        object.__setattr__(self, "Jf", _mat([list(r) for r in self.Jf], "Jf", self.k, n))
        object.__setattr__(self, "Jg", _mat([list(r) for r in self.Jg], "Jg", self.k, n))
        for name in ("f0", "g0", "f_ref", "g_ref"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, _vec(list(v), name, self.k))
        if self.D.dim != self.k:
            raise ProblemError(f"D lives in R^{self.D.dim}, expected R^{self.k}", "D")
        if self.fbar is None:
            raise ProblemError("need f0 (affine constant) or f_ref (value at the reference)", "f0")
        if self.gbar is None:
            raise ProblemError("need g0 (affine constant) or g_ref (value at the reference)", "g0")

    # -- blocks ---------------------------------------------------------
    @property
    def point(self) -> list:
        return list(self.xbar) + list(self.ybar)

    @property
    def Fx(self) -> list:
        return [list(r[: self.l]) for r in self.Jf]

    @property
    def Fy(self) -> list:
        return [list(r[self.l :]) for r in self.Jf]

    @property
    def Gx(self) -> list:
        return [list(r[: self.l]) for r in self.Jg]

    @property
    def Gy(self) -> list:
        return [list(r[self.l :]) for r in self.Jg]

    @property
    def affine(self) -> bool:
        return self.f0 is not None and self.g0 is not None

    @cached_property
    def fbar(self) -> list | None:
        if self.f0 is not None:
            val = vadd(matvec([list(r) for r in self.Jf], self.point), self.f0)
            if self.f_ref is not None and list(self.f_ref) != val:
                raise ProblemError("f_ref disagrees with Jf (xbar,ybar) + f0", "f_ref")
            return val
        return list(self.f_ref) if self.f_ref is not None else None

    @cached_property
    def gbar(self) -> list | None:
        if self.g0 is not None:
            val = vadd(matvec([list(r) for r in self.Jg], self.point), self.g0)
            if self.g_ref is not None and list(self.g_ref) != val:
                raise ProblemError("g_ref disagrees with Jg (xbar,ybar) + g0", "g_ref")
            return val
        return list(self.g_ref) if self.g_ref is not None else None

    def f(self, x, y) -> list:
        return vadd(matvec([list(r) for r in self.Jf], list(x) + list(y)), self.f0)

    def g(self, x, y) -> list:
        return vadd(matvec([list(r) for r in self.Jg], list(x) + list(y)), self.g0)

    @property
    def dstar(self) -> list:
        return [-v for v in self.fbar]

    def is_solution(self) -> bool:
        return in_normal_graph(self.D, self.gbar, self.dstar)

    def validate(self) -> "GEProblem":
        if not self.D.contains(self.gbar):
            raise NotASolution(f"g(xbar,ybar) = {fmt_vec(self.gbar)} is not in D")
        if not in_normal_graph(self.D, self.gbar, self.dstar):
            raise NotASolution(f"-f(xbar,ybar) = {fmt_vec(self.dstar)} is not normal to D at g(xbar,ybar)")
        return self

    @cached_property
    def critical_cone(self) -> PolyhedralCone:
        self.validate()
        return critical_cone(self.D, self.gbar, self.dstar)

    @property
    def full_row_rank(self) -> bool:
        return rank([list(r) for r in self.Jg]) == self.k

    def augmented(self) -> "GEProblem":
        """Extra parameter p with ``g~((x,p),y) = g(x,y) - p`` (l grows by k)."""
        l, k = self.l, self.k
        minus_i = [[-v for v in row] for row in identity(k)]
        Jf = [list(r[:l]) + [ZERO] * k + list(r[l:]) for r in self.Jf]
        Jg = [list(r[:l]) + minus_i[i] + list(r[l:]) for i, r in enumerate(self.Jg)]
        return GEProblem(
            l + k, k, list(self.xbar) + [ZERO] * k, self.ybar, Jf, Jg, self.D,
            self.f0, self.g0, self.f_ref, self.g_ref, name=f"{self.name}+aug" if self.name else "aug",
        )

    # -- serialization --------------------------------------------------
    def to_json(self) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "l": self.l,
            "k": self.k,
            "xbar": fmt_vec(self.xbar),
            "ybar": fmt_vec(self.ybar),
            "Jf": fmt_mat(self.Jf),
            "Jg": fmt_mat(self.Jg),
            "D": self.D.to_json(),
        }
        for name in ("f0", "g0", "f_ref", "g_ref"):
            v = getattr(self, name)
            if v is not None:
                out[name] = fmt_vec(v)
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, data: dict) -> "GEProblem":
        if not isinstance(data, dict):
            raise ProblemError("top level must be an object")
        schema = data.get("schema", SCHEMA_VERSION)
        if schema != SCHEMA_VERSION:
            raise ProblemError(f"unsupported schema {schema!r}", "schema")
        for key in ("l", "k", "xbar", "ybar", "Jf", "Jg", "D"):
            if key not in data:
                raise ProblemError("missing required key", key)
        l, k = data["l"], data["k"]
        if not isinstance(l, int) or not isinstance(k, int) or isinstance(l, bool):
            raise ProblemError("dimensions must be integers", "l/k")
        Draw = data["D"]
        if not isinstance(Draw, dict):
            raise ProblemError("expected an object with keys A, b", "D")
        A = Draw.get("A", [])
        b = Draw.get("b", [])
        if len(A) != len(b):
            raise ProblemError("A and b differ in length", "D")
        A = _mat(A, "D.A", len(A), k)
        b = _vec(b, "D.b", len(b))
        opt = {name: data.get(name) for name in ("f0", "g0", "f_ref", "g_ref")}
        return cls(
            l, k, data["xbar"], data["ybar"], data["Jf"], data["Jg"], PolyhedralSet(k, A, b),
            name=str(data.get("name", "")), **opt,
        )


def load_problem(path: str | Path) -> GEProblem:
    """Parse a problem file; decimals are read literally as rationals."""
    text = Path(path).read_text()
    try:
        data = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return GEProblem.from_json(data)


def two_branch_problem() -> GEProblem:
    """``f = -y``, ``g = y - x``, ``D = R_+`` at the origin (l = k = 1)."""
    return GEProblem(
        1, 1, [0], [0], [[0, -1]], [[-1, 1]], PolyhedralSet(1, [[-1]], [0]),
        f0=[0], g0=[0], name="two-branch",
    )
