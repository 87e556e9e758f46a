"""Vector fields on R^n, field pairs, the builtin registry and system files."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ExprSyntaxError, SystemFileError, UnknownSystemError
from .expr import Expression, compile_nodes, differentiate, parse

__all__ = [
    "VectorField",
    "FieldPair",
    "SystemFile",
    "BUILTINS",
    "builtin",
    "eval_field",
    "jacobian",
    "parse_system",
    "load_system",
]

JACOBIAN_MODES = ("symbolic", "finite-difference")


class VectorField:
    """A C^1 field x' = f(x) given by one expression per component."""

    def __init__(self, components: Sequence[Expression], jacobian_mode: str = "symbolic", name: str | None = None):
        if not components:
            raise ValueError("a vector field needs at least one component")
        dim = len(components)
        for c in components:
            if c.dim != dim:
                raise ValueError(f"component {c.source!r} has dimension {c.dim}, expected {dim}")
        if jacobian_mode not in JACOBIAN_MODES:
            raise ValueError(f"jacobian_mode must be one of {JACOBIAN_MODES}")
        self.dim = dim
        self.components = tuple(components)
        self.jacobian_mode = jacobian_mode
        self.name = name
        self._fn = compile_nodes([c.root for c in self.components])
        self._derivatives = None
        self._jac_fn = None
        if jacobian_mode == "symbolic":
            self._build_symbolic_jacobian()

    @classmethod
    def from_strings(cls, sources: Sequence[str], jacobian_mode: str = "symbolic", name: str | None = None):
        dim = len(sources)
        return cls([parse(s, dim) for s in sources], jacobian_mode=jacobian_mode, name=name)

    def _build_symbolic_jacobian(self):
        n = self.dim
        self._derivatives = tuple(
            tuple(differentiate(c, j + 1) for j in range(n)) for c in self.components
        )
        self._jac_fn = compile_nodes([d.root for row in self._derivatives for d in row])

    @property
    def derivatives(self):
        """Symbolic derivative expressions ``[i][j] = d f_i / d x_j``."""
        if self._derivatives is None:
            self._build_symbolic_jacobian()
        return self._derivatives

    def with_jacobian_mode(self, mode: str) -> "VectorField":
        return VectorField(self.components, jacobian_mode=mode, name=self.name)

    def __call__(self, x) -> np.ndarray:
        return np.array(self._fn(x), dtype=float)

    def _check_point(self, x):
        if len(x) != self.dim:
            raise ValueError(f"expected a point of dimension {self.dim}, got {len(x)}")

    def evaluate(self, x) -> np.ndarray:
        self._check_point(x)
        return self(x)

    def jacobian(self, x) -> np.ndarray:
        self._check_point(x)
        if self.jacobian_mode == "symbolic":
            return np.array(self._jac_fn(x), dtype=float).reshape(self.dim, self.dim)
        return self.fd_jacobian(x)

    def fd_jacobian(self, x) -> np.ndarray:
        """Central-difference Jacobian with step 1e-6 * max(1, |x|_inf)."""
        x = np.asarray(x, dtype=float)
        h = 1e-6 * max(1.0, float(np.max(np.abs(x))))
        J = np.empty((self.dim, self.dim))
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = h
            J[:, j] = (self(x + e) - self(x - e)) / (2.0 * h)
        return J

    def __repr__(self):
        label = f"{self.name}: " if self.name else ""
        return f"VectorField({label}{[c.source for c in self.components]})"


def eval_field(f: VectorField, x) -> np.ndarray:
    return f.evaluate(x)


def jacobian(f: VectorField, x) -> np.ndarray:
    return f.jacobian(x)


@dataclass(frozen=True)
class FieldPair:
    f1: VectorField
    f2: VectorField
    name: str | None = None

    def __post_init__(self):
        if self.f1.dim != self.f2.dim:
            raise ValueError(f"field dimensions differ: {self.f1.dim} vs {self.f2.dim}")

    @property
    def dim(self) -> int:
        return self.f1.dim

    def field(self, index: int) -> VectorField:
        if index == 1:
            return self.f1
        if index == 2:
            return self.f2
        raise ValueError(f"field index must be 1 or 2, got {index}")


BUILTINS = {
    "SYS-LR": (("1", "0"), ("x1", "x2")),
    "SYS-PS": (("1", "0"), ("-1 - x2", "-x1")),
    "SYS-DG": (("1", "0"), ("-1", "0")),
    "SYS-3D": (("1", "0", "0"), ("-1 - x2", "-x1", "-x3")),
}


def builtin(name: str, jacobian_mode: str = "symbolic") -> FieldPair:
    """Return one of the registry pairs SYS-LR, SYS-PS, SYS-DG, SYS-3D."""
    try:
        s1, s2 = BUILTINS[name]
    except KeyError:
        raise UnknownSystemError(f"unknown builtin system {name!r}; choose from {sorted(BUILTINS)}") from None
    return FieldPair(
        VectorField.from_strings(s1, jacobian_mode, name=f"{name}.f1"),
        VectorField.from_strings(s2, jacobian_mode, name=f"{name}.f2"),
        name=name,
    )


# -- system files ---------------------------------------------------------------

_COMPONENT_KEY = re.compile(r"(f[12])\[(\d+)\]")
_OVERRIDE_KEYS = {"method": str, "h": float, "rtol": float, "atol": float, "max_steps": int}


@dataclass
class SystemFile:
    path: str | None
    pair: FieldPair
    overrides: dict = field(default_factory=dict)


def parse_system(text: str, path: str | None = None) -> SystemFile:
    """Parse the line-oriented system format.

    Keys may come in any order: ``dim: n``, the component lines
    ``f1[i]: expr`` and ``f2[i]: expr`` for i = 1..n, and optional
    integrator overrides (``method``, ``h``, ``rtol``,
    ``atol``, ``max_steps``).
    """
    dim = None
    comps: dict[tuple[str, int], tuple[str, int]] = {}
    overrides: dict = {}
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise SystemFileError(f"expected 'key: value', got {line!r}", lineno)
        key, value = (s.strip() for s in line.split(":", 1))
        if key in seen:
            raise SystemFileError(f"duplicate key {key!r} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        if not value:
            raise SystemFileError(f"empty value for {key!r}", lineno)
        if key == "dim":
            try:
                dim = int(value)
            except ValueError:
                raise SystemFileError(f"dim must be an integer, got {value!r}", lineno) from None
            if dim < 1:
                raise SystemFileError("dim must be positive", lineno)
            continue
        if key in _OVERRIDE_KEYS:
            try:
                overrides[key] = _OVERRIDE_KEYS[key](value)
            except ValueError:
                raise SystemFileError(f"bad value for {key!r}: {value!r}", lineno) from None
            continue
        m = _COMPONENT_KEY.fullmatch(key)
        if m is None:
            raise SystemFileError(f"unknown key {key!r}", lineno)
        comps[(m.group(1), int(m.group(2)))] = (value, lineno)
    if dim is None:
        raise SystemFileError("missing 'dim' line")
    fields = {}
    for name in ("f1", "f2"):
        exprs = []
        for i in range(1, dim + 1):
            if (name, i) not in comps:
                raise SystemFileError(f"missing component {name}[{i}]")
            source, lineno = comps.pop((name, i))
            try:
                exprs.append(parse(source, dim))
            except ExprSyntaxError as exc:
                raise SystemFileError(f"{name}[{i}]: {exc}", lineno) from None
        fields[name] = VectorField(exprs, name=name)
    if comps:
        (name, i), (_, lineno) = sorted(comps.items(), key=lambda kv: kv[1][1])[0]
        raise SystemFileError(f"component index {name}[{i}] outside 1..{dim}", lineno)
    label = Path(path).stem if path else None
    return SystemFile(path, FieldPair(fields["f1"], fields["f2"], name=label), overrides)


def load_system(path) -> SystemFile:
    path = Path(path)
    return parse_system(path.read_text(encoding="utf-8"), str(path))
