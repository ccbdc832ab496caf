"""Declarative description of x' = A x + G*(t) x + f*(t, x) + F0 eta(t).

Specs are loaded from JSON.  Every numeric field may also be a string
expression over the ``params`` block (e.g. ``"-(1 + d)"``), which is how the
shipped benchmarks expose the unstated coupling constant ``d``.
"""

from __future__ import annotations

import ast
import json
import logging
import math
import operator
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

from .errors import SpecError

log = logging.getLogger(__name__)

NORMALIZATION_GAP = 1e-3


@dataclass(frozen=True)
class TimeCoeff:
    """offset + sum(amp * sin(freq * t + phase))."""

    offset: float = 0.0
    sinusoids: tuple = ()

    @classmethod
    def constant(cls, value):
        return cls(float(value), ())

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.offset, dtype=float)
        for amp, freq, phase in self.sinusoids:
            out = out + amp * np.sin(freq * t + phase)
        return out if out.ndim else float(out)

    @property
    def is_constant(self):
        return all(amp == 0.0 or freq == 0.0 for amp, freq, _ in self.sinusoids)

    def envelope(self):
        """Guaranteed sup of |value(t)|."""
        return abs(self.offset) + sum(abs(a) for a, _, _ in self.sinusoids)

    def abs_lower(self):
        """Guaranteed inf of |value(t)| (possibly 0)."""
        if self.is_constant:
            return abs(self(0.0))
        return max(0.0, abs(self.offset) - sum(abs(a) for a, _, _ in self.sinusoids))

    def lower(self):
        return self.offset - sum(abs(a) for a, _, _ in self.sinusoids)

    def periods(self):
        return [2 * math.pi / f for a, f, _ in self.sinusoids if a != 0.0 and f > 0.0]

    def scaled(self, factor):
        return TimeCoeff(self.offset * factor,
                         tuple((a * factor, f, p) for a, f, p in self.sinusoids))

    def mean(self, t_start, horizon):
        """Exact time average over [t_start, t_start + horizon]."""
        total = self.offset * horizon
        for a, f, p in self.sinusoids:
            if f == 0.0:
                total += a * math.sin(p) * horizon
            else:
                total += a / f * (math.cos(f * t_start + p) - math.cos(f * (t_start + horizon) + p))
        return total / horizon

    def to_json(self):
        return {"offset": self.offset,
                "sinusoids": [{"amp": a, "freq": f, "phase": p} for a, f, p in self.sinusoids]}


@dataclass(frozen=True)
class MonomialTerm:
    component: int          # 0-based
    coeff: TimeCoeff
    exponents: tuple

    @property
    def degree(self):
        return int(sum(self.exponents))


@dataclass(frozen=True)
class Forcing:
    F0: float
    eta: tuple              # one TimeCoeff per component

    def vector(self, t):
        t = np.asarray(t, dtype=float)
        vals = np.stack([np.broadcast_to(c(t), t.shape) for c in self.eta], axis=-1)
        return self.F0 * vals

    def eta_norm_upper(self):
        return math.sqrt(sum(c.envelope() ** 2 for c in self.eta))


@dataclass(frozen=True, eq=False)
class SystemSpec:
    n: int
    A: np.ndarray
    Gstar: tuple = ()       # ((i, j), TimeCoeff), 0-based
    f_terms: tuple = ()
    forcing: Forcing = None
    t0: float = 0.0
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        if self.forcing is None:
            object.__setattr__(self, "forcing",
                               Forcing(0.0, tuple(TimeCoeff() for _ in range(self.n))))
        _validate(self)

    def Gstar_matrix(self, t):
        """G*(t); for array t the result has shape t.shape + (n, n)."""
        t = np.asarray(t, dtype=float)
        G = np.zeros(t.shape + (self.n, self.n))
        for (i, j), c in self.Gstar:
            G[..., i, j] += c(t)
        return G

    def nonlinearity(self, t, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(self.n)
        with np.errstate(over="ignore", invalid="ignore"):
            for term in self.f_terms:
                out[term.component] += term.coeff(t) * np.prod(x ** np.asarray(term.exponents))
        return out

    def rhs(self, t, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.A @ x + self.nonlinearity(t, x) + self.forcing.vector(t)
            if self.Gstar:
                out = out + self.Gstar_matrix(t) @ x
        return out

    def rhs_batch(self, t, X):
        """Right side for a stack of states X with shape (m, n) at one time t."""
        X = np.asarray(X, dtype=float)
        M = self.A + self.Gstar_matrix(t) if self.Gstar else self.A
        with np.errstate(over="ignore", invalid="ignore"):
            out = X @ M.T + self.forcing.vector(t)
            for term in self.f_terms:
                out[:, term.component] += term.coeff(t) * np.prod(
                    X ** np.asarray(term.exponents), axis=1)
        return out

    def shortest_period(self):
        periods = [p for _, c in self.Gstar for p in c.periods()]
        periods += [p for c in self.forcing.eta for p in c.periods()]
        periods += [p for term in self.f_terms for p in term.coeff.periods()]
        return min(periods) if periods else None

    def longest_period(self):
        periods = [p for _, c in self.Gstar for p in c.periods()]
        return max(periods) if periods else None

    def homogeneous(self):
        return replace(self, forcing=Forcing(0.0, self.forcing.eta))

    def with_t0(self, t0):
        return replace(self, t0=float(t0))

    def to_json(self):
        return {
            "name": self.name,
            "n": self.n,
            "A": self.A.tolist(),
            "Gstar": [dict(i=i + 1, j=j + 1, **c.to_json()) for (i, j), c in self.Gstar],
            "f_terms": [{"component": m.component + 1, "coeff": m.coeff.to_json(),
                         "exponents": list(m.exponents)} for m in self.f_terms],
            "forcing": {"F0": self.forcing.F0, "eta": [c.to_json() for c in self.forcing.eta]},
            "t0": self.t0,
            "params": dict(self.params),
        }


def _validate(spec):
    n = spec.n
    if n < 1:
        raise SpecError("n: dimension must be positive")
    if spec.A.shape != (n, n):
        raise SpecError(f"A: expected {n}x{n} matrix, got shape {spec.A.shape}")
    if not np.all(np.isfinite(spec.A)):
        raise SpecError("A: non-finite entry")
    if not np.any(spec.A):
        raise SpecError("A: average matrix must be nonzero")
    for (i, j), _ in spec.Gstar:
        if not (0 <= i < n and 0 <= j < n):
            raise SpecError(f"Gstar: index ({i + 1}, {j + 1}) outside 1..{n}")
    for k, term in enumerate(spec.f_terms):
        if not 0 <= term.component < n:
            raise SpecError(f"f_terms[{k}].component: outside 1..{n}")
        if len(term.exponents) != n:
            raise SpecError(f"f_terms[{k}].exponents: expected length {n}")
        if any(e < 0 for e in term.exponents):
            raise SpecError(f"f_terms[{k}].exponents: negative exponent")
        if term.degree < 1:
            raise SpecError(f"f_terms[{k}]: total degree must be >= 1 so that f*(t, 0) = 0")
    if len(spec.forcing.eta) != n:
        raise SpecError(f"forcing.eta: expected {n} components")
    if spec.forcing.F0 < 0 or not math.isfinite(spec.forcing.F0):
        raise SpecError("forcing.F0: must be finite and >= 0")
    if not math.isfinite(spec.t0):
        raise SpecError("t0: non-finite")


def eval_rhs(spec, t, x):
    """Right side of the full system at (t, x)."""
    return spec.rhs(t, x)


@dataclass(frozen=True)
class ZeroMeanReport:
    max_mean_entry: float
    passed: bool
    means: dict


def validate_zero_mean(spec, horizon, tol):
    """Entrywise time average of G* over [t0, t0 + horizon] by Simpson quadrature."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    period = spec.shortest_period() or horizon
    npts = int(max(2001, 40 * horizon / period)) | 1
    t = np.linspace(spec.t0, spec.t0 + horizon, npts)
    means = {}
    for (i, j), c in spec.Gstar:
        means[(i, j)] = means.get((i, j), 0.0)
        means[(i, j)] += float(simpson(np.broadcast_to(c(t), t.shape), x=t) / horizon)
    worst = max((abs(v) for v in means.values()), default=0.0)
    return ZeroMeanReport(worst, worst <= tol, means)


def normalize_forcing(forcing, t0=0.0, horizon=None):
    """Rescale (F0, eta) so that sup ||eta|| = 1.

    The analytic envelope is an upper bound on sup ||eta||; a dense grid gives a
    lower bound.  The grid value is used when the two agree to
    NORMALIZATION_GAP, otherwise the (conservative) upper bound.
    """
    upper = forcing.eta_norm_upper()
    if upper == 0.0:
        return Forcing(0.0, forcing.eta)
    periods = [p for c in forcing.eta for p in c.periods()]
    if not periods:
        sup = float(np.linalg.norm([c(t0) for c in forcing.eta]))
    else:
        span = horizon or 200 * max(periods)
        npts = int(min(2_000_000, max(10_001, 400 * span / min(periods))))
        t = np.linspace(t0, t0 + span, npts)
        sup = float(np.max(np.linalg.norm(Forcing(1.0, forcing.eta).vector(t), axis=-1)))
        if (upper - sup) / upper > NORMALIZATION_GAP:
            log.warning("sup||eta|| not resolved on grid (grid %.6g, envelope %.6g); "
                        "normalizing by the envelope", sup, upper)
            sup = upper
    if sup == 0.0:
        return Forcing(0.0, forcing.eta)
    return Forcing(forcing.F0 * sup, tuple(c.scaled(1.0 / sup) for c in forcing.eta))


# ---------------------------------------------------------------- loading

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"sqrt": math.sqrt, "sin": math.sin, "cos": math.cos, "exp": math.exp}
_CONSTS = {"pi": math.pi}


def _eval_expr(text, params, where):
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name):
            if node.id in params:
                if params[node.id] is None:
                    raise SpecError(f"{where}: required parameter '{node.id}' not supplied")
                return float(params[node.id])
            if node.id in _CONSTS:
                return _CONSTS[node.id]
            raise SpecError(f"{where}: unknown name '{node.id}'")
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise SpecError(f"{where}: unsupported expression '{text}'")

    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise SpecError(f"{where}: cannot parse expression '{text}'") from exc
    return ev(tree)


def _num(value, params, where):
    if isinstance(value, bool):
        raise SpecError(f"{where}: expected a number")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        out = _eval_expr(value, params, where)
    else:
        raise SpecError(f"{where}: expected a number or expression")
    if not math.isfinite(out):
        raise SpecError(f"{where}: non-finite number")
    return out


def _time_coeff(obj, params, where):
    if isinstance(obj, (int, float, str)) and not isinstance(obj, bool):
        return TimeCoeff.constant(_num(obj, params, where))
    if not isinstance(obj, dict):
        raise SpecError(f"{where}: expected a time coefficient object")
    offset = _num(obj.get("offset", 0.0), params, f"{where}.offset")
    sins = []
    for k, s in enumerate(obj.get("sinusoids", [])):
        w = f"{where}.sinusoids[{k}]"
        freq = _num(s.get("freq", 0.0), params, f"{w}.freq")
        if freq < 0:
            raise SpecError(f"{w}.freq: angular frequency must be >= 0")
        sins.append((_num(s.get("amp", 0.0), params, f"{w}.amp"), freq,
                     _num(s.get("phase", 0.0), params, f"{w}.phase")))
    return TimeCoeff(offset, tuple(sins))


def spec_from_dict(data, params=None, normalize=True):
    """Build a validated SystemSpec from the JSON document structure."""
    if not isinstance(data, dict):
        raise SpecError("top level: expected an object")
    merged = dict(data.get("params", {}) or {})
    merged.update(params or {})
    try:
        n = int(data["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError("n: missing or not an integer") from exc
    rows = data.get("A")
    if not isinstance(rows, list) or len(rows) != n or any(
            not isinstance(r, list) or len(r) != n for r in rows):
        raise SpecError(f"A: expected {n} rows of {n} entries (row-major)")
    A = [[_num(v, merged, f"A[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(rows)]

    gstar = []
    for k, g in enumerate(data.get("Gstar", []) or []):
        w = f"Gstar[{k}]"
        try:
            i, j = int(g["i"]) - 1, int(g["j"]) - 1
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"{w}: missing integer i/j") from exc
        gstar.append(((i, j), _time_coeff(g, merged, w)))

    terms = []
    for k, f in enumerate(data.get("f_terms", []) or []):
        w = f"f_terms[{k}]"
        try:
            comp = int(f["component"]) - 1
            exps = tuple(int(e) for e in f["exponents"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"{w}: missing component/exponents") from exc
        terms.append(MonomialTerm(comp, _time_coeff(f.get("coeff", 1.0), merged, f"{w}.coeff"), exps))

    fdata = data.get("forcing") or {}
    F0 = _num(fdata.get("F0", 0.0), merged, "forcing.F0")
    eta_raw = fdata.get("eta") or [0.0] * n
    if len(eta_raw) != n:
        raise SpecError(f"forcing.eta: expected {n} components")
    eta = tuple(_time_coeff(c, merged, f"forcing.eta[{k}]") for k, c in enumerate(eta_raw))
    t0 = _num(data.get("t0", 0.0), merged, "t0")
    forcing = Forcing(F0, eta)
    if normalize:
        forcing = normalize_forcing(forcing, t0)
    return SystemSpec(n=n, A=np.array(A), Gstar=tuple(gstar), f_terms=tuple(terms),
                      forcing=forcing, t0=t0, name=str(data.get("name", "")), params=merged)


def load_spec(path, params=None):
    path = Path(path)
    if not path.exists():
        raise SpecError(f"{path}: no such file")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return spec_from_dict(data, params)
