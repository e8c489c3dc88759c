"""Problem files: a line-oriented sections/key-value format.

One problem per file.  Sections: ``[problem]`` (optional name), exactly one
of ``[bc]`` (the four boundary coefficients) or ``[kernel]`` (a custom
kernel with its envelope and cone constant), ``[cone]`` (the interval
[a,b]), optional ``[weight]`` (formula in t, or a two-column CSV table),
optional ``[grid]``, one ``[piece.N]`` per nonlinearity branch, optional
``[curve.N]`` declarations, and optional ``[certify]``/``[solve]`` blocks
with the run parameters.  Formulas use the grammar of
:mod:`conecert.expressions`; pieces are formulas in (t, u), everything else
in t (or (t, s) for a custom kernel).

Parsing validates early: formula syntax, piece coverage inputs, the cone
interval admissibility for the built-in kernel, and referenced table files
are all checked before any computation starts.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass

import numpy as np

from .cone import ConeSpec
from .errors import AdmissibilityError, ConfigError, ConecertError, ExpressionError
from .expressions import parse_expression, parse_predicate
from .kernels import BoundaryParams, Kernel, cone_params, green_kernel
from .nonlinearity import Curve, Nonlinearity, Piece
from .quadrature import Weight, uniform_grid

__all__ = [
    "BCConfig", "CustomKernelConfig", "PieceConfig", "CurveConfig",
    "CertifyConfig", "SolveConfig", "ProblemConfig",
    "parse_config", "serialize_config", "load_config",
    "build_problem", "build_nonlinearity", "build_weight", "build_kernel",
]

DEFAULT_GRID_N = 401


@dataclass(frozen=True)
class BCConfig:
    alpha: float
    beta: float
    gamma: float
    delta: float


@dataclass(frozen=True)
class CustomKernelConfig:
    k_text: str
    phi_text: str
    c: float


@dataclass(frozen=True)
class PieceConfig:
    region_text: str
    f_text: str


@dataclass(frozen=True)
class CurveConfig:
    gamma_text: str
    domain: tuple[float, float]
    kind: str
    eps: float | None
    psi_text: str | None
    gamma2_text: str | None


@dataclass(frozen=True)
class CertifyConfig:
    rho1: float
    rho2: float
    eps_values: tuple[float, ...]
    branch: str | None
    margin: float


@dataclass(frozen=True)
class SolveConfig:
    theta: float
    tol: float
    max_iter: int
    init: str


@dataclass(frozen=True)
class ProblemConfig:
    name: str
    bc: BCConfig | None
    kernel: CustomKernelConfig | None
    cone_a: float
    cone_b: float
    weight_expr: str | None
    weight_table: str | None
    grid_n: int
    pieces: tuple[PieceConfig, ...]
    curves: tuple[CurveConfig, ...]
    certify: CertifyConfig | None
    solve: SolveConfig | None


def _fail(section: str, key: str, message: str):
    raise ConfigError(f"[{section}] {key}: {message}")


class _Section:
    """Typed access to one configparser section with error diagnostics."""

    def __init__(self, parser: configparser.ConfigParser, name: str):
        self.name = name
        self.items = dict(parser.items(name)) if parser.has_section(name) else {}
        self.seen: set = set()

    def get(self, key: str, default=None, required: bool = False) -> str | None:
        self.seen.add(key)
        if key in self.items:
            return self.items[key].strip()
        if required:
            _fail(self.name, key, "missing required key")
        return default

    def get_float(self, key: str, default=None, required: bool = False):
        raw = self.get(key, None, required)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            _fail(self.name, key, f"not a number: {raw!r}")

    def get_int(self, key: str, default=None, required: bool = False):
        raw = self.get(key, None, required)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            _fail(self.name, key, f"not an integer: {raw!r}")

    def check_no_extras(self):
        extras = set(self.items) - self.seen
        if extras:
            _fail(self.name, sorted(extras)[0], "unknown key")


def _checked_expr(section: str, key: str, text: str, variables) -> str:
    try:
        parse_expression(text, variables)
    except ExpressionError as exc:
        _fail(section, key, str(exc))
    return text


def _checked_predicate(section: str, key: str, text: str, variables) -> str:
    try:
        parse_predicate(text, variables)
    except ExpressionError as exc:
        _fail(section, key, str(exc))
    return text


def _numbered_sections(parser: configparser.ConfigParser, prefix: str):
    found = []
    for name in parser.sections():
        if name == prefix or name.startswith(prefix + "."):
            suffix = name[len(prefix) + 1:] if name != prefix else ""
            try:
                index = int(suffix) if suffix else 1
            except ValueError:
                raise ConfigError(f"[{name}]: section suffix must be an integer")
            found.append((index, name))
    found.sort()
    return found


def parse_config(text: str, base_dir: str | None = None) -> ProblemConfig:
    """Parse and validate a problem file; raises :class:`ConfigError` with
    section/key diagnostics on the first offending field."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse problem file: {exc}") from None

    known = {"problem", "bc", "kernel", "cone", "weight", "grid",
             "certify", "solve"}
    for name in parser.sections():
        stem = name.split(".", 1)[0]
        if stem not in known and stem not in ("piece", "curve"):
            raise ConfigError(f"[{name}]: unknown section")

    sec_problem = _Section(parser, "problem")
    name = sec_problem.get("name", "")
    sec_problem.check_no_extras()

    has_bc = parser.has_section("bc")
    has_kernel = parser.has_section("kernel")
    if has_bc == has_kernel:
        raise ConfigError("exactly one of [bc] or [kernel] is required")

    sec_cone = _Section(parser, "cone")
    if not parser.has_section("cone"):
        raise ConfigError("missing required section [cone]")
    cone_a = sec_cone.get_float("a", required=True)
    cone_b = sec_cone.get_float("b", required=True)
    sec_cone.check_no_extras()

    bc = kernel = None
    if has_bc:
        s = _Section(parser, "bc")
        bc = BCConfig(
            alpha=s.get_float("alpha", required=True),
            beta=s.get_float("beta", required=True),
            gamma=s.get_float("gamma", required=True),
            delta=s.get_float("delta", required=True),
        )
        s.check_no_extras()
        try:
            cone_params(BoundaryParams(bc.alpha, bc.beta, bc.gamma, bc.delta),
                        cone_a, cone_b)
        except ConecertError as exc:
            raise ConfigError(f"[cone]: {exc}") from None
    else:
        s = _Section(parser, "kernel")
        kernel = CustomKernelConfig(
            k_text=_checked_expr("kernel", "k", s.get("k", required=True),
                                 ("t", "s")),
            phi_text=_checked_expr("kernel", "phi", s.get("phi", required=True),
                                   ("s",)),
            c=s.get_float("c", required=True),
        )
        s.check_no_extras()
        if not (0.0 < kernel.c <= 1.0):
            _fail("kernel", "c", f"must lie in (0,1], got {kernel.c}")

    sec_weight = _Section(parser, "weight")
    weight_expr = sec_weight.get("expr")
    weight_table = sec_weight.get("table")
    if weight_expr is not None and weight_table is not None:
        _fail("weight", "table", "give either expr or table, not both")
    if weight_expr is None and weight_table is None:
        weight_expr = "1"
    if weight_expr is not None:
        weight_expr = _checked_expr("weight", "expr", weight_expr, ("t",))
    if weight_table is not None:
        root = base_dir or os.getcwd()
        if not os.path.isfile(os.path.join(root, weight_table)):
            _fail("weight", "table",
                  f"table file not found: {os.path.join(root, weight_table)}")
    sec_weight.check_no_extras()

    sec_grid = _Section(parser, "grid")
    grid_n = sec_grid.get_int("n", DEFAULT_GRID_N)
    sec_grid.check_no_extras()
    if grid_n < 3:
        _fail("grid", "n", "need at least 3 nodes")

    pieces = []
    for _, sec_name in _numbered_sections(parser, "piece"):
        s = _Section(parser, sec_name)
        pieces.append(PieceConfig(
            region_text=_checked_predicate(sec_name, "region",
                                           s.get("region", required=True),
                                           ("t", "u")),
            f_text=_checked_expr(sec_name, "f", s.get("f", required=True),
                                 ("t", "u")),
        ))
        s.check_no_extras()
    if not pieces:
        raise ConfigError("at least one [piece.N] section is required")

    curves = []
    for _, sec_name in _numbered_sections(parser, "curve"):
        s = _Section(parser, sec_name)
        gamma_text = _checked_expr(sec_name, "gamma",
                                   s.get("gamma", required=True), ("t",))
        raw_domain = s.get("domain", "0, 1")
        try:
            lo, hi = (float(v) for v in raw_domain.split(","))
        except ValueError:
            _fail(sec_name, "domain", f"expected 'lo, hi', got {raw_domain!r}")
        kind = s.get("kind", "unknown")
        if kind not in ("viable", "inviable", "unknown"):
            _fail(sec_name, "kind", f"must be viable, inviable or unknown, "
                                    f"got {kind!r}")
        eps = s.get_float("eps")
        psi_text = s.get("psi")
        if psi_text is not None:
            psi_text = _checked_expr(sec_name, "psi", psi_text, ("t",))
        gamma2_text = s.get("gamma2")
        if gamma2_text is not None:
            gamma2_text = _checked_expr(sec_name, "gamma2", gamma2_text, ("t",))
        if kind == "inviable" and (eps is None or psi_text is None):
            _fail(sec_name, "kind", "inviable curves need both eps and psi")
        if not (0.0 <= lo < hi <= 1.0):
            _fail(sec_name, "domain", f"[{lo},{hi}] must sit inside [0,1]")
        curves.append(CurveConfig(
            gamma_text=gamma_text, domain=(lo, hi), kind=kind,
            eps=eps, psi_text=psi_text, gamma2_text=gamma2_text,
        ))
        s.check_no_extras()

    certify = None
    if parser.has_section("certify"):
        s = _Section(parser, "certify")
        raw_eps = s.get("eps", required=True)
        try:
            eps_values = tuple(float(v) for v in raw_eps.split(","))
        except ValueError:
            _fail("certify", "eps", f"expected a number or comma list, "
                                    f"got {raw_eps!r}")
        branch = s.get("branch")
        if branch is not None and branch not in ("a", "b"):
            _fail("certify", "branch", f"must be 'a' or 'b', got {branch!r}")
        certify = CertifyConfig(
            rho1=s.get_float("rho1", required=True),
            rho2=s.get_float("rho2", required=True),
            eps_values=eps_values,
            branch=branch,
            margin=s.get_float("margin", 1e-8),
        )
        s.check_no_extras()
        if any(e <= 0 for e in eps_values):
            _fail("certify", "eps", "eps values must be positive")

    solve = None
    if parser.has_section("solve"):
        s = _Section(parser, "solve")
        init = s.get("init", "zero")
        if init not in ("zero", "annulus") and not init.startswith("expr:"):
            _fail("solve", "init",
                  f"must be zero, annulus or expr:<formula>, got {init!r}")
        if init.startswith("expr:"):
            _checked_expr("solve", "init", init[len("expr:"):], ("t",))
        solve = SolveConfig(
            theta=s.get_float("theta", 0.5),
            tol=s.get_float("tol", 1e-8),
            max_iter=s.get_int("max_iter", 200),
            init=init,
        )
        s.check_no_extras()
        if not (0.0 < solve.theta <= 1.0):
            _fail("solve", "theta", "must lie in (0,1]")
        if solve.tol <= 0:
            _fail("solve", "tol", "must be positive")
        if solve.max_iter < 1:
            _fail("solve", "max_iter", "must be at least 1")

    return ProblemConfig(
        name=name, bc=bc, kernel=kernel, cone_a=cone_a, cone_b=cone_b,
        weight_expr=weight_expr, weight_table=weight_table, grid_n=grid_n,
        pieces=tuple(pieces), curves=tuple(curves),
        certify=certify, solve=solve,
    )


def serialize_config(cfg: ProblemConfig) -> str:
    """Canonical text rendering; parsing it back reproduces the config."""
    lines: list[str] = []

    def section(header: str, pairs):
        lines.append(f"[{header}]")
        for k, v in pairs:
            if v is not None:
                lines.append(f"{k} = {v}")
        lines.append("")

    if cfg.name:
        section("problem", [("name", cfg.name)])
    if cfg.bc is not None:
        section("bc", [("alpha", repr(cfg.bc.alpha)), ("beta", repr(cfg.bc.beta)),
                       ("gamma", repr(cfg.bc.gamma)), ("delta", repr(cfg.bc.delta))])
    if cfg.kernel is not None:
        section("kernel", [("k", cfg.kernel.k_text), ("phi", cfg.kernel.phi_text),
                           ("c", repr(cfg.kernel.c))])
    section("cone", [("a", repr(cfg.cone_a)), ("b", repr(cfg.cone_b))])
    section("weight", [("expr", cfg.weight_expr), ("table", cfg.weight_table)])
    section("grid", [("n", cfg.grid_n)])
    for i, piece in enumerate(cfg.pieces, start=1):
        section(f"piece.{i}", [("region", piece.region_text), ("f", piece.f_text)])
    for i, curve in enumerate(cfg.curves, start=1):
        section(f"curve.{i}", [
            ("gamma", curve.gamma_text),
            ("domain", f"{curve.domain[0]!r}, {curve.domain[1]!r}"),
            ("kind", curve.kind),
            ("eps", None if curve.eps is None else repr(curve.eps)),
            ("psi", curve.psi_text),
            ("gamma2", curve.gamma2_text),
        ])
    if cfg.certify is not None:
        section("certify", [
            ("rho1", repr(cfg.certify.rho1)),
            ("rho2", repr(cfg.certify.rho2)),
            ("eps", ", ".join(repr(e) for e in cfg.certify.eps_values)),
            ("branch", cfg.certify.branch),
            ("margin", repr(cfg.certify.margin)),
        ])
    if cfg.solve is not None:
        section("solve", [
            ("theta", repr(cfg.solve.theta)),
            ("tol", repr(cfg.solve.tol)),
            ("max_iter", cfg.solve.max_iter),
            ("init", cfg.solve.init),
        ])
    return "\n".join(lines)


def load_config(path: str) -> ProblemConfig:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))


def build_weight(cfg: ProblemConfig, base_dir: str | None = None) -> Weight:
    if cfg.weight_table is not None:
        root = base_dir or os.getcwd()
        path = os.path.join(root, cfg.weight_table)
        data = np.loadtxt(path, delimiter=",", ndmin=2)
        return Weight(table=(data[:, 0], data[:, 1]), label=cfg.weight_table)
    expr = parse_expression(cfg.weight_expr, ("t",))
    return Weight(fn=lambda s: expr(t=s), label=cfg.weight_expr)


def build_nonlinearity(cfg: ProblemConfig) -> Nonlinearity:
    pieces = tuple(
        Piece(region=parse_predicate(p.region_text, ("t", "u")),
              f=parse_expression(p.f_text, ("t", "u")),
              label=f"piece.{i}")
        for i, p in enumerate(cfg.pieces, start=1)
    )
    curves = []
    for i, c in enumerate(cfg.curves, start=1):
        gamma = parse_expression(c.gamma_text, ("t",))
        psi = parse_expression(c.psi_text, ("t",)) if c.psi_text else None
        gamma2 = parse_expression(c.gamma2_text, ("t",)) if c.gamma2_text else None
        curves.append(Curve(domain=c.domain, gamma=gamma, gamma2=gamma2,
                            kind=c.kind, eps=c.eps, psi=psi, label=f"curve.{i}"))
    return Nonlinearity(pieces=pieces, curves=tuple(curves))


def build_kernel(cfg: ProblemConfig) -> Kernel:
    if cfg.bc is not None:
        bc = BoundaryParams(cfg.bc.alpha, cfg.bc.beta, cfg.bc.gamma, cfg.bc.delta)
        return green_kernel(bc, cfg.cone_a, cfg.cone_b)
    k_expr = parse_expression(cfg.kernel.k_text, ("t", "s"))
    phi_expr = parse_expression(cfg.kernel.phi_text, ("s",))
    spec = ConeSpec(a=cfg.cone_a, b=cfg.cone_b, c=cfg.kernel.c)

    def k_eval(t, s):
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        shape = np.broadcast_shapes(t.shape, s.shape)
        return np.broadcast_to(np.asarray(k_expr(t=t, s=s), dtype=float),
                               shape).copy()

    def phi_eval(s):
        s = np.asarray(s, dtype=float)
        return np.broadcast_to(np.asarray(phi_expr(s=s), dtype=float),
                               s.shape).copy()

    return Kernel(eval=k_eval, phi=phi_eval, cone=spec,
                  split_at_diagonal=False, label="custom")


def build_problem(cfg: ProblemConfig, grid_n: int | None = None,
                  base_dir: str | None = None):
    from .hammerstein import make_problem

    kernel = build_kernel(cfg)
    weight = build_weight(cfg, base_dir)
    nl = build_nonlinearity(cfg)
    grid = uniform_grid(grid_n or cfg.grid_n)
    try:
        return make_problem(kernel, weight, nl, grid)
    except AdmissibilityError as exc:
        raise ConfigError(f"kernel bounds fail for this configuration: {exc}") \
            from None
