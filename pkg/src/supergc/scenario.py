"""Scenario files: declarations, bindings and constraints of one solution record.

A scenario is a TOML document::

    name = "example3"
    system = "fermionic"
    epsilon = [1, -1]            # optional; binds eps (and ε) per run

    [symbols]
    even = ["a"]                 # even constants
    odd = ["C0+", "C0-"]         # odd constants (written ~C0+ in expressions)
    functions = [{name = "φ0"}, {name = "m0+", parity = "odd"},
                 {name = "ψ", bodiless = true},
                 {name = "I", derivative = "exp(-φ0(#1))"}]

    [variables]                  # symmetry variables, usable as coordinates
    "ξ" = "x- - eps*x+"

    [let]                        # helper definitions, evaluated in order
    tt = "θ+*θ-"

    [bindings]                   # one entry per field of the system
    phi = "..."

    [[constraints]]              # equation = 0, solved for a target
    equation = "..."
    solve_for = "m0-(ξ; 1)"

    [expect]
    pass = true                  # or {"1" = true, "-1" = false}
    curvature = "0"              # optional expected Gaussian curvature

Inside bindings a symmetry variable acts as an independent coordinate (so
``dξ(...)`` is available) and is replaced by its value afterwards.  Inside
constraints the variables become the formal arguments ``#1, #2, ...``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .expr import EVEN, ODD, Expr, Func, atom_of, dummy, substitute
from .geometry import DDM, DDP, DM, DP
from .gc import VARIANTS, ConstraintError, SolutionRecord, orient, system
from .parser import Env, ParseError, parse, standard_env

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib


class ScenarioError(ValueError):
    """Malformed scenario file (maps to CLI exit code 2)."""


def data_dir() -> Path:
    """Bundled data directory, or ``$SUPERGC_DATA`` when set."""
    env = os.environ.get("SUPERGC_DATA")
    if env:
        return Path(env)
    return Path(str(resources.files("supergc").joinpath("data")))


def scenario_names() -> list:
    return sorted(p.stem for p in (data_dir() / "scenarios").glob("*.toml"))


def resolve(name_or_path) -> Path:
    p = Path(name_or_path)
    if p.suffix == ".toml" and p.exists():
        return p
    cand = data_dir() / "scenarios" / f"{name_or_path}.toml"
    if cand.exists():
        return cand
    raise ScenarioError(f"no scenario file or bundled scenario named {name_or_path!r}")


_PARITY = {"even": EVEN, "odd": ODD}


@dataclass
class Scenario:
    name: str
    system: str
    epsilons: list
    symbols: dict
    variables: dict
    lets: dict
    bindings: dict
    constraints: list
    expect: dict
    title: str = ""
    notes: list = field(default_factory=list)
    path: str = ""

    # environment ---------------------------------------------------------
    def env(self, eps=None) -> Env:
        env = standard_env()
        # displacement atoms for fundamental forms: d+, d- odd; dd+, dd- for d±²
        for x in (DP, DM, DDP, DDM):
            env.symbols[atom_of(x).name] = x
        if eps is not None:
            env.bind("eps", Expr.const(eps))
            env.bind("ε", Expr.const(eps))
        sy = self.symbols
        for n in sy.get("even", []):
            env.declare_const(n)
        for n in sy.get("odd", []):
            env.declare_const(n, ODD)
        for n in sy.get("bodiless", []):
            env.declare_const(n, bodiless=True)
        for spec in sy.get("functions", []):
            self._declare_func(env, spec)
        for v in self.variables:
            env.declare_coord(v)
        for n, text in self.lets.items():
            env.bind(n, self._parse(text, env, f"let {n}"))
        return env

    def _declare_func(self, env, spec):
        try:
            name = spec["name"]
        except (KeyError, TypeError):
            raise ScenarioError(f"{self.name}: function declaration needs a name: {spec!r}")
        parity = _PARITY.get(spec.get("parity", "even"))
        if parity is None:
            raise ScenarioError(f"{self.name}: bad parity for {name}")
        arity = int(spec.get("arity", 1))
        closed = {}
        if "derivative" in spec:
            d = spec["derivative"]
            for i, text in enumerate(d if isinstance(d, list) else [d]):
                closed[i] = self._parse(text, env, f"derivative of {name}")
        env.declare_func(Func(name, parity, arity, bodiless=bool(spec.get("bodiless", False)),
                              nilpotency=spec.get("nilpotency"), closed=closed))

    def _parse(self, text, env, where):
        try:
            return parse(text, env)
        except ParseError as err:
            raise ScenarioError(f"{self.name}: {where}: {err}") from err

    def _values(self, env):
        return {atom_of(env.symbols[v]): self._parse(t, env, f"variable {v}")
                for v, t in self.variables.items()}

    # records ---------------------------------------------------------------
    def record(self, eps=None) -> SolutionRecord:
        env = self.env(eps)
        vals = self._values(env)
        bindings = {}
        for n, text in self.bindings.items():
            e = self._parse(text, env, f"binding {n}")
            bindings[n] = substitute(e, vals) if vals else e
        rules = self.rules(env)
        out_env = env.copy()
        for v in self.variables:
            out_env.symbols.pop(v)
        return SolutionRecord(self.name, self.system, bindings, rules, eps, out_env,
                              list(self.notes))

    def rules(self, env=None) -> list:
        env = env or self.env()
        formal = {atom_of(env.symbols[v]): dummy(i + 1) for i, v in enumerate(self.variables)}
        out = []
        for k, c in enumerate(self.constraints):
            try:
                eq = self._parse(c["equation"], env, f"constraint {k + 1}")
                tgt = self._parse(c["solve_for"], env, f"constraint {k + 1} target")
            except KeyError as err:
                raise ScenarioError(f"{self.name}: constraint {k + 1} needs {err}") from None
            if formal:
                eq, tgt = substitute(eq, formal), substitute(tgt, formal)
            try:
                out.append(orient(eq, tgt, c["equation"]))
            except ConstraintError as err:
                raise ScenarioError(f"{self.name}: constraint {k + 1}: {err}") from err
        return out

    def parse(self, text, eps=None) -> Expr:
        """Parse ``text`` in this scenario's symbols, variables substituted."""
        env = self.env(eps)
        e = self._parse(text, env, "expression")
        vals = self._values(env)
        return substitute(e, vals) if vals else e

    def expected_pass(self, eps):
        p = self.expect.get("pass")
        if isinstance(p, dict):
            return p.get(str(eps))
        return p


_FORM_KEYS = (("curvature", "gaussian"), ("mean", "mean"), ("first_form", "I"),
              ("second_form", "II"))


def check(scn: Scenario, eps=None) -> dict:
    """Verify one scenario at one ε and compare every declared expectation."""
    from .gc import reduce_modulo_constraints, verify_solution
    from .geometry import curvature_report
    from .expr import to_text
    rec = scn.record(eps)
    rep = verify_solution(rec)
    exp_pass = scn.expected_pass(eps)
    expectations = {}
    if exp_pass is not None:
        expectations["pass"] = {"expected": exp_pass, "got": rep["pass"],
                                "met": exp_pass == rep["pass"]}
    wanted = [(k, j) for k, j in _FORM_KEYS if k in scn.expect]
    if wanted:
        curv = curvature_report(rec)
        env = rec.env
        for key, jkey in wanted:
            want = reduce_modulo_constraints(scn.parse(scn.expect[key], eps), rec.rules)
            got = _reparse(curv[jkey], env)
            diff = reduce_modulo_constraints(got - want, rec.rules)
            expectations[key] = {"expected": to_text(want), "got": curv[jkey],
                                 "difference": to_text(diff), "met": not diff}
    return {"scenario": scn.name, "system": scn.system, "epsilon": eps, "verify": rep,
            "expectations": expectations,
            "met": all(v["met"] for v in expectations.values())}


def _reparse(text, env):
    return parse(text, env)


def load(name_or_path) -> Scenario:
    path = resolve(name_or_path)
    try:
        raw = tomllib.loads(path.read_text("utf-8"))
    except tomllib.TOMLDecodeError as err:
        raise ScenarioError(f"{path}: {err}") from err
    return from_dict(raw, str(path))


def from_dict(raw: dict, path: str = "") -> Scenario:
    name = raw.get("name") or Path(path).stem
    variant = raw.get("system")
    if variant not in VARIANTS:
        raise ScenarioError(f"{name}: system must be one of {', '.join(VARIANTS)}")
    eps = raw.get("epsilon")
    if eps is None:
        epsilons = [None]
    else:
        epsilons = list(eps) if isinstance(eps, list) else [eps]
        if any(e not in (1, -1) for e in epsilons):
            raise ScenarioError(f"{name}: epsilon values must be 1 or -1")
    bindings = dict(raw.get("bindings", {}))
    fields = set(system(variant).fields)
    if variant == "classical" and "u" in bindings:
        fields = (fields - {"U"}) | {"u"}
    unknown = set(bindings) - fields - {"φ"}
    if unknown:
        raise ScenarioError(f"{name}: unknown fields {sorted(unknown)} for {variant}")
    return Scenario(
        name=name, system=variant, epsilons=epsilons,
        symbols=dict(raw.get("symbols", {})), variables=dict(raw.get("variables", {})),
        lets=dict(raw.get("let", {})), bindings=bindings,
        constraints=list(raw.get("constraints", [])), expect=dict(raw.get("expect", {})),
        title=raw.get("title", ""), notes=list(raw.get("notes", [])), path=path)


__all__ = ["Scenario", "ScenarioError", "check", "data_dir", "scenario_names", "resolve", "load",
           "from_dict"]
