"""Command-line entry point: ``unitgaps <command> --config run.json``.

Exit codes: 0 success, 2 invariant violation, 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from . import gap_engine, partition_volumes, quasi_analyzer, unit_flow
from .gap_engine import ConvexRegion
from .numberfield import FieldElement, FieldError, NumberField

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG = 0, 2, 3


class ConfigError(ValueError):
    pass


class InvariantViolation(RuntimeError):
    pass


# ---------------------------------------------------------------- config

def _exact(x, what: str) -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise ConfigError(f"{what}: exact numbers must be strings or integers, got {x!r}")
    try:
        return Fraction(x) if isinstance(x, int) else Fraction(str(x).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{what}: cannot parse {x!r} as a rational") from exc


def _fstr(q: Fraction) -> str:
    return str(q)


@dataclass
class FieldSpec:
    minpoly: list                # integer coefficients, highest degree first
    omega_defs: list             # rational polynomials in the root, highest degree first
    omega_approx: list | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "FieldSpec":
        mp = [_exact(c, "field.minpoly") for c in d["minpoly"]]
        if any(c.denominator != 1 for c in mp):
            raise ConfigError("field.minpoly needs integer coefficients")
        defs = [[_exact(c, "field.omega_defs") for c in row] for row in d["omega_defs"]]
        approx = d.get("omega_approx")
        if approx is not None:
            approx = [str(_exact(a, "field.omega_approx")) if not isinstance(a, str) else a
                      for a in approx]
            for a in approx:
                _exact(a, "field.omega_approx")
        return cls([int(c) for c in mp], defs, approx)

    def to_dict(self) -> dict:
        return {"minpoly": [str(c) for c in self.minpoly],
                "omega_defs": [[_fstr(c) for c in row] for row in self.omega_defs],
                "omega_approx": self.omega_approx}


@dataclass
class RegionSpec:
    kind: str = "box"
    lower: list = field(default_factory=list)
    upper: list = field(default_factory=list)
    rows: list = field(default_factory=list)   # (a, b, strict) for a . x < b

    @classmethod
    def from_dict(cls, d: dict) -> "RegionSpec":
        kind = d.get("kind", "box")
        if kind == "box":
            lo = [_exact(x, "region.lower") for x in d["lower"]]
            hi = [_exact(x, "region.upper") for x in d["upper"]]
            return cls("box", lo, hi)
        if kind == "simplex":
            return cls("simplex")
        if kind == "halfspaces":
            rows = [([_exact(x, "region.rows") for x in r[0]], _exact(r[1], "region.rows"),
                     bool(r[2]) if len(r) > 2 else True) for r in d["rows"]]
            return cls("halfspaces", rows=rows)
        raise ConfigError(f"unknown region kind {kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "box":
            return {"kind": "box", "lower": [_fstr(x) for x in self.lower],
                    "upper": [_fstr(x) for x in self.upper]}
        if self.kind == "simplex":
            return {"kind": "simplex"}
        return {"kind": "halfspaces",
                "rows": [[[_fstr(x) for x in a], _fstr(b), s] for a, b, s in self.rows]}

    def build(self, nf: NumberField) -> ConvexRegion:
        if self.kind == "box":
            if len(self.lower) != nf.d or len(self.upper) != nf.d:
                raise ConfigError(f"box region needs {nf.d} bounds per side")
            return ConvexRegion.box(self.lower, self.upper)
        if self.kind == "simplex":
            return ConvexRegion.simplex(nf)
        return ConvexRegion.from_halfspaces(self.rows)


def floor_root(base: int, i: int, den: int) -> int:
    """Exact ``floor(base^(i/den))``."""
    if i < 0:
        raise ConfigError("log-grid exponents must be >= 0")
    return int(sympy.integer_nthroot(base ** i, den)[0])


@dataclass
class Schedule:
    kind: str = "values"     # values | range | log-grid
    values: list = field(default_factory=list)
    start: int = 1
    stop: int = 1
    step: int = 1
    base: int = 10
    den: int = 2

    @classmethod
    def from_dict(cls, d) -> "Schedule":
        if isinstance(d, list):
            d = {"kind": "values", "values": d}
        kind = d.get("kind", "values")
        if kind == "values":
            return cls("values", [_exact(v, "schedule.values") for v in d["values"]])
        if kind == "range":
            return cls("range", start=int(d["start"]), stop=int(d["stop"]), step=int(d.get("step", 1)))
        if kind == "log-grid":
            return cls("log-grid", start=int(d["start"]), stop=int(d["stop"]),
                       base=int(d.get("base", 10)), den=int(d.get("den", 2)))
        raise ConfigError(f"unknown schedule kind {kind!r}")

    @classmethod
    def parse(cls, text: str) -> "Schedule":
        """``3,10,31`` | ``range:1:300[:1]`` | ``log:BASE:DEN:I0:I1``."""
        try:
            if text.startswith("range:"):
                parts = [int(p) for p in text.split(":")[1:]]
                return cls("range", start=parts[0], stop=parts[1],
                           step=parts[2] if len(parts) > 2 else 1)
            if text.startswith("log:"):
                b, den, i0, i1 = [int(p) for p in text.split(":")[1:]]
                return cls("log-grid", start=i0, stop=i1, base=b, den=den)
            return cls("values", [_exact(v, "--t-grid") for v in text.split(",") if v.strip()])
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"cannot parse t grid {text!r}") from exc

    def to_dict(self) -> dict:
        if self.kind == "values":
            return {"kind": "values", "values": [_fstr(v) for v in self.values]}
        if self.kind == "range":
            return {"kind": "range", "start": self.start, "stop": self.stop, "step": self.step}
        return {"kind": "log-grid", "start": self.start, "stop": self.stop,
                "base": self.base, "den": self.den}

    def ts(self) -> list:
        if self.kind == "values":
            out = list(self.values)
        elif self.kind == "range":
            out = [Fraction(t) for t in range(self.start, self.stop + 1, self.step)]
        else:
            out = [Fraction(floor_root(self.base, i, self.den)) for i in range(self.start, self.stop + 1)]
        if any(t < 1 for t in out):
            raise ConfigError("scales must be >= 1")
        return out


@dataclass
class RunConfig:
    field: FieldSpec
    units: list = field(default_factory=list)
    region: RegionSpec = field(default_factory=RegionSpec)
    schedule: Schedule = field(default_factory=lambda: Schedule("log-grid", start=1, stop=6))
    label_schedule: Schedule | None = None
    precision_bits: int = 200
    volume_method: str = "auto"
    samples: int = 1 << 20
    seed: int = 0
    word_length: int = 1
    tol_imag: Fraction = Fraction(1, 10 ** 8)
    alpha: Fraction | None = None
    output_path: str | None = None
    output_format: str = "csv"
    reference: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        try:
            known = {"field", "units", "region", "schedule", "label_schedule", "precision_bits",
                     "volume", "word_length", "tol_imag", "alpha", "output", "reference"}
            extra = set(d) - known
            if extra:
                raise ConfigError(f"unknown config keys: {sorted(extra)}")
            vol = d.get("volume", {})
            out = d.get("output", {})
            cfg = cls(
                field=FieldSpec.from_dict(d["field"]),
                units=[[_exact(c, "units") for c in u] for u in d.get("units", [])],
                region=RegionSpec.from_dict(d.get("region", {"kind": "box", "lower": [], "upper": []})),
                schedule=Schedule.from_dict(d["schedule"]) if "schedule" in d else
                Schedule("log-grid", start=1, stop=6),
                label_schedule=Schedule.from_dict(d["label_schedule"]) if d.get("label_schedule") else None,
                precision_bits=int(d.get("precision_bits", 200)),
                volume_method=vol.get("method", "auto"),
                samples=int(vol.get("samples", 1 << 20)),
                seed=int(vol.get("seed", 0)),
                word_length=int(d.get("word_length", 1)),
                tol_imag=_exact(d.get("tol_imag", "1e-8"), "tol_imag"),
                alpha=_exact(d["alpha"], "alpha") if d.get("alpha") is not None else None,
                output_path=out.get("path"),
                output_format=out.get("format", "csv"),
                reference=d.get("reference", {}),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc}") from exc
        if cfg.output_format not in ("csv", "json"):
            raise ConfigError("output.format must be csv or json")
        if cfg.volume_method not in ("auto", "exact-box", "polygon", "monte-carlo", "grid"):
            raise ConfigError(f"unknown volume method {cfg.volume_method!r}")
        if cfg.precision_bits < 53:
            raise ConfigError("precision_bits must be >= 53")
        return cfg

    def to_dict(self) -> dict:
        out = {
            "field": self.field.to_dict(),
            "units": [[_fstr(c) for c in u] for u in self.units],
            "region": self.region.to_dict(),
            "schedule": self.schedule.to_dict(),
            "precision_bits": self.precision_bits,
            "volume": {"method": self.volume_method, "samples": self.samples, "seed": self.seed},
            "word_length": self.word_length,
            "tol_imag": _fstr(self.tol_imag),
            "output": {"path": self.output_path, "format": self.output_format},
            "reference": self.reference,
        }
        if self.label_schedule is not None:
            out["label_schedule"] = self.label_schedule.to_dict()
        if self.alpha is not None:
            out["alpha"] = _fstr(self.alpha)
        return out

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# ---------------------------------------------------------------- context

class Context:
    """Lazily built objects shared by the commands."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        try:
            self.field = NumberField(cfg.field.minpoly, cfg.field.omega_defs, cfg.field.omega_approx)
        except FieldError as exc:
            raise ConfigError(f"invalid field: {exc}") from exc
        self._units = None
        self._flow = None
        self._region = None

    @property
    def region(self) -> ConvexRegion:
        if self._region is None:
            try:
                self._region = self.cfg.region.build(self.field)
            except (gap_engine.RegionError, ValueError) as exc:
                raise ConfigError(f"invalid region: {exc}") from exc
        return self._region

    @property
    def units(self) -> unit_flow.UnitSystem:
        if self._units is None:
            try:
                gens = [self.field.element(u) for u in self.cfg.units]
                self._units = unit_flow.solve_rates(self.field, gens, self.cfg.precision_bits)
            except (FieldError, unit_flow.UnitSystemError) as exc:
                raise ConfigError(f"invalid unit generators: {exc}") from exc
        return self._units

    @property
    def flow(self) -> quasi_analyzer.QuasiFlow:
        if self._flow is None:
            alpha = float(self.cfg.alpha) if self.cfg.alpha is not None else None
            try:
                self._flow = quasi_analyzer.build_flow(self.units, self.cfg.precision_bits,
                                                       float(self.cfg.tol_imag), alpha)
            except quasi_analyzer.FlowError as exc:
                raise InvariantViolation(str(exc)) from exc
        return self._flow

    def labels(self, extra_ts=()) -> unit_flow.LabelSet:
        sched = self.cfg.label_schedule or self.cfg.schedule
        ts = sorted(set(sched.ts()) | {Fraction(t) for t in extra_ts})
        return unit_flow.label_set(self.field, self.units, self.region, ts)


# ---------------------------------------------------------------- output

class Formatter:
    def __init__(self, full: bool):
        self.full = full

    def num(self, x) -> str:
        x = float(x)
        if self.full:
            return repr(x)
        s = f"{x:.5f}"
        return "0.00000" if s == "-0.00000" else s

    def vec(self, xs) -> str:
        return "(" + ", ".join(self.num(x) for x in xs) + ")"


def _csv(header, rows, manifest=()) -> str:
    buf = io.StringIO()
    for line in manifest:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _estr(e: FieldElement) -> str:
    return str(e)


# ---------------------------------------------------------------- commands

def _single_t(args, cfg) -> Fraction:
    if args.t is not None:
        return Fraction(args.t)
    ts = cfg.schedule.ts()
    return ts[-1]


def cmd_spectrum(ctx: Context, args, fmt: Formatter, kind: str) -> str:
    t = _single_t(args, ctx.cfg)
    s = gap_engine.spectrum(ctx.field, ctx.region, t)
    ok = {"injective": gap_engine.check_injective(s), "telescoping": gap_engine.check_telescoping(s),
          "float_order": gap_engine.check_float_order(s)}
    if not all(ok.values()):
        raise InvariantViolation(f"spectrum invariants failed: {ok}")
    d = ctx.field.d
    if kind == "json":
        return json.dumps({
            "t": str(t), "count": s.count, "D": s.D, "checks": ok,
            "distinct": [{"spacing": _estr(e), "value": fmt.num(ctx.field.sigma1_float(e))}
                         for e in s.distinct],
            "points": [{"m": p, "y": fmt.num(y)} for p, y in zip(s.points.tolist(), s.values)],
        }, indent=2)
    rows = []
    for i in range(s.count):
        sp = str(s.distinct[s.spacing_index[i]]) if i < s.count - 1 else ""
        rows.append([i] + s.points[i].tolist() + [int(s.floors[i]), fmt.num(s.values[i]), sp])
    manifest = [f"t={t} count={s.count} D={s.D}",
                "columns: index, lattice vector m, floor of m.omega, fractional part y, "
                "exact spacing to the next point"]
    return _csv(["i"] + [f"m{k + 1}" for k in range(d)] + ["floor", "y", "spacing"], rows, manifest)


def cmd_threegap(ctx: Context, args, fmt: Formatter, kind: str) -> str:
    if ctx.field.d != 1:
        raise ConfigError("threegap needs a field with a single generator omega")
    t_max = int(args.t) if args.t is not None else int(max(ctx.cfg.schedule.ts()))
    rep = gap_engine.three_gap_check(ctx.field, t_max)
    if rep.violations:
        raise InvariantViolation(f"more than three gaps at t={rep.violations[:5]}")
    if kind == "json":
        return json.dumps({"t_max": t_max, "max_D": rep.max_D, "per_t": rep.per_t}, indent=2)
    return _csv(["t", "D"], [[i + 1, D] for i, D in enumerate(rep.per_t)],
                [f"t_max={t_max} max_D={rep.max_D}"])


def cmd_rates(ctx: Context, args, fmt: Formatter, kind: str) -> str:
    us = ctx.units
    beta = [fmt.num(b) for b in us.beta]
    res = us.residual()
    if res > 1e-9:
        raise InvariantViolation(f"rate residual {res}")
    if kind == "json":
        return json.dumps({"beta": beta, "residual": res,
                           "generators": [str(g) for g in us.generators],
                           "target": [fmt.num(x) for x in us.target]}, indent=2)
    return _csv(["j", "generator", "beta"], [[j + 1, str(g), b] for j, (g, b) in
                                              enumerate(zip(us.generators, beta))],
                [f"residual={res:.3e}"])


def cmd_labels(ctx: Context, args, fmt: Formatter, kind: str) -> str:
    sched = ctx.cfg.label_schedule or ctx.cfg.schedule
    ts = sched.ts() if args.t is None else [Fraction(args.t)]
    L = unit_flow.label_set(ctx.field, ctx.units, ctx.region, ts)
    history = [[str(t), n] for t, n in L.history]
    if kind == "json":
        return json.dumps({"J": L.J, "burn_in": str(L.burn_in()), "history": history,
                           "labels": [{"label": str(e), "sigma1": fmt.num(ctx.field.sigma1_float(e))}
                                      for e in L.elements]}, indent=2)
    return _csv(["j", "label", "sigma1"],
                [[j + 1, str(e), fmt.num(ctx.field.sigma1_float(e))] for j, e in enumerate(L.elements)],
                [f"J={L.J} burn_in={L.burn_in()}",
                 "history (t:size): " + " ".join(f"{t}:{n}" for t, n in history)])


def cmd_flow(ctx: Context, args, fmt: Formatter, kind: str) -> str:
    qf = ctx.flow
    rep = qf.report()
    rep["eigenvalues"] = [[fmt.num(a), fmt.num(b)] for a, b in rep["eigenvalues"]]
    rep["theta"] = [fmt.num(x) for x in rep["theta"]]
    rep["beta"] = [fmt.num(x) for x in rep["beta"]]
    rep["exp_errors"] = quasi_analyzer.exp_errors(qf)
    rep["commutators"] = {f"{i},{j}": v for (i, j), v in quasi_analyzer.commutator_norms(qf).items()}
    if kind == "json":
        return json.dumps(rep, indent=2)
    rows = [[i + 1, e[0], e[1], "rotational" if i < qf.k else "decaying", qf.order[i] + 1]
            for i, e in enumerate(rep["eigenvalues"])]
    return _csv(["mode", "re", "im", "type", "embedding"], rows,
                [f"k={qf.k} gamma={fmt.num(qf.gamma)} alpha={fmt.num(qf.alpha)} cond_P={qf.cond:.3e}",
                 "theta=" + fmt.vec(qf.theta)])


def _table_rows(ctx: Context, ts, fmt: Formatter) -> list:
    rows = []
    for i, t in enumerate(ts, start=1):
        p = quasi_analyzer.predict_expansion(ctx.flow, ctx.units, t)
        rows.append({"i": i, "t": t, "exact": [int(c) if c.denominator == 1 else c for c in p.exact],
                     "tg3": p.scaled, "errors": p.coord_errors, "imag": p.imag})
    return rows


def cmd_table6(ctx: Context, args, fmt: Formatter, kind: str) -> str:
    sched = Schedule.parse(args.t_grid) if args.t_grid else Schedule("log-grid", start=1, stop=6)
    ts = sched.ts()
    rows = _table_rows(ctx, ts, fmt)
    problems = []
    ref = ctx.cfg.reference.get("table")
    if ref:
        by_t = {Fraction(r["t"]): r for r in ref}
        for r in rows:
            want = by_t.get(Fraction(r["t"]))
            if want is None:
                continue
            exact = [Fraction(x) for x in want["exact"]]
            if exact != [Fraction(x) for x in r["exact"]]:
                problems.append(f"t={r['t']}: n(u1) {r['exact']} != {want['exact']}")
            tg = np.array([float(Fraction(x)) for x in want["tg3"]])
            if np.max(np.abs(tg - r["tg3"])) > 1e-4:
                problems.append(f"t={r['t']}: t*g3 {r['tg3'].tolist()} != {want['tg3']}")
    if kind == "json":
        text = json.dumps([{"i": r["i"], "t": str(r["t"]), "exact": [str(x) for x in r["exact"]],
                            "tg3": [fmt.num(x) for x in r["tg3"]],
                            "error": [fmt.num(x) for x in r["errors"]]} for r in rows], indent=2)
    else:
        text = _csv(["i", "t", "n(u1)", "t*g3", "max_error"],
                    [[r["i"], str(r["t"]), "(" + ",".join(str(x) for x in r["exact"]) + ")",
                      fmt.vec(r["tg3"]), fmt.num(max(r["errors"]))] for r in rows])
    if problems:
        sys.stdout.write(text)
        raise InvariantViolation("table mismatch:\n  " + "\n  ".join(problems))
    return text


def cmd_sweep(ctx: Context, args, fmt: Formatter, kind: str) -> str:
    cfg = ctx.cfg
    ts = Schedule.parse(args.t_grid).ts() if args.t_grid else cfg.schedule.ts()
    L = ctx.labels(ts)
    flow = ctx.flow
    header = ["t", "count", "D", "J_t", "complete"] + [f"p[{e}]" for e in L.elements] + \
             ["max_pred_diff", "volume_error", "expansion_error"]
    rows, records = [], []
    for t in ts:
        s = gap_engine.spectrum(ctx.field, ctx.region, t)
        u = unit_flow.unit_at(ctx.units, t)
        pred_err = quasi_analyzer.predict_expansion(flow, ctx.units, t).error
        if s.count < 2:
            rows.append([str(t), s.count, s.D, 0, 1] + [fmt.num(0)] * L.J + ["", "", fmt.num(pred_err)])
            continue
        try:
            p = unit_flow.proportions(ctx.field, s, L, u)
            complete = 1
        except unit_flow.IncompleteLabelSet:
            p, complete = None, 0
        if p is None:
            rows.append([str(t), s.count, s.D, "", 0] + [""] * L.J + ["", "", fmt.num(pred_err)])
            continue
        if sum(p) != 1:
            raise InvariantViolation(f"proportions at t={t} sum to {sum(p)}")
        sv = partition_volumes.shift_vectors(ctx.field, L, u, t)
        pred = partition_volumes.predicted_proportions(ctx.region, sv.normalized(), cfg.volume_method,
                                                       cfg.samples, cfg.seed)
        diff = float(np.max(np.abs(np.array([float(x) for x in p]) - pred.values)))
        J_t = sum(1 for x in p if x)
        rows.append([str(t), s.count, s.D, J_t, complete] + [fmt.num(x) for x in p] +
                    [fmt.num(diff), f"{pred.error_budget:.3e}", fmt.num(pred_err)])
        records.append({"t": str(t), "count": s.count, "D": s.D, "J_t": J_t,
                        "p": [str(x) for x in p], "max_pred_diff": diff,
                        "volume_error": pred.error_budget, "expansion_error": pred_err})
    manifest = ["columns: t; |M(t)|; D(t) distinct spacings; J_t labels occurring; complete = every "
                "rescaled spacing was in the label set; p[label] exact proportions; max_pred_diff = "
                "max_j |p_j - vol(P_j)/vol(R)|; volume_error = volume error budget; expansion_error = "
                "||n(u1(t))/t - g3||_inf",
                f"labels J={L.J} accumulated over {len(L.history)} scales; volume method {cfg.volume_method}"]
    if kind == "json":
        return json.dumps({"labels": [str(e) for e in L.elements], "rows": records}, indent=2)
    return _csv(header, rows, manifest)


def _at_t(ctx: Context, args):
    t = _single_t(args, ctx.cfg)
    s = gap_engine.spectrum(ctx.field, ctx.region, t)
    if s.count < 2:
        raise ConfigError(f"t={t} leaves fewer than two points in the region")
    L = ctx.labels([t])
    return t, s, L, unit_flow.unit_at(ctx.units, t)


def cmd_proportions(ctx: Context, args, fmt: Formatter, kind: str) -> str:
    t, s, L, u = _at_t(ctx, args)
    p = unit_flow.proportions(ctx.field, s, L, u)
    part = partition_volumes.partition_lattice(ctx.field, ctx.region, s, L, u)
    sv = part.shifts
    pred = partition_volumes.predicted_proportions(ctx.region, sv.normalized(), ctx.cfg.volume_method,
                                                   ctx.cfg.samples, ctx.cfg.seed)
    rows = [[j + 1, str(e), str(x), fmt.num(x), fmt.num(pv), fmt.num(abs(float(x) - pv)),
             "(" + ",".join(str(c) for c in sv.exact[j]) + ")"]
            for j, (e, x, pv) in enumerate(zip(L.elements, p, pred.values))]
    if kind == "json":
        return json.dumps({"t": str(t), "count": s.count, "volume_method": pred.method,
                           "volume_error": pred.error_budget,
                           "rows": [dict(zip(["j", "label", "exact", "p", "predicted", "diff", "shift"], r))
                                    for r in rows]}, indent=2)
    return _csv(["j", "label", "exact", "p", "predicted", "diff", "shift"], rows,
                [f"t={t} count={s.count} volume_method={pred.method} "
                 f"volume_error={pred.error_budget:.3e}"])


def cmd_ratios(ctx: Context, args, fmt: Formatter, kind: str) -> str:
    t = _single_t(args, ctx.cfg)
    s = gap_engine.spectrum(ctx.field, ctx.region, t)
    rs = unit_flow.ratio_stats(ctx.field, s)
    rows = [[str(r), fmt.num(ctx.field.sigma1_float(r)), str(f), fmt.num(f)]
            for r, f in zip(rs.ratios, rs.frequencies)]
    if kind == "json":
        return json.dumps({"t": str(t), "ratios": [dict(zip(["ratio", "value", "exact", "frequency"], r))
                                                   for r in rows]}, indent=2)
    return _csv(["ratio", "value", "exact", "frequency"], rows, [f"t={t} count={s.count}"])


def cmd_words(ctx: Context, args, fmt: Formatter, kind: str) -> str:
    t, s, L, u = _at_t(ctx, args)
    l = args.length if args.length is not None else ctx.cfg.word_length
    freq = unit_flow.word_stats(ctx.field, s, L, u, l)
    part = partition_volumes.partition_lattice(ctx.field, ctx.region, s, L, u)
    counts = partition_volumes.check_words(part, l)
    n_windows = s.count - 1 - l
    for w, f in freq.items():
        if Fraction(counts.get(w, 0), n_windows) != f:
            raise InvariantViolation(f"word {w}: window and formula frequencies differ")
    rows = [[" ".join(str(L.elements[j]) for j in w), str(f), fmt.num(f)] for w, f in freq.items()]
    if kind == "json":
        return json.dumps({"t": str(t), "l": l, "windows": n_windows,
                           "words": [dict(zip(["word", "exact", "frequency"], r)) for r in rows]},
                          indent=2)
    return _csv(["word", "exact", "frequency"], rows, [f"t={t} l={l} windows={n_windows}"])


def cmd_volumes(ctx: Context, args, fmt: Formatter, kind: str) -> str:
    t, s, L, u = _at_t(ctx, args)
    sv = partition_volumes.shift_vectors(ctx.field, L, u, t)
    v = sv.normalized()
    pred = partition_volumes.predicted_proportions(ctx.region, v, ctx.cfg.volume_method,
                                                   ctx.cfg.samples, ctx.cfg.seed)
    if kind == "json":
        return partition_volumes.volume_report(pred, L, v)
    rows = [[j + 1, str(e), fmt.num(x), f"{err:.3e}"]
            for j, (e, x, err) in enumerate(zip(L.elements, pred.values, pred.errors))]
    return _csv(["j", "label", "volume_fraction", "error"], rows,
                [f"t={t} method={pred.method} total={fmt.num(pred.total)}"])


COMMANDS = {
    "spectrum": cmd_spectrum, "threegap": cmd_threegap, "rates": cmd_rates, "labels": cmd_labels,
    "flow": cmd_flow, "table6": cmd_table6, "sweep": cmd_sweep, "proportions": cmd_proportions,
    "ratios": cmd_ratios, "words": cmd_words, "volumes": cmd_volumes,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="unitgaps", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--t", help="single scale (rational string)")
    ap.add_argument("--t-grid", help="3,10,31 | range:1:300[:step] | log:BASE:DEN:I0:I1")
    ap.add_argument("--precision-bits", type=int)
    ap.add_argument("--samples", type=int, help="volume sample count")
    ap.add_argument("--length", type=int, help="word length parameter l (words are l+1 long)")
    ap.add_argument("--out", help="output file (default stdout)")
    ap.add_argument("--format", choices=["csv", "json"])
    ap.add_argument("--full-precision", action="store_true", help="print floats with all digits")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        if args.precision_bits is not None:
            cfg.precision_bits = args.precision_bits
        if args.samples is not None:
            cfg.samples = args.samples
        if args.t is not None:
            args.t = _exact(args.t, "--t")
            if args.t < 1:
                raise ConfigError("--t must be >= 1")
        if args.t_grid and args.command not in ("table6", "sweep"):
            cfg.schedule = Schedule.parse(args.t_grid)
        kind = args.format or cfg.output_format
        ctx = Context(cfg)
        text = COMMANDS[args.command](ctx, args, Formatter(args.full_precision), kind)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvariantViolation, partition_volumes.PartitionMismatch, unit_flow.IncompleteLabelSet,
            quasi_analyzer.FlowError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    _emit(text, args.out or cfg.output_path)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
