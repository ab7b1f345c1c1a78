"""Experiment runners and report bundles for scenario configs."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bunching import Verdict, certify, certify_direct, orbit_quantity, power_certificate
from .centralizer import commutant_tower, coset_test
from .cocycle import CocycleSystem, power_system, product_along_cyclic_word
from .conjugacy import (LocalField, PowerView, build_conjugacy, check_condition_b, combine_relprime,
                        match_periodic_data, solve_conjugator, verify_cohomology,
                        verify_pcf_closing_convergence)
from .errors import CocylabError, ConditionBFailed, ConfigInvalid, ExperimentFailed
from .holonomy import Kind, verify_holonomy_axioms
from .numerics import Subspace, opnorm, subspace_angle
from .scenarios import Scenario, build_scenario, dump_config, load_config
from .sft import (PeriodicOrbit, SftPoint, enumerate_periodic_orbits, fixed_point, parse_word,
                  random_point, random_stable_partner, random_unstable_partner, validate_mixing)
from .spectrum import MarkovSampler, approximation_gap, periodic_exponents, spectrum_report
from .splitting import assemble_blockwise, cluster_constant, compute_splitting

TOL_H_EXACT = 1e-11
TOL_STABILIZATION = 1e-13
TOL_EXPONENT = 1e-10
TOL_TRUTH = 1e-9
TOL_ANGLE = 1e-8
TOL_BLOCKWISE = 1e-7


def clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), sort_keys=True, indent=1)


@dataclass
class Outcome:
    passed: bool
    report: dict
    tables: dict = field(default_factory=dict)


class Context:
    """Shared state across the experiments of one run."""

    def __init__(self, sc: Scenario, seed: int, tol_scale: float):
        self.sc = sc
        self.seed = seed
        self.tol_scale = tol_scale
        self.certs: dict[str, object] = {}
        self.index = 0

    def system(self, label: str) -> CocycleSystem:
        try:
            return self.sc.systems[label]
        except KeyError:
            raise ConfigInvalid(f"experiment {self.index}: unknown system {label!r}") from None

    def rng(self) -> np.random.Generator:
        return np.random.default_rng([self.seed, self.index])

    def cert(self, label: str):
        if label not in self.certs:
            self.certs[label] = certify_direct(self.system(label))
        return self.certs[label]

    def field(self, name: str):
        try:
            return self.sc.fields[name]
        except KeyError:
            raise ConfigInvalid(f"experiment {self.index}: unknown field {name!r}") from None

    def base_orbit(self, params) -> PeriodicOrbit:
        if "p0" in params:
            return PeriodicOrbit.from_word(parse_word(params["p0"]))
        return fixed_point(self.sc.ts)

    def c_p(self, spec, a: CocycleSystem, b: CocycleSystem, p0: PeriodicOrbit) -> np.ndarray:
        """Resolve a fixed-point conjugator spec.

        ``"identity"``, ``"solve"``, ``"truth:<field>"``, a matrix, or
        ``{"of": spec, "scale": s}`` / ``{"of": spec, "commutant_shift": [u, v]}``
        (the latter multiplies by ``u I + v A_p`` on the left).
        """
        p = p0.point()
        d = a.d
        if isinstance(spec, dict):
            base = self.c_p(spec.get("of", "identity"), a, b, p0)
            if "scale" in spec:
                base = float(spec["scale"]) * base
            if "commutant_shift" in spec:
                u, v = spec["commutant_shift"]
                base = (u * np.eye(d) + v * a.at(p)) @ base
            return base
        if isinstance(spec, list):
            return np.array(spec, dtype=float)
        if spec == "identity":
            return np.eye(d)
        if spec == "solve":
            x, _ = solve_conjugator(a.at(p), b.at(p))
            if x is None:
                raise ConditionBFailed("no invertible conjugator between the fixed-point matrices")
            return x
        if isinstance(spec, str) and spec.startswith("truth:"):
            return self.field(spec[6:]).at(p)
        raise ConfigInvalid(f"experiment {self.index}: bad c_p spec {spec!r}")

    def samples(self, count: int, radius: int) -> list[SftPoint]:
        rng = self.rng()
        return [random_point(self.sc.ts, rng, radius) for _ in range(count)]


# --------------------------------------------------------------------------
# experiments


def run_validate(ctx: Context, e: dict) -> Outcome:
    ts = ctx.sc.ts
    n = validate_mixing(ts)
    return Outcome(True, {"N_mix": n, "k": ts.k, "fixed_symbols": ts.fixed_symbols(),
                          "transition": ts.to_json()})


def run_periodic(ctx: Context, e: dict) -> Outcome:
    a, b = ctx.system(e.get("a", "A")), ctx.system(e.get("b", "B"))
    orbits = enumerate_periodic_orbits(ctx.sc.ts, int(e.get("max_period", 10)))
    rep = match_periodic_data(a, b, orbits, e.get("mode", "EQUAL"), ctx.tol_scale)
    rows = [["orbit", "period", "residual", "pass"]]
    rows += [[o.orbit.to_json(), o.orbit.period, o.residual, o.passed] for o in rep.orbits]
    summary = {"mode": rep.mode, "orbits": len(rep.orbits), "max_residual": rep.max_residual,
               "pass": rep.passed, "failures": [o.to_json() for o in rep.orbits if not o.passed][:20]}
    return Outcome(rep.passed, summary, {"orbits": rows})


def run_bunching(ctx: Context, e: dict) -> Outcome:
    label = e.get("system", "A")
    out = certify(ctx.system(label), int(e.get("max_n", 24)), int(e.get("max_period", 12)),
                  e.get("route", "both"))
    if "direct" in out:
        ctx.certs.setdefault(label, out["direct"])
    verdicts = {k: v.verdict.value for k, v in out.items() if k != "contradiction"}
    passed = not out["contradiction"]
    want = e.get("expect_verdict")
    if want is not None:
        passed = passed and all(v == want for v in verdicts.values())
    rows = [["orbit", "q"]]
    if "periodic" in out:
        rows += [[o, q] for o, q in out["periodic"].diagnostics["q"].items()]
    rep = {"system": label, "verdicts": verdicts, "contradiction": out["contradiction"],
           "expected_verdict": want}
    for k, c in out.items():
        if k != "contradiction":
            j = c.to_json()
            j["diagnostics"] = {kk: vv for kk, vv in j["diagnostics"].items() if kk != "q"}
            rep[k] = j
    return Outcome(passed, rep, {"orbit_q": rows})


def holonomy_samples(ts, rng, count: int, kind: Kind, n_triples: int):
    """Related pairs (half local, half with random cuts) and related triples."""
    partner = random_stable_partner if kind is Kind.STABLE else random_unstable_partner
    local_cut = -1 if kind is Kind.STABLE else 0
    pairs = []
    for i in range(count):
        x = random_point(ts, rng, 5)
        cut = local_cut if i < count // 2 else int(rng.integers(-3, 4))
        pairs.append((x, partner(ts, rng, x, cut)))
    triples = []
    for _ in range(n_triples):
        x = random_point(ts, rng, 5)
        y = partner(ts, rng, x, int(rng.integers(-3, 4)))
        z = partner(ts, rng, y, int(rng.integers(-3, 4)))
        triples.append((x, y, z))
    return pairs, triples


def run_holonomy(ctx: Context, e: dict) -> Outcome:
    label = e.get("system", "A")
    cs = ctx.system(label)
    cert = ctx.cert(label)
    if cert.verdict is not Verdict.BUNCHED:
        from .errors import UnbunchedInput
        raise UnbunchedInput(f"{label} is not certified fiber bunched ({cert.verdict.value})")
    rng = ctx.rng()
    reports = {}
    passed = True
    explicit = e.get("pair_list")
    for kind in (Kind.STABLE, Kind.UNSTABLE):
        if explicit is not None:
            pairs = [(SftPoint.from_json(p["x"]), SftPoint.from_json(p["y"]))
                     for p in explicit if Kind(p.get("kind", "stable")) is kind]
            triples = []
            if not pairs:
                continue
        else:
            pairs, triples = holonomy_samples(ctx.sc.ts, rng, int(e.get("pairs", 200)), kind,
                                              int(e.get("triples", 50)))
        rep = verify_holonomy_axioms(cs, pairs, triples, kind, cert, int(e.get("n_max", 10)),
                                     int(e.get("oracle_depth", 50)))
        ok = (rep.composition < TOL_H_EXACT * ctx.tol_scale and rep.equivariance < TOL_H_EXACT * ctx.tol_scale
              and rep.stabilization < TOL_STABILIZATION * ctx.tol_scale and bool(rep.h4_ok))
        reports[kind.value] = dict(rep.to_json(), **{"pass": ok})
        passed = passed and ok
    return Outcome(passed, {"system": label, "theta": cert.theta, "L": cert.L, "N": cert.N,
                            "axioms": reports})


def run_condition_b(ctx: Context, e: dict) -> Outcome:
    a, b = ctx.system(e.get("a", "A")), ctx.system(e.get("b", "B"))
    p0 = ctx.base_orbit(e)
    c_p = ctx.c_p(e.get("c_p", "identity"), a, b, p0)
    windows = e.get("windows") or [int(e.get("window", 10))]
    rows = [["window", "points", "residual", "tolerance", "pass"]]
    last = None
    for w in windows:
        last = check_condition_b(a, b, p0, c_p, int(w), ctx.tol_scale)
        rows.append([w, last.points, last.residual, last.tolerance, last.passed])
    rep = dict(last.to_json(), p0=p0.to_json(), C_p=c_p.tolist(),
               curve=[{"window": r[0], "residual": r[2]} for r in rows[1:]])
    passed = all(r[4] for r in rows[1:])
    return Outcome(passed, rep, {"residual_vs_window": rows})


def _build(ctx: Context, e: dict, a_label: str, b_label: str, c_p, window: int, check: bool = True):
    a, b = ctx.system(a_label), ctx.system(b_label)
    certs = {}
    if check:
        certs = {"cert_a": ctx.cert(a_label), "cert_b": ctx.cert(b_label)}
    return build_conjugacy(a, b, ctx.base_orbit(e), c_p, window, check=check, tol_scale=ctx.tol_scale, **certs)


def run_conjugacy(ctx: Context, e: dict) -> Outcome:
    al, bl = e.get("a", "A"), e.get("b", "B")
    a, b = ctx.system(al), ctx.system(bl)
    p0 = ctx.base_orbit(e)
    c_p = ctx.c_p(e.get("c_p", "solve"), a, b, p0)
    cf = _build(ctx, e, al, bl, c_p, int(e.get("window", 10)))
    rep = {"p0": p0.to_json(), "C_p": c_p.tolist(), "window": cf.window, "cached_points": len(cf.cache),
           "verified": cf.verified, "su_residual": cf.su_residual,
           "condition_b": cf.condition_b.to_json() if cf.condition_b else None,
           "holder": cf.holder.to_json() if cf.holder else None,
           "certificates": {k: {"verdict": c.verdict.value, "theta": c.theta, "N": c.N}
                            for k, c in cf.certificates.items()}}
    passed = cf.verified
    if "truth" in e:
        truth = ctx.field(e["truth"])
        err = max(opnorm(m - truth.at(x)) for x, m in cf.cache.items())
        rep["truth_error"] = err
        passed = passed and err < TOL_TRUTH * ctx.tol_scale
    samples = ctx.samples(int(e.get("samples", 20)), int(e.get("sample_radius", 6)))
    coh = verify_cohomology(a, b, cf, samples, int(e.get("depth", 12)), int(e.get("n", 12)),
                            tol_scale=ctx.tol_scale)
    rep["cohomology"] = coh.to_json()
    passed = passed and coh.passed
    if e.get("emit"):
        rep["field"] = cf.to_json()
    return Outcome(passed, rep)


def run_closing(ctx: Context, e: dict) -> Outcome:
    a, b = ctx.system(e.get("a", "A")), ctx.system(e.get("b", "B"))
    p0 = ctx.base_orbit(e)
    c_p = ctx.c_p(e.get("c_p", "identity"), a, b, p0)
    cert = ctx.cert(e.get("theta_from", e.get("a", "A")))
    theta = e.get("theta", cert.theta)
    source = None
    if isinstance(e.get("orbit_source"), str) and e["orbit_source"].startswith("truth:"):
        truth = ctx.field(e["orbit_source"][6:])
        source = lambda orb: truth.at(orb.point())
    ns = range(int(e.get("n_min", 3)), int(e.get("n_max", 12)) + 1)
    rows = [["core", "n", "norm_R"]]
    reports = []
    for core in e.get("cores", ["1"]):
        x = SftPoint.homoclinic(p0.word[0], parse_word(core), 0)
        rep = verify_pcf_closing_convergence(a, b, c_p, x, ns, theta, source, p0)
        rows += [[core, n, v] for n, v in zip(rep.n_values, rep.norms)]
        reports.append(dict(rep.to_json(), core=core))
    passed = all(r["pass"] for r in reports)
    return Outcome(passed, {"theta": theta, "certificate_N": cert.N, "points": reports},
                   {"closing_curve": rows})


def run_centralizer(ctx: Context, e: dict) -> Outcome:
    cs = ctx.system(e.get("system", "A"))
    orbit = PeriodicOrbit.from_word(parse_word(e.get("orbit", "0")))
    rep = commutant_tower(cs, orbit, int(e.get("kmax", 12)))
    dims = [r for _, r in rep.dims]
    passed = rep.stable and rep.containment < TOL_ANGLE
    checks = {}
    if "expect_dims" in e:
        checks["dims"] = dims == list(e["expect_dims"])
    if "expect_L_star" in e:
        checks["L_star"] = rep.L_star == int(e["expect_L_star"])
    passed = passed and all(checks.values())
    rows = [["k", "dim"]] + [[k, r] for k, r in rep.dims]
    return Outcome(passed, dict(rep.to_json(), checks=checks), {"tower": rows})


def run_coset(ctx: Context, e: dict) -> Outcome:
    al, bl = e.get("a", "A"), e.get("b", "B")
    a, b = ctx.system(al), ctx.system(bl)
    p0 = ctx.base_orbit(e)
    window = int(e.get("window", 6))
    c1 = _build(ctx, e, al, bl, ctx.c_p(e.get("c_p", "identity"), a, b, p0), window)
    samples = ctx.samples(int(e.get("samples", 10)), int(e.get("sample_radius", 6)))
    cases = []
    for case in e.get("cases", []):
        c_p2 = ctx.c_p(case["c_p"], a, b, p0)
        check = bool(case.get("check", False))
        note = ""
        try:
            c2 = _build(ctx, e, al, bl, c_p2, window, check)
        except ConditionBFailed as exc:
            note = f"checked build refused: {exc}"
            c2 = _build(ctx, e, al, bl, c_p2, window, False)
        rep = coset_test(a, b, c1, c2, samples, int(e.get("depth", 12)), int(e.get("n", 12)))
        cases.append({"label": case.get("label", ""), "C_p": c_p2.tolist(), "built_checked": check and not note,
                      "note": note, "agree": rep.agree, "quotient_member": rep.quotient.passed,
                      "direct_pass": rep.direct.passed, "quotient_residual": rep.quotient.max_residual,
                      "direct_residual": rep.direct.max_residual})
    return Outcome(all(c["agree"] for c in cases), {"cases": cases})


def run_combine(ctx: Context, e: dict) -> Outcome:
    al, bl = e.get("a", "A"), e.get("b", "B")
    a, b = ctx.system(al), ctx.system(bl)
    n1, n2 = (int(v) for v in e.get("powers", [2, 3]))
    p0 = ctx.base_orbit(e)
    if "truth" in e:
        c_p = ctx.field(e["truth"]).at(p0.point())
    else:
        c_p = ctx.c_p(e.get("c_p", "solve"), a, b, p0)
    views = []
    built = []
    for n in (n1, n2):
        an, code = power_system(a, n)
        bn, _ = power_system(b, n)
        cert_a, cert_b = power_certificate(ctx.cert(al), n), power_certificate(ctx.cert(bl), n)
        cf = build_conjugacy(an, bn, code.fixed_block(p0), c_p, int(e.get("window", 3)),
                             cert_a=cert_a, cert_b=cert_b, tol_scale=ctx.tol_scale)
        built.append({"N": n, "verified": cf.verified, "cached_points": len(cf.cache),
                      "su_residual": cf.su_residual})
        views.append(PowerView(cf, code))
    samples = ctx.samples(int(e.get("samples", 10)), int(e.get("sample_radius", 6)))
    rep = combine_relprime(views[0], n1, views[1], n2, a, b, samples, int(e.get("depth", 6)),
                           int(e.get("n", 12)), raise_on_fail=False)
    return Outcome(rep.passed, dict(rep.to_json(), powers=built))


def run_spectrum(ctx: Context, e: dict) -> Outcome:
    label = e.get("system", "A")
    cs = ctx.system(label)
    sampler = MarkovSampler(cs.ts, e.get("weights"), seed=int(np.random.default_rng([ctx.seed, ctx.index])
                                                                .integers(2 ** 31)))
    max_period = int(e.get("max_period", 10))
    rep = spectrum_report(cs, max_period, sampler, int(e.get("steps", 5000)), int(e.get("samples", 64)))
    gap = approximation_gap(cs, max_period, estimate=rep.estimate)
    checks = {}
    met = cs.metric
    if "exact" in e:
        lp, lm = e["exact"]
        checks["exact"] = max(max(abs(a - lp), abs(b - lm)) for _, a, b in rep.periodic)
    if e.get("conformal"):
        checks["conformal"] = max(a - b for _, a, b in rep.periodic)
    if e.get("crosscheck"):
        worst = 0.0
        for p in enumerate_periodic_orbits(cs.ts, max_period):
            lp, lm = periodic_exponents(cs, p)
            q = orbit_quantity(product_along_cyclic_word(cs, p), p.period, met)
            worst = max(worst, abs(q - (lp - lm + met.beta * math.log(met.alpha))))
        checks["bunching_identity"] = worst
    passed = all(v < TOL_EXPONENT for v in checks.values())
    rows = [["max_period", "gap", "best_orbit"]] + [list(t) for t in zip(gap.periods, gap.gaps, gap.best_orbits)]
    per = [["orbit", "lambda_plus", "lambda_minus"]] + [list(t) for t in rep.periodic]
    out = dict(rep.to_json(), checks=checks, gap=gap.to_json()["curve"], system=label)
    out.pop("periodic")
    return Outcome(passed, out, {"gap_curve": rows, "periodic_exponents": per})


def run_splitting(ctx: Context, e: dict) -> Outcome:
    a_sys, b = ctx.system(e.get("a", "A")), ctx.system(e.get("b", "B"))
    if a_sys.radius != 0 or len(a_sys.gen.words) != ctx.sc.ts.k or np.ptp(a_sys.gen.mats, axis=0).max() > 0:
        raise ConfigInvalid(f"experiment {ctx.index}: splitting needs a constant system as 'a'")
    a = a_sys.gen.mats[0]
    clusters = cluster_constant(a)
    rep = compute_splitting(b, clusters, int(e.get("depth", 8)), int(e.get("iterations", 60)))
    out = {"splitting": rep.to_json()}
    passed = rep.passed
    if "truth" in e:
        truth = ctx.field(e["truth"])
        ang = 0.0
        for x, frames in zip(rep.points, rep.frames):
            for i, c in enumerate(clusters.clusters):
                ang = max(ang, subspace_angle(Subspace(frames[i]),
                                              Subspace.from_vectors(truth.at(x) @ c.space.basis)))
        out["truth_angle"] = ang
        passed = passed and ang < TOL_ANGLE
    if e.get("assemble", True):
        asm = assemble_blockwise(clusters, b, rep, int(e.get("window", 6)))
        out["blocks"] = asm.to_json()
        blocks_ok = all(c.verdict is Verdict.BUNCHED for c in asm.block_certificates)
        samples = ctx.samples(int(e.get("samples", 10)), int(e.get("sample_radius", 6)))
        coh = verify_cohomology(a_sys, b, asm.field, samples, int(e.get("depth_check", 12)), int(e.get("n", 12)),
                                tol=TOL_BLOCKWISE, tol_scale=ctx.tol_scale)
        out["cohomology"] = coh.to_json()
        passed = passed and blocks_ok and asm.field.verified and coh.passed
    return Outcome(passed, out)


RUNNERS = {
    "validate": run_validate,
    "periodic": run_periodic,
    "bunching": run_bunching,
    "holonomy": run_holonomy,
    "condition_b": run_condition_b,
    "conjugacy": run_conjugacy,
    "closing": run_closing,
    "centralizer": run_centralizer,
    "coset": run_coset,
    "combine": run_combine,
    "spectrum": run_spectrum,
    "splitting": run_splitting,
}


# --------------------------------------------------------------------------
# bundles


@dataclass
class ReportBundle:
    metadata: dict
    experiments: list
    tables: dict
    timings: dict

    @property
    def passed(self) -> bool:
        return all(x["status"] == "PASS" for x in self.experiments)

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def experiment(self, ident: str) -> dict:
        for x in self.experiments:
            if x["id"] == ident:
                return x
        raise KeyError(ident)

    def to_json(self) -> dict:
        return {"metadata": self.metadata, "overall": self.verdict,
                "experiments": [{k: x[k] for k in ("id", "type", "expect", "outcome", "status", "error")}
                                for x in self.experiments]}

    def write(self, out) -> Path:
        out = Path(out)
        (out / "reports").mkdir(parents=True, exist_ok=True)
        (out / "tables").mkdir(exist_ok=True)
        (out / "bundle.json").write_text(dumps(self.to_json()) + "\n")
        for x in self.experiments:
            (out / "reports" / f"{x['id']}.json").write_text(dumps(x) + "\n")
        for name, rows in self.tables.items():
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            for r in clean(rows):
                w.writerow(r)
            (out / "tables" / f"{name}.csv").write_text(buf.getvalue())
        (out / "timings.json").write_text(json.dumps(self.timings, sort_keys=True, indent=1) + "\n")
        return out


def thread_count(threads: int | None = None) -> int:
    if threads is not None:
        return int(threads)
    return int(os.environ.get("COCYLAB_THREADS", "1") or 1)


def run_config(cfg: dict, seed: int | None = None, tol_scale: float | None = None,
               threads: int | None = None) -> ReportBundle:
    """Run every experiment of a validated config, in order, sharing systems."""
    t_all = time.perf_counter()
    sc = build_scenario(cfg)
    seed = cfg["seed"] if seed is None else int(seed)
    tol = sc.tol_scale if tol_scale is None else float(tol_scale)
    ctx = Context(sc, seed, tol)
    import scipy

    meta = {"name": cfg["name"], "seed": seed, "tol_scale": tol,
            "config_sha256": hashlib.sha256(dump_config(cfg).encode()).hexdigest(),
            "systems": {k: {"d": v.d, "window_radius": v.radius} for k, v in sc.systems.items()},
            "versions": {"cocylab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                         "python": platform.python_version()}}
    results, tables, times = [], {}, {}
    for i, e in enumerate(cfg["experiments"]):
        ctx.index = i
        t0 = time.perf_counter()
        params = {k: v for k, v in e.items() if k not in ("id", "type", "expect")}
        try:
            out = RUNNERS[e["type"]](ctx, e)
            outcome = "PASS" if out.passed else "FAIL"
            status = "PASS" if outcome == e["expect"] else "FAIL"
            rec = {"report": out.report, "error": None}
            for name, rows in out.tables.items():
                tables[f"{e['id']}-{name}"] = rows
        except ConfigInvalid:
            raise
        except CocylabError as exc:
            outcome, status = "ERROR", "ERROR"
            rec = {"report": None, "error": {"code": exc.code, "message": str(exc)}}
        times[e["id"]] = time.perf_counter() - t0
        results.append(dict(rec, id=e["id"], type=e["type"], params=params, expect=e["expect"],
                            outcome=outcome, status=status))
    timings = {"total_seconds": time.perf_counter() - t_all, "experiments": times,
               "threads": thread_count(threads)}
    return ReportBundle(meta, results, tables, timings)


def run_scenario(path, out=None, seed: int | None = None, tol_scale: float | None = None,
                 threads: int | None = None) -> ReportBundle:
    """Load, run and (when ``out`` is given) write a scenario bundle.

    Raises ExperimentFailed after writing when any experiment errored; the
    partial bundle is attached as ``exc.bundle``.
    """
    cfg = load_config(path)
    bundle = run_config(cfg, seed, tol_scale, threads)
    if out is not None:
        bundle.write(out)
    errored = [x["id"] for x in bundle.experiments if x["status"] == "ERROR"]
    if errored:
        exc = ExperimentFailed(f"experiments raised errors: {', '.join(errored)}")
        exc.bundle = bundle
        raise exc
    return bundle
