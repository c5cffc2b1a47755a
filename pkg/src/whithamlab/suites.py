"""Verification suites: config blocks in, sorted check records out.

Each check yields one record {name, anchor, residual, threshold, pass}.  A
record passes iff residual <= threshold.  Measured-only records carry no
threshold and never count as failures.  Every check draws its random numbers
from a generator seeded by (run seed, crc32 of the check name), so a report
depends only on the config and the seed.
"""

from __future__ import annotations

import itertools
import math
import time
import zlib
from dataclasses import dataclass, field

import numpy as np
import scipy.special

from . import genus0 as g0
from . import genus1 as g1
from . import tauflow as tf
from .contours import Contour, integrate
from .errors import ConfigError, InvalidInputError, WhithamLabError
from .numerics import ToleranceConfig, fit_polynomial
from .theta import check_theta_identities

SUITES = ("theta", "fay", "g0", "g1", "hydro", "tau")
DEFAULT_TAUS = (1j, 0.3 + 1.2j)


@dataclass
class CheckRecord:
    name: str
    anchor: str
    residual: float | None
    threshold: float | None
    passed: bool | None
    measured_only: bool = False
    detail: dict = field(default_factory=dict)
    error: str | None = None
    wall_time: float = 0.0

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "anchor": self.anchor,
            "residual": _jsonable(self.residual),
            "threshold": self.threshold,
            "pass": self.passed,
            "measured_only": self.measured_only,
            "wall_time": round(self.wall_time, 6),
        }
        if self.detail:
            out["detail"] = _jsonable(self.detail)
        if self.error is not None:
            out["error"] = self.error
        return out


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return x
    return x


def check_rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([int(seed) & (2**64 - 1), zlib.crc32(name.encode())])


class Runner:
    """Collects records; exceptions from the library turn into failed records."""

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self.records: list[CheckRecord] = []

    def check(self, name: str, anchor: str, threshold: float | None, fn, measured_only: bool = False):
        start = time.perf_counter()
        rng = check_rng(self.seed, name)
        try:
            out = fn(rng)
            residual, detail = out if isinstance(out, tuple) else (out, {})
            residual = None if residual is None else float(residual)
            if measured_only or threshold is None:
                passed = None
            else:
                passed = bool(residual is not None and residual <= threshold)
            rec = CheckRecord(name, anchor, residual, None if measured_only else threshold, passed,
                              measured_only, detail)
        except WhithamLabError as exc:
            rec = CheckRecord(name, anchor, None, None if measured_only else threshold,
                              None if measured_only else False, measured_only, error=f"{type(exc).__name__}: {exc}")
        rec.wall_time = time.perf_counter() - start
        self.records.append(rec)
        return rec

    def report(self) -> list:
        return sorted(self.records, key=lambda r: r.name)


# --------------------------------------------------------------------------- config parsing helpers


def as_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(float(x[0]), float(x[1]))
    return complex(x)


def _tol(block: dict, base: ToleranceConfig) -> ToleranceConfig:
    return base.replace(**block.get("tolerances", {})) if block.get("tolerances") else base


def _blocks(value) -> list:
    if value is None:
        return []
    return list(value) if isinstance(value, list) else [value]


def build_genus0(block: dict, tol: ToleranceConfig) -> g0.Genus0Config:
    return g0.Genus0Config(
        tuple(as_complex(x) for x in block["u"]),
        tuple(block["s"]),
        block["contours"],
        _tol(block, tol),
        as_complex(block["z_ref"]) if "z_ref" in block else None,
    )


def build_genus1(block: dict, tol: ToleranceConfig) -> g1.Genus1Config:
    return g1.Genus1Config(
        tuple(as_complex(x) for x in block["u"]),
        tuple(block["s"]),
        as_complex(block.get("a", 0.0)),
        as_complex(block.get("b", 0.0)),
        as_complex(block["tau"]),
        block["contours"],
        _tol(block, tol),
        as_complex(block["z_ref"]) if "z_ref" in block else None,
        as_complex(block["sample_center"]) if "sample_center" in block else None,
        float(block.get("sample_radius", 0.4)),
    )


def _name(block: dict, index: int, prefix: str, n: int) -> str:
    return block.get("name", f"{prefix}{index}_n{n}")


def _z_anchored(desc) -> bool:
    return "z" in g0.descriptor_names(desc)


def _cycles(block: dict, cfg) -> list:
    if "cycles" in block:
        return list(block["cycles"])
    return [k for k, d in cfg.contours.items() if not _z_anchored(d)]


def _small_circles(cfg) -> list:
    return [k for k, d in cfg.contours.items() if d.get("type") == "circle" and d.get("center") == "z"]


def _validate_names(cfg, names, where):
    missing = [n for n in names if n not in cfg.contours]
    if missing:
        raise ConfigError(f"{where}: unknown contour(s) {missing}")


# --------------------------------------------------------------------------- finite-difference comparisons


def _norm_rel(closed, fd) -> float:
    """max |closed - fd| over samples scaled by max |closed| (per quantity)."""
    closed, fd = np.asarray(closed), np.asarray(fd)
    scale = float(np.abs(closed).max())
    if scale == 0:
        return float(np.abs(fd).max())
    return float(np.abs(closed - fd).max() / scale)


def derivative_residuals_g0(cfg: g0.Genus0Config, name: str, zs) -> dict:
    """Closed-form z- and u-derivatives against central differences of the potential."""
    zs = np.asarray(zs, complex)
    h = cfg.tolerances.fd_step
    dz, du = g0.dP_closed_g0(zs, name, cfg)
    hz = h * max(1.0, float(np.abs(zs).max()))
    fdz = (g0.potentials_g0(zs + hz, name, cfg)[0] - g0.potentials_g0(zs - hz, name, cfg)[0]) / (2 * hz)
    out = {"dz": _norm_rel(dz, fdz)}
    for i in range(cfg.n):
        hu = h * max(1.0, abs(cfg.u[i]))
        plus = g0.potentials_g0(zs, name, cfg.with_u(i, cfg.u[i] + hu))[0]
        minus = g0.potentials_g0(zs, name, cfg.with_u(i, cfg.u[i] - hu))[0]
        out[f"du{i + 1}"] = _norm_rel(du[:, i], (plus - minus) / (2 * hu))
    return out


def derivative_residuals_g1(cfg: g1.Genus1Config, name: str, zs) -> dict:
    """z, u and tau derivatives against central differences.

    ``dtau`` compares the theta'-sum closed form with differences taken at
    fixed a - b tau / (2 pi i); ``dtau_fixed_a`` compares the fixed-a
    derivative with differences at fixed a; ``dtau_sum_form_fixed_a`` compares
    the theta'-sum form with fixed-a differences.
    """
    zs = np.asarray(zs, complex)
    h = cfg.tolerances.fd_step
    dz, du, dtau = g1.dP_closed_g1(zs, name, cfg)
    P = lambda c, w=zs: g1.potentials_g1(w, name, c)[0]
    hz = h * max(1.0, float(np.abs(zs).max()))
    out = {"dz": _norm_rel(dz, (P(cfg, zs + hz) - P(cfg, zs - hz)) / (2 * hz))}
    for i in range(cfg.n):
        hu = h * max(1.0, abs(cfg.u[i]))
        fd = (P(cfg.with_u(i, cfg.u[i] + hu)) - P(cfg.with_u(i, cfg.u[i] - hu))) / (2 * hu)
        out[f"du{i + 1}"] = _norm_rel(du[:, i], fd)
    ht = h * max(1.0, abs(cfg.tau))
    fd = {}
    for hold in ("comoving", "a"):
        fd[hold] = (P(g1.tau_shifted(cfg, cfg.tau + ht, hold)) - P(g1.tau_shifted(cfg, cfg.tau - ht, hold))) / (2 * ht)
    out["dtau"] = _norm_rel(dtau, fd["comoving"])
    out["dtau_fixed_a"] = _norm_rel(g1.dP_dtau_fixed_a(zs, name, cfg), fd["a"])
    # theta'-sum form against fixed-a differences; agrees only when b = 0
    out["dtau_sum_form_fixed_a"] = _norm_rel(dtau, fd["a"])
    return out


def beta_quadrature_residual(a: float = 0.35, b: float = 0.6, tol: float = 1e-12) -> float:
    """int_0^1 t^(a-1) (1-t)^(b-1) dt against the Beta function."""
    from .contours import BranchedWeight

    weight = BranchedWeight.linear([0.0, 1.0], [a - 1, b - 1])
    contour = Contour.segment(0.0, 1.0)
    val, _ = integrate(lambda t, w: w, contour, tol, weight)
    # principal branch of (t - 1)^(b-1) at the start of the segment carries exp(i pi (b-1))
    val = val * np.exp(-1j * np.pi * (b - 1))
    exact = scipy.special.beta(a, b)
    return abs(val - exact) / exact


def phi_fit_residual_g0(cfg: g0.Genus0Config, names, rng, count: int = 24) -> float:
    """Relative misfit of every phi (all contour pairs, every l) by a polynomial of degree n - 1."""
    zs = g0.sample_z_g0(cfg, count, rng, names).points
    worst = 0.0
    fs = {nm: g0.f_coefficients_g0(nm, cfg) for nm in names}
    num = g0._numerator_values(cfg, zs)
    cf = g0.common_factor_g0(zs, cfg, num)
    for a, b in itertools.combinations(names, 2):
        for l in range(1, cfg.n + 1):
            phi = g0.cross_from_f(fs[a], fs[b], zs, l, cfg, num) / cf
            _, res = fit_polynomial(zs, phi, cfg.n - 1)
            worst = max(worst, res / max(1.0, float(np.abs(phi).max())))
    return worst


# --------------------------------------------------------------------------- suites


def run_theta(runner: Runner, block: dict):
    taus = [as_complex(t) for t in block.get("taus", DEFAULT_TAUS)]
    samples = int(block.get("samples", 100))
    threshold = float(block.get("threshold", 1e-9))
    for tau in taus:
        key = f"theta.tau={tau.real:g}{tau.imag:+g}i"
        cache = {}

        def identities(rng, tau=tau, cache=cache):
            if not cache:
                cache.update(check_theta_identities(tau, samples, int(rng.integers(2**31))))
            return cache

        for ident in ("odd", "period_1", "period_tau", "heat", "four_term"):
            runner.check(f"{key}.{ident}", "theta function identities", threshold,
                         lambda rng, ident=ident, f=identities: (f(rng)[ident], {"samples": samples}))


def _partitions_up_to(max_size: int) -> list:
    out = [()]
    for size in range(1, max_size + 1):
        out += [tuple(p) for p in _partitions(size)]
    return out


def _partitions(n, largest=None):
    largest = n if largest is None else largest
    if n == 0:
        yield []
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, first):
            yield [first] + rest


def run_fay(runner: Runner, block: dict, tol: ToleranceConfig):
    samples = int(block.get("samples", 50))
    taus = [as_complex(t) for t in block.get("taus", DEFAULT_TAUS)]
    K = int(block.get("K", 6))
    max_size = int(block.get("max_partition_size", 4))
    for tau in taus:
        geom = tf.GeometryData.genus1(tau)
        runner.check(f"fay.genus1.tau={tau.real:g}{tau.imag:+g}i", "Fay identity, genus-one prime form", 1e-9,
                     lambda rng, geom=geom: tf.fay_residual(geom, count=samples, seed=int(rng.integers(2**31))))
    for kind in ("linear", "constant"):
        geom = tf.GeometryData.rational(kind)
        runner.check(f"fay.rational_{kind}", "Fay identity, rational degeneration", 1e-12,
                     lambda rng, geom=geom: tf.fay_residual(geom, count=samples, seed=int(rng.integers(2**31))))
    rat = tf.GeometryData.rational("linear")
    runner.check("fay.rational_linear.hand_example", "Fay identity, rational degeneration", 1e-12,
                 lambda rng: (tf.fay_residual(rat, z_vec=[0.0], points=(1, 2, 3, 0)),
                              {"terms": [float(x.real) for x in tf._fay_terms(rat, 1, 2, 3, 0, np.zeros(1))]}))

    def coincident(rng):
        geom = tf.GeometryData.genus1(taus[0])
        worst = 0.0
        for _ in range(10):
            u, w, t = rng.uniform(-0.5, 0.5, 3) + 1j * rng.uniform(-0.5, 0.5, 3)
            z = rng.normal() * 0.3 + 0.2j
            worst = max(worst, tf.fay_residual(geom, z_vec=[z], points=(u, u, w, t)))
        return worst

    runner.check("fay.genus1.coincident_points", "Fay identity, antisymmetry limit", 1e-9, coincident)
    for lam in _partitions_up_to(max_size):
        if not lam:
            continue
        tau_fn = tf.TauFunction(lam, K)

        def kp(rng, tau_fn=tau_fn):
            worst = 0.0
            for _ in range(samples):
                t = rng.normal(size=K) + 1j * rng.normal(size=K)
                pts = rng.uniform(-0.5, 0.5, 4) + 1j * rng.uniform(-0.5, 0.5, 4)
                worst = max(worst, tf.tau_fay_residual(tau_fn, t, *pts))
            return worst, {"tau_at_origin": tau_fn.value_at_origin}

        label = "".join(map(str, lam))
        runner.check(f"fay.tau.lambda={label}", "Fay-type identity of a KP tau-function", 1e-10, kp)
    tau21 = tf.TauFunction((2, 1), K)
    runner.check("fay.tau.lambda=21.equal_points", "Fay-type identity of a KP tau-function", 1e-12,
                 lambda rng: tf.tau_fay_residual(tau21, rng.normal(size=K), 0.3, 0.3, 0.1, 0.4))


def run_genus0(runner: Runner, blocks: list, tol: ToleranceConfig):
    runner.check("g0.quadrature.beta", "Beta integral quadrature", 1e-10,
                 lambda rng: beta_quadrature_residual(tol=tol.quad_tol))
    for index, block in enumerate(blocks):
        cfg = build_genus0(block, tol)
        key = f"g0.{_name(block, index, 'config', cfg.n)}"
        cycles = _cycles(block, cfg)
        _validate_names(cfg, cycles, key)
        samples = int(block.get("derivative_samples", 20))
        for name in cycles:
            def deriv(rng, name=name):
                zs = g0.sample_z_g0(cfg, samples, rng, cycles, visible=True).points
                res = derivative_residuals_g0(cfg, name, zs)
                return max(res.values()), res

            runner.check(f"{key}.derivatives.{name}", "genus-0 derivative formulas", 1e-6, deriv)
            runner.check(f"{key}.sum_rule.{name}", "genus-0 f-coefficient sum rule", 1e-8,
                         lambda rng, name=name: g0.f_coefficients_g0(name, cfg).sum_residual)
        rank_names = list(block.get("rank_contours", cycles))
        _add_rank_checks(runner, key, "genus-0", cfg, rank_names, g0.span_probe_g0, cfg.n, cfg.n + 2)
        if cfg.n >= 2:
            runner.check(f"{key}.phi_polynomial", "genus-0 cross functions are polynomial", 1e-8,
                         lambda rng: phi_fit_residual_g0(cfg, cycles, rng))
        for circle in _small_circles(cfg):
            runner.check(f"{key}.small_circle.{circle}", "residue of the potential kernel at t = z", 1e-6,
                         lambda rng, circle=circle: abs(g0.potential_g0(cfg.reference_point + 0.3j, circle, cfg)[0]
                                                        + 2j * np.pi))
        if "oracle" in block:
            _add_oracle_check(runner, key, cfg, block["oracle"])
        if "deformation" in block:
            _add_deformed_checks(runner, key, cfg, block["deformation"])


def build_deformation(block: dict) -> g0.DeformationSpec:
    v = tuple(tuple(as_complex(c) for c in row) for row in block.get("v", ()))
    return g0.DeformationSpec(tuple(block["d"]), v)


def _add_deformed_checks(runner, key, cfg, block):
    deformation = build_deformation(block)
    names = list(block["contours"])
    _validate_names(cfg, names, f"{key}.deformation")

    def rank_report(rng):
        out = g0.deformed_cross_rank(cfg, deformation, names, int(rng.integers(2**31)))
        return None, out

    runner.check(f"{key}.deformed.cross_rank_report", "deformed genus-0 potentials, exploratory", None,
                 rank_report, measured_only=True)
    for circle in _small_circles(cfg):
        runner.check(f"{key}.deformed.small_circle.{circle}", "residue of the potential kernel at t = z", 1e-6,
                     lambda rng, circle=circle: abs(
                         g0.potential_g0(cfg.reference_point + 0.3j, circle, cfg, deformation)[0] + 2j * np.pi))


def _add_rank_checks(runner, key, label, cfg, names, probe_fn, cross_expected, span_expected):
    for mode, expected in (("cross", cross_expected), ("potentials", span_expected)):
        cache = {}

        def probe(rng, mode=mode, cache=cache):
            if not cache:
                cache["p"] = probe_fn(cfg, names, mode, int(rng.integers(2**31)))
            return cache["p"]

        def rank_residual(rng, expected=expected, probe=probe):
            p = probe(rng)
            return abs(p.rank - expected), {"rank": p.rank, "expected": expected,
                                            "singular_values": [float(x) for x in p.singular_values]}

        def gap_residual(rng, probe=probe):
            p = probe(rng)
            return (1.0 / p.gap if np.isfinite(p.gap) else 0.0), {"gap": p.gap}

        what = "cross-difference span" if mode == "cross" else "potential span"
        runner.check(f"{key}.rank.{mode}", f"{label} {what} dimension", 0.0, rank_residual)
        runner.check(f"{key}.rank_gap.{mode}", f"{label} {what} dimension", 1e-2, gap_residual)


def _add_oracle_check(runner, key, cfg, block):
    name = block["contour"]
    zs = [as_complex(z) for z in block["z"]]

    def oracle(rng):
        if cfg.n != 1:
            raise InvalidInputError("the hypergeometric oracle covers n = 1 only")
        c = cfg.contours[name]
        if c.get("type") != "segment" or (c["from"], c["to"]) != ("0", "1"):
            raise InvalidInputError("the hypergeometric oracle needs the segment from 0 to 1")
        worst = 0.0
        for z in zs:
            P, _ = g0.potential_g0(z, name, cfg)
            ref = g0.weight_g0(z, cfg) * g0.segment01_integral_oracle(z, cfg.u[0], cfg.s)
            worst = max(worst, abs(P - ref) / abs(ref))
        return worst

    runner.check(f"{key}.oracle_2f1", "hypergeometric series oracle", 1e-8, oracle)


def run_genus1(runner: Runner, blocks: list, tol: ToleranceConfig):
    for index, block in enumerate(blocks):
        cfg = build_genus1(block, tol)
        key = f"g1.{_name(block, index, 'config', cfg.n)}"
        cycles = _cycles(block, cfg)
        _validate_names(cfg, cycles, key)
        samples = int(block.get("derivative_samples", 10))
        for name in cycles:
            cache = {}

            def residuals(rng, name=name, cache=cache):
                if not cache:
                    zs = g1.sample_z_g1(cfg, samples, rng, cycles, visible=True).points
                    cache.update(derivative_residuals_g1(cfg, name, zs))
                return cache

            def zu(rng, f=residuals):
                res = {k: v for k, v in f(rng).items() if not k.startswith("dtau")}
                return max(res.values()), res

            runner.check(f"{key}.derivatives.{name}", "genus-1 derivative formulas", 1e-6, zu)
            runner.check(f"{key}.derivatives_tau.{name}", "genus-1 tau derivative", 1e-5,
                         lambda rng, f=residuals: (f(rng)["dtau"], {"hold": "a - b tau / (2 pi i)"}))
            runner.check(f"{key}.derivatives_tau_fixed_a.{name}", "genus-1 tau derivative", 1e-5,
                         lambda rng, f=residuals: (f(rng)["dtau_fixed_a"], {"hold": "a"}))
            runner.check(f"{key}.derivatives_tau_sum_form_fixed_a.{name}", "genus-1 tau derivative", 1e-5,
                         lambda rng, f=residuals: (f(rng)["dtau_sum_form_fixed_a"],
                                                   {"hold": "a", "b": cfg.b}),
                         measured_only=cfg.b != 0)
        pair = block.get("periodicity_pair", cycles[:2])

        def periodicity(rng):
            worst = {"period_1": 0.0, "period_tau": 0.0, "period_tau_printed_multiplier": 0.0, "pole_growth": 0.0}
            for l in range(1, cfg.n + 2):
                out = g1.quasi_periodicity_check(pair[0], pair[1], l, cfg, 20, int(rng.integers(2**31)))
                for k in worst:
                    worst[k] = max(worst[k], out[k])
            return worst

        cache = {}

        def quasi(rng, which, cache=cache):
            if not cache:
                cache.update(periodicity(rng))
            return cache[which], {"alternative_multiplier_exp(-2 pi i eta)": cache["period_tau_printed_multiplier"],
                                  "pole_growth": cache["pole_growth"]}

        runner.check(f"{key}.quasi_periodicity.period_1", "genus-1 cross functions, periodicity", 1e-7,
                     lambda rng: quasi(rng, "period_1"))
        runner.check(f"{key}.quasi_periodicity.period_tau", "genus-1 cross functions, quasi-periodicity", 1e-7,
                     lambda rng: quasi(rng, "period_tau"))
        rank_names = list(block.get("rank_contours", cycles))
        _add_rank_checks(runner, key, "genus-1", cfg, rank_names, g1.span_probe_g1, cfg.n + 1, cfg.n + 2)
        for circle in _small_circles(cfg):
            runner.check(f"{key}.small_circle.{circle}", "residue of the potential kernel at t = z", 1e-6,
                         lambda rng, circle=circle: abs(g1.potential_g1(cfg.center + 0.1, circle, cfg)[0] + 2j * np.pi))


def run_hydro(runner: Runner, g0_blocks: list, g1_blocks: list, tol: ToleranceConfig):
    for genus, blocks in ((0, g0_blocks), (1, g1_blocks)):
        for index, block in enumerate(blocks):
            if "hydro" not in block:
                continue
            hb = block["hydro"]
            cfg = build_genus0(block, tol) if genus == 0 else build_genus1(block, tol)
            key = f"hydro.g{genus}.{_name(block, index, 'config', cfg.n)}"
            triple = tuple(hb["triple"])
            _validate_names(cfg, triple, key)
            perturb = float(hb.get("perturbation", 0.1))
            cache = {}

            def system(rng, cfg=cfg, triple=triple, genus=genus, cache=cache):
                if not cache:
                    seed = int(rng.integers(2**31))
                    if genus == 0:
                        cache["s"] = g0.extract_hydro_g0(cfg, triple, seed)
                    else:
                        cache["s"] = g1.extract_hydro_g1(cfg, triple, seed)
                return cache["s"]

            def consistency(sys, rng, cfg=cfg, genus=genus):
                fn = g0.hydro_consistency_g0 if genus == 0 else g1.hydro_consistency_g1
                return fn(sys, cfg, int(rng.integers(2**31)))

            held_tol = 1e-8 if genus == 0 else 1e-7
            runner.check(f"{key}.held_out", "hydrodynamic-type system extraction", held_tol,
                         lambda rng, system=system: (system(rng).held_out_residual,
                                                     {"m": system(rng).m, "notes": system(rng).notes}))
            inject = bool(hb.get("inject_fault", False))

            def consist(rng, system=system, consistency=consistency, inject=inject, perturb=perturb):
                sys = system(rng)
                if inject:
                    sys = perturbed_system(sys, perturb)
                res = consistency(sys, rng)
                return (float("inf") if res.singular else res.residual), {"condition": res.condition,
                                                                            "fault_injected": inject}

            runner.check(f"{key}.consistency", "compatibility functional of the extracted system", 1e-6, consist)

            def sensitivity(rng, system=system, consistency=consistency, perturb=perturb):
                res = consistency(perturbed_system(system(rng), perturb), rng)
                raw = float("inf") if res.singular else res.residual
                return 1e-3 / raw if raw > 0 else float("inf"), {"perturbed_residual": raw, "perturbation": perturb}

            runner.check(f"{key}.perturbation_sensitivity", "compatibility functional of the extracted system", 1.0,
                         sensitivity)


def perturbed_system(system, fraction: float):
    """Scale the largest-magnitude entry of a by (1 + fraction)."""
    a = system.a.copy()
    idx = np.unravel_index(np.argmax(np.abs(a)), a.shape)
    a[idx] *= 1 + fraction
    return system.with_coefficients(a=a)


def _abstract_configs(block: dict, geom: tf.GeometryData, tol: ToleranceConfig) -> list:
    out = []
    for sys in block.get("systems", DEFAULT_TAU_SYSTEMS):
        dim = geom.dim
        a = [as_complex(x) for x in block.get("a", [0.21 + 0.13j, 0.1, -0.2])][:dim]
        b = [as_complex(x) for x in block.get("b", [0.3 - 0.1j, 0.2j, 0.1])][:dim]
        out.append(tf.AbstractConfig(tuple(as_complex(x) for x in sys["u"]), tuple(sys["s"]), geom, a, b,
                                     tolerances=tol))
    return out


DEFAULT_TAU_SYSTEMS = (
    {"u": [[0.3, 0.2], [-0.4, 0.5]], "s": [0.4, 0.6]},
    {"u": [[0.3, 0.2], [-0.4, 0.5], [0.6, -0.3]], "s": [0.3, 0.45, 0.25]},
)
DEFAULT_Z_SAMPLES = (0.1 + 0.9j, -0.7 - 0.2j, 0.8 + 0.6j, -0.2 - 0.8j, 0.9 - 0.9j)


def run_tau(runner: Runner, block: dict, tol: ToleranceConfig):
    K = int(block.get("K", 6))
    max_size = int(block.get("max_partition_size", 4))
    partitions = [tuple(p) for p in block["partitions"]] if "partitions" in block else _partitions_up_to(max_size)
    zs = [as_complex(z) for z in block.get("z_samples", DEFAULT_Z_SAMPLES)]
    g1_tau = as_complex(block.get("genus1_tau", 1j))
    geometries = [("genus1", tf.GeometryData.genus1(g1_tau), 1e-6), ("rational", tf.GeometryData.rational(), 1e-8)]
    for lam in partitions:
        geometries.append((f"tau.lambda={''.join(map(str, lam)) or 'empty'}",
                           tf.GeometryData.tau_mode(tf.TauFunction(lam, K)), 1e-8))
    for label, geom, threshold in geometries:
        for cfg in _abstract_configs(block, geom, tol):
            key = f"tau.curvature.{label}.n{cfg.n}"
            runner.check(key, "zero curvature of the compatible linear systems", threshold,
                         lambda rng, cfg=cfg: tf.max_zero_curvature_residual(cfg))
            runner.check(f"{key}.z_rows", "zero curvature including f(z) rows", 1e-5,
                         lambda rng, cfg=cfg: tf.max_zero_curvature_residual(cfg, z_samples=zs))

    def reduction(rng):
        worst = 0.0
        for ct, cr in zip(_abstract_configs(block, tf.GeometryData.tau_mode(tf.TauFunction((), K)), tol),
                          _abstract_configs(block, tf.GeometryData.rational("constant"), tol)):
            for At, Ar in zip(tf.comp_system_matrices(ct), tf.comp_system_matrices(cr)):
                worst = max(worst, float(np.abs(At - Ar).max()))
        return worst

    runner.check("tau.reduction.unit_tau_vs_constant_theta", "tau-mode system with tau = 1", 0.0, reduction)

    def schur_examples(rng):
        t = rng.normal(size=K) + 1j * rng.normal(size=K)
        ref = {(1,): t[0], (2,): t[0] ** 2 / 2 + t[1], (2, 1): t[0] ** 3 / 3 - t[2]}
        return max(abs(tf.schur_tau(lam, t) - v) / max(1.0, abs(v)) for lam, v in ref.items())

    runner.check("tau.schur.hand_expansions", "Schur polynomials by Jacobi-Trudi", 1e-13, schur_examples)
    if "potential" in block:
        _run_tau_potential(runner, block["potential"], tol)


def _run_tau_potential(runner: Runner, block: dict, tol: ToleranceConfig):
    K = int(block.get("K", 4))
    u = tuple(as_complex(x) for x in block["u"])
    s = tuple(block["s"])
    a = [as_complex(x) for x in block.get("a", [])]
    b = [as_complex(x) for x in block.get("b", [])]
    contours = block["contours"]
    z_ref = as_complex(block["z_ref"]) if "z_ref" in block else None
    for lam in [tuple(p) for p in block.get("partitions", [[], [1], [2, 1]])]:
        cfg = tf.AbstractConfig(u, s, tf.GeometryData.tau_mode(tf.TauFunction(lam, K)), a, b, contours, tol, z_ref)
        label = "".join(map(str, lam)) or "empty"
        runner.check(f"tau.potential.lambda={label}.small_circle", "residue of the potential kernel at t = z", 1e-6,
                     lambda rng, cfg=cfg: abs(tf.small_circle_tau(cfg, cfg.reference_point + 0.3j) + 2j * np.pi))
    # tau = 1, b = 0 against the genus-zero potential with vanishing exponents at 0 and 1
    unit = tf.AbstractConfig(u, s, tf.GeometryData.tau_mode(tf.TauFunction((), K)), a, 0.0, contours, tol, z_ref)
    gz = g0.Genus0Config(u, s + (0.0, 0.0), contours, tol, unit.reference_point)
    open_names = [k for k, d in contours.items() if not _z_anchored(d)]

    def reduction(rng):
        worst = 0.0
        for name in open_names:
            for z in unit.reference_point + 0.3 * np.exp(2j * np.pi * rng.uniform(size=3)):
                p_tau = tf.potential_tau(z, name, unit)[0]
                p_g0 = g0.potential_g0(z, name, gz)[0]
                worst = max(worst, abs(p_tau - p_g0) / max(1.0, abs(p_g0)))
        return worst

    runner.check("tau.potential.unit_tau_vs_genus0", "tau-mode potential with tau = 1", 1e-10, reduction)
    report_block = block.get("report")
    if report_block:
        lam = tuple(report_block.get("partition", [1]))
        rcfg = tf.AbstractConfig(tuple(as_complex(x) for x in report_block.get("u", block["u"])),
                                 tuple(report_block.get("s", block["s"])),
                                 tf.GeometryData.tau_mode(tf.TauFunction(lam, K)),
                                 [as_complex(x) for x in report_block.get("a", block.get("a", []))],
                                 [as_complex(x) for x in report_block.get("b", block.get("b", []))],
                                 report_block.get("contours", contours), tol, z_ref)

        def explore(rng):
            rep = tf.tau_potential_report(rcfg, report_block["contours_used"], int(rng.integers(2**31)))
            return rep.get("cross_rank"), rep

        runner.check(f"tau.potential.lambda={''.join(map(str, lam))}.cross_rank_report",
                     "tau-mode potential, exploratory", None, explore, measured_only=True)


def run_suites(config: dict, suites, seed: int, tol: ToleranceConfig) -> Runner:
    """Run the named suites in dependency order: theta, fay, g0, g1, hydro, tau."""
    runner = Runner(seed)
    g0_blocks = _blocks(config.get("genus0"))
    g1_blocks = _blocks(config.get("genus1"))
    selected = set(suites)
    if "theta" in selected:
        run_theta(runner, config.get("theta", {}))
    if "fay" in selected:
        run_fay(runner, config.get("fay", {}), tol)
    if "g0" in selected:
        run_genus0(runner, g0_blocks, tol)
    if "g1" in selected:
        run_genus1(runner, g1_blocks, tol)
    if "hydro" in selected:
        run_hydro(runner, g0_blocks, g1_blocks, tol)
    if "tau" in selected:
        run_tau(runner, config.get("tau", {}), tol)
    return runner
