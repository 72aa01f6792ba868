"""Command-line front end: ``spectrum``, ``verify`` and ``dimension``.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction

from . import calculus, hankel, spectral, torus
from .algebra import CrossedProductAlgebra, FoliationParams, TimeRegistry
from .scalars import GaussianRational

log = logging.getLogger("kronecker_triples")

SCHEMA = 1
OPERATORS = ("linear", "mixed", "dirac", "torus")
SUITES = ("relations", "calculus", "hankel", "torus", "all")
GOLDEN = (math.sqrt(5) - 1) / 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    a: float | Fraction = Fraction(3, 5)
    b: float | Fraction = Fraction(4, 5)
    theta: float = GOLDEN
    N: int = 5
    tol: float = 1e-10
    rmax: float | None = None
    format: str = "csv"
    mode: str = "exact"
    seed: int = 0
    kmax: int = 3
    index_range: int = 20
    tamper: bool = False

    def params(self) -> FoliationParams:
        return FoliationParams(self.a, self.b, self.mode)

    def registry(self) -> TimeRegistry:
        return TimeRegistry(("T1",), (1.0,) if self.mode == "numeric" else None)

    def torus(self) -> torus.TorusParams:
        return torus.TorusParams(self.theta, self.mode)

    def to_json(self) -> dict:
        d = asdict(self)
        for key in ("a", "b"):
            d[key] = str(d[key]) if isinstance(d[key], Fraction) else d[key]
        return d


def _parse_pair(text: str) -> tuple[int, int]:
    try:
        p, q = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--pyth expects p,q integers, got {text!r}") from None
    return p, q


def read_config_file(path: str) -> dict[str, str]:
    """``key=value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


_CONVERT = {"theta": float, "N": int, "tol": float, "rmax": float, "format": str, "mode": str, "seed": int,
            "kmax": int, "range": int, "a": float, "b": float, "pyth": str}


def build_config(ns: argparse.Namespace) -> RunConfig:
    merged: dict = {}
    if ns.config:
        for key, value in read_config_file(ns.config).items():
            if key not in _CONVERT:
                raise UsageError(f"unknown config key {key!r}")
            try:
                merged[key] = _CONVERT[key](value)
            except ValueError:
                raise UsageError(f"bad value for {key}: {value!r}") from None
    for key in _CONVERT:
        flag = getattr(ns, key, None)
        if flag is not None:
            merged[key] = flag
    cfg = RunConfig()
    mode = merged.get("mode", cfg.mode)
    if mode not in ("exact", "numeric"):
        raise UsageError(f"--mode must be exact or numeric, got {mode!r}")
    cfg.mode = mode
    try:
        if "pyth" in merged:
            if "a" in merged or "b" in merged:
                raise UsageError("give either --pyth or --a/--b")
            p = FoliationParams.pythagorean(*_parse_pair(merged["pyth"]), mode=mode)
            cfg.a, cfg.b = p.a, p.b
        elif "a" in merged:
            a = merged["a"]
            b = merged.get("b", math.sqrt(max(0.0, 1 - a * a)))
            cfg.a, cfg.b = a, b
        elif "b" in merged:
            raise UsageError("--b needs --a")
        cfg.params()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for key in ("theta", "N", "tol", "rmax", "format", "seed", "kmax"):
        if key in merged:
            setattr(cfg, key, merged[key])
    if "range" in merged:
        cfg.index_range = merged["range"]
    cfg.tamper = bool(getattr(ns, "tamper", False))
    if cfg.N < 0:
        raise UsageError("--N must be non-negative")
    if cfg.format not in ("csv", "json"):
        raise UsageError("--format must be csv or json")
    if cfg.tol <= 0:
        raise UsageError("--tol must be positive")
    return cfg


# -- suites -------------------------------------------------------------------------------

def _check(suite: str, name: str, passed: bool, gating: bool = True, **data) -> dict:
    return {"suite": suite, "check": name, "passed": bool(passed), "gating": gating, **data}


def _payload(d: dict) -> dict:
    return {k: v for k, v in d.items() if k not in ("passed", "which", "relation")}


def _relation_checks(suite: str, reports, gating: bool = True, expect_violation: bool = False) -> list[dict]:
    out = []
    for r in reports:
        ok = (r.status == calculus.VIOLATED) if expect_violation else r.passed
        out.append(_check(suite, r.relation, ok, gating, **_payload(r.to_json())))
    return out


def _certified(dps: int) -> float:
    # nonzero beyond any rounding noise at this working precision
    return 10.0 ** (-(dps // 2))


def suite_relations(cfg: RunConfig) -> list[dict]:
    params = cfg.params()
    alg = CrossedProductAlgebra(params, cfg.registry())
    return _relation_checks("relations", calculus.relation_suite(params, alg, tamper=cfg.tamper))


def suite_calculus(cfg: RunConfig) -> list[dict]:
    params = cfg.params()
    alg = CrossedProductAlgebra(params, cfg.registry())
    out = []
    for cert in (calculus.freeness_certificate(params, alg),
                 calculus.omega2_separation(params, alg, seed=cfg.seed)):
        out.append(_check("calculus", cert.which, cert.passed, **_payload(cert.to_json())))
    out += _relation_checks("calculus", [calculus.higher_degree_vanishing(params, alg, seed=cfg.seed),
                                         calculus.leibniz_check(params, "Qtilde", alg),
                                         calculus.leibniz_check(params, "Dirac", alg)])
    out += _relation_checks("calculus", calculus.sign_variant_checks(params), gating=False, expect_violation=True)
    dps = 160
    for s in range(1, 4):
        for q in range(0, 4):
            if s == 0 and q == 0:
                continue
            pr = calculus.generation_probe(params, s, q, range(1, 11), threshold=_certified(dps), dps=dps)
            data = pr.to_json()
            data["meets_1e-8"] = pr.min_abs_det > 1e-8
            out.append(_check("calculus", f"[D,U1^s U2^q] determinant s={s} q={q}", pr.passed, **_payload(data)))
    return out


def suite_hankel(cfg: RunConfig) -> list[dict]:
    import numpy as np

    out = []
    bad = [t for t in hankel.binomial_identity(10) if t[2] != 0]
    out.append(_check("hankel", "sum_j (-1)^j C(r,j) j^s = 0, s < r <= 10", not bad, witness=bad[:1] or None))
    rng = np.random.default_rng(cfg.seed)
    failures = []
    for n in range(20):
        k = 1 + n % 3
        model = _planted_model(rng, k, n % 2 == 0)
        samples = hankel.generate(model, -4, 2 * k + 6, k)
        dets = [hankel.hankel_det(samples, list(range(i0, i0 + k + 1)), k) for i0 in range(-4, 2)]
        got = hankel.classify(samples)
        if any(d != 0 for d in dets) or not model.same_as(got):
            failures.append(n)
    out.append(_check("hankel", "planted models: Hankel vanishing and classification", not failures,
                      witness=failures[:1] or None))
    neg = hankel.hankel_det(lambda i: i * i, [0, 1], 1)
    out.append(_check("hankel", "f(i) = i^2 has nonzero order-1 determinant", neg == -1, det=str(neg)))
    params = cfg.params()
    dps = 60
    h = hankel.h_function(params, dps)
    kinds = []
    for k in range(1, cfg.kmax + 1):
        vals = [h(i) for i in range(-12, 13)]
        kinds.append(hankel.classify(hankel.SequenceSamples(-12, vals, k)))
    out.append(_check("hankel", "h samples classify as neither", all(x == hankel.NEITHER for x in kinds)))
    for rep in hankel.h_hankel_scan(params, cfg.kmax, cfg.index_range, threshold=_certified(dps), seed=cfg.seed,
                                  dps=dps):
        data = rep.to_json()
        data["meets_1e-6"] = rep.min_abs_det > 1e-6
        out.append(_check("hankel", f"h Hankel determinant k={rep.k} ({rep.kind})", rep.passed, **_payload(data)))
    return out


def _planted_model(rng, k: int, repeated: bool) -> hankel.SequenceModel:
    def gr():
        return GaussianRational(Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 4))),
                                       Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 4))))

    def nonzero():
        while True:
            z = gr()
            if z != 0:
                return z

    if repeated:
        return hankel.SequenceModel("f1", [nonzero()], [nonzero() for _ in range(k)])
    betas: list = []
    while len(betas) < k:
        z = nonzero()
        if z not in betas:
            betas.append(z)
    return hankel.SequenceModel("f2", betas, [nonzero() for _ in range(k)])


def suite_torus(cfg: RunConfig) -> list[dict]:
    tp = cfg.torus()
    out = _relation_checks("torus", torus.torus_relation_suite(tp))
    out += _relation_checks("torus", [torus.torus_higher_degree(seed=cfg.seed)])
    out += _relation_checks("torus", torus.derivation_checks(tp, seed=cfg.seed))
    out += _relation_checks("torus", torus.torus_sign_variants(tp), gating=False, expect_violation=True)
    for cert in (torus.torus_freeness_probe(tp), torus.torus_block_pattern(tp, seed=cfg.seed)):
        out.append(_check("torus", cert.which, cert.passed, **_payload(cert.to_json())))
    return out


SUITE_FUNCS = {"relations": suite_relations, "calculus": suite_calculus, "hankel": suite_hankel,
               "torus": suite_torus}


# -- commands -----------------------------------------------------------------------------

def _open_out(path: str | None):
    return open(path, "w", newline="") if path else sys.stdout


def _dump(obj, path: str | None) -> None:
    fh = _open_out(path)
    try:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    finally:
        if path:
            fh.close()


def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, tuple):
        return list(o)
    if hasattr(o, "item"):
        return o.item()
    return str(o)


def cmd_spectrum(cfg: RunConfig, operator: str, out: str | None) -> int:
    if operator not in OPERATORS:
        raise UsageError(f"unknown operator {operator!r}; choose from {', '.join(OPERATORS)}")
    rows = spectral.spectrum_rows(None if operator == "torus" else cfg.params(), operator, cfg.N)
    if cfg.format == "csv":
        fh = _open_out(out)
        try:
            spectral.write_csv(rows, fh)
        finally:
            if out:
                fh.close()
    else:
        _dump({"schema": SCHEMA, "command": "spectrum", "operator": operator, "N": cfg.N,
               "rows": spectral.rows_to_json(rows)}, out)
    return 0


def cmd_verify(cfg: RunConfig, suite: str, out: str | None) -> int:
    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    names = [s for s in SUITE_FUNCS] if suite == "all" else [suite]
    checks, timings = [], {}
    for name in names:
        t0 = time.perf_counter()
        checks += SUITE_FUNCS[name](cfg)
        timings[name] = round(time.perf_counter() - t0, 3)
        log.info("suite %s finished in %.2fs", name, timings[name])
    failed = [c for c in checks if c["gating"] and not c["passed"]]
    report = {"schema": SCHEMA, "command": "verify", "suite": suite, "config": cfg.to_json(),
              "passed": not failed, "n_checks": len(checks), "n_failed": len(failed),
              "failures": [{"suite": c["suite"], "check": c["check"], "witness": c.get("witness")} for c in failed],
              "checks": checks, "seconds": timings}
    _dump(report, out)
    for c in failed:
        print(f"FAIL [{c['suite']}] {c['check']} witness={c.get('witness')}", file=sys.stderr)
    return 0 if not failed else 1


def cmd_dimension(cfg: RunConfig, operator: str, out: str | None) -> int:
    defaults = {"linear": 200.0, "dirac": 100.0, "torus": 200.0 * spectral.SQRT_2PI}
    if operator not in defaults:
        raise UsageError(f"unknown operator {operator!r}; choose from {', '.join(defaults)}")
    rmax = cfg.rmax if cfg.rmax is not None else defaults[operator]
    if rmax < 10:
        raise UsageError("--rmax must be at least 10")
    wc = spectral.weyl_count(operator, rmax, cfg.params() if operator == "dirac" else None)
    _dump({"schema": SCHEMA, "command": "dimension", **wc.to_json(), "R_max": rmax}, out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", type=float)
    common.add_argument("--b", type=float)
    common.add_argument("--pyth", help="p,q: a = p/sqrt(p^2+q^2), exact when the norm is a perfect square")
    common.add_argument("--theta", type=float, help="rotation parameter for the torus (numeric phases)")
    common.add_argument("--N", type=int, help="truncation radius")
    common.add_argument("--tol", type=float)
    common.add_argument("--rmax", type=float)
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--mode", help="exact or numeric")
    common.add_argument("--seed", type=int)
    common.add_argument("--kmax", type=int, help="largest Hankel order in the hankel suite")
    common.add_argument("--range", type=int, help="row index range for determinant scans")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--tamper", action="store_true", help=argparse.SUPPRESS)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="kronecker-triples", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("spectrum", parents=[common], help="eigenvalue table")
    p.add_argument("--operator", default="linear")
    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("suite", nargs="?", default="all")
    p = sub.add_parser("dimension", parents=[common], help="Weyl count and exponent fit")
    p.add_argument("--operator", default="linear")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = build_config(ns)
        if ns.command == "spectrum":
            return cmd_spectrum(cfg, ns.operator, ns.out)
        if ns.command == "verify":
            return cmd_verify(cfg, ns.suite, ns.out)
        return cmd_dimension(cfg, ns.operator, ns.out)
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
