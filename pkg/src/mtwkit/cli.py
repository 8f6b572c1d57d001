"""Command-line front end: config parsing, check dispatch, report output.

A campaign config is a single JSON document: a cost block, the two
domain blocks, a mandatory master seed, and an ordered check list.
Unknown keys are rejected with dotted field paths.  Exit codes: 0 all
checks pass, 1 at least one violation, 2 configuration/runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .convexity import (
    DiscreteCPotential,
    connectivity_check,
    csis_check,
)
from .costs import CATALOG_TABLE, CostSpec, make_cost
from .curvature import scan_a3, sample_pairs
from .errors import ConfigError, MtwkitError
from .geometry import Point
from .mountains import (
    MountainField,
    build_c_segment,
    dasm_check,
    expansion_rate,
    front_ode_track,
    front_point,
    front_sample,
    lemma62_check,
    monotonicity_check,
)
from .report import PASS, VIOLATED, INCONCLUSIVE, VerificationReport, dump_csv, dump_report
from .transport import DomainSpec

CHECK_NAMES = (
    "curvature_scan",
    "dasm",
    "monotonicity",
    "identity",
    "csis",
    "connectivity",
    "front_track",
)

_TOP_KEYS = {"seed", "cost", "omega", "lambda", "checks", "out_dir"}
_COST_KEYS = {"id", "dim", "params", "r_min"}
_DOMAIN_KEYS = {"kind", "low", "high", "radius", "center", "angle"}
_CHECK_KEYS = {
    "curvature_scan": {"check", "n_points", "n_frames", "tol", "margin", "h_t"},
    "dasm": {"check", "n_configs", "x_m", "y0", "y1", "n_x", "n_theta", "tol", "strict"},
    "monotonicity": {
        "check", "n_configs", "x_m", "y0", "y1", "n_x", "n_theta",
        "tol_pos", "tol_neg", "tol", "strict",
    },
    "identity": {"check", "n_configs", "theta", "h_w", "h_t", "tol"},
    "csis": {
        "check", "support", "n_potentials", "n_x", "z_per_axis",
        "n_hull_probes", "tol",
    },
    "connectivity": {"check", "support", "x", "n_theta", "tol"},
    "front_track": {"check", "x_m", "y0", "y1", "thetas", "w_mag", "dt", "tol"},
}


def _expect(cond: bool, msg: str, field: str) -> None:
    if not cond:
        raise ConfigError(msg, field=field)


def _check_keys(block: dict, allowed: set, path: str) -> None:
    for key in block:
        _expect(key in allowed, f"unknown key {key!r}", f"{path}.{key}")


def load_config(path) -> dict:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", field=str(path))
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}", field=str(path))
    _expect(isinstance(doc, dict), "config root must be an object", "")
    _check_keys(doc, _TOP_KEYS, "")
    _expect("seed" in doc, "missing mandatory key", "seed")
    _expect(isinstance(doc["seed"], int) and not isinstance(doc["seed"], bool),
            "seed must be an integer", "seed")
    _expect("cost" in doc, "missing mandatory key", "cost")
    _expect(isinstance(doc["cost"], dict), "cost must be an object", "cost")
    _check_keys(doc["cost"], _COST_KEYS, "cost")
    _expect("id" in doc["cost"], "missing cost id", "cost.id")
    _expect("dim" in doc["cost"], "missing cost dimension", "cost.dim")
    for name in ("omega", "lambda"):
        _expect(name in doc, "missing mandatory key", name)
        _expect(isinstance(doc[name], dict), f"{name} must be an object", name)
        _check_keys(doc[name], _DOMAIN_KEYS, name)
        _expect("kind" in doc[name], "missing domain kind", f"{name}.kind")
    _expect("checks" in doc, "missing mandatory key", "checks")
    _expect(isinstance(doc["checks"], list) and doc["checks"],
            "checks must be a nonempty list", "checks")
    for i, chk in enumerate(doc["checks"]):
        path_i = f"checks[{i}]"
        _expect(isinstance(chk, dict), "check entry must be an object", path_i)
        _expect("check" in chk, "missing check name", f"{path_i}.check")
        name = chk["check"]
        _expect(name in CHECK_NAMES, f"unknown check {name!r}", f"{path_i}.check")
        _check_keys(chk, _CHECK_KEYS[name], path_i)
    return doc


def _build_cost(block: dict):
    params = dict(block.get("params", {}))
    spec = CostSpec(
        id=block["id"],
        dim=int(block["dim"]),
        params=params,
        r_min=float(block.get("r_min", 0.05)),
    )
    try:
        return make_cost(spec)
    except ValueError as exc:
        raise ConfigError(str(exc), field="cost.id")


def _build_domain(block: dict, manifold, path: str) -> DomainSpec:
    kind = block["kind"]
    try:
        return DomainSpec(
            manifold,
            kind,
            low=tuple(block["low"]) if "low" in block else None,
            high=tuple(block["high"]) if "high" in block else None,
            radius=float(block.get("radius", 2.0)),
            center=tuple(block["center"]) if "center" in block else None,
            angle=float(block.get("angle", np.pi / 2)),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc), field=path)


def _point(cost, coords, path: str) -> Point:
    try:
        return Point(cost.manifold, np.asarray(coords, dtype=float))
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc), field=path)


def _sample_config(cost, omega, lam, rng, min_sep: float = 0.2):
    """One random (x_m, y0, y1) triple with admissible, separated targets."""
    for _ in range(256):
        x_m = Point(cost.manifold, omega.sample(rng, 1)[0])
        y0 = Point(cost.manifold, lam.sample(rng, 1)[0])
        y1 = Point(cost.manifold, lam.sample(rng, 1)[0])
        if not (cost.admissible(x_m, y0) and cost.admissible(x_m, y1)):
            continue
        if float(np.linalg.norm(y0.coords - y1.coords)) < min_sep:
            continue
        return x_m, y0, y1
    raise MtwkitError("could not sample an admissible mountain configuration")


def _x_samples(omega, rng, n: int) -> np.ndarray:
    return omega.sample(rng, n)


# ---------------------------------------------------------------------------
# Check runners: each returns (VerificationReport, csv_columns, csv_rows)
# ---------------------------------------------------------------------------


def _run_curvature_scan(cost, omega, lam, chk, seed):
    rep = scan_a3(
        cost, omega, lam,
        n_points=int(chk.get("n_points", 100)),
        n_frames=int(chk.get("n_frames", 8)),
        tol=float(chk.get("tol", 1e-6)),
        margin=float(chk.get("margin", 1e-4)),
        seed=seed,
        h_t=float(chk.get("h_t", 1e-3)),
    )
    verdict = VIOLATED if rep.verdict == "violated" else PASS
    out = VerificationReport(
        check_id="curvature_scan",
        verdict=verdict,
        n_samples=rep.n_samples,
        n_skipped=rep.n_skipped,
        worst_margin=rep.min_value,
        witnesses=[rep.argmin] if verdict == VIOLATED else [],
        details={"a3_verdict": rep.verdict, "c0_estimate": rep.c0_estimate},
        seed=seed,
    )
    rows = [(i, v) for i, v in enumerate(rep.values)]
    return out, ["sample", "curvature"], rows


def _configs_for(cost, omega, lam, chk, rng):
    if "x_m" in chk:
        for key in ("y0", "y1"):
            _expect(key in chk, "explicit config needs x_m, y0, y1", key)
        yield (_point(cost, chk["x_m"], "x_m"),
               _point(cost, chk["y0"], "y0"),
               _point(cost, chk["y1"], "y1"))
        return
    for _ in range(int(chk.get("n_configs", 8))):
        yield _sample_config(cost, omega, lam, rng)


def _run_dasm(cost, omega, lam, chk, seed):
    rng = np.random.default_rng(seed)
    tol = float(chk.get("tol", 1e-7))
    n_x = int(chk.get("n_x", 64))
    n_theta = int(chk.get("n_theta", 101))
    worst = -np.inf
    witnesses = []
    n_samples = n_skipped = 0
    rows = []
    for idx, (x_m, y0, y1) in enumerate(_configs_for(cost, omega, lam, chk, rng)):
        X = _x_samples(omega, rng, n_x)
        try:
            rep = dasm_check(cost, x_m, y0, y1, X, theta_grid=np.linspace(0, 1, n_theta),
                             tol=tol, strict=bool(chk.get("strict", False)), domain=lam)
        except MtwkitError:
            n_skipped += 1
            continue
        n_samples += rep.n_samples
        n_skipped += rep.n_skipped
        worst = max(worst, rep.worst_margin)
        witnesses.extend(rep.witnesses)
        rows.append((idx, rep.worst_margin, rep.verdict))
    verdict = PASS if (n_samples and not witnesses) else (VIOLATED if witnesses else INCONCLUSIVE)
    out = VerificationReport("dasm", verdict, n_samples, n_skipped,
                             float(worst) if np.isfinite(worst) else 0.0,
                             witnesses, seed=seed)
    return out, ["config", "worst_margin", "verdict"], rows


def _run_monotonicity(cost, omega, lam, chk, seed):
    rng = np.random.default_rng(seed)
    n_x = int(chk.get("n_x", 64))
    n_theta = int(chk.get("n_theta", 101))
    worst = np.inf
    witnesses = []
    n_samples = n_skipped = 0
    rows = []
    for idx, (x_m, y0, y1) in enumerate(_configs_for(cost, omega, lam, chk, rng)):
        X = _x_samples(omega, rng, n_x)
        try:
            rep = monotonicity_check(
                cost, x_m, y0, y1, X, theta_grid=np.linspace(0, 1, n_theta),
                tol_pos=float(chk.get("tol_pos", 1e-7)),
                tol_neg=float(chk.get("tol_neg", chk.get("tol", 1e-6))),
                strict=bool(chk.get("strict", False)), domain=lam)
        except MtwkitError:
            n_skipped += 1
            continue
        n_samples += rep.n_samples
        n_skipped += rep.n_skipped
        worst = min(worst, rep.worst_margin)
        witnesses.extend(rep.witnesses)
        rows.append((idx, rep.worst_margin, rep.verdict))
    verdict = PASS if (n_samples and not witnesses) else (VIOLATED if witnesses else INCONCLUSIVE)
    out = VerificationReport("monotonicity", verdict, n_samples, n_skipped,
                             float(worst) if np.isfinite(worst) else 0.0,
                             witnesses, seed=seed)
    return out, ["config", "worst_drop", "verdict"], rows


def _run_identity(cost, omega, lam, chk, seed):
    rng = np.random.default_rng(seed)
    tol = float(chk.get("tol", 1e-3))
    theta = float(chk.get("theta", 0.5))
    residuals = []
    rows = []
    n_skipped = 0
    for idx in range(int(chk.get("n_configs", 16))):
        x_m, y0, y1 = _sample_config(cost, omega, lam, rng)
        n = cost.manifold.dim
        eta = np.zeros(max(n - 1, 1))
        eta[0] = 1.0
        try:
            seg = build_c_segment(cost, x_m, y0, y1, n_theta=11, domain=lam)
            lhs, rhs, res = lemma62_check(
                cost, seg, theta, np.zeros(max(n - 1, 1)), eta,
                h_w=float(chk.get("h_w", 1e-3)), h_t=float(chk.get("h_t", 1e-3)))
        except MtwkitError:
            n_skipped += 1
            continue
        residuals.append(res)
        rows.append((idx, lhs, rhs, res))
    if not residuals:
        verdict = INCONCLUSIVE
        worst = 0.0
    else:
        worst = float(np.max(residuals))
        verdict = PASS if worst < tol else VIOLATED
    out = VerificationReport("identity", verdict, len(residuals), n_skipped, worst,
                             seed=seed)
    return out, ["config", "lhs", "rhs", "residual"], rows


def _potential_from(cost, omega, lam, chk, rng):
    if "support" in chk:
        support = []
        for k, entry in enumerate(chk["support"]):
            _expect(isinstance(entry, dict) and set(entry) <= {"y", "v"},
                    "support entry must have keys y, v", f"support[{k}]")
            support.append((_point(cost, entry["y"], f"support[{k}].y"),
                            float(entry["v"])))
        return DiscreteCPotential(cost, support, lam), None
    # Random two- or three-mountain potential normalized at a sampled x_m,
    # so x_m is a crease point where every mountain is active.
    x_m, y0, y1 = _sample_config(cost, omega, lam, rng)
    support = [(y0, -cost.value(x_m, y0)), (y1, -cost.value(x_m, y1))]
    if rng.random() < 0.5:
        _, y2, _ = _sample_config(cost, omega, lam, rng)
        support.append((y2, -cost.value(x_m, y2)))
    return DiscreteCPotential(cost, support, lam), x_m


def _z_grid(cost, omega, per_axis: int) -> np.ndarray:
    if omega.kind == "box":
        lo = np.asarray(omega.low, dtype=float)
        hi = np.asarray(omega.high, dtype=float)
        axes = [np.linspace(lo[k], hi[k], per_axis) for k in range(len(lo))]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)
    rng = np.random.default_rng(12345)  # fixed fill-in grid for non-box domains
    return omega.sample(rng, per_axis ** min(cost.manifold.dim, 2))


def _run_csis(cost, omega, lam, chk, seed):
    rng = np.random.default_rng(seed)
    tol = float(chk.get("tol", 1e-7))
    z = _z_grid(cost, omega, int(chk.get("z_per_axis", 33)))
    n_potentials = 1 if "support" in chk else int(chk.get("n_potentials", 8))
    worst = -np.inf
    witnesses = []
    n_samples = n_skipped = 0
    rows = []
    for idx in range(n_potentials):
        phi, x_m = _potential_from(cost, omega, lam, chk, rng)
        xs = [Point(cost.manifold, row) for row in _x_samples(omega, rng, int(chk.get("n_x", 8)))]
        xs = [x for x in xs if phi.admissible(x)]
        if x_m is not None:
            xs.insert(0, x_m)
        rep = csis_check(phi, xs, z,
                         n_hull_probes=int(chk.get("n_hull_probes", 8)),
                         tol=tol, seed=int(rng.integers(2**31)))
        n_samples += rep.n_samples
        n_skipped += rep.n_skipped
        worst = max(worst, rep.worst_margin)
        witnesses.extend(rep.witnesses)
        rows.append((idx, rep.worst_margin, rep.verdict))
    verdict = PASS if (n_samples and not witnesses) else (VIOLATED if witnesses else INCONCLUSIVE)
    out = VerificationReport("csis", verdict, n_samples, n_skipped,
                             float(worst) if np.isfinite(worst) else 0.0,
                             witnesses, seed=seed)
    return out, ["potential", "worst_margin", "verdict"], rows


def _run_connectivity(cost, omega, lam, chk, seed):
    rng = np.random.default_rng(seed)
    phi, x_m = _potential_from(cost, omega, lam, chk, rng)
    if "x" in chk:
        x = _point(cost, chk["x"], "x")
    elif x_m is not None:
        x = x_m
    else:
        raise ConfigError("connectivity with explicit support needs a query point", field="x")
    rep = connectivity_check(phi, x,
                             n_theta=int(chk.get("n_theta", 33)),
                             tol=float(chk.get("tol", 1e-6)))
    rep.seed = seed
    rows = [(w["theta"], w["gap"]) for w in rep.witnesses]
    return rep, ["theta", "gap"], rows


def _run_front_track(cost, omega, lam, chk, seed):
    rng = np.random.default_rng(seed)
    if "x_m" in chk:
        x_m = _point(cost, chk["x_m"], "x_m")
        y0 = _point(cost, chk["y0"], "y0")
        y1 = _point(cost, chk["y1"], "y1")
    else:
        x_m, y0, y1 = _sample_config(cost, omega, lam, rng)
    seg = build_c_segment(cost, x_m, y0, y1, domain=lam)
    field = MountainField(cost, seg)
    n = cost.manifold.dim
    w_mag = float(chk.get("w_mag", 0.3))
    thetas = [float(t) for t in chk.get("thetas", (0.25, 0.5, 0.75))]
    rows = []
    rates = []
    n_skipped = 0
    for theta in thetas:
        w_grid = [np.zeros(max(n - 1, 1))]
        for s in (-1.0, 1.0):
            w = np.zeros(max(n - 1, 1))
            w[0] = s * w_mag
            w_grid.append(w)
        for s in front_sample(cost, seg, theta, w_grid):
            if not s.reachable:
                n_skipped += 1
                continue
            rate = expansion_rate(cost, seg, theta, s.x_w)
            rates.append(rate)
            rows.append((theta, float(s.w[0]) if len(s.w) else 0.0, rate, s.df_residual))
    tol = float(chk.get("tol", 1e-5))
    try:
        w_start = np.zeros(max(n - 1, 1))
        w_start[0] = 0.5 * w_mag
        start = front_point(cost, seg, thetas[0], w_start)
        trajectory = front_ode_track(cost, seg, start.x_w,
                                     t_span=(thetas[0], thetas[-1]),
                                     dt=float(chk.get("dt", 1e-2)))
        drift = abs(field.df_dtheta(thetas[-1], trajectory[-1]))
        verdict = PASS if (rates and drift < tol) else (INCONCLUSIVE if not rates else VIOLATED)
    except MtwkitError:
        trajectory = []
        drift = float("nan")
        verdict = INCONCLUSIVE
    out = VerificationReport(
        "front_track", verdict, len(rates), n_skipped,
        worst_margin=float(np.min(rates)) if rates else 0.0,
        details={"trajectory_len": len(trajectory), "end_drift": drift},
        seed=seed)
    return out, ["theta", "w", "expansion_rate", "df_residual"], rows


_RUNNERS = {
    "curvature_scan": _run_curvature_scan,
    "dasm": _run_dasm,
    "monotonicity": _run_monotonicity,
    "identity": _run_identity,
    "csis": _run_csis,
    "connectivity": _run_connectivity,
    "front_track": _run_front_track,
}


def run_campaign(doc: dict, out_dir, only=None, seed_override=None, tol_override=None) -> int:
    cost = _build_cost(doc["cost"])
    omega = _build_domain(doc["omega"], cost.manifold, "omega")
    lam = _build_domain(doc["lambda"], cost.manifold, "lambda")
    master = int(seed_override if seed_override is not None else doc["seed"])
    checks = [c for c in doc["checks"] if only is None or c["check"] == only]
    if not checks:
        raise ConfigError(f"no checks of type {only!r} in config", field="checks")
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(master).spawn(len(checks))]
    out_dir = Path(out_dir)
    reports = []
    for i, (chk, seed) in enumerate(zip(checks, seeds)):
        chk = dict(chk)
        if tol_override is not None:
            chk["tol"] = tol_override
        t0 = time.perf_counter()
        rep, columns, rows = _RUNNERS[chk["check"]](cost, omega, lam, chk, seed)
        rep.wall_time = time.perf_counter() - t0
        reports.append(rep)
        dump_csv(rows, columns, out_dir / f"{i:02d}_{chk['check']}.csv")
    dump_report(reports, out_dir / "report.json", master)
    if any(r.verdict == VIOLATED for r in reports):
        return 1
    return 0


def list_catalog(stream=None) -> None:
    stream = stream or sys.stdout
    widths = [max(len(str(row[k])) for row in CATALOG_TABLE) for k in range(4)]
    header = ("id", "parameters", "singular set", "curvature condition")
    widths = [max(w, len(h)) for w, h in zip(widths, header)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    print(fmt.format(*header), file=stream)
    for row in CATALOG_TABLE:
        print(fmt.format(*row), file=stream)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtwkit",
        description="Verification toolkit for the geometry of cost-convex functions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    names = {
        "verify": None,
        "curvature-scan": "curvature_scan",
        "dasm": "dasm",
        "monotonicity": "monotonicity",
        "identity": "identity",
        "csis": "csis",
        "connectivity": "connectivity",
        "front-track": "front_track",
    }
    for cmd in names:
        p = sub.add_parser(cmd)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out-dir", default="mtwkit_out")
        p.add_argument("--tol", type=float, default=None)
        p.set_defaults(only=names[cmd])
    sub.add_parser("catalog")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "catalog":
        list_catalog()
        return 0
    try:
        doc = load_config(args.config)
        return run_campaign(doc, args.out_dir, only=args.only,
                            seed_override=args.seed, tol_override=args.tol)
    except ConfigError as exc:
        field = f" (field: {exc.field})" if exc.field else ""
        print(f"mtwkit: config error: {exc}{field}", file=sys.stderr)
        return 2
    except MtwkitError as exc:
        print(f"mtwkit: runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
