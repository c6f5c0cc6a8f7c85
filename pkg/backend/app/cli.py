"""rgc-dim: command-line front end for sampling, dimension computation, analytics and experiments.

Parameters resolve as: built-in defaults < environment / .env < --config JSON < flags.
Every result file starts with the tool version, the seed and the resolved config.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ValidationError

from app.core.config import settings
from app.core.exceptions import InstanceTooLargeError, ParameterValidationError, RGCError
from app.core.logging_config import configure_logging
from app.models.analytics import RegimeKind, RegimeSpec
from app.models.complexes import ComplexKind
from app.models.experiment import ExperimentConfig, RhoRule, RhoRuleKind
from app.models.pointprocess import PointConfiguration, Window, WindowShape
from app.services import analytics, complexes, montecarlo, oracle
from app.services.geometry import build_adjacency
from app.services.pointprocess import sample_poisson

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

COLUMNS = ["t", "rho", "r_t", "statistic", "value", "stderr", "trials", "seed"]
# flags that steer the run but never change its results
_RUNTIME_KEYS = {"config", "format", "out", "verbosity", "workers", "command"}


class CommandResult(BaseModel):
    config: Dict[str, Any]
    rows: List[Dict[str, Any]] = []
    records: Optional[List[Dict[str, Any]]] = None
    text: Optional[str] = None
    ok: bool = True


# ---------------------------------------------------------------------------
# Argument types
# ---------------------------------------------------------------------------

def _number(value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}")


def _count(value: str) -> int:
    if value.strip().isdigit():
        return int(value)
    number = _number(value)
    if not number.is_integer() or number < 0:
        raise argparse.ArgumentTypeError(f"not a nonnegative integer: {value!r}")
    return int(number)


def _number_list(value: str) -> List[float]:
    return [_number(part) for part in value.split(",") if part.strip()]


def _count_list(value: str) -> List[int]:
    return [_count(part) for part in value.split(",") if part.strip()]


def _row(statistic: str, value, stderr=None, t=None, rho=None, r_t=None, trials=None, seed=None) -> Dict[str, Any]:
    return {"t": t, "rho": rho, "r_t": r_t, "statistic": statistic, "value": value, "stderr": stderr,
            "trials": trials, "seed": seed}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "PASS" if value else "FAIL"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    return str(value)


def _require(cfg: Dict[str, Any], *keys: str) -> None:
    for key in keys:
        if cfg.get(key) is None:
            raise ParameterValidationError(f"missing required parameter '{key}'")


def _as_list(value) -> List:
    return value if isinstance(value, list) else [value]


def _window(cfg: Dict[str, Any]) -> Window:
    d = int(cfg["d"])
    shape = cfg.get("shape") or (WindowShape.unit_interval.value if d == 1 else WindowShape.unit_cube.value)
    return Window(dim=d, shape=WindowShape(shape))


def _rho_rule(cfg: Dict[str, Any]) -> RhoRule:
    rule = cfg.get("rho_rule")
    if isinstance(rule, dict):
        return RhoRule(**rule)
    if rule is not None:
        return RhoRule(kind=RhoRuleKind(rule), c=cfg.get("c", 1.0), alpha=cfg.get("alpha", 0.0),
                       gamma=cfg.get("gamma", 2.0))
    _require(cfg, "rho")
    return RhoRule(kind=RhoRuleKind.constant, c=cfg["rho"])


def _experiment_config(cfg: Dict[str, Any]) -> ExperimentConfig:
    _require(cfg, "t", "trials")
    return ExperimentConfig(window=_window(cfg), complex=ComplexKind.parse(cfg.get("complex", "vr")),
                            t_values=[float(t) for t in _as_list(cfg["t"])], rho_rule=_rho_rule(cfg),
                            trials=cfg["trials"], master_seed=cfg.get("seed", 0), target_k=cfg.get("k"),
                            moments=cfg.get("moments", [1, 2]), n_max=cfg.get("n_max"),
                            regime=cfg.get("regime"))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _load_configuration(cfg: Dict[str, Any]) -> PointConfiguration:
    if cfg.get("points"):
        with open(cfg["points"], "r", encoding="utf-8") as handle:
            return PointConfiguration.from_text(handle.read())
    _require(cfg, "t")
    return sample_poisson(_window(cfg), float(cfg["t"]), cfg.get("seed", 0), cfg.get("trial_index", 0))


def _radius(cfg: Dict[str, Any], config: PointConfiguration) -> float:
    if cfg.get("r") is not None:
        return float(cfg["r"])
    _require(cfg, "rho")
    return (cfg["rho"] / config.meta.intensity) ** (1.0 / config.dim)


def cmd_sample(cfg: Dict[str, Any]) -> CommandResult:
    _require(cfg, "t")
    config = sample_poisson(_window(cfg), float(cfg["t"]), cfg["seed"], cfg.get("trial_index", 0))
    return CommandResult(config=cfg, text=config.to_text(), records=[config.model_dump(mode="json")])


def cmd_dim(cfg: Dict[str, Any]) -> CommandResult:
    config = _load_configuration(cfg)
    r = _radius(cfg, config)
    kind = ComplexKind.parse(cfg.get("complex", "vr"))
    common = {"t": config.meta.intensity, "r_t": r, "seed": config.meta.seed}
    rows = [_row("point_count", config.n, **common),
            _row(f"{kind.value}_dimension", complexes.dimension(config, r, kind), **common)]
    return CommandResult(config=cfg, rows=rows)


def cmd_fvector(cfg: Dict[str, Any]) -> CommandResult:
    config = _load_configuration(cfg)
    r = _radius(cfg, config)
    kind = ComplexKind.parse(cfg.get("complex", "vr"))
    counts = complexes.f_vector(config, r, kind, cfg.get("n_max", 3))
    common = {"t": config.meta.intensity, "r_t": r, "seed": config.meta.seed}
    return CommandResult(config=cfg, rows=[_row(f"f_{n}", f_n, **common) for n, f_n in enumerate(counts)])


def cmd_predict(cfg: Dict[str, Any]) -> CommandResult:
    _require(cfg, "regime", "t", "rho")
    spec = RegimeSpec(d=cfg.get("d", 1), t=cfg["t"], rho=cfg["rho"], regime=cfg["regime"], B=cfg.get("B"))
    record = analytics.predict_dimension(spec, kind=ComplexKind.parse(cfg.get("complex", "vr")))
    common = {"t": spec.t, "rho": spec.rho, "r_t": spec.r_t}
    rows = [_row("prediction", record.prediction, **common)]
    if record.k is not None:
        rows.append(_row("k", record.k, **common))
        rows.append(_row("lambda", record.lam, **common))
    if record.beta is not None:
        rows.append(_row("beta", record.beta, **common))
    return CommandResult(config=cfg, rows=rows, records=[record.model_dump(mode="json")])


def cmd_pq(cfg: Dict[str, Any]) -> CommandResult:
    _require(cfg, "rho", "k")
    rho, trials, seed = float(cfg["rho"]), cfg.get("trials", 0), cfg.get("seed", 0)
    rows = []
    for k in _as_list(cfg["k"]):
        pair = analytics.scan_pair(rho, k)
        rows.append(_row(f"p_exact[k={k}]", pair.p, rho=rho))
        rows.append(_row(f"q_upper[k={k}]", pair.q_upper, rho=rho))
        if trials:
            est = montecarlo.mc_pq(rho, k, trials, seed)
            rows.append(_row(f"p_hat[k={k}]", est.p_hat, est.p_stderr, rho=rho, trials=trials, seed=seed))
            rows.append(_row(f"q_hat[k={k}]", est.q_hat, est.q_stderr, rho=rho, trials=trials, seed=seed))
            p_ok = abs(est.p_hat - pair.p) <= 3 * est.p_stderr + 1e-12
            q_ok = est.q_hat <= pair.q_upper + 3 * est.q_stderr
            rows.append(_row(f"p_check[k={k}]", p_ok, rho=rho, trials=trials, seed=seed))
            rows.append(_row(f"q_check[k={k}]", q_ok, rho=rho, trials=trials, seed=seed))
    return CommandResult(config=cfg, rows=rows)


def cmd_gumbel(cfg: Dict[str, Any]) -> CommandResult:
    _require(cfg, "t", "rho")
    t, rho = float(cfg["t"]), float(cfg["rho"])
    trials, seed = cfg.get("trials", 0), cfg.get("seed", 0)
    constants = analytics.gumbel_constants(t, rho)
    xs = _as_list(cfg.get("x", 0.0))
    rows = [_row("a_t", constants.a, t=t, rho=rho), _row("b_t", constants.b, t=t, rho=rho)]
    for x in xs:
        rows.append(_row(f"k_t[x={x:g}]", analytics.k_t(t, rho, x), t=t, rho=rho))
        rows.append(_row(f"epsilon_t[x={x:g}]", analytics.epsilon_t(t, rho, x), t=t, rho=rho))
        rows.append(_row(f"gumbel_cdf[x={x:g}]", analytics.gumbel_cdf(x), t=t, rho=rho))
    records = None
    if trials:
        sim = montecarlo.simulate_standardized_dimension(t, rho, xs, trials, seed)
        common = {"t": t, "rho": rho, "r_t": rho / t, "trials": trials, "seed": seed}
        rows.append(_row("standardized_mean", sim.mean, **common))
        for point in sim.points:
            rows.append(_row(f"empirical_cdf[x={point.x:g}]", point.empirical, point.stderr, **common))
        records = [sim.model_dump(mode="json")]
    return CommandResult(config=cfg, rows=rows, records=records)


def cmd_ldp(cfg: Dict[str, Any], workers: Optional[int]) -> CommandResult:
    _require(cfg, "regime", "a")
    regime = RegimeKind(cfg["regime"])
    a = float(cfg["a"])
    rows = [_row("rate", analytics.ldp_rate(regime, a, cfg.get("B")))]
    if cfg.get("trials") and cfg.get("t") is not None:
        config = _experiment_config(cfg)
        for est in montecarlo.estimate_ldp_rate(config, a, regime, workers=workers):
            common = {"t": est.t, "rho": config.rho(est.t), "r_t": config.radius(est.t), "trials": config.trials,
                      "seed": config.master_seed}
            rows.append(_row("n_t", est.n_t, **common))
            rows.append(_row("m_t", est.m_t, **common))
            rows.append(_row("tail_probability", est.probability, **common))
            rows.append(_row("rate_estimate_floor" if est.floored else "rate_estimate", est.estimate,
                             None if est.floored else est.stderr, **common))
    return CommandResult(config=cfg, rows=rows)


def cmd_experiment(cfg: Dict[str, Any], workers: Optional[int]) -> CommandResult:
    config = _experiment_config(cfg)
    summaries = montecarlo.run_dimension_experiment(config, workers=workers)
    rows = []
    for summary in summaries:
        common = {"t": summary.t, "rho": summary.rho, "r_t": summary.r_t, "trials": summary.trials,
                  "seed": summary.seed}
        for moment in summary.moments:
            rows.append(_row(f"moment_{moment.m}", moment.value, moment.stderr, **common))
        for dim, prob in summary.pmf.items():
            rows.append(_row(f"p_dimension[{dim}]", prob, math.sqrt(prob * (1 - prob) / summary.trials), **common))
        if summary.two_point_mass is not None:
            rows.append(_row(f"two_point_mass[k={summary.two_point_k}]", summary.two_point_mass, **common))
        rows.append(_row("max_dimension", summary.max_dimension, **common))
        rows.append(_row("max_fixed_ball_count", summary.max_fixed_ball_count, **common))
    return CommandResult(config=cfg, rows=rows, records=[s.model_dump(mode="json") for s in summaries])


def _instances(seed: int, check: int, count: int, d: int, low: int, high: int):
    for i in range(count):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(check, i)))
        n = int(rng.integers(low, high + 1))
        yield PointConfiguration.from_points(rng.random((n, d)), dim=d, seed=seed, trial_index=i)


def run_verification(trials: int, seed: int) -> List[Dict[str, Any]]:
    """Reduced oracle cross-checks; one entry per check with its mismatch count."""
    checks = []

    def record(name: str, ok: bool, detail: str) -> None:
        checks.append({"check": name, "passed": bool(ok), "detail": detail})
        logger.info(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")

    for check_id, d in ((0, 1), (1, 2)):
        bad = sum(complexes.vr_dimension(cfg, 0.3) + 1 != oracle.brute_max_clique(build_adjacency(cfg, 0.3))
                  for cfg in _instances(seed, check_id, trials, d, 1, 20))
        record(f"vr_clique_oracle_d{d}", bad == 0, f"{bad} mismatches in {trials} instances")
    bad = sum(complexes.cech_dimension(cfg, 0.3) + 1 != oracle.brute_cech_count(cfg.points, 0.3)
              for cfg in _instances(seed, 2, trials, 2, 1, 16))
    record("cech_oracle_d2", bad == 0, f"{bad} mismatches in {trials} instances")
    bad = sum(complexes.cech_dimension_1d(cfg, 0.2) + 1 != oracle.brute_cech_count(cfg.points, 0.2)
              for cfg in _instances(seed, 3, trials, 1, 1, 20))
    record("cech_1d_oracle", bad == 0, f"{bad} mismatches in {trials} instances")

    cases = [(n, m, k) for k in range(1, 13) for n in range(k) for m in range(k) if k <= n + m <= 12]
    bad = sum(analytics.ballot_reach_probability(n, m, k) != oracle.enumerate_ballot(n, m, k) for n, m, k in cases)
    record("ballot_identity", bad == 0, f"{bad} mismatches in {len(cases)} cases")

    for n in (2, 3):
        exact = oracle.quadrature_mu_n(1, n)
        estimate, stderr = analytics.mu_n_estimate(1, n, samples=50_000, seed=seed)
        record(f"mu_{n}_quadrature", abs(estimate - exact) <= 4 * stderr,
               f"estimate {estimate:.5f} +- {stderr:.5f}, quadrature {exact:.8f}")

    bad = sum(abs(analytics.pk_from_ballot(5.0, k) - analytics.pk_exact(5.0, k)) > 1e-10 for k in range(0, 13))
    record("pk_closed_form", bad == 0, f"{bad} mismatches for rho=5, k=0..12")

    fixed_points = [
        analytics.solve_beta(0.0) == 1.0,
        abs(analytics.solve_beta(1.0) - math.e) < 1e-12,
        analytics.ldp_rate(RegimeKind.dense, 1.0) == 0.0,
        analytics.ldp_rate(RegimeKind.intermediate, 2.0) == 1.0,
        abs(analytics.gumbel_constants(math.e * 50.0, 50.0).b - math.sqrt(25.0)) < 1e-12,
        abs(analytics.pk_exact(math.log(2.0), 1) - 0.75) < 1e-12,
        abs(analytics.corollary_cdf(0.0) - (0.25 - 1 / (2 * math.pi))) < 1e-12,
    ]
    record("analytic_fixed_points", all(fixed_points), f"{sum(fixed_points)}/{len(fixed_points)} exact")
    return checks


def cmd_verify(cfg: Dict[str, Any]) -> CommandResult:
    checks = run_verification(cfg.get("trials", 50), cfg.get("seed", 0))
    lines = [f"{'PASS' if c['passed'] else 'FAIL'} {c['check']}: {c['detail']}" for c in checks]
    return CommandResult(config=cfg, records=checks, text="\n".join(lines) + "\n",
                         ok=all(c["passed"] for c in checks))


# subcommand -> (handler, defaults, takes workers)
COMMANDS: Dict[str, Any] = {
    "sample": (cmd_sample, {"d": 1, "shape": None, "t": None, "seed": 0, "trial_index": 0}, False),
    "dim": (cmd_dim, {"d": 1, "shape": None, "t": None, "rho": None, "r": None, "complex": "vr", "points": None,
                      "seed": 0, "trial_index": 0}, False),
    "fvector": (cmd_fvector, {"d": 1, "shape": None, "t": None, "rho": None, "r": None, "complex": "vr",
                              "points": None, "seed": 0, "trial_index": 0, "n_max": 3}, False),
    "predict": (cmd_predict, {"regime": None, "d": 1, "t": None, "rho": None, "B": None, "complex": "vr"}, False),
    "pq": (cmd_pq, {"rho": None, "k": None, "trials": 0, "seed": 0}, False),
    "gumbel": (cmd_gumbel, {"t": None, "rho": None, "x": [0.0], "trials": 0, "seed": 0}, False),
    "ldp": (cmd_ldp, {"regime": None, "a": None, "B": None, "d": 1, "shape": None, "complex": "vr", "t": None,
                      "rho": None, "rho_rule": None, "c": 1.0, "alpha": 0.0, "gamma": 2.0, "trials": 0,
                      "seed": 0}, True),
    "experiment": (cmd_experiment, {"d": 1, "shape": None, "complex": "vr", "t": None, "rho": None,
                                    "rho_rule": None, "c": 1.0, "alpha": 0.0, "gamma": 2.0, "trials": None,
                                    "seed": 0, "k": None, "n_max": None, "moments": [1, 2], "regime": None}, True),
    "verify": (cmd_verify, {"trials": 50, "seed": 0}, False),
}


# ---------------------------------------------------------------------------
# Parser, resolution and output
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with parameters; flags override its values")
    common.add_argument("--format", choices=["csv", "json"], help="output format (default from RGC_OUTPUT_FORMAT)")
    common.add_argument("--out", help="output file; stdout when omitted")
    common.add_argument("--verbosity", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="log level")
    common.add_argument("--workers", type=_count, help="worker processes for experiment trials")
    common.add_argument("--seed", type=_count, help="master seed (u64)")

    parser = argparse.ArgumentParser(prog=settings.tool_name,
                                     description="Dimension of random Vietoris-Rips and Čech complexes")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=help_text)

    def sampling_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--d", type=_count, help="dimension of the window")
        p.add_argument("--shape", choices=[s.value for s in WindowShape])
        p.add_argument("--t", type=_number, help="intensity")
        p.add_argument("--trial-index", dest="trial_index", type=_count)

    p = add("sample", "dump one Poisson configuration")
    sampling_flags(p)

    for name, help_text in (("dim", "dimension of a supplied or sampled configuration"),
                            ("fvector", "truncated f-vector")):
        p = add(name, help_text)
        sampling_flags(p)
        p.add_argument("--rho", type=_number, help="density t * r^d (alternative to --r)")
        p.add_argument("--r", type=_number, help="distance parameter")
        p.add_argument("--complex", help="vr or cech")
        p.add_argument("--points", help="configuration file in the sample text format")
        if name == "fvector":
            p.add_argument("--n-max", dest="n_max", type=_count)

    p = add("predict", "regime predictors for the dimension")
    p.add_argument("--regime", choices=[r.value for r in RegimeKind])
    p.add_argument("--d", type=_count)
    p.add_argument("--t", type=_number)
    p.add_argument("--rho", type=_number)
    p.add_argument("--B", type=_number)
    p.add_argument("--complex")

    p = add("pq", "exact scan probabilities against direct simulation")
    p.add_argument("--rho", type=_number)
    p.add_argument("--k", type=_count_list, help="comma-separated thresholds")
    p.add_argument("--trials", type=_count)

    p = add("gumbel", "Gumbel centring and scaling constants")
    p.add_argument("--t", type=_number)
    p.add_argument("--rho", type=_number)
    p.add_argument("--x", type=_number_list, help="comma-separated x values")
    p.add_argument("--trials", type=_count, help="simulate D on [0, 1] and report its empirical CDF")

    for name, help_text in (("ldp", "rate function and empirical rate estimates"),
                            ("experiment", "Monte Carlo dimension experiment")):
        p = add(name, help_text)
        p.add_argument("--d", type=_count)
        p.add_argument("--shape", choices=[s.value for s in WindowShape])
        p.add_argument("--complex")
        p.add_argument("--t", type=_number_list, help="comma-separated intensities")
        p.add_argument("--rho", type=_number, help="constant rho")
        p.add_argument("--rho-rule", dest="rho_rule", choices=[k.value for k in RhoRuleKind if k != RhoRuleKind.table])
        p.add_argument("--c", type=_number)
        p.add_argument("--alpha", type=_number)
        p.add_argument("--gamma", type=_number)
        p.add_argument("--trials", type=_count)
        p.add_argument("--regime", choices=[r.value for r in RegimeKind])
        if name == "ldp":
            p.add_argument("--a", type=_number, help="threshold multiplier of n_t")
            p.add_argument("--B", type=_number)
        else:
            p.add_argument("--k", type=_count, help="k at which the two-point mass is reported")
            p.add_argument("--n-max", dest="n_max", type=_count)

    p = add("verify", "oracle cross-check suite")
    p.add_argument("--trials", type=_count, help="instances per check")
    return parser


def resolve(args: argparse.Namespace) -> Dict[str, Any]:
    """Merge defaults, the JSON config file and explicit flags for the chosen subcommand."""
    _, defaults, _ = COMMANDS[args.command]
    cfg = dict(defaults)
    if args.config:
        with open(args.config, "r", encoding="utf-8") as handle:
            from_file = json.load(handle)
        if not isinstance(from_file, dict):
            raise ParameterValidationError("config file must hold a JSON object")
        for key, value in from_file.items():
            if key not in cfg:
                raise ParameterValidationError(f"unknown config key '{key}' for '{args.command}'")
            cfg[key] = value
    for key, value in vars(args).items():
        if key in _RUNTIME_KEYS or value is None:
            continue
        cfg[key] = value
    return cfg


def _header_config(cfg: Dict[str, Any]) -> Dict[str, Any]:
    return {"tool": settings.tool_name, "version": settings.tool_version, **cfg}


def render(result: CommandResult, fmt: str) -> str:
    header = _header_config(result.config)
    seed = result.config.get("seed", 0)
    if fmt == "json":
        payload = {"config": header, "results": result.records if result.records is not None else result.rows}
        return json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n"
    buffer = io.StringIO()
    buffer.write(f"# {settings.tool_name} v{settings.tool_version} seed={seed}\n")
    buffer.write(f"# config={json.dumps(header, sort_keys=True, separators=(',', ':'), default=str)}\n")
    if result.text is not None:
        buffer.write(result.text)
        return buffer.getvalue()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in result.rows:
        writer.writerow([_fmt(row.get(column)) for column in COLUMNS])
    return buffer.getvalue()


def write_output(text: str, path: Optional[str]) -> None:
    """Write atomically: a temporary file in the target directory, then a rename."""
    if not path:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".rgc-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _validation_message(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        key = ".".join(str(item) for item in error.get("loc", ())) or "<root>"
        parts.append(f"'{key}': {error.get('msg')}")
    return "invalid configuration: " + "; ".join(parts)


def run_cli(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    configure_logging(args.verbosity)
    handler, _, takes_workers = COMMANDS[args.command]
    try:
        cfg = resolve(args)
        fmt = args.format or settings.output_format
        result = handler(cfg, args.workers) if takes_workers else handler(cfg)
        write_output(render(result, fmt), args.out)
    except ValidationError as exc:
        logger.error(_validation_message(exc))
        return EXIT_CONFIG
    except (ParameterValidationError, InstanceTooLargeError, json.JSONDecodeError, FileNotFoundError,
            ValueError) as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return EXIT_CONFIG
    except RGCError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return EXIT_FAILURE
    except Exception as exc:
        logger.critical(f"unexpected error: {exc}", exc_info=True)
        return EXIT_FAILURE
    return EXIT_OK if result.ok else EXIT_FAILURE


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
