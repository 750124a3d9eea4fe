"""Command-line driver: ``rigdeg {limit,simulate,compare,coupling,convergence}``.

Every command reads an optional JSON config (``--config``); flags override its
fields.  Outputs are CSV tables plus JSON reports in ``--out-dir``, and a
``result.json`` record listing them.

Exit codes: 0 pass, 1 statistical fail, 2 usage or configuration error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


from rigdeg.coupling import TruncationConfig, simulate_coupled, tail_bound, verify_tail_bound
from rigdeg.distributions.limits import limit_inhomogeneous, limit_passive
from rigdeg.distributions.pmf import DEFAULT_MAX_SUPPORT, DEFAULT_TAIL_TOL, DiscretePMF
from rigdeg.distributions.spec import parse_spec
from rigdeg.errors import ConfigError, InvariantViolation, RigdegError
from rigdeg.models import DegreeBatch, InhomogeneousConfig, PassiveConfig, simulate_degrees
from rigdeg.stats import compare, empirical_pmf, write_plot_data

log = logging.getLogger("rigdeg")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_INVARIANT = 0, 1, 2, 3
DEFAULT_BUDGET = 1e10
# fields that change where or how fast a run happens, not what it computes
_UNHASHED = ("out_dir", "threads")
_SAMPLE_FIELDS = ("model", "n", "m", "p1", "p2", "p", "reps", "seed")


@dataclass
class ExperimentConfig:
    model: str = "inhomogeneous"
    n: int | None = None
    m: int | None = None
    beta: float | None = None
    p1: str | None = None
    p2: str | None = None
    p: str | None = None
    reps: int = 1000
    seed: int = 0
    M: float | None = None
    tail_tol: float = DEFAULT_TAIL_TOL
    alpha: float = 0.01
    max_support: int = DEFAULT_MAX_SUPPORT
    budget: float = DEFAULT_BUDGET
    n_grid: list[int] | None = None
    out_dir: str = "rigdeg-out"
    threads: int = 1
    base_dir: str | None = field(default=None, repr=False, compare=False)

    # ---- construction ---------------------------------------------------

    @classmethod
    def from_sources(cls, path: str | None, overrides: dict) -> ExperimentConfig:
        doc: dict = {}
        base_dir = None
        if path is not None:
            p = Path(path)
            try:
                doc = json.loads(p.read_text())
            except FileNotFoundError as exc:
                raise ConfigError(f"config file {path} not found") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
            if not isinstance(doc, dict):
                raise ConfigError("config file must hold a JSON object")
            base_dir = str(p.parent)
            if "trunc_M" in doc:
                doc["M"] = doc.pop("trunc_M")
        known = {f.name for f in fields(cls)} - {"base_dir"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if overrides.get("m") is not None and overrides.get("beta") is not None:
            raise ConfigError("give only one of --m and --beta")
        # a flag for m or beta replaces whichever of the two the file set
        if overrides.get("m") is not None:
            doc.pop("beta", None)
        if overrides.get("beta") is not None:
            doc.pop("m", None)
        doc.update({k: v for k, v in overrides.items() if v is not None})
        cfg = cls(**doc, base_dir=base_dir)
        cfg.validate()
        return cfg

    def validate(self):
        if self.model not in ("inhomogeneous", "passive"):
            raise ConfigError(f"model must be 'inhomogeneous' or 'passive', got {self.model!r}")
        if self.n is None and self.n_grid:
            self.n = int(self.n_grid[-1])
        if self.n is None:
            raise ConfigError("n is required")
        if (self.m is None) == (self.beta is None):
            raise ConfigError("exactly one of m and beta must be given")
        if self.beta is not None and not (self.beta > 0 and math.isfinite(self.beta)):
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if int(self.reps) < 1:
            raise ConfigError(f"reps must be >= 1, got {self.reps}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.tail_tol > 0:
            raise ConfigError(f"tail_tol must be positive, got {self.tail_tol}")
        if self.M is not None:
            TruncationConfig(self.M)
        needed = ("p1", "p2") if self.model == "inhomogeneous" else ("p",)
        for name in needed:
            if getattr(self, name) is None:
                raise ConfigError(f"{self.model} model needs distribution '{name}'")
            self.spec(name)
        for name in {"p1", "p2", "p"} - set(needed):
            if getattr(self, name) is not None:
                raise ConfigError(f"distribution '{name}' does not apply to the {self.model} model")

    # ---- derived quantities ---------------------------------------------

    def spec(self, name: str):
        return parse_spec(getattr(self, name), self.base_dir)

    def m_for(self, n: int) -> int:
        return int(self.m) if self.m is not None else int(round(self.beta * n))

    def beta_for(self, n: int) -> float:
        return float(self.beta) if self.beta is not None else self.m_for(n) / n

    def model_config(self, n: int | None = None):
        n = int(self.n if n is None else n)
        m = self.m_for(n)
        if self.model == "inhomogeneous":
            return InhomogeneousConfig(n, m, self.spec("p1"), self.spec("p2"))
        return PassiveConfig.capped(n, m, self.spec("p"))

    def limit(self, n: int | None = None):
        """Limit model, with tables covering every degree a graph of this size can realize."""
        n = int(self.n if n is None else n)
        mc = self.model_config(n)
        beta = self.beta_for(n)
        if self.model == "inhomogeneous":
            return limit_inhomogeneous(mc.p1, mc.p2, beta, self.tail_tol, self.max_support, min_support=mc.n)
        return limit_passive(self.spec("p"), beta, self.tail_tol, self.max_support, min_support=mc.m)

    def canonical(self) -> dict:
        doc = asdict(self)
        doc.pop("base_dir")
        for key in _UNHASHED:
            doc.pop(key)
        for name in ("p1", "p2", "p"):
            if doc[name] is not None:
                doc[name] = self.spec(name).to_text()
        return doc

    def hash(self, keys=None) -> str:
        doc = self.canonical()
        if keys is not None:
            doc = {k: doc[k] for k in keys}
            doc["m"] = self.m_for(self.n)
        text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def sample_hash(self) -> str:
        """Hash of the fields the degree batch depends on."""
        return self.hash(_SAMPLE_FIELDS)


@dataclass
class ResultRecord:
    experiment_id: str
    config_hash: str
    outputs: dict
    wall_time_s: float
    verdict: str | None = None

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "result.json"
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path


def write_pmf_csv(path: Path, pmf: DiscretePMF):
    with path.open("w") as fh:
        fh.write("r,probability\n")
        for r, q in zip(pmf.support.tolist(), pmf.probs.tolist()):
            fh.write(f"{r},{q!r}\n")


def _check_budget(cfg: ExperimentConfig, grid=None):
    total = 0.0
    for n in grid or [cfg.n]:
        total += cfg.reps * cfg.model_config(n).expected_trials()
    if total > cfg.budget:
        raise ConfigError(
            f"run needs about {total:.3g} Bernoulli trials, above the budget of {cfg.budget:.3g}; raise --budget to proceed"
        )


# ---- subcommands ----------------------------------------------------------


def cmd_limit(cfg: ExperimentConfig, out: Path) -> tuple[int, dict]:
    lim = cfg.limit()
    outputs, meta = {}, {}
    for name, pmf in lim.tables().items():
        path = out / f"{name}.csv"
        write_pmf_csv(path, pmf)
        outputs[name] = str(path)
        meta[name] = {"offset": pmf.offset, "end": pmf.end, "tail_mass": pmf.tail_mass, "mean": pmf.mean}
    meta_path = out / "limit.json"
    meta_path.write_text(json.dumps({"beta": lim.beta, "tables": meta}, indent=2, sort_keys=True) + "\n")
    outputs["summary"] = str(meta_path)
    return EXIT_PASS, outputs


def _simulate(cfg: ExperimentConfig) -> DegreeBatch:
    _check_budget(cfg)
    return simulate_degrees(cfg.model_config(), cfg.reps, cfg.seed, cfg.threads)


def cmd_simulate(cfg: ExperimentConfig, out: Path) -> tuple[int, dict]:
    batch = _simulate(cfg)
    path = batch.to_csv(out / "degrees.csv", extra={"sample_hash": cfg.sample_hash()})
    return EXIT_PASS, {"degrees": str(path), "sidecar": str(path.with_suffix(".json"))}


def cmd_compare(cfg: ExperimentConfig, out: Path, degrees: str | None = None) -> tuple[int, dict]:
    if degrees is not None:
        batch = DegreeBatch.from_csv(degrees)
        sidecar = json.loads(Path(degrees).with_suffix(".json").read_text())
        if sidecar.get("sample_hash") != cfg.sample_hash():
            raise ConfigError(f"{degrees} was produced by a different configuration (config hash mismatch)")
    else:
        batch = _simulate(cfg)
        batch.to_csv(out / "degrees.csv", extra={"sample_hash": cfg.sample_hash()})
    lim = cfg.limit()
    emp = empirical_pmf(batch)
    report = compare(emp, lim.pmf_dstar, cfg.alpha, metadata={"config_hash": cfg.hash(), "seed": cfg.seed})
    rpath, ppath = out / "comparison.json", out / "plot_data.csv"
    report.to_json(rpath)
    write_plot_data(ppath, emp, lim.pmf_dstar)
    log.info("ks=%.5f band=%.5f+%.3g -> %s", report.ks, report.dkw_epsilon, report.tail_mass, report.verdict)
    return (EXIT_PASS if report.passed else EXIT_FAIL), {"report": str(rpath), "plot_data": str(ppath)}


def cmd_coupling(cfg: ExperimentConfig, out: Path) -> tuple[int, dict]:
    if cfg.M is None:
        raise ConfigError("the coupling command needs a truncation level (--trunc-M)")
    _check_budget(cfg)
    mc = cfg.model_config()
    trunc = TruncationConfig(cfg.M)
    batch = simulate_coupled(mc, trunc, cfg.reps, cfg.seed, cfg.threads)
    bound = tail_bound(mc, trunc.M)
    report = verify_tail_bound(batch, bound)
    cpath, rpath = out / "coupled.csv", out / "coupling_report.json"
    batch.to_csv(cpath)
    report.to_json(rpath, extra={"M": trunc.M, "config_hash": cfg.hash()})
    return (EXIT_PASS if report.verdict == "pass" else EXIT_FAIL), {"coupled": str(cpath), "report": str(rpath)}


def cmd_convergence(cfg: ExperimentConfig, out: Path) -> tuple[int, dict]:
    grid = cfg.n_grid
    if not grid or len(grid) < 3:
        raise ConfigError("convergence needs a grid of at least 3 values of n (--n-grid)")
    grid = [int(v) for v in grid]
    _check_budget(cfg, grid)
    rows = []
    for n in grid:
        mc = cfg.model_config(n)
        batch = simulate_degrees(mc, cfg.reps, cfg.seed, cfg.threads)
        report = compare(empirical_pmf(batch), cfg.limit(n).pmf_dstar, cfg.alpha)
        rows.append((n, report.ks, report.dkw_epsilon, report.tail_mass, report.verdict))
        log.info("n=%d ks=%.5f eps=%.5f %s", n, report.ks, report.dkw_epsilon, report.verdict)
    path = out / "convergence.csv"
    with path.open("w") as fh:
        fh.write("n,ks,dkw_epsilon,tail_mass,verdict\n")
        for n, ks, eps, tail, verdict in rows:
            fh.write(f"{n},{ks!r},{eps!r},{tail!r},{verdict}\n")
    return (EXIT_PASS if rows[-1][-1] == "pass" else EXIT_FAIL), {"table": str(path)}


COMMANDS = {
    "limit": cmd_limit,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "coupling": cmd_coupling,
    "convergence": cmd_convergence,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config; flags override its fields")
    common.add_argument("--model", choices=["inhomogeneous", "passive"])
    common.add_argument("--p1", help="attribute weight law, e.g. pareto:1.5,1")
    common.add_argument("--p2", help="vertex weight law, e.g. constant:1")
    common.add_argument("--p", help="set-size law for the passive model, e.g. truncated-zeta:2.3333,1000000")
    common.add_argument("--n", type=int)
    common.add_argument("--m", type=int)
    common.add_argument("--beta", type=float)
    common.add_argument("--reps", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--trunc-M", dest="M", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--tail-tol", type=float)
    common.add_argument("--max-support", type=int)
    common.add_argument("--budget", type=float, help="cap on expected Bernoulli trials")
    common.add_argument("--n-grid", type=lambda s: [int(float(v)) for v in s.split(",")],
                        help="comma-separated values of n for 'convergence'")
    common.add_argument("--out-dir")
    common.add_argument("--threads", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rigdeg", description="Degree laws of random intersection graphs.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("limit", parents=[common], help="tabulate the limiting degree law")
    sub.add_parser("simulate", parents=[common], help="sample degrees of the first vertex")
    cmp = sub.add_parser("compare", parents=[common], help="KS test of simulated degrees against the limit")
    cmp.add_argument("--degrees", help="existing degrees.csv (with its JSON sidecar) instead of simulating")
    sub.add_parser("coupling", parents=[common], help="run the truncation coupling and check its tail bound")
    sub.add_parser("convergence", parents=[common], help="KS against the limit over a grid of n")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    keys = ("model", "p1", "p2", "p", "n", "m", "beta", "reps", "seed", "M", "alpha", "tail_tol",
            "max_support", "budget", "n_grid", "out_dir", "threads")
    overrides = {k: getattr(args, k) for k in keys}
    start = time.perf_counter()
    try:
        cfg = ExperimentConfig.from_sources(args.config, overrides)
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        extra = {"degrees": args.degrees} if args.command == "compare" else {}
        code, outputs = COMMANDS[args.command](cfg, out, **extra)
    except InvariantViolation as exc:
        print(f"rigdeg: invariant violation: {exc}", file=sys.stderr)
        dump = Path(overrides.get("out_dir") or ".") / "invariant_violation.json"
        try:
            dump.write_text(json.dumps(exc.diagnostics, indent=2, sort_keys=True, default=str) + "\n")
            print(f"rigdeg: diagnostics written to {dump}", file=sys.stderr)
        except OSError:
            pass
        return EXIT_INVARIANT
    except (RigdegError, ValueError, OSError) as exc:
        print(f"rigdeg: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    digest = cfg.hash()
    record = ResultRecord(
        experiment_id=f"{args.command}-{digest[:12]}",
        config_hash=digest,
        outputs=outputs,
        wall_time_s=round(time.perf_counter() - start, 6),
        verdict={EXIT_PASS: "pass", EXIT_FAIL: "fail"}.get(code) if args.command in ("compare", "coupling", "convergence") else None,
    )
    record.write(out)
    print(json.dumps({"experiment_id": record.experiment_id, "verdict": record.verdict, "outputs": outputs}))
    return code


if __name__ == "__main__":
    sys.exit(main())
