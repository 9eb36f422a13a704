"""Experiment runner and file emitter.

Subcommands: ``simulate``, ``bounds``, ``oracle``, ``compare``, ``verify``,
``preset``. Every run resolves its configuration (defaults included) into
``manifest.json`` next to the data, and all randomness flows from the single
config seed, so identical configs reproduce identical CSV bytes.

Exit codes: 0 success, 1 verification failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, bounds as bnd, oracle as orc
from .fitness import FitnessSpec
from .heuristics import AlgorithmSpec
from .simulate import (InitSpec, estimate_mean_error, initial_error_mean,
                       series_to_csv)

SCHEMA_VERSION = 1

LINEAR_FAMILY = ("linear", "onemax", "binval")


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    algorithm: AlgorithmSpec
    function: FitnessSpec
    init: InitSpec = field(default_factory=InitSpec.uniform)
    steps: int = 1000
    replicates: int = 1000
    seed: int = 1
    bound_labels: list = field(default_factory=list)
    oracle: bool = False
    oracle_horizon: Optional[int] = None

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError("steps must be at least 1")
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if not 0 <= self.seed < (1 << 64):
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.oracle:
            n = self.function.n
            if n > orc.FULL_CHAIN_MAX_N and not (
                    self.function.kind in ("onemax", "zigzag")
                    and n <= orc.LEVEL_CHAIN_MAX_N):
                raise ConfigError(
                    f"oracle needs n <= {orc.FULL_CHAIN_MAX_N} "
                    f"(or a ones-count-symmetric function with n <= "
                    f"{orc.LEVEL_CHAIN_MAX_N}), got {self.function.kind} n={n}")

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        try:
            return cls(
                algorithm=AlgorithmSpec.from_json(doc["algorithm"]),
                function=FitnessSpec.from_json(doc["function"]),
                init=InitSpec.from_json(doc.get("init", {"kind": "uniform"})),
                steps=int(doc.get("steps", 1000)),
                replicates=int(doc.get("replicates", 1000)),
                seed=int(doc.get("seed", 1)),
                bound_labels=list(doc.get("bounds", [])),
                oracle=bool(doc.get("oracle", False)),
                oracle_horizon=doc.get("oracle_horizon"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad experiment config: {exc}") from exc

    def resolved(self) -> dict:
        n = self.function.n
        algo = self.algorithm.to_json()
        if self.algorithm.kind == "ea":
            algo["mutation_rate"] = self.algorithm.resolved_mutation_rate(n)
        if self.algorithm.kind == "sa":
            algo["temperature"] = self.algorithm.resolved_temperature(n)
        return {
            "algorithm": algo,
            "function": self.function.to_json(),
            "init": self.init.to_json(),
            "steps": self.steps,
            "replicates": self.replicates,
            "seed": self.seed,
            "bounds": list(self.bound_labels),
            "oracle": self.oracle,
            "oracle_horizon": self.oracle_horizon,
        }


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_json(doc)


def apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    for name in ("seed", "replicates", "steps"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    cfg.__post_init__()
    return cfg


def build_bound_curves(cfg: ExperimentConfig, labels=None) -> list:
    """Materialise the requested envelope curves on the run's step grid."""
    labels = cfg.bound_labels if labels is None else labels
    t = np.arange(cfg.steps + 1)
    f, algo = cfg.function, cfg.algorithm
    n = f.n
    curves = []
    for label in labels:
        if label == "rls-linear-exact":
            _need(f.kind in LINEAR_FAMILY, label, "a linear-family function")
            curves.append(bnd.rls_linear_exact(initial_error_mean(f, cfg.init), n, t))
        elif label == "ea-linear-upper":
            _need(f.kind in LINEAR_FAMILY, label, "a linear-family function")
            curves.append(bnd.ea_linear_upper(initial_error_mean(f, cfg.init), n, t))
        elif label == "ea-linear-lower":
            _need(f.kind in LINEAR_FAMILY, label, "a linear-family function")
            curves.append(bnd.ea_linear_lower(initial_error_mean(f, cfg.init), n, t))
        elif label == "ea-mutation-upper":
            _need(f.kind in LINEAR_FAMILY, label, "a linear-family function")
            _need(algo.kind == "ea", label, "the ea kernel")
            curves.append(bnd.ea_mutation_bound(
                initial_error_mean(f, cfg.init), n, algo.resolved_mutation_rate(n), t))
        elif label.startswith("leadingones-"):
            _need(f.kind == "leadingones", label, "the leadingones function")
            if label == "leadingones-fixed-budget":
                curves.append(bnd.leadingones_fixed_budget_curve(n, t))
            else:
                side, form = label.rsplit("-", 2)[-2:]
                if side == "upper":
                    curves.append(bnd.leadingones_upper(n, t, form=form))
                elif side == "lower":
                    curves.append(bnd.leadingones_lower(n, t, form=form))
                else:
                    raise ConfigError(f"unknown bound label {label!r}")
        elif label == "zigzag-ea-upper":
            _need(f.kind == "zigzag", label, "the zigzag function")
            curves.append(bnd.zigzag_ea_upper(initial_error_mean(f, cfg.init), n, t))
        elif label == "zigzag-sa-upper":
            _need(f.kind == "zigzag", label, "the zigzag function")
            _need(algo.kind == "sa", label, "the sa kernel")
            curves.append(bnd.zigzag_sa_upper(
                initial_error_mean(f, cfg.init), n, algo.resolved_temperature(n), t))
        else:
            raise ConfigError(f"unknown bound label {label!r}")
    return curves


def _need(cond: bool, label: str, what: str) -> None:
    if not cond:
        raise ConfigError(f"bound {label!r} needs {what}")


def _write_json(doc: dict, path: Path) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(outdir: Path, command: str, cfg: ExperimentConfig) -> None:
    _write_json({"schema_version": SCHEMA_VERSION, "command": command,
                 "budgetlab_version": __version__, "config": cfg.resolved()},
                outdir / "manifest.json")


def _say(quiet: bool, msg: str) -> None:
    if not quiet:
        print(msg)


def _build_chain(cfg: ExperimentConfig):
    if cfg.function.n <= orc.FULL_CHAIN_MAX_N:
        return orc.build_full_chain(cfg.algorithm, cfg.function, cfg.init)
    return orc.build_level_chain(cfg.algorithm, cfg.function, cfg.init)


def run(cfg: ExperimentConfig, outdir: Path, quiet: bool = False) -> None:
    """Full experiment: trajectory.csv, bounds.csv, optional oracle outputs,
    and the manifest."""
    outdir.mkdir(parents=True, exist_ok=True)
    series = estimate_mean_error(cfg.algorithm, cfg.function, cfg.init,
                                 cfg.steps, cfg.replicates, cfg.seed)
    series_to_csv(series, outdir / "trajectory.csv")
    _say(quiet, f"wrote {outdir / 'trajectory.csv'} ({len(series)} rows)")

    curves = build_bound_curves(cfg)
    bnd.curves_to_csv(curves, outdir / "bounds.csv")
    _say(quiet, f"wrote {outdir / 'bounds.csv'} ({len(curves)} curves)")

    if cfg.oracle:
        horizon = cfg.oracle_horizon or cfg.steps
        chain = _build_chain(cfg)
        curve = orc.exact_error_curve(chain, horizon)
        with open(outdir / "oracle.csv", "w") as fh:
            fh.write("t,exact_error\n")
            for t, v in enumerate(curve):
                fh.write(f"{t},{v:.17g}\n")
        report = orc.verify_sandwich(chain, horizon)
        _write_json(report.to_json(), outdir / "delta_report.json")
        _say(quiet, f"wrote {outdir / 'oracle.csv'} and delta_report.json "
                    f"(chain size {chain.size})")

    _write_manifest(outdir, "simulate", cfg)


def run_bounds_only(cfg: ExperimentConfig, outdir: Path, quiet: bool = False) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    curves = build_bound_curves(cfg)
    bnd.curves_to_csv(curves, outdir / "bounds.csv")
    _say(quiet, f"wrote {outdir / 'bounds.csv'} ({len(curves)} curves)")
    _write_manifest(outdir, "bounds", cfg)


def run_oracle_only(cfg: ExperimentConfig, outdir: Path, quiet: bool = False) -> None:
    if not cfg.oracle:
        cfg.oracle = True
        cfg.__post_init__()
    outdir.mkdir(parents=True, exist_ok=True)
    horizon = cfg.oracle_horizon or cfg.steps
    chain = _build_chain(cfg)
    curve = orc.exact_error_curve(chain, horizon)
    with open(outdir / "oracle.csv", "w") as fh:
        fh.write("t,exact_error\n")
        for t, v in enumerate(curve):
            fh.write(f"{t},{v:.17g}\n")
    report = orc.verify_sandwich(chain, horizon)
    _write_json(report.to_json(), outdir / "delta_report.json")
    _say(quiet, f"wrote {outdir / 'oracle.csv'} and delta_report.json")
    _write_manifest(outdir, "oracle", cfg)


def _default_upper_label(cfg: ExperimentConfig) -> Optional[str]:
    f, a = cfg.function.kind, cfg.algorithm.kind
    if f in LINEAR_FAMILY:
        return {"rls": "rls-linear-exact", "ea": "ea-mutation-upper"}.get(a)
    if f == "leadingones" and a == "ea":
        return "leadingones-upper-rigorous"
    if f == "zigzag":
        return {"ea": "zigzag-ea-upper", "sa": "zigzag-sa-upper"}.get(a)
    return None


def _envelope_delta(cfg: ExperimentConfig) -> Optional[float]:
    n = cfg.function.n
    label = _default_upper_label(cfg)
    if label is None:
        return None
    if label == "rls-linear-exact":
        return 1.0 / n
    if label == "ea-mutation-upper":
        p = cfg.algorithm.resolved_mutation_rate(n)
        return p * (1.0 - p) ** (n - 1)
    if label == "leadingones-upper-rigorous":
        return bnd.leadingones_delta_bounds(n).delta_min
    if label == "zigzag-ea-upper":
        return (1.0 / n ** 2) * (1.0 - 1.0 / n) ** (n - 2)
    return bnd.zigzag_sa_delta_min(n, cfg.algorithm.resolved_temperature(n))


def compare(cfg_a: ExperimentConfig, cfg_b: ExperimentConfig, outdir: Path,
            quiet: bool = False) -> None:
    """Joined mean-error table for two runs on the same function and grid."""
    if cfg_a.function != cfg_b.function:
        raise ConfigError("compare needs identical functions on both sides")
    if (cfg_a.steps, cfg_a.replicates) != (cfg_b.steps, cfg_b.replicates):
        raise ConfigError("compare needs identical steps and replicates")
    outdir.mkdir(parents=True, exist_ok=True)

    series = {}
    for side, cfg in (("a", cfg_a), ("b", cfg_b)):
        series[side] = estimate_mean_error(cfg.algorithm, cfg.function, cfg.init,
                                           cfg.steps, cfg.replicates, cfg.seed)
    t = np.arange(cfg_a.steps + 1)
    deltas = {side: _envelope_delta(cfg) for side, cfg in
              (("a", cfg_a), ("b", cfg_b))}
    curves = {}
    for side, cfg in (("a", cfg_a), ("b", cfg_b)):
        d = deltas[side]
        e0 = initial_error_mean(cfg.function, cfg.init)
        curves[side] = None if d is None else bnd.geometric_curve(e0, d, t)

    with open(outdir / "compare.csv", "w") as fh:
        fh.write("t,mean_error_a,sem_a,mean_error_b,sem_b,bound_a,bound_b\n")
        for i in range(cfg_a.steps + 1):
            ba = "" if curves["a"] is None else f"{curves['a'][i]:.17g}"
            bb = "" if curves["b"] is None else f"{curves['b'][i]:.17g}"
            fh.write(f"{i},{series['a'].mean_error[i]:.17g},{series['a'].sem[i]:.17g},"
                     f"{series['b'].mean_error[i]:.17g},{series['b'].sem[i]:.17g},"
                     f"{ba},{bb}\n")

    diff = series["a"].mean_error - series["b"].mean_error
    signs = np.sign(diff).astype(int)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "function": cfg_a.function.to_json(),
        "steps": cfg_a.steps,
        "replicates": cfg_a.replicates,
        "a": {"algorithm": cfg_a.resolved()["algorithm"], "seed": cfg_a.seed,
              "delta": deltas["a"], "final_mean_error": float(series["a"].mean_error[-1])},
        "b": {"algorithm": cfg_b.resolved()["algorithm"], "seed": cfg_b.seed,
              "delta": deltas["b"], "final_mean_error": float(series["b"].mean_error[-1])},
        "sign_pattern": {
            "a_above_b": int((signs > 0).sum()),
            "b_above_a": int((signs < 0).sum()),
            "ties": int((signs == 0).sum()),
            "signs": "".join({1: "+", -1: "-", 0: "0"}[s] for s in signs),
        },
    }
    _write_json(summary, outdir / "summary.json")
    _say(quiet, f"wrote {outdir / 'compare.csv'} and summary.json")


def verify(suite: str, out: Optional[Path] = None, quiet: bool = False) -> int:
    """Run a verification battery; returns the number of violations."""
    if suite == "theorems":
        report = orc.theorem_battery().to_json()
    elif suite == "supplement":
        reps = [bnd.verify_supplement(n) for n in (100, 150, 200)]
        report = {"ok": all(r.ok for r in reps),
                  "violations": [v for r in reps for v in r.violations],
                  "instances": [r.to_json() for r in reps]}
    elif suite == "sandwich":
        rng = np.random.default_rng(20260810)
        instances = []
        violations = []
        cases = [
            (AlgorithmSpec.rls(), FitnessSpec.linear(rng.uniform(0.01, 1.0, 8)), 500),
            (AlgorithmSpec.ea(), FitnessSpec.leadingones(8), 2000),
            (AlgorithmSpec.sa(), FitnessSpec.zigzag(8), 500),
        ]
        for algo, f, horizon in cases:
            rep = orc.verify_sandwich(orc.build_full_chain(algo, f), horizon)
            instances.append({"algo": algo.kind, "function": f.kind, "n": f.n,
                              "horizon": horizon, **rep.to_json()})
            violations.extend(rep.violations)
        report = {"ok": not violations, "violations": violations,
                  "instances": instances}
    elif suite == "suffix":
        reps = [orc.verify_uniform_suffix(n, 500) for n in range(2, 11)]
        report = {"ok": all(r.ok for r in reps),
                  "violations": [v for r in reps for v in r.violations],
                  "instances": [r.to_json() for r in reps]}
    else:
        raise ConfigError(f"unknown verify suite {suite!r}")

    n_viol = len(report["violations"])
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        _write_json(report, out)
        _say(quiet, f"wrote {out}")
    elif not quiet:
        json.dump(report, sys.stdout, indent=2, sort_keys=True)
        print()
    _say(quiet, f"verify {suite}: {'ok' if n_viol == 0 else f'{n_viol} violations'}")
    return n_viol


# -- presets ------------------------------------------------------------------

PRESET_SEED = 20260810


def _preset_configs(name: str) -> dict:
    """Figure presets; each value is (relative outdir, config) or a compare
    pair. Replicate counts default to 1000 paths."""
    ea100 = AlgorithmSpec.ea()
    if name == "fig1":
        return {"runs": [(".", ExperimentConfig(
            AlgorithmSpec.rls(), FitnessSpec.binval(100), InitSpec.uniform(),
            steps=1000, replicates=1000, seed=PRESET_SEED,
            bound_labels=["rls-linear-exact"]))]}
    if name == "fig2":
        return {"runs": [(".", ExperimentConfig(
            ea100, FitnessSpec.binval(100), InitSpec.uniform(),
            steps=1000, replicates=1000, seed=PRESET_SEED,
            bound_labels=["ea-linear-upper"]))]}
    if name == "fig3":
        return {"runs": [(".", ExperimentConfig(
            ea100, FitnessSpec.binval(100), InitSpec.uniform(),
            steps=1000, replicates=1000, seed=PRESET_SEED,
            bound_labels=["ea-linear-lower"]))]}
    if name == "fig4":
        return {"runs": [(".", ExperimentConfig(
            ea100, FitnessSpec.leadingones(100), InitSpec.uniform(),
            steps=10000, replicates=1000, seed=PRESET_SEED,
            bound_labels=["leadingones-fixed-budget"]))]}
    if name == "fig5":
        return {"runs": [(".", ExperimentConfig(
            ea100, FitnessSpec.leadingones(100), InitSpec.uniform(),
            steps=20000, replicates=1000, seed=PRESET_SEED,
            bound_labels=["leadingones-lower-nominal", "leadingones-lower-rigorous",
                          "leadingones-upper-nominal", "leadingones-upper-rigorous"]))]}
    if name == "fig6":
        runs = []
        for p in (0.1, 0.2, 0.05):  # 1/n, 2/n, 1/(2n) at n=10
            runs.append((f"p={p:g}", ExperimentConfig(
                AlgorithmSpec.ea(p), FitnessSpec.binval(10), InitSpec.uniform(),
                steps=200, replicates=1000, seed=PRESET_SEED,
                bound_labels=["ea-mutation-upper"])))
        return {"runs": runs}
    if name == "fig7":
        return {"compare": (
            ExperimentConfig(ea100, FitnessSpec.zigzag(100), InitSpec.uniform(),
                             steps=10000, replicates=1000, seed=PRESET_SEED,
                             bound_labels=["zigzag-ea-upper"]),
            ExperimentConfig(AlgorithmSpec.sa(), FitnessSpec.zigzag(100),
                             InitSpec.uniform(), steps=10000, replicates=1000,
                             seed=PRESET_SEED, bound_labels=["zigzag-sa-upper"]),
        )}
    raise ConfigError(f"unknown preset {name!r} (expected fig1..fig7)")


def run_preset(name: str, outdir: Path, args, quiet: bool = False) -> None:
    plan = _preset_configs(name)
    if "runs" in plan:
        for rel, cfg in plan["runs"]:
            apply_overrides(cfg, args)
            run(cfg, outdir if rel == "." else outdir / rel, quiet=quiet)
    else:
        cfg_a, cfg_b = plan["compare"]
        apply_overrides(cfg_a, args)
        apply_overrides(cfg_b, args)
        compare(cfg_a, cfg_b, outdir, quiet=quiet)
        run(cfg_a, outdir / "side_a", quiet=quiet)
        run(cfg_b, outdir / "side_b", quiet=quiet)


# -- argument parsing ----------------------------------------------------------

def _add_common(sp, config: bool = True):
    if config:
        sp.add_argument("--config", required=True, help="experiment config JSON")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--replicates", type=int, default=None)
    sp.add_argument("--steps", type=int, default=None)
    sp.add_argument("--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="budgetlab",
        description="Search-heuristic experiments, exact chain oracles and "
                    "error-bound curves.")
    sub = ap.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("simulate", help="Monte Carlo run + bounds"))
    _add_common(sub.add_parser("bounds", help="bound curves only"))
    _add_common(sub.add_parser("oracle", help="exact chain curve + delta report"))

    cp = sub.add_parser("compare", help="two configs, joined output")
    cp.add_argument("--config-a", required=True)
    cp.add_argument("--config-b", required=True)
    cp.add_argument("--out", required=True)
    cp.add_argument("--seed", type=int, default=None)
    cp.add_argument("--replicates", type=int, default=None)
    cp.add_argument("--steps", type=int, default=None)
    cp.add_argument("--quiet", action="store_true")

    vp = sub.add_parser("verify", help="numeric verification batteries")
    vp.add_argument("suite", choices=["theorems", "supplement", "sandwich", "suffix"])
    vp.add_argument("--out", default=None, help="write the JSON report here")
    vp.add_argument("--quiet", action="store_true")

    pp = sub.add_parser("preset", help="one-command figure reproduction")
    pp.add_argument("name", help="fig1 .. fig7")
    _add_common(pp, config=False)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            cfg = apply_overrides(load_config(args.config), args)
            run(cfg, Path(args.out), quiet=args.quiet)
        elif args.command == "bounds":
            cfg = apply_overrides(load_config(args.config), args)
            run_bounds_only(cfg, Path(args.out), quiet=args.quiet)
        elif args.command == "oracle":
            cfg = apply_overrides(load_config(args.config), args)
            run_oracle_only(cfg, Path(args.out), quiet=args.quiet)
        elif args.command == "compare":
            cfg_a = apply_overrides(load_config(args.config_a), args)
            cfg_b = apply_overrides(load_config(args.config_b), args)
            compare(cfg_a, cfg_b, Path(args.out), quiet=args.quiet)
        elif args.command == "verify":
            out = Path(args.out) if args.out else None
            return 0 if verify(args.suite, out, quiet=args.quiet) == 0 else 1
        elif args.command == "preset":
            run_preset(args.name, Path(args.out), args, quiet=args.quiet)
    except ConfigError as exc:
        print(f"budgetlab: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"budgetlab: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
