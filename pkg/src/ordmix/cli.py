"""Batch command-line interface: ``fit``, ``simulate``, and ``verify``.

Configuration files are flat ``key = value`` text (a ``schema_version = 1``
key marks the format); command-line flags override file values.  All file
writes happen once computation is finished, and outputs contain no
timestamps, so a fixed seed reproduces output files byte for byte.

Exit codes: 0 success, 1 validation error, 2 runtime/numerical error,
3 convergence warning.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .design import (
    BinaryOutcome,
    ContinuousOutcome,
    OrdinalDesign,
    Outcome,
    SurvivalOutcome,
    candidate_cutoffs,
)
from .errors import NumericalError, OrdmixError, ValidationError
from .fitting import FitResult, fit_model
from .mcmc import ChainConfig
from .priors import Horseshoe, Lasso, PriorConfig, default_priors
from .simulate import load_scenario, parse_kv_text, run_replications

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_CONVERGENCE = 3

_PRIOR_KEYS = ("beta_variance", "sigma2_shape", "sigma2_rate", "pz_a", "pz_b",
               "dirichlet_weight", "c0", "r")


@dataclass
class FitRequest:
    """A fully resolved fit job."""

    input_path: str
    predictor_cols: list
    outcome_col: Optional[str] = None
    time_col: Optional[str] = None
    event_col: Optional[str] = None
    outcome_kind: str = "auto"
    penalty: str = "none"
    lam: Optional[float] = None
    chains: int = 2
    iters: int = 10000
    burnin: int = 2000
    thin: int = 5
    seed: int = 0
    min_cell: int = 5
    out_dir: str = "."
    prior_overrides: dict = field(default_factory=dict)
    rhat_threshold: float = 1.1

    def __post_init__(self):
        if not self.predictor_cols:
            raise ValidationError("at least one predictor column is required")
        survival = self.time_col is not None or self.event_col is not None
        if survival and (self.time_col is None or self.event_col is None):
            raise ValidationError("survival input needs both --time and --event")
        if survival == (self.outcome_col is not None):
            raise ValidationError("give either --outcome or the --time/--event pair")

    def priors(self) -> PriorConfig:
        base = default_priors("survival" if self.time_col else "continuous")
        values = {key: getattr(base, key) for key in _PRIOR_KEYS}
        for key, raw in self.prior_overrides.items():
            if key not in _PRIOR_KEYS:
                raise ValidationError(f"unknown prior setting {key!r}")
            values[key] = float(raw)
        penalty = None
        if self.penalty == "lasso":
            penalty = Lasso(self._lam())
        elif self.penalty == "horseshoe":
            penalty = Horseshoe(self._lam())
        elif self.penalty != "none":
            raise ValidationError(f"unknown penalty {self.penalty!r}")
        return PriorConfig(penalty=penalty, **values)

    def _lam(self) -> float:
        if self.lam is None:
            raise ValidationError("--lambda is required when a penalty is selected")
        return self.lam

    def chain_config(self) -> ChainConfig:
        return ChainConfig(n_iter=self.iters, burn_in=self.burnin, thin=self.thin,
                           n_chains=self.chains, seed=self.seed)


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


def _read_table(path: str):
    if not os.path.exists(path):
        raise ValidationError(f"input file not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError("input file is empty") from None
        rows = list(reader)
    if not rows:
        raise ValidationError("input file has a header but no data rows")
    return [h.strip() for h in header], rows


def ingest_csv(path: str, request: FitRequest):
    """Read and validate a fit input file.

    Returns ``(design, outcome, recode_maps)`` where ``recode_maps`` records,
    per predictor that needed it, the original-level to consecutive-rank
    mapping applied so thresholds stay well defined.  Data rows are numbered
    from 1 (the header is row 0); rows with missing values are rejected.
    """
    header, rows = _read_table(path)
    index = {name: i for i, name in enumerate(header)}

    wanted = list(request.predictor_cols)
    wanted += [request.outcome_col] if request.outcome_col else [request.time_col, request.event_col]
    for name in wanted:
        if name not in index:
            raise ValidationError(f"column {name!r} not found in {path}")

    missing_rows = []
    for r, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise ValidationError(f"row {r}: expected {len(header)} fields, got {len(row)}")
        if any(row[index[name]].strip() == "" for name in wanted):
            missing_rows.append(r)
    if missing_rows:
        shown = ", ".join(str(r) for r in missing_rows[:10])
        more = "" if len(missing_rows) <= 10 else f" (+{len(missing_rows) - 10} more)"
        raise ValidationError(f"missing values in rows: {shown}{more}")

    n = len(rows)
    x = np.empty((n, len(request.predictor_cols)), dtype=np.int64)
    for j, name in enumerate(request.predictor_cols):
        col = index[name]
        for r, row in enumerate(rows, start=1):
            cell = row[col].strip()
            try:
                x[r - 1, j] = int(cell)
            except ValueError:
                raise ValidationError(
                    f"non-integer predictor cell in column {name!r}, row {r}: {cell!r}"
                ) from None
        if x[:, j].min() < 0:
            raise ValidationError(f"column {name!r} has negative levels")

    recode_maps = {}
    for j, name in enumerate(request.predictor_cols):
        values = np.unique(x[:, j])
        if not np.array_equal(values, np.arange(values.size)):
            mapping = {int(v): rank for rank, v in enumerate(values)}
            recode_maps[name] = mapping
            x[:, j] = np.vectorize(mapping.__getitem__)(x[:, j])

    outcome = _parse_outcome(rows, index, request)

    cutoffs = []
    for j, name in enumerate(request.predictor_cols):
        try:
            cutoffs.append(candidate_cutoffs(x[:, j], min_cell=request.min_cell))
        except ValidationError as exc:
            raise type(exc)(f"column {name!r}: {exc}") from None
    try:
        design = OrdinalDesign(x, cutoffs=tuple(cutoffs))
    except ValidationError as exc:
        raise type(exc)(f"{exc} (predictors: {', '.join(request.predictor_cols)})") from None
    return design, outcome, recode_maps


def _parse_outcome(rows, index, request: FitRequest) -> Outcome:
    def parse_float(name, r, cell):
        try:
            value = float(cell)
        except ValueError:
            raise ValidationError(
                f"non-numeric value in column {name!r}, row {r}: {cell!r}") from None
        if not np.isfinite(value):
            raise ValidationError(f"non-finite value in column {name!r}, row {r}")
        return value

    if request.time_col:
        time = np.empty(len(rows))
        event = np.empty(len(rows), dtype=np.int64)
        for r, row in enumerate(rows, start=1):
            time[r - 1] = parse_float(request.time_col, r, row[index[request.time_col]].strip())
            if time[r - 1] <= 0:
                raise ValidationError(
                    f"non-positive survival time in column {request.time_col!r}, row {r}")
            cell = row[index[request.event_col]].strip()
            if cell not in ("0", "1"):
                raise ValidationError(
                    f"event indicator must be 0 or 1 in column {request.event_col!r}, row {r}")
            event[r - 1] = int(cell)
        return SurvivalOutcome(time, event)

    y = np.empty(len(rows))
    for r, row in enumerate(rows, start=1):
        y[r - 1] = parse_float(request.outcome_col, r, row[index[request.outcome_col]].strip())
    kind = request.outcome_kind
    if kind == "auto":
        kind = "binary" if np.all(np.isin(y, (0.0, 1.0))) else "continuous"
    if kind == "binary":
        if not np.all(np.isin(y, (0.0, 1.0))):
            raise ValidationError(f"column {request.outcome_col!r} is not 0/1")
        return BinaryOutcome(y.astype(np.int64))
    if kind != "continuous":
        raise ValidationError(f"unknown outcome kind {kind!r}")
    return ContinuousOutcome(y)


def export_dataset_csv(path: str, x: np.ndarray, outcome: Outcome,
                       predictor_names: Optional[Sequence[str]] = None) -> None:
    """Write a dataset in the exact format ``ingest_csv`` reads back."""
    x = np.asarray(x)
    if predictor_names is None:
        predictor_names = [f"x{j + 1}" for j in range(x.shape[1])]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if outcome.kind == "survival":
            writer.writerow(list(predictor_names) + ["time", "event"])
            for i in range(x.shape[0]):
                writer.writerow([int(v) for v in x[i]] +
                                [repr(float(outcome.time[i])), int(outcome.event[i])])
        else:
            writer.writerow(list(predictor_names) + ["outcome"])
            for i in range(x.shape[0]):
                value = int(outcome.y[i]) if outcome.kind == "binary" else repr(float(outcome.y[i]))
                writer.writerow([int(v) for v in x[i]] + [value])


# ---------------------------------------------------------------------------
# Output writers
# ---------------------------------------------------------------------------


def _g6(value) -> str:
    return f"{float(value):.6g}"


def _write_summary_csv(path, summary):
    k_max = max(max(c) for c in summary.cutoffs)
    tau_cols = [f"p_tau_{k}" for k in range(1, k_max + 1)]
    name_to_j = {summary.beta_name(j): j for j in range(len(summary.predictor_names))}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parameter", "mean", "sd", "ci_low", "ci_high", "selected",
                         "p_z1"] + tau_cols + ["rhat"])
        for name, s in summary.parameters.items():
            row = [name, _g6(s.mean), _g6(s.sd), _g6(s.ci_low), _g6(s.ci_high),
                   str(s.selected).lower()]
            if name in name_to_j:
                j = name_to_j[name]
                row.append(_g6(summary.p_z1[j]))
                for k in range(1, k_max + 1):
                    row.append(_g6(summary.p_tau[j][k]) if k in summary.p_tau[j] else "")
            else:
                row.extend([""] * (1 + k_max))
            row.append(_g6(s.rhat) if s.rhat is not None else "")
            writer.writerow(row)


def _write_draws_csv(path, store, predictor_names):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = ["iteration"]
        if store.alpha is not None:
            header.append("alpha")
        header += [f"beta_{n}" for n in predictor_names]
        if store.sigma2 is not None:
            header.append("sigma2")
        header.append("pz")
        header += [f"z_{n}" for n in predictor_names]
        header += [f"tau_{n}" for n in predictor_names]
        if store.hazard_total is not None:
            header.append("hazard_total")
        writer.writerow(header)
        for i in range(store.n_draws):
            row = [int(store.iterations[i])]
            if store.alpha is not None:
                row.append(repr(float(store.alpha[i])))
            row += [repr(float(v)) for v in store.beta[i]]
            if store.sigma2 is not None:
                row.append(repr(float(store.sigma2[i])))
            row.append(repr(float(store.pz[i])))
            row += [int(v) for v in store.z[i]]
            row += [int(v) for v in store.tau[i]]
            if store.hazard_total is not None:
                row.append(repr(float(store.hazard_total[i])))
            writer.writerow(row)


def _write_convergence_report(path, result: FitResult):
    lines = [result.convergence.describe()]
    for name, rhat in result.convergence.rhats.items():
        lines.append(f"rhat {name} = {_g6(rhat)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_recode_map(path, recode_maps):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["predictor", "original_level", "recoded_level"])
        for name, mapping in recode_maps.items():
            for original, recoded in sorted(mapping.items()):
                writer.writerow([name, original, recoded])


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _merge_config(args, keys):
    """File values fill in anything the command line left at its default."""
    merged = {}
    if getattr(args, "config", None):
        if not os.path.exists(args.config):
            raise ValidationError(f"config file not found: {args.config}")
        with open(args.config, "r", encoding="utf-8") as fh:
            kv = parse_kv_text(fh.read())
        kv.pop("schema_version", None)
        for key, value in kv.items():
            if key in _PRIOR_KEYS:
                merged.setdefault("prior_overrides", {})[key] = value
            elif key in keys:
                merged[key] = value
            else:
                raise ValidationError(f"unknown config key {key!r}")
    return merged


def _cmd_fit(args) -> int:
    file_values = _merge_config(args, keys={
        "input", "outcome", "time", "event", "predictors", "penalty", "lambda",
        "chains", "iters", "burnin", "thin", "seed", "min_cell", "out",
        "outcome_kind", "rhat_threshold"})

    def pick(flag, key, conv, default):
        if flag is not None:
            return flag
        if key in file_values:
            return conv(file_values[key])
        return default

    predictors = pick(args.predictors, "predictors", str, None)
    if predictors is None:
        raise ValidationError("--predictors is required")
    request = FitRequest(
        input_path=pick(args.input, "input", str, None) or _required("--input"),
        predictor_cols=[c.strip() for c in predictors.split(",") if c.strip()],
        outcome_col=pick(args.outcome, "outcome", str, None),
        time_col=pick(args.time, "time", str, None),
        event_col=pick(args.event, "event", str, None),
        outcome_kind=pick(args.outcome_kind, "outcome_kind", str, "auto"),
        penalty=pick(args.penalty, "penalty", str, "none"),
        lam=pick(args.lam, "lambda", float, None),
        chains=pick(args.chains, "chains", int, 2),
        iters=pick(args.iters, "iters", int, 10000),
        burnin=pick(args.burnin, "burnin", int, 2000),
        thin=1 if args.full_draws else pick(args.thin, "thin", int, 5),
        seed=pick(args.seed, "seed", int, 0),
        min_cell=pick(args.min_cell, "min_cell", int, 5),
        out_dir=pick(args.out, "out", str, "."),
        prior_overrides=file_values.get("prior_overrides", {}),
        rhat_threshold=pick(args.rhat_threshold, "rhat_threshold", float, 1.1),
    )

    design, outcome, recode_maps = ingest_csv(request.input_path, request)
    result = fit_model(design, outcome, priors=request.priors(),
                       config=request.chain_config(),
                       predictor_names=request.predictor_cols,
                       rhat_threshold=request.rhat_threshold)

    os.makedirs(request.out_dir, exist_ok=True)
    _write_summary_csv(os.path.join(request.out_dir, "summary.csv"), result.summary)
    for k, store in enumerate(result.stores):
        _write_draws_csv(os.path.join(request.out_dir, f"draws_chain{k + 1}.csv"),
                         store, request.predictor_cols)
    _write_convergence_report(os.path.join(request.out_dir, "convergence.txt"), result)
    if recode_maps:
        _write_recode_map(os.path.join(request.out_dir, "level_map.csv"), recode_maps)

    for name, s in result.summary.parameters.items():
        print(f"{name:>24}  mean={_g6(s.mean):>10}  sd={_g6(s.sd):>10}  "
              f"ci=[{_g6(s.ci_low)}, {_g6(s.ci_high)}]  selected={str(s.selected).lower()}")
    print(result.convergence.describe())
    if not (result.convergence.assessable and result.convergence.passed):
        return EXIT_CONVERGENCE
    return EXIT_OK


def _required(flag):
    raise ValidationError(f"{flag} is required")


def _cmd_simulate(args) -> int:
    spec = load_scenario(args.scenario)
    if args.replications is not None or args.seed is not None:
        from dataclasses import replace

        spec = replace(spec,
                       replications=spec.replications if args.replications is None else args.replications,
                       seed=spec.seed if args.seed is None else args.seed)
    report = run_replications(spec)
    os.makedirs(args.out, exist_ok=True)
    report_path = os.path.join(args.out, "report.csv")
    with open(report_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(report.csv_header())
        for row in report.csv_rows():
            writer.writerow([cell if isinstance(cell, str) else _g6(cell) for cell in row])
    info_lines = [f"scenario: {spec.name}", f"replications: {spec.replications}",
                  f"seed: {spec.seed}"]
    if report.achieved_censoring is not None:
        flag = "yes" if report.censoring_flagged else "no"
        info_lines.append(f"achieved_censoring: {_g6(report.achieved_censoring)}")
        info_lines.append(f"censoring_deviates_from_0.199: {flag}")
    with open(os.path.join(args.out, "run_info.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(info_lines) + "\n")
    print(report.format_table())
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .oracle import compare_mcmc_to_oracle

    config = ChainConfig(n_iter=args.iters, burn_in=args.burnin, thin=1,
                         n_chains=2, seed=0)
    records, elapsed = compare_mcmc_to_oracle(
        n_instances=args.instances, seed=args.seed, chain_config=config)
    worst = 0.0
    for i, rec in enumerate(records):
        worst = max(worst, rec["max_abs_diff"])
        oracle = ", ".join(_g6(v) for v in rec["oracle_p_z1"])
        mcmc = ", ".join(_g6(v) for v in rec["mcmc_p_z1"])
        print(f"instance {i + 1}: oracle P(Z=1) = [{oracle}]  "
              f"mcmc = [{mcmc}]  max |diff| = {rec['max_abs_diff']:.4f}")
    print(f"worst |diff| = {worst:.4f} over {len(records)} instances "
          f"({elapsed:.1f}s, tolerance {args.tol})")
    if worst >= args.tol:
        print("verification FAILED", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ordmix",
        description="Bayesian mixture model for ordinal predictors: each predictor "
                    "is inferred to act linearly in its levels or through a "
                    "dichotomization at an estimated changepoint.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a model to a CSV dataset")
    p_fit.add_argument("--config", help="flat key=value config file (flags override)")
    p_fit.add_argument("--input", help="input CSV path")
    p_fit.add_argument("--outcome", help="outcome column (continuous or 0/1)")
    p_fit.add_argument("--time", help="survival time column")
    p_fit.add_argument("--event", help="survival event indicator column")
    p_fit.add_argument("--outcome-kind", dest="outcome_kind",
                       choices=("auto", "continuous", "binary"),
                       help="override the automatic continuous/binary detection")
    p_fit.add_argument("--predictors", help="comma-separated predictor columns")
    p_fit.add_argument("--penalty", choices=("none", "lasso", "horseshoe"))
    p_fit.add_argument("--lambda", dest="lam", type=float, help="penalty tuning constant")
    p_fit.add_argument("--chains", type=int)
    p_fit.add_argument("--iters", type=int)
    p_fit.add_argument("--burnin", type=int)
    p_fit.add_argument("--thin", type=int, help="thinning of emitted draws (default 5)")
    p_fit.add_argument("--full-draws", action="store_true",
                       help="emit every post-burn-in draw (thin=1)")
    p_fit.add_argument("--seed", type=int)
    p_fit.add_argument("--min-cell", dest="min_cell", type=int,
                       help="minimum group size for an admissible cutoff (default 5)")
    p_fit.add_argument("--rhat-threshold", dest="rhat_threshold", type=float)
    p_fit.add_argument("--out", help="output directory")
    p_fit.set_defaults(func=_cmd_fit)

    p_sim = sub.add_parser("simulate", help="run a replication study scenario")
    p_sim.add_argument("--scenario", required=True,
                       help="scenario file path or bundled name (e.g. table1_desk)")
    p_sim.add_argument("--replications", type=int, help="override replication count")
    p_sim.add_argument("--seed", type=int, help="override master seed")
    p_sim.add_argument("--out", default=".", help="output directory")
    p_sim.set_defaults(func=_cmd_simulate)

    p_ver = sub.add_parser("verify", help="compare the sampler against the exact "
                                          "enumeration on small instances")
    p_ver.add_argument("--instances", type=int, default=3)
    p_ver.add_argument("--iters", type=int, default=12000)
    p_ver.add_argument("--burnin", type=int, default=2000)
    p_ver.add_argument("--seed", type=int, default=7000)
    p_ver.add_argument("--tol", type=float, default=0.02)
    p_ver.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OrdmixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
