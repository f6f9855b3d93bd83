"""Benchmark command line: solve generated or file-based instances and
emit a CSV results file plus an aligned text table."""

import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass, field

from . import admm as admm_mod
from . import alm as alm_mod
from .problems import (
    GeneratorSpec,
    Problem,
    GroupPartition,
    generate,
    lambda_settings,
    load_sparse_regression,
    _group_selector_rows,
)
from .ssn import SsnParams

CSV_COLUMNS = [
    "pbname", "m", "n", "mE", "mI", "J", "setting", "gamma", "solver",
    "lambda1", "lambda2", "nnz", "eta_kkt", "RP", "RD", "RC", "RG",
    "pobj", "dobj", "iterations", "newton_iterations", "time_s", "termination",
]


def format_sci(x, sig=5):
    """'s sign(t)|t|' shorthand: 9.8e-7 -> '9.8-7', 326.01 -> '3.2601+2'."""
    if x == 0 or not math.isfinite(x):
        mant = "0." + "0" * (sig - 1) if x == 0 else str(x)
        return mant + "+0" if math.isfinite(x) else str(x)
    exp = math.floor(math.log10(abs(x)))
    mant = round(x / 10.0**exp, sig - 1)
    if abs(mant) >= 10.0:
        mant /= 10.0
        exp += 1
    return f"{mant:.{sig - 1}f}{'+' if exp >= 0 else '-'}{abs(exp)}"


def parse_sci(text):
    """Inverse of format_sci."""
    body = text[1:] if text.startswith("-") else text
    pos = max(body.rfind("+"), body.rfind("-"))
    mant = float(text[: pos + (1 if text.startswith("-") else 0)])
    exp = int(body[pos:])
    return mant * 10.0**exp


def format_time(seconds):
    """'hours:minutes:seconds' with leading parts elided ('03', '2:11')."""
    total = int(round(seconds))
    h, rem = divmod(total, 3600)
    mnt, sec = divmod(rem, 60)
    if h:
        return f"{h}:{mnt:02d}:{sec:02d}"
    if mnt:
        return f"{mnt}:{sec:02d}"
    return f"{sec:02d}"


@dataclass
class ResultRow:
    pbname: str
    m: int
    n: int
    mE: int
    mI: int
    J: int
    setting: str
    gamma: float
    solver: str
    lambda1: float
    lambda2: float
    nnz: int
    eta_kkt: float
    RP: float
    RD: float
    RC: float
    RG: float
    pobj: float
    dobj: float
    iterations: int
    newton_iterations: int
    time_s: float
    termination: str

    def csv_values(self, deterministic=False):
        vals = []
        for col in CSV_COLUMNS:
            v = getattr(self, col)
            if col == "time_s":
                v = 0.0 if deterministic else round(v, 3)
            if isinstance(v, float):
                v = repr(v)
            vals.append(v)
        return vals


@dataclass
class RunConfig:
    solver: str = "ssnal"  # ssnal | admm | both
    family: int = 1
    dataset: str = None
    spec_file: str = None
    m: int = 100
    n: int = 1000
    mE: int = 0
    mI: int = 0
    J: int = 10
    setting: str = "S1"
    gammas: list = field(default_factory=lambda: [1e-3])
    tol: float = 1e-6
    max_outer: int = 200
    max_admm: int = 10000
    time_cap: float = 14400.0
    seed: int = 0
    csv_out: str = None
    table_out: str = None
    deterministic: bool = False

    def __post_init__(self):
        if not self.gammas:
            raise ValueError("need at least one gamma")
        if min(self.max_outer, self.max_admm) <= 0 or self.time_cap <= 0:
            raise ValueError("iteration and time caps must be positive")


def build_parser():
    p = argparse.ArgumentParser(
        prog="sgslasso-bench",
        description="Constrained sparse group square-root Lasso benchmark runner",
    )
    p.add_argument("--solver", choices=["ssnal", "admm", "both"], default="ssnal")
    p.add_argument("--family", type=int, choices=[1, 2, 3], default=1)
    p.add_argument("--dataset", help="sparse 'label index:value' text file")
    p.add_argument("--spec-file", help="flat key=value generator config")
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--mE", type=int, default=0)
    p.add_argument("--mI", type=int, default=0)
    p.add_argument("--J", type=int, default=10)
    p.add_argument("--setting", choices=["S1", "S2"], default="S1")
    p.add_argument("--gamma", type=float, action="append", dest="gammas",
                   help="repeatable regularization scale")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-outer", type=int, default=200)
    p.add_argument("--max-admm", type=int, default=10000)
    p.add_argument("--time-cap", type=float, default=14400.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv-out")
    p.add_argument("--table-out")
    p.add_argument("--deterministic", action="store_true")
    return p


def config_from_args(args):
    return RunConfig(
        solver=args.solver, family=args.family, dataset=args.dataset,
        spec_file=args.spec_file, m=args.m, n=args.n, mE=args.mE, mI=args.mI,
        J=args.J, setting=args.setting, gammas=args.gammas or [1e-3],
        tol=args.tol, max_outer=args.max_outer, max_admm=args.max_admm,
        time_cap=args.time_cap, seed=args.seed, csv_out=args.csv_out,
        table_out=args.table_out, deterministic=args.deterministic,
    )


def problem_from_dataset(path, family, mE, mI, J):
    from .prox import PenaltyParams

    A, b = load_sparse_regression(path)
    n = A.shape[1]
    groups = GroupPartition.contiguous(n, min(J, n))
    BE = BI = None
    if family == 3:
        import numpy as np

        BE = np.ones((1, n))
    elif family in (1, 2):
        if mE:
            BE = _group_selector_rows(groups, 0, mE, n)
        if family == 1 and mI:
            BI = _group_selector_rows(groups, 2 * mE, mI, n)
    name = os.path.splitext(os.path.basename(path))[0]
    return Problem(A=A, b=b, groups=groups, params=PenaltyParams(0, 0),
                   BE=BE, BI=BI, name=name)


def build_problem(config):
    if config.dataset:
        return problem_from_dataset(
            config.dataset, config.family, config.mE, config.mI, config.J
        )
    if config.spec_file:
        spec = GeneratorSpec.from_config(config.spec_file)
    else:
        spec = GeneratorSpec(
            family=config.family, m=config.m, n=config.n, mE=config.mE,
            mI=config.mI, J=config.J, seed=config.seed,
        )
    return generate(spec)


def _solve_rows(problem, config):
    solvers = ["ssnal", "admm"] if config.solver == "both" else [config.solver]
    rows = []
    internal_error = False
    # largest regularization first; each solve warm-starts the next
    gammas = sorted(config.gammas, reverse=True)
    for solver in solvers:
        warm = None
        admm_factor = None
        for gamma in gammas:
            params = lambda_settings(problem.A, problem.b, gamma, config.setting)
            prob = problem.with_params(params)
            try:
                if solver == "ssnal":
                    alm_params = alm_mod.AlmParams(
                        tol=config.tol, max_outer=config.max_outer,
                        time_cap=config.time_cap,
                    )
                    point, rep = alm_mod.alm_solve(
                        prob, alm_params, SsnParams(), start=warm
                    )
                else:
                    admm_params = admm_mod.AdmmParams(
                        tol=config.tol, max_iter=config.max_admm,
                        time_cap=config.time_cap,
                    )
                    if admm_factor is None:
                        admm_factor = admm_mod.factorize_M(prob, admm_params)
                    point, rep = admm_mod.admm_solve(
                        prob, admm_params, start=warm, factor=admm_factor
                    )
            except Exception as exc:  # internal failure, not non-convergence
                print(f"error: {solver} failed on {prob.name}: {exc}",
                      file=sys.stderr)
                internal_error = True
                continue
            warm = point
            rows.append(ResultRow(
                pbname=prob.name, m=prob.m, n=prob.n, mE=prob.mE, mI=prob.mI,
                J=prob.groups.num_groups, setting=config.setting, gamma=gamma,
                solver=solver, lambda1=params.lam1, lambda2=params.lam2,
                nnz=rep.nnz, eta_kkt=rep.eta, RP=rep.RP, RD=rep.RD, RC=rep.RC,
                RG=rep.RG, pobj=rep.pobj, dobj=rep.dobj,
                iterations=rep.iterations,
                newton_iterations=getattr(rep, "newton_iterations", 0),
                time_s=rep.wall_time, termination=rep.termination,
            ))
    return rows, internal_error


def write_csv(path, rows, deterministic=False):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.csv_values(deterministic))


def format_table(rows, deterministic=False):
    """Aligned text table of benchmark results, one line per solve."""
    if not rows:
        raise ValueError("no rows to format")
    header = ["pbname", "solver", "lambda1", "lambda2", "nnz", "eta_kkt",
              "pobj", "iter", "time"]
    lines = [header]
    for r in rows:
        iters = (f"{r.iterations}({r.newton_iterations})"
                 if r.solver == "ssnal" else str(r.iterations))
        lines.append([
            f"{r.pbname}({r.m},{r.n},{r.mE},{r.mI});{r.J}",
            r.solver,
            format_sci(r.lambda1, 4),
            format_sci(r.lambda2, 4),
            str(r.nnz),
            format_sci(r.eta_kkt, 2),
            format_sci(r.pobj, 5),
            iters,
            format_time(0.0 if deterministic else r.time_s),
        ])
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    out = []
    for line in lines:
        out.append("  ".join(cell.rjust(w) for cell, w in zip(line, widths)))
    return "\n".join(out) + "\n"


def run(config):
    """Execute the configured solves; returns a process exit code."""
    if config.dataset and not os.path.exists(config.dataset):
        print(f"error: dataset not found: {config.dataset}", file=sys.stderr)
        return 3
    try:
        problem = build_problem(config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rows, internal_error = _solve_rows(problem, config)
    outdir = os.environ.get("SGSLASSO_OUTPUT_DIR", ".")
    os.makedirs(outdir, exist_ok=True)
    csv_path = config.csv_out or os.path.join(outdir, "results.csv")
    table_path = config.table_out or os.path.join(outdir, "results.txt")
    write_csv(csv_path, rows, config.deterministic)
    table = format_table(rows, config.deterministic) if rows else ""
    with open(table_path, "w") as fh:
        fh.write(table)
    sys.stdout.write(table)
    return 1 if internal_error else 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = config_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
