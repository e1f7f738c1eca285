"""Batch command-line front end.

JSON config in, CSV + JSON out.  Subcommands: solve, representer,
degeneracy-probe, green-check, converge.  Exit codes: 0 success,
2 validation error, 3 numerical failure; failures print a machine-readable
error JSON {code, message, context} to stderr.

Outputs are deterministic for a fixed config and seed; per-row wall-clock
times go to a separate timings.json that is excluded from that guarantee.
"""

import argparse
import csv
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, drivers, fields, geometry, green, kernels
from . import measurement, norms, representer, solver
from .errors import (MfskitError, NearBoundary, NonConvergence,
                     SingularEvaluation, SingularGram, SingularW)

NUMERICAL_ERRORS = (NonConvergence, SingularW, SingularGram,
                    SingularEvaluation, NearBoundary)

log = logging.getLogger("mfskit")


class ConfigError(Exception):
    def __init__(self, code, message, context=None):
        super().__init__(message)
        self.code = code
        self.context = context or {}


def _canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(cfg):
    return hashlib.sha256(_canonical(cfg).encode()).hexdigest()


def _load_config(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError("config-not-found", f"no config file at {path}",
                          {"path": str(path)})
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("invalid-json", str(exc), {"path": str(path)}) from None


def _stamp(cfg, payload):
    payload["config_sha256"] = config_hash(cfg)
    payload["version"] = __version__
    return payload


def _round_trip(x):
    """Make numpy scalars/arrays JSON-serializable."""
    if isinstance(x, dict):
        return {k: _round_trip(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round_trip(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


def _write_json(outdir, name, cfg, payload):
    path = Path(outdir) / name
    path.write_text(json.dumps(_stamp(cfg, _round_trip(payload)),
                               sort_keys=True, indent=1) + "\n")
    log.info("wrote %s", path)


def _write_csv(outdir, name, header, rows):
    path = Path(outdir) / name
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating))
                        else v for v in row])
    log.info("wrote %s", path)


def _problem_pieces(cfg):
    """Shared parsing for solve/representer: operator, data, norm, weight."""
    dom = geometry.domain_from_config(cfg["domain"])
    kernel = kernels.make_kernel(cfg.get("kernel", "laplace2d"))
    funcs = measurement.functionals_from_config(cfg["functionals"])
    m = measurement.MeasurementOperator(funcs, dom, kernel)
    data = cfg["data"]
    if "values" in data:
        h0 = np.asarray(data["values"], dtype=np.float64)
        if len(h0) != m.size:
            raise ValueError("data length must match the functional count")
    else:
        h0 = _target_from_field(m, fields.get_field(data["field"]))
    nspec = norms.spec_from_config(cfg.get("norm", {}))
    fspec = solver.DataFunctionalSpec(float(cfg.get("q", 2.0)), h0)
    b = float(cfg["b"])
    return dom, kernel, m, fspec, nspec, b


def _target_from_field(m, field):
    """Exact data vector: the functionals applied to a closed-form field."""
    out = np.empty(m.size)
    for i, f in enumerate(m.functionals):
        if isinstance(f, measurement.WeakPairing):
            raise ValueError("weak functionals need explicit data values")
        x = np.asarray(f.x, dtype=np.float64)
        op = getattr(f, "op_index", 0)
        if op == 0:
            out[i] = np.atleast_2d(np.asarray(field.value(x[None, :])))[0].ravel()[f.component]
        else:
            nu = geometry.boundary_normal_at(m.domain, x)
            out[i] = float(nu @ field.gradient(x[None, :])[0])
    return out


def _dictionary(cfg, dom, kernel, m):
    dcfg = cfg.get("dictionary", {})
    count = int(dcfg.get("count", 4 * m.size // kernel.ncomp))
    rho = float(dcfg.get("rho", 2.0))
    return measurement.make_dictionary(
        kernel, geometry.place_sources(dom, count, rho))


def cmd_solve(cfg, outdir, seed):
    dom, kernel, m, fspec, nspec, b = _problem_pieces(cfg)
    dictionary = _dictionary(cfg, dom, kernel, m)
    a = measurement.assemble_matrix(m, dictionary)
    gramdata = norms.gram(nspec, dictionary, dom, kernel)
    scfg = solver.SolveConfig(b, int(cfg.get("max_iter", 20000)),
                              float(cfg.get("tol_rel", 1e-9)), seed=seed,
                              method=cfg.get("method", "auto"))
    primal = solver.solve_primal_matrix(a, gramdata, fspec, scfg)
    payload = {
        "objective": primal.objective,
        "norm": primal.norm_value,
        "misfit": primal.misfit,
        "iterations": primal.iterations,
        "method": primal.method,
        "dictionary_size": dictionary.natoms,
        "gram_shift": gramdata.shift,
        "seed": seed,
    }
    if 1.0 < fspec.q < np.inf:
        dual = solver.solve_dual_matrix(a, gramdata, fspec, scfg)
        diag = solver.check_optimality(primal, dual, a, gramdata, b)
        payload["duality_gap"] = diag.duality_gap
        payload["optimality_residual"] = diag.optimality_residual
    _write_json(outdir, "solve.json", cfg, payload)
    n_src = len(dictionary.sources)
    coeff = primal.coefficients.reshape(n_src, kernel.ncomp)
    rows = [(j, *dictionary.sources[j], *coeff[j]) for j in range(n_src)]
    coord = [f"y{d + 1}" for d in range(kernel.ndim)]
    comp = [f"c{r}" for r in range(kernel.ncomp)]
    _write_csv(outdir, "coefficients.csv", ["source", *coord, *comp], rows)
    return 0


def cmd_representer(cfg, outdir, seed):
    dom, kernel, m, fspec, nspec, b = _problem_pieces(cfg)
    dictionary = _dictionary(cfg, dom, kernel, m)
    a = measurement.assemble_matrix(m, dictionary)
    gramdata = norms.gram(nspec, dictionary, dom, kernel)
    scfg = solver.SolveConfig(b, int(cfg.get("max_iter", 20000)),
                              float(cfg.get("tol_rel", 1e-9)), seed=seed)
    primal = solver.solve_primal_matrix(a, gramdata, fspec, scfg)
    g = a @ primal.coefficients
    n_src = m.size // kernel.ncomp
    selected = representer.select_sources(m, kernel, dictionary.sources, n_src)
    wm = representer.assemble_W(m, kernel, selected)
    sparse = representer.build_sparse(wm, g)
    report = representer.verify_representer(sparse, m, g, fspec, nspec, primal, b)
    report.update({"cond_W": wm.cond, "logabsdet_W": wm.logabsdet,
                   "n_sources": int(n_src), "seed": seed})
    _write_json(outdir, "representer.json", cfg, report)
    coeff = sparse.expansion.coefficients
    rows = [(j, *selected[j], *coeff[j]) for j in range(len(selected))]
    coord = [f"y{d + 1}" for d in range(kernel.ndim)]
    comp = [f"c{r}" for r in range(kernel.ncomp)]
    _write_csv(outdir, "representer.csv", ["source", *coord, *comp], rows)
    return 0


def cmd_degeneracy_probe(cfg, outdir, seed):
    dom = geometry.domain_from_config(cfg["domain"])
    kernel = kernels.make_kernel(cfg.get("kernel", "laplace3d"))
    funcs = measurement.functionals_from_config(cfg["functionals"])
    m = measurement.MeasurementOperator(funcs, dom, kernel)
    fixed = np.asarray(cfg["fixed_sources"], dtype=np.float64)
    candidates = np.asarray(cfg["candidates"], dtype=np.float64)
    field = representer.degeneracy_scan(m, kernel, fixed, candidates)
    scales = []
    for y in candidates:
        wm = representer.assemble_W(m, kernel, np.vstack([fixed, y[None, :]]))
        scales.append(wm.scale)
    coord = [f"y{d + 1}" for d in range(kernel.ndim)]
    rows = [(*candidates[i], field.absdet[i], field.sign[i], field.cond[i],
             scales[i], field.absdet[i] / scales[i] if scales[i] > 0 else np.inf)
            for i in range(len(candidates))]
    _write_csv(outdir, "degeneracy.csv",
               [*coord, "absdet", "sign", "cond", "scale", "absdet_rel"], rows)
    rel = field.absdet / np.asarray(scales)
    payload = {
        "n_candidates": int(len(candidates)),
        "min_absdet_rel": float(np.min(rel)),
        "argmin_candidate": candidates[int(np.argmin(rel))].tolist(),
        "zero_crossings": field.zero_crossings().tolist(),
        "seed": seed,
    }
    _write_json(outdir, "degeneracy.json", cfg, payload)
    return 0


def cmd_green_check(cfg, outdir, seed):
    dom = geometry.domain_from_config(cfg["domain"])
    kernel = kernels.make_kernel(cfg.get("kernel", "laplace2d"))
    field = fields.get_field(cfg.get("field", "saddle"))
    x = np.asarray(cfg["point"], dtype=np.float64)
    counts = [int(n) for n in cfg.get("node_counts", (16, 32, 64, 128, 256))]
    rows, order = green.reproduce_convergence(kernel, dom, field, x, counts)
    table = [(r["nodes"], r["error"], *np.atleast_1d(r["value"]),
              *np.atleast_1d(r["truth"])) for r in rows]
    vcols = [f"value{r}" for r in range(kernel.ncomp)]
    tcols = [f"truth{r}" for r in range(kernel.ncomp)]
    _write_csv(outdir, "greencheck.csv", ["nodes", "error", *vcols, *tcols], table)
    _write_json(outdir, "greencheck.json", cfg, {
        "fitted_order": order,
        "final_error": rows[-1]["error"],
        "inside": bool(geometry.contains(dom, x)),
        "seed": seed,
    })
    return 0


def cmd_converge(cfg, outdir, seed):
    cfg_run = dict(cfg)
    cfg_run.setdefault("seed", seed)
    spec = drivers.spec_from_config(cfg_run)
    record = drivers.run(spec)
    kernel = kernels.make_kernel(spec.kernel_id)
    tn = drivers.truth_norm(spec.norm_spec, fields.get_field(spec.truth_id),
                            spec.domain, kernel)
    probe = drivers.weak_convergence_probe(record, tn)
    cols = drivers.ConvergenceRecord.COLUMNS
    _write_csv(outdir, "converge.csv", cols,
               [tuple(r[c] for c in cols) for r in record.rows])
    probe["truth_norm"] = tn
    probe["seed"] = seed
    _write_json(outdir, "converge.json", cfg, probe)
    timings = {"rows": [{"N": r["N"], "wall_time": r["wall_time"]}
                        for r in record.rows]}
    (Path(outdir) / "timings.json").write_text(
        json.dumps(timings, indent=1) + "\n")
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "representer": cmd_representer,
    "degeneracy-probe": cmd_degeneracy_probe,
    "green-check": cmd_green_check,
    "converge": cmd_converge,
}


def build_parser():
    p = argparse.ArgumentParser(
        prog="mfskit",
        description="Sparse minimizers over fundamental-solution dictionaries.")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON config path")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--threads", type=int, default=None,
                        help="cap BLAS worker threads (default: all cores)")
        sp.add_argument("--log", default="warning",
                        choices=["debug", "info", "warning", "error"])
    return p


def _error_json(code, message, context):
    print(json.dumps({"code": code, "message": str(message),
                      "context": _round_trip(context)}), file=sys.stderr)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            _error_json("invalid-arguments", "argument parsing failed", {})
            return 2
        return 0
    logging.basicConfig(level=args.log.upper(), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None:
        import threadpoolctl
        threadpoolctl.threadpool_limits(args.threads)
    try:
        cfg = _load_config(args.config)
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        return COMMANDS[args.subcommand](cfg, outdir, seed)
    except ConfigError as exc:
        _error_json(exc.code, exc, exc.context)
        return 2
    except (KeyError, ValueError, TypeError) as exc:
        _error_json("invalid-config", exc, {"subcommand": args.subcommand})
        return 2
    except MfskitError as exc:
        name = type(exc).__name__
        code = "".join("-" + ch.lower() if ch.isupper() else ch
                       for ch in name).lstrip("-")
        _error_json(code, exc, {"subcommand": args.subcommand, "type": name})
        # config-level misuse (bad domain, bad dilation, ...) is a
        # validation error; solver/linear-algebra breakdown is numerical
        return 3 if isinstance(exc, NUMERICAL_ERRORS) else 2


if __name__ == "__main__":
    sys.exit(main())
