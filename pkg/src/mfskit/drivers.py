"""End-to-end experiment drivers: data fitting, Dirichlet and Cauchy runs
plus the growing-data convergence study.

Each driver sweeps a schedule of data sizes N with weights b_N -> 0,
solves the regularized fitting problem on an exterior-source dictionary,
builds the sparse interpolating representer, and records diagnostics and
the interior sup-error against the closed-form truth on an evaluation
compact (weak convergence is observed as uniform convergence there).
"""

import math
import time
from dataclasses import dataclass, field as dfield

import numpy as np

from . import fields, geometry, kernels, measurement, norms, representer, solver

GOLDEN_ANGLE = math.pi * (3 - math.sqrt(5))


@dataclass(frozen=True)
class ExperimentSpec:
    problem: str                     # datafit | dirichlet | cauchy
    domain: object
    kernel_id: str = "laplace2d"
    truth_id: str = "saddle"
    n_schedule: tuple = (8, 16, 32, 64)
    b_rule: float = 1e-2             # b_N = b_rule / N
    b_schedule: tuple = None         # overrides b_rule when given
    q: float = 2.0
    rho: float = 2.0
    dict_factor: int = 4             # dictionary sources per functional
    norm_spec: norms.NormSpec = dfield(default_factory=norms.NormSpec)
    eval_radius: float = 0.5
    eval_points: int = 180
    train_factor: float = 0.8        # interior training shell, datafit
    arc_fraction: float = 0.5        # Gamma arc, cauchy
    noise: float = 0.0
    seed: int = 0
    max_iter: int = 20000
    tol_rel: float = 1e-9

    def b_of(self, n):
        if self.b_schedule is not None:
            return float(self.b_schedule[list(self.n_schedule).index(n)])
        return self.b_rule / n


def spec_from_config(cfg):
    dom = geometry.domain_from_config(cfg["domain"])
    kwargs = {k: cfg[k] for k in (
        "kernel_id", "truth_id", "b_rule", "q", "rho", "dict_factor",
        "eval_radius", "eval_points", "train_factor", "arc_fraction",
        "noise", "seed", "max_iter", "tol_rel") if k in cfg}
    if "n_schedule" in cfg:
        kwargs["n_schedule"] = tuple(int(n) for n in cfg["n_schedule"])
    if "b_schedule" in cfg:
        kwargs["b_schedule"] = tuple(float(b) for b in cfg["b_schedule"])
    if "norm" in cfg:
        kwargs["norm_spec"] = norms.spec_from_config(cfg["norm"])
    return ExperimentSpec(cfg["problem"], dom, **kwargs)


@dataclass
class ConvergenceRecord:
    rows: list
    sparse: list

    COLUMNS = ("N", "b", "objective", "misfit", "norm", "duality_gap",
               "optimality_residual", "cond_W", "interp_residual",
               "norm_ratio", "sup_err", "sup_err_far", "certificate_ratio")

    def column(self, name):
        return np.array([r[name] for r in self.rows])


def _sunflower_disk(domain, count, factor):
    """Deterministic well-spread interior points (2D sunflower spiral)."""
    c = geometry.centroid(domain)
    i = np.arange(count) + 0.5
    r = factor * domain.radius * np.sqrt(i / count)
    th = GOLDEN_ANGLE * np.arange(count)
    return c + np.column_stack([r * np.cos(th), r * np.sin(th)])


def _interior_points(spec, n):
    dom = spec.domain
    if isinstance(dom, geometry.Ball):
        c = geometry.centroid(dom)
        dirs = geometry._fibonacci_sphere(n)
        radii = spec.train_factor * dom.radius * ((np.arange(n) + 0.5) / n) ** (1 / 3)
        return c + radii[:, None] * dirs
    return _sunflower_disk(dom, n, spec.train_factor)


def _boundary_points(spec, n, arc_fraction=1.0):
    dom = spec.domain
    if isinstance(dom, geometry.Ball):
        c = geometry.centroid(dom)
        dirs = geometry._fibonacci_sphere(n)
        return c + dom.radius * dirs, dirs
    bq = geometry.build_boundary_quadrature(dom, max(n * 8, 64))
    idx = (np.floor((np.arange(n) + 0.5) / n * arc_fraction * len(bq.nodes))
           ).astype(int)
    return bq.nodes[idx], bq.normals[idx]


def _values_matrix(field, pts):
    """Field values as an (n, k) matrix regardless of scalar/vector output."""
    v = np.asarray(field.value(pts), dtype=np.float64)
    return v[:, None] if v.ndim == 1 else v


def _eval_compact(spec, kernel):
    c = geometry.centroid(spec.domain)
    if isinstance(spec.domain, geometry.Ball):
        pts = c + spec.eval_radius * geometry._fibonacci_sphere(spec.eval_points)
        return pts, np.ones(len(pts), dtype=bool)
    th = 2 * np.pi * (np.arange(spec.eval_points) + 0.5) / spec.eval_points
    pts = c + spec.eval_radius * np.column_stack([np.cos(th), np.sin(th)])
    near = th < 2 * np.pi * spec.arc_fraction
    return pts, near


def truth_norm(norm_spec, field, domain, kernel):
    """Discretized regularizer norm of a closed-form field."""
    if norm_spec.kind in ("l2-interior", "h1-interior", "lp-interior"):
        nodes, w = geometry.interior_quadrature(domain, norm_spec.radial,
                                                norm_spec.angular)
        rows = [_values_matrix(field, nodes)]
        wts = [w]
        if norm_spec.kind == "h1-interior":
            g = field.gradient(nodes)
            for d in range(g.shape[1]):
                rows.append(g[:, d][:, None])
                wts.append(w)
    else:
        bq = geometry.build_boundary_quadrature(domain, norm_spec.boundary_nodes)
        rows = [_values_matrix(field, bq.nodes)]
        wts = [bq.weights]
        if kernel.order > 1:
            g = field.gradient(bq.nodes)
            rows.append(np.einsum("qd,qd->q", bq.normals, g)[:, None])
            wts.append(bq.weights)
    p = norm_spec.p
    total = sum(float(w @ np.sum(np.abs(r) ** p, axis=1))
                for r, w in zip(rows, wts))
    return total ** (1.0 / p)


def _functionals_and_data(spec, kernel, n, rng):
    """Build the per-N functional list and the exact (or noisy) data vector."""
    truth = fields.get_field(spec.truth_id)
    k = kernel.ncomp
    if spec.problem == "datafit":
        pts = _interior_points(spec, n)
        funcs = [measurement.PointEval(tuple(x), c)
                 for x in pts for c in range(k)]
        h0 = _values_matrix(truth, pts).ravel()
    elif spec.problem == "dirichlet":
        pts, _ = _boundary_points(spec, n)
        funcs = [measurement.TraceEval(0, tuple(x), c)
                 for x in pts for c in range(k)]
        h0 = _values_matrix(truth, pts).ravel()
    elif spec.problem == "cauchy":
        pts, nrm = _boundary_points(spec, n, spec.arc_fraction)
        funcs = []
        data = []
        uv = truth.value(pts)
        du = np.einsum("qd,qd->q", nrm, truth.gradient(pts))
        for i, x in enumerate(pts):
            funcs.append(measurement.TraceEval(0, tuple(x)))
            data.append(float(np.atleast_1d(uv[i])[0]))
            funcs.append(measurement.TraceEval(1, tuple(x)))
            data.append(float(du[i]))
        h0 = np.array(data)
    else:
        raise ValueError(f"unknown problem {spec.problem!r}")
    if spec.noise:
        h0 = h0 + spec.noise * rng.standard_normal(len(h0))
    return tuple(funcs), h0


def _run_schedule(spec):
    kernel = kernels.make_kernel(spec.kernel_id)
    truth = fields.get_field(spec.truth_id)
    eval_pts, near_mask = _eval_compact(spec, kernel)
    truth_eval = _values_matrix(truth, eval_pts)
    rng = np.random.default_rng(spec.seed)
    rows = []
    sparses = []
    for n in spec.n_schedule:
        t0 = time.perf_counter()
        b = spec.b_of(n)
        funcs, h0 = _functionals_and_data(spec, kernel, n, rng)
        m = measurement.MeasurementOperator(funcs, spec.domain, kernel)
        nsrc_dict = max(spec.dict_factor * len(funcs) // kernel.ncomp, len(funcs))
        dictionary = measurement.make_dictionary(
            kernel, geometry.place_sources(spec.domain, nsrc_dict, spec.rho))
        a = measurement.assemble_matrix(m, dictionary)
        gramdata = norms.gram(spec.norm_spec, dictionary, spec.domain, kernel)
        fspec = solver.DataFunctionalSpec(spec.q, h0)
        cfg = solver.SolveConfig(b, spec.max_iter, spec.tol_rel, seed=spec.seed)
        primal = solver.solve_primal_matrix(a, gramdata, fspec, cfg)
        if 1.0 < spec.q < np.inf:
            dual = solver.solve_dual_matrix(a, gramdata, fspec, cfg)
            diag = solver.check_optimality(primal, dual, a, gramdata, b)
            gap, opt_res = diag.duality_gap, diag.optimality_residual
        else:
            gap = opt_res = float("nan")
        u_dict = dictionary.expansion(primal.coefficients, kernel)
        g = a @ primal.coefficients
        n_w = len(funcs) // kernel.ncomp
        selected = representer.select_sources(m, kernel, dictionary.sources, n_w)
        wm = representer.assemble_W(m, kernel, selected)
        sparse = representer.build_sparse(wm, g)
        report = representer.verify_representer(
            sparse, m, g, fspec, spec.norm_spec, primal, b)
        uvals = kernels.expansion_values(kernel, u_dict, eval_pts)
        err = np.max(np.abs(uvals - truth_eval), axis=1)
        sup_near = float(np.max(err[near_mask])) if near_mask.any() else float("nan")
        sup_far = float(np.max(err[~near_mask])) if (~near_mask).any() else float("nan")
        rows.append({
            "N": int(n),
            "b": b,
            "objective": primal.objective,
            "misfit": primal.misfit,
            "norm": primal.norm_value,
            "duality_gap": gap,
            "optimality_residual": opt_res,
            "cond_W": wm.cond,
            "interp_residual": report["interp_residual"],
            "norm_ratio": report["norm_ratio"],
            "sup_err": sup_near,
            "sup_err_far": sup_far,
            "certificate_ratio": primal.misfit / b,
            "wall_time": time.perf_counter() - t0,
        })
        sparses.append(sparse)
    return ConvergenceRecord(rows, sparses)


def run_datafit(spec):
    if spec.problem != "datafit":
        raise ValueError("spec.problem must be 'datafit'")
    return _run_schedule(spec)


def run_dirichlet(spec):
    if spec.problem != "dirichlet":
        raise ValueError("spec.problem must be 'dirichlet'")
    return _run_schedule(spec)


def run_cauchy(spec):
    if spec.problem != "cauchy":
        raise ValueError("spec.problem must be 'cauchy'")
    return _run_schedule(spec)


def run(spec):
    return _run_schedule(spec)


def weak_convergence_probe(record, truth_norm_value, bound_factor=3.0,
                           growth_threshold=10.0):
    """Solvability certificate from the misfit-over-b_N ratios.

    Consistent data keeps F(u0)/b_N bounded (by the truth norm up to the
    bound factor); for unsolvable data the ratio blows up along the
    schedule.
    """
    ratios = record.column("certificate_ratio")
    c0 = float(np.max(ratios)) if len(ratios) else 0.0
    bounded = c0 <= bound_factor * truth_norm_value
    growth = float(ratios[-1] / ratios[0]) if ratios[0] > 0 else float("inf")
    if bounded:
        verdict = "consistent"
    elif growth >= growth_threshold:
        verdict = "no-solution-evidence"
    else:
        verdict = "inconclusive"
    sup = record.column("sup_err")
    return {
        "C0": c0,
        "bounded": bool(bounded),
        "growth": growth,
        "verdict": verdict,
        "sup_err_trend_ok": bool(len(sup) < 2 or sup[-1] <= sup[-2] * (1 + 1e-9)),
    }
