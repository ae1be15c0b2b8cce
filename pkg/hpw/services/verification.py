"""
验证套件：把各模块的不变量与性质汇总为可执行的检查
"""
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gamma as gamma_fn

from hpw.config.run_config import inequality_grid
from hpw.models.group import GroupPoint
from hpw.models.inequality import InequalityConfig
from hpw.models.run_config import RunConfig
from hpw.models.spectral import CalibrationConstants, FourierField
from hpw.models.verification import CheckResult, SuiteName
from hpw.services import schatten
from hpw.services.function_family import GaussianFunction, GroupFunction
from hpw.services.group_fourier import (
    adjoint_residual,
    dilation_covariance_residual,
    fourier_field,
    inversion_errors,
    invert,
    lambda_grid,
    outer_panel_share,
    plancherel_sum,
    rep_apply,
    rep_leakage_residual,
    resolution_residual,
)
from hpw.services.group_model import (
    group_axiom_residuals,
    homogeneity_residual,
    quasi_triangle_constant,
    random_points,
)
from hpw.services.groups.base_group import BaseGroup
from hpw.services.groups.group_factory import GroupFactory
from hpw.services.hermite_spectral import (
    cached_gauss_hermite,
    eigenvalue_estimate_ratios,
    gauss_hermite_nodes,
    multi_index_array,
    ode_residual,
    pfaffian_ratio,
    scaled_hermite_eval,
    spectral_parameter,
)
from hpw.services.hpw_harness import (
    fourier_term_lp,
    fourier_term_p1,
    frequency_count_exponent,
    hausdorff_young_ratio,
    hpw_report,
    lp_norm,
    p1_refinement_sensitivity,
    spectral_tail_mass,
    tail_bound_check,
)
from hpw.utils.logger import Logger
from hpw.utils.response import DimensionMismatchError, SidecarError, UsageError

logger = Logger(__name__)

AXIOM_TOLERANCE = 1e-12
AXIOM_SAMPLES = 10_000


class _Context:
    """一次验证运行共享的群、网格、求积与已计算的Fourier场"""

    def __init__(self, cfg: RunConfig, consts: Optional[CalibrationConstants]):
        self.cfg = cfg
        self.consts = consts
        self.group = GroupFactory.create(cfg.group)
        self.quad = cfg.quadrature()
        self.grid = lambda_grid(self.group, cfg.lambda_grid)
        self.rng = np.random.default_rng(cfg.seed)
        self._fields: List[Tuple[GroupFunction, FourierField]] = []
        self._base: Optional[GaussianFunction] = None
        self._held_out: Optional[List[GaussianFunction]] = None

    @property
    def metadata(self) -> Dict:
        return {
            "cutoff": self.cfg.cutoff,
            "hermite_nodes": self.quad.hermite_nodes,
            "lambda_grid": self.cfg.lambda_grid.model_dump(),
            "box": self.quad.box.model_dump(),
        }

    def base_function(self) -> GaussianFunction:
        if self._base is None:
            self._base = GaussianFunction(self.group, self.cfg.family.members[0])
        return self._base

    def field(self, f: GroupFunction) -> FourierField:
        for cached, field in self._fields:
            if cached is f:
                return field
        field = fourier_field(f, self.group, self.grid, self.cfg.cutoff, self.quad)
        self._fields.append((f, field))
        return field

    def require_consts(self) -> CalibrationConstants:
        if self.consts is None:
            raise SidecarError("该验证套件需要校准常数，请先运行 calibrate")
        return self.consts

    def held_out(self) -> List[GaussianFunction]:
        if self._held_out is not None:
            return self._held_out
        out = []
        for params in self.cfg.family.held_out:
            try:
                out.append(GaussianFunction(self.group, params))
            except DimensionMismatchError as e:
                logger.warning("跳过与群维数不符的留出函数", {"reason": e.message})
        self._held_out = out
        return out


def _check(suite: str, name: str, value: float, threshold: float, ctx: Optional[_Context] = None,
           detail: str = "", mode: str = "le", **extra) -> CheckResult:
    if mode == "le":
        passed = bool(value <= threshold)
    elif mode == "ge":
        passed = bool(value >= threshold)
    else:
        passed = bool(value > threshold)
    if not math.isfinite(value):
        passed = False
    metadata = dict(ctx.metadata) if ctx is not None else {}
    metadata.update(extra)
    return CheckResult(name=name, suite=suite, passed=passed, value=float(value), threshold=threshold,
                       detail=detail, metadata=metadata)


# ---------------------------------------------------------------- group

def group_suite(ctx: _Context) -> List[CheckResult]:
    suite = SuiteName.GROUP.value
    results = []
    for name, residual in group_axiom_residuals(ctx.group, AXIOM_SAMPLES, ctx.rng):
        results.append(_check(suite, name, residual, AXIOM_TOLERANCE, detail=f"{AXIOM_SAMPLES}个随机样本上的最大残差"))

    f = ctx.base_function()
    reference = f.lp_norm(1.0) * float(np.sign(f.params.amplitude)) if f.params.modulation is None else None
    for r in (0.5, 2.0):
        residual = homogeneity_residual(f, ctx.group, ctx.cfg.haar, r, reference=reference)
        results.append(_check(suite, f"haar_homogeneity_r{r:g}", residual, 1e-6,
                              detail="∫f∘δ_r = r^{-Q}∫f", box=ctx.cfg.haar.model_dump()))

    estimate = quasi_triangle_constant(ctx.group, AXIOM_SAMPLES, ctx.rng)
    results.append(_check(suite, "quasi_triangle_drift", estimate.relative_drift, 0.1,
                          detail=f"C≈{estimate.constant:.6f}，前半样本{estimate.half_sample_constant:.6f}"))
    return results


# ---------------------------------------------------------------- hermite

def hermite_suite(ctx: _Context) -> List[CheckResult]:
    suite = SuiteName.HERMITE.value
    results = []
    count = 64
    s, w = cached_gauss_hermite(count)
    worst = 0.0
    for eta in (0.5, 1.0, 3.0):
        xi = s / math.sqrt(eta)
        values = np.array([scaled_hermite_eval(m, eta, xi) for m in range(9)])
        gram = (values * (w / math.sqrt(eta))[None, :]) @ values.T
        worst = max(worst, float(np.max(np.abs(gram - np.eye(9)))))
    results.append(_check(suite, "gram_identity", worst, 1e-10, detail="|α| ≤ 8，η ∈ {0.5, 1, 3}"))

    nodes, weights = gauss_hermite_nodes(20)
    moment_error = max(
        abs(float(np.sum(weights * nodes ** (2 * j))) - float(gamma_fn(j + 0.5))) / float(gamma_fn(j + 0.5))
        for j in range(20)
    )
    results.append(_check(suite, "gauss_hermite_moments", moment_error, 1e-10, detail="20节点，偶数阶矩"))

    tau = np.linspace(-6.0, 6.0, 61)
    ode = max(float(np.max(ode_residual(m, tau))) for m in range(31))
    results.append(_check(suite, "hermite_ode_residual", ode, 1e-4, detail="m ≤ 30，中心差分"))

    low, high, pf_dev = math.inf, -math.inf, 0.0
    for lam in ctx.grid.lambdas:
        sp = spectral_parameter(ctx.group, lam)
        ratios = eigenvalue_estimate_ratios(sp, 30)
        low, high = min(low, float(ratios.min())), max(high, float(ratios.max()))
        pf_dev = max(pf_dev, abs(pfaffian_ratio(sp) - 1.0))
    results.append(_check(suite, "eigenvalue_estimate_lower", low, 1.0 - 1e-12, mode="ge", detail="|α| ≤ 30"))
    results.append(_check(suite, "eigenvalue_estimate_upper", high, 2.0 + 1e-12, detail="|α| ≤ 30"))
    results.append(_check(suite, "pfaffian_norm_ratio", pf_dev, 1e-12, detail="|Pf(λ)|/‖λ‖^n − 1"))
    return results


# ---------------------------------------------------------------- fourier

def _unit_parameter(group: BaseGroup, scale: float = 1.0):
    lam = np.zeros(group.k)
    lam[0] = scale
    return spectral_parameter(group, lam)


def _plancherel_error(ctx: _Context, f: GaussianFunction, consts: CalibrationConstants) -> float:
    exact = f.l2_norm_squared()
    return abs(plancherel_sum(ctx.field(f), consts) - exact) / exact


def fourier_suite(ctx: _Context) -> List[CheckResult]:
    suite = SuiteName.FOURIER.value
    consts = ctx.require_consts()
    results = []
    group, cutoff, quad = ctx.group, ctx.cfg.cutoff, ctx.quad
    sp = _unit_parameter(group)
    dim = multi_index_array(group.n, cutoff).shape[0]

    coeffs = ctx.rng.standard_normal(dim) + 1j * ctx.rng.standard_normal(dim)
    identity_err = float(np.max(np.abs(rep_apply(GroupPoint.identity(group.n, group.k), sp, coeffs) - coeffs)))
    results.append(_check(suite, "rep_identity", identity_err, 1e-10, ctx))
    t = ctx.rng.uniform(-2.0, 2.0, size=group.k)
    central = GroupPoint(p=(0.0,) * group.n, q=(0.0,) * group.n, t=tuple(t))
    phase = np.exp(1j * float(t @ sp.lam_array))
    central_err = float(np.max(np.abs(rep_apply(central, sp, coeffs) - phase * coeffs)))
    results.append(_check(suite, "rep_central_character", central_err, 1e-10, ctx))

    v, tt = random_points(group, 1, ctx.rng, scale=1.0)
    leakage = rep_leakage_residual(GroupPoint.from_arrays(v[0], tt[0]), sp, cutoff)
    results.append(_check(suite, "rep_column_leakage", leakage["residual"], 1e-4, ctx,
                          detail="|α| ≤ N−8，|p|,|q| ≤ 1，以N+8截断为参照", leakage=leakage["leakage"]))

    f = ctx.base_function()
    for r, lam_scale in ((2.0, 1.0), (0.5, 2.0)):
        residual = dilation_covariance_residual(f, r, _unit_parameter(group, lam_scale), cutoff, quad)
        results.append(_check(suite, f"dilation_covariance_r{r:g}", residual, 1e-6, ctx, lam=lam_scale))
    results.append(_check(suite, "adjoint_identity", adjoint_residual(f, sp, cutoff, quad), 1e-8, ctx))
    results.append(_check(suite, "gft_double_resolution", resolution_residual(f, sp, cutoff, quad), 1e-6, ctx,
                          detail="加倍节点与N+8截断的参照"))

    errors = [_plancherel_error(ctx, h, consts) for h in ctx.held_out()]
    results.append(_check(suite, "plancherel_held_out", max(errors) if errors else math.nan, 5e-3, ctx,
                          detail=f"{len(errors)}个留出函数的最大相对误差"))

    field = ctx.field(f)
    share = outer_panel_share(field, ctx.grid)
    results.append(_check(suite, "lambda_outer_panel_share", share["outer"], 1e-3, ctx,
                          detail="最外层Λ面板的Plancherel质量占比", inner_share=share["inner"]))
    identity_point = GroupPoint.identity(group.n, group.k)
    kappa_err = abs(invert(field, identity_point, consts) - f.value_at(identity_point)) / abs(f.value_at(identity_point))
    results.append(_check(suite, "inversion_at_identity", kappa_err, 1e-2, ctx))

    v, tt = random_points(group, 20, ctx.rng, scale=1.0)
    points = [GroupPoint.from_arrays(v[i], tt[i]) for i in range(20)]
    point_err = float(np.max(inversion_errors(field, f, points, consts)))
    results.append(_check(suite, "inversion_random_points", point_err, 1e-2, ctx, detail="20个随机点"))

    if f.is_real:
        imag = max(abs(invert(field, x, consts).imag) for x in points)
        results.append(_check(suite, "inversion_conjugate_symmetry", imag, 1e-6 * abs(f.params.amplitude), ctx))

    levels = _refinement_levels(ctx)
    level_errors = []
    for level_cutoff, grid in levels:
        level_field = fourier_field(f, group, grid, level_cutoff, quad)
        level_errors.append(float(np.max(inversion_errors(level_field, f, points, consts))))
    monotone = all(b <= a for a, b in zip(level_errors, level_errors[1:]))
    results.append(CheckResult(
        name="inversion_refinement_monotone", suite=suite, passed=monotone,
        value=level_errors[-1], threshold=None, detail=f"各加密层级误差: {level_errors}",
        metadata={**ctx.metadata, "levels": [c for c, _ in levels]},
    ))
    return results


def _refinement_levels(ctx: _Context) -> List[tuple]:
    spec = ctx.cfg.lambda_grid
    cutoff = ctx.cfg.cutoff
    levels = []
    for fraction in (0.5, 0.75, 1.0):
        nodes = max(8, 2 * int(round(spec.nodes * fraction / 2)))
        origin = min(int(round(spec.origin_panel_nodes * fraction)), nodes // 2 - 1)
        level_spec = spec.model_copy(update={"nodes": nodes, "origin_panel_nodes": origin})
        levels.append((max(1, int(round(cutoff * (0.2 + 0.8 * fraction)))), lambda_grid(ctx.group, level_spec)))
    return levels


# ---------------------------------------------------------------- schatten

def schatten_suite(ctx: _Context) -> List[CheckResult]:
    suite = SuiteName.SCHATTEN.value
    results = []
    rng = ctx.rng
    matrices = schatten.random_matrices(20, 8, rng)

    frob = max(schatten.singular_values(m).frobenius_residual for m in matrices)
    results.append(_check(suite, "frobenius_identity", frob, 1e-10))

    worst_excess, worst_attain = -math.inf, 0.0
    for m in matrices:
        target = schatten.schatten_norm(m, 4.0) ** 4
        for _ in range(20):
            u = schatten.random_unitary(8, rng)
            worst_excess = max(worst_excess, schatten.onb_power_sum(m, u, 4.0) / target - 1.0)
        attained = schatten.onb_power_sum(m, schatten.right_singular_vectors(m), 4.0)
        worst_attain = max(worst_attain, abs(attained - target) / target)
    results.append(_check(suite, "onb_power_sum_bound", worst_excess, 1e-10, detail="20个矩阵×20组随机标准正交基，p=4"))
    results.append(_check(suite, "singular_basis_attains", worst_attain, 1e-8))

    grid = [1.0, 1.5, 2.0, 3.0, 4.0, math.inf]
    monotone_gap = -math.inf
    unitary_gap = 0.0
    triangle_gap = -math.inf
    for i, m in enumerate(matrices):
        norms = [schatten.schatten_norm(m, p) for p in grid]
        monotone_gap = max(monotone_gap, max(b - a for a, b in zip(norms, norms[1:])) / norms[0])
        u, w = schatten.random_unitary(8, rng), schatten.random_unitary(8, rng)
        for p, value in zip(grid, norms):
            unitary_gap = max(unitary_gap, abs(schatten.schatten_norm(u @ m @ w, p) - value) / value)
            other = matrices[(i + 1) % len(matrices)]
            lhs = schatten.schatten_norm(m + other, p)
            triangle_gap = max(triangle_gap, lhs - value - schatten.schatten_norm(other, p))
    results.append(_check(suite, "monotone_in_p", monotone_gap, 1e-12))
    results.append(_check(suite, "unitary_invariance", unitary_gap, 1e-10))
    results.append(_check(suite, "triangle_inequality", triangle_gap, 1e-10))

    eye = np.eye(8)
    c1, c2, _ = schatten.frame_bounds(eye)
    c1d, c2d, _ = schatten.frame_bounds(np.hstack([eye, eye]))
    frame_err = max(abs(c1 - 1), abs(c2 - 1), abs(c1d - 2), abs(c2d - 2))
    results.append(_check(suite, "frame_bounds_onb", frame_err, 1e-12))
    return results


# ---------------------------------------------------------------- hpw

def _configs(ctx: _Context) -> List[InequalityConfig]:
    admissible, skipped = inequality_grid(ctx.cfg, ctx.group.Q)
    for item in skipped:
        logger.warning("跳过不可容许的参数组合", item)
    return admissible


def hpw_suite(ctx: _Context) -> List[CheckResult]:
    suite = SuiteName.HPW.value
    consts = ctx.require_consts()
    results = []
    group, cutoff, quad, grid = ctx.group, ctx.cfg.cutoff, ctx.quad, ctx.grid
    f = ctx.base_function()
    field = ctx.field(f)

    ratios = [hpw_report(f, c, grid, cutoff, quad, consts, field).ratio for c in _configs(ctx)]
    results.append(_check(suite, "ratio_positive", min(ratios) if ratios else math.nan, 0.0, ctx, mode="gt",
                          detail=f"{len(ratios)}个可容许组合上的最小比值"))

    q = group.Q
    for p in (1.0, 1.5):
        cfg = InequalityConfig.create(p, 1.0, q * (1.0 / p - 0.5) + 1.0, q)
        base_ratio = hpw_report(f, cfg, grid, cutoff, quad, consts, field).ratio
        for c, r in ((5.0, 2.0), (0.1, 0.5)):
            g = f.dilated(1.0 / r).scaled(c)
            g_ratio = hpw_report(g, cfg, grid.scaled(r ** -2), cutoff, quad.dilated(r), consts).ratio
            results.append(_check(suite, f"ratio_invariance_p{p:g}_c{c:g}_r{r:g}",
                                  abs(g_ratio / base_ratio - 1.0), 1e-3, ctx))

    total = spectral_tail_mass(field, math.inf, "below", consts)
    partition = max(
        abs(spectral_tail_mass(field, r, "below", consts) + spectral_tail_mass(field, r, "above", consts) - total)
        for r in (1.0, 5.0, 20.0)
    ) / total
    results.append(_check(suite, "tail_partition", partition, 1e-12, ctx))

    tail_cfg = InequalityConfig.create(1.5, 1.0, 2.0, q)
    coarse = tail_bound_check(f, tail_cfg, ctx.cfg.inequality.tail_r, grid, cutoff, quad, consts, field)
    fine_grid = lambda_grid(group, ctx.cfg.lambda_grid.refined(2))
    fine = tail_bound_check(f, tail_cfg, ctx.cfg.inequality.tail_r, fine_grid, cutoff, quad, consts)
    drift = max(abs(fine.fitted_below - coarse.fitted_below) / fine.fitted_below,
                abs(fine.fitted_above - coarse.fitted_above) / fine.fitted_above)
    results.append(_check(suite, "tail_constant_refinement", drift, 0.1, ctx,
                          fitted_below=coarse.fitted_below, fitted_above=coarse.fitted_above))

    hy_worst = 0.0
    held = ctx.held_out()
    for h in held:
        h_field = ctx.field(h)
        for p in (1.2, 1.5, 1.8):
            hy_worst = max(hy_worst, hausdorff_young_ratio(h, p, grid, cutoff, quad, consts, h_field))
    results.append(_check(suite, "hausdorff_young_bound", hy_worst, 1.05, ctx, detail=f"{len(held)}个留出函数"))
    endpoint = abs(hausdorff_young_ratio(f, 1.98, grid, cutoff, quad, consts, field) - 1.0)
    results.append(_check(suite, "hausdorff_young_endpoint", endpoint, 1e-2, ctx, detail="p = 1.98"))

    l1 = lp_norm(f, 1.0, quad.box)
    sup = fourier_term_p1(field, 0.0).value
    results.append(_check(suite, "operator_norm_l1_bound", sup / l1, 1.0 + 1e-3, ctx))

    mask = [float(np.sum(sp.eta)) >= 1.0 for sp in field.nodes]
    filtered = field.filter_nodes(mask)
    if filtered.size:
        values = [fourier_term_lp(filtered, beta, 3.0) for beta in (0.0, 1.0, 2.0, 3.0)]
        drop = max(a - b for a, b in zip(values, values[1:])) / values[-1]
        results.append(_check(suite, "beta_monotone", drop, 1e-12, ctx, detail="ζ ≥ 1的节点"))

    low_n = max(cutoff, 16)
    high_n = low_n + 8
    wide = quad.model_copy(update={"hermite_nodes": max(quad.hermite_nodes, 2 * high_n + 24)})
    low_field = fourier_field(f, group, grid, low_n, wide)
    high_field = fourier_field(f, group, grid, high_n, wide)
    low_v, high_v = fourier_term_lp(low_field, 0.0, 3.0), fourier_term_lp(high_field, 0.0, 3.0)
    results.append(_check(suite, "cutoff_monotone", (low_v - high_v) / high_v, 1e-12, ctx,
                          cutoffs=[low_n, high_n]))
    results.append(_check(suite, "cutoff_convergence", (high_v - low_v) / high_v, 1e-2, ctx,
                          cutoffs=[low_n, high_n]))

    sensitivity = p1_refinement_sensitivity(f, 3.0, ctx.cfg.lambda_grid, cutoff, quad)
    results.append(_check(suite, "p1_refinement_sensitivity", sensitivity["relative_change"], 0.02, ctx,
                          values=sensitivity["values"]))

    count = frequency_count_exponent(group, list(np.geomspace(1.0, 50.0, 12)))
    results.append(_check(suite, "frequency_count_exponent", abs(count["slope"] - (group.n + group.k)), 0.15,
                          detail=f"斜率{count['slope']:.4f}"))
    return results


SUITES: Dict[str, Callable[[_Context], List[CheckResult]]] = {
    SuiteName.GROUP.value: group_suite,
    SuiteName.HERMITE.value: hermite_suite,
    SuiteName.FOURIER.value: fourier_suite,
    SuiteName.SCHATTEN.value: schatten_suite,
    SuiteName.HPW.value: hpw_suite,
}


def run_suite(name: str, cfg: RunConfig, consts: Optional[CalibrationConstants] = None) -> List[CheckResult]:
    """
    运行指定验证套件

    Args:
        name: group | hermite | fourier | schatten | hpw | all
        cfg: 运行配置
        consts: 校准常数（fourier、hpw套件需要）

    Returns:
        List[CheckResult]

    Raises:
        UsageError: 未知套件名
    """
    names: Sequence[str]
    if name == SuiteName.ALL.value:
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise UsageError(f"未知验证套件: {name}", errors=[{"field": "suite", "message": f"可选: {sorted(SUITES) + ['all']}"}])
    ctx = _Context(cfg, consts)
    results: List[CheckResult] = []
    for suite in names:
        logger.info("运行验证套件", {"suite": suite, "description": SuiteName.get_description(suite)})
        results.extend(SUITES[suite](ctx))
    return results
