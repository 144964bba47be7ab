"""Named verification experiments composing the other modules into reports.

Each runner takes a merged config dict (see config.DEFAULTS) and returns a
Report whose rows carry both sides of every asserted inequality.  The
Crofton suite and the proof trace are the gate experiments: the other
runners execute a reduced-size gate first and refuse to continue if it
fails, so downstream numbers are never produced on top of a broken Crofton
or barcode pipeline.
"""

from __future__ import annotations

import math

import numpy as np

from .config import field_from_config, graph_from_potential_config, tomograph_from_config
from .fields import (
    TWO_PI,
    GraphLagrangian,
    OneForm,
    PeriodicScalarField,
    graph_volume,
    oscillation,
    periodic_nodes,
    sup_norm,
)
from .persistence import DegenerateFieldError, barcode
from .report import Report
from .roots import TANGENT, sign_change_count_rows, offset_grid
from .tomograph import (
    SParam,
    crofton_integral,
    flat_crofton_closed,
    homogenize,
    homogenized_limit,
    intersection_count,
    normalization_constant,
    potential_field,
    sigma,
)


def _flat_counts_batch(tomo, rho, phi, y):
    """Intersection counts of L_s with the flat torus T^1_y, batched over s.

    Safe without tangency guards: on flat tori an undercount near the
    tangency radius can only lower the count, never raise it above the
    zero-section value, so the max-at-zero comparison stays exact.
    """
    k = tomo.frequency
    x = offset_grid(max(256, 32 * (k + 1)))
    vals = rho[:, None] * np.sin(k * x[None, :] + phi[:, None]) - y[:, None]
    return sign_change_count_rows(vals)


def run_crofton_suite(cfg, seed=None, rng=None):
    """Flat-torus Crofton identities, sigma profile laws, max-at-zero."""
    tomo = tomograph_from_config(cfg["tomograph"])
    quad = cfg["quadrature"]
    ccfg = cfg["crofton"]
    rel_tol = float(ccfg["rel_tol"])
    rng = rng or np.random.default_rng(seed if seed is not None else cfg["seed"])
    rep = Report("crofton")
    rep.meta["tomograph"] = tomo.to_dict()

    # closed form vs generic root counting, n = 1
    y_values = np.linspace(0.0, float(ccfg["y_max"]), int(ccfg["y_count"]))
    trace_path = ccfg.get("trace_path")
    for i, y in enumerate(y_values):
        res = crofton_integral(tomo, GraphLagrangian.flat([y]),
                               radial=quad["radial"], angular=quad["angular"],
                               trace_path=trace_path if i == 0 else None)
        closed = flat_crofton_closed(tomo, [y])
        rep.check_close(f"flat_n1_y={y:.3f}", res.value, closed, rel_tol,
                        tangent_fraction=res.tangent_fraction)

    # same identity for the product tomograph, n = 2
    measure = tomo.measure
    tomo2 = tomograph_from_config({**cfg["tomograph"], "dimension": 2})
    for pair in ccfg["n2_points"]:
        res = crofton_integral(tomo2, GraphLagrangian.flat(list(pair)),
                               radial=quad["radial"], angular=quad["angular"])
        closed = flat_crofton_closed(tomo2, list(pair))
        rep.check_close(f"flat_n2_y={tuple(pair)}", res.value, closed, rel_tol)

    # sigma profile: nonincreasing in |y|, maximal at 0, equals the
    # normalization constant there
    sweep = np.linspace(0.0, tomo.measure.outer_radius, int(ccfg["sigma_sweep"]))
    sig = np.array([sigma(tomo, [y]) for y in sweep])
    rep.check_true("sigma_nonincreasing", bool(np.all(np.diff(sig) <= 1e-15)))
    rep.check_ge("sigma_max_at_zero", float(sig[0]), float(np.max(sig)))
    rep.check_eq("sigma0_equals_normalization", float(sigma(tomo, np.zeros(tomo.dimension))),
                 normalization_constant(tomo))
    tomo_n = tomo.normalized()
    rep.check_eq("normalized_sigma0_is_one", float(sigma(tomo_n, np.zeros(tomo.dimension))), 1.0)

    # integer inequality |L_s ^ T_y| <= |L_s ^ T_0| on random (s, y) pairs
    n_pairs = int(ccfg["max_at_zero_samples"])
    rho = rng.uniform(0.0, tomo.measure.outer_radius, n_pairs)
    phi = rng.uniform(0.0, TWO_PI, n_pairs)
    yv = rng.uniform(-1.5 * tomo.measure.outer_radius, 1.5 * tomo.measure.outer_radius, n_pairs)
    counts_y = _flat_counts_batch(tomo, rho, phi, yv)
    counts_0 = _flat_counts_batch(tomo, rho, phi, np.zeros(n_pairs))
    violations = int(np.count_nonzero(counts_y > counts_0))
    rep.check_eq("max_at_zero_violations", violations, 0, samples=n_pairs)

    # homogenization leaves flat-torus Crofton integrals invariant
    for k in ccfg["invariance_ks"]:
        tomo_k = homogenize(tomo, int(k))
        for y in (0.0, 0.75):
            closed_k = flat_crofton_closed(tomo_k, [y])
            closed_1 = flat_crofton_closed(tomo, [y])
            rep.check_close(f"flat_invariance_closed_k={k}_y={y}", closed_k, closed_1, 1e-9)
            res = crofton_integral(tomo_k, GraphLagrangian.flat([y]),
                                   radial=quad["radial"], angular=quad["angular"])
            rep.check_close(f"flat_invariance_generic_k={k}_y={y}", res.value, closed_1, rel_tol)
    return rep


def run_homogenization(cfg, seed=None):
    """Convergence of the frequency-k Crofton integrals to the sigma limit."""
    tomo = tomograph_from_config(cfg["tomograph"])
    quad = cfg["quadrature"]
    hcfg = cfg["homogenize"]
    rep = Report("homogenize")
    schedule = [int(k) for k in hcfg["k_schedule"]]

    lag = graph_from_potential_config(hcfg["beta_potential"])
    limit = homogenized_limit(tomo, lag)
    rep.add_info("limit", value=limit)

    gaps = []
    for k in schedule:
        tomo_k = homogenize(tomo, k)
        res = crofton_integral(tomo_k, lag, radial=quad["radial"], angular=quad["angular"])
        gap = abs(res.value - limit)
        gaps.append(gap)
        rep.add_info(f"k={k}", value=res.value, gap=gap, gap_rel=gap / limit)
    for k_prev, k_next, g_prev, g_next in zip(schedule, schedule[1:], gaps, gaps[1:]):
        rep.check_ge(f"gap_decreasing_{k_prev}->{k_next}", g_prev, g_next)
    rep.check_le("final_gap_rel", gaps[-1] / limit, float(hcfg["final_gap_rel"]))

    # flat tori and constant sections are exactly k-invariant
    for y in hcfg["flat_y"]:
        base = flat_crofton_closed(tomo, [float(y)])
        for k in schedule:
            tomo_k = homogenize(tomo, k)
            res = crofton_integral(tomo_k, GraphLagrangian.flat([float(y)]),
                                   radial=quad["radial"], angular=quad["angular"])
            rep.check_close(f"flat_y={y}_k={k}", res.value, base, float(cfg["crofton"]["rel_tol"]))

    # zero section: every k reproduces the limit
    zero = GraphLagrangian.zero_section(tomo.dimension)
    limit0 = homogenized_limit(tomo, zero)
    for k in schedule:
        res = crofton_integral(homogenize(tomo, k), zero,
                               radial=quad["radial"], angular=quad["angular"])
        rep.check_close(f"zero_section_k={k}", res.value, limit0, 1e-9)
    return rep


def run_volume_bound(cfg, seed=None):
    """Integrated volume bound: Crofton values against (1 + eta) x graph area."""
    tomo = tomograph_from_config(cfg["tomograph"]).normalized()
    quad = cfg["quadrature"]
    vcfg = cfg["volume_bound"]
    rng = np.random.default_rng(seed if seed is not None else cfg["seed"])
    rep = Report("volume_bound")
    eta = float(vcfg["eta"])
    tube = float(vcfg["tube"])
    schedule = [int(k) for k in vcfg["k_schedule"]]
    n = tomo.dimension
    flat_volume = TWO_PI ** n

    # (i') the zero section: Crofton value equals its surface area
    zero = GraphLagrangian.zero_section(n)
    for k in schedule:
        res = crofton_integral(homogenize(tomo, k), zero,
                               radial=quad["radial"], angular=quad["angular"])
        rep.check_close(f"zero_section_k={k}", res.value, flat_volume, float(vcfg["zero_rel_tol"]))

    # (ii') exact graphs supported in the tube V = {|y| < tube}
    made = 0
    while made < int(vcfg["n_fields"]):
        f = PeriodicScalarField.random(n, rng, n_terms=int(vcfg["max_terms"]),
                                       max_freq=int(vcfg["max_freq"]), amp_scale=0.3)
        form = OneForm.exact(f)
        peak = max(sup_norm(c, 256) for c in form.components)
        if peak < 1e-6:
            continue
        scale = 0.9 * tube / peak * rng.uniform(0.6, 1.0)
        form = OneForm.exact(f * scale)
        lag = GraphLagrangian(form)
        if max(sup_norm(c, 512) for c in form.components) >= tube:
            rep.add_info(f"field_{made}", status="OUT_OF_V")
            continue
        made += 1
        vol = graph_volume(form)
        bound = (1.0 + eta) * vol
        achieved_k = None
        values = {}
        for k in schedule:
            res = crofton_integral(homogenize(tomo, k), lag,
                                   radial=quad["radial"], angular=quad["angular"])
            values[k] = res.value
            if res.value <= bound:
                achieved_k = k
                break
        rep.check_true(f"bound_field_{made}", achieved_k is not None,
                       achieved_k=achieved_k, crofton=values.get(achieved_k),
                       volume=vol, bound=bound,
                       margin_value=(bound - values[achieved_k]) if achieved_k else None)

    # a graph escaping V is excluded, not asserted
    big = OneForm.exact(PeriodicScalarField.from_terms(n, [(2.0 * tube, [1] + [0] * (n - 1), 0.0)]))
    if max(sup_norm(c, 256) for c in big.components) >= tube:
        rep.add_info("oversized_control", status="OUT_OF_V")
    return rep


def _tentacle_field(t, n_waves):
    return PeriodicScalarField.from_terms(1, [(float(t), [int(n_waves)], 0.0)])


def run_semicontinuity(cfg, seed=None):
    """Tentacle families: volume diverges while the Crofton deficit vanishes."""
    tomo = tomograph_from_config(cfg["tomograph"])
    scfg = cfg["semicontinuity"]
    rep = Report("semicontinuity")
    radial, angular = int(scfg["radial"]), int(scfg["angular"])
    tube = float(scfg["tube"])

    f0 = field_from_config(scfg["base_potential"])
    base_lag = GraphLagrangian(OneForm.exact(f0))
    i0 = crofton_integral(tomo, base_lag, radial=radial, angular=angular).value
    vol0 = graph_volume(base_lag.form)
    rep.add_info("base", crofton=i0, volume=vol0)

    rows = []
    for t in scfg["t_schedule"]:
        n_waves = int(math.ceil(1.0 / (t * t)))
        w = _tentacle_field(t, n_waves)
        lag = GraphLagrangian(OneForm.exact(f0 + w))
        osc = oscillation(w, 256)
        vol = graph_volume(lag.form)
        vol_u = graph_volume(lag.form, tube=tube)
        it = crofton_integral(tomo, lag, radial=radial, angular=angular).value
        deficit = i0 - it
        rows.append({"t": t, "n_waves": n_waves, "osc": osc, "volume": vol,
                     "vol_U": vol_u, "crofton": it, "deficit": deficit})
        rep.add_info(f"t={t}", **rows[-1])

    vols = [r["volume"] for r in rows]
    rep.check_ge("volume_ratio", vols[-1] / vols[0], float(scfg["volume_ratio_min"]))
    deficits = [r["deficit"] for r in rows]
    for a, b, ra, rb in zip(deficits, deficits[1:], rows, rows[1:]):
        rep.check_ge(f"deficit_decreasing_t={ra['t']}->{rb['t']}", a, b, tol=1e-9 * abs(i0))
    rep.check_le("deficit_final_rel", deficits[-1] / i0, float(scfg["deficit_final_rel"]))
    vol_tol = 1e-3 * vol0
    for r in rows:
        rep.check_ge(f"vol_U_t={r['t']}", r["vol_U"], vol0 - max(r["deficit"], 0.0), tol=vol_tol)

    # control row: large oscillation, no deficit bound asserted
    ctrl = scfg["control_row"]
    w = _tentacle_field(ctrl["t"], ctrl["n"])
    lag = GraphLagrangian(OneForm.exact(f0 + w))
    rep.add_info("control", t=ctrl["t"], n_waves=ctrl["n"], osc=oscillation(w, 256),
                 volume=graph_volume(lag.form),
                 crofton=crofton_integral(tomo, lag, radial=radial, angular=angular).value)
    return rep


def run_theorem_proof_trace(cfg, seed=None):
    """Numerical trace of the semicontinuity proof for a base Lagrangian.

    Samples the tomograph base, removes near-tangent samples (B'), computes
    the shortest bar over B', fixes eps + delta below it, verifies the
    count identity N(s) = 2 b_{eps+delta} - 2^n on every sample, and checks
    the chained inequalities against perturbed graphs.
    """
    tomo = tomograph_from_config(cfg["tomograph"])
    pcfg = cfg["proof_trace"]
    rng = np.random.default_rng(seed if seed is not None else cfg["seed"])
    rep = Report("proof_trace")
    n = tomo.dimension
    h_dim = 2 ** n
    res_bc = int(pcfg["barcode_resolution"])

    f = field_from_config(pcfg["base_potential"])
    base_lag = GraphLagrangian(OneForm.exact(f))

    def sample_grid(radial, angular):
        import itertools

        r0, r1 = tomo.measure.support
        z, w = np.polynomial.legendre.leggauss(radial)
        rho = 0.5 * (r1 - r0) * (z + 1.0) + r0
        rho_w = 0.5 * (r1 - r0) * w * tomo.measure(rho)
        w_phi = TWO_PI / angular
        factor = [(r, p, rho_w[i] * w_phi)
                  for i, r in enumerate(rho) for p in periodic_nodes(angular)]
        samples, weights = [], []
        for combo in itertools.product(factor, repeat=n):
            samples.append(SParam([c[0] for c in combo], [c[1] for c in combo]))
            weights.append(float(np.prod([c[2] for c in combo])))
        return samples, np.asarray(weights)

    def robust_count(lag, s):
        """Count with the default tolerance, one rho-perturbation retry."""
        cnt = intersection_count(tomo, s, lag)
        if cnt is TANGENT:
            cnt = intersection_count(tomo, SParam(s.rho + 1e-7, s.phi), lag)
        return cnt

    def trace_quantities(samples):
        """Per-sample N(s), strict-tolerance transversality flag, base barcode."""
        counts, shortest, bcs, flags, degenerate = [], [], [], [], 0
        for s in samples:
            strict = intersection_count(tomo, s, base_lag,
                                        tangent_tol=float(pcfg["sigma_jacobian_tol"]))
            cnt = strict if strict is not TANGENT else robust_count(base_lag, s)
            counts.append(-1 if cnt is TANGENT else cnt)
            if strict is TANGENT:
                flags.append(False)
                shortest.append(math.nan)
                bcs.append(None)
                continue
            try:
                bc = barcode(potential_field(tomo, s) - f, res_bc)
            except DegenerateFieldError:
                degenerate += 1
                flags.append(False)
                shortest.append(math.nan)
                bcs.append(None)
                continue
            flags.append(True)
            shortest.append(bc.shortest_bar())
            bcs.append(bc)
        return counts, shortest, bcs, np.asarray(flags), degenerate

    samples, weights = sample_grid(int(pcfg["radial"]), int(pcfg["angular"]))
    counts, shortest, bcs, in_bprime, degenerate = trace_quantities(samples)
    n_b = len(samples)
    n_bprime = int(np.count_nonzero(in_bprime))
    rep.add_info("sampling", n_b=n_b, n_bprime=n_bprime, degenerate=degenerate)
    rep.check_le("degenerate_fraction", degenerate / max(n_bprime, 1),
                 float(pcfg["degenerate_max_fraction"]))

    beta_bar = min((s for s, ok in zip(shortest, in_bprime) if ok), default=math.inf)
    rep.check_ge("shortest_bar_positive", beta_bar, 0.0, tol=-1e-15)

    # stability of the shortest bar under doubled sampling density
    samples2, _ = sample_grid(2 * int(pcfg["radial"]), 2 * int(pcfg["angular"]))
    _, shortest2, _, in_bprime2, _ = trace_quantities(samples2)
    beta_bar2 = min((s for s, ok in zip(shortest2, in_bprime2) if ok), default=math.inf)
    if math.isinf(beta_bar) and math.isinf(beta_bar2):
        rep.check_true("shortest_bar_stable", True, value=beta_bar, doubled=beta_bar2)
    else:
        rel = abs(beta_bar - beta_bar2) / max(beta_bar, beta_bar2)
        rep.check_le("shortest_bar_stable", rel, float(pcfg["beta_stability_rel"]),
                     value=beta_bar, doubled=beta_bar2)

    cap = float(pcfg["eps_delta_cap"])
    eps = min(cap, beta_bar / 4.0)
    delta = min(cap, beta_bar / 4.0)
    rep.check_true("eps_delta_below_shortest_bar", eps + delta < beta_bar, eps=eps, delta=delta)

    # count identity N(s) = 2 b_{eps+delta} - 2^n on every B' sample
    identity_failures = 0
    for ok, cnt, bc in zip(in_bprime, counts, bcs):
        if ok and cnt != 2 * bc.bar_count(eps + delta) - h_dim:
            identity_failures += 1
    rep.check_eq("count_identity_failures", identity_failures, 0, n_bprime=n_bprime)

    # full Crofton value over B versus the B' truncation
    counts_arr = np.asarray(counts, dtype=float)
    countable = counts_arr >= 0
    i_full = float(np.sum(weights[countable] * counts_arr[countable]))
    i_bprime = float(np.sum(weights[in_bprime] * counts_arr[in_bprime]))
    eta_trunc = i_full - i_bprime
    rep.add_info("base_integral", value=i_full, over_bprime=i_bprime, eta_truncation=eta_trunc)
    rep.check_ge("truncation_nonnegative", eta_trunc, 0.0, tol=1e-12)

    # chained inequalities against perturbed graphs with sup |w| < delta / 2
    for j in range(int(pcfg["n_perturbations"])):
        w_field = PeriodicScalarField.random(n, rng, n_terms=3, max_freq=3, amp_scale=1.0)
        w_sup = sup_norm(w_field, 256)
        w_field = w_field * (0.8 * (delta / 2.0) / w_sup)
        pert = f + w_field
        pert_lag = GraphLagrangian(OneForm.exact(pert))

        tilde_counts = np.zeros(n_b)
        has_count = np.zeros(n_b, dtype=bool)
        b_eps_tilde = np.zeros(n_b)
        b_epsdelta_base = np.zeros(n_b)
        usable = in_bprime.copy()
        pointwise_ok = True
        for i, s in enumerate(samples):
            cnt = robust_count(pert_lag, s)
            if cnt is not TANGENT:
                tilde_counts[i] = cnt
                has_count[i] = True
            if not usable[i]:
                continue
            try:
                bc_t = barcode(potential_field(tomo, s) - pert, res_bc)
            except DegenerateFieldError:
                usable[i] = False
                continue
            if not has_count[i]:
                usable[i] = False
                continue
            b_eps_tilde[i] = bc_t.bar_count(eps)
            b_epsdelta_base[i] = bcs[i].bar_count(eps + delta)
            if tilde_counts[i] < 2 * b_eps_tilde[i] - h_dim:
                pointwise_ok = False
            if b_eps_tilde[i] < b_epsdelta_base[i]:
                pointwise_ok = False

        wsel = weights[usable]
        line1 = float(np.sum(weights[has_count] * tilde_counts[has_count]))
        line2 = float(np.sum(wsel * (2.0 * b_eps_tilde[usable] - h_dim)))
        line4 = float(np.sum(wsel * (2.0 * b_epsdelta_base[usable] - h_dim)))
        line5 = float(np.sum(wsel * counts_arr[usable]))
        eta_w = i_full - line5
        rep.check_true(f"w{j}_pointwise", pointwise_ok)
        rep.check_ge(f"w{j}_count_bound", line1, line2, tol=1e-12,
                     sup_w=float(sup_norm(w_field, 256)))
        rep.check_ge(f"w{j}_stability", line2, line4, tol=1e-12)
        rep.check_close(f"w{j}_identity", line4, line5, 1e-12)
        rep.check_ge(f"w{j}_end_to_end", line1, i_full - eta_w, tol=1e-12, eta=eta_w)
    return rep


def run_gate(cfg):
    """Reduced-size crofton + proof-trace run gating the other experiments."""
    import copy

    small = copy.deepcopy(cfg)
    small["quadrature"] = {"radial": 60, "angular": 24}
    small["crofton"] = {**cfg["crofton"], "y_count": 7, "max_at_zero_samples": 500,
                        "n2_points": [[0.0, 0.0], [0.75, 0.3]], "invariance_ks": [2]}
    small["proof_trace"] = {**cfg["proof_trace"], "radial": 10, "angular": 8,
                            "n_perturbations": 2, "barcode_resolution": 128}
    crofton = run_crofton_suite(small)
    trace = run_theorem_proof_trace(small)
    return crofton.passed and trace.passed


RUNNERS = {
    "crofton": run_crofton_suite,
    "homogenize": run_homogenization,
    "volume-bound": run_volume_bound,
    "semicontinuity": run_semicontinuity,
    "proof-trace": run_theorem_proof_trace,
}

#: experiments that only make sense once the gate experiments pass
GATED = {"homogenize", "volume-bound", "semicontinuity"}
