//! Suite bodies and the registry.

use crate::amalgam::{
    amalgam_grand_norm, char_fn_check, classical_amalgam_norm, embedding_check, holder_integral_check,
    integral_abs_product, integral_over_set_bound, product_composition_check, sparse_weighted, strictness_witnesses,
    AmalgamParams, EmbeddingCase, ProductExponents, StepFunction, WitnessParams,
};
use crate::error::Result;
use crate::grandnorm::{
    check_equivalence, grand_norm, powerlog_membership, vanishing_limit, GrandParams, Membership, VanishingVerdict,
};
use crate::operators::{isometry_check, l1_bound_check, op_norm_check, unboundedness_ladder, Multiplier};
use crate::report::{digest, CaseRecord};
use crate::seqcore::{linf_norm, lp_norm, GrandSequence, IndexSet, NormBracket};
use crate::smallnorm::{
    decomposition_value, lattice_compare, small_norm_upper, subadditivity_check, symmetric_indicator,
    transfer_decomposition, Decomposition,
};
use crate::specfun::{c_eps0, lambert_w0, psi, psi_argmax, psi_max, psi_max_recip, Epsilon};

use super::demo::{divergence_demo, DemoFamily};
use super::{Body, Gen, SuiteConfig, SuiteSpec};

pub(super) static REGISTRY: &[SuiteSpec] = &[
    SuiteSpec {
        name: "lambert_constants",
        description: "Lambert W values and the extremes of the scaling function",
        covers: &["scaling_constants"],
        body: Body::Fixed(lambert_constants),
    },
    SuiteSpec {
        name: "norm_axioms",
        description: "homogeneity, triangle inequality and sup-norm sandwich of the grand sequence norm",
        covers: &["norm_axioms", "grand_sequence_norm", "scaling_constants"],
        body: Body::Cases(norm_axioms),
    },
    SuiteSpec {
        name: "embedding_chain",
        description: "l^r nesting and the chain through the grand sequence space",
        covers: &["lp_embedding_chain", "grand_function_norm_sequence_analog"],
        body: Body::Cases(embedding_chain),
    },
    SuiteSpec {
        name: "equivalence",
        description: "truncated <= full <= c(eps0)^(theta/q) truncated",
        covers: &["truncated_grand_norm", "truncation_equivalence"],
        body: Body::Cases(equivalence),
    },
    SuiteSpec {
        name: "powerlog_membership",
        description: "membership window of n^(-1/q) ln^(-a), including both edges and a = 0",
        covers: &["powerlog_membership_window"],
        body: Body::Fixed(powerlog_membership_grid),
    },
    SuiteSpec {
        name: "vanishing",
        description: "vanishing functional on power and finite sequences",
        covers: &["vanishing_functional"],
        body: Body::Cases(vanishing),
    },
    SuiteSpec {
        name: "amalgam_factorization",
        description: "grand amalgam norm against a direct supremum over local norms",
        covers: &["grand_amalgam_norm_definition", "classical_amalgam_norm"],
        body: Body::Cases(amalgam_factorization),
    },
    SuiteSpec {
        name: "embeddings",
        description: "the five amalgam embeddings with explicit constants",
        covers: &["amalgam_embeddings"],
        body: Body::Cases(embeddings),
    },
    SuiteSpec {
        name: "strictness_witnesses",
        description: "members of the larger space outside the smaller one",
        covers: &["embedding_strictness"],
        body: Body::Cases(witnesses),
    },
    SuiteSpec {
        name: "holder_seq",
        description: "sum |x y| <= grand(x) small(y)",
        covers: &["sequence_holder"],
        body: Body::Cases(holder_seq),
    },
    SuiteSpec {
        name: "holder_integral",
        description: "int |g f| <= grand amalgam(g) small amalgam(f)",
        covers: &["integral_holder", "amalgam_small_norm"],
        body: Body::Cases(holder_integral),
    },
    SuiteSpec {
        name: "small_norm_examples",
        description: "spike values, structured decompositions and indicator bounds",
        covers: &["small_sequence_norm", "decomposition_examples", "indicator_small_norm_bound"],
        body: Body::Fixed(small_norm_examples),
    },
    SuiteSpec {
        name: "transfer",
        description: "decomposition transfer onto a dominated sequence",
        covers: &["decomposition_transfer"],
        body: Body::Cases(transfer),
    },
    SuiteSpec {
        name: "lattice",
        description: "0 <= y <= x implies small(y) <= small(x)",
        covers: &["lattice_property"],
        body: Body::Cases(lattice),
    },
    SuiteSpec {
        name: "subadditivity",
        description: "small(y1 + y2) <= small(y1) + small(y2)",
        covers: &["small_norm_subadditivity"],
        body: Body::Cases(subadditivity),
    },
    SuiteSpec {
        name: "product_bound",
        description: "local and sequence product bounds composed into the amalgam bound",
        covers: &["product_composition"],
        body: Body::Cases(product_bound),
    },
    SuiteSpec {
        name: "char_fn",
        description: "indicator norm bounds and integrals over bounded sets",
        covers: &["indicator_grand_norm_bound", "indicator_small_norm_interval_bound", "set_integral_bound"],
        body: Body::Cases(char_fn),
    },
    SuiteSpec {
        name: "unbounded_sets",
        description: "unbounded sets: divergent indicator norm and unbounded integrals of a finite-norm function",
        covers: &["unbounded_indicator_divergence", "unbounded_set_integral_divergence"],
        body: Body::Fixed(unbounded_sets),
    },
    SuiteSpec {
        name: "mult_op_norm",
        description: "multiplication operator norm equals ess sup",
        covers: &["multiplier_norm_identity"],
        body: Body::Cases(mult_op_norm),
    },
    SuiteSpec {
        name: "mult_isometry",
        description: "multiplication is an isometry exactly when |g| = 1",
        covers: &["multiplier_isometry"],
        body: Body::Cases(mult_isometry),
    },
    SuiteSpec {
        name: "mult_l1",
        description: "int |f g| <= small(g) grand(f)",
        covers: &["multiplier_l1_bound"],
        body: Body::Cases(mult_l1),
    },
    SuiteSpec {
        name: "divergence_demo_old_grand_norm",
        description: "an l^q sequence with unbounded partial norms in the alternative grand norm",
        covers: &["alternative_grand_norm_divergence"],
        body: Body::Fixed(old_grand_norm_demo),
    },
];

fn exact(v: f64) -> NormBracket {
    NormBracket::exact(v)
}

#[allow(clippy::excessive_precision)]
fn lambert_constants(_cfg: &SuiteConfig) -> Result<Vec<CaseRecord>> {
    // 50-digit reference values
    const W_INV_E: f64 = 0.278_464_542_761_073_795_11;
    const PSI_ARGMAX: f64 = 3.591_121_476_668_622_136_6;
    const PSI_MAX: f64 = 1.321_099_762_015_617_456_9;
    const E_W: f64 = 0.756_945_106_457_583_664_58;
    const C_EPS0_001: f64 = 126.221_586_365_313_7;
    const TOL: f64 = 1e-12;
    let d = digest("lambert");
    let w = lambert_w0((-1.0f64).exp())?;
    let mut out = vec![
        CaseRecord::eq("w_of_inv_e", &d, w, W_INV_E, TOL),
        CaseRecord::eq("psi_argmax", &d, psi_argmax(), PSI_ARGMAX, TOL),
        CaseRecord::eq("psi_max", &d, psi_max(), PSI_MAX, TOL),
        CaseRecord::eq("psi_max_recip", &d, psi_max_recip(), E_W, TOL),
        CaseRecord::eq("psi_at_argmax", &d, psi(Epsilon::new(psi_argmax())?), PSI_MAX, TOL),
        CaseRecord::eq("c_eps0_at_0.01", &d, c_eps0(Epsilon::new(0.01)?), C_EPS0_001, TOL),
        CaseRecord::flag(
            "rounded_constants",
            &d,
            (3.58..=3.60).contains(&psi_argmax()) && (1.31..=1.33).contains(&psi_max()),
            format!("argmax={:.6} max={:.6}", psi_argmax(), psi_max()),
        ),
    ];
    for x in [0.0, 1e-6, 0.5, 1.0, 10.0, 1e3, 1e8] {
        let w = lambert_w0(x)?;
        out.push(CaseRecord::eq("w_exp_w_inverts", &digest(&x), w * w.exp(), x, TOL));
    }
    Ok(out)
}

fn grand_params(g: &mut Gen) -> Result<GrandParams> {
    let q = g.q();
    GrandParams::new(q, g.theta())
}

fn amalgam_params(g: &mut Gen) -> Result<AmalgamParams> {
    let p = g.p();
    let q = g.q();
    AmalgamParams::new(p, q, g.theta())
}

fn norm_axioms(g: &mut Gen, cfg: &SuiteConfig, _case: usize) -> Result<Vec<CaseRecord>> {
    let params = grand_params(g)?;
    let x = g.sequence(32, true);
    let y = g.sequence(32, true);
    let alpha = if g.coin(0.1) { 0.0 } else { g.uniform((-10.0, 10.0)) };
    let (o, tol) = (&cfg.optimizer, cfg.tolerance);
    let d = digest(&(&x, &y, &params, alpha));
    let nx = grand_norm(&x, &params, o)?;
    let ny = grand_norm(&y, &params, o)?;
    let nsum = grand_norm(&x.add(&y)?, &params, o)?;
    let nax = grand_norm(&x.scale(alpha)?, &params, o)?;
    let w = params.theta() / params.q();
    Ok(vec![
        CaseRecord::le("homogeneity_upper", &d, nax, nx.scale(alpha), tol),
        CaseRecord::le("homogeneity_lower", &d, nx.scale(alpha), nax, tol),
        CaseRecord::le("triangle", &d, nsum, nx.add(&ny), tol),
        CaseRecord::le("sup_norm_scaled_le_norm", &d, exact(psi_max().powf(w) * linf_norm(&x)), nx, tol),
        CaseRecord::le("norm_le_scaled_lq", &d, nx, lp_norm(&x, params.q())?.scale(psi_max().powf(w)), tol),
        CaseRecord::flag("definite", &d, nx.lower() > 0.0, format!("lower={:.12e}", nx.lower())),
    ])
}

fn embedding_chain(g: &mut Gen, cfg: &SuiteConfig, _case: usize) -> Result<Vec<CaseRecord>> {
    let params = grand_params(g)?;
    let (q, theta) = (params.q(), params.theta());
    let x = g.sequence(32, true);
    let delta = g.delta();
    let mut r = [g.uniform((1.0, 8.0)), g.uniform((1.0, 8.0))];
    r.sort_by(f64::total_cmp);
    let tol = cfg.tolerance;
    let d = digest(&(&x, &params, delta, r));
    let norm = grand_norm(&x, &params, &cfg.optimizer)?;
    let mut out = vec![
        CaseRecord::le("lp_nesting", &d, lp_norm(&x, r[1])?, lp_norm(&x, r[0])?, tol),
        CaseRecord::le("norm_le_scaled_lq", &d, norm, lp_norm(&x, q)?.scale(psi_max().powf(theta / q)), tol),
        CaseRecord::le(
            "larger_exponent_le_scaled_norm",
            &d,
            lp_norm(&x, q * (1.0 + delta))?,
            norm.scale(delta.powf(-theta / (q * (1.0 + delta)))),
            tol,
        ),
    ];
    if q > 1.0 {
        let sigma = g.sigma(q);
        out.push(CaseRecord::le("lq_le_smaller_exponent", &d, lp_norm(&x, q)?, lp_norm(&x, q * (1.0 - sigma))?, tol));
    }
    Ok(out)
}

fn equivalence(g: &mut Gen, cfg: &SuiteConfig, _case: usize) -> Result<Vec<CaseRecord>> {
    let params = grand_params(g)?;
    let x = g.sequence(32, true);
    let eps0 = Epsilon::new(g.eps0())?;
    Ok(check_equivalence(&x, &params, eps0, &cfg.optimizer, cfg.tolerance)?.records)
}

fn powerlog_membership_grid(cfg: &SuiteConfig) -> Result<Vec<CaseRecord>> {
    let mut out = Vec::new();
    for q in [1.0, 1.5, 2.0, 3.0] {
        for theta in [0.5, 1.0, 2.0] {
            let params = GrandParams::new(q, theta)?;
            let (lo, hi) = ((1.0 - theta) / q, 1.0 / q);
            let mut grid: Vec<(f64, bool)> = vec![(0.0, true), (hi, false), (hi + 0.1, false), (0.5 * (lo.max(0.0) + hi), false)];
            if lo >= 0.0 {
                grid.push((lo, false));
            }
            if lo - 0.1 >= 0.0 {
                grid.push((lo - 0.1, false));
            }
            for (a, pure) in grid {
                let rep = powerlog_membership(&params, a, pure, &cfg.optimizer)?;
                let expected = if pure { theta >= 1.0 } else { lo <= a && a <= hi };
                let verdict = rep.verdict == Membership::Member;
                let d = digest(&(q, theta, a, pure));
                let label = format!("q={q} theta={theta} a={a} pure={pure} window=[{lo}, {hi}]");
                out.push(CaseRecord::flag("verdict_matches_window", &d, verdict == expected, label.clone()));
                let ev = rep.evidence.as_ref().expect("evidence exists for a >= 0");
                let bracket = format!("{label} bracket=[{:.6e}, {:.6e}] slope={:.4}", ev.bracket.lower(), ev.bracket.upper(), ev.growth_exponent);
                if pure || a <= hi {
                    out.push(CaseRecord::flag("evidence_agrees", &d, rep.evidence_agrees == Some(true), bracket));
                } else {
                    out.push(CaseRecord::flag(
                        "evidence_above_window_is_finite",
                        &d,
                        ev.bracket.is_finite(),
                        format!("{bracket}; the sequence lies in l^q although the window verdict is nonmember"),
                    ));
                }
            }
        }
    }
    Ok(out)
}

fn vanishing(g: &mut Gen, cfg: &SuiteConfig, case: usize) -> Result<Vec<CaseRecord>> {
    let _ = cfg;
    const TOL: f64 = 1e-6;
    let mut out = Vec::new();
    if case < 3 {
        let theta = [2.0, 1.0, 0.5][case];
        let params = GrandParams::new(1.0, theta)?;
        let x = GrandSequence::power_log(1, 1.0, 0.0)?;
        let ladder: Vec<Epsilon> = (1..=12).map(|i| Epsilon::new(10f64.powi(-i))).collect::<Result<_>>()?;
        let rep = vanishing_limit(&x, &params, &ladder, TOL)?;
        let d = digest(&(theta, "harmonic"));
        let expected = if theta > 1.0 { VanishingVerdict::Vanishing } else { VanishingVerdict::NotVanishing };
        out.push(CaseRecord::flag("verdict", &d, rep.verdict == expected, format!("theta={theta} got {:?}", rep.verdict)));
        // zeta(1 + eps) lies in [1/eps, 1/eps + 1]
        for s in &rep.samples {
            let w = s.eps.powf(theta);
            out.push(CaseRecord::le("zeta_lower_enclosure", &d, exact(w / s.eps), s.value, 1e-9));
            out.push(CaseRecord::le("zeta_upper_enclosure", &d, s.value, exact(w * (1.0 / s.eps + 1.0)), 1e-9));
        }
        return Ok(out);
    }
    let params = grand_params(g)?;
    let x = g.sequence(32, true);
    let ladder: Vec<Epsilon> = (1..=30).map(|i| Epsilon::new(10f64.powi(-10 * i))).collect::<Result<_>>()?;
    let rep = vanishing_limit(&x, &params, &ladder, TOL)?;
    out.push(CaseRecord::flag(
        "finite_support_vanishes",
        &digest(&(&x, &params)),
        rep.verdict == VanishingVerdict::Vanishing,
        format!("final upper={:.3e}", rep.final_value.upper()),
    ));
    Ok(out)
}

/// `sup_eps psi(eps)^(theta/q) ||l||_{q(1+eps)}` on a fine log grid, with local norms
/// computed from the cells.
fn direct_grand_amalgam(g: &StepFunction, params: &AmalgamParams) -> f64 {
    let locals: Vec<f64> = g
        .pieces()
        .values()
        .map(|cells| cells.iter().map(|c| c.width * c.value.abs().powf(params.p())).sum::<f64>().powf(1.0 / params.p()))
        .filter(|v| *v > 0.0)
        .collect();
    if locals.is_empty() {
        return 0.0;
    }
    let (q, w) = (params.q(), params.theta() / params.q());
    let n = 4000;
    let (lo, hi) = (1e-9f64.ln(), 1e5f64.ln());
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        let eps = (lo + (hi - lo) * i as f64 / n as f64).exp();
        let r = q * (1.0 + eps);
        let logs: Vec<f64> = locals.iter().map(|v| r * v.ln()).collect();
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
        best = best.max(w * eps.ln() / (1.0 + eps) + lse / r);
    }
    best.exp()
}

fn amalgam_factorization(g: &mut Gen, cfg: &SuiteConfig, _case: usize) -> Result<Vec<CaseRecord>> {
    let params = amalgam_params(g)?;
    let f = g.step_function(16, 4, true);
    let r = g.uniform((1.0, 8.0));
    let tol = cfg.tolerance;
    let d = digest(&(&f, &params, r));
    let bracket = amalgam_grand_norm(&f, &params, &cfg.optimizer)?;
    let direct = direct_grand_amalgam(&f, &params);
    let classical: f64 = f
        .pieces()
        .values()
        .map(|cells| {
            let l: f64 = cells.iter().map(|c| c.width * c.value.abs().powf(params.p())).sum::<f64>().powf(1.0 / params.p());
            l.powf(r)
        })
        .sum::<f64>()
        .powf(1.0 / r);
    let cl = classical_amalgam_norm(&f, params.p(), r)?;
    Ok(vec![
        CaseRecord::le("direct_supremum_le_upper", &d, exact(direct), bracket, tol),
        CaseRecord::le("lower_le_direct_supremum", &d, exact(bracket.lower()), exact(direct * (1.0 + 1e-4)), tol),
        CaseRecord::le("classical_direct_le_upper", &d, exact(classical), cl, 1e-12),
        CaseRecord::le("classical_lower_le_direct", &d, exact(cl.lower()), exact(classical), 1e-12),
    ])
}

fn embeddings(g: &mut Gen, cfg: &SuiteConfig, _case: usize) -> Result<Vec<CaseRecord>> {
    let f = g.step_function(16, 4, true);
    let p = g.p();
    let q1 = g.q();
    let q2 = q1 + g.uniform((0.1, 2.0));
    let theta = g.theta();
    let mut th = [g.theta(), g.theta()];
    th.sort_by(f64::total_cmp);
    let mut ps = [g.p(), g.p()];
    ps.sort_by(f64::total_cmp);
    if ps[1] - ps[0] < 1e-3 {
        ps[1] += 0.5;
    }
    let qs = if q1 > 1.05 { q1 } else { q1 + 0.5 };
    let sigma = g.sigma(qs);
    let delta = g.delta();
    let cases = [
        EmbeddingCase::QShift { p, q1, q2, theta },
        EmbeddingCase::Theta { p, q: q1, theta1: th[0], theta2: th[1] },
        EmbeddingCase::MixedP { p1: ps[1], p2: ps[0], q: q1, theta1: th[0], theta2: th[1] },
        EmbeddingCase::Classical { p, q: q1, theta },
        EmbeddingCase::Sandwich { p, q: qs, theta, delta, sigma },
    ];
    let mut out = Vec::new();
    for c in &cases {
        out.extend(embedding_check(&f, c, &cfg.optimizer, cfg.tolerance)?.records);
    }
    Ok(out)
}

fn witnesses(g: &mut Gen, cfg: &SuiteConfig, _case: usize) -> Result<Vec<CaseRecord>> {
    let q1 = g.uniform((1.0, 3.0));
    let q2 = q1 + g.uniform((0.25, 2.0));
    let p2 = g.uniform((1.0, 3.0));
    let p1 = p2 + g.uniform((0.25, 3.0));
    let theta = g.uniform((1.0, 3.0));
    let w = WitnessParams { q1, q2, p1, p2, theta };
    Ok(strictness_witnesses(&w, &cfg.optimizer)?.records)
}

fn holder_seq(g: &mut Gen, cfg: &SuiteConfig, case: usize) -> Result<Vec<CaseRecord>> {
    let (o, tol) = (&cfg.optimizer, cfg.tolerance);
    if case == 0 {
        let params = GrandParams::new(1.0, 1.0)?;
        let x = GrandSequence::spike(IndexSet::Naturals, 1, 1.0)?;
        let grand = grand_norm(&x, &params, o)?;
        let small = small_norm_upper(&x, &params, &cfg.budget, o)?;
        let d = digest(&(&x, &params));
        return Ok(vec![
            CaseRecord::le("pairing_le_norm_product", &d, exact(1.0), exact(grand.upper() * small.upper), tol),
            CaseRecord::eq("spike_product_equals_pairing", &d, grand.upper() * small.upper, 1.0, 1e-6),
        ]);
    }
    let params = grand_params(g)?;
    let x = g.sequence(32, true);
    let y = g.sequence(32, true);
    let pairing: f64 = x.entries().map(|(k, v)| (v * y.get(k)).abs()).sum();
    let grand = grand_norm(&x, &params, o)?;
    let small = small_norm_upper(&y, &params, &cfg.budget, o)?;
    let rhs = if pairing == 0.0 { 0.0 } else { grand.upper() * small.upper };
    Ok(vec![CaseRecord::le("pairing_le_norm_product", &digest(&(&x, &y, &params)), exact(pairing), exact(rhs), tol)])
}

fn holder_integral(g: &mut Gen, cfg: &SuiteConfig, case: usize) -> Result<Vec<CaseRecord>> {
    let (o, tol) = (&cfg.optimizer, cfg.tolerance);
    if case == 0 {
        let params = AmalgamParams::new(1.0, 1.0, 1.0)?;
        let one = StepFunction::plateau(IndexSet::Integers, 0, 1.0)?;
        let mut out = holder_integral_check(&one, &one, &params, &cfg.budget, o, tol)?.records;
        let rhs = out[0].rhs.upper();
        out.push(CaseRecord::eq("plateau_product_equals_integral", &digest(&params), rhs, 1.0, 1e-6));
        return Ok(out);
    }
    let params = amalgam_params(g)?;
    let f = g.step_function(16, 4, true);
    let h = g.step_function(16, 4, true);
    Ok(holder_integral_check(&f, &h, &params, &cfg.budget, o, tol)?.records)
}

fn small_norm_examples(cfg: &SuiteConfig) -> Result<Vec<CaseRecord>> {
    let (o, tol) = (&cfg.optimizer, cfg.tolerance);
    let e_w = psi_max_recip();
    let mut out = Vec::new();
    for q in [1.0, 2.0, 3.0] {
        for theta in [0.5, 1.0, 2.0] {
            let params = GrandParams::new(q, theta)?;
            let w = theta / q;
            let d = digest(&(q, theta, "spike"));
            let spike = GrandSequence::spike(IndexSet::Naturals, 1, 1.0)?;
            let small = small_norm_upper(&spike, &params, &cfg.budget, o)?;
            out.push(CaseRecord::eq("spike_small_upper", &d, small.upper, e_w.powf(w), 1e-6));
            out.push(CaseRecord::eq("spike_small_lower", &d, small.lower, e_w.powf(w), 1e-6));

            let y = GrandSequence::finite(IndexSet::Naturals, [(1, 3.0), (2, 1.0), (4, 0.5), (7, 2.0)])?;
            let d = digest(&(&y, &params));
            let est = small_norm_upper(&y, &params, &cfg.budget, o)?;
            out.push(CaseRecord::le("dual_le_search", &d, exact(est.lower), exact(est.upper), tol));
            for (label, dec) in [
                ("search_le_trivial", Decomposition::trivial(&y)?),
                ("search_le_per_index", Decomposition::per_index(&y)?),
                ("search_le_pairs", Decomposition::blocks(&y, 2)?),
                ("search_le_proportional", Decomposition::proportional(&y, &[0.25, 0.75])?),
            ] {
                out.push(CaseRecord::le(label, &d, exact(est.upper), decomposition_value(&dec, &params, o)?, tol));
            }

            for m in 1..=4i64 {
                let ind = symmetric_indicator(m);
                let d = digest(&(m, &params));
                let est = small_norm_upper(&ind, &params, &cfg.budget, o)?;
                let count = (2 * m + 1) as f64;
                out.push(CaseRecord::le(
                    "indicator_le_count_times_max_constant",
                    &d,
                    exact(est.upper),
                    exact(count * psi_max().powf(w)),
                    tol,
                ));
                out.push(CaseRecord::le(
                    "indicator_le_count_times_spike_value",
                    &d,
                    exact(est.upper),
                    exact(count * e_w.powf(w)),
                    tol,
                ));
            }
        }
    }
    Ok(out)
}

fn transfer(g: &mut Gen, cfg: &SuiteConfig, _case: usize) -> Result<Vec<CaseRecord>> {
    const TOL: f64 = 1e-12;
    let x = g.sequence(32, false);
    let y = g.dominated(&x);
    let dx = g.decomposition(&x, 8);
    let t = transfer_decomposition(&dx, &y)?;
    let mut bound_violation = 0.0f64;
    let mut sum_violation = 0.0f64;
    for k in x.support() {
        let mut kept_sum = 0.0;
        for (j, part) in dx.parts().iter().enumerate() {
            let xkj = part.get(k);
            let z = t.excess[j].get(k);
            let kept = t.decomposition.parts()[j].get(k);
            bound_violation = bound_violation.max(-z).max(z - xkj).max((kept + z - xkj).abs());
            kept_sum += kept;
        }
        sum_violation = sum_violation.max((kept_sum - y.get(k)).abs() / y.get(k).max(1.0));
    }
    let d = digest(&(&x, &y, &dx));
    let mut out = vec![
        CaseRecord::le("excess_within_part", &d, exact(bound_violation), exact(0.0), TOL),
        CaseRecord::le("kept_parts_sum_to_target", &d, exact(sum_violation), exact(0.0), TOL),
    ];
    let params = grand_params(g)?;
    let lhs = decomposition_value(&t.decomposition, &params, &cfg.optimizer)?;
    let rhs = decomposition_value(&dx, &params, &cfg.optimizer)?;
    out.push(CaseRecord::le("transfer_value_le_source_value", &d, lhs, rhs, cfg.tolerance));
    Ok(out)
}

fn lattice(g: &mut Gen, cfg: &SuiteConfig, _case: usize) -> Result<Vec<CaseRecord>> {
    let x = g.sequence(32, false);
    let y = g.dominated(&x);
    let params = grand_params(g)?;
    Ok(lattice_compare(&x, &y, &params, &cfg.budget, &cfg.optimizer, cfg.tolerance)?.records)
}

fn subadditivity(g: &mut Gen, cfg: &SuiteConfig, _case: usize) -> Result<Vec<CaseRecord>> {
    let y1 = g.sequence(32, true);
    let y2 = g.sequence(32, true);
    let params = grand_params(g)?;
    Ok(subadditivity_check(&y1, &y2, &params, &cfg.budget, &cfg.optimizer, cfg.tolerance)?.records)
}

fn product_bound(g: &mut Gen, cfg: &SuiteConfig, _case: usize) -> Result<Vec<CaseRecord>> {
    let f = g.step_function(16, 4, true);
    let h = g.step_function(16, 4, true);
    // 1/p1 + 1/p2 <= 1 keeps the local product exponent at least 1
    let p1 = g.uniform((1.1, g.ranges.p.1.max(1.2)));
    let p2 = p1 / (p1 - 1.0) * (1.0 + g.uniform((0.0, 1.0)));
    let (q, theta) = (g.q(), g.theta());
    let exps = ProductExponents::holder(p1, p2, q);
    Ok(product_composition_check(&f, &h, &exps, theta, None, 1.0, &cfg.optimizer, cfg.tolerance)?.records)
}

fn char_fn(g: &mut Gen, cfg: &SuiteConfig, _case: usize) -> Result<Vec<CaseRecord>> {
    let (o, tol) = (&cfg.optimizer, cfg.tolerance);
    let m = g.int(1, 4) as u64;
    let e = g.bounded_set(m);
    let params = amalgam_params(g)?;
    let f = g.step_function(16, 4, true);
    let mut out = char_fn_check(&e, &params, &cfg.budget, o, tol)?.records;
    out.extend(integral_over_set_bound(&f, &e, &params, &cfg.budget, o, tol)?.records);
    let whole = StepFunction::interval_indicator(m);
    out.push(CaseRecord::le(
        "indicator_norm_monotone",
        &digest(&(&e, &params)),
        amalgam_grand_norm(&e, &params, o)?,
        amalgam_grand_norm(&whole, &params, o)?,
        tol,
    ));
    Ok(out)
}

fn unbounded_sets(cfg: &SuiteConfig) -> Result<Vec<CaseRecord>> {
    let mut out = Vec::new();
    let family = DemoFamily::SparseIndicator { p: 2.0, q: 1.0, alpha: 2.0, theta: 0.5 };
    let demo = divergence_demo(family, None, &cfg.optimizer)?;
    let d = digest(&family);
    out.push(CaseRecord::flag(
        "sparse_indicator_divergent",
        &d,
        demo.certified_divergent && demo.crossed && demo.monotone,
        format!("crossed {:e}: {}, monotone: {}", demo.threshold, demo.crossed, demo.monotone),
    ));
    out.push(CaseRecord::flag(
        "sparse_indicator_growth_exponent",
        &d,
        (demo.growth_exponent + 0.5).abs() <= 0.1,
        format!("slope={:.6}", demo.growth_exponent),
    ));

    for (p, q) in [(1.0, 2.0), (1.0, 3.0), (1.5, 3.0)] {
        let f = sparse_weighted(p, q)?;
        let params = AmalgamParams::new(p, q, 2.0)?;
        let norm = amalgam_grand_norm(&f, &params, &cfg.optimizer)?;
        let d = digest(&(p, q));
        out.push(CaseRecord::flag(
            "weighted_norm_finite",
            &d,
            norm.is_finite(),
            format!("bracket=[{:.6e}, {:.6e}]", norm.lower(), norm.upper()),
        ));
        let alpha = p / q;
        let beta = (q - alpha) / (q - 1.0);
        let kappa = (beta - alpha) / p;
        let predicted = 1.0 + kappa - beta;
        let integrals: Vec<(f64, f64)> = (1..=6).map(|k| {
            let n = 10i64.pow(k);
            (n as f64, f.partial_integral_abs(n))
        }).collect();
        let monotone = integrals.windows(2).all(|w| w[1].1 > w[0].1);
        let (a, b) = (integrals[3], integrals[5]);
        let slope = (b.1.ln() - a.1.ln()) / (b.0.ln() - a.0.ln());
        out.push(CaseRecord::flag(
            "weighted_integrals_grow",
            &d,
            monotone && (slope - predicted).abs() <= 0.1 * predicted,
            format!("slope={slope:.6} predicted={predicted:.6}"),
        ));
        out.push(CaseRecord::flag(
            "weighted_integral_exceeds_norm_multiple",
            &d,
            b.1 > 10.0 * norm.upper(),
            format!("integral={:.6e} norm_upper={:.6e}", b.1, norm.upper()),
        ));
    }
    Ok(out)
}

fn mult_op_norm(g: &mut Gen, cfg: &SuiteConfig, case: usize) -> Result<Vec<CaseRecord>> {
    let (o, tol) = (&cfg.optimizer, cfg.tolerance);
    let params = amalgam_params(g)?;
    let m = Multiplier::new(g.plateau_multiplier(16))?;
    let trials: Vec<StepFunction> = (0..3).map(|_| g.step_function(16, 4, true)).collect();
    let mut out = op_norm_check(&m, &params, &trials, o, tol)?.records;
    if case == 0 {
        out.extend(unboundedness_ladder(&[1, 2, 4, 8, 16], &params, o, tol)?.records);
    }
    Ok(out)
}

fn mult_isometry(g: &mut Gen, cfg: &SuiteConfig, _case: usize) -> Result<Vec<CaseRecord>> {
    let params = amalgam_params(g)?;
    let (symbol, unimodular) = g.unimodular_or_dented(16);
    let trials: Vec<StepFunction> = (0..3).map(|_| g.supported_on(&symbol)).collect();
    let m = Multiplier::new(symbol)?;
    let rep = isometry_check(&m, &params, &trials, &cfg.optimizer, cfg.tolerance)?;
    let mut out = rep.records;
    let agrees = m.is_unimodular() == unimodular;
    out.push(CaseRecord::flag(
        "criterion_agrees",
        &digest(&(&m, unimodular)),
        agrees,
        format!("generated unimodular={unimodular} detected={}", m.is_unimodular()),
    ));
    Ok(out)
}

fn mult_l1(g: &mut Gen, cfg: &SuiteConfig, _case: usize) -> Result<Vec<CaseRecord>> {
    let params = amalgam_params(g)?;
    let m = Multiplier::new(g.step_function(16, 4, true))?;
    let f = g.step_function(16, 4, true);
    let mut out = l1_bound_check(&m, &params, std::slice::from_ref(&f), &cfg.budget, &cfg.optimizer, cfg.tolerance)?.records;
    let direct = integral_abs_product(m.symbol(), &f)?;
    let via = m.apply(&f)?.partial_integral_abs(i64::MAX);
    out.push(CaseRecord::eq("image_integral_matches_product", &digest(&(&m, &f)), via, direct, 1e-12));
    Ok(out)
}

fn old_grand_norm_demo(cfg: &SuiteConfig) -> Result<Vec<CaseRecord>> {
    let family = DemoFamily::OldGrandNorm { q: 2.0, alpha: 1.5, theta: 1.0 };
    let demo = divergence_demo(family, None, &cfg.optimizer)?;
    let d = digest(&family);
    let last = demo.points.last().expect("nonempty ladder");
    Ok(vec![
        CaseRecord::flag(
            "lq_norm_finite",
            &d,
            demo.reference.is_finite(),
            format!("bracket=[{:.12e}, {:.12e}]", demo.reference.lower(), demo.reference.upper()),
        ),
        CaseRecord::flag("partial_norms_monotone", &d, demo.monotone, format!("{} points", demo.points.len())),
        CaseRecord::flag(
            "partial_norms_exceed_threshold",
            &d,
            demo.crossed,
            format!("N={:e} value={:.6} threshold={:.6}", last.x, last.value, demo.threshold),
        ),
        CaseRecord::flag(
            "series_at_eps0_divergent",
            &d,
            demo.certified_divergent,
            format!("growth exponent in ln N: {:.4}", demo.growth_exponent),
        ),
    ])
}
