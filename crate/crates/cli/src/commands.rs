//! The five commands. Each fills a [`Report`] and writes its CSV files into
//! the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use ancient_ricci::bryant::{arc_length_profile, concavity_threshold, eval_chi, solve_phi, PhiTable};
use ancient_ricci::difference::{a_and_q, build_diff_frame, overlap_consistency, pde_residual_check, DiffFrame};
use ancient_ricci::numerics::loglog_slope;
use ancient_ricci::profile_pde::{
    asymptotics_report, bryant_cap_state, build_initial_profile, concavity_monitor, evolve, scalar_curvature, Cadence,
    EvolveConfig, ProfileState,
};
use ancient_ricci::rescale::{
    apply_abg, check_admissible, solve_s_ode, t_of, tau_of, tip_invert, to_cylindrical, AdmissibleTriplet, Side,
};
use ancient_ricci::spectral::{cylindrical_poincare_check, halfline_bound_check, moment_selftest, C_EMP, DEFAULT_X};
use ancient_ricci::weights::{build_mu, fit_k_star, mu_gradient_check, poincare_tip_check, quadrature_stability};

use crate::config::Settings;
use crate::error::CliError;
use crate::family;
use crate::report::{write_file, Report};
use crate::snapshot::{load_snapshot, save_snapshot};

const PHI_R_MAX: f64 = 50.0;
const PHI_DR: f64 = 1e-3;
/// `z_max` of the arc-length Bryant curve used to glue caps onto ovals.
const CURVE_Z_MAX: f64 = 40.0;
/// `log(−t0)` at which `--dz` is taken literally.
const REFERENCE_LOG_T0: f64 = 10.0;

fn phi_table() -> Result<PhiTable, CliError> {
    Ok(solve_phi(PHI_R_MAX, PHI_DR)?)
}

fn csv_of<F>(write: F) -> Vec<u8>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf).expect("writing to memory");
    buf
}

pub fn bryant(s: &Settings, rep: &mut Report) -> Result<(), CliError> {
    let tab = phi_table()?;
    write_file(&s.out, "bryant.csv", csv_of(|w| tab.write_csv(w)))?;
    rep.at_most(
        "bryant",
        "solve_phi",
        "max ODE residual <= 1e-6",
        tab.max_residual,
        1e-6,
        format!("r in [0, {PHI_R_MAX}]"),
    );
    rep.info("bryant", "solve_phi", "half-step difference", tab.richardson_error, String::new());

    // The series through r^4 is 1 - r^2/6 + r^4/90.
    let (mut near, mut near_at) = (0.0f64, 0.0);
    let (mut coeff, mut coeff_at) = (0.0f64, 0.0);
    for &r in tab.r_grid.iter().filter(|&&r| r > 0.0 && r <= 0.5) {
        let d2 = tab.phi(r) - (1.0 - r * r / 6.0);
        let d4 = d2 - r.powi(4) / 90.0;
        if (d4 / r.powi(4)).abs() > near {
            near = (d4 / r.powi(4)).abs();
            near_at = r;
        }
        if (d2 / r.powi(4)).abs() > coeff {
            coeff = (d2 / r.powi(4)).abs();
            coeff_at = r;
        }
    }
    rep.at_most(
        "bryant",
        "solve_phi",
        "|Phi - (1 - r^2/6 + r^4/90)| / r^4 <= 1e-3 on r <= 0.5",
        near,
        1e-3,
        format!("r = {near_at}"),
    );
    rep.info("bryant", "solve_phi", "max |Phi - (1 - r^2/6)| / r^4 on r <= 0.5", coeff, format!("r = {coeff_at}"));

    let xs: Vec<f64> = (10..=50).map(f64::from).collect();
    let ys: Vec<f64> = xs.iter().map(|&r| (r * r * tab.phi(r) - 1.0 - 2.0 / (r * r)).abs()).collect();
    rep.at_least(
        "bryant",
        "solve_phi",
        "decay exponent of |r^2 Phi - 1 - 2/r^2| >= 3.5",
        -loglog_slope(&xs, &ys),
        3.5,
        "r in [10, 50]".into(),
    );

    let (mut lo, mut lo_at, mut hi, mut hi_at) = (f64::INFINITY, 0.0, f64::NEG_INFINITY, 0.0);
    let (mut far, mut far_at) = (0.0f64, 0.0);
    for &r in tab.r_grid.iter().filter(|&&r| r > 0.0) {
        let c = tab.chi(r);
        if c < lo {
            (lo, lo_at) = (c, r);
        }
        if c > hi {
            (hi, hi_at) = (c, r);
        }
        if r >= 10.0 && (c - 1.0).abs() * r * r > far {
            (far, far_at) = ((c - 1.0).abs() * r * r, r);
        }
    }
    rep.at_least("bryant", "eval_chi", "min chi >= 0.1", lo, 0.1, format!("r = {lo_at}"));
    rep.at_most("bryant", "eval_chi", "max chi <= 1.2", hi, 1.2, format!("r = {hi_at}"));
    let chi0 = eval_chi(&tab, 1e-6)?;
    rep.at_most("bryant", "eval_chi", "|chi(0+) - 1/6| <= 1e-4", (chi0 - 1.0 / 6.0).abs(), 1e-4, "r = 1e-6".into());
    rep.at_most("bryant", "eval_chi", "r^2 |chi - 1| <= 3.5 on r >= 10", far, 3.5, format!("r = {far_at}"));

    let b_star = concavity_threshold(&tab)?;
    rep.info("bryant", "concavity_threshold", "B* (L0 = 2 B*)", b_star, String::new());
    rep.info("bryant", "solve_phi", "K_emp with 1/Phi - 1 >= r^2/K", tab.k_emp, String::new());

    let curve = arc_length_profile(&tab, 12.0)?;
    let cap = bryant_cap_state(&curve, 0.01, 10.0)?;
    let tip = scalar_curvature(&cap)?.tip_right.unwrap_or(f64::NAN);
    rep.at_most(
        "profile_pde",
        "scalar_curvature",
        "|R(tip) - 1| <= 1e-3 on the Bryant cap",
        (tip - 1.0).abs(),
        1e-3,
        "tip".into(),
    );
    Ok(())
}

/// Flow configuration for the settings; `dz` is scaled with `√(−t0)`
/// relative to `log(−t0) = 10` so the rescaled resolution stays fixed.
pub fn evolve_config(s: &Settings) -> EvolveConfig {
    EvolveConfig {
        t0: -s.t0_log.exp(),
        dz: s.dz * (0.5 * (s.t0_log - REFERENCE_LOG_T0)).exp(),
        dt_safety: s.dt_safety,
        theta_match: s.theta,
        ..EvolveConfig::default()
    }
}

/// Normalized tip curvature `R (-t)/log(-t)`, labelled by side.
fn tip_normalized(state: &ProfileState) -> Result<Vec<(&'static str, f64)>, CliError> {
    let c = scalar_curvature(state)?;
    let big_t = -state.t;
    Ok([("left tip", c.tip_left), ("right tip", c.tip_right)]
        .into_iter()
        .filter_map(|(side, r)| r.map(|r| (side, r * big_t / big_t.ln())))
        .collect())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| format!("{x:.10e}"))
}

pub fn evolve_cmd(s: &Settings, rep: &mut Report) -> Result<(), CliError> {
    let tab = phi_table()?;
    let curve = arc_length_profile(&tab, CURVE_Z_MAX)?;
    let cfg = evolve_config(s);
    let init = build_initial_profile(&cfg, &curve)?;
    let tau0 = tau_of(init.t);
    let marks: Vec<f64> = (1..s.steps).map(|k| t_of(tau0 + s.dtau * k as f64 / s.steps as f64)).collect();
    let t_end = t_of(tau0 + s.dtau);
    let snaps = evolve(&init, &cfg, t_end, Cadence::At(marks)).map_err(|a| CliError::Core(a.error))?;

    let dir = s.out.join("snapshots");
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let b_star = concavity_threshold(&tab)?;
    let mut summary =
        String::from("index,t,tau,max_F,tip_left,tip_right,tip_R_scaled_min,tip_R_scaled_max,max_H_zz,region_nodes\n");
    let (mut tip_lo, mut tip_hi) = ((f64::INFINITY, 0usize), (f64::NEG_INFINITY, 0usize));
    let mut conc: [(f64, String, bool, usize); 2] =
        std::array::from_fn(|_| (f64::NEG_INFINITY, String::new(), true, 0));
    for (k, st) in snaps.iter().enumerate() {
        save_snapshot(st, &dir.join(format!("snapshot_{k:03}.csv")))?;
        let tips = tip_normalized(st)?;
        let (lo, hi) = tips.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, v)| (a.min(v), b.max(v)));
        if lo < tip_lo.0 {
            tip_lo = (lo, k);
        }
        if hi > tip_hi.0 {
            tip_hi = (hi, k);
        }
        let mut first = None;
        for (slot, l0) in [2.0 * b_star, b_star].into_iter().enumerate() {
            let m = concavity_monitor(st, l0);
            first.get_or_insert((m.max_hzz, m.region_nodes));
            let c = &mut conc[slot];
            c.2 &= m.pass;
            c.3 = c.3.max(m.region_nodes);
            if let (Some(h), Some(z)) = (m.max_hzz, m.at_z) {
                if h > c.0 {
                    c.0 = h;
                    c.1 = format!("snapshot {k}, z = {z}");
                }
            }
        }
        let (hzz, nodes) = first.unwrap();
        summary.push_str(&format!(
            "{k},{:.16e},{:.16e},{:.16e},{},{},{:.10e},{:.10e},{},{nodes}\n",
            st.t,
            tau_of(st.t),
            st.max_f(),
            fmt_opt(st.tip_left),
            fmt_opt(st.tip_right),
            lo,
            hi,
            fmt_opt(hzz)
        ));
    }
    write_file(&s.out, "summary.csv", summary)?;

    let first = asymptotics_report(&snaps[0], s.theta)?;
    let last = asymptotics_report(snaps.last().unwrap(), s.theta)?;
    for (a, b) in first.iter().zip(&last) {
        rep.at_most(
            "profile_pde",
            "asymptotics_report",
            &format!("{} final <= initial + 0.05 (initial {:.6e}; {})", a.name, a.max, a.region),
            b.max,
            a.max + 0.05,
            format!("z = {}", b.at_z),
        );
    }
    for (slot, label) in ["L0 = 2B*", "L0 = B*"].into_iter().enumerate() {
        let (h, at, pass, nodes) = &conc[slot];
        let (value, loc) =
            if *nodes == 0 { (f64::NAN, "region empty at every snapshot".to_string()) } else { (*h, at.clone()) };
        rep.flag(
            "profile_pde",
            "concavity_monitor",
            &format!("H_zz <= 1e-6 max F^2/(-t) on F^2 >= L0^2(-t)/log(-t), {label}"),
            value,
            *pass,
            loc,
        );
    }
    rep.at_least(
        "profile_pde",
        "scalar_curvature",
        "tip R (-t)/log(-t) >= 0.7",
        tip_lo.0,
        0.7,
        format!("snapshot {}", tip_lo.1),
    );
    rep.at_most(
        "profile_pde",
        "scalar_curvature",
        "tip R (-t)/log(-t) <= 1.3",
        tip_hi.0,
        1.3,
        format!("snapshot {}", tip_hi.1),
    );
    Ok(())
}

fn input_path(s: &Settings, what: &str) -> Result<PathBuf, CliError> {
    s.input.clone().ok_or_else(|| CliError::Config(format!("--input is required ({what})")))
}

pub fn diagnose(s: &Settings, rep: &mut Report) -> Result<(), CliError> {
    let path = input_path(s, "a snapshot file")?;
    let st = load_snapshot(&path)?;
    let tab = phi_table()?;
    let cyl = to_cylindrical(&st)?;
    write_file(&s.out, "cylindrical.csv", csv_of(|w| cyl.write_csv(w)))?;
    let curv = scalar_curvature(&st)?;
    let mut text = String::from("z,R\n");
    for (z, r) in curv.z.iter().zip(&curv.r) {
        text.push_str(&format!("{z:.16e},{r:.16e}\n"));
    }
    write_file(&s.out, "curvature.csv", text)?;

    for row in asymptotics_report(&st, s.theta)? {
        rep.info(
            "profile_pde",
            "asymptotics_report",
            &format!("{} ({})", row.name, row.region),
            row.max,
            format!("z = {}", row.at_z),
        );
    }
    let m = concavity_monitor(&st, 2.0 * concavity_threshold(&tab)?);
    let loc = m.at_z.map_or_else(|| "region empty".to_string(), |z| format!("z = {z}"));
    rep.flag(
        "profile_pde",
        "concavity_monitor",
        "H_zz <= 1e-6 max F^2/(-t) on F^2 >= L0^2(-t)/log(-t), L0 = 2B*",
        m.max_hzz.unwrap_or(f64::NAN),
        m.pass,
        loc,
    );

    let tips = tip_normalized(&st)?;
    if tips.is_empty() {
        return Ok(());
    }
    for (side, v) in &tips {
        rep.at_least("profile_pde", "scalar_curvature", "tip R (-t)/log(-t) >= 0.7", *v, 0.7, (*side).into());
        rep.at_most("profile_pde", "scalar_curvature", "tip R (-t)/log(-t) <= 1.3", *v, 1.3, (*side).into());
    }

    let theta = s.theta;
    let mut tables = Vec::new();
    for (side, present, name) in [(Side::Plus, st.tip_right, "plus"), (Side::Minus, st.tip_left, "minus")] {
        if present.is_none() {
            continue;
        }
        let tf = tip_invert(&st, side, Some(2.0 * theta), theta / 200.0)?;
        write_file(&s.out, &format!("tip_{name}.csv"), csv_of(|w| tf.write_csv(w)))?;
        let wt = build_mu(&tf, &tab, theta)?;
        write_file(&s.out, &format!("mu_{name}.csv"), csv_of(|w| wt.write_csv(w)))?;
        rep.at_most(
            "weights",
            "build_mu",
            &format!("{name}: relative change of mu under doubled quadrature <= 1e-6"),
            quadrature_stability(&tf, &tab, theta)?,
            1e-6,
            String::new(),
        );
        let g = mu_gradient_check(&wt, &tf, 0.5)?;
        let loc = g.at_rho.map_or_else(|| "vacuous".to_string(), |r| format!("rho = {r}"));
        rep.flag(
            "weights",
            "mu_gradient_check",
            &format!("{name}: |mu_rho - (V^-2 - 1)/rho| <= 0.5 (V^-2 - 1)/rho on rho <= 2 theta"),
            g.max_ratio.unwrap_or(0.0),
            g.pass,
            loc,
        );
        tables.push((name, wt));
    }
    let all: Vec<_> = tables.iter().map(|(_, w)| w.clone()).collect();
    let k = fit_k_star(&all);
    rep.info("weights", "fit_k_star", "K_emp with mu_rhorho <= mu_rho^2/4 + (K/4) rho^-2", k, String::new());
    let funcs = family::tip(s.seed, 100, theta);
    for (name, wt) in &tables {
        let (mut worst, mut worst_at, mut fails) = (0.0f64, 0usize, 0usize);
        for (i, f) in funcs.iter().enumerate() {
            let r = poincare_tip_check(wt, |x| f.eval(x), k);
            fails += usize::from(!r.pass || r.infinite_rhs);
            if r.lhs / r.rhs > worst {
                (worst, worst_at) = (r.lhs / r.rhs, i);
            }
        }
        rep.flag(
            "weights",
            "poincare_tip_check",
            &format!("{name}: lhs <= 8 int f'^2 e^-mu + K int f^2/rho^2 e^-mu, 100 functions"),
            worst,
            fails == 0,
            format!("function {worst_at}, {fails} failures"),
        );
        let inf = poincare_tip_check(wt, |r| 1.0 + r, k);
        rep.flag(
            "weights",
            "poincare_tip_check",
            &format!("{name}: f(0) != 0 reported as INFINITE_RHS"),
            f64::from(u8::from(inf.infinite_rhs)),
            inf.infinite_rhs,
            "f = 1 + rho".into(),
        );
    }
    Ok(())
}

/// Saved snapshots of a run, in file-name order.
pub fn load_run(dir: &Path) -> Result<Vec<ProfileState>, CliError> {
    let sub = dir.join("snapshots");
    let dir = if sub.is_dir() { sub } else { dir.to_path_buf() };
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| CliError::io(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let series = files.iter().map(|p| load_snapshot(p)).collect::<Result<Vec<_>, _>>()?;
    if series.len() < 3 {
        return Err(CliError::Config(format!("{} holds {} snapshots; need at least 3", dir.display(), series.len())));
    }
    if series.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(CliError::Config(format!("snapshots in {} are not increasing in t", dir.display())));
    }
    Ok(series)
}

pub fn compare(s: &Settings, rep: &mut Report) -> Result<(), CliError> {
    let series = load_run(&input_path(s, "a run directory")?)?;
    let eg = s.gamma.exp();
    let last = series.last().unwrap();
    let p = AdmissibleTriplet {
        alpha: s.alpha,
        beta: s.beta,
        gamma: s.gamma,
        t_star: eg * last.t + s.beta,
        epsilon: s.epsilon,
    };
    if !(p.t_star < 0.0) || !check_admissible(&p) {
        return Err(CliError::Config(format!(
            "triplet ({}, {}, {}) is not admissible at t* = {}",
            s.alpha, s.beta, s.gamma, p.t_star
        )));
    }
    let shift = solve_s_ode(&series, &p)?;
    rep.flag(
        "rescale",
        "solve_s_ode",
        "shift stays within its admissibility bound",
        shift.worst_ratio,
        shift.bound_ok,
        String::new(),
    );
    let t_lo = eg * series[0].t + s.beta;
    let targets: Vec<&ProfileState> =
        series.iter().filter(|st| st.t >= t_lo && st.t <= p.t_star * (1.0 - 1e-12)).collect();
    if targets.len() < 3 {
        return Err(CliError::Config(format!("only {} snapshots lie in the transformed time range", targets.len())));
    }
    let mut frames: Vec<DiffFrame> = Vec::with_capacity(targets.len());
    let mut moved_states = Vec::with_capacity(targets.len());
    for st in &targets {
        let moved = apply_abg(&series, &p, &shift, &[st.t], st.dz)?.remove(0);
        let f1 = to_cylindrical(st)?;
        let mut f2 = to_cylindrical(&moved)?;
        f2.tau = f1.tau;
        frames.push(build_diff_frame(&f1, &f2, s.theta, s.dxi)?);
        moved_states.push(moved);
    }
    let diff_dir = s.out.join("frames");
    fs::create_dir_all(&diff_dir).map_err(|e| CliError::io(&diff_dir, e))?;
    for (k, f) in frames.iter().enumerate() {
        write_file(&diff_dir, &format!("frame_{k:03}.csv"), csv_of(|w| f.write_csv(w)))?;
    }
    let ser = a_and_q(&frames, DEFAULT_X)?;
    write_file(&s.out, "series.csv", csv_of(|w| ser.write_csv(w)))?;

    let (a_max, a_at) =
        ser.a_series
            .iter()
            .zip(&ser.taus)
            .fold((0.0f64, f64::NAN), |acc, (a, t)| if a.abs() >= acc.0 { (a.abs(), *t) } else { acc });
    rep.info("difference", "a_and_q", "max |a|", a_max, format!("tau = {a_at}"));
    let span = format!("tau in [{}, {}]", ser.taus[0], ser.taus[ser.taus.len() - 1]);
    rep.at_most("difference", "a_and_q", "max |Q| / ((-tau)^-1 |a| + envelope) <= 0.5", ser.q_ratio(), 0.5, span);
    let res = pde_residual_check(&frames)?;
    rep.info(
        "difference",
        "pde_residual_check",
        "max |H PDE residual| on |xi| <= 2",
        res.worst,
        format!("xi = {}, tau = {}", res.at_xi, res.at_tau),
    );

    let picks = [0, frames.len() / 2, frames.len() - 1];
    for &k in &picks {
        let st = targets[k];
        if st.tip_right.is_none() || moved_states[k].tip_right.is_none() {
            continue;
        }
        let t1 = tip_invert(st, Side::Plus, Some(1.2), 1e-3)?;
        let t2 = tip_invert(&moved_states[k], Side::Plus, Some(1.2), 1e-3)?;
        let ov = overlap_consistency(&frames[k], &t1, &t2)?;
        let check = "|H_xi + V1 - V2| <= 1e-3 on the overlap band";
        if ov.vacuous {
            rep.info("difference", "overlap_consistency", check, 0.0, format!("tau = {}, band empty", frames[k].tau));
        } else {
            rep.at_most(
                "difference",
                "overlap_consistency",
                check,
                ov.identity_residual,
                1e-3,
                format!("tau = {}, xi = {}", frames[k].tau, ov.at_xi),
            );
        }
    }
    Ok(())
}

pub fn spectral_selftest(s: &Settings, rep: &mut Report) -> Result<(), CliError> {
    for row in moment_selftest(DEFAULT_X, s.dxi) {
        rep.flag(
            "spectral",
            "moment_selftest",
            &format!("{}: relative error <= {:.0e} (target {})", row.name, row.tolerance, row.target),
            row.rel_error,
            row.pass(),
            format!("computed {:.16e}", row.computed),
        );
    }
    let funcs = family::half_line(s.seed, 100, 20.0, 0.01);
    let (mut worst, mut at, mut fails) = (0.0f64, 0usize, 0usize);
    for (i, f) in funcs.iter().enumerate() {
        let c = halfline_bound_check(f);
        fails += usize::from(!c.pass);
        if c.ratio() > worst {
            (worst, at) = (c.ratio(), i);
        }
    }
    rep.flag(
        "spectral",
        "halfline_bound_check",
        "int e^-xi^2/4 g^2 <= 2 int e^-xi^2/4 f^2, 100 functions",
        worst,
        fails == 0,
        format!("function {at}, {fails} failures"),
    );
    for (l1, l2, l3) in [(4.0, 5.0, 10.0), (4.0, 6.0, 12.0), (5.0, 6.5, 14.0)] {
        let (mut worst, mut at, mut fails) = (0.0f64, 0usize, 0usize);
        for (i, f) in family::half_line(s.seed.wrapping_add(1), 50, l3, 0.01).iter().enumerate() {
            let c = cylindrical_poincare_check(f, l1, l2, l3, C_EMP)?;
            fails += usize::from(!c.pass);
            if c.ratio() > worst {
                (worst, at) = (c.ratio(), i);
            }
        }
        rep.flag(
            "spectral",
            "cylindrical_poincare_check",
            &format!(
                "L2^2 int_[L2,L3] <= C_emp (...), C_emp = {C_EMP}, (L1, L2, L3) = ({l1}, {l2}, {l3}), 50 functions"
            ),
            worst,
            fails == 0,
            format!("function {at}, {fails} failures"),
        );
    }
    Ok(())
}
