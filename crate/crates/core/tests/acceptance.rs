//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fail.

use std::time::Instant;

use nullsteer::experiments::*;
use nullsteer::metrics::{adc_headroom_bits, ratio_db, suppression_between, to_db, to_linear};
use nullsteer::rng::{complex_gaussian, seeded, sub_seed};
use nullsteer::*;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn random_instance(seed: u64, m: usize, n: usize) -> (CVector64, CMatrix64) {
    let mut rng = seeded(seed);
    let h_c = CVector64::from_fn(m, |_, _| complex_gaussian(&mut rng, 1.0));
    let h_dl = CMatrix64::from_fn(n, m, |_, _| complex_gaussian(&mut rng, 1.0));
    (h_c, h_dl)
}

fn default_grid(s: &Scenario) -> GridSpec {
    GridSpec::centered(s.reader_positions[0], 1.25, 1.25, 0.025).unwrap()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn exact_null_default() -> Result<Outcome> {
    let s = default_techtile_scenario();
    let ch = los_channel::<f64>(&s)?;
    let t0 = Instant::now();
    let (x, rep) = azf_solve(&ch.h_c, &ch.h_dl, &SolverOptions::default())?;
    let elapsed = t0.elapsed().as_secs_f64();
    let mrt = po_mrt(&ch.h_c)?;
    let base = evaluate(&s, &ch, &mrt, None)?;
    let ours = evaluate(&s, &ch, &x, Some(base.p_r_total_dbm))?;
    let sup = ours.suppression_db.unwrap_or(f64::NAN);
    let po = evaluate(&s, &ch, &azf_phase_only(&x)?, Some(base.p_r_total_dbm))?;
    let po_sup = po.suppression_db.unwrap_or(f64::NAN);
    let pass = rep.null_residual <= 1e-8 && sup >= 100.0 && elapsed < 2.0;
    Ok(outcome(
        pass,
        format!(
            "null residual {:.2e}, suppression {sup:.1} dB (phase-only {po_sup:.1} dB), solve {elapsed:.3} s",
            rep.null_residual
        ),
    ))
}

fn closed_form_dim1() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for t in 0..200u64 {
        let m = 2 + (t % 7) as usize;
        let (h_c, h_dl) = random_instance(sub_seed(1001, t), m, m - 1);
        let (_, rep) = azf_solve(&h_c, &h_dl, &SolverOptions::default())?;
        let cf = azf_closed_form_dim1(&h_c, &h_dl)?.gain(&h_c).re;
        worst = worst.max((rep.objective - cf).abs() / cf);
    }
    Ok(outcome(worst <= 1e-8, format!("200 instances, worst relative gap {worst:.2e}")))
}

fn bruteforce_three_emitters() -> Result<Outcome> {
    let mut worst_gap = 0.0f64;
    let mut below = 0;
    for t in 0..50u64 {
        let (h_c, h_dl) = random_instance(sub_seed(2002, t), 3, 1);
        let (_, rep) = azf_solve(&h_c, &h_dl, &SolverOptions::default())?;
        let bf = azf_bruteforce(&h_c, &h_dl, 1_000_000)?;
        if rep.objective < bf {
            below += 1;
        }
        worst_gap = worst_gap.max((rep.objective - bf).abs() / rep.objective);
    }
    Ok(outcome(
        below == 0 && worst_gap <= 1e-3,
        format!("50 instances, solver below grid {below} times, worst relative gap {worst_gap:.2e}"),
    ))
}

fn rician_ordering() -> Result<Outcome> {
    let s = default_techtile_scenario();
    let opts = SolverOptions::default();
    let mut wins = 0;
    let mut bound_ok = true;
    for draw in 0..100u64 {
        let ch = rician_channel::<f64>(&s, 3.0, sub_seed(3003, draw))?;
        let (x, rep) = azf_solve(&ch.h_c, &ch.h_dl, &opts)?;
        let po = azf_phase_only(&x)?;
        let mrt = po_mrt(&ch.h_c)?;
        let d_azf = evaluate(&s, &ch, &po, None)?.delta_db;
        let d_mrt = evaluate(&s, &ch, &mrt, None)?.delta_db;
        if d_azf > d_mrt {
            wins += 1;
        }
        let bound: f64 = ch.h_c.iter().map(|z| z.norm()).sum();
        bound_ok &= rep.objective <= bound * (1.0 + 1e-12);
    }
    Ok(outcome(
        wins >= 99 && bound_ok,
        format!("phase-only AZF beats PO-MRT on Delta in {wins}/100 draws, objective bound held: {bound_ok}"),
    ))
}

fn phase_only_loss() -> Result<Outcome> {
    let base = default_techtile_scenario();
    let mut rng = seeded(4004);
    let mut losses = Vec::with_capacity(100);
    while losses.len() < 100 {
        let bd = [rng.random_range(0.2..3.8), rng.random_range(0.2..7.8), 1.0];
        let s = Scenario { bd_position: bd, ..base.clone() };
        if s.validate().is_err() {
            continue;
        }
        let ch = los_channel::<f64>(&s)?;
        let (x, rep) = azf_solve(&ch.h_c, &ch.h_dl, &SolverOptions::default())?;
        let po = azf_phase_only(&x)?;
        losses.push(20.0 * (rep.objective / po.gain(&ch.h_c).norm()).log10());
    }
    losses.sort_by(|a, b| a.total_cmp(b));
    let median = quantile(&losses, 0.5);
    Ok(outcome(
        median <= 1.0,
        format!(
            "loss dB min {:.2e} p10 {:.2e} median {:.2e} p90 {:.2e} max {:.2e}",
            losses[0],
            quantile(&losses, 0.1),
            median,
            quantile(&losses, 0.9),
            losses[99]
        ),
    ))
}

fn k_sweep() -> Result<Outcome> {
    let s = default_techtile_scenario();
    let opts = SolverOptions::default();
    let kinds = [BeamformerKind::PoMrt, BeamformerKind::AzfAmplitude, BeamformerKind::Azf];
    let ks = [10, 20, 30, 40, 42];
    let truth = los_channel::<f64>(&s)?;
    let mut notes = Vec::new();
    let mut pass = true;
    for order in [SelectionOrder::StrongestFirst, SelectionOrder::WeakestFirst] {
        let r = run_k_sweep(&s, &ks, order, &kinds, &ImpairmentSpec::none(), &opts)?;
        let obj: Vec<f64> = r.records_for(BeamformerKind::AzfAmplitude).map(|x| x.objective).collect();
        let mono = obj.windows(2).all(|w| w[1] >= w[0] - 1e-6 * w[0]);
        pass &= mono;
        notes.push(format!("{} azf monotone {mono}", order.as_str()));
        if order == SelectionOrder::StrongestFirst {
            let p: Vec<f64> = r.records_for(BeamformerKind::PoMrt).map(|x| x.p_bd_dbm).collect();
            let inc = p.windows(2).all(|w| w[1] > w[0]);
            pass &= inc;
            notes.push(format!("po-mrt P_BD increasing {inc}"));
        }
        let mut worst = 0.0f64;
        for kind in kinds {
            let last = r.records_for(kind).last().unwrap();
            let (w, _) = compute_weights(kind, &truth, &opts)?;
            let single = evaluate(&s, &truth, &w, None)?;
            for (a, b) in [
                (last.p_bd_dbm, single.p_bd_dbm),
                (last.p_r_dbm, single.p_r_total_dbm),
                (last.delta_db, single.delta_db),
            ] {
                worst = worst.max((a - b).abs());
            }
        }
        pass &= worst <= 1e-12;
        notes.push(format!("K=42 gap {worst:.1e}"));
    }
    Ok(outcome(pass, notes.join(", ")))
}

fn heatmap_and_phase_noise() -> Result<Outcome> {
    let s = default_techtile_scenario();
    let g = default_grid(&s);
    let opts = SolverOptions::default();
    let r = s.reader_positions[0];
    let cell = g.cell_of([r[0], r[1]]).unwrap();
    let map = run_heatmap::<f64>(&s, BeamformerKind::AzfAmplitude, &g, &ImpairmentSpec::none(), &opts)?;
    let argmin_ok = map.argmin() == cell;

    let rows = run_phase_noise_sweep::<f64>(&s, &[5f64.to_radians()], 50, 5005, &opts)?;
    let mean = rows[0].mean_suppression_db;

    let noisy = ImpairmentSpec {
        csi_error_rel_std: 0.0,
        phase_noise_std_rad: 5f64.to_radians(),
        rng_seed: 5005,
    };
    let shifted = run_heatmap::<f64>(&s, BeamformerKind::Azf, &g, &noisy, &opts)?.argmin();
    let a = g.point(shifted.0, shifted.1);
    let shift = ((a[0] - r[0]).powi(2) + (a[1] - r[1]).powi(2)).sqrt();
    Ok(outcome(
        argmin_ok && (10.0..=40.0).contains(&mean),
        format!(
            "argmin {:?} vs reader {cell:?}, 5 deg mean suppression {mean:.2} dB (p10 {:.2}, p90 {:.2}), noisy minimum moved {shift:.3} m",
            map.argmin(),
            rows[0].p10_suppression_db,
            rows[0].p90_suppression_db
        ),
    ))
}

fn metric_algebra() -> Result<Outcome> {
    let a = (suppression_between(-8.06, -25.30) - 17.24).abs();
    let b = (suppression_between(-13.14, -13.78) - 0.64).abs();
    let mut round = 0.0f64;
    for i in 0..=6000 {
        let v = -300.0 + i as f64 * 0.1;
        round = round.max((to_db(to_linear(v)) - v).abs());
    }
    let bits = (adc_headroom_bits(60.2) - 10.0).abs();
    let cap = ratio_db(1.0, 0.0) == 300.0 && to_db(0.0) == -300.0;
    Ok(outcome(
        a <= 1e-12 && b <= 1e-12 && round <= 1e-12 && bits <= 1e-12 && cap,
        format!("17.24 err {a:.1e}, 0.64 err {b:.1e}, dB round trip {round:.1e}, caps {cap}"),
    ))
}

fn determinism() -> Result<Outcome> {
    let s = default_techtile_scenario();
    let g = default_grid(&s);
    let opts = SolverOptions::default();
    let imp = ImpairmentSpec {
        csi_error_rel_std: 0.1,
        phase_noise_std_rad: 0.05,
        rng_seed: 6006,
    };
    let heat = |threads: usize| -> Result<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        pool.install(|| run_heatmap::<f64>(&s, BeamformerKind::Azf, &g, &imp, &opts)).map(|m| io::heatmap_csv(&m))
    };
    let h1 = heat(1)?;
    let h4 = heat(4)?;
    let h4b = heat(4)?;
    let kinds = [BeamformerKind::PoMrt, BeamformerKind::Azf];
    let sweep = || -> Result<String> {
        let r = run_k_sweep(&s, &[10, 20, 42], SelectionOrder::StrongestFirst, &kinds, &imp, &opts)?;
        Ok(io::sweep_csv(&r, BeamformerKind::Azf))
    };
    let pn = || -> Result<String> {
        Ok(io::phase_noise_csv(&run_phase_noise_sweep::<f64>(&s, &[0.0, 0.05], 20, 6006, &opts)?))
    };
    let same_heat = h1 == h4 && h4 == h4b;
    let same_sweep = sweep()? == sweep()?;
    let same_pn = pn()? == pn()?;
    Ok(outcome(
        same_heat && same_sweep && same_pn,
        format!("heatmap 1 vs 4 threads {same_heat}, sweep {same_sweep}, phase noise {same_pn}"),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 9] = [
        ("exact null in the default room", exact_null_default),
        ("closed form on one-dimensional null spaces", closed_form_dim1),
        ("brute force on three emitters", bruteforce_three_emitters),
        ("Rician ordering and objective bound", rician_ordering),
        ("phase-only loss over BD placements", phase_only_loss),
        ("emitter-count sweep", k_sweep),
        ("heatmap null and phase-noise suppression", heatmap_and_phase_noise),
        ("metric algebra", metric_algebra),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} A{} {name}: {detail} [{:.2} s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            t0.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
