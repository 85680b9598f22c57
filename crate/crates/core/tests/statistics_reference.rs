use edvkit::statistics::{
    background_removal, lmg, ols_regression, partial_spearman, pearson, rank, shapiro_wilk,
    skew_normal_fit, spearman, FitFamily, SkewNormal,
};
mod common;

use common::oracles::{brute_pearson, brute_rank, normal_sample, r_squared, residuals};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn fixture(name: &str) -> Value {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

#[test]
fn shapiro_matches_reference_fixtures() {
    let data = fixture("shapiro_reference.json");
    for case in data["cases"].as_array().unwrap() {
        let name = case["name"].as_str().unwrap();
        let r = shapiro_wilk(&floats(&case["x"])).unwrap();
        let (w, p) = (
            case["w"].as_f64().unwrap(),
            case["p_value"].as_f64().unwrap(),
        );
        assert!((r.w - w).abs() < 1e-3, "{name}: W {} vs {w}", r.w);
        assert!(
            (r.p_value - p).abs() <= 0.1 * p,
            "{name}: p {} vs {p}",
            r.p_value
        );
        assert_eq!(r.normal_at_005, p > 0.05, "{name}");
    }
}

#[test]
fn spearman_matches_reference_fixtures() {
    let data = fixture("spearman_reference.json");
    for case in data["cases"].as_array().unwrap() {
        let (x, y) = (floats(&case["x"]), floats(&case["y"]));
        let r = spearman(&x, &y).unwrap();
        assert!((r.rho - case["rho"].as_f64().unwrap()).abs() < 1e-12);
        let p = case["p_value"].as_f64().unwrap();
        assert!(
            (r.p_value - p).abs() <= 1e-6 * p.max(1e-300),
            "p {} vs {p}",
            r.p_value
        );
    }
}

#[test]
fn spearman_equals_brute_force_rank_pearson() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for trial in 0..300 {
        let n = rng.random_range(4..120);
        // Rounding creates ties in a third of the trials.
        let tie = |v: f64| if trial % 3 == 0 { (v * 3.0).round() } else { v };
        let x: Vec<f64> = normal_sample(&mut rng, n).into_iter().map(tie).collect();
        let noise = normal_sample(&mut rng, n);
        let y: Vec<f64> = x
            .iter()
            .zip(&noise)
            .map(|(a, e)| tie(0.5 * a + e))
            .collect();
        if brute_rank(&x).windows(2).all(|w| w[0] == w[1])
            || brute_rank(&y).windows(2).all(|w| w[0] == w[1])
        {
            continue;
        }
        assert_eq!(rank(&x), brute_rank(&x));
        let r = spearman(&x, &y).unwrap();
        worst = worst.max((r.rho - brute_pearson(&brute_rank(&x), &brute_rank(&y))).abs());
    }
    assert!(worst < 1e-12, "max deviation {worst:e}");
}

#[test]
fn exact_p_value_for_small_samples() {
    // All 4! orderings: |rho| = 1 occurs for 2 of 24.
    let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 30.0, 40.0]).unwrap();
    assert!((r.rho - 1.0).abs() < 1e-15);
    assert!((r.p_value - 2.0 / 24.0).abs() < 1e-12);
}

#[test]
fn partial_with_no_covariates_is_plain_spearman() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [5, 9, 10, 30, 94] {
        let x = normal_sample(&mut rng, n);
        let y = normal_sample(&mut rng, n);
        assert_eq!(
            partial_spearman(&x, &y, &[]).unwrap(),
            spearman(&x, &y).unwrap()
        );
    }
}

#[test]
fn partial_matches_rank_residual_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let n = rng.random_range(12..100);
        let z1 = normal_sample(&mut rng, n);
        let z2 = normal_sample(&mut rng, n);
        let e1 = normal_sample(&mut rng, n);
        let e2 = normal_sample(&mut rng, n);
        let x: Vec<f64> = (0..n).map(|i| z1[i] + 0.5 * z2[i] + e1[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| -z1[i] + e2[i] + 0.3 * e1[i]).collect();
        let got = partial_spearman(&x, &y, &[("z1", &z1), ("z2", &z2)]).unwrap();
        let cols = vec![brute_rank(&z1), brute_rank(&z2)];
        let want = brute_pearson(
            &residuals(&brute_rank(&x), &cols),
            &residuals(&brute_rank(&y), &cols),
        );
        assert!((got.rho - want).abs() < 1e-10, "{} vs {want}", got.rho);
        assert_eq!(got.covariates, ["z1", "z2"]);
    }
}

#[test]
fn lmg_matches_brute_force_average_over_orderings() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 1..=4 {
        let n = 60;
        let cols: Vec<Vec<f64>> = (0..k).map(|_| normal_sample(&mut rng, n)).collect();
        let noise = normal_sample(&mut rng, n);
        let y: Vec<f64> = (0..n)
            .map(|i| {
                cols.iter()
                    .enumerate()
                    .map(|(j, c)| (j + 1) as f64 * c[i])
                    .sum::<f64>()
                    + noise[i]
            })
            .collect();
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        let got = lmg(&y, &refs).unwrap();

        let mut orders = vec![Vec::new()];
        for m in 0..k {
            orders = orders
                .into_iter()
                .flat_map(|o: Vec<usize>| {
                    (0..=o.len()).map(move |pos| {
                        let mut p = o.clone();
                        p.insert(pos, m);
                        p
                    })
                })
                .collect();
        }
        let mut want = vec![0.0; k];
        for order in &orders {
            let mut prev = 0.0;
            let mut used = Vec::new();
            for &j in order {
                used.push(cols[j].clone());
                let now = r_squared(&y, &used);
                want[j] += now - prev;
                prev = now;
            }
        }
        let total_r2 = r_squared(&y, &cols);
        for j in 0..k {
            let share = want[j] / orders.len() as f64;
            assert!(
                (got[j] - share).abs() < 1e-10,
                "k={k} j={j}: {} vs {share}",
                got[j]
            );
        }
        assert!((got.iter().sum::<f64>() - total_r2).abs() < 1e-10);

        let named: Vec<(String, &[f64])> = refs
            .iter()
            .enumerate()
            .map(|(j, c)| (format!("x{j}"), *c))
            .collect();
        let named: Vec<(&str, &[f64])> = named.iter().map(|(n, c)| (n.as_str(), *c)).collect();
        let r = ols_regression(&y, &named).unwrap();
        let pct: f64 = r.relative_importance.iter().map(|(_, v)| v).sum();
        assert!((pct - 100.0).abs() < 0.1, "{pct}");
    }
}

#[test]
fn lmg_orthogonal_equal_effects_split_evenly() {
    let x1: Vec<f64> = (0..8)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let x2: Vec<f64> = (0..8)
        .map(|i| if (i / 2) % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    // The interaction term is orthogonal to both predictors.
    let y: Vec<f64> = x1
        .iter()
        .zip(&x2)
        .map(|(a, b)| a + b + 0.1 * a * b)
        .collect();
    let r = ols_regression(&y, &[("a", &x1), ("b", &x2)]).unwrap();
    let (a, b) = (r.importance("a").unwrap(), r.importance("b").unwrap());
    assert!((a - 50.0).abs() < 0.1 && (b - 50.0).abs() < 0.1, "{a} {b}");
}

#[test]
fn regression_r_squared_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 94;
    let x1 = normal_sample(&mut rng, n);
    let x2 = normal_sample(&mut rng, n);
    let e = normal_sample(&mut rng, n);
    let y: Vec<f64> = (0..n)
        .map(|i| 70.0 + 3.0 * x1[i] - 2.0 * x2[i] + e[i])
        .collect();
    let r = ols_regression(&y, &[("x1", &x1), ("x2", &x2)]).unwrap();
    let r2 = r_squared(&y, &[x1.clone(), x2.clone()]);
    assert!((r.r_squared - r2).abs() < 1e-10);
    assert!(
        (r.adj_r_squared - (1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n as f64 - 3.0))).abs() < 1e-10
    );
    assert!((r.coefficient("x1").unwrap().estimate - 3.0).abs() < 0.5);
}

#[test]
fn background_removal_leaves_ratio_to_fit() {
    let size: Vec<f64> = (1..=30).map(|i| 1000.0 * i as f64).collect();
    let las: Vec<f64> = size
        .iter()
        .enumerate()
        .map(|(i, s)| 10.0 * s.ln() + (i % 4) as f64)
        .collect();
    let (normalized, fits) = background_removal(&las, &[(&size, FitFamily::LogLinear)]).unwrap();
    for ((l, s), v) in las.iter().zip(&size).zip(&normalized) {
        assert!((v - l / fits[0].predict(*s)).abs() < 1e-12);
    }
    // The fitted trend explains the growth, so what remains is not size-driven.
    assert!(spearman(&size, &normalized).unwrap().rho.abs() < 0.5);
}

#[test]
fn planted_signal_survives_partialling_out_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 90;
    let tokens: Vec<f64> = (0..n)
        .map(|_| 10f64.powf(rng.random_range(3.5..6.0)))
        .collect();
    let edv: Vec<f64> = (0..n).map(|_| rng.random_range(1e-4..5e-3)).collect();
    let noise = normal_sample(&mut rng, n);
    let las: Vec<f64> = (0..n)
        .map(|i| 30.0 + 7.0 * tokens[i].ln() - 2000.0 * edv[i] + 2.0 * noise[i])
        .collect();
    let partial = partial_spearman(&edv, &las, &[("train_tokens", &tokens)]).unwrap();
    assert!(partial.rho < -0.5 && partial.p_value < 1e-3, "{partial:?}");

    let mut shuffled = las.clone();
    for i in (1..n).rev() {
        shuffled.swap(i, rng.random_range(0..=i));
    }
    let null = spearman(&edv, &shuffled).unwrap();
    assert!(null.rho.abs() < 0.3 && null.p_value > 0.01, "{null:?}");
}

#[test]
fn skew_normal_fit_recovers_parameters() {
    let truth = SkewNormal {
        location: -1.0,
        scale: 4.0,
        shape: 3.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // Azzalini's representation: loc + scale * (delta |u0| + sqrt(1-delta^2) u1).
    let delta = truth.shape / (1.0 + truth.shape * truth.shape).sqrt();
    let z = normal_sample(&mut rng, 8000);
    let samples: Vec<f64> = z
        .chunks(2)
        .map(|c| {
            truth.location
                + truth.scale * (delta * c[0].abs() + (1.0 - delta * delta).sqrt() * c[1])
        })
        .collect();
    let fit = skew_normal_fit(&samples, 20).unwrap();
    assert!((fit.fitted_mean - truth.mean()).abs() < 0.2, "{fit:?}");
    assert!((fit.fitted_sd - truth.sd()).abs() < 0.2, "{fit:?}");
    assert!(fit.shape > 1.0);
    assert!(fit.p_value > 1e-3, "{fit:?}");
    let sample_mean = samples.iter().sum::<f64>() / samples.len() as f64;
    assert!((fit.sample_mean - sample_mean).abs() < 1e-12);
}

#[test]
fn pearson_of_constant_is_undefined() {
    assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_none());
}
