#![allow(dead_code)]

use hdrest_core::seed;
use rand::Rng;
use rand_distr::StandardNormal;

pub const CITIES: [(f64, f64); 2] = [(-3.70, 40.42), (2.17, 40.42)];
pub const CITY_SD: f64 = 0.25;

/// Case CSV for two Gaussian cities over `weeks` weeks starting 2020-03-02,
/// `per_week` cases a week split evenly, rows carrying 1 to 3 cases.
pub fn two_city_csv(weeks: usize, per_week: u64, seed_value: u64) -> (String, Vec<u64>) {
    let mut rng = seed::rng(seed_value);
    let mut out = String::from("longitude,latitude,date,count\n");
    let start = chrono::NaiveDate::from_ymd_opt(2020, 3, 2).unwrap();
    let mut totals = Vec::new();
    for w in 0..weeks {
        let mut left = per_week;
        let mut k = 0;
        while left > 0 {
            let c = rng.gen_range(1..=3u64).min(left);
            left -= c;
            let (cx, cy) = CITIES[k % 2];
            k += 1;
            let x = cx + CITY_SD * rng.sample::<f64, _>(StandardNormal);
            let y = cy + CITY_SD * rng.sample::<f64, _>(StandardNormal);
            let day = start + chrono::Days::new((7 * w + rng.gen_range(0..7)) as u64);
            out.push_str(&format!("{x:.5},{y:.5},{day},{c}\n"));
        }
        totals.push(per_week);
    }
    (out, totals)
}
