//! Criteria 1–10 at their pinned sizes and tolerances. Prints one line per
//! criterion and exits nonzero if any criterion or its time budget fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use giantwalk::claims::{self, Plan};
use giantwalk::{ClaimRecord, Scale};

const SEED: u64 = 20_261_017;

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn main() -> ExitCode {
    let plan = Plan::for_scale(Scale::Acceptance);
    let mut results: Vec<(ClaimRecord, Duration, Option<u64>)> = Vec::new();
    let mut report = |r: ClaimRecord, d: Duration, budget: Option<u64>| {
        let over = budget.is_some_and(|b| d.as_secs_f64() > b as f64);
        let budget_note = budget.map_or("always on".to_string(), |b| format!("budget {b} s"));
        println!(
            "{} [{:.1} s, {budget_note}{}]",
            r.line(),
            d.as_secs_f64(),
            if over { ", OVER BUDGET" } else { "" }
        );
        results.push((r, d, budget));
    };

    let (r, d) = timed(|| claims::commute_identity(SEED, &plan, false));
    report(r, d, Some(10));
    let (r, d) = timed(|| claims::resistance_oracle(SEED, &plan));
    report(r, d, Some(30));
    let (r, d) = timed(|| claims::gff_fidelity(SEED, &plan));
    report(r, d, Some(60));
    let (r, d) = timed(|| claims::closed_form_m(SEED, &plan));
    report(r, d, Some(60));
    let (r, d) = timed(|| claims::iid_max(SEED, &plan));
    report(r, d, Some(30));
    let ((r, mut times), d) = timed(|| claims::cover_oracle(SEED, &plan));
    report(r, d, Some(120));
    let (r, d) = timed(|| claims::giant_statistics(SEED, &plan));
    report(r, d, Some(600));
    let (r, d) = timed(|| claims::skeleton_lemmas(SEED, &plan));
    report(r, d, Some(300));
    let ((r, t9), d) = timed(|| claims::headline_trend(SEED, &plan));
    times.extend(t9);
    report(r, d, Some(7200));
    let (r, d) = timed(|| claims::feige_sanity(&times));
    report(r, d, None);

    let failed: Vec<u8> = results
        .iter()
        .filter(|(r, d, b)| !r.succeeded() || b.is_some_and(|b| d.as_secs_f64() > b as f64))
        .map(|(r, _, _)| r.number)
        .collect();
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
