//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

use std::time::{Duration, Instant};

use abcut::corpus::{self, NamedGraph};
use abcut::cuts::{brute_force_sparsest, Objective};
use abcut::pipeline::{abelian_sparsest_cut, containment_check, PipelineConfig};
use abcut::sdp::{advice_cut, SolverConfig};
use abcut::special::cycle_fourier_profile;
use abcut::spectral::spectrum_of;
use abcut::verify::{verify, Status, Suite, VerifyOptions, VerifyReport};

struct Outcome {
    ok: bool,
    detail: String,
}

fn from_report(r: &VerifyReport) -> Outcome {
    let pass = r.checks.iter().filter(|c| c.status == Status::Pass).count();
    let skip = r.checks.iter().filter(|c| c.status == Status::Skip).count();
    let fails: Vec<String> = r
        .checks
        .iter()
        .filter(|c| c.status == Status::Fail)
        .map(|c| format!("{}: {}", c.target, c.detail))
        .collect();
    let mut detail = format!("{pass} pass, {skip} skip, {} fail", fails.len());
    for f in fails.iter().take(5) {
        detail.push_str("\n    ");
        detail.push_str(f);
    }
    Outcome {
        ok: r.passed && pass > 0,
        detail,
    }
}

fn suite(corpus: &[NamedGraph], s: Suite) -> Outcome {
    from_report(&verify(corpus, &[s], &VerifyOptions::default()))
}

fn containment() -> Outcome {
    let mut graphs: Vec<(String, _)> = (8..=16)
        .map(|n| (format!("C_{n}"), corpus::cycle(n).unwrap()))
        .collect();
    graphs.push(("Q_3".into(), corpus::hypercube(3).unwrap()));
    graphs.push(("Q_4".into(), corpus::hypercube(4).unwrap()));
    graphs.push(("T_4x4".into(), corpus::torus(&[4, 4]).unwrap()));
    let mut ok = true;
    let mut worst = f64::INFINITY;
    let mut vacuous = 0;
    let mut runs = 0;
    let mut lines = Vec::new();
    for (name, g) in &graphs {
        let spec = spectrum_of(g).unwrap();
        for eps in [0.25, 0.5] {
            runs += 1;
            match containment_check(g, &spec, eps) {
                Ok(r) => {
                    ok &= r.holds();
                    worst = worst.min(r.worst_margin);
                    vacuous += r.vacuous as usize;
                    if !r.holds() {
                        lines.push(format!("{name} eps {eps}: margin {:.4}", r.worst_margin));
                    }
                }
                Err(e) => {
                    ok = false;
                    lines.push(format!("{name} eps {eps}: {e}"));
                }
            }
        }
    }
    let mut detail = format!("{runs} runs, worst margin {worst:.4}, {vacuous} with tau >= 2");
    for l in lines {
        detail.push_str("\n    ");
        detail.push_str(&l);
    }
    Outcome { ok, detail }
}

fn advice() -> Outcome {
    let graphs = [
        ("C_8", corpus::cycle(8).unwrap()),
        ("C_12", corpus::cycle(12).unwrap()),
        ("C_16", corpus::cycle(16).unwrap()),
        ("Q_3", corpus::hypercube(3).unwrap()),
        ("Q_4", corpus::hypercube(4).unwrap()),
        ("T_4x4", corpus::torus(&[4, 4]).unwrap()),
    ];
    let cfg = SolverConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, g) in &graphs {
        let opt = brute_force_sparsest(g, Objective::Sparsity).unwrap();
        match advice_cut(g, &opt.cut, 0.05, &cfg) {
            Ok(out) => {
                let ratio = out.cut.value / opt.value;
                let audit = out.moments.audit(&opt.cut, 0.05);
                let good = ratio <= 2.0 && audit.passes(1e-5);
                ok &= good;
                parts.push(format!(
                    "{name} ratio {ratio:.3}{}",
                    if audit.passes(1e-5) {
                        ""
                    } else {
                        " audit fail"
                    }
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name} error {e}"));
            }
        }
    }
    Outcome {
        ok,
        detail: parts.join(", "),
    }
}

fn end_to_end() -> Outcome {
    let cfg = PipelineConfig::default();
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for ng in corpus::small_corpus().unwrap() {
        let opt = brute_force_sparsest(&ng.graph, Objective::Conductance)
            .unwrap()
            .value;
        match abelian_sparsest_cut(&ng.graph, 0.5, 64, &cfg) {
            Ok(r) => {
                let ratio = r.conductance / opt;
                worst = worst.max(ratio);
                if ratio > 4.0 {
                    ok = false;
                    bad.push(format!("{} ratio {ratio:.3}", ng.name));
                }
            }
            Err(e) => {
                ok = false;
                bad.push(format!("{}: {e}", ng.name));
            }
        }
    }
    let mut exact = 0;
    for n in 8..=64usize {
        let g = corpus::cycle(n).unwrap();
        let opt = if n <= 16 {
            brute_force_sparsest(&g, Objective::Conductance)
                .unwrap()
                .value
        } else {
            1.0 / (n / 2) as f64
        };
        match abelian_sparsest_cut(&g, 0.5, 64, &cfg) {
            Ok(r) if r.conductance == opt => exact += 1,
            Ok(r) => bad.push(format!("C_{n}: {} vs {opt}", r.conductance)),
            Err(e) => bad.push(format!("C_{n}: {e}")),
        }
    }
    ok &= exact == 57;
    let mut detail = format!("worst small-corpus ratio {worst:.3}, {exact}/57 cycles exact");
    for b in bad {
        detail.push_str("\n    ");
        detail.push_str(&b);
    }
    Outcome { ok, detail }
}

fn cycle_profile() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [8usize, 16, 32, 64] {
        let q: Vec<i64> = (0..n as i64 / 2).collect();
        let p = cycle_fourier_profile(n, &q, &[0.05, 0.1, 0.2]).unwrap();
        let even = p.even_max.is_some_and(|e| e < 1e-12);
        let tails_out: Vec<String> = p
            .tails
            .iter()
            .filter(|t| !t.in_range)
            .map(|t| format!("eps {} mass {:.4}", t.eps, t.mass))
            .collect();
        let good = even && tails_out.is_empty() && p.mul_ok();
        ok &= good;
        parts.push(format!(
            "C_{n}: even {} mul {} vs sqrt {:.2}{}",
            if even { "ok" } else { "FAIL" },
            p.mul_phi,
            p.sqrt_n,
            if tails_out.is_empty() {
                String::new()
            } else {
                format!(", tails out of range [{}]", tails_out.join("; "))
            }
        ));
    }
    Outcome {
        ok,
        detail: parts.join("\n    "),
    }
}

fn main() {
    let corpus = corpus::default_corpus().expect("default corpus builds");
    let small: Vec<NamedGraph> = corpus::default_corpus()
        .unwrap()
        .into_iter()
        .filter(|g| g.graph.n() <= 14)
        .collect();
    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Outcome>)> = vec![
        (
            "1 spectral identity",
            Duration::from_secs(60),
            Box::new(|| {
                let mut o = suite(&corpus, Suite::Spectral);
                if corpus.len() < 30 {
                    o.ok = false;
                }
                o.detail = format!("{} graphs, {}", corpus.len(), o.detail);
                o
            }),
        ),
        (
            "2 collision identity",
            Duration::from_secs(60),
            Box::new(|| suite(&corpus, Suite::Collision)),
        ),
        (
            "3 CP ratio bound",
            Duration::MAX,
            Box::new(|| suite(&corpus, Suite::CpRatio)),
        ),
        (
            "4 multiplicity certificate",
            Duration::MAX,
            Box::new(|| suite(&corpus, Suite::Multiplicity)),
        ),
        (
            "5 Cheeger and cut identities",
            Duration::MAX,
            Box::new(|| suite(&corpus, Suite::Cheeger)),
        ),
        (
            "6 Buser bound",
            Duration::MAX,
            Box::new(|| {
                let mut o = suite(&corpus, Suite::Buser);
                let exhaustive = suite(&small, Suite::Buser);
                o.ok &= exhaustive.ok;
                o
            }),
        ),
        (
            "7 containment",
            Duration::from_secs(300),
            Box::new(containment),
        ),
        ("8 advice SDP", Duration::from_secs(600), Box::new(advice)),
        (
            "9 end to end",
            Duration::from_secs(900),
            Box::new(end_to_end),
        ),
        (
            "10 Z_p^n sandwich",
            Duration::MAX,
            Box::new(|| from_report(&verify(&[], &[Suite::Zpn], &VerifyOptions::default()))),
        ),
        (
            "11 code bridge",
            Duration::MAX,
            Box::new(|| from_report(&verify(&[], &[Suite::Codes], &VerifyOptions::default()))),
        ),
        (
            "12 cycle Fourier profile",
            Duration::MAX,
            Box::new(cycle_profile),
        ),
    ];
    let mut failed = 0;
    for (name, budget, run) in &criteria {
        let t = Instant::now();
        let mut o = run();
        let took = t.elapsed();
        if took > *budget {
            o.ok = false;
            o.detail
                .push_str(&format!("\n    over the {budget:?} budget"));
        }
        failed += !o.ok as usize;
        println!(
            "{} criterion {name} ({:.1}s): {}",
            if o.ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
