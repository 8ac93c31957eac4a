use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;

use anyhow::{bail, Result};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use invgen_core::bilinear::{Layout, NormMode};
use invgen_core::census::{
    degree_fit, exhaustive_nongenerating_count, incidence_table, monte_carlo_rate, CountTable, DegreeFit,
    GramChoice, DEFAULT_SUBSPACE_CAP, DEFAULT_TUPLE_CAP,
};
use invgen_core::dimensions::{
    component_census, extremal_dims, stratum_nonempty, stratum_table, ComponentCensus, Extremal, StratumRow,
};
use invgen_core::generation::{all_invariant_subspaces, involution_closure, GeneratorTuple};
use invgen_core::io::{
    matrix_to_json, parse_json, CheckReport, GramJson, MatrixJson, ProfileJson, ReduceInput, ReduceOutput,
    SpaceJson, TupleJson, WitnessJson,
};
use invgen_core::witness::{witness_tuple, Padding};
use invgen_core::{Error, Field, FieldSpec, FormKind, PrimeField, Rationals};

use crate::{
    CensusArgs, CensusGram, CheckArgs, DimsArgs, Format, GramName, LayoutArg, Mode, Outcome, PaddingArg,
    ReduceArgs, WitnessArgs,
};

fn read_input(path: &Option<PathBuf>) -> Result<String> {
    let mut text = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => text = std::fs::read_to_string(p)?,
        _ => {
            std::io::stdin().read_to_string(&mut text)?;
        }
    }
    Ok(text)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn ok(text: String) -> Outcome {
    Outcome { text, code: 0 }
}

fn no_csv(cmd: &str) -> anyhow::Error {
    anyhow::anyhow!("csv output is not available for {cmd}; use json or text")
}

fn render_matrix(m: &MatrixJson) -> String {
    let cells: Vec<Vec<String>> = m
        .iter()
        .map(|r| {
            r.iter()
                .map(|e| serde_json::to_value(e).map(|v| v.as_str().map(String::from).unwrap_or(v.to_string())))
                .collect::<std::result::Result<_, _>>()
                .unwrap_or_default()
        })
        .collect();
    let width = cells.iter().flatten().map(|s| s.len()).max().unwrap_or(1);
    cells
        .iter()
        .map(|r| {
            let row: Vec<String> = r.iter().map(|s| format!("{s:>width$}")).collect();
            format!("  [{}]\n", row.join(" "))
        })
        .collect()
}

// ---- check ----

fn check_over<F: Field>(
    field: F,
    doc: &TupleJson,
    search: Option<&dyn Fn(&GeneratorTuple<F>) -> Result<(Vec<WitnessJson>, String)>>,
) -> Result<CheckReport> {
    let space = doc.space.build(&field)?;
    let t = GeneratorTuple::new(space, doc.matrices(&field)?)?;
    let closure = involution_closure(&t);
    let (witnesses, witness_search) = match search {
        _ if closure.generates => (Vec::new(), "not needed: the tuple generates".to_string()),
        None => (Vec::new(), "not requested".to_string()),
        Some(s) => s(&t)?,
    };
    Ok(CheckReport {
        generates: closure.generates,
        closure_dim: closure.dim,
        witnesses,
        witness_search,
    })
}

pub fn check(a: &CheckArgs, format: Format) -> Result<Outcome> {
    let doc: TupleJson = parse_json(&read_input(&a.input)?)?;
    let cap = a.cap;
    let report = match doc.space.field {
        FieldSpec::Prime { p } => {
            let search = |t: &GeneratorTuple<PrimeField>| -> Result<(Vec<WitnessJson>, String)> {
                match all_invariant_subspaces(t, cap) {
                    Ok(all) => {
                        let found = all
                            .iter()
                            .filter(|w| !w.is_zero() && !w.is_full())
                            .map(|w| WitnessJson::from_subspace(t.space(), w))
                            .collect::<invgen_core::Result<Vec<_>>>()?;
                        let status = if found.is_empty() {
                            "complete: no invariant subspace is defined over the prime field"
                        } else {
                            "complete"
                        };
                        Ok((found, status.to_string()))
                    }
                    Err(e @ Error::EnumerationTooLarge { .. }) => Ok((Vec::new(), format!("skipped: {e}"))),
                    Err(e) => Err(e.into()),
                }
            };
            let search: Option<&dyn Fn(&GeneratorTuple<PrimeField>) -> Result<(Vec<WitnessJson>, String)>> =
                if a.search_witness { Some(&search) } else { None };
            check_over(PrimeField::new(p)?, &doc, search)?
        }
        FieldSpec::Rational => {
            let skip = |_: &GeneratorTuple<Rationals>| -> Result<(Vec<WitnessJson>, String)> {
                Ok((Vec::new(), "skipped: witness search needs a finite field".to_string()))
            };
            let search: Option<&dyn Fn(&GeneratorTuple<Rationals>) -> Result<(Vec<WitnessJson>, String)>> =
                if a.search_witness { Some(&skip) } else { None };
            check_over(Rationals, &doc, search)?
        }
    };
    let text = match format {
        Format::Json => to_json(&report)?,
        Format::Text => {
            let mut s = format!(
                "generates: {}\nclosure_dim: {}\nwitness search: {}\n",
                report.generates, report.closure_dim, report.witness_search
            );
            for w in &report.witnesses {
                let _ = writeln!(s, "witness d={} l={}", w.d, w.l);
                s.push_str(&render_matrix(&w.basis));
            }
            s
        }
        Format::Csv => return Err(no_csv("check")),
    };
    Ok(Outcome {
        text,
        code: if report.generates { 0 } else { 1 },
    })
}

// ---- witness ----

fn gram_json(g: GramName) -> GramJson {
    GramJson::Named(
        match g {
            GramName::Identity => "identity",
            GramName::StandardSkew => "standard_skew",
            GramName::Split => "split",
        }
        .to_string(),
    )
}

fn witness_over<F: Field>(field: F, sj: SpaceJson, a: &WitnessArgs, seed: u64) -> Result<TupleJson> {
    let space = sj.build(&field)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = space.random_subspace_with_profile(a.d, a.l, &mut rng)?;
    let padding = match a.padding {
        PaddingArg::Zero => Padding::Zero,
        PaddingArg::Sampled => Padding::Sampled,
    };
    let wit = witness_tuple(&space, &w, a.r, seed, padding)?;
    Ok(TupleJson {
        space: sj,
        tuple: wit.tuple.mats().iter().map(matrix_to_json).collect(),
        w_basis: Some(matrix_to_json(w.basis())),
        profile: Some(ProfileJson { d: wit.d, l: wit.l }),
    })
}

pub fn witness(a: &WitnessArgs, seed: u64, format: Format) -> Result<Outcome> {
    let kind: FormKind = a.form.into();
    if kind == FormKind::Skew && a.n % 2 == 1 {
        bail!(Error::InvalidSpace("gram: skew forms need even dimension".into()));
    }
    if !stratum_nonempty(kind, a.n, a.d, a.l) {
        bail!(Error::EmptyStratum(format!(
            "no {kind} subspace of dimension {} with isotropy rank {} in dimension {}",
            a.d, a.l, a.n
        )));
    }
    let spec = FieldSpec::parse(&a.field)?;
    if let FieldSpec::Prime { p } = spec {
        if p - 1 < a.n as u64 {
            bail!(Error::FieldTooSmall(format!(
                "need {} distinct nonzero eigenvalues, F_{p} has {}",
                a.n,
                p - 1
            )));
        }
    }
    let sj = SpaceJson {
        field: spec,
        n: a.n,
        form: kind,
        gram: a.gram.map(gram_json),
    };
    let doc = match spec {
        FieldSpec::Prime { p } => witness_over(PrimeField::new(p)?, sj, a, seed)?,
        FieldSpec::Rational => witness_over(Rationals, sj, a, seed)?,
    };
    let text = match format {
        Format::Json => to_json(&doc)?,
        Format::Text => {
            let mut s = format!("{} form, n = {}, over {}\n", kind, a.n, spec);
            if let Some(p) = doc.profile {
                let _ = writeln!(s, "W: d = {}, l = {}", p.d, p.l);
            }
            if let Some(wb) = &doc.w_basis {
                s.push_str(&render_matrix(wb));
            }
            for (i, m) in doc.tuple.iter().enumerate() {
                let _ = writeln!(s, "A_{}:", i + 1);
                s.push_str(&render_matrix(m));
            }
            s
        }
        Format::Csv => return Err(no_csv("witness")),
    };
    Ok(ok(text))
}

// ---- dims ----

#[derive(Serialize)]
struct DimsReport {
    kind: FormKind,
    n: usize,
    r: usize,
    strata: Vec<StratumRow>,
    census: ComponentCensus,
    extremal: Option<Extremal>,
}

pub fn dims(a: &DimsArgs, format: Format) -> Result<Outcome> {
    let kind: FormKind = a.form.into();
    if a.n < 2 {
        bail!(Error::InvalidSpace("n must be at least 2".into()));
    }
    if kind == FormKind::Skew && a.n % 2 == 1 {
        bail!(Error::InvalidSpace("gram: skew forms need even dimension".into()));
    }
    if a.r == 0 {
        bail!(Error::DimensionMismatch("r must be at least 1".into()));
    }
    let report = DimsReport {
        kind,
        n: a.n,
        r: a.r,
        strata: stratum_table(kind, a.n, a.r),
        census: component_census(kind, a.n, a.r),
        extremal: extremal_dims(kind, a.n, a.r),
    };
    let text = match format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut s = String::from("d,l,dim_gr,dim_zwr,dim_z,components\n");
            for row in &report.strata {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    row.d, row.l, row.dim_gr, row.dim_zwr, row.dim_z, row.components
                );
            }
            s
        }
        Format::Text => {
            let mut s = format!("{} form, n = {}, r = {}\n", kind, a.n, a.r);
            if a.table {
                let _ = writeln!(s, "{:>3} {:>3} {:>7} {:>7} {:>7} {:>5}", "d", "l", "dimGr", "dimZWr", "dimZ", "comp");
                for row in &report.strata {
                    let _ = writeln!(
                        s,
                        "{:>3} {:>3} {:>7} {:>7} {:>7} {:>5}",
                        row.d, row.l, row.dim_gr, row.dim_zwr, row.dim_z, row.components
                    );
                }
            }
            s.push_str("closed cover:\n");
            for rec in &report.census.records {
                let _ = writeln!(s, "  {:<20} dim {:>6}  components {}", rec.label, rec.dim, rec.component_count);
            }
            if let Some(e) = &report.extremal {
                let argmax: Vec<String> = e.argmax.iter().map(|i| format!("(l={}, d={})", i.l, i.d)).collect();
                let _ = writeln!(s, "max dim {} at {}; codim {}", e.max_dim, argmax.join(", "), e.codim);
            }
            s
        }
    };
    Ok(ok(text))
}

// ---- census ----

#[derive(Serialize)]
struct ExhaustiveRow {
    q: u64,
    total: String,
    nongenerating: String,
}

#[derive(Serialize)]
struct ExhaustiveReport {
    mode: &'static str,
    kind: FormKind,
    n: usize,
    r: usize,
    rows: Vec<ExhaustiveRow>,
    fit: Option<DegreeFit>,
    max_dim: Option<u64>,
}

#[derive(Serialize)]
struct MonteCarloRow {
    q: u64,
    samples: u64,
    generating: u64,
    rate: f64,
}

#[derive(Serialize)]
struct MonteCarloReport {
    mode: &'static str,
    kind: FormKind,
    n: usize,
    r: usize,
    seed: u64,
    rows: Vec<MonteCarloRow>,
}

fn render_incidence(t: &CountTable) -> String {
    let mut s = format!("{} form, n = {}, r = {}\n", t.kind, t.n, t.r);
    let _ = writeln!(s, "{:>3} {:>3} {:>5} {:>24}", "d", "l", "q", "count");
    for row in &t.rows {
        let _ = writeln!(s, "{:>3} {:>3} {:>5} {:>24}", row.d, row.l, row.q, row.count);
    }
    for f in &t.fits {
        match f.degree {
            Some(deg) => {
                let _ = writeln!(
                    s,
                    "(d={}, l={}): fitted degree {deg}, dim {} (residual {:.2e})",
                    f.d,
                    f.l,
                    f.dim_stratum,
                    f.residual.unwrap_or(0.0)
                );
            }
            None => {
                let _ = writeln!(
                    s,
                    "(d={}, l={}): no fit ({}), dim {}",
                    f.d,
                    f.l,
                    f.note.as_deref().unwrap_or("?"),
                    f.dim_stratum
                );
            }
        }
    }
    s
}

pub fn census(a: &CensusArgs, seed: u64, format: Format) -> Result<Outcome> {
    let kind: FormKind = a.form.into();
    if kind == FormKind::Skew && a.n % 2 == 1 {
        bail!(Error::InvalidSpace("gram: skew forms need even dimension".into()));
    }
    let mut qs = a.q.clone();
    qs.sort_unstable();
    qs.dedup();
    let fields = qs
        .iter()
        .map(|&q| PrimeField::new(q))
        .collect::<invgen_core::Result<Vec<_>>>()?;
    let gram = match a.gram {
        CensusGram::Standard => GramChoice::Standard,
        CensusGram::Split => GramChoice::Split,
    };
    let text = match a.mode {
        Mode::Incidence => {
            let t = incidence_table(kind, a.n, a.r, &qs, gram, a.cap.unwrap_or(DEFAULT_SUBSPACE_CAP))?;
            match format {
                Format::Json => to_json(&t)?,
                Format::Csv => t.to_csv()?,
                Format::Text => render_incidence(&t),
            }
        }
        Mode::Exhaustive => {
            let cap = a.cap.unwrap_or(DEFAULT_TUPLE_CAP);
            let mut rows = Vec::new();
            let mut counts = BTreeMap::new();
            for f in &fields {
                let space = gram.build(*f, a.n, kind)?;
                let count = exhaustive_nongenerating_count(&space, a.r, cap)?;
                let q = f.modulus();
                rows.push(ExhaustiveRow {
                    q,
                    total: BigUint::from(q).pow((a.r * a.n * a.n) as u32).to_string(),
                    nongenerating: count.to_string(),
                });
                counts.insert(q, BigUint::from(count));
            }
            let report = ExhaustiveReport {
                mode: "exhaustive",
                kind,
                n: a.n,
                r: a.r,
                rows,
                fit: if counts.len() >= 3 { degree_fit(&counts).ok() } else { None },
                max_dim: extremal_dims(kind, a.n, a.r).map(|e| e.max_dim),
            };
            match format {
                Format::Json => to_json(&report)?,
                Format::Csv => {
                    let mut s = String::from("kind,n,r,q,total,nongenerating\n");
                    for row in &report.rows {
                        let _ = writeln!(s, "{kind},{},{},{},{},{}", a.n, a.r, row.q, row.total, row.nongenerating);
                    }
                    s
                }
                Format::Text => {
                    let mut s = String::new();
                    for row in &report.rows {
                        let _ = writeln!(s, "q = {:>3}: {} of {} tuples fail to generate", row.q, row.nongenerating, row.total);
                    }
                    if let (Some(fit), Some(dim)) = (report.fit, report.max_dim) {
                        let _ = writeln!(s, "fitted degree {} against max stratum dimension {dim}", fit.degree);
                    }
                    s
                }
            }
        }
        Mode::Montecarlo => {
            let mut rows = Vec::new();
            for f in &fields {
                let space = gram.build(*f, a.n, kind)?;
                let rep = monte_carlo_rate(&space, a.r, a.samples, seed);
                rows.push(MonteCarloRow {
                    q: f.modulus(),
                    samples: rep.samples,
                    generating: rep.generating,
                    rate: rep.rate,
                });
            }
            let report = MonteCarloReport {
                mode: "montecarlo",
                kind,
                n: a.n,
                r: a.r,
                seed,
                rows,
            };
            match format {
                Format::Json => to_json(&report)?,
                Format::Csv => {
                    let mut s = String::from("kind,n,r,q,samples,generating,rate\n");
                    for row in &report.rows {
                        let _ = writeln!(s, "{kind},{},{},{},{},{},{}", a.n, a.r, row.q, row.samples, row.generating, row.rate);
                    }
                    s
                }
                Format::Text => {
                    let mut s = String::new();
                    for row in &report.rows {
                        let _ = writeln!(s, "q = {:>3}: {}/{} generate (rate {})", row.q, row.generating, row.samples, row.rate);
                    }
                    s
                }
            }
        }
    };
    Ok(ok(text))
}

// ---- reduce ----

fn reduce_over<F: Field>(field: F, doc: &ReduceInput, a: &ReduceArgs) -> Result<ReduceOutput> {
    let space = doc.space.build(&field)?;
    let w = doc.subspace(&field)?;
    let layout = match a.layout {
        LayoutArg::Blocked => Layout::Blocked,
        LayoutArg::Interleaved => Layout::Interleaved,
    };
    let mode = if a.weak { NormMode::Weak } else { NormMode::Strict };
    let nb = space.nice_basis(&w, layout, mode)?;
    Ok(ReduceOutput {
        basis: matrix_to_json(&nb.basis),
        gram: matrix_to_json(&nb.gram),
        d: nb.d,
        l: nb.l,
        w_indices: nb.w_indices(),
        layout,
        weak: !nb.standard,
    })
}

pub fn reduce(a: &ReduceArgs, format: Format) -> Result<Outcome> {
    let doc: ReduceInput = parse_json(&read_input(&a.input)?)?;
    let out = match doc.space.field {
        FieldSpec::Prime { p } => reduce_over(PrimeField::new(p)?, &doc, a)?,
        FieldSpec::Rational => reduce_over(Rationals, &doc, a)?,
    };
    let text = match format {
        Format::Json => to_json(&out)?,
        Format::Text => {
            let mut s = format!("d = {}, l = {}{}\nbasis:\n", out.d, out.l, if out.weak { " (weak)" } else { "" });
            s.push_str(&render_matrix(&out.basis));
            s.push_str("gram:\n");
            s.push_str(&render_matrix(&out.gram));
            s
        }
        Format::Csv => return Err(no_csv("reduce")),
    };
    Ok(ok(text))
}
