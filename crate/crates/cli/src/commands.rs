use anyhow::{anyhow, bail, Result};
use clap::Subcommand;
use serde_json::{json, Value};

use hilb_core::brackets::{structure_from_f, PoissonStructure};
use hilb_core::charleaves::{annihilation_checks, ideal_invariant, modular_vf, AnnihilationMode};
use hilb_core::charts::{
    chart_from_points, es_to_haiman, haiman_coefficients, hilbert_burch_ideal, syzygy_matrix, CoordIndex, RationalChart,
};
use hilb_core::exactalg::{format_rational, parse_poly, Poly, PolyMatrix, QMat, Rational, VarContext};
use hilb_core::holonomy::{
    constant_in_rowspan, enumerate_cm_01, interval_exchange_trace, interval_matrix, is_cyclically_monotone,
    realize_intervals, CMMatrix, ExchangeEnd, IntervalTuple,
};
use hilb_core::ideals::{groebner, Colength, GroebnerBasis};
use hilb_core::orbits::{
    divisor_intersection_length, hom_quotient_dim, hom_tangent_dim, in_gl_locus, nilcone_check, nodal_series_matrix,
    orbit_datum_with_truncation, perturbed_syzygy_ideal, torsion_jordan_type, NodalSeriesMatrix,
};
use hilb_core::toric::{
    biresidue_matrix, classify_weight, decompose_weight, domino_game, find_coweight, inverse_relation_check,
    monomial_weights, pi_delta, smoothable_basis, verify_degeneration, Decomposition, WeightClass, WeightMatrix,
};
use hilb_core::verify::{run_all, SuiteConfig};
use hilb_core::young::{
    hc, hc_inverse, is_horizontally_convex, monomial_scheme_ideal, stabilizer_and_codim, transpose,
};

use crate::input;
use crate::report::{OutFormat, Report, Status};
use crate::{Command, Settings};

#[derive(Subcommand, Debug)]
pub enum ToricAction {
    /// The biresidue matrix in syzygy order.
    Biresidues,
    /// The smoothable weights.
    Smoothable,
    /// A coweight pairing positively with every smoothable weight.
    Coweight,
    /// The invariant quadratic bracket.
    PiDelta,
    /// The scalar c with Pi B = c I.
    Inverse,
    /// Exponents of the one-parameter degeneration.
    Degeneration,
    /// Weights of the quadratic nodal bracket with their classes.
    Weights,
    /// Classify a weight matrix "a,b;c,d;e,f".
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        weight: String,
    },
    /// Decompose a weight into smoothable weights.
    Decompose {
        #[arg(long, allow_hyphen_values = true)]
        weight: String,
    },
    /// Moves of the domino game on a weight.
    Game {
        #[arg(long, allow_hyphen_values = true)]
        weight: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum HolonomyAction {
    /// Monotonicity, row span and realization of a skew matrix.
    Check {
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// Count cyclically monotone skew matrices with 0/1 above the diagonal.
    Enumerate {
        #[arg(long, allow_hyphen_values = true)]
        m: usize,
    },
    /// The matrix of a tuple of intervals "c:d,c:d,..." and its exchange trace.
    Intervals {
        #[arg(long, allow_hyphen_values = true)]
        intervals: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum OrbitAction {
    /// Young diagram of the Smith form of S_E(x, 0).
    Datum {
        #[arg(long, allow_hyphen_values = true)]
        e: String,
    },
    /// Jordan type of x on the y-torsion of O/I.
    Jordan {
        #[arg(long, allow_hyphen_values = true)]
        ideal: String,
    },
    /// dim Hom(I_E, O/I_E).
    Tangent {
        #[arg(long, allow_hyphen_values = true)]
        e: String,
    },
    /// Nodal normal forms; continuous when --u is given.
    Nodal {
        /// Exponent pairs "nu:mu,nu:mu,...".
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        d: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, allow_hyphen_values = true)]
        u: Option<String>,
    },
    /// Checks on a point with vanishing last row.
    Nilcone {
        #[arg(long, allow_hyphen_values = true)]
        e: String,
    },
    /// Ideal of minors of S_mu(x) + y M.
    Perturbed {
        #[arg(long)]
        mu: String,
        #[arg(long, allow_hyphen_values = true)]
        m: String,
    },
    /// Colength of I + (g).
    Intersect {
        #[arg(long, allow_hyphen_values = true)]
        ideal: String,
        #[arg(long, allow_hyphen_values = true, default_value = "y")]
        g: String,
    },
}

pub fn name(cmd: &Command) -> String {
    match cmd {
        Command::Bracket { .. } => "bracket".into(),
        Command::Young { .. } => "young".into(),
        Command::Chart { .. } => "chart".into(),
        Command::Toric { action, .. } => format!("toric {}", kebab(action)),
        Command::Holonomy { action } => format!("holonomy {}", kebab(action)),
        Command::Orbit { action } => format!("orbit {}", kebab(action)),
        Command::Charleaf { .. } => "charleaf".into(),
        Command::Ideal { .. } => "ideal".into(),
        Command::VerifyAll { .. } => "verify-all".into(),
    }
}

fn kebab<T: std::fmt::Debug>(action: &T) -> String {
    let dbg = format!("{action:?}");
    let head = dbg.split([' ', '{', '(']).next().unwrap_or_default();
    let mut out = String::new();
    for (i, ch) in head.chars().enumerate() {
        if ch.is_uppercase() && i > 0 {
            out.push('-');
        }
        out.push(ch.to_ascii_lowercase());
    }
    out
}

struct Out<'a> {
    settings: &'a Settings,
}

impl Out<'_> {
    fn poly(&self, p: &Poly) -> Value {
        match self.settings.out {
            OutFormat::Latex => Value::String(p.to_latex()),
            _ => Value::String(p.to_string()),
        }
    }

    fn polys(&self, ps: &[Poly]) -> Value {
        Value::Array(ps.iter().map(|p| self.poly(p)).collect())
    }

    fn poly_matrix(&self, m: &PolyMatrix) -> Value {
        Value::Array(m.to_rows().iter().map(|r| self.polys(r)).collect())
    }
}

fn rat(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

fn qmat(m: &QMat) -> Value {
    Value::Array(
        m.to_rows()
            .iter()
            .map(|r| Value::Array(r.iter().map(rat).collect()))
            .collect(),
    )
}

fn chart_rows(e: &RationalChart) -> Value {
    Value::Array(
        e.rows()
            .iter()
            .map(|r| Value::Array(r.iter().map(rat).collect()))
            .collect(),
    )
}

fn decomposition(d: &Decomposition) -> Value {
    Value::Array(
        d.iter()
            .map(|(w, c)| json!({"weight": w.to_string(), "coefficient": c}))
            .collect(),
    )
}

fn colength(c: Colength) -> Value {
    match c {
        Colength::Finite(n) => json!(n),
        Colength::Infinite => json!("INFINITE"),
    }
}

fn ideal_of(src: &str) -> Result<GroebnerBasis> {
    Ok(groebner(&input::xy_polys(src)?)?)
}

fn weight(k: usize, src: &str) -> Result<WeightMatrix> {
    WeightMatrix::new(k, input::int_rows(src)?).map_err(|e| anyhow!("{e}"))
}

fn class(c: &WeightClass) -> Value {
    match c {
        WeightClass::Smoothable(s) => json!({"class": "smoothable", "weight": s.to_string()}),
        WeightClass::Rectangular { r1, c1, r2, c2 } => {
            json!({"class": "rectangular", "rows": [r1, r2], "cols": [c1, c2]})
        }
        WeightClass::AdmissiblePair(d1, d2) => json!({"class": "admissible-pair", "dominoes": [d1, d2]}),
        WeightClass::Other => json!({"class": "other"}),
    }
}

fn report(command: String, inputs: Value, outputs: Value, status: Status, details: Vec<String>) -> Report {
    Report {
        command,
        inputs,
        outputs,
        elapsed_ms: None,
        status,
        details,
    }
}

fn coord(c: CoordIndex) -> String {
    format!("E[{}][{}]", c.i, c.j)
}

pub fn run(cmd: &Command, settings: &Settings) -> Result<Report> {
    let out = Out { settings };
    let command = name(cmd);
    match cmd {
        Command::Bracket { k, f, pair, jacobi } => {
            if *k == 0 {
                bail!("k must be positive");
            }
            let fp = input::xy_poly(f)?;
            let pi: PoissonStructure = structure_from_f(*k, &fp).map_err(|e| anyhow!("{e}"))?;
            let mut outputs = serde_json::Map::new();
            match pair {
                Some(p) => {
                    let v = input::usize_list(p, 4)?;
                    if v[0] >= *k || v[2] >= *k || v[1] > *k || v[3] > *k {
                        bail!("pair {p} out of range for k = {k}");
                    }
                    let a = CoordIndex::new(v[0], v[1]);
                    let b = CoordIndex::new(v[2], v[3]);
                    outputs.insert("bracket".into(), out.poly(pi.entry(a, b)));
                }
                None => {
                    let entries: Vec<Value> = pi
                        .entries()
                        .filter(|(a, b, p)| a < b && !p.is_zero())
                        .map(|(a, b, p)| json!({"left": coord(a), "right": coord(b), "bracket": out.poly(p)}))
                        .collect();
                    outputs.insert("brackets".into(), Value::Array(entries));
                }
            }
            let mut status = Status::Pass;
            let mut details = Vec::new();
            if *jacobi {
                let defect = pi.jacobi_defect();
                outputs.insert("jacobi_failures".into(), json!(defect.len()));
                for d in defect.iter().take(5) {
                    details.push(format!(
                        "Jacobi fails on ({}, {}, {})",
                        coord(d.triple[0]),
                        coord(d.triple[1]),
                        coord(d.triple[2])
                    ));
                }
                status = Status::from_pass(defect.is_empty());
            }
            Ok(report(
                command,
                json!({"k": k, "f": f, "pair": pair}),
                Value::Object(outputs),
                status,
                details,
            ))
        }
        Command::Young { mu } => {
            let d = input::diagram(mu)?;
            let dims = stabilizer_and_codim(&d);
            let convex = is_horizontally_convex(&d);
            let inverse = if convex {
                hc_inverse(&d).ok().map(|x| x.parts().to_vec())
            } else {
                None
            };
            let col = monomial_scheme_ideal(&d).colength();
            let outputs = json!({
                "hc": hc(&d).parts(),
                "transpose": transpose(&d).parts(),
                "horizontally_convex": convex,
                "hc_inverse": inverse,
                "stabilizer_dim": dims.stab_dim,
                "leaf_codim": dims.leaf_codim,
                "colength": colength(col),
            });
            Ok(report(command, json!({"mu": d.parts()}), outputs, Status::Pass, vec![]))
        }
        Command::Chart { e, points } => {
            let chart = match (e, points) {
                (Some(e), _) => input::chart(e)?,
                (None, Some(p)) => {
                    let pts: Vec<(Rational, Rational)> = input::rational_rows(p)?
                        .into_iter()
                        .map(|r| match r.as_slice() {
                            [x, y] => Ok((x.clone(), y.clone())),
                            _ => Err(anyhow!("each point needs two coordinates")),
                        })
                        .collect::<Result<_>>()?;
                    {
                        let n = pts.len();
                        let k = (1..=n).find(|k| k * (k + 1) / 2 >= n).unwrap_or(0);
                        if k == 0 || k * (k + 1) / 2 != n {
                            bail!("need a triangular number of points (1, 3, 6, ...), got {n}");
                        }
                        chart_from_points(k, &pts).map_err(|e| anyhow!("{e}"))?
                    }
                }
                (None, None) => bail!("give --e or --points"),
            };
            let ideal = hilbert_burch_ideal(&chart);
            let haiman = es_to_haiman(&chart);
            let coeffs = haiman_coefficients(&chart).map_err(|e| anyhow!("{e}"))?;
            let datum = orbit_datum_with_truncation(&chart, settings.truncation.unwrap_or(chart.k() as u32 + 2))?;
            let outputs = json!({
                "k": chart.k(),
                "e": chart_rows(&chart),
                "c": chart_rows(&haiman),
                "haiman_coefficients": coeffs.iter().map(|((j, a, b), c)| json!({"j": j, "a": a, "b": b, "value": rat(c)})).collect::<Vec<_>>(),
                "syzygy_matrix": out.poly_matrix(&syzygy_matrix(&chart)),
                "ideal": out.polys(&ideal.generators()),
                "colength": colength(ideal.colength()),
                "orbit_datum": datum.diagram.parts(),
                "tangent_dim": hom_tangent_dim(&chart)?,
            });
            Ok(report(
                command,
                json!({"e": e, "points": points}),
                outputs,
                Status::Pass,
                vec![],
            ))
        }
        Command::Toric { k, action } => toric(command, *k, action),
        Command::Holonomy { action } => holonomy(command, action),
        Command::Orbit { action } => orbit(command, action, &out),
        Command::Charleaf { f, ideal, mode } => {
            let fp = input::xy_poly(f)?;
            let gb = ideal_of(ideal)?;
            let mode: AnnihilationMode = mode.parse().map_err(|e| anyhow!("{e}"))?;
            let invariant = ideal_invariant(&modular_vf(&fp), &gb)?;
            let annihilated = annihilation_checks(&fp, &gb, mode)?;
            let zeta = modular_vf(&fp);
            let outputs = json!({
                "vector_field": {"dx": out.poly(&zeta.dx), "dy": out.poly(&zeta.dy)},
                "groebner_basis": out.polys(&gb.generators()),
                "ideal_invariant": invariant,
                "annihilated": annihilated,
            });
            let status = Status::from_pass(invariant && annihilated);
            Ok(report(
                command,
                json!({"f": f, "ideal": ideal, "mode": mode}),
                outputs,
                status,
                vec![],
            ))
        }
        Command::Ideal { gens } => {
            let gb = ideal_of(gens)?;
            let (staircase, col) = gb.staircase_and_colength();
            let mut outputs = json!({
                "groebner_basis": out.polys(&gb.generators()),
                "colength": colength(col),
            });
            if let Colength::Finite(_) = col {
                outputs["staircase"] = json!(staircase.monomials);
                outputs["torsion_jordan_type"] = json!(torsion_jordan_type(&gb)?.parts());
                outputs["tangent_dim"] = json!(hom_quotient_dim(&gb)?);
            }
            Ok(report(command, json!({"gens": gens}), outputs, Status::Pass, vec![]))
        }
        Command::VerifyAll { k } => {
            if *k == 0 {
                bail!("k must be positive");
            }
            let cfg = SuiteConfig::for_k(*k, settings.seed);
            let results = run_all(&cfg);
            let ok = results.iter().all(|r| r.passed);
            let details = results
                .iter()
                .map(|r| {
                    format!(
                        "criterion {} [{}] {}: {}",
                        r.id,
                        if r.passed { "PASS" } else { "FAIL" },
                        r.name,
                        r.detail
                    )
                })
                .collect();
            let outputs = json!({
                "criteria": results.iter().map(|r| json!({"id": r.id, "name": r.name, "passed": r.passed})).collect::<Vec<_>>(),
            });
            Ok(report(
                command,
                json!({"k": k, "seed": settings.seed, "config": cfg}),
                outputs,
                Status::from_pass(ok),
                details,
            ))
        }
    }
}

fn toric(command: String, k: usize, action: &ToricAction) -> Result<Report> {
    if k == 0 {
        bail!("k must be positive");
    }
    let inputs = json!({"k": k});
    let pass = |outputs: Value| Ok(report(command.clone(), inputs.clone(), outputs, Status::Pass, vec![]));
    match action {
        ToricAction::Biresidues => {
            let b = biresidue_matrix(k);
            pass(json!({
                "ordering": b.ordering.iter().map(|c| coord(*c)).collect::<Vec<_>>(),
                "matrix": b.entries,
            }))
        }
        ToricAction::Smoothable => pass(json!({
            "weights": smoothable_basis(k).iter().map(|s| json!({"label": s.to_string(), "weight": s.weight(k).entries()})).collect::<Vec<_>>(),
        })),
        ToricAction::Coweight => {
            let w = find_coweight(k);
            let pairings: Vec<i64> = smoothable_basis(k).iter().map(|s| w.dot(&s.weight(k))).collect();
            let ok = pairings.iter().all(|&p| p > 0);
            Ok(report(
                command,
                inputs,
                json!({"coweight": w.entries(), "pairings": pairings}),
                Status::from_pass(ok),
                vec![],
            ))
        }
        ToricAction::PiDelta => {
            let pi = pi_delta(k);
            let entries: Vec<Value> = pi
                .entries()
                .filter(|(a, b, p)| a < b && !p.is_zero())
                .map(|(a, b, p)| json!({"left": coord(a), "right": coord(b), "bracket": p.to_string()}))
                .collect();
            pass(json!({"brackets": entries}))
        }
        ToricAction::Inverse => {
            let c = inverse_relation_check(k).map_err(|e| anyhow!("{e}"));
            match c {
                Ok(c) => pass(json!({"scalar": rat(&c)})),
                Err(e) => Ok(report(command, inputs, json!(null), Status::Fail, vec![e.to_string()])),
            }
        }
        ToricAction::Degeneration => {
            let r = verify_degeneration(k);
            let ok = r.limit_is_invariant_part && r.min_positive_exponent.is_none_or(|e| e > 0);
            Ok(report(
                command,
                inputs,
                serde_json::to_value(&r)?,
                Status::from_pass(ok),
                vec![],
            ))
        }
        ToricAction::Weights => {
            let ws = monomial_weights(&hilb_core::brackets::quad_nodal_structure(k), true);
            pass(json!({
                "weights": ws.iter().map(|w| json!({"weight": w.entries(), "class": class(&classify_weight(w))})).collect::<Vec<_>>(),
            }))
        }
        ToricAction::Classify { weight: w } => {
            let w = weight(k, w)?;
            pass(class(&classify_weight(&w)))
        }
        ToricAction::Decompose { weight: w } => {
            let w = weight(k, w)?;
            match decompose_weight(&w) {
                Ok(d) => pass(json!({"decomposition": decomposition(&d)})),
                Err(e) => Ok(report(command, inputs, json!(null), Status::Fail, vec![e.to_string()])),
            }
        }
        ToricAction::Game { weight: w } => {
            let w = weight(k, w)?;
            match domino_game(&w) {
                Ok(moves) => pass(json!({
                    "moves": moves.iter().map(|m| json!({"kind": m.kind, "subtracted": decomposition(&m.subtracted)})).collect::<Vec<_>>(),
                })),
                Err(e) => Ok(report(command, inputs, json!(null), Status::Fail, vec![e.to_string()])),
            }
        }
    }
}

fn intervals_json(j: &IntervalTuple) -> Value {
    json!(j.to_strings())
}

fn holonomy(command: String, action: &HolonomyAction) -> Result<Report> {
    match action {
        HolonomyAction::Check { matrix } => {
            let b = CMMatrix::new(input::int_rows(matrix)?).map_err(|e| anyhow!("{e}"))?;
            let cm = is_cyclically_monotone(&b);
            let constant = constant_in_rowspan(&b);
            let zero_one = (0..b.size()).all(|i| (i + 1..b.size()).all(|j| matches!(b.get(i, j), 0 | 1)));
            let mut outputs = json!({
                "cyclically_monotone": cm,
                "zero_one_above_diagonal": zero_one,
                "constant_in_rowspan": constant,
            });
            let mut details = Vec::new();
            let mut ok = true;
            if cm {
                match realize_intervals(&b) {
                    Ok(j) => {
                        outputs["realization"] = intervals_json(&j);
                        ok &= interval_matrix(&j) == b;
                    }
                    Err(e) => {
                        ok = false;
                        details.push(e.to_string());
                    }
                }
            }
            if cm && zero_one && b.size() % 2 == 1 && constant {
                ok = false;
                details.push("constant vector lies in the row span".into());
            }
            Ok(report(
                command,
                json!({"matrix": b}),
                outputs,
                Status::from_pass(ok),
                details,
            ))
        }
        HolonomyAction::Enumerate { m } => {
            if *m == 0 || *m > 8 {
                bail!("m must be between 1 and 8");
            }
            let all = enumerate_cm_01(*m);
            let with_constant = all.iter().filter(|b| constant_in_rowspan(b)).count();
            let ok = m % 2 == 0 || with_constant == 0;
            Ok(report(
                command,
                json!({"m": m}),
                json!({"count": all.len(), "constant_in_rowspan": with_constant}),
                Status::from_pass(ok),
                vec![],
            ))
        }
        HolonomyAction::Intervals { intervals } => {
            let j = IntervalTuple::new(input::intervals(intervals)?).map_err(|e| anyhow!("{e}"))?;
            let b = interval_matrix(&j);
            let trace = interval_exchange_trace(&j)?;
            let outputs = json!({
                "matrix": b,
                "lengths": j.lengths().iter().map(rat).collect::<Vec<_>>(),
                "exchange": trace.stages.iter().map(intervals_json).collect::<Vec<_>>(),
                "exchange_end": match trace.end { ExchangeEnd::Base => "base", ExchangeEnd::Isolated => "isolated" },
            });
            Ok(report(
                command,
                json!({"intervals": intervals}),
                outputs,
                Status::Pass,
                vec![],
            ))
        }
    }
}

fn orbit(command: String, action: &OrbitAction, out: &Out<'_>) -> Result<Report> {
    let truncation = out.settings.truncation;
    match action {
        OrbitAction::Datum { e } => {
            let chart = input::chart(e)?;
            let d = orbit_datum_with_truncation(&chart, truncation.unwrap_or(chart.k() as u32 + 2))?;
            Ok(report(
                command,
                json!({"e": e}),
                json!({"diagram": d.diagram.parts()}),
                Status::Pass,
                vec![],
            ))
        }
        OrbitAction::Jordan { ideal } => {
            let gb = ideal_of(ideal)?;
            let d = torsion_jordan_type(&gb)?;
            Ok(report(
                command,
                json!({"ideal": ideal}),
                json!({"diagram": d.parts()}),
                Status::Pass,
                vec![],
            ))
        }
        OrbitAction::Tangent { e } => {
            let chart = input::chart(e)?;
            let k = chart.k();
            let dim = hom_tangent_dim(&chart)?;
            Ok(report(
                command,
                json!({"e": e}),
                json!({"tangent_dim": dim, "expected": k * (k + 1)}),
                Status::from_pass(dim == k * (k + 1)),
                vec![],
            ))
        }
        OrbitAction::Nodal { d, k, u } => {
            let pairs = input::exponent_pairs(d)?;
            let series = match u {
                Some(u) => NodalSeriesMatrix::Continuous {
                    d: pairs,
                    k: *k,
                    u: input::rational(u)?,
                },
                None => NodalSeriesMatrix::Discrete { d: pairs },
            };
            let m = nodal_series_matrix(&series)?;
            Ok(report(
                command,
                serde_json::to_value(&series)?,
                json!({"matrix": out.poly_matrix(&m)}),
                Status::Pass,
                vec![],
            ))
        }
        OrbitAction::Nilcone { e } => {
            let chart = input::chart(e)?;
            let k = chart.k();
            if !in_gl_locus(&chart) {
                bail!("the last row of E must vanish");
            }
            let r = nilcone_check(&chart)?;
            let ok = r.intersection_length == Colength::Finite(k)
                && r.last_minor_matches_charpoly
                && (!r.top_block_nilpotent || r.meets_divisor_at_origin_only);
            Ok(report(
                command,
                json!({"e": e}),
                serde_json::to_value(&r)?,
                Status::from_pass(ok),
                vec![],
            ))
        }
        OrbitAction::Perturbed { mu, m } => {
            let d = input::diagram(mu)?;
            let mm = input::qmat(m)?;
            let gb = perturbed_syzygy_ideal(&d, &mm)?;
            let contained = gb.is_subset_of(&monomial_scheme_ideal(&d));
            Ok(report(
                command,
                json!({"mu": d.parts(), "m": qmat(&mm)}),
                json!({"ideal": out.polys(&gb.generators()), "colength": colength(gb.colength()), "inside_monomial_scheme": contained}),
                Status::from_pass(contained),
                vec![],
            ))
        }
        OrbitAction::Intersect { ideal, g } => {
            let gb = ideal_of(ideal)?;
            let gp = parse_poly(&VarContext::xy(), g).map_err(|e| anyhow!("{e}"))?;
            let len = divisor_intersection_length(&gb, &gp)?;
            Ok(report(
                command,
                json!({"ideal": ideal, "g": g}),
                json!({"length": colength(len)}),
                Status::Pass,
                vec![],
            ))
        }
    }
}
