//! Command line front end: parse the file formats, dispatch to the engine,
//! print deterministic reports. Exit codes: 0 success or verdict true,
//! 1 verdict false, 2 input error, 3 internal assertion failure.

use clap::{Parser, Subcommand};
use pocmed::actions;
use pocmed::construct;
use pocmed::cubing;
use pocmed::duality;
use pocmed::graph::parse_graph_source;
use pocmed::median::{self, MedianAlgebra};
use pocmed::pocset::{self, PocSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "pocmed",
    about = "finite poc sets, median algebras and their duality"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a .poc, .med, .graph, .tree or .act file
    Validate { file: PathBuf },
    /// Emit the dual object (.med -> .poc text, .poc -> .med text)
    Dual { file: PathBuf },
    /// Evaluate into the double dual and print the certificate
    Doubledual { file: PathBuf },
    /// Build the free median algebra on n generators
    FreeMedian {
        n: usize,
        #[arg(long)]
        census: bool,
    },
    /// Print the median graph of an algebra
    MedianGraph {
        file: PathBuf,
        #[arg(long)]
        dot: bool,
    },
    /// Decide whether a connected graph is a median graph
    Recognize { file: PathBuf },
    /// Structure report for a poc set
    AnalyzePoc { file: PathBuf },
    /// Realize a poc set as the median algebra of its founded ultrafilters
    Dunwoody { file: PathBuf },
    /// Run the stepwise ultrafilter construction
    IncrementalUf {
        file: PathBuf,
        /// comma-separated element tokens, one per proper pair
        #[arg(long)]
        order: Option<String>,
    },
    /// Emit the poc set of a tree
    TreePoc { file: PathBuf },
    /// Cubical nerve: cube counts and the contraction certificate
    Nerve {
        file: PathBuf,
        #[arg(long)]
        dot: bool,
    },
    /// Quotient by a set of hyperplanes
    Quotient {
        file: PathBuf,
        /// comma-separated hyperplane indices
        #[arg(long, default_value = "")]
        hyperplanes: String,
    },
    /// Orbits, fixed cube, simplicity, pairing and the Hilbert embedding
    ActionReport { file: PathBuf },
    /// Windowed translate-family construction over Z or the free group
    Sageev {
        #[arg(long)]
        group: String,
        #[arg(long)]
        set: String,
        #[arg(long)]
        radius: usize,
    },
}

enum Outcome {
    True,
    False,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Internal(String),
}

/// Library errors that flag a broken internal invariant map to exit 3.
fn classify_err(e: impl std::fmt::Display) -> CliError {
    let text = e.to_string();
    if text.contains("internal invariant violated") {
        CliError::Internal(text)
    } else {
        CliError::Input(text)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {}", path.display(), e)))
}

fn load_poc(path: &Path) -> Result<PocSet, CliError> {
    pocset::parse_poc_source(&read(path)?).map_err(classify_err)
}

fn load_med(path: &Path) -> Result<MedianAlgebra, CliError> {
    median::parse_median_source(&read(path)?, median::DEFAULT_TABLE_CAP).map_err(classify_err)
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Validate { file } => validate(&file),
        Command::Dual { file } => dual(&file),
        Command::Doubledual { file } => doubledual(&file),
        Command::FreeMedian { n, census } => free_median(n, census),
        Command::MedianGraph { file, dot } => {
            let m = load_med(&file)?;
            if dot {
                print!("{}", cubing::median_graph_dot(&m));
            } else {
                let g = m.median_graph();
                for (u, v) in g.edges() {
                    println!("{} -- {}", g.label(u), g.label(v));
                }
            }
            Ok(Outcome::True)
        }
        Command::Recognize { file } => {
            let g = parse_graph_source(&read(&file)?).map_err(classify_err)?;
            match cubing::recognize_median_graph(&g).map_err(classify_err)? {
                cubing::RecognitionResult::Median(m) => {
                    println!("median: yes");
                    println!("elements: {}", m.n());
                    println!("hyperplanes: {}", m.hyperplanes().len());
                    Ok(Outcome::True)
                }
                cubing::RecognitionResult::NotMedian {
                    witness: (x, y, z),
                    intersection_size,
                } => {
                    println!("median: no");
                    println!("witness: {} {} {}", g.label(x), g.label(y), g.label(z));
                    println!("intersection: {}", intersection_size);
                    Ok(Outcome::False)
                }
            }
        }
        Command::AnalyzePoc { file } => analyze_poc(&file),
        Command::Dunwoody { file } => {
            let p = load_poc(&file)?;
            let d = construct::dunwoody_realize(&p).map_err(classify_err)?;
            println!("elements: {}", d.algebra.n());
            println!("hyperplanes: {}", d.algebra.hyperplanes().len());
            println!("dual-isomorphic: yes");
            Ok(Outcome::True)
        }
        Command::IncrementalUf { file, order } => incremental_uf(&file, order),
        Command::TreePoc { file } => {
            let t = construct::parse_tree_source(&read(&file)?).map_err(classify_err)?;
            let tp = construct::poc_of_tree(&t);
            print!("{}", pocset::emit_poc_source(&tp.poc));
            Ok(Outcome::True)
        }
        Command::Nerve { file, dot } => nerve(&file, dot),
        Command::Quotient { file, hyperplanes } => quotient(&file, &hyperplanes),
        Command::ActionReport { file } => action_report(&file),
        Command::Sageev { group, set, radius } => sageev(&group, &set, radius),
    }
}

fn validate(file: &Path) -> Result<Outcome, CliError> {
    let ext = file.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "poc" => match pocset::parse_poc_source(&read(file)?) {
            Ok(p) => {
                println!(
                    "valid poc set {}: {} elements, {} pairs",
                    p.name(),
                    p.n_elements(),
                    p.n_pairs()
                );
                Ok(Outcome::True)
            }
            Err(pocset::PocError::Invalid(rep)) => {
                print!("{}", rep);
                Ok(Outcome::False)
            }
            Err(e) => Err(classify_err(e)),
        },
        "med" => match median::parse_median_source(&read(file)?, median::DEFAULT_TABLE_CAP) {
            Ok(m) => {
                println!(
                    "valid median algebra {}: {} elements, {} hyperplanes",
                    m.name(),
                    m.n(),
                    m.hyperplanes().len()
                );
                Ok(Outcome::True)
            }
            Err(median::MedError::Invalid(rep)) => {
                print!("{}", rep);
                Ok(Outcome::False)
            }
            Err(e) => Err(classify_err(e)),
        },
        "graph" => {
            let g = parse_graph_source(&read(file)?).map_err(classify_err)?;
            println!(
                "valid graph {}: {} vertices, {} edges",
                g.name,
                g.n(),
                g.edge_count()
            );
            Ok(Outcome::True)
        }
        "tree" => match construct::parse_tree_source(&read(file)?) {
            Ok(t) => {
                println!("valid tree {}: {} vertices", t.name, t.n());
                Ok(Outcome::True)
            }
            Err(construct::ConstructError::NotATree(name)) => {
                println!("not a tree: {}", name);
                Ok(Outcome::False)
            }
            Err(e) => Err(classify_err(e)),
        },
        "act" => match load_action(file) {
            Ok(a) => {
                println!(
                    "valid action: group of order {} on {} elements",
                    a.order(),
                    a.algebra.n()
                );
                Ok(Outcome::True)
            }
            Err(CliError::Input(msg)) if msg.contains("does not preserve the median") => {
                println!("{}", msg);
                Ok(Outcome::False)
            }
            Err(e) => Err(e),
        },
        other => Err(CliError::Input(format!(
            "unknown file extension `{}`",
            other
        ))),
    }
}

fn dual(file: &Path) -> Result<Outcome, CliError> {
    let ext = file.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "med" => {
            let m = load_med(file)?;
            let d = duality::dual_of_median(&m);
            print!("{}", pocset::emit_poc_source(&d.poc));
            Ok(Outcome::True)
        }
        "poc" => {
            let p = load_poc(file)?;
            let d = duality::dual_of_poc(&p, pocset::DEFAULT_ULTRAFILTER_PAIR_LIMIT)
                .map_err(classify_err)?;
            print!("{}", median::emit_median_source(&d.algebra));
            Ok(Outcome::True)
        }
        other => Err(CliError::Input(format!(
            "dual expects .poc or .med, got `{}`",
            other
        ))),
    }
}

fn doubledual(file: &Path) -> Result<Outcome, CliError> {
    let ext = file.extension().and_then(|e| e.to_str()).unwrap_or("");
    let cert = match ext {
        "med" => duality::double_dual_check_median(
            &load_med(file)?,
            pocset::DEFAULT_ULTRAFILTER_PAIR_LIMIT,
        )
        .map_err(classify_err)?,
        "poc" => {
            duality::double_dual_check_poc(&load_poc(file)?, pocset::DEFAULT_ULTRAFILTER_PAIR_LIMIT)
                .map_err(classify_err)?
        }
        other => {
            return Err(CliError::Input(format!(
                "doubledual expects .poc or .med, got `{}`",
                other
            )))
        }
    };
    print!("{}", cert.render());
    if cert.is_isomorphism() {
        Ok(Outcome::True)
    } else {
        Ok(Outcome::False)
    }
}

fn free_median(n: usize, census: bool) -> Result<Outcome, CliError> {
    let fm = duality::free_median(n).map_err(classify_err)?;
    println!("elements: {}", fm.algebra.n());
    if census {
        // base the encoding at the most central element: the carrier point
        // minimizing the maximal distance to the generators
        let centre = (0..fm.algebra.n())
            .min_by_key(|&x| {
                (
                    fm.generators
                        .iter()
                        .map(|&g| fm.algebra.distance(x, g))
                        .max()
                        .unwrap_or(0),
                    x,
                )
            })
            .unwrap();
        let enc = fm.algebra.tau_encoding(centre);
        if !enc.bijective {
            return Err(CliError::Internal(
                "internal invariant violated: encoding is not bijective".into(),
            ));
        }
        let counts: Vec<String> = enc.census.iter().map(|(_, c)| c.to_string()).collect();
        println!("census: {}", counts.join(" "));
    }
    Ok(Outcome::True)
}

fn analyze_poc(file: &Path) -> Result<Outcome, CliError> {
    let p = load_poc(file)?;
    println!("pocset {}", p.name());
    println!("pairs: {}", p.n_pairs());
    let tp = p.transversality_graph();
    let edges: Vec<String> = tp
        .edges()
        .iter()
        .map(|&(u, v)| format!("{}~{}", tp.label(u), tp.label(v)))
        .collect();
    println!("transversality-edges: {}", edges.join(" "));
    let summands = p.prime_summands();
    println!("prime-summands: {}", summands.len());
    for s in &summands {
        let toks: Vec<&str> = s.iter().map(|&pr| tp.label(pr)).collect();
        println!("  summand: {}", toks.join(" "));
    }
    let (dim, len, omega) = p.dimension_length();
    println!("dimension: {}", dim);
    println!("length: {}", len);
    println!("type-omega: {}", if omega { "yes" } else { "no" });
    match p.tree_dimension(true, pocset::DEFAULT_CHROMATIC_PAIR_LIMIT) {
        Ok((t, exact)) => println!(
            "tree-dimension: {} ({})",
            t,
            if exact { "exact" } else { "greedy" }
        ),
        Err(_) => {
            let (t, _) = p.tree_dimension(false, usize::MAX).map_err(classify_err)?;
            println!("tree-dimension: {} (greedy)", t);
        }
    }
    let (binary, walk) = p.is_binary();
    match walk {
        None => println!("binary: {}", if binary { "yes" } else { "no" }),
        Some(w) => {
            let toks: Vec<&str> = w.iter().map(|&e| p.token(e)).collect();
            println!("binary: no (walk: {})", toks.join(" "));
        }
    }
    Ok(Outcome::True)
}

fn incremental_uf(file: &Path, order: Option<String>) -> Result<Outcome, CliError> {
    let p = load_poc(file)?;
    let order: Vec<usize> = match order {
        None => (0..p.n_pairs()).map(|i| p.pair_elems(i).0).collect(),
        Some(spec) => spec
            .split(',')
            .map(|tok| {
                p.elem_by_token(tok.trim())
                    .ok_or_else(|| CliError::Input(format!("unknown element `{}`", tok)))
            })
            .collect::<Result<_, _>>()?,
    };
    let (uf, trace) = construct::incremental_ultrafilter(&p, &order).map_err(classify_err)?;
    for step in &trace {
        let added: Vec<&str> = step.added.iter().map(|&e| p.token(e)).collect();
        println!(
            "step {}: case {}{}",
            step.pair_token,
            step.case,
            if added.is_empty() {
                String::new()
            } else {
                format!(" add {{{}}}", added.join(","))
            }
        );
    }
    let toks: Vec<&str> = uf.iter().map(|e| p.token(e)).collect();
    println!("ultrafilter: {{{}}}", toks.join(","));
    Ok(Outcome::True)
}

fn nerve(file: &Path, dot: bool) -> Result<Outcome, CliError> {
    let m = load_med(file)?;
    let nerve = cubing::cubical_nerve(&m);
    for (d, c) in nerve.counts().iter().enumerate() {
        println!("cubes[{}]: {}", d, c);
    }
    println!("euler: {}", nerve.euler());
    for v in 0..m.n() {
        let (_, flag) = cubing::link_flag_check(&m, v);
        if !flag {
            return Err(CliError::Internal(
                "internal invariant violated: a link is not flag".into(),
            ));
        }
    }
    println!("links: flag");
    let cert = cubing::contraction_certificate(&m).map_err(classify_err)?;
    println!("contraction: {} steps", cert.len());
    for (i, s) in cert.iter().enumerate() {
        println!("  step {}: collapse {}", i + 1, s);
    }
    if dot {
        print!("{}", cubing::median_graph_dot(&m));
    }
    Ok(Outcome::True)
}

fn quotient(file: &Path, hyperplanes: &str) -> Result<Outcome, CliError> {
    let m = load_med(file)?;
    let ids: Vec<usize> = if hyperplanes.is_empty() {
        Vec::new()
    } else {
        hyperplanes
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Input(format!("bad hyperplane index `{}`", s)))
            })
            .collect::<Result<_, _>>()?
    };
    for &i in &ids {
        if i >= m.hyperplanes().len() {
            return Err(CliError::Input(format!(
                "hyperplane index {} out of range (have {})",
                i,
                m.hyperplanes().len()
            )));
        }
    }
    let q = duality::contract_hyperplanes(&m, &ids).map_err(classify_err)?;
    println!("classes: {}", q.algebra.n());
    println!("hyperplanes: {}", q.algebra.hyperplanes().len());
    for class in &q.classes {
        let toks: Vec<&str> = class.iter().map(|&x| m.token(x)).collect();
        println!("  class: {{{}}}", toks.join(","));
    }
    Ok(Outcome::True)
}

fn load_action(file: &Path) -> Result<actions::GroupAction, CliError> {
    let src = actions::parse_act_source(&read(file)?).map_err(classify_err)?;
    let med_path = file
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&src.med_ref);
    let m = load_med(&med_path)?;
    let mut gens = Vec::new();
    for (name, pairs) in &src.gens {
        let mut perm = vec![usize::MAX; m.n()];
        for (from, to) in pairs {
            let f = m
                .elem_by_token(from)
                .ok_or_else(|| CliError::Input(format!("unknown element `{}`", from)))?;
            let t = m
                .elem_by_token(to)
                .ok_or_else(|| CliError::Input(format!("unknown element `{}`", to)))?;
            if perm[f] != usize::MAX {
                return Err(CliError::Input(format!("element `{}` mapped twice", from)));
            }
            perm[f] = t;
        }
        if perm.iter().any(|&x| x == usize::MAX) {
            return Err(CliError::Input(format!(
                "generator {} does not map every element",
                name
            )));
        }
        gens.push((name.clone(), perm));
    }
    actions::validate_action(&m, &gens, actions::DEFAULT_GROUP_CAP).map_err(classify_err)
}

fn action_report(file: &Path) -> Result<Outcome, CliError> {
    let a = load_action(file)?;
    let m = &a.algebra;
    println!("group-order: {}", a.order());
    let (vorbits, horbits) = a.orbits();
    println!("vertex-orbits: {}", vorbits.len());
    for o in &vorbits {
        let toks: Vec<&str> = o.iter().map(|&x| m.token(x)).collect();
        println!("  orbit: {{{}}}", toks.join(","));
    }
    println!("hyperplane-orbits: {}", horbits.len());
    let w = actions::fixed_cube(&a, None).map_err(classify_err)?;
    let toks: Vec<&str> = w.cube.iter().map(|x| m.token(x)).collect();
    println!("fixed-cube: {{{}}}", toks.join(","));
    let s = actions::simple_analysis(&a).map_err(classify_err)?;
    println!("simple: {}", if s.is_simple { "yes" } else { "no" });
    if let Some(x) = s.fixed_point {
        println!("fixed-point: {}", m.token(x));
    }
    if let Some(h) = m.proper_halfspaces().next() {
        let t = actions::pairing(&a, h, 0).map_err(classify_err)?;
        let words: Vec<&str> = t.members.iter().map(|g| a.words[g].as_str()).collect();
        println!(
            "pairing[H0, {}]: {{{}}} (laws verified)",
            m.token(0),
            words.join(",")
        );
    }
    let rep = actions::hilbert_embedding(&a, 0).map_err(classify_err)?;
    println!("hilbert: isometric ({} pairs checked)", rep.pairs_checked);
    actions::shift_report_finite(&a).map_err(classify_err)?;
    println!("shifts: none");
    Ok(Outcome::True)
}

fn sageev(group: &str, set: &str, radius: usize) -> Result<Outcome, CliError> {
    let group = match group {
        "z" => construct::WindowGroup::Z,
        "f2" => construct::WindowGroup::F2,
        other => return Err(CliError::Input(format!("unknown group `{}`", other))),
    };
    let set = if set == "halfline" {
        construct::WindowSet::HalfLine
    } else if let Some(letter) = set.strip_prefix("prefix:") {
        let c = letter
            .chars()
            .next()
            .filter(|c| *c == 'a' || *c == 'b')
            .ok_or_else(|| CliError::Input(format!("bad prefix letter `{}`", letter)))?;
        construct::WindowSet::Prefix(c)
    } else {
        return Err(CliError::Input(format!("unknown set `{}`", set)));
    };
    let spec = construct::SageevSpec { group, set, radius };
    let w = construct::sageev_window(&spec).map_err(classify_err)?;
    println!("window-elements: {}", w.ball_tokens.len());
    println!("algebra-elements: {}", w.algebra.n());
    println!("hyperplanes: {}", w.algebra.hyperplanes().len());
    let counts: Vec<String> = w.orbit_counts.iter().map(|c| c.to_string()).collect();
    println!("hyperplanes-by-radius: {}", counts.join(" "));
    let shifts = actions::shift_report_window(&w).map_err(classify_err)?;
    for (g, dir) in &shifts {
        println!(
            "shift: {} ({})",
            g,
            match dir {
                construct::ShiftDirection::Shrinks => "shrinks",
                construct::ShiftDirection::Grows => "grows",
            }
        );
    }
    for c in &w.end_checks {
        println!(
            "end2[{}]: {} {} {} (stable)",
            c.generator, c.diff_counts[0], c.diff_counts[1], c.diff_counts[2]
        );
    }
    println!("end1: vacuous (trivial subgroup)");
    println!("end3: both sides reach the boundary");
    let tail = w.tail_foundedness();
    println!(
        "tail-orientation: {}",
        if tail.founded {
            "founded".to_string()
        } else {
            format!("unfounded (offenders: {})", tail.offenders.join(" "))
        }
    );
    Ok(Outcome::True)
}

/// Batch tools die quietly when the reader goes away.
fn reset_sigpipe() {
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(cli)));
    match result {
        Ok(Ok(Outcome::True)) => ExitCode::from(0),
        Ok(Ok(Outcome::False)) => ExitCode::from(1),
        Ok(Err(CliError::Input(msg))) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
        Ok(Err(CliError::Internal(msg))) => {
            eprintln!("internal error: {}", msg);
            ExitCode::from(3)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            eprintln!("internal error: {}", msg);
            ExitCode::from(3)
        }
    }
}
