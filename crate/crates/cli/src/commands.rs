use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use relmap::optimizer::rank_permutation;
use relmap::{
    ber_curve, compound_crossover, cost_mse, hill_climb, mutual_information, optimize,
    recode_tables, ser_db, AwgnParams, BranchHypothesis, ConditionalPmfs, CostKind, CostSpec,
    CostTemplate, CrossoverMatrix, FaultModel, Label, LinkConfig, Mapping, MappingChoice,
    OptimizationResult, Pruning, QuantizerParams, Scheme, SearchOptions, StopRule, SymbolAlphabet,
    SymbolDistribution,
};

use crate::table::{bits, coord, num, Sink, Table};
use crate::{
    AlphabetArgs, Base, BerArgs, Command, CrossoverArgs, Hypothesis, OptimizeArgs, PmfArgs,
    Preset, RatesArgs, RecodeArgs, SchemeArg, SearchArgs, SerArgs,
};

pub fn run(command: Command) -> Result<String> {
    match command {
        Command::Crossover(a) => crossover(a),
        Command::Pmf(a) => pmf(a),
        Command::Ser(a) => ser(a),
        Command::Optimize(a) => optimize_cmd(a),
        Command::Rates(a) => rates(a),
        Command::Ber(a) => ber(a),
        Command::Recode(a) => recode(a),
    }
}

fn check_epsilon(eps: f64) -> Result<f64> {
    ensure!(
        (0.0..=1.0).contains(&eps),
        "invalid --epsilon {eps}: a bit-cell error probability must lie in [0, 1]"
    );
    Ok(eps)
}

fn check_delta(delta: f64) -> Result<f64> {
    ensure!(
        delta.is_finite() && delta > 0.0,
        "invalid --delta {delta}: the quantizer scale must be positive"
    );
    Ok(delta)
}

fn check_snr(snr: f64) -> Result<f64> {
    ensure!(snr.is_finite(), "invalid SNR {snr}: must be finite");
    Ok(snr)
}

fn check_preset(preset: Option<Preset>, allowed: &[Preset], command: &str) -> Result<()> {
    if let Some(p) = preset {
        ensure!(
            allowed.contains(&p),
            "preset {} does not apply to `{command}`", format!("{p:?}").to_lowercase()
        );
    }
    Ok(())
}

fn alphabet(args: AlphabetArgs) -> Result<SymbolAlphabet> {
    SymbolAlphabet::new(args.n_bits, args.n_frac).context("invalid --n-bits/--n-frac")
}

fn channel(model: impl Into<FaultModel>, n_bits: u32, eps: f64) -> Result<CrossoverMatrix> {
    CrossoverMatrix::new(model.into(), n_bits, check_epsilon(eps)?).context("invalid memory parameters")
}

fn search_options(args: &SearchArgs, keep_ranking: bool) -> SearchOptions {
    SearchOptions {
        max_bits: args.search_max_bits,
        pruning: if args.prune { Pruning::LabelXor } else { Pruning::None },
        keep_ranking,
    }
}

/// SNR points `start, start + step, ...` up to and including `stop`.
fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    check_snr(start)?;
    check_snr(stop)?;
    ensure!(step.is_finite() && step > 0.0, "invalid --snr-step {step}: must be positive");
    ensure!(stop >= start, "invalid SNR range: --snr-stop {stop} is below --snr-start {start}");
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    ensure!(n < 100_000, "SNR grid has too many points");
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

fn load_distribution(spec: &str, alphabet: SymbolAlphabet) -> Result<SymbolDistribution> {
    match spec {
        "gaussian" => Ok(SymbolDistribution::gaussian_standin(alphabet)),
        "bimodal" => Ok(SymbolDistribution::bimodal_standin(alphabet)),
        path => {
            let mut reader = csv::ReaderBuilder::new()
                .comment(Some(b'#'))
                .trim(csv::Trim::All)
                .from_path(path)
                .with_context(|| format!("cannot read distribution file {path}"))?;
            let mut pmf = vec![0.0; alphabet.size()];
            for (line, record) in reader.deserialize::<(f64, f64)>().enumerate() {
                let (value, p) = record.with_context(|| format!("{path}: bad row {}", line + 1))?;
                let index = alphabet
                    .index_of_value(value)
                    .ok_or_else(|| anyhow!("{path}: symbol {value} is not in the alphabet"))?;
                pmf[index] += p;
            }
            SymbolDistribution::new(alphabet, pmf).with_context(|| format!("{path}: invalid distribution"))
        }
    }
}

fn load_mapping(path: &Path) -> Result<Mapping> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read mapping file {}", path.display()))?;
    Mapping::from_json(&text).with_context(|| format!("{}: invalid mapping", path.display()))
}

fn base_mapping(base: Base, alphabet: SymbolAlphabet) -> Mapping {
    match base {
        Base::TwosComplement => Mapping::twos_complement(alphabet),
        Base::Sm => Mapping::sign_magnitude(alphabet),
    }
}

fn base_name(base: Base) -> &'static str {
    match base {
        Base::TwosComplement => "2c",
        Base::Sm => "sm",
    }
}

fn encode_string(m: &Mapping) -> String {
    m.to_string()
}

fn crossover(a: CrossoverArgs) -> Result<String> {
    check_preset(a.preset, &[Preset::Fig2], "crossover")?;
    if a.preset == Some(Preset::Fig2) {
        let sink = Sink::open(a.output.as_deref())?;
        let mut t = Table::new("crossover", &["model", "epsilon", "hamming", "probability"]);
        t.meta("preset", "fig2").meta("n_bits", a.n_bits);
        for eps in [1e-1, 1e-2] {
            for model in [FaultModel::Bsc, FaultModel::Sac] {
                let c = channel(model, a.n_bits, eps)?;
                for d in 0..=a.n_bits {
                    let to = (1u32 << d) - 1;
                    t.row(vec![
                        model.to_string(),
                        coord(eps),
                        d.to_string(),
                        num(c.get(Label(0), Label(to))),
                    ]);
                }
            }
        }
        let where_to = sink.describe();
        t.write(sink)?;
        return Ok(format!("wrote {} rows by Hamming distance to {where_to}", t.len()));
    }
    let c = channel(a.model, a.n_bits, a.epsilon)?;
    let sink = Sink::open(a.output.as_deref())?;
    let k = c.size() as u32;
    let labels: Vec<String> = (0..k).map(|l| bits(l, a.n_bits)).collect();
    let mut header = vec!["stored"];
    header.extend(labels.iter().map(String::as_str));
    let mut t = Table::new("crossover", &header);
    t.meta("model", FaultModel::from(a.model))
        .meta("n_bits", a.n_bits)
        .meta("epsilon", a.epsilon)
        .meta("layout", "row = stored label, column = read label");
    for from in 0..k {
        let mut row = vec![labels[from as usize].clone()];
        row.extend(c.row(Label(from)).iter().map(|&p| num(p)));
        t.row(row);
    }
    let where_to = sink.describe();
    t.write(sink)?;
    Ok(format!("wrote {k}x{k} {} cross-over matrix to {where_to}", FaultModel::from(a.model)))
}

fn pmf(a: PmfArgs) -> Result<String> {
    let alphabet = alphabet(a.alphabet)?;
    let q = QuantizerParams::new(alphabet, check_delta(a.delta)?).context("invalid quantizer")?;
    let awgn = AwgnParams::from_snr_db(check_snr(a.snr_db)?).context("invalid --snr-db")?;
    let sink = Sink::open(a.output.as_deref())?;
    let pdc = ConditionalPmfs::exact(&q, &awgn);
    let marginal = pdc.marginal();
    let mut t = Table::new("pmf", &["symbol", "p_given_0", "p_given_1", "p_marginal"]);
    t.meta("n_bits", a.alphabet.n_bits)
        .meta("n_frac", a.alphabet.n_frac)
        .meta("delta", a.delta)
        .meta("snr_db", a.snr_db)
        .meta("sigma2", num(awgn.sigma2()));
    for i in 0..alphabet.size() {
        t.row(vec![
            coord(alphabet.value(i)),
            num(pdc.given_zero.prob(i)),
            num(pdc.given_one.prob(i)),
            num(marginal.prob(i)),
        ]);
    }
    let where_to = sink.describe();
    t.write(sink)?;
    Ok(format!("wrote {} symbol probabilities to {where_to}", alphabet.size()))
}

fn ser(a: SerArgs) -> Result<String> {
    check_preset(a.preset, &[Preset::Fig3], "ser")?;
    let alphabet = alphabet(a.alphabet)?;
    let c = channel(a.model, alphabet.n_bits(), a.epsilon)?;
    let p_d = load_distribution(&a.dist, alphabet)?;
    let mappings = relmap::enumerate_mappings(alphabet, relmap::optimizer::DEFAULT_MAX_BITS)
        .context("cannot enumerate mappings")?;
    let sink = Sink::open(a.output.as_deref())?;
    let ser_of = |m: &Mapping| -> Result<f64> { Ok(ser_db(&p_d, cost_mse(m, &p_d, &c)?)?.db()) };

    let mut t = Table::new("ser", &["mapping_rank", "ser_db", "encode_table"]);
    let (mut best, mut worst) = ((f64::NEG_INFINITY, 0u64), (f64::INFINITY, 0u64));
    let mut rows = Vec::new();
    for (rank, m) in mappings.enumerate() {
        let s = ser_of(&m)?;
        if s > best.0 {
            best = (s, rank as u64);
        }
        if s < worst.0 {
            worst = (s, rank as u64);
        }
        rows.push(vec![rank.to_string(), num(s), encode_string(&m)]);
    }
    t.meta("n_bits", alphabet.n_bits())
        .meta("n_frac", alphabet.n_frac())
        .meta("model", FaultModel::from(a.model))
        .meta("epsilon", a.epsilon)
        .meta("dist", &a.dist);
    if let Some(p) = a.preset {
        t.meta("preset", format!("{p:?}").to_lowercase());
    }
    for (name, m) in [
        ("2c", Mapping::twos_complement(alphabet)),
        ("sm", Mapping::sign_magnitude(alphabet)),
    ] {
        t.meta(
            name,
            format!("rank {} ser_db {}", rank_permutation(&m.encode_table()), num(ser_of(&m)?)),
        );
    }
    t.meta("best", format!("rank {} ser_db {}", best.1, num(best.0)))
        .meta("worst", format!("rank {} ser_db {}", worst.1, num(worst.0)));
    for r in rows {
        t.row(r);
    }
    let where_to = sink.describe();
    t.write(sink)?;
    Ok(format!(
        "SER spread {:.3} dB over {} mappings, written to {where_to}",
        best.0 - worst.0,
        t.len()
    ))
}

fn optimize_cmd(a: OptimizeArgs) -> Result<String> {
    let alphabet = alphabet(a.alphabet)?;
    let c = channel(a.model, alphabet.n_bits(), a.epsilon)?;
    let q = QuantizerParams::new(alphabet, check_delta(a.delta)?).context("invalid quantizer")?;
    check_snr(a.snr_db)?;
    let kind = CostKind::from(a.cost);
    let hypothesis = match a.hypothesis {
        Hypothesis::AllZero => BranchHypothesis::AllZero,
        Hypothesis::Averaged => BranchHypothesis::Averaged,
    };
    if a.hypothesis != Hypothesis::AllZero && kind != CostKind::Msbe {
        bail!("--hypothesis only applies to the msbe cost");
    }
    let mut template = CostTemplate::new(kind, q, c.clone());
    template.hypothesis = hypothesis;
    let spec = match (&a.dist, kind) {
        (None, _) => template.at_snr(a.snr_db)?,
        (Some(d), CostKind::Mse) => CostSpec::Mse {
            p_d: load_distribution(d, alphabet)?,
            channel: c.clone(),
        },
        (Some(d), CostKind::Msbe) => CostSpec::Msbe {
            p_d: load_distribution(d, alphabet)?,
            channel: c.clone(),
            hypothesis,
        },
        (Some(_), _) => bail!("--dist only applies to the mse and msbe costs"),
    };
    if a.hill_climb.is_some() && a.dump_ranking.is_some() {
        bail!("--dump-ranking needs exhaustive search, not --hill-climb");
    }
    let sink = Sink::open(a.output.as_deref())?;
    let ranking_sink = a.dump_ranking.as_deref().map(|p| Sink::open(Some(p))).transpose()?;
    let recode_sink = a.recode.as_deref().map(|p| Sink::open(Some(p))).transpose()?;

    let result: OptimizationResult = match a.hill_climb {
        Some(restarts) => hill_climb(&spec, restarts, a.seed)?,
        None => optimize(&spec, &search_options(&a.search, ranking_sink.is_some()))?,
    };
    let best = &result.best;
    let meta = |t: &mut Table| {
        t.meta("cost", kind)
            .meta("n_bits", alphabet.n_bits())
            .meta("n_frac", alphabet.n_frac())
            .meta("model", FaultModel::from(a.model))
            .meta("epsilon", a.epsilon)
            .meta("snr_db", a.snr_db)
            .meta("delta", a.delta)
            .meta("dist", a.dist.as_deref().unwrap_or("quantizer"))
            .meta("method", format!("{:?}", result.method))
            .meta("best_cost", num(result.best_cost));
    };

    if let (Some(s), Some(ranking)) = (ranking_sink, &result.ranking) {
        let mut t = Table::new("optimize", &["position", "mapping_rank", "cost", "encode_table"]);
        meta(&mut t);
        for (i, (m, cost)) in ranking.iter().enumerate() {
            t.row(vec![
                i.to_string(),
                rank_permutation(&m.encode_table()).to_string(),
                num(*cost),
                encode_string(m),
            ]);
        }
        t.write(s)?;
    }
    if let Some(s) = recode_sink {
        let base = base_mapping(a.base, alphabet);
        let pair = recode_tables(&base, best)?;
        let mut t = Table::new("optimize", &["input_label", "output_label"]);
        meta(&mut t);
        t.meta("base", base_name(a.base)).meta("target", encode_string(best));
        for (l, out) in pair.forward_table().iter().enumerate() {
            t.row(vec![bits(l as u32, alphabet.n_bits()), bits(out.0, alphabet.n_bits())]);
        }
        t.write(s)?;
    }
    let where_to = sink.describe();
    let mut json = best.to_json();
    json.push('\n');
    sink.write_all(json.as_bytes())?;
    let shown = if kind == CostKind::Mi { -result.best_cost } else { result.best_cost };
    Ok(format!(
        "{kind} {}{} with mapping [{best}] after {} evaluations ({:?}); mapping written to {where_to}",
        if kind == CostKind::Mi { "mutual information " } else { "cost " },
        num(shown),
        result.evaluated,
        result.method,
    ))
}

fn rates(a: RatesArgs) -> Result<String> {
    check_preset(a.preset, &[Preset::Fig5], "rates")?;
    let alphabet = alphabet(a.alphabet)?;
    let c = channel(a.model, alphabet.n_bits(), a.epsilon)?;
    let clean = channel(a.model, alphabet.n_bits(), 0.0)?;
    let q = QuantizerParams::new(alphabet, check_delta(a.delta)?).context("invalid quantizer")?;
    let snrs = snr_grid(a.snr_start, a.snr_stop, a.snr_step)?;
    let opts = search_options(&a.search, false);
    relmap::enumerate_mappings(alphabet, opts.max_bits).context("cannot search this word width")?;
    let sink = Sink::open(a.output.as_deref())?;

    let tc = Mapping::twos_complement(alphabet);
    let sm = Mapping::sign_magnitude(alphabet);
    let template = CostTemplate::new(CostKind::Mi, q, c.clone());
    let mut t = Table::new(
        "rates",
        &["snr_db", "mi_2c", "mi_sm", "mi_optimized", "mi_reliable", "optimized_encode"],
    );
    t.meta("n_bits", alphabet.n_bits())
        .meta("n_frac", alphabet.n_frac())
        .meta("model", FaultModel::from(a.model))
        .meta("epsilon", a.epsilon)
        .meta("delta", a.delta)
        .meta("unit", "bits per channel use");
    if let Some(p) = a.preset {
        t.meta("preset", format!("{p:?}").to_lowercase());
    }
    for &snr in &snrs {
        let pdc = ConditionalPmfs::exact(&q, &AwgnParams::from_snr_db(snr)?);
        let mi = |m: &Mapping, ch: &CrossoverMatrix| -> Result<f64> {
            Ok(mutual_information(&compound_crossover(m, &pdc, ch)?))
        };
        let best = optimize(&template.at_snr(snr)?, &opts)?;
        t.row(vec![
            coord(snr),
            num(mi(&tc, &c)?),
            num(mi(&sm, &c)?),
            num(-best.best_cost),
            num(mi(&tc, &clean)?),
            encode_string(&best.best),
        ]);
    }
    let where_to = sink.describe();
    t.write(sink)?;
    Ok(format!("wrote rates at {} SNR points to {where_to}", snrs.len()))
}

struct BerDefaults {
    delta: f64,
    epsilon: &'static [f64],
    snr: (f64, f64, f64),
    cost: CostKind,
}

fn ber_defaults(scheme: Scheme) -> BerDefaults {
    match scheme {
        Scheme::Repetition => BerDefaults {
            delta: 0.2,
            epsilon: &[1e-2, 1e-3],
            snr: (0.0, 12.0, 1.0),
            cost: CostKind::Rep,
        },
        Scheme::Convolutional => BerDefaults {
            delta: 0.6,
            epsilon: &[1e-1, 1e-2],
            snr: (-1.0, 5.0, 0.5),
            cost: CostKind::Msbe,
        },
    }
}

fn ber(a: BerArgs) -> Result<String> {
    check_preset(a.preset, &[Preset::Fig6, Preset::Fig7], "ber")?;
    let from_preset = match a.preset {
        Some(Preset::Fig6) => Some(SchemeArg::Rep),
        Some(Preset::Fig7) => Some(SchemeArg::Conv),
        _ => None,
    };
    let scheme_arg = match (a.scheme, from_preset) {
        (Some(s), Some(p)) if s != p => bail!("--scheme {} contradicts --preset {}", format!("{s:?}").to_lowercase(), format!("{:?}", a.preset.unwrap()).to_lowercase()),
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => bail!("--scheme rep|conv (or --preset fig6|fig7) is required"),
    };
    let scheme = match scheme_arg {
        SchemeArg::Rep => Scheme::Repetition,
        SchemeArg::Conv => Scheme::Convolutional,
    };
    let defaults = ber_defaults(scheme);
    let alphabet = alphabet(a.alphabet)?;
    let delta = check_delta(a.delta.unwrap_or(defaults.delta))?;
    let q = QuantizerParams::new(alphabet, delta).context("invalid quantizer")?;
    let epsilons: Vec<f64> = a.epsilon.clone().unwrap_or_else(|| defaults.epsilon.to_vec());
    ensure!(!epsilons.is_empty(), "--epsilon needs at least one value");
    let channels = epsilons
        .iter()
        .map(|&e| channel(a.model, alphabet.n_bits(), e))
        .collect::<Result<Vec<_>>>()?;
    let snrs = snr_grid(
        a.snr_start.unwrap_or(defaults.snr.0),
        a.snr_stop.unwrap_or(defaults.snr.1),
        a.snr_step.unwrap_or(defaults.snr.2),
    )?;
    ensure!(a.frame_bits > 0, "invalid --frame-bits 0: frames need at least one bit");
    ensure!(a.max_bits > 0, "invalid --max-bits 0: must be positive");
    ensure!(a.min_bits <= a.max_bits, "invalid --min-bits {}: exceeds --max-bits {}", a.min_bits, a.max_bits);
    let cost = a.cost.map(CostKind::from).unwrap_or(defaults.cost);
    ensure!(!a.mapping.is_empty(), "--mapping needs at least one entry");
    let choices = a
        .mapping
        .iter()
        .map(|m| match m.as_str() {
            "2c" => Ok((m.clone(), MappingChoice::TwosComplement)),
            "sm" => Ok((m.clone(), MappingChoice::SignMagnitude)),
            "optimized" => Ok((format!("{cost}-optimized"), MappingChoice::Optimized(cost))),
            path => {
                let mapping = load_mapping(Path::new(path))?;
                ensure!(
                    mapping.alphabet() == alphabet,
                    "{path}: mapping alphabet does not match --n-bits/--n-frac"
                );
                Ok((path.to_string(), MappingChoice::Fixed(mapping)))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let opts = search_options(&a.search, false);
    if choices.iter().any(|(_, c)| matches!(c, MappingChoice::Optimized(_))) {
        relmap::enumerate_mappings(alphabet, opts.max_bits).context("cannot search this word width")?;
    }
    fs::create_dir_all(&a.output_dir)
        .with_context(|| format!("cannot create output directory {}", a.output_dir.display()))?;
    let files: Vec<PathBuf> = epsilons
        .iter()
        .map(|e| a.output_dir.join(format!("ber_{scheme}_eps{e}.csv")))
        .collect();
    let sinks = files.iter().map(|f| Sink::open(Some(f))).collect::<Result<Vec<_>>>()?;

    let mut base = LinkConfig::new(scheme, q, None, AwgnParams::from_snr_db(snrs[0])?);
    base.n_info_bits = a.frame_bits;
    base.seed = a.seed;
    base.stop = StopRule {
        target_errors: a.target_errors,
        min_bits: a.min_bits,
        max_bits: a.max_bits,
    };

    for ((eps, c), sink) in epsilons.iter().zip(&channels).zip(sinks) {
        let mut t = Table::new("ber", &["mapping", "snr_db", "ber", "errors", "bits", "ci95", "encode"]);
        t.meta("scheme", scheme)
            .meta("n_bits", alphabet.n_bits())
            .meta("n_frac", alphabet.n_frac())
            .meta("model", FaultModel::from(a.model))
            .meta("epsilon", *eps)
            .meta("delta", delta)
            .meta("optimized_cost", cost)
            .meta("seed", a.seed)
            .meta("frame_bits", a.frame_bits)
            .meta("target_errors", a.target_errors)
            .meta("min_bits", a.min_bits)
            .meta("max_bits", a.max_bits);
        if let Some(p) = a.preset {
            t.meta("preset", format!("{p:?}").to_lowercase());
        }
        for (name, choice) in &choices {
            for (p, m) in ber_curve(&base, c, choice, &snrs, &opts)? {
                t.row(vec![
                    name.clone(),
                    coord(p.snr_db),
                    num(p.ber),
                    p.errors.to_string(),
                    p.bits.to_string(),
                    num(p.ci95),
                    encode_string(&m),
                ]);
            }
        }
        t.write(sink)?;
    }
    let names: Vec<String> = files.iter().map(|f| f.display().to_string()).collect();
    Ok(format!(
        "simulated {} mappings at {} SNR points; wrote {}",
        choices.len(),
        snrs.len(),
        names.join(", ")
    ))
}

fn recode(a: RecodeArgs) -> Result<String> {
    let target = load_mapping(&a.target)?;
    let sink = Sink::open(a.output.as_deref())?;
    let alphabet = target.alphabet();
    let base = base_mapping(a.base, alphabet);
    let pair = recode_tables(&base, &target)?;
    let n = alphabet.n_bits();
    let mut t = Table::new("recode", &["input_label", "output_label"]);
    t.meta("base", base_name(a.base))
        .meta("target", encode_string(&target))
        .meta("n_bits", n)
        .meta("n_frac", alphabet.n_frac());
    for (l, out) in pair.forward_table().iter().enumerate() {
        t.row(vec![bits(l as u32, n), bits(out.0, n)]);
    }
    let where_to = sink.describe();
    t.write(sink)?;
    Ok(format!("wrote {}-entry recoding table to {where_to}", t.len()))
}
