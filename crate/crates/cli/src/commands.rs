use std::path::Path;

use cia_core::bounds::check_outer_bounds;
use cia_core::channel::{sample_channel, ChannelRealization, CompoundChannelConfig};
use cia_core::codec::{SubStreamGrid, XScheme, DEFAULT_CODEWORD_LEN, DEFAULT_EPS};
use cia_core::constellation::{enumeration_size, AlignedConstellation, DEFAULT_CONSTELLATION_CAP};
use cia_core::dof::{self, RationalValue};
use cia_core::hybrid::{orthogonality_max_residual, HybridConfig, HybridScheme};
use cia_core::monomial::{
    basis_size, build_basis_capped, exact_interference_count, kappa, verify_alignment, Dims,
    DEFAULT_MONOMIAL_CAP,
};
use cia_core::rng::{stream_rng, CHECK_STREAM};
use cia_core::sim::{
    prepare_hybrid, run_point, run_sweep, summarize, HybridInstance, SchemeInstance, SimReport,
    SweepConfig, XInstance,
};
use cia_core::ScalarField;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    AlignArgs, BoundsArgs, ChannelArgs, Cli, Command, ConstellationArgs, Format, HybridArgs,
    ParamsArgs, Scheme, SweepArgs,
};
use crate::output::{csv_bytes, emit, json_bytes, num, opt_num, with_meta, Meta};
use crate::CliError;

const DEFAULT_SEED: u64 = 0;
const DEFAULT_TRIALS: usize = 10;
/// Symbol times used by the zero-forcing leakage check.
const CLEAN_CHECK_LEN: usize = 256;

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(CliError::internal)?;
    }
    let ctx = Context {
        config: cli.config.as_deref(),
        seed: cli.seed,
        out: cli.out.as_deref(),
        format: cli.format,
    };
    match cli.command {
        Command::GenChannel(a) => gen_channel(&ctx, a),
        Command::AlignCheck(a) => align_check(&ctx, a),
        Command::Params(a) => params(&ctx, a),
        Command::Constellation(a) => constellation(&ctx, a),
        Command::Simulate(a) => simulate(&ctx, a, false),
        Command::DofSweep(a) => simulate(&ctx, a, true),
        Command::Hybrid(a) => hybrid(&ctx, a),
        Command::Bounds(a) => bounds(&ctx, a),
    }
}

struct Context<'a> {
    config: Option<&'a Path>,
    seed: Option<u64>,
    out: Option<&'a Path>,
    format: Option<Format>,
}

impl Context<'_> {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn load<T: DeserializeOwned + Default>(&self) -> Result<T, CliError> {
        match self.config {
            None => Ok(T::default()),
            Some(path) => read_json(path),
        }
    }

    fn emit_json<T: Serialize>(&self, meta: &Meta, body: &T) -> Result<(), CliError> {
        emit(self.out, &json_bytes(&with_meta(meta, body)?)?)
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(CliError::internal)
}

fn required<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::config(format!("missing required parameter {name}")))
}

/// One exponent cap per receiver; a single value applies to all.
fn n_per_receiver(n: Option<Vec<u32>>, receivers: usize) -> Result<Vec<u32>, CliError> {
    let n = required(n, "n")?;
    match n.len() {
        1 => Ok(vec![n[0]; receivers]),
        len if len == receivers => Ok(n),
        len => Err(CliError::config(format!(
            "{len} exponent caps for {receivers} receivers"
        ))),
    }
}

fn resolve_channel(args: &ChannelArgs, seed: u64) -> Result<ChannelRealization, CliError> {
    if let Some(path) = &args.channel {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        return Ok(ChannelRealization::from_json(&text)?);
    }
    let mut cfg = CompoundChannelConfig::new(
        required(args.antennas, "M")?,
        required(args.states.clone(), "J")?,
        args.field.unwrap_or(ScalarField::Real),
        seed,
    );
    if let Some(floor) = args.magnitude_floor {
        cfg.magnitude_floor = floor;
    }
    Ok(sample_channel(&cfg)?)
}

fn gen_channel(ctx: &Context, mut args: ChannelArgs) -> Result<(), CliError> {
    args.merge(ctx.load()?);
    if args.channel.is_some() {
        return Err(CliError::config(
            "gen-channel samples a new channel; drop `channel`",
        ));
    }
    let ch = resolve_channel(&args, ctx.seed())?;
    let mut file = ch.to_file();
    let meta = Meta::new(Some(ctx.seed()), to_value(ch.config())?);
    file.meta = Some(to_value(&meta)?);
    let mut bytes = serde_json::to_vec_pretty(&file).map_err(CliError::internal)?;
    bytes.push(b'\n');
    emit(ctx.out, &bytes)
}

#[derive(Serialize)]
struct Expected {
    favorite: u128,
    basis_size: u128,
    kappa: Vec<u128>,
    exact_union: Vec<u128>,
}

fn align_check(ctx: &Context, mut args: AlignArgs) -> Result<(), CliError> {
    args.merge(ctx.load()?);
    let ch = resolve_channel(&args.channel_args(), ctx.seed())?;
    let dims = Dims::from(ch.config());
    let k = dims.receivers();
    let n = n_per_receiver(args.n.clone(), k)?;
    let bases = (0..k)
        .map(|r| build_basis_capped(&dims, r, n[r], DEFAULT_MONOMIAL_CAP))
        .collect::<Result<Vec<_>, _>>()?;
    let receivers: Vec<usize> = match args.receiver {
        Some(r) if r >= k => {
            return Err(CliError::config(format!(
                "receiver {r} out of range (K = {k})"
            )))
        }
        Some(r) => vec![r],
        None => (0..k).collect(),
    };
    let mut reports = Vec::new();
    let mut holds = true;
    let mut collisions = 0;
    for &r in &receivers {
        let states: Vec<usize> = match args.state {
            Some(s) => vec![s],
            None => (0..dims.states[r]).collect(),
        };
        let l = basis_size(n[r], &dims, r)?;
        let others: Vec<usize> = (0..k).filter(|&q| q != r).collect();
        let expected = Expected {
            favorite: dims.antennas as u128 * l,
            basis_size: l,
            kappa: others
                .iter()
                .map(|&q| kappa(n[q], &dims, q))
                .collect::<Result<_, _>>()?,
            exact_union: others
                .iter()
                .map(|&q| exact_interference_count(n[q], &dims, q))
                .collect::<Result<_, _>>()?,
        };
        for s in states {
            let rep = verify_alignment(&ch, &bases, r, s)?;
            holds &= rep.holds();
            collisions += rep.numeric_collisions;
            let mut v = to_value(&rep)?;
            v["expected"] = to_value(&expected)?;
            reports.push(v);
        }
    }
    let meta = Meta::new(
        Some(ch.config().seed),
        json!({ "channel": ch.config(), "n": n, "receiver": args.receiver, "state": args.state }),
    );
    ctx.emit_json(
        &meta,
        &json!({ "holds": holds, "numeric_collisions": collisions, "reports": reports }),
    )?;
    if !holds {
        return Err(CliError::diagnostic("alignment properties violated"));
    }
    if collisions > 0 {
        return Err(CliError::diagnostic(format!(
            "{collisions} numeric coefficient collisions"
        )));
    }
    Ok(())
}

struct XSetup {
    ch: ChannelRealization,
    scheme: XScheme,
    params: cia_core::codec::CodecParams,
}

fn x_setup(ctx: &Context, args: &ParamsArgs) -> Result<XSetup, CliError> {
    let ch = resolve_channel(&args.channel_args(), ctx.seed())?;
    let dims = Dims::from(ch.config());
    let n = n_per_receiver(args.n.clone(), dims.receivers())?;
    let scheme = XScheme::new(dims, &n, DEFAULT_MONOMIAL_CAP)?;
    let eps = args.eps.unwrap_or(DEFAULT_EPS);
    let power = required(args.power, "P")?;
    let t = args.codeword_len.unwrap_or(DEFAULT_CODEWORD_LEN);
    let params = match args.q {
        Some(q) => scheme.params_with_q(&ch, eps, power, t, q)?,
        None => scheme.params(&ch, eps, power, t)?,
    };
    Ok(XSetup { ch, scheme, params })
}

fn params(ctx: &Context, mut args: ParamsArgs) -> Result<(), CliError> {
    args.merge(ctx.load()?);
    let XSetup { ch, params, .. } = x_setup(ctx, &args)?;
    let reference = dof::dof_reference(params.antennas, params.receivers)?;
    let mut body = to_value(&params)?;
    body["nominal_dof"] = to_value(&RationalValue(params.nominal_dof()?))?;
    body["nominal_profile"] = to_value(
        &params
            .nominal_profile()?
            .into_iter()
            .map(RationalValue)
            .collect::<Vec<_>>(),
    )?;
    body["reference_dof"] = to_value(&reference.value)?;
    body["power_bound"] = json!(params.power_bound());
    let meta = Meta::new(
        Some(ch.config().seed),
        to_value(&args_value(&args, ch.config()))?,
    );
    ctx.emit_json(&meta, &body)
}

fn args_value(args: &ParamsArgs, cfg: &CompoundChannelConfig) -> Value {
    json!({
        "channel": cfg,
        "n": args.n,
        "eps": args.eps.unwrap_or(DEFAULT_EPS),
        "P": args.power,
        "T": args.codeword_len.unwrap_or(DEFAULT_CODEWORD_LEN),
        "Q": args.q,
    })
}

fn constellation(ctx: &Context, mut args: ConstellationArgs) -> Result<(), CliError> {
    args.merge(ctx.load()?);
    let pargs = args.params_args();
    let XSetup { ch, scheme, params } = x_setup(ctx, &pargs)?;
    let r = args.receiver.unwrap_or(0);
    let s = args.state.unwrap_or(0);
    let cap = args.cap.unwrap_or(DEFAULT_CONSTELLATION_CAP);
    let c = scheme.received_constellation(&ch, &params, r, s, cap)?;
    let dmin = if c.len() >= 2 {
        Some(c.min_distance()?)
    } else {
        None
    };
    let mut config = args_value(&pargs, ch.config());
    config["receiver"] = json!(r);
    config["state"] = json!(s);
    config["cap"] = json!(cap);
    let meta = Meta::new(Some(ch.config().seed), config);
    match ctx.format(Format::Csv) {
        Format::Json => {
            let points: Vec<Value> = c
                .values()
                .iter()
                .zip(c.labels())
                .map(|(v, &label)| json!({ "value": [v.re, v.im], "label": label, "digits": c.digits(label) }))
                .collect();
            ctx.emit_json(
                &meta,
                &json!({
                    "receiver": r, "state": s, "Q": params.q, "lambda": params.lambda,
                    "dmin": dmin, "coefficients": c.coefficients(), "points": points,
                }),
            )
        }
        Format::Csv => emit(
            ctx.out,
            &constellation_csv(&meta, &c, params.q, params.lambda, dmin)?,
        ),
    }
}

fn constellation_csv(
    meta: &Meta,
    c: &AlignedConstellation,
    q: i64,
    lambda: f64,
    dmin: Option<f64>,
) -> Result<Vec<u8>, CliError> {
    let complex = c.field == ScalarField::Complex;
    let mut comments = vec![format!(
        "receiver={} state={} Q={q} lambda={} points={} dmin={}",
        c.receiver,
        c.state,
        num(lambda),
        c.len(),
        opt_num(dmin)
    )];
    for (i, e) in c.coefficients().iter().enumerate() {
        comments.push(format!(
            "u{i}: {} value={} half_width={} favorite={} members={:?}",
            e.monomial,
            if complex {
                format!("{}{:+}i", e.value.re, e.value.im)
            } else {
                num(e.value.re)
            },
            e.half_width,
            e.favorite,
            e.members
        ));
    }
    let mut header = vec!["value".to_string()];
    if complex {
        header.push("value_im".into());
    }
    header.push("label".into());
    header.extend((0..c.coefficients().len()).map(|i| format!("u{i}")));
    let rows: Vec<Vec<String>> = c
        .values()
        .iter()
        .zip(c.labels())
        .map(|(v, &label)| {
            let mut row = vec![num(v.re)];
            if complex {
                row.push(num(v.im));
            }
            row.push(label.to_string());
            row.extend(c.digits(label).into_iter().map(|d| d.to_string()));
            row
        })
        .collect();
    csv_bytes(meta, &comments, &header, &rows)
}

fn sweep_config(ctx: &Context, args: &SweepArgs, single: bool) -> Result<SweepConfig, CliError> {
    let instance_flags = args.scheme.is_some()
        || args.antennas.is_some()
        || args.states.is_some()
        || args.last_states.is_some()
        || args.n.is_some()
        || args.eps.is_some()
        || args.field.is_some()
        || args.q.is_some();
    let mut cfg = match ctx.config {
        Some(path) => {
            if instance_flags {
                return Err(CliError::config(
                    "instance flags cannot be combined with --config; edit the file instead",
                ));
            }
            read_json::<SweepConfig>(path)?
        }
        None => {
            let scheme = args.scheme.unwrap_or(Scheme::X);
            let antennas = required(args.antennas, "M")?;
            let eps = args.eps.unwrap_or(DEFAULT_EPS);
            let instance = match scheme {
                Scheme::X => {
                    let states = required(args.states.clone(), "J")?;
                    let n = n_per_receiver(args.n.clone(), states.len())?;
                    SchemeInstance::X(XInstance {
                        antennas,
                        states,
                        n,
                        eps,
                        field: args.field.unwrap_or(ScalarField::Real),
                        magnitude_floor: cia_core::channel::DEFAULT_MAGNITUDE_FLOOR,
                        q_override: args.q,
                    })
                }
                Scheme::Hybrid => {
                    if args.field == Some(ScalarField::Complex) {
                        return Err(CliError::config("the hybrid scheme is real-valued only"));
                    }
                    let n = required(args.n.clone(), "n")?;
                    if n.len() != 1 {
                        return Err(CliError::config("the hybrid scheme takes a single n"));
                    }
                    SchemeInstance::Hybrid(HybridInstance {
                        antennas,
                        last_states: required(args.last_states, "JM")?,
                        n: n[0],
                        eps,
                        q_override: args.q,
                    })
                }
            };
            let powers = required(args.powers.clone(), "P")?;
            SweepConfig::new(instance, powers, DEFAULT_TRIALS, DEFAULT_SEED)
        }
    };
    if let Some(seed) = ctx.seed {
        cfg.seed = seed;
    }
    if let Some(p) = &args.powers {
        cfg.powers = p.clone();
    }
    if let Some(t) = args.trials {
        cfg.trials_per_power = t;
    }
    if let Some(t) = args.symbols {
        cfg.symbols_per_trial = t;
    }
    if args.fixed_channel {
        cfg.fixed_channel = true;
    }
    if let Some(c) = args.cap {
        cfg.constellation_cap = c;
    }
    if let Some(s) = args.noise_scale {
        cfg.noise_scale = s;
    }
    if single && cfg.powers.len() != 1 {
        return Err(CliError::config("simulate takes exactly one power level"));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(ctx: &Context, args: SweepArgs, sweep: bool) -> Result<(), CliError> {
    let cfg = sweep_config(ctx, &args, !sweep)?;
    let report = if sweep {
        run_sweep(&cfg)?
    } else {
        summarize(&cfg, vec![run_point(&cfg, 0, cfg.powers[0])?])?
    };
    let meta = Meta::new(Some(cfg.seed), to_value(&cfg)?);
    let summary = with_meta(&meta, &report)?;
    let main = match ctx.format(Format::Csv) {
        Format::Json => json_bytes(&summary)?,
        Format::Csv => report_csv(&meta, &cfg, &report)?,
    };
    let summary_bytes = match &args.summary {
        Some(_) => Some(json_bytes(&summary)?),
        None => None,
    };
    emit(ctx.out, &main)?;
    if let (Some(path), Some(bytes)) = (&args.summary, summary_bytes) {
        emit(Some(path), &bytes)?;
    }
    Ok(())
}

fn report_csv(meta: &Meta, cfg: &SweepConfig, report: &SimReport) -> Result<Vec<u8>, CliError> {
    let comments = vec![
        format!("nominal_dof={}", report.nominal_dof),
        format!("reference_dof={}", report.reference_dof),
        match (&report.fit, &report.fit_error) {
            (Some(f), _) => format!("fitted_dof={} points_used={}", num(f.slope), f.points_used),
            (None, Some(e)) => format!("fitted_dof=none ({e})"),
            (None, None) => "fitted_dof=none".to_string(),
        },
        format!("outer_bounds_pass={}", report.bound_report.passes()),
    ];
    let header: Vec<String> = [
        "P",
        cfg.instance.field().dof_scale_name(),
        "Q",
        "dmin",
        "ser",
        "ser_std_err",
        "bits_ok",
        "pe_bound",
        "within_pe_bound",
        "trials",
        "symbols",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.power),
                num(r.scale),
                r.q.to_string(),
                opt_num(r.dmin),
                num(r.ser),
                num(r.ser_std_err),
                num(r.bits_ok),
                num(r.pe_bound),
                r.within_pe_bound.to_string(),
                r.trials.to_string(),
                r.symbols.to_string(),
            ]
        })
        .collect();
    csv_bytes(meta, &comments, &header, &rows)
}

fn hybrid(ctx: &Context, mut args: HybridArgs) -> Result<(), CliError> {
    args.merge(ctx.load()?);
    let seed = ctx.seed();
    let instance = HybridInstance {
        antennas: required(args.antennas, "M")?,
        last_states: required(args.last_states, "JM")?,
        n: required(args.n, "n")?,
        eps: args.eps.unwrap_or(DEFAULT_EPS),
        q_override: args.q,
    };
    let power = required(args.power, "P")?;
    let t = args.symbols.unwrap_or(DEFAULT_CODEWORD_LEN);
    let cap = args.cap.unwrap_or(DEFAULT_CONSTELLATION_CAP);
    let cfg = HybridConfig {
        antennas: instance.antennas,
        last_states: instance.last_states,
        n: instance.n,
        seed,
    };
    let (ch, scheme) = HybridScheme::from_config(&cfg, DEFAULT_MONOMIAL_CAP)?;
    let params = scheme.params(instance.eps, power, t, instance.q_override)?;
    let orthogonality = orthogonality_max_residual(&ch, &scheme.precoders)?;

    let mut rng = stream_rng(seed, CHECK_STREAM);
    let grid = SubStreamGrid::random(
        scheme.stream_count(),
        params.q,
        CLEAN_CHECK_LEN.min(t),
        &mut rng,
    );
    let clean = (0..instance.antennas - 1)
        .map(|r| scheme.receiver_clean_check(&ch, &params, r, &grid))
        .collect::<Result<Vec<_>, _>>()?;

    let mut counts = Vec::new();
    for r in 0..instance.antennas {
        for s in 0..ch.states(r)? {
            let coeffs = scheme.received_coefficients(&ch, params.q, r, s, DEFAULT_MONOMIAL_CAP)?;
            counts.push(json!({
                "receiver": r,
                "state": s,
                "coefficients": coeffs.len(),
                "favorites": coeffs.iter().filter(|e| e.favorite).count(),
                "points": enumeration_size(&coeffs),
            }));
        }
    }
    let link = prepare_hybrid(&instance, &ch, &scheme, power, cap)?;
    let dmin = link.min_distance()?;

    let scheme_instance = SchemeInstance::Hybrid(instance.clone());
    let profile: Vec<f64> = params
        .nominal_profile()?
        .iter()
        .map(dof::rational_to_f64)
        .collect();
    let states = scheme_instance.states();
    let bound_report = check_outer_bounds(&profile, instance.antennas, Some(&states))?;

    let trials = args.trials.unwrap_or(0);
    let mut sweep_cfg = SweepConfig::new(scheme_instance, vec![power], trials.max(1), seed);
    sweep_cfg.symbols_per_trial = t;
    sweep_cfg.constellation_cap = cap;
    let simulation = if trials > 0 {
        Some(run_point(&sweep_cfg, 0, power)?)
    } else {
        None
    };
    let sweep = match &args.power_grid {
        Some(grid) => {
            let mut c = sweep_cfg.clone();
            c.powers = grid.clone();
            c.trials_per_power = if trials > 0 { trials } else { DEFAULT_TRIALS };
            Some((run_sweep(&c)?, c))
        }
        None => None,
    };

    let meta = Meta::new(
        Some(seed),
        json!({
            "M": instance.antennas, "JM": instance.last_states, "n": instance.n,
            "eps": instance.eps, "P": power, "T": t, "Q": instance.q_override,
            "trials": trials, "P_grid": args.power_grid, "cap": cap,
        }),
    );
    let sweep_json = match (&sweep, &args.csv) {
        (Some((rep, _)), None) => Some(to_value(rep)?),
        (Some((rep, _)), Some(_)) => Some(json!({
            "fitted_dof": rep.fitted_dof, "fit_error": rep.fit_error, "rows": rep.rows.len(),
        })),
        _ => None,
    };
    let body = json!({
        "params": params,
        "ranks": scheme.precoders.ranks,
        "orthogonality_max_residual": orthogonality,
        "clean_check": clean,
        "coefficient_counts": counts,
        "dmin": dmin,
        "nominal_dof": RationalValue(params.nominal_dof()?),
        "reference_dof": RationalValue(dof::hybrid_reference(instance.antennas)?),
        "bound_report": bound_report,
        "simulation": simulation,
        "sweep": sweep_json,
    });
    let main = json_bytes(&with_meta(&meta, &body)?)?;
    let csv = match (&sweep, &args.csv) {
        (Some((rep, c)), Some(_)) => {
            Some(report_csv(&Meta::new(Some(seed), to_value(c)?), c, rep)?)
        }
        _ => None,
    };
    emit(ctx.out, &main)?;
    if let (Some(path), Some(bytes)) = (&args.csv, csv) {
        emit(Some(path), &bytes)?;
    }
    Ok(())
}

fn bounds(ctx: &Context, mut args: BoundsArgs) -> Result<(), CliError> {
    args.merge(ctx.load()?);
    let antennas = required(args.antennas, "M")?;
    let receivers = match (&args.profile, args.receivers) {
        (Some(p), Some(k)) if p.len() != k => {
            return Err(CliError::config(format!(
                "profile has {} entries but K = {k}",
                p.len()
            )))
        }
        (Some(p), _) => p.len(),
        (None, k) => required(k, "K")?,
    };
    let reference = dof::dof_reference(antennas, receivers)?;
    let report = match &args.profile {
        Some(p) => Some(check_outer_bounds(p, antennas, args.states.as_deref())?),
        None => None,
    };
    let meta = Meta::new(
        None,
        json!({ "M": antennas, "K": receivers, "profile": args.profile, "J": args.states }),
    );
    ctx.emit_json(
        &meta,
        &json!({
            "M": antennas,
            "K": receivers,
            "dof": reference.value.to_string(),
            "dof_decimal": reference.value.to_f64(),
            "real_lift": reference.real_lift_bound.to_string(),
            "real_lift_decimal": reference.real_lift_bound.to_f64(),
            "bound_report": report,
        }),
    )?;
    match report {
        Some(r) if !r.passes() => Err(CliError::diagnostic(format!(
            "{} outer-bound violations",
            r.violations
        ))),
        _ => Ok(()),
    }
}
