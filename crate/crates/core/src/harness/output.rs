//! Result serialization: per-scheme timestep CSVs, per-drop and sweep
//! summary CSVs, and a TOML run manifest.
//!
//! Files are assembled in a hidden partial directory and renamed into place
//! only when the run completes, so aborted runs never leave partial
//! results behind.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::harness::config::SimConfig;
use crate::harness::run::{
    DropOutput, RunResult, Scheme, SnrDef, SweepSummary, TimestepRecord,
};
use crate::harness::schedule::OverheadModel;
use crate::{Error, Result};

pub const TIMESTEP_HEADER: &str = "drop,scheme,t_s,ptx_dbm,m_y,m_z,theta_true_deg,phi_true_deg,theta_pred_deg,phi_pred_deg,snr_db,rate_bpshz";
pub const DROPS_HEADER: &str = "drop,scheme,ptx_dbm,gamma,eff_rate_bpshz,samples,blocks,lost_blocks,entry_angle_deg,exit_angle_deg,duration_s";
pub const SUMMARY_HEADER: &str = "scheme,ptx_dbm,gamma,mean_eff_rate_bpshz,ci95";

fn snr_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Overhead fraction applied to a scheme's instantaneous rate.
pub fn scheme_gamma(model: &OverheadModel, scheme: Scheme) -> f64 {
    match scheme {
        Scheme::Proposed => model.gamma_proposed,
        Scheme::Fs => model.gamma_fs,
        Scheme::FullOpt => model.gamma_fullopt,
    }
}

/// One timestep CSV row under the chosen SNR definition.
pub fn timestep_row(rec: &TimestepRecord, gamma: f64, def: SnrDef) -> String {
    let snr = match def {
        SnrDef::Noiseless => rec.snr_noiseless,
        SnrDef::Noisy => rec.snr_noisy,
    };
    let rate = (1.0 - gamma) * (1.0 + snr).log2();
    let (m_y, m_z) = rec
        .codeword
        .map_or((String::new(), String::new()), |cw| {
            (cw.m_y.to_string(), cw.m_z.to_string())
        });
    let (pred_t, pred_p) = rec.pred_dir.map_or((String::new(), String::new()), |d| {
        (
            format!("{:.6}", d.theta_deg()),
            format!("{:.6}", d.phi_deg()),
        )
    });
    format!(
        "{},{},{:.9},{},{},{},{:.6},{:.6},{},{},{:.6},{:.6}",
        rec.drop,
        rec.scheme,
        rec.t,
        rec.ptx_dbm,
        m_y,
        m_z,
        rec.true_dir.theta_deg(),
        rec.true_dir.phi_deg(),
        pred_t,
        pred_p,
        snr_db(snr),
        rate
    )
}

/// Full timestep CSV (header plus rows) as a string; used for stdout traces
/// and determinism checks.
pub fn timestep_csv(records: &[TimestepRecord], model: &OverheadModel, def: SnrDef) -> String {
    let mut out = String::from(TIMESTEP_HEADER);
    out.push('\n');
    for rec in records {
        out.push_str(&timestep_row(rec, scheme_gamma(model, rec.scheme), def));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ManifestDerived {
    wavelength_m: f64,
    g_bar: f64,
    sigma2_w: f64,
    eta_proposed: usize,
    eta_fs: usize,
    t_ide_proposed_s: f64,
    t_ide_fs_s: f64,
    t_ce_s: f64,
    t_d_s: f64,
    gamma_proposed: f64,
    gamma_fs: f64,
    gamma_fullopt: f64,
    n_ce_b: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    main_lobe_cache_key: Option<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    seed: u64,
    schemes: Vec<&'static str>,
    snr_def: &'static str,
    derived: ManifestDerived,
    config: &'a crate::harness::config::SimConfigFile,
}

/// Renders the run manifest.
pub fn manifest_toml(
    cfg: &SimConfig,
    schemes: &[Scheme],
    def: SnrDef,
    cache_key: Option<String>,
) -> Result<String> {
    let model = cfg.overhead_model()?;
    let proposed = cfg.schedule_proposed()?;
    let fs = cfg.schedule_fs()?;
    let manifest = Manifest {
        seed: cfg.seed,
        schemes: schemes.iter().map(|s| s.as_str()).collect(),
        snr_def: def.as_str(),
        derived: ManifestDerived {
            wavelength_m: cfg.wavelength,
            g_bar: cfg.codebook.g_bar(),
            sigma2_w: cfg.sigma2,
            eta_proposed: proposed.eta,
            eta_fs: fs.eta,
            t_ide_proposed_s: proposed.t_ide,
            t_ide_fs_s: fs.t_ide,
            t_ce_s: proposed.t_ce,
            t_d_s: proposed.t_d,
            gamma_proposed: model.gamma_proposed,
            gamma_fs: model.gamma_fs,
            gamma_fullopt: model.gamma_fullopt,
            n_ce_b: model.n_ce_b,
            main_lobe_cache_key: cache_key,
        },
        config: &cfg.file,
    };
    toml::to_string_pretty(&manifest).map_err(|e| Error::Config(format!("manifest: {e}")))
}

fn drop_row(d: &crate::harness::run::DropSummary, def: SnrDef) -> String {
    format!(
        "{},{},{},{:.9},{:.6},{},{},{},{:.6},{:.6},{:.6}",
        d.drop,
        d.scheme,
        d.ptx_dbm,
        d.gamma_overhead,
        d.eff_rate(def),
        d.samples,
        d.blocks,
        d.lost_blocks,
        d.entry_angle_deg,
        d.exit_angle_deg,
        d.duration_s
    )
}

fn summary_row(s: &SweepSummary) -> String {
    format!(
        "{},{},{:.9},{:.6},{:.6}",
        s.scheme, s.ptx_dbm, s.gamma_overhead, s.mean_eff_rate, s.ci95
    )
}

/// Streaming writer for sweep outputs.
pub struct SweepWriter {
    out_dir: PathBuf,
    partial: PathBuf,
    timestep_files: Vec<(Scheme, BufWriter<File>)>,
    drops_file: BufWriter<File>,
    gammas: Vec<(Scheme, f64)>,
    snr_def: SnrDef,
    finalized: bool,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path.display().to_string(), e)
}

impl SweepWriter {
    pub fn create(
        out_dir: &Path,
        schemes: &[Scheme],
        snr_def: SnrDef,
        model: &OverheadModel,
    ) -> Result<Self> {
        let partial = out_dir.join(format!(".partial-{}", std::process::id()));
        fs::create_dir_all(&partial).map_err(io_err(&partial))?;
        let mut timestep_files = Vec::new();
        for &scheme in schemes {
            let path = partial.join(format!("{scheme}.csv"));
            let mut f = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
            writeln!(f, "{TIMESTEP_HEADER}").map_err(io_err(&path))?;
            timestep_files.push((scheme, f));
        }
        let drops_path = partial.join("drops.csv");
        let mut drops_file =
            BufWriter::new(File::create(&drops_path).map_err(io_err(&drops_path))?);
        writeln!(drops_file, "{DROPS_HEADER}").map_err(io_err(&drops_path))?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            partial,
            timestep_files,
            drops_file,
            gammas: schemes
                .iter()
                .map(|&s| (s, scheme_gamma(model, s)))
                .collect(),
            snr_def,
            finalized: false,
        })
    }

    pub fn write_drop(&mut self, out: &DropOutput) -> Result<()> {
        let err = |e| Error::io(self.partial.display().to_string(), e);
        for rec in &out.records {
            let gamma = self
                .gammas
                .iter()
                .find(|(s, _)| *s == rec.scheme)
                .map(|&(_, g)| g)
                .unwrap_or(0.0);
            let row = timestep_row(rec, gamma, self.snr_def);
            let file = self
                .timestep_files
                .iter_mut()
                .find(|(s, _)| *s == rec.scheme);
            if let Some((_, f)) = file {
                writeln!(f, "{row}").map_err(err)?;
            }
        }
        for d in &out.summaries {
            writeln!(self.drops_file, "{}", drop_row(d, self.snr_def)).map_err(err)?;
        }
        Ok(())
    }

    /// Writes the summary and manifest, then moves everything into the
    /// output directory. Returns the final paths.
    pub fn finalize(
        mut self,
        result: &RunResult,
        cfg: &SimConfig,
        cache_key: Option<String>,
    ) -> Result<Vec<PathBuf>> {
        let err = |e| Error::io(self.partial.display().to_string(), e);
        for (_, f) in &mut self.timestep_files {
            f.flush().map_err(err)?;
        }
        self.drops_file.flush().map_err(err)?;

        let summary_path = self.partial.join("summary.csv");
        {
            let mut f = BufWriter::new(File::create(&summary_path).map_err(io_err(&summary_path))?);
            writeln!(f, "{SUMMARY_HEADER}").map_err(io_err(&summary_path))?;
            for s in result.summaries(self.snr_def) {
                writeln!(f, "{}", summary_row(&s)).map_err(io_err(&summary_path))?;
            }
            f.flush().map_err(io_err(&summary_path))?;
        }
        let schemes: Vec<Scheme> = self.timestep_files.iter().map(|&(s, _)| s).collect();
        let manifest_path = self.partial.join("manifest.toml");
        fs::write(
            &manifest_path,
            manifest_toml(cfg, &schemes, self.snr_def, cache_key)?,
        )
        .map_err(io_err(&manifest_path))?;

        // Close timestep handles before renaming.
        self.timestep_files.clear();

        let mut final_paths = Vec::new();
        let mut names: Vec<String> = schemes.iter().map(|s| format!("{s}.csv")).collect();
        names.push("drops.csv".into());
        names.push("summary.csv".into());
        names.push("manifest.toml".into());
        for name in names {
            let from = self.partial.join(&name);
            let to = self.out_dir.join(&name);
            fs::rename(&from, &to).map_err(io_err(&to))?;
            final_paths.push(to);
        }
        fs::remove_dir_all(&self.partial).ok();
        self.finalized = true;
        Ok(final_paths)
    }
}

impl Drop for SweepWriter {
    fn drop(&mut self) {
        if !self.finalized {
            fs::remove_dir_all(&self.partial).ok();
        }
    }
}
