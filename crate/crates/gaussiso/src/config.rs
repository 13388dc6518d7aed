//! Experiment files: flat sectioned key-value text, one experiment per
//! file.
//!
//! ```text
//! # comment
//! [experiment]
//! kind = isoperimetry
//! dimension = 2
//! seed = 42
//!
//! [axis 1]
//! family = power
//! k = 2
//!
//! [region 1]
//! type = slice
//! lambda = 0.3
//! ```
//!
//! Parsing is total and strict: unknown sections or keys, duplicate
//! keys, malformed numbers, and schema violations all fail with the
//! offending 1-based line number. Every numeric field is a plain
//! unit-free real or integer; lists are whitespace-separated, pair
//! lists additionally use `;` between pairs.

use std::cell::Cell;
use std::path::Path;

use crate::density::{AxisFactor, AxisPotential, ProductDensity};
use crate::error::{Error, Result};
use crate::grid::BoxDomain;
use crate::pde::CoefficientField;
use crate::region::{Profile, RegionSpec, WaveTerm};
use crate::specfun::Tolerance;
use crate::spectral::SigmaProfile;
use crate::transport::{potential_from_map, CubicMap};

/// Which certificate family a file is meant to drive; subcommands
/// cross-check it when present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Transport,
    Isoperimetry,
    Stability,
    Rearrange,
    Pde,
}

impl TaskKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::Transport => "transport",
            TaskKind::Isoperimetry => "isoperimetry",
            TaskKind::Stability => "stability",
            TaskKind::Rearrange => "rearrange",
            TaskKind::Pde => "pde",
        }
    }

    fn parse(s: &str, line: usize) -> Result<Self> {
        match s {
            "transport" => Ok(TaskKind::Transport),
            "isoperimetry" => Ok(TaskKind::Isoperimetry),
            "stability" => Ok(TaskKind::Stability),
            "rearrange" => Ok(TaskKind::Rearrange),
            "pde" => Ok(TaskKind::Pde),
            other => Err(Error::config(
                line,
                format!("unknown experiment kind '{other}'"),
            )),
        }
    }
}

/// One cross-axis weight family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisConfig {
    Gaussian,
    Power { k: f64 },
    Quadratic { beta: f64 },
    CubicMap { alpha: f64 },
}

impl AxisConfig {
    pub fn label(&self) -> String {
        match self {
            AxisConfig::Gaussian => String::from("gaussian"),
            AxisConfig::Power { k } => format!("power-k{k}"),
            AxisConfig::Quadratic { beta } => format!("quadratic-b{beta}"),
            AxisConfig::CubicMap { alpha } => format!("cubic-a{alpha}"),
        }
    }

    /// The axis potential whose weight is `exp(-t^2/2 - B(t))`.
    pub fn potential(&self) -> Result<AxisPotential> {
        match *self {
            AxisConfig::Gaussian => Ok(AxisPotential::gaussian()),
            AxisConfig::Power { k } => AxisPotential::power(k),
            AxisConfig::Quadratic { beta } => AxisPotential::quadratic(beta),
            AxisConfig::CubicMap { alpha } => {
                potential_from_map(&CubicMap { alpha }, -6.0, 6.0, 961)?.to_table()
            }
        }
    }
}

/// Labeled region of the region corpus.
#[derive(Debug, Clone)]
pub struct RegionConfig {
    pub label: String,
    pub spec: RegionSpec,
}

/// Inputs of the spectral stability comparison.
#[derive(Debug, Clone)]
pub struct StabilityConfig {
    pub rho: SigmaProfile,
    pub domain: (f64, f64),
    pub cells: usize,
    pub sigma: SigmaProfile,
    pub sigma_window: (f64, f64),
}

/// Inputs of the rearrangement inequality suite.
#[derive(Debug, Clone)]
pub struct RearrangeConfig {
    pub bumps: usize,
    pub cells: usize,
    pub levels: usize,
    /// Cavalieri exponents; `inf` allowed.
    pub p_list: Vec<f64>,
}

/// Right-hand datum family for the elliptic comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdeDatum {
    Unit,
    Bump,
    Mixed,
}

impl PdeDatum {
    pub fn as_str(&self) -> &'static str {
        match self {
            PdeDatum::Unit => "unit",
            PdeDatum::Bump => "bump",
            PdeDatum::Mixed => "mixed",
        }
    }
}

/// Inputs of the elliptic comparison pipeline.
#[derive(Debug, Clone)]
pub struct PdeConfig {
    pub coefficient: CoefficientField,
    pub c_ell: f64,
    pub cells: [usize; 2],
    pub domain: BoxDomain,
    pub datum: PdeDatum,
    pub q_list: Vec<f64>,
}

/// Negative-control hooks; unit scales leave certificates untouched.
#[derive(Debug, Clone, Copy)]
pub struct CorruptConfig {
    pub perimeter_scale: f64,
    pub v_scale: f64,
}

impl Default for CorruptConfig {
    fn default() -> Self {
        CorruptConfig {
            perimeter_scale: 1.0,
            v_scale: 1.0,
        }
    }
}

/// Fully-typed experiment file.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: Option<TaskKind>,
    pub dimension: usize,
    pub seed: u64,
    pub tolerance: Tolerance,
    /// Truncation radius for unbounded supports.
    pub radius: f64,
    /// Tail mass dropped when truncating.
    pub tail_tol: f64,
    /// Cells per axis for measure/perimeter grids.
    pub grid_cells: usize,
    /// Cells of 1-D certificate profiles.
    pub profile_cells: usize,
    /// Transport map nodes per side.
    pub map_nodes: usize,
    pub axes: Vec<AxisConfig>,
    pub regions: Vec<RegionConfig>,
    pub stability: Option<StabilityConfig>,
    pub rearrange: Option<RearrangeConfig>,
    pub pde: Option<PdeConfig>,
    pub corrupt: CorruptConfig,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let sections = split_sections(text)?;
        let mut cfg = ExperimentConfig {
            kind: None,
            dimension: 2,
            seed: 0,
            tolerance: Tolerance::default(),
            radius: 8.0,
            tail_tol: 1e-11,
            grid_cells: 60,
            profile_cells: 6000,
            map_nodes: 401,
            axes: Vec::new(),
            regions: Vec::new(),
            stability: None,
            rearrange: None,
            pde: None,
            corrupt: CorruptConfig::default(),
        };
        let mut seen_experiment = false;
        for s in &sections {
            match (s.name.as_str(), s.index) {
                ("experiment", None) => {
                    seen_experiment = true;
                    if let Some((v, l)) = s.get("kind") {
                        cfg.kind = Some(TaskKind::parse(v, l)?);
                    }
                    if let Some(d) = s.opt_usize("dimension")? {
                        cfg.dimension = d;
                    }
                    if let Some(seed) = s.opt_u64("seed")? {
                        cfg.seed = seed;
                    }
                    if cfg.dimension < 2 {
                        return Err(Error::config(
                            s.line,
                            format!("dimension must be at least 2, got {}", cfg.dimension),
                        ));
                    }
                }
                ("tolerance", None) => {
                    let abs = s.opt_f64("abs")?.unwrap_or(cfg.tolerance.abs_tol);
                    let rel = s.opt_f64("rel")?.unwrap_or(cfg.tolerance.rel_tol);
                    let mi = s.opt_usize("max_iter")?.unwrap_or(cfg.tolerance.max_iter);
                    cfg.tolerance = Tolerance::new(abs, rel, mi).map_err(|e| {
                        Error::config(s.line, format!("invalid tolerance block: {e}"))
                    })?;
                }
                ("truncation", None) => {
                    if let Some(r) = s.opt_f64("radius")? {
                        cfg.radius = r;
                    }
                    if let Some(t) = s.opt_f64("tail")? {
                        cfg.tail_tol = t;
                    }
                    if !(cfg.radius > 0.0) || !(cfg.tail_tol > 0.0 && cfg.tail_tol < 1.0) {
                        return Err(Error::config(s.line, "invalid truncation block"));
                    }
                }
                ("grid", None) => {
                    if let Some(c) = s.opt_usize("cells")? {
                        cfg.grid_cells = c;
                    }
                    if let Some(c) = s.opt_usize("profile_cells")? {
                        cfg.profile_cells = c;
                    }
                    if let Some(c) = s.opt_usize("map_nodes")? {
                        cfg.map_nodes = c;
                    }
                    if cfg.grid_cells < 4 || cfg.profile_cells < 16 || cfg.map_nodes < 9 {
                        return Err(Error::config(s.line, "grid resolutions too coarse"));
                    }
                }
                ("axis", Some(_)) => {
                    cfg.axes.push(parse_axis(s)?);
                }
                ("region", Some(_)) => {
                    cfg.regions.push(parse_region(s)?);
                }
                ("stability", None) => {
                    cfg.stability = Some(parse_stability(s)?);
                }
                ("rearrange", None) => {
                    cfg.rearrange = Some(parse_rearrange(s)?);
                }
                ("pde", None) => {
                    cfg.pde = Some(parse_pde(s)?);
                }
                ("corrupt", None) => {
                    let p = s.opt_f64("perimeter_scale")?.unwrap_or(1.0);
                    let v = s.opt_f64("v_scale")?.unwrap_or(1.0);
                    if !(p > 0.0) || !(v > 0.0) {
                        return Err(Error::config(s.line, "corrupt scales must be positive"));
                    }
                    cfg.corrupt = CorruptConfig {
                        perimeter_scale: p,
                        v_scale: v,
                    };
                }
                (name, idx) => {
                    let shown = match idx {
                        Some(i) => format!("{name} {i}"),
                        None => name.to_string(),
                    };
                    return Err(Error::config(s.line, format!("unknown section [{shown}]")));
                }
            }
            s.finish()?;
        }
        if !seen_experiment {
            return Err(Error::config(1, "missing [experiment] section"));
        }
        check_contiguous(&sections, "axis")?;
        check_contiguous(&sections, "region")?;
        if !cfg.axes.is_empty() && cfg.axes.len() != cfg.dimension - 1 {
            return Err(Error::config(
                1,
                format!(
                    "dimension {} needs {} cross axes, file declares {}",
                    cfg.dimension,
                    cfg.dimension - 1,
                    cfg.axes.len()
                ),
            ));
        }
        Ok(cfg)
    }

    /// Cross-axis factors; defaults to all-Gaussian when no axis
    /// sections are given.
    pub fn density(&self) -> Result<ProductDensity> {
        let mut factors = Vec::with_capacity(self.dimension - 1);
        if self.axes.is_empty() {
            for _ in 0..self.dimension - 1 {
                factors.push(AxisFactor::Potential(AxisPotential::gaussian()));
            }
        } else {
            for a in &self.axes {
                factors.push(AxisFactor::Potential(a.potential()?));
            }
        }
        ProductDensity::new(factors, &self.tolerance)
    }
}

fn parse_axis(s: &KeyedSection) -> Result<AxisConfig> {
    let (family, line) = s.req("family")?;
    let axis = match family {
        "gaussian" => AxisConfig::Gaussian,
        "power" => AxisConfig::Power { k: s.f64("k")? },
        "quadratic" => AxisConfig::Quadratic {
            beta: s.f64("beta")?,
        },
        "cubic-map" => AxisConfig::CubicMap {
            alpha: s.f64("alpha")?,
        },
        other => {
            return Err(Error::config(line, format!("unknown axis family '{other}'")));
        }
    };
    Ok(axis)
}

fn parse_region(s: &KeyedSection) -> Result<RegionConfig> {
    let (kind, line) = s.req("type")?;
    let spec = match kind {
        "slice" => RegionSpec::HalfspaceSlice {
            lambda: s.f64("lambda")?,
        },
        "slab" => RegionSpec::SlabUnion {
            intervals: s.pair_list("intervals")?,
        },
        "graph-affine" => RegionSpec::Graph {
            profile: Profile::Affine {
                intercept: s.f64("intercept")?,
                slopes: s.f64_list("slopes")?,
            },
        },
        "graph-wave" => {
            let amps = s.f64_list("amplitudes")?;
            let freqs = s.f64_list("frequencies")?;
            let phases = s.f64_list("phases")?;
            let axes = s.usize_list("axes")?;
            if amps.len() != freqs.len() || amps.len() != phases.len() || amps.len() != axes.len()
            {
                return Err(Error::config(
                    line,
                    "wave lists must share one length",
                ));
            }
            RegionSpec::Graph {
                profile: Profile::WaveSum {
                    base: s.f64("base")?,
                    terms: amps
                        .into_iter()
                        .zip(freqs)
                        .zip(phases)
                        .zip(axes)
                        .map(|(((amp, freq), phase), axis)| WaveTerm {
                            axis,
                            amp,
                            freq,
                            phase,
                        })
                        .collect(),
                },
            }
        }
        "box" => {
            let lo = s.pair_list("lo")?;
            let hi = s.pair_list("hi")?;
            if lo.len() != hi.len() {
                return Err(Error::config(line, "box lists must share one length"));
            }
            let mut boxes = Vec::with_capacity(lo.len());
            for (l, h) in lo.into_iter().zip(hi) {
                boxes.push(
                    BoxDomain::new(vec![l.0, l.1], vec![h.0, h.1])
                        .map_err(|e| Error::config(line, format!("bad box: {e}")))?,
                );
            }
            RegionSpec::BoxUnion { boxes }
        }
        other => {
            return Err(Error::config(line, format!("unknown region type '{other}'")));
        }
    };
    let label = match s.get("label") {
        Some((v, _)) => v.to_string(),
        None => format!("region-{}", s.index.unwrap_or(0)),
    };
    Ok(RegionConfig { label, spec })
}

fn parse_profile_family(s: &KeyedSection, key: &str) -> Result<SigmaProfile> {
    let (name, line) = s.req(key)?;
    match name {
        "gaussian" => Ok(SigmaProfile::Gaussian {
            c: s.f64(&format!("{key}_c"))?,
        }),
        "constant" => Ok(SigmaProfile::Constant),
        "log-cosine" => Ok(SigmaProfile::LogCosine {
            a: s.f64(&format!("{key}_a"))?,
        }),
        other => Err(Error::config(
            line,
            format!("unknown weight family '{other}'"),
        )),
    }
}

fn parse_stability(s: &KeyedSection) -> Result<StabilityConfig> {
    let rho = parse_profile_family(s, "rho")?;
    let sigma = parse_profile_family(s, "sigma")?;
    let domain = s.pair("domain")?;
    let window = s.pair("window")?;
    let cells = s.usize("cells")?;
    Ok(StabilityConfig {
        rho,
        domain,
        cells,
        sigma,
        sigma_window: window,
    })
}

fn parse_rearrange(s: &KeyedSection) -> Result<RearrangeConfig> {
    let bumps = s.usize("bumps")?;
    let cells = s.usize("cells")?;
    let levels = s.opt_usize("levels")?.unwrap_or(50);
    let p_list = match s.get("p_list") {
        Some((v, l)) => parse_p_list(v, l)?,
        None => vec![1.0, 2.0, f64::INFINITY],
    };
    if bumps == 0 || cells < 8 {
        return Err(Error::config(s.line, "rearrange corpus too small"));
    }
    Ok(RearrangeConfig {
        bumps,
        cells,
        levels,
        p_list,
    })
}

fn parse_p_list(v: &str, line: usize) -> Result<Vec<f64>> {
    v.split_whitespace()
        .map(|tok| {
            if tok == "inf" {
                Ok(f64::INFINITY)
            } else {
                tok.parse::<f64>()
                    .map_err(|_| Error::config(line, format!("bad exponent '{tok}'")))
                    .and_then(|p| {
                        if p >= 1.0 {
                            Ok(p)
                        } else {
                            Err(Error::config(line, format!("exponent {p} below 1")))
                        }
                    })
            }
        })
        .collect()
}

fn parse_pde(s: &KeyedSection) -> Result<PdeConfig> {
    let (name, line) = s.req("coefficient")?;
    let coefficient = match name {
        "scalar" => CoefficientField::ScalarPhi,
        "diag" => CoefficientField::DiagPhi {
            a: s.f64("a")?,
            b: s.f64("b")?,
        },
        "rotated" => CoefficientField::RotatedPhi {
            theta: s.f64("theta")?,
            ratio: s.f64("ratio")?,
        },
        other => {
            return Err(Error::config(
                line,
                format!("unknown coefficient field '{other}'"),
            ));
        }
    };
    let c_ell = match s.opt_f64("c_ell")? {
        Some(c) => c,
        None => coefficient.eig_bounds().1,
    };
    let cells_list = s.usize_list("cells")?;
    let cells = match cells_list.as_slice() {
        [c] => [*c, *c],
        [a, b] => [*a, *b],
        _ => {
            return Err(Error::config(
                s.line,
                "cells needs one or two integers",
            ));
        }
    };
    let dx = s.pair("domain_x")?;
    let dy = s.pair("domain_y")?;
    let domain = BoxDomain::new(vec![dx.0, dy.0], vec![dx.1, dy.1])
        .map_err(|e| Error::config(s.line, format!("bad domain: {e}")))?;
    let (datum, dl) = s.req("f")?;
    let datum = match datum {
        "unit" => PdeDatum::Unit,
        "bump" => PdeDatum::Bump,
        "mixed" => PdeDatum::Mixed,
        other => {
            return Err(Error::config(dl, format!("unknown datum '{other}'")));
        }
    };
    let q_list = match s.get("q_list") {
        Some((v, l)) => {
            let qs: Vec<f64> = v
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::config(l, format!("bad exponent '{tok}'")))
                })
                .collect::<Result<_>>()?;
            if qs.iter().any(|&q| !(q > 0.0 && q <= 2.0)) {
                return Err(Error::config(l, "exponents must lie in (0, 2]"));
            }
            qs
        }
        None => vec![0.5, 1.0, 2.0],
    };
    Ok(PdeConfig {
        coefficient,
        c_ell,
        cells,
        domain,
        datum,
        q_list,
    })
}

/// Raw section with strict single-use key accounting.
struct KeyedSection {
    name: String,
    index: Option<usize>,
    line: usize,
    entries: Vec<(String, String, usize)>,
    used: Vec<Cell<bool>>,
}

impl KeyedSection {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        for (i, (k, v, l)) in self.entries.iter().enumerate() {
            if k == key {
                self.used[i].set(true);
                return Some((v.as_str(), *l));
            }
        }
        None
    }

    fn req(&self, key: &str) -> Result<(&str, usize)> {
        self.get(key).ok_or_else(|| {
            Error::config(
                self.line,
                format!("section [{}] misses required key '{key}'", self.name),
            )
        })
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let (v, l) = self.req(key)?;
        v.parse::<f64>()
            .map_err(|_| Error::config(l, format!("'{key}' is not a number: '{v}'")))
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, l)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::config(l, format!("'{key}' is not a number: '{v}'"))),
        }
    }

    fn usize(&self, key: &str) -> Result<usize> {
        let (v, l) = self.req(key)?;
        v.parse::<usize>()
            .map_err(|_| Error::config(l, format!("'{key}' is not a nonnegative integer: '{v}'")))
    }

    fn opt_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, l)) => v.parse::<usize>().map(Some).map_err(|_| {
                Error::config(l, format!("'{key}' is not a nonnegative integer: '{v}'"))
            }),
        }
    }

    fn opt_u64(&self, key: &str) -> Result<Option<u64>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, l)) => v
                .parse::<u64>()
                .map(Some)
                .map_err(|_| Error::config(l, format!("'{key}' is not a seed: '{v}'"))),
        }
    }

    fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let (v, l) = self.req(key)?;
        v.split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::config(l, format!("bad number '{tok}' in '{key}'")))
            })
            .collect()
    }

    fn usize_list(&self, key: &str) -> Result<Vec<usize>> {
        let (v, l) = self.req(key)?;
        v.split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| Error::config(l, format!("bad integer '{tok}' in '{key}'")))
            })
            .collect()
    }

    /// `a b` as one pair.
    fn pair(&self, key: &str) -> Result<(f64, f64)> {
        let (v, l) = self.req(key)?;
        let nums: Vec<f64> = v
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::config(l, format!("bad number '{tok}' in '{key}'")))
            })
            .collect::<Result<_>>()?;
        match nums.as_slice() {
            [a, b] => Ok((*a, *b)),
            _ => Err(Error::config(l, format!("'{key}' needs exactly two numbers"))),
        }
    }

    /// `a b; c d; ...` as a pair list.
    fn pair_list(&self, key: &str) -> Result<Vec<(f64, f64)>> {
        let (v, l) = self.req(key)?;
        v.split(';')
            .filter(|chunk| !chunk.trim().is_empty())
            .map(|chunk| {
                let nums: Vec<f64> = chunk
                    .split_whitespace()
                    .map(|tok| {
                        tok.parse::<f64>()
                            .map_err(|_| Error::config(l, format!("bad number '{tok}' in '{key}'")))
                    })
                    .collect::<Result<_>>()?;
                match nums.as_slice() {
                    [a, b] => Ok((*a, *b)),
                    _ => Err(Error::config(
                        l,
                        format!("'{key}' pairs need exactly two numbers each"),
                    )),
                }
            })
            .collect()
    }

    fn finish(&self) -> Result<()> {
        for (i, (k, _, l)) in self.entries.iter().enumerate() {
            if !self.used[i].get() {
                return Err(Error::config(
                    *l,
                    format!("unknown key '{k}' in section [{}]", self.name),
                ));
            }
        }
        Ok(())
    }
}

fn split_sections(text: &str) -> Result<Vec<KeyedSection>> {
    let mut sections: Vec<KeyedSection> = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let stripped = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let t = stripped.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(inner) = t.strip_prefix('[') {
            let inner = inner.strip_suffix(']').ok_or_else(|| {
                Error::config(line_no, "section header misses closing ']'")
            })?;
            let mut parts = inner.split_whitespace();
            let name = parts
                .next()
                .ok_or_else(|| Error::config(line_no, "empty section header"))?
                .to_string();
            let index = match parts.next() {
                None => None,
                Some(tok) => Some(tok.parse::<usize>().map_err(|_| {
                    Error::config(line_no, format!("bad section index '{tok}'"))
                })?),
            };
            if parts.next().is_some() {
                return Err(Error::config(line_no, "too many tokens in section header"));
            }
            let duplicate = sections
                .iter()
                .any(|s| s.name == name && s.index == index);
            if duplicate {
                let shown = match index {
                    Some(ix) => format!("{name} {ix}"),
                    None => name.clone(),
                };
                return Err(Error::config(
                    line_no,
                    format!("duplicate section [{shown}]"),
                ));
            }
            sections.push(KeyedSection {
                name,
                index,
                line: line_no,
                entries: Vec::new(),
                used: Vec::new(),
            });
            continue;
        }
        let (key, value) = t.split_once('=').ok_or_else(|| {
            Error::config(line_no, format!("expected 'key = value', got '{t}'"))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(Error::config(line_no, "empty key"));
        }
        let section = sections.last_mut().ok_or_else(|| {
            Error::config(line_no, "key-value pair before any section header")
        })?;
        if section.entries.iter().any(|(k, _, _)| *k == key) {
            return Err(Error::config(
                line_no,
                format!("duplicate key '{key}' in section [{}]", section.name),
            ));
        }
        section.entries.push((key, value, line_no));
        section.used.push(Cell::new(false));
    }
    Ok(sections)
}

fn check_contiguous(sections: &[KeyedSection], name: &str) -> Result<()> {
    let mut indices: Vec<(usize, usize)> = sections
        .iter()
        .filter(|s| s.name == name)
        .map(|s| (s.index.unwrap_or(0), s.line))
        .collect();
    indices.sort_unstable();
    for (pos, &(ix, line)) in indices.iter().enumerate() {
        if ix != pos + 1 {
            return Err(Error::config(
                line,
                format!("[{name}] sections must be numbered 1..{} without gaps", indices.len()),
            ));
        }
    }
    Ok(())
}
