//! Named Hamiltonian families with their integrals, sampling boxes and
//! claimed integrability class.
//!
//! User-supplied functions are expressions in placeholder symbols and are
//! composed by substitution:
//!
//! | placeholder | meaning                        |
//! |-------------|--------------------------------|
//! | `s`         | squared radius `q^2`           |
//! | `r`         | radius `\|q\|`                 |
//! | `x`         | deformed argument `z q^2`      |
//! | `a`         | projection `lambda . q` (h6)   |

mod deformed;
mod extras;
mod h6;
mod sl2;

use std::collections::{BTreeMap, HashMap};

pub use deformed::{deformed_free, deformed_potential};
pub use extras::{extras, Extra};
pub use h6::{h6_em, h6_em_fields_3d, h6_geodesic, h6_natural, H6Fields};
pub use sl2::{
    conformal_free, conformal_potential, curved_evans, curved_kc, curved_sw, darboux, em_fields_3d,
    em_flat, evans, free_constant_curvature, EmFields, kepler_coulomb, multifold_kepler, smorodinsky_winternitz,
    taub_nut, Chart, DarbouxKind,
};

use crate::coalgebra::{Integral, RealizedSystem};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr, ParamSet, SampleBox};
use crate::geometry::{ClosedCurvature, MetricField};
use crate::verify::Class;

pub const ARG_SQUARED: &str = "s";
pub const ARG_RADIUS: &str = "r";
pub const ARG_DEFORMED: &str = "x";
pub const ARG_PROJECTION: &str = "a";

/// One instantiated catalog system.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: String,
    /// Short description of where the family comes from.
    pub anchor: &'static str,
    pub n: usize,
    pub hamiltonian: Expr,
    pub params: ParamSet,
    pub system: Option<RealizedSystem>,
    pub left: Vec<Integral>,
    pub right: Vec<Integral>,
    pub sample_box: SampleBox,
    pub claimed_class: Class,
    pub notes: String,
    pub user_functions: Vec<&'static str>,
    /// Functions that must stay away from zero along trajectories.
    pub guards: Vec<Expr>,
    pub metric: Option<MetricField>,
    pub closed_curvature: Option<ClosedCurvature>,
}

impl CatalogEntry {
    pub(crate) fn new(id: &str, anchor: &'static str, n: usize, hamiltonian: Expr, params: ParamSet) -> Self {
        CatalogEntry {
            id: id.to_string(),
            anchor,
            n,
            hamiltonian,
            params,
            system: None,
            left: Vec::new(),
            right: Vec::new(),
            sample_box: SampleBox::standard(n),
            claimed_class: Class::NotVerified,
            notes: String::new(),
            user_functions: Vec::new(),
            guards: Vec::new(),
            metric: None,
            closed_curvature: None,
        }
    }

    fn with_system(mut self, sys: RealizedSystem) -> Self {
        let sys = sys.with_integrals();
        self.left = sys.left.clone();
        self.right = sys.right.clone();
        self.params = self.params.merged(&sys.params());
        self.system = Some(sys);
        self
    }

    /// Overlay parameters referenced by user functions.
    pub fn with_params(mut self, extra: &ParamSet) -> Self {
        self.params = self.params.merged(extra);
        self
    }

    /// Distinct integrals: all left ones and the right ones of lower order.
    pub fn integrals(&self) -> Vec<(String, Expr)> {
        self.left
            .iter()
            .chain(self.right.iter().filter(|i| i.m < self.n))
            .map(|i| (i.name(), i.expr.clone()))
            .collect()
    }

    /// Class that sampled verification can establish for this entry. Claims
    /// resting on integrals outside the coalgebra family drop to the
    /// coalgebra count; short chains cap at their own hierarchy.
    pub fn expected_class(&self) -> Class {
        if self.left.is_empty() && self.right.is_empty() {
            return Class::NotVerified;
        }
        let claim = self.claimed_class.min(Class::Qms);
        match claim {
            Class::Qms | Class::MinSi if self.n == 2 => Class::Integrable,
            c => c,
        }
    }
}

/// Substitute placeholder arguments into a user function and reject any
/// placeholder left unbound.
pub fn compose(f: &Expr, args: &[(&str, Expr)]) -> Result<Expr> {
    let b: HashMap<String, Expr> = args.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    let out = f.substitute(&b);
    match out.symbols().into_iter().next() {
        Some(s) => Err(Error::UnresolvedSymbol(s)),
        None => Ok(out),
    }
}

pub(crate) fn check_len(name: &str, v: &[f64], n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::ParameterMismatch(format!("catalog systems need N >= 2, got {n}")));
    }
    if v.len() != n {
        return Err(Error::ParameterMismatch(format!("`{name}` has {} entries for N = {n}", v.len())));
    }
    Ok(())
}

/// Parameters, functions and chart used to instantiate an entry by id.
/// Missing values fall back to per-entry defaults.
#[derive(Debug, Clone, Default)]
pub struct EntryOptions {
    pub n: usize,
    pub params: ParamSet,
    pub functions: BTreeMap<String, Expr>,
    pub chart: Option<Chart>,
}

impl EntryOptions {
    pub fn new(n: usize) -> Self {
        EntryOptions { n, ..Default::default() }
    }

    pub fn param(mut self, name: &str, v: f64) -> Self {
        self.params.set(name, v);
        self
    }

    pub fn seq(mut self, name: &str, v: Vec<f64>) -> Self {
        self.params.sequences.insert(name.to_string(), v);
        self
    }

    pub fn function(mut self, name: &str, e: Expr) -> Self {
        self.functions.insert(name.to_string(), e);
        self
    }

    pub fn chart(mut self, c: Chart) -> Self {
        self.chart = Some(c);
        self
    }

    fn scalar(&self, name: &str, default: f64) -> f64 {
        self.params.scalar(name).unwrap_or(default)
    }

    fn site(&self, name: &str, default: impl Fn(usize) -> f64) -> Vec<f64> {
        self.params
            .sequence(name)
            .map(|s| s.to_vec())
            .unwrap_or_else(|| (0..self.n).map(default).collect())
    }

    fn func(&self, name: &str, default: &str, placeholders: &[&str]) -> Result<Expr> {
        match self.functions.get(name) {
            Some(e) => Ok(e.clone()),
            None => parse(default, placeholders),
        }
    }

    /// Scalars not consumed by the constructor itself, for user functions.
    fn user_params(&self) -> ParamSet {
        ParamSet { scalars: self.params.scalars.clone(), sequences: BTreeMap::new() }
    }
}

/// Default centrifugal constants.
pub fn default_b(i: usize) -> f64 {
    0.05 + 0.03 * i as f64
}

/// Default h6 realization labels.
pub fn default_lambda(i: usize) -> f64 {
    1.0 + 0.25 * i as f64
}

/// Listing row for one id.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogInfo {
    pub id: &'static str,
    pub claimed: Class,
    pub anchor: &'static str,
    pub user_functions: &'static [&'static str],
}

const fn info(
    id: &'static str,
    claimed: Class,
    anchor: &'static str,
    user_functions: &'static [&'static str],
) -> CatalogInfo {
    CatalogInfo { id, claimed, anchor, user_functions }
}

/// Every id known to [`build`], sorted.
pub fn catalog_ids() -> Vec<CatalogInfo> {
    use Class::*;
    let mut v = vec![
        info("sl2.evans", Qms, "Evans system with centrifugal barriers", &["F"]),
        info("sl2.sw", Ms, "flat Smorodinsky-Winternitz oscillator", &[]),
        info("sl2.kc", Ms, "flat generalized Kepler-Coulomb", &[]),
        info("sl2.em", Qms, "electromagnetic velocity-dependent potential", &["F", "G"]),
        info("sl2.free_curved", Qms, "geodesic motion on constant curvature spaces", &[]),
        info("sl2.curved_evans", Qms, "curved Evans system", &["U"]),
        info("sl2.curved_sw", Ms, "curved Smorodinsky-Winternitz (Higgs oscillator)", &[]),
        info("sl2.curved_kc", Ms, "curved generalized Kepler-Coulomb", &[]),
        info("sl2.conformal_free", Qms, "geodesic motion on a spherically symmetric space", &["f"]),
        info("sl2.conformal_potential", Qms, "spherically symmetric space with central potential", &["f", "U"]),
        info("darboux.i", Qms, "Darboux space of type I", &[]),
        info("darboux.ii", Qms, "Darboux space of type II", &[]),
        info("darboux.iiia", Ms, "Darboux space of type III, first chart", &[]),
        info("darboux.iiib", Ms, "Darboux space of type III, second chart", &[]),
        info("darboux.iv", Qms, "Darboux space of type IV", &[]),
        info("sl2.multifold_kepler", Qms, "multifold Kepler space", &[]),
        info("sl2.taub_nut", Qms, "Taub-NUT space", &[]),
        info("sl2z.free", Qms, "deformed free motion", &["g"]),
        info("sl2z.potential", Qms, "deformed free motion with potential and centrifugal terms", &["g", "U"]),
        info("h6.natural", QuasiIntegrable, "natural system on the two-photon coalgebra", &["F"]),
        info("h6.em", QuasiIntegrable, "electromagnetic system on the two-photon coalgebra", &["F", "G", "R"]),
        info("h6.geodesic", QuasiIntegrable, "geodesic flow on the two-photon coalgebra", &["F", "G", "R", "S"]),
        info("extra.cg", Integrable, "Calogero-Gaudin system", &[]),
        info("extra.cg_general", Integrable, "generalized Calogero-Gaudin system", &[]),
        info("extra.cg_gd", Integrable, "Calogero-Gaudin system in Gelfand-Dyson variables", &[]),
        info("extra.cg_deformed", Integrable, "deformed Calogero-Gaudin system", &[]),
        info("extra.h4_chain", Integrable, "oscillator-coalgebra chain", &[]),
        info("extra.rs_like", Integrable, "Ruijsenaars-Schneider analogue", &[]),
        info("ext.comodule", Integrable, "comodule-deformed two-site oscillator", &[]),
    ];
    v.sort_by_key(|i| i.id);
    v
}

/// Instantiate a catalog entry by id.
pub fn build(id: &str, o: &EntryOptions) -> Result<CatalogEntry> {
    let n = o.n;
    let b = || o.site("b", default_b);
    let kappa = o.scalar("kappa", 0.3);
    let chart = o.chart.unwrap_or(Chart::Poincare);
    // default user functions may reference `omega`
    let mut user = o.user_params();
    user.scalars.entry("omega".into()).or_insert(1.0);
    let sq = &[ARG_SQUARED][..];
    let rad = &[ARG_RADIUS][..];
    let dfm = &[ARG_DEFORMED][..];
    let h6args = &[ARG_PROJECTION, ARG_SQUARED][..];
    let entry = match id {
        "sl2.evans" => evans(&o.func("F", "omega^2*s/2", sq)?, &b(), n)?,
        "sl2.sw" => smorodinsky_winternitz(o.scalar("omega", 1.0), &b(), n)?,
        "sl2.kc" => kepler_coulomb(o.scalar("k", 1.0), &b(), n)?,
        "sl2.em" => em_flat(
            &o.func("F", "s/2", sq)?,
            &o.func("G", "1/(1 + s)", sq)?,
            o.scalar("e", 1.0),
            &b(),
            n,
        )?,
        "sl2.free_curved" => free_constant_curvature(chart, kappa, n)?,
        "sl2.curved_evans" => curved_evans(&o.func("U", "s/2", sq)?, kappa, &b(), n, chart)?,
        "sl2.curved_sw" => curved_sw(o.scalar("omega", 1.0), kappa, &b(), n, chart)?,
        "sl2.curved_kc" => curved_kc(o.scalar("k", 1.0), kappa, &b(), n, chart)?,
        "sl2.conformal_free" => conformal_free(&o.func("f", "1/(1 + 0.3*r^2)", rad)?, n, &user)?,
        "sl2.conformal_potential" => conformal_potential(
            &o.func("f", "1/(1 + 0.3*r^2)", rad)?,
            &o.func("U", "r^2/2", rad)?,
            &b(),
            n,
            &user,
        )?,
        "darboux.i" => darboux(DarbouxKind::I, n, &o.params)?,
        "darboux.ii" => darboux(DarbouxKind::II, n, &o.params)?,
        "darboux.iiia" => darboux(DarbouxKind::IIIa, n, &o.params)?,
        "darboux.iiib" => darboux(DarbouxKind::IIIb, n, &o.params)?,
        "darboux.iv" => darboux(DarbouxKind::IV, n, &o.params)?,
        "sl2.multifold_kepler" => {
            multifold_kepler(o.scalar("a", 1.0), o.scalar("b", 1.0), o.scalar("nu", 2.0), n)?
        }
        "sl2.taub_nut" => taub_nut(o.scalar("m", 0.5), n)?,
        "sl2z.free" => deformed_free(&o.func("g", "1", dfm)?, o.scalar("z", 0.05), n, &user)?,
        "sl2z.potential" => deformed_potential(
            &o.func("g", "1", dfm)?,
            &o.func("U", "omega^2*x/(2*z)", dfm)?,
            o.scalar("z", 0.05),
            &b(),
            n,
            &user,
        )?,
        "h6.natural" => h6_natural(&o.func("F", "s/2 + 0.3*a^2", h6args)?, &o.site("lambda", default_lambda), n)?,
        "h6.em" => h6_em(
            &o.func("F", "0.3*a", h6args)?,
            &o.func("G", "0.2*s", h6args)?,
            &o.func("R", "s/2", h6args)?,
            &o.site("lambda", default_lambda),
            n,
        )?,
        "h6.geodesic" => h6_geodesic(
            &o.func("F", "0.5 + 0.1*s", h6args)?,
            &o.func("G", "0.2", h6args)?,
            &o.func("R", "0.1", h6args)?,
            &o.func("S", "0.05*a", h6args)?,
            &o.site("lambda", default_lambda),
            n,
        )?,
        "extra.cg" => extras(Extra::Cg, n, &o.params)?,
        "extra.cg_general" => extras(Extra::CgGeneral, n, &o.params)?,
        "extra.cg_gd" => extras(Extra::CgGelfandDyson, n, &o.params)?,
        "extra.cg_deformed" => extras(Extra::CgDeformed, n, &o.params)?,
        "extra.h4_chain" => extras(Extra::H4Chain, n, &o.params)?,
        "extra.rs_like" => extras(Extra::RsLike, n, &o.params)?,
        "ext.comodule" => {
            if n != 2 {
                return Err(Error::ParameterMismatch("the comodule oscillator has two sites".into()));
            }
            let lam = o.site("lambda", |_| 1.0);
            crate::extensions::comodule_oscillator(o.scalar("sigma", 0.1), lam[0], lam[1])?.to_entry()?
        }
        other => return Err(Error::UnknownSystem(other.to_string())),
    };
    Ok(entry.with_params(&user))
}

/// Placeholder symbols accepted by the user functions of an entry.
pub fn placeholders(id: &str) -> &'static [&'static str] {
    if id.starts_with("sl2.conformal") {
        &[ARG_RADIUS]
    } else if id.starts_with("sl2z.") {
        &[ARG_DEFORMED]
    } else if id.starts_with("h6.") {
        &[ARG_PROJECTION, ARG_SQUARED]
    } else {
        &[ARG_SQUARED]
    }
}

/// A parameter whose vanishing contracts an entry onto another one.
#[derive(Debug, Clone)]
pub struct Limit {
    pub parameter: &'static str,
    pub target: CatalogEntry,
}

impl Limit {
    /// The entry `id` rebuilt with the limit parameter set to `v`.
    pub fn family<'a>(&self, id: &'a str, o: &'a EntryOptions) -> impl Fn(f64) -> Result<CatalogEntry> + 'a {
        let name = self.parameter;
        move |v| build(id, &o.clone().param(name, v))
    }
}

/// Flat or undeformed limit of an entry, if the catalog knows one. Custom
/// deformed potentials have no generic limit and yield `None`.
pub fn limit_of(id: &str, o: &EntryOptions) -> Result<Option<Limit>> {
    let n = o.n;
    let free = || o.clone().seq("b", vec![0.0; n]).function("F", Expr::zero());
    let (parameter, target_id, t) = match id {
        "sl2z.free" => ("z", "sl2.evans", free()),
        "sl2z.potential" if !o.functions.contains_key("U") => {
            ("z", "sl2.evans", o.clone().function("F", parse("omega^2*s/2", &[ARG_SQUARED])?))
        }
        "sl2.free_curved" => ("kappa", "sl2.evans", free()),
        "sl2.curved_evans" => {
            let u = o.func("U", "s/2", &[ARG_SQUARED])?;
            let f = match o.chart.unwrap_or(Chart::Poincare) {
                Chart::Poincare => {
                    u.substitute(&HashMap::from([(ARG_SQUARED.to_string(), 4.0 * Expr::symbol(ARG_SQUARED))]))
                }
                Chart::Beltrami => u,
            };
            ("kappa", "sl2.evans", o.clone().function("F", f))
        }
        "sl2.curved_sw" => ("kappa", "sl2.sw", o.clone()),
        "sl2.curved_kc" => ("kappa", "sl2.kc", o.clone()),
        _ => return Ok(None),
    };
    Ok(Some(Limit { parameter, target: build(target_id, &t)? }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_id_builds() {
        for info in catalog_ids() {
            let n = if info.id == "ext.comodule" { 2 } else { 3 };
            let e = build(info.id, &EntryOptions::new(n)).unwrap_or_else(|err| panic!("{}: {err}", info.id));
            assert_eq!(e.id, info.id);
            assert_eq!(e.claimed_class, info.claimed, "{}", info.id);
            assert_eq!(e.n, n);
        }
        assert!(matches!(build("sl2.nope", &EntryOptions::new(3)), Err(Error::UnknownSystem(_))));
    }

    #[test]
    fn ids_are_sorted_and_unique() {
        let ids: Vec<_> = catalog_ids().into_iter().map(|i| i.id).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn curved_oscillator_flattens() {
        let o = EntryOptions::new(3);
        let lim = limit_of("sl2.curved_sw", &o).unwrap().unwrap();
        assert_eq!(lim.target.id, "sl2.sw");
        let fam = lim.family("sl2.curved_sw", &o);
        let r = crate::verify::limit_check(&fam, &lim.target, &[0.2, 0.1, 0.05, 0.025], &SampleBox::standard(3), 50, 1)
            .unwrap();
        assert!(r.passed, "{r:?}");
        assert!(limit_of("h6.natural", &o).unwrap().is_none());
    }
}
