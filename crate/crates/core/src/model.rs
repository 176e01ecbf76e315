//! Mechanical model definitions: mass/stiffness matrices with their symmetry
//! data, the built-in armed biped, JSON model files, and the spectra-only
//! two-degree-of-freedom families.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::serde_mat;

/// Time parity of a normal mode at a symmetry point.
///
/// `Even` modes evolve as `cos`/`cosh` (σ = −1), `Odd` modes as `sin`/`sinh`
/// (σ = +1). Serialized as the integer σ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Symmetry {
    Even,
    Odd,
}

impl Symmetry {
    pub fn sigma(self) -> f64 {
        match self {
            Symmetry::Even => -1.0,
            Symmetry::Odd => 1.0,
        }
    }

    pub fn from_sigma(value: i64) -> Option<Self> {
        match value {
            -1 => Some(Symmetry::Even),
            1 => Some(Symmetry::Odd),
            _ => None,
        }
    }
}

impl TryFrom<i64> for Symmetry {
    type Error = String;
    fn try_from(v: i64) -> std::result::Result<Self, String> {
        Symmetry::from_sigma(v).ok_or_else(|| format!("symmetry must be -1 or +1, got {v}"))
    }
}

impl From<Symmetry> for i64 {
    fn from(s: Symmetry) -> i64 {
        match s {
            Symmetry::Even => -1,
            Symmetry::Odd => 1,
        }
    }
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", i64::from(*self))
    }
}

pub fn parse_signature(field: &'static str, values: &[i64]) -> Result<Vec<Symmetry>> {
    values
        .iter()
        .enumerate()
        .map(|(index, &value)| Symmetry::from_sigma(value).ok_or(Error::BadSignature { field, index, value }))
        .collect()
}

/// A linear mechanical model with one-dimensional ground contact on the
/// last coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    pub sigma: Vec<Symmetry>,
    pub sigma_prime: Vec<Symmetry>,
    /// Static constraint force on the contact coordinate, F⁰_N.
    pub static_force: f64,
    /// +1 or −1: direction in which the contact coordinate may leave the ground.
    pub contact_sign: f64,
}

impl ModelSpec {
    pub fn new(
        name: impl Into<String>,
        mass: DMatrix<f64>,
        stiffness: DMatrix<f64>,
        sigma: Vec<Symmetry>,
        sigma_prime: Vec<Symmetry>,
        static_force: f64,
        contact_sign: f64,
    ) -> Result<Self> {
        let model = ModelSpec {
            name: name.into(),
            mass,
            stiffness,
            sigma,
            sigma_prime,
            static_force,
            contact_sign,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn n(&self) -> usize {
        self.mass.nrows()
    }

    fn validate(&self) -> Result<()> {
        let n = self.mass.nrows();
        if n < 2 {
            return Err(Error::invalid("n", "at least two degrees of freedom are required"));
        }
        if !self.mass.is_square() || self.stiffness.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "mass is {:?}, stiffness is {:?}",
                self.mass.shape(),
                self.stiffness.shape()
            )));
        }
        if self.sigma.len() != n || self.sigma_prime.len() != n - 1 {
            return Err(Error::Dimension(format!(
                "sigma has {} entries and sigma_prime {}; expected {} and {}",
                self.sigma.len(),
                self.sigma_prime.len(),
                n,
                n - 1
            )));
        }
        if self.mass.iter().chain(self.stiffness.iter()).any(|x| !x.is_finite()) || !self.static_force.is_finite() {
            return Err(Error::invalid("matrices", "all entries must be finite"));
        }
        if self.contact_sign != 1.0 && self.contact_sign != -1.0 {
            return Err(Error::invalid("contactSign", "must be +1 or -1"));
        }
        let mscale = linalg::max_abs(&self.mass).max(f64::MIN_POSITIVE);
        if let Some((row, col, diff)) = linalg::is_symmetric(&self.mass, 1e-12 * mscale) {
            return Err(Error::AsymmetricMass { row, col, diff });
        }
        let kscale = linalg::max_abs(&self.stiffness).max(f64::MIN_POSITIVE);
        if let Some((row, col, diff)) = linalg::is_symmetric(&self.stiffness, 1e-12 * kscale) {
            return Err(Error::AsymmetricStiffness { row, col, diff });
        }
        if self.mass.clone().cholesky().is_none() {
            return Err(Error::MassNotPositiveDefinite);
        }
        let kdet = linalg::row_normalized_det(&self.stiffness);
        if kdet.abs() < 1e-12 {
            return Err(Error::SingularStiffness(kdet));
        }
        Ok(())
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            name: self.name.clone(),
            n: self.n(),
            mass: serde_mat::matrix::to_rows(&self.mass),
            stiffness: serde_mat::matrix::to_rows(&self.stiffness),
            sigma: self.sigma.iter().map(|&s| s.into()).collect(),
            sigma_prime: self.sigma_prime.iter().map(|&s| s.into()).collect(),
            static_force: self.static_force,
            contact_sign: self.contact_sign as i64,
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        let mass = serde_mat::matrix::from_rows(&file.mass, file.n).map_err(|e| Error::invalid("mass", e))?;
        let stiffness =
            serde_mat::matrix::from_rows(&file.stiffness, file.n).map_err(|e| Error::invalid("stiffness", e))?;
        if mass.shape() != (file.n, file.n) {
            return Err(Error::Dimension(format!(
                "n = {} but mass is {:?}",
                file.n,
                mass.shape()
            )));
        }
        let sigma = parse_signature("sigma", &file.sigma)?;
        let sigma_prime = parse_signature("sigmaPrime", &file.sigma_prime)?;
        if file.contact_sign != 1 && file.contact_sign != -1 {
            return Err(Error::invalid("contactSign", "must be +1 or -1"));
        }
        ModelSpec::new(
            file.name,
            mass,
            stiffness,
            sigma,
            sigma_prime,
            file.static_force,
            file.contact_sign as f64,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }
}

/// On-disk model schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    pub n: usize,
    pub mass: Vec<Vec<f64>>,
    pub stiffness: Vec<Vec<f64>>,
    pub sigma: Vec<i64>,
    pub sigma_prime: Vec<i64>,
    pub static_force: f64,
    pub contact_sign: i64,
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelSpec> {
    let text = std::fs::read_to_string(path)?;
    model_from_json(&text)
}

pub fn model_from_json(text: &str) -> Result<ModelSpec> {
    let file: ModelFile = serde_json::from_str(text)?;
    ModelSpec::from_file(file)
}

/// Physical parameters of the planar biped with legs at a fixed angle, a
/// standing torso and a hanging arm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ArmedBipedParams {
    /// Half the angle between the legs (small).
    pub theta: f64,
    /// Mass of each foot.
    pub m0: f64,
    /// Arm.
    pub m1: f64,
    /// Torso.
    pub m2: f64,
    /// Legs.
    pub m3: f64,
    pub length: f64,
    pub gravity: f64,
}

impl Default for ArmedBipedParams {
    fn default() -> Self {
        ArmedBipedParams {
            theta: 1.0,
            m0: 1.0,
            m1: 1.0,
            m2: 1.0,
            m3: 1.0,
            length: 1.0,
            gravity: 1.0,
        }
    }
}

pub fn build_armed_biped(p: ArmedBipedParams) -> Result<ModelSpec> {
    for (name, v) in [
        ("m0", p.m0),
        ("m1", p.m1),
        ("m2", p.m2),
        ("m3", p.m3),
        ("length", p.length),
        ("gravity", p.gravity),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(name, format!("must be positive, got {v}")));
        }
    }
    if !p.theta.is_finite() {
        return Err(Error::invalid("theta", "must be finite"));
    }
    let l2 = p.length * p.length;
    let a = p.m1;
    let b = p.m1 + p.m2;
    let c = p.m1 + p.m2 + p.m3;
    #[rustfmt::skip]
    let mass = DMatrix::from_row_slice(3, 3, &[
        a,  -a, -a,
        -a,  b,  b,
        -a,  b,  c,
    ]) * l2;
    let gl = p.gravity * p.length;
    let stiffness = DMatrix::from_diagonal(&DVector::from_vec(vec![a, -b, -c])) * gl;
    let total = 2.0 * p.m0 + p.m1 + p.m2 + p.m3;
    let static_force = p.theta * total * p.gravity * p.length;
    ModelSpec::new(
        "armed-biped",
        mass,
        stiffness,
        vec![Symmetry::Even; 3],
        vec![Symmetry::Odd; 2],
        static_force,
        if p.theta < 0.0 { -1.0 } else { 1.0 },
    )
}

/// Unconstrained and constrained spectra with their symmetry signatures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectrumPair {
    #[serde(with = "serde_mat::vector")]
    pub lambda: DVector<f64>,
    #[serde(with = "serde_mat::vector")]
    pub lambda_prime: DVector<f64>,
    pub sigma: Vec<Symmetry>,
    pub sigma_prime: Vec<Symmetry>,
}

impl SpectrumPair {
    /// Validates dimensions and strict interlacing
    /// `λ₁ < λ'₁ < λ₂ < … < λ'_{N−1} < λ_N`.
    pub fn new(
        lambda: DVector<f64>,
        lambda_prime: DVector<f64>,
        sigma: Vec<Symmetry>,
        sigma_prime: Vec<Symmetry>,
    ) -> Result<Self> {
        let n = lambda.len();
        if n < 2 || lambda_prime.len() != n - 1 {
            return Err(Error::Dimension(format!(
                "lambda has {} entries, lambda' has {}",
                n,
                lambda_prime.len()
            )));
        }
        if sigma.len() != n || sigma_prime.len() != n - 1 {
            return Err(Error::Dimension("signature length does not match spectra".into()));
        }
        check_interlacing(lambda.as_slice(), lambda_prime.as_slice())?;
        Ok(SpectrumPair {
            lambda,
            lambda_prime,
            sigma,
            sigma_prime,
        })
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// Copy with `λ'_{N−1}` replaced (used for critical-region studies).
    pub fn with_top_constrained(&self, value: f64) -> Result<Self> {
        let mut lp = self.lambda_prime.clone();
        let last = lp.len() - 1;
        lp[last] = value;
        SpectrumPair::new(self.lambda.clone(), lp, self.sigma.clone(), self.sigma_prime.clone())
    }
}

/// On-disk schema for spectra without matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SpectraFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub lambda: Vec<f64>,
    pub lambda_prime: Vec<f64>,
    pub sigma: Vec<i64>,
    pub sigma_prime: Vec<i64>,
}

impl SpectrumPair {
    pub fn to_file(&self, name: Option<String>) -> SpectraFile {
        SpectraFile {
            name,
            lambda: self.lambda.as_slice().to_vec(),
            lambda_prime: self.lambda_prime.as_slice().to_vec(),
            sigma: self.sigma.iter().map(|&s| s.into()).collect(),
            sigma_prime: self.sigma_prime.iter().map(|&s| s.into()).collect(),
        }
    }

    pub fn from_file(file: &SpectraFile) -> Result<Self> {
        SpectrumPair::new(
            DVector::from_vec(file.lambda.clone()),
            DVector::from_vec(file.lambda_prime.clone()),
            parse_signature("sigma", &file.sigma)?,
            parse_signature("sigmaPrime", &file.sigma_prime)?,
        )
    }
}

pub fn check_interlacing(lambda: &[f64], lambda_prime: &[f64]) -> Result<()> {
    if lambda.iter().chain(lambda_prime).any(|x| !x.is_finite()) {
        return Err(Error::Interlacing("non-finite eigenvalue".into()));
    }
    for j in 0..lambda_prime.len() {
        if !(lambda[j] < lambda_prime[j] && lambda_prime[j] < lambda[j + 1]) {
            return Err(Error::Interlacing(format!(
                "expected lambda[{j}] < lambda'[{j}] < lambda[{}], got {} , {} , {}",
                j + 1,
                lambda[j],
                lambda_prime[j],
                lambda[j + 1]
            )));
        }
    }
    Ok(())
}

/// The two-degree-of-freedom families whose impact equations have closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum N2Family {
    Hopper,
    Juggler,
    Rimless,
    Rocker,
}

impl N2Family {
    pub fn signature(self) -> (Vec<Symmetry>, Vec<Symmetry>) {
        use Symmetry::*;
        match self {
            N2Family::Hopper | N2Family::Juggler => (vec![Even, Even], vec![Even]),
            N2Family::Rimless => (vec![Odd, Odd], vec![Odd]),
            N2Family::Rocker => (vec![Even, Even], vec![Odd]),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            N2Family::Hopper => "hopper",
            N2Family::Juggler => "juggler",
            N2Family::Rimless => "rimless",
            N2Family::Rocker => "rocker",
        }
    }
}

impl std::str::FromStr for N2Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hopper" => Ok(N2Family::Hopper),
            "juggler" => Ok(N2Family::Juggler),
            "rimless" => Ok(N2Family::Rimless),
            "rocker" => Ok(N2Family::Rocker),
            other => Err(Error::invalid("family", format!("unknown family `{other}`"))),
        }
    }
}

/// Raw spectra for an N = 2 family: `λ = [lambda1; lambda2]`, `λ' = [lambda_prime1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct N2Params {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_prime1: f64,
}

impl N2Params {
    /// Hopper or juggler: a zero mode plus frequencies ω₂ and ω'₁.
    pub fn hopper(omega2: f64, omega_prime1: f64) -> Self {
        N2Params {
            lambda1: 0.0,
            lambda2: omega2 * omega2,
            lambda_prime1: omega_prime1 * omega_prime1,
        }
    }

    /// Rimless wheel or rocker: unstable rate ν₁ plus frequencies ω₂ and ω'₁.
    pub fn unstable(nu1: f64, omega2: f64, omega_prime1: f64) -> Self {
        N2Params {
            lambda1: -nu1 * nu1,
            lambda2: omega2 * omega2,
            lambda_prime1: omega_prime1 * omega_prime1,
        }
    }
}

pub fn n2_spectrum(family: N2Family, params: N2Params) -> Result<SpectrumPair> {
    let N2Params {
        lambda1,
        lambda2,
        lambda_prime1,
    } = params;
    check_interlacing(&[lambda1, lambda2], &[lambda_prime1])?;
    match family {
        N2Family::Hopper | N2Family::Juggler => {
            if lambda1 != 0.0 {
                return Err(Error::invalid(
                    "lambda1",
                    format!("{} requires a zero mode, got {lambda1}", family.name()),
                ));
            }
        }
        N2Family::Rimless | N2Family::Rocker => {
            if !(lambda1 < 0.0 && lambda_prime1 > 0.0) {
                return Err(Error::invalid(
                    "lambda",
                    format!(
                        "{} requires lambda1 < 0 < lambda'1, got {lambda1}, {lambda_prime1}",
                        family.name()
                    ),
                ));
            }
        }
    }
    let (sigma, sigma_prime) = family.signature();
    SpectrumPair::new(
        DVector::from_vec(vec![lambda1, lambda2]),
        DVector::from_vec(vec![lambda_prime1]),
        sigma,
        sigma_prime,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_armed_biped_matrices() {
        let m = build_armed_biped(ArmedBipedParams::default()).unwrap();
        #[rustfmt::skip]
        let mass = DMatrix::from_row_slice(3, 3, &[
            1.0, -1.0, -1.0,
            -1.0, 2.0, 2.0,
            -1.0, 2.0, 3.0,
        ]);
        assert_eq!(m.mass, mass);
        assert_eq!(
            m.stiffness,
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0, -3.0]))
        );
        assert_eq!(m.static_force, 5.0);
        assert_eq!(m.mass, m.mass.transpose());
        assert_eq!(m.sigma, vec![Symmetry::Even; 3]);
        assert_eq!(m.sigma_prime, vec![Symmetry::Odd; 2]);
    }

    #[test]
    fn doubling_masses_doubles_matrices() {
        let base = build_armed_biped(ArmedBipedParams::default()).unwrap();
        let p = ArmedBipedParams {
            m0: 2.0,
            m1: 2.0,
            m2: 2.0,
            m3: 2.0,
            ..Default::default()
        };
        let doubled = build_armed_biped(p).unwrap();
        assert_eq!(doubled.mass, &base.mass * 2.0);
        assert_eq!(doubled.stiffness, &base.stiffness * 2.0);
    }

    #[test]
    fn non_positive_parameters_rejected() {
        let p = ArmedBipedParams {
            m2: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            build_armed_biped(p),
            Err(Error::InvalidParameter { name: "m2", .. })
        ));
        let p = ArmedBipedParams {
            length: -1.0,
            ..Default::default()
        };
        assert!(build_armed_biped(p).is_err());
    }

    #[test]
    fn json_round_trip_equals_builder() {
        let m = build_armed_biped(ArmedBipedParams::default()).unwrap();
        let text = m.to_json().unwrap();
        assert_eq!(model_from_json(&text).unwrap(), m);
    }

    fn unit_file() -> ModelFile {
        build_armed_biped(ArmedBipedParams::default()).unwrap().to_file()
    }

    #[test]
    fn asymmetric_mass_rejected() {
        let mut f = unit_file();
        f.mass[0][1] = -0.5;
        assert!(matches!(
            ModelSpec::from_file(f),
            Err(Error::AsymmetricMass { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn singular_stiffness_rejected() {
        let mut f = unit_file();
        f.stiffness[1] = vec![0.0, 0.0, 0.0];
        assert!(matches!(ModelSpec::from_file(f), Err(Error::SingularStiffness(_))));
    }

    #[test]
    fn bad_sigma_rejected() {
        let mut f = unit_file();
        f.sigma[2] = 0;
        assert!(matches!(
            ModelSpec::from_file(f),
            Err(Error::BadSignature {
                field: "sigma",
                index: 2,
                value: 0
            })
        ));
    }

    #[test]
    fn indefinite_mass_rejected() {
        let mut f = unit_file();
        f.mass[2][2] = 1.0;
        assert!(matches!(ModelSpec::from_file(f), Err(Error::MassNotPositiveDefinite)));
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let text = r#"{"name":"x","n":2,"mass":[[1,0],[0,1]],"stiffness":[[1,0],[0,2]],
            "sigma":[1,1],"sigmaPrime":[1],"staticForce":1,"contactSign":1,"extra":3}"#;
        assert!(matches!(model_from_json(text), Err(Error::Json(_))));
    }

    #[test]
    fn camel_case_schema_parses() {
        let text = r#"{"name":"x","n":2,"mass":[[1,0],[0,1]],"stiffness":[[1,0],[0,2]],
            "sigma":[1,1],"sigmaPrime":[1],"staticForce":1,"contactSign":1}"#;
        let m = model_from_json(text).unwrap();
        assert_eq!(m.static_force, 1.0);
        let spectra: SpectraFile =
            serde_json::from_str(r#"{"lambda":[-1,2],"lambdaPrime":[1],"sigma":[1,1],"sigmaPrime":[1]}"#).unwrap();
        assert_eq!(spectra.lambda_prime, vec![1.0]);
    }

    #[test]
    fn n2_family_spectra() {
        let hop = n2_spectrum(N2Family::Hopper, N2Params::hopper(1.0, 0.5)).unwrap();
        assert_eq!(hop.lambda.as_slice(), &[0.0, 1.0]);
        assert_eq!(hop.lambda_prime.as_slice(), &[0.25]);
        assert_eq!(hop.sigma, vec![Symmetry::Even, Symmetry::Even]);
        assert_eq!(hop.sigma_prime, vec![Symmetry::Even]);

        let rock = n2_spectrum(N2Family::Rocker, N2Params::unstable(1.0, 2.0, 1.0)).unwrap();
        assert_eq!(rock.lambda.as_slice(), &[-1.0, 4.0]);
        assert_eq!(rock.lambda_prime.as_slice(), &[1.0]);
        assert_eq!(rock.sigma, vec![Symmetry::Even, Symmetry::Even]);
        assert_eq!(rock.sigma_prime, vec![Symmetry::Odd]);

        let rim = n2_spectrum(N2Family::Rimless, N2Params::unstable(1.0, 2.0, 1.0)).unwrap();
        assert_eq!(rim.sigma, vec![Symmetry::Odd, Symmetry::Odd]);
        assert_eq!(rim.sigma_prime, vec![Symmetry::Odd]);
    }

    #[test]
    fn n2_interlacing_violation() {
        let bad = N2Params {
            lambda1: -1.0,
            lambda2: 4.0,
            lambda_prime1: -2.0,
        };
        assert!(matches!(
            n2_spectrum(N2Family::Rimless, bad),
            Err(Error::Interlacing(_))
        ));
        // omega'1 above omega2 also breaks interlacing
        assert!(n2_spectrum(N2Family::Rocker, N2Params::unstable(1.0, 1.0, 2.0)).is_err());
        // rocker sign structure: lambda1 must be negative
        let wrong = N2Params {
            lambda1: 0.5,
            lambda2: 4.0,
            lambda_prime1: 1.0,
        };
        assert!(matches!(
            n2_spectrum(N2Family::Rocker, wrong),
            Err(Error::InvalidParameter { .. })
        ));
    }
}
