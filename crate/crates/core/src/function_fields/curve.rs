//! Curve models over F_q and naive projective point counting over F_{q^m}.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fq::{Fq, FqField, MAX_FIELD_SIZE};
use super::fq_poly::{self, FqPoly};
use super::zeta::ZetaNumerator;
use crate::error::{Error, Result};

/// Largest number of affine candidates a plane count may visit.
pub const PLANE_POINT_BUDGET: u64 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaneTerm {
    pub coeff: i64,
    pub x: u32,
    pub y: u32,
    pub z: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum CurveModel {
    #[serde(rename = "P1")]
    ProjectiveLine,
    /// a1, a2, a3, a4, a6.
    Weierstrass { a: [i64; 5] },
    /// Homogeneous F(X, Y, Z) = Σ coeff·X^x·Y^y·Z^z.
    Plane { terms: Vec<PlaneTerm> },
    /// y² + h(x)·y = f(x), coefficients constant term first.
    Hyperelliptic { f: Vec<i64>, h: Vec<i64> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub q: u64,
    #[serde(flatten)]
    pub model: CurveModel,
}

impl CurveSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn parse_ints(s: &str) -> Result<Vec<i64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect()
}

fn join(v: &[i64]) -> String {
    v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

impl FromStr for CurveModel {
    type Err = Error;

    /// `P1`, `weierstrass:a1,a2,a3,a4,a6`, `plane:c,i,j,k;…`, `hyperelliptic:f0,f1,…;h0,…`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, body) = s.split_once(':').unwrap_or((s, ""));
        match kind.to_ascii_lowercase().as_str() {
            "p1" => {
                if !body.trim().is_empty() {
                    return Err(Error::Parse("P1 takes no coefficients".into()));
                }
                Ok(CurveModel::ProjectiveLine)
            }
            "weierstrass" => {
                let v = parse_ints(body)?;
                let a: [i64; 5] = v
                    .try_into()
                    .map_err(|_| Error::Parse("weierstrass needs five coefficients a1,a2,a3,a4,a6".into()))?;
                Ok(CurveModel::Weierstrass { a })
            }
            "plane" => {
                let mut terms = Vec::new();
                for chunk in body.split(';').filter(|c| !c.trim().is_empty()) {
                    let v = parse_ints(chunk)?;
                    if v.len() != 4 || v[1..].iter().any(|&e| !(0..=64).contains(&e)) {
                        return Err(Error::Parse(format!("plane term {chunk:?} is not coeff,i,j,k")));
                    }
                    terms.push(PlaneTerm { coeff: v[0], x: v[1] as u32, y: v[2] as u32, z: v[3] as u32 });
                }
                Ok(CurveModel::Plane { terms })
            }
            "hyperelliptic" => {
                let (f, h) = body.split_once(';').unwrap_or((body, ""));
                Ok(CurveModel::Hyperelliptic { f: parse_ints(f)?, h: parse_ints(h)? })
            }
            other => Err(Error::Parse(format!("unknown curve model {other:?}"))),
        }
    }
}

impl fmt::Display for CurveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveModel::ProjectiveLine => write!(f, "P1"),
            CurveModel::Weierstrass { a } => write!(f, "weierstrass:{}", join(a)),
            CurveModel::Plane { terms } => {
                let t: Vec<String> =
                    terms.iter().map(|t| format!("{},{},{},{}", t.coeff, t.x, t.y, t.z)).collect();
                write!(f, "plane:{}", t.join(";"))
            }
            CurveModel::Hyperelliptic { f: fp, h } => write!(f, "hyperelliptic:{};{}", join(fp), join(h)),
        }
    }
}

/// Coefficient conventions: over a prime field any integer is reduced; otherwise
/// 0 ≤ c < q is an element index and −c its negative.
pub fn coeff_to_fq(field: &FqField, c: i64) -> Result<Fq> {
    if field.degree() == 1 {
        return Ok(field.from_int(c));
    }
    let q = field.size() as i64;
    if (0..q).contains(&c) {
        Ok(c as Fq)
    } else if (-q + 1..0).contains(&c) {
        Ok(field.neg((-c) as Fq))
    } else {
        Err(Error::invalid(format!("coefficient {c} is not an element index of F_{q}")))
    }
}

#[derive(Clone, Debug)]
enum Form {
    Line,
    /// y² + h·y = f with the points at infinity read off (h_{g+1}, f_{2g+2}).
    Double { f: FqPoly, h: FqPoly },
    Plane { terms: Vec<(Fq, u32, u32, u32)> },
}

#[derive(Clone, Debug)]
pub struct Curve {
    spec: CurveSpec,
    field: FqField,
    genus: u32,
    form: Form,
}

impl Curve {
    pub fn new(spec: CurveSpec) -> Result<Self> {
        let field = FqField::new(spec.q)?;
        let (genus, form) = match &spec.model {
            CurveModel::ProjectiveLine => (0, Form::Line),
            CurveModel::Weierstrass { a } => {
                let c: Vec<Fq> = a.iter().map(|&x| coeff_to_fq(&field, x)).collect::<Result<_>>()?;
                if weierstrass_discriminant(&field, &c) == 0 {
                    return Err(Error::invalid("singular Weierstrass model (discriminant 0)"));
                }
                let f = vec![c[4], c[3], c[1], 1];
                let mut h = vec![c[2], c[0]];
                fq_poly::trim(&mut h);
                (1, Form::Double { f, h })
            }
            CurveModel::Hyperelliptic { f, h } => {
                let mut fp: FqPoly = f.iter().map(|&x| coeff_to_fq(&field, x)).collect::<Result<_>>()?;
                let mut hp: FqPoly = h.iter().map(|&x| coeff_to_fq(&field, x)).collect::<Result<_>>()?;
                fq_poly::trim(&mut fp);
                fq_poly::trim(&mut hp);
                let g = hyperelliptic_genus(&field, &fp, &hp)?;
                (g, Form::Double { f: fp, h: hp })
            }
            CurveModel::Plane { terms } => {
                if terms.is_empty() {
                    return Err(Error::invalid("plane curve without terms"));
                }
                let d = terms[0].x + terms[0].y + terms[0].z;
                if terms.iter().any(|t| t.x + t.y + t.z != d) {
                    return Err(Error::invalid("plane curve polynomial is not homogeneous"));
                }
                let mut merged: Vec<(Fq, u32, u32, u32)> = Vec::new();
                for t in terms {
                    let c = coeff_to_fq(&field, t.coeff)?;
                    match merged.iter_mut().find(|m| (m.1, m.2, m.3) == (t.x, t.y, t.z)) {
                        Some(m) => m.0 = field.add(m.0, c),
                        None => merged.push((c, t.x, t.y, t.z)),
                    }
                }
                merged.retain(|m| m.0 != 0);
                if merged.is_empty() || d == 0 {
                    return Err(Error::invalid("plane curve polynomial vanishes or is constant"));
                }
                ((d - 1) * (d.max(2) - 2) / 2, Form::Plane { terms: merged })
            }
        };
        let curve = Curve { spec, field, genus, form };
        if let Form::Plane { .. } = curve.form {
            // rational singular points are rejected here; others surface during counting
            curve.count_points(1)?;
        }
        Ok(curve)
    }

    pub fn from_descriptor(q: u64, descriptor: &str) -> Result<Self> {
        Curve::new(CurveSpec { q, model: descriptor.parse()? })
    }

    pub fn projective_line(q: u64) -> Result<Self> {
        Curve::new(CurveSpec { q, model: CurveModel::ProjectiveLine })
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn q(&self) -> u64 {
        self.spec.q
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn field(&self) -> &FqField {
        &self.field
    }

    /// Number of F_{q^m}-rational points of the smooth projective model.
    pub fn count_points(&self, m: u32) -> Result<u64> {
        if m == 0 {
            return Err(Error::invalid("point counts start at m = 1"));
        }
        let big_q = crate::arith::checked_pow(self.q(), m)
            .filter(|&x| x <= MAX_FIELD_SIZE)
            .ok_or_else(|| Error::Budget(format!("F_{{{}^{m}}} exceeds the enumeration budget", self.q())))?;
        if let Form::Line = self.form {
            return Ok(big_q + 1);
        }
        let ext = if m == 1 { self.field.clone() } else { FqField::new(big_q)? };
        let emb = ext.embedding(&self.field)?;
        let lift = |p: &[Fq]| -> FqPoly { p.iter().map(|&c| emb[c as usize]).collect() };
        match &self.form {
            Form::Line => unreachable!(),
            Form::Double { f, h } => {
                let (f, h) = (lift(f), lift(h));
                let affine: u64 = (0..big_q as Fq)
                    .into_par_iter()
                    .map(|x| ext.quadratic_solutions(fq_poly::eval(&ext, &h, x), fq_poly::eval(&ext, &f, x)))
                    .sum();
                let g = self.genus as usize;
                let lead_h = *h.get(g + 1).unwrap_or(&0);
                let lead_f = *f.get(2 * g + 2).unwrap_or(&0);
                Ok(affine + ext.quadratic_solutions(lead_h, lead_f))
            }
            Form::Plane { terms } => {
                if big_q.saturating_mul(big_q) > PLANE_POINT_BUDGET {
                    return Err(Error::Budget(format!("{big_q}² plane candidates exceed the budget")));
                }
                let terms: Vec<(Fq, u32, u32, u32)> =
                    terms.iter().map(|&(c, i, j, k)| (emb[c as usize], i, j, k)).collect();
                let plane = PlaneEval { field: &ext, terms: &terms };
                let affine: Result<u64> = (0..big_q as Fq)
                    .into_par_iter()
                    .map(|x| {
                        let mut n = 0;
                        for y in ext.elements() {
                            if plane.on_curve([x, y, 1])? {
                                n += 1;
                            }
                        }
                        Ok(n)
                    })
                    .sum();
                let mut n = affine?;
                for x in ext.elements() {
                    if plane.on_curve([x, 1, 0])? {
                        n += 1;
                    }
                }
                if plane.on_curve([1, 0, 0])? {
                    n += 1;
                }
                Ok(n)
            }
        }
    }

    /// N_1, …, N_k.
    pub fn point_counts(&self, k: u32) -> Result<Vec<u64>> {
        (1..=k).map(|m| self.count_points(m)).collect()
    }

    /// P(u) from N_1..N_g, validated against N_{g+1}.
    pub fn zeta_numerator(&self) -> Result<ZetaNumerator> {
        let counts = self.point_counts(self.genus + 1)?;
        ZetaNumerator::from_counts(self.q(), self.genus, &counts)
    }
}

struct PlaneEval<'a> {
    field: &'a FqField,
    terms: &'a [(Fq, u32, u32, u32)],
}

impl PlaneEval<'_> {
    fn monomial(&self, c: Fq, e: [u32; 3], pt: [Fq; 3]) -> Fq {
        let f = self.field;
        let mut v = c;
        for i in 0..3 {
            if e[i] > 0 {
                v = f.mul(v, f.pow(pt[i], e[i] as u64));
            }
        }
        v
    }

    fn value(&self, pt: [Fq; 3]) -> Fq {
        self.terms
            .iter()
            .fold(0, |acc, &(c, i, j, k)| self.field.add(acc, self.monomial(c, [i, j, k], pt)))
    }

    fn partial(&self, var: usize, pt: [Fq; 3]) -> Fq {
        let f = self.field;
        self.terms.iter().fold(0, |acc, &(c, i, j, k)| {
            let mut e = [i, j, k];
            if e[var] == 0 {
                return acc;
            }
            let factor = f.mul(c, f.from_int(e[var] as i64));
            e[var] -= 1;
            f.add(acc, self.monomial(factor, e, pt))
        })
    }

    fn on_curve(&self, pt: [Fq; 3]) -> Result<bool> {
        if self.value(pt) != 0 {
            return Ok(false);
        }
        if (0..3).all(|v| self.partial(v, pt) == 0) {
            return Err(Error::invalid(format!("plane curve is singular at {pt:?}")));
        }
        Ok(true)
    }
}

fn weierstrass_discriminant(f: &FqField, a: &[Fq]) -> Fq {
    let (a1, a2, a3, a4, a6) = (a[0], a[1], a[2], a[3], a[4]);
    let k = |c: i64| f.from_int(c);
    let m = |x: Fq, y: Fq| f.mul(x, y);
    let b2 = f.add(m(a1, a1), m(k(4), a2));
    let b4 = f.add(m(k(2), a4), m(a1, a3));
    let b6 = f.add(m(a3, a3), m(k(4), a6));
    let b8 = {
        let t1 = m(m(a1, a1), a6);
        let t2 = m(k(4), m(a2, a6));
        let t3 = m(a1, m(a3, a4));
        let t4 = m(a2, m(a3, a3));
        let t5 = m(a4, a4);
        f.sub(f.add(f.sub(f.add(t1, t2), t3), t4), t5)
    };
    let d1 = m(m(b2, b2), b8);
    let d2 = m(k(8), m(b4, m(b4, b4)));
    let d3 = m(k(27), m(b6, b6));
    let d4 = m(k(9), m(b2, m(b4, b6)));
    f.add(f.neg(f.add(f.add(d1, d2), d3)), d4)
}

fn hyperelliptic_genus(field: &FqField, f: &[Fq], h: &[Fq]) -> Result<u32> {
    let df = fq_poly::degree(f);
    let dh = fq_poly::degree(h);
    if field.characteristic() != 2 {
        // y ↦ y − h/2 turns the model into y² = f + h²/4
        let quarter = field.inv(field.from_int(4)).expect("odd characteristic");
        let big_f = fq_poly::add(field, f, &fq_poly::scale(field, &fq_poly::mul(field, h, h), quarter));
        let d = fq_poly::degree(&big_f).unwrap_or(0);
        if d < 3 {
            return Err(Error::invalid("hyperelliptic model needs deg(f + h²/4) ≥ 3"));
        }
        let g = fq_poly::gcd(field, &big_f, &fq_poly::derivative(field, &big_f));
        if g.len() != 1 {
            return Err(Error::invalid("hyperelliptic model is singular (repeated root)"));
        }
        return Ok((d as u32).div_ceil(2) - 1);
    }
    let dh = dh.ok_or_else(|| Error::invalid("in characteristic 2 the model needs h ≠ 0"))? as u32;
    let df = df.unwrap_or(0) as u32;
    let g = (dh.max(1) - 1).max(df.div_ceil(2) - 1);
    if g == 0 {
        return Err(Error::invalid("hyperelliptic model has genus 0"));
    }
    Ok(g)
}
