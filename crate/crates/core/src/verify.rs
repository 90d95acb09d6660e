//! Independent replay of a [`BoundCertificate`]: every step is recomputed
//! from the form and compared with the recorded values.

use crate::apolarity::{apolar_length, hilbert_function};
use crate::bounds::{algen, hseq_capped};
use crate::certificate::{BoundCertificate, BoundKind, ConstructionData, RuleoutMode, Step};
use crate::construct::{check_k, find_psi, verify_ruleout};
use crate::error::{Error, Result};
use crate::polyring::{apply, binomial, parse_form_with_degree, Form};

fn fail<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::CheckFailed(msg.into()))
}

fn expect_values(step: &Step, want: &[i64]) -> Result<()> {
    if step.values != want {
        return fail(format!("step {}: recorded {:?}, recomputed {:?}", step.name, step.values, want));
    }
    Ok(())
}

fn check_construction(f: &Form, data: &ConstructionData) -> Result<()> {
    let n = data.n;
    if f.nvars() != n || f.degree() != data.d || data.d.is_multiple_of(2) || data.k != (data.d - 1) / 2 {
        return fail("construction parameters do not match the form");
    }
    if data.s + 1 != binomial((n + data.k as usize - 2) as u64, u64::from(data.k)) {
        return fail("s is not C(n+k-2, k) - 1");
    }
    if &data.f != f {
        return fail("embedded F differs from the certified form");
    }
    let rebuilt = Form::var(n, 0).mul(&data.g).add(&data.k_form)?;
    if &rebuilt != f {
        return fail("F != x1*G + K");
    }
    for (name, part) in [("G", &data.g), ("K", &data.k_form), ("psi", &data.psi)] {
        if part.remove_var(0).is_err() {
            return fail(format!("{name} involves the first variable"));
        }
    }
    Ok(())
}

/// Accepts the certificate iff every step replays exactly.
pub fn check_certificate(cert: &BoundCertificate) -> Result<()> {
    let f = parse_form_with_degree(&cert.form, cert.nvars, Some(cert.degree))?;
    if f.is_zero() {
        return fail("the zero form has no lower bound to certify");
    }
    let alpha = parse_form_with_degree(&cert.alpha, cert.nvars, Some(1))?;
    if alpha.is_zero() {
        return fail("alpha is zero");
    }
    if let Some(data) = &cert.construction {
        check_construction(&f, data)?;
    } else if cert.kind == BoundKind::Construction {
        return fail("construction certificate without construction data");
    }

    let g = apply(&alpha, &f);
    let g2 = apply(&alpha, &g);
    let al_f = apolar_length(&f) as i64;
    let al1 = apolar_length(&g) as i64;
    let al2 = apolar_length(&g2) as i64;

    let mut running = 0i64;
    let mut rigorous = true;
    let mut saw_cactus = false;
    let mut saw_ruleout = false;
    for step in &cert.steps {
        let claimed = match step.name.as_str() {
            "hilbert_function" => {
                let hf = hilbert_function(&f)?;
                expect_values(step, &hf.values.iter().map(|&v| v as i64).collect::<Vec<_>>())?;
                0
            }
            "hilbert_function(G)" => {
                let Some(data) = &cert.construction else { return fail("HF(G) step without G") };
                let hf = hilbert_function(&data.g.remove_var(0)?)?;
                let want = hseq_capped(data.n - 1, data.d - 1, data.s);
                if hf.values != want {
                    return fail(format!("HF(G) = {:?}, expected {:?}", hf.values, want));
                }
                expect_values(step, &hf.values.iter().map(|&v| v as i64).collect::<Vec<_>>())?;
                0
            }
            "check_K" => {
                let Some(data) = &cert.construction else { return fail("check_K step without K") };
                if find_psi(&data.g, data.k)? != data.psi {
                    return fail("psi is not the primitive degree-k generator of G^⊥");
                }
                if !check_k(&data.g, &data.psi, &data.k_form, data.k) {
                    return fail("psi ∘ K lies in T_(k-1) ∘ G");
                }
                expect_values(step, &[1])?;
                0
            }
            "al(F)" => {
                expect_values(step, &[al_f])?;
                0
            }
            "al(alpha∘F)" => {
                expect_values(step, &[al1])?;
                0
            }
            "al(alpha^2∘F)" => {
                expect_values(step, &[al2])?;
                0
            }
            "derksen" => {
                expect_values(step, &[al1, al2])?;
                al1 - al2
            }
            "improved" => {
                let applies = al_f - al1 > al1 - al2;
                expect_values(step, &[al_f, al1, al2, i64::from(applies)])?;
                al1 - al2 + i64::from(applies)
            }
            "cactus" => {
                saw_cactus = true;
                expect_values(step, &[al_f, al1])?;
                al_f - al1
            }
            "parametric_ruleout" => {
                saw_ruleout = true;
                let Some(record) = &cert.ruleout else { return fail("rule-out step without its record") };
                if alpha != Form::var(f.nvars(), record.var) {
                    return fail("rule-out alpha is not the recorded coordinate");
                }
                if !g2.is_zero() {
                    return fail("alpha^2 ∘ F is not zero");
                }
                if al_f < 2 * al1 + 2 {
                    return fail("al(F) < 2 al(alpha∘F) + 2");
                }
                let exact = record.mode == RuleoutMode::ExactNullstellensatz;
                expect_values(step, &[1, i64::from(exact), i64::from(record.k), al1])?;
                verify_ruleout(&f, record)?;
                rigorous &= exact;
                al1 + 2
            }
            other => return fail(format!("unknown step {other}")),
        };
        running = running.max(claimed);
        if step.bound != running {
            return fail(format!("step {}: running bound {} recorded, {} recomputed", step.name, step.bound, running));
        }
    }
    if cert.bound != running {
        return fail(format!("final bound {} recorded, {} recomputed", cert.bound, running));
    }
    if cert.rigorous != rigorous {
        return fail("rigor flag does not match the steps");
    }
    if saw_cactus != cert.conditional {
        return fail("cactus bounds must be, and only they are, marked conditional");
    }
    if cert.ruleout.is_some() && !saw_ruleout {
        return fail("rule-out record without a rule-out step");
    }
    if let Some(data) = &cert.construction {
        let want = algen(data.n - 1, data.d - 1) as i64 + 1;
        if cert.bound != want {
            return fail(format!("construction bound {} differs from algen + 1 = {want}", cert.bound));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{best_bound, cactus_bound, derksen_bound};
    use crate::construct::{certify_explicit_quintic, construct_odd_degree, RuleoutPolicy};
    use crate::polyring::parse_form;

    #[test]
    fn replays_bound_certificates() {
        let f = parse_form("x*y^2*z^2 + z^5", 3).unwrap();
        check_certificate(&best_bound(&f, 3, 2).unwrap()).unwrap();
        check_certificate(&derksen_bound(&f, &parse_form("a + 2*c", 3).unwrap()).unwrap()).unwrap();
        check_certificate(&cactus_bound(&f, &parse_form("b", 3).unwrap()).unwrap()).unwrap();
    }

    #[test]
    fn replays_quintic_and_construction() {
        let q = certify_explicit_quintic().unwrap();
        check_certificate(&q).unwrap();
        let json = q.to_json();
        let back: BoundCertificate = serde_json::from_str(&json).unwrap();
        check_certificate(&back).unwrap();
        let c = construct_odd_degree(3, 5, 3, 50, RuleoutPolicy::ExactOnly).unwrap();
        check_certificate(&c.certificate).unwrap();
    }

    #[test]
    fn rejects_tampering() {
        let q = certify_explicit_quintic().unwrap();
        let mut bumped = q.clone();
        bumped.bound = 11;
        assert!(check_certificate(&bumped).is_err());
        let mut wrong_al = q.clone();
        wrong_al.steps[1].values = vec![19];
        assert!(check_certificate(&wrong_al).is_err());
        let mut other_form = q.clone();
        other_form.form = "x*y*z^3 + y^5".into();
        assert!(check_certificate(&other_form).is_err());
        let mut no_record = q.clone();
        no_record.ruleout = None;
        assert!(check_certificate(&no_record).is_err());
        let mut fake_rigor = q;
        fake_rigor.rigorous = false;
        assert!(check_certificate(&fake_rigor).is_err());
        let mut c = construct_odd_degree(3, 5, 3, 50, RuleoutPolicy::ExactOnly).unwrap().certificate;
        if let Some(data) = c.construction.as_mut() {
            data.s += 1;
        }
        assert!(check_certificate(&c).is_err());
    }
}
