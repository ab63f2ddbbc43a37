//! Equivalence scripts: data documents that replay a chain of Hurwitz
//! moves, block rotations and certificate-backed conjugations from a
//! start factorization to an expected one, checking invariants at every
//! step. Scripts are data (TOML), not code, so a derivation is a
//! replayable artifact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{self, CertExpr, ExprError};
use crate::factorization::{
    conjugate_by_class, hurwitz_move, rotate_block, total_monodromy_sp2, Direction, FactError,
    Factorization,
};
use crate::spgroup::{twist_matrix, GroupError, SpElement};
use crate::surface::CurveRegistry;

pub const SCRIPT_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("malformed script: {0}")]
    Malformed(String),
    #[error("step {step}: certificate does not evaluate to the claimed twist ({detail})")]
    Certificate { step: usize, detail: String },
    #[error("step {step}: {source}")]
    Move { step: usize, source: FactError },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum MoveDoc {
    /// One elementary Hurwitz move at 1-based `index`.
    Hurwitz { index: usize, direction: String },
    /// Rotate `first..=last` so the sub-block starting at `mid` comes first.
    Rotate {
        first: usize,
        mid: usize,
        last: usize,
    },
    /// Conjugate letters `from..=to` by the twist the certificate claims.
    Conjugate {
        from: usize,
        to: usize,
        claims: String,
        via: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptDoc {
    pub version: String,
    pub name: String,
    pub start: String,
    pub expect: String,
    #[serde(default)]
    pub moves: Vec<MoveDoc>,
}

impl ScriptDoc {
    pub fn from_toml_str(s: &str) -> Result<Self, ScriptError> {
        let doc: ScriptDoc =
            toml::from_str(s).map_err(|e| ScriptError::Malformed(e.to_string()))?;
        if doc.version != SCRIPT_VERSION {
            return Err(ScriptError::Malformed(format!(
                "unsupported script version {:?}",
                doc.version
            )));
        }
        Ok(doc)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("script serializes")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepReport {
    pub step: usize,
    pub description: String,
    pub elementary_moves: usize,
    pub letter_count_ok: bool,
    pub monodromy_ok: bool,
    pub certificate_ok: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScriptReport {
    pub name: String,
    pub start: String,
    pub expect: String,
    pub steps: Vec<StepReport>,
    pub final_match: bool,
    /// (index, got, expected) for every mismatching letter class.
    pub mismatches: Vec<(usize, String, String)>,
}

impl ScriptReport {
    pub fn passed(&self) -> bool {
        self.final_match
            && self.steps.iter().all(|s| {
                s.letter_count_ok && s.monodromy_ok && s.certificate_ok.unwrap_or(true)
            })
    }
}

fn eval_certificate(
    registry: &CurveRegistry,
    cert: &CertExpr,
) -> Result<SpElement, ScriptError> {
    match cert {
        CertExpr::Twist(classexpr) => {
            let class = classexpr.eval(registry)?;
            Ok(twist_matrix(&class)?)
        }
        CertExpr::Conj(a, b) => {
            let a = eval_certificate(registry, a)?;
            let b = eval_certificate(registry, b)?;
            Ok(a.mul(&b).mul(&a.inverse()))
        }
        CertExpr::ConjInv(a, b) => {
            let a = eval_certificate(registry, a)?;
            let b = eval_certificate(registry, b)?;
            Ok(a.inverse().mul(&b).mul(&a))
        }
    }
}

/// Replays a script document. Every step must preserve letter count and
/// the total monodromy shadow; conjugation steps must carry a
/// certificate that evaluates to the claimed twist. The final letter
/// class sequence is compared against the expectation.
pub fn run_script(
    registry: &CurveRegistry,
    doc: &ScriptDoc,
) -> Result<ScriptReport, ScriptError> {
    let start = expr::parse_factorization_expr(registry, &doc.start)?;
    let expect = expr::parse_factorization_expr(registry, &doc.expect)?;
    let baseline_count = start.len();
    let baseline_shadow = total_monodromy_sp2(&start);

    let mut current = start;
    let mut steps = Vec::new();
    for (idx, mv) in doc.moves.iter().enumerate() {
        let step = idx + 1;
        let (description, elementary_moves, certificate_ok) = match mv {
            MoveDoc::Hurwitz { index, direction } => {
                let dir = Direction::parse(direction).ok_or_else(|| {
                    ScriptError::Malformed(format!(
                        "step {step}: bad direction {direction:?}"
                    ))
                })?;
                current = hurwitz_move(&current, *index, dir)
                    .map_err(|source| ScriptError::Move { step, source })?;
                (format!("hurwitz {direction} at {index}"), 1, None)
            }
            MoveDoc::Rotate { first, mid, last } => {
                let (next, moves) = rotate_block(&current, *first, *mid, *last)
                    .map_err(|source| ScriptError::Move { step, source })?;
                current = next;
                (
                    format!("rotate [{first}..={last}] bringing {mid} first"),
                    moves,
                    None,
                )
            }
            MoveDoc::Conjugate {
                from,
                to,
                claims,
                via,
            } => {
                if *from == 0 || *from > *to || *to > current.len() {
                    return Err(ScriptError::Malformed(format!(
                        "step {step}: bad conjugation range {from}..={to}"
                    )));
                }
                let claimed_class = expr::parse_class_expr(registry, claims)?;
                let claimed_twist = twist_matrix(&claimed_class)?;
                let cert = expr::parse_cert_ast(via)?;
                let evaluated = eval_certificate(registry, &cert)?;
                if evaluated != claimed_twist {
                    return Err(ScriptError::Certificate {
                        step,
                        detail: format!("{via} is not the twist about {claims}"),
                    });
                }
                // conjugate only the block
                let prefix = current.letters()[..from - 1].to_vec();
                let block = Factorization::from_letters(
                    current.genus(),
                    current.letters()[from - 1..*to].to_vec(),
                )
                .map_err(|source| ScriptError::Move { step, source })?;
                let suffix = current.letters()[*to..].to_vec();
                let conj_block = conjugate_by_class(&claimed_class, &block)
                    .map_err(|source| ScriptError::Move { step, source })?;
                let mut letters = prefix;
                letters.extend(conj_block.letters().iter().cloned());
                letters.extend(suffix);
                current = Factorization::from_letters(current.genus(), letters)
                    .map_err(|source| ScriptError::Move { step, source })?;
                (
                    format!("conjugate [{from}..={to}] by t[{claims}] via {via}"),
                    0,
                    Some(true),
                )
            }
        };
        let letter_count_ok = current.len() == baseline_count;
        let monodromy_ok = total_monodromy_sp2(&current) == baseline_shadow;
        steps.push(StepReport {
            step,
            description,
            elementary_moves,
            letter_count_ok,
            monodromy_ok,
            certificate_ok,
        });
    }

    let got = current.letter_classes();
    let want = expect.letter_classes();
    let mut mismatches = Vec::new();
    if got.len() != want.len() {
        mismatches.push((
            0,
            format!("{} letters", got.len()),
            format!("{} letters", want.len()),
        ));
    } else {
        for (i, (g, w)) in got.iter().zip(&want).enumerate() {
            if g != w {
                mismatches.push((i + 1, g.render(), w.render()));
            }
        }
    }
    Ok(ScriptReport {
        name: doc.name.clone(),
        start: doc.start.clone(),
        expect: doc.expect.clone(),
        final_match: mismatches.is_empty(),
        steps,
        mismatches,
    })
}

/// The shipped reduction script: starting from `Y(p,q;p+1,q)` it swaps
/// the middle blocks, twists the lowered plain block by t[c_2] with a
/// conjugation-of-adjacent-letters certificate, and then walks both
/// conjugated blocks down to parity-(0,q) form with image-letter
/// certificates, ending in `Phi(0,q)(eta^2) * Phi(0,q)(eta^2) *
/// T(c_2)(eta^2) * eta^2`.
pub fn shipped_y_reduce(p: i64, q: i64) -> ScriptDoc {
    let mut moves = vec![
        MoveDoc::Rotate {
            first: 21,
            mid: 41,
            last: 60,
        },
        MoveDoc::Conjugate {
            from: 21,
            to: 40,
            claims: "c_2".into(),
            via: "conj(t(B_2), t(B_2+c_2))".into(),
        },
    ];
    // top block: Phi(p+1,q) images, |p+1| conjugations by t[c_2]
    let steps_a = (p + 1).unsigned_abs();
    for j in 0..steps_a {
        let k = p + j as i64;
        moves.push(MoveDoc::Conjugate {
            from: 61,
            to: 80,
            claims: "c_2".into(),
            via: format!("conj(t(Phi({k},{q})(B_3)), t(Phi({},{q})(B_3)))", k + 1),
        });
    }
    // middle block: Phi(p,q) images, |p| conjugations
    let steps_c = p.unsigned_abs();
    for j in 0..steps_c {
        let k = p - 1 + j as i64;
        moves.push(MoveDoc::Conjugate {
            from: 41,
            to: 60,
            claims: "c_2".into(),
            via: format!("conj(t(Phi({k},{q})(B_3)), t(Phi({},{q})(B_3)))", k + 1),
        });
    }
    ScriptDoc {
        version: SCRIPT_VERSION.to_string(),
        name: format!("y-reduce({p},{q})"),
        start: format!("Y({p},{q};{},{q})", p + 1),
        expect: format!("Phi(0,{q})(eta^2) * Phi(0,{q})(eta^2) * T(c_2)(eta^2) * eta^2"),
        moves,
    }
}

/// Names of shipped scripts accepted by the CLI.
pub const SHIPPED_SCRIPTS: &[&str] = &["y-reduce"];

pub fn shipped_script(name: &str, p: i64, q: i64) -> Result<ScriptDoc, ScriptError> {
    match name {
        "y-reduce" => Ok(shipped_y_reduce(p, q)),
        other => Err(ScriptError::Malformed(format!(
            "unknown shipped script {other:?} (available: {SHIPPED_SCRIPTS:?})"
        ))),
    }
}
