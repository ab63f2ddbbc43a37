//! Positive Dehn-twist factorizations and Hurwitz moves, tracked at the
//! mod-2 homology level.
//!
//! Letters are stored with index 1 first: `letters[0]` is the twist that
//! applies first. The total monodromy shadow multiplies twist matrices
//! with the first letter rightmost. Hurwitz moves preserve letter count
//! and the shadow; over GF(2) the forward and inverse moves act
//! identically on classes, so the direction only shows up in labels.

use thiserror::Error;

use crate::gf2::BitMatrix;
use crate::spgroup::twist_matrix;
use crate::surface::{
    apply_word, transvect, CurveRegistry, HomologyClass, MappingClassWord, SurfaceError,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FactError {
    #[error("letters must be twists about nonzero classes")]
    ZeroClass,
    #[error("genus mismatch: {0} vs {1}")]
    GenusMismatch(usize, usize),
    #[error("no curve registry for fiber genus {0}")]
    NoRegistryForGenus(usize),
    #[error("move index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("bad block range {0}..={1}")]
    BadRange(usize, usize),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// One positive Dehn-twist letter: a nonzero class plus a provenance label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Letter {
    class: HomologyClass,
    label: String,
}

impl Letter {
    pub fn new(class: HomologyClass, label: impl Into<String>) -> Result<Self, FactError> {
        if class.is_zero() {
            return Err(FactError::ZeroClass);
        }
        Ok(Self {
            class,
            label: label.into(),
        })
    }

    pub fn class(&self) -> &HomologyClass {
        &self.class
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Ordered positive factorization; `letters[0]` applies first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    genus: usize,
    letters: Vec<Letter>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "forward" => Some(Direction::Forward),
            "inverse" => Some(Direction::Inverse),
            _ => None,
        }
    }
}

impl Factorization {
    pub fn empty(genus: usize) -> Self {
        Self {
            genus,
            letters: Vec::new(),
        }
    }

    pub fn from_letters(genus: usize, letters: Vec<Letter>) -> Result<Self, FactError> {
        for l in &letters {
            if l.class.genus() != genus {
                return Err(FactError::GenusMismatch(genus, l.class.genus()));
            }
        }
        Ok(Self { genus, letters })
    }

    /// Fiber genus.
    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Letter at 1-based index (index 1 applies first).
    pub fn letter(&self, index: usize) -> Option<&Letter> {
        if index == 0 {
            return None;
        }
        self.letters.get(index - 1)
    }

    pub fn letter_classes(&self) -> Vec<HomologyClass> {
        self.letters.iter().map(|l| l.class.clone()).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.letters.iter().map(|l| l.label.clone()).collect()
    }

    /// Concatenation: `self` applies first, then `later`.
    pub fn then(&self, later: &Factorization) -> Result<Factorization, FactError> {
        if !self.letters.is_empty() && !later.letters.is_empty() && self.genus != later.genus {
            return Err(FactError::GenusMismatch(self.genus, later.genus));
        }
        let genus = if self.letters.is_empty() && later.genus != 0 {
            later.genus
        } else {
            self.genus
        };
        let mut letters = self.letters.clone();
        letters.extend(later.letters.iter().cloned());
        Ok(Factorization { genus, letters })
    }
}

// Empty products need a genus to live in; expr evaluation starts from
// Factorization::empty(registry.genus()), so `then` keeps the nonempty side's.

/// The branch-curve factorization for the double-cover fibration with
/// parameter g: letters B_0..B_{2g+1}, then b_{g+1} twice, then b_{g+1}'
/// twice, on a fiber of genus 2g+1 (2g+6 letters total).
pub fn eta(registry: &CurveRegistry, g: usize) -> Result<Factorization, FactError> {
    if g < 1 {
        return Err(FactError::NoRegistryForGenus(0));
    }
    let fiber_genus = 2 * g + 1;
    if registry.genus() != fiber_genus {
        return Err(FactError::NoRegistryForGenus(fiber_genus));
    }
    let mut names: Vec<String> = (0..=2 * g + 1).map(|j| format!("B_{j}")).collect();
    names.push(format!("b_{}", g + 1));
    names.push(format!("b_{}", g + 1));
    names.push(format!("b_{}'", g + 1));
    names.push(format!("b_{}'", g + 1));
    let mut letters = Vec::with_capacity(2 * g + 6);
    for name in names {
        let class = registry.get(&name)?.clone();
        letters.push(Letter::new(class, name)?);
    }
    Factorization::from_letters(fiber_genus, letters)
}

/// `eta` repeated `power` times, with g inferred from the registry genus.
pub fn eta_power(registry: &CurveRegistry, power: u32) -> Result<Factorization, FactError> {
    let genus = registry.genus();
    if genus < 3 || genus.is_multiple_of(2) {
        return Err(FactError::NoRegistryForGenus(genus));
    }
    let g = (genus - 1) / 2;
    let base = eta(registry, g)?;
    let mut acc = Factorization::empty(genus);
    for _ in 0..power {
        acc = acc.then(&base)?;
    }
    Ok(acc)
}

/// Conjugates every letter by a mapping-class word; labels gain the word
/// name as a prefix.
pub fn conjugate_factorization(
    registry: &CurveRegistry,
    f: &MappingClassWord,
    w: &Factorization,
) -> Result<Factorization, FactError> {
    if f.entries.is_empty() {
        return Ok(w.clone());
    }
    let prefix = f.display();
    let letters = w
        .letters
        .iter()
        .map(|l| {
            let class = apply_word(registry, f, &l.class)?;
            Letter::new(class, format!("{prefix}({})", l.label))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Factorization::from_letters(w.genus, letters)
}

/// Conjugates every letter by the twist about `c` (transvection on classes).
/// Labels of letters whose class actually moves are rewritten to a bounded
/// "c~<class>" form so repeated conjugation cannot grow them.
pub fn conjugate_by_class(
    c: &HomologyClass,
    w: &Factorization,
) -> Result<Factorization, FactError> {
    let letters = w
        .letters
        .iter()
        .map(|l| {
            let class = transvect(c, &l.class)?;
            if class == l.class {
                Ok(l.clone())
            } else {
                let label = format!("c~{}", class.render());
                Letter::new(class, label)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Factorization::from_letters(w.genus, letters)
}

/// One elementary Hurwitz move at 1-based index i (1 <= i <= n-1).
///
/// Forward: letters (i+1, i) = (a, b) become (t_a(b), a).
/// Inverse: they become (b, t_b^{-1}(a)); over GF(2) the class map of
/// t^{-1} equals that of t.
pub fn hurwitz_move(
    w: &Factorization,
    index: usize,
    direction: Direction,
) -> Result<Factorization, FactError> {
    let n = w.letters.len();
    if index == 0 || index + 1 > n || n < 2 {
        return Err(FactError::IndexOutOfRange {
            index,
            max: n.saturating_sub(1),
        });
    }
    let lo = index - 1; // 0-based position of index i
    let hi = index; // 0-based position of index i+1
    let a = w.letters[hi].clone();
    let b = w.letters[lo].clone();
    let mut letters = w.letters.clone();
    match direction {
        Direction::Forward => {
            let moved = transvect(&a.class, &b.class)?;
            letters[hi] = if moved == b.class {
                b
            } else {
                Letter::new(moved.clone(), format!("f~{}", moved.render()))?
            };
            letters[lo] = a;
        }
        Direction::Inverse => {
            let moved = transvect(&b.class, &a.class)?;
            letters[hi] = b;
            letters[lo] = if moved == a.class {
                a
            } else {
                Letter::new(moved.clone(), format!("i~{}", moved.render()))?
            };
        }
    }
    Factorization::from_letters(w.genus, letters)
}

/// Block rotation expressed as elementary forward moves: within the
/// 1-based range `first..=last`, the sub-block starting at `mid` is moved
/// in front of `first..mid-1`. Returns the result and the number of
/// elementary moves performed.
pub fn rotate_block(
    w: &Factorization,
    first: usize,
    mid: usize,
    last: usize,
) -> Result<(Factorization, usize), FactError> {
    if !(1 <= first && first <= mid && mid <= last && last <= w.len()) {
        return Err(FactError::BadRange(first, last));
    }
    let mut acc = w.clone();
    let mut moves = 0usize;
    for k in mid..=last {
        // Drop the letter now at position k down to first + (k - mid).
        let target = first + (k - mid);
        for j in (target..k).rev() {
            acc = hurwitz_move(&acc, j, Direction::Forward)?;
            moves += 1;
        }
    }
    Ok((acc, moves))
}

/// Ordered product of the letters' transvection matrices, first letter
/// rightmost: the mod-2 shadow of the total monodromy.
pub fn total_monodromy_sp2(w: &Factorization) -> BitMatrix {
    let n = 2 * w.genus;
    let mut acc = BitMatrix::identity(n);
    for letter in &w.letters {
        let t = twist_matrix(letter.class())
            .expect("letters are nonzero by construction")
            .into_matrix();
        acc = t.mul(&acc);
    }
    acc
}

/// Euler characteristic of the fibration over the sphere described by the
/// factorization: 2(2 - 2h) + n for fiber genus h and n critical points.
pub fn euler_characteristic(w: &Factorization) -> i64 {
    let h = w.genus as i64;
    2 * (2 - 2 * h) + w.letters.len() as i64
}

/// `xi(p,q)`: the conjugated double word `Phi(p,q)(eta^2) . eta^2`
/// (plain block applied first), 40 letters at genus 5.
pub fn xi(registry: &CurveRegistry, p: i64, q: i64) -> Result<Factorization, FactError> {
    let eta2 = eta_power(registry, 2)?;
    let conj = conjugate_factorization(registry, &crate::surface::kanenobu_word(p, q), &eta2)?;
    eta2.then(&conj)
}

/// `Y(p,q;r,s)`: the fiber-sum word
/// `Phi(r,s)(eta^2) . eta^2 . Phi(p,q)(eta^2) . eta^2`, 80 letters.
pub fn y_fact(
    registry: &CurveRegistry,
    p: i64,
    q: i64,
    r: i64,
    s: i64,
) -> Result<Factorization, FactError> {
    let lhs = xi(registry, p, q)?;
    let rhs = xi(registry, r, s)?;
    lhs.then(&rhs)
}
