//! Lifted Gabidulin (Kötter–Kschischang) constant-dimension code.
//!
//! A message `a ∈ GF(2^m)` selects the degree-0 linearized polynomial
//! `f(x) = a·x`. Evaluating it at `k` GF(2)-independent points `g_1..g_k`
//! and expanding each value to `m` bits gives a `k×m` binary block `X`.
//! The codeword is the row space of `[I_k | X]`. With `k = m = 8` this is
//! the (16, 256, 16, 8) code: 256 subspaces of dimension 8 in F_2^16, any
//! two at subspace distance 16.

use std::fmt;

use thiserror::Error;

use crate::bitlinalg::{rank, row_space, subspace_distance, BitMatrix, Subspace};
use crate::gf2m::{eval_linearized, expand_bits, FieldElement, FieldParams};

/// A codeword of the (16,256,16,8) code, as printed row by row.
pub const REFERENCE_FIXTURE: &str = "\
1000000000000001
0100000010110011
0010000001010111
0001000010101101
0000100011001011
0000010011111101
0000001001000011
0000000100011101
";

/// The 8×16 fixture matrix.
pub fn reference_matrix() -> BitMatrix {
    REFERENCE_FIXTURE.parse().expect("fixture is well formed")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("need between 1 and {max} evaluation points, got {got}")]
    PointCount { got: usize, max: usize },
    #[error("evaluation points are not GF(2)-linearly independent")]
    DependentPoints,
    #[error("evaluation point {0:?} belongs to a different field")]
    ForeignPoint(FieldElement),
}

/// Several codewords are at the same minimum distance from the received space.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{ties} codewords tie at subspace distance {distance}")]
pub struct AmbiguousError {
    pub distance: usize,
    pub ties: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeParams {
    field: FieldParams,
    eval_points: Vec<FieldElement>,
}

impl CodeParams {
    pub fn new(field: FieldParams, eval_points: Vec<FieldElement>) -> Result<Self, CodeError> {
        let m = field.m() as usize;
        if eval_points.is_empty() || eval_points.len() > m {
            return Err(CodeError::PointCount {
                got: eval_points.len(),
                max: m,
            });
        }
        if let Some(p) = eval_points.iter().find(|p| *p.params() != field) {
            return Err(CodeError::ForeignPoint(*p));
        }
        let expanded = stack_rows(eval_points.iter().map(|&g| expand_bits(g)));
        if rank(&expanded) != eval_points.len() {
            return Err(CodeError::DependentPoints);
        }
        Ok(Self { field, eval_points })
    }

    /// Evaluation points α^0..α^(m-1), i.e. the polynomial basis.
    pub fn with_polynomial_basis(field: FieldParams) -> Self {
        let points = (0..field.m()).map(|k| field.alpha_pow(k)).collect();
        Self::new(field, points).expect("polynomial basis is independent")
    }

    /// Parameters whose codeword for message 1 is `word = [I | X]`: the
    /// evaluation points are the rows of `X` read as field elements.
    /// Fails when the rows of `X` are dependent.
    pub fn through_codeword(field: FieldParams, word: &BitMatrix) -> Result<Self, CodeError> {
        let m = field.m() as usize;
        let k = word.rows();
        if word.cols() != k + m || k == 0 || k > m {
            return Err(CodeError::PointCount { got: k, max: m });
        }
        if word.columns(0, k) != BitMatrix::identity(k) {
            return Err(CodeError::DependentPoints);
        }
        let points = (0..k)
            .map(|r| {
                let v = (0..m).fold(0u32, |acc, c| acc | (word.get(r, k + c) as u32) << c);
                field.element(v)
            })
            .collect();
        Self::new(field, points)
    }

    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    pub fn eval_points(&self) -> &[FieldElement] {
        &self.eval_points
    }

    /// Dimension of every codeword subspace.
    pub fn k_dim(&self) -> usize {
        self.eval_points.len()
    }

    /// Packet length `k + m`.
    pub fn n_ambient(&self) -> usize {
        self.k_dim() + self.field.m() as usize
    }

    /// Number of codewords, `2^m`.
    pub fn cardinality(&self) -> usize {
        self.field.order() as usize
    }

    /// Twice the rank distance of the underlying Gabidulin code.
    pub fn d_min(&self) -> usize {
        2 * self.k_dim()
    }
}

impl Default for CodeParams {
    /// The (16, 256, 16, 8) code over modulus 0x11D.
    fn default() -> Self {
        Self::with_polynomial_basis(FieldParams::default())
    }
}

fn stack_rows(rows: impl Iterator<Item = BitMatrix>) -> BitMatrix {
    rows.reduce(|acc, r| acc.stack(&r)).expect("at least one row")
}

#[derive(Clone, PartialEq, Eq)]
pub struct Codeword {
    message: FieldElement,
    matrix: BitMatrix,
    subspace: Subspace,
}

impl Codeword {
    pub fn message(&self) -> FieldElement {
        self.message
    }

    /// Generator matrix `[I | X]`.
    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    /// The `X` block.
    pub fn x_block(&self) -> BitMatrix {
        let k = self.matrix.rows();
        self.matrix.columns(k, self.matrix.cols())
    }
}

impl fmt::Debug for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Codeword(message {:?})", self.message)
    }
}

pub fn encode(message: FieldElement, params: &CodeParams) -> Codeword {
    assert_eq!(message.params(), params.field(), "message from a different field");
    let k = params.k_dim();
    let x = stack_rows(
        params
            .eval_points
            .iter()
            .map(|&g| expand_bits(eval_linearized(message, g))),
    );
    let matrix = BitMatrix::identity(k).hconcat(&x);
    // [I | X] is already reduced, so its RREF basis is the matrix itself
    let subspace = row_space(&matrix);
    debug_assert_eq!(subspace.basis(), &matrix);
    Codeword {
        message,
        matrix,
        subspace,
    }
}

/// The packets carried by a codeword: its generator rows, in order.
pub fn extract_packets(c: &Codeword) -> Vec<BitMatrix> {
    (0..c.matrix.rows()).map(|i| c.matrix.row(i)).collect()
}

#[derive(Clone)]
pub struct Codebook {
    params: CodeParams,
    words: Vec<Codeword>,
}

/// Result of a successful minimum-distance decode.
#[derive(Debug, Clone, Copy)]
pub struct Decoded<'a> {
    pub word: &'a Codeword,
    pub distance: usize,
}

impl Codebook {
    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    /// Codewords indexed by message value.
    pub fn words(&self) -> &[Codeword] {
        &self.words
    }

    pub fn get(&self, message: u32) -> &Codeword {
        &self.words[message as usize]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Index of the codeword whose subspace equals `s`, if any.
    pub fn find(&self, s: &Subspace) -> Option<usize> {
        self.words.iter().position(|w| &w.subspace == s)
    }

    /// Plain-text export: each codeword as rows of '0'/'1', blocks
    /// separated by a blank line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, w) in self.words.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&w.matrix.to_string());
            out.push('\n');
        }
        out
    }
}

pub fn generate_codebook(params: &CodeParams) -> Codebook {
    let words = params
        .field()
        .elements()
        .map(|a| encode(a, params))
        .collect();
    Codebook {
        params: params.clone(),
        words,
    }
}

/// Exhaustive minimum-subspace-distance decoding; ties are an error.
pub fn decode_ml<'a>(received: &Subspace, book: &'a Codebook) -> Result<Decoded<'a>, AmbiguousError> {
    assert_eq!(
        received.ambient_dim(),
        book.params.n_ambient(),
        "received subspace has the wrong ambient dimension"
    );
    let mut best = usize::MAX;
    let mut best_idx = 0;
    let mut ties = 0;
    for (i, w) in book.words.iter().enumerate() {
        let d = subspace_distance(received, &w.subspace);
        if d < best {
            best = d;
            best_idx = i;
            ties = 1;
        } else if d == best {
            ties += 1;
        }
    }
    if ties != 1 {
        return Err(AmbiguousError {
            distance: best,
            ties,
        });
    }
    Ok(Decoded {
        word: &book.words[best_idx],
        distance: best,
    })
}

/// Parses the plain-text codebook format back into generator matrices.
pub fn parse_codebook_text(text: &str) -> Result<Vec<BitMatrix>, crate::bitlinalg::ParseMatrixError> {
    let mut blocks = Vec::new();
    let mut current = String::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(current.parse()?);
                current.clear();
            }
        } else {
            current.push_str(line);
            current.push('\n');
        }
    }
    if !current.is_empty() {
        blocks.push(current.parse()?);
    }
    Ok(blocks)
}

/// Structural checks of a candidate codeword matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureReport {
    pub shape_ok: bool,
    pub is_rref: bool,
    pub pivots_leading: bool,
    pub rank: usize,
    pub x_rank: usize,
    pub dim: usize,
    /// Message of the generated codeword with the same row space.
    pub member: Option<u32>,
    /// Smallest distance to any generated codeword, and how many attain it.
    pub nearest_distance: usize,
    pub nearest_count: usize,
}

impl FixtureReport {
    /// Shape, RREF with leading identity, full rank, and an `X` block of
    /// full rank (or zero, which only the zero message produces).
    pub fn structure_ok(&self) -> bool {
        self.shape_ok
            && self.is_rref
            && self.pivots_leading
            && self.rank == self.dim
            && (self.x_rank == self.dim || self.x_rank == 0)
    }
}

impl fmt::Display for FixtureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
        writeln!(f, "shape:             {}", mark(self.shape_ok))?;
        writeln!(f, "rref:              {}", mark(self.is_rref))?;
        writeln!(f, "leading pivots:    {}", mark(self.pivots_leading))?;
        writeln!(f, "rank:              {}", self.rank)?;
        writeln!(f, "X block rank:      {}", self.x_rank)?;
        writeln!(f, "row space dim:     {}", self.dim)?;
        match self.member {
            Some(msg) => writeln!(f, "codebook member:   message {msg:#04x}")?,
            None => writeln!(f, "codebook member:   no")?,
        }
        write!(
            f,
            "nearest codeword:  distance {} ({} at that distance)",
            self.nearest_distance, self.nearest_count
        )
    }
}

pub fn verify_fixture(fix: &BitMatrix, book: &Codebook) -> FixtureReport {
    let k = book.params.k_dim();
    let n = book.params.n_ambient();
    let shape_ok = fix.rows() == k && fix.cols() == n;
    let pivots_leading = shape_ok && fix.pivot_columns() == (0..k).collect::<Vec<_>>();
    let x_rank = if fix.cols() >= k { rank(&fix.columns(k.min(fix.cols()), fix.cols())) } else { 0 };
    let space = row_space(fix);
    let (member, nearest_distance, nearest_count) = if fix.cols() == n {
        let dists: Vec<usize> = book.words.iter().map(|w| subspace_distance(&space, &w.subspace)).collect();
        let best = dists.iter().copied().min().unwrap_or(0);
        (
            book.find(&space).map(|i| i as u32),
            best,
            dists.iter().filter(|&&d| d == best).count(),
        )
    } else {
        (None, 0, 0)
    };
    FixtureReport {
        shape_ok,
        is_rref: fix.is_rref(),
        pivots_leading,
        rank: space.dim(),
        x_rank,
        dim: space.dim(),
        member,
        nearest_distance,
        nearest_count,
    }
}
