use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("symbol `{0}` has arity 0; every function symbol needs arity >= 1")]
    ZeroArity(String),
    #[error("duplicate symbol name `{0}`")]
    DuplicateSymbol(String),
    #[error("`id` must be unary, found arity {0}")]
    BadIdArity(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("point {0} is not a point of the model")]
    PointOutOfRange(u32),
    #[error("point map has {got} entries, model has {want} points")]
    PointMapLength { got: usize, want: usize },
    #[error("point map is not order preserving at points {0} and {1}")]
    NotOrderPreserving(u32, u32),
    #[error("vocabularies of source and target differ")]
    VocabularyMismatch,
    #[error("image of element {element} is not an element of the target ({reason})")]
    InadmissibleImage { element: String, reason: String },
    #[error("alphabet sequence has {got} entries, vocabulary has {want} symbols")]
    AlphabetLength { got: usize, want: usize },
    #[error("alphabet of symbol `{0}` is empty")]
    EmptyAlphabet(String),
    #[error("letter {letter} is outside the alphabet of `{symbol}`")]
    LetterOutOfRange { symbol: String, letter: u32 },
    #[error("type is not a member of the line's type set")]
    TypeNotInLine,
    #[error("space has too many points to index ({0})")]
    SpaceTooLarge(String),
    #[error("colouring does not match the space: {0}")]
    ColouringMismatch(String),
    #[error("invalid subspace: {0}")]
    InvalidSubspace(String),
    #[error("invalid line: {0}")]
    InvalidLine(String),
    #[error("vocabulary `{0}` is not monic")]
    NotMonic(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("colouring is not invariant: {0}")]
    NotInvariant(String),
    #[error("polynomial error: {0}")]
    Polynomial(String),
    #[error("budget exceeded after {examined} items")]
    Budget { examined: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
