use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("genus mismatch: {0} vs {1}")]
    GenusMismatch(usize, usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid genus {0}: {1}")]
    InvalidGenus(usize, &'static str),
    #[error("invalid index pair [{0}|{1}]: inner product is odd")]
    OddIndexPair(String, String),
    #[error("period matrix is not symmetric: deviation {0:.3e}")]
    NotSymmetric(f64),
    #[error("imaginary part is not positive definite: min eigenvalue {0:.3e}")]
    NotPositiveDefinite(f64),
    #[error(
        "tail target {target:.3e} unreachable within radius cap {cap}: achieved {achieved:.3e}"
    )]
    TailTargetUnreachable {
        target: f64,
        achieved: f64,
        cap: u32,
    },
    #[error("subset parity formula inapplicable: #(T\u{2218}U) - g - 1 = {0} is odd")]
    ParityFormulaInapplicable(i64),
    #[error("branch points invalid: {0}")]
    BadBranchPoints(String),
    #[error("quadrature did not converge: residual {0:.3e}")]
    QuadratureNonConvergence(f64),
    #[error("matrix is not symplectic")]
    NotSymplectic,
    #[error("c*tau + d is numerically singular (|det| = {0:.3e})")]
    SingularCocycle(f64),
    #[error("polynomial is not K-invariant")]
    NotKInvariant,
    #[error("mixed degrees in rank computation")]
    MixedDegrees,
    #[error("exact rank backends disagree: bareiss {bareiss}, modular {modular}")]
    RankBackendMismatch { bareiss: usize, modular: usize },
    #[error("relation vector is not in the kernel: expansion has {0} nonzero terms")]
    NotInKernel(usize),
    #[error("no sign vector with the required support expands to zero")]
    NoKernelWitness,
    #[error("classification verdict is not consistent-hyperelliptic")]
    NotClassified,
    #[error("transport search exhausted at word length {cap}; best match {matched}/{target}")]
    TransportExhausted {
        cap: usize,
        matched: usize,
        target: usize,
    },
    #[error("vanishing pattern does not match the standard one")]
    NonStandardPattern,
    #[error("z constraint violated: |sum z_i| = {0:.3e}")]
    ZSumViolation(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
