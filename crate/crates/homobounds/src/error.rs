use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular or indefinite factor (smallest eigenvalue {min_eig:e})")]
    SingularFactor { min_eig: f64 },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("dimension {0} outside 1..=8")]
    BadDimension(usize),
    #[error("matrix is not symmetric (defect {0:e})")]
    NotSymmetric(f64),
    #[error("frame is not orthonormal (defect {0:e})")]
    NotOrthonormal(f64),
    #[error("invalid phase data: {0}")]
    InvalidPhase(String),
    #[error("degenerate volume fraction: tensor is not the pure phase")]
    DegenerateTheta,
    #[error("tensor lies outside the G-closure")]
    OutsideGSet,
    #[error("no root bracketed in [{0}, {1}]")]
    NoBracket(f64, f64),
    #[error("overlap fraction {value} outside [{lower}, {upper}]")]
    OverlapOutOfWindow { value: f64, lower: f64, upper: f64 },
    #[error("inconsistent laminate spec: {0}")]
    InconsistentSpec(String),
    #[error("relation {0} incompatible with the volume fractions")]
    RegionMismatch(String),
    #[error("bounds chain violated at link {link} (slack {slack:e})")]
    ChainViolation { link: usize, slack: f64 },
    #[error("incompatible volume fractions for coating: {0}")]
    IncompatibleVolumes(String),
    #[error("geometry not representable radially: {0}")]
    UnsupportedGeometry(String),
    #[error("target {target} outside [{lower}, {upper}]")]
    TargetOutsideInterval { target: f64, lower: f64, upper: f64 },
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error("pair not in region {0}")]
    NotInRegion(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
