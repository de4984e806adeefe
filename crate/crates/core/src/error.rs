use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("the origin has no bisector with itself")]
    OriginGenerator,
    #[error("polygon needs at least 3 non-collinear vertices, got {0}")]
    DegeneratePolygon(usize),
    #[error("polygon vertices are not in strictly convex counterclockwise order")]
    NotConvex,
    #[error("window half-width must be at least 1, got {0}")]
    InvalidWindow(i64),
    #[error("scale must be positive, got {0}")]
    InvalidScale(i64),
    #[error("perturbation strength {q} must satisfy 0 <= q <= p/2 with p = {p}")]
    InvalidStrength { q: i64, p: i64 },
    #[error("strength tau must satisfy 0 <= tau < 1/2, got {0}")]
    InvalidTau(String),
    #[error("point {0} lies on a bisector")]
    OnBisector(String),
    #[error("point {point} has depth {depth}, expected {expected}")]
    WrongZone {
        point: String,
        depth: usize,
        expected: usize,
    },
    #[error("cannot invert the origin")]
    InvertOrigin,
    #[error("generator set is empty")]
    EmptyGenerators,
    #[error("clip half-width must be positive")]
    InvalidClip,
    #[error("direction must be nonzero")]
    ZeroDirection,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("radius must be positive")]
    InvalidRadius,
    #[error("snapping failed for generator {0:?}")]
    SnapFailed([i64; 2]),
    #[error("perturbed images collide at {0:?}")]
    Collision([i64; 2]),
}

pub type Result<T> = std::result::Result<T, Error>;
